//! Cubical pairs on a uniform box and their relative homology over GF(2).
//!
//! Cells of a box with `r` cells per axis are addressed by doubled
//! coordinates in `{0, …, 2r}ⁿ`: an odd coordinate means the cell spans that
//! axis, so the cell dimension is the number of odd coordinates. The same
//! lattice doubles as the sample grid (vertices, edge midpoints, centers).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScalarFunction;
use crate::error::{Error, Result};

/// Ranks of relative homology groups over GF(2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiVector {
    /// Indexed by degree `q = 0..=n`.
    pub ranks: Vec<usize>,
    /// Agreement across two resolutions; `true` for a single computation.
    pub stable: bool,
    /// Coarse-resolution ranks when they differ from `ranks`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_ranks: Option<Vec<usize>>,
}

impl BettiVector {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self {
            ranks,
            stable: true,
            coarse_ranks: None,
        }
    }

    /// `δ_{q,degree}` in dimension `dim`.
    pub fn delta(degree: usize, dim: usize) -> Self {
        let mut ranks = vec![0; dim.max(degree) + 1];
        ranks[degree] = 1;
        Self::new(ranks)
    }

    /// Rank in degree `q`, zero outside the stored range.
    pub fn rank(&self, q: isize) -> usize {
        if q < 0 {
            0
        } else {
            self.ranks.get(q as usize).copied().unwrap_or(0)
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ranks
            .iter()
            .enumerate()
            .map(|(q, &r)| if q % 2 == 0 { r as i64 } else { -(r as i64) })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.iter().all(|&r| r == 0)
    }

    /// `ranks[q] == other.ranks[q − shift]` for every `q`.
    pub fn matches_shifted(&self, other: &BettiVector, shift: usize) -> bool {
        let top = self.ranks.len().max(other.ranks.len() + shift);
        (0..top as isize).all(|q| self.rank(q) == other.rank(q - shift as isize))
    }

    /// Errors when the two resolutions disagreed.
    pub fn require_stable(&self, coarse: usize, fine: usize) -> Result<&Self> {
        if self.stable {
            Ok(self)
        } else {
            Err(Error::Unstable {
                coarse,
                fine,
                coarse_ranks: self.coarse_ranks.clone().unwrap_or_default(),
                fine_ranks: self.ranks.clone(),
            })
        }
    }
}

/// Rules turning samples into a cubical pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicalOptions {
    /// Slack added to the level, relative to `max(1, |level|)`.
    pub smoothing_eps: f64,
    /// Excision radius as a fraction of the box half-width.
    pub excision_fraction: f64,
}

impl Default for CubicalOptions {
    fn default() -> Self {
        Self {
            smoothing_eps: 1e-12,
            excision_fraction: 0.5,
        }
    }
}

/// Doubled-coordinate lattice of a box with `r` cells per axis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lattice {
    pub dim: usize,
    pub resolution: usize,
    side: usize,
}

impl Lattice {
    pub fn new(dim: usize, resolution: usize) -> Self {
        Self {
            dim,
            resolution,
            side: 2 * resolution + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn top_len(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.side.pow(axis as u32)
    }

    pub fn coords(&self, mut idx: usize) -> [usize; 4] {
        let mut c = [0; 4];
        for slot in c.iter_mut().take(self.dim) {
            *slot = idx % self.side;
            idx /= self.side;
        }
        c
    }

    pub fn cell_dim(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        c[..self.dim].iter().filter(|&&x| x % 2 == 1).count()
    }

    /// Lattice index of the top cell with multi-index from `t`.
    pub fn top_cell(&self, mut t: usize) -> usize {
        let mut idx = 0;
        for axis in 0..self.dim {
            let k = t % self.resolution;
            t /= self.resolution;
            idx += (2 * k + 1) * self.stride(axis);
        }
        idx
    }

    /// All lattice points in the closure of a top cell.
    pub fn closure_of_top(&self, top: usize) -> impl Iterator<Item = usize> + '_ {
        let count = 3usize.pow(self.dim as u32);
        (0..count).map(move |mut o| {
            let mut idx = top;
            for axis in 0..self.dim {
                let d = o % 3;
                o /= 3;
                idx = idx + d * self.stride(axis) - self.stride(axis);
            }
            idx
        })
    }

    /// Codimension-one faces of a cell.
    pub fn faces(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(idx);
        (0..self.dim)
            .filter(move |&a| c[a] % 2 == 1)
            .flat_map(move |a| [idx - self.stride(a), idx + self.stride(a)])
    }

    /// Physical position of a lattice point.
    pub fn point(&self, idx: usize, lower: &[f64], upper: &[f64]) -> Vec<f64> {
        let c = self.coords(idx);
        (0..self.dim)
            .map(|a| lower[a] + (upper[a] - lower[a]) * c[a] as f64 / (2 * self.resolution) as f64)
            .collect()
    }
}

/// Values of `f` on every lattice point of the box.
pub(crate) fn sample_lattice(f: &dyn ScalarFunction, lattice: &Lattice, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    (0..lattice.len())
        .into_par_iter()
        .map(|i| f.value(&lattice.point(i, lower, upper)))
        .collect()
}

/// Top cells whose sampled minimum is at most `threshold`; NaN samples never qualify.
pub(crate) fn sublevel_top_cells(samples: &[f64], lattice: &Lattice, threshold: f64) -> Vec<bool> {
    (0..lattice.top_len())
        .into_par_iter()
        .map(|t| {
            lattice
                .closure_of_top(lattice.top_cell(t))
                .any(|i| samples[i] <= threshold)
        })
        .collect()
}

fn closure(lattice: &Lattice, top: &[bool]) -> Vec<bool> {
    let mut mask = vec![false; lattice.len()];
    for (t, _) in top.iter().enumerate().filter(|(_, &m)| m) {
        for i in lattice.closure_of_top(lattice.top_cell(t)) {
            mask[i] = true;
        }
    }
    mask
}

/// A pair `(A, B)` of closed cubical complexes in a box, `B ⊆ A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicalPair {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Cells per axis.
    pub resolution: usize,
    /// Cells of `A`, indexed by doubled coordinates.
    pub subcomplex_mask: Vec<bool>,
    /// Cells of `B`.
    pub excision_mask: Vec<bool>,
    pub level: f64,
}

impl CubicalPair {
    pub(crate) fn lattice(&self) -> Lattice {
        Lattice::new(self.dim, self.resolution)
    }

    fn check_box(dim: usize, resolution: usize, lower: &[f64], upper: &[f64]) -> Result<()> {
        if !(1..=super::MAX_MODEL_DIM).contains(&dim) {
            return Err(Error::InvalidPair(format!("dimension {dim} outside 1..=4")));
        }
        if resolution == 0 {
            return Err(Error::InvalidPair("resolution must be positive".into()));
        }
        if lower.len() != dim || upper.len() != dim || lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidPair("box bounds must satisfy lower < upper on every axis".into()));
        }
        Ok(())
    }

    /// Pair from explicit cell masks; validated for closedness and inclusion.
    pub fn from_masks(
        dim: usize,
        resolution: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        subcomplex_mask: Vec<bool>,
        excision_mask: Vec<bool>,
        level: f64,
    ) -> Result<Self> {
        Self::check_box(dim, resolution, &lower, &upper)?;
        let pair = Self {
            dim,
            lower,
            upper,
            resolution,
            subcomplex_mask,
            excision_mask,
            level,
        };
        pair.validate()?;
        Ok(pair)
    }

    /// Pair generated by closing two sets of top cells (indexed `0..rⁿ`).
    pub fn from_top_cells(
        dim: usize,
        resolution: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        subcomplex_top: &[bool],
        excision_top: &[bool],
        level: f64,
    ) -> Result<Self> {
        Self::check_box(dim, resolution, &lower, &upper)?;
        let lattice = Lattice::new(dim, resolution);
        if subcomplex_top.len() != lattice.top_len() || excision_top.len() != lattice.top_len() {
            return Err(Error::InvalidPair(format!(
                "expected {} top cells per mask",
                lattice.top_len()
            )));
        }
        if excision_top.iter().zip(subcomplex_top).any(|(&e, &s)| e && !s) {
            return Err(Error::InvalidPair("excised top cell outside the subcomplex".into()));
        }
        Ok(Self {
            dim,
            subcomplex_mask: closure(&lattice, subcomplex_top),
            excision_mask: closure(&lattice, excision_top),
            lower,
            upper,
            resolution,
            level,
        })
    }

    /// Sublevel pair of `f` around the box center at `level`: `A` holds the
    /// top cells whose sampled minimum is at most the level, `B` those cells
    /// of `A` whose centers lie outside the excision ball.
    pub(crate) fn sublevel_from_samples(
        samples: &[f64],
        center: &[f64],
        radius: f64,
        resolution: usize,
        level: f64,
        options: &CubicalOptions,
    ) -> Result<Self> {
        let dim = center.len();
        let lower: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let upper: Vec<f64> = center.iter().map(|c| c + radius).collect();
        let lattice = Lattice::new(dim, resolution);
        let threshold = level + options.smoothing_eps * level.abs().max(1.0);
        let sub_top = sublevel_top_cells(samples, &lattice, threshold);
        if !sub_top.iter().any(|&s| s) {
            return Err(Error::InvalidPair(format!("sublevel set at {level} is empty in the box")));
        }
        let rho = options.excision_fraction * radius;
        let exc_top: Vec<bool> = (0..lattice.top_len())
            .map(|t| {
                sub_top[t] && {
                    let p = lattice.point(lattice.top_cell(t), &lower, &upper);
                    p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() > rho
                }
            })
            .collect();
        Self::from_top_cells(dim, resolution, lower, upper, &sub_top, &exc_top, level)
    }

    /// `(box, f_α ∩ box)` with `f_α` approximated by sampled minima.
    pub(crate) fn infinity_from_samples(
        samples: &[f64],
        center: &[f64],
        radius: f64,
        resolution: usize,
        alpha: f64,
    ) -> Result<Self> {
        let dim = center.len();
        let lower: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let upper: Vec<f64> = center.iter().map(|c| c + radius).collect();
        let lattice = Lattice::new(dim, resolution);
        let all = vec![true; lattice.top_len()];
        let low = sublevel_top_cells(samples, &lattice, alpha);
        Self::from_top_cells(dim, resolution, lower, upper, &all, &low, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let lattice = self.lattice();
        if self.subcomplex_mask.len() != lattice.len() || self.excision_mask.len() != lattice.len() {
            return Err(Error::InvalidPair(format!("expected masks of length {}", lattice.len())));
        }
        for i in 0..lattice.len() {
            if self.excision_mask[i] && !self.subcomplex_mask[i] {
                return Err(Error::InvalidPair(format!("excised cell {i} outside the subcomplex")));
            }
            for (mask, name) in [(&self.subcomplex_mask, "subcomplex"), (&self.excision_mask, "excision")] {
                if mask[i] && lattice.faces(i).any(|f| !mask[f]) {
                    return Err(Error::InvalidPair(format!("{name} mask is not closed at cell {i}")));
                }
            }
        }
        Ok(())
    }

    /// Number of cells of `A` not in `B`, the size of the relative complex.
    pub fn relative_cell_count(&self) -> usize {
        self.subcomplex_mask
            .iter()
            .zip(&self.excision_mask)
            .filter(|(&a, &b)| a && !b)
            .count()
    }
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `H_q(A, B; GF(2))` by column reduction of the relative boundary matrices,
/// top degree first so that pivot rows clear columns one degree down.
pub fn relative_homology_z2(pair: &CubicalPair) -> Result<BettiVector> {
    pair.validate()?;
    let lattice = pair.lattice();
    let n = pair.dim;
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut position = vec![u32::MAX; lattice.len()];
    for i in 0..lattice.len() {
        if pair.subcomplex_mask[i] && !pair.excision_mask[i] {
            let d = lattice.cell_dim(i);
            position[i] = by_dim[d].len() as u32;
            by_dim[d].push(i);
        }
    }
    // rank[q] = rank of the boundary map from degree q to q − 1.
    let mut rank = vec![0usize; n + 2];
    let mut cleared: Vec<bool> = vec![false; by_dim[n].len()];
    for q in (1..=n).rev() {
        let rows = by_dim[q - 1].len();
        let mut owner: Vec<u32> = vec![u32::MAX; rows];
        let mut reduced: Vec<Vec<u32>> = Vec::new();
        let mut next_cleared = vec![false; rows];
        for (j, &cell) in by_dim[q].iter().enumerate() {
            if cleared[j] {
                continue;
            }
            let mut col: Vec<u32> = lattice
                .faces(cell)
                .filter_map(|f| (position[f] != u32::MAX).then_some(position[f]))
                .collect();
            col.sort_unstable();
            while let Some(&low) = col.last() {
                let o = owner[low as usize];
                if o == u32::MAX {
                    break;
                }
                col = symmetric_difference(&col, &reduced[o as usize]);
            }
            if let Some(&low) = col.last() {
                owner[low as usize] = reduced.len() as u32;
                next_cleared[low as usize] = true;
                reduced.push(col);
            }
        }
        rank[q] = reduced.len();
        cleared = next_cleared;
    }
    let ranks = (0..=n)
        .map(|q| by_dim[q].len() - rank[q] - rank[q + 1])
        .collect();
    Ok(BettiVector::new(ranks))
}
