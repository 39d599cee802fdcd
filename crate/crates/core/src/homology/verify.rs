//! Verifiers comparing homological invariants of a model with those of its
//! reduction, plus the Morse inequalities and the Künneth product rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::catalog::{KunnethEntry, TheoremAVariant};
use super::cubical::BettiVector;
use super::groups::{
    brouwer_index, critical_groups, critical_groups_at_infinity, isolation_check, HomologyOptions, IndexOptions,
    IndexReport,
};
use super::{ModelFunctional, ReducedModel};
use crate::error::{Error, Result};
use crate::reduction::{verify_condition, ConditionReport, ModelSplitFunctional, PairSampler};
use crate::spectral::SplitSide;

/// Uniform JSON record for every verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub model_id: String,
    pub operation: String,
    pub betti: BTreeMap<String, Vec<usize>>,
    pub mu: Option<usize>,
    pub holds: bool,
    pub resolutions: [usize; 2],
    pub stable: bool,
}

fn resolutions(options: &HomologyOptions) -> [usize; 2] {
    [options.coarse_resolution, options.fine_resolution]
}

/// Checks the side and samples the monotonicity condition on the model split.
fn reduce(model: &ModelFunctional, side: SplitSide, radius: f64) -> Result<(ReducedModel, ConditionReport, usize)> {
    let split = model
        .split()
        .ok_or_else(|| Error::InvalidArgument(format!("model `{}` has no split", model.id())))?;
    if split.side != side {
        return Err(Error::InvalidArgument(format!(
            "model `{}` is split for {:?}, expected {:?}",
            model.id(),
            split.side,
            side
        )));
    }
    let mu = split.mu();
    let system = ModelSplitFunctional::from_model(model.clone())?;
    let condition = verify_condition(
        &system,
        &PairSampler {
            samples: 400,
            r_min: 1e-3 * radius,
            r_max: 2.0 * radius,
            seed: 0,
        },
    );
    if !condition.holds {
        return Err(Error::InvalidArgument(format!(
            "monotonicity condition fails on `{}` (sampled constant {:?}, witness {:?})",
            model.id(),
            condition.kappa_est,
            condition.witness
        )));
    }
    let reduced = ReducedModel::new(model, condition.kappa_est.unwrap_or(1.0))?;
    Ok((reduced, condition, mu))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftReport {
    pub model_id: String,
    pub mu: usize,
    pub reduced_point: Vec<f64>,
    pub full_point: Vec<f64>,
    pub betti_f: BettiVector,
    pub betti_phi: BettiVector,
    pub shift_holds: bool,
    pub stable: bool,
    pub kappa_est: Option<f64>,
    /// Both points were found isolated by the dense Newton search; when
    /// false the result stands as unverified rather than refuted.
    pub isolated: bool,
}

impl ShiftReport {
    pub fn record(&self, options: &HomologyOptions) -> VerificationRecord {
        VerificationRecord {
            model_id: self.model_id.clone(),
            operation: "shift".into(),
            betti: BTreeMap::from([
                ("f".to_string(), self.betti_f.ranks.clone()),
                ("phi".to_string(), self.betti_phi.ranks.clone()),
            ]),
            mu: Some(self.mu),
            holds: self.shift_holds,
            resolutions: resolutions(options),
            stable: self.stable,
        }
    }
}

/// `C_q(f, v̄ + ψ(v̄)) ≅ C_{q−μ}(φ, v̄)` on an `A⁻` split model.
pub fn verify_shift_theorem(
    model: &ModelFunctional,
    reduced_point: &[f64],
    options: &HomologyOptions,
) -> Result<ShiftReport> {
    let (reduced, condition, mu) = reduce(model, SplitSide::AMinusCase, options.box_radius)?;
    let full_point = reduced.full_point(reduced_point)?;
    let (f_side, phi_side) = rayon::join(
        || {
            let b = critical_groups(model, &full_point, options)?;
            Ok::<_, Error>((b, isolation_check(model, &full_point, options.box_radius).isolated))
        },
        || {
            let b = critical_groups(&reduced, reduced_point, options)?;
            Ok::<_, Error>((b, isolation_check(&reduced, reduced_point, options.box_radius).isolated))
        },
    );
    let (betti_f, iso_f) = f_side?;
    let (betti_phi, iso_phi) = phi_side?;
    Ok(ShiftReport {
        model_id: model.id().to_string(),
        mu,
        reduced_point: reduced_point.to_vec(),
        full_point,
        shift_holds: betti_f.matches_shifted(&betti_phi, mu),
        stable: betti_f.stable && betti_phi.stable,
        betti_f,
        betti_phi,
        kappa_est: condition.kappa_est,
        isolated: iso_f && iso_phi,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremAReport {
    pub model_id: String,
    pub variant: TheoremAVariant,
    pub mu: usize,
    pub shift: usize,
    pub betti_f: BettiVector,
    pub betti_phi: BettiVector,
    pub holds: bool,
    pub stable: bool,
    /// Sampled transversality on the box boundary, for groups at infinity.
    pub boundary_transverse: bool,
}

impl TheoremAReport {
    pub fn record(&self, options: &HomologyOptions) -> VerificationRecord {
        VerificationRecord {
            model_id: self.model_id.clone(),
            operation: format!("theorem_a_{}", self.variant.label()),
            betti: BTreeMap::from([
                ("f".to_string(), self.betti_f.ranks.clone()),
                ("phi".to_string(), self.betti_phi.ranks.clone()),
            ]),
            mu: Some(self.mu),
            holds: self.holds,
            resolutions: resolutions(options),
            stable: self.stable,
        }
    }
}

/// Compares groups of `f` and `φ` at infinity or at a critical point,
/// with shift `μ` for the `A⁻` statement at infinity and zero otherwise.
///
/// `point` is `v̄` for the point statement and the box center otherwise.
pub fn verify_theorem_a(
    model: &ModelFunctional,
    variant: TheoremAVariant,
    point: &[f64],
    alpha: f64,
    options: &HomologyOptions,
) -> Result<TheoremAReport> {
    let (reduced, _, mu) = reduce(model, variant.side(), options.box_radius)?;
    let full = reduced.full_point(point)?;
    let shift = if variant == TheoremAVariant::InfinityMinus { mu } else { 0 };
    let (betti_f, betti_phi, transverse) = match variant {
        TheoremAVariant::PointPlus => {
            let (f, phi) = rayon::join(
                || critical_groups(model, &full, options),
                || critical_groups(&reduced, point, options),
            );
            (f?, phi?, true)
        }
        _ => {
            let (f, phi) = rayon::join(
                || critical_groups_at_infinity(model, alpha, &full, options),
                || critical_groups_at_infinity(&reduced, alpha, point, options),
            );
            let (f, phi) = (f?, phi?);
            let transverse = f.boundary_transverse && phi.boundary_transverse;
            (f.betti, phi.betti, transverse)
        }
    };
    Ok(TheoremAReport {
        model_id: model.id().to_string(),
        variant,
        mu,
        shift,
        holds: betti_f.matches_shifted(&betti_phi, shift),
        stable: betti_f.stable && betti_phi.stable,
        betti_f,
        betti_phi,
        boundary_transverse: transverse,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexShiftReport {
    pub model_id: String,
    pub mu: usize,
    pub index_f: IndexReport,
    pub index_phi: IndexReport,
    /// `ind(∇f, v̄ + ψ(v̄)) = (−1)^μ ind(∇φ, v̄)`.
    pub holds: bool,
    /// Preimage counts agree with the alternating rank sums on both sides.
    pub methods_agree: bool,
    pub stable: bool,
}

impl IndexShiftReport {
    pub fn record(&self, options: &HomologyOptions) -> VerificationRecord {
        VerificationRecord {
            model_id: self.model_id.clone(),
            operation: "index_shift".into(),
            betti: BTreeMap::from([
                ("f".to_string(), self.index_f.betti.ranks.clone()),
                ("phi".to_string(), self.index_phi.betti.ranks.clone()),
            ]),
            mu: Some(self.mu),
            holds: self.holds && self.methods_agree,
            resolutions: resolutions(options),
            stable: self.stable,
        }
    }
}

pub fn verify_index_shift(
    model: &ModelFunctional,
    reduced_point: &[f64],
    homology: &HomologyOptions,
    index: &IndexOptions,
) -> Result<IndexShiftReport> {
    let (reduced, _, mu) = reduce(model, SplitSide::AMinusCase, homology.box_radius)?;
    let full = reduced.full_point(reduced_point)?;
    let (f, phi) = rayon::join(
        || brouwer_index(model, &full, homology, index),
        || brouwer_index(&reduced, reduced_point, homology, index),
    );
    let (index_f, index_phi) = (f?, phi?);
    let sign = if mu % 2 == 0 { 1 } else { -1 };
    Ok(IndexShiftReport {
        model_id: model.id().to_string(),
        mu,
        holds: index_f.index == sign * index_phi.index,
        methods_agree: index_f.agree && index_phi.agree,
        stable: index_f.betti.stable && index_phi.betti.stable,
        index_f,
        index_phi,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorseReport {
    pub model_id: String,
    /// `M_q`: summed critical group ranks over the supplied points.
    pub m_poly: Vec<usize>,
    /// `β_q`: groups at infinity.
    pub beta_poly: Vec<usize>,
    /// Quotient of `M − β` by `1 + t`.
    pub q_coeffs: Vec<i64>,
    pub remainder: i64,
    pub holds: bool,
    pub euler_consistent: bool,
    pub stable: bool,
    pub points: Vec<Vec<f64>>,
}

impl MorseReport {
    pub fn record(&self, options: &HomologyOptions) -> VerificationRecord {
        VerificationRecord {
            model_id: self.model_id.clone(),
            operation: "morse".into(),
            betti: BTreeMap::from([
                ("M".to_string(), self.m_poly.clone()),
                ("beta".to_string(), self.beta_poly.clone()),
            ]),
            mu: None,
            holds: self.holds,
            resolutions: resolutions(options),
            stable: self.stable,
        }
    }
}

/// `Σ M_q tᵠ = Σ β_q tᵠ + (1 + t) Q(t)` over the supplied critical points
/// of `f` in the box of half-width `radius` around `center`.
pub fn morse_inequality_check(
    model: &ModelFunctional,
    points: &[Vec<f64>],
    center: &[f64],
    radius: f64,
    options: &HomologyOptions,
) -> Result<MorseReport> {
    let n = model.dim();
    if points.is_empty() {
        return Err(Error::InvalidArgument("no critical points supplied".into()));
    }
    let mut m_poly = vec![0usize; n + 1];
    let mut stable = true;
    for (i, p) in points.iter().enumerate() {
        let nearest = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        let local = options.with_radius(options.box_radius.min(0.45 * nearest));
        let b = critical_groups(model, p, &local)?;
        stable &= b.stable;
        for (q, r) in b.ranks.iter().enumerate() {
            m_poly[q] += r;
        }
    }
    let min_value = points.iter().map(|p| model.value(p)).fold(f64::INFINITY, f64::min);
    let alpha = min_value - 1.0;
    let at_infinity = critical_groups_at_infinity(model, alpha, center, &options.with_radius(radius))?;
    stable &= at_infinity.betti.stable;
    let mut beta_poly = at_infinity.betti.ranks.clone();
    beta_poly.resize(n + 1, 0);

    let diff: Vec<i64> = (0..=n).map(|q| m_poly[q] as i64 - beta_poly[q] as i64).collect();
    let mut q_coeffs = vec![0i64; n];
    for q in 0..n {
        q_coeffs[q] = diff[q] - if q > 0 { q_coeffs[q - 1] } else { 0 };
    }
    let remainder = diff[n] - if n > 0 { q_coeffs[n - 1] } else { 0 };
    let holds = remainder == 0 && q_coeffs.iter().all(|&c| c >= 0);
    let euler = |v: &[usize]| -> i64 {
        v.iter()
            .enumerate()
            .map(|(q, &r)| if q % 2 == 0 { r as i64 } else { -(r as i64) })
            .sum()
    };
    Ok(MorseReport {
        model_id: model.id().to_string(),
        euler_consistent: euler(&m_poly) == euler(&beta_poly),
        m_poly,
        beta_poly,
        q_coeffs,
        remainder,
        holds,
        stable,
        points: points.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KunnethReport {
    pub model_id: String,
    pub betti_product: BettiVector,
    pub betti_first: BettiVector,
    pub betti_second: BettiVector,
    pub convolution: Vec<usize>,
    pub holds: bool,
    pub stable: bool,
}

impl KunnethReport {
    pub fn record(&self, options: &HomologyOptions) -> VerificationRecord {
        VerificationRecord {
            model_id: self.model_id.clone(),
            operation: "kunneth".into(),
            betti: BTreeMap::from([
                ("product".to_string(), self.betti_product.ranks.clone()),
                ("convolution".to_string(), self.convolution.clone()),
            ]),
            mu: None,
            holds: self.holds,
            resolutions: resolutions(options),
            stable: self.stable,
        }
    }
}

/// Groups of `g(x) + h(y)` at the origin against the convolution of the
/// factor groups.
pub fn kunneth_check(entry: &KunnethEntry, options: &HomologyOptions) -> Result<KunnethReport> {
    let origin = |f: &ModelFunctional| vec![0.0; f.dim()];
    let betti_product = critical_groups(&entry.product, &origin(&entry.product), options)?;
    let betti_first = critical_groups(&entry.first, &origin(&entry.first), options)?;
    let betti_second = critical_groups(&entry.second, &origin(&entry.second), options)?;
    let n = entry.product.dim();
    let convolution: Vec<usize> = (0..=n)
        .map(|q| {
            (0..=q)
                .map(|i| betti_first.rank(i as isize) * betti_second.rank((q - i) as isize))
                .sum()
        })
        .collect();
    Ok(KunnethReport {
        model_id: entry.product.id().to_string(),
        holds: (0..=n).all(|q| betti_product.rank(q as isize) == convolution[q]),
        stable: betti_product.stable && betti_first.stable && betti_second.stable,
        betti_product,
        betti_first,
        betti_second,
        convolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{double_well, dual_split_models, find_zeros, kunneth_models, shift_models, ZeroSearch};

    #[test]
    fn shift_battery() {
        let opts = HomologyOptions::default();
        for e in shift_models() {
            let r = verify_shift_theorem(&e.model, &e.reduced_point, &opts.with_radius(e.box_radius)).unwrap();
            assert!(r.shift_holds && r.stable && r.isolated, "{r:?}");
            assert!(!r.betti_f.is_zero());
            if e.model.id() == "monkey_fiber" {
                assert_eq!(r.betti_f.ranks, vec![0, 0, 2, 0]);
                assert_eq!(r.betti_phi.ranks, vec![0, 2, 0]);
            }
        }
    }

    #[test]
    fn theorem_a_battery() {
        let opts = HomologyOptions::default();
        for e in dual_split_models() {
            let v = e.variant.unwrap();
            let r = verify_theorem_a(&e.model, v, &e.reduced_point, e.alpha, &opts.with_radius(e.box_radius)).unwrap();
            assert!(r.holds && r.stable, "{r:?}");
            assert!(!r.betti_f.is_zero());
        }
    }

    #[test]
    fn index_battery() {
        let opts = HomologyOptions::default();
        for e in shift_models() {
            let r = verify_index_shift(&e.model, &e.reduced_point, &opts.with_radius(e.box_radius), &IndexOptions::default())
                .unwrap();
            assert!(r.holds && r.methods_agree, "{r:?}");
            if e.model.id() == "monkey_fiber" {
                assert_eq!((r.index_f.index, r.index_phi.index), (2, -2));
            }
        }
    }

    #[test]
    fn double_well_morse() {
        let f = double_well();
        let opts = HomologyOptions::default();
        let zeros: Vec<Vec<f64>> = find_zeros(&f, &[0.0, 0.0], 1.5, None, &ZeroSearch::default())
            .into_iter()
            .map(|z| z.point)
            .collect();
        assert_eq!(zeros.len(), 3);
        let r = morse_inequality_check(&f, &zeros, &[0.0, 0.0], 2.0, &opts).unwrap();
        assert_eq!(r.m_poly, vec![2, 1, 0]);
        assert_eq!(r.beta_poly, vec![1, 0, 0]);
        assert_eq!(r.q_coeffs, vec![1, 0]);
        assert!(r.holds && r.euler_consistent);
        for skip in 0..3 {
            let partial: Vec<Vec<f64>> = zeros.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, p)| p.clone()).collect();
            assert!(!morse_inequality_check(&f, &partial, &[0.0, 0.0], 2.0, &opts).unwrap().holds);
        }
    }

    #[test]
    fn kunneth_battery() {
        let opts = HomologyOptions::default();
        for e in kunneth_models() {
            let r = kunneth_check(&e, &opts).unwrap();
            assert!(r.holds && r.stable, "{r:?}");
        }
    }
}
