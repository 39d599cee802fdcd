use serde::Serialize;

use saddle_core::spectral::{Spectrum, SpectrumRow};

use super::full_spectrum;
use crate::output::{OutputDir, SCHEMA_VERSION};
use crate::{CliError, Context, Status};

#[derive(Serialize)]
struct CsvRow {
    schema_version: u32,
    index: usize,
    eigenvalue: f64,
    multiplicity: usize,
    cumulative_dim: usize,
    cluster_spread: f64,
    gap_to_next: Option<f64>,
}

impl From<&SpectrumRow> for CsvRow {
    fn from(r: &SpectrumRow) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            index: r.index,
            eigenvalue: r.eigenvalue,
            multiplicity: r.multiplicity,
            cumulative_dim: r.cumulative_dim,
            cluster_spread: r.cluster_spread,
            gap_to_next: r.gap_to_next,
        }
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    complete: bool,
    max_residual: f64,
    rows: Vec<SpectrumRow>,
}

impl From<&Spectrum> for SpectrumReport {
    fn from(s: &Spectrum) -> Self {
        Self {
            complete: s.is_complete(),
            max_residual: s.max_residual(),
            rows: s.table(),
        }
    }
}

/// Dimension counts entering the multiplicity inequalities.
#[derive(Serialize)]
struct Counts {
    k: usize,
    m: usize,
    lambda_k_inf: Option<f64>,
    lambda_m_0: Option<f64>,
    d_k_inf: Option<usize>,
    d_k_minus_1_inf: Option<usize>,
    d_m_0: Option<usize>,
    d_m_minus_1_0: Option<usize>,
}

#[derive(Serialize)]
struct EigenReport {
    normalization_factor: Option<f64>,
    ainf: SpectrumReport,
    /// Absent when the origin weight is not positive definite.
    a0: Option<SpectrumReport>,
    a0_note: Option<String>,
    counts: Counts,
}

pub fn eigen(ctx: &Context) -> Result<Status, CliError> {
    let config = ctx.config()?;
    let inst = config.build()?;
    let out = OutputDir::create(&ctx.out)?;
    let ainf = full_spectrum(&inst.grid, &inst.split_weight)?;
    let (a0, a0_note) = match full_spectrum(&inst.grid, &inst.model.a0) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (k, m) = (inst.model.k, inst.model.m);
    let counts = Counts {
        k,
        m,
        lambda_k_inf: ainf.eigenvalue(k).ok(),
        lambda_m_0: a0.as_ref().and_then(|s| s.eigenvalue(m).ok()),
        d_k_inf: ainf.cumulative_dims(k).ok(),
        d_k_minus_1_inf: ainf.cumulative_dims(k - 1).ok(),
        d_m_0: a0.as_ref().and_then(|s| s.cumulative_dims(m).ok()),
        d_m_minus_1_0: a0.as_ref().and_then(|s| s.cumulative_dims(m - 1).ok()),
    };
    let rows: Vec<CsvRow> = ainf.table().iter().map(CsvRow::from).collect();
    out.write_csv("spectrum_ainf.csv", &rows)?;
    if let Some(a0) = &a0 {
        let rows: Vec<CsvRow> = a0.table().iter().map(CsvRow::from).collect();
        out.write_csv("spectrum_a0.csv", &rows)?;
    }
    let report = EigenReport {
        normalization_factor: inst.normalization,
        ainf: (&ainf).into(),
        a0: a0.as_ref().map(Into::into),
        a0_note,
        counts,
    };
    let path = out.write_json("eigen.json", "eigen", &report)?;
    println!(
        "eigen: {} distinct eigenvalues of A_inf; d_k = {:?}, d_m(A0) = {:?}; wrote {}",
        ainf.len(),
        report.counts.d_k_inf,
        report.counts.d_m_0,
        path.display()
    );
    Ok(Status::Ok)
}
