use serde::Serialize;

use saddle_core::functional::FunctionalHandle;
use saddle_core::reduction::{
    coercivity_diagnostic, verify_condition, CoercivityReport, ConditionReport, PdeSplitFunctional, ReductionHandle,
};
use saddle_core::search::{
    find_critical_points, predict_multiplicity, CriticalPointRecord, MultiplicityPrediction, SearchDiagnostics,
    TheoremCase,
};
use saddle_core::spectral::build_split;

use super::check::run_checks;
use super::full_spectrum;
use crate::config::{derived_seed, RunConfig};
use crate::output::{OutputDir, SCHEMA_VERSION};
use crate::{CliError, Context, Status};

#[derive(Serialize)]
struct SolveReport<'a> {
    config: &'a RunConfig,
    hypotheses_passed: bool,
    forced: bool,
    condition: ConditionReport,
    kappa: f64,
    diagnostics: SearchDiagnostics,
    records: Vec<CriticalPointRecord>,
    observed_nontrivial: usize,
    prediction: MultiplicityPrediction,
    /// `None` when the theorem predicts nothing.
    prediction_satisfied: Option<bool>,
    coercivity: Option<CoercivityReport>,
}

#[derive(Serialize)]
struct RecordRow<'a> {
    schema_version: u32,
    rank: usize,
    value: f64,
    residual: f64,
    norm: f64,
    morse_index: usize,
    nullity: usize,
    trivial: bool,
    basin_seed: &'a str,
}

#[derive(Serialize)]
struct RayRow {
    schema_version: u32,
    radius: f64,
    min_restricted: f64,
    min_reduced: f64,
}

pub fn solve(ctx: &Context) -> Result<Status, CliError> {
    let config = ctx.config()?;
    let inst = config.build()?;
    let out = OutputDir::create(&ctx.out)?;

    let checks = run_checks(config, &inst)?;
    out.write_json("check.json", "check", &checks)?;
    let passed = checks.passed();
    if !passed && !ctx.force {
        let failed: Vec<&str> = checks
            .hypotheses
            .iter()
            .filter(|h| h.required && !h.holds)
            .map(|h| h.name.as_str())
            .collect();
        eprintln!("solve: required hypotheses fail ({}); rerun with --force to solve anyway", failed.join(", "));
        return Ok(Status::Violation);
    }

    let (k, m) = (inst.model.k, inst.model.m);
    let ainf = full_spectrum(&inst.grid, &inst.split_weight)?;
    let split = build_split(&ainf, k, config.side())?;
    let functional = FunctionalHandle::new(inst.grid.clone(), inst.model.clone())?;
    let system = PdeSplitFunctional::new(functional, split)?;
    let condition = verify_condition(&system, &config.pair_sampler());
    if !condition.holds {
        return Err(CliError::Violation(format!(
            "monotonicity condition fails on the split (sampled constant {:?}, witness {:?})",
            condition.kappa_est, condition.witness
        )));
    }
    let kappa = condition.kappa_est.unwrap_or(1.0);
    let handle = ReductionHandle::new(system, kappa)?
        .with_inner_tolerance(config.solver.inner_tol, config.solver.inner_max_iter);
    let outcome = find_critical_points(&handle, &config.strategy())?;

    let prediction = if config.case == TheoremCase::None {
        predict_multiplicity(TheoremCase::None, &ainf, m, &ainf, k, None)?
    } else {
        let a0 = full_spectrum(&inst.grid, &inst.model.a0)?;
        predict_multiplicity(config.case, &a0, m, &ainf, k, Some(&checks.summary))?
    };
    let observed = outcome.nontrivial().count();
    let prediction_satisfied = prediction.expected_nontrivial_at_least_two.then_some(observed >= 2);

    let coercivity = coercivity_diagnostic(
        &handle,
        config.sampling.rays,
        &config.sampling.ray_radii,
        0.0,
        None,
        derived_seed(config.seed, 3),
    )
    .ok();
    if let Some(c) = &coercivity {
        let rows: Vec<RayRow> = c
            .rows
            .iter()
            .map(|r| RayRow {
                schema_version: SCHEMA_VERSION,
                radius: r.radius,
                min_restricted: r.min_restricted,
                min_reduced: r.min_reduced,
            })
            .collect();
        out.write_csv("rays.csv", &rows)?;
    }

    let rows: Vec<RecordRow> = outcome
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| RecordRow {
            schema_version: SCHEMA_VERSION,
            rank: i + 1,
            value: r.value,
            residual: r.residual,
            norm: r.norm,
            morse_index: r.morse_index_reduced,
            nullity: r.nullity_reduced,
            trivial: r.trivial,
            basin_seed: &r.basin_seed,
        })
        .collect();
    out.write_csv("records.csv", &rows)?;
    drop(rows);

    let report = SolveReport {
        config,
        hypotheses_passed: passed,
        forced: ctx.force && !passed,
        condition,
        kappa,
        diagnostics: outcome.diagnostics,
        observed_nontrivial: observed,
        records: outcome.records,
        prediction,
        prediction_satisfied,
        coercivity,
    };
    let path = out.write_json("records.json", "solve", &report)?;
    for r in &report.records {
        println!(
            "value {:>14.6e}  residual {:.1e}  norm {:>10.4}  index {}  {}",
            r.value,
            r.residual,
            r.norm,
            r.morse_index_reduced,
            if r.trivial { "trivial" } else { "nontrivial" }
        );
    }
    println!(
        "solve: {observed} nontrivial records; prediction: {}; wrote {}",
        report.prediction.note,
        path.display()
    );
    Ok(match prediction_satisfied {
        Some(false) => Status::Violation,
        _ => Status::Ok,
    })
}
