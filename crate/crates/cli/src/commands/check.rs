use serde::Serialize;
use serde_json::{json, Value};

use saddle_core::functional::FunctionalHandle;
use saddle_core::problem::{
    check_gradient_consistency, check_infinity_sign, check_linear_growth, check_origin_sign,
    check_reduction_condition, spectral_gap_delta, MonotonicityBound,
};
use saddle_core::search::{local_linking_check, HypothesisSummary, LinkingSampler, TheoremCase};
use saddle_core::spectral::{build_split, linking_split};

use super::full_spectrum;
use crate::config::{derived_seed, Instance, RunConfig};
use crate::output::OutputDir;
use crate::{CliError, Context, Status};

#[derive(Debug, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub required: bool,
    pub holds: bool,
    pub message: Option<String>,
    pub evidence: Value,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub case: TheoremCase,
    pub verdict: String,
    pub hypotheses: Vec<Hypothesis>,
    pub summary: HypothesisSummary,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds || !h.required)
    }
}

fn evidence<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).unwrap_or(Value::Null)
}

/// Runs every checker the configured case requires.
pub fn run_checks(config: &RunConfig, inst: &Instance) -> Result<CheckReport, CliError> {
    let spec = config.sample_spec();
    let (grid, model) = (&inst.grid, &inst.model);
    let mut hypotheses = Vec::new();

    let growth = check_linear_growth(model, grid, &spec);
    hypotheses.push(Hypothesis {
        name: "growth".into(),
        required: true,
        holds: growth.holds,
        message: None,
        evidence: evidence(&growth),
    });
    let consistency = check_gradient_consistency(model, grid, &spec);
    hypotheses.push(Hypothesis {
        name: "gradient_consistency".into(),
        required: true,
        holds: consistency.holds,
        message: None,
        evidence: evidence(&consistency),
    });
    let mut summary = HypothesisSummary {
        growth: growth.holds && consistency.holds,
        ..HypothesisSummary::default()
    };

    let (Some(origin_sign), Some(infinity_sign)) = (config.case.origin_sign(), config.case.infinity_sign()) else {
        let verdict = if hypotheses.iter().all(|h| h.holds) { "pass" } else { "fail" };
        return Ok(CheckReport {
            case: config.case,
            verdict: verdict.into(),
            hypotheses,
            summary,
        });
    };

    let origin = check_origin_sign(model, origin_sign, grid, &spec);
    summary.origin_sign = origin.holds;
    hypotheses.push(Hypothesis {
        name: "origin_sign".into(),
        required: true,
        holds: origin.holds,
        message: (!origin.holds).then(|| origin.note.clone()),
        evidence: evidence(&origin),
    });
    let infinity = check_infinity_sign(model, infinity_sign, grid, &spec);
    summary.infinity_sign = infinity.holds;
    hypotheses.push(Hypothesis {
        name: "infinity_sign".into(),
        required: true,
        holds: infinity.holds,
        message: None,
        evidence: evidence(&infinity),
    });

    let beta = model.beta.clone().ok_or_else(|| {
        CliError::Usage(format!("case {:?} needs a monotonicity bound: set [beta] in the config", config.case))
    })?;
    let side = config.side();
    let bound = MonotonicityBound::for_side(side);
    let condition = check_reduction_condition(model, &beta, bound, grid, &spec)?;
    summary.reduction_condition = condition.holds;
    let message = (!condition.ordering_holds).then(|| match bound {
        MonotonicityBound::Lower => format!(
            "beta is not strictly above lambda_(k-1) A_inf = {} A_inf ({:?})",
            condition.comparison_eigenvalue, condition.ordering
        ),
        MonotonicityBound::Upper => format!(
            "beta is not strictly below lambda_(k+1) A_inf = {} A_inf ({:?})",
            condition.comparison_eigenvalue, condition.ordering
        ),
    });
    hypotheses.push(Hypothesis {
        name: "monotonicity_bound".into(),
        required: true,
        holds: condition.holds,
        message: message.or_else(|| (!condition.inequality_holds).then(|| "sampled monotonicity inequality fails".into())),
        evidence: evidence(&condition),
    });

    let spectrum = full_spectrum(grid, &inst.split_weight)?;
    let split = build_split(&spectrum, model.k, side)?;
    let gap = spectral_gap_delta(&beta, &split, grid);
    hypotheses.push(Hypothesis {
        name: "spectral_gap".into(),
        required: false,
        holds: gap.delta.is_none_or(|d| d > 0.0),
        message: gap.warning.clone(),
        evidence: evidence(&gap),
    });

    // Local linking at the origin, sampled on spheres of small radius.
    match full_spectrum(grid, &model.a0).and_then(|s| Ok(linking_split(&s, s.clustering_tol().max(1e-9))?)) {
        Ok(ls) => {
            let functional = FunctionalHandle::new(grid.clone(), model.clone())?;
            let sampler = LinkingSampler {
                seed: derived_seed(config.seed, 4),
                ..LinkingSampler::default()
            };
            let schedule: Vec<f64> = (0..6).map(|i| 1e-3 * 2f64.powi(i)).collect();
            let linking = local_linking_check(&functional, &ls, origin_sign, &schedule, &sampler);
            hypotheses.push(Hypothesis {
                name: "local_linking".into(),
                required: false,
                holds: linking.holds,
                message: None,
                evidence: evidence(&linking),
            });
        }
        Err(e) => hypotheses.push(Hypothesis {
            name: "local_linking".into(),
            required: false,
            holds: false,
            message: Some(e.to_string()),
            evidence: json!(null),
        }),
    }

    let passed = hypotheses.iter().all(|h| h.holds || !h.required);
    Ok(CheckReport {
        case: config.case,
        verdict: if passed { "pass" } else { "fail" }.into(),
        hypotheses,
        summary,
    })
}

pub fn check(ctx: &Context) -> Result<Status, CliError> {
    let config = ctx.config()?;
    let inst = config.build()?;
    let out = OutputDir::create(&ctx.out)?;
    let report = run_checks(config, &inst)?;
    let path = out.write_json("check.json", "check", &report)?;
    for h in &report.hypotheses {
        println!(
            "{:<22} {:<4} {}{}",
            h.name,
            if h.holds { "ok" } else { "FAIL" },
            if h.required { "required" } else { "informational" },
            h.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
        );
    }
    println!("check: {}; wrote {}", report.verdict, path.display());
    Ok(if report.passed() { Status::Ok } else { Status::Violation })
}
