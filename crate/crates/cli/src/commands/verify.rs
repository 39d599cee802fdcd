use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use saddle_core::homology::{
    double_well, dual_split_models, find_zeros, kunneth_check, kunneth_models, morse_inequality_check, shift_models,
    verify_index_shift, verify_shift_theorem, verify_theorem_a, HomologyOptions, IndexOptions, VerificationRecord,
    ZeroSearch,
};
use saddle_core::Error;

use crate::output::{OutputDir, SCHEMA_VERSION};
use crate::{CliError, Context, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Shift,
    TheoremA,
    Index,
    Morse,
    Kunneth,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Shift => "shift",
            Suite::TheoremA => "theorem_a",
            Suite::Index => "index",
            Suite::Morse => "morse",
            Suite::Kunneth => "kunneth",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Shift, Suite::TheoremA, Suite::Index, Suite::Morse, Suite::Kunneth],
            s => vec![s],
        }
    }
}

/// One verifier run; `record` is absent when the verifier errored.
#[derive(Serialize)]
struct Entry {
    suite: Suite,
    model_id: String,
    record: Option<VerificationRecord>,
    error: Option<String>,
    unstable: bool,
    details: Value,
}

impl Entry {
    fn from_result<R: Serialize>(
        suite: Suite,
        model_id: &str,
        result: saddle_core::Result<R>,
        record: impl FnOnce(&R) -> VerificationRecord,
    ) -> Self {
        match result {
            Ok(r) => {
                let rec = record(&r);
                Self {
                    suite,
                    model_id: model_id.into(),
                    unstable: !rec.stable,
                    record: Some(rec),
                    error: None,
                    details: serde_json::to_value(&r).unwrap_or(Value::Null),
                }
            }
            Err(e) => Self {
                suite,
                model_id: model_id.into(),
                unstable: matches!(e, Error::Unstable { .. }),
                record: None,
                error: Some(e.to_string()),
                details: Value::Null,
            },
        }
    }

    fn holds(&self) -> bool {
        self.record.as_ref().is_some_and(|r| r.holds)
    }
}

#[derive(Serialize)]
struct Row {
    schema_version: u32,
    suite: &'static str,
    model: String,
    identity: String,
    holds: bool,
    stable: bool,
    error: String,
}

#[derive(Serialize)]
struct VerifyReport {
    suite: Suite,
    resolutions: [usize; 2],
    status: &'static str,
    entries: Vec<Entry>,
}

fn options(resolution: Option<usize>) -> Result<HomologyOptions, CliError> {
    let mut opts = HomologyOptions::default();
    if let Some(n) = resolution {
        if n % 4 != 0 || n < 32 {
            return Err(CliError::Usage(format!(
                "--resolution must be a multiple of 4 and at least 32, got {n}"
            )));
        }
        opts.fine_resolution = n;
        opts.coarse_resolution = n / 2;
    }
    Ok(opts)
}

fn run_suite(suite: Suite, opts: &HomologyOptions, index: &IndexOptions) -> Vec<Entry> {
    match suite {
        Suite::Shift => shift_models()
            .iter()
            .map(|e| {
                let o = opts.with_radius(e.box_radius);
                Entry::from_result(suite, e.model.id(), verify_shift_theorem(&e.model, &e.reduced_point, &o), |r| {
                    r.record(&o)
                })
            })
            .collect(),
        Suite::TheoremA => dual_split_models()
            .iter()
            .map(|e| {
                let o = opts.with_radius(e.box_radius);
                let variant = e.variant.expect("dual-split entries carry a variant");
                let result = verify_theorem_a(&e.model, variant, &e.reduced_point, e.alpha, &o);
                Entry::from_result(suite, e.model.id(), result, |r| r.record(&o))
            })
            .collect(),
        Suite::Index => shift_models()
            .iter()
            .map(|e| {
                let o = opts.with_radius(e.box_radius);
                let result = verify_index_shift(&e.model, &e.reduced_point, &o, index);
                Entry::from_result(suite, e.model.id(), result, |r| r.record(&o))
            })
            .collect(),
        Suite::Morse => {
            let f = double_well();
            let points: Vec<Vec<f64>> = find_zeros(&f, &[0.0, 0.0], 1.5, None, &ZeroSearch::default())
                .into_iter()
                .map(|z| z.point)
                .collect();
            let result = morse_inequality_check(&f, &points, &[0.0, 0.0], 2.0, opts);
            vec![Entry::from_result(suite, f.id(), result, |r| r.record(opts))]
        }
        Suite::Kunneth => kunneth_models()
            .iter()
            .map(|e| Entry::from_result(suite, e.product.id(), kunneth_check(e, opts), |r| r.record(opts)))
            .collect(),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

pub fn verify(ctx: &Context, suite: Suite) -> Result<Status, CliError> {
    let opts = options(ctx.resolution)?;
    let index = IndexOptions {
        seed: ctx.seed.or(ctx.config.as_ref().map(|c| c.seed)).unwrap_or(IndexOptions::default().seed),
        ..IndexOptions::default()
    };
    let out = OutputDir::create(&ctx.out)?;
    let entries: Vec<Entry> = suite
        .members()
        .into_iter()
        .flat_map(|s| run_suite(s, &opts, &index))
        .collect();

    // A violation on a stable result is definite; otherwise instability wins.
    let violated = entries.iter().any(|e| !e.holds() && !e.unstable);
    let unstable = entries.iter().any(|e| e.unstable);
    let status = if violated {
        Status::Violation
    } else if unstable {
        Status::Inconclusive
    } else {
        Status::Ok
    };
    let rows: Vec<Row> = entries
        .iter()
        .map(|e| Row {
            schema_version: SCHEMA_VERSION,
            suite: e.suite.name(),
            model: e.model_id.clone(),
            identity: e.record.as_ref().map_or_else(|| e.suite.name().to_string(), |r| r.operation.clone()),
            holds: e.holds(),
            stable: !e.unstable,
            error: e.error.clone().unwrap_or_default(),
        })
        .collect();
    let name = suite.name();
    out.write_csv(&format!("verify_{name}.csv"), &rows)?;
    println!("{:<12} {:<34} {:<16} {:<6} stable", "suite", "model", "identity", "holds");
    for r in &rows {
        println!("{:<12} {:<34} {:<16} {:<6} {}", r.suite, r.model, r.identity, r.holds, r.stable);
    }
    let report = VerifyReport {
        suite,
        resolutions: [opts.coarse_resolution, opts.fine_resolution],
        status: match status {
            Status::Ok => "holds",
            Status::Violation => "violated",
            Status::Inconclusive => "inconclusive",
        },
        entries,
    };
    let path = out.write_json(&format!("verify_{name}.json"), "verify", &report)?;
    println!("verify {name}: {}; wrote {}", report.status, path.display());
    Ok(status)
}
