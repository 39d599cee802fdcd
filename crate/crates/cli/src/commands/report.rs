use std::fs;

use serde::Serialize;
use serde_json::Value;

use crate::output::OutputDir;
use crate::{CliError, Context, Status};

#[derive(Serialize)]
struct Source {
    file: String,
    command: String,
    generated_at: String,
    summary: String,
}

#[derive(Serialize)]
struct Report {
    sources: Vec<Source>,
}

/// Strings without JSON quotes, everything else as JSON.
fn text(v: &Value) -> String {
    v.as_str().map_or_else(|| v.to_string(), str::to_string)
}

fn summarize(command: &str, v: &Value) -> String {
    match command {
        "eigen" => format!(
            "d_k(A_inf) = {}, d_m(A0) = {}",
            text(&v["counts"]["d_k_inf"]),
            text(&v["counts"]["d_m_0"])
        ),
        "check" => format!("case {}: {}", text(&v["case"]), text(&v["verdict"])),
        "solve" => format!(
            "{} nontrivial of {} records; prediction: {}",
            text(&v["observed_nontrivial"]),
            v["records"].as_array().map_or(0, Vec::len),
            text(&v["prediction"]["note"])
        ),
        "verify" => {
            let entries = v["entries"].as_array().cloned().unwrap_or_default();
            let holding = entries.iter().filter(|e| e["record"]["holds"] == Value::Bool(true)).count();
            format!("{}: {holding}/{} hold, {}", text(&v["suite"]), entries.len(), text(&v["status"]))
        }
        _ => String::new(),
    }
}

pub fn report(ctx: &Context) -> Result<Status, CliError> {
    let dir = fs::read_dir(&ctx.out)
        .map_err(|e| CliError::Usage(format!("cannot read output directory {}: {e}", ctx.out.display())))?;
    let mut files: Vec<_> = dir
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "report.json"))
        .collect();
    files.sort();
    let mut sources = Vec::new();
    for path in files {
        let Ok(text) = fs::read_to_string(&path) else { continue };
        let Ok(v) = serde_json::from_str::<Value>(&text) else { continue };
        let Some(command) = v["command"].as_str() else { continue };
        sources.push(Source {
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            command: command.to_string(),
            generated_at: v["generated_at"].as_str().unwrap_or_default().to_string(),
            summary: summarize(command, &v),
        });
    }
    if sources.is_empty() {
        return Err(CliError::Usage(format!("no outputs found in {}", ctx.out.display())));
    }
    for s in &sources {
        println!("{:<22} {:<8} {}", s.file, s.command, s.summary);
    }
    OutputDir::create(&ctx.out)?.write_json("report.json", "report", &Report { sources })?;
    Ok(Status::Ok)
}
