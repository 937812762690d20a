//! Verdict and robustness writers.
//!
//! CSV: `<stem>.verdict.csv` with `start,end,truth` rows and `<stem>.rho.csv`
//! with `time,rho` rows. JSON: one `<stem>.json` object per formula with keys
//! `line`, `formula`, `satisfied`, and when computed `verdict`
//! (`domain`, `segments`, `crossings`, `plateaus`) and `robustness`
//! (`tolerance`, `samples` of `{time, rho}`). Infinite robustness values are
//! written as the strings `"inf"` and `"-inf"`.

use std::path::{Path, PathBuf};

use scl_core::{Formula, RobustnessTrace, VerdictSignal};
use serde_json::{json, Value};

use crate::config::OutputFormat;
use crate::trace_io::write_atomic;

#[derive(Debug, Clone)]
pub struct FormulaResult {
    pub line: usize,
    pub formula: Formula,
    pub satisfied: bool,
    pub verdict: Option<VerdictSignal>,
    pub robustness: Option<RobustnessTrace>,
}

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(x.to_string())
    }
}

pub fn verdict_csv(v: &VerdictSignal) -> String {
    let mut out = String::from("start,end,truth\n");
    for (a, b, truth) in v.signal.segments() {
        out.push_str(&format!("{a},{b},{truth}\n"));
    }
    out
}

pub fn robustness_csv(r: &RobustnessTrace) -> String {
    let mut out = String::from("time,rho\n");
    for (t, v) in r.times.iter().zip(&r.values) {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

pub fn to_json(res: &FormulaResult) -> Value {
    let mut obj = json!({
        "line": res.line,
        "formula": res.formula.to_string(),
        "satisfied": res.satisfied,
    });
    if let Some(v) = &res.verdict {
        let (start, end) = v.signal.domain();
        obj["verdict"] = json!({
            "domain": [start, end],
            "segments": v.signal.segments().iter()
                .map(|&(a, b, truth)| json!({"start": a, "end": b, "truth": truth}))
                .collect::<Vec<_>>(),
            "crossings": v.crossings,
            "plateaus": v.plateaus.iter().map(|iv| json!([iv.start, iv.end])).collect::<Vec<_>>(),
        });
    }
    if let Some(r) = &res.robustness {
        obj["robustness"] = json!({
            "tolerance": r.tolerance,
            "samples": r.times.iter().zip(&r.values)
                .map(|(&t, &v)| json!({"time": t, "rho": num(v)}))
                .collect::<Vec<_>>(),
        });
    }
    obj
}

/// Writes the files for one formula into `dir` and returns their paths.
pub fn write_result(dir: &Path, res: &FormulaResult, format: OutputFormat) -> std::io::Result<Vec<PathBuf>> {
    let stem = format!("formula_{}", res.line);
    let mut written = Vec::new();
    match format {
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let text = serde_json::to_string_pretty(&to_json(res)).expect("json value");
            write_atomic(&path, text.as_bytes())?;
            written.push(path);
        }
        OutputFormat::Csv => {
            if let Some(v) = &res.verdict {
                let path = dir.join(format!("{stem}.verdict.csv"));
                write_atomic(&path, verdict_csv(v).as_bytes())?;
                written.push(path);
            }
            if let Some(r) = &res.robustness {
                let path = dir.join(format!("{stem}.rho.csv"));
                write_atomic(&path, robustness_csv(r).as_bytes())?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
