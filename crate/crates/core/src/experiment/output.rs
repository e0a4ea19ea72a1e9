use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::plan::{ExperimentPlan, Format};
use crate::error::{Error, Result};

/// `v` rounded to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// Shortest round-trip text of `round12(v)`, in exponent form outside
/// `[1e-5, 1e15)`.
pub fn fmt_num(v: f64) -> String {
    let r = round12(v);
    let a = r.abs();
    if r == 0.0 || (1e-5..1e15).contains(&a) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Writes `rows` to `<dir>/<stem>.<ext>`. CSV files start with a
/// `# plan <json>` line; JSON files wrap the rows as `{"plan": …, "rows": […]}`.
pub fn write_rows<R: Serialize>(dir: &Path, stem: &str, plan: &ExperimentPlan, format: Format, rows: &[R]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let echo: serde_json::Value = serde_json::from_str(&plan.echo()?)?;
    let values: Vec<serde_json::Value> = rows.iter().map(|r| serde_json::to_value(r).map(round_value)).collect::<std::result::Result<_, _>>()?;
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "plan": echo, "rows": values });
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            fs::write(&path, text)?;
        }
        Format::Csv => {
            let mut file = fs::File::create(&path)?;
            writeln!(file, "# plan {}", serde_json::to_string(&echo)?)?;
            let mut w = csv::Writer::from_writer(file);
            let header: Vec<String> = match values.first() {
                Some(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
                _ => Vec::new(),
            };
            if !header.is_empty() {
                w.write_record(&header).map_err(csv_err)?;
            }
            for v in &values {
                let obj = v.as_object().ok_or_else(|| Error::Config("rows must serialize as records".into()))?;
                let rec: Vec<String> = header.iter().map(|k| cell(obj.get(k).unwrap_or(&serde_json::Value::Null))).collect();
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(path)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn cell(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

fn round_value(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().and_then(|f| serde_json::Number::from_f64(round12(f))).map(Value::Number).unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}
