use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::plan::{ExperimentPlan, Format};
use super::output::write_rows;
use super::sweep::sweep_row;
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::setups::{run_setup, LeakageReport, Resolved, Steering};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleReport {
    pub row: MetricsRecord,
    pub resolved: Resolved,
    pub leakage: LeakageReport,
    /// Probabilities of the qubit projections P0, P1, P+, P-.
    pub steering: Vec<(String, f64)>,
}

/// One run of the plan's setup. Unlike a sweep, a numerical failure is
/// returned as an error.
pub fn run_single(plan: &ExperimentPlan) -> Result<(PathBuf, SingleReport)> {
    let cfg = &plan.setup;
    let res = run_setup(cfg)?;
    let row = sweep_row(cfg, cfg.variant, cfg.cv_input, cfg.t)?;
    if let Some(err) = &row.error {
        return Err(Error::TruncationRisk(err.clone()));
    }
    let steering = [Steering::P0, Steering::P1, Steering::PPlus, Steering::PMinus]
        .into_iter()
        .map(|s| {
            let p = match res.steer(s) {
                Ok((_, p)) => p,
                Err(Error::DegenerateHerald(p)) => p.max(0.0),
                Err(e) => return Err(e),
            };
            Ok((s.label(), super::round12(p.clamp(0.0, 1.0))))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = SingleReport { row: row.clone(), resolved: res.resolved, leakage: res.leakage, steering };
    let path = match plan.format {
        Format::Csv => write_rows(&plan.out, "single", plan, Format::Csv, &[row])?,
        Format::Json => {
            fs::create_dir_all(&plan.out)?;
            let plan_echo: serde_json::Value = serde_json::from_str(&plan.echo()?)?;
            let mut text = serde_json::to_string_pretty(&serde_json::json!({ "plan": plan_echo, "result": report }))?;
            text.push('\n');
            let p = plan.out.join("single.json");
            fs::write(&p, text)?;
            p
        }
    };
    Ok((path, report))
}
