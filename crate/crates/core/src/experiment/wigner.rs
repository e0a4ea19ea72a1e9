use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::{fmt_num, round12};
use super::plan::{ExperimentPlan, Format};
use crate::error::Result;
use crate::fock::DensityOperator;
use crate::metrics::{wigner, WignerGrid};
use crate::setups::{ideal_jc, ideal_rabi, process_output, run_setup_on, steer, SetupConfig, Steering, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WignerProcess {
    Input,
    Jc,
    IdealRabi,
    U2,
    U3,
    U3Loss,
}

impl WignerProcess {
    pub const ALL: [WignerProcess; 6] = [
        WignerProcess::Input,
        WignerProcess::Jc,
        WignerProcess::IdealRabi,
        WignerProcess::U2,
        WignerProcess::U3,
        WignerProcess::U3Loss,
    ];

    pub fn file_tag(self) -> &'static str {
        match self {
            WignerProcess::Input => "input",
            WignerProcess::Jc => "jc",
            WignerProcess::IdealRabi => "ideal_rabi",
            WignerProcess::U2 => "u2",
            WignerProcess::U3 => "u3",
            WignerProcess::U3Loss => "u3_loss",
        }
    }
}

/// Summary line of one grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerSummary {
    pub process: WignerProcess,
    pub projection: String,
    pub file: Option<String>,
    pub min: Option<f64>,
    pub normalization: Option<f64>,
    /// Largest spread at equal radius; absent for grids without a center.
    pub radial_spread: Option<f64>,
    /// Probability of the projection; absent for the input state, which is
    /// shown unprojected.
    pub probability: Option<f64>,
    pub warning: Option<String>,
    pub error: Option<String>,
}

/// Steered state of `u` for one process and projection, with the projection
/// probability.
pub fn steered_state(plan: &ExperimentPlan, process: WignerProcess, outcome: Steering) -> Result<(DensityOperator, Option<f64>)> {
    let w = &plan.wigner;
    let base = SetupConfig { t: w.t, cv_input: w.input, gamma: 0.0, ..plan.setup.clone() };
    base.validate()?;
    let (du, dd) = (base.dims.u, base.dims.d);
    let rho_in = w.input.state(du)?;
    let joint = match process {
        WignerProcess::Input => return Ok((rho_in, None)),
        WignerProcess::Jc => process_output(&ideal_jc(du, base.tau())?, &rho_in, &base.qubit_input, dd)?,
        WignerProcess::IdealRabi => process_output(&ideal_rabi(du, w.t)?, &rho_in, &base.qubit_input, dd)?,
        WignerProcess::U2 => run_setup_on(&rho_in, &SetupConfig { variant: Variant::U2Photon, ..base })?.joint_state,
        WignerProcess::U3 => run_setup_on(&rho_in, &SetupConfig { variant: Variant::U3Photon, ..base })?.joint_state,
        WignerProcess::U3Loss => run_setup_on(&rho_in, &SetupConfig { variant: Variant::U3Photon, gamma: w.loss, ..base })?.joint_state,
    };
    let (rho, p) = steer(&joint, outcome)?;
    Ok((rho, Some(p)))
}

fn write_grid(path: &Path, plan: &ExperimentPlan, grid: &WignerGrid) -> Result<()> {
    let mut text = String::new();
    match plan.format {
        Format::Csv => {
            text.push_str(&format!("# plan {}\n", plan.echo()?));
            text.push_str(&format!("# grid {}\n", serde_json::to_string(&grid.spec)?));
            for i in 0..grid.spec.nx {
                let row: Vec<String> = (0..grid.spec.np).map(|j| fmt_num(grid.values[(i, j)])).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
        }
        Format::Json => {
            let values: Vec<Vec<f64>> = (0..grid.spec.nx).map(|i| (0..grid.spec.np).map(|j| round12(grid.values[(i, j)])).collect()).collect();
            let plan_echo: serde_json::Value = serde_json::from_str(&plan.echo()?)?;
            let doc = serde_json::json!({ "plan": plan_echo, "grid": grid.spec, "values": values });
            text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Writes the twelve grids `wigner_<process>_<P0|P1>` (rows `x_i`, columns
/// `p_j`) and `wigner_summary.json`. A failing process is recorded in the
/// summary and the remaining grids are still produced.
pub fn run_wigner(plan: &ExperimentPlan) -> Result<Vec<WignerSummary>> {
    plan.wigner.grid.validate()?;
    fs::create_dir_all(&plan.out)?;
    let jobs: Vec<(WignerProcess, Steering)> = WignerProcess::ALL
        .iter()
        .flat_map(|&p| [(p, Steering::P0), (p, Steering::P1)])
        .collect();
    let mut summary = Vec::with_capacity(jobs.len());
    for (process, outcome) in jobs {
        let mut entry = WignerSummary {
            process,
            projection: outcome.label(),
            file: None,
            min: None,
            normalization: None,
            radial_spread: None,
            probability: None,
            warning: None,
            error: None,
        };
        let computed = steered_state(plan, process, outcome).and_then(|(rho, p)| {
            let rho_u = rho.partial_trace(&[crate::fock::ModeLabel::U])?;
            Ok((wigner(&rho_u, plan.wigner.grid)?, p))
        });
        match computed {
            Ok((grid, p)) => {
                let name = format!("wigner_{}_{}.{}", process.file_tag(), entry.projection, plan.format.extension());
                write_grid(&plan.out.join(&name), plan, &grid)?;
                entry.file = Some(name);
                entry.min = Some(round12(grid.min()));
                entry.normalization = Some(round12(grid.normalization()));
                entry.radial_spread = grid.radial_spread().ok().map(round12);
                entry.probability = p.map(|p| round12(p.clamp(0.0, 1.0)));
                entry.warning = grid.warning.clone();
            }
            Err(err) if err.is_numerical() || matches!(err, crate::Error::ConfigInconsistency(_)) => {
                entry.error = Some(err.to_string());
            }
            Err(err) => return Err(err),
        }
        summary.push(entry);
    }
    let plan_echo: serde_json::Value = serde_json::from_str(&plan.echo()?)?;
    let mut text = serde_json::to_string_pretty(&serde_json::json!({ "plan": plan_echo, "grids": summary }))?;
    text.push('\n');
    fs::write(plan.out.join("wigner_summary.json"), text)?;
    Ok(summary)
}
