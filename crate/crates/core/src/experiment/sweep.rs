use std::path::PathBuf;

use rayon::prelude::*;

use super::output::write_rows;
use super::plan::ExperimentPlan;
use crate::error::Result;
use crate::fock::{DensityOperator, ModeLabel};
use crate::metrics::{energy, fidelity, negativity, MetricsRecord};
use crate::setups::{ideal_jc, ideal_rabi, process_output, run_setup_on, CvInput, SetupConfig, Variant};

fn e_n(rho: &DensityOperator) -> Result<(f64, f64)> {
    Ok((energy(rho)?, negativity(rho, ModeLabel::D)?))
}

/// Setup and reference metrics of one `(variant, input, t)` point; a failing
/// setup run lands in the `error` column.
pub fn sweep_row(base: &SetupConfig, variant: Variant, input: CvInput, t: f64) -> Result<MetricsRecord> {
    let config = SetupConfig { variant, t, cv_input: input, ..base.clone() };
    config.validate()?;
    let (du, dd) = (config.dims.u, config.dims.d);
    let rho_in = input.state(du)?;
    let rabi = process_output(&ideal_rabi(du, t)?, &rho_in, &config.qubit_input, dd)?;
    let jc = process_output(&ideal_jc(du, config.tau())?, &rho_in, &config.qubit_input, dd)?;
    let (e_ideal_rabi, n_ideal_rabi) = e_n(&rabi)?;
    let (e_jc, n_jc) = e_n(&jc)?;
    let mut row = MetricsRecord {
        variant: variant.to_string(),
        input: input.label(),
        t,
        e_ideal_rabi,
        n_ideal_rabi,
        e_jc,
        n_jc,
        e_setup: None,
        n_setup: None,
        f_rabi: None,
        f_jc: None,
        p_success: None,
        error: None,
    };
    let outcome = run_setup_on(&rho_in, &config).and_then(|res| {
        let out = &res.joint_state;
        let (e, n) = e_n(out)?;
        Ok((e, n, fidelity(&rabi, out)?, fidelity(&jc, out)?, res.success_probability))
    });
    match outcome {
        Ok((e, n, fr, fj, p)) => {
            row.e_setup = Some(e);
            row.n_setup = Some(n);
            row.f_rabi = Some(fr);
            row.f_jc = Some(fj);
            row.p_success = Some(p);
        }
        Err(err) if err.is_numerical() || matches!(err, crate::Error::ConfigInconsistency(_)) => {
            row.error = Some(err.to_string());
        }
        Err(err) => return Err(err),
    }
    match row.clone().checked() {
        Ok(row) => Ok(row),
        Err(err) => {
            // out-of-range setup values stay out of the table
            row.e_setup = None;
            row.n_setup = None;
            row.f_rabi = None;
            row.f_jc = None;
            row.p_success = None;
            row.error = Some(err.to_string());
            row.checked()
        }
    }
}

/// All rows of the plan in `(variant, input, t)` order, computed in parallel.
pub fn sweep_rows(plan: &ExperimentPlan) -> Result<Vec<MetricsRecord>> {
    let ts = plan.grid.points()?;
    let mut jobs = Vec::new();
    for &v in &plan.variants {
        for &input in &plan.inputs {
            for &t in &ts {
                jobs.push((v, input, t));
            }
        }
    }
    jobs.into_par_iter().map(|(v, input, t)| sweep_row(&plan.setup, v, input, t)).collect()
}

/// Writes `sweep.csv` or `sweep.json` into the plan's output directory.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<(PathBuf, Vec<MetricsRecord>)> {
    let rows = sweep_rows(plan)?;
    let path = write_rows(&plan.out, "sweep", plan, plan.format, &rows)?;
    Ok((path, rows))
}
