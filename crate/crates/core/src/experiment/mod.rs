//! Batch experiments behind the `rabi-sim` binary: plan loading, parameter
//! sweeps, steered Wigner functions, self-validation and single runs.

mod output;
mod plan;
mod single;
mod sweep;
mod validate;
mod wigner;

pub use output::{fmt_num, round12, write_rows};
pub use plan::{Command, ExperimentPlan, Format, TGrid, WignerPlan};
pub use single::{run_single, SingleReport};
pub use sweep::{run_sweep, sweep_row, sweep_rows};
pub use validate::{run_validate, Check, ValidationReport};
pub use wigner::{run_wigner, WignerProcess, WignerSummary};
