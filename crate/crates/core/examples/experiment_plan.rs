//! A short strength sweep driven by a TOML plan with command-line style
//! overrides, written as CSV.

use rabi_sim::experiment::{run_sweep, ExperimentPlan};

const PLAN: &str = r#"
variants = ["u2-photon"]
inputs = [{ kind = "coherent", beta = 1.0 }]
setup.dims.u = 30
setup.dims.u_prime = 40

[grid]
start = 0.0
stop = 0.3
step = 0.1
"#;

pub fn run() -> rabi_sim::Result<()> {
    let out = std::env::temp_dir().join(format!("rabi-sim-example-{}", std::process::id()));
    let plan = ExperimentPlan::from_toml(PLAN, &[format!("out=\"{}\"", out.display()), "setup.partner=vacuum".into()])?;
    let (path, rows) = run_sweep(&plan)?;
    for r in &rows {
        println!("t {:<4} F_Rabi {:.6} F_JC {:.6} P {:.5}", r.t, r.f_rabi.unwrap_or(f64::NAN), r.f_jc.unwrap_or(f64::NAN), r.p_success.unwrap_or(f64::NAN));
    }
    println!("{}", std::fs::read_to_string(&path)?.lines().nth(1).unwrap_or_default());
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
