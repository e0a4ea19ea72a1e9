//! The four heralded schemes at one strength: success probability, fidelity
//! with the ideal Rabi output and the qubit-steered states.

use rabi_sim::metrics::fidelity;
use rabi_sim::conditional::Partner;
use rabi_sim::setups::{ideal_rabi, process_output, run_setup, CvInput, Matching, SetupConfig, Steering, Variant};

pub fn run() -> rabi_sim::Result<()> {
    let t = 0.3;
    // the undetected port of the central splitter traced out, then projected on vacuum
    for (variant, partner) in Variant::ALL.into_iter().flat_map(|v| [(v, Partner::Trace), (v, Partner::Vacuum)]) {
        let mut cfg = SetupConfig { variant, t, partner, matching: Matching::Auto, cv_input: CvInput::Coherent { beta: 1.0 }, ..Default::default() };
        cfg.dims.u = 30;
        cfg.dims.u_prime = 40;
        let res = run_setup(&cfg)?;
        let input = cfg.cv_input.state(cfg.dims.u)?;
        let target = process_output(&ideal_rabi(cfg.dims.u, t)?, &input, &cfg.qubit_input, cfg.dims.d)?;
        let (_, p1) = res.steer(Steering::P1)?;
        println!(
            "{variant} {partner:?}: kappa {:.4}, P {:.5}, F_Rabi {:.6}, P(qubit=1) {:.4}",
            res.resolved.kappa,
            res.success_probability,
            fidelity(&target, &res.joint_state)?,
            p1
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
