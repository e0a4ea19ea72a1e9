//! Ideal Rabi and Jaynes-Cummings evolutions: energy and entanglement of
//! `|0>_d|0>_u` and of a coherent input.

use rabi_sim::metrics::{energy, fidelity, negativity};
use rabi_sim::fock::ModeLabel;
use rabi_sim::setups::{ideal_jc, ideal_rabi, process_output, CvInput, QubitInput};

pub fn run() -> rabi_sim::Result<()> {
    let dim = 30;
    let vac = CvInput::Vacuum.state(dim)?;
    let coh = CvInput::Coherent { beta: 1.0 }.state(dim)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>8}", "t", "E_rabi", "N_rabi", "E_jc", "N_jc", "F(R,JC)");
    for t in [0.25, 0.5, 0.7, 1.0, 1.5] {
        let r = process_output(&ideal_rabi(dim, t)?, &vac, &QubitInput::Zero, 2)?;
        let rc = process_output(&ideal_rabi(dim, t)?, &coh, &QubitInput::Zero, 2)?;
        let jc = process_output(&ideal_jc(dim, t)?, &coh, &QubitInput::Zero, 2)?;
        println!(
            "{t:>5} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>8.4}",
            energy(&r)?,
            negativity(&r, ModeLabel::D)?,
            energy(&jc)?,
            negativity(&jc, ModeLabel::D)?,
            fidelity(&rc, &jc)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
