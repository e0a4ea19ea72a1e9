//! Steering `u` by projecting the qubit: Wigner negativity of the ideal
//! Rabi output of a thermal input, with and without photon loss.

use rabi_sim::fock::ModeLabel;
use rabi_sim::gaussian::loss_channel;
use rabi_sim::metrics::{wigner, GridSpec};
use rabi_sim::setups::{ideal_rabi, process_output, steer, CvInput, QubitInput, Steering};

pub fn run() -> rabi_sim::Result<()> {
    let dim = 30;
    let grid = GridSpec { nx: 61, np: 61, ..Default::default() };
    let input = CvInput::Thermal { nbar: 1.0 }.state(dim)?;
    let out = process_output(&ideal_rabi(dim, 0.7)?, &input, &QubitInput::Zero, 2)?;
    for gamma in [0.0, 0.15] {
        let lossy = loss_channel(&out, ModeLabel::U, gamma)?;
        for s in [Steering::P0, Steering::P1] {
            let (rho, p) = steer(&lossy, s)?;
            let w = wigner(&rho, grid)?;
            println!("loss {gamma}: {} with p = {p:.4}: min W = {:+.5}, integral {:.4}", s.label(), w.min(), w.normalization());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
