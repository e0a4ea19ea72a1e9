//! Displacement, squeezing, beam splitter, X-X gate, two-mode squeezing and
//! photon loss on truncated modes.

use rabi_sim::fock::{DensityOperator, Mode, ModeLabel, C64};
use rabi_sim::gaussian::{beam_splitter, coherent_state, displacement, fock_state, loss_channel, qnd_xx, squeezing, tmsv_state};
use rabi_sim::metrics::energy;

pub fn run() -> rabi_sim::Result<()> {
    let dim = 20;
    let u = Mode::new(ModeLabel::U, dim);
    let vac = fock_state(u, 0)?;

    let coh = displacement(dim, C64::new(1.0, 0.0))?.apply(&vac)?;
    let direct = coherent_state(u, C64::new(1.0, 0.0))?;
    println!("|<D(1)0|1>|^2 = {:.10}", coh.inner(&direct)?.norm_sqr());

    let sq = squeezing(dim, 0.5)?.apply(&vac)?;
    println!("squeezed vacuum r=0.5: <0|S|0>^2 = {:.6} (1/cosh r = {:.6})", sq.amplitudes()[0].norm_sqr(), 1.0 / 0.5f64.cosh());

    let d = Mode::new(ModeLabel::D, 4);
    let one = fock_state(u, 1)?.tensor(&fock_state(d, 0)?)?;
    let split = beam_splitter(u, d, std::f64::consts::FRAC_PI_4)?.apply(&one)?;
    println!("50:50 splitter on |1,0>: |amp(1,0)|^2 = {:.3}", split.amplitude(&[1, 0])?.norm_sqr());

    let up = Mode::new(ModeLabel::UPrime, 6);
    let gate = qnd_xx(u, up, 0.1)?;
    println!("X-X gate interior unitarity defect: {:.2e}", gate.interior_unitarity_defect());

    let pair = tmsv_state(Mode::new(ModeLabel::DPrime, 6), Mode::new(ModeLabel::D, 6), 0.3)?;
    println!("TMSV lambda=0.3 norm^2 on 6 levels: {:.6}", pair.norm_sqr());

    let rho: DensityOperator = direct.normalize()?.0.to_density();
    let lossy = loss_channel(&rho, ModeLabel::U, 0.15)?;
    let n_in = energy_u(&rho)?;
    let n_out = energy_u(&lossy)?;
    println!("15% loss on a coherent state: <n> {n_in:.4} -> {n_out:.4}");
    Ok(())
}

fn energy_u(rho: &DensityOperator) -> rabi_sim::Result<f64> {
    let q = fock_state(Mode::new(ModeLabel::D, 2), 0)?.to_density();
    energy(&rho.tensor(&q)?)
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
