//! Conditional maps on `u` produced by an X-X gate with an ancilla and a
//! photon-counting herald, compared with their closed forms.

use rabi_sim::conditional::{analytic_o0, analytic_o1, analytic_o3_ops, circuit_ops, circuit_prefactor, vacuum_transparent_filter};
use rabi_sim::fock::linalg::op_norm;
use rabi_sim::fock::C64;

pub fn run() -> rabi_sim::Result<()> {
    let zero = C64::new(0.0, 0.0);
    for kappa in [0.05, 0.1, 0.2] {
        let (o1, o0) = circuit_ops(25, 40, kappa, zero, 0.0)?;
        let a1 = analytic_o1(25, kappa, zero, 0.0)?.into_matrix().scale(circuit_prefactor(0.0));
        let a0 = analytic_o0(25, kappa, zero, 0.0)?.into_matrix().scale(circuit_prefactor(0.0));
        println!("kappa {kappa}: |O1 - closed form| = {:.1e}, |O0 - closed form| = {:.1e}", op_norm(&(o1 - a1)), op_norm(&(o0 - a0)));
    }
    let (o1, o0) = analytic_o3_ops(25, 0.5, 2.0)?;
    println!("third-order maps at kappa 0.5: |O1| = {:.4}, |O0| = {:.4}", op_norm(o1.matrix()), op_norm(o0.matrix()));
    let f = vacuum_transparent_filter(6, 2.0)?;
    println!("vacuum-transparent filter keeps <0|F|0> = {}", f[(0, 0)].re);
    Ok(())
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
