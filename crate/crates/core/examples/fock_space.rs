//! Truncated Fock spaces: layouts, tensor products, partial trace and the
//! negativity of a photonic Bell state.

use rabi_sim::fock::{number_op, ModeLabel, ModeLayout, StateVector, C64};
use rabi_sim::metrics::negativity;

pub fn run() -> rabi_sim::Result<()> {
    let layout = ModeLayout::new([(ModeLabel::U, 4), (ModeLabel::D, 2)])?;
    println!("modes {:?}, composite dimension {}", layout.labels().collect::<Vec<_>>(), layout.composite_dim());

    let s = 0.5f64.sqrt();
    let a = StateVector::fock(layout.clone(), &[0, 1])?.scale(C64::new(s, 0.0));
    let b = StateVector::fock(layout, &[1, 0])?.scale(C64::new(s, 0.0));
    let bell = a.add(&b)?.to_density();

    let reduced = bell.partial_trace(&[ModeLabel::U])?;
    let n = reduced.expectation(number_op(4)?.matrix(), &[ModeLabel::U])?.re;
    println!("<n_u> of the reduced state: {n:.3}");
    println!("negativity: {:.6} (maximal for a qubit pair: 0.5)", negativity(&bell, ModeLabel::D)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> rabi_sim::Result<()> {
    run()
}
