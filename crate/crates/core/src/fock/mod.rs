//! Truncated Fock spaces: mode layouts, states, density operators and
//! operator matrices.

pub mod density;
pub mod layout;
pub mod linalg;
pub mod operator;
pub mod state;

pub use density::DensityOperator;
pub use layout::{Mode, ModeLabel, ModeLayout};
pub use linalg::{CMatrix, CVector, C64};
pub use operator::{
    annihilation_op, creation_op, identity_op, number_op, pauli_ops, quadrature_op, tensor_ops,
    tensor_states, OperatorKind, OperatorMatrix, Paulis,
};
pub use state::{StateVector, HERALD_FLOOR};
