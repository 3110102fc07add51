//! Simulation and verification of holonomic (geometric) quantum gates on
//! trapped ions.
//!
//! A gate is obtained by dragging the kernel (dark subspace) of an ion-laser
//! Hamiltonian around a closed loop in control space. The crate provides
//!
//! * dense complex linear algebra for small state spaces ([`linalg`]),
//! * the single-ion and two-ion gate Hamiltonians and their control maps
//!   ([`model`]),
//! * closed control loops and enclosed solid angles ([`loops`]),
//! * analytic gate targets, fidelity metrics and circuit synthesis
//!   ([`gates`]),
//! * time-domain adiabatic propagation plus a time-independent Wilson-line
//!   holonomy oracle ([`evolve`]),
//! * closed-form decoherence/adiabaticity budgets and scaling fits
//!   ([`noise`]).
//!
//! Units: Hamiltonians are in angular-frequency units (ħ = 1, rad/s), times
//! in seconds. All dynamics depend only on dimensionless products such as
//! Ω·T, so tests and examples often use Ω = 1 rad/s.

pub mod evolve;
pub mod gates;
pub mod linalg;
pub mod loops;
pub mod model;
pub mod noise;

pub use evolve::{
    adiabatic_convergence_sweep, adiabatic_propagate, extract_holonomy, pin_constant,
    wilson_line_holonomy, HolonomyResult,
};
pub use gates::{analytic_gate, gate_fidelity, synthesize_single_qubit, GateTarget};
pub use linalg::{
    matrix_exponential_step, null_space_basis, subspace_overlap_unitary, Basis, OperatorMatrix,
    QuantumState,
};
pub use loops::ParameterLoop;
pub use model::{GateKind, GateModel, LoopPoint, SingleIonControls, TwoIonControls};
pub use noise::{fit_scaling_exponent, NoiseBudget};
