//! Pulse-level density-matrix simulator for small coupled spin-1/2 systems.
//!
//! The crate simulates liquid-state NMR experiments on a few coupled nuclei:
//! it compiles pulse sequences written in a compact text notation into
//! unitary propagators, evolves density matrices under them, traces out
//! environment spins, and checks the resulting coherence decays against
//! their closed forms.
//!
//! Modules:
//! - [`matrix`], [`density`], [`operators`]: dense complex linear algebra
//!   specialized to multi-spin-1/2 systems (embedding, rotations, diagonal
//!   propagators, unitary conjugation, partial trace);
//! - [`seq`]: the pulse-sequence mini-language (lexer, parser, formatter,
//!   compiler);
//! - [`system`], [`nmr`]: spin-system configuration and the physical layer
//!   (rotating-frame Hamiltonians, initial states, peak amplitudes,
//!   decoupled acquisition);
//! - [`experiments`]: decoherence scenarios, brute-force oracles, sweeps,
//!   and sinusoid fitting.
//!
//! Everything is a pure function of its inputs; values are immutable after
//! construction and safe to share across threads.

pub mod density;
pub mod experiments;
pub mod matrix;
pub mod nmr;
pub mod operators;
pub mod seq;
pub mod system;

pub use density::{DensityMatrix, StateError, StateKind};
pub use matrix::{ComplexMatrix, MatrixError, DEFAULT_TOL};
pub use nmr::{
    acquire_decoupled, environment_mixed, peak_amplitudes, pseudo_pure_down,
    zeeman_coupling_energies, NmrError, PeakPair,
};
pub use operators::{
    cnot, diagonal_propagator, embed, rotation, spin_half, Axis, OperatorError, SpinOperatorTriple,
};
pub use system::{SpinSystem, SystemError};

pub use num_complex::Complex64;
