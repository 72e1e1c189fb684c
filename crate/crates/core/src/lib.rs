//! Simulation and pulse-design toolkit for adiabatic population transfer in a
//! six-level Λ system built from the magnetic sublevels of a J=0 ↔ J=1 ↔ J=2
//! linkage.
//!
//! Two delayed, overlapping laser pulses (pump and Stokes, each split into
//! circular polarization components) drive the transfer from |0,0⟩ into a
//! coherent superposition of |2,−2⟩, |2,0⟩, |2,+2⟩. The toolkit covers:
//!
//! - Wigner 3-j coupling strengths and the channel ratio q ([`angular`]),
//! - the time-dependent 6×6 interaction Hamiltonian and its phase-reduced
//!   form ([`hamiltonian`]),
//! - the dark/bright separation: frame parameters, the unitary U = U₄U₃U₂,
//!   both dark states, the bright eigensystem, and adiabaticity diagnostics
//!   ([`frame`]),
//! - adaptive integration of the Schrödinger equation with population and
//!   bright-subspace tracking ([`propagate`]),
//! - the closed-form adiabatic final state, (θ, χ, δ) target coordinates,
//!   pulse-phase adjustment, and inverse pulse design ([`statespace`]),
//! - parameter-space sweeps over polarizations and relative phase, with
//!   δ-slice coverage analysis ([`sweep`]).
//!
//! The fixed basis ordering everywhere is
//! `{|0,0⟩, |1,−1⟩, |1,+1⟩, |2,−2⟩, |2,0⟩, |2,+2⟩}`; the uncoupled sublevels
//! |2,±1⟩ and |1,0⟩ are exact spectators and are excluded from the state
//! space. ħ = 1; time and angular frequency are reciprocal arbitrary units.

pub mod angular;
pub mod error;
pub mod frame;
pub mod hamiltonian;
pub mod ode;
pub mod propagate;
pub mod pulse;
pub mod statespace;
pub mod sweep;

pub use error::{Error, Result};
pub use hamiltonian::{CMat6, CVec6};
pub use pulse::{Envelope, EnvelopeSample, PulseConfig};
