//! Shortcut-to-adiabatic-passage simulation of qutrit entanglement between
//! two atoms in fiber-coupled cavities.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod invariant;
pub mod model;
pub mod protocol;
pub mod zeno;

pub use error::{Error, Result};
pub use hilbert::{Atom, Basis, BasisState, Level, LevelScheme, Mode, SparseOperator, StateVector, Subspace};
pub use model::SystemParams;
pub use protocol::{run_protocol, ProtocolReport, ProtocolSpec};
