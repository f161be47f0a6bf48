//! Macroscopic quantumness of multi-qubit pure states: the additive-observable
//! macroscopicity `M̃`/`M`, the geometric entanglement `E_G`, random-state
//! ensembles, closed-form extremal results and an experiment harness.

pub mod ensembles;
pub mod error;
pub mod extremal;
pub mod geometric;
pub mod harness;
pub mod limits;
pub mod macroscopicity;
pub mod observables;
pub mod states;

pub use error::{Error, Result};
pub use states::{PureState, SymmetricState, C64};
