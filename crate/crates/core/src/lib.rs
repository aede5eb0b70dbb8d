//! Coupled reduced-complexity climate and DICE-style economy model.
//!
//! The crate bundles a four-pool carbon cycle with lifetime feedbacks, a
//! three-layer energy balance model, a 3-yr-step economy with abatement and
//! damages, a welfare optimizer over abatement and savings paths, and the
//! probabilistic machinery used to build a constrained parameter ensemble.

pub mod carbon;
pub mod climate;
pub mod econ;
pub mod ensemble;
pub mod error;
pub mod history;
pub mod io;
pub mod numerics;
pub mod optimize;
pub mod posterior;
pub mod runner;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
