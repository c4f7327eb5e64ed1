//! Exact fair division of indivisible goods under interdependent values.
//!
//! Valuations depend on every agent's private signal. The crate provides the
//! two-agent cut-and-choose and price-and-choose mechanisms, the black-box
//! transform of an independent-value algorithm, oracles for EF, EF1, EFX,
//! PROP, MMS and APS, an exact simplex solver, and pure Nash equilibrium
//! verification and enumeration. All arithmetic is over arbitrary-precision
//! rationals and every exhaustive search is bounded by an explicit
//! [`Budget`].

pub mod axioms;
pub mod budget;
pub mod bundle;
pub mod counterexamples;
pub mod equilibrium;
pub mod error;
pub mod fairness;
pub mod instance;
pub mod io;
pub mod lp;
pub mod mechanisms;
pub mod rational;
pub mod setcover;
pub mod valuation;

pub use budget::Budget;
pub use bundle::{Allocation, Bundle};
pub use error::{Error, Result};
pub use fairness::FairnessNotion;
pub use instance::{Bid, Instance, Report, ReportProfile, SignalProfile};
pub use mechanisms::Mechanism;
pub use rational::Rational;
