//! Simulation laboratory for estimands in randomized trials with
//! intercurrent events.
//!
//! The latent table of potential outcomes is simulated ([`dgp`]), every
//! estimand is evaluated exactly on it ([`oracle`]) and estimated from the
//! single-world observed view ([`estimators`]). Estimands are written in a
//! small declarative language ([`speclang`]).
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`.

pub mod analysis_sets;
pub mod dgp;
pub mod error;
pub mod estimand;
pub mod estimators;
pub mod montecarlo;
pub mod oracle;
pub mod potential_outcomes;
pub mod scalar;
pub mod speclang;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Participant = potential_outcomes::PotentialParticipant<f64>;
pub type Record = potential_outcomes::ObservedRecord<f64>;
pub type Estimate = estimators::EstimateResult<f64>;
pub type Fit = estimators::OlsFit<f64>;
pub type Value = oracle::EstimandValue<f64>;
