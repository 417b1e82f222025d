//! Exact quantum motion of the driven oscillator
//! `H = p^2/(2M(t)) + M(t) omega(t)^2 q^2/2 - M(t) F(t) q`
//! through its quadratic invariant.
//!
//! The pipeline runs model → classical basis → invariant frame → phase →
//! drift, and from there to propagators and state moments. [`simulation`]
//! wires it together; [`oracle`] integrates the moments directly as an
//! independent check.
//!
//! Everything is generic over the scalar; the aliases below fix it to `f64`.

pub mod classical;
pub mod error;
pub mod expr;
pub mod forced;
pub mod invariant;
pub mod observables;
pub mod ode;
pub mod oracle;
pub mod propagator;
pub mod quad;
pub mod scalar;
pub mod simulation;

pub use error::{Error, Result};
pub use scalar::Real;

pub type OscillatorModel = classical::OscillatorModel<f64>;
pub type TimeFunction = expr::TimeFunction<f64>;
pub type Params = expr::Params<f64>;
pub type InvariantConstants = invariant::InvariantConstants<f64>;
pub type InvariantFrame = invariant::InvariantFrame<f64>;
pub type FrameSample = invariant::FrameSample<f64>;
pub type QuadratureConfig = invariant::QuadratureConfig<f64>;
pub type SolverConfig = ode::SolverConfig<f64>;
pub type DriftState = forced::DriftState<f64>;
pub type DriftSample = forced::DriftSample<f64>;
pub type PropagatorStep = propagator::PropagatorStep<f64>;
pub type BogoliubovPair = propagator::BogoliubovPair<f64>;
pub type StateSpec = observables::StateSpec<f64>;
pub type MomentRecord = observables::MomentRecord<f64>;
pub type Ellipse = observables::Ellipse<f64>;
pub type OracleRun = oracle::OracleRun<f64>;
pub type VerifyReport = oracle::VerifyReport<f64>;
pub type Scenario = simulation::Scenario<f64>;
pub type Simulation = simulation::Simulation<f64>;
pub type Snapshot = simulation::Snapshot<f64>;
