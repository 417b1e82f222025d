//! Oscillator models and the two classical solutions every closed form is built on.

mod basis;
mod catalog;
mod model;

pub use basis::{solve_basis, BasisPoint, ClassicalBasis, NumericBasis};
pub use catalog::{catalog, CatalogEntry, CATALOG};
pub use model::{AnalyticBasis, Frequency, ModelPoint, OscillatorModel};
