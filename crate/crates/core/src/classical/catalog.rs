use super::model::{AnalyticBasis, Frequency, OscillatorModel};
use crate::expr::{function_param as param, Params, TimeFunction};
use crate::scalar::Real;
use crate::{Error, Result};

/// Description of a built-in model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub optional: &'static [&'static str],
    pub description: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "constant",
        params: &["m", "omega"],
        optional: &["F"],
        description: "constant mass m and frequency omega under a constant force F (default 0)",
    },
    CatalogEntry {
        name: "pulsating",
        params: &["m0", "gamma", "mu", "nu", "Omega"],
        optional: &[],
        description: "M(t) = m0 exp(2(gamma t + mu sin(nu t))), omega^2(t) = Omega^2 + (1/sqrt M) d^2 sqrt(M)/dt^2; \
                      force defaults to 0",
    },
];

fn positive<T: Real>(params: &Params<T>, name: &str) -> Result<T> {
    let v = param(params, name)?;
    if v > T::zero() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            reason: "must be positive".into(),
        })
    }
}

/// Builds a catalog model on `[t0, t1]` with its analytic classical basis attached.
pub fn catalog<T: Real>(
    name: &str,
    params: &Params<T>,
    t0: T,
    t1: T,
) -> Result<OscillatorModel<T>> {
    match name {
        "constant" => {
            let m = positive(params, "m")?;
            let omega = positive(params, "omega")?;
            let force = match params.get("F") {
                Some(_) => param(params, "F")?,
                None => T::zero(),
            };
            let model = OscillatorModel::new(
                TimeFunction::Constant(m),
                Frequency::Omega(TimeFunction::Constant(omega)),
                TimeFunction::Constant(force),
                t0,
                t1,
            )?;
            Ok(model.with_analytic(AnalyticBasis::Harmonic { m, omega, t0 }))
        }
        "pulsating" => {
            let m0 = positive(params, "m0")?;
            let omega = positive(params, "Omega")?;
            let (gamma, mu, nu) = (
                param(params, "gamma")?,
                param(params, "mu")?,
                param(params, "nu")?,
            );
            let model = OscillatorModel::new(
                TimeFunction::catalog("pulsating-mass", params)?,
                Frequency::OmegaSq(TimeFunction::catalog("pulsating-omega-sq", params)?),
                TimeFunction::Constant(T::zero()),
                t0,
                t1,
            )?;
            Ok(model.with_analytic(AnalyticBasis::Pulsating {
                m0,
                gamma,
                mu,
                nu,
                omega,
            }))
        }
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}
