use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{parse, EvalError, Expr};
use crate::scalar::Real;
use crate::{Error, Result};

/// Named numeric parameters for catalog entries.
pub type Params<T> = BTreeMap<String, T>;

/// Closed-form time functions with bound parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogFunction<T> {
    /// `m0 * exp(2 (gamma t + mu sin(nu t)))`
    PulsatingMass { m0: T, gamma: T, mu: T, nu: T },
    /// `Omega^2 + (gamma + mu nu cos(nu t))^2 - mu nu^2 sin(nu t)`, the
    /// squared frequency that makes `exp(i Omega t) / sqrt(M)` a classical solution.
    PulsatingOmegaSq { omega: T, gamma: T, mu: T, nu: T },
}

impl<T: Real> CatalogFunction<T> {
    pub const NAMES: [&'static str; 2] = ["pulsating-mass", "pulsating-omega-sq"];

    fn eval(&self, t: T) -> T {
        let two = T::lit(2.0);
        match *self {
            CatalogFunction::PulsatingMass { m0, gamma, mu, nu } => {
                m0 * (two * (gamma * t + mu * (nu * t).sin())).exp()
            }
            CatalogFunction::PulsatingOmegaSq {
                omega,
                gamma,
                mu,
                nu,
            } => {
                let rate = gamma + mu * nu * (nu * t).cos();
                omega * omega + rate * rate - mu * nu * nu * (nu * t).sin()
            }
        }
    }
}

/// A real function of time: a parsed expression, a constant, or a catalog entry.
///
/// Immutable once built; clones share the parsed tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFunction<T> {
    Constant(T),
    Expr(Arc<Expr>),
    Catalog(CatalogFunction<T>),
}

pub(crate) fn param<T: Real>(params: &Params<T>, name: &str) -> Result<T> {
    let v = *params.get(name).ok_or_else(|| Error::InvalidParameter {
        name: name.to_string(),
        reason: "missing".into(),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter {
            name: name.to_string(),
            reason: "must be finite".into(),
        });
    }
    Ok(v)
}

impl<T: Real> TimeFunction<T> {
    pub fn parse(source: &str) -> Result<Self> {
        Ok(TimeFunction::Expr(Arc::new(parse(source)?)))
    }

    /// Looks up a named catalog function, e.g. `pulsating-mass` with
    /// parameters `m0`, `gamma`, `mu`, `nu`.
    pub fn catalog(name: &str, params: &Params<T>) -> Result<Self> {
        let f = match name {
            "pulsating-mass" => {
                let m0 = param(params, "m0")?;
                if m0 <= T::zero() {
                    return Err(Error::InvalidParameter {
                        name: "m0".into(),
                        reason: "must be positive".into(),
                    });
                }
                CatalogFunction::PulsatingMass {
                    m0,
                    gamma: param(params, "gamma")?,
                    mu: param(params, "mu")?,
                    nu: param(params, "nu")?,
                }
            }
            "pulsating-omega-sq" => CatalogFunction::PulsatingOmegaSq {
                omega: param(params, "Omega")?,
                gamma: param(params, "gamma")?,
                mu: param(params, "mu")?,
                nu: param(params, "nu")?,
            },
            other => return Err(Error::UnknownCatalog(other.to_string())),
        };
        Ok(TimeFunction::Catalog(f))
    }

    pub fn evaluate(&self, t: T) -> Result<T, EvalError> {
        let v = match self {
            TimeFunction::Constant(c) => *c,
            TimeFunction::Expr(e) => return e.eval(t),
            TimeFunction::Catalog(c) => c.eval(t),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t: t.as_f64() })
        }
    }
}

impl<T: Real> fmt::Display for TimeFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFunction::Constant(c) => write!(f, "{c:?}"),
            TimeFunction::Expr(e) => write!(f, "{e}"),
            TimeFunction::Catalog(CatalogFunction::PulsatingMass { m0, gamma, mu, nu }) => {
                write!(
                    f,
                    "pulsating-mass(m0={m0:?}, gamma={gamma:?}, mu={mu:?}, nu={nu:?})"
                )
            }
            TimeFunction::Catalog(CatalogFunction::PulsatingOmegaSq {
                omega,
                gamma,
                mu,
                nu,
            }) => write!(
                f,
                "pulsating-omega-sq(Omega={omega:?}, gamma={gamma:?}, mu={mu:?}, nu={nu:?})"
            ),
        }
    }
}
