use std::fmt;

use crate::expr::TimeFunction;
use crate::scalar::Real;
use crate::{Error, Result};

/// How the model's frequency is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Frequency<T> {
    /// Angular frequency `omega(t)`; squared before use.
    Omega(TimeFunction<T>),
    /// `omega^2(t)` directly. May be negative (inverted oscillator).
    OmegaSq(TimeFunction<T>),
}

/// Closed-form classical solutions attached to catalog models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticBasis<T> {
    /// `cos w(t - t0)` and `sin w(t - t0) / (m w)`; Wronskian 1.
    Harmonic { m: T, omega: T, t0: T },
    /// Real and imaginary parts of `exp(i Omega t) / sqrt(M(t))` for the
    /// pulsating mass `M = m0 exp(2 (gamma t + mu sin nu t))`; Wronskian `Omega`.
    Pulsating {
        m0: T,
        gamma: T,
        mu: T,
        nu: T,
        omega: T,
    },
}

/// Coefficients of the Hamiltonian at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint<T> {
    pub t: T,
    pub mass: T,
    pub omega_sq: T,
    pub force: T,
}

/// `H = p^2 / 2M + M w^2 q^2 / 2 - M F q` on the interval `[t0, t1]`.
///
/// `F` is a force per unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel<T> {
    pub mass: TimeFunction<T>,
    pub frequency: Frequency<T>,
    pub force: TimeFunction<T>,
    pub t0: T,
    pub t1: T,
    analytic: Option<AnalyticBasis<T>>,
}

const DOMAIN_SAMPLES: usize = 256;

impl<T: Real> OscillatorModel<T> {
    /// Builds a model and checks that its coefficients are finite and the
    /// mass positive on a uniform sample of `[t0, t1]`.
    pub fn new(
        mass: TimeFunction<T>,
        frequency: Frequency<T>,
        force: TimeFunction<T>,
        t0: T,
        t1: T,
    ) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::Config(format!(
                "time interval must satisfy t0 < t1 (got t0 = {t0}, t1 = {t1})"
            )));
        }
        let model = OscillatorModel {
            mass,
            frequency,
            force,
            t0,
            t1,
            analytic: None,
        };
        let n = T::from_usize(DOMAIN_SAMPLES).unwrap();
        for k in 0..=DOMAIN_SAMPLES {
            let t = t0 + (t1 - t0) * T::from_usize(k).unwrap() / n;
            model.point(t)?;
        }
        Ok(model)
    }

    pub(crate) fn with_analytic(mut self, basis: AnalyticBasis<T>) -> Self {
        self.analytic = Some(basis);
        self
    }

    pub fn analytic_basis(&self) -> Option<&AnalyticBasis<T>> {
        self.analytic.as_ref()
    }

    /// Same mass and frequency, different force. The classical basis does
    /// not depend on the force, so an analytic basis is kept.
    pub fn with_force(&self, force: TimeFunction<T>) -> Result<Self> {
        let analytic = self.analytic;
        let mut m = OscillatorModel::new(
            self.mass.clone(),
            self.frequency.clone(),
            force,
            self.t0,
            self.t1,
        )?;
        m.analytic = analytic;
        Ok(m)
    }

    /// Same coefficients on a different interval. Harmonic analytic bases are
    /// re-anchored at the new `t0`; pulsating ones are kept as they are.
    pub fn with_interval(&self, t0: T, t1: T) -> Result<Self> {
        let mut m = OscillatorModel::new(
            self.mass.clone(),
            self.frequency.clone(),
            self.force.clone(),
            t0,
            t1,
        )?;
        m.analytic = self.analytic.map(|a| match a {
            AnalyticBasis::Harmonic { m, omega, .. } => AnalyticBasis::Harmonic { m, omega, t0 },
            other => other,
        });
        Ok(m)
    }

    pub fn contains(&self, t: T) -> bool {
        let slack = T::lit(64.0) * T::epsilon() * (self.t1 - self.t0).max(T::one());
        t >= self.t0 - slack && t <= self.t1 + slack
    }

    pub fn check_domain(&self, t: T) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                t: t.as_f64(),
                t0: self.t0.as_f64(),
                t1: self.t1.as_f64(),
            })
        }
    }

    pub fn mass(&self, t: T) -> Result<T> {
        let m = self.mass.evaluate(t)?;
        if m > T::zero() {
            Ok(m)
        } else {
            Err(Error::NonPositiveMass {
                t: t.as_f64(),
                value: m.as_f64(),
            })
        }
    }

    pub fn omega_sq(&self, t: T) -> Result<T> {
        Ok(match &self.frequency {
            Frequency::Omega(w) => {
                let w = w.evaluate(t)?;
                w * w
            }
            Frequency::OmegaSq(w2) => w2.evaluate(t)?,
        })
    }

    /// Instantaneous angular frequency; requires `omega^2 > 0`.
    pub fn omega(&self, t: T) -> Result<T> {
        let w2 = self.omega_sq(t)?;
        if w2 > T::zero() {
            Ok(w2.sqrt())
        } else {
            Err(Error::NonPositiveFrequency {
                t: t.as_f64(),
                omega_sq: w2.as_f64(),
            })
        }
    }

    pub fn force(&self, t: T) -> Result<T> {
        Ok(self.force.evaluate(t)?)
    }

    pub fn point(&self, t: T) -> Result<ModelPoint<T>> {
        Ok(ModelPoint {
            t,
            mass: self.mass(t)?,
            omega_sq: self.omega_sq(t)?,
            force: self.force(t)?,
        })
    }
}

impl<T: Real> fmt::Display for OscillatorModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M(t) = {}; ", self.mass)?;
        match &self.frequency {
            Frequency::Omega(w) => write!(f, "omega(t) = {w}; ")?,
            Frequency::OmegaSq(w2) => write!(f, "omega^2(t) = {w2}; ")?,
        }
        write!(
            f,
            "F(t) = {}; t in [{:?}, {:?}]",
            self.force, self.t0, self.t1
        )
    }
}
