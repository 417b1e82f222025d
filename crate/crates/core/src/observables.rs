//! Means, dispersions, energies and phase-space ellipses for the number states
//! `|n>_B` and coherent states `|alpha>` of the forced invariant.

use std::fmt;

use num_complex::Complex;

use crate::classical::ModelPoint;
use crate::forced::{DriftSample, DriftState};
use crate::invariant::FrameSample;
use crate::scalar::Real;
use crate::{Error, Result};

/// Quantum state, labelled by the eigenvalues of the forced invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec<T> {
    /// `|n>_B`.
    Number(u32),
    /// Eigenstate of `B` with eigenvalue `alpha = magnitude e^{-i delta}` at `t0`.
    Coherent { magnitude: T, delta: T },
}

impl<T: Real> StateSpec<T> {
    pub fn vacuum() -> Self {
        StateSpec::Number(0)
    }

    pub fn coherent(magnitude: T, delta: T) -> Result<Self> {
        let s = StateSpec::Coherent { magnitude, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Number(_) => Ok(()),
            StateSpec::Coherent { magnitude, delta } => {
                if !(magnitude >= T::zero() && magnitude.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "magnitude".into(),
                        reason: "coherent amplitude must be finite and non-negative".into(),
                    });
                }
                if !delta.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "delta".into(),
                        reason: "phase must be finite".into(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Occupation entering the dispersions (zero for coherent states).
    pub fn level(&self) -> u32 {
        match *self {
            StateSpec::Number(n) => n,
            StateSpec::Coherent { .. } => 0,
        }
    }

    /// `alpha`, zero for number states.
    pub fn alpha(&self) -> Complex<T> {
        match *self {
            StateSpec::Number(_) => Complex::new(T::zero(), T::zero()),
            StateSpec::Coherent { magnitude, delta } => Complex::from_polar(magnitude, -delta),
        }
    }
}

impl<T: Real> fmt::Display for StateSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Number(n) => write!(f, "number:{n}"),
            StateSpec::Coherent { magnitude, delta } => write!(f, "coherent:{magnitude},{delta}"),
        }
    }
}

/// First and second moments of `(q, p)` with the energy at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord<T> {
    pub t: T,
    pub q_mean: T,
    pub p_mean: T,
    pub var_q: T,
    pub var_p: T,
    pub cov_qp: T,
    pub energy: T,
}

impl<T: Real> MomentRecord<T> {
    /// `var_q var_p - cov_qp^2`; `1/4` for pure Gaussian states.
    pub fn uncertainty(&self) -> T {
        self.var_q * self.var_p - self.cov_qp * self.cov_qp
    }

    /// Recomputes `energy` for the model point at the record's time.
    pub fn with_energy(mut self, point: &ModelPoint<T>) -> Self {
        self.energy = energy(point, &self);
        self
    }
}

/// `(var_q, var_p, cov_qp)` of `|n>_B`; coherent states share the `n = 0` values.
pub fn dispersions<T: Real>(sample: &FrameSample<T>, n: u32) -> (T, T, T) {
    let w = sample.omega_i;
    let k = T::from_u32(2 * n + 1).unwrap() / T::lit(2.0);
    let ratio = sample.g_zero / w;
    (
        k * sample.g_minus / w,
        k * w / sample.g_minus * (T::one() + ratio * ratio),
        -k * sample.g_zero / w,
    )
}

/// `<q>` and `<p>` given the invariant phase and `beta` at `t`.
///
/// `<b(t)> = alpha e^{-i Theta} - beta(t)`, then
/// `<q> = sqrt(g_-/(2 omega_I)) 2 Re<b>`, `<p> = sqrt(2 omega_I/g_-) Im<b> - (g_0/g_-) <q>`.
pub fn coherent_means<T: Real>(
    sample: &FrameSample<T>,
    theta: T,
    beta: Complex<T>,
    alpha: Complex<T>,
) -> (T, T) {
    let two = T::lit(2.0);
    let w = sample.omega_i;
    let ladder = alpha * Complex::from_polar(T::one(), -theta) - beta;
    let q = (sample.g_minus / (two * w)).sqrt() * two * ladder.re;
    let p = (two * w / sample.g_minus).sqrt() * ladder.im - sample.g_zero / sample.g_minus * q;
    (q, p)
}

/// `<H>` for the moments: `(var_p + <p>^2)/(2M) + M omega^2 (var_q + <q>^2)/2 - M F <q>`.
pub fn energy<T: Real>(point: &ModelPoint<T>, m: &MomentRecord<T>) -> T {
    let two = T::lit(2.0);
    let kinetic = (m.var_p + m.p_mean * m.p_mean) / (two * point.mass);
    let potential = point.mass * point.omega_sq * (m.var_q + m.q_mean * m.q_mean) / two;
    kinetic + potential - point.mass * point.force * m.q_mean
}

/// Assembles the full moment record from already evaluated pieces.
pub fn moments_from<T: Real>(
    sample: &FrameSample<T>,
    drift: &DriftSample<T>,
    point: &ModelPoint<T>,
    state: &StateSpec<T>,
) -> MomentRecord<T> {
    let (q_mean, p_mean) = coherent_means(sample, drift.theta, drift.beta, state.alpha());
    let (var_q, var_p, cov_qp) = dispersions(sample, state.level());
    MomentRecord {
        t: sample.t,
        q_mean,
        p_mean,
        var_q,
        var_p,
        cov_qp,
        energy: T::zero(),
    }
    .with_energy(point)
}

pub fn moments<T: Real>(
    drift: &DriftState<T>,
    state: &StateSpec<T>,
    t: T,
) -> Result<MomentRecord<T>> {
    state.validate()?;
    let frame = drift.phase().frame();
    let sample = frame.sample(t)?;
    let point = frame.model().point(t)?;
    Ok(moments_from(&sample, &drift.sample(t)?, &point, state))
}

/// Principal axes of the covariance ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse<T> {
    pub major: T,
    pub minor: T,
    /// Angle of the major axis from the `q` axis, in `(-pi/2, pi/2]`.
    pub tilt: T,
}

pub fn ellipse<T: Real>(var_q: T, var_p: T, cov_qp: T) -> Result<Ellipse<T>> {
    let det = var_q * var_p - cov_qp * cov_qp;
    if !(var_q > T::zero() && var_p > T::zero() && det > T::zero()) {
        return Err(Error::NotPositiveDefinite {
            var_q: var_q.as_f64(),
            var_p: var_p.as_f64(),
            cov_qp: cov_qp.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let mean = (var_q + var_p) / two;
    let half_gap = (var_q - var_p) / two;
    let radius = half_gap.hypot(cov_qp);
    let big = mean + radius;
    // small eigenvalue via the determinant, which avoids cancellation
    let small = det / big;
    let mut tilt = (two * cov_qp).atan2(var_q - var_p) / two;
    if tilt <= -T::FRAC_PI_2() {
        tilt = tilt + T::PI();
    }
    Ok(Ellipse {
        major: big.sqrt(),
        minor: small.sqrt(),
        tilt,
    })
}
