//! The unforced invariant `I = g_- p^2/2 + g_0 (pq + qp)/2 + g_+ q^2/2` and its phase.
//!
//! With classical solutions `a = (f1, f2)` and momenta `b = (M f1', M f2')`,
//! and a constant symmetric matrix `C = [[c1, c2/2], [c2/2, c3]]`,
//!
//! ```text
//! g_- = a^T C a,    g_0 = -a^T C b,    g_+ = b^T C b,
//! g_+ g_- - g_0^2 = det(C) W^2 = omega_I^2.
//! ```
//!
//! `g_+` is evaluated from the momenta rather than from `(omega_I^2 + g_0^2) / g_-`,
//! so the identity above is a genuine check on the basis.

mod phase;

use std::sync::Arc;

use crate::classical::{BasisPoint, ClassicalBasis, OscillatorModel};
use crate::ode::SolverConfig;
use crate::scalar::Real;
use crate::{Error, Result};

pub use phase::{PhaseAccumulator, PhaseNode, QuadratureConfig, QuadratureRule};

/// Constants `(c1, c2, c3)` of the quadratic form, relative to a particular basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantConstants<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

impl<T: Real> Default for InvariantConstants<T> {
    fn default() -> Self {
        InvariantConstants {
            c1: T::one(),
            c2: T::zero(),
            c3: T::one(),
        }
    }
}

impl<T: Real> InvariantConstants<T> {
    pub fn new(c1: T, c2: T, c3: T) -> Result<Self> {
        let c = InvariantConstants { c1, c2, c3 };
        let det = c.determinant();
        if !(c1 > T::zero() && det > T::zero() && det.is_finite()) {
            return Err(Error::NonPositiveInvariant {
                value: det.as_f64(),
            });
        }
        Ok(c)
    }

    /// `c1 c3 - c2^2 / 4`.
    pub fn determinant(&self) -> T {
        self.c1 * self.c3 - self.c2 * self.c2 / T::lit(4.0)
    }

    fn form(&self, a: [T; 2], b: [T; 2]) -> T {
        let half = self.c2 / T::lit(2.0);
        self.c1 * a[0] * b[0] + half * (a[0] * b[1] + a[1] * b[0]) + self.c3 * a[1] * b[1]
    }

    /// Constants that make the invariant's coefficients at `at.t` equal to
    /// `(g_minus, g_zero, g_plus)`, whatever basis `at` comes from.
    pub fn from_initial_coefficients(
        at: &BasisPoint<T>,
        g_minus: T,
        g_zero: T,
        g_plus: T,
    ) -> Result<Self> {
        // [[g_-, -g_0], [-g_0, g_+]] = P^T C P with P = [a b]; C = Q^T G Q, Q = P^-1
        let w = at.wronskian();
        if w == T::zero() {
            return Err(Error::Config(
                "degenerate classical basis (zero Wronskian)".into(),
            ));
        }
        let q = [
            [at.momentum[1] / w, -at.momentum[0] / w],
            [-at.f[1] / w, at.f[0] / w],
        ];
        let g = [[g_minus, -g_zero], [-g_zero, g_plus]];
        let mut gq = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                gq[i][j] = g[i][0] * q[0][j] + g[i][1] * q[1][j];
            }
        }
        let mut c = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = q[0][i] * gq[0][j] + q[1][i] * gq[1][j];
            }
        }
        InvariantConstants::new(c[0][0], c[0][1] + c[1][0], c[1][1])
    }

    /// Constants for which the invariant equals the unforced Hamiltonian at
    /// `t0`: `g_- = 1/M`, `g_0 = 0`, `g_+ = M w^2`. Needs `w^2(t0) > 0`.
    pub fn hamiltonian_matched(
        model: &OscillatorModel<T>,
        basis: &ClassicalBasis<T>,
    ) -> Result<Self> {
        let at = basis.eval(model, model.t0)?;
        let omega = model.omega(model.t0)?;
        let mass = at.mass;
        Self::from_initial_coefficients(&at, T::one() / mass, T::zero(), mass * omega * omega)
    }
}

/// Invariant coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample<T> {
    pub t: T,
    pub mass: T,
    pub g_minus: T,
    pub g_zero: T,
    pub g_plus: T,
    pub omega_i: T,
}

impl<T: Real> FrameSample<T> {
    /// `g_+ g_- - g_0^2` evaluated from the sampled coefficients.
    pub fn omega_i_sq(&self) -> T {
        self.g_plus * self.g_minus - self.g_zero * self.g_zero
    }

    /// `omega_I / (M g_-)`, the rate of the invariant phase.
    pub fn phase_rate(&self) -> T {
        self.omega_i / (self.mass * self.g_minus)
    }
}

/// Invariant of the unforced oscillator, built once per model run.
#[derive(Debug, Clone)]
pub struct InvariantFrame<T> {
    model: Arc<OscillatorModel<T>>,
    basis: ClassicalBasis<T>,
    constants: InvariantConstants<T>,
    omega_i: T,
}

const VALIDATION_SAMPLES: usize = 512;

/// Builds the invariant from a basis and constants. `omega_I = |W| sqrt(det C)`.
pub fn build_frame<T: Real>(
    model: Arc<OscillatorModel<T>>,
    basis: ClassicalBasis<T>,
    constants: InvariantConstants<T>,
) -> Result<InvariantFrame<T>> {
    let constants = InvariantConstants::new(constants.c1, constants.c2, constants.c3)?;
    let omega_i = basis.wronskian().abs() * constants.determinant().sqrt();
    if omega_i.is_nan() || omega_i <= T::zero() {
        return Err(Error::NonPositiveInvariant {
            value: (omega_i * omega_i).as_f64(),
        });
    }
    let frame = InvariantFrame {
        model,
        basis,
        constants,
        omega_i,
    };
    let (t0, t1) = (frame.model.t0, frame.model.t1);
    let n = T::from_usize(VALIDATION_SAMPLES).unwrap();
    for k in 0..=VALIDATION_SAMPLES {
        let t = t0 + (t1 - t0) * T::from_usize(k).unwrap() / n;
        let s = frame.sample(t)?;
        if !(s.g_minus > T::zero() && s.g_minus.is_finite()) {
            return Err(Error::VanishingGMinus { t: t.as_f64() });
        }
    }
    Ok(frame)
}

impl<T: Real> InvariantFrame<T> {
    /// Convenience: basis chosen by [`ClassicalBasis::for_model`].
    pub fn for_model(
        model: Arc<OscillatorModel<T>>,
        constants: InvariantConstants<T>,
        solver: &SolverConfig<T>,
    ) -> Result<Self> {
        let basis = ClassicalBasis::for_model(&model, solver)?;
        build_frame(model, basis, constants)
    }

    pub fn model(&self) -> &Arc<OscillatorModel<T>> {
        &self.model
    }

    pub fn basis(&self) -> &ClassicalBasis<T> {
        &self.basis
    }

    pub fn constants(&self) -> InvariantConstants<T> {
        self.constants
    }

    pub fn omega_i(&self) -> T {
        self.omega_i
    }

    pub fn sample(&self, t: T) -> Result<FrameSample<T>> {
        let p = self.basis.eval(&self.model, t)?;
        let c = &self.constants;
        Ok(FrameSample {
            t,
            mass: p.mass,
            g_minus: c.form(p.f, p.f),
            g_zero: -c.form(p.f, p.momentum),
            g_plus: c.form(p.momentum, p.momentum),
            omega_i: self.omega_i,
        })
    }

    /// Relative drift of `g_+ g_- - g_0^2` away from `omega_I^2` at `t`.
    pub fn invariant_drift(&self, t: T) -> Result<T> {
        let s = self.sample(t)?;
        let target = self.omega_i * self.omega_i;
        Ok(((s.omega_i_sq() - target) / target).abs())
    }
}
