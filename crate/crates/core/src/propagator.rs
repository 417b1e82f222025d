//! Exact Heisenberg-picture motion as an affine map on `(q, p)`, plus the
//! scalar parameters relating the invariant ladder to the instantaneous one.

use num_complex::Complex;

use crate::forced::{DriftSample, DriftState};
use crate::invariant::{FrameSample, InvariantFrame};
use crate::scalar::Real;
use crate::Result;

/// `(q(t), p(t)) = A (q(t0), p(t0)) + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorStep<T> {
    pub t: T,
    pub matrix: [[T; 2]; 2],
    pub drift: [T; 2],
}

impl<T: Real> PropagatorStep<T> {
    pub fn identity(t: T) -> Self {
        PropagatorStep {
            t,
            matrix: [[T::one(), T::zero()], [T::zero(), T::one()]],
            drift: [T::zero(); 2],
        }
    }

    pub fn apply(&self, x: [T; 2]) -> [T; 2] {
        let a = &self.matrix;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + self.drift[0],
            a[1][0] * x[0] + a[1][1] * x[1] + self.drift[1],
        ]
    }

    /// Linear part only, for propagating covariances.
    pub fn apply_linear(&self, x: [T; 2]) -> [T; 2] {
        let a = &self.matrix;
        [
            a[0][0] * x[0] + a[0][1] * x[1],
            a[1][0] * x[0] + a[1][1] * x[1],
        ]
    }

    pub fn determinant(&self) -> T {
        let a = &self.matrix;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    /// `later ∘ self`: first `self`, then `later`.
    pub fn then(&self, later: &PropagatorStep<T>) -> PropagatorStep<T> {
        let (l, a) = (&later.matrix, &self.matrix);
        let mut m = [[T::zero(); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = l[i][0] * a[0][j] + l[i][1] * a[1][j];
            }
        }
        PropagatorStep {
            t: later.t,
            matrix: m,
            drift: later.apply(self.drift),
        }
    }

    /// `Sigma -> A Sigma A^T` on `(var_q, var_p, cov_qp)`.
    pub fn transform_covariance(&self, var_q: T, var_p: T, cov_qp: T) -> (T, T, T) {
        let a = &self.matrix;
        let vq = a[0][0] * a[0][0] * var_q
            + T::lit(2.0) * a[0][0] * a[0][1] * cov_qp
            + a[0][1] * a[0][1] * var_p;
        let vp = a[1][0] * a[1][0] * var_q
            + T::lit(2.0) * a[1][0] * a[1][1] * cov_qp
            + a[1][1] * a[1][1] * var_p;
        let c = a[0][0] * a[1][0] * var_q
            + (a[0][0] * a[1][1] + a[0][1] * a[1][0]) * cov_qp
            + a[0][1] * a[1][1] * var_p;
        (vq, vp, c)
    }
}

/// Assembles the step from the frame at `t0` and `t` and the drift at `t`.
pub fn step_from<T: Real>(
    initial: &FrameSample<T>,
    current: &FrameSample<T>,
    drift: &DriftSample<T>,
) -> PropagatorStep<T> {
    let w = current.omega_i;
    let (gm0, g00) = (initial.g_minus, initial.g_zero);
    let (gm, g0) = (current.g_minus, current.g_zero);
    let (sin, cos) = drift.theta.sin_cos();
    let root = (gm * gm0).sqrt();
    let ratio = (gm / gm0).sqrt();
    let matrix = [
        [ratio * (cos + g00 / w * sin), root * sin / w],
        [
            ((g00 - g0) * cos - (w + g00 * g0 / w) * sin) / root,
            (cos - g0 / w * sin) / ratio,
        ],
    ];
    // F_cal + F_cal^* and -i (F_cal - F_cal^*)
    let two = T::lit(2.0);
    let re2 = two * drift.f_cal.re;
    let im2 = two * drift.f_cal.im;
    let drift = [
        (gm / (two * w)).sqrt() * re2,
        (w / (two * gm)).sqrt() * (im2 - g0 / w * re2),
    ];
    PropagatorStep {
        t: current.t,
        matrix,
        drift,
    }
}

/// Propagator from the model's `t0` to `t`.
pub fn step<T: Real>(drift: &DriftState<T>, t: T) -> Result<PropagatorStep<T>> {
    let frame = drift.phase().frame();
    let initial = frame.sample(frame.model().t0)?;
    let current = frame.sample(t)?;
    Ok(step_from(&initial, &current, &drift.sample(t)?))
}

/// `B = v1 a + v2 a^dagger + beta`, with `a` the ladder of the instantaneous
/// Hamiltonian at frequency `omega(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovPair<T> {
    pub t: T,
    pub v1: Complex<T>,
    pub v2: Complex<T>,
}

impl<T: Real> BogoliubovPair<T> {
    /// `|v1|^2 - |v2|^2`, one for a valid pair.
    pub fn normalization(&self) -> T {
        self.v1.norm_sqr() - self.v2.norm_sqr()
    }

    /// Squeeze magnitude `arccosh |v1|`.
    pub fn squeeze(&self) -> T {
        self.v1.norm().max(T::one()).acosh()
    }
}

pub fn bogoliubov<T: Real>(frame: &InvariantFrame<T>, t: T) -> Result<BogoliubovPair<T>> {
    let omega = frame.model().omega(t)?;
    let s = frame.sample(t)?;
    let x = (s.mass * s.g_minus * omega / s.omega_i).sqrt();
    let half = T::lit(0.5);
    let tail = Complex::new(T::one(), s.g_zero / s.omega_i) / x;
    Ok(BogoliubovPair {
        t,
        v1: (tail + x) * half,
        v2: (tail - x) * half,
    })
}

fn boundary<T: Real>(
    initial: &FrameSample<T>,
    current: &FrameSample<T>,
    beta: Complex<T>,
) -> Complex<T> {
    let w = current.omega_i;
    let r = (current.g_minus / initial.g_minus).sqrt();
    let half = T::lit(0.5);
    let a = Complex::new(T::one(), initial.g_zero / w) * r;
    let e = current.g_zero / w;
    let u1 = (a + Complex::new(T::one(), -e) / r) * half;
    let u2 = (a - Complex::new(T::one(), e) / r) * half;
    u1 * beta + u2 * beta.conj()
}

/// Displacement parameter `d(t) = -[u1 beta + u2 beta^*]` taken between `t0` and `t`.
///
/// Equals the expectation of `B(t0)` in the time-`t` state `|0>_B`, so
/// `d(t0) = 0` and `d = 0` whenever `beta` vanishes identically.
pub fn displacement_d<T: Real>(drift: &DriftState<T>, t: T) -> Result<Complex<T>> {
    let frame = drift.phase().frame();
    let t0 = frame.model().t0;
    let initial = frame.sample(t0)?;
    let current = frame.sample(t)?;
    let now = boundary(&initial, &current, drift.beta(t)?);
    let then = boundary(&initial, &initial, drift.beta0());
    Ok(then - now)
}
