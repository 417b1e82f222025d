//! Adaptive Dormand-Prince 4(5) integration of small fixed-size systems.

use crate::scalar::Real;
use crate::{Error, Result};

/// Step-size control for [`Integrator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_steps: usize,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<T>,
    /// Upper bound on any accepted step.
    pub max_step: Option<T>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_steps: 1_000_000,
            initial_step: None,
            max_step: None,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn with_tolerance(tol: T) -> Self {
        SolverConfig {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite")))
            }
        };
        positive("abs_tol", self.abs_tol)?;
        positive("rel_tol", self.rel_tol)?;
        if let Some(h) = self.initial_step {
            positive("initial_step", h)?;
        }
        if let Some(h) = self.max_step {
            positive("max_step", h)?;
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Hairer's continuous extension coefficients for the 4th-order dense output
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<T, const N: usize> {
    pub t_start: T,
    pub t_end: T,
    coeffs: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn start(&self) -> &[T; N] {
        &self.coeffs[0]
    }

    /// Fourth-order interpolant on `[t_start, t_end]`.
    pub fn eval(&self, t: T) -> [T; N] {
        let h = self.t_end - self.t_start;
        let s = (t - self.t_start) / h;
        let s1 = T::one() - s;
        let c = &self.coeffs;
        let mut y = [T::zero(); N];
        for i in 0..N {
            y[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        y
    }
}

/// Stateful integrator for `dy/dt = rhs(t, y)` marching forward in time.
///
/// Each call to [`Integrator::advance_to`] lands exactly on the requested
/// time, so results at a grid never involve interpolation.
#[derive(Debug, Clone)]
pub struct Integrator<T, const N: usize> {
    t: T,
    y: [T; N],
    dy: [T; N],
    h: T,
    cfg: SolverConfig<T>,
    steps: usize,
    // low-order bits lost when adding increments to `y` (compensated summation)
    carry: [T; N],
}

impl<T: Real, const N: usize> Integrator<T, N> {
    pub fn new<F>(rhs: &mut F, t0: T, y0: [T; N], cfg: SolverConfig<T>) -> Result<Self>
    where
        F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    {
        cfg.validate()?;
        let dy = rhs(t0, &y0)?;
        Ok(Integrator {
            t: t0,
            y: y0,
            dy,
            h: cfg.initial_step.unwrap_or_else(T::zero),
            cfg,
            steps: 0,
            carry: [T::zero(); N],
        })
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn state(&self) -> &[T; N] {
        &self.y
    }

    pub fn derivative(&self) -> &[T; N] {
        &self.dy
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn scale(&self, a: T, b: T) -> T {
        self.cfg.abs_tol + self.cfg.rel_tol * a.abs().max(b.abs())
    }

    fn rms(&self, v: &[T; N], reference: &[T; N]) -> T {
        let mut sum = T::zero();
        for i in 0..N {
            let r = v[i] / self.scale(reference[i], reference[i]);
            sum = sum + r * r;
        }
        (sum / T::from_usize(N).unwrap()).sqrt()
    }

    /// Hairer-Norsett-Wanner starting step heuristic.
    fn initial_step<F>(&self, rhs: &mut F, span: T) -> Result<T>
    where
        F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    {
        let d0 = self.rms(&self.y, &self.y);
        let d1 = self.rms(&self.dy, &self.y);
        let small = T::lit(1e-5);
        let mut h0 = if d0 < small || d1 < small {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        h0 = h0.min(span);
        let mut y1 = self.y;
        for (y, dy) in y1.iter_mut().zip(&self.dy) {
            *y = *y + h0 * *dy;
        }
        let f1 = rhs(self.t + h0, &y1)?;
        let mut diff = [T::zero(); N];
        for i in 0..N {
            diff[i] = f1[i] - self.dy[i];
        }
        let d2 = self.rms(&diff, &self.y) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / dmax).powf(T::lit(0.2))
        };
        Ok((T::lit(100.0) * h0).min(h1).min(span))
    }

    /// Integrates up to exactly `t_end`, invoking `on_step` after every
    /// accepted step.
    pub fn advance_to<F, S>(&mut self, rhs: &mut F, t_end: T, mut on_step: S) -> Result<()>
    where
        F: FnMut(T, &[T; N]) -> Result<[T; N]>,
        S: FnMut(&DenseStep<T, N>),
    {
        if t_end <= self.t {
            return Ok(());
        }
        if self.h <= T::zero() {
            self.h = self.initial_step(rhs, t_end - self.t)?;
        }
        let eps = T::epsilon();
        while self.t < t_end {
            if self.steps >= self.cfg.max_steps {
                return Err(Error::MaxStepsExceeded {
                    t: self.t.as_f64(),
                    max_steps: self.cfg.max_steps,
                });
            }
            let mut h = self.h;
            if let Some(hmax) = self.cfg.max_step {
                h = h.min(hmax);
            }
            let remaining = t_end - self.t;
            let last = h >= remaining * (T::one() - T::lit(4.0) * eps);
            if last {
                h = remaining;
            } else if remaining < h * T::lit(1.01) {
                // avoid leaving a sliver before t_end
                h = remaining / T::lit(2.0);
            }
            if h <= T::lit(16.0) * eps * self.t.abs().max(T::one()) {
                return Err(Error::StepUnderflow {
                    t: self.t.as_f64(),
                    h: h.as_f64(),
                });
            }

            let (k, inc, err) = self.trial(rhs, h)?;
            let mut y_new = k[7];
            let dy_new = k[6];
            self.steps += 1;
            let fac = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2)))
                    .max(T::lit(0.2))
                    .min(T::lit(5.0))
            };
            if err <= T::one() {
                for i in 0..N {
                    let add = inc[i] + self.carry[i];
                    y_new[i] = self.y[i] + add;
                    self.carry[i] = add - (y_new[i] - self.y[i]);
                }
                let t_new = if last { t_end } else { self.t + h };
                let mut coeffs = [[T::zero(); N]; 5];
                for i in 0..N {
                    let diff = y_new[i] - self.y[i];
                    let bspl = h * k[0][i] - diff;
                    let mut d = T::zero();
                    for (s, ks) in k.iter().take(7).enumerate() {
                        d = d + T::lit(D[s]) * ks[i];
                    }
                    coeffs[0][i] = self.y[i];
                    coeffs[1][i] = diff;
                    coeffs[2][i] = bspl;
                    coeffs[3][i] = diff - h * dy_new[i] - bspl;
                    coeffs[4][i] = h * d;
                }
                let step = DenseStep {
                    t_start: self.t,
                    t_end: t_new,
                    coeffs,
                };
                self.t = t_new;
                self.y = y_new;
                self.dy = dy_new;
                on_step(&step);
                // keep the controller's proposal, not a step truncated to hit t_end
                if !last || fac < T::one() {
                    self.h = h * fac;
                }
            } else {
                self.h = h * fac.min(T::one());
            }
        }
        Ok(())
    }

    /// Returns the seven stage derivatives followed by the new state, the
    /// increment `y_new - y` before rounding, and the error norm.
    #[allow(clippy::type_complexity)]
    fn trial<F>(&self, rhs: &mut F, h: T) -> Result<([[T; N]; 8], [T; N], T)>
    where
        F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    {
        let mut k = [[T::zero(); N]; 8];
        k[0] = self.dy;
        let mut y_stage = self.y;
        let mut inc = [T::zero(); N];
        for s in 1..7 {
            for i in 0..N {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + T::lit(A[s][j]) * kj[i];
                }
                inc[i] = h * acc;
                y_stage[i] = self.y[i] + inc[i];
            }
            k[s] = rhs(self.t + T::lit(C[s]) * h, &y_stage)?;
        }
        // y_stage holds the 5th-order solution (FSAL row)
        let y_new = y_stage;
        k[7] = y_new;
        let mut sum = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (s, ks) in k.iter().take(7).enumerate() {
                e = e + T::lit(E[s]) * ks[i];
            }
            let r = h * e / self.scale(self.y[i], y_new[i]);
            sum = sum + r * r;
        }
        let err = (sum / T::from_usize(N).unwrap()).sqrt();
        Ok((k, inc, if err.is_finite() { err } else { T::lit(1e10) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_lands_on_targets() {
        let mut rhs = oscillator;
        let mut ode = Integrator::new(&mut rhs, 0.0, [1.0, 0.0], SolverConfig::default()).unwrap();
        for k in 1..=20 {
            let t = k as f64 * 0.5;
            ode.advance_to(&mut rhs, t, |_| {}).unwrap();
            assert_eq!(ode.t(), t);
            assert!((ode.state()[0] - t.cos()).abs() < 1e-8);
            assert!((ode.state()[1] + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn step_cap_does_not_strand_a_sliver() {
        // 0.05 k is not a multiple of the cap in binary, so naive capping
        // leaves remainders of a few ulps before some targets
        let mut rhs = oscillator;
        let cfg = SolverConfig {
            max_step: Some(0.01),
            ..SolverConfig::with_tolerance(1e-12)
        };
        let mut ode = Integrator::new(&mut rhs, 0.0, [1.0, 0.0], cfg).unwrap();
        for k in 1..=200 {
            let t = k as f64 * 0.05;
            ode.advance_to(&mut rhs, t, |_| {}).unwrap();
            assert!((ode.state()[0] - t.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn exponential_growth_relative_accuracy() {
        let mut rhs = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        let cfg = SolverConfig::with_tolerance(1e-12);
        let mut ode = Integrator::new(&mut rhs, 0.0, [1.0], cfg).unwrap();
        ode.advance_to(&mut rhs, 20.0, |_| {}).unwrap();
        let exact = 20f64.exp();
        assert!(((ode.state()[0] - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn fixed_step_order_is_five() {
        let run = |h: f64| {
            let cfg = SolverConfig {
                abs_tol: 1.0,
                rel_tol: 1.0,
                max_step: Some(h),
                initial_step: Some(h),
                ..SolverConfig::default()
            };
            let mut rhs = oscillator;
            let mut ode = Integrator::new(&mut rhs, 0.0, [1.0, 0.0], cfg).unwrap();
            ode.advance_to(&mut rhs, 2.0, |_| {}).unwrap();
            (ode.state()[0] - 2f64.cos()).abs()
        };
        let ratio = run(0.04) / run(0.02);
        assert!(ratio > 25.0 && ratio < 40.0, "ratio {ratio}");
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let mut rhs = oscillator;
        let mut ode = Integrator::new(
            &mut rhs,
            0.0,
            [1.0, 0.0],
            SolverConfig::with_tolerance(1e-10),
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        ode.advance_to(&mut rhs, 30.0, |step| {
            for j in 0..=10 {
                let t = step.t_start + (step.t_end - step.t_start) * j as f64 / 10.0;
                let y = step.eval(t);
                worst = worst
                    .max((y[0] - t.cos()).abs())
                    .max((y[1] + t.sin()).abs());
            }
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn max_steps_and_bad_config() {
        let mut rhs = oscillator;
        let cfg = SolverConfig {
            max_steps: 3,
            ..SolverConfig::default()
        };
        let mut ode = Integrator::new(&mut rhs, 0.0, [1.0, 0.0], cfg).unwrap();
        assert!(matches!(
            ode.advance_to(&mut rhs, 100.0, |_| {}),
            Err(Error::MaxStepsExceeded { .. })
        ));
        let bad = SolverConfig {
            abs_tol: -1.0,
            ..SolverConfig::default()
        };
        assert!(Integrator::new(&mut rhs, 0.0, [1.0, 0.0], bad).is_err());
    }

    #[test]
    fn rhs_errors_propagate() {
        let mut rhs = |t: f64, y: &[f64; 1]| {
            if t > 1.0 {
                Err(Error::Config("boom".into()))
            } else {
                Ok([y[0]])
            }
        };
        let mut ode = Integrator::new(&mut rhs, 0.0, [1.0], SolverConfig::default()).unwrap();
        assert!(ode.advance_to(&mut rhs, 2.0, |_| {}).is_err());
    }
}
