use std::sync::Arc;

use num_complex::Complex;

use super::model::{AnalyticBasis, OscillatorModel};
use crate::ode::{DenseStep, Integrator, SolverConfig};
use crate::scalar::Real;
use crate::Result;

/// Values of the two basis solutions at one instant.
///
/// `momentum[i] = M(t) * df[i]` is carried alongside the derivative because it
/// is the variable that is actually integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisPoint<T> {
    pub t: T,
    pub mass: T,
    pub f: [T; 2],
    pub df: [T; 2],
    pub momentum: [T; 2],
}

impl<T: Real> BasisPoint<T> {
    /// `M (f1 f2' - f2 f1')`, a first integral of `(M f')' + M w^2 f = 0`.
    pub fn wronskian(&self) -> T {
        self.f[0] * self.momentum[1] - self.f[1] * self.momentum[0]
    }
}

/// Two independent solutions of `(M f')' + M w^2 f = 0`.
#[derive(Debug, Clone)]
pub enum ClassicalBasis<T> {
    Analytic(AnalyticBasis<T>),
    Numeric(Arc<NumericBasis<T>>),
}

impl<T: Real> ClassicalBasis<T> {
    /// The analytic basis when the model carries one, otherwise a numerical solve.
    pub fn for_model(model: &OscillatorModel<T>, cfg: &SolverConfig<T>) -> Result<Self> {
        match model.analytic_basis() {
            Some(a) => Ok(ClassicalBasis::Analytic(*a)),
            None => solve_basis(model, cfg),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, ClassicalBasis::Analytic(_))
    }

    /// Nominal Wronskian fixed by the construction of the basis.
    pub fn wronskian(&self) -> T {
        match self {
            ClassicalBasis::Analytic(AnalyticBasis::Harmonic { .. }) => T::one(),
            ClassicalBasis::Analytic(AnalyticBasis::Pulsating { omega, .. }) => *omega,
            ClassicalBasis::Numeric(n) => n.wronskian,
        }
    }

    pub fn eval(&self, model: &OscillatorModel<T>, t: T) -> Result<BasisPoint<T>> {
        match self {
            ClassicalBasis::Analytic(a) => Ok(analytic_point(a, model, t)?),
            ClassicalBasis::Numeric(n) => n.eval(model, t),
        }
    }
}

fn analytic_point<T: Real>(
    basis: &AnalyticBasis<T>,
    model: &OscillatorModel<T>,
    t: T,
) -> Result<BasisPoint<T>> {
    model.check_domain(t)?;
    match *basis {
        AnalyticBasis::Harmonic { m, omega, t0 } => {
            let (s, c) = (omega * (t - t0)).sin_cos();
            let mw = m * omega;
            Ok(BasisPoint {
                t,
                mass: m,
                f: [c, s / mw],
                df: [-omega * s, c / m],
                momentum: [-mw * s, c],
            })
        }
        AnalyticBasis::Pulsating {
            m0,
            gamma,
            mu,
            nu,
            omega,
        } => {
            let log_mass = T::lit(2.0) * (gamma * t + mu * (nu * t).sin());
            let mass = m0 * log_mass.exp();
            let root = mass.sqrt();
            // f = e^{i Omega t} / sqrt(M),  f' = f (i Omega - (ln sqrt M)')
            let rate = gamma + mu * nu * (nu * t).cos();
            let phase = Complex::new(T::zero(), omega * t).exp();
            let f = phase / root;
            let df = f * Complex::new(-rate, omega);
            Ok(BasisPoint {
                t,
                mass,
                f: [f.re, f.im],
                df: [df.re, df.im],
                momentum: [df.re * mass, df.im * mass],
            })
        }
    }
}

/// Dense numerical basis: accepted steps of an adaptive RK4(5) run with the
/// method's fourth-order continuous extension in between.
#[derive(Debug, Clone)]
pub struct NumericBasis<T> {
    // state [f1, M f1', f2, M f2'] on each step
    steps: Vec<DenseStep<T, 4>>,
    wronskian: T,
}

impl<T: Real> NumericBasis<T> {
    /// Step boundaries, starting at `t0`.
    pub fn times(&self) -> Vec<T> {
        std::iter::once(self.steps[0].t_start)
            .chain(self.steps.iter().map(|s| s.t_end))
            .collect()
    }

    pub fn eval(&self, model: &OscillatorModel<T>, t: T) -> Result<BasisPoint<T>> {
        model.check_domain(t)?;
        let n = self.steps.len();
        let k = self.steps.partition_point(|s| s.t_end < t).min(n - 1);
        let step = &self.steps[k];
        let t = t.max(step.t_start).min(step.t_end);
        let y = if t == step.t_start {
            *step.start()
        } else {
            step.eval(t)
        };
        let mass = model.mass(t)?;
        Ok(BasisPoint {
            t,
            mass,
            f: [y[0], y[2]],
            df: [y[1] / mass, y[3] / mass],
            momentum: [y[1], y[3]],
        })
    }
}

/// Integrates the classical equation on the model interval with
/// `f1(t0) = 1, f1'(t0) = 0, f2(t0) = 0, f2'(t0) = 1 / M(t0)`, so that the
/// Wronskian is exactly 1.
pub fn solve_basis<T: Real>(
    model: &OscillatorModel<T>,
    cfg: &SolverConfig<T>,
) -> Result<ClassicalBasis<T>> {
    let mut rhs = |t: T, y: &[T; 4]| -> Result<[T; 4]> {
        let mass = model.mass(t)?;
        let stiffness = mass * model.omega_sq(t)?;
        Ok([
            y[1] / mass,
            -stiffness * y[0],
            y[3] / mass,
            -stiffness * y[2],
        ])
    };
    let y0 = [T::one(), T::zero(), T::zero(), T::one()];
    let mut ode = Integrator::new(&mut rhs, model.t0, y0, *cfg)?;
    let mut steps = Vec::new();
    ode.advance_to(&mut rhs, model.t1, |step| steps.push(*step))?;
    Ok(ClassicalBasis::Numeric(Arc::new(NumericBasis {
        steps,
        wronskian: T::one(),
    })))
}
