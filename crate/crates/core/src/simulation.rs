//! End-to-end pipeline: model, classical basis, invariant frame, phase, drift,
//! and the moments they produce.

use std::sync::Arc;

use num_complex::Complex;

use crate::classical::{solve_basis, ClassicalBasis, OscillatorModel};
use crate::forced::{beta0_hamiltonian_matching, drift, energy_offset, DriftState};
use crate::invariant::{
    build_frame, InvariantConstants, InvariantFrame, PhaseAccumulator, QuadratureConfig,
};
use crate::observables::{moments_from, MomentRecord, StateSpec};
use crate::ode::SolverConfig;
use crate::oracle::{compare, evolve_moments, OracleRun, VerifyReport};
use crate::propagator::{step_from, PropagatorStep};
use crate::scalar::Real;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisChoice {
    /// Closed-form solutions when the model has them, numerical otherwise.
    #[default]
    Auto,
    Numeric,
}

/// How the constants of the invariant are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FramePolicy<T> {
    /// Explicit `(c1, c2, c3)` relative to the basis in use.
    Constants(InvariantConstants<T>),
    /// Prescribed `(g_-, g_0, g_+)` at `t0`.
    Initial { g_minus: T, g_zero: T, g_plus: T },
    /// Invariant equal to the unforced Hamiltonian at `t0`.
    HamiltonianMatched,
}

impl<T: Real> Default for FramePolicy<T> {
    fn default() -> Self {
        FramePolicy::Constants(InvariantConstants::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Beta0Policy<T> {
    /// Forced invariant matches the Hamiltonian at `t0` up to a constant.
    #[default]
    Matched,
    Zero,
    Explicit(Complex<T>),
}

#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub model: OscillatorModel<T>,
    pub basis: BasisChoice,
    pub frame: FramePolicy<T>,
    pub beta0: Beta0Policy<T>,
    pub solver: SolverConfig<T>,
    pub quadrature: QuadratureConfig<T>,
}

impl<T: Real> Scenario<T> {
    pub fn new(model: OscillatorModel<T>) -> Self {
        Scenario {
            model,
            basis: BasisChoice::default(),
            frame: FramePolicy::default(),
            beta0: Beta0Policy::default(),
            solver: SolverConfig::default(),
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn build(&self) -> Result<Simulation<T>> {
        self.solver.validate()?;
        let model = Arc::new(self.model.clone());
        let basis = match self.basis {
            BasisChoice::Auto => ClassicalBasis::for_model(&model, &self.solver)?,
            BasisChoice::Numeric => solve_basis(&model, &self.solver)?,
        };
        let constants = match self.frame {
            FramePolicy::Constants(c) => c,
            FramePolicy::Initial {
                g_minus,
                g_zero,
                g_plus,
            } => InvariantConstants::from_initial_coefficients(
                &basis.eval(&model, model.t0)?,
                g_minus,
                g_zero,
                g_plus,
            )?,
            FramePolicy::HamiltonianMatched => {
                InvariantConstants::hamiltonian_matched(&model, &basis)?
            }
        };
        let frame = Arc::new(build_frame(model, basis, constants)?);
        let beta0 = match self.beta0 {
            Beta0Policy::Matched => beta0_hamiltonian_matching(&frame)?,
            Beta0Policy::Zero => Complex::new(T::zero(), T::zero()),
            Beta0Policy::Explicit(b) => b,
        };
        let phase = Arc::new(PhaseAccumulator::new(frame, self.quadrature));
        Ok(Simulation {
            drift: drift(phase, beta0),
        })
    }
}

/// Everything reported for one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot<T> {
    pub moments: MomentRecord<T>,
    pub theta: T,
    pub beta: Complex<T>,
    /// `g_+ g_- - g_0^2` as sampled, a running check on the invariant.
    pub omega_i_sq: T,
}

/// A built pipeline. Evaluation only reads shared caches, so one simulation
/// can serve many threads.
#[derive(Debug)]
pub struct Simulation<T> {
    drift: DriftState<T>,
}

impl<T: Real> Simulation<T> {
    pub fn frame(&self) -> &Arc<InvariantFrame<T>> {
        self.drift.phase().frame()
    }

    pub fn model(&self) -> &Arc<OscillatorModel<T>> {
        self.frame().model()
    }

    pub fn drift(&self) -> &DriftState<T> {
        &self.drift
    }

    pub fn beta0(&self) -> Complex<T> {
        self.drift.beta0()
    }

    /// `omega_I |beta0|^2`.
    pub fn energy_offset(&self) -> T {
        energy_offset(self.frame(), self.beta0())
    }

    pub fn snapshot(&self, state: &StateSpec<T>, t: T) -> Result<Snapshot<T>> {
        state.validate()?;
        let frame = self.frame();
        let sample = frame.sample(t)?;
        let d = self.drift.sample(t)?;
        let point = frame.model().point(t)?;
        Ok(Snapshot {
            moments: moments_from(&sample, &d, &point, state),
            theta: d.theta,
            beta: d.beta,
            omega_i_sq: sample.omega_i_sq(),
        })
    }

    pub fn moments(&self, state: &StateSpec<T>, t: T) -> Result<MomentRecord<T>> {
        Ok(self.snapshot(state, t)?.moments)
    }

    pub fn initial_moments(&self, state: &StateSpec<T>) -> Result<MomentRecord<T>> {
        self.moments(state, self.model().t0)
    }

    pub fn step(&self, t: T) -> Result<PropagatorStep<T>> {
        let frame = self.frame();
        let initial = frame.sample(frame.model().t0)?;
        Ok(step_from(
            &initial,
            &frame.sample(t)?,
            &self.drift.sample(t)?,
        ))
    }

    pub fn closed_form(&self, state: &StateSpec<T>, grid: &[T]) -> Result<Vec<MomentRecord<T>>> {
        grid.iter().map(|&t| self.moments(state, t)).collect()
    }

    /// Reference run seeded with the closed-form moments at `t0`.
    pub fn oracle(
        &self,
        state: &StateSpec<T>,
        grid: &[T],
        cfg: &SolverConfig<T>,
    ) -> Result<OracleRun<T>> {
        evolve_moments(self.model(), &self.initial_moments(state)?, grid, cfg)
    }

    pub fn verify(
        &self,
        state: &StateSpec<T>,
        grid: &[T],
        tol: T,
        cfg: &SolverConfig<T>,
    ) -> Result<VerifyReport<T>> {
        let reference = self.oracle(state, grid, cfg)?;
        compare(&self.closed_form(state, grid)?, &reference.records, tol)
    }
}

/// `n + 1` evenly spaced times on `[t0, t1]`, with both ends exact.
pub fn uniform_grid<T: Real>(t0: T, t1: T, n: usize) -> Vec<T> {
    let n = n.max(1);
    let span = t1 - t0;
    let nf = T::from_usize(n).unwrap();
    (0..=n)
        .map(|k| {
            if k == n {
                t1
            } else {
                t0 + span * T::from_usize(k).unwrap() / nf
            }
        })
        .collect()
}

/// Grid with spacing `dt` from `t0`, ending exactly at `t1`.
pub fn spaced_grid<T: Real>(t0: T, t1: T, dt: T) -> Vec<T> {
    let steps = ((t1 - t0) / dt).as_f64();
    let n = (steps - 1e-9).ceil().max(1.0) as usize;
    if ((t0 + dt * T::from_usize(n).unwrap()) - t1).abs() <= dt * T::lit(1e-9) {
        uniform_grid(t0, t1, n)
    } else {
        let mut g: Vec<T> = (0..n)
            .map(|k| t0 + dt * T::from_usize(k).unwrap())
            .collect();
        g.push(t1);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::catalog;
    use crate::expr::{Params, TimeFunction};
    use crate::oracle::default_solver;

    fn params(pairs: &[(&str, f64)]) -> Params<f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn damped(force: &str) -> Scenario<f64> {
        let p = params(&[
            ("m0", 1.0),
            ("gamma", 0.1),
            ("mu", 4.0),
            ("nu", 1.0 / 3.0),
            ("Omega", 1.0),
        ]);
        Scenario::new(
            catalog("pulsating", &p, 0.0, 40.0)
                .unwrap()
                .with_force(TimeFunction::parse(force).unwrap())
                .unwrap(),
        )
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(0.0, 1.0, 4), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = spaced_grid(0.0, 40.0, 0.05);
        assert_eq!(g.len(), 801);
        assert_eq!(*g.last().unwrap(), 40.0);
        let g = spaced_grid(0.0, 1.0, 0.3);
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
    }

    #[test]
    fn damped_closed_form_agrees_with_oracle() {
        let sim = damped("sin(t)").build().unwrap();
        let state = StateSpec::coherent(5.0 / 2f64.sqrt(), 0.0).unwrap();
        let grid = spaced_grid(0.0, 40.0, 0.1);
        let report = sim.verify(&state, &grid, 1e-6, &default_solver()).unwrap();
        for q in ["q_mean", "p_mean", "var_q", "var_p", "cov_qp"] {
            assert!(report.get(q).unwrap().passed, "{}", report.to_csv());
        }
    }

    #[test]
    fn unforced_reduction() {
        let mut s = damped("0");
        s.beta0 = Beta0Policy::Zero;
        let sim = s.build().unwrap();
        let report = sim
            .verify(
                &StateSpec::coherent(1.0, 0.4).unwrap(),
                &spaced_grid(0.0, 12.0, 0.1),
                1e-8,
                &default_solver(),
            )
            .unwrap();
        assert!(report.passed(), "{}", report.to_csv());
    }

    #[test]
    fn corrupted_phase_is_detected() {
        let sim = damped("sin(t)").build().unwrap();
        let state = StateSpec::coherent(5.0 / 2f64.sqrt(), 0.0).unwrap();
        let grid = spaced_grid(0.0, 40.0, 0.1);
        let frame = sim.frame();
        let corrupted: Vec<_> = grid
            .iter()
            .map(|&t| {
                let s = frame.sample(t).unwrap();
                let mut d = sim.drift().sample(t).unwrap();
                d.theta += 1e-3;
                moments_from(&s, &d, &frame.model().point(t).unwrap(), &state)
            })
            .collect();
        let reference = sim.oracle(&state, &grid, &default_solver()).unwrap();
        let report = compare(&corrupted, &reference.records, 1e-6).unwrap();
        assert!(!report.passed());
        assert!(report.get("q_mean").unwrap().max_abs > 1e-3 * 0.5);
    }

    #[test]
    fn numeric_basis_with_prescribed_initial_coefficients() {
        // (g_-, g_0, g_+) of the analytic pulsating invariant at t0
        let g0 = 0.1 + 4.0 / 3.0;
        let mut numeric = damped("sin(t)");
        numeric.basis = BasisChoice::Numeric;
        numeric.frame = FramePolicy::Initial {
            g_minus: 1.0,
            g_zero: g0,
            g_plus: 1.0 + g0 * g0,
        };
        numeric.solver = SolverConfig::with_tolerance(1e-12);
        let numeric = numeric.build().unwrap();
        let analytic = damped("sin(t)").build().unwrap();
        assert!((numeric.frame().omega_i() - 1.0).abs() < 1e-12);
        let state = StateSpec::coherent(2.0, 0.3).unwrap();
        for t in [0.0, 5.0, 10.0] {
            let (a, b) = (
                analytic.moments(&state, t).unwrap(),
                numeric.moments(&state, t).unwrap(),
            );
            assert!(
                (a.q_mean - b.q_mean).abs() < 1e-6 * (1.0 + a.q_mean.abs()),
                "t={t}"
            );
            assert!((a.var_p - b.var_p).abs() < 1e-6 * (1.0 + a.var_p), "t={t}");
        }
    }

    #[test]
    fn snapshot_fields() {
        let sim = damped("sin(t)").build().unwrap();
        let s = sim.snapshot(&StateSpec::vacuum(), 3.0).unwrap();
        assert!((s.theta - 3.0).abs() < 1e-12);
        assert!((s.omega_i_sq - 1.0).abs() < 1e-12);
        assert_eq!(sim.beta0(), Complex::new(0.0, 0.0));
        assert_eq!(sim.energy_offset(), 0.0);
        assert!(sim
            .snapshot(&StateSpec::coherent(1.0, 0.0).unwrap(), 41.0)
            .is_err());
    }

    #[test]
    fn shared_across_threads() {
        let sim = damped("sin(t)").build().unwrap();
        let state = StateSpec::coherent(1.0, 0.0).unwrap();
        let serial: Vec<_> = (0..40)
            .map(|k| sim.moments(&state, k as f64).unwrap())
            .collect();
        let fresh = damped("sin(t)").build().unwrap();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|w| {
                    let fresh = &fresh;
                    scope.spawn(move || {
                        (0..40)
                            .rev()
                            .filter(|k| k % 4 == w)
                            .map(|k| (k, fresh.moments(&state, k as f64).unwrap()))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (k, m) in h.join().unwrap() {
                    let d = (m.q_mean - serial[k].q_mean).abs();
                    assert!(d <= 1e-12 * (1.0 + m.q_mean.abs()), "k={k}");
                }
            }
        });
    }
}
