//! c-number data of the forced invariant `B = b + beta`.
//!
//! `beta(t) = e^{-i Theta} (beta0 - i J(t))` with
//! `J(t) = int_{t0}^t sqrt(g_-/(2 omega_I)) M F e^{i Theta} dt'`, and the
//! force-driven part `F_cal(t) = e^{-i Theta} beta0 - beta(t) = i e^{-i Theta} J(t)`.

use std::sync::{Arc, RwLock};

use num_complex::Complex;

use crate::invariant::PhaseNode;
use crate::invariant::{InvariantFrame, PhaseAccumulator, QuadratureRule};
use crate::quad::{adaptive_simpson, composite_simpson};
use crate::scalar::Real;
use crate::Result;

/// Drift data at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSample<T> {
    pub t: T,
    pub theta: T,
    /// `J(t)`, the accumulated force integral.
    pub integral: Complex<T>,
    pub beta: Complex<T>,
    pub f_cal: Complex<T>,
}

/// `beta0` that turns the forced invariant into the instantaneous Hamiltonian
/// at `t0` (up to an additive constant):
/// `beta0 = -(1/2) (M(t0)/omega_I) sqrt(2 g_-(t0)/omega_I) F(t0)`.
pub fn beta0_hamiltonian_matching<T: Real>(frame: &InvariantFrame<T>) -> Result<Complex<T>> {
    let model = frame.model();
    let s = frame.sample(model.t0)?;
    let w = frame.omega_i();
    let half = T::lit(0.5);
    let value =
        -half * (s.mass / w) * (T::lit(2.0) * s.g_minus / w).sqrt() * model.force(model.t0)?;
    Ok(Complex::new(value, T::zero()))
}

/// Constant separating the forced invariant from the Hamiltonian at `t0`,
/// `I_T(t0) = H_T(t0) + energy_offset`, when the unforced invariant equals
/// `H(t0)` and `beta0` is Hamiltonian-matched. It is `omega_I |beta0|^2`, which
/// equals `M F^2 / (2 w^2)` at `t0`.
pub fn energy_offset<T: Real>(frame: &InvariantFrame<T>, beta0: Complex<T>) -> T {
    frame.omega_i() * beta0.norm_sqr()
}

/// Force integral cached on the phase grid nodes.
#[derive(Debug)]
pub struct DriftState<T> {
    phase: Arc<PhaseAccumulator<T>>,
    beta0: Complex<T>,
    integrals: RwLock<Vec<Complex<T>>>,
}

/// Sets up the drift for a given `beta0`; integrals are computed on demand.
pub fn drift<T: Real>(phase: Arc<PhaseAccumulator<T>>, beta0: Complex<T>) -> DriftState<T> {
    DriftState {
        phase,
        beta0,
        integrals: RwLock::new(vec![Complex::new(T::zero(), T::zero())]),
    }
}

impl<T: Real> DriftState<T> {
    pub fn beta0(&self) -> Complex<T> {
        self.beta0
    }

    pub fn phase(&self) -> &Arc<PhaseAccumulator<T>> {
        &self.phase
    }

    /// `sqrt(g_-/(2 omega_I)) M F` at `t`.
    fn source(&self, t: T) -> Result<T> {
        let frame = self.phase.frame();
        let s = frame.sample(t)?;
        let force = frame.model().force(t)?;
        Ok((s.g_minus / (T::lit(2.0) * s.omega_i)).sqrt() * s.mass * force)
    }

    fn integrand(&self, node: PhaseNode<T>, t: T) -> Result<Complex<T>> {
        let theta = self.phase.theta_from(node, t)?;
        Ok(Complex::from_polar(self.source(t)?, theta))
    }

    fn panel(&self, node: PhaseNode<T>, t: T) -> Result<Complex<T>> {
        if t == node.t {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let f = |x: T| self.integrand(node, x);
        match self.phase.config().drift_rule {
            QuadratureRule::Adaptive => adaptive_simpson(f, node.t, t, self.phase.config().tol),
            QuadratureRule::Simpson => composite_simpson(f, node.t, t, 1),
        }
    }

    fn integral_at_node(&self, k: usize, t: T) -> Result<Complex<T>> {
        {
            let cache = self.integrals.read().expect("drift cache lock poisoned");
            if let Some(j) = cache.get(k) {
                return Ok(*j);
            }
        }
        let mut cache = self.integrals.write().expect("drift cache lock poisoned");
        let nodes = self.phase.with_nodes(t, |nodes| nodes[..=k].to_vec())?;
        while cache.len() <= k {
            let j = cache.len();
            let next = cache[j - 1] + self.panel(nodes[j - 1], nodes[j].t)?;
            cache.push(next);
        }
        Ok(cache[k])
    }

    pub fn sample(&self, t: T) -> Result<DriftSample<T>> {
        let (k, node) = self.phase.node_before(t)?;
        let integral = self.integral_at_node(k, t)? + self.panel(node, t)?;
        let theta = self.phase.theta_from(node, t)?;
        let rotation = Complex::from_polar(T::one(), -theta);
        let i = Complex::new(T::zero(), T::one());
        Ok(DriftSample {
            t,
            theta,
            integral,
            beta: rotation * (self.beta0 - i * integral),
            f_cal: i * rotation * integral,
        })
    }

    pub fn beta(&self, t: T) -> Result<Complex<T>> {
        Ok(self.sample(t)?.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{catalog, OscillatorModel};
    use crate::expr::{Params, TimeFunction};
    use crate::invariant::{InvariantConstants, QuadratureConfig};
    use crate::ode::SolverConfig;

    fn params(pairs: &[(&str, f64)]) -> Params<f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn damped(force: &str, t1: f64) -> OscillatorModel<f64> {
        let p = params(&[
            ("m0", 1.0),
            ("gamma", 0.1),
            ("mu", 4.0),
            ("nu", 1.0 / 3.0),
            ("Omega", 1.0),
        ]);
        catalog("pulsating", &p, 0.0, t1)
            .unwrap()
            .with_force(TimeFunction::parse(force).unwrap())
            .unwrap()
    }

    fn setup(
        model: OscillatorModel<f64>,
        hamiltonian: bool,
        cfg: QuadratureConfig<f64>,
    ) -> Arc<PhaseAccumulator<f64>> {
        let model = Arc::new(model);
        let solver = SolverConfig::default();
        let basis = crate::classical::ClassicalBasis::for_model(&model, &solver).unwrap();
        let c = if hamiltonian {
            InvariantConstants::hamiltonian_matched(&model, &basis).unwrap()
        } else {
            InvariantConstants::default()
        };
        let frame = Arc::new(crate::invariant::build_frame(model, basis, c).unwrap());
        Arc::new(PhaseAccumulator::new(frame, cfg))
    }

    #[test]
    fn matching_values() {
        let constant = catalog(
            "constant",
            &params(&[("m", 1.0), ("omega", 1.0), ("F", 1.0)]),
            0.0,
            10.0,
        )
        .unwrap();
        let phase = setup(constant, true, QuadratureConfig::default());
        let b0 = beta0_hamiltonian_matching(phase.frame()).unwrap();
        assert!((b0.re + 0.5f64.sqrt()).abs() < 1e-15 && b0.im == 0.0);
        assert!((energy_offset(phase.frame(), b0) - 0.5).abs() < 1e-15);

        let pulsating = setup(damped("sin(t)", 40.0), false, QuadratureConfig::default());
        assert_eq!(
            beta0_hamiltonian_matching(pulsating.frame()).unwrap(),
            Complex::new(0.0, 0.0)
        );
    }

    #[test]
    fn stationary_drift_for_constant_force() {
        let constant = catalog(
            "constant",
            &params(&[("m", 1.0), ("omega", 1.0), ("F", 1.0)]),
            0.0,
            20.0,
        )
        .unwrap();
        let phase = setup(constant, true, QuadratureConfig::default());
        let b0 = beta0_hamiltonian_matching(phase.frame()).unwrap();
        let d = drift(phase, b0);
        for k in 0..=100 {
            let b = d.beta(0.2 * k as f64).unwrap();
            assert!((b - b0).norm() < 1e-10, "t={} beta={b}", 0.2 * k as f64);
        }
    }

    #[test]
    fn unforced_drift_rotates() {
        let phase = setup(damped("0", 40.0), false, QuadratureConfig::default());
        let b0 = Complex::new(0.3, -0.4);
        let d = drift(phase.clone(), b0);
        for k in 0..=40 {
            let t = k as f64;
            let s = d.sample(t).unwrap();
            assert!((s.beta.norm() - 0.5).abs() < 1e-14);
            assert!((s.beta - b0 * Complex::from_polar(1.0, -t)).norm() < 1e-12);
            assert_eq!(s.f_cal, Complex::new(0.0, 0.0));
        }
        let zero = drift(phase, Complex::new(0.0, 0.0));
        assert_eq!(zero.beta(17.0).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn initial_values() {
        let phase = setup(
            damped("sin(t) + 0.5", 40.0),
            false,
            QuadratureConfig::default(),
        );
        let b0 = Complex::new(0.25, 0.1);
        let s = drift(phase, b0).sample(0.0).unwrap();
        assert_eq!(s.beta, b0);
        assert_eq!(s.f_cal, Complex::new(0.0, 0.0));
    }

    #[test]
    fn residual_of_the_drift_equation() {
        // d beta/dt + i (omega_I/(M g_-)) beta = -i M F sqrt(g_-/(2 omega_I))
        let phase = setup(damped("sin(t)", 40.0), false, QuadratureConfig::default());
        let d = drift(phase.clone(), Complex::new(0.0, 0.0));
        let h = 1e-4;
        let i = Complex::new(0.0, 1.0);
        for k in 1..80 {
            let t = 0.5 * k as f64;
            let (bm, b, bp) = (
                d.beta(t - h).unwrap(),
                d.beta(t).unwrap(),
                d.beta(t + h).unwrap(),
            );
            let s = phase.frame().sample(t).unwrap();
            let force = t.sin();
            let lhs = (bp - bm) / (2.0 * h) + i * s.phase_rate() * b;
            let rhs = -i * s.mass * force * (s.g_minus / (2.0 * s.omega_i)).sqrt();
            let scale = 1.0 + rhs.norm() + b.norm();
            assert!(
                (lhs - rhs).norm() / scale < 1e-7,
                "t={t}: {}",
                (lhs - rhs).norm()
            );
        }
    }

    #[test]
    fn linear_in_the_force() {
        let cfg = QuadratureConfig::default();
        let b1 = Complex::new(0.2, 0.0);
        let b2 = Complex::new(-0.7, 0.3);
        let d1 = drift(setup(damped("sin(t)", 20.0), false, cfg), b1);
        let d2 = drift(setup(damped("cos(2*t) - 0.3", 20.0), false, cfg), b2);
        let d12 = drift(
            setup(damped("sin(t) + (cos(2*t) - 0.3)", 20.0), false, cfg),
            b1 + b2,
        );
        for k in 0..=40 {
            let t = 0.5 * k as f64;
            let sum = d1.beta(t).unwrap() + d2.beta(t).unwrap();
            let both = d12.beta(t).unwrap();
            assert!((sum - both).norm() < 1e-10 * (1.0 + both.norm()), "t={t}");
        }
    }

    #[test]
    fn forced_part_independent_of_beta0_phase() {
        let phase = setup(damped("sin(t)", 30.0), false, QuadratureConfig::default());
        let a = drift(phase.clone(), Complex::new(0.0, 0.0));
        let b = drift(phase, Complex::from_polar(0.8, 1.1));
        for k in 0..=30 {
            let t = k as f64;
            let (fa, fb) = (a.sample(t).unwrap().f_cal, b.sample(t).unwrap().f_cal);
            assert!((fa.norm_sqr() - fb.norm_sqr()).abs() <= 1e-12 * (1.0 + fa.norm_sqr()));
        }
    }

    #[test]
    fn simpson_rule_is_fourth_order() {
        let model = || {
            catalog(
                "constant",
                &params(&[("m", 1.0), ("omega", 1.0)]),
                0.0,
                10.0,
            )
            .unwrap()
            .with_force(TimeFunction::parse("cos(2*t) + sin(3*t)").unwrap())
            .unwrap()
        };
        let rule = |h: Option<f64>, drift_rule| QuadratureConfig {
            tol: 1e-13,
            max_panel: h,
            drift_rule,
        };
        let exact = drift(
            setup(model(), false, rule(None, QuadratureRule::Adaptive)),
            Complex::new(0.0, 0.0),
        );
        let coarse = drift(
            setup(model(), false, rule(Some(0.2), QuadratureRule::Simpson)),
            Complex::new(0.0, 0.0),
        );
        let fine = drift(
            setup(model(), false, rule(Some(0.1), QuadratureRule::Simpson)),
            Complex::new(0.0, 0.0),
        );
        let reference = exact.sample(10.0).unwrap().integral;
        let e1 = (coarse.sample(10.0).unwrap().integral - reference).norm();
        let e2 = (fine.sample(10.0).unwrap().integral - reference).norm();
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} ({e1}, {e2})");
    }
}
