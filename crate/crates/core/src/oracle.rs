//! Independent reference: direct integration of the Heisenberg equations for
//! the first and second moments,
//! `dX/dt = S X + u`, `dSigma/dt = S Sigma + Sigma S^T`,
//! with `S = [[0, 1/M], [-M omega^2, 0]]` and `u = (0, M F)`.
//!
//! Only the model functions are shared with the closed-form path.

use std::fmt::Write as _;

use crate::classical::OscillatorModel;
use crate::observables::MomentRecord;
use crate::ode::{Integrator, SolverConfig};
use crate::scalar::Real;
use crate::{Error, Result};

/// Tolerances used when none are given.
///
/// Second moments grow like `M(t)`, which can reach 1e6 on long pulsating
/// runs; absolute agreement near 1e-7 then needs relative accuracy close to
/// 1e-13, hence the tight default.
pub fn default_solver<T: Real>() -> SolverConfig<T> {
    SolverConfig::with_tolerance(T::lit(1e-14))
}

#[derive(Debug, Clone)]
pub struct OracleRun<T> {
    pub records: Vec<MomentRecord<T>>,
    /// Largest `|det Sigma(t) / det Sigma(t0) - 1|` over the grid.
    pub det_drift: T,
    pub steps: usize,
}

fn energy<T: Real>(model: &OscillatorModel<T>, r: &MomentRecord<T>) -> Result<T> {
    let p = model.point(r.t)?;
    let two = T::lit(2.0);
    Ok((r.var_p + r.p_mean * r.p_mean) / (two * p.mass)
        + p.mass * p.omega_sq * (r.var_q + r.q_mean * r.q_mean) / two
        - p.mass * p.force * r.q_mean)
}

fn record<T: Real>(model: &OscillatorModel<T>, t: T, y: &[T; 5]) -> Result<MomentRecord<T>> {
    let mut r = MomentRecord {
        t,
        q_mean: y[0],
        p_mean: y[1],
        var_q: y[2],
        var_p: y[3],
        cov_qp: y[4],
        energy: T::zero(),
    };
    r.energy = energy(model, &r)?;
    Ok(r)
}

/// Evolves `initial` (taken at `initial.t`) and reports the moments at each
/// grid time. The grid must be non-decreasing and start no earlier than `initial.t`.
pub fn evolve_moments<T: Real>(
    model: &OscillatorModel<T>,
    initial: &MomentRecord<T>,
    grid: &[T],
    cfg: &SolverConfig<T>,
) -> Result<OracleRun<T>> {
    let det0 = initial.var_q * initial.var_p - initial.cov_qp * initial.cov_qp;
    if !(initial.var_q > T::zero() && initial.var_p > T::zero() && det0 > T::zero()) {
        return Err(Error::NotPositiveDefinite {
            var_q: initial.var_q.as_f64(),
            var_p: initial.var_p.as_f64(),
            cov_qp: initial.cov_qp.as_f64(),
        });
    }
    model.check_domain(initial.t)?;
    let mut last = initial.t;
    for &t in grid {
        model.check_domain(t)?;
        if t < last {
            return Err(Error::Config(
                "oracle grid must be non-decreasing and start at or after t0".into(),
            ));
        }
        last = t;
    }

    let two = T::lit(2.0);
    let mut rhs = |t: T, y: &[T; 5]| -> Result<[T; 5]> {
        let p = model.point(t)?;
        let k = p.mass * p.omega_sq;
        Ok([
            y[1] / p.mass,
            -k * y[0] + p.mass * p.force,
            two * y[4] / p.mass,
            -two * k * y[4],
            y[3] / p.mass - k * y[2],
        ])
    };
    let y0 = [
        initial.q_mean,
        initial.p_mean,
        initial.var_q,
        initial.var_p,
        initial.cov_qp,
    ];
    let mut it = Integrator::new(&mut rhs, initial.t, y0, *cfg)?;
    let mut records = Vec::with_capacity(grid.len());
    let mut det_drift = T::zero();
    for &t in grid {
        it.advance_to(&mut rhs, t, |_| {})?;
        let y = it.state();
        let det = y[2] * y[3] - y[4] * y[4];
        det_drift = det_drift.max((det / det0 - T::one()).abs());
        records.push(record(model, t, y)?);
    }
    Ok(OracleRun {
        records,
        det_drift,
        steps: it.steps(),
    })
}

pub const QUANTITIES: [&str; 6] = ["q_mean", "p_mean", "var_q", "var_p", "cov_qp", "energy"];

/// Quantities judged on `|deviation| / max(1, |reference|)` rather than the
/// absolute deviation. The energy of a driven pulsating run reaches 1e6 and
/// is assembled from cancelling terms of that size, so an absolute bound near
/// 1e-6 would sit below its rounding floor.
pub const RELATIVE: [&str; 1] = ["energy"];

fn values<T: Copy>(r: &MomentRecord<T>) -> [T; 6] {
    [r.q_mean, r.p_mean, r.var_q, r.var_p, r.cov_qp, r.energy]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation<T> {
    pub quantity: &'static str,
    pub max_abs: T,
    /// Time of the largest absolute deviation.
    pub at: T,
    /// Largest `|deviation| / max(1, |reference|)`.
    pub max_scaled: T,
    pub relative: bool,
    pub passed: bool,
}

/// Per-quantity comparison of two moment series on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<T> {
    pub tol: T,
    pub deviations: Vec<Deviation<T>>,
}

impl<T: Real> VerifyReport<T> {
    pub fn passed(&self) -> bool {
        self.deviations.iter().all(|d| d.passed)
    }

    pub fn get(&self, quantity: &str) -> Option<&Deviation<T>> {
        self.deviations.iter().find(|d| d.quantity == quantity)
    }

    /// Deviation table as CSV (header row, LF endings).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "quantity,max_abs_deviation,t_at_max,max_scaled_deviation,criterion,tol,pass\n",
        );
        for d in &self.deviations {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
                d.quantity,
                d.max_abs.as_f64(),
                d.at.as_f64(),
                d.max_scaled.as_f64(),
                if d.relative { "scaled" } else { "abs" },
                self.tol.as_f64(),
                d.passed
            );
        }
        out
    }
}

/// Compares `closed` against `reference` record by record. Both must share the grid.
pub fn compare<T: Real>(
    closed: &[MomentRecord<T>],
    reference: &[MomentRecord<T>],
    tol: T,
) -> Result<VerifyReport<T>> {
    if closed.len() != reference.len() {
        return Err(Error::Config(format!(
            "cannot compare {} records against {}",
            closed.len(),
            reference.len()
        )));
    }
    let mut worst = [(T::zero(), T::zero()); 6];
    let mut scaled = [T::zero(); 6];
    for (a, b) in closed.iter().zip(reference) {
        if a.t != b.t {
            return Err(Error::Config(format!(
                "grids differ: {:?} vs {:?}",
                a.t.as_f64(),
                b.t.as_f64()
            )));
        }
        let (va, vb) = (values(a), values(b));
        for k in 0..6 {
            // NaN must never look like agreement
            let mut d = (va[k] - vb[k]).abs();
            if d.is_nan() {
                d = T::infinity();
            }
            if d > worst[k].0 {
                worst[k] = (d, a.t);
            }
            scaled[k] = scaled[k].max(d / vb[k].abs().max(T::one()));
        }
    }
    let deviations = QUANTITIES
        .iter()
        .enumerate()
        .map(|(k, &quantity)| {
            let relative = RELATIVE.contains(&quantity);
            let (max_abs, at) = worst[k];
            let measure = if relative { scaled[k] } else { max_abs };
            Deviation {
                quantity,
                max_abs,
                at,
                max_scaled: scaled[k],
                relative,
                passed: measure <= tol,
            }
        })
        .collect();
    Ok(VerifyReport { tol, deviations })
}
