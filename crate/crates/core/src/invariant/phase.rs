use std::sync::{Arc, RwLock};

use super::InvariantFrame;
use crate::quad::adaptive_simpson;
use crate::scalar::Real;
use crate::Result;

/// Rule used for the drift integral on each panel of the phase grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    /// Adaptive Simpson to the configured tolerance.
    #[default]
    Adaptive,
    /// One plain Simpson panel per grid interval (fixed order 4).
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Absolute tolerance per grid panel.
    pub tol: T,
    /// Upper bound on the grid spacing; defaults to a sixteenth of the model interval.
    pub max_panel: Option<T>,
    pub drift_rule: QuadratureRule,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        QuadratureConfig {
            tol: T::lit(1e-11),
            max_panel: None,
            drift_rule: QuadratureRule::Adaptive,
        }
    }
}

/// A node of the monotone phase grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNode<T> {
    pub t: T,
    pub theta: T,
}

/// Cumulative `Theta(t) = int_{t0}^t omega_I / (M g_-) dt'`.
///
/// Nodes are appended lazily as later times are requested; each panel spans at
/// most an eighth of a radian-cycle (`pi/8` of phase). Readers share the grid,
/// a single writer extends it.
#[derive(Debug)]
pub struct PhaseAccumulator<T> {
    frame: Arc<InvariantFrame<T>>,
    cfg: QuadratureConfig<T>,
    max_panel: T,
    grid: RwLock<Vec<PhaseNode<T>>>,
}

impl<T: Real> PhaseAccumulator<T> {
    pub fn new(frame: Arc<InvariantFrame<T>>, cfg: QuadratureConfig<T>) -> Self {
        let model = frame.model();
        let span = model.t1 - model.t0;
        let max_panel = cfg.max_panel.unwrap_or(span / T::lit(16.0)).min(span);
        let start = PhaseNode {
            t: model.t0,
            theta: T::zero(),
        };
        PhaseAccumulator {
            frame,
            cfg,
            max_panel,
            grid: RwLock::new(vec![start]),
        }
    }

    pub fn frame(&self) -> &Arc<InvariantFrame<T>> {
        &self.frame
    }

    pub fn config(&self) -> &QuadratureConfig<T> {
        &self.cfg
    }

    fn rate(&self, t: T) -> Result<T> {
        Ok(self.frame.sample(t)?.phase_rate())
    }

    fn panel_width(&self, t: T) -> Result<T> {
        let t1 = self.frame.model().t1;
        let limit = T::PI() / T::lit(8.0);
        let mut h = self.max_panel.min(t1 - t);
        for _ in 0..60 {
            let r = self
                .rate(t)?
                .max(self.rate(t + h / T::lit(2.0))?)
                .max(self.rate(t + h)?);
            if r * h <= limit {
                break;
            }
            h = h / T::lit(2.0);
        }
        Ok(h)
    }

    /// Θ from an already known node: `node.theta + int_{node.t}^t rate`.
    pub fn theta_from(&self, node: PhaseNode<T>, t: T) -> Result<T> {
        if t == node.t {
            return Ok(node.theta);
        }
        Ok(node.theta + adaptive_simpson(|s| self.rate(s), node.t, t, self.cfg.tol)?)
    }

    fn covered(nodes: &[PhaseNode<T>], t: T, t1: T) -> bool {
        let last = nodes[nodes.len() - 1].t;
        last >= t || last >= t1
    }

    /// Runs `f` on the grid after making sure it reaches `t`.
    pub fn with_nodes<R>(&self, t: T, f: impl FnOnce(&[PhaseNode<T>]) -> R) -> Result<R> {
        let model = self.frame.model();
        model.check_domain(t)?;
        let t1 = model.t1;
        {
            let grid = self.grid.read().expect("phase grid lock poisoned");
            if Self::covered(&grid, t, t1) {
                return Ok(f(&grid));
            }
        }
        let mut grid = self.grid.write().expect("phase grid lock poisoned");
        while !Self::covered(&grid, t, t1) {
            let last = grid[grid.len() - 1];
            let h = self.panel_width(last.t)?;
            let next = if last.t + h >= t1 - T::epsilon() * t1.abs().max(T::one()) * T::lit(8.0) {
                t1
            } else {
                last.t + h
            };
            let theta = self.theta_from(last, next)?;
            grid.push(PhaseNode { t: next, theta });
        }
        Ok(f(&grid))
    }

    /// Index and value of the last node not after `t`.
    pub fn node_before(&self, t: T) -> Result<(usize, PhaseNode<T>)> {
        self.with_nodes(t, |nodes| {
            let k = nodes.partition_point(|n| n.t <= t).max(1) - 1;
            (k, nodes[k])
        })
    }

    pub fn theta(&self, t: T) -> Result<T> {
        let (_, node) = self.node_before(t)?;
        self.theta_from(node, t)
    }

    /// Number of grid nodes built so far.
    pub fn grid_len(&self) -> usize {
        self.grid.read().expect("phase grid lock poisoned").len()
    }
}
