//! CSV output. Numbers carry 17 significant digits so doubles round-trip.

use std::fmt::Write as _;

use lrosc::observables::ellipse;
use lrosc::simulation::spaced_grid;
use lrosc::{Simulation, Snapshot, StateSpec};

pub const TRAJECTORY_HEADER: &str =
    "t,q_mean,p_mean,var_q,var_p,cov_qp,theta,re_beta,im_beta,omega_I_sq,energy";
pub const ELLIPSE_HEADER: &str = "t,axis_major,axis_minor,tilt";

pub fn num(x: f64) -> String {
    // print -0 as 0
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn metadata(lines: &[String]) -> String {
    let mut out = format!("# lrosc {}\n", env!("CARGO_PKG_VERSION"));
    for l in lines {
        let _ = writeln!(out, "# {l}");
    }
    out
}

fn row(s: &Snapshot) -> String {
    let m = &s.moments;
    [
        m.t,
        m.q_mean,
        m.p_mean,
        m.var_q,
        m.var_p,
        m.cov_qp,
        s.theta,
        s.beta.re,
        s.beta.im,
        s.omega_i_sq,
        m.energy,
    ]
    .map(num)
    .join(",")
}

pub fn trajectory(
    sim: &Simulation,
    state: &StateSpec,
    t0: f64,
    t1: f64,
    dt: f64,
) -> lrosc::Result<String> {
    let mut out = String::new();
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for t in spaced_grid(t0, t1, dt) {
        out.push_str(&row(&sim.snapshot(state, t)?));
        out.push('\n');
    }
    Ok(out)
}

/// Ellipse rows at `t0, t0 + every, ...` up to `t1`.
pub fn ellipses(
    sim: &Simulation,
    state: &StateSpec,
    t0: f64,
    t1: f64,
    every: f64,
) -> lrosc::Result<String> {
    let mut out = String::new();
    out.push_str(ELLIPSE_HEADER);
    out.push('\n');
    let mut k = 0u32;
    loop {
        let t = t0 + every * k as f64;
        if t > t1 + 1e-9 * every {
            break;
        }
        let t = t.min(t1);
        let m = sim.moments(state, t)?;
        let e = ellipse(m.var_q, m.var_p, m.cov_qp)?;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(t),
            num(e.major),
            num(e.minor),
            num(e.tilt)
        );
        k += 1;
    }
    Ok(out)
}
