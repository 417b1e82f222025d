//! Simpson quadrature, adaptive and composite, for real or complex integrands.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::scalar::Real;
use crate::{Error, Result};

/// Values that can be integrated: closed under addition and real scaling.
pub trait Integrand<T>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> T;
}

impl<T: Real> Integrand<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> Integrand<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn magnitude(self) -> T {
        self.norm()
    }
}

const MAX_DEPTH: u32 = 48;

struct Adaptive<F> {
    f: F,
}

impl<F> Adaptive<F> {
    #[allow(clippy::too_many_arguments)]
    fn refine<T, V>(
        &mut self,
        a: T,
        b: T,
        fa: V,
        fm: V,
        fb: V,
        whole: V,
        tol: T,
        depth: u32,
    ) -> Result<V>
    where
        T: Real,
        V: Integrand<T>,
        F: FnMut(T) -> Result<V>,
    {
        let two = T::lit(2.0);
        let m = (a + b) / two;
        let lm = (a + m) / two;
        let rm = (m + b) / two;
        let flm = (self.f)(lm)?;
        let frm = (self.f)(rm)?;
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        let err = delta.magnitude();
        let fifteen = T::lit(15.0);
        let floor = T::lit(64.0) * T::epsilon() * (left.magnitude() + right.magnitude());
        let converged = err <= fifteen * tol || err <= floor;
        let too_narrow = lm == a || lm == m || rm == m || rm == b;
        if converged || too_narrow {
            return Ok(left + right + delta * (T::one() / fifteen));
        }
        if depth >= MAX_DEPTH {
            return Err(Error::QuadratureNonConvergence {
                a: a.as_f64(),
                b: b.as_f64(),
            });
        }
        let half = tol / two;
        let l = self.refine(a, m, fa, flm, fm, left, half, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, half, depth + 1)?;
        Ok(l + r)
    }
}

fn simpson<T: Real, V: Integrand<T>>(fa: V, fm: V, fb: V, width: T) -> V {
    (fa + fm * T::lit(4.0) + fb) * (width / T::lit(6.0))
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`,
/// with Richardson correction on every accepted panel.
pub fn adaptive_simpson<T, V, F>(f: F, a: T, b: T, tol: T) -> Result<V>
where
    T: Real,
    V: Integrand<T>,
    F: FnMut(T) -> Result<V>,
{
    if a == b {
        return Ok(V::zero());
    }
    let mut q = Adaptive { f };
    let m = (a + b) / T::lit(2.0);
    let fa = (q.f)(a)?;
    let fm = (q.f)(m)?;
    let fb = (q.f)(b)?;
    let whole = simpson(fa, fm, fb, b - a);
    q.refine(a, b, fa, fm, fb, whole, tol, 0)
}

/// Composite Simpson rule with `panels` equal panels (each with one midpoint).
pub fn composite_simpson<T, V, F>(mut f: F, a: T, b: T, panels: usize) -> Result<V>
where
    T: Real,
    V: Integrand<T>,
    F: FnMut(T) -> Result<V>,
{
    let panels = panels.max(1);
    let n = T::from_usize(panels).unwrap();
    let width = (b - a) / n;
    let mut acc = V::zero();
    let mut fa = f(a)?;
    for k in 0..panels {
        let left = a + width * T::from_usize(k).unwrap();
        let right = if k + 1 == panels { b } else { left + width };
        let fm = f((left + right) / T::lit(2.0))?;
        let fb = f(right)?;
        acc = acc + simpson(fa, fm, fb, right - left);
        fa = fb;
    }
    Ok(acc)
}
