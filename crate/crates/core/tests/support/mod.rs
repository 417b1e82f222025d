//! Double-double scalar for reference runs of the generic solvers.
//!
//! Arithmetic comes from `twofloat`; `exp`, `sin`, `cos` and `epsilon` are
//! replaced because the upstream versions lose accuracy (or, for `epsilon`,
//! return the smallest positive value).

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use twofloat::TwoFloat;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd(pub TwoFloat);

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd(<TwoFloat as From<f64>>::from(x))
    }

    pub fn hi(self) -> f64 {
        self.0.hi()
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! binary_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Dd {
            type Output = Dd;
            fn $m(self, rhs: Dd) -> Dd {
                Dd(self.0.$m(rhs.0))
            }
        }
    )*};
}
binary_ops!(Add add, Sub sub, Mul mul, Div div, Rem rem);

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd(TwoFloat::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd(TwoFloat::one())
    }
}

impl Num for Dd {
    type FromStrRadixErr = <TwoFloat as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        TwoFloat::from_str_radix(s, radix).map(Dd)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.0.to_f64()
    }
}

impl NumCast for Dd {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(Dd::new)
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Self> {
        TwoFloat::from_i64(n).map(Dd)
    }
    fn from_u64(n: u64) -> Option<Self> {
        TwoFloat::from_u64(n).map(Dd)
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Dd::new(n))
    }
}

macro_rules! consts {
    ($($c:ident),*) => {$(
        fn $c() -> Self {
            Dd(<TwoFloat as FloatConst>::$c())
        }
    )*};
}

impl FloatConst for Dd {
    consts!(
        E,
        FRAC_1_PI,
        FRAC_1_SQRT_2,
        FRAC_2_PI,
        FRAC_2_SQRT_PI,
        FRAC_PI_2,
        FRAC_PI_3,
        FRAC_PI_4,
        FRAC_PI_6,
        FRAC_PI_8,
        LN_10,
        LN_2,
        LOG10_E,
        LOG2_E,
        PI,
        SQRT_2
    );
}

/// `e^x` by reduction `x = k ln 2 + 1024 r` and a Taylor series for `e^r - 1`.
fn exp(x: TwoFloat) -> TwoFloat {
    if x.hi() > 709.0 {
        return TwoFloat::INFINITY;
    }
    if x.hi() < -745.0 {
        return TwoFloat::zero();
    }
    let ln2 = <TwoFloat as FloatConst>::LN_2();
    let k = (x.hi() / ln2.hi()).round();
    let r = (x - ln2 * k) / 1024.0;
    let mut term = r;
    let mut sum = r;
    for n in 2..=12 {
        term = term * r / n as f64;
        sum += term;
    }
    for _ in 0..10 {
        sum = sum * 2.0 + sum * sum;
    }
    (sum + 1.0) * 2f64.powi(k as i32)
}

/// `(sin x, cos x)` by reduction modulo `pi/2` and Taylor series on `[-pi/4, pi/4]`.
fn sin_cos(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let half_pi = <TwoFloat as FloatConst>::FRAC_PI_2();
    let j = (x.hi() / half_pi.hi()).round();
    let r = x - half_pi * j;
    let r2 = r * r;
    let (mut s, mut c) = (r, TwoFloat::one());
    let (mut ts, mut tc) = (r, TwoFloat::one());
    for k in 1..=15 {
        let k = k as f64;
        ts = -ts * r2 / ((2.0 * k) * (2.0 * k + 1.0));
        tc = -tc * r2 / ((2.0 * k - 1.0) * (2.0 * k));
        s += ts;
        c += tc;
    }
    match (j as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

macro_rules! unary {
    ($($m:ident),*) => {$(
        fn $m(self) -> Self {
            Dd(Float::$m(self.0))
        }
    )*};
}

macro_rules! predicate {
    ($($m:ident),*) => {$(
        fn $m(self) -> bool {
            Float::$m(self.0)
        }
    )*};
}

macro_rules! constant {
    ($($m:ident),*) => {$(
        fn $m() -> Self {
            Dd(<TwoFloat as Float>::$m())
        }
    )*};
}

impl Float for Dd {
    constant!(
        nan,
        infinity,
        neg_infinity,
        neg_zero,
        min_value,
        min_positive_value,
        max_value
    );
    predicate!(
        is_nan,
        is_infinite,
        is_finite,
        is_normal,
        is_sign_positive,
        is_sign_negative
    );
    unary!(
        floor, ceil, round, trunc, fract, abs, signum, recip, sqrt, exp2, ln, log2, log10, cbrt,
        tan, asin, acos, atan, exp_m1, ln_1p, sinh, cosh, tanh, asinh, acosh, atanh
    );

    fn epsilon() -> Self {
        Dd::new(2f64.powi(-104))
    }
    fn classify(self) -> FpCategory {
        Float::classify(self.0)
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn powi(self, n: i32) -> Self {
        Dd(Float::powi(self.0, n))
    }
    fn powf(self, n: Self) -> Self {
        (n * self.ln()).exp()
    }
    fn exp(self) -> Self {
        Dd(exp(self.0))
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn max(self, other: Self) -> Self {
        if self >= other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self <= other || other.is_nan() {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Self {
        Dd(sin_cos(self.0).0)
    }
    fn cos(self) -> Self {
        Dd(sin_cos(self.0).1)
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = sin_cos(self.0);
        (Dd(s), Dd(c))
    }
    fn atan2(self, other: Self) -> Self {
        Dd(Float::atan2(self.0, other.0))
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        Float::integer_decode(self.0.hi())
    }
}

impl lrosc::Real for Dd {}
