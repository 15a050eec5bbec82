//! Positive functions on (0, inf) evaluated in logarithmic coordinates.
//!
//! A [`LogFn`] is queried through `x = ln t` and answers with `ln g(e^x)`, so
//! values such as `t^theta` at `t = e^700` stay representable. Each function
//! also describes its behaviour at both ends of the axis through an
//! [`Asymptote`], which is what the integrator uses to decide convergence
//! before it ever samples the tails.

use std::sync::Arc;

use crate::real::{lit, Real};

/// One end of the half line (0, inf).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum End {
    Zero,
    Infinity,
}

impl End {
    /// Maps the distance `s = |x|` toward this end back to `x`.
    #[inline]
    pub fn x_of<T: Real>(self, s: T) -> T {
        match self {
            End::Zero => -s,
            End::Infinity => s,
        }
    }

    pub fn other(self) -> End {
        match self {
            End::Zero => End::Infinity,
            End::Infinity => End::Zero,
        }
    }
}

/// Leading behaviour of `ln g` as `s = |ln t| -> inf` toward one end:
///
/// `ln g ~ rate * s + stretch * s^stretch_exp + log_power * ln s`.
///
/// `rate = -inf` encodes a function that vanishes identically (or faster than
/// any exponential in `s`) near that end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Asymptote<T> {
    pub rate: T,
    pub stretch: T,
    pub stretch_exp: T,
    pub log_power: T,
}

impl<T: Real> Asymptote<T> {
    pub fn flat() -> Self {
        Self {
            rate: T::zero(),
            stretch: T::zero(),
            stretch_exp: T::zero(),
            log_power: T::zero(),
        }
    }

    pub fn vanishing() -> Self {
        Self {
            rate: T::neg_infinity(),
            ..Self::flat()
        }
    }

    pub fn power(rate: T) -> Self {
        Self { rate, ..Self::flat() }
    }

    pub fn log(log_power: T) -> Self {
        Self {
            log_power,
            ..Self::flat()
        }
    }

    pub fn stretched(stretch: T, stretch_exp: T) -> Self {
        Self {
            stretch,
            stretch_exp,
            ..Self::flat()
        }
    }

    pub fn is_vanishing(&self) -> bool {
        self.rate == T::neg_infinity()
    }

    /// Asymptote of the product of two functions.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_vanishing() || other.is_vanishing() {
            return Self::vanishing();
        }
        let (stretch, stretch_exp) = if self.stretch == T::zero() {
            (other.stretch, other.stretch_exp)
        } else if other.stretch == T::zero() {
            (self.stretch, self.stretch_exp)
        } else if (self.stretch_exp - other.stretch_exp).abs() <= T::rate_eps() {
            (self.stretch + other.stretch, self.stretch_exp)
        } else if self.stretch_exp > other.stretch_exp {
            (self.stretch, self.stretch_exp)
        } else {
            (other.stretch, other.stretch_exp)
        };
        Self {
            rate: self.rate + other.rate,
            stretch,
            stretch_exp,
            log_power: self.log_power + other.log_power,
        }
    }

    /// Asymptote of `g^r`.
    pub fn scale(&self, r: T) -> Self {
        if self.is_vanishing() {
            return if r > T::zero() {
                *self
            } else if r == T::zero() {
                Self::flat()
            } else {
                Self::power(T::infinity())
            };
        }
        Self {
            rate: self.rate * r,
            stretch: self.stretch * r,
            stretch_exp: self.stretch_exp,
            log_power: self.log_power * r,
        }
    }

    /// Sign of the dominant term: -1 decaying, +1 growing, 0 for the
    /// borderline where the log power decides.
    fn leading_sign(&self) -> i8 {
        let eps = T::rate_eps();
        if self.rate < -eps {
            -1
        } else if self.rate > eps {
            1
        } else if self.stretch < -eps {
            -1
        } else if self.stretch > eps {
            1
        } else {
            0
        }
    }

    /// Whether `int g^q ds` converges toward this end.
    pub fn integrable(&self, q: T) -> bool {
        let a = self.scale(q);
        match a.leading_sign() {
            -1 => true,
            1 => false,
            _ => a.log_power < -T::one() - T::rate_eps(),
        }
    }

    /// Whether `g` stays bounded toward this end.
    pub fn bounded(&self) -> bool {
        match self.leading_sign() {
            -1 => true,
            1 => false,
            _ => self.log_power <= T::rate_eps(),
        }
    }

    /// Fits the asymptote of a function known only through samples of
    /// `ln g` at distance `s` toward the end.
    pub fn probe<F: Fn(T) -> T>(ln_at_s: F) -> Self {
        let s0: T = lit(512.0);
        let y0 = ln_at_s(s0);
        let y1 = ln_at_s(s0 + s0);
        let y2 = ln_at_s(lit::<T>(4.0) * s0);
        if y0 == T::neg_infinity() && y1 == T::neg_infinity() && y2 == T::neg_infinity() {
            return Self::vanishing();
        }
        if !(y0.is_finite() && y1.is_finite() && y2.is_finite()) {
            // Mixed infinities: treat as degenerate growth / decay.
            return if y2 == T::neg_infinity() {
                Self::vanishing()
            } else {
                Self::power(T::infinity())
            };
        }
        let d1 = y1 - y0;
        let d2 = y2 - y1;
        let l0 = s0.ln_1p();
        let l1 = (s0 + s0).ln_1p();
        let l2 = (lit::<T>(4.0) * s0).ln_1p();
        let (dl1, dl2) = (l1 - l0, l2 - l1);
        let mut log_power = (lit::<T>(2.0) * d1 - d2) / (lit::<T>(2.0) * dl1 - dl2);
        let mut rate = (d1 - log_power * dl1) / s0;
        if rate.abs() < lit::<T>(1e-9) {
            rate = T::zero();
        } else {
            // Exponential behaviour dominates; the log fit is meaningless.
            log_power = T::zero();
        }
        Self {
            rate,
            stretch: T::zero(),
            stretch_exp: T::zero(),
            log_power,
        }
    }
}

/// Piece of a power-log function on `[lo, hi]` in `x = ln t`:
/// `ln g = ln_c + rate * x + log_power * ln(1 + |x|)`.
///
/// Segments with a nonzero `log_power` never straddle `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub lo: T,
    pub hi: T,
    pub ln_c: T,
    pub rate: T,
    pub log_power: T,
}

impl<T: Real> Segment<T> {
    #[inline]
    pub fn ln_at(&self, x: T) -> T {
        if self.ln_c == T::neg_infinity() {
            return T::neg_infinity();
        }
        let mut v = self.ln_c + self.rate * x;
        if self.log_power != T::zero() {
            v = v + self.log_power * x.abs().ln_1p();
        }
        v
    }
}

/// Positive (or identically zero) function on (0, inf) in log coordinates.
pub trait LogFn<T: Real>: Send + Sync {
    /// `ln g(e^x)`; `-inf` where `g` vanishes.
    fn ln_at(&self, x: T) -> T;

    fn asymptote(&self, end: End) -> Asymptote<T> {
        Asymptote::probe(|s| self.ln_at(end.x_of(s)))
    }

    /// Points (in `x`) where `g` may fail to be smooth.
    fn kinks(&self) -> Vec<T> {
        Vec::new()
    }

    /// Exact power-log segment description, when the function has one.
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        None
    }

    fn value(&self, t: T) -> T {
        self.ln_at(t.ln()).exp()
    }
}

pub type SharedFn<T> = Arc<dyn LogFn<T>>;

impl<T: Real, F: LogFn<T> + ?Sized> LogFn<T> for Arc<F> {
    fn ln_at(&self, x: T) -> T {
        (**self).ln_at(x)
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        (**self).asymptote(end)
    }
    fn kinks(&self) -> Vec<T> {
        (**self).kinks()
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        (**self).segments()
    }
}

impl<T: Real, F: LogFn<T> + ?Sized> LogFn<T> for &F {
    fn ln_at(&self, x: T) -> T {
        (**self).ln_at(x)
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        (**self).asymptote(end)
    }
    fn kinks(&self) -> Vec<T> {
        (**self).kinks()
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        (**self).segments()
    }
}

/// `t^p`.
#[derive(Clone, Copy, Debug)]
pub struct PowerFn<T>(pub T);

impl<T: Real> LogFn<T> for PowerFn<T> {
    fn ln_at(&self, x: T) -> T {
        self.0 * x
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        match end {
            End::Infinity => Asymptote::power(self.0),
            End::Zero => Asymptote::power(-self.0),
        }
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        Some(vec![Segment {
            lo: T::neg_infinity(),
            hi: T::infinity(),
            ln_c: T::zero(),
            rate: self.0,
            log_power: T::zero(),
        }])
    }
}

/// Positive constant.
#[derive(Clone, Copy, Debug)]
pub struct ConstFn<T>(pub T);

impl<T: Real> LogFn<T> for ConstFn<T> {
    fn ln_at(&self, _x: T) -> T {
        self.0.ln()
    }
    fn asymptote(&self, _end: End) -> Asymptote<T> {
        if self.0 == T::zero() {
            Asymptote::vanishing()
        } else {
            Asymptote::flat()
        }
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        Some(vec![Segment {
            lo: T::neg_infinity(),
            hi: T::infinity(),
            ln_c: self.0.ln(),
            rate: T::zero(),
            log_power: T::zero(),
        }])
    }
}

/// Pointwise product of functions, itself a function raised to `power`.
pub struct ProductFn<'a, T: Real> {
    factors: Vec<(&'a dyn LogFn<T>, T)>,
}

impl<'a, T: Real> ProductFn<'a, T> {
    pub fn new() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn with(mut self, f: &'a dyn LogFn<T>) -> Self {
        self.factors.push((f, T::one()));
        self
    }

    /// Multiplies by `f^r`.
    pub fn with_pow(mut self, f: &'a dyn LogFn<T>, r: T) -> Self {
        self.factors.push((f, r));
        self
    }
}

impl<'a, T: Real> Default for ProductFn<'a, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a, T: Real> LogFn<T> for ProductFn<'a, T> {
    fn ln_at(&self, x: T) -> T {
        let mut acc = T::zero();
        for (f, r) in &self.factors {
            let v = f.ln_at(x);
            if v == T::neg_infinity() && *r > T::zero() {
                return T::neg_infinity();
            }
            acc = acc + *r * v;
        }
        acc
    }

    fn asymptote(&self, end: End) -> Asymptote<T> {
        self.factors
            .iter()
            .fold(Asymptote::flat(), |acc, (f, r)| acc.add(&f.asymptote(end).scale(*r)))
    }

    fn kinks(&self) -> Vec<T> {
        let mut k: Vec<T> = self.factors.iter().flat_map(|(f, _)| f.kinks()).collect();
        sort_dedup(&mut k);
        k
    }

    fn segments(&self) -> Option<Vec<Segment<T>>> {
        let mut acc = vec![Segment {
            lo: T::neg_infinity(),
            hi: T::infinity(),
            ln_c: T::zero(),
            rate: T::zero(),
            log_power: T::zero(),
        }];
        for (f, r) in &self.factors {
            let segs = f.segments()?;
            acc = merge_segments(&acc, &segs, *r);
        }
        Some(acc)
    }
}

fn sort_dedup<T: Real>(v: &mut Vec<T>) {
    v.retain(|x| x.is_finite());
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite kinks"));
    v.dedup();
}

/// Product `a * b^r` of two segment lists covering the whole axis.
fn merge_segments<T: Real>(a: &[Segment<T>], b: &[Segment<T>], r: T) -> Vec<Segment<T>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut lo = T::neg_infinity();
    while i < a.len() && j < b.len() {
        let hi = a[i].hi.min(b[j].hi);
        let sa = &a[i];
        let sb = &b[j];
        let ln_c = if sa.ln_c == T::neg_infinity() || (sb.ln_c == T::neg_infinity() && r > T::zero())
        {
            T::neg_infinity()
        } else {
            sa.ln_c + r * sb.ln_c
        };
        if hi > lo {
            out.push(Segment {
                lo,
                hi,
                ln_c,
                rate: sa.rate + r * sb.rate,
                log_power: sa.log_power + r * sb.log_power,
            });
        }
        lo = hi;
        if a[i].hi <= hi {
            i += 1;
        }
        if b[j].hi <= hi {
            j += 1;
        }
    }
    out
}

/// Function given by a closure on `x`, with optional declared asymptotes.
pub struct ClosureFn<F, T> {
    f: F,
    at_zero: Option<Asymptote<T>>,
    at_infinity: Option<Asymptote<T>>,
    kinks: Vec<T>,
}

impl<T: Real, F: Fn(T) -> T + Send + Sync> ClosureFn<F, T> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            at_zero: None,
            at_infinity: None,
            kinks: Vec::new(),
        }
    }

    pub fn with_asymptotes(mut self, at_zero: Asymptote<T>, at_infinity: Asymptote<T>) -> Self {
        self.at_zero = Some(at_zero);
        self.at_infinity = Some(at_infinity);
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<T>) -> Self {
        self.kinks = kinks;
        self
    }
}

impl<T: Real, F: Fn(T) -> T + Send + Sync> LogFn<T> for ClosureFn<F, T> {
    fn ln_at(&self, x: T) -> T {
        (self.f)(x)
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        let declared = match end {
            End::Zero => self.at_zero,
            End::Infinity => self.at_infinity,
        };
        declared.unwrap_or_else(|| Asymptote::probe(|s| (self.f)(end.x_of(s))))
    }
    fn kinks(&self) -> Vec<T> {
        self.kinks.clone()
    }
}

/// `g(1/t)`.
pub struct Reflected<F>(pub F);

impl<T: Real, F: LogFn<T>> LogFn<T> for Reflected<F> {
    fn ln_at(&self, x: T) -> T {
        self.0.ln_at(-x)
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        self.0.asymptote(end.other())
    }
    fn kinks(&self) -> Vec<T> {
        let mut k: Vec<T> = self.0.kinks().into_iter().map(|x| -x).collect();
        k.reverse();
        k
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        let segs = self.0.segments()?;
        Some(
            segs.into_iter()
                .rev()
                .map(|s| Segment {
                    lo: -s.hi,
                    hi: -s.lo,
                    ln_c: s.ln_c,
                    rate: -s.rate,
                    log_power: s.log_power,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrability_classes() {
        assert!(Asymptote::<f64>::power(-0.5).integrable(1.0));
        assert!(!Asymptote::<f64>::power(0.5).integrable(1.0));
        assert!(Asymptote::<f64>::log(-2.0).integrable(1.0));
        assert!(!Asymptote::<f64>::log(-1.0).integrable(1.0));
        assert!(Asymptote::<f64>::log(-1.0).integrable(2.0));
        assert!(!Asymptote::<f64>::flat().integrable(3.0));
        assert!(Asymptote::<f64>::stretched(-1.0, 0.5).add(&Asymptote::log(40.0)).integrable(1.0));
        assert!(Asymptote::<f64>::vanishing().integrable(0.1));
    }

    #[test]
    fn probe_recovers_log_power() {
        let a = Asymptote::<f64>::probe(|s| -2.5 * s.ln_1p() + 3.0);
        assert_eq!(a.rate, 0.0);
        assert!((a.log_power + 2.5).abs() < 1e-6);
        let b = Asymptote::<f64>::probe(|s| -0.25 * s);
        assert!((b.rate + 0.25).abs() < 1e-12);
    }

    #[test]
    fn product_segments_merge() {
        let p = PowerFn(1.0_f64);
        let c = ConstFn(2.0_f64);
        let f = ProductFn::new().with(&p).with_pow(&c, 2.0);
        let s = f.segments().unwrap();
        assert_eq!(s.len(), 1);
        assert!((f.value(3.0) - 12.0).abs() < 1e-12);
    }
}
