//! Quasi-norms of `(A0, A1)_{theta,q;b}`, the partial quantities `I`, `J`,
//! `I1`, `J1`, and the indices `rho`, `rho_eps`, `eta`, `eta_eps`.
//!
//! Norms follow the `du/u` convention: `||u^{-1/q} g||_{q,(a,b)}` is
//! `(int_a^b g^q du/u)^{1/q}`, the supremum of `g` when `q = inf`.

use crate::error::{Error, Result};
use crate::logfn::{LogFn, PowerFn, ProductFn};
use crate::quadrature::{GridSpec, QuadOptions};
use crate::real::{lit, Real};
use crate::sv_algebra::{ln_head_qnorm_x, ln_norm_x, ln_tail_qnorm_x, WeightExpr};

/// `(theta, q, b)` naming the space `A_{theta,q;b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceSpec<T> {
    pub theta: T,
    pub q: T,
    pub b: WeightExpr<T>,
}

impl<T: Real> SpaceSpec<T> {
    /// Validates ranges and, for `theta` in `{0, 1}`, the integrability class
    /// that makes the limiting space intermediate.
    pub fn new(theta: T, q: T, b: WeightExpr<T>) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::one()) {
            return Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {theta}")));
        }
        if !(q > T::zero()) || q.is_nan() {
            return Err(Error::InvalidParameter(format!("q must lie in (0, inf], got {q}")));
        }
        if theta == T::zero() && !b.classify(q).in_sv0q {
            return Err(Error::Precondition(format!("{b} is not in SV_(0,{q})")));
        }
        if theta == T::one() && !b.classify(q).in_sv1q {
            return Err(Error::Precondition(format!("{b} is not in SV_(1,{q})")));
        }
        Ok(Self { theta, q, b })
    }

    /// Same triple without the class check.
    pub fn unchecked(theta: T, q: T, b: WeightExpr<T>) -> Self {
        Self { theta, q, b }
    }
}

/// `ln ||t^{-theta} b(t) K(t)||_{q,(e^xa, e^xb)}`.
pub fn ln_weighted_norm<T: Real>(
    k: &dyn LogFn<T>,
    theta: T,
    q: T,
    b: &dyn LogFn<T>,
    xa: T,
    xb: T,
    opts: &QuadOptions<T>,
) -> T {
    let p = PowerFn(-theta);
    let g = ProductFn::new().with(&p).with(b).with(k);
    ln_norm_x(&g, q, xa, xb, opts)
}

/// `||t^{-theta-1/q} b(t) K(t, f)||_{q,(0,inf)}`.
pub fn space_norm<T: Real>(k: &dyn LogFn<T>, s: &SpaceSpec<T>) -> T {
    space_norm_with(k, s, &QuadOptions::default())
}

pub fn space_norm_with<T: Real>(k: &dyn LogFn<T>, s: &SpaceSpec<T>, opts: &QuadOptions<T>) -> T {
    ln_weighted_norm(k, s.theta, s.q, &s.b, T::neg_infinity(), T::infinity(), opts).exp()
}

/// Which pair of partial norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limiting {
    /// `I`, `J`.
    Zero,
    /// `I1`, `J1` (extra `u^{-1}`).
    One,
}

/// One weight with its exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct Weighted<T> {
    pub q: T,
    pub b: WeightExpr<T>,
}

impl<T: Real> Weighted<T> {
    pub fn new(q: T, b: WeightExpr<T>) -> Self {
        Self { q, b }
    }

    pub fn flipped(&self) -> Self {
        Self {
            q: self.q,
            b: self.b.clone().flip(),
        }
    }

    pub fn ln_tail(&self, x: T) -> T {
        ln_tail_qnorm_x(&self.b, self.q, x, &QuadOptions::default())
    }

    pub fn ln_head(&self, x: T) -> T {
        ln_head_qnorm_x(&self.b, self.q, x, &QuadOptions::default())
    }
}

/// `(I, J)` or `(I1, J1)` at `t`.
pub fn partial_norms<T: Real>(
    k: &dyn LogFn<T>,
    t: T,
    case: Limiting,
    w0: &Weighted<T>,
    w1: &Weighted<T>,
) -> (T, T) {
    let (a, b) = ln_partial_norms(k, t.ln(), case, w0, w1, &QuadOptions::default());
    (a.exp(), b.exp())
}

/// Logarithms of the partial norms at `x = ln t`.
pub fn ln_partial_norms<T: Real>(
    k: &dyn LogFn<T>,
    x: T,
    case: Limiting,
    w0: &Weighted<T>,
    w1: &Weighted<T>,
    opts: &QuadOptions<T>,
) -> (T, T) {
    let theta = match case {
        Limiting::Zero => T::zero(),
        Limiting::One => T::one(),
    };
    (
        ln_weighted_norm(k, theta, w0.q, &w0.b, T::neg_infinity(), x, opts),
        ln_weighted_norm(k, theta, w1.q, &w1.b, x, T::infinity(), opts),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IndexKind<T> {
    Rho,
    RhoEps(T),
    Eta,
    EtaEps(T),
}

/// Index value with its parts; `value` is NaN when the quotient is `0/0` or
/// `inf/inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexPair<T> {
    pub value: T,
    pub numerator: T,
    pub denominator: T,
}

impl<T: Real> IndexPair<T> {
    pub fn is_defined(&self) -> bool {
        !self.value.is_nan()
    }
}

/// `ln` of numerator and denominator of an index at `x = ln t`.
pub fn ln_index_parts<T: Real>(x: T, kind: IndexKind<T>, w0: &Weighted<T>, w1: &Weighted<T>) -> (T, T) {
    match kind {
        IndexKind::Rho => (w0.ln_tail(x), w1.ln_tail(x)),
        IndexKind::RhoEps(e) => ((T::one() + e) * w0.ln_tail(x), w1.ln_tail(x)),
        IndexKind::Eta => (w0.ln_head(x), w1.ln_head(x)),
        IndexKind::EtaEps(e) => ((T::one() + e) * w0.ln_head(x), w1.ln_head(x)),
    }
}

fn quotient_ln<T: Real>(n: T, d: T) -> T {
    let undefined = (n == T::neg_infinity() && d == T::neg_infinity())
        || (n == T::infinity() && d == T::infinity())
        || n.is_nan()
        || d.is_nan();
    if undefined {
        T::nan()
    } else {
        n - d
    }
}

pub fn index<T: Real>(t: T, kind: IndexKind<T>, w0: &Weighted<T>, w1: &Weighted<T>) -> IndexPair<T> {
    let (n, d) = ln_index_parts(t.ln(), kind, w0, w1);
    IndexPair {
        value: quotient_ln(n, d).exp(),
        numerator: n.exp(),
        denominator: d.exp(),
    }
}

/// `ln` of the index at `x`; NaN where undefined.
pub fn ln_index<T: Real>(x: T, kind: IndexKind<T>, w0: &Weighted<T>, w1: &Weighted<T>) -> T {
    let (n, d) = ln_index_parts(x, kind, w0, w1);
    quotient_ln(n, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

/// Grid quasi-monotonicity constant from logarithms of the values:
/// `sup_{i<j} g_i / g_j` toward nondecreasing, `sup_{i<j} g_j / g_i` toward
/// nonincreasing. NaN entries are skipped.
pub fn quasi_monotone_constant<T: Real>(ln_values: &[T], dir: Direction) -> T {
    let mut worst = T::zero();
    let mut run = T::neg_infinity();
    let sign = match dir {
        Direction::NonDecreasing => T::one(),
        Direction::NonIncreasing => -T::one(),
    };
    for &v in ln_values.iter().filter(|v| !v.is_nan()) {
        let v = sign * v;
        if run > T::neg_infinity() && v.is_finite() {
            worst = worst.max(run - v);
        } else if run > T::neg_infinity() && v == T::neg_infinity() {
            return T::infinity();
        }
        run = run.max(v);
    }
    worst.exp()
}

/// [`quasi_monotone_constant`] of a function sampled on a grid.
pub fn quasi_monotone_constant_on<T: Real>(g: &dyn LogFn<T>, grid: &GridSpec<T>, dir: Direction) -> T {
    let v: Vec<T> = grid.log_points().into_iter().map(|x| g.ln_at(x)).collect();
    quasi_monotone_constant(&v, dir)
}

/// Family whose `eps`-version must be equivalent to a nondecreasing function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    RhoEps,
    EtaEps,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport<T> {
    pub kind: ConditionKind,
    /// `(eps, constant)` for every tried `eps`.
    pub per_eps: Vec<(T, T)>,
    pub best_eps: T,
    pub best_constant: T,
    pub threshold: T,
    pub pass: bool,
}

/// The default search grid `{2^-k : k = 0..10}`.
pub fn default_eps_grid<T: Real>() -> Vec<T> {
    (0..=10).map(|k| lit::<T>(0.5f64.powi(k))).collect()
}

/// Default acceptance threshold for "equivalent to a monotone function".
pub fn default_threshold<T: Real>() -> T {
    lit(4.0)
}

pub fn check_condition_monotone_index<T: Real>(
    kind: ConditionKind,
    w0: &Weighted<T>,
    w1: &Weighted<T>,
    eps_grid: &[T],
    threshold: T,
    grid: &GridSpec<T>,
) -> ConditionReport<T> {
    let xs = grid.log_points();
    let parts: Vec<(T, T)> = xs
        .iter()
        .map(|&x| match kind {
            ConditionKind::RhoEps => (w0.ln_tail(x), w1.ln_tail(x)),
            ConditionKind::EtaEps => (w0.ln_head(x), w1.ln_head(x)),
        })
        .collect();
    let mut per_eps = Vec::with_capacity(eps_grid.len());
    let mut best = (T::nan(), T::infinity());
    for &e in eps_grid {
        let v: Vec<T> = parts.iter().map(|&(n, d)| quotient_ln((T::one() + e) * n, d)).collect();
        let c = quasi_monotone_constant(&v, Direction::NonDecreasing);
        per_eps.push((e, c));
        if c < best.1 {
            best = (e, c);
        }
    }
    ConditionReport {
        kind,
        per_eps,
        best_eps: best.0,
        best_constant: best.1,
        threshold,
        pass: best.1 <= threshold,
    }
}
