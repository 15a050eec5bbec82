//! Best constants for weighted inequalities restricted to quasi-concave
//! functions, window conditions, and Hardy-type lemmas with constructed weights.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::logfn::{Asymptote, End, LogFn, PowerFn, ProductFn, Segment, SharedFn};
use crate::quadrature::{ln_sup_arg_x, GridSpec, QuadOptions};
use crate::real::{lit, Real};
use crate::sv_algebra::{ln_integral_x, WeightExpr};

/// `coef * t^p * exp(-beta t) * b(t)` restricted to `(lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElemFn<T> {
    pub coef: T,
    pub p: T,
    pub beta: T,
    pub b: WeightExpr<T>,
    pub support: (T, T),
}

impl<T: Real> ElemFn<T> {
    pub fn new(coef: T, p: T, beta: T) -> Self {
        Self {
            coef,
            p,
            beta,
            b: WeightExpr::One,
            support: (T::zero(), T::infinity()),
        }
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// `e^{-beta t}`.
    pub fn exp_decay(beta: T) -> Self {
        Self::new(T::one(), T::zero(), beta)
    }

    pub fn with_weight(mut self, b: WeightExpr<T>) -> Self {
        self.b = b;
        self
    }

    /// Restricts the support to `(lo, hi)`.
    pub fn on(mut self, lo: T, hi: T) -> Self {
        self.support = (lo, hi);
        self
    }

    pub fn shared(self) -> SharedFn<T> {
        Arc::new(self)
    }

    fn log_support(&self) -> (T, T) {
        (self.support.0.ln(), self.support.1.ln())
    }
}

impl<T: Real> LogFn<T> for ElemFn<T> {
    fn ln_at(&self, x: T) -> T {
        let (lo, hi) = self.log_support();
        if self.coef <= T::zero() || x <= lo || x >= hi {
            return T::neg_infinity();
        }
        let decay = if self.beta == T::zero() { T::zero() } else { self.beta * x.exp() };
        self.coef.ln() + self.p * x - decay + self.b.ln_at(x)
    }

    fn asymptote(&self, end: End) -> Asymptote<T> {
        let (lo, hi) = self.log_support();
        if self.coef <= T::zero() {
            return Asymptote::vanishing();
        }
        match end {
            End::Zero if lo > T::neg_infinity() => Asymptote::vanishing(),
            End::Zero => Asymptote::power(-self.p).add(&self.b.asymptote(end)),
            End::Infinity if hi < T::infinity() || self.beta > T::zero() => Asymptote::vanishing(),
            End::Infinity => Asymptote::power(self.p).add(&self.b.asymptote(end)),
        }
    }

    fn kinks(&self) -> Vec<T> {
        let (lo, hi) = self.log_support();
        let mut k = self.b.kinks();
        k.extend([lo, hi].into_iter().filter(|v| v.is_finite()));
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k
    }

    fn segments(&self) -> Option<Vec<Segment<T>>> {
        if self.beta != T::zero() || self.coef <= T::zero() {
            return None;
        }
        let (lo, hi) = self.log_support();
        let ln_c = self.coef.ln();
        let mut out = Vec::new();
        for s in self.b.segments()? {
            for (a, b, inside) in [
                (s.lo, s.hi.min(lo), false),
                (s.lo.max(lo), s.hi.min(hi), true),
                (s.lo.max(hi), s.hi, false),
            ] {
                if a < b {
                    out.push(if inside {
                        Segment {
                            lo: a,
                            hi: b,
                            ln_c: s.ln_c + ln_c,
                            rate: s.rate + self.p,
                            log_power: s.log_power,
                        }
                    } else {
                        Segment {
                            lo: a,
                            hi: b,
                            ln_c: T::neg_infinity(),
                            rate: T::zero(),
                            log_power: T::zero(),
                        }
                    });
                }
            }
        }
        Some(out)
    }
}

/// `min(t, e^x0)`, the extremal quasi-concave function.
#[derive(Clone, Copy, Debug)]
pub struct MinFn<T>(pub T);

impl<T: Real> LogFn<T> for MinFn<T> {
    fn ln_at(&self, x: T) -> T {
        x.min(self.0)
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        match end {
            End::Zero => Asymptote::power(-T::one()),
            End::Infinity => Asymptote::flat(),
        }
    }
    fn kinks(&self) -> Vec<T> {
        vec![self.0]
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        Some(vec![
            Segment {
                lo: T::neg_infinity(),
                hi: self.0,
                ln_c: T::zero(),
                rate: T::one(),
                log_power: T::zero(),
            },
            Segment {
                lo: self.0,
                hi: T::infinity(),
                ln_c: self.0,
                rate: T::zero(),
                log_power: T::zero(),
            },
        ])
    }
}

/// Required monotonicity of the test functions `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Any,
    NonIncreasing,
    NonDecreasing,
}

/// Nonnegative step function: `values[0]` on `(0, breaks[0])`, `values[i]` on
/// `(breaks[i-1], breaks[i])`, the last value on `(breaks[n-1], inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFn<T> {
    breaks: Vec<T>,
    values: Vec<T>,
    lx: Vec<T>,
}

impl<T: Real> StepFn<T> {
    pub fn new(breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "step function needs {} values, got {}",
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.iter().any(|b| !(b.is_finite() && *b > T::zero())) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("step breaks must be positive and increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::InvalidParameter("step values must be finite and nonnegative".into()));
        }
        let lx = breaks.iter().map(|b| b.ln()).collect();
        Ok(Self { breaks, values, lx })
    }

    pub fn constant(c: T) -> Self {
        Self::new(Vec::new(), vec![c]).expect("valid constant")
    }

    /// `chi_(x, inf)`.
    pub fn indicator_above(x: T) -> Self {
        Self::new(vec![x], vec![T::zero(), T::one()]).expect("valid indicator")
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    pub fn satisfies(&self, m: Monotonicity) -> bool {
        match m {
            Monotonicity::Any => true,
            Monotonicity::NonIncreasing => self.values.windows(2).all(|w| w[0] >= w[1]),
            Monotonicity::NonDecreasing => self.values.windows(2).all(|w| w[0] <= w[1]),
        }
    }

    /// Pieces `(lo_x, hi_x, value)` in log coordinates.
    pub fn log_pieces(&self) -> Vec<(T, T, T)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut lo = T::neg_infinity();
        for (i, &v) in self.values.iter().enumerate() {
            let hi = self.lx.get(i).copied().unwrap_or(T::infinity());
            out.push((lo, hi, v));
            lo = hi;
        }
        out
    }

    /// Random step function with `n` breaks log-uniform in `[1e-3, 1e3]` and
    /// values log-uniform in `[1e-2, 1e2]`.
    pub fn random<R: Rng>(rng: &mut R, m: Monotonicity, n: usize) -> Self {
        let mut b: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        let mut v: Vec<f64> = (0..=b.len()).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect();
        match m {
            Monotonicity::Any => {}
            Monotonicity::NonDecreasing => v.sort_by(|x, y| x.partial_cmp(y).unwrap()),
            Monotonicity::NonIncreasing => v.sort_by(|x, y| y.partial_cmp(x).unwrap()),
        }
        Self::new(b.into_iter().map(lit).collect(), v.into_iter().map(lit).collect()).expect("valid random steps")
    }
}

impl<T: Real> LogFn<T> for StepFn<T> {
    fn ln_at(&self, x: T) -> T {
        let i = self.lx.partition_point(|b| *b <= x);
        self.values[i].ln()
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        let v = match end {
            End::Zero => self.values[0],
            End::Infinity => *self.values.last().unwrap(),
        };
        if v == T::zero() {
            Asymptote::vanishing()
        } else {
            Asymptote::flat()
        }
    }
    fn kinks(&self) -> Vec<T> {
        self.lx.clone()
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        Some(
            self.log_pieces()
                .into_iter()
                .map(|(lo, hi, v)| Segment {
                    lo,
                    hi,
                    ln_c: v.ln(),
                    rate: T::zero(),
                    log_power: T::zero(),
                })
                .collect(),
        )
    }
}

fn ln_add<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    if a == T::infinity() || b == T::infinity() {
        return T::infinity();
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `exp(lhs - rhs)` with `0/0 = 0` and `c/0 = inf`.
fn ratio_from_ln<T: Real>(lhs: T, rhs: T) -> T {
    if lhs == T::neg_infinity() {
        T::zero()
    } else if rhs == T::neg_infinity() || lhs == T::infinity() {
        T::infinity()
    } else {
        (lhs - rhs).exp()
    }
}

/// `ln int_{e^xa}^{e^xb} f(u) du` (Lebesgue measure, not `du/u`).
pub fn ln_int_dt<T: Real>(f: &dyn LogFn<T>, xa: T, xb: T) -> T {
    let t1 = PowerFn(T::one());
    let g = ProductFn::new().with(&t1).with(f);
    ln_integral_x(&g, T::one(), xa, xb, &QuadOptions::default()).unwrap_or(T::nan())
}

fn ln_int_q<T: Real>(w: &dyn LogFn<T>, q: T, xa: T, xb: T) -> T {
    ln_integral_x(w, q, xa, xb, &QuadOptions::default()).unwrap_or(T::nan())
}

/// `ln` of `int_0^x s^q w^q ds/s + x^q int_x^inf w^q ds/s` at log-point `x`.
pub fn ln_extremal_split<T: Real>(w: &dyn LogFn<T>, q: T, x: T) -> T {
    let t1 = PowerFn(T::one());
    let g = ProductFn::new().with(&t1).with(w);
    let head = ln_int_q(&g, q, T::neg_infinity(), x);
    let tail = q * x + ln_int_q(w, q, x, T::infinity());
    ln_add(head, tail)
}

/// `ln int_0^inf [min(s, e^x) w(s)]^q ds/s` by direct quadrature.
pub fn ln_extremal_direct<T: Real>(w: &dyn LogFn<T>, q: T, x: T) -> T {
    let m = MinFn(x);
    let g = ProductFn::new().with(&m).with(w);
    ln_int_q(&g, q, T::neg_infinity(), T::infinity())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    A1,
    A2,
    A3,
    A4,
}

impl Which {
    fn needs_p_le_q(self) -> bool {
        matches!(self, Which::A1 | Which::A3)
    }
}

/// `(int [h w]^q ds/s)^{1/q} <= C (int [h v]^p ds/s)^{1/p}` over quasi-concave `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalitySpec<T> {
    pub p: T,
    pub q: T,
    pub v: WeightExpr<T>,
    pub w: WeightExpr<T>,
    pub window: Option<T>,
}

impl<T: Real> InequalitySpec<T> {
    pub fn new(p: T, q: T, v: WeightExpr<T>, w: WeightExpr<T>) -> Result<Self> {
        for (name, e) in [("p", p), ("q", q)] {
            if !(e > T::zero() && e.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, inf)")));
            }
        }
        Ok(Self {
            p,
            q,
            v,
            w,
            window: None,
        })
    }

    pub fn with_window(mut self, t: T) -> Self {
        self.window = Some(t);
        self
    }

    /// `v` in `SV_{0,p}` and `w` in `SV_{0,q}`.
    pub fn check_sv(&self) -> Result<()> {
        if !self.v.classify(self.p).in_sv0q {
            return Err(Error::Hypothesis(format!("v = {} is not in SV_(0,p)", self.v)));
        }
        if !self.w.classify(self.q).in_sv0q {
            return Err(Error::Hypothesis(format!("w = {} is not in SV_(0,q)", self.w)));
        }
        Ok(())
    }

    fn check_order(&self, which: Which) -> Result<()> {
        if which.needs_p_le_q() != (self.p <= self.q) {
            let need = if which.needs_p_le_q() { "p <= q" } else { "q < p" };
            return Err(Error::Precondition(format!("{which:?} requires {need}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantReport<T> {
    pub which: Which,
    pub value: T,
    /// Point `t` of the supremum for `A1`/`A3`.
    pub argmax: Option<T>,
}

/// `A1`..`A4` for the weights of `spec`. `A3`/`A4` additionally require the
/// slowly varying classes.
pub fn compute_constant<T: Real>(spec: &InequalitySpec<T>, which: Which) -> Result<ConstantReport<T>> {
    spec.check_order(which)?;
    if matches!(which, Which::A3 | Which::A4) {
        spec.check_sv()?;
    }
    compute_constant_fns(&spec.v, &spec.w, spec.p, spec.q, which)
}

/// `A1`..`A4` for arbitrary positive weights.
pub fn compute_constant_fns<T: Real>(
    v: &dyn LogFn<T>,
    w: &dyn LogFn<T>,
    p: T,
    q: T,
    which: Which,
) -> Result<ConstantReport<T>> {
    if which.needs_p_le_q() != (p <= q) {
        return Err(Error::Precondition(format!("{which:?}: wrong ordering of p and q")));
    }
    let mut kinks = v.kinks();
    kinks.extend(w.kinks());
    match which {
        Which::A1 | Which::A3 => {
            let f = crate::logfn::ClosureFn::new(move |x: T| match which {
                Which::A1 => ln_extremal_split(w, q, x) / q - ln_extremal_split(v, p, x) / p,
                _ => ln_int_q(w, q, x, T::infinity()) / q - ln_int_q(v, p, x, T::infinity()) / p,
            })
            .with_kinks(kinks);
            let (ln_v, x) = ln_sup_arg_x(&f, T::neg_infinity(), T::infinity())?;
            Ok(ConstantReport {
                which,
                value: ln_v.exp(),
                argmax: Some(x.exp()),
            })
        }
        Which::A2 | Which::A4 => {
            let e = q / (p - q);
            let f = crate::logfn::ClosureFn::new(move |x: T| {
                let (nw, nv, extra) = match which {
                    Which::A2 => (ln_extremal_split(w, q, x), ln_extremal_split(v, p, x), q * x),
                    _ => (ln_int_q(w, q, x, T::infinity()), ln_int_q(v, p, x, T::infinity()), T::zero()),
                };
                let lw = w.ln_at(x);
                if lw == T::neg_infinity() {
                    return lw;
                }
                e * (nw - nv) + extra + q * lw
            })
            .with_kinks(kinks);
            let ln_i = ln_integral_x(&f, T::one(), T::neg_infinity(), T::infinity(), &QuadOptions::default())?;
            Ok(ConstantReport {
                which,
                value: (ln_i * (T::one() / q - T::one() / p)).exp(),
                argmax: None,
            })
        }
    }
}

/// `LHS / RHS` of the inequality for one test function `h`.
pub fn inequality_ratio<T: Real>(v: &dyn LogFn<T>, w: &dyn LogFn<T>, p: T, q: T, h: &dyn LogFn<T>) -> T {
    let hw = ProductFn::new().with(h).with(w);
    let hv = ProductFn::new().with(h).with(v);
    let lhs = ln_int_q(&hw, q, T::neg_infinity(), T::infinity()) / q;
    let rhs = ln_int_q(&hv, p, T::neg_infinity(), T::infinity()) / p;
    ratio_from_ln(lhs, rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<T> {
    pub sup: T,
    pub argmax: T,
    /// `(t, ratio)` per grid point.
    pub rows: Vec<(T, T)>,
}

/// Empirical supremum of `LHS/RHS` over `h_x(s) = min(s, x)` on the grid.
pub fn best_constant_probe<T: Real>(spec: &InequalitySpec<T>, which: Which, grid: &GridSpec<T>) -> Result<ProbeReport<T>> {
    if !which.needs_p_le_q() {
        return Err(Error::Precondition(format!("probe compares against A1 or A3, not {which:?}")));
    }
    spec.check_order(which)?;
    let mut rows = Vec::new();
    let (mut sup, mut argmax) = (T::zero(), T::nan());
    for x in grid.log_points() {
        let lhs = ln_extremal_direct(&spec.w, spec.q, x) / spec.q;
        let rhs = ln_extremal_direct(&spec.v, spec.p, x) / spec.p;
        let r = ratio_from_ln(lhs, rhs);
        if r > sup {
            sup = r;
            argmax = x.exp();
        }
        rows.push((x.exp(), r));
    }
    Ok(ProbeReport { sup, argmax, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowSide {
    /// `h w chi_(0,t)` on the left.
    Head,
    /// `h w chi_(t,inf)` on the left.
    Tail,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowRow<T> {
    pub t: T,
    pub condition: T,
    pub bound: T,
    pub ratio: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport<T> {
    pub side: WindowSide,
    pub rows: Vec<WindowRow<T>>,
    pub max_ratio: T,
    pub threshold: T,
    pub pass: bool,
}

/// Evaluates the windowed condition on the grid and compares it with `bound`.
pub fn window_condition<T: Real>(
    spec: &InequalitySpec<T>,
    side: WindowSide,
    bound: &dyn LogFn<T>,
    grid: &GridSpec<T>,
    threshold: T,
) -> Result<WindowReport<T>> {
    spec.check_sv()?;
    let (p, q) = (spec.p, spec.q);
    let (w, v) = (&spec.w, &spec.v);
    let xs = grid.log_points();
    let ln_cond: Vec<T> = if p <= q {
        // Running supremum of W^{1/q} / V^{1/p} over a dense sample.
        let g = |x: T| ln_int_q(w, q, x, T::infinity()) / q - ln_int_q(v, p, x, T::infinity()) / p;
        let (lo, hi) = (xs[0] - lit(60.0), xs[xs.len() - 1] + lit(60.0));
        let n = (to_usize((hi - lo) / lit(0.05))).max(16);
        let mut dense: Vec<T> = (0..=n).map(|i| lo + (hi - lo) * lit::<T>(i as f64) / lit::<T>(n as f64)).collect();
        dense.extend(xs.iter().copied());
        dense.extend([-1e5, -1e3, 1e3, 1e5].map(lit::<T>));
        dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let vals: Vec<(T, T)> = dense.iter().map(|&x| (x, g(x))).collect();
        xs.iter()
            .map(|&t| {
                vals.iter()
                    .filter(|(x, _)| match side {
                        WindowSide::Head => *x <= t,
                        WindowSide::Tail => *x >= t,
                    })
                    .map(|(_, y)| *y)
                    .filter(|y| !y.is_nan())
                    .fold(T::neg_infinity(), |a, b| a.max(b))
            })
            .collect()
    } else {
        let e = q / (p - q);
        let f = crate::logfn::ClosureFn::new(move |x: T| {
            let lw = w.ln_at(x);
            if lw == T::neg_infinity() {
                return lw;
            }
            e * (ln_int_q(w, q, x, T::infinity()) - ln_int_q(v, p, x, T::infinity())) + q * lw
        })
        .with_kinks(w.kinks());
        let opts = QuadOptions::default();
        // Accumulate between consecutive grid points.
        let mut pieces = Vec::with_capacity(xs.len() + 1);
        pieces.push(ln_integral_x(&f, T::one(), T::neg_infinity(), xs[0], &opts)?);
        for pair in xs.windows(2) {
            pieces.push(ln_integral_x(&f, T::one(), pair[0], pair[1], &opts)?);
        }
        pieces.push(ln_integral_x(&f, T::one(), xs[xs.len() - 1], T::infinity(), &opts)?);
        let power = T::one() / q - T::one() / p;
        let n = xs.len();
        let mut out = vec![T::neg_infinity(); n];
        match side {
            WindowSide::Head => {
                let mut acc = T::neg_infinity();
                for i in 0..n {
                    acc = ln_add(acc, pieces[i]);
                    out[i] = acc * power;
                }
            }
            WindowSide::Tail => {
                let mut acc = T::neg_infinity();
                for i in (0..n).rev() {
                    acc = ln_add(acc, pieces[i + 1]);
                    out[i] = acc * power;
                }
            }
        }
        out
    };
    let mut rows = Vec::with_capacity(xs.len());
    let mut max_ratio = T::zero();
    for (&x, &lc) in xs.iter().zip(&ln_cond) {
        let lb = bound.ln_at(x);
        let ratio = ratio_from_ln(lc, lb);
        max_ratio = max_ratio.max(ratio);
        rows.push(WindowRow {
            t: x.exp(),
            condition: lc.exp(),
            bound: lb.exp(),
            ratio,
        });
    }
    Ok(WindowReport {
        side,
        rows,
        max_ratio,
        threshold,
        pass: max_ratio <= threshold,
    })
}

fn to_usize<T: Real>(v: T) -> usize {
    crate::real::to_f64(v).ceil().max(0.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardyCase {
    Het1,
    Het2,
    Het3Plus,
    Het3,
}

impl HardyCase {
    /// Inner integral over `(0, t)` rather than `(t, inf)`.
    pub fn inner_head(self) -> bool {
        matches!(self, HardyCase::Het1 | HardyCase::Het3Plus)
    }

    pub fn monotonicity(self) -> Monotonicity {
        match self {
            HardyCase::Het1 | HardyCase::Het2 => Monotonicity::Any,
            HardyCase::Het3Plus => Monotonicity::NonIncreasing,
            HardyCase::Het3 => Monotonicity::NonDecreasing,
        }
    }

    fn alpha_ok<T: Real>(self, a: T) -> bool {
        match self {
            HardyCase::Het1 | HardyCase::Het2 => a > T::one() && a.is_finite(),
            HardyCase::Het3Plus | HardyCase::Het3 => a > T::zero() && a < T::one(),
        }
    }
}

/// The constructed weight `v` of a Hardy-type lemma.
#[derive(Clone)]
pub struct HardyWeight<T: Real> {
    pub case: HardyCase,
    pub alpha: T,
    pub w: SharedFn<T>,
    pub phi: SharedFn<T>,
}

impl<T: Real> LogFn<T> for HardyWeight<T> {
    fn ln_at(&self, x: T) -> T {
        let (a, inf, ninf) = (self.alpha, T::infinity(), T::neg_infinity());
        let lphi = self.phi.ln_at(x);
        match self.case {
            HardyCase::Het1 | HardyCase::Het2 => {
                let lw = self.w.ln_at(x);
                if lw == ninf {
                    return ninf;
                }
                let int = if self.case == HardyCase::Het1 {
                    ln_int_dt(&*self.w, x, inf)
                } else {
                    ln_int_dt(&*self.w, ninf, x)
                };
                (T::one() - a) * lw + a * (lphi + int)
            }
            HardyCase::Het3Plus => {
                let iw = ln_int_dt(&*self.w, x, inf);
                if iw == ninf {
                    return ninf;
                }
                lphi + (a - T::one()) * ln_int_dt(&*self.phi, ninf, x) + iw
            }
            HardyCase::Het3 => {
                let iw = ln_int_dt(&*self.w, ninf, x);
                if iw == ninf {
                    return ninf;
                }
                lphi + (a - T::one()) * ln_int_dt(&*self.phi, x, inf) + iw
            }
        }
    }

    fn kinks(&self) -> Vec<T> {
        let mut k = self.w.kinks();
        k.extend(self.phi.kinks());
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k.dedup();
        k
    }
}

pub fn hardy_build_v<T: Real>(case: HardyCase, alpha: T, w: SharedFn<T>, phi: SharedFn<T>) -> Result<HardyWeight<T>> {
    if !case.alpha_ok(alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha:?} is outside the range of {case:?}")));
    }
    let (inf, ninf) = (T::infinity(), T::neg_infinity());
    let needed: [(&str, &dyn LogFn<T>, T, T); 1] = match case {
        HardyCase::Het1 => [("int_t^inf w", &*w, T::zero(), inf)],
        HardyCase::Het2 => [("int_0^t w", &*w, ninf, T::zero())],
        HardyCase::Het3Plus => [("int_0^t phi", &*phi, ninf, T::zero())],
        HardyCase::Het3 => [("int_t^inf phi", &*phi, T::zero(), inf)],
    };
    let extra: Option<(&str, &dyn LogFn<T>, T, T)> = match case {
        HardyCase::Het3Plus => Some(("int_t^inf w", &*w, T::zero(), inf)),
        HardyCase::Het3 => Some(("int_0^t w", &*w, ninf, T::zero())),
        _ => None,
    };
    for (name, f, a, b) in needed.into_iter().chain(extra) {
        let v = ln_int_dt(f, a, b);
        if v == inf || v.is_nan() {
            return Err(Error::Precondition(format!("divergent defining integral {name}")));
        }
    }
    Ok(HardyWeight { case, alpha, w, phi })
}

/// `ln` of both sides of a Hardy-type inequality for a step function `h`.
pub fn hardy_sides<T: Real>(v: &HardyWeight<T>, h: &StepFn<T>) -> (T, T) {
    let (a, inf, ninf) = (v.alpha, T::infinity(), T::neg_infinity());
    let pieces = h.log_pieces();
    let head = v.case.inner_head();
    let phi = &*v.phi;
    let inner = |x: T| -> T {
        let mut acc = ninf;
        for &(lo, hi, hv) in &pieces {
            if hv == T::zero() {
                continue;
            }
            let (a0, b0) = if head { (lo, hi.min(x)) } else { (lo.max(x), hi) };
            if a0 < b0 {
                acc = ln_add(acc, hv.ln() + ln_int_dt(phi, a0, b0));
            }
        }
        acc
    };
    let w = &*v.w;
    let outer = crate::logfn::ClosureFn::new(|x: T| {
        let lw = w.ln_at(x);
        if lw == ninf {
            return ninf;
        }
        let li = inner(x);
        if li == ninf {
            return ninf;
        }
        a * li + lw + x
    })
    .with_kinks({
        let mut k = h.kinks();
        k.extend(v.kinks());
        k.sort_by(|p, q| p.partial_cmp(q).unwrap());
        k
    });
    let lhs = ln_integral_x(&outer, T::one(), ninf, inf, &QuadOptions::default()).unwrap_or(T::nan());
    let mut rhs = ninf;
    for &(lo, hi, hv) in &pieces {
        if hv > T::zero() {
            rhs = ln_add(rhs, a * hv.ln() + ln_int_dt(v, lo, hi));
        }
    }
    (lhs, rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyReport<T> {
    pub ratios: Vec<T>,
    pub max_ratio: T,
}

/// Maximum of `LHS/RHS` over the sampled `h`; every `h` must belong to the
/// monotonicity class of the case.
pub fn hardy_check<T: Real>(
    case: HardyCase,
    alpha: T,
    w: SharedFn<T>,
    phi: SharedFn<T>,
    hs: &[StepFn<T>],
) -> Result<HardyReport<T>> {
    let v = hardy_build_v(case, alpha, w, phi)?;
    if let Some(h) = hs.iter().find(|h| !h.satisfies(case.monotonicity())) {
        return Err(Error::InvalidParameter(format!(
            "{case:?} needs {:?} test functions, got values {:?}",
            case.monotonicity(),
            h.values()
        )));
    }
    let ratios: Vec<T> = hs
        .iter()
        .map(|h| {
            let (l, r) = hardy_sides(&v, h);
            ratio_from_ln(l, r)
        })
        .collect();
    let max_ratio = ratios.iter().copied().fold(T::zero(), |a, b| a.max(b));
    Ok(HardyReport { ratios, max_ratio })
}

/// Where the kernel is switched on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelRegion {
    All,
    /// `u < t`.
    Below,
    /// `u > t`.
    Above,
}

/// `psi(t, u) = psi1(t) psi2(u) chi_region(t, u)`.
#[derive(Clone)]
pub struct SeparableKernel<T: Real> {
    pub psi1: SharedFn<T>,
    pub psi2: SharedFn<T>,
    pub region: KernelRegion,
}

impl<T: Real> SeparableKernel<T> {
    /// `ln int_{(e^ua, e^ub)} psi(e^x, u) du`.
    fn ln_inner(&self, x: T, ua: T, ub: T) -> T {
        let (a, b) = match self.region {
            KernelRegion::All => (ua, ub),
            KernelRegion::Below => (ua, ub.min(x)),
            KernelRegion::Above => (ua.max(x), ub),
        };
        if !(a < b) {
            return T::neg_infinity();
        }
        let l1 = self.psi1.ln_at(x);
        if l1 == T::neg_infinity() {
            return l1;
        }
        l1 + ln_int_dt(&*self.psi2, a, b)
    }
}

fn hmt_outer<T: Real, F: Fn(T) -> T + Send + Sync>(alpha: T, w: &dyn LogFn<T>, inner: F, kinks: Vec<T>) -> T {
    let ninf = T::neg_infinity();
    let f = crate::logfn::ClosureFn::new(|x: T| {
        let lw = w.ln_at(x);
        if lw == ninf {
            return ninf;
        }
        let li = inner(x);
        if li == ninf {
            return ninf;
        }
        alpha * li + lw + x
    })
    .with_kinks(kinks);
    ln_integral_x(&f, T::one(), ninf, T::infinity(), &QuadOptions::default()).unwrap_or(T::nan())
}

/// `ln` of both sides of the condition at `x0 = ln x`:
/// `int (int_x^inf psi(t,u) du)^alpha w(t) dt` and `int_x^inf v`.
pub fn hmt_condition_sides<T: Real>(alpha: T, psi: &SeparableKernel<T>, w: &dyn LogFn<T>, v: &dyn LogFn<T>, x0: T) -> (T, T) {
    let mut kinks = w.kinks();
    kinks.push(x0);
    let lhs = hmt_outer(alpha, w, |x| psi.ln_inner(x, x0, T::infinity()), kinks);
    (lhs, ln_int_dt(v, x0, T::infinity()))
}

/// `ln` of both sides of the inequality for a step function `h`.
pub fn hmt_inequality_sides<T: Real>(
    alpha: T,
    psi: &SeparableKernel<T>,
    w: &dyn LogFn<T>,
    v: &dyn LogFn<T>,
    h: &StepFn<T>,
) -> (T, T) {
    let pieces = h.log_pieces();
    let inner = |x: T| {
        let mut acc = T::neg_infinity();
        for &(lo, hi, hv) in &pieces {
            if hv > T::zero() {
                acc = ln_add(acc, hv.ln() + psi.ln_inner(x, lo, hi));
            }
        }
        acc
    };
    let mut kinks = w.kinks();
    kinks.extend(h.kinks());
    let lhs = hmt_outer(alpha, w, inner, kinks);
    let mut rhs = T::neg_infinity();
    for &(lo, hi, hv) in &pieces {
        if hv > T::zero() {
            rhs = ln_add(rhs, alpha * hv.ln() + ln_int_dt(v, lo, hi));
        }
    }
    (lhs, rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmtReport<T> {
    pub condition_max_ratio: T,
    pub inequality_max_ratio: T,
    pub condition_holds: bool,
    pub inequality_holds: bool,
    /// Largest relative gap between the two routes on indicator samples.
    pub indicator_discrepancy: T,
}

fn rel_gap_ln<T: Real>(a: T, b: T) -> T {
    if a == b {
        return T::zero();
    }
    let (ea, eb) = (a.exp(), b.exp());
    (ea - eb).abs() / ea.abs().max(eb.abs())
}

/// Checks the condition on the log-grid `xs` and the inequality on `hs` plus
/// the indicators `chi_(x,inf)` of every grid point.
pub fn hmt_check<T: Real>(
    alpha: T,
    psi: &SeparableKernel<T>,
    w: &dyn LogFn<T>,
    v: &dyn LogFn<T>,
    xs: &[T],
    hs: &[StepFn<T>],
    threshold: T,
) -> Result<HmtReport<T>> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1]".into()));
    }
    if let Some(h) = hs.iter().find(|h| !h.satisfies(Monotonicity::NonDecreasing)) {
        return Err(Error::InvalidParameter(format!("test function {:?} is not nondecreasing", h.values())));
    }
    let mut cond_max = T::zero();
    let mut ineq_max = T::zero();
    let mut gap = T::zero();
    for &x in xs {
        let (cl, cr) = hmt_condition_sides(alpha, psi, w, v, x);
        cond_max = cond_max.max(ratio_from_ln(cl, cr));
        let (il, ir) = hmt_inequality_sides(alpha, psi, w, v, &StepFn::indicator_above(x.exp()));
        ineq_max = ineq_max.max(ratio_from_ln(il, ir));
        gap = gap.max(rel_gap_ln(cl, il)).max(rel_gap_ln(cr, ir));
    }
    for h in hs {
        let (l, r) = hmt_inequality_sides(alpha, psi, w, v, h);
        ineq_max = ineq_max.max(ratio_from_ln(l, r));
    }
    Ok(HmtReport {
        condition_max_ratio: cond_max,
        inequality_max_ratio: ineq_max,
        condition_holds: cond_max <= threshold,
        inequality_holds: ineq_max <= threshold,
        indicator_discrepancy: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv_algebra::weight;
    use approx::assert_relative_eq;

    fn spec(p: f64, q: f64, v: &str, w: &str) -> InequalitySpec<f64> {
        InequalitySpec::new(p, q, weight(v), weight(w)).unwrap()
    }

    #[test]
    fn a3_equal_weights_is_one() {
        let s = spec(1.0, 1.0, "log(0,-2)", "log(0,-2)");
        assert_relative_eq!(compute_constant(&s, Which::A3).unwrap().value, 1.0, max_relative = 1e-9);
        assert_relative_eq!(compute_constant(&s, Which::A1).unwrap().value, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn a3_calculus_oracle() {
        // Maximize (L + 1/3)^{1/2} / (L + 1) over L = ln(1/x) >= 0.
        let l = 1.0 / 3.0;
        let oracle = (l + 1.0 / 3.0_f64).sqrt() / (l + 1.0);
        let s = spec(1.0, 2.0, "log(0,-2)", "log(0,-2)");
        let r = compute_constant(&s, Which::A3).unwrap();
        assert_relative_eq!(r.value, oracle, max_relative = 1e-6);
        assert_relative_eq!(r.argmax.unwrap(), (-1.0_f64 / 3.0).exp(), max_relative = 1e-3);
    }

    #[test]
    fn a4_closed_form() {
        // W = V on both sides, so the integrand is w = l^(-2,-2) with total mass 2.
        let s = spec(2.0, 1.0, "log(-1,-1)", "log(-2,-2)");
        let r = compute_constant(&s, Which::A4).unwrap();
        assert_relative_eq!(r.value, 2.0_f64.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn wrong_order_rejected() {
        let s = spec(2.0, 1.0, "log(0,-2)", "log(0,-2)");
        assert!(matches!(compute_constant(&s, Which::A3), Err(Error::Precondition(_))));
    }

    #[test]
    fn extremal_identity() {
        let w: WeightExpr<f64> = weight("log(-1,-2)");
        for x in [-20.0_f64, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0] {
            let a = ln_extremal_direct(&w, 2.0, x);
            let b = ln_extremal_split(&w, 2.0, x);
            assert_relative_eq!(a.exp(), b.exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn probe_bounded_by_a1() {
        let s = spec(1.0, 2.0, "log(0,-2)", "log(0,-2)");
        let a1 = compute_constant(&s, Which::A1).unwrap().value;
        let pr = best_constant_probe(&s, Which::A1, &GridSpec::coarse(1e-6, 1e6, 32)).unwrap();
        assert!(pr.sup <= a1 * (1.0 + 1e-6));
        assert!(pr.sup >= 0.999 * a1);
    }

    #[test]
    fn window_trivial_and_failing() {
        let s = spec(1.0, 1.0, "log(0,-2)", "log(0,-2)");
        let g = GridSpec::coarse(1e-4, 1e4, 8);
        let one = ElemFn::one();
        assert!(window_condition(&s, WindowSide::Head, &one, &g, 4.0).unwrap().pass);
        let decay = ElemFn::new(1.0, -1.0, 0.0);
        assert!(!window_condition(&s, WindowSide::Head, &decay, &g, 4.0).unwrap().pass);
    }

    #[test]
    fn het1_closed_form() {
        let w = ElemFn::exp_decay(1.0).shared();
        let v = hardy_build_v(HardyCase::Het1, 2.0, w.clone(), ElemFn::one().shared()).unwrap();
        for t in [0.01_f64, 1.0, 7.0] {
            assert_relative_eq!(v.value(t), (-t).exp(), max_relative = 1e-9);
        }
        let (l, r) = hardy_sides(&v, &StepFn::constant(1.0));
        assert_relative_eq!(l.exp(), 2.0, max_relative = 1e-8);
        assert_relative_eq!(r.exp(), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn het_zero_weight_and_divergence() {
        let v = hardy_build_v(HardyCase::Het1, 2.0, ElemFn::zero().shared(), ElemFn::one().shared()).unwrap();
        assert_eq!(v.ln_at(0.0), f64::NEG_INFINITY);
        let r = hardy_check(HardyCase::Het1, 2.0, ElemFn::zero().shared(), ElemFn::one().shared(), &[StepFn::constant(1.0)]);
        assert_eq!(r.unwrap().max_ratio, 0.0);
        let bad = hardy_build_v(HardyCase::Het1, 2.0, ElemFn::one().shared(), ElemFn::one().shared());
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn het3plus_truncated_phi() {
        let phi = ElemFn::one().on(0.0, 5.0).shared();
        let w = ElemFn::exp_decay(1.0).shared();
        let v = hardy_build_v(HardyCase::Het3Plus, 0.5, w, phi).unwrap();
        let t: f64 = 2.0;
        assert_relative_eq!(v.value(t), t.powf(-0.5) * (-t).exp(), max_relative = 1e-9);
    }

    #[test]
    fn hmt_closed_form_and_zero_v() {
        let k = SeparableKernel {
            psi1: ElemFn::exp_decay(1.0).shared(),
            psi2: ElemFn::exp_decay(1.0).shared(),
            region: KernelRegion::All,
        };
        let w = ElemFn::one();
        let v = ElemFn::exp_decay(1.0);
        let xs = [-2.0_f64, 0.0, 1.0];
        for &x in &xs {
            let (l, r) = hmt_condition_sides(1.0, &k, &w, &v, x);
            assert_relative_eq!(l.exp(), (-x.exp()).exp(), max_relative = 1e-9);
            assert_relative_eq!(r.exp(), (-x.exp()).exp(), max_relative = 1e-9);
        }
        let rep = hmt_check(1.0, &k, &w, &v, &xs, &[], 4.0).unwrap();
        assert!(rep.condition_holds && rep.inequality_holds);
        assert!(rep.indicator_discrepancy <= 1e-12);
        let rep0 = hmt_check(1.0, &k, &w, &ElemFn::zero(), &xs, &[], 4.0).unwrap();
        assert!(!rep0.condition_holds && !rep0.inequality_holds);
    }
}
