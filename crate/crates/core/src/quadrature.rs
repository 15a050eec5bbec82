//! Integration and suprema on (0, inf) against the measure `du/u`.
//!
//! Everything runs in `x = ln u`. Power-log segments are integrated by their
//! antiderivatives; anything else goes through adaptive Gauss-Kronrod (21
//! points) with semi-infinite pieces mapped onto `[0, 1)` by
//! `x = X + s / (1 - s)`. Divergence at an infinite end is decided from the
//! integrand's [`Asymptote`] before any sampling happens.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::logfn::{End, LogFn, Segment};
use crate::real::{lit, to_f64, Real};

/// Logarithmic evaluation grid on `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub t_min: T,
    pub t_max: T,
    pub points_per_decade: usize,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            t_min: lit(1e-12),
            t_max: lit(1e12),
            points_per_decade: 64,
        }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn new(t_min: T, t_max: T, points_per_decade: usize) -> Result<Self> {
        if !(t_min > T::zero() && t_min < t_max && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid requires 0 < t_min < t_max < inf, got [{t_min}, {t_max}]"
            )));
        }
        if points_per_decade < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid requires at least 8 points per decade, got {points_per_decade}"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            points_per_decade,
        })
    }

    /// Grid with an explicit density below the 8-per-decade floor; used for
    /// coarse scans and tests.
    pub fn coarse(t_min: T, t_max: T, points_per_decade: usize) -> Self {
        Self {
            t_min,
            t_max,
            points_per_decade: points_per_decade.max(1),
        }
    }

    /// Grid nodes in `x = ln t`, endpoints included.
    pub fn log_points(&self) -> Vec<T> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let decades = to_f64((b - a) / T::LN_10());
        let n = ((decades * self.points_per_decade as f64).round() as usize).max(1);
        (0..=n)
            .map(|i| a + (b - a) * lit::<T>(i as f64) / lit::<T>(n as f64))
            .collect()
    }

    pub fn points(&self) -> Vec<T> {
        self.log_points().into_iter().map(|x| x.exp()).collect()
    }
}

/// Which end of the interval made an integral diverge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergentEnd {
    AtZero,
    AtInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult<T> {
    pub value: T,
    pub error_bound: T,
    pub divergent_end: Option<DivergentEnd>,
}

impl<T: Real> IntegralResult<T> {
    fn divergent(end: DivergentEnd) -> Self {
        Self {
            value: T::infinity(),
            error_bound: T::zero(),
            divergent_end: Some(end),
        }
    }

    fn zero() -> Self {
        Self {
            value: T::zero(),
            error_bound: T::zero(),
            divergent_end: None,
        }
    }
}

/// Quadrature controls.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions<T> {
    /// Relative tolerance for adaptive pieces.
    pub tol: T,
    /// Use antiderivatives on power-log segments when available.
    pub closed_form: bool,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-11),
            closed_form: true,
            max_intervals: 4000,
        }
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525043220,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// How a piece of the x-axis is parametrized for the Kronrod rule.
#[derive(Clone, Copy, Debug)]
enum Map<T> {
    /// Plain `x` on a finite interval.
    Finite,
    /// `x = base + s / (1 - s)`, `s in [0, 1)`.
    Right(T),
    /// `x = base - s / (1 - s)`, `s in [0, 1)`.
    Left(T),
}

impl<T: Real> Map<T> {
    #[inline]
    fn apply(self, s: T) -> (T, T) {
        match self {
            Map::Finite => (s, T::one()),
            Map::Right(base) => {
                let d = T::one() - s;
                (base + s / d, T::one() / (d * d))
            }
            Map::Left(base) => {
                let d = T::one() - s;
                (base - s / d, T::one() / (d * d))
            }
        }
    }
}

struct Piece<T> {
    a: T,
    b: T,
    map: Map<T>,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Integrand `exp(q ln g(x) - shift)`.
struct Scaled<'a, T: Real> {
    g: &'a dyn LogFn<T>,
    q: T,
    shift: T,
}

impl<'a, T: Real> Scaled<'a, T> {
    #[inline]
    fn eval(&self, x: T) -> Result<T> {
        let l = self.g.ln_at(x);
        if l.is_nan() || l == T::infinity() {
            return Err(Error::NonFinite { x: to_f64(x) });
        }
        Ok((self.q * l - self.shift).exp())
    }

    fn kronrod(&self, a: T, b: T, map: Map<T>) -> Result<(T, T)> {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        let eval_at = |s: T| -> Result<T> {
            let (x, jac) = map.apply(s);
            let v = self.eval(x)?;
            Ok(if v == T::zero() { v } else { v * jac })
        };
        let fc = eval_at(mid)?;
        let mut rk = fc * lit(WGK[10]);
        let mut rg = T::zero();
        for j in 0..10 {
            let dx = half * lit(XGK[j]);
            let f1 = eval_at(mid - dx)?;
            let f2 = eval_at(mid + dx)?;
            rk = rk + (f1 + f2) * lit(WGK[j]);
            if j % 2 == 1 {
                rg = rg + (f1 + f2) * lit(WG[j / 2]);
            }
        }
        let k = rk * half;
        let g = rg * half;
        let err = (k - g).abs() + T::epsilon() * lit::<T>(50.0) * k.abs();
        Ok((k, err))
    }
}

/// `int_a^b g(u)^q du/u`.
///
/// `a = 0` and `b = inf` are allowed. Divergence at an infinite end yields
/// `value = inf` with `divergent_end` set.
pub fn integrate_log<T: Real>(
    g: &dyn LogFn<T>,
    q: T,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<IntegralResult<T>> {
    if !(q > T::zero() && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent q must be finite and positive, got {q}")));
    }
    let xa = if a <= T::zero() { T::neg_infinity() } else { a.ln() };
    let xb = if b == T::infinity() { T::infinity() } else { b.ln() };
    integrate_log_x(g, q, xa, xb, opts)
}

/// [`integrate_log`] with limits already given in `x = ln u`.
pub fn integrate_log_x<T: Real>(
    g: &dyn LogFn<T>,
    q: T,
    xa: T,
    xb: T,
    opts: &QuadOptions<T>,
) -> Result<IntegralResult<T>> {
    if !(xa < xb) {
        return Ok(IntegralResult::zero());
    }
    if opts.closed_form {
        if let Some(segs) = g.segments() {
            return integrate_segments(g, &segs, q, xa, xb, opts);
        }
    }
    if xa == T::neg_infinity() && !g.asymptote(End::Zero).integrable(q) {
        return Ok(IntegralResult::divergent(DivergentEnd::AtZero));
    }
    if xb == T::infinity() && !g.asymptote(End::Infinity).integrable(q) {
        return Ok(IntegralResult::divergent(DivergentEnd::AtInfinity));
    }
    adaptive(g, q, xa, xb, &g.kinks(), opts)
}

fn integrate_segments<T: Real>(
    g: &dyn LogFn<T>,
    segs: &[Segment<T>],
    q: T,
    xa: T,
    xb: T,
    opts: &QuadOptions<T>,
) -> Result<IntegralResult<T>> {
    let mut total = T::zero();
    let mut err = T::zero();
    for seg in segs {
        let lo = seg.lo.max(xa);
        let hi = seg.hi.min(xb);
        if !(lo < hi) || seg.ln_c == T::neg_infinity() {
            continue;
        }
        let p = q * seg.rate;
        let al = q * seg.log_power;
        let lnc = q * seg.ln_c;
        // Divergence at the infinite ends of this segment.
        if lo == T::neg_infinity() {
            let asym = crate::logfn::Asymptote {
                rate: -seg.rate,
                stretch: T::zero(),
                stretch_exp: T::zero(),
                log_power: seg.log_power,
            };
            if !asym.integrable(q) {
                return Ok(IntegralResult::divergent(DivergentEnd::AtZero));
            }
        }
        if hi == T::infinity() {
            let asym = crate::logfn::Asymptote {
                rate: seg.rate,
                stretch: T::zero(),
                stretch_exp: T::zero(),
                log_power: seg.log_power,
            };
            if !asym.integrable(q) {
                return Ok(IntegralResult::divergent(DivergentEnd::AtInfinity));
            }
        }
        let v = if al == T::zero() {
            exp_integral(lnc, p, lo, hi)
        } else if p == T::zero() {
            lnc.exp() * log_power_integral(al, lo, hi)
        } else {
            let r = adaptive(g, q, lo, hi, &geometric_seeds(lo, hi, p), opts)?;
            err = err + r.error_bound;
            r.value
        };
        total = total + v;
    }
    err = err + total.abs() * T::epsilon() * lit(16.0);
    Ok(IntegralResult {
        value: total,
        error_bound: err,
        divergent_end: None,
    })
}

/// Split points `2^k` away from the end where `exp(p x)` peaks, for long
/// finite segments.
fn geometric_seeds<T: Real>(lo: T, hi: T, p: T) -> Vec<T> {
    let mut v = Vec::new();
    if !(lo.is_finite() && hi.is_finite()) {
        return v;
    }
    let mut d: T = lit(4.0);
    while d < hi - lo {
        v.push(if p > T::zero() { hi - d } else { lo + d });
        d = d * lit(4.0);
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// `int_lo^hi exp(lnc + p x) dx`.
fn exp_integral<T: Real>(lnc: T, p: T, lo: T, hi: T) -> T {
    if p == T::zero() {
        return (hi - lo) * lnc.exp();
    }
    if p > T::zero() {
        // exp(lnc + p hi) * (1 - exp(-p (hi - lo))) / p
        let top = lnc + p * hi;
        let frac = if lo == T::neg_infinity() { T::one() } else { -(-(p * (hi - lo))).exp_m1() };
        top.exp() * frac / p
    } else {
        let top = lnc + p * lo;
        let frac = if hi == T::infinity() { T::one() } else { -(p * (hi - lo)).exp_m1() };
        top.exp() * frac / (-p)
    }
}

/// `int_lo^hi (1 + |x|)^a dx` on an interval that does not straddle zero.
fn log_power_integral<T: Real>(a: T, lo: T, hi: T) -> T {
    // Reflect the negative side onto the positive one.
    let (u, v) = if hi <= T::zero() { (-hi, -lo) } else { (lo, hi) };
    let f = |y: T| -> T {
        if y == T::infinity() {
            return T::zero();
        }
        if (a + T::one()).abs() < T::epsilon() {
            y.ln_1p()
        } else {
            (y.ln_1p() * (a + T::one())).exp() / (a + T::one())
        }
    };
    if (a + T::one()).abs() < T::epsilon() {
        if v == T::infinity() {
            return T::infinity();
        }
        return v.ln_1p() - u.ln_1p();
    }
    if v == T::infinity() {
        // a < -1 here (convergent), F(inf) = 0.
        return -f(u);
    }
    // (1+v)^{a+1} - (1+u)^{a+1}, written to avoid cancellation for close limits.
    let e = a + T::one();
    let lu = u.ln_1p();
    let lv = v.ln_1p();
    (lu * e).exp() * (((lv - lu) * e).exp_m1()) / e
}

/// Break points used to seed the adaptive partition on a span of the axis.
fn seed_points<T: Real>(xa: T, xb: T, kinks: &[T]) -> Vec<T> {
    let mut pts: Vec<T> = vec![T::zero()];
    pts.extend(kinks.iter().copied());
    // Geometric ladder so long finite spans start out subdivided.
    let mut s = T::one();
    let cap: T = lit(1e6);
    while s < cap {
        pts.push(s);
        pts.push(-s);
        s = s * lit(4.0);
    }
    pts.retain(|p| p.is_finite() && *p > xa && *p < xb);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn adaptive<T: Real>(
    g: &dyn LogFn<T>,
    q: T,
    xa: T,
    xb: T,
    kinks: &[T],
    opts: &QuadOptions<T>,
) -> Result<IntegralResult<T>> {
    let mut pts = seed_points(xa, xb, kinks);
    // Intervals as (a, b, map) in the parameter of their map.
    let mut spans: Vec<(T, T, Map<T>)> = Vec::new();
    let mut bounds = vec![xa];
    bounds.append(&mut pts);
    bounds.push(xb);
    // Infinite ends: keep one finite anchor so the mapped tail is [anchor, inf).
    if bounds.len() == 2 && bounds[0] == T::neg_infinity() && bounds[1] == T::infinity() {
        bounds.insert(1, T::zero());
    }
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo == T::neg_infinity() {
            spans.push((T::zero(), T::one(), Map::Left(hi)));
        } else if hi == T::infinity() {
            spans.push((T::zero(), T::one(), Map::Right(lo)));
        } else {
            spans.push((lo, hi, Map::Finite));
        }
    }

    // Shift so the largest sampled integrand value is O(1).
    let mut shift = T::neg_infinity();
    for (a, b, map) in &spans {
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = *a + (*b - *a) * lit(frac);
            let (x, _) = map.apply(s);
            let l = q * g.ln_at(x);
            if l.is_finite() && l > shift {
                shift = l;
            }
        }
    }
    if shift == T::neg_infinity() {
        shift = T::zero();
    }
    let integrand = Scaled { g, q, shift };

    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = T::zero();
    for (a, b, map) in spans {
        let (v, e) = integrand.kronrod(a, b, map)?;
        total = total + v;
        total_err = total_err + e;
        heap.push(Piece { a, b, map, value: v, error: e });
    }
    let mut count = heap.len();
    // Arguments of size |x| carry rounding of order eps |x| in ln g; no
    // tolerance below that is reachable.
    let reach = [xa, xb]
        .iter()
        .filter(|v| v.is_finite())
        .fold(T::one(), |m, v| m.max(v.abs()));
    let tol = opts.tol.max(T::epsilon() * lit::<T>(64.0) * reach);
    while total_err > tol * total.abs() && count < opts.max_intervals {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = (worst.a + worst.b) / lit(2.0);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = integrand.kronrod(worst.a, mid, worst.map)?;
        let (v2, e2) = integrand.kronrod(mid, worst.b, worst.map)?;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Piece { a: worst.a, b: mid, map: worst.map, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, map: worst.map, value: v2, error: e2 });
        count += 1;
    }
    // Re-sum in a fixed order for determinism and to shed drift.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, r| {
        let key = |p: &Piece<T>| match p.map {
            Map::Left(_) => (0, p.a),
            Map::Finite => (1, p.a),
            Map::Right(_) => (2, p.a),
        };
        let (kp, ap) = key(p);
        let (kr, ar) = key(r);
        kp.cmp(&kr).then(ap.partial_cmp(&ar).unwrap_or(Ordering::Equal))
    });
    let total: T = pieces.iter().map(|p| p.value).sum();
    let err: T = pieces.iter().map(|p| p.error).sum();
    let scale = shift.exp();
    Ok(IntegralResult {
        value: total * scale,
        error_bound: err * scale,
        divergent_end: None,
    })
}

/// Exponent of a quasi-norm: finite `q > 0` or `q = inf`.
pub fn is_sup<T: Real>(q: T) -> bool {
    q == T::infinity()
}

/// `||g||_{q,(a,b)}` against `du/u`, i.e. `(int_a^b g^q du/u)^{1/q}`, or the
/// supremum of `g` on `(a, b)` when `q = inf`.
pub fn qnorm_log<T: Real>(g: &dyn LogFn<T>, q: T, a: T, b: T, opts: &QuadOptions<T>) -> Result<T> {
    if is_sup(q) {
        return sup_log(g, a, b);
    }
    let r = integrate_log(g, q, a, b, opts)?;
    Ok(r.value.powf(T::one() / q))
}

/// Same as [`qnorm_log`] with limits in `x = ln u`.
pub fn qnorm_log_x<T: Real>(g: &dyn LogFn<T>, q: T, xa: T, xb: T, opts: &QuadOptions<T>) -> Result<T> {
    if is_sup(q) {
        return sup_log_x(g, xa, xb);
    }
    let r = integrate_log_x(g, q, xa, xb, opts)?;
    Ok(r.value.powf(T::one() / q))
}

/// Supremum of `g` on `(a, b)`: grid scan with golden-section refinement
/// around the best node; exact for functions monotone between kinks.
pub fn sup_log<T: Real>(g: &dyn LogFn<T>, a: T, b: T) -> Result<T> {
    let xa = if a <= T::zero() { T::neg_infinity() } else { a.ln() };
    let xb = if b == T::infinity() { T::infinity() } else { b.ln() };
    sup_log_x(g, xa, xb)
}

pub fn sup_log_x<T: Real>(g: &dyn LogFn<T>, xa: T, xb: T) -> Result<T> {
    Ok(ln_sup_x(g, xa, xb)?.exp())
}

/// `ln sup g` on `(xa, xb)`.
pub fn ln_sup_x<T: Real>(g: &dyn LogFn<T>, xa: T, xb: T) -> Result<T> {
    ln_sup_arg_x(g, xa, xb).map(|(v, _)| v)
}

/// Like [`ln_sup_x`] but also returns the log-abscissa where the supremum is
/// (approximately) attained. Unbounded ends report `x = -inf` or `+inf`.
pub fn ln_sup_arg_x<T: Real>(g: &dyn LogFn<T>, xa: T, xb: T) -> Result<(T, T)> {
    if !(xa < xb) {
        return Ok((T::neg_infinity(), T::nan()));
    }
    if xa == T::neg_infinity() && !g.asymptote(End::Zero).bounded() {
        return Ok((T::infinity(), T::neg_infinity()));
    }
    if xb == T::infinity() && !g.asymptote(End::Infinity).bounded() {
        return Ok((T::infinity(), T::infinity()));
    }
    let window: T = lit(60.0);
    let lo = if xa.is_finite() { xa } else { xb.min(T::zero()) - window };
    let hi = if xb.is_finite() { xb } else { xa.max(T::zero()) + window };
    let mut xs: Vec<T> = Vec::new();
    let n = ((to_f64(hi - lo) / 0.05).ceil() as usize).clamp(16, 20_000);
    for i in 0..=n {
        xs.push(lo + (hi - lo) * lit::<T>(i as f64) / lit::<T>(n as f64));
    }
    xs.extend(g.kinks().into_iter().filter(|k| *k > lo && *k < hi));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eval = |x: T| -> Result<T> {
        let v = g.ln_at(x);
        if v.is_nan() {
            return Err(Error::NonFinite { x: to_f64(x) });
        }
        Ok(v)
    };
    let mut best = T::neg_infinity();
    let mut best_i = 0;
    let vals: Vec<T> = xs.iter().map(|&x| eval(x)).collect::<Result<_>>()?;
    for (i, v) in vals.iter().enumerate() {
        if *v > best {
            best = *v;
            best_i = i;
        }
    }
    let mut arg = xs[best_i];
    if vals.len() >= 3 && best_i > 0 && best_i + 1 < vals.len() {
        let (v, x) = golden_argmax(|x| eval(x).unwrap_or(T::neg_infinity()), xs[best_i - 1], xs[best_i + 1], 60);
        if v > best {
            best = v;
            arg = x;
        }
    }
    // Far samples for flat infinite ends (limits approached from inside).
    for far in [1e3, 1e5] {
        let mut probe = |x: T| -> Result<()> {
            let v = eval(x)?;
            if v > best {
                best = v;
                arg = x;
            }
            Ok(())
        };
        if !xa.is_finite() {
            probe(-lit::<T>(far))?;
        }
        if !xb.is_finite() {
            probe(lit::<T>(far))?;
        }
    }
    Ok((best, arg))
}

/// Maximum value of a unimodal-ish function on `[a, b]` by golden section.
pub fn golden_max<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, iters: usize) -> T {
    golden_argmax(f, a, b, iters).0
}

/// Golden-section maximum together with its location.
pub fn golden_argmax<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let r: T = lit(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * r;
    let mut d = a + (b - a) * r;
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best, mut arg) = if fc >= fd { (fc, c) } else { (fd, d) };
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * r;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * r;
            fd = f(d);
        }
        if fc > best {
            best = fc;
            arg = c;
        }
        if fd > best {
            best = fd;
            arg = d;
        }
    }
    (best, arg)
}
