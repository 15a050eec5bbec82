//! Slowly varying weights as combinator expressions.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! w := one | log(a0, aInf) | explog(a) | mul(w, w) | pow(w, r) | flip(w)
//! ```
//!
//! `log(a0, aInf)` is the broken logarithm `(1 - ln t)^a0` on `(0, 1]` and
//! `(1 + ln t)^aInf` on `(1, inf)`; `explog(a)` is `exp(|ln t|^a)` with
//! `0 < a < 1`; `flip(w)(t) = w(1/t)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::interp_norms::{quasi_monotone_constant, Direction};
use crate::logfn::{Asymptote, End, LogFn, PowerFn, ProductFn, Segment};
use crate::quadrature::{
    integrate_log_x, ln_sup_x, GridSpec, QuadOptions,
};
use crate::real::{lit, Real};

#[derive(Clone, Debug, PartialEq)]
pub enum WeightExpr<T> {
    One,
    PowerLog { a0: T, a_inf: T },
    ExpLog { alpha: T },
    Product(Box<WeightExpr<T>>, Box<WeightExpr<T>>),
    Power(Box<WeightExpr<T>>, T),
    Flip(Box<WeightExpr<T>>),
}

impl<T: Real> WeightExpr<T> {
    pub fn one() -> Self {
        WeightExpr::One
    }

    /// The broken logarithm `l^(a0, a_inf)`.
    pub fn log(a0: T, a_inf: T) -> Self {
        WeightExpr::PowerLog { a0, a_inf }
    }

    pub fn explog(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "explog exponent must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(WeightExpr::ExpLog { alpha })
    }

    pub fn mul(self, other: Self) -> Self {
        WeightExpr::Product(Box::new(self), Box::new(other))
    }

    pub fn pow(self, r: T) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!("power exponent must be finite, got {r}")));
        }
        Ok(WeightExpr::Power(Box::new(self), r))
    }

    pub fn flip(self) -> Self {
        WeightExpr::Flip(Box::new(self))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).parse_all()
    }

    pub fn eval(&self, t: T) -> T {
        self.value(t)
    }

    /// Exponent pair `(a0, a_inf)` when the weight reduces to a single broken
    /// logarithm.
    pub fn as_power_log(&self) -> Option<(T, T)> {
        match self {
            WeightExpr::One => Some((T::zero(), T::zero())),
            WeightExpr::PowerLog { a0, a_inf } => Some((*a0, *a_inf)),
            WeightExpr::ExpLog { .. } => None,
            WeightExpr::Product(l, r) => {
                let (a, b) = l.as_power_log()?;
                let (c, d) = r.as_power_log()?;
                Some((a + c, b + d))
            }
            WeightExpr::Power(b, r) => {
                let (a0, ai) = b.as_power_log()?;
                Some((a0 * *r, ai * *r))
            }
            WeightExpr::Flip(b) => {
                let (a0, ai) = b.as_power_log()?;
                Some((ai, a0))
            }
        }
    }

    /// `(int_t^inf b^q du/u)^{1/q}`, or the supremum over `(t, inf)` for `q = inf`.
    pub fn tail_qnorm(&self, q: T, t: T) -> T {
        tail_qnorm_x(self, q, t.ln(), &QuadOptions::default())
    }

    /// `(int_0^t b^q du/u)^{1/q}`, or the supremum over `(0, t)` for `q = inf`.
    pub fn head_qnorm(&self, q: T, t: T) -> T {
        head_qnorm_x(self, q, t.ln(), &QuadOptions::default())
    }

    pub fn classify(&self, q: T) -> SvClassReport<T> {
        let tail = self.tail_qnorm(q, T::one());
        let head = self.head_qnorm(q, T::one());
        SvClassReport {
            q,
            in_sv0q: tail.is_finite(),
            in_sv1q: head.is_finite(),
            tail_value_at_1: tail,
            head_value_at_1: head,
        }
    }
}

impl<T: Real> LogFn<T> for WeightExpr<T> {
    fn ln_at(&self, x: T) -> T {
        match self {
            WeightExpr::One => T::zero(),
            WeightExpr::PowerLog { a0, a_inf } => {
                if x <= T::zero() {
                    if *a0 == T::zero() {
                        T::zero()
                    } else {
                        *a0 * (-x).ln_1p()
                    }
                } else if *a_inf == T::zero() {
                    T::zero()
                } else {
                    *a_inf * x.ln_1p()
                }
            }
            WeightExpr::ExpLog { alpha } => x.abs().powf(*alpha),
            WeightExpr::Product(l, r) => l.ln_at(x) + r.ln_at(x),
            WeightExpr::Power(b, r) => *r * b.ln_at(x),
            WeightExpr::Flip(b) => b.ln_at(-x),
        }
    }

    fn asymptote(&self, end: End) -> Asymptote<T> {
        match self {
            WeightExpr::One => Asymptote::flat(),
            WeightExpr::PowerLog { a0, a_inf } => match end {
                End::Zero => Asymptote::log(*a0),
                End::Infinity => Asymptote::log(*a_inf),
            },
            WeightExpr::ExpLog { alpha } => Asymptote::stretched(T::one(), *alpha),
            WeightExpr::Product(l, r) => l.asymptote(end).add(&r.asymptote(end)),
            WeightExpr::Power(b, r) => b.asymptote(end).scale(*r),
            WeightExpr::Flip(b) => b.asymptote(end.other()),
        }
    }

    fn kinks(&self) -> Vec<T> {
        match self {
            WeightExpr::One => vec![],
            _ => vec![T::zero()],
        }
    }

    fn segments(&self) -> Option<Vec<Segment<T>>> {
        let (a0, ai) = self.as_power_log()?;
        Some(vec![
            Segment {
                lo: T::neg_infinity(),
                hi: T::zero(),
                ln_c: T::zero(),
                rate: T::zero(),
                log_power: a0,
            },
            Segment {
                lo: T::zero(),
                hi: T::infinity(),
                ln_c: T::zero(),
                rate: T::zero(),
                log_power: ai,
            },
        ])
    }
}

impl<T: Real> fmt::Display for WeightExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::One => write!(f, "one"),
            WeightExpr::PowerLog { a0, a_inf } => write!(f, "log({a0},{a_inf})"),
            WeightExpr::ExpLog { alpha } => write!(f, "explog({alpha})"),
            WeightExpr::Product(l, r) => write!(f, "mul({l},{r})"),
            WeightExpr::Power(b, r) => write!(f, "pow({b},{r})"),
            WeightExpr::Flip(b) => write!(f, "flip({b})"),
        }
    }
}

/// Integrability classes of a weight for one exponent `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvClassReport<T> {
    pub q: T,
    pub in_sv0q: bool,
    pub in_sv1q: bool,
    pub tail_value_at_1: T,
    pub head_value_at_1: T,
}

/// Tail norm with the cut given in `x = ln t`.
pub fn tail_qnorm_x<T: Real>(b: &dyn LogFn<T>, q: T, x: T, opts: &QuadOptions<T>) -> T {
    norm_x(b, q, x, T::infinity(), opts)
}

/// Head norm with the cut given in `x = ln t`.
pub fn head_qnorm_x<T: Real>(b: &dyn LogFn<T>, q: T, x: T, opts: &QuadOptions<T>) -> T {
    norm_x(b, q, T::neg_infinity(), x, opts)
}

/// `ln` of the tail norm.
pub fn ln_tail_qnorm_x<T: Real>(b: &dyn LogFn<T>, q: T, x: T, opts: &QuadOptions<T>) -> T {
    ln_norm_x(b, q, x, T::infinity(), opts)
}

/// `ln` of the head norm.
pub fn ln_head_qnorm_x<T: Real>(b: &dyn LogFn<T>, q: T, x: T, opts: &QuadOptions<T>) -> T {
    ln_norm_x(b, q, T::neg_infinity(), x, opts)
}

fn norm_x<T: Real>(b: &dyn LogFn<T>, q: T, xa: T, xb: T, opts: &QuadOptions<T>) -> T {
    ln_norm_x(b, q, xa, xb, opts).exp()
}

/// `ln ||b||_{q,(e^xa, e^xb)}` in the `du/u` convention.
///
/// Evaluation failures (non-finite integrands) surface as NaN; grammar weights
/// never produce them.
pub fn ln_norm_x<T: Real>(b: &dyn LogFn<T>, q: T, xa: T, xb: T, opts: &QuadOptions<T>) -> T {
    if q == T::infinity() {
        return ln_sup_x(b, xa, xb).unwrap_or(T::nan());
    }
    match ln_integral_x(b, q, xa, xb, opts) {
        Ok(v) => v / q,
        Err(_) => T::nan(),
    }
}

/// `ln int_{xa}^{xb} g^q dx`, overflow-safe: the integrand is rescaled by its
/// value at a reference point before integrating.
pub fn ln_integral_x<T: Real>(g: &dyn LogFn<T>, q: T, xa: T, xb: T, opts: &QuadOptions<T>) -> Result<T> {
    if !(xa < xb) {
        return Ok(T::neg_infinity());
    }
    let r = integrate_log_x(g, q, xa, xb, opts)?;
    if r.divergent_end.is_some() {
        return Ok(T::infinity());
    }
    if r.value.is_finite() && r.value > T::zero() && r.value > T::min_positive_value() * lit(1e20) {
        return Ok(r.value.ln());
    }
    // Zero, tiny or overflowed: shift by the integrand's value near the interval to stay in range.
    let xr = if xa.is_finite() && xb.is_finite() {
        (xa + xb) / lit(2.0)
    } else if xa.is_finite() {
        xa
    } else if xb.is_finite() {
        xb
    } else {
        T::zero()
    };
    let shift = q * g.ln_at(xr);
    if !shift.is_finite() {
        return Ok(if r.value > T::zero() { r.value.ln() } else { T::neg_infinity() });
    }
    let scaled = ShiftedFn { g, shift: shift / q };
    let r2 = integrate_log_x(&scaled, q, xa, xb, opts)?;
    if r2.divergent_end.is_some() {
        return Ok(T::infinity());
    }
    Ok(r2.value.ln() + shift)
}

struct ShiftedFn<'a, T: Real> {
    g: &'a dyn LogFn<T>,
    shift: T,
}

impl<'a, T: Real> LogFn<T> for ShiftedFn<'a, T> {
    fn ln_at(&self, x: T) -> T {
        self.g.ln_at(x) - self.shift
    }
    fn asymptote(&self, end: End) -> Asymptote<T> {
        self.g.asymptote(end)
    }
    fn kinks(&self) -> Vec<T> {
        self.g.kinks()
    }
    fn segments(&self) -> Option<Vec<Segment<T>>> {
        self.g.segments().map(|s| {
            s.into_iter()
                .map(|mut seg| {
                    seg.ln_c = seg.ln_c - self.shift;
                    seg
                })
                .collect()
        })
    }
}

/// `b~(t) = int_t^inf b(u) du/u`, the integrated weight.
#[derive(Clone, Debug)]
pub struct TildeWeight<T: Real> {
    b: WeightExpr<T>,
    opts: QuadOptions<T>,
}

impl<T: Real> TildeWeight<T> {
    pub fn weight(&self) -> &WeightExpr<T> {
        &self.b
    }
}

impl<T: Real> LogFn<T> for TildeWeight<T> {
    fn ln_at(&self, x: T) -> T {
        ln_tail_qnorm_x(&self.b, T::one(), x, &self.opts)
    }
    fn kinks(&self) -> Vec<T> {
        vec![T::zero()]
    }
}

/// Builds `b~`; fails when `int_1^inf b(u) du/u` diverges.
pub fn tilde_construction<T: Real>(b: &WeightExpr<T>) -> Result<TildeWeight<T>> {
    let tail = b.tail_qnorm(T::one(), T::one());
    if !tail.is_finite() {
        return Err(Error::Precondition(format!(
            "int_1^inf b(u) du/u diverges for b = {b}"
        )));
    }
    Ok(TildeWeight {
        b: b.clone(),
        opts: QuadOptions::default(),
    })
}

/// Quasi-monotonicity constants of `t^{+eps} b` (toward nondecreasing) and
/// `t^{-eps} b` (toward nonincreasing) for one `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvCheckRow<T> {
    pub eps: T,
    pub increasing_constant: T,
    pub decreasing_constant: T,
}

impl<T: Real> SvCheckRow<T> {
    pub fn passes(&self, threshold: T) -> bool {
        self.increasing_constant <= threshold && self.decreasing_constant <= threshold
    }
}

/// Grid form of the slowly varying property.
pub fn sv_check<T: Real>(b: &WeightExpr<T>, eps: &[T], grid: &GridSpec<T>) -> Vec<SvCheckRow<T>> {
    let xs = grid.log_points();
    eps.iter()
        .map(|&e| {
            let up: Vec<T> = xs.iter().map(|&x| e * x + b.ln_at(x)).collect();
            let down: Vec<T> = xs.iter().map(|&x| -e * x + b.ln_at(x)).collect();
            SvCheckRow {
                eps: e,
                increasing_constant: quasi_monotone_constant(&up, Direction::NonDecreasing),
                decreasing_constant: quasi_monotone_constant(&down, Direction::NonIncreasing),
            }
        })
        .collect()
}

/// `||u^{alpha-1} b||_{1,(0,t)} / (t^alpha b(t))`.
pub fn head_power_ratio<T: Real>(b: &WeightExpr<T>, alpha: T, t: T) -> T {
    let x = t.ln();
    let p = PowerFn(alpha);
    let g = ProductFn::new().with(&p).with(b);
    let opts = QuadOptions::default();
    (ln_norm_x(&g, T::one(), T::neg_infinity(), x, &opts) - alpha * x - b.ln_at(x)).exp()
}

/// `||u^{-alpha-1} b||_{1,(t,inf)} / (t^{-alpha} b(t))`.
pub fn tail_power_ratio<T: Real>(b: &WeightExpr<T>, alpha: T, t: T) -> T {
    let x = t.ln();
    let p = PowerFn(-alpha);
    let g = ProductFn::new().with(&p).with(b);
    let opts = QuadOptions::default();
    (ln_norm_x(&g, T::one(), x, T::infinity(), &opts) + alpha * x - b.ln_at(x)).exp()
}

/// Smallest and largest value of a ratio function over the grid.
pub fn ratio_band<T: Real, F: Fn(T) -> T>(f: F, grid: &GridSpec<T>) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for t in grid.points() {
        let v = f(t);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<R>(&self, msg: impl Into<String>) -> Result<R> {
        Err(Error::Syntax {
            col: self.pos + 1,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.pos < self.src.len() && self.src[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a weight name");
        }
        // The slice is ASCII by construction.
        Ok((start, std::str::from_utf8(&self.src[start..self.pos]).unwrap()))
    }

    fn number<T: Real>(&mut self) -> Result<T> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let sign_ok = (c == b'-' || c == b'+')
                && (self.pos == start || matches!(self.src[self.pos - 1], b'e' | b'E'));
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || sign_ok {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(lit(v)),
            _ => {
                self.pos = start;
                self.err(format!("expected a decimal number, found '{text}'"))
            }
        }
    }

    fn expr<T: Real>(&mut self) -> Result<WeightExpr<T>> {
        let (start, name) = self.ident()?;
        match name {
            "one" => Ok(WeightExpr::One),
            "log" => {
                self.expect(b'(')?;
                let a0 = self.number()?;
                self.expect(b',')?;
                let ai = self.number()?;
                self.expect(b')')?;
                Ok(WeightExpr::log(a0, ai))
            }
            "explog" => {
                self.expect(b'(')?;
                self.skip_ws();
                let at = self.pos;
                let a: T = self.number()?;
                self.expect(b')')?;
                WeightExpr::explog(a).map_err(|_| Error::Syntax {
                    col: at + 1,
                    msg: format!("explog exponent must lie in (0, 1), got {a}"),
                })
            }
            "mul" => {
                self.expect(b'(')?;
                let l = self.expr()?;
                self.expect(b',')?;
                let r = self.expr()?;
                self.expect(b')')?;
                Ok(l.mul(r))
            }
            "pow" => {
                self.expect(b'(')?;
                let b = self.expr()?;
                self.expect(b',')?;
                let r = self.number()?;
                self.expect(b')')?;
                b.pow(r)
            }
            "flip" => {
                self.expect(b'(')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(b.flip())
            }
            other => Err(Error::Syntax {
                col: start + 1,
                msg: format!("unknown weight '{other}'"),
            }),
        }
    }

    fn parse_all<T: Real>(mut self) -> Result<WeightExpr<T>> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("trailing input");
        }
        Ok(e)
    }
}

/// Shorthand used by tests and the command line: parse or panic with the
/// parser's message.
pub fn weight<T: Real>(text: &str) -> WeightExpr<T> {
    WeightExpr::parse(text).unwrap_or_else(|e| panic!("bad weight '{text}': {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn parses_grammar() {
        let w: WeightExpr<f64> = weight("mul(log(2,0), pow(log(0,-2), 0.5))");
        assert_eq!(
            w,
            WeightExpr::log(2.0, 0.0).mul(WeightExpr::log(0.0, -2.0).pow(0.5).unwrap())
        );
        assert_eq!(weight::<f64>(" one "), WeightExpr::One);
        assert_eq!(weight::<f64>("flip(log(1e0,-2.5))"), WeightExpr::log(1.0, -2.5).flip());
    }

    #[test]
    fn syntax_errors_carry_columns() {
        match WeightExpr::<f64>::parse("mul(one,, one)") {
            Err(Error::Syntax { col, .. }) => assert_eq!(col, 9),
            other => panic!("{other:?}"),
        }
        match WeightExpr::<f64>::parse("explog(1.5)") {
            Err(Error::Syntax { col, .. }) => assert_eq!(col, 8),
            other => panic!("{other:?}"),
        }
        assert!(WeightExpr::<f64>::parse("lg(0,1)").is_err());
        assert!(WeightExpr::<f64>::parse("one x").is_err());
    }

    #[test]
    fn evaluates_broken_log() {
        let w: WeightExpr<f64> = weight("log(2,3)");
        assert!((w.eval(1.0 / E) - 4.0).abs() < 1e-14);
        assert!((w.eval(E) - 8.0).abs() < 1e-14);
        assert!((w.clone().flip().eval(E) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn tail_and_head_norms() {
        let b: WeightExpr<f64> = weight("log(0,-2)");
        assert!((b.tail_qnorm(1.0, E) - 0.5).abs() < 1e-12);
        assert!((b.tail_qnorm(2.0, 1.0) - (1.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(WeightExpr::<f64>::One.tail_qnorm(f64::INFINITY, 7.0), 1.0);
        let h: WeightExpr<f64> = weight("log(-2,0)");
        assert!((h.head_qnorm(1.0, 1.0 / E) - 0.5).abs() < 1e-12);
        assert!(WeightExpr::<f64>::One.head_qnorm(1.0, 1.0).is_infinite());
    }

    #[test]
    fn classification() {
        let b: WeightExpr<f64> = weight("log(0,-2)");
        let r = b.classify(1.0);
        assert!(r.in_sv0q);
        assert!((r.tail_value_at_1 - 1.0).abs() < 1e-12);
        assert!(!WeightExpr::<f64>::One.classify(2.0).in_sv0q);
        assert!(weight::<f64>("log(-2,0)").classify(1.0).in_sv1q);
    }

    #[test]
    fn tilde_weight() {
        let b: WeightExpr<f64> = weight("log(0,-2)");
        let bt = tilde_construction(&b).unwrap();
        assert!((bt.value(E) - 0.5).abs() < 1e-12);
        assert!((bt.value(E * E * E) - 0.25).abs() < 1e-12);
        assert!(tilde_construction(&WeightExpr::<f64>::One).is_err());
    }

    #[test]
    fn explog_adaptive_tail() {
        // exp(-(ln u)^{1/2}) on (1, inf): int_0^inf e^{-sqrt x} dx = 2.
        let b: WeightExpr<f64> = weight("pow(explog(0.5),-1)");
        assert!((b.tail_qnorm(1.0, 1.0) - 2.0).abs() < 1e-9);
    }
}
