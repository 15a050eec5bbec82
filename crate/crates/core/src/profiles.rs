//! K-profiles on (L1, Linf) and the rearrangements that realize them.
//!
//! Both are [`Piecewise`] power sums in `x = ln t`. A profile is the
//! antiderivative `K(t) = int_0^t f*(u) du` of a rearrangement; going back
//! differentiates the least concave majorant.

use crate::error::{Error, Result};
use crate::logfn::{Asymptote, End, LogFn, Segment};
use crate::piecewise::{antiderivative, log_slope, Piece, Piecewise, Term};
use crate::quadrature::GridSpec;
use crate::real::{lit, to_f64, Real};

/// Relative slack when comparing values across a break.
const JUMP_TOL: f64 = 1e-9;
/// Slack on log-slopes.
const SLOPE_TOL: f64 = 1e-9;

/// Quasi-concave function `t -> K(t, f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KProfile<T> {
    f: Piecewise<T>,
}

/// Nonincreasing rearrangement `f*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rearrangement<T> {
    f: Piecewise<T>,
}

macro_rules! delegate_logfn {
    ($ty:ident) => {
        impl<T: Real> LogFn<T> for $ty<T> {
            fn ln_at(&self, x: T) -> T {
                self.f.ln_at(x)
            }
            fn asymptote(&self, end: End) -> Asymptote<T> {
                self.f.asymptote(end)
            }
            fn kinks(&self) -> Vec<T> {
                self.f.kinks()
            }
            fn segments(&self) -> Option<Vec<Segment<T>>> {
                self.f.segments()
            }
        }
    };
}

delegate_logfn!(KProfile);
delegate_logfn!(Rearrangement);

fn whole<T: Real>(terms: Vec<Term<T>>) -> Piece<T> {
    Piece {
        lo: T::neg_infinity(),
        hi: T::infinity(),
        terms,
    }
}

impl<T: Real> KProfile<T> {
    pub fn from_piecewise(f: Piecewise<T>) -> Self {
        Self { f }
    }

    pub fn piecewise(&self) -> &Piecewise<T> {
        &self.f
    }

    pub fn zero() -> Self {
        Self { f: Piecewise::zero() }
    }

    /// `min(1, t)`.
    pub fn min1() -> Self {
        Self {
            f: Piecewise::new(vec![
                Piece {
                    lo: T::neg_infinity(),
                    hi: T::zero(),
                    terms: vec![Term::power(T::one(), T::one())],
                },
                Piece {
                    lo: T::zero(),
                    hi: T::infinity(),
                    terms: vec![Term::constant(T::one())],
                },
            ])
            .expect("static pieces"),
        }
    }

    /// `t^theta`.
    pub fn power(theta: T) -> Self {
        Self {
            f: Piecewise::new(vec![whole(vec![Term::power(T::one(), theta)])]).expect("static pieces"),
        }
    }

    /// `t^theta * l^(a0, a_inf)(t)`.
    pub fn powerlog(theta: T, a0: T, a_inf: T) -> Self {
        Self {
            f: Piecewise::new(vec![
                Piece {
                    lo: T::neg_infinity(),
                    hi: T::zero(),
                    terms: vec![Term {
                        coef: T::one(),
                        rate: theta,
                        log_power: a0,
                    }],
                },
                Piece {
                    lo: T::zero(),
                    hi: T::infinity(),
                    terms: vec![Term {
                        coef: T::one(),
                        rate: theta,
                        log_power: a_inf,
                    }],
                },
            ])
            .expect("static pieces"),
        }
    }

    /// Profile through `nodes`, linear (`t^1`) left of the first node, flat
    /// right of the last, power interpolation in between.
    pub fn from_nodes(nodes: &[(T, T)]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("piecewise profile needs at least one node".into()));
        }
        let n = nodes.len();
        let mut exps = Vec::with_capacity(n.saturating_sub(1));
        for w in nodes.windows(2) {
            exps.push((w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln());
        }
        Self::from_parts(nodes, &exps, T::one(), T::zero())
    }

    /// General form: `k(t) = k_i (t / t_i)^{theta_i}` on `[t_i, t_{i+1}]`, with
    /// the given tail exponents outside the nodes.
    pub fn from_parts(nodes: &[(T, T)], exponents: &[T], left: T, right: T) -> Result<Self> {
        let n = nodes.len();
        if n == 0 || exponents.len() + 1 != n {
            return Err(Error::InvalidParameter(
                "need one exponent per gap between nodes".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidParameter("profile nodes must be strictly increasing in t".into()));
            }
        }
        for &(t, k) in nodes {
            if !(t > T::zero() && k > T::zero() && t.is_finite() && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("profile node ({t}, {k}) must be positive")));
            }
        }
        let xs: Vec<T> = nodes.iter().map(|p| p.0.ln()).collect();
        let term = |k: T, x: T, theta: T| Term::power((k.ln() - theta * x).exp(), theta);
        let mut pieces = vec![Piece {
            lo: T::neg_infinity(),
            hi: xs[0],
            terms: vec![term(nodes[0].1, xs[0], left)],
        }];
        for i in 0..n - 1 {
            pieces.push(Piece {
                lo: xs[i],
                hi: xs[i + 1],
                terms: vec![term(nodes[i].1, xs[i], exponents[i])],
            });
        }
        pieces.push(Piece {
            lo: xs[n - 1],
            hi: T::infinity(),
            terms: vec![term(nodes[n - 1].1, xs[n - 1], right)],
        });
        Ok(Self {
            f: Piecewise::new(pieces)?,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Lit::new(text);
        let name = p.ident()?;
        let out = match name.as_str() {
            "min1" => Self::min1(),
            "power" => {
                let v = p.args::<T>(1)?;
                Self::power(v[0])
            }
            "powerlog" => {
                let v = p.args::<T>(3)?;
                Self::powerlog(v[0], v[1], v[2])
            }
            "piecewise" => {
                let nodes = p.pairs::<T>()?;
                Self::from_nodes(&nodes).map_err(|e| p.syntax(e.to_string()))?
            }
            other => return Err(p.syntax_at(0, format!("unknown profile '{other}'"))),
        };
        p.end()?;
        Ok(out)
    }

    pub fn eval(&self, t: T) -> T {
        self.value(t)
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { f: self.f.scaled(c) }
    }

    /// `t K(1/t)`: the profile of the same element in the swapped couple.
    pub fn mirrored(&self) -> Self {
        Self { f: self.f.mirrored() }
    }
}

impl<T: Real> Rearrangement<T> {
    pub fn from_piecewise(f: Piecewise<T>) -> Result<Self> {
        let r = Self { f };
        r.check_monotone()?;
        Ok(r)
    }

    pub fn piecewise(&self) -> &Piecewise<T> {
        &self.f
    }

    pub fn zero() -> Self {
        Self { f: Piecewise::zero() }
    }

    /// `chi_(0, a)`.
    pub fn indicator(a: T) -> Result<Self> {
        Self::steps(&[(a, T::one())])
    }

    /// `u^p`, `p <= 0`.
    pub fn power(p: T) -> Result<Self> {
        Self::from_piecewise(Piecewise::new(vec![whole(vec![Term::power(T::one(), p)])])?)
    }

    /// Step function equal to `v_i` on `(t_{i-1}, t_i)` (with `t_0 = 0`) and
    /// zero after the last point.
    pub fn steps(points: &[(T, T)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(points.len() + 1);
        let mut lo = T::neg_infinity();
        for &(t, v) in points {
            if !(t > T::zero() && t.is_finite() && v >= T::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("step ({t}, {v}) out of range")));
            }
            let x = t.ln();
            if !(x > lo) {
                return Err(Error::InvalidParameter("step points must be strictly increasing".into()));
            }
            let terms = if v > T::zero() { vec![Term::constant(v)] } else { vec![] };
            pieces.push(Piece { lo, hi: x, terms });
            lo = x;
        }
        pieces.push(Piece {
            lo,
            hi: T::infinity(),
            terms: vec![],
        });
        Self::from_piecewise(Piecewise::new(pieces)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Lit::new(text);
        let name = p.ident()?;
        let out = match name.as_str() {
            "indicator" => {
                let v = p.args::<T>(1)?;
                Self::indicator(v[0])
            }
            "power" => {
                let v = p.args::<T>(1)?;
                Self::power(v[0])
            }
            "steps" => {
                let pts = p.pairs::<T>()?;
                Self::steps(&pts)
            }
            "zero" => Ok(Self::zero()),
            other => return Err(p.syntax_at(0, format!("unknown rearrangement '{other}'"))),
        }
        .map_err(|e| match e {
            Error::Syntax { .. } => e,
            other => p.syntax(other.to_string()),
        })?;
        p.end()?;
        Ok(out)
    }

    pub fn eval(&self, t: T) -> T {
        self.value(t)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { f: self.f.scaled(c) }
    }

    fn check_monotone(&self) -> Result<()> {
        let pieces = self.f.pieces();
        let mut seen_zero = false;
        for (i, p) in pieces.iter().enumerate() {
            if p.is_zero() {
                seen_zero = true;
                continue;
            }
            if seen_zero {
                return Err(Error::Precondition(format!(
                    "rearrangement becomes positive again on piece {i}"
                )));
            }
            for x in sample_xs(p) {
                let v = p.ln_at(x);
                if v == T::neg_infinity() {
                    // Value reached zero inside the piece; the rest must stay zero.
                    continue;
                }
                if log_slope(p, x) > lit(SLOPE_TOL) {
                    return Err(Error::Precondition(format!(
                        "rearrangement increases at t = {}",
                        to_f64(x.exp())
                    )));
                }
            }
        }
        for (x, l, r) in self.f.jumps() {
            if r > l + lit(JUMP_TOL) {
                return Err(Error::Precondition(format!(
                    "rearrangement jumps up at t = {}",
                    to_f64(x.exp())
                )));
            }
        }
        Ok(())
    }
}

/// Sample abscissae used to check slope signs on one piece.
fn sample_xs<T: Real>(p: &Piece<T>) -> Vec<T> {
    let mut xs = Vec::new();
    let (lo, hi) = (p.lo, p.hi);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            for i in 0..=16 {
                xs.push(lo + (hi - lo) * lit::<T>(i as f64 / 16.0));
            }
        }
        (true, false) => {
            xs.push(lo);
            let mut d = lit::<T>(0.25);
            while d < lit(1e6) {
                xs.push(lo + d);
                d = d * lit(2.0);
            }
        }
        (false, true) => {
            xs.push(hi);
            let mut d = lit::<T>(0.25);
            while d < lit(1e6) {
                xs.push(hi - d);
                d = d * lit(2.0);
            }
        }
        (false, false) => {
            let mut d = lit::<T>(0.25);
            xs.push(T::zero());
            while d < lit(1e6) {
                xs.push(d);
                xs.push(-d);
                d = d * lit(2.0);
            }
        }
    }
    // Log powers change their slope at x = 0.
    if lo < T::zero() && hi > T::zero() {
        xs.push(T::zero());
    }
    xs
}

/// Why a profile fails to be quasi-concave.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcViolationKind {
    /// `k` decreases.
    Decreasing,
    /// `k(t)/t` increases.
    SuperLinear,
    /// Jump across a node.
    Discontinuous,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QcViolation<T> {
    pub piece: usize,
    pub t: T,
    pub kind: QcViolationKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QcReport<T> {
    pub ok: bool,
    pub violation: Option<QcViolation<T>>,
}

/// `k` nondecreasing and `k(t)/t` nonincreasing, checked through log-slopes
/// in `[0, 1]` on every piece and continuity at the nodes.
pub fn check_quasiconcave<T: Real>(k: &KProfile<T>) -> QcReport<T> {
    let tol: T = lit(SLOPE_TOL);
    for (i, p) in k.f.pieces().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        for x in sample_xs(p) {
            if p.ln_at(x) == T::neg_infinity() {
                continue;
            }
            let s = log_slope(p, x);
            let kind = if s < -tol {
                Some(QcViolationKind::Decreasing)
            } else if s > T::one() + tol {
                Some(QcViolationKind::SuperLinear)
            } else {
                None
            };
            if let Some(kind) = kind {
                return QcReport {
                    ok: false,
                    violation: Some(QcViolation {
                        piece: i,
                        t: x.exp(),
                        kind,
                    }),
                };
            }
        }
    }
    for (j, (x, l, r)) in k.f.jumps().into_iter().enumerate() {
        let same = (l == r) || (l - r).abs() <= lit::<T>(JUMP_TOL) * (T::one() + l.abs());
        if !same {
            return QcReport {
                ok: false,
                violation: Some(QcViolation {
                    piece: j + 1,
                    t: x.exp(),
                    kind: QcViolationKind::Discontinuous,
                }),
            };
        }
    }
    QcReport {
        ok: true,
        violation: None,
    }
}

/// `K(t) = int_0^t f*(u) du`, exact on pure power pieces.
pub fn k_from_rearrangement<T: Real>(f: &Rearrangement<T>) -> Result<KProfile<T>> {
    Ok(KProfile {
        f: antiderivative(&f.f)?,
    })
}

/// Rearrangement whose K-profile matches `phi`: the derivative of `phi` when
/// it is a concave power profile vanishing at 0, otherwise the slopes of its
/// least concave majorant on the default grid.
pub fn realize_rearrangement<T: Real>(phi: &KProfile<T>) -> Result<Rearrangement<T>> {
    let qc = check_quasiconcave(phi);
    if !qc.ok {
        let v = qc.violation.expect("violation recorded");
        return Err(Error::Precondition(format!(
            "profile is not quasi-concave ({:?} at t = {})",
            v.kind,
            to_f64(v.t)
        )));
    }
    if phi.is_zero() {
        return Ok(Rearrangement::zero());
    }
    if let Some(r) = exact_derivative(phi) {
        return Ok(r);
    }
    Ok(hull_rearrangement(phi, &GridSpec::default()))
}

fn exact_derivative<T: Real>(phi: &KProfile<T>) -> Option<Rearrangement<T>> {
    let pieces: Vec<Piece<T>> = phi
        .f
        .pieces()
        .iter()
        .map(|p| {
            if p.terms.iter().any(|t| t.log_power != T::zero()) {
                return None;
            }
            let terms = p
                .terms
                .iter()
                .filter(|t| t.rate != T::zero() && t.coef != T::zero())
                .map(|t| Term::power(t.coef * t.rate, t.rate - T::one()))
                .collect();
            Some(Piece {
                lo: p.lo,
                hi: p.hi,
                terms,
            })
        })
        .collect::<Option<_>>()?;
    // phi(0+) must vanish for phi to be an integral from 0.
    if phi.f.pieces()[0].terms.iter().any(|t| t.rate <= T::zero() && t.coef != T::zero()) {
        return None;
    }
    let f = Piecewise::new(pieces).ok()?;
    Rearrangement::from_piecewise(f).ok()
}

/// Least concave majorant of `phi` through the origin on `grid`, returned as
/// its derivative (a step function, zero past the last grid point).
pub fn hull_rearrangement<T: Real>(phi: &KProfile<T>, grid: &GridSpec<T>) -> Rearrangement<T> {
    let mut xs = grid.log_points();
    let (xlo, xhi) = (xs[0], xs[xs.len() - 1]);
    xs.extend(phi.kinks().into_iter().filter(|k| *k > xlo && *k < xhi));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let pts: Vec<(T, T)> = xs.iter().map(|&x| (x.exp(), phi.value(x.exp()))).collect();
    // Upper hull in (t, k), starting from the origin.
    let mut hull: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    for &p in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies on or below the chord a -> p.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut steps = Vec::with_capacity(hull.len());
    for w in hull.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        steps.push((w[1].0, slope.max(T::zero())));
    }
    Rearrangement::steps(&steps).expect("hull slopes are nonincreasing")
}

/// `f1 = min(f*, lambda)` and `f0 = (f* - lambda)_+`.
pub fn truncation_split<T: Real>(
    f: &Rearrangement<T>,
    lambda: T,
) -> Result<(Rearrangement<T>, Rearrangement<T>)> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter(format!("truncation level must be positive, got {lambda}")));
    }
    let tau = crossing(f, lambda);
    let mut low: Vec<Piece<T>> = Vec::new();
    let mut high: Vec<Piece<T>> = Vec::new();
    if tau > T::neg_infinity() {
        low.push(Piece {
            lo: T::neg_infinity(),
            hi: tau,
            terms: vec![Term::constant(lambda)],
        });
    }
    for p in f.f.pieces() {
        // Part of p left of tau goes to f0 as p - lambda, the rest to f1.
        if p.lo < tau {
            let hi = p.hi.min(tau);
            let mut terms = p.terms.clone();
            terms.push(Term::constant(-lambda));
            high.push(Piece { lo: p.lo, hi, terms });
        }
        if p.hi > tau {
            low.push(Piece {
                lo: p.lo.max(tau),
                hi: p.hi,
                terms: p.terms.clone(),
            });
        }
    }
    if tau < T::infinity() {
        high.push(Piece {
            lo: tau,
            hi: T::infinity(),
            terms: vec![],
        });
    }
    let f0 = Rearrangement {
        f: Piecewise::new(high)?,
    };
    let f1 = Rearrangement {
        f: Piecewise::new(low)?,
    };
    Ok((f0, f1))
}

/// `sup {x : f*(e^x) > lambda}` in `x`, snapped to a break when it lands on one.
pub fn crossing<T: Real>(f: &Rearrangement<T>, lambda: T) -> T {
    let ll = lambda.ln();
    let above = |x: T| f.ln_at(x) > ll;
    let far: T = lit(1e4);
    if !above(-far) {
        // f* <= lambda except possibly on a set of negligible width.
        return T::neg_infinity();
    }
    if above(far) {
        return T::infinity();
    }
    let (mut a, mut b) = (-far, far);
    for _ in 0..400 {
        let m = (a + b) / lit(2.0);
        if !(m > a && m < b) {
            break;
        }
        if above(m) {
            a = m;
        } else {
            b = m;
        }
    }
    for br in f.f.breaks() {
        if (br - b).abs() <= lit::<T>(1e-12) * (T::one() + br.abs()) {
            return br;
        }
    }
    b
}

/// The six profiles used by the equivalence scans.
pub fn standard_suite<T: Real>() -> Vec<KProfile<T>> {
    let n = |pairs: &[(f64, f64)]| {
        KProfile::from_nodes(&pairs.iter().map(|&(t, k)| (lit(t), lit(k))).collect::<Vec<_>>())
            .expect("suite nodes are valid")
    };
    vec![
        KProfile::min1(),
        n(&[(1e-2, 1e-2), (1.0, 0.1), (1e2, 1.0)]),
        n(&[(1e-3, 1e-3), (1e3, 1.0)]),
        n(&[(1.0, 1.0), (10.0, 2.0)]),
        n(&[(1e-4, 1e-4), (1e-2, 1e-3), (1e4, 1.0)]),
        n(&[(1e-1, 1e-1), (1e1, 0.5)]),
    ]
}

/// Cursor over profile and rearrangement literals.
struct Lit<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lit<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> Error {
        self.syntax_at(self.pos, msg)
    }

    fn syntax_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Syntax {
            col: pos + 1,
            msg: msg.into(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.pos < self.src.len() && self.src[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{}'", c as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String> {
        self.ws();
        let s = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        if s == self.pos {
            return Err(self.syntax("expected a name"));
        }
        Ok(String::from_utf8_lossy(&self.src[s..self.pos]).into_owned())
    }

    fn number<T: Real>(&mut self) -> Result<T> {
        self.ws();
        let s = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let sign_ok = (c == b'-' || c == b'+')
                && (self.pos == s || matches!(self.src[self.pos - 1], b'e' | b'E'));
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || sign_ok {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = String::from_utf8_lossy(&self.src[s..self.pos]).into_owned();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(lit(v)),
            _ => Err(self.syntax_at(s, format!("expected a decimal number, found '{text}'"))),
        }
    }

    fn args<T: Real>(&mut self, n: usize) -> Result<Vec<T>> {
        self.eat(b'(')?;
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                self.eat(b',')?;
            }
            v.push(self.number()?);
        }
        self.eat(b')')?;
        Ok(v)
    }

    fn pairs<T: Real>(&mut self) -> Result<Vec<(T, T)>> {
        self.eat(b'[')?;
        let mut out = Vec::new();
        loop {
            if self.peek() == Some(b']') && out.is_empty() {
                break;
            }
            self.eat(b'(')?;
            let a = self.number()?;
            self.eat(b',')?;
            let b = self.number()?;
            self.eat(b')')?;
            out.push((a, b));
            if self.peek() == Some(b',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.eat(b']')?;
        Ok(out)
    }

    fn end(&mut self) -> Result<()> {
        self.ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(self.syntax("trailing input"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_literals() {
        let k = KProfile::<f64>::min1();
        assert_eq!(k.eval(0.5), 0.5);
        assert_eq!(k.eval(3.0), 1.0);
        let s = KProfile::<f64>::power(0.5).scaled(2.0);
        assert!((s.eval(4.0) - 4.0).abs() < 1e-14);
        let p = KProfile::<f64>::parse("piecewise[(1,1),(10,2)]").unwrap();
        assert!((p.eval(10.0) - 2.0).abs() < 1e-14);
        assert!((p.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((p.eval(50.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quasiconcavity() {
        assert!(check_quasiconcave(&KProfile::<f64>::min1()).ok);
        assert!(check_quasiconcave(&KProfile::<f64>::power(1.0)).ok);
        let bad = KProfile::<f64>::from_parts(&[(1.0, 1.0), (2.0, 2.0f64.powf(1.5))], &[1.5], 1.0, 0.0)
            .unwrap();
        let r = check_quasiconcave(&bad);
        assert!(!r.ok);
        let v = r.violation.unwrap();
        assert_eq!(v.piece, 1);
        assert_eq!(v.kind, QcViolationKind::SuperLinear);
    }

    #[test]
    fn k_of_indicator_and_power() {
        let k = k_from_rearrangement(&Rearrangement::<f64>::indicator(1.0).unwrap()).unwrap();
        for t in [0.1, 0.5, 1.0, 2.0, 30.0] {
            assert!((k.eval(t) - t.min(1.0)).abs() < 1e-15);
        }
        let k = k_from_rearrangement(&Rearrangement::<f64>::power(-0.5).unwrap()).unwrap();
        assert!((k.eval(9.0) - 6.0).abs() < 1e-13);
        assert!(k_from_rearrangement(&Rearrangement::<f64>::zero()).unwrap().is_zero());
    }

    #[test]
    fn realize_concave_profiles_exactly() {
        let f = realize_rearrangement(&KProfile::<f64>::min1()).unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(2.0), 0.0);
        let f = realize_rearrangement(&KProfile::<f64>::power(1.0)).unwrap();
        assert_eq!(f.eval(1e5), 1.0);
        let f = realize_rearrangement(&KProfile::<f64>::power(0.5).scaled(2.0)).unwrap();
        assert!((f.eval(4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hull_realization_stays_in_band() {
        let phi = KProfile::<f64>::from_nodes(&[(1.0, 1.0), (10.0, 1.1), (100.0, 10.0)]).unwrap();
        assert!(check_quasiconcave(&phi).ok);
        let f = realize_rearrangement(&phi).unwrap();
        let k = k_from_rearrangement(&f).unwrap();
        for t in GridSpec::coarse(1e-6, 1e6, 8).points() {
            let r = k.eval(t) / phi.eval(t);
            assert!((0.5..=2.0).contains(&r), "t={t} r={r}");
        }
    }

    #[test]
    fn truncation_examples() {
        let chi = Rearrangement::<f64>::indicator(1.0).unwrap();
        let (f0, f1) = truncation_split(&chi, 2.0).unwrap();
        assert!(f0.piecewise().is_zero());
        assert_eq!(f1.eval(0.5), 1.0);
        let (f0, f1) = truncation_split(&chi, 0.5).unwrap();
        assert!((f0.eval(0.3) - 0.5).abs() < 1e-15);
        assert!((f1.eval(0.3) - 0.5).abs() < 1e-15);
        let p = Rearrangement::<f64>::power(-0.5).unwrap();
        let (f0, f1) = truncation_split(&p, 1.0).unwrap();
        assert!((f0.eval(0.25) - 1.0).abs() < 1e-14);
        assert_eq!(f0.eval(4.0), 0.0);
        assert_eq!(f1.eval(0.25), 1.0);
        assert!((f1.eval(4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_literals() {
        assert!(Rearrangement::<f64>::steps(&[(1.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(KProfile::<f64>::parse("piecewise[(1,1),(1,2)]").is_err());
        assert!(matches!(KProfile::<f64>::parse("pow(1)"), Err(Error::Syntax { col: 1, .. })));
        assert!(Rearrangement::<f64>::parse("steps[(1,2),(3,1)]").is_ok());
    }
}
