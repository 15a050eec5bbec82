//! Piecewise sums of power-log terms.
//!
//! On each piece `[lo, hi]` (in `x = ln t`) the function is
//! `sum_k c_k * e^{r_k x} * (1 + |x|)^{a_k}` with signed coefficients, which is
//! closed under the antiderivatives and truncations used for rearrangements.

use crate::error::{Error, Result};
use crate::logfn::{Asymptote, End, LogFn, Segment};
use crate::real::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term<T> {
    pub coef: T,
    pub rate: T,
    pub log_power: T,
}

impl<T: Real> Term<T> {
    pub fn power(coef: T, rate: T) -> Self {
        Self {
            coef,
            rate,
            log_power: T::zero(),
        }
    }

    pub fn constant(coef: T) -> Self {
        Self::power(coef, T::zero())
    }

    /// `ln |term|` at `x`.
    #[inline]
    fn ln_abs(&self, x: T) -> T {
        let mut v = self.coef.abs().ln() + self.rate * x;
        if self.log_power != T::zero() {
            v = v + self.log_power * x.abs().ln_1p();
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece<T> {
    pub lo: T,
    pub hi: T,
    pub terms: Vec<Term<T>>,
}

impl<T: Real> Piece<T> {
    /// `ln` of the piece's value at `x`; `-inf` where the sum is not positive.
    pub fn ln_at(&self, x: T) -> T {
        let mut m = T::neg_infinity();
        for t in &self.terms {
            if t.coef != T::zero() {
                m = m.max(t.ln_abs(x));
            }
        }
        if m == T::neg_infinity() {
            return m;
        }
        if self.terms.len() == 1 {
            return if self.terms[0].coef > T::zero() { m } else { T::neg_infinity() };
        }
        let mut s = T::zero();
        for t in &self.terms {
            if t.coef != T::zero() {
                let e = (t.ln_abs(x) - m).exp();
                s = if t.coef > T::zero() { s + e } else { s - e };
            }
        }
        if s > T::zero() {
            m + s.ln()
        } else {
            T::neg_infinity()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == T::zero())
    }

    /// Dominant term toward an infinite end of the piece.
    fn dominant(&self, end: End) -> Option<Term<T>> {
        let mut best: Option<Term<T>> = None;
        for t in self.terms.iter().filter(|t| t.coef != T::zero()) {
            best = match best {
                None => Some(*t),
                Some(b) => {
                    let (key_t, key_b) = match end {
                        End::Infinity => (t.rate, b.rate),
                        End::Zero => (-t.rate, -b.rate),
                    };
                    if key_t > key_b || (key_t == key_b && t.log_power > b.log_power) {
                        Some(*t)
                    } else {
                        Some(b)
                    }
                }
            }
        }
        best
    }
}

/// Function on (0, inf) given by pieces covering the whole axis in order.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise<T> {
    pieces: Vec<Piece<T>>,
}

impl<T: Real> Piecewise<T> {
    /// Pieces must be contiguous and span `(-inf, inf)`.
    pub fn new(pieces: Vec<Piece<T>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter("piecewise function needs at least one piece".into()));
        }
        if pieces[0].lo != T::neg_infinity() || pieces[pieces.len() - 1].hi != T::infinity() {
            return Err(Error::InvalidParameter("pieces must cover the whole axis".into()));
        }
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo || !(w[0].lo < w[0].hi) {
                return Err(Error::InvalidParameter("pieces must be contiguous and increasing".into()));
            }
        }
        Ok(Self { pieces })
    }

    pub fn zero() -> Self {
        Self {
            pieces: vec![Piece {
                lo: T::neg_infinity(),
                hi: T::infinity(),
                terms: vec![],
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.is_zero())
    }

    /// Index of the piece containing `x` (left-closed, right pieces win ties).
    pub fn locate(&self, x: T) -> usize {
        match self
            .pieces
            .binary_search_by(|p| p.lo.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                terms: p
                    .terms
                    .iter()
                    .map(|t| Term { coef: t.coef * c, ..*t })
                    .collect(),
            })
            .collect();
        Self { pieces }
    }

    /// `t * g(1/t)`.
    pub fn mirrored(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece {
                lo: -p.hi,
                hi: -p.lo,
                terms: p
                    .terms
                    .iter()
                    .map(|t| Term {
                        coef: t.coef,
                        rate: T::one() - t.rate,
                        log_power: t.log_power,
                    })
                    .collect(),
            })
            .collect();
        Self { pieces }
    }

    /// Interior break points in `x`.
    pub fn breaks(&self) -> Vec<T> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    /// Values just left and right of each break, as `(x, ln_left, ln_right)`.
    pub fn jumps(&self) -> Vec<(T, T, T)> {
        self.pieces
            .windows(2)
            .map(|w| {
                let x = w[1].lo;
                (x, w[0].ln_at(x), w[1].ln_at(x))
            })
            .collect()
    }
}

impl<T: Real> LogFn<T> for Piecewise<T> {
    fn ln_at(&self, x: T) -> T {
        let i = self.locate(x);
        self.pieces[i].ln_at(x)
    }

    fn asymptote(&self, end: End) -> Asymptote<T> {
        let p = match end {
            End::Zero => &self.pieces[0],
            End::Infinity => &self.pieces[self.pieces.len() - 1],
        };
        match p.dominant(end) {
            None => Asymptote::vanishing(),
            Some(t) if t.coef < T::zero() => Asymptote::vanishing(),
            Some(t) => {
                let rate = match end {
                    End::Infinity => t.rate,
                    End::Zero => -t.rate,
                };
                Asymptote {
                    rate,
                    stretch: T::zero(),
                    stretch_exp: T::zero(),
                    log_power: t.log_power,
                }
            }
        }
    }

    fn kinks(&self) -> Vec<T> {
        let mut k = self.breaks();
        if self.pieces.iter().any(|p| p.terms.iter().any(|t| t.log_power != T::zero())) {
            k.push(T::zero());
            k.sort_by(|a, b| a.partial_cmp(b).unwrap());
            k.dedup();
        }
        k
    }

    fn segments(&self) -> Option<Vec<Segment<T>>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let seg = match p.terms.iter().filter(|t| t.coef != T::zero()).count() {
                0 => Segment {
                    lo: p.lo,
                    hi: p.hi,
                    ln_c: T::neg_infinity(),
                    rate: T::zero(),
                    log_power: T::zero(),
                },
                1 => {
                    let t = p.terms.iter().find(|t| t.coef != T::zero()).unwrap();
                    if t.coef < T::zero() {
                        return None;
                    }
                    Segment {
                        lo: p.lo,
                        hi: p.hi,
                        ln_c: t.coef.ln(),
                        rate: t.rate,
                        log_power: t.log_power,
                    }
                }
                _ => return None,
            };
            // Log powers are only exact on pieces that keep one sign of x.
            if seg.log_power != T::zero() && p.lo < T::zero() && p.hi > T::zero() {
                out.push(Segment { hi: T::zero(), ..seg });
                out.push(Segment { lo: T::zero(), ..seg });
            } else {
                out.push(seg);
            }
        }
        Some(out)
    }
}

/// Exact antiderivative `G(x) = int_0^{e^x} g(u) du` for pure-power terms.
///
/// Returns the pieces of `G`. Terms with log powers are rejected, as are
/// terms with exponent `-1` (logarithmic antiderivative) and anything not
/// integrable at the origin.
pub fn antiderivative<T: Real>(g: &Piecewise<T>) -> Result<Piecewise<T>> {
    let mut out: Vec<Piece<T>> = Vec::with_capacity(g.pieces.len());
    // Value of the integral at the left end of the current piece.
    let mut acc = T::zero();
    for (i, p) in g.pieces.iter().enumerate() {
        let mut terms: Vec<Term<T>> = Vec::new();
        let mut constant = acc;
        for t in p.terms.iter().filter(|t| t.coef != T::zero()) {
            if t.log_power != T::zero() {
                return Err(Error::Precondition(
                    "antiderivative requires pure power pieces".into(),
                ));
            }
            // u^{r-1} in the measure du: the term is coef * u^{rate}.
            let e = t.rate + T::one();
            if e.abs() <= T::epsilon() * lit(16.0) {
                return Err(Error::Precondition(
                    "exponent -1 gives a logarithmic antiderivative".into(),
                ));
            }
            if i == 0 && e <= T::zero() {
                return Err(Error::Precondition(format!(
                    "u^{} is not integrable at 0",
                    t.rate
                )));
            }
            let c = t.coef / e;
            terms.push(Term::power(c, e));
            if p.lo != T::neg_infinity() {
                constant = constant - c * (e * p.lo).exp();
            }
        }
        if constant != T::zero() {
            terms.push(Term::constant(constant));
        }
        // Integral up to the right end for the next piece.
        if p.hi != T::infinity() {
            let mut v = constant;
            for t in &terms {
                if t.rate != T::zero() {
                    v = v + t.coef * (t.rate * p.hi).exp();
                }
            }
            acc = v;
        }
        out.push(Piece {
            lo: p.lo,
            hi: p.hi,
            terms: merge_like_terms(terms),
        });
    }
    Piecewise::new(out)
}

fn merge_like_terms<T: Real>(terms: Vec<Term<T>>) -> Vec<Term<T>> {
    let mut out: Vec<Term<T>> = Vec::with_capacity(terms.len());
    for t in terms {
        if let Some(o) = out
            .iter_mut()
            .find(|o| o.rate == t.rate && o.log_power == t.log_power)
        {
            o.coef = o.coef + t.coef;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| t.coef != T::zero());
    out
}

/// Log-derivative `d ln g / dx` of a piece at `x`.
pub fn log_slope<T: Real>(p: &Piece<T>, x: T) -> T {
    let lg = p.ln_at(x);
    if lg == T::neg_infinity() {
        return T::zero();
    }
    let mut num = T::zero();
    for t in p.terms.iter().filter(|t| t.coef != T::zero()) {
        let d = t.rate
            + if t.log_power != T::zero() {
                t.log_power * x.signum() / (T::one() + x.abs())
            } else {
                T::zero()
            };
        let w = (t.ln_abs(x) - lg).exp();
        num = if t.coef > T::zero() { num + d * w } else { num - d * w };
    }
    num
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(a: f64) -> Piecewise<f64> {
        Piecewise::new(vec![
            Piece {
                lo: f64::NEG_INFINITY,
                hi: a.ln(),
                terms: vec![Term::constant(1.0)],
            },
            Piece {
                lo: a.ln(),
                hi: f64::INFINITY,
                terms: vec![],
            },
        ])
        .unwrap()
    }

    #[test]
    fn indicator_integrates_to_min() {
        let k = antiderivative(&step(1.0)).unwrap();
        assert!((k.value(0.5) - 0.5).abs() < 1e-15);
        assert!((k.value(3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_sqrt_integrates_to_two_sqrt() {
        let g = Piecewise::new(vec![Piece {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            terms: vec![Term::power(1.0, -0.5)],
        }])
        .unwrap();
        let k = antiderivative(&g).unwrap();
        assert!((k.value(4.0) - 4.0).abs() < 1e-14);
        let bad = Piecewise::new(vec![Piece {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            terms: vec![Term::power(1.0, -1.5)],
        }])
        .unwrap();
        assert!(antiderivative(&bad).is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        let k = antiderivative(&step(2.0)).unwrap();
        assert_eq!(k.mirrored().mirrored(), k);
        // t K(1/t) for K = min(1, t) is min(1, t) again.
        let m = antiderivative(&step(1.0)).unwrap().mirrored();
        assert!((m.value(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn signed_sum_and_slope() {
        let p = Piece {
            lo: 0.0,
            hi: f64::INFINITY,
            terms: vec![Term::power(2.0, 0.5), Term::constant(-1.0)],
        };
        let x = 2.0_f64.ln() * 2.0;
        assert!((p.ln_at(x).exp() - 3.0).abs() < 1e-14);
        // d/dx (2 e^{x/2} - 1) / value = e^{x/2} / 3 = 2/3
        assert!((log_slope(&p, x) - 2.0 / 3.0).abs() < 1e-14);
    }
}
