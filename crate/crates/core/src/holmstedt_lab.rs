//! Both sides of Holmstedt-type formulas for the couple (L1, L_inf), the
//! equivalence scans, and the nonexistence demonstration.

use crate::error::{Error, Result};
use crate::interp_norms::{
    check_condition_monotone_index, default_eps_grid, default_threshold, ln_index, ln_partial_norms, ln_weighted_norm,
    quasi_monotone_constant, ConditionKind, Direction, IndexKind, Limiting, SpaceSpec, Weighted,
};
use crate::logfn::{LogFn, ProductFn};
use crate::profiles::{k_from_rearrangement, realize_rearrangement, truncation_split, KProfile, Rearrangement};
use crate::quadrature::{GridSpec, QuadOptions};
use crate::real::{lit, to_f64, Real};
use crate::sv_algebra::{ln_norm_x, WeightExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    /// `theta0 = theta1 = 0`.
    Limiting00,
    /// `theta0 = theta1 = 1`.
    Limiting11,
    /// `theta0 = theta1` in `(0, 1)` with `q0 = q1`.
    InteriorEqualQ,
    /// `0 < theta0 < theta1 < 1`.
    NonLimiting,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Limiting00 => "limiting00",
            CaseKind::Limiting11 => "limiting11",
            CaseKind::InteriorEqualQ => "interior_equal_q",
            CaseKind::NonLimiting => "nonlimiting",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "limiting00" => Ok(CaseKind::Limiting00),
            "limiting11" => Ok(CaseKind::Limiting11),
            "interior_equal_q" => Ok(CaseKind::InteriorEqualQ),
            "nonlimiting" => Ok(CaseKind::NonLimiting),
            _ => Err(Error::InvalidParameter(format!("unknown case '{s}'"))),
        }
    }
}

/// The pair of spaces `X0 = A_{theta0,q0;b0}`, `X1 = A_{theta1,q1;b1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolmstedtCase<T> {
    pub kind: CaseKind,
    pub theta0: T,
    pub q0: T,
    pub b0: WeightExpr<T>,
    pub theta1: T,
    pub q1: T,
    pub b1: WeightExpr<T>,
}

fn check_q<T: Real>(q: T) -> Result<()> {
    if q > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must lie in (0, inf], got {q}")))
    }
}

impl<T: Real> HolmstedtCase<T> {
    pub fn limiting00(q0: T, b0: WeightExpr<T>, q1: T, b1: WeightExpr<T>) -> Result<Self> {
        let c = Self::unchecked(CaseKind::Limiting00, T::zero(), q0, b0, T::zero(), q1, b1);
        c.validate()?;
        Ok(c)
    }

    pub fn limiting11(q0: T, b0: WeightExpr<T>, q1: T, b1: WeightExpr<T>) -> Result<Self> {
        let c = Self::unchecked(CaseKind::Limiting11, T::one(), q0, b0, T::one(), q1, b1);
        c.validate()?;
        Ok(c)
    }

    pub fn interior_equal_q(theta: T, q: T, b0: WeightExpr<T>, b1: WeightExpr<T>) -> Result<Self> {
        let c = Self::unchecked(CaseKind::InteriorEqualQ, theta, q, b0, theta, q, b1);
        c.validate()?;
        Ok(c)
    }

    pub fn nonlimiting(theta0: T, q0: T, b0: WeightExpr<T>, theta1: T, q1: T, b1: WeightExpr<T>) -> Result<Self> {
        let c = Self::unchecked(CaseKind::NonLimiting, theta0, q0, b0, theta1, q1, b1);
        c.validate()?;
        Ok(c)
    }

    pub fn unchecked(
        kind: CaseKind,
        theta0: T,
        q0: T,
        b0: WeightExpr<T>,
        theta1: T,
        q1: T,
        b1: WeightExpr<T>,
    ) -> Self {
        Self {
            kind,
            theta0,
            q0,
            b0,
            theta1,
            q1,
            b1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q0)?;
        check_q(self.q1)?;
        let inner = |th: T| th > T::zero() && th < T::one();
        match self.kind {
            CaseKind::Limiting00 => {
                for (j, b, q) in [(0, &self.b0, self.q0), (1, &self.b1, self.q1)] {
                    if !b.classify(q).in_sv0q {
                        return Err(Error::Hypothesis(format!("b{j} = {b} is not in SV_(0,q{j})")));
                    }
                }
            }
            CaseKind::Limiting11 => {
                for (j, b, q) in [(0, &self.b0, self.q0), (1, &self.b1, self.q1)] {
                    if !b.classify(q).in_sv1q {
                        return Err(Error::Hypothesis(format!("b{j} = {b} is not in SV_(1,q{j})")));
                    }
                }
            }
            CaseKind::InteriorEqualQ => {
                if !inner(self.theta0) || self.theta0 != self.theta1 {
                    return Err(Error::InvalidParameter("interior case needs theta0 = theta1 in (0, 1)".into()));
                }
                if self.q0 != self.q1 {
                    return Err(Error::Hypothesis(
                        "q0 != q1 with theta0 = theta1 in (0, 1): no Holmstedt formula exists (see negative-demo)".into(),
                    ));
                }
            }
            CaseKind::NonLimiting => {
                if !(inner(self.theta0) && inner(self.theta1) && self.theta0 < self.theta1) {
                    return Err(Error::InvalidParameter("nonlimiting case needs 0 < theta0 < theta1 < 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn w0(&self) -> Weighted<T> {
        Weighted::new(self.q0, self.b0.clone())
    }

    pub fn w1(&self) -> Weighted<T> {
        Weighted::new(self.q1, self.b1.clone())
    }

    pub fn spaces(&self) -> (SpaceSpec<T>, SpaceSpec<T>) {
        (
            SpaceSpec::unchecked(self.theta0, self.q0, self.b0.clone()),
            SpaceSpec::unchecked(self.theta1, self.q1, self.b1.clone()),
        )
    }

    /// For `Limiting11`: the `Limiting00` case on the swapped couple with
    /// flipped weights and exchanged roles.
    pub fn mirror(&self) -> Self {
        Self::unchecked(
            CaseKind::Limiting00,
            T::zero(),
            self.q1,
            self.b1.clone().flip(),
            T::zero(),
            self.q0,
            self.b0.clone().flip(),
        )
    }

    /// `ln` of the evaluation point `s(t)` at `x = ln t`: `rho`, `eta`,
    /// `b0/b1`, or `t^{theta1-theta0} b0/b1`.
    pub fn ln_index(&self, x: T) -> T {
        match self.kind {
            CaseKind::Limiting00 => ln_index(x, IndexKind::Rho, &self.w0(), &self.w1()),
            CaseKind::Limiting11 => -self.mirror().ln_index(-x),
            CaseKind::InteriorEqualQ => self.b0.ln_at(x) - self.b1.ln_at(x),
            CaseKind::NonLimiting => (self.theta1 - self.theta0) * x + self.b0.ln_at(x) - self.b1.ln_at(x),
        }
    }

    pub fn index(&self, t: T) -> T {
        self.ln_index(t.ln()).exp()
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

/// `ln` of the right-hand side at `x = ln t`.
pub fn ln_rhs<T: Real>(case: &HolmstedtCase<T>, k: &KProfile<T>, x: T) -> T {
    let opts = QuadOptions::default();
    let (ninf, inf) = (T::neg_infinity(), T::infinity());
    match case.kind {
        CaseKind::Limiting00 => {
            let (i, j) = ln_partial_norms(k, x, Limiting::Zero, &case.w0(), &case.w1(), &opts);
            ln_add(i, case.ln_index(x) + j)
        }
        CaseKind::Limiting11 => {
            // eta(t) * RHS00(1/t) for the mirrored case and profile t K(1/t).
            let m = case.mirror();
            ln_rhs(&m, &k.mirrored(), -x) + case.ln_index(x)
        }
        CaseKind::InteriorEqualQ | CaseKind::NonLimiting => {
            let head = ln_weighted_norm(k, case.theta0, case.q0, &case.b0, ninf, x, &opts);
            let tail = ln_weighted_norm(k, case.theta1, case.q1, &case.b1, x, inf, &opts);
            ln_add(head, case.ln_index(x) + tail)
        }
    }
}

/// Right-hand side of the case's formula at `t`.
pub fn rhs_formula<T: Real>(case: &HolmstedtCase<T>, k: &KProfile<T>, t: T) -> T {
    ln_rhs(case, k, t.ln()).exp()
}

/// `I1 + eta J1` evaluated directly, without the symmetry.
pub fn rhs_limiting11_direct<T: Real>(case: &HolmstedtCase<T>, k: &KProfile<T>, t: T) -> T {
    let x = t.ln();
    let (i, j) = ln_partial_norms(k, x, Limiting::One, &case.w0(), &case.w1(), &QuadOptions::default());
    ln_add(i, case.ln_index(x) + j).exp()
}

fn ln_space_norm<T: Real>(k: &KProfile<T>, s: &SpaceSpec<T>) -> T {
    if k.is_zero() {
        return T::neg_infinity();
    }
    ln_weighted_norm(
        k,
        s.theta,
        s.q,
        &s.b,
        T::neg_infinity(),
        T::infinity(),
        &QuadOptions::default(),
    )
}

/// `ln(||f0||_X0 + s ||f1||_X1)` for the truncation at `lambda = e^ll`.
fn ln_objective<T: Real>(f: &Rearrangement<T>, ll: T, ln_s: T, x0: &SpaceSpec<T>, x1: &SpaceSpec<T>) -> T {
    let Ok((f0, f1)) = truncation_split(f, ll.exp()) else {
        return T::infinity();
    };
    let (Ok(k0), Ok(k1)) = (k_from_rearrangement(&f0), k_from_rearrangement(&f1)) else {
        return T::infinity();
    };
    let n0 = ln_space_norm(&k0, x0);
    let n1 = ln_space_norm(&k1, x1);
    let v = ln_add(n0, ln_s + n1);
    if v.is_nan() {
        T::infinity()
    } else {
        v
    }
}

/// Truncation K-functional `inf_lambda ||(f - lambda)_+||_X0 + s ||min(f, lambda)||_X1`,
/// with the two trivial decompositions included.
pub fn lhs_decomposition<T: Real>(case: &HolmstedtCase<T>, f: &Rearrangement<T>, s: T) -> Result<T> {
    if !(s > T::zero() && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("evaluation point must be positive and finite, got {s}")));
    }
    if case.kind == CaseKind::Limiting11 {
        let k = k_from_rearrangement(f)?;
        let fm = realize_rearrangement(&k.mirrored())?;
        return Ok(s * lhs_decomposition(&case.mirror(), &fm, T::one() / s)?);
    }
    Ok(ln_lhs_truncation(case, f, s.ln()).exp())
}

fn ln_lhs_truncation<T: Real>(case: &HolmstedtCase<T>, f: &Rearrangement<T>, ln_s: T) -> T {
    if f.piecewise().is_zero() {
        return T::neg_infinity();
    }
    let (x0, x1) = case.spaces();
    let kf = match k_from_rearrangement(f) {
        Ok(k) => k,
        Err(_) => return T::infinity(),
    };
    // Trivial decompositions f = f + 0 and f = 0 + f.
    let mut best = ln_space_norm(&kf, &x0).min(ln_s + ln_space_norm(&kf, &x1));
    if best.is_nan() {
        best = T::infinity();
    }

    // Candidate levels: values at the breaks and a log grid spanning the range.
    let mut levels: Vec<T> = Vec::new();
    for (_, l, r) in f.piecewise().jumps() {
        levels.extend([l, r].into_iter().filter(|v| v.is_finite()));
    }
    for x in [lit::<T>(-27.631_021_115_928_547), lit(27.631_021_115_928_547)] {
        let v = f.ln_at(x);
        if v.is_finite() {
            levels.push(v);
        }
    }
    if levels.is_empty() {
        return best;
    }
    let lo = levels.iter().copied().fold(T::infinity(), |a, b| a.min(b)) - lit::<T>(10.0).ln();
    let hi = levels.iter().copied().fold(T::neg_infinity(), |a, b| a.max(b)) + lit::<T>(10.0).ln();
    let n = 32;
    for i in 0..n {
        levels.push(lo + (hi - lo) * lit::<T>(i as f64) / lit::<T>((n - 1) as f64));
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let vals: Vec<T> = levels.iter().map(|&ll| ln_objective(f, ll, ln_s, &x0, &x1)).collect();
    let (mut bi, mut bv) = (0, T::infinity());
    for (i, &v) in vals.iter().enumerate() {
        if v < bv {
            bv = v;
            bi = i;
        }
    }
    best = best.min(bv);
    if bv.is_finite() {
        let a = levels[bi.saturating_sub(1)];
        let b = levels[(bi + 1).min(levels.len() - 1)];
        best = best.min(golden_min(|ll| ln_objective(f, ll, ln_s, &x0, &x1), a, b));
    }
    best
}

/// Golden-section minimum on `[a, b]`, stopping once the two probes agree to
/// a relative 1e-4 (after a minimum number of steps).
fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T) -> T {
    if !(a < b) {
        return f(a);
    }
    let r: T = lit(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * r;
    let mut d = a + (b - a) * r;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.min(fd);
    for it in 0..80 {
        // Values are logarithms, so an absolute gap is a relative one.
        if it >= 12 && (fc - fd).abs() <= lit(1e-4) {
            break;
        }
        if fc < fd {
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
        best = best.min(fc).min(fd);
    }
    best
}

/// Outcome of the case's hypothesis check.
#[derive(Clone, Debug, PartialEq)]
pub struct GateReport<T> {
    pub condition: String,
    pub constant: T,
    pub threshold: T,
    pub pass: bool,
}

/// Checks the hypotheses of the case's theorem on `grid`.
pub fn check_hypotheses<T: Real>(case: &HolmstedtCase<T>, grid: &GridSpec<T>) -> Result<GateReport<T>> {
    case.validate()?;
    let (w0, w1) = (case.w0(), case.w1());
    let monotone = |name: &str, g: &dyn Fn(T) -> T| {
        let v: Vec<T> = grid.log_points().into_iter().map(g).collect();
        let c = quasi_monotone_constant(&v, Direction::NonDecreasing);
        let th = T::one() + lit(1e-9);
        GateReport {
            condition: name.to_string(),
            constant: c,
            threshold: th,
            pass: c <= th,
        }
    };
    let report = match case.kind {
        CaseKind::Limiting00 | CaseKind::Limiting11 if case.q0 != case.q1 => {
            let (kind, name) = if case.kind == CaseKind::Limiting00 {
                (ConditionKind::RhoEps, "rho_eps equivalent to a nondecreasing function")
            } else {
                (ConditionKind::EtaEps, "eta_eps equivalent to a nondecreasing function")
            };
            let r = check_condition_monotone_index(kind, &w0, &w1, &default_eps_grid(), default_threshold(), grid);
            GateReport {
                condition: format!("{name} (best eps = {})", to_f64(r.best_eps)),
                constant: r.best_constant,
                threshold: r.threshold,
                pass: r.pass,
            }
        }
        CaseKind::Limiting00 => monotone("rho increasing", &|x| case.ln_index(x)),
        CaseKind::Limiting11 => monotone("eta increasing", &|x| case.ln_index(x)),
        CaseKind::InteriorEqualQ => monotone("b0/b1 nondecreasing", &|x| case.ln_index(x)),
        CaseKind::NonLimiting => GateReport {
            condition: "0 < theta0 < theta1 < 1".into(),
            constant: T::one(),
            threshold: T::one(),
            pass: true,
        },
    };
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow<T> {
    pub t: T,
    pub lhs: T,
    pub rhs: T,
    pub ratio: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport<T> {
    pub rows: Vec<ScanRow<T>>,
    /// Grid points where the index or a side was undefined.
    pub skipped: usize,
    pub ratio_min: T,
    pub ratio_max: T,
    pub variation: T,
}

impl<T: Real> ScanReport<T> {
    pub fn from_rows(rows: Vec<ScanRow<T>>, skipped: usize) -> Self {
        let ratio_min = rows.iter().map(|r| r.ratio).fold(T::infinity(), |a, b| a.min(b));
        let ratio_max = rows.iter().map(|r| r.ratio).fold(T::zero(), |a, b| a.max(b));
        let variation = if rows.is_empty() { T::nan() } else { ratio_max / ratio_min };
        Self {
            rows,
            skipped,
            ratio_min,
            ratio_max,
            variation,
        }
    }
}

/// One scan row at `x = ln t`, or `None` when it must be skipped.
pub fn scan_row<T: Real>(case: &HolmstedtCase<T>, f: &Rearrangement<T>, k: &KProfile<T>, x: T) -> Option<ScanRow<T>> {
    let ln_s = case.ln_index(x);
    if !ln_s.is_finite() {
        return None;
    }
    let (lhs, rhs) = if case.kind == CaseKind::Limiting11 {
        // f and k are the mirrored realization here; see `equivalence_scan`.
        let m = case.mirror();
        (ln_lhs_truncation(&m, f, -ln_s) + ln_s, ln_rhs(&m, k, -x) + ln_s)
    } else {
        (ln_lhs_truncation(case, f, ln_s), ln_rhs(case, k, x))
    };
    let ratio = (lhs - rhs).exp();
    if !(ratio.is_finite() && ratio > T::zero()) {
        return None;
    }
    Some(ScanRow {
        t: x.exp(),
        lhs: lhs.exp(),
        rhs: rhs.exp(),
        ratio,
    })
}

/// Profile data a scan works on: the realized rearrangement and its exact
/// K-profile (mirrored for `Limiting11`).
pub fn prepare_profile<T: Real>(case: &HolmstedtCase<T>, k: &KProfile<T>) -> Result<(Rearrangement<T>, KProfile<T>)> {
    let base = if case.kind == CaseKind::Limiting11 { k.mirrored() } else { k.clone() };
    let f = realize_rearrangement(&base)?;
    let kr = k_from_rearrangement(&f)?;
    Ok((f, kr))
}

/// Gate, then LHS/RHS on every grid point.
pub fn equivalence_scan<T: Real>(case: &HolmstedtCase<T>, k: &KProfile<T>, grid: &GridSpec<T>) -> Result<ScanReport<T>> {
    let gate = check_hypotheses(case, grid)?;
    if !gate.pass {
        return Err(Error::Hypothesis(format!(
            "condition '{}' failed: constant {} exceeds {}",
            gate.condition,
            to_f64(gate.constant),
            to_f64(gate.threshold)
        )));
    }
    let (f, kr) = prepare_profile(case, k)?;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for x in grid.log_points() {
        match scan_row(case, &f, &kr, x) {
            Some(r) => rows.push(r),
            None => skipped += 1,
        }
    }
    Ok(ScanReport::from_rows(rows, skipped))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    NonexistenceConfirmed,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::NonexistenceConfirmed => "nonexistence confirmed",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoRow<T> {
    pub t: T,
    pub head_bound: T,
    pub upper_bound: T,
    pub m: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativeDemo<T> {
    /// Rows in increasing `t`.
    pub rows: Vec<DemoRow<T>>,
    /// Exponent `r` of the head integral.
    pub r: T,
    pub verdict: Verdict,
    pub note: String,
}

/// Grid uniform in `ln(1 - ln t)` over `[t_min, 1]`, in increasing `t`.
pub fn negative_demo_grid<T: Real>(t_min: T, n: usize) -> Vec<T> {
    let top = (T::one() - t_min.ln()).ln();
    let mut v: Vec<T> = (0..n)
        .map(|i| {
            let u = top * lit::<T>(i as f64) / lit::<T>((n - 1) as f64);
            (T::one() - u.exp()).exp()
        })
        .collect();
    v.reverse();
    v
}

/// `M(t) = (int_0^t (b0/b1)^r ds/s)^{1/r} / (b0(t)/b1(t))` with
/// `r = q0 q1 / (q1 - q0)`; for `q0 > q1` the roles of the pairs are exchanged.
pub fn negative_demo<T: Real>(theta: T, q0: T, q1: T, b0: &WeightExpr<T>, b1: &WeightExpr<T>, ts: &[T]) -> Result<NegativeDemo<T>> {
    if !(theta > T::zero() && theta < T::one()) {
        return Err(Error::InvalidParameter("theta must lie in (0, 1)".into()));
    }
    check_q(q0)?;
    check_q(q1)?;
    if q0 == q1 {
        return Err(Error::InvalidParameter("negative demo needs q0 != q1".into()));
    }
    let (lo_q, hi_q, num, den) = if q0 < q1 { (q0, q1, b0, b1) } else { (q1, q0, b1, b0) };
    let r = if hi_q == T::infinity() { lo_q } else { lo_q * hi_q / (hi_q - lo_q) };
    let ratio = ProductFn::new().with(num).with_pow(den, -T::one());
    let mut sorted = ts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let opts = QuadOptions::default();
    let rows: Vec<DemoRow<T>> = sorted
        .iter()
        .map(|&t| {
            let x = t.ln();
            let lh = ln_norm_x(&ratio, r, T::neg_infinity(), x, &opts);
            let lu = ratio.ln_at(x);
            DemoRow {
                t,
                head_bound: lh.exp(),
                upper_bound: lu.exp(),
                m: if lh == T::infinity() { T::infinity() } else { (lh - lu).exp() },
            }
        })
        .collect();
    let verdict = demo_verdict(&rows);
    Ok(NegativeDemo {
        rows,
        r,
        verdict,
        note: format!(
            "head bound uses the positive exponent r = q0*q1/|q1-q0| = {}; the sign-flipped form q0*q1/(q0-q1) with outer power 1/q1-1/q0 is not used",
            to_f64(r)
        ),
    })
}

fn demo_verdict<T: Real>(rows: &[DemoRow<T>]) -> Verdict {
    if rows.is_empty() {
        return Verdict::Inconclusive;
    }
    if rows.iter().all(|r| r.m == T::infinity()) {
        return Verdict::NonexistenceConfirmed;
    }
    let n = rows.len();
    let decades = (rows[n - 1].t / rows[0].t).log10();
    let tol = lit::<T>(1e-9);
    let monotone = rows.windows(2).all(|w| w[0].m >= w[1].m * (T::one() - tol));
    let growth = rows[0].m / rows[n / 2].m;
    if monotone && decades >= lit(6.0) && growth >= lit(3.0) {
        Verdict::NonexistenceConfirmed
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv_algebra::weight;
    use approx::assert_relative_eq;

    fn l00(q0: f64, b0: &str, q1: f64, b1: &str) -> HolmstedtCase<f64> {
        HolmstedtCase::limiting00(q0, weight(b0), q1, weight(b1)).unwrap()
    }

    #[test]
    fn rhs_equal_q_closed_form() {
        let c = l00(1.0, "log(0,-2)", 1.0, "log(0,-3)");
        assert_relative_eq!(c.index(1.0), 2.0, max_relative = 1e-10);
        assert_relative_eq!(rhs_formula(&c, &KProfile::min1(), 1.0), 2.0, max_relative = 1e-9);
        assert_eq!(rhs_formula(&c, &KProfile::zero(), 1.0), 0.0);
    }

    #[test]
    fn rhs_nonlimiting_closed_form() {
        let c = HolmstedtCase::nonlimiting(0.25, 1.0, weight("one"), 0.75, 1.0, weight("one")).unwrap();
        assert_relative_eq!(rhs_formula(&c, &KProfile::min1(), 1.0), 8.0 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn equal_spaces_lhs_is_norm() {
        let c = l00(1.0, "log(0,-2)", 1.0, "log(0,-2)");
        let (x0, _) = c.spaces();
        for k in crate::profiles::standard_suite::<f64>() {
            let f = realize_rearrangement(&k).unwrap();
            let kr = k_from_rearrangement(&f).unwrap();
            let norm = crate::interp_norms::space_norm(&kr, &x0);
            let lhs = lhs_decomposition(&c, &f, 1.0).unwrap();
            assert_relative_eq!(lhs, norm, max_relative = 1e-9);
        }
        assert_eq!(lhs_decomposition(&c, &Rearrangement::zero(), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn lhs_bounded_by_trivial_splits() {
        let c = l00(1.0, "log(0,-2)", 1.0, "log(0,-3)");
        let f = realize_rearrangement(&KProfile::min1()).unwrap();
        let (x0, x1) = c.spaces();
        let k = KProfile::min1();
        let n0 = crate::interp_norms::space_norm(&k, &x0);
        let n1 = crate::interp_norms::space_norm(&k, &x1);
        let lhs = lhs_decomposition(&c, &f, 2.0).unwrap();
        assert!(lhs <= n0 * (1.0 + 1e-12) && lhs <= 2.0 * n1 * (1.0 + 1e-12));
        let rhs = rhs_formula(&c, &k, 1.0);
        assert!(lhs / rhs <= 8.0 && rhs / lhs <= 8.0, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn limiting11_symmetry_matches_direct() {
        let c = HolmstedtCase::limiting11(1.0, weight("log(-2,0)"), 1.0, weight("log(-3,0)")).unwrap();
        let k = crate::profiles::standard_suite::<f64>()[1].clone();
        for t in [1e-3, 0.5, 1.0, 40.0] {
            assert_relative_eq!(rhs_formula(&c, &k, t), rhs_limiting11_direct(&c, &k, t), max_relative = 1e-8);
        }
    }

    #[test]
    fn gate_rejects_failing_condition() {
        let c = l00(1.0, "log(0,-2)", 2.0, "log(0,-1)");
        let g = GridSpec::coarse(1e-6, 1e6, 13);
        let e = equivalence_scan(&c, &KProfile::min1(), &g).unwrap_err();
        assert!(matches!(e, Error::Hypothesis(ref m) if m.contains("rho_eps")));
    }

    #[test]
    fn negative_demo_values() {
        let ts = negative_demo_grid(1e-300, 40);
        let mut ts2 = ts.clone();
        ts2.extend([(-3.0f64).exp(), (-99.0f64).exp()]);
        let d = negative_demo(0.5, 1.0, 2.0, &weight("log(-3,-3)"), &weight("one"), &ts2).unwrap();
        let at = |t: f64| d.rows.iter().find(|r| r.t == t).unwrap().m;
        assert_relative_eq!(at((-3.0f64).exp()), 2.0 / 5f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(at((-99.0f64).exp()), 10.0 / 5f64.sqrt(), max_relative = 1e-9);
        let d = negative_demo(0.5, 1.0, 2.0, &weight("log(-3,-3)"), &weight("one"), &ts).unwrap();
        assert_eq!(d.verdict, Verdict::NonexistenceConfirmed);
        let swapped = negative_demo(0.5, 2.0, 1.0, &weight("one"), &weight("log(-3,-3)"), &ts).unwrap();
        assert_eq!(swapped.rows, d.rows);
        let flat = negative_demo(0.5, 1.0, 2.0, &weight("one"), &weight("one"), &ts).unwrap();
        assert!(flat.rows.iter().all(|r| r.m == f64::INFINITY));
        assert_eq!(flat.verdict, Verdict::NonexistenceConfirmed);
    }
}
