//! Reiteration weights for the limiting spaces, the log-derivative condition,
//! and Lorentz–Karamata spaces as limiting interpolation spaces of (L1, L_inf).

use rand::Rng;

use crate::error::{Error, Result};
use crate::holmstedt_lab::{ln_rhs, CaseKind, HolmstedtCase, ScanReport, ScanRow};
use crate::interp_norms::{
    check_condition_monotone_index, default_eps_grid, default_threshold, ln_weighted_norm, quasi_monotone_constant,
    ConditionKind, Direction,
};
use crate::logfn::{ClosureFn, LogFn};
use crate::profiles::{k_from_rearrangement, KProfile, Rearrangement};
use crate::quadrature::{GridSpec, QuadOptions};
use crate::real::{lit, to_f64, Real};
use crate::sv_algebra::{ln_integral_x, WeightExpr};

/// Step for central differences in `x = ln t`.
pub const LOG_STEP: f64 = 1e-3;

/// Relative tolerance of the outer integral, whose integrand carries inner
/// quadrature noise.
pub const OUTER_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Couple of `theta = 0` limiting spaces, weight `b~`.
    Limiting0,
    /// Couple of `theta = 1` limiting spaces, weight `b^`.
    Limiting1,
}

/// `(A_{j,q0;b0}, A_{j,q1;b1})_{theta,q;b}` with `j = 0` or `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReiterationSpec<T> {
    pub side: Side,
    pub theta: T,
    pub q: T,
    pub b: WeightExpr<T>,
    /// Positive constant multiplying `b`.
    pub b_scale: T,
    pub q0: T,
    pub b0: WeightExpr<T>,
    pub q1: T,
    pub b1: WeightExpr<T>,
}

impl<T: Real> ReiterationSpec<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        side: Side,
        theta: T,
        q: T,
        b: WeightExpr<T>,
        q0: T,
        b0: WeightExpr<T>,
        q1: T,
        b1: WeightExpr<T>,
    ) -> Result<Self> {
        for (name, v) in [("q", q), ("q0", q0), ("q1", q1)] {
            if v == T::infinity() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = inf is unsupported by the reiteration theorem hypotheses"
                )));
            }
            if !(v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, inf)")));
            }
        }
        if !(theta > T::zero() && theta < T::one()) {
            return Err(Error::InvalidParameter("theta must lie in (0, 1)".into()));
        }
        let s = Self {
            side,
            theta,
            q,
            b,
            b_scale: T::one(),
            q0,
            b0,
            q1,
            b1,
        };
        for (j, bj, qj) in [(0, &s.b0, q0), (1, &s.b1, q1)] {
            let c = bj.classify(qj);
            let ok = match side {
                Side::Limiting0 => c.in_sv0q,
                Side::Limiting1 => c.in_sv1q,
            };
            if !ok {
                let class = if side == Side::Limiting0 { "SV_(0,q" } else { "SV_(1,q" };
                return Err(Error::Hypothesis(format!("b{j} = {bj} is not in {class}{j})")));
            }
        }
        Ok(s)
    }

    pub fn with_b_scale(mut self, c: T) -> Self {
        self.b_scale = c;
        self
    }

    /// The inner Holmstedt case.
    pub fn case(&self) -> HolmstedtCase<T> {
        let kind = match self.side {
            Side::Limiting0 => CaseKind::Limiting00,
            Side::Limiting1 => CaseKind::Limiting11,
        };
        let th = if self.side == Side::Limiting0 { T::zero() } else { T::one() };
        HolmstedtCase::unchecked(kind, th, self.q0, self.b0.clone(), th, self.q1, self.b1.clone())
    }

    /// The spec on the other side: weights flipped and `theta -> 1 - theta`.
    /// Its index is `t -> rho(1/t)`, so `b^` of the result is `b~(1/t)`; the
    /// index runs the other way.
    pub fn flipped(&self) -> Self {
        Self {
            side: match self.side {
                Side::Limiting0 => Side::Limiting1,
                Side::Limiting1 => Side::Limiting0,
            },
            theta: T::one() - self.theta,
            q: self.q,
            b: self.b.clone(),
            b_scale: self.b_scale,
            q0: self.q0,
            b0: self.b0.clone().flip(),
            q1: self.q1,
            b1: self.b1.clone().flip(),
        }
    }

    /// `ln rho` (side 0) or `ln eta` (side 1) at `x`.
    pub fn ln_index(&self, x: T) -> T {
        self.case().ln_index(x)
    }

    /// `d ln rho / d ln t` by central differences.
    pub fn log_derivative(&self, x: T) -> T {
        let h: T = lit(LOG_STEP);
        (self.ln_index(x + h) - self.ln_index(x - h)) / (h + h)
    }

    /// Exact `d ln rho / d ln t` from the derivatives of the two partial norms.
    pub fn log_derivative_exact(&self, x: T) -> T {
        let o = QuadOptions::default();
        let (a, b, sign) = match self.side {
            Side::Limiting0 => (x, T::infinity(), -T::one()),
            Side::Limiting1 => (T::neg_infinity(), x, T::one()),
        };
        let term = |w: &WeightExpr<T>, q: T| match ln_integral_x(w, q, a, b, &o) {
            Ok(m) if m.is_finite() => (q * w.ln_at(x) - m).exp() / q,
            _ => T::nan(),
        };
        sign * (term(&self.b0, self.q0) - term(&self.b1, self.q1))
    }

    /// `ln int b1^{q1} du/u` over the tail (side 0) or head (side 1) at `x`.
    fn ln_b1_mass(&self, x: T) -> T {
        let (a, b) = match self.side {
            Side::Limiting0 => (x, T::infinity()),
            Side::Limiting1 => (T::neg_infinity(), x),
        };
        ln_integral_x(&self.b1, self.q1, a, b, &QuadOptions::default()).unwrap_or(T::nan())
    }

    fn ln_b(&self, y: T) -> T {
        self.b_scale.ln() + self.b.ln_at(y)
    }
}

/// `b~` (side 0) or `b^` (side 1) as a function.
#[derive(Clone, Debug)]
pub struct ReiteratedWeight<T> {
    spec: ReiterationSpec<T>,
}

impl<T: Real> ReiteratedWeight<T> {
    pub fn spec(&self) -> &ReiterationSpec<T> {
        &self.spec
    }
}

impl<T: Real> LogFn<T> for ReiteratedWeight<T> {
    fn ln_at(&self, x: T) -> T {
        let s = &self.spec;
        let li = s.ln_index(x);
        let power = match s.side {
            Side::Limiting0 => T::one() - s.theta,
            Side::Limiting1 => s.theta,
        };
        let mut v = power * li + s.ln_b(li) + (s.q1 / s.q) * s.b1.ln_at(x);
        let e = T::one() / s.q1 - T::one() / s.q;
        if e != T::zero() {
            v = v + e * s.ln_b1_mass(x);
        }
        v
    }

    fn kinks(&self) -> Vec<T> {
        vec![T::zero()]
    }
}

fn build<T: Real>(spec: &ReiterationSpec<T>, side: Side) -> Result<ReiteratedWeight<T>> {
    if spec.side != side {
        return Err(Error::InvalidParameter(format!("spec is for {:?}", spec.side)));
    }
    let m = spec.ln_b1_mass(T::zero());
    if !m.is_finite() {
        return Err(Error::Precondition("divergent integral of b1^q1".into()));
    }
    Ok(ReiteratedWeight { spec: spec.clone() })
}

/// `b~(t) = rho^{1-theta} b(rho) b1^{q1/q} (int_t^inf b1^{q1} du/u)^{1/q1-1/q}`.
pub fn build_tilde_b<T: Real>(spec: &ReiterationSpec<T>) -> Result<ReiteratedWeight<T>> {
    build(spec, Side::Limiting0)
}

/// `b^(t) = eta^theta b(eta) b1^{q1/q} (int_0^t b1^{q1} du/u)^{1/q1-1/q}`.
pub fn build_hat_b<T: Real>(spec: &ReiterationSpec<T>) -> Result<ReiteratedWeight<T>> {
    build(spec, Side::Limiting1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogDerivativeReport<T> {
    /// `(t, ratio)` per grid point.
    pub rows: Vec<(T, T)>,
    pub band: (T, T),
    pub pass: bool,
}

/// Accepted band of the log-derivative ratio.
pub fn log_derivative_band<T: Real>() -> (T, T) {
    (lit(0.1), lit(10.0))
}

/// Ratio of `rho'/rho` (or `eta'/eta`) to `t^{-1} b1^{q1} / int b1^{q1} du/u`.
pub fn log_derivative_check<T: Real>(spec: &ReiterationSpec<T>, grid: &GridSpec<T>) -> Result<LogDerivativeReport<T>> {
    if spec.q0 != spec.q1 {
        return Err(Error::Precondition("log-derivative condition applies to q0 = q1".into()));
    }
    let rows: Vec<(T, T)> = grid
        .log_points()
        .into_iter()
        .map(|x| {
            let ln_target = spec.q1 * spec.b1.ln_at(x) - spec.ln_b1_mass(x);
            (x.exp(), spec.log_derivative(x) / ln_target.exp())
        })
        .collect();
    let lo = rows.iter().map(|r| r.1).fold(T::infinity(), |a, b| a.min(b));
    let hi = rows.iter().map(|r| r.1).fold(T::neg_infinity(), |a, b| a.max(b));
    let (blo, bhi) = log_derivative_band();
    Ok(LogDerivativeReport {
        rows,
        band: (lo, hi),
        pass: lo >= blo && hi <= bhi,
    })
}

/// Grid on which the limits of the index at `0+` and `inf` are checked.
pub fn extended_grid<T: Real>() -> GridSpec<T> {
    GridSpec::coarse(lit(1e-300), lit(1e300), 1)
}

/// Verifies the hypotheses of the reiteration theorem on `grid`.
pub fn check_reiteration_hypotheses<T: Real>(spec: &ReiterationSpec<T>, grid: &GridSpec<T>) -> Result<()> {
    let name = if spec.side == Side::Limiting0 { "rho" } else { "eta" };
    let v: Vec<T> = grid.log_points().into_iter().map(|x| spec.ln_index(x)).collect();
    let c = quasi_monotone_constant(&v, Direction::NonDecreasing);
    if !(c <= T::one() + lit(1e-9)) {
        return Err(Error::Hypothesis(format!("{name} is not increasing (constant {})", to_f64(c))));
    }
    let ext = extended_grid::<T>();
    let (lo, hi) = (spec.ln_index(ext.t_min.ln()).exp(), spec.ln_index(ext.t_max.ln()).exp());
    if !(lo <= lit(1e-2) && hi >= lit(1e2)) {
        return Err(Error::Hypothesis(format!(
            "{name} must tend to 0 at 0+ and to inf at inf (got {} and {})",
            to_f64(lo),
            to_f64(hi)
        )));
    }
    if spec.q0 != spec.q1 {
        let kind = if spec.side == Side::Limiting0 { ConditionKind::RhoEps } else { ConditionKind::EtaEps };
        let case = spec.case();
        let r = check_condition_monotone_index(kind, &case.w0(), &case.w1(), &default_eps_grid(), default_threshold(), grid);
        if !r.pass {
            return Err(Error::Hypothesis(format!(
                "condition '{name}_eps equivalent to a nondecreasing function' failed: constant {}",
                to_f64(r.best_constant)
            )));
        }
    } else {
        let r = log_derivative_check(spec, grid)?;
        if !r.pass {
            return Err(Error::Hypothesis(format!(
                "log-derivative condition failed: band [{}, {}]",
                to_f64(r.band.0),
                to_f64(r.band.1)
            )));
        }
    }
    Ok(())
}

/// `ln ||f||` in `(X0, X1)_{theta,q;b}` with the Holmstedt right-hand side in
/// place of the inner K-functional, after the substitution `s = rho(t)`.
pub fn ln_outer_norm<T: Real>(spec: &ReiterationSpec<T>, k: &KProfile<T>) -> T {
    if k.is_zero() {
        return T::neg_infinity();
    }
    let case = spec.case();
    let (th, q) = (spec.theta, spec.q);
    let g = ClosureFn::new(|x: T| {
        let ls = spec.ln_index(x);
        let d = spec.log_derivative_exact(x);
        if !(d > T::zero()) {
            return T::neg_infinity();
        }
        q * (-th * ls + spec.ln_b(ls) + ln_rhs(&case, k, x)) + d.ln()
    })
    .with_kinks({
        let mut v = k.kinks();
        v.push(T::zero());
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    });
    let opts = QuadOptions {
        tol: lit(OUTER_TOL),
        ..QuadOptions::default()
    };
    match ln_integral_x(&g, T::one(), T::neg_infinity(), T::infinity(), &opts) {
        Ok(v) => v / q,
        Err(_) => T::nan(),
    }
}

/// `ln ||f||` in `A_{0,q;b~}` or `A_{1,q;b^}`.
pub fn ln_reiterated_norm<T: Real>(spec: &ReiterationSpec<T>, k: &KProfile<T>) -> Result<T> {
    if k.is_zero() {
        return Ok(T::neg_infinity());
    }
    let w = build(spec, spec.side)?;
    let theta = if spec.side == Side::Limiting0 { T::zero() } else { T::one() };
    Ok(ln_weighted_norm(k, theta, spec.q, &w, T::neg_infinity(), T::infinity(), &QuadOptions::default()))
}

/// Compares both sides over a profile suite; row `t` holds the member index.
pub fn reiteration_check<T: Real>(spec: &ReiterationSpec<T>, suite: &[KProfile<T>], grid: &GridSpec<T>) -> Result<ScanReport<T>> {
    check_reiteration_hypotheses(spec, grid)?;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (i, k) in suite.iter().enumerate() {
        let lhs = ln_outer_norm(spec, k);
        let rhs = ln_reiterated_norm(spec, k)?;
        let ratio = (lhs - rhs).exp();
        if ratio.is_finite() && ratio > T::zero() {
            rows.push(ScanRow {
                t: lit(i as f64),
                lhs: lhs.exp(),
                rhs: rhs.exp(),
                ratio,
            });
        } else {
            skipped += 1;
        }
    }
    Ok(ScanReport::from_rows(rows, skipped))
}

/// Lorentz–Karamata space `L_{p,q;b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LKSpec<T> {
    pub p: T,
    pub q: T,
    pub b: WeightExpr<T>,
}

impl<T: Real> LKSpec<T> {
    pub fn new(p: T, q: T, b: WeightExpr<T>) -> Result<Self> {
        if !(p > T::zero() && q > T::zero()) {
            return Err(Error::InvalidParameter("p and q must lie in (0, inf]".into()));
        }
        Ok(Self { p, q, b })
    }
}

/// `||t^{1/p - 1/q} b(t) f*(t)||_{q,(0,inf)}` against `dt`.
pub fn lorentz_karamata_norm<T: Real>(f: &Rearrangement<T>, spec: &LKSpec<T>) -> T {
    if f.piecewise().is_zero() {
        return T::zero();
    }
    // t^{1/p - 1/q} with dt equals t^{1/p} with dt/t.
    ln_weighted_norm(
        f,
        -T::one() / spec.p,
        spec.q,
        &spec.b,
        T::neg_infinity(),
        T::infinity(),
        &QuadOptions::default(),
    )
    .exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LkEmbeddingRow<T> {
    pub lk: T,
    pub interpolation: T,
    pub ratio: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LkEmbeddingReport<T> {
    pub rows: Vec<LkEmbeddingRow<T>>,
    pub ratio_min: T,
    pub ratio_max: T,
}

/// `||f||_{L_{inf,q;b}}` against `||f||_{(L1, L_inf)_{1,q;b}}` over a suite.
pub fn lk_embedding_check<T: Real>(suite: &[Rearrangement<T>], q: T, b: &WeightExpr<T>) -> Result<LkEmbeddingReport<T>> {
    if !b.classify(q).in_sv1q {
        return Err(Error::Hypothesis(format!("b = {b} is not in SV_(1,q)")));
    }
    let lk = LKSpec::new(T::infinity(), q, b.clone())?;
    let mut rows = Vec::with_capacity(suite.len());
    for f in suite {
        let k = k_from_rearrangement(f)?;
        let interp = if k.is_zero() {
            T::zero()
        } else {
            ln_weighted_norm(&k, T::one(), q, b, T::neg_infinity(), T::infinity(), &QuadOptions::default()).exp()
        };
        let l = lorentz_karamata_norm(f, &lk);
        let ratio = if l == T::zero() && interp == T::zero() { T::one() } else { interp / l };
        rows.push(LkEmbeddingRow {
            lk: l,
            interpolation: interp,
            ratio,
        });
    }
    let ratio_min = rows.iter().map(|r| r.ratio).fold(T::infinity(), |a, b| a.min(b));
    let ratio_max = rows.iter().map(|r| r.ratio).fold(T::neg_infinity(), |a, b| a.max(b));
    Ok(LkEmbeddingReport {
        rows,
        ratio_min,
        ratio_max,
    })
}

/// Random step rearrangement: `n` breaks log-uniform in `[1e-3, 1e3]`,
/// nonincreasing values log-uniform in `[1e-2, 1e2]`, zero past the last break.
pub fn random_rearrangement<T: Real, R: Rng>(rng: &mut R, n: usize) -> Rearrangement<T> {
    let mut b: Vec<f64> = (0..n.max(1)).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    let mut v: Vec<f64> = (0..b.len()).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let pts: Vec<(T, T)> = b.into_iter().zip(v).map(|(t, y)| (lit(t), lit(y))).collect();
    Rearrangement::steps(&pts).expect("sorted steps form a rearrangement")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv_algebra::weight;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn spec11() -> ReiterationSpec<f64> {
        ReiterationSpec::new(Side::Limiting0, 0.5, 1.0, weight("one"), 1.0, weight("log(-2,-2)"), 1.0, weight("log(0,-3)")).unwrap()
    }

    #[test]
    fn tilde_b_at_one() {
        let s = spec11();
        assert_relative_eq!(s.ln_index(0.0).exp(), 2.0, max_relative = 1e-10);
        let b = build_tilde_b(&s).unwrap();
        assert_relative_eq!(b.value(1.0), 2.0_f64.sqrt(), max_relative = 1e-9);
        assert!(build_hat_b(&s).is_err());
    }

    #[test]
    fn flip_duality() {
        let s = ReiterationSpec::new(Side::Limiting1, 0.3, 2.0, weight("log(1,1)"), 1.0, weight("log(-2,0)"), 1.0, weight("log(-3,1)")).unwrap();
        let hat = build_hat_b(&s).unwrap();
        let tilde = build_tilde_b(&s.flipped()).unwrap();
        for t in [1e-4, 0.3, 1.0, 7.0, 1e5] {
            assert_relative_eq!(hat.value(t), tilde.value(1.0 / t), max_relative = 1e-9);
        }
    }

    #[test]
    fn exact_derivative_matches_differences() {
        let s = spec11();
        for x in [-20.0, -1.0, 0.25, 0.5, 30.0] {
            assert_relative_eq!(s.log_derivative_exact(x), s.log_derivative(x), max_relative = 1e-6);
            assert_relative_eq!(s.flipped().log_derivative_exact(-x), -s.log_derivative(x), max_relative = 1e-6);
        }
    }

    #[test]
    fn log_derivative_band_and_degenerate() {
        let g = GridSpec::coarse(1e-6, 1e6, 8);
        let r = log_derivative_check(&spec11(), &g).unwrap();
        assert!(r.band.0 >= 0.2 && r.band.1 <= 5.0, "{:?}", r.band);
        let same = ReiterationSpec::new(Side::Limiting0, 0.5, 1.0, weight("one"), 1.0, weight("log(0,-3)"), 1.0, weight("log(0,-3)")).unwrap();
        assert!(!log_derivative_check(&same, &g).unwrap().pass);
    }

    #[test]
    fn q_inf_rejected() {
        let e = ReiterationSpec::new(Side::Limiting0, 0.5, f64::INFINITY, weight("one"), 1.0, weight("log(0,-2)"), 1.0, weight("log(0,-3)"));
        assert!(matches!(e, Err(Error::InvalidParameter(m)) if m.contains("unsupported")));
    }

    #[test]
    fn reiteration_min1_and_scaling() {
        let s = spec11();
        let g = GridSpec::coarse(1e-6, 1e6, 8);
        let k = KProfile::min1();
        let r = reiteration_check(&s, &[k.clone(), KProfile::zero()], &g).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].ratio > 1e-3 && r.rows[0].ratio < 1e3);
        let r3 = reiteration_check(&s.clone().with_b_scale(3.0), &[k], &g).unwrap();
        assert_relative_eq!(r3.rows[0].ratio, r.rows[0].ratio, max_relative = 1e-8);
    }

    #[test]
    fn lk_norm_examples() {
        let chi = Rearrangement::indicator(1.0).unwrap();
        assert_relative_eq!(lorentz_karamata_norm(&chi, &LKSpec::new(1.0, 1.0, weight("one")).unwrap()), 1.0, max_relative = 1e-12);
        let lk = LKSpec::new(f64::INFINITY, 1.0, weight("log(-2,0)")).unwrap();
        assert_relative_eq!(lorentz_karamata_norm(&chi, &lk), 1.0, max_relative = 1e-9);
        assert_eq!(lorentz_karamata_norm(&Rearrangement::zero(), &lk), 0.0);
    }

    #[test]
    fn lk_embedding_examples() {
        let chi = Rearrangement::indicator(1.0).unwrap();
        let r = lk_embedding_check(&[chi.clone(), chi.scaled(3.0), Rearrangement::zero()], 1.0, &weight("log(-2,0)")).unwrap();
        assert_relative_eq!(r.rows[0].lk, 1.0, max_relative = 1e-9);
        assert_relative_eq!(r.rows[0].interpolation, 2.0, max_relative = 1e-9);
        assert_relative_eq!(r.rows[1].interpolation, 6.0, max_relative = 1e-9);
        assert_eq!(r.rows[2].interpolation, 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let suite: Vec<Rearrangement<f64>> = (0..5).map(|_| random_rearrangement(&mut rng, 4)).collect();
        let r = lk_embedding_check(&suite, 1.0, &weight("log(-2,0)")).unwrap();
        assert!(r.ratio_min >= 1.0 - 1e-9 && r.ratio_max <= 1e2);
    }
}
