//! Scenario files and command-line flags, both reduced to validated [`Scenario`]s.
//!
//! Grammar, one scenario per block:
//!
//! ```text
//! # comment
//! [scenario name]
//! kind = holmstedt
//! key = value
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique within
//! a block. Relative paths are resolved against the directory of the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use kinterp::holmstedt_lab::{CaseKind, HolmstedtCase};
use kinterp::interp_norms::SpaceSpec;
use kinterp::profiles::{KProfile, Rearrangement};
use kinterp::quadrature::GridSpec;
use kinterp::reiteration::{ReiterationSpec, Side};
use kinterp::sv_algebra::WeightExpr;
use kinterp::weighted_ineq::{ElemFn, HardyCase, InequalitySpec, Which};
use kinterp::Error;

/// Where a value came from, for error messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Line { line: usize, col: usize },
    Flag(String),
    File { path: PathBuf, line: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line { line, col } => write!(f, "line {line}, column {col}"),
            Origin::Flag(name) => write!(f, "argument --{name}"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Origin,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.origin, self.msg)
    }
}

impl std::error::Error for ConfigError {}

fn err(origin: Origin, msg: impl Into<String>) -> ConfigError {
    ConfigError { origin, msg: msg.into() }
}

/// Moves a column inside `value` to the column of the whole line.
fn shift(origin: &Origin, by: usize) -> Origin {
    match origin {
        Origin::Line { line, col } => Origin::Line {
            line: *line,
            col: col + by.saturating_sub(1),
        },
        o => o.clone(),
    }
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    origin: Origin,
}

/// A block of `key = value` entries before validation.
#[derive(Clone, Debug)]
pub struct RawScenario {
    pub name: String,
    origin: Origin,
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
}

impl RawScenario {
    pub fn new(name: &str, origin: Origin) -> Self {
        Self {
            name: name.to_string(),
            origin,
            entries: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    pub fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if self.entries.contains_key(key) {
            return Err(err(origin, format!("duplicate key '{key}'")));
        }
        self.order.push(key.to_string());
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                origin,
            },
        );
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: &str, origin: Origin) {
        if !self.entries.contains_key(key) {
            self.insert(key, value, origin).expect("key is absent");
        }
    }
}

/// Splits a config file into blocks.
pub fn parse_config(text: &str) -> Result<Vec<RawScenario>, ConfigError> {
    let mut out: Vec<RawScenario> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let indent = raw.len() - raw.trim_start().len();
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let at = |col: usize| Origin::Line { line, col };
        if let Some(rest) = s.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(err(at(indent + s.len()), "expected ']' to close the scenario header"));
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(err(at(indent + 2), "empty scenario name"));
            }
            if out.iter().any(|r| r.name == name) {
                return Err(err(at(indent + 2), format!("duplicate scenario '{name}'")));
            }
            out.push(RawScenario::new(name, at(indent + 1)));
            continue;
        }
        let Some(eq) = s.find('=') else {
            return Err(err(at(indent + 1), "expected 'key = value' or '[name]'"));
        };
        let key = s[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(err(at(indent + 1), format!("invalid key '{key}'")));
        }
        let after = &s[eq + 1..];
        let value = after.trim();
        let vcol = indent + eq + 2 + (after.len() - after.trim_start().len());
        let Some(block) = out.last_mut() else {
            return Err(err(at(indent + 1), "entry before the first [scenario] header"));
        };
        block.insert(key, value, at(vcol))?;
    }
    Ok(out)
}

/// Kinds of check a scenario can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    SvCheck,
    Norm,
    Holmstedt,
    NegativeDemo,
    Reiterate,
    LkCheck,
    HardyCheck,
    Constants,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::SvCheck,
        Kind::Norm,
        Kind::Holmstedt,
        Kind::NegativeDemo,
        Kind::Reiterate,
        Kind::LkCheck,
        Kind::HardyCheck,
        Kind::Constants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::SvCheck => "sv-check",
            Kind::Norm => "norm",
            Kind::Holmstedt => "holmstedt",
            Kind::NegativeDemo => "negative-demo",
            Kind::Reiterate => "reiterate",
            Kind::LkCheck => "lk-check",
            Kind::HardyCheck => "hardy-check",
            Kind::Constants => "constants",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug)]
pub enum Check {
    SvCheck {
        b: WeightExpr<f64>,
        eps: Vec<f64>,
        threshold: f64,
    },
    Norm {
        profile: KProfile<f64>,
        space: SpaceSpec<f64>,
    },
    Holmstedt {
        case: HolmstedtCase<f64>,
        profile: KProfile<f64>,
        max_variation: f64,
        band: (f64, f64),
    },
    NegativeDemo {
        theta: f64,
        q0: f64,
        q1: f64,
        b0: WeightExpr<f64>,
        b1: WeightExpr<f64>,
        t_min: f64,
        points: usize,
    },
    Reiterate {
        spec: ReiterationSpec<f64>,
        profiles: Vec<KProfile<f64>>,
        max_variation: f64,
    },
    LkCheck {
        q: f64,
        b: WeightExpr<f64>,
        rearrangements: Rearrangements,
        max_ratio: f64,
    },
    HardyCheck {
        case: HardyCase,
        alpha: f64,
        w: ElemFn<f64>,
        phi: ElemFn<f64>,
        samples: usize,
        pieces: usize,
        max_constant: f64,
    },
    Constants {
        spec: InequalitySpec<f64>,
        which: Which,
        probe: bool,
        expect: Option<(f64, f64)>,
    },
}

#[derive(Clone, Debug)]
pub enum Rearrangements {
    Random(usize),
    List(Vec<Rearrangement<f64>>),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub check: Check,
    pub grid: GridSpec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Typed access to a block; every key must be consumed.
struct Fields<'a> {
    raw: &'a RawScenario,
    base: &'a Path,
    used: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    fn entry(&mut self, key: &str) -> Option<&'a Entry> {
        let (k, e) = self.raw.entries.get_key_value(key)?;
        self.used.push(k.as_str());
        Some(e)
    }

    fn required(&mut self, key: &str) -> Result<&'a Entry, ConfigError> {
        let origin = self.raw.origin.clone();
        self.entry(key)
            .ok_or_else(|| err(origin, format!("scenario '{}' is missing key '{key}'", self.raw.name)))
    }

    fn num(&mut self, key: &str) -> Result<f64, ConfigError> {
        let e = self.required(key)?;
        parse_num(e)
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.entry(key) {
            Some(e) => parse_num(e),
            None => Ok(default),
        }
    }

    fn count_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.entry(key) {
            Some(e) => e
                .value
                .parse::<usize>()
                .map_err(|_| err(e.origin.clone(), format!("'{}' is not a nonnegative integer", e.value))),
            None => Ok(default),
        }
    }

    fn weight(&mut self, key: &str) -> Result<WeightExpr<f64>, ConfigError> {
        let e = self.required(key)?;
        WeightExpr::parse(&e.value).map_err(|x| core_err(&e.origin, x))
    }

    fn weight_or_one(&mut self, key: &str) -> Result<WeightExpr<f64>, ConfigError> {
        match self.raw.entries.contains_key(key) {
            true => self.weight(key),
            false => Ok(WeightExpr::One),
        }
    }

    fn profile(&mut self, key: &str) -> Result<KProfile<f64>, ConfigError> {
        let e = self.required(key)?;
        KProfile::parse(&e.value).map_err(|x| core_err(&e.origin, x))
    }

    fn path(&mut self, e: &Entry) -> PathBuf {
        let p = Path::new(&e.value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        for k in &self.raw.order {
            if !self.used.contains(&k.as_str()) {
                let e = &self.raw.entries[k];
                return Err(err(e.origin.clone(), format!("unknown key '{k}' for this kind")));
            }
        }
        Ok(())
    }
}

fn parse_num(e: &Entry) -> Result<f64, ConfigError> {
    match e.value.as_str() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        s => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(e.origin.clone(), format!("'{s}' is not a number"))),
    }
}

fn core_err(origin: &Origin, e: Error) -> ConfigError {
    match e {
        Error::Syntax { col, msg } => err(shift(origin, col), msg),
        other => err(origin.clone(), other.to_string()),
    }
}

fn parse_grid(e: &Entry) -> Result<GridSpec<f64>, ConfigError> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    let bad = || err(e.origin.clone(), format!("grid '{}' is not 'tmin,tmax,ppd'", e.value));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    GridSpec::new(a, b, n).map_err(|x| core_err(&e.origin, x))
}

/// Default scan grid.
pub fn default_grid() -> GridSpec<f64> {
    GridSpec::new(1e-6, 1e6, 13).expect("valid grid")
}

/// Reads an elementary function literal: `one`, `zero`, `expdecay(beta)`,
/// `elem(coef,p,beta)` or `elem(coef,p,beta,lo,hi)` for
/// `coef t^p exp(-beta t)` on `(lo, hi)`.
fn parse_elem(e: &Entry) -> Result<ElemFn<f64>, ConfigError> {
    let s = e.value.replace(' ', "");
    let bad = || err(e.origin.clone(), format!("'{}' is not one | zero | expdecay(b) | elem(c,p,b[,lo,hi])", e.value));
    let args = |s: &str, name: &str| -> Option<Vec<f64>> {
        let inner = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
        inner
            .split(',')
            .map(|a| if a == "inf" { Some(f64::INFINITY) } else { a.parse().ok() })
            .collect()
    };
    match s.as_str() {
        "one" => return Ok(ElemFn::one()),
        "zero" => return Ok(ElemFn::zero()),
        _ => {}
    }
    if let Some(v) = args(&s, "expdecay") {
        return match v[..] {
            [b] if b >= 0.0 => Ok(ElemFn::exp_decay(b)),
            _ => Err(bad()),
        };
    }
    match args(&s, "elem").as_deref() {
        Some(&[c, p, b]) if c >= 0.0 && b >= 0.0 => Ok(ElemFn::new(c, p, b)),
        Some(&[c, p, b, lo, hi]) if c >= 0.0 && b >= 0.0 && lo >= 0.0 && lo < hi => Ok(ElemFn::new(c, p, b).on(lo, hi)),
        _ => Err(bad()),
    }
}

fn read_lines(path: &Path, origin: &Origin) -> Result<Vec<(usize, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(origin.clone(), format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// Validates a block against the preconditions of its check.
pub fn build(raw: &RawScenario, base: &Path, seed: u64) -> Result<Scenario, ConfigError> {
    let mut f = Fields {
        raw,
        base,
        used: Vec::new(),
    };
    let kind_e = f.required("kind")?;
    let kind = Kind::parse(&kind_e.value).ok_or_else(|| {
        let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
        err(kind_e.origin.clone(), format!("unknown kind '{}', expected one of {}", kind_e.value, names.join(", ")))
    })?;
    let grid = match f.entry("grid") {
        Some(e) => parse_grid(e)?,
        None => default_grid(),
    };
    let seed = match f.entry("seed") {
        Some(e) => e.value.parse().map_err(|_| err(e.origin.clone(), "seed must be a u64"))?,
        None => seed,
    };
    let out = f.entry("out").map(|e| {
        let e = e.clone();
        f.path(&e)
    });
    let origin_of = |f: &Fields, key: &str| f.raw.entries.get(key).map(|e| e.origin.clone()).unwrap_or(f.raw.origin.clone());

    let check = match kind {
        Kind::SvCheck => {
            let b = f.weight("b")?;
            let eps = match f.entry("eps") {
                Some(e) => e
                    .value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().ok().filter(|v| *v > 0.0))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| err(e.origin.clone(), "eps must be a comma list of positive numbers"))?,
                None => vec![1.0, 0.5, 0.1],
            };
            let threshold = f.num_or("threshold", 4.0)?;
            Check::SvCheck { b, eps, threshold }
        }
        Kind::Norm => {
            let profile = f.profile("profile")?;
            let (theta, q, b) = (f.num("theta")?, f.num("q")?, f.weight("b")?);
            let space = SpaceSpec::new(theta, q, b).map_err(|x| core_err(&origin_of(&f, "q"), x))?;
            Check::Norm { profile, space }
        }
        Kind::Holmstedt => {
            let case_e = f.required("case")?;
            let ck = CaseKind::parse(&case_e.value).map_err(|x| core_err(&case_e.origin, x))?;
            let profile = f.profile("profile")?;
            let (q0, b0, q1, b1) = (f.num("q0")?, f.weight("b0")?, f.num("q1")?, f.weight("b1")?);
            let case = match ck {
                CaseKind::Limiting00 => HolmstedtCase::limiting00(q0, b0, q1, b1),
                CaseKind::Limiting11 => HolmstedtCase::limiting11(q0, b0, q1, b1),
                CaseKind::InteriorEqualQ => {
                    if q0 != q1 {
                        return Err(err(origin_of(&f, "q1"), "interior-equal-q needs q0 = q1"));
                    }
                    HolmstedtCase::interior_equal_q(f.num("theta")?, q0, b0, b1)
                }
                CaseKind::NonLimiting => HolmstedtCase::nonlimiting(f.num("theta0")?, q0, b0, f.num("theta1")?, q1, b1),
            }
            .map_err(|x| core_err(&case_e.origin, x))?;
            let max_variation = f.num_or("max_variation", 1e3)?;
            let band = (f.num_or("ratio_min", 1e-3)?, f.num_or("ratio_max", 1e3)?);
            Check::Holmstedt {
                case,
                profile,
                max_variation,
                band,
            }
        }
        Kind::NegativeDemo => {
            let theta = f.num("theta")?;
            if !(theta > 0.0 && theta < 1.0) {
                return Err(err(origin_of(&f, "theta"), "theta must lie in (0, 1)"));
            }
            let (q0, q1) = (f.num("q0")?, f.num("q1")?);
            if q0 == q1 || !(q0 > 0.0 && q1 > 0.0) {
                return Err(err(origin_of(&f, "q1"), "the demo needs distinct q0, q1 in (0, inf]"));
            }
            let (b0, b1) = (f.weight("b0")?, f.weight("b1")?);
            let t_min = f.num_or("t_min", 1e-300)?;
            if !(t_min > 0.0 && t_min < 1.0) {
                return Err(err(origin_of(&f, "t_min"), "t_min must lie in (0, 1)"));
            }
            let points = f.count_or("points", 25)?;
            if points < 3 {
                return Err(err(origin_of(&f, "points"), "points must be at least 3"));
            }
            Check::NegativeDemo {
                theta,
                q0,
                q1,
                b0,
                b1,
                t_min,
                points,
            }
        }
        Kind::Reiterate => {
            let side_e = f.required("side")?;
            let side = match side_e.value.as_str() {
                "0" => Side::Limiting0,
                "1" => Side::Limiting1,
                _ => return Err(err(side_e.origin.clone(), "side must be 0 or 1")),
            };
            let (theta, q, b) = (f.num("theta")?, f.num("q")?, f.weight_or_one("b")?);
            let (q0, b0, q1, b1) = (f.num("q0")?, f.weight("b0")?, f.num("q1")?, f.weight("b1")?);
            let spec = ReiterationSpec::new(side, theta, q, b, q0, b0, q1, b1).map_err(|x| core_err(&side_e.origin, x))?;
            let prof_e = f.required("profiles")?.clone();
            let profiles = if prof_e.value == "standard" {
                kinterp::profiles::standard_suite()
            } else {
                let path = f.path(&prof_e);
                read_lines(&path, &prof_e.origin)?
                    .into_iter()
                    .map(|(line, l)| {
                        KProfile::parse(&l).map_err(|x| err(Origin::File { path: path.clone(), line }, x.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            let max_variation = f.num_or("max_variation", 1e3)?;
            Check::Reiterate {
                spec,
                profiles,
                max_variation,
            }
        }
        Kind::LkCheck => {
            let q = f.num("q")?;
            let b = f.weight("b")?;
            if !b.classify(q).in_sv1q {
                return Err(err(origin_of(&f, "b"), format!("b = {b} is not in SV_(1,q)")));
            }
            let r_e = f.required("rearrangements")?.clone();
            let rearrangements = match r_e
                .value
                .strip_prefix("random(")
                .and_then(|s| s.strip_suffix(')'))
                .map(|s| s.trim().parse::<usize>())
            {
                Some(Ok(n)) => Rearrangements::Random(n),
                Some(Err(_)) => return Err(err(r_e.origin.clone(), "expected random(<count>)")),
                None => {
                    let path = f.path(&r_e);
                    Rearrangements::List(
                        read_lines(&path, &r_e.origin)?
                            .into_iter()
                            .map(|(line, l)| {
                                Rearrangement::parse(&l)
                                    .map_err(|x| err(Origin::File { path: path.clone(), line }, x.to_string()))
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
            };
            let max_ratio = f.num_or("max_ratio", 1e2)?;
            Check::LkCheck {
                q,
                b,
                rearrangements,
                max_ratio,
            }
        }
        Kind::HardyCheck => {
            let case_e = f.required("case")?;
            let case = match case_e.value.as_str() {
                "het1" => HardyCase::Het1,
                "het2" => HardyCase::Het2,
                "het3plus" => HardyCase::Het3Plus,
                "het3" => HardyCase::Het3,
                _ => return Err(err(case_e.origin.clone(), "case must be het1, het2, het3plus or het3")),
            };
            let alpha = f.num("alpha")?;
            let w = parse_elem(f.required("w")?)?;
            let phi = match f.entry("phi") {
                Some(e) => parse_elem(e)?,
                None => ElemFn::one(),
            };
            let samples = f.count_or("samples", 50)?;
            let pieces = f.count_or("pieces", 6)?;
            let max_constant = f.num_or("max_constant", 10.0)?;
            // Divergent defining integrals surface here rather than mid-run.
            kinterp::weighted_ineq::hardy_build_v(case, alpha, w.clone().shared(), phi.clone().shared())
                .map_err(|x| core_err(&case_e.origin, x))?;
            Check::HardyCheck {
                case,
                alpha,
                w,
                phi,
                samples,
                pieces,
                max_constant,
            }
        }
        Kind::Constants => {
            let (p, q) = (f.num("p")?, f.num("q")?);
            let (v, w) = (f.weight("v")?, f.weight("w")?);
            let spec = InequalitySpec::new(p, q, v, w).map_err(|x| core_err(&origin_of(&f, "p"), x))?;
            let which_e = f.required("which")?;
            let which = match which_e.value.as_str() {
                "A1" => Which::A1,
                "A2" => Which::A2,
                "A3" => Which::A3,
                "A4" => Which::A4,
                _ => return Err(err(which_e.origin.clone(), "which must be A1, A2, A3 or A4")),
            };
            let needs_le = matches!(which, Which::A1 | Which::A3);
            if needs_le != (p <= q) {
                return Err(err(which_e.origin.clone(), format!("{:?} requires {}", which, if needs_le { "p <= q" } else { "q < p" })));
            }
            let probe = match f.entry("probe") {
                Some(e) => match e.value.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(err(e.origin.clone(), "probe must be true or false")),
                },
                None => false,
            };
            if probe && !needs_le {
                return Err(err(which_e.origin.clone(), "the probe applies to A1 and A3"));
            }
            let expect = match f.entry("expect") {
                Some(e) => Some((parse_num(e)?, f.num_or("tol", 1e-3)?)),
                None => None,
            };
            Check::Constants {
                spec,
                which,
                probe,
                expect,
            }
        }
    };
    f.finish()?;
    Ok(Scenario {
        name: raw.name.clone(),
        kind,
        check,
        grid,
        seed,
        out,
    })
}

/// Parses and validates a whole file; nothing is computed on error.
pub fn load_config(path: &Path, seed: u64) -> Result<Vec<Scenario>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(Origin::Line { line: 0, col: 0 }, format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text)?.iter().map(|r| build(r, base, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sv_check() {
        let s = parse_config("# demo\n[w]\nkind = sv-check\nb = log(0,-2)\n").unwrap();
        assert_eq!(s.len(), 1);
        let sc = build(&s[0], Path::new("."), 0).unwrap();
        assert_eq!(sc.kind, Kind::SvCheck);
    }

    #[test]
    fn weight_typo_names_line_and_column() {
        let s = parse_config("[w]\nkind = sv-check\nb   = mul(one,, one)\n").unwrap();
        let e = build(&s[0], Path::new("."), 0).unwrap_err();
        assert_eq!(e.origin, Origin::Line { line: 3, col: 15 });
    }

    #[test]
    fn reiteration_q_inf_rejected() {
        let text = "[r]\nkind = reiterate\nside = 0\ntheta = 0.5\nq = inf\nq0 = 1\nb0 = log(-2,-2)\nq1 = 1\nb1 = log(0,-3)\nprofiles = standard\n";
        let e = build(&parse_config(text).unwrap()[0], Path::new("."), 0).unwrap_err();
        assert!(e.msg.contains("unsupported by the reiteration theorem hypotheses"), "{e}");
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_config("kind = norm\n").unwrap_err().origin, Origin::Line { line: 1, col: 1 });
        assert!(parse_config("[a]\n[a]\n").is_err());
        assert!(parse_config("[a]\nx = 1\nx = 2\n").is_err());
        let s = parse_config("[a]\nkind = sv-check\nb = one\nbogus = 1\n").unwrap();
        assert_eq!(build(&s[0], Path::new("."), 0).unwrap_err().origin, Origin::Line { line: 4, col: 9 });
        assert!(parse_config("").unwrap().is_empty());
    }
}
