//! Executes validated scenarios and renders their CSV and JSON output.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use kinterp::holmstedt_lab::{equivalence_scan, negative_demo, negative_demo_grid, Verdict};
use kinterp::ScanReport;
use kinterp::interp_norms::space_norm;
use kinterp::reiteration::{lk_embedding_check, random_rearrangement, reiteration_check};
use kinterp::sv_algebra::sv_check;
use kinterp::weighted_ineq::{best_constant_probe, compute_constant, hardy_check, StepFn};

use crate::config::{Check, Rearrangements, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

/// Result of one scenario, rendered but not yet written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub kind: &'static str,
    pub status: Status,
    pub message: Option<String>,
    pub metrics: Map<String, Value>,
    pub csv: Option<String>,
    pub out: Option<PathBuf>,
}

/// `{:.16e}`: 17 significant digits, stable across runs and platforms.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn csv<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [f64; N]>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt_num(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// JSON number, or the CSV spelling for non-finite values.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_num(v))
    }
}

fn scan_csv(r: &ScanReport) -> String {
    csv(["t", "lhs", "rhs", "ratio"], r.rows.iter().map(|w| [w.t, w.lhs, w.rhs, w.ratio]))
}

fn scan_metrics(m: &mut Map<String, Value>, r: &ScanReport) {
    m.insert("rows".into(), json!(r.rows.len()));
    m.insert("skipped".into(), json!(r.skipped));
    m.insert("ratio_min".into(), num(r.ratio_min));
    m.insert("ratio_max".into(), num(r.ratio_max));
    m.insert("variation".into(), num(r.variation));
}

fn run_one(sc: &Scenario) -> Outcome {
    let mut metrics = Map::new();
    let mut message = None;
    let mut csv_out = None;
    let result: Result<bool, kinterp::Error> = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        match &sc.check {
            Check::SvCheck { b, eps, threshold } => {
                let rows = sv_check(b, eps, &sc.grid);
                csv_out = Some(csv(
                    ["eps", "increasing_constant", "decreasing_constant"],
                    rows.iter().map(|r| [r.eps, r.increasing_constant, r.decreasing_constant]),
                ));
                let worst = rows
                    .iter()
                    .map(|r| r.increasing_constant.max(r.decreasing_constant))
                    .fold(0.0, f64::max);
                metrics.insert("max_constant".into(), num(worst));
                metrics.insert("threshold".into(), num(*threshold));
                Ok(rows.iter().all(|r| r.passes(*threshold)))
            }
            Check::Norm { profile, space } => {
                let v = space_norm(profile, space);
                csv_out = Some(csv(["theta", "q", "norm"], [[space.theta, space.q, v]]));
                metrics.insert("norm".into(), num(v));
                Ok(!v.is_nan())
            }
            Check::Holmstedt {
                case,
                profile,
                max_variation,
                band,
            } => {
                let r = equivalence_scan(case, profile, &sc.grid)?;
                csv_out = Some(scan_csv(&r));
                scan_metrics(&mut metrics, &r);
                let in_band = r.rows.iter().all(|w| w.ratio >= band.0 && w.ratio <= band.1);
                if r.rows.is_empty() {
                    message = Some("every grid point was skipped".into());
                } else if !in_band {
                    message = Some(format!("ratio left the band [{}, {}]", band.0, band.1));
                } else if !(r.variation <= *max_variation) {
                    message = Some(format!("variation {} exceeds {}", r.variation, max_variation));
                }
                Ok(in_band && r.variation <= *max_variation && !r.rows.is_empty())
            }
            Check::NegativeDemo {
                theta,
                q0,
                q1,
                b0,
                b1,
                t_min,
                points,
            } => {
                let ts = negative_demo_grid(*t_min, *points);
                let d = negative_demo(*theta, *q0, *q1, b0, b1, &ts)?;
                csv_out = Some(csv(
                    ["t", "head_bound", "upper_bound", "M"],
                    d.rows.iter().map(|r| [r.t, r.head_bound, r.upper_bound, r.m]),
                ));
                metrics.insert("r".into(), num(d.r));
                metrics.insert("verdict".into(), json!(d.verdict.label()));
                metrics.insert("note".into(), json!(d.note));
                Ok(d.verdict == Verdict::NonexistenceConfirmed)
            }
            Check::Reiterate {
                spec,
                profiles,
                max_variation,
            } => {
                let r = reiteration_check(spec, profiles, &sc.grid)?;
                csv_out = Some(scan_csv(&r));
                scan_metrics(&mut metrics, &r);
                Ok(r.variation <= *max_variation && r.skipped == 0)
            }
            Check::LkCheck {
                q,
                b,
                rearrangements,
                max_ratio,
            } => {
                let suite = match rearrangements {
                    Rearrangements::Random(n) => (0..*n).map(|_| random_rearrangement(&mut rng, 4)).collect(),
                    Rearrangements::List(v) => v.clone(),
                };
                let r = lk_embedding_check(&suite, *q, b)?;
                csv_out = Some(csv(
                    ["index", "lk", "interpolation", "ratio"],
                    r.rows
                        .iter()
                        .enumerate()
                        .map(|(i, w)| [i as f64, w.lk, w.interpolation, w.ratio]),
                ));
                metrics.insert("ratio_min".into(), num(r.ratio_min));
                metrics.insert("ratio_max".into(), num(r.ratio_max));
                Ok(r.ratio_min >= 1.0 - 1e-9 && r.ratio_max <= *max_ratio)
            }
            Check::HardyCheck {
                case,
                alpha,
                w,
                phi,
                samples,
                pieces,
                max_constant,
            } => {
                let hs: Vec<StepFn<f64>> = (0..*samples)
                    .map(|_| StepFn::random(&mut rng, case.monotonicity(), *pieces))
                    .collect();
                let r = hardy_check(*case, *alpha, w.clone().shared(), phi.clone().shared(), &hs)?;
                csv_out = Some(csv(["sample", "ratio"], r.ratios.iter().enumerate().map(|(i, v)| [i as f64, *v])));
                metrics.insert("max_ratio".into(), num(r.max_ratio));
                Ok(r.max_ratio <= *max_constant)
            }
            Check::Constants {
                spec,
                which,
                probe,
                expect,
            } => {
                let c = compute_constant(spec, *which)?;
                metrics.insert("which".into(), json!(format!("{which:?}")));
                metrics.insert("value".into(), num(c.value));
                if let Some(a) = c.argmax {
                    metrics.insert("argmax".into(), num(a));
                }
                if *probe {
                    let p = best_constant_probe(spec, *which, &sc.grid)?;
                    metrics.insert("probe_sup".into(), num(p.sup));
                    metrics.insert("probe_argmax".into(), num(p.argmax));
                    csv_out = Some(csv(["t", "ratio"], p.rows.iter().map(|(t, r)| [*t, *r])));
                } else {
                    csv_out = Some(csv(["value", "argmax"], [[c.value, c.argmax.unwrap_or(f64::NAN)]]));
                }
                Ok(match expect {
                    Some((e, tol)) => (c.value - e).abs() <= *tol,
                    None => c.value.is_finite(),
                })
            }
        }
    })();
    let status = match result {
        Ok(true) => Status::Pass,
        Ok(false) => Status::Fail,
        Err(e) => {
            message = Some(e.to_string());
            Status::Fail
        }
    };
    Outcome {
        name: sc.name.clone(),
        kind: sc.kind.name(),
        status,
        message,
        metrics,
        csv: csv_out,
        out: sc.out.clone(),
    }
}

/// Runs scenarios in parallel; outcomes come back in declaration order.
pub fn run_all(scenarios: &[Scenario]) -> Vec<Outcome> {
    scenarios.par_iter().map(run_one).collect()
}

/// JSON summary of all outcomes.
pub fn summary(outcomes: &[Outcome]) -> String {
    let list: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            let mut m = Map::new();
            m.insert("name".into(), json!(o.name));
            m.insert("kind".into(), json!(o.kind));
            m.insert("pass".into(), json!(o.status == Status::Pass));
            if let Some(msg) = &o.message {
                m.insert("message".into(), json!(msg));
            }
            if let Some(p) = &o.out {
                m.insert("csv".into(), json!(p.display().to_string()));
            }
            m.insert("metrics".into(), Value::Object(o.metrics.clone()));
            Value::Object(m)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({
        "exit_code": exit_code(outcomes),
        "scenarios": list,
    }))
    .expect("summary serializes");
    s.push('\n');
    s
}

pub fn exit_code(outcomes: &[Outcome]) -> i32 {
    if outcomes.iter().all(|o| o.status == Status::Pass) {
        0
    } else {
        1
    }
}

/// Writes each CSV through a temporary file and a rename.
pub fn write_outputs(outcomes: &[Outcome]) -> std::io::Result<()> {
    for o in outcomes {
        if let (Some(path), Some(body)) = (&o.out, &o.csv) {
            write_atomic(path, body)?;
        }
    }
    Ok(())
}

pub fn write_atomic(path: &std::path::Path, body: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, body)?;
    std::fs::rename(&tmp, path)
}

/// One line per scenario for stderr.
pub fn report_line(o: &Outcome) -> String {
    let mut s = String::new();
    let tag = if o.status == Status::Pass { "pass" } else { "FAIL" };
    let _ = write!(s, "{tag} [{}] {}", o.kind, o.name);
    if let Some(m) = &o.message {
        let _ = write!(s, ": {m}");
    }
    s
}
