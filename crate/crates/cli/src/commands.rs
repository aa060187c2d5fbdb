use std::collections::BTreeMap;

use hyperlangevin::analysis::{
    bounds_report, contraction_certificate, detailed_balance_residual, spectral_summary_with,
    stationary, tv_distance, wasserstein_hamming, Bound, BoundReport, CERTIFICATE_DIM_CAP,
};
use hyperlangevin::ctmc::{ctmc_simulate, glauber_rates, Trajectory};
use hyperlangevin::kernels::{kernel_matrix, Sampler};
use hyperlangevin::models::{exact_target, DistVector, TargetModel};
use hyperlangevin::scores::{ScoreField, ScoreKind};
use hyperlangevin::simulate::{chain_rng, run_chain, ChainConfig, ChainStats};
use hyperlangevin::{BitState, Error, Result, DENSE_DIM_CAP};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{AnalyzeArgs, CommonArgs, CtmcArgs, Format, RunManifest, SimulateArgs, Start};
use crate::output::{csv_bytes, emit, json_bytes, num, opt_num};
use crate::CliError;

/// Slack for round-off when a bound is attained exactly (e.g. Gibbs on
/// product targets, where κ and the rate agree to the last bit).
const CERT_SLACK: f64 = 1e-12;

const DEFAULT_GRID: (&str, &str) = ("gibbs,dups", "stein");

#[derive(Debug, Clone, Copy)]
struct Point {
    eta: f64,
    sampler: Sampler,
    score: Option<ScoreKind>,
}

/// (η, sampler, score) in output order; score-free samplers appear once per η.
fn points(m: &RunManifest) -> Vec<Point> {
    let mut out = Vec::new();
    for &eta in &m.etas {
        for &sampler in &m.samplers {
            if sampler.uses_score() {
                out.extend(m.scores.iter().map(|&k| Point { eta, sampler, score: Some(k) }));
            } else {
                out.push(Point { eta, sampler, score: None });
            }
        }
    }
    out
}

fn score_tables(model: &TargetModel, kinds: &[ScoreKind]) -> Result<BTreeMap<&'static str, ScoreField>> {
    kinds
        .iter()
        .map(|&k| Ok((k.name(), ScoreField::tabulated(k, model)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct PointReport {
    eta: f64,
    sampler: Sampler,
    score: Option<ScoreKind>,
    #[serde(rename = "W_to_target")]
    w_to_target: f64,
    tv_to_target: f64,
    lambda2: f64,
    t_rel: f64,
    t_rel_capped: bool,
    /// Absent above the certificate dimension cap.
    kappa: Option<f64>,
    rate_bound: Option<f64>,
    rate_bound_name: Option<&'static str>,
    error_bound: Option<f64>,
    error_bound_name: Option<&'static str>,
    db_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stationary: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundReport>,
}

const POINT_HEADER: [&str; 13] = [
    "eta",
    "sampler",
    "score",
    "W_to_target",
    "tv_to_target",
    "lambda2",
    "t_rel",
    "kappa",
    "rate_bound",
    "rate_bound_name",
    "error_bound",
    "error_bound_name",
    "db_residual",
];

impl PointReport {
    fn csv(&self) -> Vec<String> {
        vec![
            num(self.eta),
            self.sampler.to_string(),
            self.score.map(|k| k.to_string()).unwrap_or_default(),
            num(self.w_to_target),
            num(self.tv_to_target),
            num(self.lambda2),
            num(self.t_rel),
            opt_num(self.kappa),
            opt_num(self.rate_bound),
            self.rate_bound_name.unwrap_or_default().to_string(),
            opt_num(self.error_bound),
            self.error_bound_name.unwrap_or_default().to_string(),
            num(self.db_residual),
        ]
    }
}

/// Tightest applicable bound, if any.
fn tightest(bounds: Vec<(&'static str, Bound)>) -> Option<(&'static str, f64)> {
    bounds
        .into_iter()
        .filter(|(_, b)| b.applies)
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(n, b)| (n, b.value))
}

/// Bound evaluation for score-free samplers uses the Glauber score; the
/// damped Gibbs bound depends on the Glauber constants only.
fn report_for(model: &TargetModel, p: Point) -> Result<BoundReport> {
    bounds_report(model, p.score.unwrap_or(ScoreKind::Glauber), p.eta)
}

fn analyze_point(
    model: &TargetModel,
    target: &DistVector,
    scores: &BTreeMap<&'static str, ScoreField>,
    p: Point,
    detailed: bool,
) -> Result<PointReport> {
    let s = p.score.map(|k| &scores[k.name()]);
    let t = kernel_matrix(p.sampler, model, s, p.eta)?;
    let pi = stationary(&t)?;
    let spec = spectral_summary_with(&t, &pi)?;
    let kappa = if model.dim() <= CERTIFICATE_DIM_CAP {
        Some(contraction_certificate(&t)?.kappa)
    } else {
        None
    };
    let rep = report_for(model, p)?;
    let rate = tightest(rep.rate_bounds_for(p.sampler));
    let err = tightest(rep.error_bounds_for(p.sampler));
    Ok(PointReport {
        eta: p.eta,
        sampler: p.sampler,
        score: p.score,
        w_to_target: wasserstein_hamming(&pi, target)?,
        tv_to_target: tv_distance(&pi, target),
        lambda2: spec.lambda2,
        t_rel: spec.t_rel,
        t_rel_capped: spec.capped,
        kappa,
        rate_bound: rate.map(|r| r.1),
        rate_bound_name: rate.map(|r| r.0),
        error_bound: err.map(|r| r.1),
        error_bound_name: err.map(|r| r.0),
        db_residual: detailed_balance_residual(&t, target),
        stationary: detailed.then(|| pi.values().to_vec()),
        bounds: detailed.then_some(rep),
    })
}

fn exact_setup(m: &RunManifest) -> Result<(DistVector, BTreeMap<&'static str, ScoreField>)> {
    let d = m.model.dim();
    if d > DENSE_DIM_CAP {
        return Err(Error::Capability {
            routine: "exact analysis",
            dim: d,
            cap: DENSE_DIM_CAP,
        });
    }
    Ok((exact_target(&m.model)?, score_tables(&m.model, &m.scores)?))
}

pub fn analyze(a: &AnalyzeArgs) -> std::result::Result<(), CliError> {
    let c = &a.common;
    let m = RunManifest::with_grid("analyze", c, DEFAULT_GRID, json!({ "stationary_out": a.stationary_out }))?;
    let (target, scores) = exact_setup(&m)?;
    let rows = points(&m)
        .into_par_iter()
        .map(|p| analyze_point(&m.model, &target, &scores, p, true))
        .collect::<Result<Vec<_>>>()?;
    match m.format {
        Format::Json => {
            let results = json!({ "target": target.values(), "points": rows });
            emit(m.out.as_deref(), &json_bytes(&m, results)?)?;
        }
        Format::Csv => {
            emit(m.out.as_deref(), &csv_bytes(&POINT_HEADER, rows.iter().map(PointReport::csv))?)?;
            if let Some(path) = &a.stationary_out {
                let d = m.model.dim();
                let mut lines = Vec::new();
                for r in &rows {
                    let pi = r.stationary.as_deref().unwrap_or_default();
                    for (k, (&s, &p)) in pi.iter().zip(target.values()).enumerate() {
                        lines.push(vec![
                            num(r.eta),
                            r.sampler.to_string(),
                            r.score.map(|k| k.to_string()).unwrap_or_default(),
                            k.to_string(),
                            BitState::from_index_unchecked(k, d).to_hex(),
                            num(p),
                            num(s),
                        ]);
                    }
                }
                let header = ["eta", "sampler", "score", "index", "state_hex", "target", "stationary"];
                emit(Some(path), &csv_bytes(&header, lines)?)?;
            }
        }
    }
    Ok(())
}

pub fn sweep(a: &CommonArgs) -> std::result::Result<(), CliError> {
    let m = RunManifest::with_grid("sweep", a, DEFAULT_GRID, json!({}))?;
    let (target, scores) = exact_setup(&m)?;
    let results: Vec<(Point, Result<PointReport>)> = points(&m)
        .into_par_iter()
        .map(|p| (p, analyze_point(&m.model, &target, &scores, p, false)))
        .collect();
    let mut rows = Vec::new();
    for (p, r) in results {
        match r {
            Ok(row) => rows.push(row),
            // a sampler's own step-size constraint removes that point only
            Err(Error::Parameter(msg)) => {
                eprintln!("skipped {} at eta={}: {msg}", p.sampler, p.eta)
            }
            Err(e) => return Err(e.into()),
        }
    }
    let bytes = match m.format {
        Format::Json => json_bytes(&m, &rows)?,
        Format::Csv => csv_bytes(&POINT_HEADER, rows.iter().map(PointReport::csv))?,
    };
    emit(m.out.as_deref(), &bytes)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    eta: f64,
    certificate: &'static str,
    sampler: Sampler,
    score: Option<ScoreKind>,
    status: Status,
    observed: Option<f64>,
    bound: Option<f64>,
    reason: String,
}

enum Quantity {
    Kappa,
    Distance,
}

fn check_point(
    model: &TargetModel,
    target: &DistVector,
    scores: &BTreeMap<&'static str, ScoreField>,
    p: Point,
) -> Result<Vec<CheckRow>> {
    let rep = report_for(model, p)?;
    let certs: Vec<(&'static str, Bound, Quantity)> = rep
        .rate_bounds_for(p.sampler)
        .into_iter()
        .map(|(n, b)| (n, b, Quantity::Kappa))
        .chain(rep.error_bounds_for(p.sampler).into_iter().map(|(n, b)| (n, b, Quantity::Distance)))
        .collect();
    if certs.is_empty() {
        return Ok(vec![]);
    }
    let row = |certificate, status, observed, bound, reason: String| CheckRow {
        eta: p.eta,
        certificate,
        sampler: p.sampler,
        score: p.score,
        status,
        observed,
        bound,
        reason,
    };
    let s = p.score.map(|k| &scores[k.name()]);
    let t = match kernel_matrix(p.sampler, model, s, p.eta) {
        Ok(t) => t,
        Err(Error::Parameter(msg)) => {
            return Ok(certs
                .into_iter()
                .map(|(n, b, _)| row(n, Status::Skipped, None, Some(b.value), format!("kernel undefined: {msg}")))
                .collect())
        }
        Err(e) => return Err(e),
    };
    let mut kappa = None;
    let mut distance = None;
    let mut out = Vec::new();
    for (name, b, q) in certs {
        let unmet = rep.unmet_preconditions(name).unwrap_or_default();
        if !unmet.is_empty() {
            out.push(row(name, Status::Skipped, None, Some(b.value), format!("precondition unmet: {}", unmet.join("; "))));
            continue;
        }
        let observed = match q {
            Quantity::Kappa => {
                if model.dim() > CERTIFICATE_DIM_CAP {
                    out.push(row(
                        name,
                        Status::Skipped,
                        None,
                        Some(b.value),
                        format!("contraction certificate requires d <= {CERTIFICATE_DIM_CAP}"),
                    ));
                    continue;
                }
                if kappa.is_none() {
                    kappa = Some(contraction_certificate(&t)?.kappa);
                }
                kappa.unwrap()
            }
            Quantity::Distance => {
                if distance.is_none() {
                    distance = Some(wasserstein_hamming(&stationary(&t)?, target)?);
                }
                distance.unwrap()
            }
        };
        let ok = observed <= b.value + CERT_SLACK;
        let reason = if b.vacuous { "vacuous bound".to_string() } else { String::new() };
        out.push(row(name, if ok { Status::Pass } else { Status::Fail }, Some(observed), Some(b.value), reason));
    }
    Ok(out)
}

pub fn check(a: &CommonArgs) -> std::result::Result<(), CliError> {
    let m = RunManifest::with_grid("check", a, ("all", "all"), json!({ "slack": CERT_SLACK }))?;
    let (target, scores) = exact_setup(&m)?;
    let rows: Vec<CheckRow> = points(&m)
        .into_par_iter()
        .map(|p| check_point(&m.model, &target, &scores, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let bytes = match m.format {
        Format::Json => json_bytes(&m, &rows)?,
        Format::Csv => {
            let header = ["eta", "certificate", "sampler", "score", "status", "observed", "bound", "reason"];
            csv_bytes(
                &header,
                rows.iter().map(|r| {
                    vec![
                        num(r.eta),
                        r.certificate.to_string(),
                        r.sampler.to_string(),
                        r.score.map(|k| k.to_string()).unwrap_or_default(),
                        serde_json::to_value(&r.status).unwrap().as_str().unwrap().to_string(),
                        opt_num(r.observed),
                        opt_num(r.bound),
                        r.reason.clone(),
                    ]
                }),
            )?
        }
    };
    emit(m.out.as_deref(), &bytes)?;
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| {
            format!(
                "  {} ({}{}) on {} at eta={}: observed {} > bound {}",
                r.certificate,
                r.sampler,
                r.score.map(|k| format!("/{k}")).unwrap_or_default(),
                m.model.label(),
                r.eta,
                opt_num(r.observed),
                opt_num(r.bound)
            )
        })
        .collect();
    let (pass, skipped) = rows.iter().fold((0, 0), |(p, s), r| match r.status {
        Status::Pass => (p + 1, s),
        Status::Skipped => (p, s + 1),
        Status::Fail => (p, s),
    });
    eprintln!("{pass} passed, {} failed, {skipped} skipped", failures.len());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Certificate(failures.join("\n")))
    }
}

#[derive(Serialize)]
struct SimRow<'a> {
    eta: f64,
    sampler: Sampler,
    score: Option<ScoreKind>,
    #[serde(flatten)]
    stats: &'a ChainStats,
}

pub fn simulate(a: &SimulateArgs) -> std::result::Result<(), CliError> {
    let mode = json!({
        "steps": a.steps,
        "burn_in": a.burn_in,
        "thinning": a.thinning,
        "chains": a.chains,
        "dump": a.dump,
        "dump_limit": a.dump_limit,
    });
    let m = RunManifest::with_grid("simulate", &a.common, DEFAULT_GRID, mode)?;
    let mut runs = Vec::new();
    for p in points(&m) {
        let mut cfg = ChainConfig::new(p.sampler, m.model, p.score, p.eta);
        cfg.steps = a.steps;
        cfg.burn_in = a.burn_in;
        cfg.thinning = a.thinning;
        cfg.chains = a.chains;
        cfg.seed = m.seed;
        cfg.dump_limit = if a.dump.is_some() { a.dump_limit } else { 0 };
        let res = run_chain(&cfg)?;
        // timing is machine-dependent, so it stays out of the output files
        eprintln!(
            "{} eta={}: {:.3}s, {:.0} steps/s",
            p.sampler, p.eta, res.wall_seconds, res.steps_per_second
        );
        runs.push((p, res));
    }
    let rows: Vec<SimRow> = runs
        .iter()
        .flat_map(|(p, r)| {
            r.chains.iter().map(move |stats| SimRow {
                eta: p.eta,
                sampler: p.sampler,
                score: p.score,
                stats,
            })
        })
        .collect();
    let join_u = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
    let bytes = match m.format {
        Format::Json => json_bytes(&m, &rows)?,
        Format::Csv => {
            let header = [
                "eta",
                "sampler",
                "score",
                "chain",
                "samples",
                "mean_magnetization",
                "acceptance",
                "marginals",
                "histogram",
            ];
            csv_bytes(
                &header,
                rows.iter().map(|r| {
                    vec![
                        num(r.eta),
                        r.sampler.to_string(),
                        r.score.map(|k| k.to_string()).unwrap_or_default(),
                        r.stats.chain.to_string(),
                        r.stats.samples.to_string(),
                        num(r.stats.mean_magnetization),
                        num(r.stats.acceptance),
                        r.stats.marginals.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";"),
                        join_u(&r.stats.histogram),
                    ]
                }),
            )?
        }
    };
    emit(m.out.as_deref(), &bytes)?;
    if let Some(path) = &a.dump {
        let header = ["eta", "sampler", "score", "chain", "step", "state_hex", "magnetization"];
        let lines = rows.iter().flat_map(|r| {
            r.stats.dump.iter().map(move |d| {
                vec![
                    num(r.eta),
                    r.sampler.to_string(),
                    r.score.map(|k| k.to_string()).unwrap_or_default(),
                    r.stats.chain.to_string(),
                    d.step.to_string(),
                    d.state_hex.clone(),
                    num(d.magnetization),
                ]
            })
        });
        emit(Some(path), &csv_bytes(&header, lines)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryReport {
    trajectory: usize,
    jumps: usize,
    times: Vec<f64>,
    states: Vec<String>,
    /// Time-weighted state occupation (small `d` only).
    occupation: Option<Vec<f64>>,
}

pub fn ctmc(a: &CtmcArgs) -> std::result::Result<(), CliError> {
    let mode = json!({ "horizon": a.horizon, "trajectories": a.trajectories, "start": a.start, "rates": "glauber" });
    let m = RunManifest::new("ctmc", &a.model, &a.output, mode)?;
    if a.trajectories == 0 {
        return Err(Error::Parameter("trajectories must be >= 1".into()).into());
    }
    let d = m.model.dim();
    let x0 = match a.start {
        Start::Minus => BitState::all_minus(d),
        Start::Plus => BitState::all_plus(d),
    };
    let trajectories = (0..a.trajectories)
        .into_par_iter()
        .map(|k| ctmc_simulate(glauber_rates(&m.model), &x0, a.horizon, &mut chain_rng(m.seed, k)))
        .collect::<Result<Vec<Trajectory>>>()?;
    let bytes = match m.format {
        Format::Json => {
            let reports = trajectories
                .iter()
                .enumerate()
                .map(|(k, tr)| {
                    Ok(TrajectoryReport {
                        trajectory: k,
                        jumps: tr.jumps(),
                        times: tr.times.clone(),
                        states: tr.states.iter().map(BitState::to_hex).collect(),
                        occupation: if d <= DENSE_DIM_CAP { Some(tr.occupation()?) } else { None },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            json_bytes(&m, reports)?
        }
        Format::Csv => {
            let header = ["trajectory", "time", "state_hex", "magnetization"];
            let lines = trajectories.iter().enumerate().flat_map(|(k, tr)| {
                tr.times.iter().zip(&tr.states).map(move |(t, x)| {
                    vec![k.to_string(), num(*t), x.to_hex(), num(x.magnetization())]
                })
            });
            csv_bytes(&header, lines)?
        }
    };
    emit(m.out.as_deref(), &bytes)
}

/// Flattens a report into `(name, value, applies, vacuous)` rows in field order.
fn bound_rows(rep: &BoundReport) -> Vec<[String; 4]> {
    let v = serde_json::to_value(rep).expect("report serializes");
    let mut out = Vec::new();
    let obj = v.as_object().expect("report is an object");
    for (key, val) in obj {
        match val {
            serde_json::Value::Number(n) if key != "dim" && key != "eta" => {
                out.push([key.clone(), num(n.as_f64().unwrap_or(f64::NAN)), String::new(), String::new()])
            }
            serde_json::Value::Object(o) if key == "flags" => {
                for (f, b) in o {
                    out.push([format!("flags.{f}"), b.to_string(), String::new(), String::new()]);
                }
            }
            serde_json::Value::Object(o) => out.push([
                key.clone(),
                o["value"].as_f64().map(num).unwrap_or_default(),
                o["applies"].to_string(),
                o["vacuous"].to_string(),
            ]),
            _ => {}
        }
    }
    out
}

pub fn bounds(a: &CommonArgs) -> std::result::Result<(), CliError> {
    let m = RunManifest::with_grid("bounds", a, DEFAULT_GRID, json!({}))?;
    let mut reports = Vec::new();
    for &eta in &m.etas {
        for &k in &m.scores {
            reports.push(bounds_report(&m.model, k, eta)?);
        }
    }
    let bytes = match m.format {
        Format::Json => json_bytes(&m, &reports)?,
        Format::Csv => {
            let header = ["eta", "score", "name", "value", "applies", "vacuous"];
            let lines = reports.iter().flat_map(|r| {
                bound_rows(r).into_iter().map(move |[n, v, ap, va]| {
                    vec![num(r.eta), r.score.to_string(), n, v, ap, va]
                })
            });
            csv_bytes(&header, lines)?
        }
    };
    emit(m.out.as_deref(), &bytes)
}
