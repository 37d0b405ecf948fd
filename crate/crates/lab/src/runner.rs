//! Dispatches estimate, verify and sweep jobs and writes their files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use naifs_core::naifs::System;
use naifs_core::pressure::{pressure_estimate, PressureCurve};
use naifs_core::space::PointCloud;
use naifs_core::theorems::{
    check_basic_properties, check_conjugacy, check_equicontinuity, check_factor_lower, check_factor_upper,
    check_power_rule, check_truncation_monotonicity, default_proxy_tolerance, BasicParams, EquicontinuityReport,
    InequalityReport, Level, Verdict,
};
use rayon::prelude::*;

use crate::config::{Check, ExperimentConfig, Mode};
use crate::LabError;

/// Command-line overrides of the config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(o) = &self.out {
            config.output_dir = Some(o.clone());
        }
        if let Some(t) = self.tol {
            config.tol = Some(t);
        }
    }
}

/// One verdict row.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub check: Check,
    pub report: InequalityReport,
    /// The report comes from the rerun at doubled horizon and resolution.
    pub escalated: bool,
}

/// What a job produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub records: Vec<Record>,
    pub curves: Vec<PressureCurve>,
    pub equicontinuity: Vec<(String, EquicontinuityReport)>,
}

impl Outcome {
    pub fn violated(&self) -> usize {
        self.records.iter().filter(|r| r.report.verdict == Verdict::Violated).count()
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.report.name == name)
    }
}

pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(config.label()))
}

/// Runs `mode` (the config's own mode when `None`).
pub fn run(config: &ExperimentConfig, mode: Option<Mode>) -> Result<Outcome, LabError> {
    config.validate()?;
    let dir = output_dir(config);
    fs::create_dir_all(&dir)?;
    match mode.unwrap_or(config.mode) {
        Mode::Estimate => estimate(config, &dir),
        Mode::Verify => verify(config, &dir),
        Mode::Sweep => sweep(config, &dir),
    }
}

fn curve_for(config: &ExperimentConfig, system: &System, eps: &[f64]) -> Result<PressureCurve, LabError> {
    config.potential.validate_on(&system.cloud).map_err(|e| LabError::Config(format!("potential: {e}")))?;
    Ok(pressure_estimate(
        &system.cloud,
        &system.schedule,
        &config.potential,
        &config.n_values(),
        eps,
        &config.estimate_options(),
    )?)
}

fn estimate(config: &ExperimentConfig, dir: &Path) -> Result<Outcome, LabError> {
    let system = config.system()?;
    info!("estimating {} on {} points", config.label(), system.cloud.len());
    let curve = curve_for(config, &system, &config.eps_list)?;
    let csv_path = dir.join("pressure_curve.csv");
    write_curve(&csv_path, &curve)?;
    let txt_path = dir.join("estimate.txt");
    fs::write(&txt_path, estimate_text(config, &system.cloud, &curve))?;
    Ok(Outcome { files: vec![csv_path, txt_path], curves: vec![curve], ..Outcome::default() })
}

const CURVE_HEADER: [&str; 13] = [
    "n",
    "eps",
    "kind",
    "log_avg",
    "per_n_value",
    "stderr",
    "word_mode",
    "words",
    "method",
    "exact",
    "mean_witness",
    "resolution_limited",
    "seed",
];

fn write_curve(path: &Path, curve: &PressureCurve) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVE_HEADER)?;
    for e in &curve.entries {
        w.write_record([
            e.n.to_string(),
            e.eps.to_string(),
            e.kind.as_str().to_string(),
            e.log_avg.to_string(),
            e.per_n.to_string(),
            e.stderr.to_string(),
            e.word_mode.as_str().to_string(),
            e.words.to_string(),
            e.method.as_str().to_string(),
            e.exact.to_string(),
            e.mean_witness.to_string(),
            e.resolution_limited.to_string(),
            curve.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn estimate_text(config: &ExperimentConfig, cloud: &PointCloud, curve: &PressureCurve) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", config.label());
    let _ = writeln!(s, "seed: {}", curve.seed);
    let _ = writeln!(s, "space: {} ({} points)", config.space.family_name(), cloud.len());
    let _ = writeln!(s, "n_range: {}..={}", config.n_range[0], config.n_range[1]);
    let _ = writeln!(s, "final_eps: {}", curve.final_eps);
    let _ = writeln!(s, "estimate: {}", curve.estimate);
    let _ = writeln!(s, "limsup_proxy: {}", curve.limsup_proxy);
    if let Some(q) = curve.spanning_estimate {
        let _ = writeln!(s, "spanning_estimate: {q}");
    }
    if let Some(g) = curve.kind_gap() {
        let _ = writeln!(s, "kind_gap: {g}");
    }
    let _ = writeln!(s, "\n{:<12} {:<10} {:>12} {:>12}  fitted_n", "eps", "kind", "slope", "limsup");
    for m in &curve.summaries {
        let slope = m.slope.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let fitted: Vec<String> = m.fitted.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(
            s,
            "{:<12} {:<10} {:>12} {:>12.6}  {}",
            m.eps,
            m.kind.as_str(),
            slope,
            m.limsup_proxy,
            fitted.join(",")
        );
    }
    s
}

fn sweep(config: &ExperimentConfig, dir: &Path) -> Result<Outcome, LabError> {
    let spec = config.sweep.as_ref().ok_or_else(|| LabError::Config("sweep: required in sweep mode".into()))?;
    let resolutions: Vec<Option<usize>> =
        if spec.resolutions.is_empty() { vec![None] } else { spec.resolutions.iter().map(|&r| Some(r)).collect() };
    let eps = spec.eps.clone().unwrap_or_else(|| config.eps_list.clone());
    let mut out = Outcome::default();
    let mut summary = csv::Writer::from_path(dir.join("sweep_summary.csv"))?;
    summary.write_record([
        "resolution",
        "points",
        "eps",
        "estimate",
        "limsup_proxy",
        "spanning_estimate",
        "file",
        "seed",
    ])?;
    for res in resolutions {
        let mut c = config.clone();
        if let Some(r) = res {
            c.space = config.space.with_resolution(r);
        }
        let system = c.system()?;
        for &e in &eps {
            info!("sweep: resolution {:?}, eps {e}", res);
            let curve = curve_for(&c, &system, &[e])?;
            let tag = res.map_or_else(|| "base".to_string(), |r| r.to_string());
            let name = format!("curve_res{tag}_eps{e}.csv");
            let path = dir.join(&name);
            write_curve(&path, &curve)?;
            summary.write_record([
                tag,
                system.cloud.len().to_string(),
                e.to_string(),
                curve.estimate.to_string(),
                curve.limsup_proxy.to_string(),
                curve.spanning_estimate.map_or_else(String::new, |v| v.to_string()),
                name,
                c.seed.to_string(),
            ])?;
            out.files.push(path);
            out.curves.push(curve);
        }
    }
    summary.flush()?;
    out.files.push(dir.join("sweep_summary.csv"));
    Ok(out)
}

enum CheckOutput {
    Reports(Vec<InequalityReport>),
    Modulus(Vec<(String, EquicontinuityReport)>),
}

fn checks_for(config: &ExperimentConfig, system: &System) -> Result<Vec<Check>, LabError> {
    let mut checks = config.checks();
    if config.verify.checks.is_none() {
        // The power rule refuses potentials that go negative.
        let psi = &config.potential;
        if psi.as_constant().is_none() && psi.inf(&system.cloud)? < 0.0 {
            checks.retain(|c| *c != Check::Power);
        }
    }
    Ok(checks)
}

fn run_check(config: &ExperimentConfig, check: Check) -> Result<CheckOutput, LabError> {
    let system = config.system()?;
    let (cloud, schedule) = (&system.cloud, &system.schedule);
    let settings = config.proxy_settings();
    let v = &config.verify;
    let factor = || -> Result<_, LabError> {
        config
            .factor_map()?
            .ok_or_else(|| LabError::Config("verify.checks: factor checks need a `factor` section".into()))
    };
    let reports = match check {
        Check::Basic => {
            let eps = v.eps.unwrap_or(*config.eps_list.last().unwrap());
            let n = v.n.unwrap_or(config.n_max().min(4));
            let params = BasicParams { seed: config.seed, solve: config.solve, ..BasicParams::new(eps, n, v.p, v.c) };
            check_basic_properties(cloud, schedule, &config.phi, &config.potential, &params)?
        }
        Check::Power => {
            let [a, b] = v.m_range.unwrap_or([1, (config.n_max() / v.power).max(1)]);
            let m: Vec<usize> = (a..=b).collect();
            check_power_rule(
                cloud,
                schedule,
                &config.potential,
                v.power,
                &m,
                &config.eps_list,
                &config.estimate_options(),
                config.tol,
            )?
        }
        Check::Truncation => {
            let [i, j] = v.truncation;
            check_truncation_monotonicity(cloud, schedule, &config.potential, i, j, &settings)?
        }
        Check::Equicontinuity => {
            let mut rows = vec![("source".to_string(), check_equicontinuity(cloud, schedule, &config.eps_list)?)];
            if let Some((f, _)) = config.factor_map()? {
                let t = f.target();
                rows.push(("target".to_string(), check_equicontinuity(&t.cloud, &t.schedule, &config.eps_list)?));
            }
            return Ok(CheckOutput::Modulus(rows));
        }
        Check::FactorLower => {
            let (f, fc) = factor()?;
            vec![check_factor_lower(&f, &fc.potential, &settings, config.semiconjugacy_tol())?]
        }
        Check::FactorUpper => {
            let (f, fc) = factor()?;
            vec![check_factor_upper(&f, &fc.potential, &settings, fc.fiber_sample, config.semiconjugacy_tol())?]
        }
        Check::Conjugacy => {
            let (f, fc) = factor()?;
            vec![check_conjugacy(&f, &fc.potential, &settings, config.semiconjugacy_tol())?]
        }
    };
    Ok(CheckOutput::Reports(reports))
}

fn verify(config: &ExperimentConfig, dir: &Path) -> Result<Outcome, LabError> {
    let system = config.system()?;
    let checks = checks_for(config, &system)?;
    info!("verifying {}: {:?}", config.label(), checks);
    let results: Vec<Result<CheckOutput, LabError>> = checks.par_iter().map(|&c| run_check(config, c)).collect();
    let mut out = Outcome::default();
    for (&check, result) in checks.iter().zip(results) {
        match result? {
            CheckOutput::Reports(reports) => {
                out.records.extend(reports.into_iter().map(|report| Record { check, report, escalated: false }))
            }
            CheckOutput::Modulus(rows) => out.equicontinuity.extend(rows),
        }
    }
    if config.verify.escalate {
        escalate(config, &mut out)?;
    }
    let verdicts = dir.join("verdicts.csv");
    write_verdicts(&verdicts, &out.records, config.seed)?;
    out.files.push(verdicts);
    if !out.equicontinuity.is_empty() {
        let path = dir.join("equicontinuity.csv");
        write_modulus(&path, &out.equicontinuity, config.seed)?;
        out.files.push(path);
    }
    let summary = dir.join("summary.txt");
    fs::write(&summary, summary_text(config, &system.cloud, &out))?;
    out.files.push(summary);
    Ok(out)
}

/// Reruns every check with a violated proxy report once at doubled `n_max` and
/// resolution, and replaces those reports by their reruns.
fn escalate(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), LabError> {
    let mut pending: Vec<Check> = out
        .records
        .iter()
        .filter(|r| r.report.level == Level::AsymptoticProxy && r.report.verdict == Verdict::Violated)
        .map(|r| r.check)
        .collect();
    pending.sort();
    pending.dedup();
    if pending.is_empty() {
        return Ok(());
    }
    let bigger = config.escalated();
    for check in pending {
        warn!("{}: proxy violation, rerunning at n_max {}", check.as_str(), bigger.n_max());
        let CheckOutput::Reports(reruns) = run_check(&bigger, check)? else { continue };
        for rec in out.records.iter_mut().filter(|r| r.check == check) {
            if rec.report.level != Level::AsymptoticProxy || rec.report.verdict != Verdict::Violated {
                continue;
            }
            if let Some(new) = reruns.iter().find(|n| n.name == rec.report.name) {
                rec.report = new.clone();
                rec.escalated = true;
            }
        }
    }
    Ok(())
}

fn write_verdicts(path: &Path, records: &[Record], seed: u64) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "theorem",
        "level",
        "lhs",
        "rhs",
        "slack",
        "verdict",
        "context",
        "tolerance",
        "check",
        "escalated",
        "diagnostics",
        "seed",
    ])?;
    for r in records {
        let rep = &r.report;
        let diag: Vec<String> = rep.diagnostics.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            rep.name.clone(),
            rep.level.as_str().to_string(),
            rep.lhs.to_string(),
            rep.rhs.to_string(),
            rep.slack.to_string(),
            rep.verdict.as_str().to_string(),
            rep.context.to_string(),
            rep.tolerance.to_string(),
            r.check.as_str().to_string(),
            r.escalated.to_string(),
            diag.join(";"),
            seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_modulus(path: &Path, rows: &[(String, EquicontinuityReport)], seed: u64) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["system", "eps", "delta", "vacuous", "pass", "exhaustive", "points_tested", "seed"])?;
    for (system, rep) in rows {
        for row in &rep.rows {
            w.write_record([
                system.clone(),
                row.eps.to_string(),
                row.delta.to_string(),
                row.vacuous.to_string(),
                rep.pass.to_string(),
                rep.exhaustive.to_string(),
                rep.points_tested.to_string(),
                seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn summary_text(config: &ExperimentConfig, cloud: &PointCloud, out: &Outcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", config.label());
    let _ = writeln!(s, "seed: {}", config.seed);
    let _ = writeln!(s, "space: {} ({} points)", config.space.family_name(), cloud.len());
    let tol = config.tol.unwrap_or_else(|| default_proxy_tolerance(cloud.len(), config.n_max()));
    let _ = writeln!(s, "proxy tolerance: {tol}");
    let _ = writeln!(s);
    let width = out.records.iter().map(|r| r.report.name.len()).max().unwrap_or(7).max(7);
    let _ = writeln!(
        s,
        "{:<width$}  {:<16}  {:>14}  {:>14}  {:>12}  {:<20}  context",
        "theorem", "level", "lhs", "rhs", "slack", "verdict"
    );
    for r in &out.records {
        let rep = &r.report;
        let mark = if r.escalated { " (escalated)" } else { "" };
        let _ = writeln!(
            s,
            "{:<width$}  {:<16}  {:>14.6e}  {:>14.6e}  {:>12.3e}  {:<20}  {}{mark}",
            rep.name,
            rep.level.as_str(),
            rep.lhs,
            rep.rhs,
            rep.slack,
            rep.verdict.as_str(),
            rep.context
        );
    }
    for (system, rep) in &out.equicontinuity {
        let _ = writeln!(s, "\nequicontinuity ({system}): {}", if rep.pass { "pass" } else { "FAIL" });
        for row in &rep.rows {
            let note = if row.vacuous { " (vacuous)" } else { "" };
            let _ = writeln!(s, "  eps {:<12} delta {}{note}", row.eps, row.delta);
        }
    }
    let mut counts = [0usize; 4];
    for r in &out.records {
        counts[r.report.verdict as usize] += 1;
    }
    let _ = writeln!(
        s,
        "\n{} reports: {} holds_exact, {} holds_within_tol, {} inconclusive_inexact, {} violated",
        out.records.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3]
    );
    s
}
