//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines always reach stdout.

use std::fs;
use std::path::Path;
use std::time::Instant;

use naifs_core::naifs::{check_semiconjugacy, enumerate_words, FactorMap, MapSpec, Schedule, System};
use naifs_core::pressure::{
    max_separated, min_spanning, partition_sum_separated, partition_sum_spanning, pressure_estimate, EstimateOptions,
    SolveMode,
};
use naifs_core::space::{PointCloud, Potential, SpaceSpec};
use naifs_core::theorems::{
    check_basic_properties, check_conjugacy, check_power_rule, check_truncation_monotonicity, growth_rate, BasicParams,
    InequalityReport, Level, ProxySettings, Verdict,
};
use naifs_lab::{catalog, parse, run, ExperimentConfig, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: u64 = 200;
const LN2: f64 = std::f64::consts::LN_2;

/// Explicit metric, table maps and potentials, kept alongside the core objects
/// so the oracle can recompute everything from scratch.
struct Instance {
    dist: Vec<Vec<f64>>,
    /// Generations `prefix ++ cycle`, each a list of index tables.
    gens: Vec<Vec<Vec<u32>>>,
    prefix: usize,
    phi: Vec<f64>,
    psi: Vec<f64>,
    cloud: PointCloud,
    schedule: Schedule,
    n: usize,
    eps: f64,
    p: f64,
    c: f64,
}

impl Instance {
    fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.random_range(2..=12usize);
        let mut coords: Vec<(i32, i32)> = Vec::new();
        while coords.len() < size {
            let p = (rng.random_range(0..12), rng.random_range(0..12));
            if !coords.contains(&p) {
                coords.push(p);
            }
        }
        let dist: Vec<Vec<f64>> = coords
            .iter()
            .map(|a| coords.iter().map(|b| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64 / 10.0).collect())
            .collect();
        let prefix = rng.random_range(0..=1usize);
        let cycle = rng.random_range(1..=2usize);
        let mut gens = Vec::new();
        let mut specs = Vec::new();
        for _ in 0..prefix + cycle {
            let maps = rng.random_range(1..=3usize);
            let mut tables = Vec::new();
            let mut gen = Vec::new();
            for _ in 0..maps {
                let mut table: Vec<u32> = (0..size as u32).collect();
                let spec = if rng.random_bool(0.5) {
                    for i in (1..size).rev() {
                        table.swap(i, rng.random_range(0..=i));
                    }
                    MapSpec::PermutationTable { table: table.clone() }
                } else {
                    for t in table.iter_mut() {
                        *t = rng.random_range(0..size as u32);
                    }
                    MapSpec::IndexTable { table: table.clone() }
                };
                tables.push(table);
                gen.push(spec);
            }
            gens.push(tables);
            specs.push(gen);
        }
        let cycle_specs = specs.split_off(prefix);
        let schedule = Schedule::new(specs, cycle_specs).unwrap();
        let cloud = PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: dist.clone() }).unwrap();
        let phi = (0..size).map(|_| rng.random_range(-1.0..1.0)).collect();
        let psi = (0..size).map(|_| rng.random_range(-1.0..1.0)).collect();
        Instance {
            dist,
            gens,
            prefix,
            phi,
            psi,
            cloud,
            schedule,
            n: rng.random_range(1..=4),
            eps: rng.random_range(0.05..2.0),
            p: rng.random_range(0.0..=1.0),
            c: rng.random_range(0.0..3.0),
        }
    }

    fn generation(&self, j: usize) -> &Vec<Vec<u32>> {
        let cycle = self.gens.len() - self.prefix;
        if j <= self.prefix {
            &self.gens[j - 1]
        } else {
            &self.gens[self.prefix + (j - 1 - self.prefix) % cycle]
        }
    }
}

/// Brute-force `s_n`, `r_n`, `log P_n`, `log Q_n` over every subset of the cloud.
struct Oracle {
    s: usize,
    r: usize,
    log_p: f64,
    log_q: f64,
}

fn oracle(inst: &Instance, word: &[u32], n: usize, psi: &[f64], eps: f64) -> Oracle {
    let size = inst.dist.len();
    let orbits: Vec<Vec<usize>> = (0..size)
        .map(|x| {
            let mut orbit = vec![x];
            for (t, &sym) in word.iter().take(n).enumerate() {
                let next = inst.generation(t + 1)[sym as usize][*orbit.last().unwrap()] as usize;
                orbit.push(next);
            }
            orbit
        })
        .collect();
    let close = |a: usize, b: usize| (0..=n).map(|t| inst.dist[orbits[a][t]][orbits[b][t]]).fold(0.0, f64::max) <= eps;
    let birkhoff: Vec<f64> = orbits.iter().map(|o| o.iter().map(|&x| psi[x]).sum()).collect();
    let log_sum = |mask: usize| {
        let members: Vec<f64> = (0..size).filter(|i| mask >> i & 1 == 1).map(|i| birkhoff[i]).collect();
        let m = members.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + members.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    };
    let mut out = Oracle { s: 0, r: usize::MAX, log_p: f64::NEG_INFINITY, log_q: f64::INFINITY };
    for mask in 1usize..1 << size {
        let members: Vec<usize> = (0..size).filter(|i| mask >> i & 1 == 1).collect();
        let separated = members.iter().all(|&a| members.iter().all(|&b| a == b || !close(a, b)));
        let spanning = (0..size).all(|x| members.iter().any(|&y| close(x, y)));
        if separated {
            out.s = out.s.max(members.len());
            out.log_p = out.log_p.max(log_sum(mask));
        }
        if spanning {
            out.r = out.r.min(members.len());
            out.log_q = out.log_q.min(log_sum(mask));
        }
    }
    out
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn finite_n_suite() -> Outcome {
    let start = Instant::now();
    let (mut exact_reports, mut bad) = (0usize, Vec::new());
    for seed in 0..INSTANCES {
        let inst = Instance::random(seed);
        let phi = Potential::ExplicitTable { values: inst.phi.clone() };
        let psi = Potential::ExplicitTable { values: inst.psi.clone() };
        let params = BasicParams { seed, ..BasicParams::new(inst.eps, inst.n, inst.p, inst.c) };
        let mut reports = check_basic_properties(&inst.cloud, &inst.schedule, &phi, &psi, &params).unwrap();
        let abs_psi = Potential::ExplicitTable { values: inst.psi.iter().map(|v| v.abs()).collect() };
        let opts = EstimateOptions { word_budget: 4096, seed, ..EstimateOptions::default() };
        let power =
            check_power_rule(&inst.cloud, &inst.schedule, &abs_psi, 2, &[1, 2], &[inst.eps], &opts, None).unwrap();
        reports.extend(power.into_iter().filter(|r| r.name == "power_rule_spanning"));
        let j = 2 + (seed % 2) as usize;
        let settings = ProxySettings { options: opts.clone(), ..ProxySettings::new(vec![1, 2, 3, 4], vec![inst.eps]) };
        let trunc = check_truncation_monotonicity(&inst.cloud, &inst.schedule, &psi, 1, j, &settings).unwrap();
        reports.extend(trunc.into_iter().filter(|r| r.name == "truncation_counting"));
        for r in reports.iter().filter(|r| r.level == Level::FiniteNExact) {
            exact_reports += 1;
            if r.verdict != Verdict::HoldsExact {
                bad.push(format!("seed {seed} {} {}", r.name, r.verdict.as_str()));
            }
        }
        for r in reports.iter().filter(|r| r.level == Level::AsymptoticProxy) {
            if r.verdict == Verdict::Violated {
                bad.push(format!("seed {seed} {} violated", r.name));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 120.0,
        format!(
            "{INSTANCES} instances, {exact_reports} finite-n reports, {} not holds_exact{}, {secs:.1}s",
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let (mut compared, mut worst, mut mismatches) = (0usize, 0.0f64, Vec::new());
    for seed in 0..INSTANCES {
        let inst = Instance::random(seed);
        let psi = Potential::ExplicitTable { values: inst.psi.clone() };
        let words = enumerate_words(&inst.schedule, 1, inst.n, 8, seed).unwrap().words;
        for w in &words {
            for eps in [inst.eps, inst.eps / 2.0] {
                let want = oracle(&inst, w.symbols(), inst.n, &inst.psi, eps);
                let bb = SolveMode::BranchAndBound;
                let (c, sch, n) = (&inst.cloud, &inst.schedule, inst.n);
                let s = max_separated(c, sch, w, n, eps, bb).unwrap();
                let r = min_spanning(c, sch, w, n, eps, bb).unwrap();
                let p = partition_sum_separated(c, sch, w, n, &psi, eps, bb).unwrap();
                let q = partition_sum_spanning(c, sch, w, n, &psi, eps, bb).unwrap();
                let dp = (p.log_value - want.log_p).abs();
                let dq = (q.log_value - want.log_q).abs();
                worst = worst.max(dp).max(dq);
                let all_exact = s.exact && r.exact && p.exact && q.exact;
                if s.value() != want.s || r.value() != want.r || dp > 1e-12 || dq > 1e-12 || !all_exact {
                    mismatches.push(format!("seed {seed} word {:?} eps {eps}", w.symbols()));
                }
                compared += 1;
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{compared} (word, eps) cases, {} mismatches, max log gap {worst:.1e}{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn bundled(name: &str, dir: &Path) -> ExperimentConfig {
    let mut c = parse(catalog::example(name).unwrap()).unwrap();
    c.output_dir = Some(dir.to_path_buf());
    c
}

fn estimate_from(dir: &Path) -> f64 {
    let text = fs::read_to_string(dir.join("estimate.txt")).unwrap();
    text.lines().find_map(|l| l.strip_prefix("estimate: ")).unwrap().parse().unwrap()
}

fn bundled_estimate(name: &str, target: f64, rel: f64, limit: f64) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run(&bundled(name, dir.path()), Some(Mode::Estimate)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let est = estimate_from(dir.path());
    let err = (est - target).abs() / target;
    outcome(
        err <= rel && secs < limit,
        format!(
            "estimate {est:.4} vs {target:.4}, relative error {:.2}% (limit {:.0}%), {secs:.1}s",
            err * 100.0,
            rel * 100.0
        ),
    )
}

fn swap_sanity() -> Outcome {
    let cloud = PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]] })
        .unwrap();
    let schedule =
        Schedule::constant(vec![MapSpec::Identity, MapSpec::PermutationTable { table: vec![1, 0] }]).unwrap();
    let ns: Vec<usize> = (1..=10).collect();
    let opts = EstimateOptions { word_budget: 1024, ..EstimateOptions::default() };
    let curve = pressure_estimate(&cloud, &schedule, &Potential::zero(), &ns, &[0.9, 0.5, 0.25], &opts).unwrap();
    let mut off = 0;
    for e in &curve.entries {
        if !e.exact || e.word_mode.as_str() != "exact" || e.per_n != LN2 / e.n as f64 {
            off += 1;
        }
    }
    let a10 = curve.entries.iter().filter(|e| e.n == 10).map(|e| e.per_n).fold(0.0, f64::max);
    outcome(
        off == 0 && a10 <= 0.08 && curve.estimate <= 0.08,
        format!(
            "{} entries, {off} differ from log2/n; a_10 = {a10:.4}, slope estimate {:.2e}",
            curve.entries.len(),
            curve.estimate
        ),
    )
}

fn factor_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    // (a) identity conjugacy on the doubling circle.
    let sys = System::new(
        PointCloud::build(&SpaceSpec::CircleGrid { resolution: 1024 }).unwrap(),
        Schedule::autonomous(MapSpec::Doubling),
    )
    .unwrap();
    let phi = Potential::CoordinateAffine { slope: 0.5, intercept: 0.0 };
    let settings = ProxySettings::new((1..=8).collect(), vec![0.125, 0.0625]);
    let a = check_conjugacy(&FactorMap::identity(sys), &phi, &settings, 0.0).unwrap();
    let ok_a = a.slack.abs() <= a.tolerance && a.diagnostic("reverse_slack").unwrap().abs() <= a.tolerance;
    pass &= ok_a;
    notes.push(format!("(a) slack {:.1e} tol {:.3}", a.slack, a.tolerance));
    // (b) shift -> doubling by binary expansion.
    let dir = tempfile::tempdir().unwrap();
    let config = bundled("shift_to_doubling_factor", dir.path());
    let (factor, _) = config.factor_map().unwrap().unwrap();
    let depth = 12;
    let bound = 2f64.powi(config.n_max() as i32 - depth);
    let semi = check_semiconjugacy(&factor, bound).unwrap();
    let out = run(&config, Some(Mode::Verify)).unwrap();
    let lower = out.record("factor_lower").map(|r| r.report.clone());
    let upper = out.record("factor_upper").map(|r| r.report.clone());
    let h = upper.as_ref().and_then(|u| u.diagnostic("fiber_sup_entropy")).unwrap_or(f64::INFINITY);
    let holds = |r: &Option<InequalityReport>| r.as_ref().is_some_and(|r| r.verdict.holds());
    let ok_b = semi.pass && semi.max_deviation <= bound && holds(&lower) && holds(&upper) && h <= 0.1;
    pass &= ok_b;
    notes.push(format!(
        "(b) deviation {:.1e} <= {bound:.1e}, lower slack {:.3}, upper slack {:.3}, H {h:.3}",
        semi.max_deviation,
        lower.map_or(f64::NAN, |r| r.slack),
        upper.map_or(f64::NAN, |r| r.slack)
    ));
    // (c) 4-point permutation source over the 2-point quotient.
    let dir = tempfile::tempdir().unwrap();
    let out = run(&bundled("quotient", dir.path()), Some(Mode::Verify)).unwrap();
    let upper = out.record("factor_upper").unwrap();
    let ok_c = upper.report.verdict.holds()
        && upper.report.diagnostic("fiber_sup_entropy") == Some(0.0)
        && upper.report.diagnostic("fiber_sup_entropy_exact") == Some(1.0);
    pass &= ok_c;
    notes.push(format!(
        "(c) upper {} with H = {:?}",
        upper.report.verdict.as_str(),
        upper.report.diagnostic("fiber_sup_entropy")
    ));
    outcome(pass, notes.join("; "))
}

fn power_rule() -> Outcome {
    let g = |sizes: &[usize]| sizes.iter().map(|&k| (0..k).map(|_| MapSpec::Identity).collect()).collect::<Vec<_>>();
    let schedules = [
        Schedule::new(vec![], g(&[2, 8])).unwrap(),
        Schedule::new(vec![], g(&[3])).unwrap(),
        Schedule::new(g(&[1]), g(&[2, 3])).unwrap(),
        Schedule::new(g(&[5, 2]), g(&[4, 1, 6])).unwrap(),
    ];
    let mut growth_ok = true;
    for s in &schedules {
        for n in 1..=4u64 {
            let lhs = growth_rate(&s.power_system(n as usize).unwrap());
            growth_ok &= lhs == growth_rate(s).times(n);
        }
    }
    let cloud = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 4096 }).unwrap();
    let doubling = Schedule::autonomous(MapSpec::Doubling);
    let reports = check_power_rule(
        &cloud,
        &doubling,
        &Potential::zero(),
        2,
        &[1, 2, 3, 4, 5],
        &[1.0 / 32.0],
        &EstimateOptions::default(),
        None,
    )
    .unwrap();
    let proxy = reports.iter().find(|r| r.name == "power_rule_proxy").unwrap();
    let rel = (proxy.lhs - proxy.rhs).abs() / proxy.rhs;
    outcome(
        growth_ok && rel <= 0.10,
        format!(
            "growth_rate(power n) = n growth_rate for n <= 4: {growth_ok}; doubling: P(Phi^2) {:.4} vs 2 P(Phi) {:.4}, gap {:.2}%",
            proxy.lhs,
            proxy.rhs,
            rel * 100.0
        ),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let (mut compared, mut differing, mut sampled) = (0usize, Vec::new(), false);
    for (name, _) in catalog::EXAMPLES {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run(&bundled(name, a.path()), None).unwrap();
        run(&bundled(name, b.path()), None).unwrap();
        let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
        if fa.is_empty() || fa != fb {
            differing.push(name.to_string());
        }
        sampled |= fa.iter().any(|(_, bytes)| String::from_utf8_lossy(bytes).contains(",sampled,"));
        compared += fa.len();
    }
    outcome(
        differing.is_empty() && sampled,
        format!(
            "{} bundled configs, {compared} CSV files compared, sampled-word mode covered: {sampled}, differing: {:?}",
            catalog::EXAMPLES.len(),
            differing
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("finite-n theorem suite on random instances", finite_n_suite),
        ("oracle equivalence of branch-and-bound", oracle_equivalence),
        ("doubling-map entropy", || bundled_estimate("doubling_circle", LN2, 0.10, 60.0)),
        ("shift pressure with first-symbol potential", || {
            bundled_estimate("shift_pressure", 3f64.ln(), 0.07, f64::INFINITY)
        }),
        ("two-point swap system", swap_sanity),
        ("factor-map suite", factor_suite),
        ("power rule", power_rule),
        ("determinism of bundled configs", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!("criterion {} [{}] {name}: {}", i + 1, if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
