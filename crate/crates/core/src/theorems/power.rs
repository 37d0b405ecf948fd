//! Power rule, truncation monotonicity and the index growth rate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{verdict_proxy, verdict_proxy_eq, worst, Bounded, Context, InequalityReport, Level, ProxySettings, Sub};
use crate::error::{Error, Result};
use crate::naifs::{enumerate_words, Schedule, WordMode};
use crate::numeric::ln;
use crate::par::map_ordered;
use crate::pressure::{
    extremal, pressure_estimate, seed_for, CandidatePairs, ConflictGraph, EstimateOptions, SumKind, WordInstance,
};
use crate::space::{PointCloud, Potential};

/// `lim (1/n) sum_{i<=n} log #I^(i)` for an eventually periodic schedule,
/// held exactly as `(sum_p e_p log p) / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRate {
    /// `(prime, exponent)` pairs in increasing prime order.
    exponents: Vec<(u64, u64)>,
    denominator: u64,
}

impl GrowthRate {
    fn normalized(mut exponents: BTreeMap<u64, u64>, denominator: u64) -> Self {
        exponents.retain(|_, e| *e != 0);
        let g = exponents.values().fold(denominator, |g, &e| gcd(g, e));
        if exponents.is_empty() {
            return Self { exponents: Vec::new(), denominator: 1 };
        }
        Self { exponents: exponents.into_iter().map(|(p, e)| (p, e / g)).collect(), denominator: denominator / g }
    }

    pub fn value(&self) -> f64 {
        self.exponents.iter().map(|&(p, e)| e as f64 * ln(p as f64)).sum::<f64>() / self.denominator as f64
    }

    /// Eventually periodic sequences converge, so limsup and liminf agree.
    pub fn limsup_value(&self) -> f64 {
        self.value()
    }

    pub fn liminf_value(&self) -> f64 {
        self.value()
    }

    pub fn exponents(&self) -> &[(u64, u64)] {
        &self.exponents
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// `n` times this rate, exactly.
    pub fn times(&self, n: u64) -> Self {
        Self::normalized(self.exponents.iter().map(|&(p, e)| (p, e * n)).collect(), self.denominator)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn factorize(mut k: u64, into: &mut BTreeMap<u64, u64>) {
    let mut p = 2;
    while p * p <= k {
        while k.is_multiple_of(p) {
            *into.entry(p).or_default() += 1;
            k /= p;
        }
        p += 1;
    }
    if k > 1 {
        *into.entry(k).or_default() += 1;
    }
}

/// The cycle average of `log #I^(j)`; the prefix washes out.
pub fn growth_rate(schedule: &Schedule) -> GrowthRate {
    let mut exps = BTreeMap::new();
    for g in schedule.cycle() {
        factorize(g.len() as u64, &mut exps);
    }
    GrowthRate::normalized(exps, schedule.cycle().len() as u64)
}

fn one_to(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Power-rule reports for `Phi^n`:
/// - `power_rule_spanning`: for every word `w` of length `mn` and its blocked
///   word `w*`, `Q_m(Phi^n; w*, psi, eps) <= Q_{mn}(Phi; w, psi, eps)` (needs
///   `psi >= 0`);
/// - `power_rule_proxy`: `P(Phi^n, psi) <= n P(Phi, psi)` on slope proxies;
/// - `power_rule_constant` (constant `psi` only): `P(Phi^n, n psi) = n P(Phi, psi)`.
///
/// A potential that is negative somewhere is refused unless it is constant,
/// in which case only the equality is checked.
#[allow(clippy::too_many_arguments)]
pub fn check_power_rule(
    cloud: &PointCloud,
    schedule: &Schedule,
    psi: &Potential,
    n: usize,
    m_range: &[usize],
    eps_list: &[f64],
    opts: &EstimateOptions,
    tol: Option<f64>,
) -> Result<Vec<InequalityReport>> {
    if n == 0 {
        return Err(Error::ZeroParameter("n"));
    }
    psi.validate_on(cloud)?;
    let m_max = *m_range.iter().max().ok_or_else(|| Error::Parameter("m_range must not be empty".into()))?;
    let power = schedule.power_system(n)?;
    let constant = psi.as_constant();
    let inf = psi.inf(cloud)?;
    if inf < 0.0 && constant.is_none() {
        return Err(Error::NegativePotential(inf));
    }
    let tol = tol.unwrap_or_else(|| super::default_proxy_tolerance(cloud.len(), n * m_max));
    let base = pressure_estimate(cloud, schedule, psi, &one_to(n * m_max), eps_list, opts)?;
    let proxy_ctx = Context { n: Some(n * m_max), eps: eps_list.last().copied(), word_mode: None, checks: 1 };
    let mut reports = Vec::new();
    if inf >= 0.0 {
        let mut subs = Vec::new();
        let mut mode = WordMode::Exact;
        for &m in m_range {
            let words = enumerate_words(schedule, 1, m * n, opts.word_budget, seed_for(opts.seed, m * n))?;
            if words.mode == WordMode::Sampled {
                mode = WordMode::Sampled;
            }
            let per_word: Vec<Result<Vec<Sub>>> = map_ordered(&words.words, |w| {
                let fine = WordInstance::new(cloud, schedule, w, m * n)?;
                let coarse = WordInstance::new(cloud, &power, &w.blocked(schedule, n)?, m)?;
                let (sf, sc) = (fine.birkhoff(psi)?, coarse.birkhoff(psi)?);
                eps_list
                    .iter()
                    .map(|&eps| {
                        let q_fine = fine.partition_sum(SumKind::Spanning, &sf, eps, opts.solve)?;
                        let q_coarse = coarse.partition_sum(SumKind::Spanning, &sc, eps, opts.solve)?;
                        Ok(Sub::le(Bounded::of(&q_coarse), Bounded::of(&q_fine)))
                    })
                    .collect()
            });
            for r in per_word {
                subs.extend(r?);
            }
        }
        let ctx = Context { n: Some(n), eps: eps_list.last().copied(), word_mode: Some(mode), checks: 0 };
        reports.push(worst("power_rule_spanning", &subs, Level::FiniteNExact, ctx));
        let pow = pressure_estimate(cloud, &power, psi, m_range, eps_list, opts)?;
        let (lhs, rhs) = (pow.estimate, n as f64 * base.estimate);
        reports.push(
            InequalityReport::new(
                "power_rule_proxy",
                lhs,
                rhs,
                verdict_proxy(lhs, rhs, tol),
                Level::AsymptoticProxy,
                proxy_ctx.clone(),
                tol,
            )
            .with("limsup_power", pow.limsup_proxy)
            .with("limsup_base", base.limsup_proxy),
        );
    }
    if let Some(c) = constant {
        let pow = pressure_estimate(cloud, &power, &Potential::constant(n as f64 * c), m_range, eps_list, opts)?;
        let (lhs, rhs) = (pow.estimate, n as f64 * base.estimate);
        reports.push(
            InequalityReport::new(
                "power_rule_constant",
                lhs,
                rhs,
                verdict_proxy_eq(lhs, rhs, tol),
                Level::AsymptoticProxy,
                proxy_ctx,
                tol,
            )
            .with("limsup_power", pow.limsup_proxy)
            .with("limsup_base", base.limsup_proxy),
        );
    }
    Ok(reports)
}

/// Minimal closed-ball `eps`-net of the cloud in the base metric.
fn net_size(cloud: &PointCloud, eps: f64, opts: &EstimateOptions) -> Result<Bounded> {
    let metric = cloud.metric();
    let pts = cloud.points();
    let cand = CandidatePairs::new(metric, pts, eps);
    let g = ConflictGraph::build(cloud.len(), |i| cand.row(i), |i, j| metric.dist(&pts[i], &pts[j]) <= eps);
    let r = extremal(&g, SumKind::Spanning, opts.solve)?;
    Ok(Bounded::count(r.lower_bound, r.upper_bound, r.value(), r.exact))
}

/// Truncation reports for `1 <= i < j`:
/// - `truncation_counting`: for every `k` in `i..j`, `n >= 2` and word `w`,
///   `r_n(w, 2 eps, Phi_k) <= #F' r_{n-1}(w', eps, Phi_{k+1})` with `F'` a
///   minimal `eps`-net and `w'` the tail of `w`;
/// - `truncation_proxy`: `P(Phi_i, psi) <= P(Phi_j, psi)` on slope proxies.
pub fn check_truncation_monotonicity(
    cloud: &PointCloud,
    schedule: &Schedule,
    psi: &Potential,
    i: usize,
    j: usize,
    settings: &ProxySettings,
) -> Result<Vec<InequalityReport>> {
    if i == 0 || i >= j {
        return Err(Error::Parameter(format!("truncation indices need 1 <= i < j, got i = {i}, j = {j}")));
    }
    let opts = &settings.options;
    let ns: Vec<usize> = settings.n_range.iter().copied().filter(|&n| n >= 2).collect();
    if ns.is_empty() {
        return Err(Error::Parameter("the counting inequality needs some n >= 2 in n_range".into()));
    }
    let nets: Vec<Bounded> = settings.eps_list.iter().map(|&e| net_size(cloud, e, opts)).collect::<Result<_>>()?;
    let mut subs = Vec::new();
    let mut mode = WordMode::Exact;
    for k in i..j {
        let (outer, inner) = (schedule.truncate_system(k)?, schedule.truncate_system(k + 1)?);
        for &n in &ns {
            let words = enumerate_words(&outer, 1, n, opts.word_budget, seed_for(opts.seed, n))?;
            if words.mode == WordMode::Sampled {
                mode = WordMode::Sampled;
            }
            let per_word: Vec<Result<Vec<Sub>>> = map_ordered(&words.words, |w| {
                let long = WordInstance::new(cloud, &outer, w, n)?;
                let short = WordInstance::new(cloud, &inner, &w.tail().rerooted(1), n - 1)?;
                settings
                    .eps_list
                    .iter()
                    .zip(&nets)
                    .map(|(&eps, net)| {
                        let a = long.min_spanning(2.0 * eps, opts.solve)?;
                        let b = short.min_spanning(eps, opts.solve)?;
                        Ok(Sub::le(
                            Bounded::count(a.lower_bound, a.upper_bound, a.value(), a.exact),
                            net.plus(Bounded::count(b.lower_bound, b.upper_bound, b.value(), b.exact)),
                        ))
                    })
                    .collect()
            });
            for r in per_word {
                subs.extend(r?);
            }
        }
    }
    let ctx =
        Context { n: ns.last().copied(), eps: settings.eps_list.last().copied(), word_mode: Some(mode), checks: 0 };
    let mut reports = alloc::vec![worst("truncation_counting", &subs, Level::FiniteNExact, ctx)];
    let tol = settings.tolerance(cloud.len());
    let a = pressure_estimate(cloud, &schedule.truncate_system(i)?, psi, &settings.n_range, &settings.eps_list, opts)?;
    let b = pressure_estimate(cloud, &schedule.truncate_system(j)?, psi, &settings.n_range, &settings.eps_list, opts)?;
    reports.push(
        InequalityReport::new(
            "truncation_proxy",
            a.estimate,
            b.estimate,
            verdict_proxy(a.estimate, b.estimate, tol),
            Level::AsymptoticProxy,
            settings.context(),
            tol,
        )
        .with("limsup_i", a.limsup_proxy)
        .with("limsup_j", b.limsup_proxy),
    );
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naifs::MapSpec;
    use crate::space::SpaceSpec;
    use crate::theorems::Verdict;
    use alloc::vec;

    fn ids(k: usize) -> Vec<MapSpec> {
        vec![MapSpec::Identity; k]
    }

    #[test]
    fn growth_rate_examples() {
        assert_eq!(growth_rate(&Schedule::autonomous(MapSpec::Doubling)).value(), 0.0);
        let three = growth_rate(&Schedule::constant(ids(3)).unwrap());
        assert!((three.value() - ln(3.0)).abs() < 1e-15);
        let s = Schedule::new(vec![ids(5)], vec![ids(2), ids(8)]).unwrap();
        let g = growth_rate(&s);
        assert_eq!((g.exponents(), g.denominator()), (&[(2u64, 2u64)][..], 1));
        assert!((g.value() - 2.0 * ln(2.0)).abs() < 1e-15);
        assert_eq!(g.liminf_value(), g.limsup_value());
    }

    #[test]
    fn growth_rate_of_power_is_exact_multiple() {
        let s = Schedule::new(vec![ids(2)], vec![ids(2), ids(3), ids(6)]).unwrap();
        for n in 1..=4 {
            assert_eq!(growth_rate(&s.power_system(n).unwrap()), growth_rate(&s).times(n as u64), "n = {n}");
        }
    }

    fn swap() -> (PointCloud, Schedule) {
        let cloud =
            PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]] })
                .unwrap();
        let s = Schedule::constant(vec![MapSpec::Identity, MapSpec::PermutationTable { table: vec![1, 0] }]).unwrap();
        (cloud, s)
    }

    #[test]
    fn swap_power_rule_holds_exactly() {
        let (cloud, s) = swap();
        let psi = Potential::ExplicitTable { values: vec![0.2, 0.5] };
        let r = check_power_rule(&cloud, &s, &psi, 2, &[1, 2, 3], &[0.5], &EstimateOptions::default(), None).unwrap();
        assert_eq!(r[0].name, "power_rule_spanning");
        assert_eq!(r[0].verdict, Verdict::HoldsExact);
        assert_eq!(r[0].context.checks, 4 + 16 + 64);
        assert!(r[1].verdict.holds());
    }

    #[test]
    fn power_one_is_identical() {
        let (cloud, s) = swap();
        let r = check_power_rule(&cloud, &s, &Potential::zero(), 1, &[1, 2], &[0.5], &EstimateOptions::default(), None)
            .unwrap();
        assert_eq!(r[0].slack, 0.0);
        assert_eq!(r[1].slack, 0.0);
        assert_eq!(r[2].name, "power_rule_constant");
        assert_eq!(r[2].slack, 0.0);
    }

    #[test]
    fn negative_potential_is_refused() {
        let (cloud, s) = swap();
        let psi = Potential::ExplicitTable { values: vec![-0.2, 0.5] };
        let e = check_power_rule(&cloud, &s, &psi, 2, &[1], &[0.5], &EstimateOptions::default(), None).unwrap_err();
        assert!(matches!(e, Error::NegativePotential(_)));
        let r = check_power_rule(
            &cloud,
            &s,
            &Potential::constant(-1.0),
            2,
            &[1, 2],
            &[0.5],
            &EstimateOptions::default(),
            None,
        )
        .unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn expanding_prefix_then_identity() {
        let cloud = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 16 }).unwrap();
        let s = Schedule::new(vec![vec![MapSpec::Doubling]], vec![vec![MapSpec::Identity]]).unwrap();
        let settings = ProxySettings::new(vec![2, 3, 4], vec![0.125]);
        let r = check_truncation_monotonicity(&cloud, &s, &Potential::zero(), 1, 2, &settings).unwrap();
        assert_eq!(r[0].verdict, Verdict::HoldsExact);
        assert!(r[1].verdict.holds(), "{:?}", r[1]);
        assert!(r[1].lhs.abs() < 1e-12 && r[1].rhs.abs() < 1e-12);
    }

    #[test]
    fn truncation_indices_are_checked() {
        let (cloud, s) = swap();
        let settings = ProxySettings::new(vec![2], vec![0.5]);
        assert!(check_truncation_monotonicity(&cloud, &s, &Potential::zero(), 2, 2, &settings).is_err());
        assert!(check_truncation_monotonicity(&cloud, &s, &Potential::zero(), 0, 2, &settings).is_err());
    }
}
