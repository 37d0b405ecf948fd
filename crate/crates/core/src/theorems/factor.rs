//! Factor-map pressure inequalities and the equicontinuity modulus.

use alloc::vec::Vec;

use super::{verdict_proxy, verdict_proxy_eq, InequalityReport, Level, ProxySettings};
use crate::error::{Error, Result};
use crate::naifs::{check_semiconjugacy, FactorMap, MapSpec, Schedule};
use crate::numeric::fabs;
use crate::par::map_ordered;
use crate::pressure::{pressure_estimate, sup_entropy_estimate, CandidatePairs};
use crate::space::{Point, PointCloud, Potential};

/// Clouds up to this size are checked on every pair; larger ones on an
/// evenly strided subsample of this many points.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 1024;

/// Dyadic steps tried below `eps` when searching for `delta`.
const LADDER: u32 = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusRow {
    pub eps: f64,
    /// Largest `eps * 2^-k` (`k <= 30`) with `d(x,y) < delta => d(fx, fy) < eps`
    /// on every tested pair and map; zero when none works.
    pub delta: f64,
    /// No tested pair is closer than `delta`, so the implication held trivially.
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquicontinuityReport {
    pub rows: Vec<ModulusRow>,
    pub pass: bool,
    pub exhaustive: bool,
    pub points_tested: usize,
    pub pairs_tested: usize,
}

/// Empirical modulus `delta(eps)` for every map of every generation in one
/// prefix-plus-cycle horizon.
pub fn check_equicontinuity(cloud: &PointCloud, schedule: &Schedule, eps_list: &[f64]) -> Result<EquicontinuityReport> {
    for &eps in eps_list {
        crate::pressure::check_eps(eps)?;
    }
    let n = cloud.len();
    let sample: Vec<usize> = if n <= EXHAUSTIVE_PAIR_LIMIT {
        (0..n).collect()
    } else {
        (0..EXHAUSTIVE_PAIR_LIMIT).map(|k| k * n / EXHAUSTIVE_PAIR_LIMIT).collect()
    };
    let maps: Vec<&MapSpec> = (1..=schedule.horizon()).flat_map(|j| schedule.generation(j).iter()).collect();
    let metric = cloud.metric();
    let pts: Vec<Point> = sample.iter().map(|&i| cloud.points()[i]).collect();
    let images: Vec<Vec<Point>> =
        maps.iter().map(|f| pts.iter().map(|x| f.apply(x)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    let rows: Vec<usize> = (0..pts.len()).collect();
    // For each eps: the closest pair whose image distance reaches eps, and
    // the closest pair overall.
    let per_row: Vec<(Vec<f64>, f64)> = map_ordered(&rows, |&a| {
        let mut bad = alloc::vec![f64::INFINITY; eps_list.len()];
        let mut closest = f64::INFINITY;
        for b in a + 1..pts.len() {
            let d = metric.dist(&pts[a], &pts[b]);
            closest = closest.min(d);
            let spread = images.iter().map(|im| metric.dist(&im[a], &im[b])).fold(0.0, f64::max);
            for (k, &eps) in eps_list.iter().enumerate() {
                // Pairs the maps do not stretch beyond rounding are never counted.
                if spread >= eps * (1.0 - 1e-12) && spread > d + 1e-12 * eps {
                    bad[k] = bad[k].min(d);
                }
            }
        }
        (bad, closest)
    });
    let closest = per_row.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let rows: Vec<ModulusRow> = eps_list
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let limit = per_row.iter().map(|r| r.0[k]).fold(f64::INFINITY, f64::min);
            let delta = (0..=LADDER).map(|s| eps / (1u64 << s) as f64).find(|&d| d <= limit).unwrap_or(0.0);
            ModulusRow { eps, delta, vacuous: delta > 0.0 && delta <= closest }
        })
        .collect();
    let m = pts.len();
    Ok(EquicontinuityReport {
        pass: rows.iter().all(|r| r.delta > 0.0),
        rows,
        exhaustive: n <= EXHAUSTIVE_PAIR_LIMIT,
        points_tested: m,
        pairs_tested: m * m.saturating_sub(1) / 2,
    })
}

/// `var(phi, delta) = sup { |phi(x) - phi(y)| : d(x, y) <= delta }` over the cloud.
pub fn oscillation(cloud: &PointCloud, phi: &Potential, delta: f64) -> Result<f64> {
    let values = phi.values_on(cloud)?;
    let metric = cloud.metric();
    let pts = cloud.points();
    let cand = CandidatePairs::new(metric, pts, delta);
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in cand.row(i) {
            let j = j as usize;
            if metric.dist(&pts[i], &pts[j]) <= delta {
                best = best.max(fabs(values[i] - values[j]));
            }
        }
    }
    Ok(best)
}

fn require_semiconjugacy(factor: &FactorMap, tol: f64) -> Result<f64> {
    let r = check_semiconjugacy(factor, tol)?;
    if r.pass {
        Ok(r.max_deviation)
    } else {
        Err(Error::Semiconjugacy { deviation: r.max_deviation, surjective: r.surjective })
    }
}

fn factor_tolerance(factor: &FactorMap, settings: &ProxySettings) -> f64 {
    settings.tolerance(factor.source().cloud.len().max(factor.target().cloud.len()))
}

/// `factor_lower`: `P(Psi, phi) <= P(Phi, phi o pi)` on slope proxies, after
/// the semiconjugacy check passes at `semiconjugacy_tol`.
pub fn check_factor_lower(
    factor: &FactorMap,
    phi: &Potential,
    settings: &ProxySettings,
    semiconjugacy_tol: f64,
) -> Result<InequalityReport> {
    let deviation = require_semiconjugacy(factor, semiconjugacy_tol)?;
    let (src, tgt) = (factor.source(), factor.target());
    let pulled = factor.pullback(phi)?;
    let lhs =
        pressure_estimate(&tgt.cloud, &tgt.schedule, phi, &settings.n_range, &settings.eps_list, &settings.options)?;
    let rhs = pressure_estimate(
        &src.cloud,
        &src.schedule,
        &pulled,
        &settings.n_range,
        &settings.eps_list,
        &settings.options,
    )?;
    let tol = factor_tolerance(factor, settings);
    Ok(InequalityReport::new(
        "factor_lower",
        lhs.estimate,
        rhs.estimate,
        verdict_proxy(lhs.estimate, rhs.estimate, tol),
        Level::AsymptoticProxy,
        settings.context(),
        tol,
    )
    .with("semiconjugacy_deviation", deviation)
    .with("limsup_target", lhs.limsup_proxy)
    .with("limsup_source", rhs.limsup_proxy))
}

/// `factor_upper`: `P(Phi, phi o pi) <= P(Psi, phi) + sup_y H(Phi; pi^-1 y)`
/// on slope proxies. The fiber term is the largest sup-entropy over up to
/// `fiber_sample` fibers, largest fibers first. Both systems must pass the
/// equicontinuity check on `eps_list`. The oscillation of `phi o pi` at twice
/// the smallest scale is recorded as `var_phi_pi_2eps`.
pub fn check_factor_upper(
    factor: &FactorMap,
    phi: &Potential,
    settings: &ProxySettings,
    fiber_sample: usize,
    semiconjugacy_tol: f64,
) -> Result<InequalityReport> {
    let deviation = require_semiconjugacy(factor, semiconjugacy_tol)?;
    let (src, tgt) = (factor.source(), factor.target());
    for sys in [src, tgt] {
        let eq = check_equicontinuity(&sys.cloud, &sys.schedule, &settings.eps_list)?;
        if let Some(row) = eq.rows.iter().find(|r| r.delta <= 0.0) {
            return Err(Error::NotEquicontinuous { eps: row.eps });
        }
    }
    let fibers = factor.fibers()?;
    let mut order: Vec<usize> = (0..fibers.members.len()).collect();
    order.sort_by(|&a, &b| fibers.members[b].len().cmp(&fibers.members[a].len()).then(a.cmp(&b)));
    order.truncate(fiber_sample.max(1));
    let mut h_term: f64 = 0.0;
    let mut h_exact = true;
    for &y in &order {
        let curve = sup_entropy_estimate(
            &src.cloud,
            &src.schedule,
            &fibers.members[y],
            &settings.n_range,
            &settings.eps_list,
            &settings.options,
        )?;
        h_exact &= curve.entries.iter().all(|e| e.s_star.exact);
        h_term = h_term.max(curve.estimate);
    }
    let pulled = factor.pullback(phi)?;
    let lhs = pressure_estimate(
        &src.cloud,
        &src.schedule,
        &pulled,
        &settings.n_range,
        &settings.eps_list,
        &settings.options,
    )?;
    let base =
        pressure_estimate(&tgt.cloud, &tgt.schedule, phi, &settings.n_range, &settings.eps_list, &settings.options)?;
    let rhs = base.estimate + h_term;
    let tol = factor_tolerance(factor, settings);
    let eps = *settings.eps_list.last().unwrap();
    let largest = order.first().map_or(0, |&y| fibers.members[y].len());
    Ok(InequalityReport::new(
        "factor_upper",
        lhs.estimate,
        rhs,
        verdict_proxy(lhs.estimate, rhs, tol),
        Level::AsymptoticProxy,
        settings.context(),
        tol,
    )
    .with("fiber_sup_entropy", h_term)
    .with("fiber_sup_entropy_exact", if h_exact { 1.0 } else { 0.0 })
    .with("fibers_sampled", order.len() as f64)
    .with("largest_fiber", largest as f64)
    .with("target_pressure", base.estimate)
    .with("var_phi_pi_2eps", oscillation(&src.cloud, &pulled, 2.0 * eps)?)
    .with("semiconjugacy_deviation", deviation))
}

/// Conjugacy symmetry: across an invertible `pi`, the lower inequality run in
/// both directions forces `P(Psi, phi) = P(Phi, phi o pi)`. The report compares
/// the two sides as an equality; `forward_slack` and `reverse_slack` are the
/// slacks of the two lower inequalities.
pub fn check_conjugacy(
    factor: &FactorMap,
    phi: &Potential,
    settings: &ProxySettings,
    semiconjugacy_tol: f64,
) -> Result<InequalityReport> {
    let inverse = factor
        .projection()
        .inverse()
        .ok_or_else(|| Error::Factor(alloc::format!("{} projection is not invertible", factor.projection().name())))?;
    let reverse = FactorMap::new(factor.target().clone(), factor.source().clone(), inverse)?;
    let forward = check_factor_lower(factor, phi, settings, semiconjugacy_tol)?;
    let back = check_factor_lower(&reverse, &factor.pullback(phi)?, settings, semiconjugacy_tol)?;
    let tol = factor_tolerance(factor, settings);
    Ok(InequalityReport::new(
        "conjugacy_symmetry",
        forward.lhs,
        forward.rhs,
        verdict_proxy_eq(forward.lhs, forward.rhs, tol),
        Level::AsymptoticProxy,
        settings.context(),
        tol,
    )
    .with("forward_slack", forward.slack)
    .with("reverse_slack", back.slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naifs::{Projection, System};
    use crate::space::SpaceSpec;
    use crate::theorems::Verdict;
    use alloc::vec;

    fn circle(n: usize) -> PointCloud {
        PointCloud::build(&SpaceSpec::CircleGrid { resolution: n }).unwrap()
    }

    #[test]
    fn isometries_keep_delta_equal_eps() {
        let s = Schedule::constant(vec![
            MapSpec::Rotation { alpha: 0.25 },
            MapSpec::Rotation { alpha: 0.1 },
            MapSpec::Identity,
        ])
        .unwrap();
        let r = check_equicontinuity(&circle(64), &s, &[0.25, 0.125]).unwrap();
        assert!(r.pass && r.exhaustive);
        assert_eq!(r.rows[0].delta, 0.25);
        assert_eq!(r.rows[1].delta, 0.125);
    }

    #[test]
    fn expanding_maps_halve_delta() {
        let r = check_equicontinuity(&circle(64), &Schedule::autonomous(MapSpec::Doubling), &[0.25, 0.125]).unwrap();
        assert_eq!(r.rows[0].delta, 0.125);
        assert_eq!(r.rows[1].delta, 0.0625);
        let symbolic = PointCloud::build(&SpaceSpec::SymbolicDepth { depth: 8, alphabet_size: 2 }).unwrap();
        let r = check_equicontinuity(&symbolic, &Schedule::autonomous(MapSpec::Shift), &[0.125]).unwrap();
        assert_eq!(r.rows[0].delta, 0.0625);
        let interval = PointCloud::build(&SpaceSpec::IntervalGrid { resolution: 65 }).unwrap();
        let r = check_equicontinuity(&interval, &Schedule::autonomous(MapSpec::Tent), &[0.25]).unwrap();
        assert_eq!(r.rows[0].delta, 0.125);
    }

    #[test]
    fn large_clouds_are_subsampled() {
        let r = check_equicontinuity(&circle(4096), &Schedule::autonomous(MapSpec::Doubling), &[0.125]).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.points_tested, EXHAUSTIVE_PAIR_LIMIT);
        assert_eq!(r.rows[0].delta, 0.0625);
    }

    #[test]
    fn oscillation_of_affine_potential() {
        let phi = Potential::CoordinateAffine { slope: 2.0, intercept: 0.0 };
        let v =
            oscillation(&PointCloud::build(&SpaceSpec::IntervalGrid { resolution: 11 }).unwrap(), &phi, 0.2).unwrap();
        assert!((v - 0.4).abs() < 1e-12);
    }

    fn discrete(n: usize) -> PointCloud {
        let m = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: m }).unwrap()
    }

    #[test]
    fn quotient_has_zero_fiber_entropy() {
        let src = System::new(
            discrete(4),
            Schedule::constant(vec![
                MapSpec::PermutationTable { table: vec![1, 2, 3, 0] },
                MapSpec::PermutationTable { table: vec![2, 3, 0, 1] },
            ])
            .unwrap(),
        )
        .unwrap();
        let tgt = System::new(
            discrete(2),
            Schedule::constant(vec![MapSpec::PermutationTable { table: vec![1, 0] }, MapSpec::Identity]).unwrap(),
        )
        .unwrap();
        let f = FactorMap::new(src, tgt, Projection::IndexTable { table: vec![0, 1, 0, 1] }).unwrap();
        let settings = ProxySettings::new((1..=6).collect(), vec![0.5]);
        let up = check_factor_upper(&f, &Potential::zero(), &settings, 8, 0.0).unwrap();
        assert_eq!(up.verdict, Verdict::HoldsWithinTol);
        assert_eq!(up.diagnostic("fiber_sup_entropy"), Some(0.0));
        assert_eq!(up.diagnostic("fiber_sup_entropy_exact"), Some(1.0));
        let low = check_factor_lower(&f, &Potential::zero(), &settings, 0.0).unwrap();
        assert_eq!((low.lhs, low.rhs), (0.0, 0.0));
    }

    #[test]
    fn identity_conjugacy_is_symmetric() {
        let sys = System::new(circle(64), Schedule::autonomous(MapSpec::Doubling)).unwrap();
        let phi = Potential::CoordinateAffine { slope: 0.5, intercept: 0.0 };
        let r = check_conjugacy(&FactorMap::identity(sys), &phi, &ProxySettings::new(vec![1, 2, 3], vec![0.125]), 0.0)
            .unwrap();
        assert_eq!(r.verdict, Verdict::HoldsWithinTol);
        assert_eq!(r.slack, 0.0);
        assert_eq!(r.diagnostic("reverse_slack"), Some(0.0));
    }

    #[test]
    fn relabelled_permutation_system_is_conjugate() {
        let sys = |t: Vec<u32>| {
            System::new(discrete(3), Schedule::autonomous(MapSpec::PermutationTable { table: t })).unwrap()
        };
        // pi = (0 1): pi o (0->1->2->0) = (1->0->2->1) o pi
        let f = FactorMap::new(sys(vec![1, 2, 0]), sys(vec![2, 0, 1]), Projection::IndexTable { table: vec![1, 0, 2] })
            .unwrap();
        let phi = Potential::ExplicitTable { values: vec![0.1, 0.4, 0.0] };
        let r = check_conjugacy(&f, &phi, &ProxySettings::new(vec![1, 2, 3, 4], vec![0.5]), 0.0).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsWithinTol);
        assert!(r.slack.abs() < 1e-12);
        assert_eq!(Projection::IndexTable { table: vec![0, 0, 1] }.inverse(), None);
    }

    #[test]
    fn broken_semiconjugacy_is_an_error() {
        let sys = |t: Vec<u32>| {
            System::new(discrete(2), Schedule::autonomous(MapSpec::PermutationTable { table: t })).unwrap()
        };
        let f = FactorMap::new(sys(vec![1, 0]), sys(vec![0, 1]), Projection::IndexTable { table: vec![0, 1] }).unwrap();
        let settings = ProxySettings::new(vec![1, 2], vec![0.5]);
        assert!(matches!(check_factor_lower(&f, &Potential::zero(), &settings, 0.0), Err(Error::Semiconjugacy { .. })));
    }
}
