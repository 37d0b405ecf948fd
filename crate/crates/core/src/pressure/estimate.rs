//! Pressure curves over a grid of horizons `n` and scales `eps`.

use alloc::format;
use alloc::vec::Vec;

use super::solve::{Method, SolveMode};
use super::sums::{averaged_sums, SumKind};
use crate::error::{Error, Result};
use crate::naifs::{Schedule, WordMode};
use crate::numeric::ls_slope;
use crate::space::{PointCloud, Potential};

/// Knobs shared by every estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    /// Words per horizon before switching to uniform sampling.
    pub word_budget: usize,
    pub seed: u64,
    pub solve: SolveMode,
    /// An entry is resolution-limited once its mean witness exceeds this
    /// fraction of the cloud.
    pub resolution_fraction: f64,
    pub kinds: Vec<SumKind>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            word_budget: 256,
            seed: 0,
            solve: SolveMode::Auto,
            resolution_fraction: 0.125,
            kinds: alloc::vec![SumKind::Separated, SumKind::Spanning],
        }
    }
}

/// `eps = diameter * 2^-k` for `k = 1..=5`.
pub fn default_eps_list(cloud: &PointCloud) -> Vec<f64> {
    let d = cloud.diameter();
    (1..=5).map(|k| d / (1u32 << k) as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveEntry {
    pub n: usize,
    pub eps: f64,
    pub kind: SumKind,
    /// `log` of the word-averaged sum.
    pub log_avg: f64,
    /// `a_{n,eps} = log_avg / n`.
    pub per_n: f64,
    pub stderr: f64,
    pub word_mode: WordMode,
    pub words: usize,
    pub method: Method,
    pub exact: bool,
    pub mean_witness: f64,
    /// The witnesses use so much of the cloud that the sampled space, not the
    /// dynamics, bounds the count.
    pub resolution_limited: bool,
}

/// Asymptotic proxies for one `(eps, kind)` column.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsSummary {
    pub eps: f64,
    pub kind: SumKind,
    /// Maximum of `a_{n,eps}` over the upper half of the fitted horizons.
    pub limsup_proxy: f64,
    /// Least-squares slope of `log_avg` against `n` over the fitted horizons.
    pub slope: Option<f64>,
    pub fitted: Vec<usize>,
}

impl EpsSummary {
    /// The slope, or the single fitted `a_{n,eps}` when only one horizon is left.
    pub fn estimate(&self) -> f64 {
        self.slope.unwrap_or(self.limsup_proxy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureCurve {
    pub entries: Vec<CurveEntry>,
    pub summaries: Vec<EpsSummary>,
    pub final_eps: f64,
    /// Slope proxy at the smallest `eps`, separated sums when computed.
    pub estimate: f64,
    /// Limsup proxy at the smallest `eps` for the same kind.
    pub limsup_proxy: f64,
    /// Spanning-sum slope at the smallest `eps`, when computed.
    pub spanning_estimate: Option<f64>,
    pub seed: u64,
}

impl PressureCurve {
    pub fn summary(&self, eps: f64, kind: SumKind) -> Option<&EpsSummary> {
        self.summaries.iter().find(|s| s.eps == eps && s.kind == kind)
    }

    /// `|P-based - Q-based|` at the smallest `eps`.
    pub fn kind_gap(&self) -> Option<f64> {
        self.spanning_estimate.map(|q| crate::numeric::fabs(self.estimate - q))
    }
}

pub(crate) fn check_grid(n_range: &[usize], eps_list: &[f64]) -> Result<()> {
    if n_range.is_empty() || n_range.contains(&0) || n_range.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Parameter(format!(
            "n_range must be a nonempty strictly increasing list of positive horizons, got {n_range:?}"
        )));
    }
    if eps_list.is_empty() || eps_list.windows(2).any(|p| p[0] <= p[1]) {
        return Err(Error::Parameter(format!("eps_list must be nonempty and strictly decreasing, got {eps_list:?}")));
    }
    for &eps in eps_list {
        super::sums::check_eps(eps)?;
    }
    Ok(())
}

/// Fits `(n, log value)` points, skipping resolution-limited ones when at
/// least two others remain.
pub(crate) fn fit(points: &[(usize, f64, bool)]) -> (f64, Option<f64>, Vec<usize>) {
    let clean: Vec<&(usize, f64, bool)> = points.iter().filter(|p| !p.2).collect();
    let used: Vec<&(usize, f64, bool)> = if clean.len() >= 2 { clean } else { points.iter().collect() };
    let tail = &used[used.len() / 2..];
    let limsup = tail.iter().map(|p| p.1 / p.0 as f64).fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = used.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1).collect();
    (limsup, ls_slope(&xs, &ys), used.iter().map(|p| p.0).collect())
}

/// Pressure (and, with `psi = 0`, entropy) estimates over `n_range x eps_list`.
pub fn pressure_estimate(
    cloud: &PointCloud,
    schedule: &Schedule,
    psi: &Potential,
    n_range: &[usize],
    eps_list: &[f64],
    opts: &EstimateOptions,
) -> Result<PressureCurve> {
    check_grid(n_range, eps_list)?;
    if opts.kinds.is_empty() {
        return Err(Error::Parameter("at least one sum kind is required".into()));
    }
    if opts.resolution_fraction.is_nan() || opts.resolution_fraction <= 0.0 {
        return Err(Error::Parameter(format!(
            "resolution_fraction must be positive, got {}",
            opts.resolution_fraction
        )));
    }
    let limit = opts.resolution_fraction * cloud.len() as f64;
    let mut entries = Vec::new();
    for &n in n_range {
        let sums =
            averaged_sums(cloud, schedule, n, psi, eps_list, &opts.kinds, opts.word_budget, opts.seed, opts.solve)?;
        for s in sums {
            entries.push(CurveEntry {
                n,
                eps: s.eps,
                kind: s.kind,
                log_avg: s.log_avg,
                per_n: s.log_avg / n as f64,
                stderr: s.stderr,
                word_mode: s.mode,
                words: s.words,
                method: s.method,
                exact: s.exact,
                mean_witness: s.mean_witness,
                resolution_limited: s.mean_witness > limit,
            });
        }
    }
    let mut summaries = Vec::new();
    for &eps in eps_list {
        for &kind in &opts.kinds {
            let points: Vec<(usize, f64, bool)> = entries
                .iter()
                .filter(|e| e.eps == eps && e.kind == kind)
                .map(|e| (e.n, e.log_avg, e.resolution_limited))
                .collect();
            let (limsup_proxy, slope, fitted) = fit(&points);
            summaries.push(EpsSummary { eps, kind, limsup_proxy, slope, fitted });
        }
    }
    let final_eps = *eps_list.last().unwrap();
    let primary = if opts.kinds.contains(&SumKind::Separated) { SumKind::Separated } else { SumKind::Spanning };
    let head = summaries.iter().find(|s| s.eps == final_eps && s.kind == primary).unwrap();
    let (estimate, limsup_proxy) = (head.estimate(), head.limsup_proxy);
    let spanning_estimate =
        summaries.iter().find(|s| s.eps == final_eps && s.kind == SumKind::Spanning).map(EpsSummary::estimate);
    Ok(PressureCurve { entries, summaries, final_eps, estimate, limsup_proxy, spanning_estimate, seed: opts.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naifs::MapSpec;
    use crate::numeric::ln;
    use crate::space::SpaceSpec;
    use alloc::vec;

    #[test]
    fn swap_system_entropy_vanishes() {
        let cloud =
            PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]] })
                .unwrap();
        let s = Schedule::constant(vec![MapSpec::Identity, MapSpec::PermutationTable { table: vec![1, 0] }]).unwrap();
        let ns: Vec<usize> = (1..=8).collect();
        let c = pressure_estimate(&cloud, &s, &Potential::zero(), &ns, &[0.5], &EstimateOptions::default()).unwrap();
        for e in &c.entries {
            assert!((e.per_n - ln(2.0) / e.n as f64).abs() < 1e-12);
        }
        assert_eq!(c.estimate, 0.0);
        assert_eq!(c.spanning_estimate, Some(0.0));
        assert!((c.limsup_proxy - ln(2.0) / 5.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        let cloud = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 8 }).unwrap();
        let s = Schedule::autonomous(MapSpec::Doubling);
        let o = EstimateOptions::default();
        let z = Potential::zero();
        assert!(pressure_estimate(&cloud, &s, &z, &[], &[0.1], &o).is_err());
        assert!(pressure_estimate(&cloud, &s, &z, &[2, 1], &[0.1], &o).is_err());
        assert!(pressure_estimate(&cloud, &s, &z, &[1], &[0.1, 0.2], &o).is_err());
        assert!(pressure_estimate(&cloud, &s, &z, &[1], &[-0.1], &o).is_err());
    }

    #[test]
    fn separated_counts_shrink_with_eps() {
        let cloud = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 48 }).unwrap();
        let s = Schedule::autonomous(MapSpec::Doubling);
        let eps = default_eps_list(&cloud);
        let c =
            pressure_estimate(&cloud, &s, &Potential::zero(), &[1, 2, 3], &eps, &EstimateOptions::default()).unwrap();
        for n in 1..=3 {
            let col: Vec<f64> =
                c.entries.iter().filter(|e| e.n == n && e.kind == SumKind::Separated).map(|e| e.log_avg).collect();
            assert!(col.windows(2).all(|p| p[0] <= p[1]), "{col:?}");
        }
    }
}
