//! Topological sup-entropy `H(Phi; Y)` under the sup-metric `d*_n`.

use alloc::vec::Vec;

use super::estimate::{check_grid, fit, EpsSummary, EstimateOptions};
use super::graph::{CandidatePairs, ConflictGraph};
use super::sums::{extremal, ExtremalSetResult, SumKind};
use crate::error::{Error, Result};
use crate::naifs::{sup_distance_profile, Schedule};
use crate::numeric::ln;
use crate::par::map_ordered;
use crate::space::PointCloud;

#[derive(Clone, Debug, PartialEq)]
pub struct SupEntropyEntry {
    pub n: usize,
    pub eps: f64,
    /// `s*_n(Phi; Y; eps)`.
    pub s_star: ExtremalSetResult,
    /// `r*_n(Phi; Y; eps)`.
    pub r_star: ExtremalSetResult,
    /// `r*_n(Phi; Y; eps/2)`.
    pub r_star_half: ExtremalSetResult,
    /// `r*(eps) <= s*(eps) <= r*(eps/2)`, checked only when all three are exact.
    pub sandwich: Option<bool>,
    pub resolution_limited: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupEntropyCurve {
    pub entries: Vec<SupEntropyEntry>,
    pub summaries: Vec<EpsSummary>,
    pub final_eps: f64,
    pub estimate: f64,
    pub limsup_proxy: f64,
    /// No exact sandwich check failed.
    pub sandwich_holds: bool,
    pub sandwich_checked: usize,
}

type Row = Vec<(u32, Vec<f64>)>;

/// `d*_n` between members of `Y`, for all `n` up to a maximum, restricted to
/// pairs whose base distance is within the largest scale of interest.
pub struct SupMetricTable {
    rows: Vec<Row>,
}

impl SupMetricTable {
    pub fn new(cloud: &PointCloud, schedule: &Schedule, y: &[usize], n_max: usize, reach: f64) -> Result<Self> {
        let pts: Vec<_> = y.iter().map(|&i| cloud.points()[i]).collect();
        let candidates = CandidatePairs::new(cloud.metric(), &pts, reach);
        let idx: Vec<usize> = (0..pts.len()).collect();
        let rows: Vec<Result<Row>> = map_ordered(&idx, |&i| {
            candidates
                .row(i)
                .into_iter()
                .map(|j| Ok((j, sup_distance_profile(schedule, cloud.metric(), n_max, &pts[i], &pts[j as usize])?)))
                .collect()
        });
        Ok(Self { rows: rows.into_iter().collect::<Result<_>>()? })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `d*_n(y_i, y_j)` when the pair was tabulated.
    pub fn get(&self, i: usize, j: usize, n: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let row = &self.rows[a];
        row.binary_search_by_key(&(b as u32), |e| e.0).ok().map(|k| row[k].1[n])
    }

    pub fn graph(&self, n: usize, eps: f64) -> ConflictGraph {
        ConflictGraph::build(
            self.rows.len(),
            |i| self.rows[i].iter().map(|e| e.0).collect(),
            |i, j| self.get(i, j, n).is_some_and(|d| d <= eps),
        )
    }
}

/// `H(Phi; Y)` from `s*_n`, with the `r*`/`s*` sandwich checked on exact entries.
/// `H(Phi; empty) = 0`.
pub fn sup_entropy_estimate(
    cloud: &PointCloud,
    schedule: &Schedule,
    y: &[usize],
    n_range: &[usize],
    eps_list: &[f64],
    opts: &EstimateOptions,
) -> Result<SupEntropyCurve> {
    check_grid(n_range, eps_list)?;
    let mut y: Vec<usize> = y.to_vec();
    y.sort_unstable();
    y.dedup();
    if let Some(&bad) = y.iter().find(|&&i| i >= cloud.len()) {
        return Err(Error::Parameter(alloc::format!("subset index {bad} outside a cloud of {}", cloud.len())));
    }
    let final_eps = *eps_list.last().unwrap();
    if y.is_empty() {
        return Ok(SupEntropyCurve {
            entries: Vec::new(),
            summaries: Vec::new(),
            final_eps,
            estimate: 0.0,
            limsup_proxy: 0.0,
            sandwich_holds: true,
            sandwich_checked: 0,
        });
    }
    let n_max = *n_range.last().unwrap();
    let table = SupMetricTable::new(cloud, schedule, &y, n_max, eps_list[0])?;
    let limit = opts.resolution_fraction * y.len() as f64;
    let mut entries = Vec::new();
    for &n in n_range {
        for &eps in eps_list {
            let g = table.graph(n, eps);
            let s_star = extremal(&g, SumKind::Separated, opts.solve)?;
            let r_star = extremal(&g, SumKind::Spanning, opts.solve)?;
            let r_star_half = extremal(&table.graph(n, eps / 2.0), SumKind::Spanning, opts.solve)?;
            let sandwich = (s_star.exact && r_star.exact && r_star_half.exact)
                .then(|| r_star.value() <= s_star.value() && s_star.value() <= r_star_half.value());
            let resolution_limited = s_star.value() as f64 > limit;
            entries.push(SupEntropyEntry { n, eps, s_star, r_star, r_star_half, sandwich, resolution_limited });
        }
    }
    let summaries: Vec<EpsSummary> = eps_list
        .iter()
        .map(|&eps| {
            let points: Vec<(usize, f64, bool)> = entries
                .iter()
                .filter(|e| e.eps == eps)
                .map(|e| (e.n, ln(e.s_star.value() as f64), e.resolution_limited))
                .collect();
            let (limsup_proxy, slope, fitted) = fit(&points);
            EpsSummary { eps, kind: SumKind::Separated, limsup_proxy, slope, fitted }
        })
        .collect();
    let head = summaries.last().unwrap();
    let checked: Vec<bool> = entries.iter().filter_map(|e| e.sandwich).collect();
    Ok(SupEntropyCurve {
        final_eps,
        estimate: head.estimate(),
        limsup_proxy: head.limsup_proxy,
        summaries,
        sandwich_holds: checked.iter().all(|&b| b),
        sandwich_checked: checked.len(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naifs::MapSpec;
    use crate::space::SpaceSpec;
    use alloc::vec;

    fn swap() -> (PointCloud, Schedule) {
        let cloud =
            PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]] })
                .unwrap();
        let s = Schedule::constant(vec![MapSpec::Identity, MapSpec::PermutationTable { table: vec![1, 0] }]).unwrap();
        (cloud, s)
    }

    #[test]
    fn empty_and_singleton_subsets() {
        let (cloud, s) = swap();
        let o = EstimateOptions::default();
        let ns = [1, 2, 3, 4];
        assert_eq!(sup_entropy_estimate(&cloud, &s, &[], &ns, &[0.5], &o).unwrap().estimate, 0.0);
        let one = sup_entropy_estimate(&cloud, &s, &[1], &ns, &[0.5], &o).unwrap();
        assert_eq!(one.estimate, 0.0);
        assert!(one.entries.iter().all(|e| e.s_star.value() == 1));
    }

    #[test]
    fn swap_pair_keeps_two_points() {
        let (cloud, s) = swap();
        let c =
            sup_entropy_estimate(&cloud, &s, &[0, 1], &[1, 2, 3, 4, 5], &[0.5], &EstimateOptions::default()).unwrap();
        assert!(c.entries.iter().all(|e| e.s_star.value() == 2));
        assert_eq!(c.estimate, 0.0);
        assert!(c.sandwich_holds && c.sandwich_checked == 5);
        assert!((c.limsup_proxy - ln(2.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_on_circle_subset() {
        let cloud = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 24 }).unwrap();
        let s = Schedule::constant(vec![MapSpec::Doubling, MapSpec::Rotation { alpha: 0.125 }]).unwrap();
        let y: Vec<usize> = (0..24).step_by(2).collect();
        let c = sup_entropy_estimate(&cloud, &s, &y, &[1, 2, 3], &[0.25, 0.125], &EstimateOptions::default()).unwrap();
        assert!(c.sandwich_holds);
        assert_eq!(c.sandwich_checked, 6);
    }
}
