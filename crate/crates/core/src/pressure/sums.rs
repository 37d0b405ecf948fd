//! Per-word extremal sets and partition sums, and their word averages.

use alloc::format;
use alloc::vec::Vec;

use super::graph::{CandidatePairs, ConflictGraph};
use super::solve::{max_weight_independent, min_weight_dominating, Method, Solution, SolveMode};
use crate::error::{Error, Result};
use crate::naifs::{enumerate_words, Orbits, Schedule, Word, WordMode};
use crate::numeric::{exp, log_mean_exp, round, sqrt};
use crate::par::map_ordered;
use crate::space::{Point, PointCloud, Potential};

/// Golden-ratio increment used to derive per-`n` sampling seeds.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// `P_n` (separated sets, supremum) or `Q_n` (spanning sets, infimum).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum SumKind {
    Separated,
    Spanning,
}

impl SumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SumKind::Separated => "separated",
            SumKind::Spanning => "spanning",
        }
    }
}

/// `s_n` or `r_n` for one word.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalSetResult {
    pub lower_bound: usize,
    pub upper_bound: usize,
    /// Cloud indices of a separated (resp. spanning) set of the reported size.
    pub witness: Vec<usize>,
    pub exact: bool,
    pub method: Method,
}

impl ExtremalSetResult {
    /// The size of the witness: the optimum when `exact`.
    pub fn value(&self) -> usize {
        self.witness.len()
    }
}

/// `P_n(Phi; w, psi, eps)` or `Q_n(Phi; w, psi, eps)`, in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSumResult {
    pub kind: SumKind,
    pub log_value: f64,
    /// Upper bound on `log P_n` or lower bound on `log Q_n`; equals
    /// `log_value` when exact.
    pub log_bound: f64,
    pub word: Word,
    pub n: usize,
    pub witness: Vec<usize>,
    pub exact: bool,
    pub method: Method,
}

impl PartitionSumResult {
    pub fn value(&self) -> f64 {
        exp(self.log_value)
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Epsilon(eps))
    }
}

/// `S_{w,n} psi(x) = sum_{j=0}^{n} psi(f_w^{m,j}(x))`, `m` the start of `w`.
pub fn birkhoff_sum(schedule: &Schedule, w: &Word, n: usize, psi: &Potential, x: &Point) -> Result<f64> {
    if n > w.len() {
        return Err(Error::Word(format!("Birkhoff length {n} exceeds word length {}", w.len())));
    }
    let mut y = *x;
    let mut total = psi.eval(&y)?;
    for j in w.start()..w.start() + n {
        y = schedule.generation(j)[w.symbol_at(j).unwrap() as usize].apply(&y)?;
        total += psi.eval(&y)?;
    }
    Ok(total)
}

/// Orbits of every cloud point along one word, shared by all `eps` and potentials.
#[derive(Clone, Debug)]
pub struct WordInstance<'a> {
    cloud: &'a PointCloud,
    word: Word,
    n: usize,
    orbits: Orbits,
}

impl<'a> WordInstance<'a> {
    /// `n <= |w|` steps along `w`.
    pub fn new(cloud: &'a PointCloud, schedule: &Schedule, word: &Word, n: usize) -> Result<Self> {
        if n > word.len() {
            return Err(Error::Word(format!("horizon {n} exceeds word length {}", word.len())));
        }
        let orbits = Orbits::compute(cloud, schedule, word, n)?;
        Ok(Self { cloud, word: word.clone(), n, orbits })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orbits(&self) -> &Orbits {
        &self.orbits
    }

    /// `S_{w,n} psi` at every cloud point.
    pub fn birkhoff(&self, psi: &Potential) -> Result<Vec<f64>> {
        (0..self.cloud.len()).map(|i| self.orbits.orbit(i).iter().map(|p| psi.eval(p)).sum()).collect()
    }

    /// Edges join `x, y` with `d_{w,n}(x, y) <= eps`.
    pub fn graph(&self, eps: f64) -> Result<ConflictGraph> {
        check_eps(eps)?;
        let metric = self.cloud.metric();
        let candidates = CandidatePairs::new(metric, self.cloud.points(), eps);
        Ok(ConflictGraph::build(self.cloud.len(), |i| candidates.row(i), |i, j| self.orbits.within(metric, i, j, eps)))
    }

    pub fn max_separated(&self, eps: f64, mode: SolveMode) -> Result<ExtremalSetResult> {
        extremal(&self.graph(eps)?, SumKind::Separated, mode)
    }

    pub fn min_spanning(&self, eps: f64, mode: SolveMode) -> Result<ExtremalSetResult> {
        extremal(&self.graph(eps)?, SumKind::Spanning, mode)
    }

    /// Partition sum with vertex log-weights `sums` (normally [`Self::birkhoff`]).
    pub fn partition_sum(&self, kind: SumKind, sums: &[f64], eps: f64, mode: SolveMode) -> Result<PartitionSumResult> {
        self.partition_sum_on(&self.graph(eps)?, kind, sums, mode)
    }

    pub fn partition_sum_on(
        &self,
        g: &ConflictGraph,
        kind: SumKind,
        sums: &[f64],
        mode: SolveMode,
    ) -> Result<PartitionSumResult> {
        let sol = solve(g, kind, sums, mode)?;
        Ok(PartitionSumResult {
            kind,
            log_value: sol.value,
            log_bound: sol.bound,
            word: self.word.clone(),
            n: self.n,
            witness: sol.chosen,
            exact: sol.exact,
            method: sol.method,
        })
    }
}

fn solve(g: &ConflictGraph, kind: SumKind, logw: &[f64], mode: SolveMode) -> Result<Solution> {
    let sol = match kind {
        SumKind::Separated => max_weight_independent(g, logw, mode)?,
        SumKind::Spanning => min_weight_dominating(g, logw, mode)?,
    };
    let valid = match kind {
        SumKind::Separated => g.is_independent(&sol.chosen),
        SumKind::Spanning => g.is_dominating(&sol.chosen),
    };
    assert!(valid, "{} witness failed its defining property", kind.as_str());
    Ok(sol)
}

/// `s_n` (separated) or `r_n` (spanning) on a conflict graph.
pub fn extremal(g: &ConflictGraph, kind: SumKind, mode: SolveMode) -> Result<ExtremalSetResult> {
    let zero = alloc::vec![0.0; g.len()];
    let sol = solve(g, kind, &zero, mode)?;
    let size = sol.chosen.len();
    let bound = if g.is_empty() { 0 } else { round(exp(sol.bound)) as usize };
    let (lower_bound, upper_bound) = match kind {
        SumKind::Separated => (size, bound.max(size)),
        SumKind::Spanning => (bound.min(size), size),
    };
    Ok(ExtremalSetResult { lower_bound, upper_bound, witness: sol.chosen, exact: sol.exact, method: sol.method })
}

/// `s_n(X; w, eps, Phi)` over the whole cloud.
pub fn max_separated(
    cloud: &PointCloud,
    schedule: &Schedule,
    w: &Word,
    n: usize,
    eps: f64,
    mode: SolveMode,
) -> Result<ExtremalSetResult> {
    WordInstance::new(cloud, schedule, w, n)?.max_separated(eps, mode)
}

/// `r_n(X; w, eps, Phi)` over the whole cloud.
pub fn min_spanning(
    cloud: &PointCloud,
    schedule: &Schedule,
    w: &Word,
    n: usize,
    eps: f64,
    mode: SolveMode,
) -> Result<ExtremalSetResult> {
    WordInstance::new(cloud, schedule, w, n)?.min_spanning(eps, mode)
}

/// `P_n(Phi; w, psi, eps)`.
pub fn partition_sum_separated(
    cloud: &PointCloud,
    schedule: &Schedule,
    w: &Word,
    n: usize,
    psi: &Potential,
    eps: f64,
    mode: SolveMode,
) -> Result<PartitionSumResult> {
    let inst = WordInstance::new(cloud, schedule, w, n)?;
    let sums = inst.birkhoff(psi)?;
    inst.partition_sum(SumKind::Separated, &sums, eps, mode)
}

/// `Q_n(Phi; w, psi, eps)`.
pub fn partition_sum_spanning(
    cloud: &PointCloud,
    schedule: &Schedule,
    w: &Word,
    n: usize,
    psi: &Potential,
    eps: f64,
    mode: SolveMode,
) -> Result<PartitionSumResult> {
    let inst = WordInstance::new(cloud, schedule, w, n)?;
    let sums = inst.birkhoff(psi)?;
    inst.partition_sum(SumKind::Spanning, &sums, eps, mode)
}

/// Word-averaged partition sum `(1/#I^{1,n}) sum_w P_n(Phi; w, psi, eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedSum {
    pub n: usize,
    pub eps: f64,
    pub kind: SumKind,
    /// Log of the word average.
    pub log_avg: f64,
    /// Standard error of `log_avg` (delta method); zero when every word was used.
    pub stderr: f64,
    pub mode: WordMode,
    /// Words evaluated.
    pub words: usize,
    /// Every per-word value is exact and every word was used.
    pub exact: bool,
    /// Least reliable solver used across words.
    pub method: Method,
    /// Mean witness size across words.
    pub mean_witness: f64,
}

/// Sampling seed for horizon `n`.
pub fn seed_for(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(SEED_STRIDE)
}

/// All word averages at horizon `n` for every `eps` in `eps_list` and every
/// kind in `kinds`; orbits and Birkhoff sums are computed once per word.
/// Output is ordered by `eps`, then by `kinds`.
#[allow(clippy::too_many_arguments)]
pub fn averaged_sums(
    cloud: &PointCloud,
    schedule: &Schedule,
    n: usize,
    psi: &Potential,
    eps_list: &[f64],
    kinds: &[SumKind],
    word_budget: usize,
    seed: u64,
    mode: SolveMode,
) -> Result<Vec<AveragedSum>> {
    if n == 0 {
        return Err(Error::ZeroParameter("n"));
    }
    for &eps in eps_list {
        check_eps(eps)?;
    }
    psi.validate_on(cloud)?;
    let words = enumerate_words(schedule, 1, n, word_budget, seed_for(seed, n))?;
    let per_word: Vec<Result<Vec<PartitionSumResult>>> = map_ordered(&words.words, |w| {
        let inst = WordInstance::new(cloud, schedule, w, n)?;
        let sums = inst.birkhoff(psi)?;
        let mut out = Vec::with_capacity(eps_list.len() * kinds.len());
        for &eps in eps_list {
            let g = inst.graph(eps)?;
            for &kind in kinds {
                out.push(inst.partition_sum_on(&g, kind, &sums, mode)?);
            }
        }
        Ok(out)
    });
    let per_word: Vec<Vec<PartitionSumResult>> = per_word.into_iter().collect::<Result<_>>()?;
    let count = per_word.len();
    let mut out = Vec::with_capacity(eps_list.len() * kinds.len());
    for (e, &eps) in eps_list.iter().enumerate() {
        for (k, &kind) in kinds.iter().enumerate() {
            let slot = e * kinds.len() + k;
            let results: Vec<&PartitionSumResult> = per_word.iter().map(|r| &r[slot]).collect();
            let logs: Vec<f64> = results.iter().map(|r| r.log_value).collect();
            let log_avg = log_mean_exp(&logs);
            let stderr = match words.mode {
                WordMode::Exact => 0.0,
                WordMode::Sampled => log_stderr(&logs),
            };
            out.push(AveragedSum {
                n,
                eps,
                kind,
                log_avg,
                stderr,
                mode: words.mode,
                words: count,
                exact: words.mode == WordMode::Exact && results.iter().all(|r| r.exact),
                method: results.iter().map(|r| r.method).max().unwrap_or(Method::Exhaustive),
                mean_witness: results.iter().map(|r| r.witness.len() as f64).sum::<f64>() / count as f64,
            });
        }
    }
    Ok(out)
}

/// One word average; see [`averaged_sums`].
#[allow(clippy::too_many_arguments)]
pub fn averaged_partition_sum(
    cloud: &PointCloud,
    schedule: &Schedule,
    n: usize,
    psi: &Potential,
    eps: f64,
    kind: SumKind,
    word_budget: usize,
    seed: u64,
    mode: SolveMode,
) -> Result<AveragedSum> {
    let mut v = averaged_sums(cloud, schedule, n, psi, &[eps], &[kind], word_budget, seed, mode)?;
    Ok(v.remove(0))
}

/// Standard error of `log(mean e^{l_i})` by the delta method.
fn log_stderr(logs: &[f64]) -> f64 {
    let k = logs.len();
    if k < 2 {
        return f64::NAN;
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<f64> = logs.iter().map(|l| exp(l - top)).collect();
    let mean = v.iter().sum::<f64>() / k as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
    sqrt(var / k as f64) / mean
}
