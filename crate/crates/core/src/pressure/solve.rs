//! Maximum-weight independent sets and minimum-weight dominating sets.
//!
//! Weights arrive as logarithms. Exact solvers work on weights shifted by the
//! extreme log-weight; reported values are always recomputed by log-sum-exp
//! over the chosen vertices.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::graph::{bit_indices, ConflictGraph, BITSET_LIMIT};
use crate::error::{Error, Result};
use crate::numeric::{exp, fabs, ln, log_sum_exp, log_sum_exp_of};

/// Largest vertex count handled by exhaustive subset enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Search nodes a branch-and-bound run may visit before it gives up on
/// certifying optimality.
pub const NODE_BUDGET: u64 = 20_000_000;

/// Adjacency lookups the greedy clique cover may spend before the remaining
/// vertices become singleton cliques.
const CLIQUE_BUDGET: u64 = 50_000_000;

/// Requested solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum SolveMode {
    /// Exhaustive up to 20 points, branch-and-bound up to 64, greedy beyond.
    #[default]
    Auto,
    Exhaustive,
    BranchAndBound,
    Greedy,
}

/// Solver that produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Method {
    Exhaustive,
    BranchAndBound,
    Greedy,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::BranchAndBound => "branch_and_bound",
            Method::Greedy => "greedy",
        }
    }
}

impl SolveMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMode::Auto => "auto",
            SolveMode::Exhaustive => "exhaustive",
            SolveMode::BranchAndBound => "branch_and_bound",
            SolveMode::Greedy => "greedy",
        }
    }

    pub fn method_for(&self, points: usize) -> Result<Method> {
        match self {
            SolveMode::Auto if points <= EXHAUSTIVE_LIMIT => Ok(Method::Exhaustive),
            SolveMode::Auto if points <= BITSET_LIMIT => Ok(Method::BranchAndBound),
            SolveMode::Auto | SolveMode::Greedy => Ok(Method::Greedy),
            SolveMode::Exhaustive if points > EXHAUSTIVE_LIMIT => {
                Err(Error::TooLargeForExact { method: "exhaustive", limit: EXHAUSTIVE_LIMIT, points })
            }
            SolveMode::Exhaustive => Ok(Method::Exhaustive),
            SolveMode::BranchAndBound if points > BITSET_LIMIT => {
                Err(Error::TooLargeForExact { method: "branch_and_bound", limit: BITSET_LIMIT, points })
            }
            SolveMode::BranchAndBound => Ok(Method::BranchAndBound),
        }
    }
}

/// A chosen vertex set with its log-weight and a bound on the optimum.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Solution {
    /// Sorted vertex indices.
    pub chosen: Vec<usize>,
    /// `log sum_{i in chosen} e^{logw_i}`.
    pub value: f64,
    /// Upper bound (independent sets) or lower bound (dominating sets) on the
    /// optimal log-weight.
    pub bound: f64,
    pub exact: bool,
    pub method: Method,
}

fn uniform(logw: &[f64]) -> bool {
    logw.windows(2).all(|p| p[0] == p[1])
}

fn close(a: f64, b: f64) -> bool {
    a == b || fabs(a - b) <= 1e-12 * fabs(b).max(1.0)
}

fn mask_of(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

fn finish(g_len: usize, mut chosen: Vec<usize>, logw: &[f64], bound: f64, exact: bool, method: Method) -> Solution {
    chosen.sort_unstable();
    debug_assert!(chosen.iter().all(|&i| i < g_len));
    let value = log_sum_exp_of(logw, &chosen);
    Solution { exact: exact || close(value, bound), bound: if exact { value } else { bound }, chosen, value, method }
}

/// Maximum-weight independent set.
pub(crate) fn max_weight_independent(g: &ConflictGraph, logw: &[f64], mode: SolveMode) -> Result<Solution> {
    let n = g.len();
    let method = mode.method_for(n)?;
    if n == 0 {
        return Ok(Solution {
            chosen: Vec::new(),
            value: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            exact: true,
            method,
        });
    }
    let sol = match (method, g) {
        (Method::Exhaustive, ConflictGraph::Bits { rows }) => {
            let w = shifted(logw, true);
            let set = exhaustive_mis(rows, &w);
            finish(n, set, logw, 0.0, true, method)
        }
        (Method::BranchAndBound, ConflictGraph::Bits { rows }) => {
            let w = shifted(logw, true);
            let start = greedy_mis(g, logw);
            let mut s = MisSearch {
                rows,
                w: &w,
                best: sum_of(&w, &start),
                best_set: mask_of(&start),
                nodes: 0,
                aborted: false,
            };
            s.search(if n == 64 { u64::MAX } else { (1u64 << n) - 1 }, 0.0, 0);
            let set: Vec<usize> = bit_indices(s.best_set).collect();
            if s.aborted {
                let bound = clique_cover_bound(g, logw);
                finish(n, set, logw, bound, false, method)
            } else {
                finish(n, set, logw, 0.0, true, method)
            }
        }
        _ => {
            let set = greedy_mis(g, logw);
            let bound = clique_cover_bound(g, logw);
            finish(n, set, logw, bound, false, Method::Greedy)
        }
    };
    Ok(sol)
}

/// Minimum-weight dominating set (closed neighbourhoods).
pub(crate) fn min_weight_dominating(g: &ConflictGraph, logw: &[f64], mode: SolveMode) -> Result<Solution> {
    let n = g.len();
    let method = mode.method_for(n)?;
    if n == 0 {
        return Ok(Solution {
            chosen: Vec::new(),
            value: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            exact: true,
            method,
        });
    }
    let sol = match (method, g) {
        (Method::Exhaustive, ConflictGraph::Bits { rows }) => {
            let w = shifted(logw, false);
            let set = exhaustive_mds(rows, &w);
            finish(n, set, logw, 0.0, true, method)
        }
        (Method::BranchAndBound, ConflictGraph::Bits { rows }) => {
            let w = shifted(logw, false);
            let closed: Vec<u64> = rows.iter().enumerate().map(|(i, r)| r | 1 << i).collect();
            let start = greedy_mds(g, logw);
            let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mut s = MdsSearch {
                closed: &closed,
                w: &w,
                best: sum_of(&w, &start),
                best_set: mask_of(&start),
                nodes: 0,
                aborted: false,
            };
            s.search(all, all, 0.0, 0);
            let set: Vec<usize> = bit_indices(s.best_set).collect();
            if s.aborted {
                finish(n, set, logw, dominating_lower_bound(g, logw), false, method)
            } else {
                finish(n, set, logw, 0.0, true, method)
            }
        }
        _ => {
            let set = greedy_mds(g, logw);
            finish(n, set, logw, dominating_lower_bound(g, logw), false, Method::Greedy)
        }
    };
    Ok(sol)
}

/// `e^{logw - max}` (independent sets) or `e^{logw - min}` (dominating sets).
fn shifted(logw: &[f64], by_max: bool) -> Vec<f64> {
    let pivot = if by_max {
        logw.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        logw.iter().copied().fold(f64::INFINITY, f64::min)
    };
    logw.iter().map(|&l| exp(l - pivot)).collect()
}

fn sum_of(w: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&i| w[i]).sum()
}

fn exhaustive_mis(rows: &[u64], w: &[f64]) -> Vec<usize> {
    let n = rows.len();
    // total[mask] < 0 marks a dependent subset.
    let mut total = alloc::vec![0.0f64; 1 << n];
    let (mut best, mut best_mask) = (0.0, 0usize);
    for mask in 1usize..1 << n {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        total[mask] = if total[rest] < 0.0 || rows[v] & rest as u64 != 0 { -1.0 } else { total[rest] + w[v] };
        if total[mask] > best {
            best = total[mask];
            best_mask = mask;
        }
    }
    bit_indices(best_mask as u64).collect()
}

fn exhaustive_mds(rows: &[u64], w: &[f64]) -> Vec<usize> {
    let n = rows.len();
    let full = (1u32 << n) - 1;
    let mut cover = alloc::vec![0u32; 1 << n];
    let mut cost = alloc::vec![0.0f64; 1 << n];
    let (mut best, mut best_mask) = (f64::INFINITY, full as usize);
    for mask in 1usize..1 << n {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        cover[mask] = cover[rest] | rows[v] as u32 | 1 << v;
        cost[mask] = cost[rest] + w[v];
        if cover[mask] == full && cost[mask] < best {
            best = cost[mask];
            best_mask = mask;
        }
    }
    bit_indices(best_mask as u64).collect()
}

struct MisSearch<'a> {
    rows: &'a [u64],
    w: &'a [f64],
    best: f64,
    best_set: u64,
    nodes: u64,
    aborted: bool,
}

impl MisSearch<'_> {
    /// Greedy clique partition of `p`: each clique holds at most one chosen vertex.
    fn bound(&self, mut p: u64) -> f64 {
        let mut total = 0.0;
        while p != 0 {
            let v = p.trailing_zeros() as usize;
            let mut heaviest = self.w[v];
            let mut clique = 1u64 << v;
            let mut cand = p & self.rows[v];
            while cand != 0 {
                let u = cand.trailing_zeros() as usize;
                clique |= 1 << u;
                heaviest = heaviest.max(self.w[u]);
                cand &= self.rows[u];
            }
            total += heaviest;
            p &= !clique;
        }
        total
    }

    fn search(&mut self, mut p: u64, mut cur: f64, mut set: u64) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            self.aborted = true;
        }
        if self.aborted {
            return;
        }
        let free = bit_indices(p).filter(|&v| self.rows[v] & p == 0).fold(0u64, |m, v| m | 1 << v);
        if free != 0 {
            cur += bit_indices(free).map(|v| self.w[v]).sum::<f64>();
            set |= free;
            p &= !free;
        }
        if p == 0 {
            if cur > self.best {
                self.best = cur;
                self.best_set = set;
            }
            return;
        }
        if cur + self.bound(p) <= self.best {
            return;
        }
        let v = bit_indices(p)
            .max_by(|&a, &b| (self.rows[a] & p).count_ones().cmp(&(self.rows[b] & p).count_ones()).then(b.cmp(&a)))
            .unwrap();
        self.search(p & !self.rows[v] & !(1 << v), cur + self.w[v], set | 1 << v);
        self.search(p & !(1 << v), cur, set);
    }
}

struct MdsSearch<'a> {
    closed: &'a [u64],
    w: &'a [f64],
    best: f64,
    best_set: u64,
    nodes: u64,
    aborted: bool,
}

impl MdsSearch<'_> {
    fn search(&mut self, uncovered: u64, allowed: u64, cur: f64, set: u64) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            self.aborted = true;
        }
        if self.aborted {
            return;
        }
        if uncovered == 0 {
            if cur < self.best {
                self.best = cur;
                self.best_set = set;
            }
            return;
        }
        // Fractional bound: each uncovered vertex is charged the cheapest
        // weight-per-newly-covered-vertex among its allowed dominators.
        let mut ratio = [f64::INFINITY; 64];
        for d in bit_indices(allowed) {
            let gain = (self.closed[d] & uncovered).count_ones();
            if gain > 0 {
                ratio[d] = self.w[d] / gain as f64;
            }
        }
        let mut lower = cur;
        let mut pick = (u32::MAX, 0usize);
        for u in bit_indices(uncovered) {
            let options = self.closed[u] & allowed;
            lower += bit_indices(options).map(|d| ratio[d]).fold(f64::INFINITY, f64::min);
            pick = pick.min((options.count_ones(), u));
        }
        if !lower.is_finite() || lower * (1.0 - 1e-12) >= self.best {
            return;
        }
        let mut options: Vec<usize> = bit_indices(self.closed[pick.1] & allowed).collect();
        options.sort_by(|&a, &b| ratio[a].partial_cmp(&ratio[b]).unwrap().then(a.cmp(&b)));
        let mut allowed = allowed;
        for d in options {
            self.search(uncovered & !self.closed[d], allowed & !(1 << d), cur + self.w[d], set | 1 << d);
            allowed &= !(1 << d);
        }
    }
}

#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Max-degree deletion for equal weights, otherwise the weight-over-degree
/// rule `w / (deg + 1)`. Ties go to the lowest index.
pub(crate) fn greedy_mis(g: &ConflictGraph, logw: &[f64]) -> Vec<usize> {
    let n = g.len();
    let mut deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut removed = alloc::vec![false; n];
    if uniform(logw) {
        // Among equal degrees the highest index is deleted, so low indices survive.
        let mut heap: BinaryHeap<(usize, usize)> = (0..n).map(|i| (deg[i], i)).collect();
        while let Some((d, v)) = heap.pop() {
            if removed[v] || d != deg[v] {
                continue;
            }
            if d == 0 {
                break;
            }
            removed[v] = true;
            g.for_each_neighbor(v, |u| {
                if !removed[u] {
                    deg[u] -= 1;
                    heap.push((deg[u], u));
                }
            });
        }
        return (0..n).filter(|&i| !removed[i]).collect();
    }
    let key = |i: usize, d: usize| Key(logw[i] - ln((d + 1) as f64));
    let mut heap: BinaryHeap<(Key, Reverse<usize>, usize)> =
        (0..n).map(|i| (key(i, deg[i]), Reverse(i), deg[i])).collect();
    let mut chosen = Vec::new();
    let mut dropped = Vec::new();
    while let Some((_, Reverse(v), d)) = heap.pop() {
        if removed[v] || d != deg[v] {
            continue;
        }
        chosen.push(v);
        removed[v] = true;
        dropped.clear();
        g.for_each_neighbor(v, |u| {
            if !removed[u] {
                removed[u] = true;
                dropped.push(u);
            }
        });
        for &u in &dropped {
            g.for_each_neighbor(u, |t| {
                if !removed[t] {
                    deg[t] -= 1;
                    heap.push((key(t, deg[t]), Reverse(t), deg[t]));
                }
            });
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Lazy-heap greedy set cover over closed neighbourhoods: largest number of
/// newly covered vertices per unit weight first, ties to the lowest index.
pub(crate) fn greedy_mds(g: &ConflictGraph, logw: &[f64]) -> Vec<usize> {
    let n = g.len();
    let flat = uniform(logw);
    let key = |i: usize, gain: usize| {
        if flat {
            Key(gain as f64)
        } else {
            Key(ln(gain as f64) - logw[i])
        }
    };
    let mut covered = alloc::vec![false; n];
    let mut left = n;
    let gain_of = |i: usize, covered: &[bool]| {
        let mut k = usize::from(!covered[i]);
        g.for_each_neighbor(i, |u| k += usize::from(!covered[u]));
        k
    };
    let mut heap: BinaryHeap<(Key, Reverse<usize>, usize)> =
        (0..n).map(|i| (key(i, g.degree(i) + 1), Reverse(i), g.degree(i) + 1)).collect();
    let mut chosen = Vec::new();
    while left > 0 {
        let Some((_, Reverse(v), stale)) = heap.pop() else { break };
        let gain = gain_of(v, &covered);
        if gain == 0 {
            continue;
        }
        if gain != stale {
            heap.push((key(v, gain), Reverse(v), gain));
            continue;
        }
        chosen.push(v);
        if !covered[v] {
            covered[v] = true;
            left -= 1;
        }
        g.for_each_neighbor(v, |u| {
            if !covered[u] {
                covered[u] = true;
                left -= 1;
            }
        });
    }
    chosen.sort_unstable();
    chosen
}

/// Greedy clique partition; the optimum takes at most one vertex per clique.
pub(crate) fn clique_cover_bound(g: &ConflictGraph, logw: &[f64]) -> f64 {
    let n = g.len();
    let mut covered = alloc::vec![false; n];
    let mut budget = CLIQUE_BUDGET;
    let mut maxima = Vec::new();
    for v in 0..n {
        if covered[v] {
            continue;
        }
        covered[v] = true;
        let mut clique = alloc::vec![v];
        let mut heaviest = logw[v];
        if budget > 0 {
            for u in g.neighbors(v) {
                if covered[u] {
                    continue;
                }
                budget = budget.saturating_sub(clique.len() as u64);
                if clique[1..].iter().all(|&c| g.adjacent(u, c)) {
                    clique.push(u);
                    covered[u] = true;
                    heaviest = heaviest.max(logw[u]);
                }
                if budget == 0 {
                    break;
                }
            }
        }
        maxima.push(heaviest);
    }
    log_sum_exp(&maxima)
}

/// `ceil(N / largest closed ball) * min weight`.
pub(crate) fn dominating_lower_bound(g: &ConflictGraph, logw: &[f64]) -> f64 {
    let n = g.len();
    let ball = (0..n).map(|i| g.degree(i) + 1).max().unwrap_or(1);
    let count = n.div_ceil(ball);
    let min = logw.iter().copied().fold(f64::INFINITY, f64::min);
    ln(count as f64) + min
}
