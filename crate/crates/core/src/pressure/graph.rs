//! Conflict graphs: vertices are cloud points, edges join pairs within `eps`.

use alloc::vec::Vec;

use crate::par::map_ordered;
use crate::space::{Metric, Point};

/// Graphs up to this many vertices are stored as one `u64` row per vertex.
pub const BITSET_LIMIT: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum ConflictGraph {
    Bits { rows: Vec<u64> },
    Sparse { offsets: Vec<usize>, targets: Vec<u32> },
}

impl ConflictGraph {
    /// Builds the graph from an edge predicate, testing only `candidates(i)`
    /// (indices `j > i` that may be adjacent to `i`).
    pub fn build<C, P>(n: usize, candidates: C, adjacent: P) -> Self
    where
        C: Fn(usize) -> Vec<u32> + Sync + Send,
        P: Fn(usize, usize) -> bool + Sync + Send,
    {
        let rows: Vec<usize> = (0..n).collect();
        let upper: Vec<Vec<u32>> =
            map_ordered(&rows, |&i| candidates(i).into_iter().filter(|&j| adjacent(i, j as usize)).collect());
        if n <= BITSET_LIMIT {
            let mut bits = alloc::vec![0u64; n];
            for (i, row) in upper.iter().enumerate() {
                for &j in row {
                    bits[i] |= 1 << j;
                    bits[j as usize] |= 1 << i;
                }
            }
            return ConflictGraph::Bits { rows: bits };
        }
        let mut degree = alloc::vec![0usize; n];
        for (i, row) in upper.iter().enumerate() {
            degree[i] += row.len();
            for &j in row {
                degree[j as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill: Vec<usize> = offsets[..n].to_vec();
        let mut targets = alloc::vec![0u32; offsets[n]];
        // Rows are visited in index order, so every adjacency list ends up sorted.
        for (i, row) in upper.iter().enumerate() {
            for &j in row {
                targets[fill[j as usize]] = i as u32;
                fill[j as usize] += 1;
            }
        }
        for (i, row) in upper.iter().enumerate() {
            let start = fill[i];
            targets[start..start + row.len()].copy_from_slice(row);
            fill[i] += row.len();
        }
        ConflictGraph::Sparse { offsets, targets }
    }

    pub fn len(&self) -> usize {
        match self {
            ConflictGraph::Bits { rows } => rows.len(),
            ConflictGraph::Sparse { offsets, .. } => offsets.len() - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self, i: usize) -> usize {
        match self {
            ConflictGraph::Bits { rows } => rows[i].count_ones() as usize,
            ConflictGraph::Sparse { offsets, .. } => offsets[i + 1] - offsets[i],
        }
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len()).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// Neighbours of `i` in increasing order (`i` itself excluded).
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        match self {
            ConflictGraph::Bits { rows } => bit_indices(rows[i]).collect(),
            ConflictGraph::Sparse { offsets, targets } => {
                targets[offsets[i]..offsets[i + 1]].iter().map(|&j| j as usize).collect()
            }
        }
    }

    #[inline]
    pub(crate) fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize)) {
        match self {
            ConflictGraph::Bits { rows } => bit_indices(rows[i]).for_each(f),
            ConflictGraph::Sparse { offsets, targets } => {
                for &j in &targets[offsets[i]..offsets[i + 1]] {
                    f(j as usize)
                }
            }
        }
    }

    pub(crate) fn sparse_row(&self, i: usize) -> &[u32] {
        match self {
            ConflictGraph::Sparse { offsets, targets } => &targets[offsets[i]..offsets[i + 1]],
            ConflictGraph::Bits { .. } => &[],
        }
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        match self {
            ConflictGraph::Bits { rows } => rows[i] >> j & 1 == 1,
            ConflictGraph::Sparse { .. } => self.sparse_row(i).binary_search(&(j as u32)).is_ok(),
        }
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(a, &i)| set[..a].iter().all(|&j| i != j && !self.adjacent(i, j)))
    }

    pub fn is_dominating(&self, set: &[usize]) -> bool {
        let mut covered = alloc::vec![false; self.len()];
        for &i in set {
            covered[i] = true;
            for j in self.neighbors(i) {
                covered[j] = true;
            }
        }
        covered.iter().all(|&c| c)
    }
}

pub(crate) fn bit_indices(mut mask: u64) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// For each `i`, the indices `j > i` whose base distance `d(x_i, x_j)` can be
/// at most `eps`. Every Bowen distance dominates the base distance, so no
/// adjacent pair is lost.
pub struct CandidatePairs {
    rows: Vec<Vec<u32>>,
}

impl CandidatePairs {
    pub fn new(metric: &Metric, points: &[Point], eps: f64) -> Self {
        let n = points.len();
        let all = || -> Vec<Vec<u32>> { (0..n).map(|i| (i as u32 + 1..n as u32).collect()).collect() };
        if n <= BITSET_LIMIT {
            return Self { rows: all() };
        }
        let rows = match metric {
            Metric::Interval | Metric::Circle => {
                let coords: Option<Vec<f64>> = points
                    .iter()
                    .map(|p| match p {
                        Point::Coord(x) => Some(*x),
                        _ => None,
                    })
                    .collect();
                match coords {
                    Some(c) if !(matches!(metric, Metric::Circle) && eps >= 0.5) => {
                        sorted_window(&c, eps, matches!(metric, Metric::Circle))
                    }
                    _ => all(),
                }
            }
            Metric::Symbolic { .. } => {
                let syms: Option<Vec<&[u8]>> = points
                    .iter()
                    .map(|p| match p {
                        Point::Symbols(s) => Some(s.as_slice()),
                        _ => None,
                    })
                    .collect();
                match syms {
                    Some(s) => prefix_buckets(&s, eps),
                    None => all(),
                }
            }
            Metric::Explicit { .. } => all(),
        };
        Self { rows }
    }

    pub fn row(&self, i: usize) -> Vec<u32> {
        self.rows[i].clone()
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

fn push_pair(rows: &mut [Vec<u32>], a: usize, b: usize) {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    rows[i].push(j as u32);
}

fn sorted_window(coords: &[f64], eps: f64, circle: bool) -> Vec<Vec<u32>> {
    let n = coords.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]).then(a.cmp(&b)));
    let mut rows = alloc::vec![Vec::new(); n];
    // A little slack so that boundary pairs are never dropped by rounding.
    let reach = eps * (1.0 + 1e-12) + 1e-15;
    for (s, &i) in order.iter().enumerate() {
        for &j in &order[s + 1..] {
            if coords[j] - coords[i] > reach {
                break;
            }
            push_pair(&mut rows, i, j);
        }
    }
    if circle {
        // Pairs that are close across the point 0 = 1.
        for (s, &i) in order.iter().enumerate() {
            for &j in order[s + 1..].iter().rev() {
                if coords[i] + 1.0 - coords[j] > reach {
                    break;
                }
                if coords[j] - coords[i] > reach {
                    push_pair(&mut rows, i, j);
                }
            }
        }
    }
    for r in &mut rows {
        r.sort_unstable();
    }
    rows
}

fn prefix_buckets(syms: &[&[u8]], eps: f64) -> Vec<Vec<u32>> {
    // d(x, y) = 2^-k <= eps exactly when the first disagreement k is at least `depth`.
    let mut depth = 0usize;
    let mut scale = 1.0;
    while scale > eps && depth < 64 {
        scale *= 0.5;
        depth += 1;
    }
    let n = syms.len();
    let key = |i: usize| &syms[i][..depth.min(syms[i].len())];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(a).cmp(key(b)).then(a.cmp(&b)));
    let mut rows = alloc::vec![Vec::new(); n];
    let mut start = 0;
    while start < n {
        let k = key(order[start]);
        // Strings shorter than `depth` may agree with anything that extends them.
        let short = k.len() < depth;
        let mut end = start + 1;
        while end < n && key(order[end]) == k {
            end += 1;
        }
        if short {
            return (0..n).map(|i| (i as u32 + 1..n as u32).collect()).collect();
        }
        for a in start..end {
            for b in a + 1..end {
                push_pair(&mut rows, order[a], order[b]);
            }
        }
        start = end;
    }
    for r in &mut rows {
        r.sort_unstable();
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{PointCloud, SpaceSpec};

    fn brute(metric: &Metric, pts: &[Point], eps: f64) -> ConflictGraph {
        let n = pts.len();
        ConflictGraph::build(n, |i| (i as u32 + 1..n as u32).collect(), |i, j| metric.dist(&pts[i], &pts[j]) <= eps)
    }

    fn pruned(metric: &Metric, pts: &[Point], eps: f64) -> ConflictGraph {
        let c = CandidatePairs::new(metric, pts, eps);
        ConflictGraph::build(pts.len(), |i| c.row(i), |i, j| metric.dist(&pts[i], &pts[j]) <= eps)
    }

    #[test]
    fn pruning_keeps_every_edge() {
        for spec in [
            SpaceSpec::CircleGrid { resolution: 100 },
            SpaceSpec::IntervalGrid { resolution: 90 },
            SpaceSpec::SymbolicDepth { depth: 7, alphabet_size: 2 },
        ] {
            let cloud = PointCloud::build(&spec).unwrap();
            for eps in [0.01, 0.05, 0.13, 0.3, 0.6] {
                assert_eq!(
                    brute(cloud.metric(), cloud.points(), eps),
                    pruned(cloud.metric(), cloud.points(), eps),
                    "{spec:?} eps {eps}"
                );
            }
        }
    }

    #[test]
    fn bits_and_sparse_agree() {
        let cloud = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 40 }).unwrap();
        let g = brute(cloud.metric(), cloud.points(), 0.06);
        assert!(matches!(g, ConflictGraph::Bits { .. }));
        assert_eq!(g.neighbors(0), alloc::vec![1, 2, 38, 39]);
        assert!(g.adjacent(39, 0) && !g.adjacent(0, 3));
        assert_eq!(g.edge_count(), 80);
        let big = PointCloud::build(&SpaceSpec::CircleGrid { resolution: 80 }).unwrap();
        let g = brute(big.metric(), big.points(), 0.03);
        assert!(matches!(g, ConflictGraph::Sparse { .. }));
        assert_eq!(g.neighbors(0), alloc::vec![1, 2, 78, 79]);
        assert_eq!(g.edge_count(), 160);
        assert!(g.is_independent(&[0, 3, 6]));
        assert!(!g.is_independent(&[0, 79]));
    }
}
