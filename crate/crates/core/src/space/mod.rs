//! Compact metric spaces sampled as finite point clouds.
//!
//! Grid and symbolic clouds only seed candidate sets: points produced by map
//! application keep their exact values and are measured with the same metric.

mod potential;

pub use potential::Potential;

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, MetricViolation, Result};

/// Longest symbol string a symbolic point can carry.
pub const MAX_DEPTH: usize = 32;

/// Largest cloud [`PointCloud::build`] will materialise.
pub const MAX_CLOUD: u64 = 1 << 22;

/// Clouds up to this size get an exhaustive triangle-inequality check.
pub const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 64;

const RANDOM_TRIPLES: usize = 10_000;
const TRIANGLE_SLACK: f64 = 1e-12;

/// Finite symbol string of a symbolic point. Coordinates past `len` are unknown
/// and compare as equal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbols {
    len: u8,
    data: [u8; MAX_DEPTH],
}

impl Symbols {
    pub fn new(symbols: &[u8]) -> Result<Self> {
        if symbols.len() > MAX_DEPTH {
            return Err(Error::Depth(symbols.len()));
        }
        let mut data = [0u8; MAX_DEPTH];
        data[..symbols.len()].copy_from_slice(symbols);
        Ok(Self { len: symbols.len() as u8, data })
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn first(&self) -> Option<u8> {
        self.as_slice().first().copied()
    }

    /// Drops the leading symbol (the left shift).
    pub fn shifted(&self) -> Self {
        if self.len == 0 {
            return *self;
        }
        let mut data = [0u8; MAX_DEPTH];
        let n = self.len as usize;
        data[..n - 1].copy_from_slice(&self.data[1..n]);
        Self { len: self.len - 1, data }
    }

    pub fn substituted(&self, table: &[u8]) -> Self {
        let mut out = *self;
        for s in &mut out.data[..self.len as usize] {
            *s = table[*s as usize];
        }
        out
    }

    /// Index of the first disagreement within the common known prefix.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let n = self.len.min(other.len) as usize;
        self.data[..n].iter().zip(&other.data[..n]).position(|(a, b)| a != b)
    }
}

impl fmt::Debug for Symbols {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.as_slice() {
            write!(f, "{s}")?;
            if self.data.iter().any(|&d| d > 9) {
                f.write_str(".")?;
            }
        }
        Ok(())
    }
}

/// A point of one of the supported spaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    /// Coordinate in `[0, 1]` (interval) or `[0, 1)` (circle).
    Coord(f64),
    Symbols(Symbols),
    /// Index into an explicit distance matrix.
    Index(u32),
}

impl Point {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Point::Coord(_) => "coordinate",
            Point::Symbols(_) => "symbolic",
            Point::Index(_) => "explicit",
        }
    }
}

/// Description of a sampled compact metric space.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum SpaceSpec {
    /// `{k/(N-1) : 0 <= k < N}` with `|x - y|`.
    IntervalGrid { resolution: usize },
    /// `{k/N : 0 <= k < N}` with the arc distance `min(|x-y|, 1-|x-y|)`.
    CircleGrid { resolution: usize },
    /// All `alphabet_size^depth` words with the cylinder metric `2^-k`.
    SymbolicDepth { depth: usize, alphabet_size: usize },
    /// One point per row of a distance matrix.
    FiniteExplicit { distance_matrix: Vec<Vec<f64>> },
}

impl SpaceSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            SpaceSpec::IntervalGrid { .. } => "interval_grid",
            SpaceSpec::CircleGrid { .. } => "circle_grid",
            SpaceSpec::SymbolicDepth { .. } => "symbolic_depth",
            SpaceSpec::FiniteExplicit { .. } => "finite_explicit",
        }
    }

    /// Same family at a different resolution (grids: points, symbolic: depth).
    /// Explicit spaces have no resolution and are returned unchanged.
    pub fn with_resolution(&self, resolution: usize) -> SpaceSpec {
        match self {
            SpaceSpec::IntervalGrid { .. } => SpaceSpec::IntervalGrid { resolution },
            SpaceSpec::CircleGrid { .. } => SpaceSpec::CircleGrid { resolution },
            SpaceSpec::SymbolicDepth { alphabet_size, .. } => {
                SpaceSpec::SymbolicDepth { depth: resolution, alphabet_size: *alphabet_size }
            }
            SpaceSpec::FiniteExplicit { .. } => self.clone(),
        }
    }

    pub fn resolution(&self) -> Option<usize> {
        match self {
            SpaceSpec::IntervalGrid { resolution } | SpaceSpec::CircleGrid { resolution } => Some(*resolution),
            SpaceSpec::SymbolicDepth { depth, .. } => Some(*depth),
            SpaceSpec::FiniteExplicit { .. } => None,
        }
    }
}

/// The metric of a space; measures any two points of the right kind, not only
/// cloud members.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    Interval,
    Circle,
    Symbolic { alphabet: usize },
    Explicit { size: usize, table: Vec<f64> },
}

impl Metric {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Metric::Interval => "interval",
            Metric::Circle => "circle",
            Metric::Symbolic { .. } => "symbolic",
            Metric::Explicit { .. } => "explicit",
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        let d = self.dist(x, y);
        if d.is_nan() {
            Err(Error::SpaceMismatch)
        } else {
            Ok(d)
        }
    }

    /// Distance without the error path; NaN when the points do not fit the metric.
    #[inline]
    pub(crate) fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (Metric::Interval, Point::Coord(a), Point::Coord(b)) => crate::numeric::fabs(a - b),
            (Metric::Circle, Point::Coord(a), Point::Coord(b)) => {
                let d = crate::numeric::fabs(a - b);
                d.min(1.0 - d)
            }
            (Metric::Symbolic { .. }, Point::Symbols(a), Point::Symbols(b)) => match a.first_difference(b) {
                Some(k) => 1.0 / (1u64 << k) as f64,
                None => 0.0,
            },
            (Metric::Explicit { size, table }, Point::Index(a), Point::Index(b)) => {
                let (a, b) = (*a as usize, *b as usize);
                if a < *size && b < *size {
                    table[a * size + b]
                } else {
                    f64::NAN
                }
            }
            _ => f64::NAN,
        }
    }

    pub fn accepts(&self, p: &Point) -> bool {
        match (self, p) {
            (Metric::Interval | Metric::Circle, Point::Coord(x)) => x.is_finite(),
            (Metric::Symbolic { alphabet }, Point::Symbols(s)) => {
                s.as_slice().iter().all(|&c| (c as usize) < *alphabet)
            }
            (Metric::Explicit { size, .. }, Point::Index(i)) => (*i as usize) < *size,
            _ => false,
        }
    }
}

/// Outcome of [`PointCloud::check_metric_axioms`].
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomCheck {
    pub exhaustive: bool,
    pub triples_checked: usize,
    /// Seed used for random triples, `None` when the check was exhaustive.
    pub seed: Option<u64>,
}

/// Finite sample of a compact metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    metric: Metric,
    points: Vec<Point>,
}

impl PointCloud {
    pub fn build(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::IntervalGrid { resolution } => {
                let n = grid_size(*resolution)?;
                let last = (n - 1) as f64;
                let points = (0..n).map(|k| Point::Coord(k as f64 / last)).collect();
                Ok(Self { metric: Metric::Interval, points })
            }
            SpaceSpec::CircleGrid { resolution } => {
                let n = grid_size(*resolution)?;
                let points = (0..n).map(|k| Point::Coord(k as f64 / n as f64)).collect();
                Ok(Self { metric: Metric::Circle, points })
            }
            SpaceSpec::SymbolicDepth { depth, alphabet_size } => {
                let (depth, m) = (*depth, *alphabet_size);
                if depth == 0 || depth > MAX_DEPTH {
                    return Err(Error::Depth(depth));
                }
                if !(2..=256).contains(&m) {
                    return Err(Error::Alphabet(m));
                }
                let total = (m as u64)
                    .checked_pow(depth as u32)
                    .filter(|&t| t <= MAX_CLOUD)
                    .ok_or(Error::CloudTooLarge(u64::MAX))?;
                let mut points = Vec::with_capacity(total as usize);
                let mut digits = alloc::vec![0u8; depth];
                for _ in 0..total {
                    points.push(Point::Symbols(Symbols::new(&digits)?));
                    for d in digits.iter_mut().rev() {
                        if (*d as usize) + 1 < m {
                            *d += 1;
                            break;
                        }
                        *d = 0;
                    }
                }
                Ok(Self { metric: Metric::Symbolic { alphabet: m }, points })
            }
            SpaceSpec::FiniteExplicit { distance_matrix } => {
                let size = distance_matrix.len();
                let table = validate_distance_matrix(distance_matrix, 0)?;
                let points = (0..size as u32).map(Point::Index).collect();
                Ok(Self { metric: Metric::Explicit { size, table }, points })
            }
        }
    }

    /// Cloud from explicit members of `metric`; used for subsets such as fibers.
    /// Unlike [`PointCloud::build`] this accepts fewer than two points.
    pub fn from_points(metric: Metric, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            if !metric.accepts(p) {
                return Err(Error::SpaceMismatch);
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if metric.dist(&points[i], &points[j]) <= 0.0 {
                    return Err(Error::DuplicatePoint(j, i));
                }
            }
        }
        Ok(Self { metric, points })
    }

    /// Sub-cloud on the given member indices.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self { metric: self.metric.clone(), points: indices.iter().map(|&i| self.points[i]).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.metric.distance(x, y)
    }

    /// Position of `p` among the cloud members, if it is one.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        match (p, &self.metric) {
            (Point::Index(i), Metric::Explicit { size, .. }) if (*i as usize) < *size => {
                // explicit clouds built by `build` are in index order
                if self.points.get(*i as usize) == Some(p) {
                    return Some(*i as usize);
                }
                self.points.iter().position(|q| q == p)
            }
            _ => self.points.iter().position(|q| self.metric.dist(p, q) == 0.0),
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.points.len() {
            for j in 0..i {
                best = best.max(self.metric.dist(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// Smallest distance between two distinct members (`inf` for fewer than two).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in 0..i {
                best = best.min(self.metric.dist(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// Checks symmetry, identity of indiscernibles and the triangle inequality:
    /// exhaustively up to [`EXHAUSTIVE_TRIANGLE_LIMIT`] points, otherwise on
    /// 10,000 random triples drawn with `seed`.
    pub fn check_metric_axioms(&self, seed: u64) -> Result<AxiomCheck> {
        let n = self.points.len();
        let d = |i: usize, j: usize| self.metric.dist(&self.points[i], &self.points[j]);
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            let (ij, ji) = (d(i, j), d(j, i));
            if ij != ji {
                return Err(Error::DistanceMatrix(MetricViolation::Asymmetric { i, j }));
            }
            if i != j && ij <= 0.0 {
                return Err(Error::DistanceMatrix(MetricViolation::NonPositive { i, j }));
            }
            if d(i, k) > ij + d(j, k) + TRIANGLE_SLACK {
                return Err(Error::DistanceMatrix(MetricViolation::Triangle { i, j, k }));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for i in 0..n {
                if d(i, i) != 0.0 {
                    return Err(Error::DistanceMatrix(MetricViolation::NonzeroDiagonal { i }));
                }
                for j in 0..n {
                    for k in 0..n {
                        check(i, j, k)?;
                    }
                }
            }
            return Ok(AxiomCheck { exhaustive: true, triples_checked: n * n * n, seed: None });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_TRIPLES {
            let (i, j, k) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            check(i, j, k)?;
        }
        Ok(AxiomCheck { exhaustive: false, triples_checked: RANDOM_TRIPLES, seed: Some(seed) })
    }
}

fn grid_size(resolution: usize) -> Result<usize> {
    if resolution < 2 {
        return Err(Error::Resolution(resolution));
    }
    if resolution as u64 > MAX_CLOUD {
        return Err(Error::CloudTooLarge(resolution as u64));
    }
    Ok(resolution)
}

/// Validates an explicit distance matrix and flattens it row-major.
///
/// The triangle inequality is checked on all triples up to 64 points and on
/// 10,000 triples drawn with `seed` above that.
pub fn validate_distance_matrix(matrix: &[Vec<f64>], seed: u64) -> Result<Vec<f64>> {
    let n = matrix.len();
    let bad = |v| Err(Error::DistanceMatrix(v));
    if n < 2 {
        return bad(MetricViolation::TooSmall(n));
    }
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return bad(MetricViolation::NotSquare { row, len: r.len(), expected: n });
        }
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return bad(MetricViolation::NotFinite { i, j });
            }
            if i == j && v != 0.0 {
                return bad(MetricViolation::NonzeroDiagonal { i });
            }
            if i != j && v <= 0.0 {
                return bad(MetricViolation::NonPositive { i, j });
            }
            if v != matrix[j][i] {
                return bad(MetricViolation::Asymmetric { i, j });
            }
        }
    }
    let table: Vec<f64> = matrix.iter().flatten().copied().collect();
    let cloud =
        PointCloud { metric: Metric::Explicit { size: n, table }, points: (0..n as u32).map(Point::Index).collect() };
    cloud.check_metric_axioms(seed)?;
    match cloud.metric {
        Metric::Explicit { table, .. } => Ok(table),
        _ => unreachable!(),
    }
}
