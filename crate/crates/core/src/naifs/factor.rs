use alloc::format;
use alloc::vec::Vec;

use super::{lcm, Schedule};
use crate::error::{Error, Result};
use crate::space::{Metric, Point, PointCloud, Potential, Symbols};

/// The factor map `pi: X -> Y`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Projection {
    /// `pi(x) = x` between copies of the same space.
    Identity,
    /// Explicit source index `i` goes to explicit target index `table[i]`.
    IndexTable { table: Vec<u32> },
    /// Binary symbol string `s` goes to `sum_k s_k 2^-(k+1)` on the circle or interval.
    BinaryExpansion,
    /// Symbol-wise projection between symbolic spaces.
    CoordinateProjection { symbol_map: Vec<u8> },
}

impl Projection {
    pub fn name(&self) -> &'static str {
        match self {
            Projection::Identity => "identity",
            Projection::IndexTable { .. } => "index_table",
            Projection::BinaryExpansion => "binary_expansion",
            Projection::CoordinateProjection { .. } => "coordinate_projection",
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let wrong = || Error::Factor(format!("{} cannot act on a {} point", self.name(), x.kind_name()));
        match (self, x) {
            (Projection::Identity, _) => Ok(*x),
            (Projection::IndexTable { table }, Point::Index(i)) => table
                .get(*i as usize)
                .map(|&t| Point::Index(t))
                .ok_or_else(|| Error::Factor(format!("index_table has no entry for point {i}"))),
            (Projection::BinaryExpansion, Point::Symbols(s)) => {
                let mut value = 0.0;
                let mut weight = 0.5;
                for &b in s.as_slice() {
                    if b > 1 {
                        return Err(Error::Factor("binary_expansion needs a binary alphabet".into()));
                    }
                    value += b as f64 * weight;
                    weight *= 0.5;
                }
                Ok(Point::Coord(value))
            }
            (Projection::CoordinateProjection { symbol_map }, Point::Symbols(s)) => {
                let mut out = alloc::vec![0u8; s.len()];
                for (o, &c) in out.iter_mut().zip(s.as_slice()) {
                    *o = *symbol_map
                        .get(c as usize)
                        .ok_or_else(|| Error::Factor(format!("symbol {c} missing from symbol_map")))?;
                }
                Ok(Point::Symbols(Symbols::new(&out)?))
            }
            _ => Err(wrong()),
        }
    }

    fn validate(&self, source: &Metric, target: &Metric) -> Result<()> {
        let bad = |why: &str| Err(Error::Factor(format!("{}: {why}", self.name())));
        match self {
            Projection::Identity if source != target => bad("source and target spaces differ"),
            Projection::IndexTable { table } => match (source, target) {
                (Metric::Explicit { size: n, .. }, Metric::Explicit { size: m, .. }) => {
                    if table.len() != *n {
                        bad("table length must equal the source size")
                    } else if table.iter().any(|&t| t as usize >= *m) {
                        bad("table entry outside the target")
                    } else {
                        Ok(())
                    }
                }
                _ => bad("needs explicit source and target spaces"),
            },
            Projection::BinaryExpansion => match (source, target) {
                (Metric::Symbolic { alphabet: 2 }, Metric::Circle | Metric::Interval) => Ok(()),
                _ => bad("needs a binary symbolic source and a coordinate target"),
            },
            Projection::CoordinateProjection { symbol_map } => match (source, target) {
                (Metric::Symbolic { alphabet: a }, Metric::Symbolic { alphabet: b }) => {
                    if symbol_map.len() != *a || symbol_map.iter().any(|&s| s as usize >= *b) {
                        bad("symbol_map must send the source alphabet into the target alphabet")
                    } else {
                        Ok(())
                    }
                }
                _ => bad("needs symbolic source and target spaces"),
            },
            _ => Ok(()),
        }
    }

    /// `pi^-1` when `pi` is a bijection of cloud indices (or the identity).
    pub fn inverse(&self) -> Option<Projection> {
        match self {
            Projection::Identity => Some(Projection::Identity),
            Projection::IndexTable { table } => {
                let mut inv = alloc::vec![u32::MAX; table.len()];
                for (i, &t) in table.iter().enumerate() {
                    let slot = inv.get_mut(t as usize)?;
                    if *slot != u32::MAX {
                        return None;
                    }
                    *slot = i as u32;
                }
                Some(Projection::IndexTable { table: inv })
            }
            _ => None,
        }
    }

    /// Fibers are computed by exact preimage, not by a distance tolerance.
    pub fn exact_preimages(&self) -> bool {
        !matches!(self, Projection::BinaryExpansion)
    }
}

/// A NAIFS `(X, Phi)` together with its sampled space.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    pub cloud: PointCloud,
    pub schedule: Schedule,
}

impl System {
    pub fn new(cloud: PointCloud, schedule: Schedule) -> Result<Self> {
        schedule.validate_on(cloud.metric())?;
        Ok(Self { cloud, schedule })
    }
}

/// `pi^{-1}(y)` for every target cloud point, as source cloud indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Fibers {
    pub members: Vec<Vec<usize>>,
    /// Source points whose image matched no target point.
    pub unmatched: Vec<usize>,
}

impl Fibers {
    pub fn surjective(&self) -> bool {
        self.members.iter().all(|f| !f.is_empty())
    }
}

/// A semiconjugacy candidate `pi: (X, Phi) -> (Y, Psi)` with identical index sets.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorMap {
    source: System,
    target: System,
    projection: Projection,
    fiber_tol: f64,
}

impl FactorMap {
    /// Fails hard when the index sets `I^(j)` of the two systems differ.
    pub fn new(source: System, target: System, projection: Projection) -> Result<Self> {
        projection.validate(source.cloud.metric(), target.cloud.metric())?;
        let (s, t) = (&source.schedule, &target.schedule);
        let horizon = s.prefix().len().max(t.prefix().len()) + lcm(s.cycle().len(), t.cycle().len());
        for j in 1..=horizon {
            let (a, b) = (s.size(j), t.size(j));
            if a != b {
                return Err(Error::IndexSetMismatch { generation: j, source_size: a, target_size: b });
            }
        }
        let fiber_tol = if projection.exact_preimages() { 0.0 } else { target.cloud.min_separation() / 2.0 };
        Ok(Self { source, target, projection, fiber_tol })
    }

    /// `pi = id` from a system onto a copy of itself.
    pub fn identity(system: System) -> Self {
        Self { target: system.clone(), source: system, projection: Projection::Identity, fiber_tol: 0.0 }
    }

    pub fn source(&self) -> &System {
        &self.source
    }

    pub fn target(&self) -> &System {
        &self.target
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    /// Distance within which a projected point counts as hitting a target point.
    pub fn fiber_tol(&self) -> f64 {
        self.fiber_tol
    }

    /// Generations `1..=horizon` cover every distinct (prefix, cycle phase) pair
    /// of both schedules.
    pub fn horizon(&self) -> usize {
        let (s, t) = (&self.source.schedule, &self.target.schedule);
        s.prefix().len().max(t.prefix().len()) + lcm(s.cycle().len(), t.cycle().len())
    }

    pub fn fibers(&self) -> Result<Fibers> {
        let locator = Locator::new(&self.target.cloud);
        let mut members = alloc::vec![Vec::new(); self.target.cloud.len()];
        let mut unmatched = Vec::new();
        for (i, x) in self.source.cloud.points().iter().enumerate() {
            let image = self.projection.apply(x)?;
            match locator.locate(&image, self.fiber_tol) {
                Some(y) => members[y].push(i),
                None => unmatched.push(i),
            }
        }
        Ok(Fibers { members, unmatched })
    }

    /// `phi o pi` on the source. Explicit sources get an `explicit_table`.
    pub fn pullback(&self, phi: &Potential) -> Result<Potential> {
        if let Metric::Explicit { .. } = self.source.cloud.metric() {
            let values = self
                .source
                .cloud
                .points()
                .iter()
                .map(|x| phi.eval(&self.projection.apply(x)?))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Potential::ExplicitTable { values });
        }
        Ok(Potential::Pullback { inner: alloc::boxed::Box::new(phi.clone()), projection: self.projection.clone() })
    }
}

/// Outcome of [`check_semiconjugacy`].
#[derive(Clone, Debug, PartialEq)]
pub struct SemiconjugacyReport {
    /// `max rho(pi(f_i^(j) x), g_i^(j)(pi x))` over sampled `x`, `j`, `i`.
    pub max_deviation: f64,
    pub surjective: bool,
    pub unmatched_targets: usize,
    pub pass: bool,
}

/// Checks `pi o f_i^(j) = g_i^(j) o pi` on every source cloud point, every
/// generation in one period of both schedules and every index, plus
/// surjectivity onto the target cloud.
pub fn check_semiconjugacy(factor: &FactorMap, tol: f64) -> Result<SemiconjugacyReport> {
    let metric = factor.target.cloud.metric();
    let mut max_deviation: f64 = 0.0;
    for x in factor.source.cloud.points() {
        let px = factor.projection.apply(x)?;
        for j in 1..=factor.horizon() {
            let (fs, gs) = (factor.source.schedule.generation(j), factor.target.schedule.generation(j));
            for (f, g) in fs.iter().zip(gs) {
                let lhs = factor.projection.apply(&f.apply(x)?)?;
                let rhs = g.apply(&px)?;
                max_deviation = max_deviation.max(metric.distance(&lhs, &rhs)?);
            }
        }
    }
    let fibers = factor.fibers()?;
    let unmatched_targets = fibers.members.iter().filter(|f| f.is_empty()).count();
    let surjective = unmatched_targets == 0;
    Ok(SemiconjugacyReport { max_deviation, surjective, unmatched_targets, pass: surjective && max_deviation <= tol })
}

/// Nearest-member lookup in a cloud.
struct Locator<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
}

impl<'a> Locator<'a> {
    fn new(cloud: &'a PointCloud) -> Self {
        let pts = cloud.points();
        let mut order: Vec<usize> = (0..pts.len()).collect();
        match cloud.metric() {
            Metric::Interval | Metric::Circle => order.sort_by(|&a, &b| key(&pts[a]).total_cmp(&key(&pts[b]))),
            Metric::Symbolic { .. } => order.sort_by(|&a, &b| sym(&pts[a]).cmp(&sym(&pts[b]))),
            Metric::Explicit { .. } => {}
        }
        Self { cloud, order }
    }

    fn locate(&self, p: &Point, tol: f64) -> Option<usize> {
        let pts = self.cloud.points();
        let metric = self.cloud.metric();
        let near = |i: usize| metric.dist(p, &pts[i]) <= tol;
        match (metric, p) {
            (Metric::Interval | Metric::Circle, Point::Coord(x)) => {
                let pos = self.order.partition_point(|&i| key(&pts[i]) < *x);
                let mut candidates = Vec::with_capacity(4);
                for k in [pos.wrapping_sub(1), pos] {
                    if let Some(&i) = self.order.get(k) {
                        candidates.push(i);
                    }
                }
                if let (Some(&first), Some(&last)) = (self.order.first(), self.order.last()) {
                    candidates.push(first);
                    candidates.push(last);
                }
                candidates
                    .into_iter()
                    .filter(|&i| near(i))
                    .min_by(|&a, &b| metric.dist(p, &pts[a]).total_cmp(&metric.dist(p, &pts[b])).then(a.cmp(&b)))
            }
            (Metric::Symbolic { .. }, Point::Symbols(s)) => {
                self.order.binary_search_by(|&i| sym(&pts[i]).cmp(s)).ok().map(|k| self.order[k]).filter(|&i| near(i))
            }
            (Metric::Explicit { .. }, Point::Index(i)) => {
                let i = *i as usize;
                if pts.get(i) == Some(p) {
                    Some(i)
                } else {
                    pts.iter().position(|q| q == p)
                }
            }
            _ => None,
        }
    }
}

fn key(p: &Point) -> f64 {
    match p {
        Point::Coord(x) => *x,
        _ => f64::NAN,
    }
}

fn sym(p: &Point) -> Symbols {
    match p {
        Point::Symbols(s) => *s,
        _ => Symbols::new(&[]).unwrap(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naifs::MapSpec;
    use crate::space::SpaceSpec;
    use alloc::vec;

    fn explicit(n: usize) -> PointCloud {
        let m = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        PointCloud::build(&SpaceSpec::FiniteExplicit { distance_matrix: m }).unwrap()
    }

    /// 4-point system permuting by +1 or +2 mod 4 and its quotient mod 2.
    fn quotient() -> FactorMap {
        let src = System::new(
            explicit(4),
            Schedule::constant(vec![
                MapSpec::PermutationTable { table: vec![1, 2, 3, 0] },
                MapSpec::PermutationTable { table: vec![2, 3, 0, 1] },
            ])
            .unwrap(),
        )
        .unwrap();
        let tgt = System::new(
            explicit(2),
            Schedule::constant(vec![MapSpec::PermutationTable { table: vec![1, 0] }, MapSpec::Identity]).unwrap(),
        )
        .unwrap();
        FactorMap::new(src, tgt, Projection::IndexTable { table: vec![0, 1, 0, 1] }).unwrap()
    }

    #[test]
    fn identity_has_zero_deviation() {
        let sys = System::new(
            PointCloud::build(&SpaceSpec::CircleGrid { resolution: 32 }).unwrap(),
            Schedule::autonomous(MapSpec::Doubling),
        )
        .unwrap();
        let r = check_semiconjugacy(&FactorMap::identity(sys), 0.0).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn quotient_mod_two_commutes() {
        let f = quotient();
        let r = check_semiconjugacy(&f, 0.0).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.surjective && r.pass);
        let fibers = f.fibers().unwrap();
        assert_eq!(fibers.members, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn binary_expansion_conjugates_shift_to_doubling() {
        let depth = 8;
        let src = System::new(
            PointCloud::build(&SpaceSpec::SymbolicDepth { depth, alphabet_size: 2 }).unwrap(),
            Schedule::autonomous(MapSpec::Shift),
        )
        .unwrap();
        let tgt = System::new(
            PointCloud::build(&SpaceSpec::CircleGrid { resolution: 1 << depth }).unwrap(),
            Schedule::autonomous(MapSpec::Doubling),
        )
        .unwrap();
        let f = FactorMap::new(src, tgt, Projection::BinaryExpansion).unwrap();
        let r = check_semiconjugacy(&f, 1.0 / 256.0).unwrap();
        assert!(r.max_deviation <= 1.0 / 256.0);
        assert!(r.pass);
        assert!(f.fibers().unwrap().members.iter().all(|m| m.len() == 1));
    }

    #[test]
    fn mismatched_index_sets_are_rejected() {
        let src = System::new(explicit(2), Schedule::constant(vec![MapSpec::Identity; 2]).unwrap()).unwrap();
        let tgt = System::new(explicit(2), Schedule::autonomous(MapSpec::Identity)).unwrap();
        let err = FactorMap::new(src, tgt, Projection::IndexTable { table: vec![0, 1] }).unwrap_err();
        assert!(matches!(err, Error::IndexSetMismatch { generation: 1, .. }));
    }

    #[test]
    fn broken_commutation_is_detected() {
        let f = quotient();
        let bad_target =
            System::new(explicit(2), Schedule::constant(vec![MapSpec::Identity, MapSpec::Identity]).unwrap()).unwrap();
        let f = FactorMap::new(f.source().clone(), bad_target, f.projection().clone()).unwrap();
        let r = check_semiconjugacy(&f, 1e-9).unwrap();
        assert_eq!(r.max_deviation, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn pullback_materialises_explicit_table() {
        let f = quotient();
        let phi = Potential::ExplicitTable { values: vec![0.5, 2.0] };
        assert_eq!(f.pullback(&phi).unwrap(), Potential::ExplicitTable { values: vec![0.5, 2.0, 0.5, 2.0] });
    }
}
