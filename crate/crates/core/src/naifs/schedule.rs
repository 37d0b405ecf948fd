use alloc::format;
use alloc::vec::Vec;

use super::{gcd, MapSpec};
use crate::error::{Error, Result};
use crate::space::Metric;

/// One family `Phi^(j)`; its index set `I^(j)` is `0..len`.
pub type Generation = Vec<MapSpec>;

/// Largest generation the power construction will materialise.
pub const MAX_GENERATION: usize = 1 << 16;

/// Serialized form of a [`Schedule`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct ScheduleSpec {
    #[cfg_attr(feature = "serde", serde(default))]
    pub prefix: Vec<Generation>,
    pub cycle: Vec<Generation>,
}

/// An eventually periodic sequence of generations: a finite prefix followed by
/// a repeating cycle.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "ScheduleSpec", into = "ScheduleSpec")
)]
pub struct Schedule {
    prefix: Vec<Generation>,
    cycle: Vec<Generation>,
}

impl TryFrom<ScheduleSpec> for Schedule {
    type Error = Error;

    fn try_from(spec: ScheduleSpec) -> Result<Self> {
        Schedule::new(spec.prefix, spec.cycle)
    }
}

impl From<Schedule> for ScheduleSpec {
    fn from(s: Schedule) -> Self {
        ScheduleSpec { prefix: s.prefix, cycle: s.cycle }
    }
}

impl Schedule {
    pub fn new(prefix: Vec<Generation>, cycle: Vec<Generation>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Schedule("the periodic cycle must contain a generation".into()));
        }
        for (k, g) in prefix.iter().chain(&cycle).enumerate() {
            if g.is_empty() {
                return Err(Error::Schedule(format!("generation {} has no maps", k + 1)));
            }
        }
        Ok(Self { prefix, cycle })
    }

    /// Every generation equal to `generation` (a semigroup action).
    pub fn constant(generation: Generation) -> Result<Self> {
        Self::new(Vec::new(), alloc::vec![generation])
    }

    /// A single map iterated (an autonomous system).
    pub fn autonomous(map: MapSpec) -> Self {
        Self { prefix: Vec::new(), cycle: alloc::vec![alloc::vec![map]] }
    }

    pub fn prefix(&self) -> &[Generation] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Generation] {
        &self.cycle
    }

    /// `|prefix| + |cycle|`: start indices beyond this repeat an earlier one.
    pub fn horizon(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn generation_at(&self, j: usize) -> Result<&Generation> {
        if j == 0 {
            return Err(Error::GenerationIndex);
        }
        Ok(self.generation(j))
    }

    /// `j >= 1` is the caller's responsibility.
    #[inline]
    pub(crate) fn generation(&self, j: usize) -> &Generation {
        let p = self.prefix.len();
        if j <= p {
            &self.prefix[j - 1]
        } else {
            &self.cycle[(j - 1 - p) % self.cycle.len()]
        }
    }

    /// `#I^(j)`.
    pub fn index_set_size(&self, j: usize) -> Result<usize> {
        self.generation_at(j).map(Vec::len)
    }

    #[inline]
    pub(crate) fn size(&self, j: usize) -> usize {
        self.generation(j).len()
    }

    pub fn validate_on(&self, metric: &Metric) -> Result<()> {
        for g in self.prefix.iter().chain(&self.cycle) {
            for m in g {
                m.validate(metric)?;
            }
        }
        Ok(())
    }

    /// The power system `Phi^n`: generation `j` holds every `n`-fold composition
    /// over generations `(j-1)n+1 ..= jn`, indexed lexicographically by the block
    /// word (first symbol most significant).
    pub fn power_system(&self, n: usize) -> Result<Schedule> {
        if n == 0 {
            return Err(Error::ZeroParameter("n"));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let p = self.prefix.len();
        let c = self.cycle.len();
        let new_prefix = p.div_ceil(n);
        let new_cycle = c / gcd(n, c);
        let block = |j: usize| self.block_generation(j, n);
        Ok(Schedule {
            prefix: (1..=new_prefix).map(block).collect::<Result<_>>()?,
            cycle: (new_prefix + 1..=new_prefix + new_cycle).map(block).collect::<Result<_>>()?,
        })
    }

    fn block_generation(&self, j: usize, n: usize) -> Result<Generation> {
        let start = (j - 1) * n + 1;
        let sizes: Vec<usize> = (start..start + n).map(|g| self.size(g)).collect();
        let total = sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&t| t <= MAX_GENERATION))
            .ok_or_else(|| Error::Schedule(format!("power generation {j} exceeds {MAX_GENERATION} maps")))?;
        let mut out = Vec::with_capacity(total);
        let mut digits = alloc::vec![0usize; n];
        for _ in 0..total {
            let maps = digits.iter().enumerate().map(|(t, &d)| self.generation(start + t)[d].clone()).collect();
            out.push(MapSpec::Composition { maps });
            for t in (0..n).rev() {
                digits[t] += 1;
                if digits[t] < sizes[t] {
                    break;
                }
                digits[t] = 0;
            }
        }
        Ok(out)
    }

    /// The truncated system `Phi_k` made of generations `k, k+1, ...`.
    pub fn truncate_system(&self, k: usize) -> Result<Schedule> {
        if k == 0 {
            return Err(Error::ZeroParameter("k"));
        }
        let drop = k - 1;
        let p = self.prefix.len();
        if drop <= p {
            return Ok(Schedule { prefix: self.prefix[drop..].to_vec(), cycle: self.cycle.clone() });
        }
        let c = self.cycle.len();
        let r = (drop - p) % c;
        let mut cycle = self.cycle[r..].to_vec();
        cycle.extend_from_slice(&self.cycle[..r]);
        Ok(Schedule { prefix: Vec::new(), cycle })
    }

    /// `log #I^{m,n}`, summed in log space.
    pub fn log_word_count(&self, m: usize, n: usize) -> f64 {
        (m..m + n).map(|j| crate::numeric::ln(self.size(j) as f64)).sum()
    }

    /// `#I^{m,n}` when it fits in a `u128`.
    pub fn word_count(&self, m: usize, n: usize) -> Option<u128> {
        (m..m + n).try_fold(1u128, |acc, j| acc.checked_mul(self.size(j) as u128))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn gen(tag: f64) -> Generation {
        vec![MapSpec::Rotation { alpha: tag }]
    }

    #[test]
    fn generation_indexing() {
        let (a, b, c) = (gen(0.1), gen(0.2), gen(0.3));
        let s = Schedule::new(vec![a.clone()], vec![b.clone(), c.clone()]).unwrap();
        assert_eq!(s.generation_at(1).unwrap(), &a);
        assert_eq!(s.generation_at(2).unwrap(), &b);
        assert_eq!(s.generation_at(3).unwrap(), &c);
        assert_eq!(s.generation_at(4).unwrap(), &b);
        assert_eq!(s.generation_at(0), Err(Error::GenerationIndex));
        let k = Schedule::constant(a.clone()).unwrap();
        for j in 1..10 {
            assert_eq!(k.generation_at(j).unwrap(), &a);
        }
    }

    #[test]
    fn empty_generations_rejected() {
        assert!(Schedule::new(vec![], vec![]).is_err());
        assert!(Schedule::new(vec![vec![]], vec![gen(0.1)]).is_err());
    }

    #[test]
    fn truncation() {
        let (a, b, c) = (gen(0.1), gen(0.2), gen(0.3));
        let s = Schedule::new(vec![a.clone(), b.clone()], vec![c.clone()]).unwrap();
        assert_eq!(s.truncate_system(1).unwrap(), s);
        let t = s.truncate_system(2).unwrap();
        assert_eq!(t.prefix(), core::slice::from_ref(&b));
        assert_eq!(t.cycle(), core::slice::from_ref(&c));
        let k = Schedule::constant(a.clone()).unwrap();
        assert_eq!(k.truncate_system(7).unwrap(), k);
        assert_eq!(s.truncate_system(0), Err(Error::ZeroParameter("k")));
    }

    #[test]
    fn truncation_composes() {
        let s = Schedule::new(vec![gen(0.1), gen(0.2)], vec![gen(0.3), gen(0.4), gen(0.5)]).unwrap();
        for i in 1..7 {
            for j in 1..7 {
                let lhs = s.truncate_system(i).unwrap().truncate_system(j).unwrap();
                let rhs = s.truncate_system(i + j - 1).unwrap();
                for g in 1..12 {
                    assert_eq!(lhs.generation_at(g).unwrap(), rhs.generation_at(g).unwrap());
                }
            }
        }
    }

    #[test]
    fn power_of_two_maps() {
        let f = MapSpec::Doubling;
        let g = MapSpec::Rotation { alpha: 0.5 };
        let s = Schedule::constant(vec![f.clone(), g.clone()]).unwrap();
        let p = s.power_system(2).unwrap();
        let comp = |a: &MapSpec, b: &MapSpec| MapSpec::Composition { maps: vec![a.clone(), b.clone()] };
        // f_{w2} o f_{w1} for w = 00, 01, 10, 11
        assert_eq!(p.generation_at(1).unwrap(), &vec![comp(&f, &f), comp(&f, &g), comp(&g, &f), comp(&g, &g)]);
        assert_eq!(s.power_system(1).unwrap(), s);
        assert_eq!(s.power_system(0), Err(Error::ZeroParameter("n")));
    }

    #[test]
    fn power_word_counts() {
        let two = vec![MapSpec::Identity, MapSpec::Doubling];
        let three = vec![MapSpec::Identity, MapSpec::Doubling, MapSpec::Tent];
        let s = Schedule::new(vec![three.clone()], vec![two.clone(), three.clone(), two.clone()]).unwrap();
        for n in 1..=3 {
            let p = s.power_system(n).unwrap();
            for m in 1..=4 {
                assert_eq!(p.word_count(1, m), s.word_count(1, m * n));
            }
        }
    }
}
