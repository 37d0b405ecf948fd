use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{fabs, floor};
use crate::space::{Metric, Point};

/// One map `f_i^(j): X -> X`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum MapSpec {
    Identity,
    /// `x -> a x + b mod 1`.
    AffineMod1 {
        a: f64,
        b: f64,
    },
    /// `x -> a x + b`, required to send `[0, 1]` into itself.
    AffineClamped {
        a: f64,
        b: f64,
    },
    /// `x -> 2x mod 1`.
    Doubling,
    /// `x -> x + alpha mod 1`.
    Rotation {
        alpha: f64,
    },
    /// `x -> 1 - |2x - 1|`.
    Tent,
    /// Bijection of explicit point indices.
    PermutationTable {
        table: Vec<u32>,
    },
    /// Arbitrary self-map of explicit point indices.
    IndexTable {
        table: Vec<u32>,
    },
    /// Left shift on symbol strings.
    Shift,
    /// Symbol-wise substitution on symbol strings.
    SymbolSubstitutionTable {
        table: Vec<u8>,
    },
    /// `maps[k-1] o ... o maps[0]`: the first entry acts first.
    Composition {
        maps: Vec<MapSpec>,
    },
}

impl MapSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MapSpec::Identity => "identity",
            MapSpec::AffineMod1 { .. } => "affine_mod1",
            MapSpec::AffineClamped { .. } => "affine_clamped",
            MapSpec::Doubling => "doubling",
            MapSpec::Rotation { .. } => "rotation",
            MapSpec::Tent => "tent",
            MapSpec::PermutationTable { .. } => "permutation_table",
            MapSpec::IndexTable { .. } => "index_table",
            MapSpec::Shift => "shift",
            MapSpec::SymbolSubstitutionTable { .. } => "symbol_substitution_table",
            MapSpec::Composition { .. } => "composition",
        }
    }

    /// Checks the map is well defined on points of `metric`.
    pub fn validate(&self, metric: &Metric) -> Result<()> {
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::MapDomain { map: self.name(), space: metric.kind_name() })
            }
        };
        let real = matches!(metric, Metric::Interval | Metric::Circle);
        match self {
            MapSpec::Identity => Ok(()),
            MapSpec::AffineMod1 { a, b } => {
                domain(real)?;
                finite(&[*a, *b])
            }
            MapSpec::Rotation { alpha } => {
                domain(real)?;
                finite(&[*alpha])
            }
            MapSpec::Doubling | MapSpec::Tent => domain(real),
            MapSpec::AffineClamped { a, b } => {
                domain(real)?;
                finite(&[*a, *b])?;
                let (lo, hi) = (*b, a + b);
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
                    return Err(Error::InvalidMap(format!(
                        "affine_clamped a={a}, b={b} does not map [0,1] into [0,1]"
                    )));
                }
                Ok(())
            }
            MapSpec::PermutationTable { table } | MapSpec::IndexTable { table } => {
                let Metric::Explicit { size, .. } = metric else {
                    return domain(false);
                };
                if table.len() != *size {
                    return Err(Error::InvalidMap(format!(
                        "{} has {} entries for {size} points",
                        self.name(),
                        table.len()
                    )));
                }
                if let Some(bad) = table.iter().find(|&&t| t as usize >= *size) {
                    return Err(Error::InvalidMap(format!("{} entry {bad} out of range", self.name())));
                }
                if matches!(self, MapSpec::PermutationTable { .. }) {
                    let mut seen = alloc::vec![false; *size];
                    for &t in table {
                        if core::mem::replace(&mut seen[t as usize], true) {
                            return Err(Error::InvalidMap(format!(
                                "permutation_table is not a bijection ({t} repeated)"
                            )));
                        }
                    }
                }
                Ok(())
            }
            MapSpec::Shift => domain(matches!(metric, Metric::Symbolic { .. })),
            MapSpec::SymbolSubstitutionTable { table } => {
                let Metric::Symbolic { alphabet } = metric else {
                    return domain(false);
                };
                if table.len() != *alphabet || table.iter().any(|&t| t as usize >= *alphabet) {
                    return Err(Error::InvalidMap(format!(
                        "symbol_substitution_table must map the {alphabet}-letter alphabet into itself"
                    )));
                }
                Ok(())
            }
            MapSpec::Composition { maps } => maps.iter().try_for_each(|m| m.validate(metric)),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let wrong = || Error::MapDomain { map: self.name(), space: x.kind_name() };
        Ok(match self {
            MapSpec::Identity => *x,
            MapSpec::AffineMod1 { a, b } => Point::Coord(frac(a * coord(x).ok_or_else(wrong)? + b)),
            MapSpec::AffineClamped { a, b } => Point::Coord((a * coord(x).ok_or_else(wrong)? + b).clamp(0.0, 1.0)),
            MapSpec::Doubling => Point::Coord(frac(2.0 * coord(x).ok_or_else(wrong)?)),
            MapSpec::Rotation { alpha } => Point::Coord(frac(coord(x).ok_or_else(wrong)? + alpha)),
            MapSpec::Tent => Point::Coord(1.0 - fabs(2.0 * coord(x).ok_or_else(wrong)? - 1.0)),
            MapSpec::PermutationTable { table } | MapSpec::IndexTable { table } => match x {
                Point::Index(i) => Point::Index(
                    *table
                        .get(*i as usize)
                        .ok_or_else(|| Error::InvalidMap(format!("{} has no entry for point {i}", self.name())))?,
                ),
                _ => return Err(wrong()),
            },
            MapSpec::Shift => match x {
                Point::Symbols(s) => Point::Symbols(s.shifted()),
                _ => return Err(wrong()),
            },
            MapSpec::SymbolSubstitutionTable { table } => match x {
                Point::Symbols(s) => {
                    if s.as_slice().iter().any(|&c| c as usize >= table.len()) {
                        return Err(Error::InvalidMap("symbol outside substitution table".into()));
                    }
                    Point::Symbols(s.substituted(table))
                }
                _ => return Err(wrong()),
            },
            MapSpec::Composition { maps } => {
                let mut y = *x;
                for m in maps {
                    y = m.apply(&y)?;
                }
                y
            }
        })
    }
}

fn coord(x: &Point) -> Option<f64> {
    match x {
        Point::Coord(c) => Some(*c),
        _ => None,
    }
}

fn frac(x: f64) -> f64 {
    let f = x - floor(x);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMap("parameters must be finite".into()))
    }
}
