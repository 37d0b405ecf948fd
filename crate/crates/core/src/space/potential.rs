use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use super::{Point, PointCloud};
use crate::error::{Error, Result};
use crate::naifs::Projection;
use crate::numeric::fabs;

/// A continuous potential `psi: X -> R`.
///
/// The first five kinds are the configurable families. `Combination` and `Abs`
/// close the set under the operations the inequality checks need
/// (`phi + psi`, `c * phi`, `|phi|`, ...); `Pullback` is `phi o pi` for a
/// factor map whose source points leave the cloud.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Potential {
    Constant {
        value: f64,
    },
    /// `slope * x + intercept` on coordinate points.
    CoordinateAffine {
        slope: f64,
        intercept: f64,
    },
    /// Linear interpolation through `(x, y)` knots, constant outside them.
    PiecewiseLinear {
        knots: Vec<[f64; 2]>,
    },
    /// Value indexed by the first symbol of a symbolic point.
    FirstSymbolTable {
        values: Vec<f64>,
    },
    /// Value per explicit point index.
    ExplicitTable {
        values: Vec<f64>,
    },
    /// `offset + sum(weight * term)`.
    Combination {
        offset: f64,
        terms: Vec<(f64, Potential)>,
    },
    Abs {
        inner: Box<Potential>,
    },
    Pullback {
        inner: Box<Potential>,
        projection: Projection,
    },
}

impl Potential {
    pub fn constant(value: f64) -> Self {
        Potential::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Potential::Combination { offset: 0.0, terms: alloc::vec![(c, self.clone())] }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Potential::Combination { offset: c, terms: alloc::vec![(1.0, self.clone())] }
    }

    pub fn plus(&self, other: &Potential) -> Self {
        Self::mix(1.0, self, 1.0, other)
    }

    pub fn minus(&self, other: &Potential) -> Self {
        Self::mix(1.0, self, -1.0, other)
    }

    /// `a * phi + b * psi`.
    pub fn mix(a: f64, phi: &Potential, b: f64, psi: &Potential) -> Self {
        Potential::Combination { offset: 0.0, terms: alloc::vec![(a, phi.clone()), (b, psi.clone())] }
    }

    pub fn abs(&self) -> Self {
        Potential::Abs { inner: Box::new(self.clone()) }
    }

    /// Pointwise maximum, written as `(phi + psi + |phi - psi|) / 2`.
    pub fn max(phi: &Potential, psi: &Potential) -> Self {
        Potential::Combination {
            offset: 0.0,
            terms: alloc::vec![(0.5, phi.clone()), (0.5, psi.clone()), (0.5, phi.minus(psi).abs())],
        }
    }

    /// `Some(c)` when the potential is a literal constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Potential::Constant { value } => Some(*value),
            Potential::Combination { offset, terms } => {
                let mut total = *offset;
                for (w, t) in terms {
                    total += w * t.as_constant()?;
                }
                Some(total)
            }
            Potential::Abs { inner } => inner.as_constant().map(fabs),
            Potential::Pullback { inner, .. } => inner.as_constant(),
            _ => None,
        }
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        match self {
            Potential::Constant { value } => Ok(*value),
            Potential::CoordinateAffine { slope, intercept } => match x {
                Point::Coord(c) => Ok(slope * c + intercept),
                _ => Err(kind_err("coordinate_affine", x)),
            },
            Potential::PiecewiseLinear { knots } => match x {
                Point::Coord(c) => piecewise(knots, *c),
                _ => Err(kind_err("piecewise_linear", x)),
            },
            Potential::FirstSymbolTable { values } => match x {
                Point::Symbols(s) => {
                    let first =
                        s.first().ok_or_else(|| Error::Potential("symbolic point has no known first symbol".into()))?;
                    values
                        .get(first as usize)
                        .copied()
                        .ok_or_else(|| Error::Potential(format!("first_symbol_table has no entry for symbol {first}")))
                }
                _ => Err(kind_err("first_symbol_table", x)),
            },
            Potential::ExplicitTable { values } => match x {
                Point::Index(i) => values
                    .get(*i as usize)
                    .copied()
                    .ok_or_else(|| Error::Potential(format!("explicit_table has no entry for point {i}"))),
                _ => Err(kind_err("explicit_table", x)),
            },
            Potential::Combination { offset, terms } => {
                let mut total = *offset;
                for (w, t) in terms {
                    total += w * t.eval(x)?;
                }
                Ok(total)
            }
            Potential::Abs { inner } => inner.eval(x).map(fabs),
            Potential::Pullback { inner, projection } => inner.eval(&projection.apply(x)?),
        }
    }

    /// Evaluates on every cloud member.
    pub fn values_on(&self, cloud: &PointCloud) -> Result<Vec<f64>> {
        cloud.points().iter().map(|p| self.eval(p)).collect()
    }

    /// `max |psi|` over the cloud.
    pub fn sup_norm(&self, cloud: &PointCloud) -> Result<f64> {
        Ok(self.values_on(cloud)?.into_iter().map(fabs).fold(0.0, f64::max))
    }

    pub fn sup(&self, cloud: &PointCloud) -> Result<f64> {
        Ok(self.values_on(cloud)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn inf(&self, cloud: &PointCloud) -> Result<f64> {
        Ok(self.values_on(cloud)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Checks the potential is defined and finite on every cloud member.
    pub fn validate_on(&self, cloud: &PointCloud) -> Result<()> {
        for v in self.values_on(cloud)? {
            if !v.is_finite() {
                return Err(Error::Potential(format!("non-finite value {v}")));
            }
        }
        Ok(())
    }
}

fn kind_err(kind: &str, x: &Point) -> Error {
    Error::Potential(format!("{kind} cannot be evaluated at a {} point", x.kind_name()))
}

fn piecewise(knots: &[[f64; 2]], x: f64) -> Result<f64> {
    if knots.is_empty() {
        return Err(Error::Potential("piecewise_linear needs at least one knot".into()));
    }
    if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(Error::Potential("piecewise_linear knots must be strictly increasing".into()));
    }
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first[0] {
        return Ok(first[1]);
    }
    if x >= last[0] {
        return Ok(last[1]);
    }
    let k = knots.iter().position(|k| k[0] > x).unwrap_or(knots.len() - 1);
    let (a, b) = (knots[k - 1], knots[k]);
    Ok(a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]))
}
