use alloc::format;
use alloc::vec::Vec;

use super::{Schedule, Word};
use crate::error::{Error, Result};
use crate::space::{Metric, Point, PointCloud};

/// `f_w^{i,k}(x) = f^(i+k-1)_{w_{i+k-1}} o ... o f^(i)_{w_i}(x)`; `k = 0` is the identity.
pub fn compose(schedule: &Schedule, w: &Word, i: usize, k: usize, x: &Point) -> Result<Point> {
    if i < w.start() || i + k > w.start() + w.len() {
        return Err(Error::Word(format!("word {w:?} does not cover generations {i}..{}", i + k)));
    }
    let mut y = *x;
    for j in i..i + k {
        let sym = w.symbol_at(j).expect("covered above") as usize;
        y = schedule.generation(j)[sym].apply(&y)?;
    }
    Ok(y)
}

/// Bowen distance `d_{w,k}(x,y) = max_{0<=j<=k} d(f_w^{m,j} x, f_w^{m,j} y)` with
/// `m` the start of `w` (the `j = 0` term is the plain distance).
pub fn bowen_distance(schedule: &Schedule, metric: &Metric, w: &Word, k: usize, x: &Point, y: &Point) -> Result<f64> {
    if k == 0 || k > w.len() {
        return Err(Error::Word(format!("Bowen horizon {k} must lie in 1..={}", w.len())));
    }
    let mut best = metric.distance(x, y)?;
    let (mut a, mut b) = (*x, *y);
    for j in w.start()..w.start() + k {
        let map = &schedule.generation(j)[w.symbol_at(j).unwrap() as usize];
        a = map.apply(&a)?;
        b = map.apply(&b)?;
        best = best.max(metric.distance(&a, &b)?);
    }
    Ok(best)
}

/// Sup-metric `d*_n(x,y)`: the largest distance seen along any word of length
/// `n` from any start index. Start indices past `|prefix| + |cycle|` repeat an
/// earlier cycle position, so the supremum is a finite maximum.
pub fn sup_bowen_distance(schedule: &Schedule, metric: &Metric, n: usize, x: &Point, y: &Point) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroParameter("n"));
    }
    Ok(sup_distance_profile(schedule, metric, n, x, y)?[n])
}

/// `[d*_0, d*_1, ..., d*_n_max]` from one walk over all words.
pub fn sup_distance_profile(
    schedule: &Schedule,
    metric: &Metric,
    n_max: usize,
    x: &Point,
    y: &Point,
) -> Result<Vec<f64>> {
    let mut at_depth = alloc::vec![0.0f64; n_max + 1];
    at_depth[0] = metric.distance(x, y)?;
    for start in 1..=schedule.horizon() {
        sup_walk(schedule, metric, start, 1, n_max, *x, *y, &mut at_depth)?;
    }
    for k in 1..=n_max {
        at_depth[k] = at_depth[k].max(at_depth[k - 1]);
    }
    Ok(at_depth)
}

#[allow(clippy::too_many_arguments)]
fn sup_walk(
    schedule: &Schedule,
    metric: &Metric,
    generation: usize,
    depth: usize,
    n_max: usize,
    x: Point,
    y: Point,
    at_depth: &mut [f64],
) -> Result<()> {
    if depth > n_max {
        return Ok(());
    }
    for map in schedule.generation(generation) {
        let (a, b) = (map.apply(&x)?, map.apply(&y)?);
        at_depth[depth] = at_depth[depth].max(metric.distance(&a, &b)?);
        sup_walk(schedule, metric, generation + 1, depth + 1, n_max, a, b, at_depth)?;
    }
    Ok(())
}

/// Orbit table `f_w^{m,j}(x)` for every cloud point and `0 <= j <= steps`.
#[derive(Clone, Debug)]
pub struct Orbits {
    steps: usize,
    points: Vec<Point>,
}

impl Orbits {
    pub fn compute(cloud: &PointCloud, schedule: &Schedule, w: &Word, steps: usize) -> Result<Self> {
        if steps > w.len() {
            return Err(Error::Word(format!("orbit length {steps} exceeds word length {}", w.len())));
        }
        let maps: Vec<_> = (0..steps)
            .map(|t| {
                let j = w.start() + t;
                &schedule.generation(j)[w.symbols()[t] as usize]
            })
            .collect();
        let mut points = Vec::with_capacity(cloud.len() * (steps + 1));
        for x in cloud.points() {
            let mut y = *x;
            points.push(y);
            for m in &maps {
                y = m.apply(&y)?;
                points.push(y);
            }
        }
        Ok(Self { steps, points })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Orbit of cloud point `i`: `steps + 1` points.
    #[inline]
    pub fn orbit(&self, i: usize) -> &[Point] {
        let len = self.steps + 1;
        &self.points[i * len..(i + 1) * len]
    }

    /// `d_{w,steps}` between cloud points `i` and `j`.
    pub fn bowen(&self, metric: &Metric, i: usize, j: usize) -> f64 {
        self.orbit(i).iter().zip(self.orbit(j)).map(|(a, b)| metric.dist(a, b)).fold(0.0, f64::max)
    }

    /// `d_{w,steps}(i, j) <= eps`, stopping at the first step that exceeds it.
    #[inline]
    pub fn within(&self, metric: &Metric, i: usize, j: usize, eps: f64) -> bool {
        self.orbit(i).iter().zip(self.orbit(j)).all(|(a, b)| metric.dist(a, b) <= eps)
    }

    pub fn all_points(&self) -> &[Point] {
        &self.points
    }
}
