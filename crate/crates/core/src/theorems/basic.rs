//! Finite-n forms of the elementary pressure properties.

use alloc::format;
use alloc::vec::Vec;

use super::{worst, Bounded, Context, InequalityReport, Level, Sub, EXACT_REL_TOL};
use crate::error::{Error, Result};
use crate::naifs::{enumerate_words, Schedule};
use crate::numeric::{fabs, le_rel, ln};
use crate::par::map_ordered;
use crate::pressure::{seed_for, SolveMode, SumKind, WordInstance};
use crate::space::{PointCloud, Potential};

/// Scale, horizon, convex weight `p` and constant `c` for [`check_basic_properties`].
#[derive(Clone, Debug, PartialEq)]
pub struct BasicParams {
    pub eps: f64,
    pub n: usize,
    /// Convex-combination weight in `[0, 1]`.
    pub p: f64,
    /// Shift constant and scaling factor (`c >= 0`).
    pub c: f64,
    pub word_budget: usize,
    pub seed: u64,
    pub solve: SolveMode,
}

impl BasicParams {
    pub fn new(eps: f64, n: usize, p: f64, c: f64) -> Self {
        Self { eps, n, p, c, word_budget: 4096, seed: 0, solve: SolveMode::Auto }
    }
}

const PHI: usize = 0;
const PSI: usize = 1;
const MAX: usize = 2;
const MIX: usize = 3;
const SHIFTED: usize = 4;
const SUM: usize = 5;
const SCALED: usize = 6;
const ABS: usize = 7;
const NEG_ABS: usize = 8;
const ZERO: usize = 9;

struct WordData {
    sums: Vec<Bounded>,
    count: Bounded,
    inf_phi: f64,
    sup_phi: f64,
    max_abs_phi: f64,
    diff_norm: f64,
}

/// Eight reports, one per property: monotonicity (with the `inf`/`sup`
/// counting bounds), entropy finiteness, Lipschitz dependence on the
/// potential, convexity, constant shift, subadditivity, scaling and the
/// absolute-value bounds. Per-word properties are checked on every word,
/// averaged ones on the word average, and each report carries its worst
/// instance.
pub fn check_basic_properties(
    cloud: &PointCloud,
    schedule: &Schedule,
    phi: &Potential,
    psi: &Potential,
    params: &BasicParams,
) -> Result<Vec<InequalityReport>> {
    let BasicParams { eps, n, p, c, .. } = *params;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("convex weight p must lie in [0, 1], got {p}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("constant c must be finite and non-negative, got {c}")));
    }
    if n == 0 {
        return Err(Error::ZeroParameter("n"));
    }
    crate::pressure::check_eps(eps)?;
    phi.validate_on(cloud)?;
    psi.validate_on(cloud)?;
    let potentials = [
        phi.clone(),
        psi.clone(),
        Potential::max(phi, psi),
        Potential::mix(p, phi, 1.0 - p, psi),
        phi.shifted(c),
        phi.plus(psi),
        phi.scaled(c),
        phi.abs(),
        phi.abs().scaled(-1.0),
        Potential::zero(),
    ];
    let words = enumerate_words(schedule, 1, n, params.word_budget, seed_for(params.seed, n))?;
    let data: Vec<Result<WordData>> = map_ordered(&words.words, |w| {
        let inst = WordInstance::new(cloud, schedule, w, n)?;
        let g = inst.graph(eps)?;
        let mut sums = Vec::with_capacity(potentials.len());
        for pot in &potentials {
            let s = inst.birkhoff(pot)?;
            sums.push(Bounded::of(&inst.partition_sum_on(&g, SumKind::Separated, &s, params.solve)?));
        }
        let sep = crate::pressure::extremal(&g, SumKind::Separated, params.solve)?;
        let count = Bounded::count(sep.lower_bound, sep.upper_bound, sep.value(), sep.exact);
        let visited = inst.orbits().all_points();
        let (mut inf_phi, mut sup_phi, mut max_abs_phi, mut diff_norm) =
            (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
        for x in visited {
            let (a, b) = (phi.eval(x)?, psi.eval(x)?);
            inf_phi = inf_phi.min(a);
            sup_phi = sup_phi.max(a);
            max_abs_phi = max_abs_phi.max(fabs(a));
            diff_norm = diff_norm.max(fabs(a - b));
        }
        Ok(WordData { sums, count, inf_phi, sup_phi, max_abs_phi, diff_norm })
    });
    let data: Vec<WordData> = data.into_iter().collect::<Result<_>>()?;
    let avg: Vec<Bounded> =
        (0..potentials.len()).map(|k| Bounded::mean(&data.iter().map(|d| d.sums[k]).collect::<Vec<_>>())).collect();
    let steps = (n + 1) as f64;
    let ctx = Context { n: Some(n), eps: Some(eps), word_mode: Some(words.mode), checks: 0 };
    let fin = Level::FiniteNExact;
    let mut reports = Vec::with_capacity(8);

    let mut subs = alloc::vec![Sub::le(avg[PHI], avg[MAX])];
    for d in &data {
        subs.push(Sub::le(d.count.shift(steps * d.inf_phi), d.sums[PHI]));
        subs.push(Sub::le(d.sums[PHI], d.count.shift(steps * d.sup_phi)));
    }
    reports.push(worst("monotonicity", &subs, fin, ctx.clone()));

    // Finite pressure exactly when finite entropy: the counting bounds above
    // pin the per-n pressure within (n+1)/n * |phi| of the per-n entropy.
    let lhs = fabs(avg[PHI].v - avg[ZERO].v) / n as f64;
    let rhs = steps / n as f64 * data.iter().map(|d| d.max_abs_phi).fold(0.0, f64::max);
    let exact = avg[PHI].exact && avg[ZERO].exact;
    let verdict = match (lhs.is_finite() && le_rel(lhs, rhs, EXACT_REL_TOL), exact) {
        (true, true) => super::Verdict::HoldsExact,
        (true, false) => super::Verdict::HoldsWithinTol,
        (false, true) => super::Verdict::Violated,
        (false, false) => super::Verdict::InconclusiveInexact,
    };
    reports.push(
        InequalityReport::new(
            "entropy_finiteness",
            lhs,
            rhs,
            verdict,
            Level::AsymptoticProxy,
            Context { checks: 1, ..ctx.clone() },
            EXACT_REL_TOL,
        )
        .with("per_n_pressure", avg[PHI].v / n as f64)
        .with("per_n_entropy", avg[ZERO].v / n as f64),
    );

    let mut subs = Vec::new();
    for d in &data {
        let gap = steps * d.diff_norm;
        subs.push(Sub::le(d.sums[PHI], d.sums[PSI].shift(gap)));
        subs.push(Sub::le(d.sums[PSI], d.sums[PHI].shift(gap)));
    }
    reports.push(worst("lipschitz_potential", &subs, fin, ctx.clone()));

    let holder = avg[PHI].scale(p).plus(avg[PSI].scale(1.0 - p));
    reports.push(worst("convexity", &[Sub::le(avg[MIX], holder)], fin, ctx.clone()));

    let subs: Vec<Sub> = data.iter().map(|d| Sub::eq(d.sums[SHIFTED], d.sums[PHI].shift(steps * c))).collect();
    reports.push(worst("constant_shift", &subs, fin, ctx.clone()));

    let bound = Bounded::exact(ln(data.len() as f64)).plus(avg[PHI]).plus(avg[PSI]);
    reports.push(worst("subadditivity", &[Sub::le(avg[SUM], bound)], fin, ctx.clone()));

    let subs: Vec<Sub> = data
        .iter()
        .map(|d| {
            if c >= 1.0 {
                Sub::le(d.sums[SCALED], d.sums[PHI].scale(c))
            } else {
                Sub::le(d.sums[PHI].scale(c), d.sums[SCALED])
            }
        })
        .collect();
    reports.push(worst("scaling", &subs, fin, ctx.clone()));

    let subs = [Sub::le(avg[NEG_ABS], avg[PHI]), Sub::le(avg[PHI], avg[ABS])];
    reports.push(worst("absolute_bounds", &subs, fin, ctx));
    Ok(reports)
}
