//! Finite-n checks of the pressure inequalities and proxy checks of their
//! asymptotic forms, each producing an [`InequalityReport`].

mod basic;
mod factor;
mod power;

pub use basic::{check_basic_properties, BasicParams};
pub use factor::{
    check_conjugacy, check_equicontinuity, check_factor_lower, check_factor_upper, oscillation, EquicontinuityReport,
    ModulusRow, EXHAUSTIVE_PAIR_LIMIT,
};
pub use power::{check_power_rule, check_truncation_monotonicity, growth_rate, GrowthRate};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::naifs::WordMode;
use crate::numeric::{fabs, le_rel, ln, log_mean_exp};
use crate::pressure::{EstimateOptions, PartitionSumResult, SumKind};

/// Relative tolerance for checks whose two sides are computed exactly.
pub const EXACT_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Verdict {
    HoldsExact,
    HoldsWithinTol,
    InconclusiveInexact,
    Violated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::HoldsExact => "holds_exact",
            Verdict::HoldsWithinTol => "holds_within_tol",
            Verdict::InconclusiveInexact => "inconclusive_inexact",
            Verdict::Violated => "violated",
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsExact | Verdict::HoldsWithinTol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Level {
    FiniteNExact,
    AsymptoticProxy,
}

impl Level {
    pub fn as_str(&self) -> &'static str {
        match self {
            Level::FiniteNExact => "finite_n_exact",
            Level::AsymptoticProxy => "asymptotic_proxy",
        }
    }
}

/// Where a report was evaluated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context {
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub word_mode: Option<WordMode>,
    /// Words (or sub-checks) behind the report.
    pub checks: usize,
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some(n) = self.n {
            parts.push(alloc::format!("n={n}"));
        }
        if let Some(e) = self.eps {
            parts.push(alloc::format!("eps={e}"));
        }
        if let Some(m) = self.word_mode {
            parts.push(alloc::format!("words={}", m.as_str()));
        }
        parts.push(alloc::format!("checks={}", self.checks));
        f.write_str(&parts.join(";"))
    }
}

/// One theorem instance: `lhs <= rhs` (or `=`), usually in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub verdict: Verdict,
    pub level: Level,
    pub context: Context,
    /// Proxy tolerance, or the relative tolerance for exact checks.
    pub tolerance: f64,
    pub diagnostics: Vec<(String, f64)>,
}

impl InequalityReport {
    pub(crate) fn new(
        name: &str,
        lhs: f64,
        rhs: f64,
        verdict: Verdict,
        level: Level,
        context: Context,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            verdict,
            level,
            context,
            tolerance,
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.push((key.into(), value));
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.0 == key).map(|d| d.1)
    }
}

/// A log-space quantity with certified bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Bounded {
    pub v: f64,
    pub lo: f64,
    pub hi: f64,
    pub exact: bool,
}

impl Bounded {
    pub fn exact(v: f64) -> Self {
        Self { v, lo: v, hi: v, exact: true }
    }

    pub fn of(r: &PartitionSumResult) -> Self {
        let (lo, hi) = match r.kind {
            SumKind::Separated => (r.log_value, r.log_bound.max(r.log_value)),
            SumKind::Spanning => (r.log_bound.min(r.log_value), r.log_value),
        };
        Self { v: r.log_value, lo, hi, exact: r.exact }
    }

    pub fn count(lower: usize, upper: usize, value: usize, exact: bool) -> Self {
        Self { v: ln(value as f64), lo: ln(lower as f64), hi: ln(upper as f64), exact }
    }

    pub fn plus(self, o: Bounded) -> Self {
        Self { v: self.v + o.v, lo: self.lo + o.lo, hi: self.hi + o.hi, exact: self.exact && o.exact }
    }

    pub fn shift(self, c: f64) -> Self {
        Self { v: self.v + c, lo: self.lo + c, hi: self.hi + c, ..self }
    }

    /// Multiplies by `c >= 0`.
    pub fn scale(self, c: f64) -> Self {
        if c == 0.0 {
            return Self::exact(0.0);
        }
        Self { v: self.v * c, lo: self.lo * c, hi: self.hi * c, ..self }
    }

    /// Word average of per-word quantities.
    pub fn mean(items: &[Bounded]) -> Self {
        let pick = |f: fn(&Bounded) -> f64| log_mean_exp(&items.iter().map(f).collect::<Vec<_>>());
        Self { v: pick(|b| b.v), lo: pick(|b| b.lo), hi: pick(|b| b.hi), exact: items.iter().all(|b| b.exact) }
    }
}

/// `lhs <= rhs`: exact sides give `holds_exact` or `violated`; otherwise the
/// bounds may still certify the inequality, and anything else is inconclusive.
pub(crate) fn verdict_le(lhs: Bounded, rhs: Bounded) -> Verdict {
    if lhs.exact && rhs.exact {
        if le_rel(lhs.v, rhs.v, EXACT_REL_TOL) {
            Verdict::HoldsExact
        } else {
            Verdict::Violated
        }
    } else if le_rel(lhs.hi, rhs.lo, EXACT_REL_TOL) {
        Verdict::HoldsExact
    } else {
        Verdict::InconclusiveInexact
    }
}

/// `lhs = rhs`: decided only when both sides are exact.
pub(crate) fn verdict_eq(lhs: Bounded, rhs: Bounded) -> Verdict {
    if !(lhs.exact && rhs.exact) {
        Verdict::InconclusiveInexact
    } else if le_rel(lhs.v, rhs.v, EXACT_REL_TOL) && le_rel(rhs.v, lhs.v, EXACT_REL_TOL) {
        Verdict::HoldsExact
    } else {
        Verdict::Violated
    }
}

/// `lhs <= rhs + tol` on proxies.
pub(crate) fn verdict_proxy(lhs: f64, rhs: f64, tol: f64) -> Verdict {
    if lhs.is_finite() && rhs.is_finite() && lhs <= rhs + tol {
        Verdict::HoldsWithinTol
    } else {
        Verdict::Violated
    }
}

/// `|lhs - rhs| <= tol` on proxies.
pub(crate) fn verdict_proxy_eq(lhs: f64, rhs: f64, tol: f64) -> Verdict {
    if lhs.is_finite() && rhs.is_finite() && fabs(lhs - rhs) <= tol {
        Verdict::HoldsWithinTol
    } else {
        Verdict::Violated
    }
}

/// One evaluated instance before aggregation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Sub {
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: Verdict,
}

impl Sub {
    pub fn le(lhs: Bounded, rhs: Bounded) -> Self {
        Self { lhs: lhs.v, rhs: rhs.v, verdict: verdict_le(lhs, rhs) }
    }

    pub fn eq(lhs: Bounded, rhs: Bounded) -> Self {
        Self { lhs: lhs.v, rhs: rhs.v, verdict: verdict_eq(lhs, rhs) }
    }
}

/// The most severe sub-check, ties broken by the smallest slack, then order.
pub(crate) fn worst(name: &str, subs: &[Sub], level: Level, mut context: Context) -> InequalityReport {
    context.checks = subs.len();
    let pick = subs
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| {
            a.verdict.cmp(&b.verdict).then((b.rhs - b.lhs).total_cmp(&(a.rhs - a.lhs))).then(j.cmp(i))
        })
        .map(|(_, s)| *s)
        .unwrap_or(Sub { lhs: 0.0, rhs: 0.0, verdict: Verdict::HoldsExact });
    InequalityReport::new(name, pick.lhs, pick.rhs, pick.verdict, level, context, EXACT_REL_TOL)
}

/// `0.05 + 2 log(#cloud) / n_max`.
pub fn default_proxy_tolerance(cloud_size: usize, n_max: usize) -> f64 {
    0.05 + 2.0 * ln(cloud_size as f64) / n_max.max(1) as f64
}

/// Horizons, scales and estimator settings shared by the proxy checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxySettings {
    pub n_range: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub options: EstimateOptions,
    /// `None` uses [`default_proxy_tolerance`].
    pub tol: Option<f64>,
}

impl ProxySettings {
    pub fn new(n_range: Vec<usize>, eps_list: Vec<f64>) -> Self {
        Self { n_range, eps_list, options: EstimateOptions::default(), tol: None }
    }

    pub(crate) fn tolerance(&self, cloud_size: usize) -> f64 {
        self.tol.unwrap_or_else(|| default_proxy_tolerance(cloud_size, self.n_range.last().copied().unwrap_or(1)))
    }

    pub(crate) fn context(&self) -> Context {
        Context { n: self.n_range.last().copied(), eps: self.eps_list.last().copied(), word_mode: None, checks: 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let a = Bounded::exact(1.0);
        let b = Bounded::exact(1.0 + 1e-12);
        assert_eq!(verdict_le(b, a), Verdict::HoldsExact);
        assert_eq!(verdict_le(Bounded::exact(2.0), a), Verdict::Violated);
        let loose = Bounded { v: 2.0, lo: 2.0, hi: 3.0, exact: false };
        assert_eq!(verdict_le(loose, a), Verdict::InconclusiveInexact);
        assert_eq!(verdict_le(a, loose), Verdict::HoldsExact);
        assert_eq!(verdict_eq(a, loose), Verdict::InconclusiveInexact);
        assert_eq!(verdict_proxy(1.04, 1.0, 0.05), Verdict::HoldsWithinTol);
        assert_eq!(verdict_proxy(1.06, 1.0, 0.05), Verdict::Violated);
    }

    #[test]
    fn worst_prefers_violation_then_small_slack() {
        let subs = [
            Sub { lhs: 0.0, rhs: 1.0, verdict: Verdict::HoldsExact },
            Sub { lhs: 0.9, rhs: 1.0, verdict: Verdict::HoldsExact },
            Sub { lhs: 0.0, rhs: 5.0, verdict: Verdict::InconclusiveInexact },
        ];
        let r = worst("t", &subs, Level::FiniteNExact, Context::default());
        assert_eq!((r.verdict, r.lhs, r.context.checks), (Verdict::InconclusiveInexact, 0.0, 3));
        let r = worst("t", &subs[..2], Level::FiniteNExact, Context::default());
        assert_eq!(r.lhs, 0.9);
    }
}
