//! Experiment configuration: one JSON document per experiment.

use std::path::{Path, PathBuf};

use naifs_core::naifs::{FactorMap, Projection, Schedule, System};
use naifs_core::pressure::{EstimateOptions, SolveMode, SumKind};
use naifs_core::space::{PointCloud, Potential, SpaceSpec};
use naifs_core::theorems::ProxySettings;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Estimate,
    Verify,
    Sweep,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Estimate => "estimate",
            Mode::Verify => "verify",
            Mode::Sweep => "sweep",
        }
    }
}

/// Theorem groups that `verify` can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Basic,
    Power,
    Truncation,
    Equicontinuity,
    FactorLower,
    FactorUpper,
    Conjugacy,
}

impl Check {
    pub fn as_str(&self) -> &'static str {
        match self {
            Check::Basic => "basic",
            Check::Power => "power",
            Check::Truncation => "truncation",
            Check::Equicontinuity => "equicontinuity",
            Check::FactorLower => "factor_lower",
            Check::FactorUpper => "factor_upper",
            Check::Conjugacy => "conjugacy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    pub space: SpaceSpec,
    pub schedule: Schedule,
    /// `psi`, the potential whose pressure is estimated.
    #[serde(default = "Potential::zero")]
    pub potential: Potential,
    /// `phi`, the second potential of the basic-property checks.
    #[serde(default = "Potential::zero")]
    pub phi: Potential,
    #[serde(default)]
    pub factor: Option<FactorConfig>,
    /// Inclusive horizon interval `[n_min, n_max]`.
    pub n_range: [usize; 2],
    pub eps_list: Vec<f64>,
    #[serde(default = "default_word_budget")]
    pub word_budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solve: SolveMode,
    #[serde(default = "default_resolution_fraction")]
    pub resolution_fraction: f64,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<SumKind>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Proxy tolerance; defaults to `0.05 + 2 log(#cloud) / n_max`.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub target_space: SpaceSpec,
    pub target_schedule: Schedule,
    pub projection: Projection,
    /// `phi` on the target.
    #[serde(default = "Potential::zero")]
    pub potential: Potential,
    /// Defaults to `2^-(D - n_max)` for symbolic sources of depth `D`, else `1e-12`.
    #[serde(default)]
    pub semiconjugacy_tol: Option<f64>,
    #[serde(default = "default_fiber_sample")]
    pub fiber_sample: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Defaults to basic, power and truncation, plus the factor checks when a
    /// factor is configured.
    #[serde(default)]
    pub checks: Option<Vec<Check>>,
    /// Scale of the basic checks; defaults to the smallest `eps`.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Horizon of the basic checks; defaults to `min(n_max, 4)`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Block length of the power system.
    #[serde(default = "default_power")]
    pub power: usize,
    /// Horizons `m` of the power-system checks; defaults to `[1, max(1, n_max / power)]`.
    #[serde(default)]
    pub m_range: Option<[usize; 2]>,
    /// Truncation indices `[i, j]`, `1 <= i < j`.
    #[serde(default = "default_truncation")]
    pub truncation: [usize; 2],
    /// Rerun a violated proxy check once with doubled `n_max` and resolution.
    #[serde(default = "default_true")]
    pub escalate: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            checks: None,
            eps: None,
            n: None,
            p: default_p(),
            c: default_c(),
            power: default_power(),
            m_range: None,
            truncation: default_truncation(),
            escalate: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Grid sizes or symbolic depths; empty keeps the configured space.
    #[serde(default)]
    pub resolutions: Vec<usize>,
    /// Scales; defaults to `eps_list`.
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
}

fn default_word_budget() -> usize {
    EstimateOptions::default().word_budget
}

fn default_resolution_fraction() -> f64 {
    EstimateOptions::default().resolution_fraction
}

fn default_kinds() -> Vec<SumKind> {
    EstimateOptions::default().kinds
}

fn default_fiber_sample() -> usize {
    16
}

fn default_p() -> f64 {
    0.5
}

fn default_c() -> f64 {
    2.0
}

fn default_power() -> usize {
    2
}

fn default_truncation() -> [usize; 2] {
    [1, 2]
}

fn default_true() -> bool {
    true
}

/// Parses a config, reporting the JSON path of the first offending field.
pub fn parse(text: &str) -> Result<ExperimentConfig, LabError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        LabError::Config(if path == "." { e.inner().to_string() } else { format!("{path}: {}", e.inner()) })
    })?;
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    let echo = serde_json::to_value(&config).map_err(|e| LabError::Config(e.to_string()))?;
    if let Some(path) = stray_key(&raw, &echo, String::new()) {
        return Err(LabError::Config(format!("{path}: unknown field")));
    }
    config.validate()?;
    Ok(config)
}

// Unit variants of tagged enums silently drop extra keys; anything the parsed
// config does not serialize back was ignored.
fn stray_key(raw: &serde_json::Value, echo: &serde_json::Value, path: String) -> Option<String> {
    use serde_json::Value;
    match (raw, echo) {
        (Value::Object(r), Value::Object(e)) => r.iter().find_map(|(k, v)| {
            let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            match e.get(k) {
                Some(ev) => stray_key(v, ev, sub),
                None => Some(sub),
            }
        }),
        (Value::Array(r), Value::Array(e)) => {
            r.iter().zip(e).enumerate().find_map(|(i, (rv, ev))| stray_key(rv, ev, format!("{path}[{i}]")))
        }
        _ => None,
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

fn field(name: &str, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("{name}: {msg}"))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        let [lo, hi] = self.n_range;
        if lo == 0 || lo > hi {
            return Err(field("n_range", format!("need 1 <= n_min <= n_max, got [{lo}, {hi}]")));
        }
        check_eps_list("eps_list", &self.eps_list)?;
        if self.word_budget == 0 {
            return Err(field("word_budget", "must be positive"));
        }
        if !(self.resolution_fraction > 0.0 && self.resolution_fraction <= 1.0) {
            return Err(field("resolution_fraction", "must lie in (0, 1]"));
        }
        if self.kinds.is_empty() {
            return Err(field("kinds", "must not be empty"));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(field("tol", "must be a nonnegative number"));
            }
        }
        let v = &self.verify;
        if !(0.0..=1.0).contains(&v.p) {
            return Err(field("verify.p", "must lie in [0, 1]"));
        }
        if !(v.c >= 0.0 && v.c.is_finite()) {
            return Err(field("verify.c", "must be a nonnegative number"));
        }
        if v.power == 0 {
            return Err(field("verify.power", "must be positive"));
        }
        if let Some([a, b]) = v.m_range {
            if a == 0 || a > b {
                return Err(field("verify.m_range", format!("need 1 <= m_min <= m_max, got [{a}, {b}]")));
            }
        }
        let [i, j] = v.truncation;
        if i == 0 || i >= j {
            return Err(field("verify.truncation", format!("need 1 <= i < j, got [{i}, {j}]")));
        }
        if let Some(checks) = &v.checks {
            let factor_checks = [Check::FactorLower, Check::FactorUpper, Check::Conjugacy];
            if self.factor.is_none() && checks.iter().any(|c| factor_checks.contains(c)) {
                return Err(field("verify.checks", "factor checks need a `factor` section"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.resolutions.contains(&0) {
                return Err(field("sweep.resolutions", "must be positive"));
            }
            if let Some(e) = &s.eps {
                check_eps_list("sweep.eps", e)?;
            }
        }
        if self.mode == Mode::Sweep && self.sweep.is_none() {
            return Err(field("sweep", "required in sweep mode"));
        }
        if let Some(f) = &self.factor {
            if f.fiber_sample == 0 {
                return Err(field("factor.fiber_sample", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn n_values(&self) -> Vec<usize> {
        (self.n_range[0]..=self.n_range[1]).collect()
    }

    pub fn n_max(&self) -> usize {
        self.n_range[1]
    }

    pub fn estimate_options(&self) -> EstimateOptions {
        EstimateOptions {
            word_budget: self.word_budget,
            seed: self.seed,
            solve: self.solve,
            resolution_fraction: self.resolution_fraction,
            kinds: self.kinds.clone(),
        }
    }

    pub fn proxy_settings(&self) -> ProxySettings {
        ProxySettings {
            options: self.estimate_options(),
            tol: self.tol,
            ..ProxySettings::new(self.n_values(), self.eps_list.clone())
        }
    }

    pub fn checks(&self) -> Vec<Check> {
        match &self.verify.checks {
            Some(c) => {
                let mut c = c.clone();
                c.dedup();
                c
            }
            None => {
                let mut c = vec![Check::Basic, Check::Power, Check::Truncation];
                if self.factor.is_some() {
                    c.extend([Check::FactorLower, Check::FactorUpper]);
                }
                c
            }
        }
    }

    /// The source system `(X, Phi)`.
    pub fn system(&self) -> Result<System, LabError> {
        let cloud = PointCloud::build(&self.space).map_err(|e| field("space", e))?;
        System::new(cloud, self.schedule.clone()).map_err(|e| field("schedule", e))
    }

    pub fn factor_map(&self) -> Result<Option<(FactorMap, &FactorConfig)>, LabError> {
        let Some(f) = &self.factor else { return Ok(None) };
        let source = self.system()?;
        let cloud = PointCloud::build(&f.target_space).map_err(|e| field("factor.target_space", e))?;
        let target = System::new(cloud, f.target_schedule.clone()).map_err(|e| field("factor.target_schedule", e))?;
        let map = FactorMap::new(source, target, f.projection.clone()).map_err(|e| field("factor", e))?;
        Ok(Some((map, f)))
    }

    pub fn semiconjugacy_tol(&self) -> f64 {
        let explicit = self.factor.as_ref().and_then(|f| f.semiconjugacy_tol);
        explicit.unwrap_or_else(|| match self.space {
            SpaceSpec::SymbolicDepth { depth, .. } => 2f64.powi(self.n_max() as i32 - depth as i32),
            _ => 1e-12,
        })
    }

    /// The same experiment at doubled `n_max` and doubled resolution (one more
    /// symbol of depth for symbolic spaces), on both sides of a factor.
    pub fn escalated(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.n_range[1] *= 2;
        c.space = escalate_space(&self.space);
        if let Some(f) = &mut c.factor {
            f.target_space = escalate_space(&f.target_space);
        }
        c
    }

    /// Name used in reports: the configured name or the file stem.
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }
}

fn escalate_space(space: &SpaceSpec) -> SpaceSpec {
    match space {
        SpaceSpec::SymbolicDepth { depth, .. } => space.with_resolution(depth + 1),
        _ => space.resolution().map_or_else(|| space.clone(), |r| space.with_resolution(2 * r)),
    }
}

fn check_eps_list(name: &str, eps: &[f64]) -> Result<(), LabError> {
    if eps.is_empty() {
        return Err(field(name, "must not be empty"));
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(field(name, "entries must be positive and finite"));
    }
    if eps.windows(2).any(|w| w[0] <= w[1]) {
        return Err(field(name, "must be strictly decreasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "space": {"family": "circle_grid", "resolution": 64},
        "schedule": {"cycle": [[{"kind": "doubling"}]]},
        "n_range": [1, 4],
        "eps_list": [0.25, 0.125]
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Estimate);
        assert_eq!(c.word_budget, 256);
        assert_eq!(c.n_values(), vec![1, 2, 3, 4]);
        assert_eq!(c.checks(), vec![Check::Basic, Check::Power, Check::Truncation]);
    }

    #[test]
    fn missing_field_is_named() {
        let text = MINIMAL.replace(",\n        \"eps_list\": [0.25, 0.125]", "");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("missing field `eps_list`"), "{err}");
    }

    #[test]
    fn nested_errors_carry_their_path() {
        let err = parse(&MINIMAL.replace("doubling", "dubling")).unwrap_err().to_string();
        assert!(err.contains("schedule.cycle[0][0].kind"), "{err}");
        let err = parse(&MINIMAL.replace("[0.25, 0.125]", "[0.125, 0.25]")).unwrap_err().to_string();
        assert!(err.contains("eps_list") && err.contains("decreasing"), "{err}");
        let err = parse(&MINIMAL.replace("\"n_range\"", "\"bogus\": 1, \"n_range\"")).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let err = parse(&MINIMAL.replace(r#""doubling""#, r#""doubling", "a": 2"#)).unwrap_err().to_string();
        assert!(err.contains("schedule.cycle[0][0].a: unknown field"), "{err}");
    }

    #[test]
    fn escalation_doubles_resolution_and_horizon() {
        let c = parse(MINIMAL).unwrap().escalated();
        assert_eq!(c.n_range, [1, 8]);
        assert_eq!(c.space, SpaceSpec::CircleGrid { resolution: 128 });
    }
}
