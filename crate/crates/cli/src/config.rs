//! TOML run configuration. Unknown keys are rejected everywhere.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qcertify_core::{DecisionCriterion, ModelKind, PriorSampling, RegionMeasure, UtilityKind};

use crate::error::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub chernoff: Option<ChernoffConfig>,
    pub certify: Option<CertifyConfig>,
    pub convergence: Option<ConvergenceConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

/// Inclusive arithmetic grid `start, start + step, ...` up to `stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(config_error(field, "range bounds must be finite"));
        }
        if !(self.step > 0.0) {
            return Err(config_error(field, format!("step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(config_error(field, format!("empty range: stop {} < start {}", self.stop, self.start)));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(config_error(field, "range has more than a million points"));
        }
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Ideal `R(theta)` against `R(theta + eps)`.
    QuantumPhaseGate,
    /// Ideal `R(theta)` against `R(theta + eps)`, `eps` uniform on `[0, w]`.
    RandomError,
    /// Analytic dephasing exponent at the optimal input.
    Dephasing,
    /// Leading small-`eps` term of the dephasing exponent.
    DephasingSmallEps,
    /// `sigma_x` measurement statistics of the phase gate.
    ClassicalPhaseGate,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::QuantumPhaseGate => "quantum-phase-gate",
            BoundKind::RandomError => "random-error",
            BoundKind::Dephasing => "dephasing",
            BoundKind::DephasingSmallEps => "dephasing-small-eps",
            BoundKind::ClassicalPhaseGate => "classical-phase-gate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    Theta,
    /// The error magnitude: `eps`, or the width `w` for random errors.
    Eps,
    Tau,
    /// Polar angle of the pure input state.
    Alpha,
}

impl SweepVariable {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVariable::Theta => "theta",
            SweepVariable::Eps => "eps",
            SweepVariable::Tau => "tau",
            SweepVariable::Alpha => "alpha",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernoffConfig {
    pub bound: BoundKind,
    pub sweep: SweepVariable,
    pub range: Range,
    /// Channel applications per copy.
    #[serde(default = "default_iterations")]
    pub iterations: Vec<u32>,
    /// Error magnitudes, one output series each; ignored when sweeping `eps`.
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    /// Maximise over pure inputs instead of using `(alpha, beta)`.
    #[serde(default)]
    pub optimize_input: bool,
}

fn default_iterations() -> Vec<u32> {
    vec![1]
}

fn default_theta() -> f64 {
    PI
}

fn default_tau() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    PI / 2.0
}

fn default_nodes() -> usize {
    qcertify_core::channels::DEFAULT_QUADRATURE_NODES
}

impl ChernoffConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.range.values("chernoff.range")?;
        if self.iterations.is_empty() || self.iterations.contains(&0) {
            return Err(config_error("chernoff.iterations", "need a non-empty list of positive counts"));
        }
        if self.sweep != SweepVariable::Eps && self.eps.is_empty() {
            return Err(config_error("chernoff.eps", "need at least one error magnitude unless sweeping eps"));
        }
        let allowed: &[SweepVariable] = match self.bound {
            BoundKind::QuantumPhaseGate | BoundKind::RandomError => &[SweepVariable::Theta, SweepVariable::Eps, SweepVariable::Alpha],
            BoundKind::Dephasing | BoundKind::DephasingSmallEps => &[SweepVariable::Tau, SweepVariable::Eps],
            BoundKind::ClassicalPhaseGate => &[SweepVariable::Theta, SweepVariable::Eps],
        };
        if !allowed.contains(&self.sweep) {
            return Err(config_error(
                "chernoff.sweep",
                format!("cannot sweep {} for bound {}", self.sweep.label(), self.bound.label()),
            ));
        }
        if self.optimize_input && !matches!(self.bound, BoundKind::QuantumPhaseGate | BoundKind::RandomError) {
            return Err(config_error("chernoff.optimize_input", "only available for phase-gate bounds"));
        }
        if self.optimize_input && self.sweep == SweepVariable::Alpha {
            return Err(config_error("chernoff.optimize_input", "cannot both sweep and optimise the input"));
        }
        if self.quadrature_nodes == 0 {
            return Err(config_error("chernoff.quadrature_nodes", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    PhaseGate,
    Dephasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionName {
    Mean,
    Hpd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureName {
    Weight,
    Length,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingName {
    Stratified,
    Iid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UtilityName {
    #[serde(rename = "MI")]
    Mi,
    #[serde(rename = "VAR")]
    Var,
}

impl From<UtilityName> for UtilityKind {
    fn from(u: UtilityName) -> Self {
        match u {
            UtilityName::Mi => UtilityKind::MutualInformation,
            UtilityName::Var => UtilityKind::Variance,
        }
    }
}

/// Device and filter settings shared by `certify` and `convergence`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSection {
    pub model: ModelName,
    pub x_true: f64,
    /// Precession rate of the dephasing model.
    pub omega: f64,
    /// Evolution time per dephasing-channel application.
    pub t: f64,
    /// Prior support; defaults to `[-pi, pi]` or `[0, 1]`.
    pub support: Option<[f64; 2]>,
    pub particles: usize,
    pub sampling: SamplingName,
}

fn default_t() -> f64 {
    5.0
}

fn default_particles() -> usize {
    2000
}

fn default_sampling() -> SamplingName {
    SamplingName::Stratified
}

impl ModelSection {
    pub fn kind(&self) -> ModelKind {
        match self.model {
            ModelName::PhaseGate => ModelKind::PhaseGate,
            ModelName::Dephasing => ModelKind::Dephasing { omega: self.omega, t: self.t },
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self.support {
            Some([lo, hi]) => (lo, hi),
            None => self.kind().default_support(),
        }
    }

    pub fn sampling(&self) -> PriorSampling {
        match self.sampling {
            SamplingName::Stratified => PriorSampling::Stratified,
            SamplingName::Iid => PriorSampling::Iid,
        }
    }

    fn validate(&self, section: &str) -> Result<(), CliError> {
        let (lo, hi) = self.support();
        if !(lo < hi) {
            return Err(config_error(&format!("{section}.support"), "lower bound must be below upper bound"));
        }
        if self.particles < 2 {
            return Err(config_error(&format!("{section}.particles"), "need at least two particles"));
        }
        if !self.x_true.is_finite() {
            return Err(config_error(&format!("{section}.x_true"), "must be finite"));
        }
        if self.model == ModelName::Dephasing && !(self.t >= 0.0 && self.t.is_finite() && self.omega.is_finite()) {
            return Err(config_error(&format!("{section}.t"), "dephasing needs finite omega and t >= 0"));
        }
        Ok(())
    }
}

/// Spec centres: an explicit list or a range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Centers {
    List(Vec<f64>),
    Range(Range),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub model: ModelName,
    pub x_true: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    pub support: Option<[f64; 2]>,
    #[serde(default = "default_particles")]
    pub particles: usize,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingName,
    pub half_width: f64,
    pub centers: Centers,
    #[serde(default = "default_n0")]
    pub n0: usize,
    pub m: Vec<usize>,
    #[serde(default = "default_utilities")]
    pub utility: Vec<UtilityName>,
    #[serde(default = "default_criteria")]
    pub criterion: Vec<CriterionName>,
    #[serde(default = "default_measure")]
    pub hpd_measure: MeasureName,
    #[serde(default = "default_level")]
    pub credibility: f64,
    #[serde(default = "default_level")]
    pub threshold: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_n0() -> usize {
    300
}

fn default_utilities() -> Vec<UtilityName> {
    vec![UtilityName::Mi]
}

fn default_criteria() -> Vec<CriterionName> {
    vec![CriterionName::Mean]
}

fn default_measure() -> MeasureName {
    MeasureName::Weight
}

fn default_level() -> f64 {
    0.95
}

fn default_trials() -> usize {
    100
}

impl CertifyConfig {
    pub fn device(&self) -> ModelSection {
        ModelSection {
            model: self.model,
            x_true: self.x_true,
            omega: self.omega,
            t: self.t,
            support: self.support,
            particles: self.particles,
            sampling: self.sampling,
        }
    }

    pub fn center_values(&self) -> Result<Vec<f64>, CliError> {
        let values = match &self.centers {
            Centers::List(v) => v.clone(),
            Centers::Range(r) => r.values("certify.centers")?,
        };
        if values.is_empty() {
            return Err(config_error("certify.centers", "no spec centres"));
        }
        Ok(values)
    }

    pub fn criteria(&self) -> Vec<DecisionCriterion> {
        self.criterion
            .iter()
            .map(|c| match c {
                CriterionName::Mean => DecisionCriterion::Mean,
                CriterionName::Hpd => DecisionCriterion::Hpd {
                    credibility: self.credibility,
                    threshold: self.threshold,
                    measure: match self.hpd_measure {
                        MeasureName::Weight => RegionMeasure::Weight,
                        MeasureName::Length => RegionMeasure::Length,
                    },
                },
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.device().validate("certify")?;
        if !(self.half_width > 0.0) {
            return Err(config_error("certify.half_width", "must be positive"));
        }
        let centers = self.center_values()?;
        let (lo, hi) = self.device().support();
        if let Some(c) = centers.iter().find(|&&c| !(c + self.half_width >= lo && c - self.half_width <= hi)) {
            return Err(config_error("certify.centers", format!("spec around {c} misses the prior support")));
        }
        validate_m_list("certify.m", &self.m, &[self.n0])?;
        if self.utility.is_empty() {
            return Err(config_error("certify.utility", "need at least one utility"));
        }
        if self.criterion.is_empty() {
            return Err(config_error("certify.criterion", "need at least one criterion"));
        }
        if !(self.credibility > 0.0 && self.credibility < 1.0) {
            return Err(config_error("certify.credibility", "must be in (0, 1)"));
        }
        if !(self.threshold > 0.5 && self.threshold <= 1.0) {
            return Err(config_error("certify.threshold", "must be in (0.5, 1]"));
        }
        if self.trials == 0 {
            return Err(config_error("certify.trials", "need at least one trial"));
        }
        Ok(())
    }
}

fn validate_m_list(field: &str, m: &[usize], budgets: &[usize]) -> Result<(), CliError> {
    if m.is_empty() {
        return Err(config_error(field, "need at least one batch length"));
    }
    for &mi in m {
        if mi == 0 {
            return Err(config_error(field, "batch length must be positive"));
        }
        if let Some(n0) = budgets.iter().find(|&&n0| n0 < mi || n0 % mi != 0) {
            return Err(config_error(field, format!("action budget {n0} is not a positive multiple of m = {mi}")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub model: ModelName,
    pub x_true: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    pub support: Option<[f64; 2]>,
    #[serde(default = "default_particles")]
    pub particles: usize,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingName,
    /// Action budgets at which the posterior is recorded.
    pub n0: Vec<usize>,
    pub m: Vec<usize>,
    #[serde(default = "default_utility")]
    pub utility: UtilityName,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Smallest budget in the power-law fit; defaults to two decades below
    /// the largest.
    pub fit_min_n0: Option<usize>,
}

fn default_utility() -> UtilityName {
    UtilityName::Mi
}

impl ConvergenceConfig {
    pub fn device(&self) -> ModelSection {
        ModelSection {
            model: self.model,
            x_true: self.x_true,
            omega: self.omega,
            t: self.t,
            support: self.support,
            particles: self.particles,
            sampling: self.sampling,
        }
    }

    pub fn budgets(&self) -> Vec<usize> {
        let mut n0 = self.n0.clone();
        n0.sort_unstable();
        n0.dedup();
        n0
    }

    pub fn fit_min(&self) -> f64 {
        match self.fit_min_n0 {
            Some(v) => v as f64,
            None => self.budgets().last().map_or(0.0, |&max| max as f64 / 100.0),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.device().validate("convergence")?;
        if self.n0.is_empty() {
            return Err(config_error("convergence.n0", "need at least one budget"));
        }
        validate_m_list("convergence.m", &self.m, &self.n0)?;
        if self.trials == 0 {
            return Err(config_error("convergence.trials", "need at least one trial"));
        }
        let fit_points = self.budgets().iter().filter(|&&n| n as f64 >= self.fit_min()).count();
        if fit_points < 3 {
            return Err(config_error("convergence.fit_min_n0", "power-law fit needs at least three budgets"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        let r = Range { start: 0.0, stop: 1.0, step: 0.25 };
        assert_eq!(r.values("r").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Range { start: 1.0, stop: 0.0, step: 0.1 }.values("r").is_err());
        assert!(Range { start: 0.0, stop: 1.0, step: 0.0 }.values("r").is_err());
        let r = Range { start: 0.1, stop: 0.3, step: 0.1 };
        assert_eq!(r.values("r").unwrap().len(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ConfigFile::parse("[certify]\nmodel = \"phase-gate\"\nx_tru = 0.3\n").unwrap_err();
        assert!(matches!(err, CliError::Config(msg) if msg.contains("x_tru")));
        assert!(ConfigFile::parse("sed = 3\n").is_err());
    }

    #[test]
    fn certify_section_parses() {
        let cfg = ConfigFile::parse(
            r#"
            seed = 4
            [certify]
            model = "dephasing"
            x_true = 0.1
            half_width = 0.03
            centers = [0.1, 0.2]
            m = [1, 2, 3]
            utility = ["MI", "VAR"]
            criterion = ["mean", "hpd"]
            trials = 10
            "#,
        )
        .unwrap();
        let c = cfg.certify.unwrap();
        c.validate().unwrap();
        assert_eq!(c.device().support(), (0.0, 1.0));
        assert_eq!(c.criteria().len(), 2);
        assert_eq!(c.t, 5.0);
    }

    #[test]
    fn certify_rejects_bad_budgets() {
        let cfg = ConfigFile::parse(
            r#"
            [certify]
            model = "phase-gate"
            x_true = 0.3
            half_width = 0.1
            centers = { start = 0.0, stop = 0.5, step = 0.1 }
            n0 = 300
            m = [7]
            "#,
        )
        .unwrap();
        assert!(cfg.certify.unwrap().validate().is_err());
    }
}
