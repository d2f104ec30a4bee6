//! End-to-end certification: adaptive design rounds against a simulated
//! device, then an accept/reject decision against the producer's spec, and
//! Monte Carlo estimates of the probability of deciding correctly.

use std::f64::consts::PI;

use rand::SeedableRng;
use rayon::prelude::*;

use crate::design::{select_best_exhaustive, ActionSequence, UtilityKind};
use crate::rng::{trial_rng, TrialRng};
use crate::smc::{LikelihoodModel, ParticleFilter, PriorSampling};
use crate::{Error, Result};

/// Claimed interval `[center - half_width, center + half_width]`, closed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spec {
    pub center: f64,
    pub half_width: f64,
}

impl Spec {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !center.is_finite() || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spec {center} +/- {half_width} needs a finite centre and positive half-width"
            )));
        }
        Ok(Spec { center, half_width })
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower() && x <= self.upper()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Accept,
    Reject,
    Inconclusive,
}

/// How much of the HPD region lies inside the spec.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RegionMeasure {
    /// Posterior weight of the region's particles.
    #[default]
    Weight,
    /// Length of the span `[min, max]` of the region's particles.
    Length,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecisionCriterion {
    /// Accept iff the posterior mean lies in the spec.
    Mean,
    /// Accept (reject) if at least `threshold` of the `credibility` HPD
    /// region lies inside (outside) the spec.
    Hpd {
        credibility: f64,
        threshold: f64,
        measure: RegionMeasure,
    },
}

impl DecisionCriterion {
    pub fn hpd() -> Self {
        DecisionCriterion::Hpd {
            credibility: 0.95,
            threshold: 0.95,
            measure: RegionMeasure::Weight,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DecisionCriterion::Mean => "MEAN",
            DecisionCriterion::Hpd { measure: RegionMeasure::Weight, .. } => "HPD",
            DecisionCriterion::Hpd { measure: RegionMeasure::Length, .. } => "HPD-LENGTH",
        }
    }

    fn validate(&self) -> Result<()> {
        if let DecisionCriterion::Hpd { credibility, threshold, .. } = *self {
            if !(credibility > 0.0 && credibility < 1.0) || !(threshold > 0.5 && threshold <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "HPD credibility {credibility} must be in (0, 1) and threshold {threshold} in (0.5, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub fn decide_mean(f: &ParticleFilter, spec: &Spec) -> Decision {
    if spec.contains(f.posterior_mean()) {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

pub fn decide_hpd(f: &ParticleFilter, spec: &Spec, credibility: f64, threshold: f64, measure: RegionMeasure) -> Result<Decision> {
    let region = f.hpd_region(credibility)?;
    let (inside, outside) = match measure {
        RegionMeasure::Weight => {
            let total: f64 = region.iter().map(|&i| f.weights()[i]).sum();
            let inside: f64 = region
                .iter()
                .filter(|&&i| spec.contains(f.locations()[i]))
                .map(|&i| f.weights()[i])
                .sum();
            (inside / total, (total - inside) / total)
        }
        RegionMeasure::Length => {
            let xs = region.iter().map(|&i| f.locations()[i]);
            let lo = xs.clone().fold(f64::INFINITY, f64::min);
            let hi = xs.fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                let overlap = (hi.min(spec.upper()) - lo.max(spec.lower())).max(0.0);
                let inside = overlap / (hi - lo);
                (inside, 1.0 - inside)
            } else if spec.contains(lo) {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            }
        }
    };
    Ok(if inside >= threshold {
        Decision::Accept
    } else if outside >= threshold {
        Decision::Reject
    } else {
        Decision::Inconclusive
    })
}

pub fn decide(f: &ParticleFilter, spec: &Spec, criterion: &DecisionCriterion) -> Result<Decision> {
    match *criterion {
        DecisionCriterion::Mean => Ok(decide_mean(f, spec)),
        DecisionCriterion::Hpd { credibility, threshold, measure } => decide_hpd(f, spec, credibility, threshold, measure),
    }
}

/// Device under test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    /// z rotation; the parameter is the angle.
    PhaseGate,
    /// Dephasing gate with per-application time `t`; the parameter is the
    /// decay rate.
    Dephasing { omega: f64, t: f64 },
}

impl ModelKind {
    pub fn likelihood_model(&self) -> Result<LikelihoodModel> {
        match *self {
            ModelKind::PhaseGate => Ok(LikelihoodModel::phase_gate()),
            ModelKind::Dephasing { omega, t } => LikelihoodModel::dephasing(omega, t),
        }
    }

    pub fn default_support(&self) -> (f64, f64) {
        match self {
            ModelKind::PhaseGate => (-PI, PI),
            ModelKind::Dephasing { .. } => (0.0, 1.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::PhaseGate => "phase-gate",
            ModelKind::Dephasing { .. } => "dephasing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificationConfig {
    pub model: ModelKind,
    pub x_true: f64,
    pub spec: Spec,
    pub support: (f64, f64),
    pub n_particles: usize,
    /// Total number of actions `N0`; the protocol runs `N0 / m` rounds.
    pub n0: usize,
    pub m: usize,
    pub utility: UtilityKind,
    pub criterion: DecisionCriterion,
    pub sampling: PriorSampling,
}

impl CertificationConfig {
    /// Defaults: 2000 particles, `N0 = 300`, `m = 1`, MI utility, MEAN
    /// criterion, the model's default prior support.
    pub fn new(model: ModelKind, x_true: f64, spec: Spec) -> Self {
        CertificationConfig {
            model,
            x_true,
            spec,
            support: model.default_support(),
            n_particles: 2000,
            n0: 300,
            m: 1,
            utility: UtilityKind::MutualInformation,
            criterion: DecisionCriterion::Mean,
            sampling: PriorSampling::Stratified,
        }
    }

    pub fn rounds(&self) -> usize {
        self.n0 / self.m
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("prior support [{lo}, {hi}] is degenerate")));
        }
        if self.m == 0 || self.n0 < self.m || self.n0 % self.m != 0 {
            return Err(Error::InvalidParameter(format!(
                "action budget N0 = {} must be a positive multiple of m = {}",
                self.n0, self.m
            )));
        }
        if self.n_particles < 2 {
            return Err(Error::InvalidParameter("need at least two particles".into()));
        }
        if !self.x_true.is_finite() {
            return Err(Error::InvalidParameter("true parameter must be finite".into()));
        }
        if self.spec.upper() < lo || self.spec.lower() > hi {
            return Err(Error::InvalidParameter("spec interval misses the prior support".into()));
        }
        self.criterion.validate()?;
        self.model.likelihood_model().map(|_| ())
    }
}

/// State reported to a [`run_trial_observed`] observer after every round.
#[derive(Debug)]
pub struct RoundInfo<'a> {
    /// Rounds completed so far, starting at 1.
    pub round: usize,
    /// Actions used so far, `round * m`.
    pub actions_used: usize,
    pub sequence: &'a ActionSequence,
    pub filter: &'a ParticleFilter,
}

/// Final state of one simulated certification run.
#[derive(Clone, Debug)]
pub struct TrialRun {
    pub filter: ParticleFilter,
    pub sequences: Vec<ActionSequence>,
    /// The filter became impoverished and the run stopped early.
    pub aborted: bool,
}

impl TrialRun {
    /// Decision and success of this run for one spec and criterion.
    pub fn record(&self, x_true: f64, spec: &Spec, criterion: &DecisionCriterion) -> Result<TrialRecord> {
        let decision = if self.aborted {
            Decision::Inconclusive
        } else {
            decide(&self.filter, spec, criterion)?
        };
        let in_spec = spec.contains(x_true);
        let success = matches!(
            (decision, in_spec),
            (Decision::Accept, true) | (Decision::Reject, false)
        );
        Ok(TrialRecord {
            decision,
            posterior_mean: self.filter.posterior_mean(),
            posterior_variance: self.filter.posterior_variance(),
            sequences: self.sequences.clone(),
            in_spec,
            success,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub decision: Decision,
    pub posterior_mean: f64,
    pub posterior_variance: f64,
    pub sequences: Vec<ActionSequence>,
    /// Whether the true parameter lies in the spec.
    pub in_spec: bool,
    pub success: bool,
}

/// Runs the protocol with `rng` driving both the device and the filter.
pub fn run_trial_observed(
    cfg: &CertificationConfig,
    mut rng: TrialRng,
    mut observer: impl FnMut(&RoundInfo<'_>),
) -> Result<TrialRun> {
    cfg.validate()?;
    let model = cfg.model.likelihood_model()?;
    let filter_rng = TrialRng::from_rng(&mut rng);
    let mut filter = ParticleFilter::init_uniform_with(cfg.support, cfg.n_particles, cfg.sampling, filter_rng)?;
    let mut sequences = Vec::with_capacity(cfg.rounds());
    for round in 1..=cfg.rounds() {
        let (seq, _, table) = select_best_exhaustive(&filter, &model, cfg.m, cfg.utility)?;
        let outcomes = model.sample_outcomes(cfg.x_true, &seq, &mut rng)?;
        let likelihoods = table.likelihoods(&seq, &outcomes)?;
        match filter.update(&likelihoods) {
            Ok(()) => {}
            Err(Error::Impoverished { total_likelihood }) => {
                log::warn!("trial aborted in round {round}: total likelihood {total_likelihood:e}");
                sequences.push(seq);
                return Ok(TrialRun {
                    filter,
                    sequences,
                    aborted: true,
                });
            }
            Err(e) => return Err(e),
        }
        observer(&RoundInfo {
            round,
            actions_used: round * cfg.m,
            sequence: &seq,
            filter: &filter,
        });
        sequences.push(seq);
    }
    Ok(TrialRun {
        filter,
        sequences,
        aborted: false,
    })
}

/// Trial `index` of the batch seeded by `master_seed`.
pub fn run_trial(cfg: &CertificationConfig, master_seed: u64, index: u64) -> Result<TrialRun> {
    run_trial_observed(cfg, trial_rng(master_seed, index), |_| {})
}

/// `n_trials` independent runs, in trial order regardless of scheduling.
pub fn run_trials(cfg: &CertificationConfig, n_trials: usize, master_seed: u64) -> Result<Vec<TrialRun>> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    cfg.validate()?;
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(cfg, master_seed, i))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessEstimate {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    /// `sqrt(p (1 - p) / n)`
    pub stderr: f64,
}

impl SuccessEstimate {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        let p = successes as f64 / trials as f64;
        SuccessEstimate {
            successes,
            trials,
            estimate: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Success fraction of `runs` for one spec and criterion.
pub fn success_from_runs(runs: &[TrialRun], x_true: f64, spec: &Spec, criterion: &DecisionCriterion) -> Result<SuccessEstimate> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument("no trials".into()));
    }
    let mut successes = 0;
    for run in runs {
        if run.record(x_true, spec, criterion)?.success {
            successes += 1;
        }
    }
    Ok(SuccessEstimate::from_counts(successes, runs.len()))
}

pub fn success_probability(cfg: &CertificationConfig, n_trials: usize, master_seed: u64) -> Result<SuccessEstimate> {
    let runs = run_trials(cfg, n_trials, master_seed)?;
    success_from_runs(&runs, cfg.x_true, &cfg.spec, &cfg.criterion)
}
