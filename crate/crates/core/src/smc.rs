//! Sequential Monte Carlo approximation of the posterior over one scalar
//! channel parameter, with the Born-rule likelihood of measurement batches.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::channels::{Channel, DephasingGate, DephasingParams, PhaseGate, PhaseGateParams};
use crate::design::{ActionSequence, Outcome};
use crate::qstate::{born_probability, measurement_update, Axis, DensityMatrix, PovmElement};
use crate::rng::TrialRng;
use crate::{Error, Result};

/// Liu–West shrinkage parameter.
pub const LIU_WEST_A: f64 = 0.98;
/// Resample when the effective sample size drops below this fraction of `n`.
pub const RESAMPLE_THRESHOLD: f64 = 0.5;
/// Bayes updates whose total likelihood falls below this are impoverished.
pub const MIN_TOTAL_LIKELIHOOD: f64 = 1e-300;

/// How the initial particle locations are drawn from the uniform prior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PriorSampling {
    /// One uniform draw inside each of `n` equal-width strata.
    #[default]
    Stratified,
    /// `n` independent uniform draws.
    Iid,
}

/// Channel family whose scalar parameter is inferred.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelFamily {
    /// Parameter is the rotation angle `theta`.
    PhaseGate { axis: Axis },
    /// Parameter is the decay rate `gamma`; `omega` and the per-application
    /// time `t` are fixed.
    Dephasing { omega: f64, t: f64 },
}

/// One application of the channel at a given parameter value.
#[derive(Clone, Copy, Debug)]
pub enum ParticleChannel {
    Gate(PhaseGate),
    Dephasing(DephasingGate),
}

impl Channel for ParticleChannel {
    #[inline]
    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        match self {
            ParticleChannel::Gate(g) => g.apply(rho),
            ParticleChannel::Dephasing(g) => g.apply(rho),
        }
    }

    fn iterate(&self, rho: &DensityMatrix, n: u32) -> Result<DensityMatrix> {
        match self {
            ParticleChannel::Gate(g) => g.iterate(rho, n),
            ParticleChannel::Dephasing(g) => g.iterate(rho, n),
        }
    }
}

/// Born-rule likelihood of outcome records under the interleaved protocol:
/// starting from `rho_in`, every action is preceded by one channel
/// application; measurement actions condition the state on their outcome,
/// identity actions consume no outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodModel {
    family: ChannelFamily,
    rho_in: DensityMatrix,
}

impl LikelihoodModel {
    pub fn new(family: ChannelFamily, rho_in: DensityMatrix) -> Result<Self> {
        if let ChannelFamily::Dephasing { omega, t } = family {
            // validates omega and t
            DephasingParams::new(omega, 0.0, t)?;
        }
        Ok(LikelihoodModel { family, rho_in })
    }

    /// z rotation probed with `|+>`.
    pub fn phase_gate() -> Self {
        LikelihoodModel {
            family: ChannelFamily::PhaseGate { axis: Axis::Z },
            rho_in: DensityMatrix::plus(),
        }
    }

    /// Dephasing gate probed with `|+>`.
    pub fn dephasing(omega: f64, t: f64) -> Result<Self> {
        Self::new(ChannelFamily::Dephasing { omega, t }, DensityMatrix::plus())
    }

    pub fn family(&self) -> ChannelFamily {
        self.family
    }

    pub fn input_state(&self) -> &DensityMatrix {
        &self.rho_in
    }

    /// `Phi_x`. Negative decay rates are clamped to zero.
    pub fn channel(&self, x: f64) -> ParticleChannel {
        match self.family {
            ChannelFamily::PhaseGate { axis } => {
                ParticleChannel::Gate(PhaseGate::new(PhaseGateParams { theta: x, axis }))
            }
            ChannelFamily::Dephasing { omega, t } => {
                let params = DephasingParams::new(omega, x.max(0.0), t)
                    .expect("omega and t validated at construction");
                ParticleChannel::Dephasing(DephasingGate::new(params))
            }
        }
    }

    /// `Pr(outcomes | x, seq)`, the product of conditional Born
    /// probabilities along the branch.
    pub fn sequence_likelihood(&self, x: f64, seq: &ActionSequence, outcomes: &[Outcome]) -> Result<f64> {
        let expected = seq.measurement_count();
        if outcomes.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "sequence has {expected} measurements but {} outcomes were given",
                outcomes.len()
            )));
        }
        let channel = self.channel(x);
        let mut rho = self.rho_in;
        let mut next = outcomes.iter();
        let mut likelihood = 1.0;
        for action in seq.actions() {
            rho = channel.apply(&rho);
            if let Some(axis) = action.axis() {
                let outcome = *next.next().expect("outcome count checked");
                let element = PovmElement::projector(&axis, outcome == Outcome::Plus);
                match measurement_update(&element, &rho) {
                    Ok((p, post)) => {
                        likelihood *= p;
                        rho = post;
                    }
                    Err(Error::ZeroProbabilityOutcome { .. }) => return Ok(0.0),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(likelihood)
    }

    /// Runs the device with parameter `x` through `seq`, drawing outcomes
    /// from `rng`.
    pub fn sample_outcomes<R: Rng + ?Sized>(&self, x: f64, seq: &ActionSequence, rng: &mut R) -> Result<Vec<Outcome>> {
        let channel = self.channel(x);
        let mut rho = self.rho_in;
        let mut outcomes = Vec::with_capacity(seq.measurement_count());
        for action in seq.actions() {
            rho = channel.apply(&rho);
            if let Some(axis) = action.axis() {
                let plus = PovmElement::projector(&axis, true);
                let p_plus = born_probability(&plus, &rho);
                let outcome = if rng.random::<f64>() < p_plus {
                    Outcome::Plus
                } else {
                    Outcome::Minus
                };
                let element = PovmElement::projector(&axis, outcome == Outcome::Plus);
                rho = measurement_update(&element, &rho)?.1;
                outcomes.push(outcome);
            }
        }
        Ok(outcomes)
    }
}

/// Weighted point-mass approximation `sum_i w_i delta(x - x_i)` of a
/// distribution over one scalar parameter.
#[derive(Clone, Debug)]
pub struct ParticleFilter {
    locations: Vec<f64>,
    weights: Vec<f64>,
    support: (f64, f64),
    rng: TrialRng,
}

fn check_support(support: (f64, f64)) -> Result<()> {
    let (lo, hi) = support;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "prior support [{lo}, {hi}] is degenerate"
        )));
    }
    Ok(())
}

impl ParticleFilter {
    /// Uniform prior on `support` with stratified locations, seeded from
    /// `seed`.
    pub fn init_uniform(support: (f64, f64), n_particles: usize, seed: u64) -> Result<Self> {
        Self::init_uniform_with(support, n_particles, PriorSampling::default(), TrialRng::seed_from_u64(seed))
    }

    /// Uniform prior using `rng` for the initial draw and for all later
    /// resampling.
    pub fn init_uniform_with(
        support: (f64, f64),
        n_particles: usize,
        sampling: PriorSampling,
        mut rng: TrialRng,
    ) -> Result<Self> {
        check_support(support)?;
        if n_particles < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two particles, got {n_particles}"
            )));
        }
        let (lo, hi) = support;
        let n = n_particles as f64;
        let locations = (0..n_particles)
            .map(|i| {
                let u: f64 = rng.random();
                let t = match sampling {
                    PriorSampling::Stratified => (i as f64 + u) / n,
                    PriorSampling::Iid => u,
                };
                (lo + t * (hi - lo)).clamp(lo, hi)
            })
            .collect();
        Ok(ParticleFilter {
            locations,
            weights: vec![1.0 / n; n_particles],
            support,
            rng,
        })
    }

    /// Filter with explicit particles; `weights` are normalised.
    pub fn from_particles(locations: Vec<f64>, weights: Vec<f64>, support: (f64, f64), seed: u64) -> Result<Self> {
        check_support(support)?;
        if locations.len() != weights.len() || locations.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need matching location/weight arrays of length >= 2, got {} and {}",
                locations.len(),
                weights.len()
            )));
        }
        if let Some(x) = locations.iter().find(|&&x| !(x >= support.0 && x <= support.1)) {
            return Err(Error::InvalidParameter(format!(
                "location {x} outside support [{}, {}]",
                support.0, support.1
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        Ok(ParticleFilter {
            locations,
            weights: weights.into_iter().map(|w| w / total).collect(),
            support,
            rng: TrialRng::seed_from_u64(seed),
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `1 / sum_i w_i^2`
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn posterior_mean(&self) -> f64 {
        self.weights.iter().zip(&self.locations).map(|(w, x)| w * x).sum()
    }

    pub fn posterior_variance(&self) -> f64 {
        let mean = self.posterior_mean();
        self.weights
            .iter()
            .zip(&self.locations)
            .map(|(w, x)| w * (x - mean) * (x - mean))
            .sum::<f64>()
            .max(0.0)
    }

    /// Bayes rule `w_i <- w_i L_i / sum_j w_j L_j`, without resampling.
    /// The filter is left untouched on error.
    pub fn bayes_update(&mut self, likelihoods: &[f64]) -> Result<()> {
        if likelihoods.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} likelihoods for {} particles",
                likelihoods.len(),
                self.len()
            )));
        }
        if likelihoods.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument("likelihoods must be finite and non-negative".into()));
        }
        let total: f64 = self.weights.iter().zip(likelihoods).map(|(w, l)| w * l).sum();
        if !(total > MIN_TOTAL_LIKELIHOOD) {
            return Err(Error::Impoverished { total_likelihood: total });
        }
        for (w, l) in self.weights.iter_mut().zip(likelihoods) {
            *w = *w * l / total;
        }
        Ok(())
    }

    /// Bayes update followed by Liu–West resampling when the effective
    /// sample size falls below `n/2`.
    pub fn update(&mut self, likelihoods: &[f64]) -> Result<()> {
        self.bayes_update(likelihoods)?;
        if self.effective_sample_size() < RESAMPLE_THRESHOLD * self.len() as f64 {
            self.resample();
        }
        Ok(())
    }

    /// Updates on the outcomes of one batch of actions.
    pub fn batch_update(&mut self, model: &LikelihoodModel, seq: &ActionSequence, outcomes: &[Outcome]) -> Result<()> {
        let likelihoods = self
            .locations
            .iter()
            .map(|&x| model.sequence_likelihood(x, seq, outcomes))
            .collect::<Result<Vec<_>>>()?;
        self.update(&likelihoods)
    }

    /// Liu–West resampling: `x' = a x_j + (1-a) mu + N(0, (1-a²) Sigma)`
    /// with `j ~ w`, clipped to the support; weights reset to `1/n`.
    pub fn resample(&mut self) {
        let n = self.len();
        let mean = self.posterior_mean();
        let variance = self.posterior_variance();
        let index = WeightedIndex::new(&self.weights).expect("weights are normalised");
        let (lo, hi) = self.support;
        let a = LIU_WEST_A;
        let sd = ((1.0 - a * a) * variance).sqrt();
        let mut locations = Vec::with_capacity(n);
        for _ in 0..n {
            let x = self.locations[index.sample(&mut self.rng)];
            let new = if variance > 0.0 {
                let z: f64 = self.rng.sample(StandardNormal);
                a * x + (1.0 - a) * mean + sd * z
            } else {
                x
            };
            locations.push(new.clamp(lo, hi));
        }
        self.locations = locations;
        self.weights = vec![1.0 / n as f64; n];
    }

    /// Highest-weight particles, heaviest first (ties by location), up to
    /// the first prefix reaching `credibility` of the total weight.
    pub fn hpd_region(&self, credibility: f64) -> Result<Vec<usize>> {
        if !(credibility > 0.0 && credibility < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "credibility {credibility} not in (0, 1)"
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| {
            self.weights[j]
                .total_cmp(&self.weights[i])
                .then(self.locations[i].total_cmp(&self.locations[j]))
        });
        let mut cumulative = 0.0;
        let mut region = Vec::new();
        for i in order {
            region.push(i);
            cumulative += self.weights[i];
            if cumulative >= credibility - 1e-12 {
                break;
            }
        }
        Ok(region)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Action::{Identity, MeasureX, MeasureY};
    use crate::design::{outcome_assignments, Action, ActionSequence};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn seq(actions: &[Action]) -> ActionSequence {
        ActionSequence::new(actions.to_vec()).unwrap()
    }

    #[test]
    fn init_uniform_examples() {
        let f = ParticleFilter::init_uniform((-PI, PI), 2000, 1).unwrap();
        assert_eq!(f.len(), 2000);
        assert!(f.weights().iter().all(|&w| w == 5e-4));
        assert!(f.locations().iter().all(|&x| (-PI..=PI).contains(&x)));
        let g = ParticleFilter::init_uniform((0.0, 1.0), 2, 7).unwrap();
        assert_eq!(g.weights(), &[0.5, 0.5]);
        let again = ParticleFilter::init_uniform((-PI, PI), 2000, 1).unwrap();
        assert_eq!(f.locations(), again.locations());
        assert!(ParticleFilter::init_uniform((1.0, 1.0), 10, 0).is_err());
        assert!(ParticleFilter::init_uniform((0.0, 1.0), 1, 0).is_err());
    }

    #[test]
    fn iid_sampling_is_uniform() {
        let f = ParticleFilter::init_uniform_with((-PI, PI), 4000, PriorSampling::Iid, TrialRng::seed_from_u64(3)).unwrap();
        assert!(f.posterior_mean().abs() < 4.0 * (PI * PI / 3.0 / 4000.0).sqrt());
        assert!((f.posterior_variance() - PI * PI / 3.0).abs() < 0.15);
    }

    #[test]
    fn uniform_moments() {
        let f = ParticleFilter::init_uniform((-PI, PI), 2000, 5).unwrap();
        assert!(f.posterior_mean().abs() < 0.01);
        assert!((f.posterior_variance() - PI * PI / 3.0).abs() < 0.01);
        let d = ParticleFilter::from_particles(vec![0.3, 0.3], vec![1.0, 1.0], (0.0, 1.0), 0).unwrap();
        assert_eq!(d.posterior_mean(), 0.3);
        assert_eq!(d.posterior_variance(), 0.0);
    }

    #[test]
    fn likelihood_examples() {
        let model = LikelihoodModel::phase_gate();
        assert_eq!(model.sequence_likelihood(0.4, &seq(&[Identity, Identity]), &[]).unwrap(), 1.0);
        let theta: f64 = 0.7;
        let p = model.sequence_likelihood(theta, &seq(&[MeasureX]), &[Outcome::Plus]).unwrap();
        assert!((p - (theta / 2.0).cos().powi(2)).abs() < 1e-14);
        let p = model.sequence_likelihood(theta, &seq(&[Identity, Identity, MeasureX]), &[Outcome::Plus]).unwrap();
        assert!((p - (1.5 * theta).cos().powi(2)).abs() < 1e-14);
        assert!(matches!(
            model.sequence_likelihood(theta, &seq(&[MeasureX]), &[]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn dephasing_likelihood_uses_accumulated_time() {
        let model = LikelihoodModel::dephasing(0.0, 5.0).unwrap();
        let gamma = 0.1;
        let p = model.sequence_likelihood(gamma, &seq(&[Identity, MeasureX]), &[Outcome::Plus]).unwrap();
        assert!((p - 0.5 * (1.0 + (-gamma * 10.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn bayes_update_examples() {
        let mut f = ParticleFilter::from_particles(vec![0.1, 0.2], vec![0.5, 0.5], (0.0, 1.0), 0).unwrap();
        f.bayes_update(&[1.0, 1.0]).unwrap();
        assert_eq!(f.weights(), &[0.5, 0.5]);
        f.bayes_update(&[0.8, 0.4]).unwrap();
        assert!((f.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        let before = f.weights().to_vec();
        assert!(matches!(f.bayes_update(&[0.0, 0.0]), Err(Error::Impoverished { .. })));
        assert_eq!(f.weights(), &before[..]);
    }

    #[test]
    fn effective_sample_size_examples() {
        let f = ParticleFilter::init_uniform((0.0, 1.0), 2000, 0).unwrap();
        assert!((f.effective_sample_size() - 2000.0).abs() < 1e-9);
        let g = ParticleFilter::from_particles(vec![0.1, 0.2, 0.3], vec![1.0, 0.0, 0.0], (0.0, 1.0), 0).unwrap();
        assert_eq!(g.effective_sample_size(), 1.0);
        let h = ParticleFilter::from_particles(vec![0.1, 0.2], vec![0.75, 0.25], (0.0, 1.0), 0).unwrap();
        assert!((h.effective_sample_size() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn resample_single_location() {
        let mut f = ParticleFilter::from_particles(vec![0.4; 5], vec![1.0; 5], (0.0, 1.0), 0).unwrap();
        f.resample();
        assert!(f.locations().iter().all(|&x| x == 0.4));
        assert!(f.weights().iter().all(|&w| w == 0.2));
    }

    #[test]
    fn resample_preserves_mean_and_variance() {
        let locations: Vec<f64> = (0..200).map(|i| 0.2 + 0.003 * i as f64).collect();
        let weights: Vec<f64> = locations.iter().map(|x| (-(x - 0.5) * (x - 0.5) / 0.02).exp()).collect();
        let original = ParticleFilter::from_particles(locations, weights, (0.0, 1.0), 11).unwrap();
        let (mu, var) = (original.posterior_mean(), original.posterior_variance());
        let mut probe = original.clone();
        let mut means = Vec::new();
        let mut vars = Vec::new();
        for _ in 0..200 {
            let mut f = original.clone();
            f.rng = probe.rng.clone();
            f.resample();
            probe.rng = f.rng.clone();
            assert!(f.weights().iter().all(|&w| w == 1.0 / 200.0));
            means.push(f.posterior_mean());
            vars.push(f.posterior_variance());
        }
        let m = means.iter().sum::<f64>() / 200.0;
        let sd = (means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 199.0).sqrt();
        assert!((m - mu).abs() < 3.0 * sd / 200f64.sqrt(), "mean {m} vs {mu}");
        let v = vars.iter().sum::<f64>() / 200.0;
        assert!((v - var).abs() / var < 0.05, "variance {v} vs {var}");
    }

    #[test]
    fn posterior_concentrates_on_truth() {
        let model = LikelihoodModel::phase_gate();
        let truth = PI / 10.0;
        let mut f = ParticleFilter::init_uniform((-PI, PI), 2000, 2).unwrap();
        let mut rng = TrialRng::seed_from_u64(9);
        for k in 0..300 {
            let s = seq(&[if k % 2 == 0 { MeasureX } else { MeasureY }]);
            let outcomes = model.sample_outcomes(truth, &s, &mut rng).unwrap();
            f.batch_update(&model, &s, &outcomes).unwrap();
        }
        let sd = f.posterior_variance().sqrt();
        assert!((f.posterior_mean() - truth).abs() < 3.0 * sd.max(1e-3));
        assert!(sd < 0.15);
    }

    #[test]
    fn variance_decays_like_inverse_updates() {
        let model = LikelihoodModel::phase_gate();
        let truth = PI / 10.0;
        let mut total = 0.0;
        let runs = 10;
        for r in 0..runs {
            let mut f = ParticleFilter::init_uniform((-PI, PI), 1000, r).unwrap();
            let mut rng = TrialRng::seed_from_u64(100 + r);
            for k in 0..200 {
                let s = seq(&[if k % 2 == 0 { MeasureX } else { MeasureY }]);
                let outcomes = model.sample_outcomes(truth, &s, &mut rng).unwrap();
                f.batch_update(&model, &s, &outcomes).unwrap();
            }
            total += f.posterior_variance();
        }
        let mean_var = total / runs as f64;
        // each measurement carries unit Fisher information
        assert!(mean_var > 0.3 / 200.0 && mean_var < 3.0 / 200.0, "{mean_var}");
    }

    #[test]
    fn hpd_examples() {
        let f = ParticleFilter::init_uniform((0.0, 1.0), 100, 0).unwrap();
        assert_eq!(f.hpd_region(0.95).unwrap().len(), 95);
        let g = ParticleFilter::from_particles(vec![0.5, 0.1, 0.9], vec![0.9, 0.05, 0.05], (0.0, 1.0), 0).unwrap();
        assert_eq!(g.hpd_region(0.9).unwrap(), vec![0]);
        assert!(g.hpd_region(1.0).is_err());
    }

    #[test]
    fn hpd_of_unimodal_weights_is_contiguous() {
        let locations: Vec<f64> = (0..300).map(|i| i as f64 / 299.0).collect();
        let weights: Vec<f64> = locations.iter().map(|x| (-(x - 0.37) * (x - 0.37) / 0.01).exp()).collect();
        let f = ParticleFilter::from_particles(locations, weights, (0.0, 1.0), 0).unwrap();
        let mut region = f.hpd_region(0.95).unwrap();
        region.sort_unstable();
        assert!(region.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn deterministic_replay() {
        let run = || {
            let model = LikelihoodModel::phase_gate();
            let mut f = ParticleFilter::init_uniform((-PI, PI), 500, 4).unwrap();
            let mut rng = TrialRng::seed_from_u64(8);
            for _ in 0..50 {
                let s = seq(&[MeasureX]);
                let o = model.sample_outcomes(0.3, &s, &mut rng).unwrap();
                f.batch_update(&model, &s, &o).unwrap();
            }
            (f.locations().to_vec(), f.weights().to_vec())
        };
        assert_eq!(run(), run());
    }

    fn all_sequences(m: usize) -> Vec<ActionSequence> {
        crate::design::enumerate_sequences(&crate::design::ACTION_SET, m).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn branch_likelihoods_sum_to_one(x in -PI..PI, gamma in 0.0f64..1.0, m in 1usize..=3) {
            let models = [
                (LikelihoodModel::phase_gate(), x),
                (LikelihoodModel::dephasing(0.3, 5.0).unwrap(), gamma),
            ];
            for (model, value) in models {
                for s in all_sequences(m) {
                    let total: f64 = outcome_assignments(&s)
                        .iter()
                        .map(|o| model.sequence_likelihood(value, &s, o).unwrap())
                        .sum();
                    prop_assert!((total - 1.0).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn batch_update_factorises(x1 in -PI..PI, x2 in -PI..PI, x3 in -PI..PI, o1: bool, o2: bool) {
            let model = LikelihoodModel::phase_gate();
            let out = |b: bool| if b { Outcome::Plus } else { Outcome::Minus };
            let base = ParticleFilter::from_particles(vec![x1, x2, x3], vec![0.2, 0.3, 0.5], (-PI, PI), 0).unwrap();
            let mut joint = base.clone();
            let pair = seq(&[MeasureX, MeasureY]);
            let lik: Vec<f64> = base.locations().iter().map(|&x| model.sequence_likelihood(x, &pair, &[out(o1), out(o2)]).unwrap()).collect();
            prop_assume!(joint.bayes_update(&lik).is_ok());
            // sequential: first outcome, then the second conditioned on the first
            let mut seq_f = base.clone();
            let first: Vec<f64> = base.locations().iter().map(|&x| model.sequence_likelihood(x, &seq(&[MeasureX]), &[out(o1)]).unwrap()).collect();
            let second: Vec<f64> = lik.iter().zip(&first).map(|(l, f)| if *f > 0.0 { l / f } else { 0.0 }).collect();
            seq_f.bayes_update(&first).unwrap();
            seq_f.bayes_update(&second).unwrap();
            for (a, b) in joint.weights().iter().zip(seq_f.weights()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn weights_stay_normalised(seed in 0u64..1000, n in 2usize..50) {
            let model = LikelihoodModel::phase_gate();
            let mut f = ParticleFilter::init_uniform((-PI, PI), n, seed).unwrap();
            let mut rng = TrialRng::seed_from_u64(seed + 1);
            for _ in 0..20 {
                let s = seq(&[MeasureY]);
                let o = model.sample_outcomes(0.5, &s, &mut rng).unwrap();
                if f.batch_update(&model, &s, &o).is_err() { break; }
                prop_assert!((f.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
                prop_assert!(f.weights().iter().all(|&w| w >= 0.0));
                prop_assert!(f.locations().iter().all(|&x| (-PI..=PI).contains(&x)));
            }
        }
    }
}
