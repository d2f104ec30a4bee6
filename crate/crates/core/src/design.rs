//! Non-greedy experimental design: all length-`m` action sequences are
//! scored by an expected utility over the current particle posterior and
//! the best one is run next.
//!
//! Two scorers are provided. The generic one evaluates
//! [`LikelihoodModel::sequence_likelihood`] for every particle and branch.
//! [`SegmentTable`] exploits that a projective measurement leaves a known
//! eigenstate, so a branch likelihood is a product of per-segment Born
//! probabilities that depend only on the segment's start state, its number
//! of channel applications and the measured axis.

use std::fmt;
use std::str::FromStr;

use crate::qstate::{born_probability, Axis, DensityMatrix, PovmElement};
use crate::smc::{LikelihoodModel, ParticleFilter};
use crate::channels::Channel;
use crate::{Error, Result};

/// Largest batch length that is enumerated without a warning.
pub const MAX_BATCH_LENGTH: usize = 4;
/// Utilities closer than this (relative to `max(1, |u|)`) count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    MeasureX,
    MeasureY,
    /// Apply the channel again without measuring.
    Identity,
}

/// Default action set, in tie-breaking order.
pub const ACTION_SET: [Action; 3] = [Action::MeasureX, Action::MeasureY, Action::Identity];

impl Action {
    pub fn axis(&self) -> Option<Axis> {
        match self {
            Action::MeasureX => Some(Axis::X),
            Action::MeasureY => Some(Axis::Y),
            Action::Identity => None,
        }
    }

    pub fn is_measurement(&self) -> bool {
        !matches!(self, Action::Identity)
    }

    pub fn symbol(&self) -> char {
        match self {
            Action::MeasureX => 'X',
            Action::MeasureY => 'Y',
            Action::Identity => 'I',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn index(&self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

/// An ordered batch of actions run between two filter updates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionSequence(Vec<Action>);

impl ActionSequence {
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidArgument("action sequence is empty".into()));
        }
        Ok(ActionSequence(actions))
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn measurement_count(&self) -> usize {
        self.0.iter().filter(|a| a.is_measurement()).count()
    }

    pub fn identity_count(&self) -> usize {
        self.len() - self.measurement_count()
    }

    pub fn contains_identity(&self) -> bool {
        self.identity_count() > 0
    }
}

impl fmt::Display for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{}", a.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for ActionSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let actions = s
            .chars()
            .map(|c| match c {
                'X' | 'x' => Ok(Action::MeasureX),
                'Y' | 'y' => Ok(Action::MeasureY),
                'I' | 'i' => Ok(Action::Identity),
                other => Err(Error::InvalidArgument(format!("unknown action '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        ActionSequence::new(actions)
    }
}

/// One outcome record of a sequence with its prior-predictive probability.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeBranch {
    pub index: usize,
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum UtilityKind {
    /// Expected information gain against the prior before the batch.
    #[default]
    MutualInformation,
    /// Negative expected posterior variance.
    Variance,
}

impl UtilityKind {
    pub fn label(&self) -> &'static str {
        match self {
            UtilityKind::MutualInformation => "MI",
            UtilityKind::Variance => "VAR",
        }
    }
}

impl FromStr for UtilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mi" => Ok(UtilityKind::MutualInformation),
            "var" => Ok(UtilityKind::Variance),
            _ => Err(Error::InvalidArgument(format!("unknown utility '{s}'"))),
        }
    }
}

/// All `|action_set|^m` sequences in lexicographic order of `action_set`.
pub fn enumerate_sequences(action_set: &[Action], m: usize) -> Result<Vec<ActionSequence>> {
    if m == 0 {
        return Err(Error::InvalidArgument("batch length must be at least 1".into()));
    }
    if action_set.is_empty() {
        return Err(Error::InvalidArgument("action set is empty".into()));
    }
    if m > MAX_BATCH_LENGTH {
        log::warn!(
            "batch length {m} enumerates {} sequences",
            action_set.len().pow(m as u32)
        );
    }
    let mut out: Vec<Vec<Action>> = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                action_set.iter().map(move |&a| {
                    let mut next = prefix.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(ActionSequence).collect())
}

/// Outcome records of `seq`, branch `k` being the binary expansion of `k`
/// with the first measurement most significant and `Plus = 0`.
pub fn outcome_assignments(seq: &ActionSequence) -> Vec<Vec<Outcome>> {
    let n = seq.measurement_count();
    (0..1usize << n)
        .map(|k| {
            (0..n)
                .map(|j| Outcome::from_index((k >> (n - 1 - j)) & 1))
                .collect()
        })
        .collect()
}

fn branch_likelihoods(f: &ParticleFilter, model: &LikelihoodModel, seq: &ActionSequence, outcomes: &[Outcome]) -> Result<Vec<f64>> {
    f.locations()
        .iter()
        .map(|&x| model.sequence_likelihood(x, seq, outcomes))
        .collect()
}

/// `p_k = sum_i w_i Pr(D_k | x_i)` for every branch of `seq`.
pub fn branch_probabilities(f: &ParticleFilter, model: &LikelihoodModel, seq: &ActionSequence) -> Result<Vec<OutcomeBranch>> {
    outcome_assignments(seq)
        .into_iter()
        .enumerate()
        .map(|(index, outcomes)| {
            let lik = branch_likelihoods(f, model, seq, &outcomes)?;
            let probability = f.weights().iter().zip(&lik).map(|(w, l)| w * l).sum();
            Ok(OutcomeBranch {
                index,
                outcomes,
                probability,
            })
        })
        .collect()
}

/// Kullback–Leibler divergence `sum_i w'_i ln(w'_i / w_i)` of `after` from
/// `before` on a shared particle support.
pub fn information_gain(before: &[f64], after: &[f64]) -> Result<f64> {
    if before.len() != after.len() {
        return Err(Error::InvalidArgument(format!(
            "weight arrays differ in length ({} vs {})",
            before.len(),
            after.len()
        )));
    }
    let mut ig = 0.0;
    for (index, (&w, &w_new)) in before.iter().zip(after).enumerate() {
        if w_new > 0.0 {
            if w <= 0.0 {
                return Err(Error::UndefinedDivergence { index });
            }
            ig += w_new * (w_new / w).ln();
        }
    }
    Ok(ig)
}

/// Normalised `w_i L_i`, or `None` for a branch of zero probability.
fn hypothetical_weights(weights: &[f64], likelihoods: &[f64]) -> Option<(f64, Vec<f64>)> {
    let p: f64 = weights.iter().zip(likelihoods).map(|(w, l)| w * l).sum();
    if p <= 0.0 {
        return None;
    }
    Some((p, weights.iter().zip(likelihoods).map(|(w, l)| w * l / p).collect()))
}

fn weighted_variance(weights: &[f64], locations: &[f64]) -> f64 {
    let mean: f64 = weights.iter().zip(locations).map(|(w, x)| w * x).sum();
    weights
        .iter()
        .zip(locations)
        .map(|(w, x)| w * (x - mean) * (x - mean))
        .sum::<f64>()
        .max(0.0)
}

/// `sum_k p_k IG_k` over all branches of `seq`.
pub fn mutual_information_utility(f: &ParticleFilter, model: &LikelihoodModel, seq: &ActionSequence) -> Result<f64> {
    let mut mi = 0.0;
    for outcomes in outcome_assignments(seq) {
        let lik = branch_likelihoods(f, model, seq, &outcomes)?;
        if let Some((p, after)) = hypothetical_weights(f.weights(), &lik) {
            mi += p * information_gain(f.weights(), &after)?;
        }
    }
    Ok(mi)
}

/// `-sum_k p_k Var(x | D_k)`.
pub fn variance_utility(f: &ParticleFilter, model: &LikelihoodModel, seq: &ActionSequence) -> Result<f64> {
    let mut expected = 0.0;
    for outcomes in outcome_assignments(seq) {
        let lik = branch_likelihoods(f, model, seq, &outcomes)?;
        if let Some((p, after)) = hypothetical_weights(f.weights(), &lik) {
            expected += p * weighted_variance(&after, f.locations());
        }
    }
    Ok(-expected)
}

pub fn utility(f: &ParticleFilter, model: &LikelihoodModel, seq: &ActionSequence, kind: UtilityKind) -> Result<f64> {
    match kind {
        UtilityKind::MutualInformation => mutual_information_utility(f, model, seq),
        UtilityKind::Variance => variance_utility(f, model, seq),
    }
}

/// Index of the first maximum; values within the tie tolerance of the
/// running best do not replace it.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b + TIE_TOLERANCE * b.abs().max(1.0) => best = Some((i, v)),
            _ => {}
        }
    }
    best.map(|(i, _)| i)
}

/// Highest-utility sequence of `sequences`, earliest on ties.
pub fn select_best(
    f: &ParticleFilter,
    model: &LikelihoodModel,
    sequences: &[ActionSequence],
    kind: UtilityKind,
) -> Result<ActionSequence> {
    if sequences.is_empty() {
        return Err(Error::InvalidArgument("no candidate sequences".into()));
    }
    let scores = sequences
        .iter()
        .map(|s| utility(f, model, s, kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(sequences[argmax_first(&scores).expect("non-empty")].clone())
}

/// Segment start states: the input, then the post-measurement eigenstates.
const START_INPUT: usize = 0;

fn post_measurement_start(axis: usize, outcome: usize) -> usize {
    1 + 2 * axis + outcome
}

fn axis_index(action: Action) -> Option<usize> {
    match action {
        Action::MeasureX => Some(0),
        Action::MeasureY => Some(1),
        Action::Identity => None,
    }
}

/// Per-particle `Pr(+ | start, k, axis)` for all segment starts, up to `m`
/// channel applications per segment, and both measurement axes.
#[derive(Clone, Debug)]
pub struct SegmentTable {
    m: usize,
    n_particles: usize,
    n_starts: usize,
    plus: Vec<f64>,
}

impl SegmentTable {
    pub fn new(f: &ParticleFilter, model: &LikelihoodModel, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("batch length must be at least 1".into()));
        }
        let starts: Vec<DensityMatrix> = if m == 1 {
            vec![*model.input_state()]
        } else {
            let mut s = vec![*model.input_state()];
            for axis in [Axis::X, Axis::Y] {
                for positive in [true, false] {
                    s.push(DensityMatrix::from_matrix(*PovmElement::projector(&axis, positive).matrix())?);
                }
            }
            s
        };
        let n = f.len();
        let n_starts = starts.len();
        let plus_x = PovmElement::projector(&Axis::X, true);
        let plus_y = PovmElement::projector(&Axis::Y, true);
        let mut plus = vec![0.0; n_starts * m * 2 * n];
        for (i, &x) in f.locations().iter().enumerate() {
            let channel = model.channel(x);
            for (s, start) in starts.iter().enumerate() {
                let mut rho = *start;
                for k in 0..m {
                    rho = channel.apply(&rho);
                    let base = (s * m + k) * 2;
                    plus[base * n + i] = born_probability(&plus_x, &rho);
                    plus[(base + 1) * n + i] = born_probability(&plus_y, &rho);
                }
            }
        }
        Ok(SegmentTable {
            m,
            n_particles: n,
            n_starts,
            plus,
        })
    }

    pub fn batch_length(&self) -> usize {
        self.m
    }

    /// `Pr(+)` for every particle after `k >= 1` applications from `start`.
    fn column(&self, start: usize, k: usize, axis: usize) -> &[f64] {
        debug_assert!(start < self.n_starts && (1..=self.m).contains(&k));
        let base = ((start * self.m + k - 1) * 2 + axis) * self.n_particles;
        &self.plus[base..base + self.n_particles]
    }

    /// Likelihood of `outcomes` under `seq` for every particle.
    pub fn likelihoods(&self, seq: &ActionSequence, outcomes: &[Outcome]) -> Result<Vec<f64>> {
        if seq.len() > self.m {
            return Err(Error::InvalidArgument(format!(
                "sequence of length {} exceeds table batch length {}",
                seq.len(),
                self.m
            )));
        }
        if outcomes.len() != seq.measurement_count() {
            return Err(Error::InvalidArgument(format!(
                "sequence has {} measurements but {} outcomes were given",
                seq.measurement_count(),
                outcomes.len()
            )));
        }
        let mut lik = vec![1.0; self.n_particles];
        let (mut start, mut k) = (START_INPUT, 0);
        let mut next = outcomes.iter();
        for &action in seq.actions() {
            k += 1;
            if let Some(axis) = axis_index(action) {
                let o = next.next().expect("outcome count checked").index();
                for (l, &q) in lik.iter_mut().zip(self.column(start, k, axis)) {
                    *l *= if o == 0 { q } else { 1.0 - q };
                }
                start = post_measurement_start(axis, o);
                k = 0;
            }
        }
        Ok(lik)
    }

    /// Utilities of all `3^m` sequences, in [`enumerate_sequences`] order
    /// over [`ACTION_SET`].
    pub fn score_all(&self, f: &ParticleFilter, kind: UtilityKind) -> Vec<f64> {
        let mean = f.posterior_mean();
        let centred: Vec<f64> = f.locations().iter().map(|x| x - mean).collect();
        let second_moment: f64 = f.weights().iter().zip(&centred).map(|(w, x)| w * x * x).sum();
        let n_seq = 3usize.pow(self.m as u32);
        let mut acc = vec![0.0; n_seq];
        let mut walker = Walker {
            table: self,
            centred: &centred,
            kind,
            acc: &mut acc,
        };
        let wl = f.weights().to_vec();
        let lnl = vec![0.0; self.n_particles];
        walker.visit(0, 0, START_INPUT, 0, &wl, &lnl);
        match kind {
            UtilityKind::MutualInformation => acc,
            UtilityKind::Variance => acc.into_iter().map(|b| -(second_moment - b)).collect(),
        }
    }
}

struct Walker<'a> {
    table: &'a SegmentTable,
    centred: &'a [f64],
    kind: UtilityKind,
    acc: &'a mut [f64],
}

impl Walker<'_> {
    /// Depth-first walk over action prefixes and outcome records. `wl` holds
    /// `w_i L_i` and `lnl` holds `ln L_i` for the current branch prefix.
    fn visit(&mut self, depth: usize, code: usize, start: usize, k: usize, wl: &[f64], lnl: &[f64]) {
        let m = self.table.m;
        if depth == m {
            self.leaf(code, wl, lnl);
            return;
        }
        for (a, &action) in ACTION_SET.iter().enumerate() {
            let child = code * 3 + a;
            match axis_index(action) {
                None => self.visit(depth + 1, child, start, k + 1, wl, lnl),
                Some(axis) => {
                    let q = self.table.column(start, k + 1, axis);
                    for o in 0..2 {
                        let mut wl_next = Vec::with_capacity(wl.len());
                        let mut lnl_next = Vec::with_capacity(wl.len());
                        for i in 0..wl.len() {
                            let p = if o == 0 { q[i] } else { 1.0 - q[i] };
                            wl_next.push(wl[i] * p);
                            // zero-probability factors make wl vanish, so
                            // their log never contributes
                            lnl_next.push(lnl[i] + if p > 0.0 { p.ln() } else { 0.0 });
                        }
                        self.visit(depth + 1, child, post_measurement_start(axis, o), 0, &wl_next, &lnl_next);
                    }
                }
            }
        }
    }

    fn leaf(&mut self, code: usize, wl: &[f64], lnl: &[f64]) {
        let p: f64 = wl.iter().sum();
        if p <= 0.0 {
            return;
        }
        self.acc[code] += match self.kind {
            // sum_i w_i L_i ln L_i - p ln p
            UtilityKind::MutualInformation => wl.iter().zip(lnl).map(|(a, b)| a * b).sum::<f64>() - p * p.ln(),
            // (sum_i w_i L_i x_i)^2 / p
            UtilityKind::Variance => {
                let b: f64 = wl.iter().zip(self.centred).map(|(a, x)| a * x).sum();
                b * b / p
            }
        };
    }
}

/// Best sequence of length `m` over [`ACTION_SET`], scored with a
/// [`SegmentTable`]. Returns the sequence, its utility and the table, which
/// can also produce the likelihoods for the subsequent update.
pub fn select_best_exhaustive(
    f: &ParticleFilter,
    model: &LikelihoodModel,
    m: usize,
    kind: UtilityKind,
) -> Result<(ActionSequence, f64, SegmentTable)> {
    let sequences = enumerate_sequences(&ACTION_SET, m)?;
    let table = SegmentTable::new(f, model, m)?;
    let scores = table.score_all(f, kind);
    let best = argmax_first(&scores).expect("at least three sequences");
    Ok((sequences[best].clone(), scores[best], table))
}
