//! Quantum and classical Chernoff exponents for telling an ideal channel
//! from a faulty one.
//!
//! The quantum exponent is `xi = -log inf_{0<=s<=1} tr(rho^{1-s} tau^s)`,
//! found by golden-section search on the convex map `s -> tr(...)`. The
//! classical exponent for two Bernoulli distributions `(x, 1-x)` and
//! `(y, 1-y)` has a closed-form minimiser, which also covers the dephasing
//! channel at the optimal input because its output states commute.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channels::{AveragedPhaseGate, Channel, ErrorDistribution, PhaseGate, PhaseGateParams};
use crate::optim::{golden_section_minimize, parabolic_refine};
use crate::qstate::{DensityMatrix, ATOL_PROB};
use crate::{Error, Result};

/// Tolerance on `s` for the golden-section search.
pub const S_TOLERANCE: f64 = 1e-12;
/// Below this overlap two states are treated as perfectly distinguishable.
pub const MIN_OVERLAP: f64 = 1e-15;
/// Largest copy count for the explicit `2^N`-dimensional error probability.
pub const MAX_COPIES: u32 = 12;

/// A Chernoff exponent; orthogonal supports give an infinite exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChernoffBound {
    Finite(f64),
    /// The hypotheses are distinguishable with a single copy.
    Infinite,
}

impl ChernoffBound {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            ChernoffBound::Finite(v) => Some(v),
            ChernoffBound::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ChernoffBound::Infinite)
    }

    /// `f64::INFINITY` for the infinite case; use only for ordering.
    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    fn scaled(&self, k: f64) -> ChernoffBound {
        match *self {
            ChernoffBound::Finite(v) => ChernoffBound::Finite(v * k),
            ChernoffBound::Infinite => ChernoffBound::Infinite,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffResult {
    /// Exponent per copy, in nats.
    pub xi: ChernoffBound,
    /// Minimising `s` in `[0, 1]`.
    pub s_min: f64,
    /// Channel applications per copy.
    pub iterations: u32,
}

impl ChernoffResult {
    fn new(xi: ChernoffBound, s_min: f64) -> Self {
        ChernoffResult {
            xi,
            s_min,
            iterations: 1,
        }
    }

    pub fn with_iterations(self, iterations: u32) -> Self {
        ChernoffResult { iterations, ..self }
    }

    /// `xi / N`, the exponent per channel application.
    pub fn per_iteration(&self) -> ChernoffBound {
        self.xi.scaled(1.0 / self.iterations.max(1) as f64)
    }
}

/// Prior probabilities of the two hypotheses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorPair {
    pi0: f64,
    pi1: f64,
}

impl PriorPair {
    pub fn new(pi0: f64, pi1: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi1 > 0.0) || (pi0 + pi1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "priors must be positive and sum to one, got ({pi0}, {pi1})"
            )));
        }
        Ok(PriorPair { pi0, pi1 })
    }

    pub fn uniform() -> Self {
        PriorPair { pi0: 0.5, pi1: 0.5 }
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }
}

/// `tr(rho^{1-s} tau^s)` with the `0^s = 0` convention.
pub fn chernoff_trace(rho: &DensityMatrix, tau: &DensityMatrix, s: f64) -> f64 {
    (rho.power(1.0 - s) * tau.power(s)).trace().re
}

fn is_pure(rho: &DensityMatrix) -> bool {
    (rho.purity() - 1.0).abs() <= ATOL_PROB
}

/// Quantum Chernoff exponent between `rho` and `tau`.
///
/// For two pure states the trace functional is the squared overlap for
/// every `s`; otherwise it is minimised numerically over `[0, 1]`.
pub fn quantum_chernoff_bound(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<ChernoffResult> {
    if is_pure(rho) && is_pure(tau) {
        let overlap = (*rho.matrix() * *tau.matrix()).trace().re.clamp(0.0, 1.0);
        return Ok(ChernoffResult::new(exponent(overlap), 0.5));
    }
    let (s, f) = golden_section_minimize(|s| chernoff_trace(rho, tau, s), 0.0, 1.0, S_TOLERANCE);
    Ok(ChernoffResult::new(exponent(f), s))
}

fn exponent(min_value: f64) -> ChernoffBound {
    if min_value < MIN_OVERLAP {
        ChernoffBound::Infinite
    } else {
        ChernoffBound::Finite((-min_value.min(1.0).ln()).max(0.0))
    }
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn to_dmatrix(rho: &DensityMatrix) -> DMatrix<Complex64> {
    let m = rho.matrix();
    DMatrix::from_fn(2, 2, |i, j| m.get(i, j))
}

fn tensor_power(rho: &DensityMatrix, n: u32) -> DMatrix<Complex64> {
    let base = to_dmatrix(rho);
    let mut out = base.clone();
    for _ in 1..n {
        out = kron(&out, &base);
    }
    out
}

/// Helstrom error probability for `n_copies` copies:
/// `½ (1 - || pi1 tau^{⊗N} - pi0 rho^{⊗N} ||_1)`.
pub fn minimal_error_probability(
    rho: &DensityMatrix,
    tau: &DensityMatrix,
    n_copies: u32,
    priors: PriorPair,
) -> Result<f64> {
    if n_copies == 0 {
        return Err(Error::InvalidParameter("need at least one copy".into()));
    }
    if n_copies > MAX_COPIES {
        return Err(Error::ResourceLimit(format!(
            "{n_copies} copies need a 2^{n_copies}-dimensional trace norm (limit {MAX_COPIES})"
        )));
    }
    let diff = tensor_power(tau, n_copies) * Complex64::new(priors.pi1, 0.0)
        - tensor_power(rho, n_copies) * Complex64::new(priors.pi0, 0.0);
    let trace_norm: f64 = diff.symmetric_eigenvalues().iter().map(|l| l.abs()).sum();
    Ok((0.5 * (1.0 - trace_norm)).clamp(0.0, 0.5))
}

/// Grid used by [`optimize_input_state`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputGrid {
    pub alpha_points: usize,
    pub beta_points: usize,
}

impl Default for InputGrid {
    fn default() -> Self {
        InputGrid {
            alpha_points: 61,
            beta_points: 61,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputOptimum {
    pub alpha: f64,
    pub beta: f64,
    pub result: ChernoffResult,
}

/// Pure input state maximising the exponent between the `n`-fold faulty and
/// ideal outputs: grid scan over `alpha in [0, pi]`, `beta in [0, 2pi)`,
/// then coordinate descent with step halving down to `1e-6`.
pub fn optimize_input_state(
    ideal: &dyn Channel,
    faulty: &dyn Channel,
    n_iterations: u32,
    grid: InputGrid,
) -> Result<InputOptimum> {
    if grid.alpha_points < 2 || grid.beta_points < 1 {
        return Err(Error::InvalidParameter("input grid too small".into()));
    }
    // values within rounding of the incumbent do not displace it
    let better = |a: &ChernoffResult, b: &ChernoffResult| a.xi.as_f64() > b.xi.as_f64() * (1.0 + 1e-12) + 1e-14;
    let evaluate = |alpha: f64, beta: f64| -> Result<ChernoffResult> {
        let rho_in = DensityMatrix::pure(alpha, beta);
        let out_ideal = ideal.iterate(&rho_in, n_iterations)?;
        let out_faulty = faulty.iterate(&rho_in, n_iterations)?;
        Ok(quantum_chernoff_bound(&out_faulty, &out_ideal)?.with_iterations(n_iterations))
    };

    let d_alpha = PI / (grid.alpha_points - 1) as f64;
    let d_beta = 2.0 * PI / grid.beta_points as f64;
    let mut best = InputOptimum {
        alpha: 0.0,
        beta: 0.0,
        result: evaluate(0.0, 0.0)?,
    };
    for i in 0..grid.alpha_points {
        for j in 0..grid.beta_points {
            let (alpha, beta) = (i as f64 * d_alpha, j as f64 * d_beta);
            let result = evaluate(alpha, beta)?;
            if better(&result, &best.result) {
                best = InputOptimum { alpha, beta, result };
            }
        }
    }
    if best.result.xi.is_infinite() {
        return Ok(best);
    }

    let mut step = d_alpha.max(d_beta);
    while step >= 1e-6 {
        let mut moved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let alpha = (best.alpha + da).clamp(0.0, PI);
            let beta = (best.beta + db).rem_euclid(2.0 * PI);
            let result = evaluate(alpha, beta)?;
            if better(&result, &best.result) {
                best = InputOptimum { alpha, beta, result };
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// `f(s) = x^{1-s} y^s + (1-x)^{1-s} (1-y)^s`, terms with a zero
/// probability vanish for every `s`.
pub fn classical_trace(x: f64, y: f64, s: f64) -> f64 {
    term(x, y, s) + term(1.0 - x, 1.0 - y, s)
}

#[inline]
fn term(p: f64, q: f64, s: f64) -> f64 {
    if p <= 0.0 || q <= 0.0 {
        0.0
    } else {
        p.powf(1.0 - s) * q.powf(s)
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {p} is not a probability"
        )));
    }
    Ok(())
}

/// Stationary point of `f`: `s = ln(x ln(x/y) / ((1-x) ln((1-y)/(1-x))))
/// / ln(x (1-y) / (y (1-x)))`, valid for `0 < x, y < 1`, `x != y`.
fn classical_s_min(x: f64, y: f64) -> f64 {
    // a = ln(y/x), b = ln((1-y)/(1-x)); a and b have opposite signs
    let a = ((y - x) / x).ln_1p();
    let b = ((x - y) / (1.0 - x)).ln_1p();
    let ratio = (x * -a) / ((1.0 - x) * b);
    (ratio.ln() / (b - a)).clamp(0.0, 1.0)
}

/// Classical Chernoff exponent between Bernoulli(`x`) and Bernoulli(`y`)
/// using the closed-form minimiser.
pub fn classical_chernoff(x: f64, y: f64) -> Result<ChernoffResult> {
    check_probability("x", x)?;
    check_probability("y", y)?;
    if x == y {
        return Ok(ChernoffResult::new(ChernoffBound::Finite(0.0), 0.5));
    }
    let surviving: Vec<(f64, f64)> = [(x, y), (1.0 - x, 1.0 - y)]
        .into_iter()
        .filter(|&(p, q)| p > 0.0 && q > 0.0)
        .collect();
    match surviving.as_slice() {
        [] => Ok(ChernoffResult::new(ChernoffBound::Infinite, 0.5)),
        // f(s) = p^{1-s} q^s is monotone: the infimum sits on an endpoint
        [(p, q)] => {
            let (s, f) = if p <= q { (0.0, *p) } else { (1.0, *q) };
            Ok(ChernoffResult::new(exponent(f), s))
        }
        _ => {
            let s = classical_s_min(x, y);
            Ok(ChernoffResult::new(exponent_from_offset(classical_trace_minus_one(x, y, s)), s))
        }
    }
}

/// Same exponent as [`classical_chernoff`], minimised by golden-section
/// search and polished with two parabolic steps instead of the closed form.
pub fn classical_chernoff_numeric(x: f64, y: f64) -> Result<ChernoffResult> {
    check_probability("x", x)?;
    check_probability("y", y)?;
    let interior = x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 && x != y;
    let g = |s: f64| {
        if interior {
            classical_trace_minus_one(x, y, s)
        } else {
            classical_trace(x, y, s) - 1.0
        }
    };
    let (mut s, _) = golden_section_minimize(g, 0.0, 1.0, S_TOLERANCE);
    if interior {
        for h in [1e-4, 1e-5] {
            s = parabolic_refine(g, s, 0.0, 1.0, h);
        }
    }
    Ok(ChernoffResult::new(exponent_from_offset(g(s)), s))
}

/// `f(s) - 1` for `0 < x, y < 1`, evaluated without cancellation: with
/// `u = (y-x)/x`, `v = (x-y)/(1-x)`, `a = ln(1+u)`, `b = ln(1+v)` and
/// `x u + (1-x) v = 0`,
/// `f - 1 = s (x phi(u) + (1-x) phi(v)) + x h(s a) + (1-x) h(s b)`
/// where `phi(u) = ln(1+u) - u` and `h(w) = e^w - 1 - w`.
fn classical_trace_minus_one(x: f64, y: f64, s: f64) -> f64 {
    let u = (y - x) / x;
    let v = (x - y) / (1.0 - x);
    let (a, b) = (u.ln_1p(), v.ln_1p());
    s * (x * log1p_minus_identity(u) + (1.0 - x) * log1p_minus_identity(v))
        + x * expm1_minus_identity(s * a)
        + (1.0 - x) * expm1_minus_identity(s * b)
}

/// `ln(1+u) - u`
fn log1p_minus_identity(u: f64) -> f64 {
    if u.abs() < 0.05 {
        // -u²/2 + u³/3 - ...
        let mut term = -u * u;
        let mut sum = 0.0;
        for k in 2..40 {
            sum += term / k as f64;
            term *= -u;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

/// `e^w - 1 - w`
fn expm1_minus_identity(w: f64) -> f64 {
    if w.abs() < 0.05 {
        let mut term = 0.5 * w * w;
        let mut sum = 0.0;
        for k in 3..40 {
            sum += term;
            term *= w / k as f64;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        w.exp_m1() - w
    }
}

fn exponent_from_offset(g: f64) -> ChernoffBound {
    if g + 1.0 < MIN_OVERLAP {
        ChernoffBound::Infinite
    } else {
        ChernoffBound::Finite((-g.min(0.0).ln_1p()).max(0.0))
    }
}

/// Exponent for `N` phase gates followed by a `|+>/|->` measurement:
/// `x = cos²(N theta/2)`, `y = cos²(N (theta+eps)/2)`.
pub fn classical_chernoff_phase_gate(theta: f64, eps: f64, n_iterations: u32) -> Result<ChernoffResult> {
    if n_iterations == 0 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    let n = n_iterations as f64;
    let x = (0.5 * n * theta).cos().powi(2);
    let y = (0.5 * n * (theta + eps)).cos().powi(2);
    Ok(classical_chernoff(x, y)?.with_iterations(n_iterations))
}

/// Analytic quantum exponent of the dephasing channel at the optimal input
/// `|+>`: ideal rate `tau`, faulty rate `tau (1 + eps)`, `N` iterations.
pub fn dephasing_qcb(tau: f64, eps: f64, n_iterations: u32) -> Result<ChernoffResult> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dimensionless time must be positive, got {tau}"
        )));
    }
    if n_iterations == 0 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    if !(eps >= -1.0) {
        return Err(Error::InvalidParameter(format!(
            "relative error {eps} makes the faulty rate negative"
        )));
    }
    let nt = n_iterations as f64 * tau;
    let x = 0.5 * (1.0 + (-nt * (1.0 + eps)).exp());
    let y = 0.5 * (1.0 + (-nt).exp());
    Ok(classical_chernoff(x, y)?.with_iterations(n_iterations))
}

/// Leading small-`eps` term of the dephasing exponent per iteration:
/// `N tau² eps² / (8 (e^{2 N tau} - 1))`.
pub fn dephasing_qcb_small_eps(tau: f64, eps: f64, n_iterations: u32) -> f64 {
    let n = n_iterations as f64;
    n * tau * tau * eps * eps / (8.0 * (2.0 * n * tau).exp_m1())
}

/// Exponent between the `N`-fold ideal phase gate and the faulty one whose
/// error follows `error`, for input state `rho_in`.
pub fn phase_gate_qcb(
    params: &PhaseGateParams,
    error: &ErrorDistribution,
    rho_in: &DensityMatrix,
    n_iterations: u32,
) -> Result<ChernoffResult> {
    let ideal = PhaseGate::new(*params).iterate(rho_in, n_iterations)?;
    let faulty = AveragedPhaseGate::new(*params, *error).iterate(rho_in, n_iterations)?;
    Ok(quantum_chernoff_bound(&faulty, &ideal)?.with_iterations(n_iterations))
}
