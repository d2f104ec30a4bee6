//! Cross-checks of the public API against independent closed forms.

use std::f64::consts::PI;

use rand::Rng;

use qcertify_core::chernoff::{classical_chernoff, minimal_error_probability, quantum_chernoff_bound};
use qcertify_core::rng::trial_rng;
use qcertify_core::{
    ActionSequence, BlochVector, DensityMatrix, LikelihoodModel, Outcome, ParticleFilter, PriorPair,
};

fn random_pure(rng: &mut impl Rng) -> DensityMatrix {
    DensityMatrix::pure(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI))
}

fn overlap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (ra, rb) = (a.bloch().components(), b.bloch().components());
    0.5 * (1.0 + ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>())
}

#[test]
fn pure_state_bound_is_log_overlap() {
    let mut rng = trial_rng(1, 0);
    for _ in 0..50 {
        let (a, b) = (random_pure(&mut rng), random_pure(&mut rng));
        let f = overlap(&a, &b);
        let xi = quantum_chernoff_bound(&a, &b).unwrap().xi;
        if f > 1e-12 {
            assert!((xi.as_f64() + f.ln()).abs() < 1e-9);
        }
    }
}

#[test]
fn diagonal_states_reduce_to_classical() {
    let mut rng = trial_rng(2, 0);
    for _ in 0..50 {
        // Mixed enough that the numeric minimiser is used.
        let (zx, zy): (f64, f64) = (rng.random_range(-0.99..0.99), rng.random_range(-0.99..0.99));
        let rho = DensityMatrix::from_bloch(&BlochVector::new(0.0, 0.0, zx).unwrap());
        let tau = DensityMatrix::from_bloch(&BlochVector::new(0.0, 0.0, zy).unwrap());
        let q = quantum_chernoff_bound(&rho, &tau).unwrap().xi.as_f64();
        let c = classical_chernoff(0.5 * (1.0 + zx), 0.5 * (1.0 + zy)).unwrap().xi.as_f64();
        assert!((q - c).abs() < 1e-10, "{q} vs {c}");
    }
}

#[test]
fn single_copy_helstrom_is_trace_distance() {
    let mut rng = trial_rng(3, 0);
    for _ in 0..50 {
        let r = |rng: &mut _| {
            let v: [f64; 3] = [0.0; 3].map(|_| Rng::random_range(rng, -0.57..0.57));
            DensityMatrix::from_bloch(&BlochVector::new(v[0], v[1], v[2]).unwrap())
        };
        let (a, b) = (r(&mut rng), r(&mut rng));
        let (ra, rb) = (a.bloch().components(), b.bloch().components());
        let dist = 0.5 * ra.iter().zip(rb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let pe = minimal_error_probability(&a, &b, 1, PriorPair::uniform()).unwrap();
        assert!((pe - 0.5 * (1.0 - dist)).abs() < 1e-12);
    }
}

#[test]
fn phase_gate_likelihoods_match_closed_forms() {
    let model = LikelihoodModel::phase_gate();
    let seq = |s: &str| s.parse::<ActionSequence>().unwrap();
    use Outcome::{Minus, Plus};
    for theta in [-2.0, -0.3, 0.0, 0.7, 2.5] {
        let c = |k: f64| 0.5 * (1.0 + (k * theta).cos());
        let s = |k: f64| 0.5 * (1.0 + (k * theta).sin());
        let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-12, "theta {theta}: {a} vs {b}");
        close(model.sequence_likelihood(theta, &seq("X"), &[Plus]).unwrap(), c(1.0));
        close(model.sequence_likelihood(theta, &seq("Y"), &[Minus]).unwrap(), 1.0 - s(1.0));
        close(model.sequence_likelihood(theta, &seq("IX"), &[Plus]).unwrap(), c(2.0));
        close(model.sequence_likelihood(theta, &seq("IIX"), &[Minus]).unwrap(), 1.0 - c(3.0));
        close(model.sequence_likelihood(theta, &seq("XX"), &[Plus, Plus]).unwrap(), c(1.0) * c(1.0));
        close(model.sequence_likelihood(theta, &seq("XI"), &[Plus]).unwrap(), c(1.0));
    }
}

#[test]
fn batch_update_is_bayes_rule() {
    let model = LikelihoodModel::phase_gate();
    let mut f = ParticleFilter::init_uniform((-PI, PI), 500, 4).unwrap();
    let prior: Vec<f64> = f.weights().to_vec();
    let locs: Vec<f64> = f.locations().to_vec();
    let seq: ActionSequence = "IX".parse().unwrap();
    f.batch_update(&model, &seq, &[Outcome::Plus]).unwrap();
    let post: Vec<f64> = locs.iter().zip(&prior).map(|(x, w)| w * 0.5 * (1.0 + (2.0 * x).cos())).collect();
    let z: f64 = post.iter().sum();
    // Effective sample size stays above half, so no resampling happened.
    assert_eq!(f.locations(), locs.as_slice());
    for (w, p) in f.weights().iter().zip(&post) {
        assert!((w - p / z).abs() < 1e-12);
    }
}

#[test]
fn resampling_keeps_moments() {
    let locs: Vec<f64> = (0..4000).map(|i| -1.0 + 2.0 * i as f64 / 3999.0).collect();
    let weights: Vec<f64> = locs.iter().map(|x| (-8.0 * (x - 0.2) * (x - 0.2)).exp()).collect();
    let mut f = ParticleFilter::from_particles(locs, weights, (-1.0, 1.0), 9).unwrap();
    let (mean, var) = (f.posterior_mean(), f.posterior_variance());
    f.resample();
    assert!((f.posterior_mean() - mean).abs() < 0.01);
    assert!((f.posterior_variance() / var - 1.0).abs() < 0.1);
    assert!(f.weights().iter().all(|&w| (w - 1.0 / 4000.0).abs() < 1e-15));
    assert!(f.locations().iter().all(|x| (-1.0..=1.0).contains(x)));
}

#[test]
fn hpd_region_reaches_credibility() {
    let locs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
    let weights: Vec<f64> = (0..100).map(|i| 1.0 + i as f64).collect();
    let f = ParticleFilter::from_particles(locs, weights, (0.0, 1.0), 0).unwrap();
    let region = f.hpd_region(0.5).unwrap();
    let mass: f64 = region.iter().map(|&i| f.weights()[i]).sum();
    assert!(mass >= 0.5);
    let without_last = mass - f.weights()[*region.last().unwrap()];
    assert!(without_last < 0.5);
    assert!(region.iter().all(|&i| i >= 50));
}
