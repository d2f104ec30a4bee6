//! Parametric single-qubit channels: the phase gate, the phase gate with
//! dephasing, and phase gates whose rotation error is averaged over a
//! distribution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::qstate::{Axis, DensityMatrix, Matrix2, IDENTITY};
use crate::quadrature::gauss_legendre_interval;
use crate::{Error, Result};

/// Default node count for error-distribution integrals.
pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// A completely positive trace-preserving map on qubit states.
pub trait Channel: Send + Sync {
    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix;

    /// `n`-fold composition of the channel.
    fn iterate(&self, rho: &DensityMatrix, n: u32) -> Result<DensityMatrix> {
        check_iterations(n)?;
        let mut out = *rho;
        for _ in 0..n {
            out = self.apply(&out);
        }
        Ok(out)
    }
}

fn check_iterations(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "channel must be applied at least once".into(),
        ));
    }
    Ok(())
}

/// Applies `channel` `n` times to `rho`.
pub fn iterate_channel<C: Channel + ?Sized>(
    channel: &C,
    rho: &DensityMatrix,
    n: u32,
) -> Result<DensityMatrix> {
    channel.iterate(rho, n)
}

/// `R_n(theta) = exp(-i theta/2 n.sigma) = cos(theta/2) I - i sin(theta/2) n.sigma`
pub fn rotation_unitary(axis: &Axis, theta: f64) -> Matrix2 {
    let (s, c) = (0.5 * theta).sin_cos();
    IDENTITY.scale_real(c) - axis.dot_sigma().scale(Complex64::new(0.0, s))
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGateParams {
    pub theta: f64,
    pub axis: Axis,
}

impl PhaseGateParams {
    /// Rotation about the z axis.
    pub fn z(theta: f64) -> Self {
        PhaseGateParams {
            theta,
            axis: Axis::Z,
        }
    }

    /// Rotation angle in `(-pi, pi]`, for reporting.
    pub fn reduced_theta(&self) -> f64 {
        wrap_angle(self.theta)
    }
}

/// `rho -> R rho R^dagger`.
pub fn apply_phase_gate(p: &PhaseGateParams, rho: &DensityMatrix) -> DensityMatrix {
    rho.conjugate_by(&rotation_unitary(&p.axis, p.theta))
}

/// Unitary rotation channel with its unitary cached.
#[derive(Clone, Copy, Debug)]
pub struct PhaseGate {
    params: PhaseGateParams,
    unitary: Matrix2,
}

impl PhaseGate {
    pub fn new(params: PhaseGateParams) -> Self {
        PhaseGate {
            params,
            unitary: rotation_unitary(&params.axis, params.theta),
        }
    }

    pub fn params(&self) -> &PhaseGateParams {
        &self.params
    }
}

impl Channel for PhaseGate {
    #[inline]
    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        rho.conjugate_by(&self.unitary)
    }

    fn iterate(&self, rho: &DensityMatrix, n: u32) -> Result<DensityMatrix> {
        check_iterations(n)?;
        let u = rotation_unitary(&self.params.axis, n as f64 * self.params.theta);
        Ok(rho.conjugate_by(&u))
    }
}

/// Precession at rate `omega` about z with coherence decay rate `gamma`,
/// for evolution time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingParams {
    omega: f64,
    gamma: f64,
    t: f64,
}

impl DephasingParams {
    pub fn new(omega: f64, gamma: f64, t: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dephasing rate must be non-negative, got {gamma}"
            )));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "evolution time must be non-negative, got {t}"
            )));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidParameter("precession rate must be finite".into()));
        }
        Ok(DephasingParams { omega, gamma, t })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Dimensionless time `gamma t`.
    pub fn tau(&self) -> f64 {
        self.gamma * self.t
    }

    /// Dephasing coherence time `T2 = 1/gamma`.
    pub fn t2(&self) -> f64 {
        1.0 / self.gamma
    }

    fn with_time(&self, t: f64) -> Self {
        DephasingParams { t, ..*self }
    }
}

/// Output of the dephasing phase gate for the pure input with Bloch angles
/// `(alpha, beta)`:
///
/// ```text
/// [ cos²(a/2)                     sin(a)/2 e^{-gt - i(wt+b)} ]
/// [ sin(a)/2 e^{-gt + i(wt+b)}    sin²(a/2)                  ]
/// ```
pub fn apply_dephasing(p: &DephasingParams, alpha: f64, beta: f64) -> DensityMatrix {
    let (half_s, half_c) = (0.5 * alpha).sin_cos();
    let coherence = Complex64::from_polar(
        0.5 * alpha.sin() * (-p.gamma * p.t).exp(),
        -(p.omega * p.t + beta),
    );
    DensityMatrix::from_matrix_unchecked(Matrix2::new(
        Complex64::new(half_c * half_c, 0.0),
        coherence,
        coherence.conj(),
        Complex64::new(half_s * half_s, 0.0),
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct DephasingGate {
    params: DephasingParams,
    factor: Complex64,
}

impl DephasingGate {
    pub fn new(params: DephasingParams) -> Self {
        DephasingGate {
            params,
            factor: Complex64::from_polar((-params.gamma * params.t).exp(), -params.omega * params.t),
        }
    }

    pub fn params(&self) -> &DephasingParams {
        &self.params
    }
}

impl Channel for DephasingGate {
    /// Acts linearly on any state: the coherence picks up the decay and
    /// precession phase, populations are unchanged.
    #[inline]
    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let m = rho.matrix();
        let c = m.get(0, 1) * self.factor;
        DensityMatrix::from_matrix_unchecked(Matrix2::new(m.get(0, 0), c, c.conj(), m.get(1, 1)))
    }

    fn iterate(&self, rho: &DensityMatrix, n: u32) -> Result<DensityMatrix> {
        check_iterations(n)?;
        let longer = DephasingGate::new(self.params.with_time(n as f64 * self.params.t));
        Ok(longer.apply(rho))
    }
}

/// Distribution of the additive rotation error `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorDistribution {
    Deterministic { offset: f64 },
    /// Uniform on `[0, width]`, integrated with Gauss–Legendre quadrature.
    Uniform { width: f64, quadrature_nodes: usize },
}

impl ErrorDistribution {
    pub fn deterministic(offset: f64) -> Self {
        ErrorDistribution::Deterministic { offset }
    }

    pub fn uniform(width: f64) -> Result<Self> {
        Self::uniform_with_nodes(width, DEFAULT_QUADRATURE_NODES)
    }

    pub fn uniform_with_nodes(width: f64, quadrature_nodes: usize) -> Result<Self> {
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "error width must be non-negative, got {width}"
            )));
        }
        if quadrature_nodes == 0 {
            return Err(Error::InvalidParameter(
                "quadrature needs at least one node".into(),
            ));
        }
        Ok(ErrorDistribution::Uniform {
            width,
            quadrature_nodes,
        })
    }

    /// `(eps, probability weight)` pairs whose weights sum to one.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match *self {
            ErrorDistribution::Deterministic { offset } => vec![(offset, 1.0)],
            ErrorDistribution::Uniform { width, .. } if width == 0.0 => vec![(0.0, 1.0)],
            ErrorDistribution::Uniform {
                width,
                quadrature_nodes,
            } => gauss_legendre_interval(quadrature_nodes, 0.0, width)
                .into_iter()
                .map(|(e, w)| (e, w / width))
                .collect(),
        }
    }
}

/// Whether an iterated faulty gate draws its error once per run or once
/// per application.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ErrorMode {
    /// One error for all `n` applications: average of `R(n(theta+eps))`.
    #[default]
    Fixed,
    /// Independent error at every application.
    Fresh,
}

/// `∫ P(eps) Phi_{theta+eps}^n(rho) d eps`, with the error fixed across the
/// `n` iterations.
pub fn averaged_output(
    p: &PhaseGateParams,
    d: &ErrorDistribution,
    rho: &DensityMatrix,
    n: u32,
) -> Result<DensityMatrix> {
    AveragedPhaseGate::new(*p, *d).iterate(rho, n)
}

/// Phase gate whose rotation error follows an [`ErrorDistribution`].
#[derive(Clone, Debug)]
pub struct AveragedPhaseGate {
    params: PhaseGateParams,
    error: ErrorDistribution,
    mode: ErrorMode,
    nodes: Vec<(f64, f64)>,
}

impl AveragedPhaseGate {
    pub fn new(params: PhaseGateParams, error: ErrorDistribution) -> Self {
        Self::with_mode(params, error, ErrorMode::Fixed)
    }

    pub fn with_mode(params: PhaseGateParams, error: ErrorDistribution, mode: ErrorMode) -> Self {
        AveragedPhaseGate {
            params,
            error,
            mode,
            nodes: error.nodes(),
        }
    }

    pub fn error(&self) -> &ErrorDistribution {
        &self.error
    }

    pub fn mode(&self) -> ErrorMode {
        self.mode
    }

    fn average(&self, rho: &DensityMatrix, n: u32) -> DensityMatrix {
        let mut acc = Matrix2::zero();
        for &(eps, w) in &self.nodes {
            let u = rotation_unitary(&self.params.axis, n as f64 * (self.params.theta + eps));
            acc = acc + rho.conjugate_by(&u).matrix().scale_real(w);
        }
        DensityMatrix::from_matrix_unchecked(acc)
    }
}

impl Channel for AveragedPhaseGate {
    fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        self.average(rho, 1)
    }

    fn iterate(&self, rho: &DensityMatrix, n: u32) -> Result<DensityMatrix> {
        check_iterations(n)?;
        Ok(match self.mode {
            ErrorMode::Fixed => self.average(rho, n),
            ErrorMode::Fresh => {
                let mut out = *rho;
                for _ in 0..n {
                    out = self.average(&out, 1);
                }
                out
            }
        })
    }
}
