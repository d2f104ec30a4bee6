//! Exact 2x2 complex linear algebra for qubit states and two-outcome
//! measurements.

use std::borrow::Cow;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Entrywise tolerance for state invariants (hermiticity, trace, positivity).
pub const ATOL_STATE: f64 = 1e-12;
/// Tolerance for probability normalisation checks.
pub const ATOL_PROB: f64 = 1e-9;
/// Outcomes below this probability cannot be conditioned on.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-15;
/// Tolerance on the norm of rotation and measurement axes.
pub const ATOL_AXIS: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

pub const IDENTITY: Matrix2 = Matrix2([[ONE, ZERO], [ZERO, ONE]]);
pub const PAULI_X: Matrix2 = Matrix2([[ZERO, ONE], [ONE, ZERO]]);
pub const PAULI_Y: Matrix2 = Matrix2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
pub const PAULI_Z: Matrix2 = Matrix2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

impl Matrix2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn zero() -> Self {
        Matrix2([[ZERO; 2]; 2])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    #[inline]
    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Matrix2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let m = &self.0;
        Matrix2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    /// Largest entrywise deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.0;
        let d0 = m[0][0].im.abs().max(m[1][1].im.abs());
        d0.max((m[0][1] - m[1][0].conj()).norm())
    }

    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Pauli coefficients `(a0, [ax, ay, az])` with `M = a0 I + a.sigma`,
    /// read from the Hermitian part of the matrix.
    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let off = (m[0][1] + m[1][0].conj()) * 0.5;
        let a0 = 0.5 * (m[0][0].re + m[1][1].re);
        let az = 0.5 * (m[0][0].re - m[1][1].re);
        (a0, [off.re, -off.im, az])
    }

    /// `a0 I + a.sigma`.
    pub fn from_pauli(a0: f64, a: [f64; 3]) -> Self {
        Matrix2([
            [Complex64::new(a0 + a[2], 0.0), Complex64::new(a[0], -a[1])],
            [Complex64::new(a[0], a[1]), Complex64::new(a0 - a[2], 0.0)],
        ])
    }

    /// Spectral decomposition of the Hermitian part: eigenvalues in
    /// descending order and the unit Bloch direction of the larger one.
    /// The direction is `None` when the eigenvalues coincide.
    pub fn hermitian_spectrum(&self) -> ([f64; 2], Option<[f64; 3]>) {
        let (a0, a) = self.pauli_coefficients();
        let r = norm3(&a);
        let dir = if r > 1e-300 {
            Some([a[0] / r, a[1] / r, a[2] / r])
        } else {
            None
        };
        ([a0 + r, a0 - r], dir)
    }

    /// Applies `f` to the eigenvalues of the Hermitian part.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Matrix2 {
        let ([hi, lo], dir) = self.hermitian_spectrum();
        match dir {
            None => IDENTITY.scale_real(f(hi)),
            Some(n) => {
                let (fh, fl) = (f(hi), f(lo));
                let h = 0.5 * (fh - fl);
                Matrix2::from_pauli(0.5 * (fh + fl), [h * n[0], h * n[1], h * n[2]])
            }
        }
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let a = &self.0;
        let b = &rhs.0;
        Matrix2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &rhs.0);
        Matrix2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &rhs.0);
        Matrix2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

#[inline]
pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// A unit 3-vector, normalised on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis([f64; 3]);

impl Axis {
    pub const X: Axis = Axis([1.0, 0.0, 0.0]);
    pub const Y: Axis = Axis([0.0, 1.0, 0.0]);
    pub const Z: Axis = Axis([0.0, 0.0, 1.0]);

    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = norm3(&v);
        if !n.is_finite() || (n - 1.0).abs() > ATOL_AXIS {
            return Err(Error::InvalidParameter(format!(
                "axis must be a unit vector, got norm {n}"
            )));
        }
        Ok(Axis([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// `n.sigma`
    pub fn dot_sigma(&self) -> Matrix2 {
        Matrix2::from_pauli(0.0, self.0)
    }
}

/// Bloch vector of a qubit state, `|r| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = [x, y, z];
        let n = norm3(&v);
        if !n.is_finite() || n > 1.0 + ATOL_STATE {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {n} exceeds 1"
            )));
        }
        Ok(BlochVector(v))
    }

    /// Pure state `(sin a cos b, sin a sin b, cos a)`.
    pub fn from_angles(alpha: f64, beta: f64) -> Self {
        BlochVector([
            alpha.sin() * beta.cos(),
            alpha.sin() * beta.sin(),
            alpha.cos(),
        ])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.0)
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - 1.0).abs() <= ATOL_PROB
    }
}

/// A valid qubit density matrix: Hermitian, unit trace, positive
/// semidefinite (all within [`ATOL_STATE`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Matrix2);

impl DensityMatrix {
    /// Validates `m` and stores its Hermitian part.
    pub fn from_matrix(m: Matrix2) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if !(defect <= ATOL_STATE) {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > ATOL_STATE || tr.im.abs() > ATOL_STATE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let ([_, low], _) = m.hermitian_spectrum();
        if low < -ATOL_STATE {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {low:e}"
            )));
        }
        Ok(DensityMatrix(hermitian_part(&m)))
    }

    /// Skips validation; callers guarantee the invariants hold up to
    /// rounding.
    #[inline]
    pub(crate) fn from_matrix_unchecked(m: Matrix2) -> Self {
        DensityMatrix(m)
    }

    pub fn from_bloch(r: &BlochVector) -> Self {
        let [x, y, z] = r.0;
        DensityMatrix(Matrix2::from_pauli(0.5, [0.5 * x, 0.5 * y, 0.5 * z]))
    }

    /// Pure state with Bloch angles `(alpha, beta)`.
    pub fn pure(alpha: f64, beta: f64) -> Self {
        Self::from_bloch(&BlochVector::from_angles(alpha, beta))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(IDENTITY.scale_real(0.5))
    }

    /// `|0><0|`
    pub fn zero() -> Self {
        Self::from_bloch(&BlochVector([0.0, 0.0, 1.0]))
    }

    /// `|+><+|`
    pub fn plus() -> Self {
        Self::from_bloch(&BlochVector([1.0, 0.0, 0.0]))
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        let (_, a) = self.0.pauli_coefficients();
        BlochVector([2.0 * a[0], 2.0 * a[1], 2.0 * a[2]])
    }

    /// Eigenvalues, descending, with tiny negatives clamped to zero.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let ([hi, lo], _) = self.0.hermitian_spectrum();
        [hi.max(0.0), lo.max(0.0)]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// `½ ||rho - sigma||_1`
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let ([a, b], _) = (self.0 - other.0).hermitian_spectrum();
        0.5 * (a.abs() + b.abs())
    }

    /// `rho^s` via the spectral decomposition. Eigenvalues in
    /// `[-ATOL_STATE, 0)` are clamped to zero and `0^s := 0` for every `s`,
    /// including `s = 0`, so `rho^0` is the support projector.
    pub fn power(&self, s: f64) -> Matrix2 {
        self.0.hermitian_map(|l| clamped_power(l, s))
    }

    /// `U rho U^dagger` for a unitary `u`.
    #[inline]
    pub fn conjugate_by(&self, u: &Matrix2) -> DensityMatrix {
        DensityMatrix(*u * self.0 * u.adjoint())
    }
}

/// `l^s` with `0^s = 0`, after clamping small negatives.
#[inline]
pub(crate) fn clamped_power(l: f64, s: f64) -> f64 {
    if l <= 0.0 {
        0.0
    } else if s == 0.0 {
        1.0
    } else {
        l.powf(s)
    }
}

fn hermitian_part(m: &Matrix2) -> Matrix2 {
    (*m + m.adjoint()).scale_real(0.5)
}

/// Bloch vector -> density matrix, `(I + r.sigma)/2`.
pub fn bloch_to_density(r: &BlochVector) -> DensityMatrix {
    DensityMatrix::from_bloch(r)
}

/// Density matrix -> Bloch vector, the exact inverse of [`bloch_to_density`].
pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    rho.bloch()
}

/// One element of a two-outcome measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    matrix: Matrix2,
    label: Cow<'static, str>,
}

impl PovmElement {
    pub fn new(matrix: Matrix2, label: impl Into<Cow<'static, str>>) -> Result<Self> {
        if matrix.hermiticity_defect() > ATOL_STATE {
            return Err(Error::InvalidParameter(
                "POVM element must be Hermitian".into(),
            ));
        }
        let ([hi, lo], _) = matrix.hermitian_spectrum();
        if lo < -ATOL_STATE || hi > 1.0 + ATOL_STATE {
            return Err(Error::InvalidParameter(format!(
                "POVM element eigenvalues ({hi}, {lo}) outside [0, 1]"
            )));
        }
        Ok(PovmElement {
            matrix: hermitian_part(&matrix),
            label: label.into(),
        })
    }

    /// `(I + s n.sigma)/2` with `s = +1` for `positive`, `-1` otherwise.
    pub fn projector(axis: &Axis, positive: bool) -> Self {
        let s = if positive { 0.5 } else { -0.5 };
        let n = axis.components();
        PovmElement {
            matrix: Matrix2::from_pauli(0.5, [s * n[0], s * n[1], s * n[2]]),
            label: Cow::Borrowed(if positive { "+" } else { "-" }),
        }
    }

    /// `I - E`, the other element of a complete two-outcome POVM.
    pub fn complement(&self) -> Self {
        PovmElement {
            matrix: IDENTITY - self.matrix,
            label: Cow::Owned(format!("not {}", self.label)),
        }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Measurement operator `M = sqrt(E)`; equals `E` for projectors.
    pub fn kraus(&self) -> Matrix2 {
        self.matrix.hermitian_map(|l| l.max(0.0).sqrt())
    }
}

/// Born rule `tr(E rho)`, clamped to `[0, 1]`.
#[inline]
pub fn born_probability(e: &PovmElement, rho: &DensityMatrix) -> f64 {
    (e.matrix * rho.0).trace().re.clamp(0.0, 1.0)
}

/// Conditions `rho` on outcome `e`: returns `(p, M rho M^dagger / p)`.
pub fn measurement_update(e: &PovmElement, rho: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
    let p = born_probability(e, rho);
    if p <= MIN_OUTCOME_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome { probability: p });
    }
    let m = e.kraus();
    let post = (m * rho.0 * m.adjoint()).scale_real(1.0 / p);
    Ok((p, DensityMatrix(hermitian_part(&post))))
}
