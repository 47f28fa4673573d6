//! Finite-dimensional system states, projectors, and the values a pre- and
//! post-selected ensemble assigns to a projector.
//!
//! For a projector `A` the unitary `exp(-i g A / hbar)` collapses to
//! `1 + (exp(-i g / hbar) - 1) A`, so modular values never need a general
//! matrix exponential.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalization tolerance for system states.
pub const STATE_NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance for `P = P^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Entrywise tolerance for `P * P = P`.
pub const IDEMPOTENT_TOL: f64 = 1e-10;
/// Default lower bound on `|<psi_f|psi_i>|`.
pub const DEFAULT_OVERLAP_FLOOR: f64 = 1e-10;

/// A normalized pure state of the measured system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    amplitudes: DVector<Complex64>,
}

impl SystemState {
    /// Wraps already-normalized amplitudes.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let amplitudes = DVector::from_vec(amplitudes);
        check_dim(amplitudes.len())?;
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let amplitudes = DVector::from_vec(amplitudes);
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Standard basis state `|k>` of a `dim`-dimensional system.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// The same ray multiplied by `exp(i theta)`.
    pub fn with_phase(&self, theta: f64) -> Self {
        Self {
            amplitudes: self
                .amplitudes
                .map(|z| z * Complex64::from_polar(1.0, theta)),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::DimensionTooSmall(dim))
    } else {
        Ok(())
    }
}

/// A Hermitian idempotent operator on the system space.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: DMatrix<Complex64>,
}

impl Projector {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_dim(matrix.nrows())?;

        let herm_dev = max_abs_entry(&(&matrix - matrix.adjoint()));
        if herm_dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm_dev));
        }
        let idem_dev = max_abs_entry(&(&matrix * &matrix - &matrix));
        if idem_dev > IDEMPOTENT_TOL {
            return Err(Error::NotIdempotent(idem_dev));
        }
        Ok(Self { matrix })
    }

    /// Rank-1 projector `|v><v|`.
    pub fn rank1(v: &SystemState) -> Self {
        let a = v.amplitudes();
        Self {
            matrix: a * a.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

fn max_abs_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `<a|b>`, antilinear in `a`.
pub fn inner_product(a: &SystemState, b: &SystemState) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.amplitudes().dotc(b.amplitudes()))
}

/// A pre-selected / post-selected pair with a usable overlap.
#[derive(Clone, Debug)]
pub struct PpsEnsemble {
    psi_i: SystemState,
    psi_f: SystemState,
    overlap: Complex64,
    pancharatnam_phase: f64,
    overlap_floor: f64,
}

impl PpsEnsemble {
    pub fn new(psi_i: SystemState, psi_f: SystemState) -> Result<Self> {
        Self::with_floor(psi_i, psi_f, DEFAULT_OVERLAP_FLOOR)
    }

    pub fn with_floor(psi_i: SystemState, psi_f: SystemState, overlap_floor: f64) -> Result<Self> {
        if overlap_floor.is_nan() || overlap_floor < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "overlap floor must be non-negative, got {overlap_floor}"
            )));
        }
        let overlap = inner_product(&psi_f, &psi_i)?;
        check_overlap(overlap, overlap_floor)?;
        Ok(Self {
            psi_i,
            psi_f,
            overlap,
            pancharatnam_phase: principal_arg(overlap),
            overlap_floor,
        })
    }

    pub fn psi_i(&self) -> &SystemState {
        &self.psi_i
    }

    pub fn psi_f(&self) -> &SystemState {
        &self.psi_f
    }

    /// `<psi_f|psi_i>`.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }

    pub fn pancharatnam_phase(&self) -> f64 {
        self.pancharatnam_phase
    }

    pub fn overlap_floor(&self) -> f64 {
        self.overlap_floor
    }

    pub fn dim(&self) -> usize {
        self.psi_i.dim()
    }

    fn check_projector(&self, a: &Projector) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        check_overlap(self.overlap, self.overlap_floor)
    }

    /// `<psi_f| m |psi_i> / <psi_f|psi_i>` for an arbitrary system operator.
    fn normalized_transition(&self, m: &DMatrix<Complex64>) -> Complex64 {
        let num = self.psi_f.amplitudes().dotc(&(m * self.psi_i.amplitudes()));
        num / self.overlap
    }
}

fn check_overlap(overlap: Complex64, floor: f64) -> Result<()> {
    let magnitude = overlap.norm();
    if magnitude < floor || magnitude == 0.0 {
        Err(Error::OverlapTooSmall {
            overlap: magnitude,
            floor,
        })
    } else {
        Ok(())
    }
}

/// Argument on the branch (-pi, pi].
pub fn principal_arg(z: Complex64) -> f64 {
    let arg = z.arg();
    if arg == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        arg
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValue {
    pub value: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularValue {
    pub value: Complex64,
    pub gamma: f64,
    pub hbar: f64,
}

/// `<psi_f|A|psi_i> / <psi_f|psi_i>`.
pub fn weak_value(ens: &PpsEnsemble, a: &Projector) -> Result<WeakValue> {
    ens.check_projector(a)?;
    Ok(WeakValue {
        value: ens.normalized_transition(a.matrix()),
    })
}

/// `exp(-i g A / hbar)` for a projector `A`.
pub fn projector_unitary(a: &Projector, gamma: f64, hbar: f64) -> DMatrix<Complex64> {
    let dim = a.dim();
    let factor = Complex64::from_polar(1.0, -gamma / hbar) - 1.0;
    DMatrix::identity(dim, dim) + a.matrix().map(|z| z * factor)
}

/// `<psi_f| exp(-i g A / hbar) |psi_i> / <psi_f|psi_i>`.
pub fn modular_value(
    ens: &PpsEnsemble,
    a: &Projector,
    gamma: f64,
    hbar: f64,
) -> Result<ModularValue> {
    check_hbar(hbar)?;
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite, got {gamma}"
        )));
    }
    ens.check_projector(a)?;
    Ok(ModularValue {
        value: ens.normalized_transition(&projector_unitary(a, gamma, hbar)),
        gamma,
        hbar,
    })
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "hbar must be positive, got {hbar}"
        )))
    }
}

/// Recovers the weak value as `i hbar d(A)_m/dg` at `g = 0`, using a central
/// difference with step `h`. Truncation error is `O(h^2)`.
pub fn weak_from_modular_derivative(
    ens: &PpsEnsemble,
    a: &Projector,
    hbar: f64,
    h: f64,
) -> Result<Complex64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step h must be positive, got {h}"
        )));
    }
    let plus = modular_value(ens, a, h, hbar)?.value;
    let minus = modular_value(ens, a, -h, hbar)?.value;
    Ok(Complex64::i() * hbar * (plus - minus) / (2.0 * h))
}

/// `arg <psi_f|psi_i>` on (-pi, pi].
pub fn pancharatnam_phase(ens: &PpsEnsemble) -> Result<f64> {
    check_overlap(ens.overlap, ens.overlap_floor)?;
    Ok(ens.pancharatnam_phase)
}
