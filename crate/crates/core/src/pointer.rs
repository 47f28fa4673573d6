//! Continuous pointer states sampled on a uniform periodic position grid.
//!
//! Norms and moments are plain Riemann sums with weight `dq`. Translations
//! are done spectrally, so shifts need not be multiples of `dq`; the price is
//! periodicity, which [`translate`] guards against.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::output;

/// Unit-norm tolerance for pointer states.
pub const POINTER_NORM_TOL: f64 = 1e-10;
/// Largest probability allowed to cross the periodic boundary in a shift.
pub const WRAP_MASS_TOL: f64 = 1e-10;
/// Half-width of the region a Gaussian pointer must fit into, in units of sigma.
pub const GAUSSIAN_HALF_SPAN: f64 = 8.0;

/// Uniform grid `q_k = q_min + k dq`, `k = 0..n`, with `q_max` excluded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    q_min: f64,
    q_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(q_min: f64, q_max: f64, n: usize) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite()) || q_max <= q_min {
            return Err(Error::InvalidGrid(format!(
                "need finite q_min < q_max, got [{q_min}, {q_max}]"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 points, got {n}"
            )));
        }
        Ok(Self { q_min, q_max, n })
    }

    /// `[-16 sigma + min(g, 0), 16 sigma + max(g, 0)]` with 1024 points, where
    /// `g` ranges over the shifts that will be applied.
    pub fn default_for(sigma: f64, gammas: &[f64]) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let lo = gammas.iter().copied().fold(0.0, f64::min);
        let hi = gammas.iter().copied().fold(0.0, f64::max);
        Self::new(-16.0 * sigma + lo, 16.0 * sigma + hi, 1024)
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.q_max - self.q_min
    }

    pub fn dq(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn q(&self, k: usize) -> f64 {
        self.q_min + k as f64 * self.dq()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.q(k))
    }

    /// Periodic momentum of FFT mode `k`: `2 pi k' / (n dq)` with `k'` taken in
    /// `[-n/2, n/2)`.
    pub fn momentum(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let signed = if k < (n + 1) / 2 { k } else { k - n };
        2.0 * PI * signed as f64 / self.length()
    }
}

/// Complex pointer wavefunction on a [`Grid`], normalized so that
/// `sum |a_k|^2 dq = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointerState {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl PointerState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, amplitudes.len())?;
        let norm_sqr = discrete_norm_sqr(&grid, &amplitudes);
        if (norm_sqr - 1.0).abs() > POINTER_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { grid, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit discrete norm.
    pub fn normalized(grid: Grid, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, amplitudes.len())?;
        let norm = discrete_norm_sqr(&grid, &amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { grid, amplitudes })
    }

    /// Samples a real profile `f(q)` and normalizes it. Any real profile
    /// symmetric about zero is a valid initial pointer.
    pub fn from_profile(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let amplitudes = grid
            .positions()
            .map(|q| Complex64::new(f(q), 0.0))
            .collect();
        Self::normalized(grid, amplitudes)
    }

    pub(crate) fn from_raw(grid: Grid, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.n(), amplitudes.len());
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        discrete_norm_sqr(&self.grid, &self.amplitudes)
    }

    /// `|a_k|^2` at every grid point.
    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// True when the amplitudes are real and `phi(q) = phi(-q)` wherever
    /// both points lie on the grid.
    pub fn is_real_symmetric(&self, tol: f64) -> bool {
        let dq = self.grid.dq();
        let real = self.amplitudes.iter().all(|a| a.im.abs() <= tol);
        real && (0..self.grid.n()).all(|k| {
            let mirror = (-self.grid.q_min - k as f64 * dq - self.grid.q_min) / dq;
            let j = mirror.round();
            if (mirror - j).abs() > 1e-9 || j < 0.0 || j >= self.grid.n() as f64 {
                return true;
            }
            (self.amplitudes[k] - self.amplitudes[j as usize]).norm() <= tol
        })
    }

    /// Writes `q, re_amp, im_amp` rows, optionally followed by an
    /// `intensity` column.
    pub fn write_csv<W: Write>(&self, writer: W, intensity: Option<&[f64]>) -> Result<()> {
        output::write_pointer_csv(writer, self, intensity)
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.n() {
        Err(Error::DimensionMismatch {
            expected: grid.n(),
            found: len,
        })
    } else {
        Ok(())
    }
}

fn discrete_norm_sqr(grid: &Grid, amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dq()
}

/// Gaussian pointer `(2 pi sigma^2)^(-1/4) exp(-q^2 / (4 sigma^2))`, so that the
/// position density has standard deviation `sigma`.
pub fn gaussian_pointer(grid: Grid, sigma: f64) -> Result<PointerState> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let reach = GAUSSIAN_HALF_SPAN * sigma;
    if grid.q_min() > -reach || grid.q_max() < reach {
        return Err(Error::GridTooNarrow {
            q_min: grid.q_min(),
            q_max: grid.q_max(),
            sigma,
        });
    }
    let prefactor = (2.0 * PI * sigma * sigma).powf(-0.25);
    PointerState::from_profile(grid, |q| prefactor * (-q * q / (4.0 * sigma * sigma)).exp())
}

/// Shifts `phi(q)` to `phi(q - gamma)` by a spectral phase ramp, treating the
/// grid as periodic. Unitary for any `gamma`.
pub fn translate_periodic(phi: &PointerState, gamma: f64) -> PointerState {
    let grid = *phi.grid();
    let n = grid.n();
    let mut buf = phi.amplitudes().to_vec();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0 / n as f64, -grid.momentum(k) * gamma);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    PointerState::from_raw(grid, buf)
}

/// Probability that a shift by `gamma` carries across the periodic boundary.
pub fn wrapped_mass(phi: &PointerState, gamma: f64) -> f64 {
    let grid = phi.grid();
    let dq = grid.dq();
    let edge = if gamma >= 0.0 {
        grid.q_max() - gamma
    } else {
        grid.q_min() - gamma
    };
    phi.amplitudes()
        .iter()
        .enumerate()
        .filter(|&(k, _)| {
            let q = grid.q(k);
            if gamma >= 0.0 {
                q >= edge
            } else {
                q < edge
            }
        })
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        * dq
}

/// `S phi`, i.e. `phi(q - gamma)`.
///
/// Fails with `WraparoundRisk` when `|gamma|` reaches half the grid length or
/// when more than [`WRAP_MASS_TOL`] of the probability would wrap around.
pub fn translate(phi: &PointerState, gamma: f64) -> Result<PointerState> {
    check_shift(phi, gamma)?;
    Ok(translate_periodic(phi, gamma))
}

/// The precondition of [`translate`] on its own.
pub fn check_shift(phi: &PointerState, gamma: f64) -> Result<()> {
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite, got {gamma}"
        )));
    }
    if gamma.abs() >= phi.grid().length() / 2.0 {
        return Err(Error::WraparoundRisk {
            gamma,
            wrapped_mass: f64::NAN,
        });
    }
    let wrapped = wrapped_mass(phi, gamma);
    if wrapped > WRAP_MASS_TOL {
        return Err(Error::WraparoundRisk {
            gamma,
            wrapped_mass: wrapped,
        });
    }
    Ok(())
}

/// `<a|b> = sum conj(a_k) b_k dq`.
pub fn overlap(a: &PointerState, b: &PointerState) -> Result<Complex64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let sum: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.grid().dq())
}

/// First moment `sum q_k |phi_k|^2 dq`.
pub fn centroid(phi: &PointerState) -> f64 {
    let grid = phi.grid();
    phi.amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| grid.q(k) * a.norm_sqr())
        .sum::<f64>()
        * grid.dq()
}

/// Centroid of a density sampled on `grid`.
pub fn profile_centroid(grid: &Grid, profile: &[f64]) -> f64 {
    profile
        .iter()
        .enumerate()
        .map(|(k, p)| grid.q(k) * p)
        .sum::<f64>()
        * grid.dq()
}
