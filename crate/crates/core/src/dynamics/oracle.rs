//! Brute-force reference for the modular valued pointer state.
//!
//! The joint state `psi_i (x) phi` is evolved under `exp(-i g A (x) p)` and then
//! projected onto `psi_f`. Nothing here uses the weak value.
//!
//! * [`OracleMode::Spectral`] diagonalizes `A` and translates each eigen-sector
//!   by `lambda g`.
//! * [`OracleMode::Trotter`] never diagonalizes anything: the momentum is a
//!   periodic fourth-order central-difference matrix, split into families of
//!   disjoint two-site bonds. Each family's exponential is exact (one small
//!   dense block per bond), and the families are composed with a symmetric
//!   splitting for `steps` steps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pointer::{self, PointerState};
use crate::quantum::{PpsEnsemble, Projector};

use super::DEGENERATE_NORM;

/// Default step count for [`OracleMode::Trotter`].
pub const DEFAULT_TROTTER_STEPS: usize = 2048;
/// Default cap on `dim * n` for the joint state.
pub const DEFAULT_JOINT_CAP: usize = 1 << 24;

/// Central-difference weights `c_d` in `f'(q) ~ sum_d c_d (f(q + d dq) - f(q - d dq)) / dq`.
const STENCIL: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Spectral,
    Trotter { steps: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub mode: OracleMode,
    pub joint_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            mode: OracleMode::Spectral,
            joint_cap: DEFAULT_JOINT_CAP,
        }
    }
}

impl OracleConfig {
    pub fn spectral() -> Self {
        Self::default()
    }

    pub fn trotter(steps: usize) -> Self {
        Self {
            mode: OracleMode::Trotter { steps },
            ..Self::default()
        }
    }
}

/// Joint state stored system-major: `amp[s * n + k]`.
struct JointState {
    dim: usize,
    n: usize,
    amp: Vec<Complex64>,
}

impl JointState {
    fn product(system: &DVector<Complex64>, phi: &PointerState) -> Self {
        let n = phi.grid().n();
        let mut amp = Vec::with_capacity(system.len() * n);
        for s in system.iter() {
            amp.extend(phi.amplitudes().iter().map(|p| s * p));
        }
        Self {
            dim: system.len(),
            n,
            amp,
        }
    }

    fn sector(&self, s: usize) -> &[Complex64] {
        &self.amp[s * self.n..(s + 1) * self.n]
    }

    /// `sum_s conj(v_s) amp[s, .]`.
    fn contract(&self, v: &DVector<Complex64>) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (s, vs) in v.iter().enumerate() {
            let w = vs.conj();
            for (o, a) in out.iter_mut().zip(self.sector(s)) {
                *o += w * a;
            }
        }
        out
    }
}

/// Pointer state `<psi_f| exp(-i g A (x) p) |psi_i> |phi>`, normalized.
///
/// With `hbar` absorbed into `p`, `g` is the pointer displacement of the
/// eigenvalue-1 sector, matching [`super::apply_modular_operator`].
pub fn joint_space_oracle(
    ens: &PpsEnsemble,
    a: &Projector,
    phi: &PointerState,
    gamma: f64,
    config: OracleConfig,
) -> Result<PointerState> {
    let dim = ens.dim();
    if a.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: a.dim(),
        });
    }
    let n = phi.grid().n();
    let required = dim.saturating_mul(n);
    if required > config.joint_cap {
        return Err(Error::ResourceLimit {
            required,
            cap: config.joint_cap,
        });
    }

    let joint = JointState::product(ens.psi_i().amplitudes(), phi);
    let evolved = match config.mode {
        OracleMode::Spectral => evolve_spectral(joint, a, phi, gamma)?,
        OracleMode::Trotter { steps } => evolve_trotter(joint, a, phi, gamma, steps)?,
    };
    let projected = evolved.contract(ens.psi_f().amplitudes());

    let norm = (projected.iter().map(|z| z.norm_sqr()).sum::<f64>() * phi.grid().dq()).sqrt();
    if norm < DEGENERATE_NORM {
        return Err(Error::DegenerateNorm {
            m: norm,
            a_re: f64::NAN,
            a_im: f64::NAN,
        });
    }
    PointerState::normalized(*phi.grid(), projected)
}

fn evolve_spectral(
    joint: JointState,
    a: &Projector,
    phi: &PointerState,
    gamma: f64,
) -> Result<JointState> {
    let eig = a.matrix().clone().symmetric_eigen();
    let (dim, n) = (joint.dim, joint.n);
    let mut out = vec![Complex64::new(0.0, 0.0); dim * n];
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v: DVector<Complex64> = eig.eigenvectors.column(j).into_owned();
        let sector = PointerState::from_raw(*phi.grid(), joint.contract(&v));
        let moved = pointer::translate(&sector, lambda * gamma)?;
        for (s, vs) in v.iter().enumerate() {
            for (o, m) in out[s * n..(s + 1) * n].iter_mut().zip(moved.amplitudes()) {
                *o += vs * m;
            }
        }
    }
    Ok(JointState { dim, n, amp: out })
}

/// Pairs `(k, k + d mod n)` split into two families of disjoint bonds.
fn bond_family(n: usize, d: usize, parity: usize) -> Vec<(usize, usize)> {
    (0..n)
        .filter(|k| (k % (2 * d) < d) == (parity == 0))
        .map(|k| (k, (k + d) % n))
        .collect()
}

/// `exp(-i tau (c_d / dq) sigma_y (x) A)`, ordered `(bond end, system)`.
fn bond_propagator(a: &Projector, weight: f64, tau: f64) -> DMatrix<Complex64> {
    let dim = a.dim();
    let (zero, i) = (Complex64::new(0.0, 0.0), Complex64::i());
    let sigma_y = DMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]);
    let generator = sigma_y.kronecker(a.matrix()) * Complex64::new(weight, 0.0);
    debug_assert_eq!(generator.nrows(), 2 * dim);
    (generator * Complex64::new(0.0, -tau)).exp()
}

/// One splitting stage: a bond family and its propagator.
type Stage<'a> = (&'a [(usize, usize)], &'a DMatrix<Complex64>);

fn evolve_trotter(
    mut joint: JointState,
    a: &Projector,
    phi: &PointerState,
    gamma: f64,
    steps: usize,
) -> Result<JointState> {
    if steps == 0 {
        return Err(Error::InvalidParameter(
            "oracle needs at least one step".into(),
        ));
    }
    let n = joint.n;
    if !n.is_multiple_of(2 * STENCIL.len()) {
        return Err(Error::InvalidParameter(format!(
            "Trotter oracle needs a grid size divisible by {}, got {n}",
            2 * STENCIL.len()
        )));
    }
    // same wraparound criterion as the spectral translation
    pointer::check_shift(phi, gamma)?;

    let dq = phi.grid().dq();
    let tau = gamma / steps as f64;
    let families: Vec<(Vec<(usize, usize)>, f64)> = STENCIL
        .iter()
        .enumerate()
        .flat_map(|(idx, &c)| {
            let d = idx + 1;
            [0, 1].map(|parity| (bond_family(n, d, parity), c / dq))
        })
        .collect();

    // Symmetric splitting: half steps on every family but the last, a full
    // step on the last, then the half steps in reverse.
    let last = families.len() - 1;
    let half: Vec<DMatrix<Complex64>> = families
        .iter()
        .map(|(_, w)| bond_propagator(a, *w, tau / 2.0))
        .collect();
    let full = bond_propagator(a, families[last].1, tau);
    let mut schedule: Vec<Stage> = Vec::new();
    for f in 0..last {
        schedule.push((&families[f].0, &half[f]));
    }
    schedule.push((&families[last].0, &full));
    for f in (0..last).rev() {
        schedule.push((&families[f].0, &half[f]));
    }

    let dim = joint.dim;
    let mut block = vec![Complex64::new(0.0, 0.0); 2 * dim];
    for _ in 0..steps {
        for (bonds, u) in &schedule {
            for &(k, j) in bonds.iter() {
                for s in 0..dim {
                    block[s] = joint.amp[s * n + k];
                    block[dim + s] = joint.amp[s * n + j];
                }
                for r in 0..2 * dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (col, b) in block.iter().enumerate() {
                        acc += u[(r, col)] * b;
                    }
                    let idx = if r < dim {
                        r * n + k
                    } else {
                        (r - dim) * n + j
                    };
                    joint.amp[idx] = acc;
                }
            }
        }
    }
    Ok(joint)
}

/// Fidelity `|<a|b>|` of two pointer states on the same grid.
pub fn fidelity(a: &PointerState, b: &PointerState) -> Result<f64> {
    Ok(pointer::overlap(a, b)?.norm())
}

/// Largest pointwise amplitude difference.
pub fn max_deviation(a: &PointerState, b: &PointerState) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}
