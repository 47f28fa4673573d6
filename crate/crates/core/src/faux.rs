//! The pointer read as a two-level "faux" qubit.
//!
//! The basis is `|0~> = |phi>` and `|1~> = S|phi>`. Both are normalized but
//! they only become orthogonal as the shift grows. Once the two lobes are well
//! separated, the ratio of their peak heights gives `|A_w|^2 / |1 - A_w|^2`.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output;
use crate::pointer::{self, Grid, PointerState};

/// Default minimum `|gamma| / sigma` for peak-ratio readout. At this
/// separation the lobe overlap is `exp(-2) ~ 0.135`.
pub const DEFAULT_MIN_SEPARATION: f64 = 4.0;
/// Half-line maxima below this count as empty.
pub const DEFAULT_PEAK_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FauxBasis {
    pub zero: PointerState,
    pub one: PointerState,
    pub gamma: f64,
    /// `<0~|1~> = <phi|S|phi>`.
    pub overlap_01: Complex64,
}

pub fn faux_basis(phi: &PointerState, gamma: f64) -> Result<FauxBasis> {
    let one = pointer::translate(phi, gamma)?;
    let overlap_01 = pointer::overlap(phi, &one)?;
    Ok(FauxBasis {
        zero: phi.clone(),
        one,
        gamma,
        overlap_01,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthogonalityRow {
    pub gamma: f64,
    pub abs_overlap: f64,
}

/// `|<0~|1~>|` for each shift, in input order.
pub fn orthogonality_scan(phi: &PointerState, gammas: &[f64]) -> Result<Vec<OrthogonalityRow>> {
    gammas
        .par_iter()
        .map(|&gamma| {
            let basis = faux_basis(phi, gamma)?;
            Ok(OrthogonalityRow {
                gamma,
                abs_overlap: basis.overlap_01.norm(),
            })
        })
        .collect()
}

pub fn write_orthogonality_csv<W: Write>(writer: W, rows: &[OrthogonalityRow]) -> Result<()> {
    output::write_table(
        writer,
        ["gamma", "abs_overlap"],
        rows.iter().map(|r| [r.gamma, r.abs_overlap]),
    )
}

/// The two sides of the split point `q = gamma / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfLine {
    Left,
    Right,
}

impl fmt::Display for HalfLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfLine::Left => write!(f, "left (q < gamma/2)"),
            HalfLine::Right => write!(f, "right (q > gamma/2)"),
        }
    }
}

/// Real weak value candidates inferred from a two-lobe profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutEstimate {
    /// Peak of the shifted lobe over the peak of the unshifted lobe.
    pub peak_ratio: f64,
    /// `sqrt(r) / (1 + sqrt(r))`, the branch inside `[0, 1]`.
    pub candidate_plus: f64,
    /// `-sqrt(r) / (1 - sqrt(r))`; absent when `r = 1`.
    pub candidate_minus: Option<f64>,
    /// `exp(-gamma^2 / (8 sigma^2))`, the lobe overlap that contaminates the
    /// two-peak approximation.
    pub interference_bound: f64,
}

impl ReadoutEstimate {
    fn from_ratio(peak_ratio: f64, interference_bound: f64) -> Self {
        let root = peak_ratio.sqrt();
        let (candidate_plus, candidate_minus) = if root.is_infinite() {
            (1.0, Some(1.0))
        } else {
            let minus = if root == 1.0 {
                None
            } else {
                Some(-root / (1.0 - root))
            };
            (root / (1.0 + root), minus)
        };
        Self {
            peak_ratio,
            candidate_plus,
            candidate_minus,
            interference_bound,
        }
    }

    /// The exact `A_w = 0` or `A_w = 1` reading used when one lobe is absent.
    pub fn degenerate(weak_value: f64, interference_bound: f64) -> Self {
        let peak_ratio = if weak_value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self::from_ratio(peak_ratio, interference_bound)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReadoutConfig {
    pub min_separation: f64,
    pub peak_floor: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            min_separation: DEFAULT_MIN_SEPARATION,
            peak_floor: DEFAULT_PEAK_FLOOR,
        }
    }
}

pub fn read_faux_qubit(
    profile: &[f64],
    grid: &Grid,
    gamma: f64,
    sigma: f64,
) -> Result<ReadoutEstimate> {
    read_faux_qubit_with(profile, grid, gamma, sigma, ReadoutConfig::default())
}

/// Splits the profile at `gamma / 2`, takes the maximum on each side, and
/// solves `|A_w / (1 - A_w)| = sqrt(r)` for real `A_w`.
///
/// A side counts as empty when its maximum is below the floor or sits on the
/// split point itself (the tail of the other lobe, not a peak of its own).
pub fn read_faux_qubit_with(
    profile: &[f64],
    grid: &Grid,
    gamma: f64,
    sigma: f64,
    config: ReadoutConfig,
) -> Result<ReadoutEstimate> {
    if profile.len() != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            found: profile.len(),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need sigma > 0 and finite gamma, got sigma = {sigma}, gamma = {gamma}"
        )));
    }
    let ratio = gamma.abs() / sigma;
    if ratio < config.min_separation {
        return Err(Error::InterferenceTooLarge {
            ratio,
            threshold: config.min_separation,
        });
    }
    let interference_bound = (-gamma * gamma / (8.0 * sigma * sigma)).exp();

    let split = gamma / 2.0;
    let left: Vec<usize> = (0..grid.n()).filter(|&k| grid.q(k) < split).collect();
    let right: Vec<usize> = (0..grid.n()).filter(|&k| grid.q(k) > split).collect();
    let left_peak = half_line_peak(profile, &left, left.last().copied(), config.peak_floor);
    let right_peak = half_line_peak(profile, &right, right.first().copied(), config.peak_floor);

    // The unshifted lobe sits on the side opposite to gamma.
    let (zero_peak, one_peak, zero_side, one_side) = if gamma > 0.0 {
        (left_peak, right_peak, HalfLine::Left, HalfLine::Right)
    } else {
        (right_peak, left_peak, HalfLine::Right, HalfLine::Left)
    };

    match (zero_peak, one_peak) {
        (Some(z), Some(o)) => Ok(ReadoutEstimate::from_ratio(o / z, interference_bound)),
        (None, Some(_)) => Err(Error::PeakNotFound {
            side: zero_side,
            estimate: Some(Box::new(ReadoutEstimate::degenerate(
                1.0,
                interference_bound,
            ))),
        }),
        (Some(_), None) => Err(Error::PeakNotFound {
            side: one_side,
            estimate: Some(Box::new(ReadoutEstimate::degenerate(
                0.0,
                interference_bound,
            ))),
        }),
        (None, None) => Err(Error::PeakNotFound {
            side: zero_side,
            estimate: None,
        }),
    }
}

fn half_line_peak(
    profile: &[f64],
    indices: &[usize],
    edge: Option<usize>,
    floor: f64,
) -> Option<f64> {
    let (k, value) = indices
        .iter()
        .map(|&k| (k, profile[k]))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if value < floor || Some(k) == edge {
        None
    } else {
        Some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{apply_modular_operator, spatial_profile};
    use crate::pointer::gaussian_pointer;
    use crate::quantum::{PpsEnsemble, Projector, SystemState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> Grid {
        Grid::new(-16.0, 28.0, 1024).unwrap()
    }

    fn phi() -> PointerState {
        gaussian_pointer(grid(), 1.0).unwrap()
    }

    fn profile_for(w: f64, gamma: f64) -> Vec<f64> {
        let psi_i = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let psi_f = SystemState::normalized(vec![c(1.0 - w, 0.0), c(w, 0.0)]).unwrap();
        let ens = PpsEnsemble::new(psi_i, psi_f).unwrap();
        let a = Projector::rank1(&SystemState::basis(2, 1).unwrap());
        let r = apply_modular_operator(&ens, &a, &phi(), gamma).unwrap();
        assert_abs_diff_eq!(r.weak_value.re, w, epsilon = 1e-14);
        spatial_profile(&r)
    }

    #[test]
    fn basis_examples() {
        let b = faux_basis(&phi(), 0.0).unwrap();
        assert_abs_diff_eq!(b.overlap_01.re, 1.0, epsilon = 1e-12);

        let b = faux_basis(&phi(), 2.0).unwrap();
        assert_abs_diff_eq!(b.overlap_01.re, (-0.5f64).exp(), epsilon = 1e-8);
        assert_abs_diff_eq!(b.overlap_01.im, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.zero.norm_sqr(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.one.norm_sqr(), 1.0, epsilon = 1e-10);

        let b = faux_basis(&phi(), 12.0).unwrap();
        assert!(b.overlap_01.norm() < 1e-7);
    }

    #[test]
    fn scan_examples() {
        let p = phi();
        let rows = orthogonality_scan(&p, &[0.0]).unwrap();
        assert_abs_diff_eq!(rows[0].abs_overlap, 1.0, epsilon = 1e-12);

        let rows = orthogonality_scan(&p, &[2.0, 4.0, 6.0]).unwrap();
        for (row, expect) in rows.iter().zip([-0.5f64, -2.0, -4.5]) {
            assert_abs_diff_eq!(row.abs_overlap, expect.exp(), epsilon = 1e-8);
        }
        assert!(rows.windows(2).all(|w| w[1].abs_overlap < w[0].abs_overlap));
    }

    #[test]
    fn basis_overlap_matches_pointer_overlap() {
        let p = phi();
        for g in [0.5, 1.7, 3.0] {
            let b = faux_basis(&p, g).unwrap();
            let direct = pointer::overlap(&p, &pointer::translate(&p, g).unwrap()).unwrap();
            assert!((b.overlap_01 - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn readout_of_unit_weak_value_is_degenerate() {
        let prof = profile_for(1.0, 8.0);
        match read_faux_qubit(&prof, &grid(), 8.0, 1.0) {
            Err(Error::PeakNotFound { side, estimate }) => {
                assert_eq!(side, HalfLine::Left);
                let est = estimate.unwrap();
                assert_eq!(est.candidate_plus, 1.0);
                assert_eq!(est.candidate_minus, Some(1.0));
            }
            other => panic!("expected PeakNotFound, got {other:?}"),
        }
        match read_faux_qubit(&profile_for(0.0, 8.0), &grid(), 8.0, 1.0) {
            Err(Error::PeakNotFound { side, estimate }) => {
                assert_eq!(side, HalfLine::Right);
                assert_eq!(estimate.unwrap().candidate_plus, 0.0);
            }
            other => panic!("expected PeakNotFound, got {other:?}"),
        }
    }

    #[test]
    fn readout_of_half() {
        let est = read_faux_qubit(&profile_for(0.5, 8.0), &grid(), 8.0, 1.0).unwrap();
        assert_abs_diff_eq!(est.peak_ratio, 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(est.candidate_plus, 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(est.interference_bound, (-8.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn readout_of_point_three() {
        let est = read_faux_qubit(&profile_for(0.3, 8.0), &grid(), 8.0, 1.0).unwrap();
        assert_abs_diff_eq!(est.candidate_plus, 0.3, epsilon = 5e-3);
        // |A_w/(1 - A_w)|^2 = 9/49
        assert_abs_diff_eq!(est.peak_ratio, 9.0 / 49.0, epsilon = 1e-3);
        let minus = est.candidate_minus.unwrap();
        assert_abs_diff_eq!(minus, -0.75, epsilon = 1e-2);
    }

    #[test]
    fn negative_weak_value_lands_on_minus_branch() {
        let est = read_faux_qubit(&profile_for(-0.5, 8.0), &grid(), 8.0, 1.0).unwrap();
        assert_abs_diff_eq!(est.candidate_minus.unwrap(), -0.5, epsilon = 5e-3);
    }

    #[test]
    fn readout_rejects_small_separation() {
        let prof = profile_for(0.3, 3.0);
        assert!(matches!(
            read_faux_qubit(&prof, &grid(), 3.0, 1.0),
            Err(Error::InterferenceTooLarge { .. })
        ));
        assert!(matches!(
            read_faux_qubit(&prof[..10], &grid(), 8.0, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn negative_shift_swaps_sides() {
        let p = gaussian_pointer(Grid::new(-28.0, 16.0, 1024).unwrap(), 1.0).unwrap();
        let psi_i = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let psi_f = SystemState::normalized(vec![c(0.8, 0.0), c(0.2, 0.0)]).unwrap();
        let ens = PpsEnsemble::new(psi_i, psi_f).unwrap();
        let a = Projector::rank1(&SystemState::basis(2, 1).unwrap());
        let r = apply_modular_operator(&ens, &a, &p, -8.0).unwrap();
        let est = read_faux_qubit(&spatial_profile(&r), p.grid(), -8.0, 1.0).unwrap();
        assert_abs_diff_eq!(est.candidate_plus, 0.2, epsilon = 5e-3);
    }

    #[test]
    fn empty_profile_has_no_estimate() {
        let zeros = vec![0.0; grid().n()];
        assert!(matches!(
            read_faux_qubit(&zeros, &grid(), 8.0, 1.0),
            Err(Error::PeakNotFound { estimate: None, .. })
        ));
    }
}
