//! Exact action of the modular valued operator on a continuous pointer.
//!
//! For a projector `A`, `exp(-i g A p / hbar) = 1 - A + A S` with `S` the
//! pointer translation by `g`. Sandwiching between the post- and pre-selected
//! states turns this into
//!
//! ```text
//! V_m = (1 - A_w) 1 + A_w S
//! ```
//!
//! so the whole measurement is driven by the weak value. [`oracle`] rebuilds
//! the same pointer state from the joint system-pointer evolution to certify
//! that shortcut.

pub mod oracle;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output;
use crate::pointer::{self, PointerState};
use crate::quantum::{weak_value, PpsEnsemble, Projector};

/// Normalizations below this are reported as `DegenerateNorm`.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Normalized pointer state after the modular valued operator, plus the
/// quantities that build it.
#[derive(Clone, Debug)]
pub struct ModularPointerResult {
    /// `exp(i chi) / M [(1 - A_w) phi + A_w S phi]`.
    pub state: PointerState,
    pub m: f64,
    pub chi: f64,
    pub weak_value: Complex64,
    pub gamma: f64,
    /// `2 Re[A_w (1 - A_w*)]`.
    pub interference_coefficient: f64,
    /// `<phi|S|phi>`.
    pub shift_overlap: Complex64,
    pub initial: PointerState,
    pub shifted: PointerState,
}

/// `M^2 = 1 - 2 Re A_w + 2|A_w|^2 + A_w(1 - A_w*) <S> + A_w*(1 - A_w) <S^dagger>`.
pub fn normalization_sqr(a_w: Complex64, s: Complex64, s_dag: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let cross = a_w * (one - a_w.conj()) * s + a_w.conj() * (one - a_w) * s_dag;
    1.0 - 2.0 * a_w.re + 2.0 * a_w.norm_sqr() + cross.re
}

/// `M`, refusing values below [`DEGENERATE_NORM`].
pub fn checked_normalization(a_w: Complex64, s: Complex64, s_dag: Complex64) -> Result<f64> {
    let m = normalization_sqr(a_w, s, s_dag).max(0.0).sqrt();
    if m < DEGENERATE_NORM {
        return Err(Error::DegenerateNorm {
            m,
            a_re: a_w.re,
            a_im: a_w.im,
        });
    }
    Ok(m)
}

/// `2 Re[A_w (1 - A_w*)] = 2 (Re A_w - |A_w|^2)`.
pub fn interference_coefficient(a_w: Complex64) -> f64 {
    2.0 * (a_w.re - a_w.norm_sqr())
}

pub fn apply_modular_operator(
    ens: &PpsEnsemble,
    a: &Projector,
    phi: &PointerState,
    gamma: f64,
) -> Result<ModularPointerResult> {
    let a_w = weak_value(ens, a)?.value;
    let shifted = pointer::translate(phi, gamma)?;
    let s = pointer::overlap(phi, &shifted)?;
    // <phi|S^dagger|phi> = <S phi|phi>
    let s_dag = pointer::overlap(&shifted, phi)?;

    let m = checked_normalization(a_w, s, s_dag)?;
    let chi = ens.pancharatnam_phase();
    let one = Complex64::new(1.0, 0.0);
    let c0 = Complex64::from_polar(1.0 / m, chi) * (one - a_w);
    let c1 = Complex64::from_polar(1.0 / m, chi) * a_w;
    let amplitudes = phi
        .amplitudes()
        .iter()
        .zip(shifted.amplitudes())
        .map(|(p, sp)| c0 * p + c1 * sp)
        .collect();

    Ok(ModularPointerResult {
        state: PointerState::from_raw(*phi.grid(), amplitudes),
        m,
        chi,
        weak_value: a_w,
        gamma,
        interference_coefficient: interference_coefficient(a_w),
        shift_overlap: s,
        initial: phi.clone(),
        shifted,
    })
}

/// Position density of the result, assembled term by term:
///
/// ```text
/// (|1 - A_w|^2 |phi(q)|^2 + |A_w|^2 |phi(q - g)|^2
///     + 2 Re[A_w (1 - A_w*) phi(q)* phi(q - g)]) / M^2
/// ```
///
/// For real `phi` the last term is the usual `2 Re[A_w(1 - A_w*)] phi(q) phi(q - g)`.
pub fn spatial_profile(result: &ModularPointerResult) -> Vec<f64> {
    let a_w = result.weak_value;
    let one = Complex64::new(1.0, 0.0);
    let w0 = (one - a_w).norm_sqr();
    let w1 = a_w.norm_sqr();
    let cross = a_w * (one - a_w.conj());
    let inv_m2 = 1.0 / (result.m * result.m);
    result
        .initial
        .amplitudes()
        .iter()
        .zip(result.shifted.amplitudes())
        .map(|(p, sp)| {
            let interference = 2.0 * (cross * p.conj() * sp).re;
            inv_m2 * (w0 * p.norm_sqr() + w1 * sp.norm_sqr() + interference)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistenceRow {
    pub gamma: f64,
    pub centroid: f64,
    pub m: f64,
    pub interference_coefficient: f64,
}

/// Pointer centroid, normalization and interference weight across a range of
/// coupling strengths. Rows come back in the order of `gammas`.
pub fn persistence_scan(
    ens: &PpsEnsemble,
    a: &Projector,
    phi: &PointerState,
    gammas: &[f64],
) -> Result<Vec<PersistenceRow>> {
    gammas
        .par_iter()
        .map(|&gamma| {
            let r = apply_modular_operator(ens, a, phi, gamma)?;
            Ok(PersistenceRow {
                gamma,
                centroid: pointer::centroid(&r.state),
                m: r.m,
                interference_coefficient: r.interference_coefficient,
            })
        })
        .collect()
}

pub fn write_persistence_csv<W: Write>(writer: W, rows: &[PersistenceRow]) -> Result<()> {
    output::write_table(
        writer,
        ["gamma", "centroid", "M", "interference_coefficient"],
        rows.iter()
            .map(|r| [r.gamma, r.centroid, r.m, r.interference_coefficient]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::{centroid, gaussian_pointer, Grid};
    use crate::quantum::SystemState;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(k: usize) -> SystemState {
        SystemState::basis(2, k).unwrap()
    }

    fn phi() -> PointerState {
        gaussian_pointer(Grid::new(-16.0, 24.0, 1024).unwrap(), 1.0).unwrap()
    }

    /// Ensemble with real weak value `w` for `|1><1|`: psi_i = |+>, psi_f
    /// chosen so that `conj(f1) / (conj(f0) + conj(f1)) = w`.
    fn real_weak(w: f64) -> (PpsEnsemble, Projector) {
        let psi_i = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let psi_f = SystemState::normalized(vec![c(1.0 - w, 0.0), c(w, 0.0)]).unwrap();
        let ens = PpsEnsemble::new(psi_i, psi_f).unwrap();
        (ens, Projector::rank1(&ket(1)))
    }

    fn direct_norm(r: &ModularPointerResult) -> f64 {
        let one = c(1.0, 0.0);
        let raw: Vec<_> = r
            .initial
            .amplitudes()
            .iter()
            .zip(r.shifted.amplitudes())
            .map(|(p, s)| (one - r.weak_value) * p + r.weak_value * s)
            .collect();
        (raw.iter().map(|z| z.norm_sqr()).sum::<f64>() * r.initial.grid().dq()).sqrt()
    }

    #[test]
    fn weak_value_one_translates_pointer() {
        let ens = PpsEnsemble::new(ket(0), ket(0)).unwrap();
        let r = apply_modular_operator(&ens, &Projector::rank1(&ket(0)), &phi(), 3.0).unwrap();
        assert_eq!(r.m, 1.0);
        assert_eq!(r.interference_coefficient, 0.0);
        assert_abs_diff_eq!(centroid(&r.state), 3.0, epsilon = 1e-8);
        for (a, b) in r.state.amplitudes().iter().zip(r.shifted.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn weak_value_zero_leaves_pointer() {
        let ens = PpsEnsemble::new(ket(0), ket(0)).unwrap();
        let p = phi();
        let r = apply_modular_operator(&ens, &Projector::rank1(&ket(1)), &p, 3.0).unwrap();
        assert_eq!(r.m, 1.0);
        assert_abs_diff_eq!(centroid(&r.state), 0.0, epsilon = 1e-8);
        assert_eq!(r.state.amplitudes(), p.amplitudes());
    }

    #[test]
    fn zero_coupling_is_global_phase() {
        let psi_i = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let psi_f = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).unwrap();
        let ens = PpsEnsemble::new(psi_i, psi_f).unwrap();
        let p = phi();
        let r = apply_modular_operator(&ens, &Projector::rank1(&ket(1)), &p, 0.0).unwrap();
        assert_abs_diff_eq!(r.m, 1.0, epsilon = 1e-12);
        let phase = Complex64::from_polar(1.0, ens.pancharatnam_phase());
        for (a, b) in r.state.amplitudes().iter().zip(p.amplitudes()) {
            assert!((a - phase * b).norm() < 1e-12);
        }
    }

    #[test]
    fn half_weak_value_normalization() {
        let (ens, a) = real_weak(0.5);
        let r = apply_modular_operator(&ens, &a, &phi(), 2.0).unwrap();
        assert_abs_diff_eq!(r.weak_value.re, 0.5, epsilon = 1e-15);
        // s = exp(-1/2): M^2 = 1/2 + s/2
        let s = (-0.5f64).exp();
        let closed = 0.5 + s / 2.0;
        assert_abs_diff_eq!(closed, 0.803265, epsilon = 1e-6);
        assert_abs_diff_eq!(r.m * r.m, closed, epsilon = 1e-10);
        assert_abs_diff_eq!(r.m, 0.896250, epsilon = 1e-6);
        assert_abs_diff_eq!(r.m, direct_norm(&r), epsilon = 1e-10);
        assert_abs_diff_eq!(r.state.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn destructive_interference_is_reported() {
        // Only reachable when S acts on phi as -1, e.g. a plane wave shifted
        // by half a wavelength.
        let err = checked_normalization(c(0.5, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateNorm { .. }));
        assert!(err.to_string().starts_with("DegenerateNorm"));
    }

    #[test]
    fn profile_matches_state_intensity() {
        for w in [0.0, 1.0, 0.5, 0.3, -0.7, 2.5] {
            let (ens, a) = real_weak(w);
            let r = apply_modular_operator(&ens, &a, &phi(), 2.0).unwrap();
            let prof = spatial_profile(&r);
            for (p, amp) in prof.iter().zip(r.state.amplitudes()) {
                assert!((p - amp.norm_sqr()).abs() < 1e-12);
                assert!(*p >= -1e-14);
            }
        }
    }

    #[test]
    fn degenerate_profiles_have_no_interference() {
        let p = phi();
        for (w, expect_shift) in [(0.0, false), (1.0, true)] {
            let (ens, a) = real_weak(w);
            let r = apply_modular_operator(&ens, &a, &p, 4.0).unwrap();
            assert_eq!(r.interference_coefficient, 0.0);
            let prof = spatial_profile(&r);
            let reference = if expect_shift { &r.shifted } else { &p };
            for (x, amp) in prof.iter().zip(reference.amplitudes()) {
                assert!((x - amp.norm_sqr()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_weak_value_profile_integrates_to_one() {
        let psi_i = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let psi_f = SystemState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).unwrap();
        let ens = PpsEnsemble::new(psi_i, psi_f).unwrap();
        let p = phi();
        let r = apply_modular_operator(&ens, &Projector::rank1(&ket(1)), &p, 2.0).unwrap();
        assert!((r.weak_value - c(0.5, -0.5)).norm() < 1e-15);
        let prof = spatial_profile(&r);
        // trapezoid over the periodic grid equals the Riemann sum
        let integral: f64 = prof.iter().sum::<f64>() * p.grid().dq();
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn equal_peaks_for_half() {
        let (ens, a) = real_weak(0.5);
        let p = phi();
        let r = apply_modular_operator(&ens, &a, &p, 8.0).unwrap();
        let prof = spatial_profile(&r);
        let grid = p.grid();
        let split = 4.0;
        let left = (0..grid.n())
            .filter(|&k| grid.q(k) < split)
            .map(|k| prof[k])
            .fold(0.0, f64::max);
        let right = (0..grid.n())
            .filter(|&k| grid.q(k) > split)
            .map(|k| prof[k])
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(right / left, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn persistence_examples() {
        let p = phi();
        let gammas: Vec<f64> = (0..=16).map(|k| 0.5 * k as f64).collect();
        for (w, slope) in [(1.0, 1.0), (0.0, 0.0), (0.5, 0.5)] {
            let (ens, a) = real_weak(w);
            let rows = persistence_scan(&ens, &a, &p, &gammas).unwrap();
            assert_eq!(rows.len(), gammas.len());
            for (row, g) in rows.iter().zip(&gammas) {
                assert_eq!(row.gamma, *g);
                assert_abs_diff_eq!(row.centroid, slope * g, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn persistence_propagates_errors() {
        let (ens, a) = real_weak(0.5);
        assert!(matches!(
            persistence_scan(&ens, &a, &phi(), &[1.0, 30.0]),
            Err(Error::WraparoundRisk { .. })
        ));
    }

    #[test]
    fn persistence_csv_header() {
        let row = PersistenceRow {
            gamma: 1.0,
            centroid: 0.5,
            m: 1.0,
            interference_coefficient: 0.0,
        };
        let mut buf = Vec::new();
        write_persistence_csv(&mut buf, &[row]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "gamma,centroid,M,interference_coefficient\n1.0,0.5,1.0,0.0\n"
        );
    }
}
