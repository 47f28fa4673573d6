//! Twin Mach-Zehnder interferometer as a pre/post-selection network.
//!
//! Light enters the first interferometer at port R1. Mirror M1 sits in arm L2
//! and couples the beam's transverse position to the projector `|L><L|`. The
//! second beamsplitter feeds a bright arm (R4-L5) and an arm that is dark when
//! nothing is displaced (L4-R5); the phase window sits on the dark arm, and an
//! optional shutter blocks it. The third beamsplitter sends light to the
//! cameras at R6 and L6.
//!
//! Every stage is two-path, so the state lives in a two-dimensional path
//! space with index 0 = L and index 1 = R.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{apply_modular_operator, spatial_profile, ModularPointerResult};
use crate::error::{Error, Result};
use crate::output;
use crate::pointer::{self, gaussian_pointer, Grid};
use crate::quantum::{weak_value, PpsEnsemble, Projector, SystemState};

const L: usize = 0;
const R: usize = 1;

/// Camera placement after the last beamsplitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Port {
    R6,
    L6,
}

impl Port {
    fn index(self) -> usize {
        match self {
            Port::R6 => R,
            Port::L6 => L,
        }
    }
}

impl std::str::FromStr for Port {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R6" | "r6" => Ok(Port::R6),
            "L6" | "l6" => Ok(Port::L6),
            other => Err(Error::InvalidParameter(format!(
                "unknown port {other:?}, expected R6 or L6"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MziScenario {
    /// Phase window in radians.
    pub phi: f64,
    pub port: Port,
    /// Shutter on the dark path L4-R5.
    pub dark_path_blocked: bool,
    /// Transverse beam width.
    pub sigma: f64,
    /// M1 displacements to scan.
    pub gammas: Vec<f64>,
    pub grid: Grid,
}

impl MziScenario {
    /// Uses [`Grid::default_for`] sized to the scanned displacements.
    pub fn new(
        phi: f64,
        port: Port,
        dark_path_blocked: bool,
        sigma: f64,
        gammas: Vec<f64>,
    ) -> Result<Self> {
        let grid = Grid::default_for(sigma, &gammas)?;
        Ok(Self {
            phi,
            port,
            dark_path_blocked,
            sigma,
            gammas,
            grid,
        })
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }
}

#[derive(Clone, Debug)]
pub struct MziRealization {
    pub ensemble: PpsEnsemble,
    /// `|L2><L2|`.
    pub projector: Projector,
    pub weak_value: Complex64,
}

impl MziRealization {
    pub fn psi_i(&self) -> &SystemState {
        self.ensemble.psi_i()
    }

    pub fn psi_f(&self) -> &SystemState {
        self.ensemble.psi_f()
    }
}

/// Symmetric 50/50 beamsplitter: reflection picks up a factor `i`.
fn beamsplitter() -> Matrix2<Complex64> {
    let t = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, FRAC_1_SQRT_2);
    Matrix2::new(t, r, r, t)
}

fn basis(k: usize) -> Vector2<Complex64> {
    let mut v = Vector2::zeros();
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Output index of the second beamsplitter that is dark when M1 is not
/// displaced. Found from the network itself rather than assumed.
fn dark_arm(bs: &Matrix2<Complex64>, arms: &Vector2<Complex64>) -> usize {
    let out = bs * arms;
    if out[L].norm() < out[R].norm() {
        L
    } else {
        R
    }
}

pub fn realize(scenario: &MziScenario) -> Result<MziRealization> {
    if !scenario.phi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "phase must be finite, got {}",
            scenario.phi
        )));
    }
    let bs = beamsplitter();

    // State in arms 2/3, where M1 acts.
    let arms = bs * basis(R);
    let dark = dark_arm(&bs, &arms);
    debug_assert!((bs * arms)[dark].norm() < 1e-15);

    // Everything downstream of M1 as a row vector: <port| BS3 Shutter Phase BS2.
    let mut window = Matrix2::identity();
    window[(dark, dark)] = Complex64::from_polar(1.0, scenario.phi);
    let mut shutter = Matrix2::identity();
    if scenario.dark_path_blocked {
        shutter[(dark, dark)] = Complex64::new(0.0, 0.0);
    }
    let downstream = bs * shutter * window * bs;
    let row = basis(scenario.port.index()).transpose() * downstream;

    // |psi_f> is the adjoint of the row; the shutter makes it sub-normalized.
    let psi_f: Vec<Complex64> = row.iter().map(|z| z.conj()).collect();
    let psi_f = SystemState::normalized(psi_f).map_err(|_| {
        Error::PostSelectionDark(format!("{:?} receives no amplitude", scenario.port))
    })?;
    let psi_i = SystemState::new(arms.iter().copied().collect())?;
    let ensemble = ensemble_or_dark(psi_i, psi_f, scenario.port)?;

    let projector = Projector::rank1(&SystemState::basis(2, L)?);
    let weak_value = weak_value(&ensemble, &projector)?.value;
    Ok(MziRealization {
        ensemble,
        projector,
        weak_value,
    })
}

fn ensemble_or_dark(psi_i: SystemState, psi_f: SystemState, port: Port) -> Result<PpsEnsemble> {
    PpsEnsemble::new(psi_i, psi_f).map_err(|e| match e {
        Error::OverlapTooSmall { overlap, .. } => {
            Error::PostSelectionDark(format!("{port:?} overlap {overlap:e}"))
        }
        other => other,
    })
}

/// Full modular-dynamics result at one displacement.
pub fn camera_state(scenario: &MziScenario, gamma: f64) -> Result<ModularPointerResult> {
    let real = realize(scenario)?;
    let beam = gaussian_pointer(scenario.grid, scenario.sigma)?;
    apply_modular_operator(&real.ensemble, &real.projector, &beam, gamma)
}

/// Intensity image at the camera for displacement `gamma`.
pub fn camera_profile(scenario: &MziScenario, gamma: f64) -> Result<Vec<f64>> {
    Ok(spatial_profile(&camera_state(scenario, gamma)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseRow {
    pub gamma: f64,
    pub centroid: f64,
}

/// Image centroid for every displacement in the scenario, in scan order.
pub fn pointer_response_curve(scenario: &MziScenario) -> Result<Vec<ResponseRow>> {
    let real = realize(scenario)?;
    let beam = gaussian_pointer(scenario.grid, scenario.sigma)?;
    scenario
        .gammas
        .par_iter()
        .map(|&gamma| {
            let r = apply_modular_operator(&real.ensemble, &real.projector, &beam, gamma)?;
            Ok(ResponseRow {
                gamma,
                centroid: pointer::profile_centroid(&scenario.grid, &spatial_profile(&r)),
            })
        })
        .collect()
}

pub fn write_response_csv<W: Write>(writer: W, rows: &[ResponseRow]) -> Result<()> {
    output::write_table(
        writer,
        ["gamma", "centroid"],
        rows.iter().map(|r| [r.gamma, r.centroid]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn scenario(phi: f64, port: Port, blocked: bool) -> MziScenario {
        MziScenario::new(phi, port, blocked, 1.0, vec![0.0, 1.0, 2.0, 3.0, 5.0, 8.0]).unwrap()
    }

    fn assert_weak(phi: f64, port: Port, blocked: bool, expect: f64) {
        let w = realize(&scenario(phi, port, blocked)).unwrap().weak_value;
        assert!(
            (w - Complex64::new(expect, 0.0)).norm() < 1e-12,
            "phi={phi} {port:?} blocked={blocked}: {w}"
        );
    }

    #[test]
    fn anchored_weak_values() {
        assert_weak(0.0, Port::R6, false, 1.0);
        assert_weak(PI, Port::R6, false, 0.0);
        assert_weak(0.0, Port::L6, false, 0.0);
        assert_weak(0.0, Port::R6, true, 0.5);
    }

    #[test]
    fn shutter_makes_phase_irrelevant() {
        for phi in [0.3, PI, -2.0] {
            assert_weak(phi, Port::R6, true, 0.5);
        }
    }

    #[test]
    fn realization_shape() {
        let real = realize(&scenario(0.0, Port::R6, false)).unwrap();
        assert_eq!(real.psi_i().dim(), 2);
        let m = real.projector.matrix();
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dark_post_selection_is_reported() {
        let psi_i = SystemState::basis(2, 0).unwrap();
        let psi_f = SystemState::basis(2, 1).unwrap();
        assert!(matches!(
            ensemble_or_dark(psi_i, psi_f, Port::L6),
            Err(Error::PostSelectionDark(_))
        ));
    }

    #[test]
    fn camera_profiles() {
        let s = scenario(0.0, Port::R6, false);
        let grid = s.grid;
        let argmax =
            |p: &[f64]| grid.q((0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap());

        let bright = camera_profile(&s, 3.0).unwrap();
        assert_abs_diff_eq!(argmax(&bright), 3.0, epsilon = grid.dq());
        assert_abs_diff_eq!(
            pointer::profile_centroid(&grid, &bright),
            3.0,
            epsilon = 1e-8
        );

        let dark = camera_profile(&scenario(PI, Port::R6, false), 3.0).unwrap();
        assert_abs_diff_eq!(argmax(&dark), 0.0, epsilon = grid.dq());

        let blocked = camera_profile(&scenario(0.0, Port::R6, true), 8.0).unwrap();
        let left = (0..grid.n())
            .filter(|&k| grid.q(k) < 4.0)
            .map(|k| blocked[k])
            .fold(0.0, f64::max);
        let right = (0..grid.n())
            .filter(|&k| grid.q(k) > 4.0)
            .map(|k| blocked[k])
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(left / right, 1.0, epsilon = 1e-9);
        let integral: f64 = blocked.iter().sum::<f64>() * grid.dq();
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn response_curves_are_persistence_lines() {
        let bright = pointer_response_curve(&scenario(0.0, Port::R6, false)).unwrap();
        let dark = pointer_response_curve(&scenario(PI, Port::R6, false)).unwrap();
        let blocked = pointer_response_curve(&scenario(0.0, Port::R6, true)).unwrap();
        for ((b, d), h) in bright.iter().zip(&dark).zip(&blocked) {
            assert_abs_diff_eq!(b.centroid, b.gamma, epsilon = 1e-8);
            assert_abs_diff_eq!(d.centroid, 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(b.centroid + d.centroid, b.gamma, epsilon = 1e-8);
            assert_abs_diff_eq!(h.centroid, h.gamma / 2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn port_parsing() {
        assert_eq!("R6".parse::<Port>().unwrap(), Port::R6);
        assert_eq!("L6".parse::<Port>().unwrap(), Port::L6);
        assert!("X".parse::<Port>().is_err());
    }
}
