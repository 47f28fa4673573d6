//! Scenario files: TOML with complex numbers as `[re, im]` pairs.
//!
//! ```toml
//! hbar = 1.0
//!
//! [system]
//! psi_i = [[1.0, 0.0], [0.0, 0.0]]
//! psi_f = [[1.0, 0.0], [0.0, 0.0]]
//! projector_onto = [[1.0, 0.0], [0.0, 0.0]]
//!
//! [pointer]
//! sigma = 1.0
//! grid = { q_min = -16.0, q_max = 24.0, n = 1024 }
//!
//! [coupling]
//! gammas = [0.0, 2.0, 4.0, 8.0]
//! ```
//!
//! State vectors are normalized on load. `projector` takes a full matrix (rows
//! of pairs); `projector_onto` takes a vector and builds its rank-1 projector.

use std::path::Path;

use modval::mzi::{MziScenario, Port};
use modval::pointer::Grid;
use modval::quantum::{PpsEnsemble, Projector, SystemState, DEFAULT_OVERLAP_FLOOR};
use modval::Complex64;
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::CliError;

type Pair = [f64; 2];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub hbar: Option<f64>,
    pub system: Option<SystemSection>,
    pub pointer: Option<PointerSection>,
    pub coupling: Option<CouplingSection>,
    pub mzi: Option<MziSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub dim: Option<usize>,
    pub psi_i: Vec<Pair>,
    pub psi_f: Vec<Pair>,
    pub projector: Option<Vec<Vec<Pair>>>,
    pub projector_onto: Option<Vec<Pair>>,
    pub overlap_floor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerSection {
    pub sigma: f64,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub gamma: Option<f64>,
    pub gammas: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MziSection {
    pub phi: f64,
    pub port: String,
    #[serde(default)]
    pub dark_path_blocked: bool,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(m) => input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| input(e.to_string()))
    }

    /// `--hbar` wins over the file; the default is 1.
    pub fn hbar(&self, flag: Option<f64>) -> f64 {
        flag.or(self.hbar).unwrap_or(1.0)
    }

    fn system(&self) -> Result<&SystemSection, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| input("missing [system] section"))
    }

    fn pointer(&self) -> Result<&PointerSection, CliError> {
        self.pointer
            .as_ref()
            .ok_or_else(|| input("missing [pointer] section"))
    }

    pub fn ensemble(&self) -> Result<PpsEnsemble, CliError> {
        let sys = self.system()?;
        let dim = sys.psi_i.len();
        if let Some(d) = sys.dim {
            if d != dim {
                return Err(input(format!(
                    "system.dim = {d} but system.psi_i has {dim} entries"
                )));
            }
        }
        if sys.psi_f.len() != dim {
            return Err(input(format!(
                "system.psi_f has {} entries, system.psi_i has {dim}",
                sys.psi_f.len()
            )));
        }
        let psi_i = SystemState::normalized(sys.psi_i.iter().map(complex).collect())?;
        let psi_f = SystemState::normalized(sys.psi_f.iter().map(complex).collect())?;
        let floor = sys.overlap_floor.unwrap_or(DEFAULT_OVERLAP_FLOOR);
        Ok(PpsEnsemble::with_floor(psi_i, psi_f, floor)?)
    }

    pub fn projector(&self) -> Result<Projector, CliError> {
        let sys = self.system()?;
        match (&sys.projector, &sys.projector_onto) {
            (Some(rows), None) => {
                let n = rows.len();
                if let Some(bad) = rows.iter().position(|r| r.len() != n) {
                    return Err(input(format!(
                        "system.projector row {bad} does not have {n} entries"
                    )));
                }
                let m = DMatrix::from_fn(n, n, |i, j| complex(&rows[i][j]));
                Ok(Projector::new(m)?)
            }
            (None, Some(v)) => {
                let v = SystemState::normalized(v.iter().map(complex).collect())?;
                Ok(Projector::rank1(&v))
            }
            _ => Err(input(
                "system needs exactly one of `projector` or `projector_onto`",
            )),
        }
    }

    pub fn sigma(&self) -> Result<f64, CliError> {
        Ok(self.pointer()?.sigma)
    }

    /// The explicit grid, or the default sized to `sigma` and `gammas`.
    pub fn grid(&self, gammas: &[f64]) -> Result<Grid, CliError> {
        let p = self.pointer()?;
        Ok(match &p.grid {
            Some(g) => Grid::new(g.q_min, g.q_max, g.n)?,
            None => Grid::default_for(p.sigma, gammas)?,
        })
    }

    pub fn gamma(&self) -> Result<f64, CliError> {
        self.coupling
            .as_ref()
            .and_then(|c| c.gamma)
            .ok_or_else(|| input("missing coupling.gamma"))
    }

    /// `coupling.gammas`, or the single `coupling.gamma`.
    pub fn gammas(&self) -> Result<Vec<f64>, CliError> {
        let c = self
            .coupling
            .as_ref()
            .ok_or_else(|| input("missing [coupling] section"))?;
        match (&c.gammas, c.gamma) {
            (Some(list), _) => Ok(list.clone()),
            (None, Some(g)) => Ok(vec![g]),
            (None, None) => Err(input("coupling needs `gamma` or `gammas`")),
        }
    }

    pub fn mzi(&self) -> Result<MziScenario, CliError> {
        let m = self
            .mzi
            .as_ref()
            .ok_or_else(|| input("missing [mzi] section"))?;
        let port: Port = m.port.parse()?;
        let gammas = self.gammas()?;
        let grid = self.grid(&gammas)?;
        Ok(
            MziScenario::new(m.phi, port, m.dark_path_blocked, self.sigma()?, gammas)?
                .with_grid(grid),
        )
    }
}
