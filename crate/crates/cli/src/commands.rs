use std::io::Write;
use std::path::Path;

use modval::dynamics::oracle::{fidelity, joint_space_oracle, max_deviation, OracleConfig};
use modval::dynamics::{
    apply_modular_operator, persistence_scan, spatial_profile, write_persistence_csv,
};
use modval::faux::{orthogonality_scan, read_faux_qubit, write_orthogonality_csv, ReadoutEstimate};
use modval::mzi::{camera_state, pointer_response_curve, write_response_csv};
use modval::output::{fmt_complex, fmt_real};
use modval::pointer::{gaussian_pointer, Grid, PointerState};
use modval::quantum::{
    modular_value, weak_from_modular_derivative, weak_value, PpsEnsemble, Projector,
};
use modval::Error;

use crate::scenario::ScenarioFile;
use crate::{CliError, Command, Common, OracleArgs};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::WeakValue { common } => weak(&common),
        Command::ModularValue {
            common,
            derivative,
            step,
        } => modular(&common, derivative, step),
        Command::Profile { common, oracle } => profile(&common, &oracle),
        Command::Persistence { common, oracle } => persistence(&common, &oracle),
        Command::Orthogonality { common } => orthogonality(&common),
        Command::FauxRead { common, profile } => faux_read(&common, profile.as_deref()),
        Command::Mzi { common, camera } => mzi(&common, camera),
    }
}

/// Output is assembled in memory and written once, so a failing command never
/// leaves a partial file behind.
fn emit(common: &Common, bytes: &[u8]) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Input(format!("cannot write stdout: {e}"))),
    }
}

fn emit_lines(common: &Common, lines: &[String]) -> Result<(), CliError> {
    let mut text = lines.join("\n");
    text.push('\n');
    emit(common, text.as_bytes())
}

struct Setup {
    ens: PpsEnsemble,
    a: Projector,
    phi: PointerState,
    gammas: Vec<f64>,
}

fn setup(file: &ScenarioFile) -> Result<Setup, CliError> {
    let gammas = file.gammas()?;
    let grid = file.grid(&gammas)?;
    Ok(Setup {
        ens: file.ensemble()?,
        a: file.projector()?,
        phi: gaussian_pointer(grid, file.sigma()?)?,
        gammas,
    })
}

fn weak(common: &Common) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let w = weak_value(&file.ensemble()?, &file.projector()?)?;
    emit_lines(common, &[fmt_complex(w.value)])
}

fn modular(common: &Common, derivative: bool, step: f64) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let hbar = file.hbar(common.hbar);
    let ens = file.ensemble()?;
    let a = file.projector()?;
    if !derivative {
        let m = modular_value(&ens, &a, file.gamma()?, hbar)?;
        return emit_lines(common, &[fmt_complex(m.value)]);
    }
    let w = weak_value(&ens, &a)?.value;
    let d = weak_from_modular_derivative(&ens, &a, hbar, step)?;
    emit_lines(
        common,
        &[
            format!("derivative: {}", fmt_complex(d)),
            format!("weak_value: {}", fmt_complex(w)),
            format!("abs_error: {}", fmt_real((d - w).norm())),
        ],
    )
}

fn oracle_config(args: &OracleArgs) -> OracleConfig {
    match args.oracle_steps {
        Some(steps) => OracleConfig::trotter(steps),
        None => OracleConfig::spectral(),
    }
}

/// Largest amplitude deviation and smallest fidelity against the oracle over
/// all couplings, reported on stderr.
fn cross_check(s: &Setup, args: &OracleArgs, gammas: &[f64]) -> Result<(), CliError> {
    let config = oracle_config(args);
    let mut worst_dev: f64 = 0.0;
    let mut worst_fid: f64 = 1.0;
    for &gamma in gammas {
        let exact = apply_modular_operator(&s.ens, &s.a, &s.phi, gamma)?;
        let oracle = joint_space_oracle(&s.ens, &s.a, &s.phi, gamma, config)?;
        worst_dev = worst_dev.max(max_deviation(&exact.state, &oracle)?);
        worst_fid = worst_fid.min(fidelity(&exact.state, &oracle)?);
    }
    eprintln!(
        "oracle ({:?}): max_deviation = {}, min_fidelity = {}",
        config.mode,
        fmt_real(worst_dev),
        fmt_real(worst_fid)
    );
    Ok(())
}

fn profile(common: &Common, oracle: &OracleArgs) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let gamma = file.gamma()?;
    let s = setup(&file)?;
    let r = apply_modular_operator(&s.ens, &s.a, &s.phi, gamma)?;
    if oracle.oracle {
        cross_check(&s, oracle, &[gamma])?;
    }
    let mut buf = Vec::new();
    r.state.write_csv(&mut buf, Some(&spatial_profile(&r)))?;
    emit(common, &buf)
}

fn persistence(common: &Common, oracle: &OracleArgs) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let s = setup(&file)?;
    let rows = persistence_scan(&s.ens, &s.a, &s.phi, &s.gammas)?;
    if oracle.oracle {
        cross_check(&s, oracle, &s.gammas)?;
    }
    let mut buf = Vec::new();
    write_persistence_csv(&mut buf, &rows)?;
    emit(common, &buf)
}

fn orthogonality(common: &Common) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let gammas = file.gammas()?;
    let phi = gaussian_pointer(file.grid(&gammas)?, file.sigma()?)?;
    let rows = orthogonality_scan(&phi, &gammas)?;
    let mut buf = Vec::new();
    write_orthogonality_csv(&mut buf, &rows)?;
    emit(common, &buf)
}

/// Reads the `intensity` column of a profile CSV and checks its `q` column
/// against the grid.
fn read_profile_csv(path: &Path, grid: &Grid) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| bad(format!("no `{name}` column")))
    };
    let (qi, ii) = (column("q")?, column("intensity")?);
    let mut profile = Vec::with_capacity(grid.n());
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| -> Result<f64, CliError> {
            let text = record.get(i).unwrap_or("").trim();
            text.parse()
                .map_err(|_| bad(format!("row {}: cannot parse {text:?}", k + 1)))
        };
        let q = field(qi)?;
        if k >= grid.n() || (q - grid.q(k)).abs() > 1e-9 * (1.0 + grid.length()) {
            return Err(bad(format!("row {} is not on the scenario grid", k + 1)));
        }
        profile.push(field(ii)?);
    }
    if profile.len() != grid.n() {
        return Err(bad(format!(
            "{} rows, grid has {}",
            profile.len(),
            grid.n()
        )));
    }
    Ok(profile)
}

fn write_estimate(common: &Common, est: &ReadoutEstimate) -> Result<(), CliError> {
    let minus = est.candidate_minus.map(fmt_real).unwrap_or_default();
    let lines = [
        "peak_ratio,candidate_plus,candidate_minus,interference_bound".to_string(),
        format!(
            "{},{},{},{}",
            fmt_real(est.peak_ratio),
            fmt_real(est.candidate_plus),
            minus,
            fmt_real(est.interference_bound)
        ),
    ];
    emit_lines(common, &lines)
}

fn faux_read(common: &Common, profile_path: Option<&Path>) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let gamma = file.gamma()?;
    let sigma = file.sigma()?;
    let (profile, grid) = match profile_path {
        Some(path) => {
            let grid = file.grid(&file.gammas()?)?;
            (read_profile_csv(path, &grid)?, grid)
        }
        None => {
            let s = setup(&file)?;
            let r = apply_modular_operator(&s.ens, &s.a, &s.phi, gamma)?;
            (spatial_profile(&r), *s.phi.grid())
        }
    };
    match read_faux_qubit(&profile, &grid, gamma, sigma) {
        Ok(est) => write_estimate(common, &est),
        // One lobe missing is an exact reading of 0 or 1, not a failure.
        Err(Error::PeakNotFound {
            side,
            estimate: Some(est),
        }) => {
            eprintln!("note: PeakNotFound on the {side} half-line; degenerate estimate reported");
            write_estimate(common, &est)
        }
        Err(e) => Err(e.into()),
    }
}

fn mzi(common: &Common, camera: bool) -> Result<(), CliError> {
    let file = ScenarioFile::load(&common.scenario)?;
    let scenario = file.mzi()?;
    let mut buf = Vec::new();
    if camera {
        let r = camera_state(&scenario, file.gamma()?)?;
        r.state.write_csv(&mut buf, Some(&spatial_profile(&r)))?;
    } else {
        write_response_csv(&mut buf, &pointer_response_curve(&scenario)?)?;
    }
    emit(common, &buf)
}
