//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "receive_antennas": 4,
//!   "rho": 1.0,
//!   "users": [
//!     {
//!       "transmit_antennas": 3,
//!       "scatterers": 11,
//!       "receive":    { "kind": "g_model", "phi": 0.7853981633974483, "spacing": 0.25 },
//!       "scatterer":  { "kind": "g_model", "phi": 0.39269908169872414, "spacing": 50.0 },
//!       "transmit":   { "kind": "diag", "values": [1.0, 0.5, 0.25] },
//!       "covariance": { "kind": "identity", "scale": 0.3333333333333333 },
//!       "budget": 0.3333333333333333
//!     }
//!   ],
//!   "experiment": { "snr_db": "-10:30:5", "trials": 20000, "seed": 1, "modes": ["mi", "sumrate"] }
//! }
//! ```
//!
//! Matrix kinds: `identity` (optional `scale`), `diag` (`values`), `dense`
//! (row-major `re` and optional `im`), `g_model` (`phi` in radians, `spacing`
//! in wavelengths). Omitted matrices are identity; an omitted covariance is
//! `budget · I` (or `I` without a budget).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dscatter_core::linalg::{diagonal, identity, CMatrix, C64};
use dscatter_core::model::{
    make_g_correlation, validate, ChannelSpec, MatrixRole, Scatterers, Tolerances, UserLink,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::grid::SnrGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub receive_antennas: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub users: Vec<UserConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
}

fn default_rho() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub transmit_antennas: usize,
    pub scatterers: usize,
    #[serde(default, alias = "R")]
    pub receive: MatrixSpec,
    #[serde(default, alias = "S")]
    pub scatterer: MatrixSpec,
    #[serde(default, alias = "T")]
    pub transmit: MatrixSpec,
    #[serde(default, alias = "Q", skip_serializing_if = "Option::is_none")]
    pub covariance: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    Identity {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Diag {
        values: Vec<f64>,
    },
    Dense {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
    GModel {
        phi: f64,
        spacing: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for MatrixSpec {
    fn default() -> Self {
        MatrixSpec::Identity { scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesConfig {
    pub hermitian: Option<f64>,
    pub psd: Option<f64>,
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mi,
    Sinr,
    Sumrate,
    Waterfill,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_grid")]
    pub snr_db: SnrGrid,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_grid() -> SnrGrid {
    SnrGrid::new(-10.0, 30.0, 5.0).unwrap()
}

pub const DEFAULT_TRIALS: u64 = 20_000;

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Mi]
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            snr_db: default_grid(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            modes: default_modes(),
            output: None,
        }
    }
}

/// Resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub snr_db: SnrGrid,
    /// Monte Carlo trials per SNR point; 0 disables Monte Carlo columns.
    pub trials: u64,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub output: Option<PathBuf>,
    pub bits: bool,
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(CliError::config(
                "experiment.modes: at least one mode is required",
            ));
        }
        if self.trials == 1 {
            return Err(CliError::config(
                "experiment.trials: Monte Carlo needs at least 2 trials (0 disables it)",
            ));
        }
        if self.snr_db.points().is_empty() {
            return Err(CliError::config("experiment.snr_db: empty grid"));
        }
        Ok(())
    }

    pub fn has(&self, mode: Mode) -> bool {
        self.modes.contains(&mode)
    }
}

impl From<ExperimentSection> for ExperimentConfig {
    fn from(s: ExperimentSection) -> Self {
        ExperimentConfig {
            snr_db: s.snr_db,
            trials: s.trials,
            seed: s.seed,
            modes: s.modes,
            output: s.output,
            bits: false,
            timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub file: ConfigFile,
    pub spec: ChannelSpec,
    pub experiment: ExperimentConfig,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile = serde_json::from_str(text)
        .map_err(|e| CliError::config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    resolve(file)
}

pub fn resolve(file: ConfigFile) -> Result<LoadedConfig> {
    let spec = build_spec(&file)?;
    let experiment: ExperimentConfig = file.experiment.clone().unwrap_or_default().into();
    experiment.check()?;
    Ok(LoadedConfig {
        file,
        spec,
        experiment,
    })
}

fn build_matrix(m: &MatrixSpec, n: usize, path: &str) -> Result<CMatrix> {
    let err = |msg: String| CliError::config(format!("{path}: {msg}"));
    match m {
        MatrixSpec::Identity { scale } => {
            if !scale.is_finite() || *scale < 0.0 {
                return Err(err(format!(
                    "scale must be finite and non-negative, got {scale}"
                )));
            }
            Ok(identity(n).scale(*scale))
        }
        MatrixSpec::Diag { values } => {
            if values.len() != n {
                return Err(err(format!(
                    "diag has {} values, expected {n}",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(err("diag values must be finite".into()));
            }
            Ok(diagonal(values))
        }
        MatrixSpec::Dense { re, im } => {
            let shape_ok =
                |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
            if !shape_ok(re) {
                return Err(err(format!("re must be {n}x{n}")));
            }
            if let Some(im) = im {
                if !shape_ok(im) {
                    return Err(err(format!("im must be {n}x{n}")));
                }
            }
            Ok(CMatrix::from_fn(n, n, |i, j| {
                C64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j]))
            }))
        }
        MatrixSpec::GModel { phi, spacing } => {
            if !phi.is_finite() || *phi < 0.0 {
                return Err(err(format!(
                    "phi must be a non-negative angle in radians, got {phi}"
                )));
            }
            if !spacing.is_finite() || *spacing < 0.0 {
                return Err(err(format!("spacing must be non-negative, got {spacing}")));
            }
            make_g_correlation(*phi, *spacing, n).map_err(|e| err(e.to_string()))
        }
    }
}

fn role_name(role: MatrixRole) -> &'static str {
    match role {
        MatrixRole::Receive => "receive",
        MatrixRole::Scatterer => "scatterer",
        MatrixRole::Transmit => "transmit",
        MatrixRole::Covariance => "covariance",
    }
}

pub fn build_spec(file: &ConfigFile) -> Result<ChannelSpec> {
    let n_rx = file.receive_antennas;
    if n_rx == 0 {
        return Err(CliError::config("receive_antennas: must be at least 1"));
    }
    if file.users.is_empty() {
        return Err(CliError::config("users: at least one user is required"));
    }
    if !(file.rho > 0.0) || !file.rho.is_finite() {
        return Err(CliError::config(format!(
            "rho: must be positive, got {}",
            file.rho
        )));
    }
    let mut users = Vec::with_capacity(file.users.len());
    for (k, u) in file.users.iter().enumerate() {
        let at = |field: &str| format!("users[{k}].{field}");
        if u.transmit_antennas == 0 {
            return Err(CliError::config(format!(
                "{}: must be at least 1",
                at("transmit_antennas")
            )));
        }
        if u.scatterers == 0 {
            return Err(CliError::config(format!(
                "{}: must be at least 1",
                at("scatterers")
            )));
        }
        let r = build_matrix(&u.receive, n_rx, &at("receive"))?;
        let s = match &u.scatterer {
            MatrixSpec::Diag { values } => {
                build_matrix(&u.scatterer, u.scatterers, &at("scatterer"))?;
                Scatterers::Eigenvalues(values.clone())
            }
            other => Scatterers::Dense(build_matrix(other, u.scatterers, &at("scatterer"))?),
        };
        let t = build_matrix(&u.transmit, u.transmit_antennas, &at("transmit"))?;
        let q = match &u.covariance {
            Some(m) => build_matrix(m, u.transmit_antennas, &at("covariance"))?,
            None => identity(u.transmit_antennas).scale(u.budget.unwrap_or(1.0)),
        };
        let mut link =
            UserLink::new(r, s, t, q).map_err(|e| CliError::config(format!("users[{k}]: {e}")))?;
        if let Some(p) = u.budget {
            link = link
                .with_budget(p)
                .map_err(|e| CliError::config(format!("{}: {e}", at("budget"))))?;
        }
        users.push(link);
    }
    let spec =
        ChannelSpec::new(n_rx, users, file.rho).map_err(|e| CliError::config(e.to_string()))?;

    let defaults = Tolerances::default();
    let tol = file.tolerances.map_or(defaults, |t| Tolerances {
        hermitian: t.hermitian.unwrap_or(defaults.hermitian),
        psd: t.psd.unwrap_or(defaults.psd),
        budget: t.budget.unwrap_or(defaults.budget),
    });
    let report = validate(&spec, &tol);
    let mut problems = Vec::new();
    for m in report.matrix_violations() {
        let at = format!("users[{}].{}", m.user, role_name(m.role));
        if !m.hermitian_ok {
            problems.push(format!(
                "{at}: not Hermitian (deviation {:e})",
                m.hermitian_deviation
            ));
        }
        if !m.psd_ok {
            problems.push(format!(
                "{at}: not PSD (min eigenvalue {:e})",
                m.min_eigenvalue
            ));
        }
        if !m.finite {
            problems.push(format!("{at}: non-finite spectral norm"));
        }
    }
    for b in report.budget_violations() {
        problems.push(format!(
            "users[{}].covariance: average power {} exceeds budget {}",
            b.user, b.average_power, b.budget
        ));
    }
    if !problems.is_empty() {
        return Err(CliError::config(problems.join("; ")));
    }
    Ok(spec)
}

/// Named configurations reproducing the two reference experiments.
pub const PRESETS: &[&str] = &["keyhole-k1", "keyhole-k3", "mac"];

pub fn preset(name: &str) -> Result<ConfigFile> {
    match name {
        "keyhole-k1" => Ok(keyhole(1)),
        "keyhole-k3" => Ok(keyhole(3)),
        "mac" => Ok(mac()),
        other => Err(CliError::config(format!(
            "unknown preset {other:?} (available: {})",
            PRESETS.join(", ")
        ))),
    }
}

/// Multi-keyhole channel: one scatterer per user, `N = n_k = 4`, identity correlations.
pub fn keyhole(k: usize) -> ConfigFile {
    let user = UserConfig {
        transmit_antennas: 4,
        scatterers: 1,
        receive: MatrixSpec::default(),
        scatterer: MatrixSpec::default(),
        transmit: MatrixSpec::default(),
        covariance: None,
        budget: None,
    };
    ConfigFile {
        receive_antennas: 4,
        rho: 1.0,
        users: vec![user; k],
        tolerances: None,
        experiment: Some(ExperimentSection {
            snr_db: SnrGrid::new(-10.0, 30.0, 2.0).unwrap(),
            trials: DEFAULT_TRIALS,
            seed: 1,
            modes: vec![Mode::Mi],
            output: None,
        }),
    }
}

/// Three-user correlated multiple-access channel: `N = 4`, `N_k = 11`,
/// `n_k = 3`, array spacing 0.25, scatterer spacing 50 with spread π/8, and
/// transmit/receive spreads π/4, π/2, π for users 1, 2, 3. Uniform power
/// `P_k = 1/n_k`.
pub fn mac() -> ConfigFile {
    let users = [PI / 4.0, PI / 2.0, PI]
        .iter()
        .map(|&phi| UserConfig {
            transmit_antennas: 3,
            scatterers: 11,
            receive: MatrixSpec::GModel { phi, spacing: 0.25 },
            scatterer: MatrixSpec::GModel {
                phi: PI / 8.0,
                spacing: 50.0,
            },
            transmit: MatrixSpec::GModel { phi, spacing: 0.25 },
            covariance: None,
            budget: Some(1.0 / 3.0),
        })
        .collect();
    ConfigFile {
        receive_antennas: 4,
        rho: 1.0,
        users,
        tolerances: None,
        experiment: Some(ExperimentSection {
            snr_db: SnrGrid::new(-10.0, 30.0, 5.0).unwrap(),
            trials: DEFAULT_TRIALS,
            seed: 1,
            modes: vec![Mode::Mi, Mode::Sumrate, Mode::Waterfill],
            output: None,
        }),
    }
}
