//! TOML run configuration. Every table rejects unknown keys; command-line flags are
//! merged on top afterwards.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use darkstate::ladder::{Boundary, LadderParams, DEFAULT_EDGE_WINDOW};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "DARKSTATE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub lambda: LambdaSection,
    #[serde(default)]
    pub bands: BandsSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub manybody: ManyBodySection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Eigensolver tolerance.
    pub eig: Option<f64>,
    /// Edge-state energy window.
    pub edge: Option<f64>,
    /// Zero-mode window for scans.
    pub scan_edge: Option<f64>,
    /// Ground-manifold degeneracy tolerance.
    pub degeneracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub t: Option<f64>,
    pub gamma: Option<f64>,
    pub omega_x: Option<f64>,
    pub omega_y: Option<f64>,
    pub length: Option<usize>,
    pub boundary: Option<Boundary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSection {
    pub theta: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub b_r: Option<[f64; 3]>,
    /// Explicit imaginary field; when absent the compensating one is used.
    pub b_i: Option<[f64; 3]>,
    pub compensate: Option<bool>,
    pub psi0: Option<InitialState>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Dark,
    Bright,
    Up,
    Down,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsSection {
    pub n_k: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub gamma_start: Option<f64>,
    pub gamma_stop: Option<f64>,
    pub gamma_step: Option<f64>,
    pub omega_y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManyBodySection {
    pub u: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Config seed, overridden by `DARKSTATE_SEED` when set.
    pub fn resolved_seed(&self) -> Result<u64> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
            Err(std::env::VarError::NotPresent) => Ok(self.seed.unwrap_or(0)),
            Err(e) => bail!("{SEED_ENV}: {e}"),
        }
    }

    pub fn ladder_params(&self) -> Result<LadderParams> {
        let l = &self.ladder;
        Ok(LadderParams::new(
            l.t.unwrap_or(1.0),
            l.gamma.unwrap_or(-0.1),
            l.omega_x.unwrap_or(0.0),
            l.omega_y.unwrap_or(0.3),
            l.length.unwrap_or(40),
            l.boundary.unwrap_or(Boundary::Open),
        )?)
    }

    pub fn eig_tol(&self) -> f64 {
        self.tolerances.eig.unwrap_or(darkstate::numkit::DEFAULT_TOL)
    }

    pub fn edge_window(&self) -> f64 {
        self.tolerances.edge.unwrap_or(DEFAULT_EDGE_WINDOW)
    }

    pub fn scan_edge_tol(&self) -> f64 {
        self.tolerances.scan_edge.unwrap_or(1e-4)
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.tolerances
            .degeneracy
            .unwrap_or(darkstate::manybody::CDW_DEGENERACY_TOL)
    }

    pub fn check_tolerances(&self) -> Result<()> {
        for (name, v) in [
            ("eig", self.tolerances.eig),
            ("edge", self.tolerances.edge),
            ("scan_edge", self.tolerances.scan_edge),
            ("degeneracy", self.tolerances.degeneracy),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    bail!("tolerance {name} = {v} must be positive and finite");
                }
            }
        }
        Ok(())
    }
}
