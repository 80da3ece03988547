//! Run configuration: caps, tolerances and default seeds, read from a `key = value` file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasserre::{ProgramLimits, SolveOptions};
use crate::oracle::OracleLimits;
use crate::pipeline::RoundingParams;

/// Environment variable naming a config file that replaces the defaults.
pub const CONFIG_ENV: &str = "CMAXCUT_CONFIG";

/// Reference approximation constant of the constrained rounding scheme. Reported for
/// comparison only; nothing asserts it.
pub const ALPHA_CC: f64 = 0.858;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n_max: usize,
    pub level: usize,
    pub depth_cap: usize,
    pub max_moments: usize,
    pub max_rows: usize,
    pub trials: usize,
    /// Cap on conditioning steps of the independence search.
    pub budget_cap: usize,
    pub max_parts: usize,
    pub eps: f64,
    /// `None` means `eps^6`.
    pub alpha: Option<f64>,
    pub seed: u64,
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
    pub sdp_rho: f64,
    pub oracle_max_n: usize,
    pub oracle_max_candidates: u64,
    /// Worker threads for `bench`; 0 picks the available parallelism.
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        let p = RoundingParams::desk(0.25);
        let o = OracleLimits::default();
        Config {
            n_max: p.limits.n_max,
            level: p.level,
            depth_cap: p.limits.depth_cap,
            max_moments: p.limits.max_moments,
            max_rows: p.limits.max_rows,
            trials: p.trials,
            budget_cap: p.budget_cap,
            max_parts: p.max_parts,
            eps: p.eps,
            alpha: None,
            seed: 0,
            sdp_tol: p.solver.tol,
            sdp_max_iter: p.solver.max_iter,
            sdp_rho: p.solver.rho,
            oracle_max_n: o.max_gray_n,
            oracle_max_candidates: o.max_candidates,
            workers: 0,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| {
                    let before = &text[..s.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    (line, s.start - before.rfind('\n').map_or(0, |p| p + 1) + 1)
                })
                .unwrap_or((0, 0));
            Error::Parse { line, column, message: e.message().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The file named by [`CONFIG_ENV`] if set, the defaults otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn rounding_params(&self) -> RoundingParams {
        RoundingParams {
            eps: self.eps,
            alpha: self.alpha.unwrap_or(self.eps.powi(6)),
            trials: self.trials,
            rng_seed: self.seed,
            level: self.level,
            budget_cap: self.budget_cap,
            max_parts: self.max_parts,
            limits: self.program_limits(),
            solver: SolveOptions { tol: self.sdp_tol, max_iter: self.sdp_max_iter, rho: self.sdp_rho },
        }
    }

    pub fn program_limits(&self) -> ProgramLimits {
        ProgramLimits {
            n_max: self.n_max,
            depth_cap: self.depth_cap,
            max_moments: self.max_moments,
            max_rows: self.max_rows,
        }
    }

    pub fn oracle_limits(&self) -> OracleLimits {
        OracleLimits { max_gray_n: self.oracle_max_n, max_candidates: self.oracle_max_candidates }
    }
}
