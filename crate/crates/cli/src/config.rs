//! Run configuration: JSON file merged with command-line overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::Args;
use qkz_core::params::{default_beta, ModelParams};
use qkz_core::quadrature::QuadratureSpec;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureFile {
    pub nodes_per_unit: Option<usize>,
    pub truncation_margin: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_dimension: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: ParamsFile,
    #[serde(default)]
    pub quadrature: QuadratureFile,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Option<Vec<String>>,
    pub output: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Model parameter flags shared by all subcommands.
#[derive(Debug, Default, Clone, Args)]
pub struct ParamArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// number of sites
    #[arg(long)]
    pub n: Option<usize>,
    /// level (number of integration variables)
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// highest weights, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    /// spectral parameters, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub betas: Option<Vec<f64>>,
    /// quadrature nodes per unit length
    #[arg(long)]
    pub nodes: Option<usize>,
}

pub const DEFAULT_SITES: usize = 2;
pub const DEFAULT_WEIGHT: f64 = -0.3;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub quad: QuadratureSpec,
    pub tolerances: BTreeMap<String, f64>,
    pub tol_override: Option<f64>,
    pub suites: Option<Vec<String>>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(args: &ParamArgs, tol: Option<f64>, out: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let p = &file.params;
        let weights = args.weights.clone().or_else(|| p.weights.clone());
        let betas = args.betas.clone().or_else(|| p.betas.clone());
        let n = args
            .n
            .or(p.n)
            .or(weights.as_ref().map(Vec::len))
            .or(betas.as_ref().map(Vec::len))
            .unwrap_or(DEFAULT_SITES);
        let weights = weights.unwrap_or_else(|| vec![DEFAULT_WEIGHT; n]);
        let betas = betas.unwrap_or_else(|| (0..n).map(default_beta).collect());
        if weights.len() != n || betas.len() != n {
            return Err(CliError::Usage(format!(
                "n = {n} but {} weights and {} betas given",
                weights.len(),
                betas.len()
            )));
        }
        let params = ModelParams::new(
            args.rho.or(p.rho).unwrap_or(2.0 * PI),
            args.lambda.or(p.lambda).unwrap_or(2.0 * PI),
            args.mu.or(p.mu).unwrap_or(0.5),
            args.l.or(p.l).unwrap_or(1),
            weights,
            betas,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;

        let q = &file.quadrature;
        let base = QuadratureSpec::default();
        let quad = QuadratureSpec {
            nodes_per_unit: args.nodes.or(q.nodes_per_unit).unwrap_or(base.nodes_per_unit),
            truncation_margin: q.truncation_margin.unwrap_or(base.truncation_margin),
            tolerance: q.tolerance.unwrap_or(base.tolerance),
            max_dimension: q.max_dimension.unwrap_or(base.max_dimension),
        };
        quad.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(Self {
            params,
            quad,
            tolerances: file.tolerances,
            tol_override: tol,
            suites: file.suites,
            output: out.or(file.output),
        })
    }

    /// Tolerance for a suite: `--tol`, then the config table, then `default`.
    pub fn tolerance(&self, suite: &str, default: f64) -> f64 {
        self.tol_override
            .or_else(|| self.tolerances.get(suite).copied())
            .unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_tolerance_precedence() {
        let cfg = RunConfig::resolve(&ParamArgs::default(), None, None).unwrap();
        assert_eq!(cfg.params.n(), DEFAULT_SITES);
        assert_eq!(cfg.params.l(), 1);
        assert_eq!(cfg.tolerance("s2", 1e-9), 1e-9);

        let mut with_table = cfg.clone();
        with_table.tolerances.insert("s2".into(), 1e-6);
        assert_eq!(with_table.tolerance("s2", 1e-9), 1e-6);
        with_table.tol_override = Some(1e-3);
        assert_eq!(with_table.tolerance("s2", 1e-9), 1e-3);
    }

    #[test]
    fn site_count_follows_lists() {
        let args = ParamArgs { weights: Some(vec![-0.1, -0.2, -0.3]), ..Default::default() };
        assert_eq!(RunConfig::resolve(&args, None, None).unwrap().params.n(), 3);
        let bad = ParamArgs { n: Some(2), betas: Some(vec![0.0]), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&bad, None, None), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::resolve(&ParamArgs::default(), Some(0.0), None), Err(CliError::Usage(_))));
    }
}
