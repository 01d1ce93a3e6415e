//! TOML configs for every subcommand. Parse errors carry the dotted path of
//! the offending field; semantic errors name the table they come from.

use std::fs;
use std::path::{Path, PathBuf};

use dephom::coupling::BoundParams;
use dephom::limits::{ComplexSpec, ConcentrationSetup, Rectangle, RectangleGrid};
use dephom::samplers::SamplerError;
use dephom::{Metric, ProcessSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A parsed config with the SHA-256 of its source text.
pub struct Loaded<T> {
    pub config: T,
    pub sha256: String,
    pub dir: PathBuf,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let de = toml::Deserializer::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Config(format!(
            "{}: field `{field}`: {}",
            path.display(),
            e.into_inner().message().trim()
        ))
    })?;
    Ok(Loaded {
        config,
        sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
        dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

/// Prefixes a sampler validation error with the config field it concerns.
pub fn process_error(prefix: &str, e: SamplerError) -> CliError {
    let field = match &e {
        SamplerError::InvalidBlocks(_) => "density.blocks",
        SamplerError::InvalidChain(_) => "hidden",
        SamplerError::InvalidDensity(_) => "family",
        SamplerError::InvalidLags(_) | SamplerError::SeriesTooShort { .. } => "lags",
        SamplerError::UnsupportedLatticeDimension(_) | SamplerError::InvalidLattice(_) => "extent",
        _ => "",
    };
    let path = if field.is_empty() {
        prefix.to_string()
    } else {
        format!("{prefix}.{field}")
    };
    CliError::Config(format!("field `{path}`: {e}"))
}

pub fn validate_process(prefix: &str, process: &ProcessSpec) -> Result<(), CliError> {
    process.validate().map_err(|e| process_error(prefix, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    pub process: ProcessSpec,
}

impl SampleConfig {
    pub fn validate(&self, prefix: &str) -> Result<(), CliError> {
        validate_process(&format!("{prefix}process"), &self.process)?;
        self.process
            .check_size(self.n)
            .map_err(|e| CliError::Config(format!("field `{prefix}n`: {e}")))
    }
}

/// Shared by `diagram` and `betti`: where the points come from and how the
/// complex is built.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceConfig {
    /// Point cloud CSV, relative to the config file.
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub allow_outside_cube: bool,
    /// Draw the points instead of reading them.
    pub sample: Option<SampleConfig>,
    /// Scale factor applied to the cloud before building; `max_radius` is in
    /// scaled units.
    pub eta: Option<f64>,
    pub complex: ComplexSpec,
    #[serde(default)]
    pub clearing: bool,
    #[serde(default)]
    pub queries: Vec<Rectangle>,
    /// Also evaluate every query from the rank definition.
    #[serde(default)]
    pub direct: bool,
}

impl PersistenceConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.input, &self.sample) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either `input` or `sample`, not both".into())),
            (None, None) => return Err(CliError::Config("one of `input` or `sample` is required".into())),
            (None, Some(sample)) => sample.validate("sample.")?,
            _ => {}
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(CliError::Config(format!("field `eta`: must be positive, got {eta}")));
            }
        }
        validate_complex(&self.complex, &self.queries, None)?;
        RectangleGrid::new(self.queries.clone()).map_err(|e| CliError::Config(format!("field `queries`: {e}")))?;
        Ok(())
    }
}

pub fn validate_complex(complex: &ComplexSpec, queries: &[Rectangle], p: Option<usize>) -> Result<(), CliError> {
    let grid = RectangleGrid::new(queries.to_vec()).map_err(|e| CliError::Config(format!("field `queries`: {e}")))?;
    complex
        .validate(&grid, p.unwrap_or(1))
        .map_err(|e| CliError::Config(format!("table `complex`: {e}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundsConfig {
    /// Persistent Betti bound on the cube with `η = n^{1/p}` unless given.
    Betti {
        t_grid: Vec<f64>,
        n: usize,
        a: f64,
        q: usize,
        s: f64,
        gamma_inf: f64,
        f_star: f64,
        p: usize,
        #[serde(default)]
        metric: Metric,
        eta: Option<f64>,
    },
    /// Abstract bound with every parameter explicit; `t` comes from the grid.
    Abstract {
        t_grid: Vec<f64>,
        n: f64,
        a: f64,
        q: f64,
        q_tilde: f64,
        c1: f64,
        c2: f64,
        gamma_inf: f64,
        f_star: f64,
        log_covering: f64,
        ball_sup: f64,
    },
    Kernel {
        t_grid: Vec<f64>,
        f_star: f64,
        n_mu: f64,
    },
    /// Hamming-Lipschitz bound for a stationary finite chain of length `n`.
    Mcdiarmid {
        t_grid: Vec<f64>,
        transition: Vec<Vec<f64>>,
        n: usize,
        /// Lipschitz constants; all ones when omitted.
        c: Option<Vec<f64>>,
    },
}

impl BoundsConfig {
    pub fn t_grid(&self) -> &[f64] {
        match self {
            BoundsConfig::Betti { t_grid, .. }
            | BoundsConfig::Abstract { t_grid, .. }
            | BoundsConfig::Kernel { t_grid, .. }
            | BoundsConfig::Mcdiarmid { t_grid, .. } => t_grid,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = self.t_grid();
        if t.is_empty() || t.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(CliError::Config(
                "field `t_grid`: need a nonempty list of finite t >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self, t: f64) -> Option<Result<BoundParams, CliError>> {
        let cfg = |e: dephom::coupling::CouplingError| CliError::Config(e.to_string());
        match *self {
            BoundsConfig::Betti {
                n,
                a,
                q,
                s,
                gamma_inf,
                f_star,
                p,
                metric,
                eta,
                ..
            } => {
                let eta = eta.unwrap_or_else(|| (n as f64).powf(1.0 / p as f64));
                Some(BoundParams::betti_cube(n, t, a, q, s, gamma_inf, f_star, p, metric, eta).map_err(cfg))
            }
            BoundsConfig::Abstract {
                n,
                a,
                q,
                q_tilde,
                c1,
                c2,
                gamma_inf,
                f_star,
                log_covering,
                ball_sup,
                ..
            } => Some(Ok(BoundParams {
                n,
                t,
                a,
                q,
                q_tilde,
                c1,
                c2,
                gamma_inf,
                f_star,
                log_covering,
                ball_sup,
            })),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Dependent process vs its κ-matched binomial process.
    Limit,
    /// Cauchy check across the two largest sample sizes, plus the oracle.
    Vague,
    Slln,
    Lemma,
    Concentration,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub n_max: usize,
    pub trials: usize,
}

fn default_replications() -> usize {
    10
}

fn default_true() -> bool {
    true
}

fn default_max_flags() -> usize {
    1
}

fn default_slln_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; 0 uses every core. Never affects results.
    #[serde(default)]
    pub workers: usize,
    pub process: Option<ProcessSpec>,
    pub complex: Option<ComplexSpec>,
    #[serde(default)]
    pub queries: Vec<Rectangle>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Run the κ-matched binomial process alongside (`limit`, `vague`).
    #[serde(default = "default_true")]
    pub compare_to_binomial: bool,
    /// Flags tolerated before the overall status becomes `fail`.
    #[serde(default = "default_max_flags")]
    pub max_flags: usize,
    /// Exit with code 4 when the status is not `pass`.
    #[serde(default = "default_true")]
    pub flags_fatal: bool,
    /// Largest tolerated relative spread over the last three `slln` values.
    #[serde(default = "default_slln_tolerance")]
    pub slln_tolerance: f64,
    pub lemma: Option<LemmaConfig>,
    pub concentration: Option<ConcentrationSetup>,
}

fn missing(field: &str, suite: Suite) -> CliError {
    CliError::Config(format!("field `{field}` is required by suite `{}`", suite_name(suite)))
}

pub fn suite_name(suite: Suite) -> &'static str {
    match suite {
        Suite::Limit => "limit",
        Suite::Vague => "vague",
        Suite::Slln => "slln",
        Suite::Lemma => "lemma",
        Suite::Concentration => "concentration",
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let suite = self.suite;
        if suite == Suite::Lemma {
            let lemma = self.lemma.ok_or_else(|| missing("lemma", suite))?;
            if lemma.n_max == 0 || lemma.n_max > 12 {
                return Err(CliError::Config(format!(
                    "field `lemma.n_max`: must lie in 1..=12, got {}",
                    lemma.n_max
                )));
            }
            return Ok(());
        }
        let process = self.process.as_ref().ok_or_else(|| missing("process", suite))?;
        validate_process("process", process)?;
        let complex = self.complex.as_ref().ok_or_else(|| missing("complex", suite))?;
        if self.queries.is_empty() {
            return Err(missing("queries", suite));
        }
        validate_complex(complex, &self.queries, Some(process.dim()))?;
        match suite {
            Suite::Concentration => {
                let c = self
                    .concentration
                    .as_ref()
                    .ok_or_else(|| missing("concentration", suite))?;
                process
                    .check_size(c.n)
                    .map_err(|e| CliError::Config(format!("field `concentration.n`: {e}")))?;
                if c.t_grid.is_empty() {
                    return Err(CliError::Config(
                        "field `concentration.t_grid`: must be nonempty".into(),
                    ));
                }
            }
            _ => {
                if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::Config(
                        "field `n_grid`: must be nonempty and strictly increasing".into(),
                    ));
                }
                for &n in &self.n_grid {
                    process
                        .check_size(n)
                        .map_err(|e| CliError::Config(format!("field `n_grid`: {e}")))?;
                }
                if suite != Suite::Slln && self.replications < dephom::limits::MIN_REPLICATIONS {
                    return Err(CliError::Config(format!(
                        "field `replications`: need at least {}, got {}",
                        dephom::limits::MIN_REPLICATIONS,
                        self.replications
                    )));
                }
            }
        }
        Ok(())
    }
}
