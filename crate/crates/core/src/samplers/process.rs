//! Serializable process descriptions, as read from experiment configs.
//!
//! ```toml
//! [process]
//! type = "blocked_chain"
//! dim = 2
//! density = { kind = "grid", m = 2, weights = [1.5, 0.5, 0.5, 1.5] }
//! hidden = { kind = "sticky", stay = 0.6 }
//! ```

use serde::{Deserialize, Serialize};

use super::delay::sample_delay_embedding;
use super::{
    sample_binomial, sample_blocked_chain, sample_density_chain, sample_lattice_field, Block, BlockedDensity,
    DelayEmbeddingSpec, DensityChainSpec, DensityFamily, HiddenChainSpec, InteriorKernel, LatticeFieldSpec, Sample,
    SamplerError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    Uniform {},
    /// `m^p` equal subcubes, weights in row-major cell order.
    Grid {
        m: usize,
        weights: Vec<f64>,
    },
    Boxes {
        blocks: Vec<Block>,
        weights: Vec<f64>,
    },
}

impl DensityConfig {
    pub fn build(&self, dim: usize) -> Result<BlockedDensity, SamplerError> {
        match self {
            DensityConfig::Uniform {} => Ok(BlockedDensity::uniform(dim)),
            DensityConfig::Grid { m, weights } => BlockedDensity::grid(dim, *m, weights.clone()),
            DensityConfig::Boxes { blocks, weights } => BlockedDensity::new(dim, blocks.clone(), weights.clone()),
        }
    }

    fn from_density(d: &BlockedDensity) -> Self {
        DensityConfig::Boxes {
            blocks: d.blocks().to_vec(),
            weights: d.weights().to_vec(),
        }
    }
}

/// Block-transition kernel; every variant preserves the block masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HiddenConfig {
    Iid {},
    Sticky { stay: f64 },
    Matrix { transition: Vec<Vec<f64>> },
}

impl HiddenConfig {
    pub fn build(&self, density: &BlockedDensity) -> Result<HiddenChainSpec, SamplerError> {
        match self {
            HiddenConfig::Iid {} => Ok(HiddenChainSpec::iid(density)),
            HiddenConfig::Sticky { stay } => HiddenChainSpec::sticky(density, *stay),
            HiddenConfig::Matrix { transition } => {
                HiddenChainSpec::new(transition.clone(), density.masses(), Some(density))
            }
        }
    }
}

fn default_min_ratio() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Binomial {
        dim: usize,
        density: DensityConfig,
    },
    BlockedChain {
        dim: usize,
        density: DensityConfig,
        hidden: HiddenConfig,
    },
    DensityChain {
        dim: usize,
        order: usize,
        family: DensityFamily,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in: Option<usize>,
    },
    DelayEmbedding {
        density: DensityConfig,
        hidden: HiddenConfig,
        lags: Vec<usize>,
    },
    /// `extent` omitted: a sample of size `n` uses the square `√n x √n`.
    LatticeField {
        dim: usize,
        density: DensityConfig,
        horizontal: HiddenConfig,
        vertical: HiddenConfig,
        interior: InteriorKernel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extent: Option<[usize; 2]>,
        #[serde(default = "default_min_ratio")]
        min_ratio: f64,
    },
}

impl ProcessSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ProcessSpec::Binomial { .. } => "binomial",
            ProcessSpec::BlockedChain { .. } => "blocked_chain",
            ProcessSpec::DensityChain { .. } => "density_chain",
            ProcessSpec::DelayEmbedding { .. } => "delay_embedding",
            ProcessSpec::LatticeField { .. } => "lattice_field",
        }
    }

    /// Ambient dimension `p` of the sampled points.
    pub fn dim(&self) -> usize {
        match self {
            ProcessSpec::Binomial { dim, .. }
            | ProcessSpec::BlockedChain { dim, .. }
            | ProcessSpec::DensityChain { dim, .. }
            | ProcessSpec::LatticeField { dim, .. } => *dim,
            ProcessSpec::DelayEmbedding { lags, .. } => lags.len() + 1,
        }
    }

    /// Builds every component, surfacing the first validation error.
    pub fn validate(&self) -> Result<(), SamplerError> {
        match self {
            ProcessSpec::Binomial { dim, density } => density.build(*dim).map(drop),
            ProcessSpec::BlockedChain { .. } => self.hidden_chain().map(drop),
            ProcessSpec::DensityChain { .. } => self.density_chain().map(drop),
            ProcessSpec::DelayEmbedding { .. } => self.delay_spec().map(drop),
            ProcessSpec::LatticeField { extent, .. } => self.lattice_spec(extent.unwrap_or([1, 1])).map(drop),
        }
    }

    /// Checks that `n` is a valid sample size for this process.
    pub fn check_size(&self, n: usize) -> Result<(), SamplerError> {
        if let ProcessSpec::LatticeField { extent, .. } = self {
            lattice_extent(*extent, n)?;
        }
        Ok(())
    }

    /// Block density of a single observation.
    pub fn marginal(&self) -> Result<BlockedDensity, SamplerError> {
        match self {
            ProcessSpec::Binomial { dim, density }
            | ProcessSpec::BlockedChain { dim, density, .. }
            | ProcessSpec::LatticeField { dim, density, .. } => density.build(*dim),
            // Both families have uniform marginals.
            ProcessSpec::DensityChain { dim, .. } => {
                self.density_chain()?;
                Ok(BlockedDensity::uniform(*dim))
            }
            ProcessSpec::DelayEmbedding { .. } => self.delay_spec()?.embedded_marginal(),
        }
    }

    /// The i.i.d. process sharing this process's marginal `κ`.
    pub fn kappa_matched_binomial(&self) -> Result<ProcessSpec, SamplerError> {
        let density = self.marginal()?;
        Ok(ProcessSpec::Binomial {
            dim: density.dim(),
            density: match self {
                ProcessSpec::Binomial { density, .. }
                | ProcessSpec::BlockedChain { density, .. }
                | ProcessSpec::LatticeField { density, .. } => density.clone(),
                _ => DensityConfig::from_density(&density),
            },
        })
    }

    /// The hidden block chain, for processes driven by one.
    pub fn hidden_chain(&self) -> Result<HiddenChainSpec, SamplerError> {
        match self {
            ProcessSpec::BlockedChain { dim, density, hidden } => hidden.build(&density.build(*dim)?),
            ProcessSpec::DelayEmbedding { .. } => Ok(self.delay_spec()?.hidden),
            ProcessSpec::Binomial { dim, density } => Ok(HiddenChainSpec::iid(&density.build(*dim)?)),
            _ => Err(SamplerError::InvalidSpec(format!("{} has no hidden chain", self.tag()))),
        }
    }

    pub fn density_chain(&self) -> Result<DensityChainSpec, SamplerError> {
        match self {
            ProcessSpec::DensityChain {
                dim,
                order,
                family,
                burn_in,
            } => {
                let spec = DensityChainSpec::from_family(*family, *order, *dim)?;
                Ok(match burn_in {
                    Some(b) => spec.with_burn_in(*b),
                    None => spec,
                })
            }
            _ => Err(SamplerError::InvalidSpec(format!(
                "{} is not a density chain",
                self.tag()
            ))),
        }
    }

    pub fn delay_spec(&self) -> Result<DelayEmbeddingSpec, SamplerError> {
        match self {
            ProcessSpec::DelayEmbedding { density, hidden, lags } => {
                let density = density.build(1)?;
                let hidden = hidden.build(&density)?;
                DelayEmbeddingSpec::new(density, hidden, lags.clone())
            }
            _ => Err(SamplerError::InvalidSpec(format!(
                "{} is not a delay embedding",
                self.tag()
            ))),
        }
    }

    pub fn lattice_spec(&self, extent: [usize; 2]) -> Result<LatticeFieldSpec, SamplerError> {
        match self {
            ProcessSpec::LatticeField {
                dim,
                density,
                horizontal,
                vertical,
                interior,
                min_ratio,
                ..
            } => {
                let density = density.build(*dim)?;
                let h = horizontal.build(&density)?.transition;
                let v = vertical.build(&density)?.transition;
                LatticeFieldSpec::new(density, h, v, interior.clone(), extent.to_vec(), *min_ratio)
            }
            _ => Err(SamplerError::InvalidSpec(format!(
                "{} is not a lattice field",
                self.tag()
            ))),
        }
    }

    /// Draws `n` points (for lattice fields, `π(N) = n` sites).
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample, SamplerError> {
        let mut sample = match self {
            ProcessSpec::Binomial { dim, density } => sample_binomial(n, &density.build(*dim)?, seed),
            ProcessSpec::BlockedChain { dim, density, hidden } => {
                let density = density.build(*dim)?;
                sample_blocked_chain(n, &density, &hidden.build(&density)?, seed)?
            }
            ProcessSpec::DensityChain { .. } => sample_density_chain(n, &self.density_chain()?, seed)?,
            ProcessSpec::DelayEmbedding { .. } => sample_delay_embedding(n, &self.delay_spec()?, seed)?,
            ProcessSpec::LatticeField { extent, .. } => {
                let spec = self.lattice_spec(lattice_extent(*extent, n)?)?;
                sample_lattice_field(&spec, seed)?
            }
        };
        sample.process_tag = self.tag().into();
        Ok(sample)
    }
}

fn lattice_extent(extent: Option<[usize; 2]>, n: usize) -> Result<[usize; 2], SamplerError> {
    match extent {
        Some(e) if e[0] * e[1] == n => Ok(e),
        Some(e) => Err(SamplerError::InvalidSpec(format!(
            "lattice extent {e:?} has {} sites, requested n = {n}",
            e[0] * e[1]
        ))),
        None => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n || n == 0 {
                return Err(SamplerError::InvalidSpec(format!(
                    "lattice sample size {n} is not a positive perfect square"
                )));
            }
            Ok([side, side])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"
        type = "blocked_chain"
        dim = 2
        density = { kind = "grid", m = 2, weights = [1.5, 0.5, 0.5, 1.5] }
        hidden = { kind = "sticky", stay = 0.6 }
    "#;

    #[test]
    fn parses_and_samples() {
        let spec: ProcessSpec = toml::from_str(CHAIN).unwrap();
        spec.validate().unwrap();
        let s = spec.sample(40, 1).unwrap();
        assert_eq!(s.cloud.len(), 40);
        assert_eq!(s.process_tag, "blocked_chain");
        let iid = spec.kappa_matched_binomial().unwrap();
        assert_eq!(iid.marginal().unwrap(), spec.marginal().unwrap());
        let back: ProcessSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn every_process_kind_round_trips() {
        let specs = [
            r#"type = "binomial"
               dim = 3
               density = { kind = "uniform" }"#,
            r#"type = "density_chain"
               dim = 1
               order = 1
               family = { kind = "sine_product", amplitude = 0.5 }"#,
            r#"type = "delay_embedding"
               lags = [1, 2]
               density = { kind = "grid", m = 2, weights = [1.0, 1.0] }
               hidden = { kind = "matrix", transition = [[0.75, 0.25], [0.25, 0.75]] }"#,
            r#"type = "lattice_field"
               dim = 2
               density = { kind = "grid", m = 2, weights = [1.0, 1.0, 1.0, 1.0] }
               horizontal = { kind = "sticky", stay = 0.5 }
               vertical = { kind = "sticky", stay = 0.3 }
               interior = { kind = "mixture", weight = 0.5 }"#,
        ];
        for text in specs {
            let spec: ProcessSpec = toml::from_str(text).unwrap();
            spec.validate().unwrap();
            let s = spec.sample(16, 2).unwrap();
            assert_eq!(s.cloud.len(), 16, "{}", spec.tag());
            assert_eq!(s.cloud.dim(), spec.dim());
            let iid = spec.kappa_matched_binomial().unwrap();
            assert_eq!(iid.sample(16, 2).unwrap().cloud.dim(), spec.dim());
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let short: ProcessSpec = toml::from_str(
            r#"type = "binomial"
               dim = 1
               density = { kind = "boxes", weights = [1.0], blocks = [{ lo = [0.0], hi = [0.9] }] }"#,
        )
        .unwrap();
        assert!(short.validate().is_err());
        let lattice: ProcessSpec = toml::from_str(
            r#"type = "lattice_field"
               dim = 1
               density = { kind = "uniform" }
               horizontal = { kind = "iid" }
               vertical = { kind = "iid" }
               interior = { kind = "mixture", weight = 0.5 }"#,
        )
        .unwrap();
        assert!(lattice.sample(10, 0).is_err());
        assert!(lattice.sample(9, 0).is_ok());
        assert!(toml::from_str::<ProcessSpec>(
            "type = \"binomial\"\ndim = 1\ndensity = { kind = \"uniform\" }\nextra = 1"
        )
        .is_err());
    }
}
