use super::blocked::fill_blocks;
use super::{stream_rng, Block, BlockedDensity, HiddenChainSpec, Sample, SamplerError, COORD_STREAM, HIDDEN_STREAM};
use crate::geometry::PointCloud;

/// Embeds `series` as `X_t = (Z_t, Z_{t-τ_1}, ..., Z_{t-τ_{m-1}})` for every
/// `t >= τ_{m-1}`.
pub fn delay_embed(series: &[f64], lags: &[usize]) -> Result<PointCloud<f64>, SamplerError> {
    validate_lags(lags)?;
    let tau_max = lags.last().copied().unwrap_or(0);
    if series.len() <= tau_max {
        return Err(SamplerError::SeriesTooShort {
            len: series.len(),
            tau_max,
        });
    }
    let dim = lags.len() + 1;
    let mut coords = Vec::with_capacity((series.len() - tau_max) * dim);
    for t in tau_max..series.len() {
        coords.push(series[t]);
        coords.extend(lags.iter().map(|&tau| series[t - tau]));
    }
    Ok(PointCloud::from_flat(dim, coords)?)
}

fn validate_lags(lags: &[usize]) -> Result<(), SamplerError> {
    if lags.first() == Some(&0) || lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SamplerError::InvalidLags(lags.to_vec()));
    }
    Ok(())
}

/// Delay embedding of a one-dimensional hidden-chain process.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEmbeddingSpec {
    pub density: BlockedDensity,
    pub hidden: HiddenChainSpec,
    pub lags: Vec<usize>,
}

/// Cap on `K^m` for the product partition of the embedded marginal.
const MAX_PRODUCT_BLOCKS: usize = 4096;

impl DelayEmbeddingSpec {
    pub fn new(density: BlockedDensity, hidden: HiddenChainSpec, lags: Vec<usize>) -> Result<Self, SamplerError> {
        validate_lags(&lags)?;
        if density.dim() != 1 {
            return Err(SamplerError::InvalidSpec(
                "delay embeddings need a one-dimensional series".into(),
            ));
        }
        if hidden.num_states() != density.num_blocks() {
            return Err(SamplerError::InvalidChain(
                "state count differs from block count".into(),
            ));
        }
        Ok(Self { density, hidden, lags })
    }

    pub fn dim(&self) -> usize {
        self.lags.len() + 1
    }

    pub fn tau_max(&self) -> usize {
        self.lags.last().copied().unwrap_or(0)
    }

    /// Law of a single `X_t` as a blocked density over product boxes.
    pub fn embedded_marginal(&self) -> Result<BlockedDensity, SamplerError> {
        let k = self.density.num_blocks();
        let m = self.dim();
        let count = k
            .checked_pow(m as u32)
            .filter(|&c| c <= MAX_PRODUCT_BLOCKS)
            .ok_or_else(|| SamplerError::InvalidSpec(format!("{k}^{m} product blocks exceed {MAX_PRODUCT_BLOCKS}")))?;
        // Offsets 0 = τ_0 < τ_1 < ... ; walk forward in time from the oldest.
        let offsets: Vec<usize> = std::iter::once(0).chain(self.lags.iter().copied()).collect();
        let step_powers: Vec<Vec<Vec<f64>>> = (1..m)
            .map(|c| matrix_power(&self.hidden.transition, offsets[c] - offsets[c - 1]))
            .collect();
        let mut blocks = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for idx in 0..count {
            // states[c] is the block of coordinate c (lag offsets[c]).
            let mut states = vec![0usize; m];
            let mut rest = idx;
            for c in (0..m).rev() {
                states[c] = rest % k;
                rest /= k;
            }
            let mut prob = self.hidden.initial[states[m - 1]];
            for c in (1..m).rev() {
                prob *= step_powers[c - 1][states[c]][states[c - 1]];
            }
            let block = Block {
                lo: states.iter().map(|&z| self.density.blocks()[z].lo[0]).collect(),
                hi: states.iter().map(|&z| self.density.blocks()[z].hi[0]).collect(),
            };
            if prob > 0.0 {
                weights.push(prob / block.volume());
                blocks.push(block);
            }
        }
        // Zero-probability boxes are merged away; only possible for
        // non-mixing chains, where the partition check below reports it.
        BlockedDensity::new(m, blocks, weights)
    }
}

pub(crate) fn matrix_power(p: &[Vec<f64>], e: usize) -> Vec<Vec<f64>> {
    let k = p.len();
    let mut result: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for _ in 0..e {
        result = (0..k)
            .map(|i| (0..k).map(|j| (0..k).map(|l| result[i][l] * p[l][j]).sum()).collect())
            .collect();
    }
    result
}

/// Samples `n` embedded points; the hidden path covers the full series of
/// length `n + τ_{m-1}`.
pub fn sample_delay_embedding(n: usize, spec: &DelayEmbeddingSpec, seed: u64) -> Result<Sample, SamplerError> {
    let len = n + spec.tau_max();
    let path = spec.hidden.sample_path(len, &mut stream_rng(seed, HIDDEN_STREAM));
    let series = fill_blocks(&spec.density, &path, &mut stream_rng(seed, COORD_STREAM));
    let cloud = if n == 0 {
        PointCloud::empty(spec.dim())?
    } else {
        delay_embed(&series.points().map(|x| x[0]).collect::<Vec<_>>(), &spec.lags)?
    };
    Ok(Sample {
        cloud,
        hidden_path: Some(path),
        seed,
        process_tag: "delay_embedding".into(),
    })
}
