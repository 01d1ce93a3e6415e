use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{stream_rng, Sample, SamplerError, COORD_STREAM, HIDDEN_STREAM};
use crate::geometry::PointCloud;

const VOLUME_TOL: f64 = 1e-9;

/// Axis-aligned box `[lo, hi]` inside the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Block {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn overlap(&self, other: &Block) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .map(|((l1, h1), (l2, h2))| (h1.min(*h2) - l1.max(*l2)).max(0.0))
            .product()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| v >= l && (v < h || (h == 1.0 && v <= h)))
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| l + (h - l) * rng.random::<f64>())
            .collect()
    }
}

/// Piecewise-constant density `κ = Σ α_i 1{A_i}` over a box partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedDensity {
    dim: usize,
    blocks: Vec<Block>,
    weights: Vec<f64>,
}

impl BlockedDensity {
    pub fn new(dim: usize, blocks: Vec<Block>, weights: Vec<f64>) -> Result<Self, SamplerError> {
        let bad = |msg: String| Err(SamplerError::InvalidBlocks(msg));
        if dim == 0 {
            return bad("dimension must be positive".into());
        }
        if blocks.is_empty() {
            return bad("no blocks".into());
        }
        if blocks.len() != weights.len() {
            return bad(format!("{} blocks but {} weights", blocks.len(), weights.len()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.lo.len() != dim || b.hi.len() != dim {
                return bad(format!("block {i} has wrong dimension"));
            }
            if b.lo.iter().zip(&b.hi).any(|(&l, &h)| !(0.0 <= l && l < h && h <= 1.0)) {
                return bad(format!("block {i} is not a nondegenerate box in the unit cube"));
            }
            if !(weights[i] > 0.0 && weights[i].is_finite()) {
                return bad(format!("weight {i} must be positive, got {}", weights[i]));
            }
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if blocks[i].overlap(&blocks[j]) > VOLUME_TOL {
                    return bad(format!("blocks {i} and {j} overlap"));
                }
            }
        }
        let volume: f64 = blocks.iter().map(Block::volume).sum();
        if (volume - 1.0).abs() > VOLUME_TOL {
            return bad(format!("block volumes sum to {volume}, not 1"));
        }
        let mass: f64 = blocks.iter().zip(&weights).map(|(b, w)| b.volume() * w).sum();
        if (mass - 1.0).abs() > VOLUME_TOL {
            return bad(format!("Σ α_i |A_i| = {mass}, not 1"));
        }
        Ok(Self { dim, blocks, weights })
    }

    pub fn uniform(dim: usize) -> Self {
        Self::grid(dim, 1, vec![1.0]).expect("unit cube is a valid partition")
    }

    /// `m^p` equal subcubes; block index is row-major in the cell coordinates
    /// (first axis slowest).
    pub fn grid(dim: usize, m: usize, weights: Vec<f64>) -> Result<Self, SamplerError> {
        if m == 0 {
            return Err(SamplerError::InvalidBlocks("grid needs m >= 1".into()));
        }
        let count = m
            .checked_pow(dim as u32)
            .filter(|&c| c <= 1 << 20)
            .ok_or_else(|| SamplerError::InvalidBlocks(format!("grid of {m}^{dim} blocks is too large")))?;
        let blocks = (0..count)
            .map(|idx| {
                let mut cell = vec![0usize; dim];
                let mut rest = idx;
                for k in (0..dim).rev() {
                    cell[k] = rest % m;
                    rest /= m;
                }
                Block {
                    lo: cell.iter().map(|&c| c as f64 / m as f64).collect(),
                    hi: cell.iter().map(|&c| (c + 1) as f64 / m as f64).collect(),
                }
            })
            .collect();
        Self::new(dim, blocks, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block probabilities `α_i |A_i|`.
    pub fn masses(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| b.volume() * w)
            .collect()
    }

    pub fn block_of(&self, x: &[f64]) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(x))
    }

    /// `κ(x)`; zero outside the cube.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.block_of(x).map_or(0.0, |i| self.weights[i])
    }

    /// `sup κ`, the `f*` of the density.
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

/// Stationary finite-state chain selecting blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenChainSpec {
    pub transition: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
}

impl HiddenChainSpec {
    /// Checks stochasticity and stationarity, and (when given) that the
    /// initial law is `α_i |A_i|`.
    pub fn new(
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        density: Option<&BlockedDensity>,
    ) -> Result<Self, SamplerError> {
        let bad = |msg: String| Err(SamplerError::InvalidChain(msg));
        let k = initial.len();
        if k == 0 || transition.len() != k || transition.iter().any(|row| row.len() != k) {
            return bad(format!("transition must be {k} x {k}"));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.iter().any(|&p| !(p >= 0.0)) {
                return bad(format!("row {i} has a negative entry"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return bad(format!("row {i} sums to {sum}"));
            }
        }
        if let Some(density) = density {
            if density.num_blocks() != k {
                return bad(format!("{k} states for {} blocks", density.num_blocks()));
            }
            for (i, (a, b)) in initial.iter().zip(density.masses()).enumerate() {
                if (a - b).abs() > 1e-9 {
                    return bad(format!("initial[{i}] = {a} but α_i|A_i| = {b}"));
                }
            }
        }
        for j in 0..k {
            let next: f64 = (0..k).map(|i| initial[i] * transition[i][j]).sum();
            if (next - initial[j]).abs() > 1e-9 {
                return bad(format!("initial law is not stationary at state {j}"));
            }
        }
        Ok(Self { transition, initial })
    }

    /// Rows all equal to the block masses: an i.i.d. block sequence.
    pub fn iid(density: &BlockedDensity) -> Self {
        let m = density.masses();
        Self {
            transition: vec![m.clone(); m.len()],
            initial: m,
        }
    }

    /// `P = stay·I + (1 - stay)·1 π^T`: keeps the current block with extra
    /// probability `stay`, otherwise redraws from `π`.
    pub fn sticky(density: &BlockedDensity, stay: f64) -> Result<Self, SamplerError> {
        if !(0.0..=1.0).contains(&stay) {
            return Err(SamplerError::InvalidChain(format!("stay = {stay} outside [0, 1]")));
        }
        let m = density.masses();
        let k = m.len();
        let transition = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (1.0 - stay) * m[j] + if i == j { stay } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(transition, m, Some(density))
    }

    pub fn num_states(&self) -> usize {
        self.initial.len()
    }

    /// Draws a stationary path of length `n`.
    pub fn sample_path(&self, n: usize, rng: &mut impl Rng) -> Vec<usize> {
        if n == 0 {
            return Vec::new();
        }
        let init = WeightedIndex::new(&self.initial).expect("valid initial law");
        let rows: Vec<WeightedIndex<f64>> = self
            .transition
            .iter()
            .map(|r| WeightedIndex::new(r).expect("valid transition row"))
            .collect();
        let mut path = Vec::with_capacity(n);
        let mut z = init.sample(rng);
        path.push(z);
        for _ in 1..n {
            z = rows[z].sample(rng);
            path.push(z);
        }
        path
    }
}

/// `n` i.i.d. points with density `κ`: a block with probability `α_i|A_i|`,
/// then a uniform point in it.
pub fn sample_binomial(n: usize, density: &BlockedDensity, seed: u64) -> Sample {
    let masses = density.masses();
    let pick = WeightedIndex::new(&masses).expect("validated masses");
    let mut hidden = stream_rng(seed, HIDDEN_STREAM);
    let mut coords = stream_rng(seed, COORD_STREAM);
    let path: Vec<usize> = (0..n).map(|_| pick.sample(&mut hidden)).collect();
    let cloud = fill_blocks(density, &path, &mut coords);
    Sample {
        cloud,
        hidden_path: Some(path),
        seed,
        process_tag: "binomial".into(),
    }
}

/// Hidden-chain process: `Z` from the stationary chain, `X_t` uniform on `A_{Z_t}`.
pub fn sample_blocked_chain(
    n: usize,
    density: &BlockedDensity,
    hidden: &HiddenChainSpec,
    seed: u64,
) -> Result<Sample, SamplerError> {
    let mut path_rng = stream_rng(seed, HIDDEN_STREAM);
    let mut coord_rng = stream_rng(seed, COORD_STREAM);
    let mut sample = sample_blocked_chain_with(n, density, hidden, &mut path_rng, &mut coord_rng)?;
    sample.seed = seed;
    Ok(sample)
}

/// As [`sample_blocked_chain`] with caller-supplied generators. The path is
/// drawn entirely from `path_rng`; `coord_rng` only places points in blocks.
pub fn sample_blocked_chain_with(
    n: usize,
    density: &BlockedDensity,
    hidden: &HiddenChainSpec,
    path_rng: &mut impl Rng,
    coord_rng: &mut impl Rng,
) -> Result<Sample, SamplerError> {
    if hidden.num_states() != density.num_blocks() {
        return Err(SamplerError::InvalidChain(format!(
            "{} states for {} blocks",
            hidden.num_states(),
            density.num_blocks()
        )));
    }
    let path = hidden.sample_path(n, path_rng);
    let cloud = fill_blocks(density, &path, coord_rng);
    Ok(Sample {
        cloud,
        hidden_path: Some(path),
        seed: 0,
        process_tag: "blocked_chain".into(),
    })
}

pub(super) fn fill_blocks(density: &BlockedDensity, path: &[usize], rng: &mut impl Rng) -> PointCloud<f64> {
    let mut coords = Vec::with_capacity(path.len() * density.dim());
    for &z in path {
        coords.extend(density.blocks()[z].sample(rng));
    }
    PointCloud::from_flat(density.dim(), coords).expect("block samples lie in the unit cube")
}
