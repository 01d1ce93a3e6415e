use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{stream_rng, Sample, SamplerError, COORD_STREAM};
use crate::geometry::PointCloud;

type JointDensity = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Named joint densities for configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityFamily {
    /// `g ≡ 1`: i.i.d. uniform points.
    Independent,
    /// `g = 1 + a Π sin(2π x)` over every coordinate of the window. All
    /// lower-dimensional marginals are uniform, so the chain is stationary
    /// with uniform marginal and `g` as its `(m+1)`-window law.
    SineProduct { amplitude: f64 },
}

/// Order-`m` Markov chain on `[0,1]^p` whose `(m+1)`-window has joint
/// density `g`, strictly positive and bounded.
#[derive(Clone)]
pub struct DensityChainSpec {
    order: usize,
    dim: usize,
    g: JointDensity,
    g_min: f64,
    g_max: f64,
    burn_in: Option<usize>,
    family: Option<DensityFamily>,
}

impl fmt::Debug for DensityChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityChainSpec")
            .field("order", &self.order)
            .field("dim", &self.dim)
            .field("g_min", &self.g_min)
            .field("g_max", &self.g_max)
            .field("burn_in", &self.burn_in)
            .field("family", &self.family)
            .finish_non_exhaustive()
    }
}

const SPOT_CHECKS: usize = 2000;

impl DensityChainSpec {
    /// `g` receives the window `(x_{t-m}, ..., x_t)` flattened to `(m+1)p`
    /// coordinates. Bounds are spot-checked at deterministic random points.
    pub fn new(
        order: usize,
        dim: usize,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        g_min: f64,
        g_max: f64,
    ) -> Result<Self, SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidDensity(m));
        if order == 0 || dim == 0 {
            return bad("order and dimension must be positive".into());
        }
        if !(g_min > 0.0 && g_min <= g_max && g_max.is_finite()) {
            return bad(format!("need 0 < g_min <= g_max < inf, got [{g_min}, {g_max}]"));
        }
        let spec = Self {
            order,
            dim,
            g: Arc::new(g),
            g_min,
            g_max,
            burn_in: None,
            family: None,
        };
        let mut rng = stream_rng(0x5eed, 7);
        let mut window = vec![0.0; (order + 1) * dim];
        for _ in 0..SPOT_CHECKS {
            window.iter_mut().for_each(|w| *w = rng.random());
            let v = spec.eval(&window);
            if !(v >= g_min * (1.0 - 1e-12) && v <= g_max * (1.0 + 1e-12)) {
                return bad(format!("g = {v} outside [{g_min}, {g_max}] at {window:?}"));
            }
        }
        Ok(spec)
    }

    pub fn from_family(family: DensityFamily, order: usize, dim: usize) -> Result<Self, SamplerError> {
        let spec = match family {
            DensityFamily::Independent => Self::new(order, dim, |_| 1.0, 1.0, 1.0)?,
            DensityFamily::SineProduct { amplitude } => {
                if !(amplitude.abs() < 1.0) {
                    return Err(SamplerError::InvalidDensity(format!(
                        "|amplitude| = {amplitude} must be < 1"
                    )));
                }
                let a = amplitude;
                Self::new(
                    order,
                    dim,
                    move |w: &[f64]| 1.0 + a * w.iter().map(|x| (TAU * x).sin()).product::<f64>(),
                    1.0 - a.abs(),
                    1.0 + a.abs(),
                )?
            }
        };
        Ok(Self {
            family: Some(family),
            ..spec
        })
    }

    pub fn with_burn_in(mut self, steps: usize) -> Self {
        self.burn_in = Some(steps);
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Option<DensityFamily> {
        self.family
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.g_min, self.g_max)
    }

    pub fn eval(&self, window: &[f64]) -> f64 {
        (self.g)(window)
    }

    /// `10 m ceil(g_max / g_min)` unless overridden.
    pub fn burn_in(&self) -> usize {
        self.burn_in
            .unwrap_or_else(|| 10 * self.order * (self.g_max / self.g_min).ceil() as usize)
    }

    /// `∫ g(past, x) dx` by the midpoint rule with `resolution^p` nodes.
    pub fn conditional_normalizer(&self, past: &[f64], resolution: usize) -> f64 {
        let mut window = past.to_vec();
        window.resize(past.len() + self.dim, 0.0);
        let tail = past.len();
        midpoint_sum(self.dim, resolution, |x| {
            window[tail..].copy_from_slice(x);
            self.eval(&window)
        })
    }

    /// Marginal density of the last window coordinate block at the
    /// midpoints of a `resolution^p` grid, integrating the `m p` earlier
    /// coordinates by the midpoint rule.
    pub fn marginal_on_grid(&self, resolution: usize) -> Vec<f64> {
        let past_dim = self.order * self.dim;
        let mut out = Vec::new();
        for_each_midpoint(self.dim, resolution, |x| {
            let mut window = vec![0.0; past_dim + self.dim];
            window[past_dim..].copy_from_slice(x);
            out.push(midpoint_sum(past_dim, resolution, |past| {
                window[..past_dim].copy_from_slice(past);
                self.eval(&window)
            }));
        });
        out
    }
}

fn for_each_midpoint(dim: usize, resolution: usize, mut f: impl FnMut(&[f64])) {
    let total = resolution.pow(dim as u32);
    let mut x = vec![0.0; dim];
    for idx in 0..total {
        let mut rest = idx;
        for k in (0..dim).rev() {
            x[k] = ((rest % resolution) as f64 + 0.5) / resolution as f64;
            rest /= resolution;
        }
        f(&x);
    }
}

fn midpoint_sum(dim: usize, resolution: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut acc = 0.0;
    for_each_midpoint(dim, resolution, |x| acc += f(x));
    acc / resolution.pow(dim as u32) as f64
}

const MIN_ACCEPTANCE: f64 = 1e-4;
const MIN_PROPOSALS_FOR_CHECK: u64 = 10_000;

/// Rejection sampler: propose uniformly, accept with `g(past, x) / g_max`.
/// The first window starts uniform and is run through the burn-in.
pub fn sample_density_chain(n: usize, spec: &DensityChainSpec, seed: u64) -> Result<Sample, SamplerError> {
    let mut rng = stream_rng(seed, COORD_STREAM);
    let (m, p) = (spec.order, spec.dim);
    let mut window: Vec<f64> = (0..(m + 1) * p).map(|_| rng.random()).collect();
    let mut proposals = 0u64;
    let mut accepted = 0u64;
    let mut coords = Vec::with_capacity(n * p);
    for step in 0..spec.burn_in() + n {
        // Shift the window left by one point, then fill the last slot.
        window.copy_within(p.., 0);
        loop {
            proposals += 1;
            for x in &mut window[m * p..] {
                *x = rng.random();
            }
            if rng.random::<f64>() * spec.g_max < spec.eval(&window) {
                accepted += 1;
                break;
            }
            if proposals >= MIN_PROPOSALS_FOR_CHECK && (accepted as f64) < MIN_ACCEPTANCE * proposals as f64 {
                return Err(SamplerError::EnvelopeTooLoose {
                    rate: accepted as f64 / proposals as f64,
                    proposals,
                });
            }
        }
        if step >= spec.burn_in() {
            coords.extend_from_slice(&window[m * p..]);
        }
    }
    Ok(Sample {
        cloud: PointCloud::from_flat(p, coords)?,
        hidden_path: None,
        seed,
        process_tag: "density_chain".into(),
    })
}
