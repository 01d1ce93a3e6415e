//! Monte Carlo harness for the limit theorems.
//!
//! Every check is relative: a dependent process is compared against the
//! i.i.d. process sharing its marginal `κ`, because the limits themselves
//! have no closed form. Estimates are means of `n^{-1} β_q^{r,s}` over
//! independent replications of the rescaled complex `K(η_n X_n)`.
//!
//! Replication `(n, i)` of a run with master seed `m` uses the sample seed
//! `derive_seed(m, &[n, i])`, and results are gathered in job order, so the
//! output does not depend on the number of worker threads.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::{betti_exp_bound, BoundParams, CouplingError};
use crate::filtration::{build, ComplexKind, FiltrationError};
use crate::geometry::{Metric, PointCloud, ScalingRegime};
use crate::persistence::{
    diagram, geometric_lemma_gap, persistent_betti, zero_dim_diagram, BettiQuery, PersistenceDiagram, PersistenceError,
};
use crate::samplers::{derive_seed, stream_rng, ProcessSpec, SamplerError};

/// Default cap on simplices per replication.
pub const DEFAULT_BUDGET: usize = 5_000_000;
pub const MIN_REPLICATIONS: usize = 10;
/// Tail frequencies need enough runs to resolve small bounds.
pub const MIN_CONCENTRATION_REPLICATIONS: usize = 1000;

#[derive(Debug, Error)]
pub enum LimitsError {
    #[error(
        "complex budget of {limit} simplices exceeded at n = {n}, replication {replication}; lower max_radius or max_dim"
    )]
    Budget { n: usize, replication: usize, limit: usize },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
}

/// One rectangle `[0, r] x (s, ∞]` in degree `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub q: usize,
    pub r: f64,
    pub s: f64,
}

impl Rectangle {
    pub fn query(&self) -> BettiQuery<f64> {
        BettiQuery {
            q: self.q,
            r: self.r,
            s: self.s,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RectangleGrid {
    pub rectangles: Vec<Rectangle>,
}

impl RectangleGrid {
    pub fn new(rectangles: Vec<Rectangle>) -> Result<Self, LimitsError> {
        let grid = Self { rectangles };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), LimitsError> {
        for (i, rect) in self.rectangles.iter().enumerate() {
            if !(rect.r >= 0.0 && rect.r <= rect.s && rect.s.is_finite()) {
                return Err(LimitsError::Invalid(format!(
                    "rectangle {i}: need 0 <= r <= s < inf, got r = {}, s = {}",
                    rect.r, rect.s
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rectangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rectangles.is_empty()
    }

    fn max_q(&self) -> usize {
        self.rectangles.iter().map(|r| r.q).max().unwrap_or(0)
    }

    fn max_s(&self) -> f64 {
        self.rectangles.iter().map(|r| r.s).fold(0.0, f64::max)
    }
}

/// How to build the complex of one replication. Radii are in the rescaled
/// coordinates of `η_n X_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub kind: ComplexKind,
    pub max_dim: usize,
    pub max_radius: f64,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub regime: ScalingRegime,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

impl ComplexSpec {
    pub fn new(kind: ComplexKind, max_dim: usize, max_radius: f64) -> Self {
        Self {
            kind,
            max_dim,
            max_radius,
            metric: Metric::Euclidean,
            budget: DEFAULT_BUDGET,
            regime: ScalingRegime::Critical,
        }
    }

    pub fn validate(&self, grid: &RectangleGrid, p: usize) -> Result<(), LimitsError> {
        if !(self.max_radius >= 0.0 && self.max_radius.is_finite()) {
            return Err(LimitsError::Invalid(format!(
                "max_radius = {} must be finite and >= 0",
                self.max_radius
            )));
        }
        if self.budget == 0 {
            return Err(LimitsError::Invalid("budget must be positive".into()));
        }
        if !grid.is_empty() && grid.max_q() + 1 > self.max_dim {
            return Err(LimitsError::Invalid(format!(
                "degree q = {} needs max_dim >= {}",
                grid.max_q(),
                grid.max_q() + 1
            )));
        }
        if self.kind == ComplexKind::Cech && self.metric != Metric::Euclidean {
            return Err(LimitsError::Invalid("Čech complexes need the Euclidean metric".into()));
        }
        self.regime.validate(p).map_err(LimitsError::Invalid)
    }
}

/// `n^{-1} β_q^{r,s}(K(η_n X))` for every rectangle, from one point cloud.
pub fn normalized_betti(
    cloud: &PointCloud<f64>,
    grid: &RectangleGrid,
    complex: &ComplexSpec,
) -> Result<Vec<f64>, FiltrationError> {
    let n = cloud.len();
    if n == 0 || grid.is_empty() {
        return Ok(vec![0.0; grid.len()]);
    }
    let eta = complex.regime.eta(n, cloud.dim());
    // Nothing above the largest s affects any rectangle.
    let radius = complex.max_radius.min(grid.max_s());
    let degree_zero_only = grid.max_q() == 0;
    let max_dim = if degree_zero_only { 1 } else { complex.max_dim };
    let unit = build(
        complex.kind,
        cloud,
        complex.metric,
        max_dim,
        radius / eta,
        Some(complex.budget),
    )?;
    let scaled = unit.rescale(eta)?;
    let diag: PersistenceDiagram<f64> = if degree_zero_only {
        zero_dim_diagram(&scaled)
    } else {
        diagram(&scaled)
    };
    Ok(grid
        .rectangles
        .iter()
        .map(|rect| persistent_betti(&diag, rect.query()).expect("validated rectangle") as f64 / n as f64)
        .collect())
}

/// Raw result of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    /// One normalized Betti number per rectangle.
    pub values: Vec<f64>,
}

/// Estimates of one rectangle across the sample-size grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub q: usize,
    pub r: f64,
    pub s: f64,
    pub n_grid: Vec<usize>,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRun {
    pub estimates: Vec<LimitEstimate>,
    pub raw: Vec<Replication>,
}

/// Runs `jobs` on a pool of `workers` threads (0: rayon's default) and
/// returns results in job order.
pub fn run_ordered<J, T, F>(workers: usize, jobs: &[J], f: F) -> Vec<T>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| jobs.par_iter().map(&f).collect())
}

pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Mean and standard error of `n^{-1} β_q^{r,s}` per rectangle and per `n`.
pub fn estimate_limit(
    process: &ProcessSpec,
    grid: &RectangleGrid,
    n_grid: &[usize],
    replications: usize,
    complex: &ComplexSpec,
    seed: u64,
    workers: usize,
) -> Result<LimitRun, LimitsError> {
    grid.validate()?;
    process.validate()?;
    complex.validate(grid, process.dim())?;
    if replications < MIN_REPLICATIONS {
        return Err(LimitsError::Invalid(format!(
            "need at least {MIN_REPLICATIONS} replications, got {replications}"
        )));
    }
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LimitsError::Invalid(
            "n_grid must be nonempty and strictly increasing".into(),
        ));
    }
    for &n in n_grid {
        process.check_size(n)?;
    }
    let jobs: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (0..replications).map(move |i| (n, i)))
        .collect();
    let results = run_ordered(workers, &jobs, |&(n, index)| -> Result<Replication, LimitsError> {
        let sample_seed = derive_seed(seed, &[n as u64, index as u64]);
        let sample = process.sample(n, sample_seed)?;
        let values = normalized_betti(&sample.cloud, grid, complex).map_err(|e| match e {
            FiltrationError::BudgetExceeded { limit } => LimitsError::Budget {
                n,
                replication: index,
                limit,
            },
            other => other.into(),
        })?;
        Ok(Replication {
            n,
            index,
            seed: sample_seed,
            values,
        })
    });
    let raw = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let estimates = grid
        .rectangles
        .iter()
        .enumerate()
        .map(|(k, rect)| {
            let (means, std_errors) = n_grid
                .iter()
                .map(|&n| {
                    let vals: Vec<f64> = raw.iter().filter(|rep| rep.n == n).map(|rep| rep.values[k]).collect();
                    mean_and_se(&vals)
                })
                .unzip();
            LimitEstimate {
                q: rect.q,
                r: rect.r,
                s: rect.s,
                n_grid: n_grid.to_vec(),
                means,
                std_errors,
                replications,
            }
        })
        .collect();
    Ok(LimitRun { estimates, raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Flag,
    Fail,
}

/// Agreement status for a z-score: pass within 3, flag below 4, fail beyond.
pub fn z_status(z: f64) -> Status {
    let z = z.abs();
    if z <= 3.0 {
        Status::Pass
    } else if z < 4.0 {
        Status::Flag
    } else {
        Status::Fail
    }
}

/// Two-sample comparison of one rectangle at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub q: usize,
    pub r: f64,
    pub s: f64,
    pub n: usize,
    pub mean: f64,
    pub oracle_mean: f64,
    pub pooled_se: f64,
    pub z: f64,
    pub status: Status,
}

/// z-score of `a - b` against `sqrt(se_a² + se_b²)`; identical deterministic
/// values give `z = 0`.
pub fn pooled_z(mean_a: f64, se_a: f64, mean_b: f64, se_b: f64) -> (f64, f64) {
    let pooled = (se_a * se_a + se_b * se_b).sqrt();
    let diff = mean_a - mean_b;
    let z = if diff == 0.0 {
        0.0
    } else if pooled == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / pooled
    };
    (z, pooled)
}

/// Compares two runs over the same grid at the largest shared `n`.
pub fn compare_runs(run: &[LimitEstimate], oracle: &[LimitEstimate]) -> Result<Vec<Comparison>, LimitsError> {
    if run.len() != oracle.len() {
        return Err(LimitsError::Invalid("runs cover different grids".into()));
    }
    run.iter()
        .zip(oracle)
        .map(|(a, b)| {
            let n = *a
                .n_grid
                .iter()
                .rev()
                .find(|n| b.n_grid.contains(n))
                .ok_or_else(|| LimitsError::Invalid("runs share no sample size".into()))?;
            let ia = a.n_grid.iter().position(|&x| x == n).expect("present");
            let ib = b.n_grid.iter().position(|&x| x == n).expect("present");
            let (z, pooled_se) = pooled_z(a.means[ia], a.std_errors[ia], b.means[ib], b.std_errors[ib]);
            Ok(Comparison {
                q: a.q,
                r: a.r,
                s: a.s,
                n,
                mean: a.means[ia],
                oracle_mean: b.means[ib],
                pooled_se,
                z,
                status: z_status(z),
            })
        })
        .collect()
}

/// Overall verdict: any failure fails; more than `max_flags` flags fails.
pub fn overall_status(statuses: impl IntoIterator<Item = Status>, max_flags: usize) -> Status {
    let mut flags = 0;
    for s in statuses {
        match s {
            Status::Fail => return Status::Fail,
            Status::Flag => flags += 1,
            Status::Pass => {}
        }
    }
    match flags {
        0 => Status::Pass,
        f if f <= max_flags => Status::Flag,
        _ => Status::Fail,
    }
}

/// Trajectory of `n^{-1} β` along prefixes of one long sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n_grid: Vec<usize>,
    pub values: Vec<f64>,
    /// Largest pairwise gap among the last three values.
    pub max_deviation: f64,
}

pub fn slln_check(
    process: &ProcessSpec,
    rect: Rectangle,
    n_grid: &[usize],
    complex: &ComplexSpec,
    seed: u64,
) -> Result<Trajectory, LimitsError> {
    let grid = RectangleGrid::new(vec![rect])?;
    complex.validate(&grid, process.dim())?;
    let n_max = n_grid.iter().copied().max().unwrap_or(0);
    let sample = process.sample(n_max, seed)?;
    let values = n_grid
        .iter()
        .map(|&n| {
            normalized_betti(&sample.cloud.prefix(n), &grid, complex)
                .map(|v| v[0])
                .map_err(|e| match e {
                    FiltrationError::BudgetExceeded { limit } => LimitsError::Budget {
                        n,
                        replication: 0,
                        limit,
                    },
                    other => other.into(),
                })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let tail = &values[values.len().saturating_sub(3)..];
    let max_deviation = tail
        .iter()
        .flat_map(|a| tail.iter().map(move |b| (a - b).abs()))
        .fold(0.0, f64::max);
    Ok(Trajectory {
        n_grid: n_grid.to_vec(),
        values,
        max_deviation,
    })
}

/// Per-rectangle convergence row: Cauchy check across the two largest `n`
/// and, when an oracle run is given, agreement with it at the largest `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub estimate: LimitEstimate,
    pub cauchy_z: Option<f64>,
    pub cauchy_status: Status,
    pub oracle: Option<Comparison>,
}

#[allow(clippy::too_many_arguments)]
pub fn vague_convergence_check(
    process: &ProcessSpec,
    oracle: Option<&ProcessSpec>,
    grid: &RectangleGrid,
    n_grid: &[usize],
    replications: usize,
    complex: &ComplexSpec,
    seed: u64,
    workers: usize,
) -> Result<Vec<ConvergenceRow>, LimitsError> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let run = estimate_limit(
        process,
        grid,
        n_grid,
        replications,
        complex,
        derive_seed(seed, &[0]),
        workers,
    )?;
    let oracle_run = oracle
        .map(|o| estimate_limit(o, grid, n_grid, replications, complex, derive_seed(seed, &[1]), workers))
        .transpose()?;
    let comparisons = oracle_run
        .as_ref()
        .map(|o| compare_runs(&run.estimates, &o.estimates))
        .transpose()?;
    Ok(run
        .estimates
        .into_iter()
        .enumerate()
        .map(|(k, estimate)| {
            let len = estimate.n_grid.len();
            let cauchy_z = (len >= 2).then(|| {
                pooled_z(
                    estimate.means[len - 1],
                    estimate.std_errors[len - 1],
                    estimate.means[len - 2],
                    estimate.std_errors[len - 2],
                )
                .0
            });
            ConvergenceRow {
                cauchy_status: cauchy_z.map_or(Status::Pass, z_status),
                cauchy_z,
                oracle: comparisons.as_ref().map(|c| c[k].clone()),
                estimate,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs` observed, to show the check is not vacuous.
    pub max_lhs: usize,
    pub first_violation: Option<String>,
}

/// Random nested pairs `X ⊆ Y` in `[0,1]^2`, alternating Rips and Čech, with
/// `q ∈ {0, 1}`; checks the Geometric Lemma inequality on each.
pub fn geometric_lemma_suite(n_max: usize, trials: usize, seed: u64) -> Result<LemmaReport, LimitsError> {
    if n_max == 0 || n_max > 12 {
        return Err(LimitsError::Invalid(format!("n_max = {n_max} must lie in 1..=12")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut report = LemmaReport {
        trials,
        violations: 0,
        max_lhs: 0,
        first_violation: None,
    };
    for trial in 0..trials {
        let n_y = rng.random_range(1..=n_max);
        let n_x = rng.random_range(0..=n_y);
        let coords: Vec<f64> = (0..n_y * 2).map(|_| rng.random()).collect();
        let y = PointCloud::from_flat(2, coords).expect("unit cube coordinates");
        let mut injection = sample_indices(&mut rng, n_y, n_x).into_vec();
        injection.sort_unstable();
        let x = y.select(&injection);
        let kind = if trial % 2 == 0 {
            ComplexKind::Rips
        } else {
            ComplexKind::Cech
        };
        let q = rng.random_range(0..=1);
        let a: f64 = rng.random::<f64>() * 0.7;
        let b: f64 = rng.random::<f64>() * 0.7;
        let query = BettiQuery::new(q, a.min(b), a.max(b))?;
        let cap = 0.7;
        let kx = build(kind, &x, Metric::Euclidean, q + 2, cap, None)?;
        let ky = build(kind, &y, Metric::Euclidean, q + 2, cap, None)?;
        let (lhs, rhs) = geometric_lemma_gap(&kx, &ky, &injection, query)?;
        report.max_lhs = report.max_lhs.max(lhs);
        if lhs > rhs {
            report.violations += 1;
            report.first_violation.get_or_insert_with(|| {
                format!("trial {trial}: {kind} n_x = {n_x}, n_y = {n_y}, {query:?}: {lhs} > {rhs}")
            });
        }
    }
    Ok(report)
}

/// Empirical tail frequency against the exponential bound at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    pub trivial: bool,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub replications: usize,
    pub a: f64,
    pub gamma_inf: f64,
    pub mean_beta: f64,
    /// Standard deviation of `n^{-1} β`.
    pub std_normalized: f64,
    pub rows: Vec<TailRow>,
    /// True when every bound is at least one.
    pub vacuous: bool,
}

/// Inputs of [`concentration_suite`] beyond the process and query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSetup {
    pub n: usize,
    pub replications: usize,
    pub a: f64,
    pub t_grid: Vec<f64>,
    pub gamma_inf: f64,
    pub f_star: f64,
}

/// `P(|β - E β| >= n^a t)` estimated from `replications` runs (the mean
/// standing in for `E β`), next to the persistent Betti exponential bound.
pub fn concentration_suite(
    process: &ProcessSpec,
    rect: Rectangle,
    setup: &ConcentrationSetup,
    complex: &ComplexSpec,
    seed: u64,
    workers: usize,
) -> Result<ConcentrationReport, LimitsError> {
    if setup.replications < MIN_CONCENTRATION_REPLICATIONS {
        return Err(LimitsError::Invalid(format!(
            "concentration needs at least {MIN_CONCENTRATION_REPLICATIONS} replications, got {}",
            setup.replications
        )));
    }
    let grid = RectangleGrid::new(vec![rect])?;
    let run = estimate_limit(process, &grid, &[setup.n], setup.replications, complex, seed, workers)?;
    let n = setup.n as f64;
    let betas: Vec<f64> = run.raw.iter().map(|rep| rep.values[0] * n).collect();
    let (mean_beta, _) = mean_and_se(&betas);
    let sd = (betas.iter().map(|b| (b - mean_beta).powi(2)).sum::<f64>() / (betas.len() as f64 - 1.0)).sqrt();
    let p = process.dim();
    let eta = complex.regime.eta(setup.n, p);
    let rows = setup
        .t_grid
        .iter()
        .map(|&t| -> Result<TailRow, LimitsError> {
            let params = BoundParams::betti_cube(
                setup.n,
                t,
                setup.a,
                rect.q,
                rect.s.max(f64::MIN_POSITIVE),
                setup.gamma_inf,
                setup.f_star,
                p,
                complex.metric,
                eta,
            )?;
            let bound = betti_exp_bound(&params)?;
            let threshold = n.powf(setup.a) * t;
            let hits = betas.iter().filter(|b| (*b - mean_beta).abs() >= threshold).count();
            let empirical = hits as f64 / betas.len() as f64;
            Ok(TailRow {
                t,
                empirical,
                bound: bound.value,
                trivial: bound.trivial,
                violated: !bound.trivial && empirical > bound.value,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConcentrationReport {
        n: setup.n,
        replications: setup.replications,
        a: setup.a,
        gamma_inf: setup.gamma_inf,
        mean_beta,
        std_normalized: sd / n,
        vacuous: rows.iter().all(|r| r.trivial),
        rows,
    })
}

/// `std(n_large) / std(n_small)` of `n^{-1} β`; about `1/√2` when `n` doubles
/// under CLT scaling. Diagnostic only.
pub fn std_decay_ratio(small: &ConcentrationReport, large: &ConcentrationReport) -> f64 {
    large.std_normalized / small.std_normalized
}
