//! Mixing matrices of finite-state chains and the concentration bounds they
//! feed into.
//!
//! For a time-homogeneous chain `Γ_{i,j}` depends on `j - i` only and equals
//! the Dobrushin coefficient of `P^{j-i}`: the largest total-variation
//! distance between two rows. The maximum runs over all state pairs, which
//! upper-bounds the essential supremum over reachable pairs.

use std::f64::consts::E;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{log_covering_number_cube, sup_ball_volume, GeometryError, Metric};

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("sample size must be positive")]
    EmptySample,
    #[error("invalid transition matrix: {0}")]
    InvalidTransition(String),
    #[error("chain does not mix: {0}")]
    NoMixing(String),
    #[error("state augmentation needs {states} states, above the cap of {cap}")]
    AugmentationTooLarge { states: usize, cap: usize },
    #[error("invalid mixing matrix: {0}")]
    InvalidMatrix(String),
    #[error("length mismatch: matrix of size {matrix}, vector of length {vector}")]
    LengthMismatch { matrix: usize, vector: usize },
    #[error("invalid bound parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Upper-triangular `n x n` mixing matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl MixingMatrix {
    /// Row-major entries; validates shape, triangularity and range.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, CouplingError> {
        if entries.len() != n * n {
            return Err(CouplingError::InvalidMatrix(format!(
                "{} entries for n = {n}",
                entries.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                let ok = match i.cmp(&j) {
                    std::cmp::Ordering::Equal => v == 1.0,
                    std::cmp::Ordering::Greater => v == 0.0,
                    std::cmp::Ordering::Less => (0.0..=1.0).contains(&v),
                };
                if !ok {
                    return Err(CouplingError::InvalidMatrix(format!("entry ({i}, {j}) = {v}")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_lag_profile(n, &[1.0])
    }

    /// `Γ_{i,i+k} = profile[k]` (missing lags are zero); `profile[0]` is
    /// forced to one.
    pub fn from_lag_profile(n: usize, profile: &[f64]) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
            for (k, &v) in profile.iter().enumerate().skip(1) {
                if i + k < n {
                    entries[i * n + i + k] = v.clamp(0.0, 1.0);
                }
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `γ_∞ = max_i Σ_j Γ_{i,j}`.
    pub fn gamma_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().sum::<f64>()).fold(0.0, f64::max)
    }

    /// `Γ_{i,j} = Γ_{i+1,j+1}` within `tol`.
    pub fn has_shift_property(&self, tol: f64) -> bool {
        (0..self.n.saturating_sub(1))
            .all(|i| (i..self.n - 1).all(|j| (self.entry(i, j) - self.entry(i + 1, j + 1)).abs() <= tol))
    }

    pub fn apply(&self, c: &[f64]) -> Result<Vec<f64>, CouplingError> {
        if c.len() != self.n {
            return Err(CouplingError::LengthMismatch {
                matrix: self.n,
                vector: c.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(c).map(|(g, x)| g * x).sum())
            .collect())
    }
}

fn validate_transition(p: &[Vec<f64>]) -> Result<usize, CouplingError> {
    let k = p.len();
    if k == 0 || p.iter().any(|r| r.len() != k) {
        return Err(CouplingError::InvalidTransition("not a nonempty square matrix".into()));
    }
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&x| !(x >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(CouplingError::InvalidTransition(format!(
                "row {i} is not a distribution"
            )));
        }
    }
    Ok(k)
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = b.len();
    a.iter()
        .map(|row| {
            let mut out = vec![0.0; b[0].len()];
            for l in 0..k {
                if row[l] != 0.0 {
                    for (o, &x) in out.iter_mut().zip(&b[l]) {
                        *o += row[l] * x;
                    }
                }
            }
            out
        })
        .collect()
}

/// Largest total-variation distance between two rows.
fn dobrushin(p: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            worst = worst.max(total_variation(&p[i], &p[j]));
        }
    }
    worst.min(1.0)
}

/// Exact `Γ^{(n)}` of the stationary chain with transition `P`:
/// `Γ_{i,j} = max_{z,z'} d_TV(P^{j-i}[z], P^{j-i}[z'])`.
pub fn exact_mixing_matrix(transition: &[Vec<f64>], n: usize) -> Result<MixingMatrix, CouplingError> {
    if n == 0 {
        return Err(CouplingError::EmptySample);
    }
    validate_transition(transition)?;
    let mut profile = vec![1.0];
    let mut power = transition.to_vec();
    for _ in 1..n {
        let d = dobrushin(&power);
        profile.push(d);
        // The coefficient is submultiplicative, so zero stays zero.
        if d == 0.0 {
            break;
        }
        power = mat_mul(&power, transition);
    }
    Ok(MixingMatrix::from_lag_profile(n, &profile))
}

/// Cap on `K^{τ+1}` for state augmentation.
pub const AUGMENTATION_CAP: usize = 4096;

/// Order-one chain on windows `(Z_t, Z_{t-1}, ..., Z_{t-τ})`, encoded base
/// `K` with `Z_t` as the most significant digit.
pub fn augment_lags(transition: &[Vec<f64>], tau: usize) -> Result<Vec<Vec<f64>>, CouplingError> {
    let k = validate_transition(transition)?;
    let states = k.checked_pow(tau as u32 + 1).filter(|&s| s <= AUGMENTATION_CAP).ok_or(
        CouplingError::AugmentationTooLarge {
            states: k.saturating_pow(tau as u32 + 1),
            cap: AUGMENTATION_CAP,
        },
    )?;
    let top = states / k;
    let mut out = vec![vec![0.0; states]; states];
    for (w, row) in out.iter_mut().enumerate() {
        let current = w / top;
        // Drop the oldest digit and shift the rest down one place.
        let shifted = w / k;
        for (z, &p) in transition[current].iter().enumerate() {
            row[z * top + shifted] += p;
        }
    }
    Ok(out)
}

/// Stationary law by solving `π (P - I) = 0`, `Σ π = 1`.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>, CouplingError> {
    let k = validate_transition(transition)?;
    // (P^T - I) π = 0 with the last equation replaced by Σ π = 1.
    let a = DMatrix::from_fn(k, k, |i, j| {
        if i == k - 1 {
            1.0
        } else {
            transition[j][i] - f64::from(u8::from(i == j))
        }
    });
    let mut b = DVector::zeros(k);
    b[k - 1] = 1.0;
    if a.rank(1e-12) < k {
        return Err(CouplingError::NoMixing("stationary law is not unique".into()));
    }
    let pi = a
        .full_piv_lu()
        .solve(&b)
        .ok_or_else(|| CouplingError::NoMixing("stationary law is not unique".into()))?;
    Ok(pi.iter().map(|&x| x.max(0.0)).collect())
}

/// Whether some power `P^t`, `t <= (K-1)^2 + 1`, is strictly positive
/// (irreducible and aperiodic). Boolean powers on bit rows.
pub fn is_primitive(transition: &[Vec<f64>]) -> bool {
    let k = transition.len();
    let words = k.div_ceil(64);
    let pattern: Vec<Vec<u64>> = transition
        .iter()
        .map(|row| {
            let mut bits = vec![0u64; words];
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();
    let mul = |a: &[Vec<u64>], b: &[Vec<u64>]| -> Vec<Vec<u64>> {
        a.iter()
            .map(|row| {
                let mut out = vec![0u64; words];
                for l in 0..k {
                    if row[l / 64] >> (l % 64) & 1 == 1 {
                        for (o, x) in out.iter_mut().zip(&b[l]) {
                            *o |= x;
                        }
                    }
                }
                out
            })
            .collect()
    };
    let full = |m: &[Vec<u64>]| (0..k).all(|i| (0..k).all(|j| m[i][j / 64] >> (j % 64) & 1 == 1));
    let mut exponent = (k - 1) * (k - 1) + 1;
    let mut base = pattern;
    let mut acc: Option<Vec<Vec<u64>>> = None;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => mul(&a, &base),
            });
        }
        exponent >>= 1;
        if exponent > 0 {
            base = mul(&base, &base);
        }
    }
    acc.is_some_and(|m| full(&m))
}

const MAX_MIXING_STEPS: usize = 1_000_000;

/// `t_mix = min{t >= 1 : max_z d_TV(P^t[z], π) <= 1/4}`.
pub fn mixing_time(transition: &[Vec<f64>]) -> Result<usize, CouplingError> {
    validate_transition(transition)?;
    if !is_primitive(transition) {
        return Err(CouplingError::NoMixing(
            "no power of the transition matrix is strictly positive".into(),
        ));
    }
    let pi = stationary_distribution(transition)?;
    let mut power = transition.to_vec();
    for t in 1..=MAX_MIXING_STEPS {
        let worst = power.iter().map(|row| total_variation(row, &pi)).fold(0.0, f64::max);
        if worst <= 0.25 {
            return Ok(t);
        }
        power = mat_mul(&power, transition);
    }
    Err(CouplingError::NoMixing(format!(
        "not mixed after {MAX_MIXING_STEPS} steps"
    )))
}

/// `γ_∞ <= τ_{m-1} + 2 t_mix` for delay embeddings.
pub fn gamma_inf_bound_delay(tau_max: usize, t_mix: usize) -> f64 {
    (tau_max + 2 * t_mix) as f64
}

/// Draws `(X, Y)` with `X ~ p`, `Y ~ q` and `P(X != Y) = d_TV(p, q)`.
pub fn maximal_coupling(p: &[f64], q: &[f64], rng: &mut impl Rng) -> (usize, usize) {
    let overlap: Vec<f64> = p.iter().zip(q).map(|(a, b)| a.min(*b)).collect();
    let common: f64 = overlap.iter().sum();
    let draw = |w: &[f64], total: f64, rng: &mut dyn rand::RngCore| -> usize {
        let mut u = rng.random::<f64>() * total;
        for (i, &x) in w.iter().enumerate() {
            if u < x {
                return i;
            }
            u -= x;
        }
        w.iter().rposition(|&x| x > 0.0).unwrap_or(0)
    };
    if rng.random::<f64>() < common {
        let z = draw(&overlap, common, rng);
        return (z, z);
    }
    let rest = 1.0 - common;
    let px: Vec<f64> = p.iter().zip(&overlap).map(|(a, m)| a - m).collect();
    let qy: Vec<f64> = q.iter().zip(&overlap).map(|(b, m)| b - m).collect();
    (draw(&px, rest, rng), draw(&qy, rest, rng))
}

/// A probability bound, uncapped, with `trivial = value >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub trivial: bool,
}

impl Bound {
    fn new(value: f64) -> Self {
        Self {
            value,
            trivial: !(value < 1.0),
        }
    }
}

/// Inputs of the abstract exponential inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: f64,
    pub t: f64,
    pub a: f64,
    /// Exponent of the universal bound `c_1 n^q`.
    pub q: f64,
    /// Exponent of the local exchange-one cost.
    pub q_tilde: f64,
    pub c1: f64,
    pub c2: f64,
    pub gamma_inf: f64,
    pub f_star: f64,
    /// `log 𝒩(η_n^{-1} r)`.
    pub log_covering: f64,
    /// `n sup_w μ(B(w, 2 η_n^{-1} r))`.
    pub ball_sup: f64,
}

impl BoundParams {
    /// Persistent Betti wiring on the Euclidean or sup-metric unit cube:
    /// `c_1 = 1`, `c_2 = 2`, `q̃ = q + 1` and `r = 2s`, so the covering radius is
    /// `2 η^{-1} s` and the ball radius `4 η^{-1} s`.
    #[allow(clippy::too_many_arguments)]
    pub fn betti_cube(
        n: usize,
        t: f64,
        a: f64,
        q: usize,
        s: f64,
        gamma_inf: f64,
        f_star: f64,
        p: usize,
        metric: Metric,
        eta: f64,
    ) -> Result<Self, CouplingError> {
        if !(eta > 0.0 && s > 0.0) {
            return Err(CouplingError::InvalidParams(format!(
                "need eta > 0 and s > 0, got {eta}, {s}"
            )));
        }
        Ok(Self {
            n: n as f64,
            t,
            a,
            q: q as f64,
            q_tilde: q as f64 + 1.0,
            c1: 1.0,
            c2: 2.0,
            gamma_inf,
            f_star,
            log_covering: log_covering_number_cube(p, 2.0 * s / eta, metric)?,
            ball_sup: n as f64 * sup_ball_volume(p, 4.0 * s / eta, metric),
        })
    }

    /// `γ = (2a - 1) / (2 q̃ + 1)`.
    pub fn gamma(&self) -> f64 {
        (2.0 * self.a - 1.0) / (2.0 * self.q_tilde + 1.0)
    }

    fn validate(&self) -> Result<(), CouplingError> {
        if !(self.a > 0.5) {
            return Err(CouplingError::InvalidParams(format!("a = {} must exceed 1/2", self.a)));
        }
        if !(self.t > 0.0) {
            return Err(CouplingError::InvalidParams(format!("t = {} must be positive", self.t)));
        }
        if !(self.n >= 1.0 && self.gamma_inf > 0.0 && self.c2 > 0.0) {
            return Err(CouplingError::InvalidParams("need n >= 1, γ_∞ > 0 and c_2 > 0".into()));
        }
        Ok(())
    }
}

/// Right-hand side of the abstract exponential inequality for
/// `P(|H_n - E H_n| > n^a t)`:
///
/// `2 exp(-n^γ t² / (4^{q̃} 2 (16 c_2 γ_∞)²))
///  + 2 c_1 e n^{2q+1-γq̃-a} / (c_2 2^{q̃} γ_∞) (n^{a-q} + 2 c_1 / t)
///    exp(-[n^γ - log 𝒩 - f* (e-1) ball_sup])`.
pub fn abstract_exp_bound(params: &BoundParams) -> Result<Bound, CouplingError> {
    params.validate()?;
    let BoundParams {
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
    } = *params;
    let g = params.gamma();
    let ng = n.powf(g);
    let first = 2.0 * (-ng * t * t / (4f64.powf(q_tilde) * 2.0 * (16.0 * c2 * gamma_inf).powi(2))).exp();
    let prefactor = 2.0 * c1 * E * n.powf(2.0 * q + 1.0 - g * q_tilde - a) / (c2 * 2f64.powf(q_tilde) * gamma_inf);
    let bracket = 1.0 / n.powf(q - a) + 2.0 * c1 / t;
    let tail = (-(ng - log_covering - f_star * (E - 1.0) * ball_sup)).exp();
    Ok(Bound::new(first + prefactor * bracket * tail))
}

/// The persistent Betti specialization; `params` should come from
/// [`BoundParams::betti_cube`] or carry the same wiring.
pub fn betti_exp_bound(params: &BoundParams) -> Result<Bound, CouplingError> {
    if params.c1 != 1.0 || params.c2 != 2.0 || params.q_tilde != params.q + 1.0 {
        return Err(CouplingError::InvalidParams(
            "Betti bound needs c_1 = 1, c_2 = 2, q̃ = q + 1".into(),
        ));
    }
    abstract_exp_bound(params)
}

/// `P(Σ 1{Z_i ∈ B_n} > t) <= exp(-t + (e-1) f* n μ(B_n))`; `n_mu` is `n μ(B_n)`.
pub fn kernel_concentration_bound(t: f64, f_star: f64, n_mu: f64) -> Bound {
    Bound::new((-t + (E - 1.0) * f_star * n_mu).exp())
}

/// `(f*)² n^{j+1} μ(η^{-1} A) sup_x μ(B(x, 2 η^{-1} r))^j` with `η = n^{1/p}`,
/// where `region_measure = μ(η^{-1} A)`.
pub fn simplex_count_bound(
    n: usize,
    j: usize,
    r: f64,
    p: usize,
    f_star: f64,
    region_measure: f64,
    metric: Metric,
) -> f64 {
    let nf = n as f64;
    let eta = nf.powf(1.0 / p as f64);
    f_star * f_star * nf.powi(j as i32 + 1) * region_measure * sup_ball_volume(p, 2.0 * r / eta, metric).powi(j as i32)
}

/// `2 exp(-2 t² / ‖Γ c‖²)` for Hamming-Lipschitz functionals.
pub fn mcdiarmid_bound(gamma: &MixingMatrix, c: &[f64], t: f64) -> Result<Bound, CouplingError> {
    if c.iter().any(|&x| !(x >= 0.0)) {
        return Err(CouplingError::InvalidParams(
            "Lipschitz constants must be nonnegative".into(),
        ));
    }
    let norm2: f64 = gamma.apply(c)?.iter().map(|x| x * x).sum();
    let value = if t == 0.0 {
        2.0
    } else {
        2.0 * (-2.0 * t * t / norm2).exp()
    };
    Ok(Bound::new(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flip(eps: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]
    }

    #[test]
    fn iid_chain_has_trivial_mixing_matrix() {
        let p = vec![vec![0.2, 0.3, 0.5]; 3];
        let g = exact_mixing_matrix(&p, 10).unwrap();
        assert_eq!(g.gamma_inf(), 1.0);
        assert_eq!(mixing_time(&p).unwrap(), 1);
    }

    #[test]
    fn flip_chain_closed_form() {
        for eps in [0.05, 0.25, 0.45] {
            let g = exact_mixing_matrix(&flip(eps), 25).unwrap();
            for k in 0..=20 {
                assert!((g.entry(2, 2 + k) - (1.0 - 2.0 * eps).powi(k as i32)).abs() < 1e-12);
            }
            assert!(g.has_shift_property(0.0));
        }
        assert_eq!(mixing_time(&flip(0.25)).unwrap(), 1);
        assert_eq!(mixing_time(&flip(0.05)).unwrap(), 7);
    }

    #[test]
    fn identity_chain_never_mixes() {
        let g = exact_mixing_matrix(&flip(0.0), 12).unwrap();
        assert_eq!(g.gamma_inf(), 12.0);
        assert!(matches!(mixing_time(&flip(0.0)), Err(CouplingError::NoMixing(_))));
        // Periodic chain.
        assert!(matches!(mixing_time(&flip(1.0)), Err(CouplingError::NoMixing(_))));
        assert!(exact_mixing_matrix(&flip(0.1), 0).is_err());
    }

    #[test]
    fn delay_embedding_gamma_matches_closed_form() {
        let aug = augment_lags(&flip(0.25), 2).unwrap();
        assert_eq!(aug.len(), 8);
        for n in [5, 10, 30] {
            let g = exact_mixing_matrix(&aug, n).unwrap().gamma_inf();
            let exact = 4.0 - 2f64.powi(-(n as i32 - 3));
            assert!((g - exact).abs() < 1e-12, "n={n}: {g} vs {exact}");
            assert!(g <= gamma_inf_bound_delay(2, mixing_time(&flip(0.25)).unwrap()));
        }
        assert_eq!(gamma_inf_bound_delay(3, 5), 13.0);
        assert_eq!(gamma_inf_bound_delay(0, 1), 2.0);
        assert!(matches!(
            augment_lags(&vec![vec![0.25; 4]; 4], 6),
            Err(CouplingError::AugmentationTooLarge { .. })
        ));
    }

    #[test]
    fn augmented_chain_is_stochastic_and_consistent() {
        let p = vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.3, 0.3, 0.4]];
        let aug = augment_lags(&p, 1).unwrap();
        for row in &aug {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let pi = stationary_distribution(&p).unwrap();
        let pi_aug = stationary_distribution(&aug).unwrap();
        // Window (z_t, z_{t-1}) has probability π(z_{t-1}) P[z_{t-1}][z_t].
        for zt in 0..3 {
            for zp in 0..3 {
                assert!((pi_aug[zt * 3 + zp] - pi[zp] * p[zp][zt]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_law_must_be_unique() {
        // π P = π for P = [[1-a, a], [b, 1-b]] gives π = (b, a) / (a + b).
        let pi = stationary_distribution(&[vec![0.7, 0.3], vec![0.1, 0.9]]).unwrap();
        assert!((pi[0] - 0.25).abs() < 1e-12 && (pi[1] - 0.75).abs() < 1e-12);
        let reducible = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(stationary_distribution(&reducible).is_err());
    }

    #[test]
    fn maximal_coupling_attains_total_variation() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.3, 0.5];
        let tv = total_variation(&p, &q);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reps = 200_000;
        let mut differ = 0;
        let mut x0 = 0;
        let mut y2 = 0;
        for _ in 0..reps {
            let (x, y) = maximal_coupling(&p, &q, &mut rng);
            differ += usize::from(x != y);
            x0 += usize::from(x == 0);
            y2 += usize::from(y == 2);
        }
        let se = |pr: f64| 3.0 * (pr * (1.0 - pr) / reps as f64).sqrt();
        assert!((differ as f64 / reps as f64 - tv).abs() < se(tv));
        assert!((x0 as f64 / reps as f64 - 0.5).abs() < se(0.5));
        assert!((y2 as f64 / reps as f64 - 0.5).abs() < se(0.5));
    }

    #[test]
    fn scalar_bound_examples() {
        let b = kernel_concentration_bound(10.0, 1.0, 1.0);
        assert!((b.value - (-10.0 + E - 1.0).exp()).abs() < 1e-15);
        // exp(-8.28171817...) evaluated independently.
        assert!((b.value - 2.531_019_536_541_04e-4).abs() < 1e-15);
        assert!(kernel_concentration_bound(0.0, 1.0, 1.0).trivial);

        let n = 50;
        let t = (n as f64 / 2.0).sqrt();
        let m = mcdiarmid_bound(&MixingMatrix::identity(n), &vec![1.0; n], t).unwrap();
        assert!((m.value - 2.0 / E).abs() < 1e-12);
        assert_eq!(
            mcdiarmid_bound(&MixingMatrix::identity(n), &vec![1.0; n], 0.0)
                .unwrap()
                .value,
            2.0
        );
        assert!(mcdiarmid_bound(&MixingMatrix::identity(n), &[1.0], 1.0).is_err());

        let s = simplex_count_bound(500, 1, 0.5, 2, 1.0, 1.0, Metric::Euclidean);
        assert!((s - 500.0 * std::f64::consts::PI).abs() < 1e-9);
        assert!((simplex_count_bound(500, 0, 0.5, 2, 1.0, 0.3, Metric::Euclidean) - 150.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_are_monotone_in_t() {
        let base = BoundParams::betti_cube(10_000, 1.0, 0.9, 1, 1.0, 4.0, 2.0, 2, Metric::Euclidean, 100.0).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..40 {
            let t = 0.25 * k as f64;
            let v = betti_exp_bound(&BoundParams { t, ..base }).unwrap().value;
            assert!(v <= last);
            last = v;
        }
        let bad = BoundParams { a: 0.5, ..base };
        assert!(abstract_exp_bound(&bad).is_err());
        assert!(abstract_exp_bound(&BoundParams { n: 2.0, ..base }).unwrap().trivial);
    }
}
