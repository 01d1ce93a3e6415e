//! Empirical tails and means against the closed-form bounds.

mod common;

use std::f64::consts::{E, PI};

use common::{random_cloud, SEEDS};
use dephom::coupling::{
    abstract_exp_bound, betti_exp_bound, exact_mixing_matrix, kernel_concentration_bound, mcdiarmid_bound,
    simplex_count_bound, BoundParams,
};
use dephom::filtration::{build_rips, count_simplices, count_simplices_localized};
use dephom::geometry::{log_covering_number_cube, sup_ball_volume};
use dephom::samplers::{derive_seed, sample_binomial, stream_rng, BlockedDensity, HiddenChainSpec};
use dephom::{Metric, MixingMatrix};

#[test]
fn kernel_bound_dominates_ball_counts() {
    // n μ(B) = 1 for a disc of radius (nπ)^{-1/2} centred in [0,1]^2.
    let n = 200;
    let radius = (1.0 / (n as f64 * PI)).sqrt();
    let reps = 10_000;
    for seed in SEEDS {
        let mut counts = Vec::with_capacity(reps);
        for rep in 0..reps {
            let cloud = sample_binomial(n, &BlockedDensity::uniform(2), derive_seed(seed, &[rep as u64])).cloud;
            let inside = cloud
                .points()
                .filter(|x| ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt() <= radius)
                .count();
            counts.push(inside);
        }
        for t in [4.0, 6.0, 8.0] {
            let tail = counts.iter().filter(|&&c| c as f64 > t).count() as f64 / reps as f64;
            let bound = kernel_concentration_bound(t, 1.0, 1.0);
            assert!(!bound.trivial);
            assert!(tail <= bound.value, "seed {seed}, t = {t}: {tail} > {}", bound.value);
        }
    }
}

#[test]
fn kernel_bound_scalar_values() {
    let b = kernel_concentration_bound(0.0, 1.0, 1.0);
    assert!(b.trivial && (b.value - (E - 1.0).exp()).abs() < 1e-12);
    let b = kernel_concentration_bound(10.0, 1.0, 1.0);
    assert!((b.value - (-11.0 + E).exp()).abs() < 1e-15);
}

#[test]
fn simplex_count_bound_dominates_empirical_means() {
    let (n, p, r) = (500, 2, 0.5);
    let eta = (n as f64).sqrt();
    let bound_edges = simplex_count_bound(n, 1, r, p, 1.0, 1.0, Metric::Euclidean);
    assert!((bound_edges - 500.0 * PI).abs() < 1e-9);
    let bound_vertices = simplex_count_bound(n, 0, r, p, 1.0, 0.25, Metric::Euclidean);
    assert!((bound_vertices - 125.0).abs() < 1e-9);
    let reps = 200;
    let (mut edges, mut corner_vertices) = (0.0, 0.0);
    for rep in 0..reps {
        let cloud = sample_binomial(n, &BlockedDensity::uniform(2), derive_seed(3, &[rep])).cloud;
        let k = build_rips(&cloud.scaled(eta).unwrap(), Metric::Euclidean, 1, r);
        edges += count_simplices(&k, 1, r) as f64 / reps as f64;
        let corner: Vec<usize> = (0..n).filter(|&i| cloud.point(i).iter().all(|&x| x < 0.5)).collect();
        corner_vertices += count_simplices_localized(&k, 0, r, &corner) as f64 / reps as f64;
    }
    assert!(edges <= bound_edges, "{edges} > {bound_edges}");
    assert!(
        corner_vertices <= bound_vertices,
        "{corner_vertices} > {bound_vertices}"
    );
    // Distinct points never form edges at r = 0.
    let k = build_rips(&random_cloud(1, 50, 2, false), Metric::Euclidean, 2, 0.0);
    assert_eq!(count_simplices(&k, 1, 0.0), 0);
}

#[test]
fn mcdiarmid_independent_example() {
    let n = 64;
    let b = mcdiarmid_bound(&MixingMatrix::identity(n), &vec![1.0; n], (n as f64 / 2.0).sqrt()).unwrap();
    assert!((b.value - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    assert_eq!(
        mcdiarmid_bound(&MixingMatrix::identity(n), &vec![1.0; n], 0.0)
            .unwrap()
            .value,
        2.0
    );
    assert!(mcdiarmid_bound(&MixingMatrix::identity(n), &[1.0; 3], 1.0).is_err());
}

#[test]
fn mcdiarmid_bound_dominates_flip_chain_tails() {
    let (n, eps, reps) = (100, 0.25, 10_000);
    let transition = vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]];
    let chain = HiddenChainSpec::new(transition.clone(), vec![0.5, 0.5], None).unwrap();
    let gamma = exact_mixing_matrix(&transition, n).unwrap();
    let c = vec![1.0; n];
    for seed in SEEDS {
        let mut rng = stream_rng(seed, 3);
        // φ = #{i : Z_i = 1}, with E φ = n/2 under the uniform stationary law.
        let dev: Vec<f64> = (0..reps)
            .map(|_| {
                let ones = chain.sample_path(n, &mut rng).iter().filter(|&&z| z == 1).count();
                (ones as f64 - n as f64 / 2.0).abs()
            })
            .collect();
        let sd = (dev.iter().map(|d| d * d).sum::<f64>() / reps as f64).sqrt();
        for k in [1.0, 2.0, 3.0] {
            let t = k * sd;
            let tail = dev.iter().filter(|&&d| d >= t).count() as f64 / reps as f64;
            let bound = mcdiarmid_bound(&gamma, &c, t).unwrap();
            assert!(tail <= bound.value, "seed {seed}, t = {t}: {tail} > {}", bound.value);
        }
    }
}

/// The Betti bound written out from its defining display with the constants
/// substituted, as an arithmetic path independent of `abstract_exp_bound`.
#[allow(clippy::too_many_arguments)]
fn betti_bound_by_hand(n: f64, p: usize, q: f64, a: f64, t: f64, gamma_inf: f64, f_star: f64, s: f64) -> f64 {
    let g = (2.0 * a - 1.0) / (2.0 * q + 3.0);
    let eta = n.powf(1.0 / p as f64);
    let log_cov = log_covering_number_cube(p, 2.0 * s / eta, Metric::Euclidean).unwrap();
    let ball = n * sup_ball_volume(p, 4.0 * s / eta, Metric::Euclidean);
    let c = 2f64.powf(q + 1.0) * 32.0 * gamma_inf;
    let first = 2.0 * (-n.powf(g) * t * t / (2.0 * c * c)).exp();
    let second = E * n.powf((q + 1.0) * (1.0 - g) + q - a) / (2f64.powf(q + 1.0) * gamma_inf)
        * (1.0 / n.powf(q - a) + 2.0 / t)
        * (-(n.powf(g) - log_cov - f_star * (E - 1.0) * ball)).exp();
    first + second
}

#[test]
fn betti_bound_matches_hand_evaluation() {
    let (n, p, q, a, t, gamma_inf, f_star, s) = (1e4_f64, 2, 1, 0.9, 1.0, 4.0, 2.0, 1.0);
    let params = BoundParams::betti_cube(
        n as usize,
        t,
        a,
        q,
        s,
        gamma_inf,
        f_star,
        p,
        Metric::Euclidean,
        n.sqrt(),
    )
    .unwrap();
    let ours = betti_exp_bound(&params).unwrap();
    let hand = betti_bound_by_hand(n, p, q as f64, a, t, gamma_inf, f_star, s);
    assert!(((ours.value - hand) / hand).abs() < 1e-10, "{} vs {hand}", ours.value);
    assert_eq!(ours.value, abstract_exp_bound(&params).unwrap().value);
    // At desk scale the bound exceeds one.
    assert!(ours.trivial);
    for (m, seed_t) in [(1e3_f64, 0.5), (5e4, 2.0)] {
        let params = BoundParams::betti_cube(
            m as usize,
            seed_t,
            0.8,
            0,
            0.5,
            1.0,
            1.0,
            2,
            Metric::Euclidean,
            m.sqrt(),
        )
        .unwrap();
        let hand = betti_bound_by_hand(m, 2, 0.0, 0.8, seed_t, 1.0, 1.0, 0.5);
        let ours = betti_exp_bound(&params).unwrap().value;
        assert!(((ours - hand) / hand).abs() < 1e-10);
    }
}
