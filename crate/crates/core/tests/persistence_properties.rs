mod common;

use common::random_cloud;
use dephom::filtration::{build, build_rips};
use dephom::persistence::{
    compute_persistence, diagram, persistent_betti, persistent_betti_direct, BoundaryMatrix, ReduceOptions,
};
use dephom::{BettiQuery, ComplexKind, FilteredComplex, Metric, PersistenceDiagram};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = ComplexKind> {
    prop_oneof![Just(ComplexKind::Rips), Just(ComplexKind::Cech)]
}

fn complex(kind: ComplexKind, seed: u64, n: usize, p: usize, snap: bool, max_dim: usize) -> FilteredComplex<f64> {
    build(
        kind,
        &random_cloud(seed, n, p, snap),
        Metric::Euclidean,
        max_dim,
        2.0,
        None,
    )
    .unwrap()
}

fn grid(k: usize, top: f64) -> Vec<f64> {
    (0..k).map(|i| top * i as f64 / (k - 1) as f64).collect()
}

fn betti(diag: &PersistenceDiagram<f64>, q: usize, r: f64, s: f64) -> usize {
    persistent_betti(diag, BettiQuery::new(q, r, s).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagram_agrees_with_rank_definition(
        seed in any::<u64>(), n in 1usize..=9, p in 1usize..=3, snap in any::<bool>(), kind in kind_strategy()
    ) {
        let k = complex(kind, seed, n, p, snap, 3);
        let diag = diagram(&k);
        let rs = grid(8, 1.6);
        for q in 0..=2 {
            for (i, &r) in rs.iter().enumerate() {
                for &s in &rs[i..] {
                    let query = BettiQuery::new(q, r, s).unwrap();
                    prop_assert_eq!(
                        persistent_betti(&diag, query).unwrap(),
                        persistent_betti_direct(&k, query).unwrap(),
                        "q = {}, r = {}, s = {}", q, r, s
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes(seed in any::<u64>(), n in 1usize..=10, kind in kind_strategy()) {
        let k = complex(kind, seed, n, 2, false, 3);
        prop_assert!(BoundaryMatrix::from_complex(&k).boundary_squared_vanishes());
        prop_assert!(k.validate().is_ok());
    }

    #[test]
    fn betti_is_monotone_in_both_parameters(
        seed in any::<u64>(), n in 2usize..=12, p in 1usize..=3, kind in kind_strategy()
    ) {
        let diag = diagram(&complex(kind, seed, n, p, false, 2));
        let rs = grid(12, 1.5);
        for q in 0..=1 {
            for (i, &r) in rs.iter().enumerate() {
                for (j, &s) in rs.iter().enumerate().skip(i) {
                    let b = betti(&diag, q, r, s);
                    if j + 1 < rs.len() {
                        prop_assert!(betti(&diag, q, r, rs[j + 1]) <= b);
                    }
                    if i < j {
                        prop_assert!(betti(&diag, q, rs[i + 1], s) >= b);
                    }
                }
            }
        }
    }

    #[test]
    fn diagram_ignores_point_order(
        seed in any::<u64>(), n in 2usize..=10, p in 1usize..=3, kind in kind_strategy(),
        perm in any::<u64>()
    ) {
        // Snapped coordinates make filtration ties common, so the permutation
        // changes the tie-broken simplex order.
        let cloud = random_cloud(seed, n, p, true);
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = dephom::samplers::stream_rng(perm, 0);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let a = diagram(&build(kind, &cloud, Metric::Euclidean, 3, 2.0, None).unwrap());
        let b = diagram(&build(kind, &cloud.select(&order), Metric::Euclidean, 3, 2.0, None).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn diagram_scales_with_the_cloud(
        seed in any::<u64>(), n in 2usize..=10, p in 1usize..=3, kind in kind_strategy(), eta in 0.1f64..40.0
    ) {
        let cloud = random_cloud(seed, n, p, false);
        let base = diagram(&build(kind, &cloud, Metric::Euclidean, 3, 2.0, None).unwrap());
        let scaled = diagram(&build(kind, &cloud.scaled(eta).unwrap(), Metric::Euclidean, 3, 2.0 * eta, None).unwrap());
        prop_assert_eq!(scaled, base.scaled(eta));
    }

    #[test]
    fn euler_characteristic_matches_betti_numbers(
        seed in any::<u64>(), n in 1usize..=12, p in 1usize..=3, kind in kind_strategy(), clearing in any::<bool>()
    ) {
        let k = complex(kind, seed, n, p, seed % 2 == 0, 3);
        let pers = compute_persistence(&k, ReduceOptions { clearing });
        let mut rng = dephom::samplers::stream_rng(seed, 5);
        for _ in 0..20 {
            let r: f64 = rand::Rng::random::<f64>(&mut rng) * 2.0;
            let chi: i64 = k
                .simplices()
                .iter()
                .filter(|(_, v)| *v <= r)
                .map(|(s, _)| if s.dim() % 2 == 0 { 1 } else { -1 })
                .sum();
            let betti_sum: i64 = (0..=3)
                .map(|q| if q % 2 == 0 { 1 } else { -1 } * pers.betti(q, r) as i64)
                .sum();
            prop_assert_eq!(chi, betti_sum, "r = {}", r);
        }
    }
}

#[test]
fn degree_zero_counts_components_of_a_path() {
    // Points at 0, 0.1, 0.3, 0.6 on a line: gaps 0.1, 0.2, 0.3.
    let cloud = dephom::PointCloud::new(1, &[vec![0.0], vec![0.1], vec![0.3], vec![0.6]]).unwrap();
    let diag = diagram(&build_rips(&cloud, Metric::Euclidean, 1, 1.0));
    let components = |r: f64| betti(&diag, 0, r, r);
    assert_eq!(components(0.05), 4);
    assert_eq!(components(0.15), 3);
    assert_eq!(components(0.25), 2);
    assert_eq!(components(0.35), 1);
}
