#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use sparse_cover::bcd::{ball_bound, build_bcd, build_dag, check_extended_buffer_all, directed_ball, verify_bcd};
use sparse_cover::cover::{build_cover, verify_cover_with};
use sparse_cover::embed::{distortion_report, embed_full, PairSelection};
use sparse_cover::generators::{generate, Family, FamilySpec, WeightMode};
use sparse_cover::graph::{all_pairs, WeightedGraph};
use sparse_cover::laminar::verify_ladders;
use sparse_cover::partition::{color_cover, to_sparse_partition_with, verify_coloring, verify_sparse_partition};
use sparse_cover::suite::oracle_distortion;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Grid),
        Just(Family::Tree),
        Just(Family::SeriesParallel),
        Just(Family::PlanarTriangulation),
    ]
}

fn weights() -> impl Strategy<Value = WeightMode> {
    prop_oneof![
        Just(WeightMode::Unit),
        Just(WeightMode::Uniform { lo: 0.5, hi: 4.0 }),
        Just(WeightMode::ExponentialSpread),
    ]
}

fn instance(family: Family, size: usize, weights: WeightMode, seed: u64) -> (WeightedGraph, usize) {
    // grids take a side length
    let size = if family == Family::Grid { 2 + size % 6 } else { size };
    let g = generate(&FamilySpec { family, size, weights, seed }).unwrap();
    (g.graph, g.r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decompositions_verify(
        fam in family(), size in 3usize..60, w in weights(), seed in any::<u64>(), scale in 0usize..3
    ) {
        let (g, r) = instance(fam, size, w, seed);
        let delta = g.max_weight() * [0.5, 2.0, 6.0][scale];
        let d = build_bcd(&g, delta, delta / r as f64, r - 1).unwrap();
        let rep = verify_bcd(&g, &d);
        prop_assert!(rep.passes(), "{:?}", rep.failures);
        let dag = build_dag(&g, &d).unwrap();
        for v in 0..dag.len() {
            for q in 0..=4 {
                prop_assert!(directed_ball(&dag, v, q).len() as u128 <= ball_bound(r - 1, q));
            }
        }
        for ext in check_extended_buffer_all(&g, &d, &dag, 2) {
            prop_assert!(ext.passes(), "{:?}", ext.violations);
        }
    }

    #[test]
    fn covers_partitions_and_colorings_verify(
        fam in family(), size in 3usize..50, w in weights(), seed in any::<u64>(), q in 1usize..4
    ) {
        let (g, r) = instance(fam, size, w, seed);
        let apsp = all_pairs(&g);
        let c = build_cover(&g, r, q, 3.0 * g.max_weight()).unwrap();
        let rep = verify_cover_with(&g, &apsp, &c);
        prop_assert!(rep.passes(), "{:?}", rep.failures);
        let p = to_sparse_partition_with(&g, &apsp, &c);
        let prep = verify_sparse_partition(&g, &apsp, &p);
        prop_assert!(prep.passes(), "{:?}", prep.failures);
        let col = color_cover(&c);
        prop_assert!(verify_coloring(&g, &apsp, &c, &col).passes());
    }

    #[test]
    fn ladders_refine_and_embedding_is_two_lipschitz(
        fam in family(), size in 3usize..30, seed in any::<u64>(), eps in prop_oneof![Just(0.3), Just(0.5)]
    ) {
        let (g, r) = instance(fam, size, WeightMode::Uniform { lo: 1.0, hi: 3.0 }, seed);
        let run = embed_full(&g, r, eps).unwrap();
        for st in &run.per_step {
            let rep = verify_ladders(&run.normalized, &run.apsp, &st.ladders);
            prop_assert!(rep.passes(), "{:?}", rep.failures);
        }
        prop_assert_eq!(run.embedding.dim, run.dimension_formula());
        let d = distortion_report(&all_pairs(&g), &run.embedding.coords, PairSelection::All);
        prop_assert!(d.expansion <= 2.0 * (1.0 + 1e-9));
        prop_assert!(d.contraction.is_finite());
    }

    #[test]
    fn distortion_report_matches_two_loop_oracle(
        pts in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2..12)
    ) {
        // distances of a weighted path; coordinates arbitrary
        let n = pts.len();
        let mut dist = vec![vec![0.0; n]; n];
        for x in 0..n {
            for y in 0..n {
                dist[x][y] = (x as f64 - y as f64).abs() * 1.5;
            }
        }
        let rep = distortion_report(&dist, &pts, PairSelection::All);
        let (e, c) = oracle_distortion(&dist, &pts);
        prop_assert_eq!(rep.expansion.to_bits(), e.to_bits());
        prop_assert_eq!(rep.contraction.to_bits(), c.to_bits());
    }
}
