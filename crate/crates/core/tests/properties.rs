use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treedyn_core::analysis::{find_afp, find_afp_from};
use treedyn_core::entropy::{cell_spacing, connected_envelope_sep, sep_count, ConnectedSample};
use treedyn_core::hyperspace::{classify_subcontinuum, ClassifyConfig};
use treedyn_core::rational::{int, rat};
use treedyn_core::sample::{contracting_map, grid_point, random_map, random_subtree};
use treedyn_core::{EdgeId, MetricTree, PlMap, Quotient, Subtree, TreePoint};

fn triod() -> MetricTree {
    MetricTree::from_named_edges(&[("c", "a", int(1)), ("c", "b", int(2)), ("c", "d", rat(1, 2))]).unwrap()
}

fn star() -> MetricTree {
    MetricTree::from_named_edges(&[
        ("c", "a", int(1)),
        ("c", "b", int(1)),
        ("c", "u", rat(1, 2)),
        ("u", "d", int(1)),
        ("u", "e", rat(3, 2)),
    ])
    .unwrap()
}

fn tree_for(seed: u64) -> MetricTree {
    if seed.is_multiple_of(2) {
        triod()
    } else {
        star()
    }
}

/// A point with a finer denominator than the sampled maps use.
fn fine_point(tree: &MetricTree, rng: &mut ChaCha8Rng) -> TreePoint {
    let e = EdgeId(rng.gen_range(0..tree.edge_count()));
    tree.point(e, rat(rng.gen_range(0..=96), 96)).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn arcs_are_symmetric_with_a_single_median(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (fine_point(&tree, &mut rng), fine_point(&tree, &mut rng), fine_point(&tree, &mut rng));
        prop_assert_eq!(tree.arc(&x, &y), tree.arc(&y, &x));
        let meet = tree
            .arc(&x, &y)
            .intersection(&tree.arc(&y, &z))
            .and_then(|m| m.intersection(&tree.arc(&x, &z)))
            .expect("three arcs of a tree meet");
        prop_assert!(meet.as_point(&tree).is_some());
    }

    #[test]
    fn projection_lands_in_the_subtree(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_subtree(&tree, &mut rng);
        let z = fine_point(&tree, &mut rng);
        let p = m.project(&tree, &z);
        prop_assert!(m.contains(&tree, &p));
        prop_assert_eq!(p == z, m.contains(&tree, &z));
        prop_assert!(m.boundary(&tree).len() <= tree.edge_count() + 1);
    }

    #[test]
    fn hausdorff_is_a_metric(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_subtree(&tree, &mut rng), random_subtree(&tree, &mut rng), random_subtree(&tree, &mut rng));
        let d = |x: &Subtree, y: &Subtree| tree.hausdorff(x, y);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == int(0), a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn neighbourhoods_match_distances(seed in any::<u64>(), r in 0i64..=24) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_subtree(&tree, &mut rng);
        let r = rat(r, 16);
        let n = a.neighbourhood(&tree, &r);
        prop_assert!(a.is_subset(&n));
        for _ in 0..20 {
            let z = fine_point(&tree, &mut rng);
            prop_assert_eq!(n.contains(&tree, &z), a.distance_to(&tree, &z) <= r);
        }
    }

    #[test]
    fn quotients_contract_distances(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_subtree(&tree, &mut rng);
        prop_assume!(!m.is_degenerate(&tree) && m != tree.whole());
        let q = Quotient::new(&tree, &m).unwrap();
        for _ in 0..20 {
            let (x, y) = (fine_point(&tree, &mut rng), fine_point(&tree, &mut rng));
            let (px, py) = (q.project(&tree, &x), q.project(&tree, &y));
            prop_assert!(q.tree().distance(&px, &py) <= tree.distance(&x, &y));
            let both_in = m.contains(&tree, &x) && m.contains(&tree, &y);
            prop_assert_eq!(px == py, both_in || x == y);
        }
    }

    #[test]
    fn maps_compose_and_fix_exactly(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_map(&tree, &mut rng, 5);
        let g = random_map(&tree, &mut rng, 5);
        let fg = f.compose(&g).unwrap();
        for _ in 0..20 {
            let x = fine_point(&tree, &mut rng);
            prop_assert_eq!(fg.evaluate(&x), f.evaluate(&g.evaluate(&x)));
            let y = fine_point(&tree, &mut rng);
            let image = f.image_subtree(&tree.arc(&x, &y));
            prop_assert!(tree.arc(&f.evaluate(&x), &f.evaluate(&y)).is_subset(&image));
        }
        let (points, segments) = f.fixed_set();
        for p in &points {
            prop_assert_eq!(&f.evaluate(p), p);
        }
        // a power of f may still fix a whole segment
        if let (true, Ok(orbits)) = (segments.is_empty(), f.periodic_points(4)) {
            for orbit in orbits {
                let p = &orbit.points[0];
                prop_assert_eq!(f.minimal_period(p, orbit.period), Some(orbit.period));
                let orbit_points = f.orbit(p, orbit.period);
                prop_assert_eq!(orbit_points.last(), Some(p));
            }
        }
    }

    #[test]
    fn singleton_envelope_matches_point_separation(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_map(&tree, &mut rng, 3);
        let (n, eps) = (3, rat(1, 8));
        let grid = cell_spacing(&f, n, &eps).unwrap();
        let points = sep_count(&f, n, &eps, &grid).unwrap();
        let singletons = connected_envelope_sep(&f, n, &eps, &ConnectedSample::singletons_only()).unwrap();
        prop_assert_eq!(points, singletons);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn the_attracting_fixed_point_is_unique(seed in any::<u64>()) {
        let tree = tree_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves = tree.endpoints();
        let target = leaves[rng.gen_range(0..leaves.len())];
        let f: PlMap = contracting_map(&tree, target, &mut rng, 4);
        let s = find_afp(&f).unwrap().afp;
        prop_assert_eq!(&s, &tree.vertex_point(target));
        for _ in 0..10 {
            let c = grid_point(&tree, &mut rng);
            if tree.is_endpoint(&c) {
                continue;
            }
            prop_assert_eq!(&find_afp_from(&f, &c).unwrap().afp, &s);
            prop_assert!(tree.in_component(&c, &f.evaluate(&c), &s));
        }
        let a = random_subtree(&tree, &mut rng);
        let verdict = classify_subcontinuum(&f, &a, &ClassifyConfig::default()).unwrap();
        prop_assert!(verdict.tag.is_degenerate(), "{:?}", verdict.tag);
    }
}
