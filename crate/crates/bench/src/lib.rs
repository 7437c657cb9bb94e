//! Inputs shared by the benchmarks.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treedyn_core::rational::{int, rat};
use treedyn_core::sample::{random_map, random_subtree};
use treedyn_core::{MetricTree, PlMap, Subtree};

pub fn interval() -> MetricTree {
    MetricTree::from_named_edges(&[("a", "b", int(1))]).unwrap()
}

pub fn triod() -> MetricTree {
    MetricTree::from_named_edges(&[("c", "a", int(1)), ("c", "b", int(1)), ("c", "d", int(1))]).unwrap()
}

pub fn tent() -> PlMap {
    PlMap::on_interval(interval(), &[(int(0), int(0)), (rat(1, 2), int(1)), (int(1), int(0))]).unwrap()
}

pub fn zigzag() -> PlMap {
    PlMap::on_interval(interval(), &[(int(0), int(0)), (rat(1, 3), int(1)), (rat(2, 3), int(0)), (int(1), int(1))])
        .unwrap()
}

/// A seeded random map on the triod with its own random subcontinua.
pub fn triod_case(seed: u64, subtrees: usize) -> (PlMap, Vec<Subtree>) {
    let tree = triod();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_map(&tree, &mut rng, 5);
    let sets = (0..subtrees).map(|_| random_subtree(&tree, &mut rng)).collect();
    (f, sets)
}
