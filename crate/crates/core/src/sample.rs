//! Seeded random PL maps and subcontinua on a dyadic grid.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::map::PlMap;
use crate::rational::{self, Rational};
use crate::tree::{EdgeId, MetricTree, Subtree, TreePoint, VertexId};

/// Grid denominator for sampled data.
pub const DENOM: i64 = 8;

pub fn grid_point<R: Rng>(tree: &MetricTree, rng: &mut R) -> TreePoint {
    let e = EdgeId(rng.gen_range(0..tree.edge_count()));
    tree.point(e, rational::rat(rng.gen_range(0..=DENOM), DENOM)).expect("grid point on edge")
}

fn grid_points(tree: &MetricTree) -> Vec<TreePoint> {
    tree.grid(&rational::rat(1, DENOM)).expect("positive spacing")
}

/// Interior breakpoints, at most `max_breakpoints` in total, on the grid.
fn breakpoints<R: Rng>(tree: &MetricTree, rng: &mut R, max_breakpoints: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new(); tree.edge_count()];
    let count = rng.gen_range(0..=max_breakpoints);
    for _ in 0..count {
        let e = rng.gen_range(0..tree.edge_count());
        out[e].push(rational::rat(rng.gen_range(1..DENOM), DENOM));
    }
    for ts in &mut out {
        ts.sort();
        ts.dedup();
    }
    out
}

fn assemble(
    tree: &MetricTree,
    breaks: Vec<Vec<Rational>>,
    mut image: impl FnMut(&TreePoint) -> TreePoint,
) -> PlMap {
    let vertex_images: Vec<TreePoint> =
        (0..tree.vertex_count()).map(|v| image(&tree.vertex_point(VertexId(v)))).collect();
    let table = tree
        .edge_ids()
        .zip(breaks)
        .map(|(e, ts)| {
            let edge = tree.edge(e);
            let mut row = vec![(rational::zero(), vertex_images[edge.tail.0].clone())];
            row.extend(ts.into_iter().map(|t| {
                let y = image(&tree.point(e, t.clone()).expect("interior point"));
                (t, y)
            }));
            row.push((rational::one(), vertex_images[edge.head.0].clone()));
            row
        })
        .collect();
    PlMap::new(tree.clone(), table).expect("sampled table is valid")
}

/// A PL map with at most `max_breakpoints` interior breakpoints whose
/// breakpoints and values all lie on the grid.
pub fn random_map<R: Rng>(tree: &MetricTree, rng: &mut R, max_breakpoints: usize) -> PlMap {
    let breaks = breakpoints(tree, rng, max_breakpoints);
    assemble(tree, breaks, |_| grid_point(tree, rng))
}

/// A random grid map moving every point other than the leaf `target`
/// strictly closer to it, so `target` attracts everything.
pub fn contracting_map<R: Rng>(tree: &MetricTree, target: VertexId, rng: &mut R, max_breakpoints: usize) -> PlMap {
    let a = tree.vertex_point(target);
    let grid = grid_points(tree);
    let breaks = breakpoints(tree, rng, max_breakpoints);
    assemble(tree, breaks, |x| {
        let d = tree.distance(x, &a);
        let closer: Vec<&TreePoint> = grid.iter().filter(|p| tree.distance(p, &a) < d).collect();
        closer.choose(rng).map_or_else(|| a.clone(), |p| (*p).clone())
    })
}

/// A random arc between grid points; degenerate about a fifth of the time.
pub fn random_subtree<R: Rng>(tree: &MetricTree, rng: &mut R) -> Subtree {
    let x = grid_point(tree, rng);
    if rng.gen_bool(0.2) {
        return Subtree::point(tree, &x);
    }
    tree.arc(&x, &grid_point(tree, rng))
}
