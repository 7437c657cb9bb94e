use std::collections::HashMap;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::map::PlMap;
use crate::rational::{self, Rational};
use crate::tree::{EdgeId, MetricTree, TreePoint, VertexId};

pub(crate) type Pt = (EdgeId, f64);

/// Largest number of grid points a single count will scan.
pub const POINT_CAP: usize = 1 << 20;

/// `ρ⁽ⁿ⁾(x, y) = max_{0≤j<n} d(fʲx, fʲy)`.
///
/// # Panics
/// If `n == 0`.
pub fn dyn_metric(f: &PlMap, n: usize, x: &TreePoint, y: &TreePoint) -> Rational {
    assert!(n >= 1, "dynamical metric needs n >= 1");
    let tree = f.tree();
    let (mut a, mut b) = (x.clone(), y.clone());
    let mut best = tree.distance(&a, &b);
    for _ in 1..n {
        a = f.evaluate(&a);
        b = f.evaluate(&b);
        best = best.max(tree.distance(&a, &b));
    }
    best
}

/// `max(1, L)^(n-1)`: the expansion bound of `fʲ` for all `j < n`.
pub(crate) fn expansion(f: &PlMap, n: usize) -> Result<f64> {
    let l = rational::to_f64(&f.lipschitz()).max(1.0);
    let e = l.powi(n.saturating_sub(1) as i32);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::LipschitzOverflow)
    }
}

/// Bound on the accumulated floating-point error of an `n`-step orbit distance.
pub(crate) fn float_margin(f: &PlMap, n: usize) -> Result<f64> {
    let l = rational::to_f64(&f.lipschitz()).max(1.0);
    let scale = 1.0 + rational::to_f64(&f.tree().total_length());
    let mut sum = 0.0;
    let mut p = 1.0;
    for _ in 0..n {
        sum += p;
        p *= l;
    }
    let m = 1e-12 + 16.0 * f64::EPSILON * scale * sum;
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::LipschitzOverflow)
    }
}

/// Subdivision count per edge for spacing `h`.
fn grid_steps(tree: &MetricTree, h: f64) -> Vec<usize> {
    tree.edge_ids().map(|e| (tree.length_f64(e) / h).ceil().max(1.0) as usize).collect()
}

/// Number of points in [`grid_f64`] for spacing `h`.
pub(crate) fn grid_size(tree: &MetricTree, h: f64) -> usize {
    grid_steps(tree, h).iter().map(|s| s - 1).sum::<usize>() + tree.vertex_count()
}

/// Grid positions `(edge, k, steps)` in edge order, each vertex at its
/// first occurrence only.
fn grid_slots(tree: &MetricTree, h: f64) -> impl Iterator<Item = (EdgeId, usize, usize)> + '_ {
    let mut seen = vec![false; tree.vertex_count()];
    tree.edge_ids().zip(grid_steps(tree, h)).flat_map(move |(e, s)| {
        let edge = tree.edge(e);
        let tail = !std::mem::replace(&mut seen[edge.tail.0], true);
        let head = !std::mem::replace(&mut seen[edge.head.0], true);
        let first = if tail { 0 } else { 1 };
        let last = if head { s } else { s - 1 };
        (first..=last).map(move |k| (e, k, s))
    })
}

/// Points spaced at most `h` apart along every edge, in edge order.
pub(crate) fn grid_f64(tree: &MetricTree, h: f64) -> impl Iterator<Item = Pt> + '_ {
    grid_slots(tree, h).map(|(e, k, s)| (e, k as f64 / s as f64))
}

/// The points of [`grid_f64`] as exact tree points, in the same order.
pub(crate) fn grid_exact(tree: &MetricTree, h: f64) -> Vec<TreePoint> {
    grid_slots(tree, h).map(|(e, k, s)| tree.canonical(e, rational::rat(k as i64, s as i64))).collect()
}

/// Per-edge parameter ranges `[lo, hi]` (arc length from the tail) of the
/// closed ball of radius `r` around `p`.
fn ball(tree: &MetricTree, p: Pt, r: f64, out: &mut Vec<(EdgeId, f64, f64)>) {
    out.clear();
    let (e, t) = p;
    let len = tree.length_f64(e);
    let s = t * len;
    out.push((e, (s - r).max(0.0), (s + r).min(len)));
    let edge = tree.edge(e);
    if s <= r {
        spread(tree, edge.tail, e, r - s, out);
    }
    if len - s <= r {
        spread(tree, edge.head, e, r - (len - s), out);
    }
}

fn spread(tree: &MetricTree, v: VertexId, from: EdgeId, rest: f64, out: &mut Vec<(EdgeId, f64, f64)>) {
    for &e in tree.incident(v) {
        if e == from {
            continue;
        }
        let len = tree.length_f64(e);
        let edge = tree.edge(e);
        let reach = rest.min(len);
        if edge.tail == v {
            out.push((e, 0.0, reach));
        } else {
            out.push((e, len - reach, len));
        }
        if rest >= len {
            spread(tree, tree.other_end(e, v), e, rest - len, out);
        }
    }
}

type Cell = (u32, i64);

/// Greedy selection of orbits that are pairwise more than `thr` apart in
/// `ρ⁽ⁿ⁾`, bucketed by the cells of a few orbit positions.
pub(crate) struct GreedyNet<'a> {
    f: &'a PlMap,
    n: usize,
    thr: f64,
    size: f64,
    keys: [usize; 3],
    chosen: Vec<Pt>,
    index: HashMap<[Cell; 3], Vec<u32>>,
    orbit: Vec<Pt>,
    scratch: Vec<(EdgeId, f64, f64)>,
    near: [Vec<Cell>; 3],
}

impl<'a> GreedyNet<'a> {
    pub(crate) fn new(f: &'a PlMap, n: usize, thr: f64) -> Self {
        let size = thr * (1.0 + 1e-9) + 1e-300;
        GreedyNet {
            f,
            n,
            thr,
            size,
            keys: [0, n / 2, n - 1],
            chosen: Vec::new(),
            index: HashMap::new(),
            orbit: Vec::with_capacity(n),
            scratch: Vec::new(),
            near: Default::default(),
        }
    }

    fn cell(&self, p: Pt) -> Cell {
        let s = p.1 * self.f.tree().length_f64(p.0);
        (p.0 .0 as u32, (s / self.size).floor() as i64)
    }

    /// Adds `x` unless some chosen orbit is within `thr`; returns whether it
    /// was added.
    pub(crate) fn offer(&mut self, x: Pt) -> bool {
        let tree = self.f.tree();
        self.orbit.clear();
        let mut y = x;
        for j in 0..self.n {
            if j > 0 {
                y = self.f.evaluate_f64(y);
            }
            self.orbit.push(y);
        }
        for (slot, &j) in self.keys.iter().enumerate() {
            ball(tree, self.orbit[j], self.thr * (1.0 + 1e-9), &mut self.scratch);
            let near = &mut self.near[slot];
            near.clear();
            for &(e, lo, hi) in &self.scratch {
                let a = (lo / self.size).floor() as i64;
                let b = (hi / self.size).floor() as i64;
                near.extend((a..=b).map(|k| (e.0 as u32, k)));
            }
            near.sort_unstable();
            near.dedup();
        }
        for c0 in &self.near[0] {
            for c1 in &self.near[1] {
                for c2 in &self.near[2] {
                    let Some(ids) = self.index.get(&[*c0, *c1, *c2]) else { continue };
                    for &id in ids {
                        let other = &self.chosen[id as usize * self.n..(id as usize + 1) * self.n];
                        if self.orbit.iter().zip(other).all(|(&a, &b)| tree.distance_f64(a, b) <= self.thr) {
                            return false;
                        }
                    }
                }
            }
        }
        let key = [self.cell(self.orbit[self.keys[0]]), self.cell(self.orbit[self.keys[1]]), self.cell(self.orbit[self.keys[2]])];
        let id = (self.chosen.len() / self.n) as u32;
        self.index.entry(key).or_default().push(id);
        self.chosen.extend_from_slice(&self.orbit);
        true
    }

    pub(crate) fn len(&self) -> usize {
        self.chosen.len() / self.n
    }

    /// Starting points of the chosen orbits, in selection order.
    pub(crate) fn starts(&self) -> Vec<Pt> {
        self.chosen.iter().step_by(self.n).copied().collect()
    }
}

fn check(f: &PlMap, n: usize, eps: &Rational, grid: &Rational) -> Result<()> {
    if !eps.is_positive() || !grid.is_positive() {
        return Err(Error::NonpositiveEpsilon);
    }
    assert!(n >= 1, "counts need n >= 1");
    if grid * Rational::from_integer(4.into()) > *eps {
        return Err(Error::GridTooCoarse(format!(
            "resolution {} exceeds eps/4 for eps = {}",
            rational::format(grid),
            rational::format(eps)
        )));
    }
    let _ = f;
    Ok(())
}

/// An `(n, f, ε)`-separated subset of the grid, chosen greedily in grid order.
pub(crate) fn separated_points(f: &PlMap, n: usize, eps: &Rational, grid: &Rational) -> Result<Vec<Pt>> {
    check(f, n, eps, grid)?;
    let thr = rational::to_f64(eps) + float_margin(f, n)?;
    let mut net = GreedyNet::new(f, n, thr);
    for x in grid_f64(f.tree(), rational::to_f64(grid)) {
        net.offer(x);
    }
    Ok(net.starts())
}

/// Lower bound for `sep(n, f, ε)`: a greedy `ρ⁽ⁿ⁾`-separated subset of the
/// uniform grid of spacing `grid`.
pub fn sep_count(f: &PlMap, n: usize, eps: &Rational, grid: &Rational) -> Result<usize> {
    separated_points(f, n, eps, grid).map(|s| s.len())
}

/// Upper bound for `span(n, f, ε)`: a greedy cover of the grid by
/// `ρ⁽ⁿ⁾`-balls of radius `ε − s`, where every point of `T` is within `s`
/// of the grid in `ρ⁽ⁿ⁾` and `s ≤ ε/2`.
pub fn span_count(f: &PlMap, n: usize, eps: &Rational, grid: &Rational) -> Result<usize> {
    check(f, n, eps, grid)?;
    let h = rational::to_f64(grid);
    let e = rational::to_f64(eps);
    let margin = float_margin(f, n)?;
    let slack = expansion(f, n)? * h / 2.0;
    if margin >= e / 4.0 {
        return Err(Error::LipschitzOverflow);
    }
    if slack > e / 2.0 {
        return Err(Error::GridTooCoarse(format!(
            "grid slack {slack:.3e} exceeds eps/2 = {:.3e} at n = {n}",
            e / 2.0
        )));
    }
    let mut net = GreedyNet::new(f, n, e - slack - margin);
    for x in grid_f64(f.tree(), h) {
        net.offer(x);
    }
    Ok(net.len())
}
