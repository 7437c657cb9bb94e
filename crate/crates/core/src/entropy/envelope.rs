use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::counts::{self, grid_exact, separated_points};
use super::{cell_grid, n_ladder};
use crate::error::{Error, Result};
use crate::io::{serialize_points, serialize_rational};
use crate::map::PlMap;
use crate::rational::{self, Rational};
use crate::tree::{cover_by_continua, EdgeId, MetricTree, Subtree, TreePoint, VertexId};

/// Closed graph of an upper semicontinuous set-valued map `T → Con(T)`,
/// stored as a finite union of product blocks `P × Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiMapGraph {
    blocks: Vec<(Subtree, Subtree)>,
}

/// Parameters along an edge where membership in any of `sets` can change,
/// together with the midpoints between them.
fn probe_points(tree: &MetricTree, domain: &Subtree, sets: &[&Subtree]) -> Vec<TreePoint> {
    let two = Rational::from_integer(2.into());
    let mut out = Vec::new();
    for e in domain.edges() {
        let (lo, hi) = domain.part(e).unwrap();
        let mut ts = vec![lo.clone(), hi.clone()];
        for s in sets {
            if let Some((a, b)) = s.part(e) {
                for t in [a, b] {
                    if lo < t && t < hi {
                        ts.push(t.clone());
                    }
                }
            }
        }
        ts.sort();
        ts.dedup();
        for w in ts.windows(2) {
            out.push(tree.canonical(e, (&w[0] + &w[1]) / &two));
        }
        out.extend(ts.into_iter().map(|t| tree.canonical(e, t)));
    }
    out
}

/// Whether `P × Q ⊆ ⋃ Aₖ × Bₖ`.
fn box_covered(tree: &MetricTree, p: &Subtree, q: &Subtree, cover: &[(Subtree, Subtree)]) -> bool {
    let firsts: Vec<&Subtree> = cover.iter().map(|(a, _)| a).collect();
    probe_points(tree, p, &firsts).iter().all(|x| {
        let active: Vec<&Subtree> = cover.iter().filter(|(a, _)| a.contains(tree, x)).map(|(_, b)| b).collect();
        !active.is_empty() && probe_points(tree, q, &active).iter().all(|y| active.iter().any(|b| b.contains(tree, y)))
    })
}

impl MultiMapGraph {
    /// Checks that the blocks define a map with a nonempty connected value at
    /// every point.
    pub fn new(tree: &MetricTree, blocks: Vec<(Subtree, Subtree)>) -> Result<Self> {
        let whole = Subtree::whole(tree);
        let domains: Vec<&Subtree> = blocks.iter().map(|(p, _)| p).collect();
        for x in probe_points(tree, &whole, &domains) {
            let values: Vec<Subtree> =
                blocks.iter().filter(|(p, _)| p.contains(tree, &x)).map(|(_, q)| q.clone()).collect();
            if values.is_empty() {
                return Err(Error::InvalidMap(format!("no value at {x:?}")));
            }
            if Subtree::union_components(tree, &values).len() != 1 {
                return Err(Error::InvalidMap(format!("disconnected value at {x:?}")));
            }
        }
        Ok(MultiMapGraph { blocks })
    }

    /// `φ_ȳ` on edge `I`: `{y_j}` on `(x_{j-1}, x_j)` with `x_k = k/K`, the
    /// whole tree at every `x_k` and off `I`.
    pub fn phi(tree: &MetricTree, edge: EdgeId, ys: &[TreePoint]) -> Self {
        let k = ys.len() as i64;
        let whole = Subtree::whole(tree);
        let at = |j: i64| tree.canonical(edge, rational::rat(j, k));
        let mut blocks: Vec<(Subtree, Subtree)> = ys
            .iter()
            .enumerate()
            .map(|(j, y)| (tree.arc(&at(j as i64), &at(j as i64 + 1)), Subtree::point(tree, y)))
            .collect();
        blocks.extend((0..=k).map(|j| (Subtree::point(tree, &at(j)), whole.clone())));
        blocks.extend(tree.edge_ids().filter(|&e| e != edge).map(|e| {
            let ends = (tree.canonical(e, Rational::zero()), tree.canonical(e, Rational::one()));
            (tree.arc(&ends.0, &ends.1), whole.clone())
        }));
        MultiMapGraph { blocks }
    }

    pub fn blocks(&self) -> &[(Subtree, Subtree)] {
        &self.blocks
    }

    /// Graph of `f ∘ φ`.
    pub fn then(&self, f: &PlMap) -> Self {
        MultiMapGraph { blocks: self.blocks.iter().map(|(p, q)| (p.clone(), f.image_subtree(q))).collect() }
    }

    fn inflate(&self, tree: &MetricTree, r: &Rational) -> Vec<(Subtree, Subtree)> {
        self.blocks.iter().map(|(p, q)| (p.neighbourhood(tree, r), q.neighbourhood(tree, r))).collect()
    }

    /// Exact test of `ρ_H(graph, other) ≤ r` for the max metric on `T × T`.
    pub fn within(&self, other: &MultiMapGraph, tree: &MetricTree, r: &Rational) -> bool {
        let near_other = other.inflate(tree, r);
        if !self.blocks.iter().all(|(p, q)| box_covered(tree, p, q, &near_other)) {
            return false;
        }
        let near_self = self.inflate(tree, r);
        other.blocks.iter().all(|(p, q)| box_covered(tree, p, q, &near_self))
    }
}

/// The `|F|^K` maps `φ_ȳ` built from an `(n, f, ε)`-separated set `F`.
#[derive(Clone, Debug, Serialize)]
pub struct PhiFamily {
    pub edge: usize,
    pub k: usize,
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub eps: Rational,
    /// Grid spacing used to build `F`.
    #[serde(serialize_with = "serialize_rational")]
    pub grid: Rational,
    #[serde(serialize_with = "serialize_points")]
    pub points: Vec<TreePoint>,
    /// `|F|^K` in decimal.
    #[serde(serialize_with = "serialize_display")]
    pub claimed_count: BigUint,
}

fn serialize_display<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub sampled: usize,
    pub separated: usize,
}

impl PhiFamily {
    pub fn graph(&self, tree: &MetricTree, tuple: &[usize]) -> MultiMapGraph {
        let ys: Vec<TreePoint> = tuple.iter().map(|&i| self.points[i].clone()).collect();
        MultiMapGraph::phi(tree, EdgeId(self.edge), &ys)
    }

    /// `count` seeded pairs of distinct index tuples.
    pub fn sample_pairs(&self, count: usize, seed: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.points.len();
        let mut out = Vec::with_capacity(count);
        if m < 2 {
            return out;
        }
        while out.len() < count {
            let a: Vec<usize> = (0..self.k).map(|_| rng.gen_range(0..m)).collect();
            let mut b: Vec<usize> = (0..self.k).map(|_| rng.gen_range(0..m)).collect();
            if rng.gen_bool(0.5) {
                // differ in a single coordinate
                b = a.clone();
                let j = rng.gen_range(0..self.k);
                let others: Vec<usize> = (0..m).filter(|&i| i != a[j]).collect();
                b[j] = *others.choose(&mut rng).unwrap();
            }
            if a != b {
                out.push((a, b));
            }
        }
        out
    }

    /// Exact check that `ρ_H⁽ⁿ⁾(φ_ȳ, φ_ȳ') > ε` on sampled pairs.
    pub fn verify_pairs(&self, f: &PlMap, pairs: &[(Vec<usize>, Vec<usize>)]) -> PairCheck {
        let tree = f.tree();
        let separated = pairs
            .par_iter()
            .filter(|(a, b)| {
                let (mut u, mut v) = (self.graph(tree, a), self.graph(tree, b));
                for j in 0..self.n {
                    if j > 0 {
                        u = u.then(f);
                        v = v.then(f);
                    }
                    if !u.within(&v, tree, &self.eps) {
                        return true;
                    }
                }
                false
            })
            .count();
        PairCheck { sampled: pairs.len(), separated }
    }
}

/// `K = ⌊1/(2ε)⌋ − 1`.
pub fn phi_width(eps: &Rational) -> Result<usize> {
    if !eps.is_positive() {
        return Err(Error::NonpositiveEpsilon);
    }
    let k = rational::floor_i64(&(Rational::one() / (eps * Rational::from_integer(2.into())))) - 1;
    if k < 1 {
        return Err(Error::EpsilonTooLarge);
    }
    Ok(k as usize)
}

/// The separated family `{φ_ȳ : ȳ ∈ F^K}` on edge `edge`.
pub fn envelope_sep_family(f: &PlMap, n: usize, eps: &Rational, edge: EdgeId) -> Result<PhiFamily> {
    let k = phi_width(eps)?;
    let tree = f.tree();
    let grid = cell_grid(f, n, eps, &(eps / Rational::from_integer(8.into())))?.0;
    let points: Vec<TreePoint> = separated_points(f, n, eps, &grid)?
        .into_iter()
        .map(|(e, t)| tree.canonical(e, Rational::from_float(t).expect("finite grid point")))
        .collect();
    let claimed_count = BigUint::from(points.len()).pow(k as u32);
    Ok(PhiFamily { edge: edge.0, k, n, eps: eps.clone(), grid, points, claimed_count })
}

/// Sample for [`connected_envelope_sep`]: singletons at the base grid and
/// seeded arcs between grid points.
#[derive(Clone, Debug)]
pub struct ConnectedSample {
    pub singletons: bool,
    pub arcs: usize,
    pub seed: u64,
}

impl ConnectedSample {
    pub fn singletons_only() -> Self {
        ConnectedSample { singletons: true, arcs: 0, seed: 0 }
    }
}

/// Greedy `(n, 𝓕, ε)`-separated subset of the sample under
/// `d_H⁽ⁿ⁾(A, B) = max_{j<n} d_H(fʲA, fʲB)`.
///
/// Singletons come first, in the order and spacing used by
/// [`super::sep_count`] for the same cell, so the singleton part reproduces
/// the base count.
pub fn connected_envelope_sep(f: &PlMap, n: usize, eps: &Rational, sample: &ConnectedSample) -> Result<usize> {
    assert!(n >= 1, "counts need n >= 1");
    let tree = f.tree();
    let grid = cell_grid(f, n, eps, &(eps / Rational::from_integer(8.into())))?.0;
    let points = grid_exact(tree, rational::to_f64(&grid));
    let mut items: Vec<Subtree> = Vec::new();
    if sample.singletons {
        items.extend(points.iter().map(|p| Subtree::point(tree, p)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
    for _ in 0..sample.arcs {
        let a = points.choose(&mut rng).unwrap();
        let b = points.choose(&mut rng).unwrap();
        items.push(tree.arc(a, b));
    }
    let eps_f = rational::to_f64(eps);
    let mut net = SubtreeNet::new(f, n, eps.clone(), eps_f);
    for a in items {
        net.offer(a);
    }
    Ok(net.len())
}

/// 1-Lipschitz (for `d_H`) features of a subtree: nearest and farthest
/// distance from the root vertex.
fn features(tree: &MetricTree, a: &Subtree) -> (f64, f64) {
    let ends = a.ends_f64();
    let far = ends.iter().map(|&p| tree.root_distance_f64(p)).fold(0.0, f64::max);
    let root = tree.vertex_point(VertexId(0));
    let root = (root.edge(), rational::to_f64(root.t()));
    (a.distance_to_f64(tree, root), far)
}

struct SubtreeNet<'a> {
    f: &'a PlMap,
    n: usize,
    eps: Rational,
    eps_f: f64,
    starts: Vec<Subtree>,
    orbits: Vec<Vec<Subtree>>,
    index: HashMap<[i64; 4], Vec<usize>>,
}

impl<'a> SubtreeNet<'a> {
    fn new(f: &'a PlMap, n: usize, eps: Rational, eps_f: f64) -> Self {
        SubtreeNet { f, n, eps, eps_f, starts: Vec::new(), orbits: Vec::new(), index: HashMap::new() }
    }

    fn key(&self, orbit: &[Subtree]) -> [i64; 4] {
        let tree = self.f.tree();
        let size = self.eps_f * (1.0 + 1e-9);
        let (a, b) = features(tree, &orbit[0]);
        let (c, d) = features(tree, &orbit[self.n - 1]);
        [a, b, c, d].map(|x| (x / size).floor() as i64)
    }

    fn offer(&mut self, a: Subtree) -> bool {
        let mut orbit = Vec::with_capacity(self.n);
        orbit.push(a);
        for _ in 1..self.n {
            let next = self.f.image_subtree(orbit.last().unwrap());
            orbit.push(next);
        }
        let key = self.key(&orbit);
        for d0 in -1..=1 {
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    for d3 in -1..=1 {
                        let probe = [key[0] + d0, key[1] + d1, key[2] + d2, key[3] + d3];
                        let Some(ids) = self.index.get(&probe) else { continue };
                        for &id in ids {
                            if !self.apart(&orbit, &self.orbits[id]) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        self.index.entry(key).or_default().push(self.orbits.len());
        self.starts.push(orbit[0].clone());
        self.orbits.push(orbit);
        true
    }

    /// `d_H⁽ⁿ⁾ > ε`, screened in floating point and settled exactly when close.
    fn apart(&self, a: &[Subtree], b: &[Subtree]) -> bool {
        let tree = self.f.tree();
        let mut unsure = Vec::new();
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            let d = tree.hausdorff_f64(x, y);
            if d > self.eps_f * (1.0 + 1e-9) + 1e-12 {
                return true;
            }
            if d >= self.eps_f * (1.0 - 1e-9) - 1e-12 {
                unsure.push(j);
            }
        }
        unsure.into_iter().any(|j| tree.hausdorff(&a[j], &b[j]) > self.eps)
    }

    fn len(&self) -> usize {
        self.starts.len()
    }
}

/// `ln` of the number of subtrees whose ends lie on the grid of spacing `h`
/// (per edge: empty, or an interval between grid points). Every subtree is
/// within `d_H ≤ h` of one of them.
pub fn hyperspace_net_size(tree: &MetricTree, h: f64) -> f64 {
    tree.edge_ids()
        .map(|e| {
            let m = (tree.length_f64(e) / h).ceil().max(1.0) + 1.0;
            (m * (m + 1.0) / 2.0 + 1.0).ln()
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeCell {
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub eps: Rational,
    /// `N₁(ε) = K`.
    pub n1: usize,
    /// `N₂(ε)`: size of the cover of `T` by continua of diameter `< ε`.
    pub n2: usize,
    pub sep_lb: usize,
    /// `sep_lb` was computed on a grid fine enough to resolve the cell.
    pub resolved: bool,
    /// `ln` of the `(n, 𝓕, ε/2)`-spanning net size.
    pub log_span_ub: f64,
    /// `N₁·ln sep(n, f, ε)`.
    pub lower: f64,
    /// `N₂·ln span(n, 𝓕, ε/2)`.
    pub upper: f64,
    /// Growth of `lower` per step since the previous resolved entry.
    pub rate_lb: Option<f64>,
    /// Growth of `upper` per step since the previous resolved entry.
    pub rate_ub: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeBounds {
    pub cells: Vec<EnvelopeCell>,
    pub notes: Vec<String>,
}

impl EnvelopeBounds {
    pub fn cell(&self, n: usize, eps: &Rational) -> Option<&EnvelopeCell> {
        self.cells.iter().find(|c| c.n == n && &c.eps == eps)
    }

    /// Last resolved ladder entry for `eps`.
    pub fn tail(&self, eps: &Rational) -> Option<&EnvelopeCell> {
        self.cells.iter().filter(|c| &c.eps == eps && c.resolved).max_by_key(|c| c.n)
    }
}

/// Bounds on `log sep(n, F, ε)` for the functional envelope:
/// `N₁·log sep(n, f, ε) ≤ log sep(n, F, ε) ≤ N₂·log span(n, 𝓕, ε/2)`.
pub fn envelope_entropy_bounds(f: &PlMap, n_max: usize, eps_list: &[Rational]) -> Result<EnvelopeBounds> {
    let tree = f.tree();
    let ladder = n_ladder(n_max);
    let jobs: Vec<(usize, usize)> =
        (0..eps_list.len()).flat_map(|i| ladder.iter().map(move |&n| (i, n))).collect();
    let mut cells: Vec<EnvelopeCell> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let eps = &eps_list[i];
            let n1 = phi_width(eps)?;
            let n2 = cover_by_continua(tree, eps)?.len();
            let (grid, resolved) = cell_grid(f, n, eps, &(eps / Rational::from_integer(8.into())))?;
            let sep_lb = super::sep_count(f, n, eps, &grid)?;
            let h = rational::to_f64(eps) / 2.0 / counts::expansion(f, n)?;
            let log_span_ub = hyperspace_net_size(tree, h);
            Ok(EnvelopeCell {
                n,
                eps: eps.clone(),
                n1,
                n2,
                sep_lb,
                resolved,
                log_span_ub,
                lower: n1 as f64 * (sep_lb as f64).ln(),
                upper: n2 as f64 * log_span_ub,
                rate_lb: None,
                rate_ub: None,
            })
        })
        .collect::<Result<_>>()?;
    for eps in eps_list {
        let mut prev: Option<(usize, f64, f64)> = None;
        for c in cells.iter_mut().filter(|c| &c.eps == eps && c.resolved) {
            if let Some((pn, pl, pu)) = prev {
                let dn = (c.n - pn) as f64;
                c.rate_lb = Some((c.lower - pl) / dn);
                c.rate_ub = Some((c.upper - pu) / dn);
            }
            prev = Some((c.n, c.lower, c.upper));
        }
    }
    let notes = vec![
        "N2 counts a constructive cover, not a minimal one, so the upper bound may be loose".into(),
        "span(n, F_con, eps/2) is bounded by a net of grid subtrees with Lipschitz slack".into(),
    ];
    Ok(EnvelopeBounds { cells, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::examples::*;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::*;

    #[test]
    fn phi_width_examples() {
        assert_eq!(phi_width(&rat(1, 16)).unwrap(), 7);
        assert_eq!(phi_width(&rat(1, 4)).unwrap(), 1);
        assert!(matches!(phi_width(&rat(1, 3)), Err(Error::EpsilonTooLarge)));
    }

    #[test]
    fn phi_graph_is_a_valid_multimap() {
        let t = interval();
        let ys = [ipt(&t, 1, 4), ipt(&t, 3, 4), ipt(&t, 0, 1)];
        let g = MultiMapGraph::phi(&t, EdgeId(0), &ys);
        let checked = MultiMapGraph::new(&t, g.blocks().to_vec()).unwrap();
        assert_eq!(checked, g);
        let gap = vec![(t.arc(&ipt(&t, 0, 1), &ipt(&t, 1, 2)), Subtree::whole(&t))];
        assert!(MultiMapGraph::new(&t, gap).is_err());
    }

    #[test]
    fn graph_distance_decisions() {
        let t = interval();
        let a = MultiMapGraph::phi(&t, EdgeId(0), &[ipt(&t, 1, 4), ipt(&t, 3, 4), ipt(&t, 0, 1)]);
        let b = MultiMapGraph::phi(&t, EdgeId(0), &[ipt(&t, 1, 4), ipt(&t, 1, 2), ipt(&t, 0, 1)]);
        assert!(a.within(&a, &t, &int(0)));
        // the middle values differ by 1/4, but the vertical segments at 1/3
        // and 2/3 are only 1/6 away horizontally from the middle third
        assert!(a.within(&b, &t, &rat(1, 6)));
        assert!(!a.within(&b, &t, &rat(1, 7)));
        assert!(a.within(&b, &t, &rat(1, 4)));
    }

    #[test]
    fn single_point_family() {
        let t = interval();
        let f = PlMap::constant(&t, &ipt(&t, 1, 2));
        // a constant map separates nothing after one step, but F is taken at n = 1
        let fam = envelope_sep_family(&f, 1, &rat(1, 4), EdgeId(0)).unwrap();
        assert_eq!(fam.k, 1);
        assert_eq!(fam.claimed_count, BigUint::from(fam.points.len()));
        let one = PhiFamily { points: vec![ipt(&t, 0, 1)], claimed_count: BigUint::one(), ..fam };
        assert!(one.sample_pairs(5, 1).is_empty());
    }

    #[test]
    fn tent_family_pairs_are_separated() {
        let f = tent();
        let fam = envelope_sep_family(&f, 3, &rat(1, 8), EdgeId(0)).unwrap();
        assert_eq!(fam.k, 3);
        assert_eq!(fam.claimed_count, BigUint::from(fam.points.len()).pow(3));
        let pairs = fam.sample_pairs(20, 7);
        let check = fam.verify_pairs(&f, &pairs);
        assert_eq!(check.separated, 20);
    }

    #[test]
    fn singletons_reproduce_base_counts() {
        for f in [tent(), half()] {
            for (n, eps) in [(1, rat(1, 8)), (4, rat(1, 16)), (6, rat(1, 8))] {
                let grid = cell_grid(&f, n, &eps, &(&eps / int(8))).unwrap().0;
                let base = super::super::sep_count(&f, n, &eps, &grid).unwrap();
                let env = connected_envelope_sep(&f, n, &eps, &ConnectedSample::singletons_only()).unwrap();
                assert_eq!(env, base, "n = {n}");
            }
        }
    }

    #[test]
    fn identity_singletons_are_a_static_packing() {
        let t = interval();
        let id = PlMap::identity(&t);
        let count = connected_envelope_sep(&id, 5, &rat(1, 4), &ConnectedSample::singletons_only()).unwrap();
        assert_eq!(count, 4);
        let with_arcs =
            connected_envelope_sep(&id, 5, &rat(1, 4), &ConnectedSample { singletons: true, arcs: 50, seed: 3 })
                .unwrap();
        assert!(with_arcs >= count);
    }

    #[test]
    fn constant_map_envelope_lower_bound_is_flat() {
        let t = interval();
        let f = PlMap::constant(&t, &ipt(&t, 1, 2));
        let b = envelope_entropy_bounds(&f, 8, &[rat(1, 8)]).unwrap();
        for c in &b.cells {
            if let Some(r) = c.rate_lb {
                assert_eq!(r, 0.0);
            }
        }
    }

    #[test]
    fn half_map_upper_rates_vanish() {
        let b = envelope_entropy_bounds(&half(), 16, &[rat(1, 16), rat(1, 64)]).unwrap();
        for eps in [rat(1, 16), rat(1, 64)] {
            assert_eq!(b.tail(&eps).unwrap().rate_ub, Some(0.0));
        }
    }

    #[test]
    fn hyperspace_net_grows_with_resolution() {
        let t = interval();
        assert!(hyperspace_net_size(&t, 0.01) > hyperspace_net_size(&t, 0.1));
        // 3 grid points: 6 intervals plus the empty choice
        assert!((hyperspace_net_size(&t, 0.5) - 7f64.ln()).abs() < 1e-12);
    }
}
