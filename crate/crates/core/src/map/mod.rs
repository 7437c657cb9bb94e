//! Continuous piecewise-linear self-maps of a metric tree.

mod fixed;
mod induced;

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::{subtree::hull_into, EdgeId, MetricTree, Seg, Subtree, TreePoint, VertexId};

pub use fixed::{PeriodicOrbit, PeriodicSearch, PERIOD_CAP};
pub use induced::Restriction;

/// Default cap on the total number of breakpoints produced by composition.
pub const BREAKPOINT_BUDGET: usize = 1_000_000;

/// One linear piece: the map sends `[lo, hi]` on its edge onto the arc
/// `start → end` at constant speed.
#[derive(Clone, Debug)]
pub struct Piece {
    pub lo: Rational,
    pub hi: Rational,
    pub start: TreePoint,
    pub end: TreePoint,
    pub segs: Vec<Seg>,
    /// Arc length of the image.
    pub len: Rational,
}

impl Piece {
    /// Arc position reached at edge parameter `t` (clamped to the piece).
    pub fn arc_position(&self, t: &Rational) -> Rational {
        if self.len.is_zero() {
            return Rational::zero();
        }
        (t - &self.lo) / (&self.hi - &self.lo) * &self.len
    }

    /// Edge parameter at which the image reaches arc position `u`.
    pub fn param_at(&self, u: &Rational) -> Rational {
        &self.lo + u / &self.len * (&self.hi - &self.lo)
    }

    /// Expansion factor: image length over domain length.
    pub fn slope(&self, tree: &MetricTree, e: EdgeId) -> Rational {
        &self.len / ((&self.hi - &self.lo) * tree.length(e))
    }
}

#[derive(Clone, Debug)]
struct PieceF64 {
    start: (EdgeId, f64),
    /// (edge, from, to, arc length)
    segs: Vec<(EdgeId, f64, f64, f64)>,
    len: f64,
}

#[derive(Clone, Debug)]
struct EdgeMap {
    ts: Vec<Rational>,
    images: Vec<TreePoint>,
    pieces: Vec<Piece>,
    ts_f64: Vec<f64>,
    pieces_f64: Vec<PieceF64>,
}

impl EdgeMap {
    fn build(tree: &MetricTree, ts: Vec<Rational>, images: Vec<TreePoint>) -> Self {
        let mut pieces = Vec::with_capacity(ts.len() - 1);
        let mut pieces_f64 = Vec::with_capacity(ts.len() - 1);
        for i in 0..ts.len() - 1 {
            let segs = tree.path(&images[i], &images[i + 1]);
            let len = segs.iter().fold(Rational::zero(), |acc, s| acc + &s.length);
            pieces_f64.push(PieceF64 {
                start: to_f64_point(&images[i]),
                segs: segs
                    .iter()
                    .map(|s| (s.edge, crate::rational::to_f64(&s.from), crate::rational::to_f64(&s.to), crate::rational::to_f64(&s.length)))
                    .collect(),
                len: crate::rational::to_f64(&len),
            });
            pieces.push(Piece {
                lo: ts[i].clone(),
                hi: ts[i + 1].clone(),
                start: images[i].clone(),
                end: images[i + 1].clone(),
                segs,
                len,
            });
        }
        let ts_f64 = ts.iter().map(crate::rational::to_f64).collect();
        EdgeMap { ts, images, pieces, ts_f64, pieces_f64 }
    }

    fn piece_index(&self, t: &Rational) -> usize {
        let i = self.ts.partition_point(|x| x <= t);
        i.clamp(1, self.ts.len() - 1) - 1
    }
}

fn to_f64_point(p: &TreePoint) -> (EdgeId, f64) {
    (p.edge(), crate::rational::to_f64(p.t()))
}

/// A continuous piecewise-linear map `f: T → T`.
#[derive(Clone, Debug)]
pub struct PlMap {
    tree: MetricTree,
    edges: Vec<EdgeMap>,
}

impl PartialEq for PlMap {
    fn eq(&self, other: &Self) -> bool {
        self.tree == other.tree
            && self.edges.iter().zip(&other.edges).all(|(a, b)| a.ts == b.ts && a.images == b.images)
    }
}

impl Eq for PlMap {}

impl PlMap {
    /// Builds a map from per-edge breakpoint tables `(t, f(t))`.
    ///
    /// Each table must start at `t = 0`, end at `t = 1` and be strictly
    /// increasing; images of shared vertices must agree.
    pub fn new(tree: MetricTree, table: Vec<Vec<(Rational, TreePoint)>>) -> Result<Self> {
        if table.len() != tree.edge_count() {
            return Err(Error::InvalidMap(format!(
                "expected breakpoints for {} edges, got {}",
                tree.edge_count(),
                table.len()
            )));
        }
        let mut vertex_image: HashMap<VertexId, TreePoint> = HashMap::new();
        let mut edges = Vec::with_capacity(table.len());
        for (i, rows) in table.into_iter().enumerate() {
            let e = EdgeId(i);
            if rows.len() < 2 {
                return Err(Error::InvalidMap(format!("edge {i} needs at least two breakpoints")));
            }
            if !rows[0].0.is_zero() || !rows[rows.len() - 1].0.is_one() {
                return Err(Error::InvalidMap(format!("breakpoints of edge {i} must span [0, 1]")));
            }
            if rows.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::InvalidMap(format!("breakpoints of edge {i} are not increasing")));
            }
            let mut ts = Vec::with_capacity(rows.len());
            let mut images = Vec::with_capacity(rows.len());
            for (t, img) in rows {
                let img = tree.point(img.edge(), img.t().clone())?;
                ts.push(t);
                images.push(img);
            }
            let ends = [(tree.edge(e).tail, &images[0]), (tree.edge(e).head, &images[images.len() - 1])];
            for (v, img) in ends {
                match vertex_image.get(&v) {
                    Some(prev) if prev != img => {
                        return Err(Error::InvalidMap(format!(
                            "discontinuous at vertex {}: {} vs {}",
                            tree.vertex_name(v),
                            prev,
                            img
                        )))
                    }
                    Some(_) => {}
                    None => {
                        vertex_image.insert(v, img.clone());
                    }
                }
            }
            edges.push(EdgeMap::build(&tree, ts, images));
        }
        Ok(PlMap { tree, edges })
    }

    /// Map on a single-edge tree given as `(t, f(t))` pairs in `[0, 1]`.
    pub fn on_interval(tree: MetricTree, table: &[(Rational, Rational)]) -> Result<Self> {
        if tree.edge_count() != 1 {
            return Err(Error::InvalidMap("tree is not a single edge".into()));
        }
        let rows = table
            .iter()
            .map(|(t, y)| Ok((t.clone(), tree.point(EdgeId(0), y.clone())?)))
            .collect::<Result<Vec<_>>>()?;
        PlMap::new(tree, vec![rows])
    }

    pub fn identity(tree: &MetricTree) -> Self {
        let table = tree
            .edge_ids()
            .map(|e| {
                vec![
                    (Rational::zero(), tree.canonical(e, Rational::zero())),
                    (Rational::one(), tree.canonical(e, Rational::one())),
                ]
            })
            .collect();
        PlMap::new(tree.clone(), table).expect("identity is valid")
    }

    pub fn constant(tree: &MetricTree, p: &TreePoint) -> Self {
        let table = tree
            .edge_ids()
            .map(|_| vec![(Rational::zero(), p.clone()), (Rational::one(), p.clone())])
            .collect();
        PlMap::new(tree.clone(), table).expect("constant map is valid")
    }

    pub fn tree(&self) -> &MetricTree {
        &self.tree
    }

    pub fn breakpoints(&self, e: EdgeId) -> &[Rational] {
        &self.edges[e.0].ts
    }

    pub fn breakpoint_images(&self, e: EdgeId) -> &[TreePoint] {
        &self.edges[e.0].images
    }

    pub fn pieces(&self, e: EdgeId) -> &[Piece] {
        &self.edges[e.0].pieces
    }

    pub fn breakpoint_count(&self) -> usize {
        self.edges.iter().map(|m| m.ts.len()).sum()
    }

    pub fn piece_count(&self) -> usize {
        self.edges.iter().map(|m| m.pieces.len()).sum()
    }

    /// Breakpoint table in the form accepted by [`PlMap::new`].
    pub fn table(&self) -> Vec<Vec<(Rational, TreePoint)>> {
        self.edges
            .iter()
            .map(|m| m.ts.iter().cloned().zip(m.images.iter().cloned()).collect())
            .collect()
    }

    pub fn evaluate(&self, x: &TreePoint) -> TreePoint {
        let m = &self.edges[x.edge().0];
        let piece = &m.pieces[m.piece_index(x.t())];
        if piece.len.is_zero() {
            return piece.start.clone();
        }
        let u = piece.arc_position(x.t());
        self.tree.point_along(&piece.start, &piece.segs, &u)
    }

    /// Checked evaluation of a point that may come from elsewhere.
    pub fn evaluate_checked(&self, x: &TreePoint) -> Result<TreePoint> {
        let p = self.tree.point(x.edge(), x.t().clone())?;
        Ok(self.evaluate(&p))
    }

    /// Floating-point evaluation of `(edge, t)`.
    pub fn evaluate_f64(&self, x: (EdgeId, f64)) -> (EdgeId, f64) {
        let m = &self.edges[x.0 .0];
        let t = x.1;
        let i = m.ts_f64.partition_point(|&s| s <= t).clamp(1, m.ts_f64.len() - 1) - 1;
        let piece = &m.pieces_f64[i];
        if piece.segs.is_empty() {
            return piece.start;
        }
        let frac = ((t - m.ts_f64[i]) / (m.ts_f64[i + 1] - m.ts_f64[i])).clamp(0.0, 1.0);
        let mut u = frac * piece.len;
        let last = piece.segs.len() - 1;
        for (k, &(e, from, to, l)) in piece.segs.iter().enumerate() {
            if u <= l || k == last {
                let s = if l > 0.0 { (u / l).min(1.0) } else { 1.0 };
                return (e, from + (to - from) * s);
            }
            u -= l;
        }
        unreachable!()
    }

    pub fn orbit(&self, x: &TreePoint, n: usize) -> Vec<TreePoint> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(x.clone());
        for _ in 0..n {
            let next = self.evaluate(out.last().unwrap());
            out.push(next);
        }
        out
    }

    /// Exact image `f(A)`.
    pub fn image_subtree(&self, a: &Subtree) -> Subtree {
        let mut parts = vec![None; self.tree.edge_count()];
        for e in a.edges() {
            let (lo, hi) = a.part(e).unwrap();
            let m = &self.edges[e.0];
            let first = m.piece_index(lo);
            let last = m.piece_index(hi);
            for piece in &m.pieces[first..=last] {
                let l = lo.max(&piece.lo);
                let h = hi.min(&piece.hi);
                if l > h {
                    continue;
                }
                self.hull_piece_image(&mut parts, e, piece, l, h);
            }
        }
        Subtree::from_hull(&self.tree, parts)
    }

    fn hull_piece_image(
        &self,
        parts: &mut [Option<(Rational, Rational)>],
        e: EdgeId,
        piece: &Piece,
        l: &Rational,
        h: &Rational,
    ) {
        let _ = e;
        if piece.len.is_zero() {
            hull_into(parts, piece.start.edge(), piece.start.t(), piece.start.t());
            return;
        }
        let u0 = piece.arc_position(l);
        let u1 = piece.arc_position(h);
        let mut cum = Rational::zero();
        for seg in &piece.segs {
            let s0 = &cum;
            let s1 = &cum + &seg.length;
            let a = u0.clone().max(s0.clone());
            let b = u1.clone().min(s1.clone());
            if a <= b {
                let len = self.tree.length(seg.edge);
                let dir = if seg.to >= seg.from { Rational::one() } else { -Rational::one() };
                let ta = &seg.from + &dir * (&a - s0) / len;
                let tb = &seg.from + &dir * (&b - s0) / len;
                let (x, y) = if ta <= tb { (ta, tb) } else { (tb, ta) };
                hull_into(parts, seg.edge, &x, &y);
            }
            cum = s1;
        }
    }

    /// Largest expansion factor over all pieces.
    pub fn lipschitz(&self) -> Rational {
        self.tree
            .edge_ids()
            .flat_map(|e| self.edges[e.0].pieces.iter().map(move |p| p.slope(&self.tree, e)))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &PlMap) -> Result<PlMap> {
        self.compose_with_budget(g, BREAKPOINT_BUDGET)
    }

    pub fn compose_with_budget(&self, g: &PlMap, budget: usize) -> Result<PlMap> {
        if self.tree != g.tree {
            return Err(Error::DomainMismatch);
        }
        let tree = &self.tree;
        let mut total = 0usize;
        let mut edges = Vec::with_capacity(tree.edge_count());
        for e in tree.edge_ids() {
            let gm = &g.edges[e.0];
            let mut rows: Vec<(Rational, TreePoint, bool)> = vec![(gm.ts[0].clone(), self.evaluate(&gm.images[0]), true)];
            for piece in &gm.pieces {
                if !piece.len.is_zero() {
                    let mut cum = Rational::zero();
                    for (k, seg) in piece.segs.iter().enumerate() {
                        let fm = &self.edges[seg.edge.0];
                        let seg_len = tree.length(seg.edge);
                        let between: Vec<usize> = if seg.from < seg.to {
                            let a = fm.ts.partition_point(|t| t <= &seg.from);
                            let b = fm.ts.partition_point(|t| t < &seg.to);
                            (a..b).collect()
                        } else {
                            let a = fm.ts.partition_point(|t| t <= &seg.to);
                            let b = fm.ts.partition_point(|t| t < &seg.from);
                            (a..b).rev().collect()
                        };
                        for j in between {
                            let u = &cum + (&fm.ts[j] - &seg.from).abs() * seg_len;
                            rows.push((piece.param_at(&u), fm.images[j].clone(), false));
                        }
                        cum += &seg.length;
                        if k + 1 < piece.segs.len() {
                            let v = tree.canonical(seg.edge, seg.to.clone());
                            rows.push((piece.param_at(&cum), self.evaluate(&v), false));
                        }
                    }
                }
                rows.push((piece.hi.clone(), self.evaluate(&piece.end), true));
                if total + rows.len() > budget {
                    return Err(Error::BreakpointBudgetExceeded(budget));
                }
            }
            let (ts, images) = merge_collinear(tree, rows);
            total += ts.len();
            if total > budget {
                return Err(Error::BreakpointBudgetExceeded(budget));
            }
            edges.push(EdgeMap::build(tree, ts, images));
        }
        Ok(PlMap { tree: tree.clone(), edges })
    }

    /// `fⁿ`, with `f⁰` the identity.
    pub fn iterate(&self, n: usize) -> Result<PlMap> {
        self.iterate_with_budget(n, BREAKPOINT_BUDGET)
    }

    pub fn iterate_with_budget(&self, n: usize, budget: usize) -> Result<PlMap> {
        if n == 0 {
            return Ok(PlMap::identity(&self.tree));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose_with_budget(&acc, budget)?;
        }
        Ok(acc)
    }

    /// Same map with every removable breakpoint dropped.
    pub fn simplified(&self) -> PlMap {
        let edges = self
            .edges
            .iter()
            .map(|m| {
                let last = m.ts.len() - 1;
                let rows = m
                    .ts
                    .iter()
                    .zip(&m.images)
                    .enumerate()
                    .map(|(i, (t, p))| (t.clone(), p.clone(), i == 0 || i == last))
                    .collect();
                let (ts, images) = merge_collinear(&self.tree, rows);
                EdgeMap::build(&self.tree, ts, images)
            })
            .collect();
        PlMap { tree: self.tree.clone(), edges }
    }

    /// True when the two maps agree as functions.
    pub fn same_function(&self, other: &PlMap) -> bool {
        self.simplified() == other.simplified()
    }
}

/// Arc-length positions along a path where it enters and leaves `m`.
pub(crate) fn path_overlap(segs: &[Seg], m: &Subtree) -> Option<(Rational, Rational)> {
    let mut cum = Rational::zero();
    let mut range: Option<(Rational, Rational)> = None;
    for seg in segs {
        let start = cum.clone();
        cum += &seg.length;
        let Some((mlo, mhi)) = m.part(seg.edge) else { continue };
        let (slo, shi) = if seg.from <= seg.to { (&seg.from, &seg.to) } else { (&seg.to, &seg.from) };
        let a = slo.max(mlo);
        let b = shi.min(mhi);
        if a > b {
            continue;
        }
        let width = shi - slo;
        let to_u = |t: &Rational| {
            let frac = if seg.from <= seg.to { (t - &seg.from) / &width } else { (&seg.from - t) / &width };
            &start + frac * &seg.length
        };
        let (ua, ub) = (to_u(a), to_u(b));
        let (ua, ub) = if ua <= ub { (ua, ub) } else { (ub, ua) };
        range = Some(match range {
            None => (ua, ub),
            Some((x, y)) => (x.min(ua), y.max(ub)),
        });
    }
    range
}

/// Drops non-kept rows whose neighbours continue the same constant-speed
/// traversal.
fn merge_collinear(tree: &MetricTree, rows: Vec<(Rational, TreePoint, bool)>) -> (Vec<Rational>, Vec<TreePoint>) {
    let mut out: Vec<(Rational, TreePoint, bool)> = Vec::with_capacity(rows.len());
    for row in rows {
        if let Some(last) = out.last() {
            if last.0 == row.0 {
                continue;
            }
        }
        if out.len() >= 2 && !out[out.len() - 1].2 {
            let (a, b) = (&out[out.len() - 2], &out[out.len() - 1]);
            let dab = tree.distance(&a.1, &b.1);
            let dbc = tree.distance(&b.1, &row.1);
            let straight = &dab + &dbc == tree.distance(&a.1, &row.1);
            if straight && dab * (&row.0 - &b.0) == dbc * (&b.0 - &a.0) {
                out.pop();
            }
        }
        out.push(row);
    }
    out.into_iter().map(|(t, p, _)| (t, p)).unzip()
}


#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let t = interval();
        let f = tent();
        assert_eq!(f.evaluate(&ipt(&t, 1, 4)), ipt(&t, 1, 2));
        assert_eq!(f.evaluate(&ipt(&t, 5, 6)), ipt(&t, 1, 3));
        let id = PlMap::identity(&t);
        assert_eq!(id.evaluate(&ipt(&t, 3, 7)), ipt(&t, 3, 7));
        let tri = triod();
        let center = tri.vertex_point(VertexId(0));
        let c = PlMap::constant(&tri, &center);
        assert_eq!(c.evaluate(&leg(&tri, 2, 1, 3)), center);
    }

    #[test]
    fn rejects_discontinuous_table() {
        let tri = triod();
        let mut table = PlMap::identity(&tri).table();
        table[1][0].1 = leg(&tri, 0, 1, 2);
        assert!(matches!(PlMap::new(tri, table), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn image_examples() {
        let t = interval();
        let a = t.arc(&ipt(&t, 1, 4), &ipt(&t, 3, 4));
        assert_eq!(tent().image_subtree(&a), t.arc(&ipt(&t, 1, 2), &ipt(&t, 1, 1)));
        assert_eq!(PlMap::identity(&t).image_subtree(&a), a);
        let c = PlMap::constant(&t, &ipt(&t, 1, 3));
        assert!(c.image_subtree(&a).is_degenerate(&t));
    }

    #[test]
    fn second_iterate_of_tent() {
        let t = interval();
        let f2 = tent().iterate(2).unwrap();
        let e = EdgeId(0);
        assert_eq!(f2.breakpoints(e), &[int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)]);
        let imgs: Vec<_> = [0, 1, 0, 1, 0].iter().map(|&y| ipt(&t, y, 1)).collect();
        assert_eq!(f2.breakpoint_images(e), imgs.as_slice());
        assert_eq!(tent().iterate(0).unwrap(), PlMap::identity(&t));
    }

    #[test]
    fn compose_with_identity() {
        let tri = triod();
        let table = vec![
            vec![(int(0), leg(&tri, 1, 1, 2)), (int(1), leg(&tri, 2, 1, 1))],
            vec![(int(0), leg(&tri, 1, 1, 2)), (rat(1, 2), leg(&tri, 0, 1, 1)), (int(1), leg(&tri, 1, 1, 4))],
            vec![(int(0), leg(&tri, 1, 1, 2)), (int(1), leg(&tri, 0, 1, 2))],
        ];
        let f = PlMap::new(tri.clone(), table).unwrap();
        let id = PlMap::identity(&tri);
        assert_eq!(id.compose(&f).unwrap(), f);
        assert!(f.compose(&id).unwrap().same_function(&f));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(tent().iterate_with_budget(10, 100), Err(Error::BreakpointBudgetExceeded(100))));
    }

    #[test]
    fn f64_evaluation_tracks_exact() {
        let t = interval();
        let f = tent().iterate(3).unwrap();
        for k in 0..=64 {
            let x = ipt(&t, k, 64);
            let exact = f.evaluate(&x);
            let approx = f.evaluate_f64((x.edge(), k as f64 / 64.0));
            let d = t.distance_f64(approx, to_f64_point(&exact));
            assert!(d < 1e-12);
        }
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (0i64..=1000).prop_map(|n| rat(n, 1000))
    }

    proptest! {
        #[test]
        fn compose_commutes_with_evaluate(ts in proptest::collection::vec(arb_rational(), 20)) {
            let t = interval();
            let f = tent();
            let g = PlMap::on_interval(t.clone(), &[(int(0), rat(1, 3)), (rat(1, 3), int(1)), (int(1), int(0))]).unwrap();
            let fg = f.compose(&g).unwrap();
            for s in ts {
                let x = t.point(EdgeId(0), s).unwrap();
                prop_assert_eq!(fg.evaluate(&x), f.evaluate(&g.evaluate(&x)));
            }
        }

        #[test]
        fn image_contains_endpoint_arc(a in arb_rational(), b in arb_rational()) {
            let t = interval();
            let f = tent().iterate(3).unwrap();
            let x = t.point(EdgeId(0), a).unwrap();
            let y = t.point(EdgeId(0), b).unwrap();
            let img = f.image_subtree(&t.arc(&x, &y));
            prop_assert!(t.arc(&f.evaluate(&x), &f.evaluate(&y)).is_subset(&img));
        }
    }
}
