use num_traits::{One, Zero};
use serde::Serialize;

use super::afp::certify_afp;
use crate::io::{serialize_point, serialize_points, serialize_subtree};
use crate::map::{path_overlap, PlMap};
use crate::rational::{self, Rational};
use crate::tree::{EdgeId, MetricTree, Subtree, TreePoint, VertexId};

/// Interval of edge parameters with open or closed ends.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Span {
    lo: Rational,
    lo_in: bool,
    hi: Rational,
    hi_in: bool,
}

impl Span {
    fn contains(&self, t: &Rational) -> bool {
        (&self.lo < t || (self.lo_in && &self.lo == t)) && (t < &self.hi || (self.hi_in && &self.hi == t))
    }
}

/// A relatively open connected subset of a tree, stored per edge. Ends
/// inside an edge are open; ends at vertices are closed exactly when the
/// vertex belongs to the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSubtree {
    parts: Vec<Option<Span>>,
}

impl OpenSubtree {
    pub fn contains(&self, tree: &MetricTree, p: &TreePoint) -> bool {
        let on = |e: EdgeId, t: &Rational| self.parts[e.0].as_ref().is_some_and(|s| s.contains(t));
        match tree.vertex_at(p) {
            Some(v) => tree.incident(v).iter().any(|&e| on(e, &tree.param_on(p, e).unwrap())),
            None => on(p.edge(), p.t()),
        }
    }

    pub fn closure(&self, tree: &MetricTree) -> Subtree {
        let parts = self.parts.iter().map(|s| s.as_ref().map(|s| (s.lo.clone(), s.hi.clone()))).collect();
        Subtree::from_parts(tree, parts).expect("open subtree has connected closure")
    }

    /// Points of the closure that are not in the set.
    pub fn boundary(&self, tree: &MetricTree) -> Vec<TreePoint> {
        let mut out: Vec<TreePoint> = Vec::new();
        for (i, s) in self.parts.iter().enumerate() {
            let Some(s) = s else { continue };
            for (t, inside) in [(&s.lo, s.lo_in), (&s.hi, s.hi_in)] {
                let p = tree.canonical(EdgeId(i), t.clone());
                if !inside && !self.contains(tree, &p) && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out.sort();
        out
    }

    /// `[s, y)` for an endpoint `s` and a point `y` on its edge.
    fn half_open(tree: &MetricTree, s: &TreePoint, y: &TreePoint) -> Self {
        let mut parts = vec![None; tree.edge_count()];
        let e = y.edge();
        let ts = tree.param_on(s, e).expect("s and y share an edge");
        parts[e.0] = Some(if ts.is_zero() {
            Span { lo: ts, lo_in: true, hi: y.t().clone(), hi_in: false }
        } else {
            Span { lo: y.t().clone(), lo_in: false, hi: ts, hi_in: true }
        });
        OpenSubtree { parts }
    }
}

/// `Comp(f⁻¹(B), s)`.
fn preimage_component(f: &PlMap, b: &OpenSubtree, s: &TreePoint) -> OpenSubtree {
    let tree = f.tree();
    let closure = b.closure(tree);
    let mut per_edge: Vec<Vec<Span>> = Vec::with_capacity(tree.edge_count());
    for e in tree.edge_ids() {
        let mut spans: Vec<Span> = Vec::new();
        for piece in f.pieces(e) {
            let span = if piece.len.is_zero() {
                b.contains(tree, &piece.start)
                    .then(|| Span { lo: piece.lo.clone(), lo_in: true, hi: piece.hi.clone(), hi_in: true })
            } else {
                path_overlap(&piece.segs, &closure).and_then(|(w0, w1)| {
                    let at = |w: &Rational| tree.point_along(&piece.start, &piece.segs, w);
                    let (in0, in1) = (b.contains(tree, &at(&w0)), b.contains(tree, &at(&w1)));
                    let (s0, s1) = (piece.param_at(&w0), piece.param_at(&w1));
                    (s0 < s1 || in0).then_some(Span { lo: s0, lo_in: in0, hi: s1, hi_in: in1 })
                })
            };
            let Some(span) = span else { continue };
            match spans.last_mut() {
                Some(last) if last.hi == span.lo && (last.hi_in || span.lo_in) => {
                    last.hi = span.hi;
                    last.hi_in = span.hi_in;
                }
                _ => spans.push(span),
            }
        }
        per_edge.push(spans);
    }

    // flood from the span containing s through shared included vertices
    let includes_vertex = |e: EdgeId, sp: &Span, v: VertexId| {
        let edge = tree.edge(e);
        (edge.tail == v && sp.lo.is_zero() && sp.lo_in) || (edge.head == v && sp.hi.is_one() && sp.hi_in)
    };
    let mut parts: Vec<Option<Span>> = vec![None; tree.edge_count()];
    let mut stack: Vec<(EdgeId, usize)> = Vec::new();
    let se = s.edge();
    if let Some(i) = per_edge[se.0].iter().position(|sp| sp.contains(s.t())) {
        stack.push((se, i));
    }
    while let Some((e, i)) = stack.pop() {
        if parts[e.0].is_some() {
            continue;
        }
        let sp = per_edge[e.0][i].clone();
        for v in [tree.edge(e).tail, tree.edge(e).head] {
            if !includes_vertex(e, &sp, v) {
                continue;
            }
            for &g in tree.incident(v) {
                if g == e || parts[g.0].is_some() {
                    continue;
                }
                if let Some(j) = per_edge[g.0].iter().position(|x| includes_vertex(g, x, v)) {
                    stack.push((g, j));
                }
            }
        }
        parts[e.0] = Some(sp);
    }
    OpenSubtree { parts }
}

#[derive(Clone, Debug, Serialize)]
pub struct BasinReport {
    #[serde(serialize_with = "serialize_point")]
    pub afp: TreePoint,
    /// Right end of the starting neighbourhood `[s, y)`.
    #[serde(serialize_with = "serialize_point")]
    pub y: TreePoint,
    #[serde(serialize_with = "serialize_subtree")]
    pub closure: Subtree,
    #[serde(serialize_with = "serialize_points")]
    pub boundary: Vec<TreePoint>,
    pub depth: usize,
    /// The preimage iteration reached a fixed set.
    pub stable: bool,
    #[serde(skip)]
    pub basin: OpenSubtree,
    /// Closures of the successive approximations.
    #[serde(skip)]
    pub approximations: Vec<Subtree>,
}

/// Approximates `IB(s) = Comp(⋃ f⁻ⁿ[s, y), s)` by at most `depth` preimage steps.
pub fn immediate_basin(f: &PlMap, s: &TreePoint, depth: usize) -> BasinReport {
    let tree = f.tree();
    let v = tree.vertex_at(s).expect("AFP is an endpoint");
    let e = tree.incident(v)[0];
    let far = tree.vertex_point(tree.other_end(e, v));
    let mut y = tree.point_along(s, &tree.path(s, &far), &(tree.length(e) / rational::int(2)));
    for _ in 0..20 {
        if certify_afp(f, s, &y) {
            break;
        }
        y = tree.point_along(s, &tree.path(s, &y), &(tree.distance(s, &y) / rational::int(2)));
    }
    let mut basin = OpenSubtree::half_open(tree, s, &y);
    let mut approximations = vec![basin.closure(tree)];
    let mut stable = false;
    let mut used = 0;
    while used < depth {
        let next = preimage_component(f, &basin, s);
        used += 1;
        if next == basin {
            stable = true;
            break;
        }
        basin = next;
        approximations.push(basin.closure(tree));
    }
    BasinReport {
        afp: s.clone(),
        y,
        closure: basin.closure(tree),
        boundary: basin.boundary(tree),
        depth: used,
        stable,
        basin,
        approximations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::find_afp;
    use crate::map::examples::*;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::*;

    #[test]
    fn half_map_basin_is_everything() {
        // 1 maps to 1/2, inside [0, 1), so the whole interval is attracted
        let t = interval();
        let r = immediate_basin(&half(), &ipt(&t, 0, 1), 16);
        assert!(r.stable);
        assert_eq!(r.closure, Subtree::whole(&t));
        assert!(r.boundary.is_empty());
        assert_eq!(r.y, ipt(&t, 1, 2));
    }

    #[test]
    fn constant_map_basin() {
        let tri = triod();
        let s = leg(&tri, 0, 1, 1);
        let r = immediate_basin(&PlMap::constant(&tri, &s), &s, 8);
        assert!(r.stable);
        assert_eq!(r.closure, Subtree::whole(&tri));
        assert!(r.boundary.is_empty());
    }

    #[test]
    fn repelling_leaf_is_left_out() {
        // leaf d is fixed and repelling; everything else drains into leaf a
        let tri = triod();
        let table = vec![
            vec![(int(0), leg(&tri, 0, 1, 4)), (int(1), leg(&tri, 0, 1, 1))],
            vec![(int(0), leg(&tri, 0, 1, 4)), (int(1), leg(&tri, 0, 1, 2))],
            vec![(int(0), leg(&tri, 0, 1, 4)), (rat(3, 4), leg(&tri, 2, 1, 2)), (int(1), leg(&tri, 2, 1, 1))],
        ];
        let f = PlMap::new(tri.clone(), table).unwrap();
        let s = find_afp(&f).unwrap().afp;
        assert_eq!(s, leg(&tri, 0, 1, 1));
        let r = immediate_basin(&f, &s, 64);
        let d = leg(&tri, 2, 1, 1);
        assert!(!r.basin.contains(&tri, &d));
        assert!(r.basin.contains(&tri, &leg(&tri, 1, 1, 1)));
        assert!(r.basin.contains(&tri, &leg(&tri, 2, 1, 2)));
        // the basin creeps towards d without reaching it
        assert!(!r.stable);
        for w in r.approximations.windows(2) {
            assert!(f.image_subtree(&w[0]).is_subset(&w[1]));
            assert!(w[0].is_subset(&w[1]));
        }
    }

    #[test]
    fn boundary_creeps_along_preimages() {
        let tri = triod();
        let table = vec![
            vec![(int(0), leg(&tri, 0, 1, 4)), (int(1), leg(&tri, 0, 1, 1))],
            vec![(int(0), leg(&tri, 0, 1, 4)), (int(1), leg(&tri, 0, 1, 2))],
            vec![(int(0), leg(&tri, 0, 1, 4)), (rat(3, 4), leg(&tri, 2, 1, 2)), (int(1), leg(&tri, 2, 1, 1))],
        ];
        let f = PlMap::new(tri.clone(), table).unwrap();
        let s = leg(&tri, 0, 1, 1);
        let d = leg(&tri, 2, 1, 1);
        let short = immediate_basin(&f, &s, 20);
        let long = immediate_basin(&f, &s, 21);
        assert_eq!(short.boundary.len(), 1);
        assert_eq!(long.boundary.len(), 1);
        assert_eq!(f.evaluate(&long.boundary[0]), short.boundary[0]);
        // slope 2 near d halves the gap at every extra level
        assert_eq!(tri.distance(&long.boundary[0], &d) * int(2), tri.distance(&short.boundary[0], &d));
    }
}
