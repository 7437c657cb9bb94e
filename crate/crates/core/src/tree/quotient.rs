use num_traits::{One, Zero};

use super::{EdgeId, MetricTree, Subtree, TreePoint, VertexId};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// The factor tree `T/M` with `M` collapsed to a single vertex, together with
/// the canonical projection `π_M` and its inverse away from `M`.
#[derive(Clone, Debug)]
pub struct Quotient {
    tree: MetricTree,
    collapsed: VertexId,
    collapsed_set: Subtree,
    /// Per original edge: the closed parameter ranges outside `M` and the new edge for each.
    pieces: Vec<Vec<(Rational, Rational, EdgeId)>>,
    /// Per new edge: original edge and the parameter range it covers.
    origin: Vec<(EdgeId, Rational, Rational)>,
}

impl Quotient {
    pub fn new(tree: &MetricTree, m: &Subtree) -> Result<Self> {
        let mut names = Vec::new();
        let mut vmap = vec![None; tree.vertex_count()];
        let in_m: Vec<bool> = (0..tree.vertex_count())
            .map(|v| m.contains(tree, &tree.vertex_point(VertexId(v))))
            .collect();
        for v in 0..tree.vertex_count() {
            if !in_m[v] {
                vmap[v] = Some(names.len());
                names.push(tree.vertex_name(VertexId(v)).to_string());
            }
        }
        let mut collapsed_name = String::from("[M]");
        while names.contains(&collapsed_name) {
            collapsed_name.insert(0, '_');
        }
        let star = names.len();
        names.push(collapsed_name);
        let vertex = |v: VertexId| vmap[v.0].unwrap_or(star);

        let mut raw = Vec::new();
        let mut origin = Vec::new();
        let mut pieces = vec![Vec::new(); tree.edge_count()];
        let zero = Rational::zero();
        let one = Rational::one();
        for e in tree.edge_ids() {
            let edge = tree.edge(e);
            let len = tree.length(e);
            let mut add = |from: usize, to: usize, lo: Rational, hi: Rational, pieces: &mut Vec<Vec<_>>| {
                let id = EdgeId(raw.len());
                raw.push((from, to, (&hi - &lo) * len));
                origin.push((e, lo.clone(), hi.clone()));
                pieces[e.0].push((lo, hi, id));
            };
            match m.part(e) {
                None => add(vertex(edge.tail), vertex(edge.head), zero.clone(), one.clone(), &mut pieces),
                Some((lo, hi)) => {
                    if lo > &zero {
                        add(vertex(edge.tail), star, zero.clone(), lo.clone(), &mut pieces);
                    }
                    if hi < &one {
                        add(star, vertex(edge.head), hi.clone(), one.clone(), &mut pieces);
                    }
                }
            }
        }
        if raw.is_empty() {
            return Err(Error::DegenerateQuotient);
        }
        let qtree = MetricTree::new(names, raw)?;
        Ok(Quotient {
            tree: qtree,
            collapsed: VertexId(star),
            collapsed_set: m.clone(),
            pieces,
            origin,
        })
    }

    pub fn tree(&self) -> &MetricTree {
        &self.tree
    }

    pub fn collapsed_vertex(&self) -> VertexId {
        self.collapsed
    }

    pub fn collapsed_point(&self) -> TreePoint {
        self.tree.vertex_point(self.collapsed)
    }

    pub fn collapsed_set(&self) -> &Subtree {
        &self.collapsed_set
    }

    /// π_M.
    pub fn project(&self, original: &MetricTree, p: &TreePoint) -> TreePoint {
        if self.collapsed_set.contains(original, p) {
            return self.collapsed_point();
        }
        for (lo, hi, id) in &self.pieces[p.edge().0] {
            if lo <= p.t() && p.t() <= hi {
                let t = (p.t() - lo) / (hi - lo);
                return self.tree.canonical(*id, t);
            }
        }
        unreachable!("point outside M must lie in some surviving piece")
    }

    /// π_M⁻¹ for points other than the collapsed vertex.
    pub fn lift(&self, original: &MetricTree, q: &TreePoint) -> Option<TreePoint> {
        if self.tree.vertex_at(q) == Some(self.collapsed) {
            return None;
        }
        let (e, lo, hi) = &self.origin[q.edge().0];
        Some(original.canonical(*e, lo + q.t() * (hi - lo)))
    }

    /// Original edge and parameter range behind a quotient edge.
    pub fn origin(&self, e: EdgeId) -> (EdgeId, &Rational, &Rational) {
        let (o, lo, hi) = &self.origin[e.0];
        (*o, lo, hi)
    }

    /// π_M(A) for a subtree `A` of the original tree.
    pub fn project_subtree(&self, original: &MetricTree, a: &Subtree) -> Subtree {
        let mut parts = vec![None; self.tree.edge_count()];
        for e in a.edges() {
            let (alo, ahi) = a.part(e).unwrap();
            for (lo, hi, id) in &self.pieces[e.0] {
                let l = alo.max(lo);
                let h = ahi.min(hi);
                if l <= h {
                    let tl = (l - lo) / (hi - lo);
                    let th = (h - lo) / (hi - lo);
                    super::subtree::hull_into(&mut parts, *id, &tl, &th);
                }
            }
        }
        if a.intersects(&self.collapsed_set) {
            let c = self.collapsed_point();
            super::subtree::hull_into(&mut parts, c.edge(), c.t(), c.t());
        }
        let _ = original;
        Subtree::from_hull(&self.tree, parts)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn collapse_point_is_isometric() {
        let t = interval();
        let m = Subtree::point(&t, &ipt(&t, 1, 3));
        let q = Quotient::new(&t, &m).unwrap();
        assert_eq!(q.tree().total_length(), int(1));
        for (a, b) in [((0, 1), (1, 2)), ((1, 5), (4, 5)), ((1, 3), (1, 1))] {
            let x = ipt(&t, a.0, a.1);
            let y = ipt(&t, b.0, b.1);
            let (px, py) = (q.project(&t, &x), q.project(&t, &y));
            assert_eq!(q.tree().distance(&px, &py), t.distance(&x, &y));
            if px != q.collapsed_point() {
                assert_eq!(q.lift(&t, &px), Some(x));
            }
        }
    }

    #[test]
    fn collapse_subinterval() {
        let t = interval();
        let m = t.arc(&ipt(&t, 1, 4), &ipt(&t, 1, 2));
        let q = Quotient::new(&t, &m).unwrap();
        assert_eq!(q.tree().total_length(), rat(3, 4));
        assert_eq!(q.tree().edge_count(), 2);
        assert_eq!(q.project(&t, &ipt(&t, 1, 3)), q.collapsed_point());
    }

    #[test]
    fn collapse_leg_of_triod() {
        let tri = triod();
        let leg_a = Subtree::from_parts(&tri, vec![Some((int(0), int(1))), None, None]).unwrap();
        let q = Quotient::new(&tri, &leg_a).unwrap();
        assert_eq!(q.tree().total_length(), int(2));
        assert_eq!(q.tree().endpoints().len(), 2);
        // distance-nonincreasing on a grid sample
        let grid = tri.grid(&rat(1, 8)).unwrap();
        for x in &grid {
            for y in &grid {
                let d = q.tree().distance(&q.project(&tri, x), &q.project(&tri, y));
                assert!(d <= tri.distance(x, y));
            }
        }
    }

    #[test]
    fn collapse_everything_fails() {
        let t = interval();
        assert!(matches!(Quotient::new(&t, &Subtree::whole(&t)), Err(Error::DegenerateQuotient)));
    }
}
