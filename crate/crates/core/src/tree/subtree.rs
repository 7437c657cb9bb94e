use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{EdgeId, MetricTree, TreePoint, UnionFind, VertexId};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

type Part = Option<(Rational, Rational)>;

/// A closed connected subset of a tree, stored as its intersection with every
/// edge.
///
/// The intersection of a subcontinuum with an edge is a closed interval (or
/// empty), so the per-edge list determines the set. A vertex that belongs to
/// the subtree shows up on every incident edge, possibly as a degenerate
/// interval, which makes the representation canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subtree {
    parts: Vec<Part>,
}

pub(crate) fn hull_into(parts: &mut [Part], e: EdgeId, lo: &Rational, hi: &Rational) {
    match &mut parts[e.0] {
        Some((a, b)) => {
            if lo < a {
                *a = lo.clone();
            }
            if hi > b {
                *b = hi.clone();
            }
        }
        slot @ None => *slot = Some((lo.clone(), hi.clone())),
    }
}

impl Subtree {
    pub fn whole(tree: &MetricTree) -> Self {
        Subtree { parts: vec![Some((Rational::zero(), Rational::one())); tree.edge_count()] }
    }

    pub fn point(tree: &MetricTree, p: &TreePoint) -> Self {
        let mut parts = vec![None; tree.edge_count()];
        parts[p.edge.0] = Some((p.t.clone(), p.t.clone()));
        Self::from_hull(tree, parts)
    }

    /// Builds a subtree from per-edge intervals known to describe a connected
    /// set; each interval is extended to any vertex the set is known to contain.
    pub(crate) fn from_hull(tree: &MetricTree, mut parts: Vec<Part>) -> Self {
        let included = included_vertices(tree, &parts);
        for (v, inc) in included.iter().enumerate() {
            if !inc {
                continue;
            }
            for &e in tree.incident(VertexId(v)) {
                let end = end_param(tree, e, VertexId(v));
                hull_into(&mut parts, e, &end, &end);
            }
        }
        Subtree { parts }
    }

    /// Validates user-supplied per-edge intervals. Missing degenerate entries at
    /// included vertices are filled in; anything disconnected is rejected.
    pub fn from_parts(tree: &MetricTree, parts: Vec<Part>) -> Result<Self> {
        if parts.len() != tree.edge_count() {
            return Err(Error::InvalidSubtree("wrong number of edges".into()));
        }
        let mut nonempty = 0usize;
        for p in parts.iter().flatten() {
            nonempty += 1;
            if p.0 > p.1 || p.0 < Rational::zero() || p.1 > Rational::one() {
                return Err(Error::InvalidSubtree(format!(
                    "bad interval [{}, {}]",
                    rational::format(&p.0),
                    rational::format(&p.1)
                )));
            }
        }
        if nonempty == 0 {
            return Err(Error::InvalidSubtree("empty".into()));
        }
        let included = included_vertices(tree, &parts);
        for (v, inc) in included.iter().enumerate() {
            if !inc {
                continue;
            }
            for &e in tree.incident(VertexId(v)) {
                let end = end_param(tree, e, VertexId(v));
                if let Some((lo, hi)) = &parts[e.0] {
                    if !(lo <= &end && &end <= hi) {
                        return Err(Error::InvalidSubtree(format!(
                            "edge {} does not reach included vertex {}",
                            e.0,
                            tree.vertex_name(VertexId(v))
                        )));
                    }
                }
            }
        }
        let candidate = Self::from_hull(tree, parts);
        candidate.check_connected(tree)?;
        Ok(candidate)
    }

    fn check_connected(&self, tree: &MetricTree) -> Result<()> {
        let entries: Vec<EdgeId> = self.edges().collect();
        let floating = entries
            .iter()
            .filter(|e| {
                let (lo, hi) = self.parts[e.0].as_ref().unwrap();
                !lo.is_zero() && !hi.is_one()
            })
            .count();
        if floating > 0 {
            return if entries.len() == 1 {
                Ok(())
            } else {
                Err(Error::InvalidSubtree("disconnected".into()))
            };
        }
        let included = included_vertices(tree, &self.parts);
        let mut uf = UnionFind::new(tree.vertex_count());
        for e in &entries {
            let (lo, hi) = self.parts[e.0].as_ref().unwrap();
            if lo.is_zero() && hi.is_one() {
                let edge = tree.edge(*e);
                uf.union(edge.tail.0, edge.head.0);
            }
        }
        let mut root = None;
        for (v, inc) in included.iter().enumerate() {
            if !inc {
                continue;
            }
            let r = uf.find(v);
            if *root.get_or_insert(r) != r {
                return Err(Error::InvalidSubtree("disconnected".into()));
            }
        }
        Ok(())
    }

    pub fn part(&self, e: EdgeId) -> Option<&(Rational, Rational)> {
        self.parts[e.0].as_ref()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.parts.iter().enumerate().filter(|(_, p)| p.is_some()).map(|(i, _)| EdgeId(i))
    }

    pub fn contains(&self, tree: &MetricTree, p: &TreePoint) -> bool {
        let _ = tree;
        match &self.parts[p.edge.0] {
            Some((lo, hi)) => lo <= &p.t && &p.t <= hi,
            None => false,
        }
    }

    pub fn is_subset(&self, other: &Subtree) -> bool {
        self.parts.iter().zip(&other.parts).all(|(a, b)| match (a, b) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((a0, a1)), Some((b0, b1))) => b0 <= a0 && a1 <= b1,
        })
    }

    pub fn intersection(&self, other: &Subtree) -> Option<Subtree> {
        let parts: Vec<Part> = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| match (a, b) {
                (Some((a0, a1)), Some((b0, b1))) => {
                    let lo = a0.max(b0).clone();
                    let hi = a1.min(b1).clone();
                    (lo <= hi).then_some((lo, hi))
                }
                _ => None,
            })
            .collect();
        parts.iter().any(Option::is_some).then_some(Subtree { parts })
    }

    pub fn intersects(&self, other: &Subtree) -> bool {
        self.parts.iter().zip(&other.parts).any(|(a, b)| match (a, b) {
            (Some((a0, a1)), Some((b0, b1))) => a0.max(b0) <= a1.min(b1),
            _ => false,
        })
    }

    /// Union of subtrees whose union is known to be connected (for example,
    /// all of them share a point). Per edge this is the interval hull.
    pub fn union_hull<'a>(tree: &MetricTree, items: impl IntoIterator<Item = &'a Subtree>) -> Subtree {
        let mut parts = vec![None; tree.edge_count()];
        for s in items {
            for (i, p) in s.parts.iter().enumerate() {
                if let Some((lo, hi)) = p {
                    hull_into(&mut parts, EdgeId(i), lo, hi);
                }
            }
        }
        Subtree::from_hull(tree, parts)
    }

    /// Interval end points of every edge piece, deduplicated. These are the
    /// extreme points of the set: the leaves of the subtree and the points
    /// where it stops inside an edge, together with included vertices.
    pub fn ends(&self, tree: &MetricTree) -> Vec<TreePoint> {
        let mut out: Vec<TreePoint> = Vec::new();
        for e in self.edges() {
            let (lo, hi) = self.parts[e.0].as_ref().unwrap();
            for t in [lo, hi] {
                let p = tree.canonical(e, t.clone());
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Topological boundary in the tree: points of the set that are limits of
    /// its complement. Finite, at most `|edges| + 1` points.
    pub fn boundary(&self, tree: &MetricTree) -> Vec<TreePoint> {
        let mut out: Vec<TreePoint> = Vec::new();
        let mut push = |p: TreePoint| {
            if !out.contains(&p) {
                out.push(p);
            }
        };
        for e in self.edges() {
            let (lo, hi) = self.parts[e.0].as_ref().unwrap();
            if !lo.is_zero() && !lo.is_one() {
                push(tree.canonical(e, lo.clone()));
            }
            if !hi.is_one() && !hi.is_zero() {
                push(tree.canonical(e, hi.clone()));
            }
            // vertex touched only by a degenerate piece: the edge leaves the set there
            if lo == hi && (lo.is_zero() || lo.is_one()) {
                push(tree.canonical(e, lo.clone()));
            }
        }
        out
    }

    pub fn distance_to(&self, tree: &MetricTree, p: &TreePoint) -> Rational {
        if self.contains(tree, p) {
            return Rational::zero();
        }
        self.ends(tree).iter().map(|q| tree.distance(p, q)).min().expect("nonempty subtree")
    }

    pub fn project(&self, tree: &MetricTree, z: &TreePoint) -> TreePoint {
        if self.contains(tree, z) {
            return z.clone();
        }
        self.ends(tree)
            .into_iter()
            .min_by(|a, b| tree.distance(z, a).cmp(&tree.distance(z, b)))
            .expect("nonempty subtree")
    }

    pub fn diameter(&self, tree: &MetricTree) -> Rational {
        let ends = self.ends(tree);
        let mut best = Rational::zero();
        for (i, a) in ends.iter().enumerate() {
            for b in &ends[i + 1..] {
                let d = tree.distance(a, b);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    pub fn total_length(&self, tree: &MetricTree) -> Rational {
        self.edges()
            .map(|e| {
                let (lo, hi) = self.parts[e.0].as_ref().unwrap();
                (hi - lo) * tree.length(e)
            })
            .sum()
    }

    /// The single point of a degenerate subtree.
    pub fn as_point(&self, tree: &MetricTree) -> Option<TreePoint> {
        let ends = self.ends(tree);
        (ends.len() == 1).then(|| ends[0].clone())
    }

    pub fn is_degenerate(&self, tree: &MetricTree) -> bool {
        self.as_point(tree).is_some()
    }

    /// Closed `r`-neighbourhood `{x : d(x, A) ≤ r}`.
    pub fn neighbourhood(&self, tree: &MetricTree, r: &Rational) -> Subtree {
        let vdist: Vec<Rational> =
            (0..tree.vertex_count()).map(|v| self.distance_to(tree, &tree.vertex_point(VertexId(v)))).collect();
        let parts = tree
            .edge_ids()
            .map(|e| {
                let len = tree.length(e);
                let reach = r / len;
                let mut span: Option<(Rational, Rational)> = self.parts[e.0]
                    .as_ref()
                    .map(|(lo, hi)| (clamp01(lo - &reach), clamp01(hi + &reach)));
                let edge = tree.edge(e);
                let from_tail = (r - &vdist[edge.tail.0]) / len;
                if !from_tail.is_negative() {
                    widen(&mut span, Rational::zero(), clamp01(from_tail));
                }
                let from_head = (r - &vdist[edge.head.0]) / len;
                if !from_head.is_negative() {
                    widen(&mut span, clamp01(Rational::one() - from_head), Rational::one());
                }
                span
            })
            .collect();
        Self::from_hull(tree, parts)
    }

    /// Connected pieces of the union of `items`.
    pub fn union_components(tree: &MetricTree, items: &[Subtree]) -> Vec<Subtree> {
        let mut groups: Vec<Subtree> = Vec::new();
        for item in items {
            let mut merged = item.clone();
            let mut i = 0;
            while i < groups.len() {
                if groups[i].intersects(&merged) {
                    let g = groups.swap_remove(i);
                    merged = Subtree::union_hull(tree, [&g, &merged]);
                    i = 0;
                } else {
                    i += 1;
                }
            }
            groups.push(merged);
        }
        groups
    }

    pub(crate) fn ends_f64(&self) -> Vec<(EdgeId, f64)> {
        self.edges()
            .flat_map(|e| {
                let (lo, hi) = self.parts[e.0].as_ref().unwrap();
                [(e, rational::to_f64(lo)), (e, rational::to_f64(hi))]
            })
            .collect()
    }

    pub(crate) fn distance_to_f64(&self, tree: &MetricTree, p: (EdgeId, f64)) -> f64 {
        if let Some((lo, hi)) = &self.parts[p.0 .0] {
            if rational::to_f64(lo) <= p.1 && p.1 <= rational::to_f64(hi) {
                return 0.0;
            }
        }
        self.ends_f64().into_iter().map(|q| tree.distance_f64(p, q)).fold(f64::INFINITY, f64::min)
    }

    pub fn display(&self) -> SubtreeDisplay<'_> {
        SubtreeDisplay(self)
    }
}

pub struct SubtreeDisplay<'a>(&'a Subtree);

impl fmt::Display for SubtreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (i, p) in self.0.parts.iter().enumerate() {
            if let Some((lo, hi)) = p {
                if !first {
                    write!(f, ", ")?;
                }
                first = false;
                write!(f, "e{i}:[{}, {}]", rational::format(lo), rational::format(hi))?;
            }
        }
        write!(f, "}}")
    }
}

fn clamp01(x: Rational) -> Rational {
    x.max(Rational::zero()).min(Rational::one())
}

fn widen(span: &mut Part, lo: Rational, hi: Rational) {
    match span {
        Some((a, b)) => {
            if lo < *a {
                *a = lo;
            }
            if hi > *b {
                *b = hi;
            }
        }
        None => *span = Some((lo, hi)),
    }
}

fn end_param(tree: &MetricTree, e: EdgeId, v: VertexId) -> Rational {
    if tree.edge(e).tail == v {
        Rational::zero()
    } else {
        Rational::one()
    }
}

fn included_vertices(tree: &MetricTree, parts: &[Part]) -> Vec<bool> {
    let mut inc = vec![false; tree.vertex_count()];
    for (i, p) in parts.iter().enumerate() {
        if let Some((lo, hi)) = p {
            let edge = tree.edge(EdgeId(i));
            if lo.is_zero() {
                inc[edge.tail.0] = true;
            }
            if hi.is_one() {
                inc[edge.head.0] = true;
            }
        }
    }
    inc
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn neighbourhood_spills_over_the_centre() {
        let tri = triod();
        let a = Subtree::point(&tri, &leg(&tri, 0, 3, 4));
        let n = a.neighbourhood(&tri, &int(1));
        assert_eq!(n.part(EdgeId(0)), Some(&(int(0), int(1))));
        assert_eq!(n.part(EdgeId(1)), Some(&(int(0), rat(1, 4))));
        assert_eq!(n.part(EdgeId(2)), Some(&(int(0), rat(1, 4))));
        let small = a.neighbourhood(&tri, &rat(1, 8));
        assert_eq!(small.part(EdgeId(0)), Some(&(rat(5, 8), rat(7, 8))));
        assert_eq!(small.part(EdgeId(1)), None);
        for p in tri.grid(&rat(1, 16)).unwrap() {
            assert_eq!(n.contains(&tri, &p), a.distance_to(&tri, &p) <= int(1));
        }
    }

    #[test]
    fn parts_validation() {
        let tri = triod();
        // leg a alone: the center's other edges get filled in
        let s = Subtree::from_parts(&tri, vec![Some((int(0), int(1))), None, None]).unwrap();
        assert_eq!(s.part(EdgeId(1)), Some(&(int(0), int(0))));
        // two pieces that do not meet
        let bad = Subtree::from_parts(
            &tri,
            vec![Some((rat(1, 2), int(1))), Some((rat(1, 2), int(1))), None],
        );
        assert!(bad.is_err());
        let bad = Subtree::from_parts(&tri, vec![Some((int(0), int(1))), Some((rat(1, 2), int(1))), None]);
        assert!(bad.is_err());
        assert!(Subtree::from_parts(&tri, vec![None, None, None]).is_err());
    }

    #[test]
    fn boundary_and_diameter() {
        let t = interval();
        assert!(Subtree::whole(&t).boundary(&t).is_empty());
        let s = t.arc(&ipt(&t, 1, 4), &ipt(&t, 1, 1));
        assert_eq!(s.boundary(&t), vec![ipt(&t, 1, 4)]);
        assert_eq!(Subtree::whole(&t).diameter(&t), int(1));
        assert_eq!(Subtree::point(&t, &ipt(&t, 1, 3)).diameter(&t), int(0));

        let tri = triod();
        let leg_a = Subtree::from_parts(&tri, vec![Some((int(0), int(1))), None, None]).unwrap();
        assert_eq!(leg_a.boundary(&tri), vec![tri.vertex_point(VertexId(0))]);
        assert_eq!(Subtree::whole(&tri).diameter(&tri), int(2));
    }

    #[test]
    fn intersection_and_subset() {
        let t = interval();
        let a = t.arc(&ipt(&t, 0, 1), &ipt(&t, 1, 2));
        let b = t.arc(&ipt(&t, 1, 2), &ipt(&t, 1, 1));
        let m = a.intersection(&b).unwrap();
        assert_eq!(m, Subtree::point(&t, &ipt(&t, 1, 2)));
        assert!(m.is_subset(&a) && m.is_subset(&b));
        let c = t.arc(&ipt(&t, 3, 4), &ipt(&t, 1, 1));
        assert!(a.intersection(&c).is_none());
        assert!(!a.intersects(&c));
    }
}
