//! Finite metric trees with exact rational edge lengths.
//!
//! A [`MetricTree`] is a combinatorial tree whose edges carry positive
//! rational lengths. Every edge is oriented `tail -> head` and parametrized by
//! `t` in `[0, 1]`; a [`TreePoint`] is an edge plus such a parameter. Points
//! sitting on a vertex are always stored on the smallest incident edge id, so
//! structural equality of points is geometric equality.

mod cover;
mod quotient;
pub(crate) mod subtree;

use std::collections::VecDeque;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use cover::cover_by_continua;
pub use quotient::Quotient;
pub use subtree::Subtree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub length: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Endpoint,
    CutPoint,
}

/// A location on a tree: edge plus parameter in `[0, 1]`, canonical at vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePoint {
    edge: EdgeId,
    t: Rational,
}

impl TreePoint {
    pub fn edge(&self) -> EdgeId {
        self.edge
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}@{}", self.edge.0, rational::format(&self.t))
    }
}

/// One straight run of a path, lying inside a single edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seg {
    pub edge: EdgeId,
    pub from: Rational,
    pub to: Rational,
    pub length: Rational,
}

#[derive(Clone, Debug)]
pub struct MetricTree {
    names: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    dist: Vec<Vec<Rational>>,
    toward: Vec<Vec<Option<EdgeId>>>,
    lengths_f64: Vec<f64>,
    dist_f64: Vec<Vec<f64>>,
}

impl PartialEq for MetricTree {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.edges == other.edges
    }
}

impl Eq for MetricTree {}

impl MetricTree {
    /// Builds a tree from named weighted edges; vertices are numbered in order
    /// of first appearance.
    pub fn from_named_edges<S: AsRef<str>>(edges: &[(S, S, Rational)]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let index = |name: &str, names: &mut Vec<String>| -> usize {
            match names.iter().position(|n| n == name) {
                Some(i) => i,
                None => {
                    names.push(name.to_string());
                    names.len() - 1
                }
            }
        };
        let mut raw = Vec::with_capacity(edges.len());
        for (u, v, len) in edges {
            let a = index(u.as_ref(), &mut names);
            let b = index(v.as_ref(), &mut names);
            raw.push((a, b, len.clone()));
        }
        Self::new(names, raw)
    }

    pub fn new(names: Vec<String>, edges: Vec<(usize, usize, Rational)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyTree);
        }
        let n = names.len();
        let mut uf = UnionFind::new(n);
        let mut out = Vec::with_capacity(edges.len());
        for (i, (a, b, len)) in edges.into_iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::UnknownVertex(format!("#{}", a.max(b))));
            }
            if !len.is_positive() {
                return Err(Error::NonpositiveLength(i));
            }
            if !uf.union(a, b) {
                return Err(Error::CycleDetected(i));
            }
            out.push(Edge { tail: VertexId(a), head: VertexId(b), length: len });
        }
        if out.len() + 1 != n {
            return Err(Error::Disconnected);
        }
        let mut incident = vec![Vec::new(); n];
        for (i, e) in out.iter().enumerate() {
            incident[e.tail.0].push(EdgeId(i));
            incident[e.head.0].push(EdgeId(i));
        }
        let mut tree = MetricTree {
            names,
            lengths_f64: out.iter().map(|e| rational::to_f64(&e.length)).collect(),
            edges: out,
            incident,
            dist: Vec::new(),
            toward: Vec::new(),
            dist_f64: Vec::new(),
        };
        tree.fill_distance_tables();
        Ok(tree)
    }

    fn fill_distance_tables(&mut self) {
        let n = self.names.len();
        self.dist = vec![vec![Rational::zero(); n]; n];
        self.toward = vec![vec![None; n]; n];
        for src in 0..n {
            let mut seen = vec![false; n];
            seen[src] = true;
            let mut queue = VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                for &e in &self.incident[v] {
                    let w = self.other_end(e, VertexId(v)).0;
                    if seen[w] {
                        continue;
                    }
                    seen[w] = true;
                    self.dist[src][w] = &self.dist[src][v] + &self.edges[e.0].length;
                    self.toward[src][w] = if v == src { Some(e) } else { self.toward[src][v] };
                    queue.push_back(w);
                }
            }
        }
        self.dist_f64 = self
            .dist
            .iter()
            .map(|row| row.iter().map(rational::to_f64).collect())
            .collect();
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn length(&self, e: EdgeId) -> &Rational {
        &self.edges[e.0].length
    }

    pub fn length_f64(&self, e: EdgeId) -> f64 {
        self.lengths_f64[e.0]
    }

    pub fn total_length(&self) -> Rational {
        self.edges.iter().map(|e| e.length.clone()).sum()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v.0]
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.incident[v.0].len()
    }

    pub fn other_end(&self, e: EdgeId, v: VertexId) -> VertexId {
        let edge = &self.edges[e.0];
        if edge.tail == v {
            edge.head
        } else {
            edge.tail
        }
    }

    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> &Rational {
        &self.dist[a.0][b.0]
    }

    /// En(T): vertices of valence one.
    pub fn endpoints(&self) -> Vec<VertexId> {
        (0..self.names.len()).map(VertexId).filter(|&v| self.valence(v) == 1).collect()
    }

    /// Vertices of valence at least three.
    pub fn branch_vertices(&self) -> Vec<VertexId> {
        (0..self.names.len()).map(VertexId).filter(|&v| self.valence(v) >= 3).collect()
    }

    /// Vertices in the topological sense: valence other than two.
    pub fn topological_vertices(&self) -> Vec<VertexId> {
        (0..self.names.len()).map(VertexId).filter(|&v| self.valence(v) != 2).collect()
    }

    pub fn point(&self, edge: EdgeId, t: Rational) -> Result<TreePoint> {
        if edge.0 >= self.edges.len() {
            return Err(Error::PointNotOnTree(format!("no edge {}", edge.0)));
        }
        if t.is_negative() || t > Rational::one() {
            return Err(Error::PointNotOnTree(format!(
                "parameter {} outside [0,1]",
                rational::format(&t)
            )));
        }
        Ok(self.canonical(edge, t))
    }

    /// Same as [`MetricTree::point`] for parameters already known to be in range.
    pub(crate) fn canonical(&self, edge: EdgeId, t: Rational) -> TreePoint {
        let e = &self.edges[edge.0];
        let v = if t.is_zero() {
            e.tail
        } else if t.is_one() {
            e.head
        } else {
            return TreePoint { edge, t };
        };
        self.vertex_point(v)
    }

    pub fn vertex_point(&self, v: VertexId) -> TreePoint {
        let edge = *self.incident[v.0].iter().min().expect("vertex without edges");
        let t = if self.edges[edge.0].tail == v { Rational::zero() } else { Rational::one() };
        TreePoint { edge, t }
    }

    pub fn vertex_at(&self, p: &TreePoint) -> Option<VertexId> {
        let e = &self.edges[p.edge.0];
        if p.t.is_zero() {
            Some(e.tail)
        } else if p.t.is_one() {
            Some(e.head)
        } else {
            None
        }
    }

    /// Parameter of `p` along edge `e`, if `p` lies on that (closed) edge.
    pub fn param_on(&self, p: &TreePoint, e: EdgeId) -> Option<Rational> {
        if p.edge == e {
            return Some(p.t.clone());
        }
        let v = self.vertex_at(p)?;
        let edge = &self.edges[e.0];
        if edge.tail == v {
            Some(Rational::zero())
        } else if edge.head == v {
            Some(Rational::one())
        } else {
            None
        }
    }

    pub fn point_kind(&self, p: &TreePoint) -> PointKind {
        match self.vertex_at(p) {
            Some(v) if self.valence(v) == 1 => PointKind::Endpoint,
            _ => PointKind::CutPoint,
        }
    }

    pub fn is_endpoint(&self, p: &TreePoint) -> bool {
        self.point_kind(p) == PointKind::Endpoint
    }

    pub fn distance(&self, x: &TreePoint, y: &TreePoint) -> Rational {
        if let Some(ty) = self.param_on(y, x.edge) {
            return (&x.t - ty).abs() * self.length(x.edge);
        }
        if let Some(tx) = self.param_on(x, y.edge) {
            return (tx - &y.t).abs() * self.length(y.edge);
        }
        let (_, _, d) = self.best_route(x, y);
        d
    }

    /// Chooses the exit vertex of `x`'s edge and the entry vertex of `y`'s edge
    /// on the geodesic, for points on distinct edges.
    fn best_route(&self, x: &TreePoint, y: &TreePoint) -> (VertexId, VertexId, Rational) {
        let ex = &self.edges[x.edge.0];
        let ey = &self.edges[y.edge.0];
        let lx = &ex.length;
        let ly = &ey.length;
        let xs = [(ex.tail, &x.t * lx), (ex.head, (Rational::one() - &x.t) * lx)];
        let ys = [(ey.tail, &y.t * ly), (ey.head, (Rational::one() - &y.t) * ly)];
        let mut best: Option<(VertexId, VertexId, Rational)> = None;
        for (u, du) in &xs {
            for (w, dw) in &ys {
                let d = du + &self.dist[u.0][w.0] + dw;
                if best.as_ref().is_none_or(|b| d < b.2) {
                    best = Some((*u, *w, d));
                }
            }
        }
        best.expect("nonempty")
    }

    /// Segments of the unique arc from `x` to `y`, in order. Empty when `x == y`.
    pub fn path(&self, x: &TreePoint, y: &TreePoint) -> Vec<Seg> {
        let mut out = Vec::new();
        if let Some(ty) = self.param_on(y, x.edge) {
            self.push_seg(&mut out, x.edge, x.t.clone(), ty);
            return out;
        }
        if let Some(tx) = self.param_on(x, y.edge) {
            self.push_seg(&mut out, y.edge, tx, y.t.clone());
            return out;
        }
        let (u, w, _) = self.best_route(x, y);
        let end_param = |e: EdgeId, v: VertexId| {
            if self.edges[e.0].tail == v {
                Rational::zero()
            } else {
                Rational::one()
            }
        };
        self.push_seg(&mut out, x.edge, x.t.clone(), end_param(x.edge, u));
        let mut v = u;
        while v != w {
            let e = self.toward[v.0][w.0].expect("connected tree");
            let next = self.other_end(e, v);
            self.push_seg(&mut out, e, end_param(e, v), end_param(e, next));
            v = next;
        }
        self.push_seg(&mut out, y.edge, end_param(y.edge, w), y.t.clone());
        out
    }

    fn push_seg(&self, out: &mut Vec<Seg>, edge: EdgeId, from: Rational, to: Rational) {
        if from == to {
            return;
        }
        let length = (&to - &from).abs() * self.length(edge);
        out.push(Seg { edge, from, to, length });
    }

    /// Point at arc-length `u` from the start of `segs` (clamped to the path).
    pub fn point_along(&self, start: &TreePoint, segs: &[Seg], u: &Rational) -> TreePoint {
        let mut rest = u.clone();
        for seg in segs {
            if rest <= seg.length {
                let frac = &rest / &seg.length;
                let t = &seg.from + (&seg.to - &seg.from) * frac;
                return self.canonical(seg.edge, t);
            }
            rest -= &seg.length;
        }
        match segs.last() {
            Some(seg) => self.canonical(seg.edge, seg.to.clone()),
            None => start.clone(),
        }
    }

    /// The unique arc `[x, y]`.
    pub fn arc(&self, x: &TreePoint, y: &TreePoint) -> Subtree {
        let segs = self.path(x, y);
        if segs.is_empty() {
            return Subtree::point(self, x);
        }
        let mut parts = vec![None; self.edge_count()];
        for s in &segs {
            let (lo, hi) = if s.from <= s.to { (&s.from, &s.to) } else { (&s.to, &s.from) };
            subtree::hull_into(&mut parts, s.edge, lo, hi);
        }
        Subtree::from_hull(self, parts)
    }

    /// True when `c` lies on the arc `[x, y]`.
    pub fn on_arc(&self, c: &TreePoint, x: &TreePoint, y: &TreePoint) -> bool {
        self.distance(x, c) + self.distance(c, y) == self.distance(x, y)
    }

    /// Membership in Comp(T \ {c}, x): the open component of `x` after removing `c`.
    /// When `x == c` the component is the singleton `{x}`.
    pub fn in_component(&self, c: &TreePoint, x: &TreePoint, y: &TreePoint) -> bool {
        if x == c {
            return y == x;
        }
        !self.on_arc(c, x, y)
    }

    /// Closure of Comp(T \ {c}, x); `{x}` when `x == c`.
    pub fn component(&self, c: &TreePoint, x: &TreePoint) -> Subtree {
        if x == c {
            return Subtree::point(self, x);
        }
        let mut parts = vec![None; self.edge_count()];
        let zero = Rational::zero();
        let one = Rational::one();
        match self.vertex_at(c) {
            None => {
                // c inside edge e: keep the side of e facing x, then everything behind it.
                let e = c.edge;
                let toward_tail = match self.param_on(x, e) {
                    Some(tx) => tx < c.t,
                    None => {
                        let edge = &self.edges[e.0];
                        self.distance(x, &self.vertex_point(edge.tail))
                            < self.distance(x, &self.vertex_point(edge.head))
                    }
                };
                let edge = &self.edges[e.0];
                if toward_tail {
                    parts[e.0] = Some((zero, c.t.clone()));
                    self.flood(&mut parts, edge.tail, e);
                } else {
                    parts[e.0] = Some((c.t.clone(), one));
                    self.flood(&mut parts, edge.head, e);
                }
            }
            Some(v) => {
                let first = self.path(c, x).first().map(|s| s.edge).expect("x != c");
                parts[first.0] = Some((zero, one));
                self.flood(&mut parts, self.other_end(first, v), first);
            }
        }
        Subtree::from_hull(self, parts)
    }

    /// Marks every edge reachable from `start` without crossing `blocked` as full.
    fn flood(&self, parts: &mut [Option<(Rational, Rational)>], start: VertexId, blocked: EdgeId) {
        let mut stack = vec![(start, blocked)];
        while let Some((v, from)) = stack.pop() {
            for &e in &self.incident[v.0] {
                if e == from {
                    continue;
                }
                parts[e.0] = Some((Rational::zero(), Rational::one()));
                stack.push((self.other_end(e, v), e));
            }
        }
    }

    /// Pr_M(z): `z` itself when `z ∈ M`, else the gateway point of `M` toward `z`.
    pub fn project(&self, m: &Subtree, z: &TreePoint) -> TreePoint {
        m.project(self, z)
    }

    /// Exact Hausdorff distance in the path metric.
    pub fn hausdorff(&self, a: &Subtree, b: &Subtree) -> Rational {
        let ab = a.ends(self).iter().map(|p| b.distance_to(self, p)).max().unwrap_or_default();
        let ba = b.ends(self).iter().map(|p| a.distance_to(self, p)).max().unwrap_or_default();
        ab.max(ba)
    }

    /// Floating-point Hausdorff distance, for screening before exact checks.
    pub fn hausdorff_f64(&self, a: &Subtree, b: &Subtree) -> f64 {
        let ab = a.ends_f64().into_iter().map(|p| b.distance_to_f64(self, p)).fold(0.0, f64::max);
        let ba = b.ends_f64().into_iter().map(|p| a.distance_to_f64(self, p)).fold(0.0, f64::max);
        ab.max(ba)
    }

    /// Uniform grid: points at arc-length multiples of `h` along each edge plus
    /// both edge ends, vertices listed once, in edge order.
    pub fn grid(&self, h: &Rational) -> Result<Vec<TreePoint>> {
        if !h.is_positive() {
            return Err(Error::NonpositiveEpsilon);
        }
        let mut out = Vec::new();
        let mut seen_vertex = vec![false; self.vertex_count()];
        for (i, edge) in self.edges.iter().enumerate() {
            let steps = rational::floor_i64(&(&edge.length / h));
            let mut push = |p: TreePoint, out: &mut Vec<TreePoint>| {
                if let Some(v) = self.vertex_at(&p) {
                    if seen_vertex[v.0] {
                        return;
                    }
                    seen_vertex[v.0] = true;
                }
                out.push(p);
            };
            for k in 0..=steps {
                let t = h * Rational::from_integer(k.into()) / &edge.length;
                push(self.canonical(EdgeId(i), t), &mut out);
            }
            push(self.canonical(EdgeId(i), Rational::one()), &mut out);
        }
        Ok(out)
    }

    /// Fast floating-point distance between points given as `(edge, t)`.
    pub fn distance_f64(&self, x: (EdgeId, f64), y: (EdgeId, f64)) -> f64 {
        let (ex, tx) = x;
        let (ey, ty) = y;
        if ex == ey {
            return (tx - ty).abs() * self.lengths_f64[ex.0];
        }
        let a = &self.edges[ex.0];
        let b = &self.edges[ey.0];
        let lx = self.lengths_f64[ex.0];
        let ly = self.lengths_f64[ey.0];
        let xs = [(a.tail.0, tx * lx), (a.head.0, (1.0 - tx) * lx)];
        let ys = [(b.tail.0, ty * ly), (b.head.0, (1.0 - ty) * ly)];
        let mut best = f64::INFINITY;
        for (u, du) in xs {
            for (w, dw) in ys {
                best = best.min(du + self.dist_f64[u][w] + dw);
            }
        }
        best
    }

    /// Distance from vertex 0, used as a 1-Lipschitz hashing key.
    pub fn root_distance_f64(&self, p: (EdgeId, f64)) -> f64 {
        let e = &self.edges[p.0 .0];
        let l = self.lengths_f64[p.0 .0];
        (self.dist_f64[0][e.tail.0] + p.1 * l).min(self.dist_f64[0][e.head.0] + (1.0 - p.1) * l)
    }

    pub fn diameter(&self, a: &Subtree) -> Rational {
        a.diameter(self)
    }

    pub fn whole(&self) -> Subtree {
        Subtree::whole(self)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
