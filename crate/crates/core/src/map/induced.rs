use std::collections::HashMap;

use num_traits::Zero;

use super::PlMap;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::{EdgeId, MetricTree, Quotient, Subtree, TreePoint, VertexId};

impl PlMap {
    /// The induced map `f/M = π_M ∘ f ∘ π_M⁻¹` on the quotient `T/M`.
    pub fn induced_quotient_map(&self, m: &Subtree) -> Result<(Quotient, PlMap)> {
        let tree = self.tree();
        if !self.image_subtree(m).is_subset(m) {
            return Err(Error::NotInvariant);
        }
        let q = Quotient::new(tree, m)?;
        let mut table = Vec::with_capacity(q.tree().edge_count());
        for ne in q.tree().edge_ids() {
            let (e, lo, hi) = q.origin(ne);
            let mut cuts: Vec<Rational> = vec![lo.clone(), hi.clone()];
            cuts.extend(self.breakpoints(e).iter().filter(|t| lo < *t && *t < hi).cloned());
            for piece in self.pieces(e) {
                if piece.len.is_zero() || &piece.hi <= lo || &piece.lo >= hi {
                    continue;
                }
                let (a, b) = (lo.max(&piece.lo), hi.min(&piece.hi));
                if let Some((u_in, u_out)) = super::path_overlap(&piece.segs, m) {
                    for u in [u_in, u_out] {
                        let s = piece.param_at(&u);
                        if a < &s && &s < b {
                            cuts.push(s);
                        }
                    }
                }
            }
            cuts.sort();
            cuts.dedup();
            let width = hi - lo;
            let rows = cuts
                .into_iter()
                .map(|s| {
                    let img = q.project(tree, &self.evaluate(&tree.canonical(e, s.clone())));
                    ((s - lo) / &width, img)
                })
                .collect();
            table.push(rows);
        }
        let g = PlMap::new(q.tree().clone(), table)?.simplified();
        Ok((q, g))
    }

    /// The restriction `f|_M` to an invariant subtree, as a map on `M` itself.
    pub fn restrict(&self, m: &Subtree) -> Result<Restriction> {
        if !self.image_subtree(m).is_subset(m) {
            return Err(Error::NotInvariant);
        }
        let emb = Embedding::new(self.tree(), m)?;
        let tree = self.tree();
        let mut table = Vec::with_capacity(emb.origin.len());
        for (e, lo, hi) in &emb.origin {
            let mut cuts = vec![lo.clone(), hi.clone()];
            cuts.extend(self.breakpoints(*e).iter().filter(|t| lo < *t && *t < hi).cloned());
            cuts.sort();
            let width = hi - lo;
            let rows = cuts
                .into_iter()
                .map(|s| {
                    let img = self.evaluate(&tree.canonical(*e, s.clone()));
                    ((s - lo) / &width, emb.to_sub(tree, &img).expect("image lies in M"))
                })
                .collect();
            table.push(rows);
        }
        let map = PlMap::new(emb.tree.clone(), table)?;
        Ok(Restriction { subtree: m.clone(), emb, map })
    }
}

/// A nondegenerate subtree realised as a metric tree of its own.
#[derive(Clone, Debug)]
struct Embedding {
    tree: MetricTree,
    /// Per new edge: original edge and parameter range.
    origin: Vec<(EdgeId, Rational, Rational)>,
    new_edge: HashMap<EdgeId, EdgeId>,
    vertex: HashMap<TreePoint, VertexId>,
}

impl Embedding {
    fn new(tree: &MetricTree, m: &Subtree) -> Result<Self> {
        let mut names = Vec::new();
        let mut vertex: HashMap<TreePoint, VertexId> = HashMap::new();
        let mut raw = Vec::new();
        let mut origin = Vec::new();
        let mut new_edge = HashMap::new();
        let mut key = |p: TreePoint, names: &mut Vec<String>| -> usize {
            if let Some(v) = vertex.get(&p) {
                return v.0;
            }
            let name = match tree.vertex_at(&p) {
                Some(v) => tree.vertex_name(v).to_string(),
                None => p.to_string(),
            };
            names.push(name);
            vertex.insert(p, VertexId(names.len() - 1));
            names.len() - 1
        };
        for e in m.edges() {
            let (lo, hi) = m.part(e).unwrap();
            if lo == hi {
                continue;
            }
            let u = key(tree.canonical(e, lo.clone()), &mut names);
            let w = key(tree.canonical(e, hi.clone()), &mut names);
            new_edge.insert(e, EdgeId(raw.len()));
            raw.push((u, w, (hi - lo) * tree.length(e)));
            origin.push((e, lo.clone(), hi.clone()));
        }
        if raw.is_empty() {
            return Err(Error::InvalidSubtree("subtree is a single point".into()));
        }
        let sub = MetricTree::new(names, raw)?;
        Ok(Embedding { tree: sub, origin, new_edge, vertex })
    }

    fn to_sub(&self, tree: &MetricTree, p: &TreePoint) -> Option<TreePoint> {
        if let Some(v) = self.vertex.get(p) {
            return Some(self.tree.vertex_point(*v));
        }
        let ne = *self.new_edge.get(&p.edge())?;
        let (_, lo, hi) = &self.origin[ne.0];
        if p.t() < lo || p.t() > hi {
            return None;
        }
        let _ = tree;
        Some(self.tree.canonical(ne, (p.t() - lo) / (hi - lo)))
    }

    fn lift(&self, tree: &MetricTree, q: &TreePoint) -> TreePoint {
        let (e, lo, hi) = &self.origin[q.edge().0];
        tree.canonical(*e, lo + q.t() * (hi - lo))
    }
}

/// `f|_M` together with the identification of `M` with its own tree.
#[derive(Clone, Debug)]
pub struct Restriction {
    subtree: Subtree,
    emb: Embedding,
    map: PlMap,
}

impl Restriction {
    pub fn subtree(&self) -> &Subtree {
        &self.subtree
    }

    pub fn map(&self) -> &PlMap {
        &self.map
    }

    pub fn tree(&self) -> &MetricTree {
        &self.emb.tree
    }

    /// Point of `M`, given in the ambient tree, as a point of the restricted tree.
    pub fn to_sub(&self, ambient: &MetricTree, p: &TreePoint) -> Option<TreePoint> {
        self.emb.to_sub(ambient, p)
    }

    pub fn from_sub(&self, ambient: &MetricTree, q: &TreePoint) -> TreePoint {
        self.emb.lift(ambient, q)
    }
}
