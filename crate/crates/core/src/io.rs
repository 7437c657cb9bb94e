//! JSON formats for trees, subtrees and maps.
//!
//! Rationals are written as `"p/q"` strings; on input, plain JSON numbers and
//! decimal strings are accepted as well.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::map::PlMap;
use crate::rational::{self, Rational};
use crate::tree::{EdgeId, MetricTree, Subtree, TreePoint};

/// A rational given either as a string or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Num {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Num::Text(s) => rational::parse(s),
            Num::Int(n) => Ok(Rational::from_integer((*n).into())),
            Num::Float(x) => rational::parse(&x.to_string()),
        }
    }

    fn to_index(&self) -> Result<usize> {
        let r = self.to_rational()?;
        if !r.is_integer() || r < Rational::from_integer(0.into()) {
            return Err(Error::Spec(format!("edge id {r} is not a nonnegative integer")));
        }
        Ok(rational::floor_i64(&r) as usize)
    }
}

impl From<&Rational> for Num {
    fn from(r: &Rational) -> Self {
        Num::Text(rational::format(r))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, Num)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSpec>,
    pub breakpoints: BTreeMap<String, Vec<(Num, Num, Num)>>,
}

pub type SubtreeSpec = BTreeMap<String, (Num, Num)>;

fn from_json<'a, T: Deserialize<'a>>(what: &str, text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Spec(format!("{what}: {e}")))
}

pub fn tree_from_spec(spec: &TreeSpec) -> Result<MetricTree> {
    let mut edges = Vec::with_capacity(spec.edges.len());
    for (i, (u, v, len)) in spec.edges.iter().enumerate() {
        let index = |name: &String| {
            spec.vertices
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownVertex(name.clone()))
        };
        let len = len.to_rational().map_err(|e| Error::Spec(format!("edges[{i}] length: {e}")))?;
        edges.push((index(u)?, index(v)?, len));
    }
    let mut names = spec.vertices.clone();
    names.dedup();
    if names.len() != spec.vertices.len() || {
        let mut sorted = names.clone();
        sorted.sort();
        sorted.windows(2).any(|w| w[0] == w[1])
    } {
        return Err(Error::Spec("duplicate vertex name".into()));
    }
    MetricTree::new(names, edges)
}

pub fn tree_to_spec(tree: &MetricTree) -> TreeSpec {
    TreeSpec {
        vertices: tree.vertex_names().to_vec(),
        edges: tree
            .edges()
            .iter()
            .map(|e| {
                (
                    tree.vertex_name(e.tail).to_string(),
                    tree.vertex_name(e.head).to_string(),
                    Num::from(&e.length),
                )
            })
            .collect(),
    }
}

pub fn parse_tree(text: &str) -> Result<MetricTree> {
    tree_from_spec(&from_json("tree spec", text)?)
}

fn edge_key(tree: &MetricTree, key: &str) -> Result<EdgeId> {
    let i: usize = key
        .trim()
        .parse()
        .map_err(|_| Error::Spec(format!("edge id `{key}` is not an integer")))?;
    if i >= tree.edge_count() {
        return Err(Error::Spec(format!("edge id {i} out of range (tree has {} edges)", tree.edge_count())));
    }
    Ok(EdgeId(i))
}

/// Builds a map; `tree` is used when the spec has no embedded tree.
pub fn map_from_spec(spec: &MapSpec, tree: Option<MetricTree>) -> Result<PlMap> {
    let tree = match (&spec.tree, tree) {
        (Some(t), _) => tree_from_spec(t)?,
        (None, Some(t)) => t,
        (None, None) => return Err(Error::Spec("map spec has no tree and none was given".into())),
    };
    let mut table = vec![None; tree.edge_count()];
    for (key, rows) in &spec.breakpoints {
        let e = edge_key(&tree, key)?;
        let mut parsed = Vec::with_capacity(rows.len());
        for (j, (t, img_edge, img_t)) in rows.iter().enumerate() {
            let ctx = |err: Error| Error::Spec(format!("breakpoints[{key}][{j}]: {err}"));
            let t = t.to_rational().map_err(ctx)?;
            let ie = img_edge.to_index().map_err(ctx)?;
            let it = img_t.to_rational().map_err(ctx)?;
            let p = tree.point(EdgeId(ie), it).map_err(ctx)?;
            parsed.push((t, p));
        }
        table[e.0] = Some(parsed);
    }
    let table = table
        .into_iter()
        .enumerate()
        .map(|(i, rows)| rows.ok_or_else(|| Error::Spec(format!("no breakpoints for edge {i}"))))
        .collect::<Result<Vec<_>>>()?;
    PlMap::new(tree, table)
}

pub fn map_to_spec(f: &PlMap) -> MapSpec {
    let tree = f.tree();
    let breakpoints = tree
        .edge_ids()
        .map(|e| {
            let rows = f
                .breakpoints(e)
                .iter()
                .zip(f.breakpoint_images(e))
                .map(|(t, p)| (Num::from(t), Num::Text(p.edge().0.to_string()), Num::from(p.t())))
                .collect();
            (e.0.to_string(), rows)
        })
        .collect();
    MapSpec { tree: Some(tree_to_spec(tree)), breakpoints }
}

pub fn parse_map(text: &str, tree: Option<MetricTree>) -> Result<PlMap> {
    map_from_spec(&from_json("map spec", text)?, tree)
}

pub fn subtree_from_spec(tree: &MetricTree, spec: &SubtreeSpec) -> Result<Subtree> {
    let mut parts = vec![None; tree.edge_count()];
    for (key, (lo, hi)) in spec {
        let e = edge_key(tree, key)?;
        parts[e.0] = Some((lo.to_rational()?, hi.to_rational()?));
    }
    Subtree::from_parts(tree, parts)
}

pub fn subtree_to_spec(a: &Subtree) -> SubtreeSpec {
    a.edges()
        .map(|e| {
            let (lo, hi) = a.part(e).unwrap();
            (e.0.to_string(), (Num::from(lo), Num::from(hi)))
        })
        .collect()
}

pub fn parse_subtree(tree: &MetricTree, text: &str) -> Result<Subtree> {
    subtree_from_spec(tree, &from_json("subtree spec", text)?)
}

/// Output form of a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointRecord {
    pub edge: usize,
    pub t: String,
}

impl From<&TreePoint> for PointRecord {
    fn from(p: &TreePoint) -> Self {
        PointRecord { edge: p.edge().0, t: rational::format(p.t()) }
    }
}

pub fn serialize_point<S: Serializer>(p: &TreePoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    PointRecord::from(p).serialize(s)
}

pub fn serialize_points<S: Serializer>(ps: &[TreePoint], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(ps.len()))?;
    for p in ps {
        seq.serialize_element(&PointRecord::from(p))?;
    }
    seq.end()
}

pub fn serialize_subtree<S: Serializer>(a: &Subtree, s: S) -> std::result::Result<S::Ok, S::Error> {
    subtree_to_spec(a).serialize(s)
}

pub fn serialize_subtrees<S: Serializer>(xs: &[Subtree], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for a in xs {
        seq.serialize_element(&subtree_to_spec(a))?;
    }
    seq.end()
}

pub fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(r))
}

pub fn serialize_rationals<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&rational::format(x))?;
    }
    seq.end()
}
