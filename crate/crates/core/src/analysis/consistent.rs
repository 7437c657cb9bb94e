use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::serialize_point;
use crate::tree::{MetricTree, TreePoint};

/// True when `x_m ∈ Comp(T \ {x_n}, x)` for all `m > n`.
pub fn is_consistent_with(tree: &MetricTree, x: &TreePoint, seq: &[TreePoint]) -> bool {
    seq.iter()
        .enumerate()
        .all(|(n, xn)| seq[n + 1..].iter().all(|xm| tree.in_component(xn, x, xm)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistentClass {
    /// Endpoint `y_i` of the arc `[x, y_i]` the class lives on.
    #[serde(serialize_with = "serialize_point")]
    pub endpoint: TreePoint,
    pub indices: Vec<usize>,
    /// Last term of the class, as the estimate of its limit.
    #[serde(serialize_with = "serialize_point")]
    pub limit: TreePoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistentPartition {
    #[serde(serialize_with = "serialize_point")]
    pub anchor: TreePoint,
    pub classes: Vec<ConsistentClass>,
}

impl ConsistentPartition {
    /// Exact check that `[x, x_m] ⊆ [x, x_n]` for `m > n` in every class.
    pub fn is_nested(&self, tree: &MetricTree, seq: &[TreePoint]) -> bool {
        let x = &self.anchor;
        self.classes.iter().all(|c| {
            c.indices.windows(2).all(|w| tree.arc(x, &seq[w[1]]).is_subset(&tree.arc(x, &seq[w[0]])))
        })
    }
}

/// Splits the indices of a consistent sequence by the first endpoint arc
/// `[x, y_i]` containing each term.
pub fn partition_consistent(tree: &MetricTree, x: &TreePoint, seq: &[TreePoint]) -> Result<ConsistentPartition> {
    if !is_consistent_with(tree, x, seq) {
        return Err(Error::NotConsistent);
    }
    let ends: Vec<TreePoint> = tree
        .endpoints()
        .into_iter()
        .map(|v| tree.vertex_point(v))
        .filter(|p| p != x)
        .collect();
    let mut classes: Vec<ConsistentClass> = Vec::new();
    for (n, xn) in seq.iter().enumerate() {
        let y = ends.iter().find(|y| tree.on_arc(xn, x, y)).expect("arcs to endpoints cover the tree");
        match classes.iter_mut().find(|c| &c.endpoint == y) {
            Some(c) => {
                c.indices.push(n);
                c.limit = xn.clone();
            }
            None => classes.push(ConsistentClass { endpoint: y.clone(), indices: vec![n], limit: xn.clone() }),
        }
    }
    Ok(ConsistentPartition { anchor: x.clone(), classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::*;
    use crate::tree::EdgeId;

    /// `[-1, 1]` as one edge of length 2; returns the point at coordinate `v`.
    fn symmetric() -> (MetricTree, impl Fn(&MetricTree, crate::Rational) -> TreePoint) {
        let t = MetricTree::from_named_edges(&[("-1", "1", int(2))]).unwrap();
        (t, |t: &MetricTree, v: crate::Rational| t.point(EdgeId(0), (v + int(1)) / int(2)).unwrap())
    }

    #[test]
    fn constant_sequence_is_not_consistent() {
        let t = interval();
        let p = ipt(&t, 1, 2);
        assert!(!is_consistent_with(&t, &ipt(&t, 0, 1), &[p.clone(), p]));
    }

    #[test]
    fn nested_sequence() {
        let t = interval();
        let seq: Vec<_> = [1, 2, 4, 8].iter().map(|&d| ipt(&t, 1, d)).collect();
        let x = ipt(&t, 0, 1);
        assert!(is_consistent_with(&t, &x, &seq));
        let p = partition_consistent(&t, &x, &seq).unwrap();
        assert_eq!(p.classes.len(), 1);
        assert!(p.is_nested(&t, &seq));
    }

    #[test]
    fn alternating_example() {
        let (t, at) = symmetric();
        let x = at(&t, int(0));
        let seq: Vec<_> = (1..=40)
            .map(|n: i64| {
                let sign = if n % 2 == 0 { 1 } else { -1 };
                at(&t, rat(sign * (n + 1), 2 * n))
            })
            .collect();
        assert!(is_consistent_with(&t, &x, &seq));
        let p = partition_consistent(&t, &x, &seq).unwrap();
        assert_eq!(p.classes.len(), 2);
        assert!(p.is_nested(&t, &seq));
        let odd: Vec<usize> = (0..40).step_by(2).collect();
        let class_of_first = p.classes.iter().find(|c| c.indices[0] == 0).unwrap();
        assert_eq!(class_of_first.indices, odd);
        // limits approach -1/2 and 1/2
        for c in &p.classes {
            let d = t.distance(&c.limit, &at(&t, rat(if c.indices[0] == 0 { -1 } else { 1 }, 2)));
            assert!(d < rat(1, 20));
        }
    }

    #[test]
    fn rotating_triod_sequence() {
        let tri = triod();
        let x = tri.vertex_point(crate::VertexId(0));
        let seq: Vec<_> = (0..12).map(|n| leg(&tri, n % 3, 1, 2 + n as i64)).collect();
        let p = partition_consistent(&tri, &x, &seq).unwrap();
        assert_eq!(p.classes.len(), 3);
        assert!(p.is_nested(&tri, &seq));
        let bad: Vec<_> = vec![leg(&tri, 0, 1, 4), leg(&tri, 0, 1, 2)];
        assert!(matches!(partition_consistent(&tri, &x, &bad), Err(Error::NotConsistent)));
    }
}
