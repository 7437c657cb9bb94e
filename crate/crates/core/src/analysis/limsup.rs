use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::ContinuumOrbit;
use crate::io::{serialize_point, serialize_rational, serialize_subtree};
use crate::map::PlMap;
use crate::rational::Rational;
use crate::tree::{Subtree, TreePoint};

#[derive(Clone, Debug, Serialize)]
pub struct LimsupReport {
    #[serde(serialize_with = "serialize_subtree")]
    pub set: Subtree,
    /// Computed from an exact cycle of the orbit.
    pub exact: bool,
    /// Fixed point of `f` in `A` that every iterate contains.
    #[serde(serialize_with = "serialize_point")]
    pub fixed_point: TreePoint,
    /// `d_H` between the unions taken from `m_max / 2` and from `m_max`.
    #[serde(serialize_with = "serialize_rational")]
    pub checkpoint_residual: Rational,
    /// `d_H(f(Δ), Δ)`.
    #[serde(serialize_with = "serialize_rational")]
    pub invariance_residual: Rational,
}

/// Approximates the closure of `Ls(f, A) = ⋂ₘ ⋃_{n≥m} fⁿ(A)` for `A` holding
/// a fixed point, from the iterates `m_max ..= m_max + window`.
pub fn limsup_set(f: &PlMap, a: &Subtree, m_max: usize, window: usize) -> Result<LimsupReport> {
    let tree = f.tree();
    let (points, segments) = f.fixed_set();
    let fixed_point = points
        .into_iter()
        .find(|p| a.contains(tree, p))
        .or_else(|| segments.iter().find_map(|s| s.intersection(a)).map(|i| i.ends(tree)[0].clone()))
        .ok_or(Error::NoFixedPointInA)?;

    let last = m_max + window;
    let mut orbit = ContinuumOrbit::new(f, a.clone());
    while orbit.len() < last && orbit.exact_cycle().is_none() {
        orbit.step();
    }
    let (set, exact, checkpoint_residual) = match orbit.exact_cycle() {
        Some((m, p)) => {
            (Subtree::union_hull(tree, &orbit.sets()[m..m + p]), true, Rational::default())
        }
        None => {
            let union_from = |m: usize| Subtree::union_hull(tree, &orbit.sets()[m..=last]);
            let set = union_from(m_max);
            let r = tree.hausdorff(&union_from(m_max / 2), &set);
            (set, false, r)
        }
    };
    let invariance_residual = tree.hausdorff(&f.image_subtree(&set), &set);
    Ok(LimsupReport { set, exact, fixed_point, checkpoint_residual, invariance_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::examples::*;
    use crate::rational::rat;
    use crate::tree::fixtures::*;

    #[test]
    fn examples() {
        let t = interval();
        let p = ipt(&t, 1, 3);
        let whole = Subtree::whole(&t);
        let r = limsup_set(&PlMap::constant(&t, &p), &whole, 10, 10).unwrap();
        assert_eq!(r.set, Subtree::point(&t, &p));
        let r = limsup_set(&tent(), &whole, 10, 10).unwrap();
        assert_eq!((r.set, r.exact), (whole.clone(), true));
        let r = limsup_set(&half(), &whole, 60, 10).unwrap();
        assert!(!r.exact);
        assert!(t.hausdorff(&r.set, &Subtree::point(&t, &ipt(&t, 0, 1))) < rat(1, 1 << 40));
        assert!(r.invariance_residual < rat(1, 1 << 40));
    }

    #[test]
    fn needs_a_fixed_point() {
        let t = interval();
        let a = t.arc(&ipt(&t, 1, 2), &ipt(&t, 1, 1));
        assert!(matches!(limsup_set(&half(), &a, 5, 5), Err(Error::NoFixedPointInA)));
    }
}
