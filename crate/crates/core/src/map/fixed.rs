use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::Serialize;

use super::PlMap;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::{PointKind, Subtree, TreePoint};

/// Largest period accepted by [`PlMap::periodic_points`].
pub const PERIOD_CAP: usize = 20;

/// A periodic orbit of minimal period `period`, listed along the orbit
/// starting from its smallest point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    #[serde(serialize_with = "crate::io::serialize_points")]
    pub points: Vec<TreePoint>,
    pub kinds: Vec<PointKind>,
}

impl PeriodicOrbit {
    pub fn has_cut_point(&self) -> bool {
        self.kinds.contains(&PointKind::CutPoint)
    }
}

impl PlMap {
    /// All fixed points, or [`Error::FixedSegmentPresent`] with the connected
    /// pieces of a pointwise-fixed set of positive length.
    pub fn fixed_points(&self) -> Result<Vec<TreePoint>> {
        let (points, segments) = self.fixed_set();
        if segments.is_empty() {
            Ok(points)
        } else {
            Err(Error::FixedSegmentPresent(segments))
        }
    }

    /// Isolated fixed points and fixed segments (grouped by connectivity).
    /// Isolated points lying on a fixed segment are dropped.
    pub fn fixed_set(&self) -> (Vec<TreePoint>, Vec<Subtree>) {
        let tree = self.tree();
        let mut points = BTreeSet::new();
        let mut segments: Vec<Subtree> = Vec::new();
        for e in tree.edge_ids() {
            let len_e = tree.length(e);
            for piece in self.pieces(e) {
                for (t, img) in [(&piece.lo, &piece.start), (&piece.hi, &piece.end)] {
                    if tree.param_on(img, e).as_ref() == Some(t) {
                        points.insert(img.clone());
                    }
                }
                if piece.len.is_zero() {
                    if let Some(t) = tree.param_on(&piece.start, e) {
                        if piece.lo <= t && t <= piece.hi {
                            points.insert(piece.start.clone());
                        }
                    }
                    continue;
                }
                let dt = &piece.hi - &piece.lo;
                let mut cum = Rational::zero();
                for seg in &piece.segs {
                    let start = cum.clone();
                    cum += &seg.length;
                    if seg.edge != e {
                        continue;
                    }
                    // image param along this seg: from + dir * (u - start) / len_e,
                    // with u = (s - lo) * len / dt; solve image param == s.
                    let dir = if seg.to > seg.from { Rational::one() } else { -Rational::one() };
                    let a = &dir * &piece.len / (&dt * len_e);
                    let b = &seg.from - &dir * (&piece.lo * &piece.len / &dt + &start) / len_e;
                    // s range where u lies inside the seg
                    let s0 = piece.param_at(&start);
                    let s1 = piece.param_at(&cum);
                    if a.is_one() {
                        if b.is_zero() {
                            let mut parts = vec![None; tree.edge_count()];
                            parts[e.0] = Some((s0, s1));
                            segments.push(Subtree::from_hull(tree, parts));
                        }
                    } else {
                        let s = &b / (Rational::one() - &a);
                        if s0 <= s && s <= s1 {
                            points.insert(tree.canonical(e, s));
                        }
                    }
                }
            }
        }
        let segments = Subtree::union_components(tree, &segments);
        let points = points.into_iter().filter(|p| !segments.iter().any(|s| s.contains(tree, p))).collect();
        (points, segments)
    }

    /// Periodic orbits of minimal period at most `up_to`.
    pub fn periodic_points(&self, up_to: usize) -> Result<Vec<PeriodicOrbit>> {
        let mut out = Vec::new();
        for batch in PeriodicSearch::new(self, up_to)? {
            out.extend(batch?.1);
        }
        Ok(out)
    }

    /// Smallest `q ≥ 1` with `f^q(x) = x`, searching up to `limit`.
    pub fn minimal_period(&self, x: &TreePoint, limit: usize) -> Option<usize> {
        let mut y = x.clone();
        for q in 1..=limit {
            y = self.evaluate(&y);
            if &y == x {
                return Some(q);
            }
        }
        None
    }
}

/// Period-by-period search for periodic orbits, yielding the orbits of each
/// minimal period `p = 1, 2, …` in turn so callers can stop early.
pub struct PeriodicSearch<'a> {
    f: &'a PlMap,
    power: Option<PlMap>,
    p: usize,
    up_to: usize,
    seen: BTreeSet<TreePoint>,
}

impl<'a> PeriodicSearch<'a> {
    pub fn new(f: &'a PlMap, up_to: usize) -> Result<Self> {
        if up_to > PERIOD_CAP {
            return Err(Error::PeriodCapExceeded { requested: up_to, cap: PERIOD_CAP });
        }
        Ok(PeriodicSearch { f, power: None, p: 0, up_to, seen: BTreeSet::new() })
    }
}

impl Iterator for PeriodicSearch<'_> {
    type Item = Result<(usize, Vec<PeriodicOrbit>)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.p >= self.up_to {
            return None;
        }
        self.p += 1;
        let power = match self.power.take() {
            None => self.f.clone(),
            Some(prev) => match self.f.compose(&prev) {
                Ok(m) => m,
                Err(e) => {
                    self.p = self.up_to;
                    return Some(Err(e));
                }
            },
        };
        let fixed = power.fixed_points();
        self.power = Some(power);
        let fixed = match fixed {
            Ok(v) => v,
            Err(e) => {
                self.p = self.up_to;
                return Some(Err(e));
            }
        };
        let tree = self.f.tree();
        let mut orbits = Vec::new();
        for x in fixed {
            if self.seen.contains(&x) || self.f.minimal_period(&x, self.p) != Some(self.p) {
                continue;
            }
            let mut points = self.f.orbit(&x, self.p - 1);
            self.seen.extend(points.iter().cloned());
            let start = (0..points.len()).min_by_key(|&i| &points[i]).unwrap();
            points.rotate_left(start);
            let kinds = points.iter().map(|q| tree.point_kind(q)).collect();
            orbits.push(PeriodicOrbit { period: self.p, points, kinds });
        }
        Some(Ok((self.p, orbits)))
    }
}


#[cfg(test)]
mod tests {
    use super::super::examples::*;
    use super::*;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::*;

    #[test]
    fn tent_fixed_points() {
        let t = interval();
        assert_eq!(tent().fixed_points().unwrap(), vec![ipt(&t, 0, 1), ipt(&t, 2, 3)]);
    }

    #[test]
    fn identity_has_fixed_segment() {
        let t = interval();
        match PlMap::identity(&t).fixed_points() {
            Err(Error::FixedSegmentPresent(s)) => assert_eq!(s, vec![Subtree::whole(&t)]),
            other => panic!("{other:?}"),
        }
        let tri = triod();
        match PlMap::identity(&tri).fixed_points() {
            Err(Error::FixedSegmentPresent(s)) => assert_eq!(s, vec![Subtree::whole(&tri)]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(PlMap::identity(&t).periodic_points(2), Err(Error::FixedSegmentPresent(_))));
    }

    #[test]
    fn constant_map_fixes_its_value() {
        let tri = triod();
        let p = leg(&tri, 1, 1, 3);
        let c = PlMap::constant(&tri, &p);
        assert_eq!(c.fixed_points().unwrap(), vec![p.clone()]);
        let orbits = c.periodic_points(5).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].points, vec![p]);
    }

    #[test]
    fn tent_periodic_points() {
        let t = interval();
        let orbits = tent().periodic_points(2).unwrap();
        let pts: Vec<Vec<TreePoint>> = orbits.iter().map(|o| o.points.clone()).collect();
        assert_eq!(
            pts,
            vec![vec![ipt(&t, 0, 1)], vec![ipt(&t, 2, 3)], vec![ipt(&t, 2, 5), ipt(&t, 4, 5)]]
        );
        assert_eq!(orbits[0].kinds, vec![PointKind::Endpoint]);
        assert_eq!(orbits[2].kinds, vec![PointKind::CutPoint; 2]);
    }

    #[test]
    fn tent_orbit_counts_match_closed_form() {
        // tent^p has exactly 2^p fixed points
        let f = tent();
        for p in 1..=8 {
            assert_eq!(f.iterate(p).unwrap().fixed_points().unwrap().len(), 1 << p);
        }
        let orbits = f.periodic_points(6).unwrap();
        let by_period = |p: usize| orbits.iter().filter(|o| o.period == p).count();
        assert_eq!([1, 2, 3, 4, 5, 6].map(by_period), [2, 1, 2, 3, 6, 9]);
    }

    #[test]
    fn period_cap() {
        assert!(matches!(tent().periodic_points(21), Err(Error::PeriodCapExceeded { requested: 21, cap: 20 })));
    }

    #[test]
    fn fixed_points_satisfy_equation() {
        let tri = triod();
        let table = vec![
            vec![(int(0), leg(&tri, 1, 1, 2)), (int(1), leg(&tri, 2, 1, 1))],
            vec![(int(0), leg(&tri, 1, 1, 2)), (rat(1, 2), leg(&tri, 0, 1, 1)), (int(1), leg(&tri, 1, 1, 4))],
            vec![(int(0), leg(&tri, 1, 1, 2)), (int(1), leg(&tri, 0, 1, 2))],
        ];
        let f = PlMap::new(tri, table).unwrap();
        for p in 1..=4 {
            let g = f.iterate(p).unwrap();
            for x in g.fixed_points().unwrap() {
                assert_eq!(g.evaluate(&x), x);
            }
        }
    }
}
