use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::serialize_point;
use crate::map::{path_overlap, PeriodicOrbit, PeriodicSearch, PlMap};
use crate::rational::{self, Rational};
use crate::tree::{MetricTree, Seg, TreePoint};

/// One round of the endpoint descent: a cut-point moving towards an endpoint
/// and the number of endpoints on that side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DescentStep {
    #[serde(serialize_with = "serialize_point")]
    pub cut_point: TreePoint,
    #[serde(serialize_with = "serialize_point")]
    pub endpoint: TreePoint,
    pub endpoints_in_component: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AfpReport {
    #[serde(serialize_with = "serialize_point")]
    pub afp: TreePoint,
    /// A point `y` on the AFP's edge with `f([afp, y]) ⊆ [afp, y)`.
    #[serde(serialize_with = "serialize_point")]
    pub certificate: TreePoint,
    pub trace: Vec<DescentStep>,
    /// The endpoint was found by the exhaustive scan rather than the descent.
    pub fallback: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutPointCheck {
    pub up_to: usize,
    pub no_periodic_cut_points: bool,
    pub witness: Option<PeriodicOrbit>,
    /// Orbits found before the search stopped.
    pub orbits: Vec<PeriodicOrbit>,
}

/// Searches periods `1..=up_to` and stops at the first orbit through a cut-point.
pub fn verify_no_periodic_cutpoints(f: &PlMap, up_to: usize) -> Result<CutPointCheck> {
    let mut orbits = Vec::new();
    for batch in PeriodicSearch::new(f, up_to)? {
        let (_, found) = batch?;
        for orbit in found {
            if orbit.has_cut_point() {
                return Ok(CutPointCheck { up_to, no_periodic_cut_points: false, witness: Some(orbit), orbits });
            }
            orbits.push(orbit);
        }
    }
    Ok(CutPointCheck { up_to, no_periodic_cut_points: true, witness: None, orbits })
}

/// Exact check of `f([s, y]) ⊆ [s, y)`.
pub fn certify_afp(f: &PlMap, s: &TreePoint, y: &TreePoint) -> bool {
    let tree = f.tree();
    let arc = tree.arc(s, y);
    let image = f.image_subtree(&arc);
    image.is_subset(&arc) && !image.contains(tree, y)
}

fn midpoint(tree: &MetricTree, x: &TreePoint, y: &TreePoint) -> TreePoint {
    let segs = tree.path(x, y);
    tree.point_along(x, &segs, &(tree.distance(x, y) / rational::int(2)))
}

/// The vertex at the other end of the edge of endpoint `s`.
fn leaf_neighbour(tree: &MetricTree, s: &TreePoint) -> TreePoint {
    let v = tree.vertex_at(s).expect("endpoint is a vertex");
    let e = tree.incident(v)[0];
    tree.vertex_point(tree.other_end(e, v))
}

fn endpoints(tree: &MetricTree) -> Vec<TreePoint> {
    tree.endpoints().into_iter().map(|v| tree.vertex_point(v)).collect()
}

fn check_no_fixed_cut_point(f: &PlMap) -> Result<()> {
    let tree = f.tree();
    match f.fixed_points() {
        Err(Error::FixedSegmentPresent(segs)) => {
            Err(Error::FixedCutPointFound(format!("fixed segment {}", segs[0].display())))
        }
        Err(e) => Err(e),
        Ok(points) => match points.iter().find(|p| !tree.is_endpoint(p)) {
            Some(p) => Err(Error::FixedCutPointFound(p.to_string())),
            None => Ok(()),
        },
    }
}

/// A cut-point to start the descent from: a branch vertex when there is one.
pub fn default_start(tree: &MetricTree) -> TreePoint {
    let mut best: Option<crate::tree::VertexId> = None;
    for v in (0..tree.vertex_count()).map(crate::tree::VertexId) {
        if tree.valence(v) >= 2 && best.is_none_or(|b| tree.valence(v) > tree.valence(b)) {
            best = Some(v);
        }
    }
    match best {
        Some(v) => tree.vertex_point(v),
        None => tree.canonical(crate::tree::EdgeId(0), rational::rat(1, 2)),
    }
}

/// Finds the attracting fixed point of a map with no fixed cut-point.
pub fn find_afp(f: &PlMap) -> Result<AfpReport> {
    find_afp_from(f, &default_start(f.tree()))
}

/// [`find_afp`] starting the descent at the cut-point `start`.
pub fn find_afp_from(f: &PlMap, start: &TreePoint) -> Result<AfpReport> {
    check_no_fixed_cut_point(f)?;
    let tree = f.tree();
    if tree.is_endpoint(start) {
        return Err(Error::Spec(format!("descent must start at a cut-point, got {start}")));
    }
    let ends = endpoints(tree);
    let endpoint_in = |c: &TreePoint, p: &TreePoint| ends.iter().find(|e| tree.in_component(c, p, e)).cloned();
    let count_in = |c: &TreePoint, x: &TreePoint| ends.iter().filter(|e| tree.in_component(c, x, e)).count();

    let mut y = start.clone();
    let mut x = endpoint_in(&y, &f.evaluate(&y)).expect("image off a cut-point has an endpoint side");
    let mut k = count_in(&y, &x);
    let mut trace = vec![DescentStep { cut_point: y.clone(), endpoint: x.clone(), endpoints_in_component: k }];
    for _ in 0..ends.len() {
        let w = leaf_neighbour(tree, &x);
        let target = if tree.on_arc(&y, &x, &w) { y.clone() } else { w };
        let y1 = midpoint(tree, &x, &target);
        let fy1 = f.evaluate(&y1);
        if fy1 != y1 && tree.on_arc(&fy1, &x, &y1) {
            if let Some(cert) = certificate_ladder(f, &x, &y1) {
                return Ok(AfpReport { afp: x, certificate: cert, trace, fallback: false });
            }
            break;
        }
        let Some(y2) = projected_fixed_point(f, &y1, &y) else { break };
        let Some(nx) = endpoint_in(&y2, &f.evaluate(&y2)) else { break };
        let nk = count_in(&y2, &nx);
        if nk >= k {
            break;
        }
        y = y2;
        x = nx;
        k = nk;
        trace.push(DescentStep { cut_point: y.clone(), endpoint: x.clone(), endpoints_in_component: k });
    }
    for e in &ends {
        let w = leaf_neighbour(tree, e);
        if let Some(cert) = certificate_ladder(f, e, &w) {
            return Ok(AfpReport { afp: e.clone(), certificate: cert, trace, fallback: true });
        }
    }
    Err(Error::DescentStalled(trace))
}

/// Tries `y` and then points halving the distance to `s`, 20 levels in all.
fn certificate_ladder(f: &PlMap, s: &TreePoint, y: &TreePoint) -> Option<TreePoint> {
    let tree = f.tree();
    let mut y = y.clone();
    for _ in 0..20 {
        if certify_afp(f, s, &y) {
            return Some(y);
        }
        y = midpoint(tree, s, &y);
    }
    None
}

/// Fixed point nearest `y1` of `g = Pr_[y1,y] ∘ f` on the arc `[y1, y]`.
fn projected_fixed_point(f: &PlMap, y1: &TreePoint, y: &TreePoint) -> Option<TreePoint> {
    let tree = f.tree();
    let segs = tree.path(y1, y);
    let arc = tree.arc(y1, y);
    let at = |u: &Rational| tree.point_along(y1, &segs, u);

    // g is linear between consecutive candidates once the entry/exit
    // positions of each image path into the arc are added.
    let mut cand = breakpoints_along(f, &segs);
    let mut extra = Vec::new();
    for w in cand.windows(2) {
        let (ua, ub) = (&w[0], &w[1]);
        let (p, q) = (f.evaluate(&at(ua)), f.evaluate(&at(ub)));
        let path = tree.path(&p, &q);
        let len = tree.distance(&p, &q);
        if len.is_zero() {
            continue;
        }
        if let Some((a, b)) = path_overlap(&path, &arc) {
            for s in [a, b] {
                if s > Rational::zero() && s < len {
                    extra.push(ua + s / &len * (ub - ua));
                }
            }
        }
    }
    cand.extend(extra);
    cand.sort();
    cand.dedup();
    let h: Vec<Rational> = cand
        .iter()
        .map(|u| tree.distance(y1, &arc.project(tree, &f.evaluate(&at(u)))) - u)
        .collect();
    for i in 0..cand.len() {
        if h[i].is_zero() {
            return Some(at(&cand[i]));
        }
        if i + 1 < cand.len() && (h[i] > Rational::zero()) != (h[i + 1] > Rational::zero()) && !h[i + 1].is_zero() {
            let u = &cand[i] + &h[i] * (&cand[i + 1] - &cand[i]) / (&h[i] - &h[i + 1]);
            return Some(at(&u));
        }
    }
    None
}

/// Arc-length positions along `segs` of vertices and breakpoints of `f`,
/// including both ends.
pub(crate) fn breakpoints_along(f: &PlMap, segs: &[Seg]) -> Vec<Rational> {
    let tree = f.tree();
    let mut out = vec![Rational::zero()];
    let mut cum = Rational::zero();
    for seg in segs {
        let (lo, hi) = if seg.from <= seg.to { (&seg.from, &seg.to) } else { (&seg.to, &seg.from) };
        for t in f.breakpoints(seg.edge).iter().filter(|t| lo < *t && *t < hi) {
            out.push(&cum + (t - &seg.from).abs() * tree.length(seg.edge));
        }
        cum += &seg.length;
        out.push(cum.clone());
    }
    out.sort();
    out.dedup();
    out
}
