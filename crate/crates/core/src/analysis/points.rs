use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::hyperspace::{default_tol, DEFAULT_BUDGET, DEFAULT_MAX_PERIOD, DEFAULT_WINDOW};
use crate::io::serialize_points;
use crate::map::{PeriodicOrbit, PlMap};
use crate::rational::{self, Rational};
use crate::tree::TreePoint;

#[derive(Clone, Debug)]
pub struct PointConfig {
    pub budget: usize,
    pub tol: Rational,
    pub window: usize,
    pub max_period: usize,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig { budget: DEFAULT_BUDGET, tol: default_tol(), window: DEFAULT_WINDOW, max_period: DEFAULT_MAX_PERIOD }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum PointClass {
    /// `fⁿ(x)` reached the AFP exactly (`exact`) or stayed within
    /// tolerance of it for a full window ending at `n`.
    ConvergesToAfp { n: usize, exact: bool },
    /// `fⁿ(x)` lies on a periodic orbit, found exactly.
    EventuallyPeriodic {
        n: usize,
        period: usize,
        cut_point: bool,
        #[serde(serialize_with = "serialize_points")]
        orbit: Vec<TreePoint>,
    },
    Undecided { iterations: usize, distance_to_afp: String },
}

impl PointClass {
    pub fn is_decided(&self) -> bool {
        !matches!(self, PointClass::Undecided { .. })
    }
}

/// Follows the orbit of `x` until it lands on the AFP `s`, on a known or
/// repeated periodic orbit, or settles within `tol` of `s`.
pub fn classify_point(f: &PlMap, x: &TreePoint, s: &TreePoint, known: &[PeriodicOrbit], config: &PointConfig) -> PointClass {
    let tree = f.tree();
    let on_orbit: HashMap<&TreePoint, &PeriodicOrbit> =
        known.iter().flat_map(|o| o.points.iter().map(move |p| (p, o))).collect();
    let tol_f = rational::to_f64(&config.tol);
    let s_f = (s.edge(), rational::to_f64(s.t()));
    let mut seen: HashMap<TreePoint, usize> = HashMap::new();
    let mut y = x.clone();
    let mut streak = 0usize;
    for n in 0..=config.budget {
        if &y == s {
            return PointClass::ConvergesToAfp { n, exact: true };
        }
        if let Some(o) = on_orbit.get(&y) {
            return PointClass::EventuallyPeriodic {
                n,
                period: o.period,
                cut_point: o.has_cut_point(),
                orbit: f.orbit(&y, o.period - 1),
            };
        }
        if let Some(&m) = seen.get(&y) {
            let orbit = f.orbit(&y, n - m - 1);
            let cut_point = orbit.iter().any(|p| !tree.is_endpoint(p));
            return PointClass::EventuallyPeriodic { n: m, period: n - m, cut_point, orbit };
        }
        let close = tree.distance_f64((y.edge(), rational::to_f64(y.t())), s_f) <= 2.0 * tol_f
            && tree.distance(&y, s) < config.tol;
        streak = if close { streak + 1 } else { 0 };
        if streak >= config.window {
            return PointClass::ConvergesToAfp { n, exact: false };
        }
        let next = f.evaluate(&y);
        seen.insert(std::mem::replace(&mut y, next), n);
    }
    PointClass::Undecided {
        iterations: config.budget,
        distance_to_afp: rational::format(&tree.distance(&y, s)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaReport {
    #[serde(serialize_with = "serialize_points")]
    pub points: Vec<TreePoint>,
    /// The orbit is exactly eventually periodic.
    pub exact: bool,
    /// Approximate centres were replaced by nearby periodic points.
    pub snapped: bool,
    pub iterations: usize,
}

/// Approximates `ω(x)`: exact for eventually periodic orbits, otherwise the
/// cluster centres of the orbit tail.
pub fn omega_limit(f: &PlMap, x: &TreePoint, config: &PointConfig) -> OmegaReport {
    let tree = f.tree();
    let tol_f = rational::to_f64(&config.tol);
    let maxp = config.max_period.max(1);
    let mut seen: HashMap<TreePoint, usize> = HashMap::new();
    let mut tail: VecDeque<TreePoint> = VecDeque::with_capacity(maxp + config.window + 1);
    let mut streak = vec![0usize; maxp + 1];
    let mut y = x.clone();
    for n in 0..=config.budget {
        if let Some(&m) = seen.get(&y) {
            let mut points = f.orbit(&y, n - m - 1);
            points.sort();
            return OmegaReport { points, exact: true, snapped: false, iterations: n };
        }
        tail.push_back(y.clone());
        if tail.len() > maxp + config.window {
            tail.pop_front();
        }
        let last = tail.len() - 1;
        let yf = (y.edge(), rational::to_f64(y.t()));
        for p in 1..=maxp.min(last) {
            let z = &tail[last - p];
            let near = tree.distance_f64(yf, (z.edge(), rational::to_f64(z.t()))) <= 2.0 * tol_f
                && tree.distance(&y, z) < config.tol;
            streak[p] = if near { streak[p] + 1 } else { 0 };
            if streak[p] >= config.window {
                let centres: Vec<TreePoint> = tail.iter().skip(last + 1 - p).cloned().collect();
                return snap(f, p, centres, &config.tol, n);
            }
        }
        let next = f.evaluate(&y);
        seen.insert(std::mem::replace(&mut y, next), n);
    }
    // no period confirmed: greedy clusters of the tail
    let mut centres: Vec<TreePoint> = Vec::new();
    for p in &tail {
        if centres.iter().all(|c| tree.distance(c, p) >= config.tol) {
            centres.push(p.clone());
        }
    }
    centres.sort();
    OmegaReport { points: centres, exact: false, snapped: false, iterations: config.budget }
}

fn snap(f: &PlMap, p: usize, centres: Vec<TreePoint>, tol: &Rational, n: usize) -> OmegaReport {
    let tree = f.tree();
    let fixed = f.iterate(p).ok().and_then(|g| g.fixed_points().ok()).unwrap_or_default();
    let mut snapped = false;
    let mut points: Vec<TreePoint> = centres
        .into_iter()
        .map(|c| match fixed.iter().find(|q| &tree.distance(q, &c) < tol) {
            Some(q) => {
                snapped = true;
                q.clone()
            }
            None => c,
        })
        .collect();
    points.sort();
    points.dedup();
    OmegaReport { points, exact: false, snapped, iterations: n }
}
