//! Orbits of subcontinua under `A ↦ f(A)` and the periodic/degenerate classifier.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{serialize_rational, serialize_subtrees};
use crate::map::PlMap;
use crate::rational::{self, Rational};
use crate::tree::{MetricTree, Subtree};

pub const DEFAULT_BUDGET: usize = 10_000;
pub const DEFAULT_MAX_PERIOD: usize = 24;
pub const DEFAULT_WINDOW: usize = 50;

pub fn default_tol() -> Rational {
    rational::rat(1, 1_000_000)
}

/// The exact orbit `A, f(A), f²(A), …`, grown on demand.
#[derive(Clone, Debug)]
pub struct ContinuumOrbit<'a> {
    f: &'a PlMap,
    sets: Vec<Subtree>,
    diameters: Vec<Rational>,
    steps: Vec<Rational>,
    seen: HashMap<Subtree, usize>,
    cycle: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRow {
    pub n: usize,
    pub diameter: String,
    pub step_distance: String,
}

impl<'a> ContinuumOrbit<'a> {
    pub fn new(f: &'a PlMap, a: Subtree) -> Self {
        let d = a.diameter(f.tree());
        let mut seen = HashMap::new();
        seen.insert(a.clone(), 0);
        ContinuumOrbit { f, sets: vec![a], diameters: vec![d], steps: Vec::new(), seen, cycle: None }
    }

    /// Index of the last computed iterate.
    pub fn len(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, n: usize) -> &Subtree {
        &self.sets[n]
    }

    pub fn sets(&self) -> &[Subtree] {
        &self.sets
    }

    pub fn diameter(&self, n: usize) -> &Rational {
        &self.diameters[n]
    }

    /// `d_H(fⁿ(A), fⁿ⁺¹(A))`.
    pub fn step_distance(&self, n: usize) -> &Rational {
        &self.steps[n]
    }

    /// First exact repeat `fᵐ(A) = fᵐ⁺ᵖ(A)` as `(m, p)`, once reached.
    pub fn exact_cycle(&self) -> Option<(usize, usize)> {
        self.cycle
    }

    /// Computes one more iterate.
    pub fn step(&mut self) -> &Subtree {
        let n = self.sets.len() - 1;
        let next = match self.cycle {
            Some((m, p)) => self.sets[m + (n + 1 - m) % p].clone(),
            None => self.f.image_subtree(&self.sets[n]),
        };
        let tree = self.f.tree();
        self.steps.push(tree.hausdorff(&self.sets[n], &next));
        self.diameters.push(next.diameter(tree));
        if self.cycle.is_none() {
            if let Some(&m) = self.seen.get(&next) {
                self.cycle = Some((m, n + 1 - m));
            } else {
                self.seen.insert(next.clone(), n + 1);
            }
        }
        self.sets.push(next);
        self.sets.last().unwrap()
    }

    pub fn extend_to(&mut self, n: usize) {
        while self.len() < n {
            self.step();
        }
    }

    pub fn rows(&self) -> Vec<OrbitRow> {
        (0..self.sets.len())
            .map(|n| OrbitRow {
                n,
                diameter: rational::format(&self.diameters[n]),
                step_distance: self.steps.get(n).map(rational::format).unwrap_or_default(),
            })
            .collect()
    }
}

/// The first `n` iterates of `A`, i.e. `n + 1` sets.
pub fn iterate_continuum<'a>(f: &'a PlMap, a: &Subtree, n: usize, budget: usize) -> Result<ContinuumOrbit<'a>> {
    if n > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    let mut orbit = ContinuumOrbit::new(f, a.clone());
    orbit.extend_to(n);
    Ok(orbit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictTag {
    AsymptoticallyPeriodic,
    AsymptoticallyDegenerate,
    Both,
    Undecided,
}

impl VerdictTag {
    pub fn is_periodic(self) -> bool {
        matches!(self, VerdictTag::AsymptoticallyPeriodic | VerdictTag::Both)
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, VerdictTag::AsymptoticallyDegenerate | VerdictTag::Both)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Residuals {
    /// Smallest diameter seen.
    #[serde(serialize_with = "serialize_rational")]
    pub diameter: Rational,
    /// Smallest `d_H(A_n, A_{n-p})` seen, with its `p`.
    pub period: Option<(usize, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyVerdict {
    pub tag: VerdictTag,
    pub period: Option<usize>,
    /// Limit cycle (exact when `exact` is set, else the last `p` iterates).
    #[serde(serialize_with = "serialize_subtrees")]
    pub cycle: Vec<Subtree>,
    /// Tail diameters witnessing degeneracy.
    pub diameters: Vec<String>,
    pub iterations: usize,
    /// The orbit reached an exact cycle.
    pub exact: bool,
    pub residuals: Residuals,
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub budget: usize,
    pub tol: Rational,
    pub max_period: usize,
    pub window: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            budget: DEFAULT_BUDGET,
            tol: default_tol(),
            max_period: DEFAULT_MAX_PERIOD,
            window: DEFAULT_WINDOW,
        }
    }
}

pub fn classify_subcontinuum(f: &PlMap, a: &Subtree, config: &ClassifyConfig) -> Result<DichotomyVerdict> {
    if !config.tol.is_positive() {
        return Err(Error::NonpositiveEpsilon);
    }
    if config.max_period == 0 || config.budget == 0 {
        return Err(Error::Spec("budget and max_period must be at least 1".into()));
    }
    let tree = f.tree();
    let tol = &config.tol;
    let tol_f = rational::to_f64(tol);
    let w = config.window.max(1);
    let mut orbit = ContinuumOrbit::new(f, a.clone());

    let mut best_diam = orbit.diameter(0).clone();
    let mut best_period: Option<(usize, Rational)> = None;
    let mut diam_streak = usize::from(orbit.diameter(0) < tol);
    let mut period_streak = vec![0usize; config.max_period + 1];
    let mut degenerate_at: Option<usize> = (diam_streak >= w).then_some(0);
    let mut periodic: Option<(usize, usize)> = None;

    let finish = |tag: VerdictTag, period: Option<usize>, cycle: Vec<Subtree>, orbit: &ContinuumOrbit, exact: bool, best_diam: Rational, best_period: &Option<(usize, Rational)>| {
        let n = orbit.len();
        let from = (n + 1).saturating_sub(w);
        DichotomyVerdict {
            tag,
            period,
            cycle,
            diameters: if tag.is_degenerate() {
                (from..=n).map(|i| rational::format(orbit.diameter(i))).collect()
            } else {
                Vec::new()
            },
            iterations: n,
            exact,
            residuals: Residuals {
                diameter: best_diam,
                period: best_period.as_ref().map(|(p, r)| (*p, rational::format(r))),
            },
        }
    };

    while orbit.len() < config.budget {
        orbit.step();
        let n = orbit.len();
        if let Some((m, p)) = orbit.exact_cycle() {
            let cycle: Vec<Subtree> = orbit.sets()[m..m + p].to_vec();
            let degenerate = cycle.iter().all(|s| s.is_degenerate(tree));
            let tag = if degenerate { VerdictTag::Both } else { VerdictTag::AsymptoticallyPeriodic };
            if degenerate {
                best_diam = Rational::zero();
            }
            return Ok(finish(tag, Some(p), cycle, &orbit, true, best_diam, &Some((p, Rational::zero()))));
        }
        let d = orbit.diameter(n);
        if d < &best_diam {
            best_diam = d.clone();
        }
        if d < tol {
            diam_streak += 1;
        } else {
            diam_streak = 0;
        }
        if diam_streak >= w && degenerate_at.is_none() {
            degenerate_at = Some(n);
        }
        for (p, streak) in period_streak.iter_mut().enumerate().take(config.max_period.min(n) + 1).skip(1) {
            let (x, y) = (orbit.get(n), orbit.get(n - p));
            let below = tree.hausdorff_f64(x, y) <= 2.0 * tol_f && {
                let r = tree.hausdorff(x, y);
                let below = &r < tol;
                if best_period.as_ref().is_none_or(|(_, b)| &r < b) {
                    best_period = Some((p, r));
                }
                below
            };
            *streak = if below { *streak + 1 } else { 0 };
            if *streak >= w && periodic.is_none() {
                periodic = Some((p, n));
            }
        }
        let first = match (degenerate_at, periodic) {
            (Some(_), Some(_)) => break,
            (Some(a), None) => a,
            (None, Some((_, b))) => b,
            (None, None) => continue,
        };
        if n >= first + w + config.max_period {
            break;
        }
    }

    let n = orbit.len();
    let tag = match (degenerate_at.is_some(), periodic.is_some()) {
        (true, true) => VerdictTag::Both,
        (true, false) => VerdictTag::AsymptoticallyDegenerate,
        (false, true) => VerdictTag::AsymptoticallyPeriodic,
        (false, false) => VerdictTag::Undecided,
    };
    let (period, cycle) = match periodic {
        Some((p, _)) => (Some(p), orbit.sets()[n + 1 - p..=n].to_vec()),
        None => (None, Vec::new()),
    };
    Ok(finish(tag, period, cycle, &orbit, false, best_diam, &best_period))
}

/// Smallest `p` and start `m` such that `seq[m..]` is `p`-periodic and
/// shows at least one repeat.
pub fn eventual_cycle(seq: &[Subtree]) -> Option<(usize, usize)> {
    let n = seq.len();
    for p in 1..n {
        let mut m = n - p;
        while m > 0 && seq[m - 1] == seq[m - 1 + p] {
            m -= 1;
        }
        if seq[n - 1 - p] == seq[n - 1] && n - m > p {
            return Some((m, p));
        }
    }
    None
}

/// Liminf and limsup of a sequence of subcontinua.
///
/// An eventually periodic sequence gives the exact pair (intersection and
/// union of the cycle); otherwise the whole slice is used as the window.
pub fn liminf_limsup(tree: &MetricTree, seq: &[Subtree]) -> Result<(Subtree, Subtree)> {
    if seq.is_empty() {
        return Err(Error::EmptyLiminf);
    }
    let window = match eventual_cycle(seq) {
        Some((m, p)) => &seq[m..m + p],
        None => seq,
    };
    let mut inf = window[0].clone();
    for s in &window[1..] {
        inf = inf.intersection(s).ok_or(Error::EmptyLiminf)?;
    }
    let sup = Subtree::union_components(tree, window);
    if sup.len() != 1 {
        return Err(Error::DisconnectedLimsup);
    }
    Ok((inf, sup.into_iter().next().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::examples::*;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::*;
    use crate::tree::EdgeId;
    use proptest::prelude::*;

    fn iv(t: &MetricTree, a: (i64, i64), b: (i64, i64)) -> Subtree {
        t.arc(&ipt(t, a.0, a.1), &ipt(t, b.0, b.1))
    }

    #[test]
    fn orbit_examples() {
        let t = interval();
        let p = ipt(&t, 1, 3);
        let c = PlMap::constant(&t, &p);
        let a = iv(&t, (0, 1), (1, 2));
        let o = iterate_continuum(&c, &a, 3, 100).unwrap();
        assert_eq!(o.sets()[1..], vec![Subtree::point(&t, &p); 3][..]);

        let id = PlMap::identity(&t);
        assert_eq!(iterate_continuum(&id, &a, 5, 100).unwrap().sets(), &vec![a.clone(); 6][..]);

        let f = tent();
        let o = iterate_continuum(&f, &iv(&t, (0, 1), (1, 8)), 3, 100).unwrap();
        let expect: Vec<_> = [8, 4, 2, 1].iter().map(|&d| iv(&t, (0, 1), (1, d))).collect();
        assert_eq!(o.sets(), &expect[..]);
        assert_eq!(o.step_distance(0), &rat(1, 8));
        assert!(matches!(iterate_continuum(&tent(), &a, 11, 10), Err(Error::BudgetExceeded(10))));
    }

    #[test]
    fn classify_examples() {
        let t = interval();
        let cfg = ClassifyConfig::default();
        let c = PlMap::constant(&t, &ipt(&t, 1, 3));
        let v = classify_subcontinuum(&c, &iv(&t, (0, 1), (1, 2)), &cfg).unwrap();
        assert_eq!((v.tag, v.period), (VerdictTag::Both, Some(1)));

        let v = classify_subcontinuum(&tent(), &Subtree::whole(&t), &cfg).unwrap();
        assert_eq!((v.tag, v.period, v.exact), (VerdictTag::AsymptoticallyPeriodic, Some(1), true));
        assert_eq!(v.cycle, vec![Subtree::whole(&t)]);

        let v = classify_subcontinuum(&half(), &iv(&t, (1, 4), (1, 2)), &cfg).unwrap();
        assert_eq!((v.tag, v.period, v.exact), (VerdictTag::Both, Some(1), false));
        assert!(v.diameters.iter().all(|d| rational::parse(d).unwrap() < cfg.tol));
    }

    #[test]
    fn small_budget_is_undecided() {
        let t = interval();
        let cfg = ClassifyConfig { budget: 1, max_period: 1, ..Default::default() };
        let v = classify_subcontinuum(&half(), &iv(&t, (1, 4), (1, 2)), &cfg).unwrap();
        assert_eq!(v.tag, VerdictTag::Undecided);
        assert_eq!(v.residuals.diameter, rat(1, 8));
    }

    #[test]
    fn rotating_points_are_both_with_period() {
        // f swaps the two halves: period-2 orbit of points
        let t = interval();
        let f = PlMap::on_interval(t.clone(), &[(int(0), int(1)), (int(1), int(0))]).unwrap();
        let v = classify_subcontinuum(&f, &Subtree::point(&t, &ipt(&t, 1, 5)), &ClassifyConfig::default()).unwrap();
        assert_eq!((v.tag, v.period), (VerdictTag::Both, Some(2)));
        let v = classify_subcontinuum(&f, &iv(&t, (0, 1), (1, 5)), &ClassifyConfig::default()).unwrap();
        assert_eq!((v.tag, v.period), (VerdictTag::AsymptoticallyPeriodic, Some(2)));
    }

    #[test]
    fn liminf_limsup_examples() {
        let t = interval();
        let a = iv(&t, (0, 1), (1, 2));
        assert_eq!(liminf_limsup(&t, &[a.clone(), a.clone()]).unwrap(), (a.clone(), a.clone()));
        let b = iv(&t, (1, 2), (1, 1));
        let (inf, sup) = liminf_limsup(&t, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(inf, Subtree::point(&t, &ipt(&t, 1, 2)));
        assert_eq!(sup, Subtree::whole(&t));

        let f = tent();
        let o = iterate_continuum(&f, &iv(&t, (0, 1), (1, 8)), 8, 100).unwrap();
        let w = Subtree::whole(&t);
        assert_eq!(liminf_limsup(&t, o.sets()).unwrap(), (w.clone(), w));

        let c = iv(&t, (0, 1), (1, 4));
        let d = iv(&t, (3, 4), (1, 1));
        assert!(matches!(liminf_limsup(&t, &[c.clone(), d.clone()]), Err(Error::EmptyLiminf)));
    }

    #[test]
    fn exact_cycle_detection() {
        let t = interval();
        let a = iv(&t, (0, 1), (1, 2));
        let b = iv(&t, (1, 2), (1, 1));
        let c = iv(&t, (1, 4), (1, 1));
        assert_eq!(eventual_cycle(&[c.clone(), a.clone(), b.clone(), a.clone()]), Some((1, 2)));
        assert_eq!(eventual_cycle(&[a.clone(), b.clone()]), None);
        assert_eq!(eventual_cycle(&[c.clone(), a.clone(), a.clone()]), Some((1, 1)));
    }

    proptest! {
        #[test]
        fn lipschitz_transfer(a0 in 0i64..=64, a1 in 0i64..=64, b0 in 0i64..=64, b1 in 0i64..=64) {
            let t = interval();
            let f = tent().iterate(2).unwrap();
            let l = f.lipschitz();
            let mk = |x: i64, y: i64| t.arc(&t.point(EdgeId(0), rat(x, 64)).unwrap(), &t.point(EdgeId(0), rat(y, 64)).unwrap());
            let (a, b) = (mk(a0, a1), mk(b0, b1));
            let lhs = t.hausdorff(&f.image_subtree(&a), &f.image_subtree(&b));
            prop_assert!(lhs <= l * t.hausdorff(&a, &b));
        }

        #[test]
        fn liminf_within_limsup(xs in proptest::collection::vec((0i64..=16, 0i64..=16), 1..6)) {
            let t = interval();
            let seq: Vec<Subtree> = xs.iter().map(|&(x, y)| t.arc(&ipt(&t, x, 16), &ipt(&t, y, 16))).collect();
            if let Ok((inf, sup)) = liminf_limsup(&t, &seq) {
                prop_assert!(inf.is_subset(&sup));
            }
        }
    }
}
