use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use treedyn_core::map::PERIOD_CAP;
use treedyn_core::sample::{grid_point, random_subtree};
use treedyn_core::PlMap;

use crate::config::RunConfig;
use crate::output::{report, write_json};
use crate::{Failure, Outcome};

const SAMPLES: usize = 200;
const SUBTREES: usize = 50;

#[derive(Serialize)]
struct Check {
    name: &'static str,
    checked: usize,
    violations: usize,
    examples: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check { name, checked: 0, violations: 0, examples: Vec::new() }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(detail());
            }
        }
    }
}

#[derive(Serialize)]
struct Invariants {
    lipschitz: String,
    passed: bool,
    checks: Vec<Check>,
    notes: Vec<String>,
}

pub fn run(f: &PlMap, config: &RunConfig, out: &std::path::Path) -> Result<Outcome, Failure> {
    let tree = f.tree();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let l = f.lipschitz();
    let mut notes = Vec::new();

    let mut lip = Check::new("lipschitz_bound");
    let mut comp = Check::new("composition_agrees");
    let g = f.compose(f).map_err(Failure::Analysis)?;
    for _ in 0..SAMPLES {
        let (x, y) = (grid_point(tree, &mut rng), grid_point(tree, &mut rng));
        let (fx, fy) = (f.evaluate(&x), f.evaluate(&y));
        lip.record(tree.distance(&fx, &fy) <= &l * tree.distance(&x, &y), || format!("{x} {y}"));
        comp.record(g.evaluate(&x) == f.evaluate(&fx), || format!("{x}"));
    }

    let mut image = Check::new("image_of_subcontinuum");
    let mut hausdorff = Check::new("hausdorff_lipschitz");
    let mut prev = None;
    for _ in 0..SUBTREES {
        let a = random_subtree(tree, &mut rng);
        let fa = f.image_subtree(&a);
        let ends_inside = a.ends(tree).iter().all(|p| fa.contains(tree, &f.evaluate(p)));
        let diam_ok = fa.diameter(tree) <= &l * a.diameter(tree);
        image.record(ends_inside && diam_ok, || format!("{a:?}"));
        if let Some((b, fb)) = &prev {
            hausdorff.record(tree.hausdorff(&fa, fb) <= &l * tree.hausdorff(&a, b), || format!("{a:?} {b:?}"));
        }
        prev = Some((a, fa));
    }

    let mut periodic = Check::new("periodic_orbits");
    let (points, segments) = f.fixed_set();
    for p in &points {
        periodic.record(&f.evaluate(p) == p, || format!("fixed point {p}"));
    }
    for s in &segments {
        for p in s.ends(tree) {
            periodic.record(f.evaluate(&p) == p, || format!("fixed segment end {p}"));
        }
    }
    if segments.is_empty() {
        match f.periodic_points(config.max_period.min(PERIOD_CAP).min(6)) {
            Ok(orbits) => {
                for o in orbits {
                    for (i, p) in o.points.iter().enumerate() {
                        let next = &o.points[(i + 1) % o.period];
                        periodic.record(o.points.contains(&f.evaluate(p)), || format!("orbit through {p}"));
                        periodic.record(f.minimal_period(next, o.period) == Some(o.period), || format!("period of {next}"));
                    }
                }
            }
            Err(e) => notes.push(format!("periodic orbits not checked: {e}")),
        }
    }

    let checks = vec![lip, comp, image, hausdorff, periodic];
    let passed = checks.iter().all(|c| c.violations == 0);
    let body = Invariants { lipschitz: treedyn_core::rational::format(&l), passed, checks, notes };
    write_json(out, "invariants.json", &report(config, body))?;
    Ok(if passed { Outcome::Success } else { Outcome::Violation })
}
