use serde::Serialize;

use treedyn_core::hyperspace::{classify_subcontinuum, ClassifyConfig, ContinuumOrbit, DichotomyVerdict, VerdictTag};
use treedyn_core::io::serialize_subtree;
use treedyn_core::{PlMap, Subtree};

use crate::config::RunConfig;
use crate::output::{report, write_csv, write_json};
use crate::{Failure, Outcome};

#[derive(Serialize)]
struct Verdict {
    #[serde(serialize_with = "serialize_subtree")]
    continuum: Subtree,
    verdict: DichotomyVerdict,
}

pub fn run(f: &PlMap, a: Subtree, config: &RunConfig, out: &std::path::Path) -> Result<Outcome, Failure> {
    let settings = ClassifyConfig {
        budget: config.budget,
        tol: config.tol.clone(),
        max_period: config.max_period,
        ..ClassifyConfig::default()
    };
    let verdict = classify_subcontinuum(f, &a, &settings).map_err(Failure::Analysis)?;
    let mut orbit = ContinuumOrbit::new(f, a.clone());
    orbit.extend_to(verdict.iterations);
    let rows: Vec<Vec<String>> = orbit
        .rows()
        .into_iter()
        .map(|r| vec![r.n.to_string(), r.diameter, r.step_distance])
        .collect();
    write_csv(out, "orbit.csv", &["n", "diameter", "step_distance"], &rows)?;
    let outcome = if verdict.tag == VerdictTag::Undecided { Outcome::Undecided } else { Outcome::Success };
    write_json(out, "verdict.json", &report(config, Verdict { continuum: a, verdict }))?;
    Ok(outcome)
}
