use serde::Serialize;

use treedyn_core::analysis::{find_afp, immediate_basin, AfpReport, BasinReport};
use treedyn_core::io::{serialize_points, serialize_subtrees};
use treedyn_core::map::{PeriodicSearch, PERIOD_CAP};
use treedyn_core::{Error, PeriodicOrbit, PlMap, Subtree, TreePoint};

use crate::config::RunConfig;
use crate::output::{report, write_json};
use crate::{Failure, Outcome};

const BASIN_DEPTH: usize = 32;

#[derive(Serialize)]
struct Warning {
    kind: &'static str,
    message: String,
    #[serde(serialize_with = "serialize_subtrees", skip_serializing_if = "Vec::is_empty")]
    segments: Vec<Subtree>,
}

#[derive(Serialize)]
struct CutPointVerdict {
    /// Periods actually searched.
    up_to: usize,
    no_periodic_cut_points: bool,
    witness: Option<PeriodicOrbit>,
}

#[derive(Serialize)]
struct Analysis {
    #[serde(serialize_with = "serialize_points")]
    fixed_points: Vec<TreePoint>,
    #[serde(serialize_with = "serialize_subtrees")]
    fixed_segments: Vec<Subtree>,
    periodic_orbits: Vec<PeriodicOrbit>,
    cut_points: CutPointVerdict,
    afp: Option<AfpReport>,
    basin: Option<BasinReport>,
    notes: Vec<String>,
    warnings: Vec<Warning>,
}

pub fn run(f: &PlMap, config: &RunConfig, out: &std::path::Path) -> Result<Outcome, Failure> {
    let (fixed_points, fixed_segments) = f.fixed_set();
    let mut notes = Vec::new();
    let mut warnings = Vec::new();
    if !fixed_segments.is_empty() {
        warnings.push(Warning {
            kind: "FixedSegmentPresent",
            message: Error::FixedSegmentPresent(fixed_segments.clone()).to_string(),
            segments: fixed_segments.clone(),
        });
    }

    let period = config.max_period.min(PERIOD_CAP);
    if period < config.max_period {
        notes.push(format!("period search capped at {PERIOD_CAP}"));
    }
    let mut orbits = Vec::new();
    let mut searched = 0;
    if fixed_segments.is_empty() {
        for batch in PeriodicSearch::new(f, period).map_err(Failure::Analysis)? {
            match batch {
                Ok((p, found)) => {
                    searched = p;
                    orbits.extend(found);
                }
                Err(e) => {
                    notes.push(format!("periodic search stopped after period {searched}: {e}"));
                    break;
                }
            }
        }
    } else {
        notes.push("periodic orbits are not isolated; search skipped".into());
    }
    let witness = orbits.iter().find(|o| o.has_cut_point()).cloned();
    let no_cut = fixed_segments.is_empty() && witness.is_none();
    let cut_points = CutPointVerdict { up_to: searched, no_periodic_cut_points: no_cut, witness };

    let mut outcome = Outcome::Success;
    let (mut afp, mut basin) = (None, None);
    if no_cut {
        match find_afp(f) {
            Ok(report) => {
                basin = Some(immediate_basin(f, &report.afp, BASIN_DEPTH));
                afp = Some(report);
            }
            Err(e) => {
                notes.push(format!("attracting fixed point not found: {e}"));
                outcome = Outcome::Undecided;
            }
        }
    } else {
        notes.push("attracting fixed point analysis needs a map without periodic cut-points".into());
    }

    let body = Analysis {
        fixed_points,
        fixed_segments,
        periodic_orbits: orbits,
        cut_points,
        afp,
        basin,
        notes,
        warnings,
    };
    write_json(out, "analysis.json", &report(config, body))?;
    Ok(outcome)
}
