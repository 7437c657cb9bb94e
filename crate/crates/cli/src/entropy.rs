use serde::Serialize;

use treedyn_core::entropy::{
    entropy_estimate, envelope_entropy_bounds, envelope_sep_family, EnvelopeBounds, EntropyEstimate, PairCheck,
};
use treedyn_core::io::serialize_rational;
use treedyn_core::{EdgeId, PlMap, Rational};

use crate::config::RunConfig;
use crate::output::{file_tag, opt, report, write_csv, write_json};
use crate::{Failure, Outcome};

const PAIR_SAMPLES: usize = 64;
const FAMILY_N: usize = 4;

#[derive(Serialize)]
struct Summary<'a> {
    lower: f64,
    upper: Option<f64>,
    estimate: &'a EntropyEstimate,
    notes: Vec<&'static str>,
}

pub fn run_entropy(f: &PlMap, config: &RunConfig, out: &std::path::Path) -> Result<Outcome, Failure> {
    let e = entropy_estimate(f, config.n_max, &config.eps_list, &config.grid).map_err(Failure::Analysis)?;
    let rows: Vec<Vec<String>> = e
        .cells
        .iter()
        .map(|c| {
            vec![
                c.n.to_string(),
                treedyn_core::rational::format(&c.eps),
                c.sep_lb.to_string(),
                opt(c.span_ub),
                opt(c.rate_lb),
                opt(c.rate_ub),
            ]
        })
        .collect();
    write_csv(out, "entropy.csv", &["n", "epsilon", "sep_lb", "span_ub", "rate_lb", "rate_ub"], &rows)?;
    for eps in &config.eps_list {
        let rows: Vec<Vec<String>> = e
            .cells
            .iter()
            .filter(|c| &c.eps == eps)
            .map(|c| vec![c.n.to_string(), opt(c.rate_lb), opt(c.rate_ub)])
            .collect();
        write_csv(&out.join("plot"), &format!("entropy_eps_{}.csv", file_tag(eps)), &["n", "rate_lb", "rate_ub"], &rows)?;
    }
    let summary = Summary {
        lower: e.lower,
        upper: e.upper,
        estimate: &e,
        notes: vec!["span counts come from a greedy cover, so the upper bound may be loose"],
    };
    write_json(out, "entropy.json", &report(config, summary))?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct FamilyCheck {
    #[serde(serialize_with = "serialize_rational")]
    eps: Rational,
    n: usize,
    k: usize,
    points: usize,
    claimed_count: String,
    pairs: PairCheck,
}

#[derive(Serialize)]
struct Envelope<'a> {
    bounds: &'a EnvelopeBounds,
    families: Vec<FamilyCheck>,
}

pub fn run_envelope(f: &PlMap, config: &RunConfig, out: &std::path::Path) -> Result<Outcome, Failure> {
    let bounds = envelope_entropy_bounds(f, config.n_max, &config.eps_list).map_err(Failure::Analysis)?;
    let n = FAMILY_N.min(config.n_max);
    let mut families = Vec::new();
    for (i, eps) in config.eps_list.iter().enumerate() {
        let family = envelope_sep_family(f, n, eps, EdgeId(0)).map_err(Failure::Analysis)?;
        let pairs = family.sample_pairs(PAIR_SAMPLES, config.seed.wrapping_add(i as u64));
        families.push(FamilyCheck {
            eps: eps.clone(),
            n,
            k: family.k,
            points: family.points.len(),
            claimed_count: family.claimed_count.to_string(),
            pairs: family.verify_pairs(f, &pairs),
        });
    }
    for eps in &config.eps_list {
        let rows: Vec<Vec<String>> = bounds
            .cells
            .iter()
            .filter(|c| &c.eps == eps)
            .map(|c| vec![c.n.to_string(), c.lower.to_string(), c.upper.to_string(), opt(c.rate_lb), opt(c.rate_ub)])
            .collect();
        write_csv(
            &out.join("plot"),
            &format!("envelope_eps_{}.csv", file_tag(eps)),
            &["n", "lower", "upper", "rate_lb", "rate_ub"],
            &rows,
        )?;
    }
    write_json(out, "envelope.json", &report(config, Envelope { bounds: &bounds, families }))?;
    Ok(Outcome::Success)
}
