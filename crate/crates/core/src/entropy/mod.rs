//! Bowen–Dinaburg entropy bounds for PL tree maps and their envelopes.

mod counts;
mod envelope;
mod markov;

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

pub use counts::{dyn_metric, sep_count, span_count, POINT_CAP};
pub use envelope::{
    connected_envelope_sep, envelope_entropy_bounds, envelope_sep_family, hyperspace_net_size, phi_width,
    ConnectedSample, EnvelopeBounds, EnvelopeCell, MultiMapGraph, PairCheck, PhiFamily,
};
pub use markov::{markov_entropy_oracle, TransitionMatrix};

use crate::error::{Error, Result};
use crate::io::serialize_rational;
use crate::map::PlMap;
use crate::rational::{self, Rational};

/// Default `n` ladder for entropy tables.
pub const DEFAULT_N_LADDER: [usize; 4] = [4, 8, 12, 16];

pub fn default_eps_list() -> Vec<Rational> {
    vec![rational::rat(1, 16), rational::rat(1, 64), rational::rat(1, 256)]
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyCell {
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub eps: Rational,
    /// Grid spacing actually scanned.
    pub grid: f64,
    /// The grid was fine enough for the span certificate.
    pub resolved: bool,
    pub sep_lb: usize,
    pub span_ub: Option<usize>,
    /// Growth rate of `sep_lb` since the previous resolved `n`.
    pub rate_lb: Option<f64>,
    /// `(1/n)·log span_ub`.
    pub rate_ub: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyEstimate {
    pub n_ladder: Vec<usize>,
    #[serde(serialize_with = "crate::io::serialize_rationals")]
    pub eps_list: Vec<Rational>,
    #[serde(serialize_with = "serialize_rational")]
    pub grid_resolution: Rational,
    pub cells: Vec<EntropyCell>,
    pub lower: f64,
    pub upper: Option<f64>,
}

impl EntropyEstimate {
    pub fn cell(&self, n: usize, eps: &Rational) -> Option<&EntropyCell> {
        self.cells.iter().find(|c| c.n == n && &c.eps == eps)
    }

    pub fn bracket(&self) -> (f64, Option<f64>) {
        (self.lower, self.upper)
    }

    pub fn contains(&self, h: f64) -> bool {
        self.lower <= h && self.upper.is_none_or(|u| h <= u)
    }
}

/// `1` followed by every ladder step up to `n_max`, ending at `n_max`.
pub fn n_ladder(n_max: usize) -> Vec<usize> {
    let mut out = vec![1];
    out.extend(DEFAULT_N_LADDER.iter().copied().filter(|&n| n > 1 && n < n_max));
    if n_max > 1 {
        out.push(n_max);
    }
    out
}

/// Spacing for the `(n, ε)` cell: as fine as the span certificate needs,
/// limited to [`POINT_CAP`] points.
pub(crate) fn cell_grid(f: &PlMap, n: usize, eps: &Rational, grid: &Rational) -> Result<(Rational, bool)> {
    let tree = f.tree();
    let need = rational::to_f64(eps) / counts::expansion(f, n)?;
    let mut h = rational::to_f64(grid).min(need);
    let mut resolved = true;
    if counts::grid_size(tree, h) > POINT_CAP {
        h = rational::to_f64(&tree.total_length()) / (POINT_CAP - tree.vertex_count()) as f64;
        while counts::grid_size(tree, h) > POINT_CAP {
            h *= 1.0 + 1e-6;
        }
        resolved = false;
    }
    let h = Rational::from_float(h).expect("finite spacing");
    Ok((h, resolved))
}

/// Grid spacing used for the `(n, ε)` cell by the envelope counts (and by
/// [`sep_count`] callers that want to match them).
pub fn cell_spacing(f: &PlMap, n: usize, eps: &Rational) -> Result<Rational> {
    Ok(cell_grid(f, n, eps, &(eps / Rational::from_integer(8.into())))?.0)
}

/// Entropy table over `n_ladder(n_max) × eps_list` with bracket
/// `[max_ε tail growth of sep, min_ε tail (1/n)·log span]`.
pub fn entropy_estimate(f: &PlMap, n_max: usize, eps_list: &[Rational], grid: &Rational) -> Result<EntropyEstimate> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !e.is_positive()) || !grid.is_positive() {
        return Err(Error::NonpositiveEpsilon);
    }
    if eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Spec("eps list must be strictly decreasing".into()));
    }
    if n_max == 0 {
        return Err(Error::Spec("n_max must be at least 1".into()));
    }
    let ladder = n_ladder(n_max);
    let jobs: Vec<(usize, usize)> =
        (0..eps_list.len()).flat_map(|i| ladder.iter().map(move |&n| (i, n))).collect();
    let mut cells: Vec<EntropyCell> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let eps = &eps_list[i];
            let grid = grid.min(&(eps / Rational::from_integer(4.into()))).clone();
            let (h, resolved) = cell_grid(f, n, eps, &grid)?;
            let sep_lb = sep_count(f, n, eps, &h)?;
            let span_ub = if resolved { Some(span_count(f, n, eps, &h)?) } else { None };
            Ok(EntropyCell {
                n,
                eps: eps.clone(),
                grid: rational::to_f64(&h),
                resolved,
                sep_lb,
                span_ub,
                rate_lb: None,
                rate_ub: None,
            })
        })
        .collect::<Result<_>>()?;
    monotone_closure(&mut cells);

    let (mut lower, mut upper) = (0.0f64, None::<f64>);
    for eps in eps_list {
        let mut prev: Option<(usize, usize)> = None;
        let mut last = (None, None);
        for c in cells.iter_mut().filter(|c| &c.eps == eps && c.resolved) {
            if let Some((pn, ps)) = prev {
                c.rate_lb = Some((c.sep_lb as f64 / ps as f64).ln() / (c.n - pn) as f64);
            }
            c.rate_ub = c.span_ub.map(|s| (s as f64).ln() / c.n as f64);
            prev = Some((c.n, c.sep_lb));
            last = (c.rate_lb, c.rate_ub);
        }
        if let Some(r) = last.0 {
            lower = lower.max(r);
        }
        if let Some(r) = last.1 {
            upper = Some(upper.map_or(r, |u: f64| u.min(r)));
        }
    }
    Ok(EntropyEstimate {
        n_ladder: ladder,
        eps_list: eps_list.to_vec(),
        grid_resolution: grid.clone(),
        cells,
        lower,
        upper,
    })
}

/// Replaces each count by the best bound implied by the others: sep is
/// nondecreasing in `n` and nonincreasing in `ε`; span likewise.
fn monotone_closure(cells: &mut [EntropyCell]) {
    let snapshot: Vec<(usize, Rational, usize, Option<usize>)> =
        cells.iter().map(|c| (c.n, c.eps.clone(), c.sep_lb, c.span_ub)).collect();
    for c in cells.iter_mut() {
        for (n, eps, sep, span) in &snapshot {
            if *n <= c.n && *eps >= c.eps {
                c.sep_lb = c.sep_lb.max(*sep);
            }
            if *n >= c.n && *eps <= c.eps {
                if let (Some(mine), Some(other)) = (c.span_ub, span) {
                    c.span_ub = Some(mine.min(*other));
                }
            }
        }
    }
}

/// `h(f) = sup_α h(f|X_α)`: the componentwise maximum of the brackets.
pub fn subsystem_entropy_sup(estimates: &[EntropyEstimate]) -> (f64, Option<f64>) {
    let lower = estimates.iter().map(|e| e.lower).fold(0.0, f64::max);
    let upper = estimates.iter().try_fold(0.0f64, |acc, e| e.upper.map(|u| acc.max(u)));
    (lower, upper)
}
