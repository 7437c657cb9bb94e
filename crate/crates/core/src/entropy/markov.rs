use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::PlMap;
use crate::rational::Rational;
use crate::tree::Subtree;

const POWER_TOL: f64 = 1e-9;
const POWER_CAP: usize = 100_000;

/// 0/1 covering matrix of a Markov partition: `entries[i][j] = 1` iff
/// `f(Pᵢ) ⊇ Pⱼ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionMatrix {
    pub entries: Vec<Vec<u8>>,
    pub spectral_radius: f64,
}

impl TransitionMatrix {
    pub fn new(f: &PlMap, partition: &[Subtree]) -> Result<Self> {
        let tree = f.tree();
        let not_markov = |piece: usize, reason: &str| Error::NotMarkov { piece, reason: reason.into() };
        for (i, p) in partition.iter().enumerate() {
            if p.is_degenerate(tree) {
                return Err(not_markov(i, "degenerate piece"));
            }
            for q in &partition[i + 1..] {
                if p.intersection(q).is_some_and(|c| !c.total_length(tree).is_zero()) {
                    return Err(not_markov(i, "pieces overlap"));
                }
            }
        }
        let covered: Rational = partition.iter().map(|p| p.total_length(tree)).sum();
        if covered != tree.total_length() {
            return Err(not_markov(0, "pieces do not cover the tree"));
        }
        let mut entries = Vec::with_capacity(partition.len());
        for (i, p) in partition.iter().enumerate() {
            let image = f.image_subtree(p);
            let row: Vec<u8> = partition.iter().map(|q| u8::from(q.is_subset(&image))).collect();
            let hit: Rational =
                partition.iter().zip(&row).filter(|(_, &r)| r == 1).map(|(q, _)| q.total_length(tree)).sum();
            if hit != image.total_length(tree) {
                return Err(not_markov(i, "image is not a union of pieces"));
            }
            entries.push(row);
        }
        let spectral_radius = spectral_radius(&entries);
        Ok(TransitionMatrix { entries, spectral_radius })
    }
}

/// Perron root by power iteration on `A + I`.
fn spectral_radius(a: &[Vec<u8>]) -> f64 {
    let k = a.len();
    let mut v = vec![1.0f64; k];
    let mut lambda = 0.0;
    for _ in 0..POWER_CAP {
        let w: Vec<f64> =
            (0..k).map(|i| v[i] + a[i].iter().zip(&v).map(|(&x, y)| f64::from(x) * y).sum::<f64>()).collect();
        let norm = w.iter().cloned().fold(0.0, f64::max);
        let next = norm / v.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / norm).collect();
        let done = (next - lambda).abs() <= POWER_TOL * next;
        lambda = next;
        if done {
            break;
        }
    }
    (lambda - 1.0).max(0.0)
}

/// `log ρ(A)` for the covering matrix of an exact Markov partition.
pub fn markov_entropy_oracle(f: &PlMap, partition: &[Subtree]) -> Result<f64> {
    Ok(TransitionMatrix::new(f, partition)?.spectral_radius.ln().max(0.0))
}
