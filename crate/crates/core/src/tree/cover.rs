use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{EdgeId, MetricTree, Subtree, VertexId};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Finite cover of the tree by subcontinua of diameter `< eps`.
///
/// Every edge is cut into equal pieces shorter than `eps/2`. The pieces at a
/// vertex of valence at least two form a star; the remaining pieces on each
/// edge are merged into runs shorter than `eps`. The count of the result is
/// N₂(eps).
pub fn cover_by_continua(tree: &MetricTree, eps: &Rational) -> Result<Vec<Subtree>> {
    if !eps.is_positive() {
        return Err(Error::NonpositiveEpsilon);
    }
    let half = eps / Rational::from_integer(2.into());
    let counts: Vec<BigInt> = tree
        .edge_ids()
        .map(|e| (tree.length(e) / &half).floor().to_integer() + BigInt::one())
        .collect();
    let param = |e: EdgeId, k: &BigInt| Rational::from_integer(k.clone()) / Rational::from_integer(counts[e.0].clone());

    // claimed[e] = (first piece index owned by the tail star, last owned by the head star)
    let mut tail_star = vec![false; tree.edge_count()];
    let mut head_star = vec![false; tree.edge_count()];
    let mut cover = Vec::new();
    for v in 0..tree.vertex_count() {
        let v = VertexId(v);
        if tree.valence(v) < 2 {
            continue;
        }
        let conflict = tree.incident(v).iter().any(|&e| {
            let single = counts[e.0] == BigInt::one();
            single && (tail_star[e.0] || head_star[e.0])
        });
        if conflict {
            continue;
        }
        let mut parts = vec![None; tree.edge_count()];
        for &e in tree.incident(v) {
            let n = &counts[e.0];
            if tree.edge(e).tail == v {
                tail_star[e.0] = true;
                parts[e.0] = Some((Rational::zero(), param(e, &BigInt::one())));
            } else {
                head_star[e.0] = true;
                parts[e.0] = Some((param(e, &(n - BigInt::one())), Rational::one()));
            }
        }
        cover.push(Subtree::from_hull(tree, parts));
    }
    for e in tree.edge_ids() {
        let n = &counts[e.0];
        let piece_len = tree.length(e) / Rational::from_integer(n.clone());
        // largest k with k * piece_len < eps
        let per_run = ((eps / &piece_len).ceil().to_integer() - BigInt::one()).max(BigInt::one());
        let mut k = if tail_star[e.0] { BigInt::one() } else { BigInt::zero() };
        let stop = if head_star[e.0] { n - BigInt::one() } else { n.clone() };
        while k < stop {
            let next = (&k + &per_run).min(stop.clone());
            let mut parts = vec![None; tree.edge_count()];
            parts[e.0] = Some((param(e, &k), param(e, &next)));
            cover.push(Subtree::from_hull(tree, parts));
            k = next;
        }
    }
    Ok(cover)
}
