//! Exact evaluation of the multilinear expected-payoff map.
//!
//! `p_i(s) = sum_v Prob_v(s) p_i(v)`, where `Prob_v(s)` is the product of
//! the probabilities each player assigns to its strategy in `v`. Rather
//! than looping over vertices, the payoff tensor is contracted against one
//! player's block at a time.

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::profile::{complete_blocks, PayoffVector, StrategyProfile};

/// Probability that profile `s` plays the pure profile `vertex`.
pub fn profile_probability(s: &StrategyProfile, vertex: &[usize]) -> Result<f64> {
    if vertex.len() != s.players() {
        return Err(Error::ShapeMismatch(format!(
            "vertex has {} entries, profile has {} players",
            vertex.len(),
            s.players()
        )));
    }
    let mut prob = 1.0;
    for (player, &j) in vertex.iter().enumerate() {
        let block = s.block(player);
        if j >= block.len() {
            return Err(Error::StrategyOutOfRange {
                player,
                index: j,
                count: block.len(),
            });
        }
        prob *= block[j];
    }
    Ok(prob)
}

/// Contracts the payoff tensor against every block for which `weights`
/// returns `Some`. The result has shape `(kept players' counts..., n)` in
/// row-major order.
fn contract<'a, F>(g: &GameSpec, weights: F) -> Vec<f64>
where
    F: Fn(usize) -> Option<&'a [f64]>,
{
    let counts = g.strategy_counts();
    let mut data = g.payoff_tensor().to_vec();
    let mut post = g.players();
    for axis in (0..counts.len()).rev() {
        let mid = counts[axis];
        match weights(axis) {
            Some(w) => {
                let pre = data.len() / (mid * post);
                let mut out = vec![0.0; pre * post];
                for a in 0..pre {
                    let dst = &mut out[a * post..(a + 1) * post];
                    for (j, &wj) in w.iter().enumerate() {
                        if wj == 0.0 {
                            continue;
                        }
                        let src = &data[(a * mid + j) * post..(a * mid + j + 1) * post];
                        for (d, &x) in dst.iter_mut().zip(src) {
                            *d += wj * x;
                        }
                    }
                }
                data = out;
            }
            None => post *= mid,
        }
    }
    data
}

/// Evaluates the payoff polynomial at arbitrary real blocks (not
/// necessarily probability vectors). Shapes must already match.
pub(crate) fn evaluate_blocks(g: &GameSpec, blocks: &[Vec<f64>]) -> Vec<f64> {
    contract(g, |p| Some(blocks[p].as_slice()))
}

/// Payoff polynomial on the reduced chart, extended beyond the simplex.
pub fn payoff_at_reduced(g: &GameSpec, coords: &[f64]) -> Result<PayoffVector> {
    let blocks = complete_blocks(g, coords)?;
    Ok(PayoffVector(evaluate_blocks(g, &blocks)))
}

/// `p(s)` for all players at once.
pub fn total_payoff(g: &GameSpec, s: &StrategyProfile) -> Result<PayoffVector> {
    s.check_shape(g)?;
    Ok(PayoffVector(evaluate_blocks(g, s.blocks())))
}

/// `p_i(s)`.
pub fn expected_payoff(g: &GameSpec, s: &StrategyProfile, player: usize) -> Result<f64> {
    g.check_player(player)?;
    Ok(total_payoff(g, s)?.0[player])
}

/// Payoff vectors when `player` deviates to each of its pure strategies:
/// row `j` is `p(s; player; e_j)`.
pub fn pure_deviation_payoffs(
    g: &GameSpec,
    s: &StrategyProfile,
    player: usize,
) -> Result<Vec<Vec<f64>>> {
    g.check_player(player)?;
    s.check_shape(g)?;
    let blocks = s.blocks();
    let flat = contract(g, |p| (p != player).then(|| blocks[p].as_slice()));
    Ok(flat.chunks(g.players()).map(<[f64]>::to_vec).collect())
}

/// True iff the payoff vector at every vertex sums to zero within `tol`.
/// By multilinearity this is the same as the payoffs summing to zero on
/// the whole strategy space.
pub fn is_zero_sum(g: &GameSpec, tol: f64) -> bool {
    g.payoff_tensor()
        .chunks(g.players())
        .all(|v| v.iter().sum::<f64>().abs() <= tol)
}
