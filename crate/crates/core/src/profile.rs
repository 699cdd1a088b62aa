//! Mixed strategies, the reduced chart, and simplex utilities.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{GameSpec, SIMPLEX_TOL};

/// One probability vector per player.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StrategyProfile {
    blocks: Vec<Vec<f64>>,
}

impl StrategyProfile {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(blocks, SIMPLEX_TOL)
    }

    /// Accepts blocks that lie on their simplices within `tol`. Entries are
    /// clamped to `[0, 1]` and a block is renormalized only when its sum is
    /// off by more than rounding.
    pub fn with_tolerance(blocks: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let blocks = blocks
            .into_iter()
            .enumerate()
            .map(|(player, block)| normalize_block(block, tol).map_err(|e| tag(e, player)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }

    pub fn uniform(strategy_counts: &[usize]) -> Self {
        let blocks = strategy_counts
            .iter()
            .map(|&m| vec![1.0 / m as f64; m])
            .collect();
        Self { blocks }
    }

    /// The vertex profile in which player `p` plays `profile[p]` with certainty.
    pub fn pure(strategy_counts: &[usize], profile: &[usize]) -> Result<Self> {
        if strategy_counts.len() != profile.len() {
            return Err(Error::ShapeMismatch(format!(
                "profile has {} entries, expected {}",
                profile.len(),
                strategy_counts.len()
            )));
        }
        let blocks = strategy_counts
            .iter()
            .zip(profile)
            .enumerate()
            .map(|(player, (&m, &j))| {
                if j >= m {
                    return Err(Error::StrategyOutOfRange {
                        player,
                        index: j,
                        count: m,
                    });
                }
                Ok(unit_vector(m, j))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }

    pub fn players(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn block(&self, player: usize) -> &[f64] {
        &self.blocks[player]
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        self.blocks
    }

    /// All coordinates, player by player.
    pub fn flatten(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn check_shape(&self, g: &GameSpec) -> Result<()> {
        let counts: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        if counts != g.strategy_counts() {
            return Err(Error::ShapeMismatch(format!(
                "profile block sizes {:?} do not match game strategy counts {:?}",
                counts,
                g.strategy_counts()
            )));
        }
        Ok(())
    }

    /// Drops the last coordinate of every block.
    pub fn reduce(&self) -> ReducedPoint {
        ReducedPoint(
            self.blocks
                .iter()
                .flat_map(|b| b[..b.len() - 1].iter().copied())
                .collect(),
        )
    }

    /// `(s; i; sigma)`: the profile with player `i`'s block replaced by `sigma`.
    pub fn unilateral_replace(&self, player: usize, sigma: &[f64]) -> Result<Self> {
        if player >= self.players() {
            return Err(Error::PlayerOutOfRange {
                player,
                players: self.players(),
            });
        }
        if sigma.len() != self.blocks[player].len() {
            return Err(Error::ShapeMismatch(format!(
                "replacement for player {player} has {} entries, expected {}",
                sigma.len(),
                self.blocks[player].len()
            )));
        }
        let sigma = normalize_block(sigma.to_vec(), SIMPLEX_TOL).map_err(|e| tag(e, player))?;
        let mut blocks = self.blocks.clone();
        blocks[player] = sigma;
        Ok(Self { blocks })
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<Vec<f64>>) -> Self {
        Self { blocks }
    }

    /// Largest coordinate difference to another profile of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest coordinate over all blocks.
    pub fn min_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for StrategyProfile {
    /// Formats as `a,b,c;x,y,z`, the same syntax the CLI accepts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", blocks.join(";"))
    }
}

fn tag(e: Error, player: usize) -> Error {
    match e {
        Error::OffSimplex(msg) => Error::OffSimplex(format!("player {player}: {msg}")),
        other => other,
    }
}

fn normalize_block(mut block: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    if block.is_empty() {
        return Err(Error::EmptyVector);
    }
    for &c in &block {
        if !c.is_finite() || c < -tol || c > 1.0 + tol {
            return Err(Error::OffSimplex(format!("entry {c} outside [0, 1]")));
        }
    }
    let sum: f64 = block.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::OffSimplex(format!("block sums to {sum}")));
    }
    for c in &mut block {
        *c = c.clamp(0.0, 1.0);
    }
    let sum: f64 = block.iter().sum();
    if (sum - 1.0).abs() > block.len() as f64 * f64::EPSILON {
        for c in &mut block {
            *c /= sum;
        }
    }
    Ok(block)
}

pub(crate) fn unit_vector(m: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[j] = 1.0;
    e
}

/// Expected payoff to every player.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PayoffVector(pub Vec<f64>);

impl PayoffVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Coordinates on the `N - n` dimensional chart obtained by dropping the
/// last coordinate of each player's block.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ReducedPoint(pub Vec<f64>);

impl ReducedPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn embed(&self, g: &GameSpec) -> Result<StrategyProfile> {
        self.embed_with_tolerance(g, SIMPLEX_TOL)
    }

    /// Restores the dropped coordinates. Fails with `OffSimplex` when any
    /// coordinate, implied or given, leaves `[-tol, 1 + tol]`.
    pub fn embed_with_tolerance(&self, g: &GameSpec, tol: f64) -> Result<StrategyProfile> {
        let blocks = complete_blocks(g, &self.0)?;
        for (player, block) in blocks.iter().enumerate() {
            for &c in block {
                if !(c >= -tol && c <= 1.0 + tol) {
                    return Err(Error::OffSimplex(format!(
                        "player {player}: coordinate {c} outside [0, 1]"
                    )));
                }
            }
        }
        StrategyProfile::with_tolerance(blocks, tol)
    }
}

/// Appends `1 - sum` to each player's reduced coordinates, with no range
/// checks. Points off the simplex are valid inputs for the polynomial
/// extension of the payoff map.
pub(crate) fn complete_blocks(g: &GameSpec, coords: &[f64]) -> Result<Vec<Vec<f64>>> {
    if coords.len() != g.reduced_dim() {
        return Err(Error::ShapeMismatch(format!(
            "reduced point has {} coordinates, game needs {}",
            coords.len(),
            g.reduced_dim()
        )));
    }
    let mut offset = 0;
    let blocks = g
        .strategy_counts()
        .iter()
        .map(|&m| {
            let head = &coords[offset..offset + m - 1];
            offset += m - 1;
            let mut block = head.to_vec();
            block.push(1.0 - head.iter().sum::<f64>());
            block
        })
        .collect();
    Ok(blocks)
}

/// Euclidean projection onto the probability simplex.
///
/// Sort-based: find the largest `rho` with `u_rho > (sum_{k<=rho} u_k - 1) / rho`
/// over the descending sort `u`, then shift and clip.
pub fn project_to_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "cannot project a vector with non-finite entries".into(),
        ));
    }
    let sum: f64 = v.iter().sum();
    if v.iter().all(|&x| x >= 0.0) && (sum - 1.0).abs() <= v.len() as f64 * f64::EPSILON {
        return Ok(v.to_vec());
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    Ok(v.iter().map(|&x| (x - theta).max(0.0)).collect())
}
