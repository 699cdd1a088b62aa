//! Built-in fixture games and seeded random games.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{
    default_player_names, default_strategy_labels, GameSpec, ProfileIter, MAX_PROFILES,
};
use crate::sampling::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Rock-paper-scissors: winner +1, loser -1, draw 0.
    Rps,
    /// Two players choosing between the most attractive (M) and an
    /// averagely attractive (A) partner at a bar.
    Bar,
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rps" => Ok(Builtin::Rps),
            "bar" => Ok(Builtin::Bar),
            other => Err(Error::UnknownBuiltin(other.to_string())),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builtin::Rps => "rps",
            Builtin::Bar => "bar",
        })
    }
}

pub fn builtin(which: Builtin) -> GameSpec {
    match which {
        Builtin::Rps => {
            // rock crushes scissors, scissors cut paper, paper covers rock
            let score = |a: usize, b: usize| -> f64 {
                match (3 + b - a) % 3 {
                    0 => 0.0,
                    1 => -1.0,
                    _ => 1.0,
                }
            };
            let mut payoffs = Vec::with_capacity(18);
            for a in 0..3 {
                for b in 0..3 {
                    payoffs.push(score(a, b));
                    payoffs.push(-score(a, b));
                }
            }
            let labels = vec![
                "rock".to_string(),
                "paper".to_string(),
                "scissors".to_string(),
            ];
            GameSpec::with_labels(
                vec![3, 3],
                payoffs,
                default_player_names(2),
                vec![labels.clone(), labels],
            )
            .expect("rps fixture is valid")
        }
        Builtin::Bar => {
            let labels = vec!["M".to_string(), "A".to_string()];
            GameSpec::with_labels(
                vec![2, 2],
                vec![0.0, 0.0, 1.0, -1.0, -1.0, 1.0, 0.0, 0.0],
                vec!["man 1".to_string(), "man 2".to_string()],
                vec![labels.clone(), labels],
            )
            .expect("bar fixture is valid")
        }
    }
}

/// Looks a builtin up by name (`rps` or `bar`).
pub fn gen_builtin(name: &str) -> Result<GameSpec> {
    Ok(builtin(name.parse()?))
}

/// A seeded random game.
///
/// Payoffs are uniform in `[-1, 1]`. With `jointly_affine`, each payoff
/// component is instead `c + sum_p w_p[j_p]`, a sum of per-player terms
/// with uniform coefficients, so every cross second difference vanishes
/// exactly. With `zero_sum`, the last player's payoff at each vertex is
/// minus the sum of the others'.
pub fn gen_random(
    players: usize,
    strategy_counts: &[usize],
    seed: u64,
    zero_sum: bool,
    jointly_affine: bool,
) -> Result<GameSpec> {
    if players < 2 {
        return Err(Error::Generator(format!(
            "need at least 2 players, got {players}"
        )));
    }
    if strategy_counts.len() != players {
        return Err(Error::Generator(format!(
            "{} strategy counts given for {players} players",
            strategy_counts.len()
        )));
    }
    if let Some(p) = strategy_counts.iter().position(|&m| m < 2) {
        return Err(Error::Generator(format!(
            "player {p} has {} strategies, need at least 2",
            strategy_counts[p]
        )));
    }
    let profiles = strategy_counts
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .filter(|&m| m <= MAX_PROFILES)
        .ok_or_else(|| {
            Error::Generator(format!(
                "{strategy_counts:?} exceeds the limit of {MAX_PROFILES} pure profiles"
            ))
        })?;

    let mut rng = seeded_rng(seed);
    let n = players;
    let mut payoffs = Vec::with_capacity(profiles * n);
    if jointly_affine {
        // terms[i] = (constant, per-player weight vectors) for component i
        let terms: Vec<(f64, Vec<Vec<f64>>)> = (0..n)
            .map(|_| {
                let c = rng.random_range(-1.0..=1.0);
                let w = strategy_counts
                    .iter()
                    .map(|&m| (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect())
                    .collect();
                (c, w)
            })
            .collect();
        for profile in ProfileIter::new(strategy_counts) {
            for (c, w) in &terms {
                let v = profile
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (p, &j)| acc + w[p][j]);
                payoffs.push(v);
            }
        }
    } else {
        for _ in 0..profiles * n {
            payoffs.push(rng.random_range(-1.0..=1.0));
        }
    }
    if zero_sum {
        for vertex in payoffs.chunks_mut(n) {
            let others: f64 = vertex[..n - 1].iter().sum();
            vertex[n - 1] = -others;
        }
    }
    GameSpec::with_labels(
        strategy_counts.to_vec(),
        payoffs,
        default_player_names(n),
        default_strategy_labels(strategy_counts),
    )
}
