//! Nash equilibria: verification, pure enumeration, fixed-point search and
//! two-player support enumeration.
//!
//! Every payoff is linear in the deviating player's own block, so the best
//! unilateral deviation is always a pure strategy and checking the `m_i`
//! pure deviations of each player certifies an equilibrium.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::linalg::{default_rank_tol, mat_vec, max_abs, FullSvd};
use crate::payoff::pure_deviation_payoffs;
use crate::profile::StrategyProfile;
use crate::sampling::{random_interior_profile, task_rng};

/// Largest strategy count per player accepted by support enumeration.
pub const MAX_SUPPORT_STRATEGIES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    VerifiedInput,
    PureEnumeration,
    NashMap,
    SupportEnumeration,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::VerifiedInput => "verified_input",
            Method::PureEnumeration => "pure_enumeration",
            Method::NashMap => "nash_map",
            Method::SupportEnumeration => "support_enumeration",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub profile: StrategyProfile,
    /// Best unilateral improvement per player, clamped at zero.
    pub gaps: Vec<f64>,
    pub epsilon: f64,
    pub method: Method,
    pub converged: bool,
}

/// Per-player improvement potentials `phi[i][j] = max(0, p_i(s; i; e_j) - p_i(s))`.
fn improvements(g: &GameSpec, s: &StrategyProfile) -> Result<Vec<Vec<f64>>> {
    (0..g.players())
        .map(|i| {
            let rows = pure_deviation_payoffs(g, s, i)?;
            let current: f64 = rows.iter().zip(s.block(i)).map(|(row, c)| c * row[i]).sum();
            Ok(rows.iter().map(|row| (row[i] - current).max(0.0)).collect())
        })
        .collect()
}

/// `max_j p_i(s; i; e_j) - p_i(s)`, clamped at zero.
pub fn best_response_gap(g: &GameSpec, s: &StrategyProfile, player: usize) -> Result<f64> {
    g.check_player(player)?;
    let rows = pure_deviation_payoffs(g, s, player)?;
    let current: f64 = rows
        .iter()
        .zip(s.block(player))
        .map(|(row, c)| c * row[player])
        .sum();
    Ok(rows
        .iter()
        .map(|row| row[player] - current)
        .fold(0.0, f64::max))
}

fn report_from_gaps(
    profile: StrategyProfile,
    gaps: Vec<f64>,
    eps: f64,
    method: Method,
) -> EquilibriumReport {
    let epsilon = gaps.iter().copied().fold(0.0, f64::max);
    EquilibriumReport {
        profile,
        gaps,
        epsilon,
        method,
        converged: epsilon <= eps,
    }
}

pub fn is_equilibrium(g: &GameSpec, s: &StrategyProfile, eps: f64) -> Result<EquilibriumReport> {
    s.check_shape(g)?;
    let gaps = (0..g.players())
        .map(|i| best_response_gap(g, s, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_gaps(
        s.clone(),
        gaps,
        eps,
        Method::VerifiedInput,
    ))
}

fn verify(g: &GameSpec, s: StrategyProfile, eps: f64, method: Method) -> Result<EquilibriumReport> {
    let mut report = is_equilibrium(g, &s, eps)?;
    report.method = method;
    Ok(report)
}

/// All pure profiles at which no player gains by a pure deviation, compared
/// on the stored payoffs without tolerance (ties count as equilibria).
pub fn pure_equilibria(g: &GameSpec) -> Vec<Vec<usize>> {
    let n = g.players();
    let counts = g.strategy_counts();
    g.profiles()
        .filter(|profile| {
            let here = g.payoff(profile).expect("profile in range");
            (0..n).all(|i| {
                let mut deviation = profile.clone();
                (0..counts[i]).all(|j| {
                    deviation[i] = j;
                    g.payoff(&deviation).expect("profile in range")[i] <= here[i]
                })
            })
        })
        .collect()
}

/// One step of Nash's improvement map:
/// `s'_ij = (s_ij + phi_ij) / (1 + sum_j phi_ij)`. Its fixed points are
/// exactly the equilibria.
pub fn nash_map(g: &GameSpec, s: &StrategyProfile) -> Result<StrategyProfile> {
    s.check_shape(g)?;
    let phi = improvements(g, s)?;
    Ok(apply_nash_map(s, &phi))
}

fn apply_nash_map(s: &StrategyProfile, phi: &[Vec<f64>]) -> StrategyProfile {
    let blocks = s
        .blocks()
        .iter()
        .zip(phi)
        .map(|(block, phi)| {
            let denom = 1.0 + phi.iter().sum::<f64>();
            block
                .iter()
                .zip(phi)
                .map(|(c, f)| (c + f) / denom)
                .collect()
        })
        .collect();
    StrategyProfile::from_blocks_unchecked(blocks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    /// Iterations per start.
    pub max_iter: usize,
    pub eps: f64,
    /// Random interior starts tried after the uniform start.
    pub restarts: usize,
    /// `lambda` in `s <- (1 - lambda) s + lambda * nash_map(s)`.
    pub damping: f64,
    /// Probabilities below this are zeroed when trying to snap an iterate
    /// onto a face of the strategy space.
    pub snap_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iter: 10_000,
            eps: 1e-6,
            restarts: 8,
            damping: 0.5,
            snap_threshold: 1e-3,
        }
    }
}

const SNAP_INTERVAL: usize = 16;

/// Zeroes small probabilities and renormalizes each block.
fn snap(s: &StrategyProfile, threshold: f64) -> Option<StrategyProfile> {
    let mut changed = false;
    let blocks: Vec<Vec<f64>> = s
        .blocks()
        .iter()
        .map(|block| {
            let kept: Vec<f64> = block
                .iter()
                .map(|&c| {
                    if c < threshold && c > 0.0 {
                        changed = true;
                        0.0
                    } else {
                        c
                    }
                })
                .collect();
            let total: f64 = kept.iter().sum();
            kept.into_iter().map(|c| c / total).collect()
        })
        .collect();
    // a block spread thinly over many strategies has nothing left to keep
    let usable = blocks.iter().flatten().all(|c| c.is_finite());
    (changed && usable).then(|| StrategyProfile::from_blocks_unchecked(blocks))
}

fn lexicographic(a: &StrategyProfile, b: &StrategyProfile) -> Ordering {
    a.flatten()
        .iter()
        .zip(b.flatten().iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Better result first: smaller epsilon, then lexicographically smaller
/// profile.
fn better(a: &EquilibriumReport, b: &EquilibriumReport) -> bool {
    match a.epsilon.total_cmp(&b.epsilon) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => lexicographic(&a.profile, &b.profile) == Ordering::Less,
    }
}

/// Runs the damped map from one start; returns the best profile seen.
fn iterate_from(
    g: &GameSpec,
    start: StrategyProfile,
    config: &SearchConfig,
) -> Result<EquilibriumReport> {
    let lambda = config.damping;
    let mut s = start;
    let mut best: Option<EquilibriumReport> = None;
    let consider = |candidate: EquilibriumReport, best: &mut Option<EquilibriumReport>| {
        if best.as_ref().is_none_or(|b| better(&candidate, b)) {
            *best = Some(candidate);
        }
    };
    for iteration in 0..=config.max_iter {
        let phi = improvements(g, &s)?;
        let gaps: Vec<f64> = phi
            .iter()
            .map(|p| p.iter().copied().fold(0.0, f64::max))
            .collect();
        let report = report_from_gaps(s.clone(), gaps, config.eps, Method::NashMap);
        let done = report.converged;
        consider(report, &mut best);
        if done {
            break;
        }
        if iteration % SNAP_INTERVAL == 0 || iteration == config.max_iter {
            if let Some(snapped) = snap(&s, config.snap_threshold) {
                let report = verify(g, snapped, config.eps, Method::NashMap)?;
                let done = report.converged;
                consider(report, &mut best);
                if done {
                    break;
                }
            }
        }
        if iteration == config.max_iter {
            break;
        }
        let mapped = apply_nash_map(&s, &phi);
        let blocks = s
            .blocks()
            .iter()
            .zip(mapped.blocks())
            .map(|(old, new)| {
                old.iter()
                    .zip(new)
                    .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
                    .collect()
            })
            .collect();
        s = StrategyProfile::from_blocks_unchecked(blocks);
    }
    Ok(best.expect("at least one iterate"))
}

/// Searches for an equilibrium by iterating the damped Nash map, first
/// from the uniform profile and then from seeded random interior starts.
/// Convergence is not guaranteed; the returned report is re-verified and
/// `converged` says whether `epsilon <= eps`.
pub fn find_equilibrium(g: &GameSpec, config: &SearchConfig) -> Result<EquilibriumReport> {
    let mut best = iterate_from(g, StrategyProfile::uniform(g.strategy_counts()), config)?;
    for restart in 0..config.restarts {
        if best.converged {
            break;
        }
        let mut rng = task_rng(config.seed, restart as u64);
        // burn one draw so restart streams differ from generic-rank samples
        let _: u64 = rng.random();
        let start = random_interior_profile(&mut rng, g);
        let candidate = iterate_from(g, start, config)?;
        if better(&candidate, &best) {
            best = candidate;
        }
    }
    verify(g, best.profile, config.eps, Method::NashMap)
}

/// All equilibria of a two-player game found by solving the indifference
/// conditions on every pair of supports, deduplicated within `1e-8`.
pub fn support_enumeration_2p(g: &GameSpec, eps: f64) -> Result<Vec<EquilibriumReport>> {
    if g.players() != 2 {
        return Err(Error::NotTwoPlayer {
            players: g.players(),
        });
    }
    let counts = g.strategy_counts();
    if counts.iter().any(|&m| m > MAX_SUPPORT_STRATEGIES) {
        return Err(Error::SupportsTooLarge {
            counts: counts.to_vec(),
            limit: MAX_SUPPORT_STRATEGIES,
        });
    }
    let (m1, m2) = (counts[0], counts[1]);
    let a = DMatrix::from_fn(m1, m2, |i, j| g.payoff(&[i, j]).expect("in range")[0]);
    let b = DMatrix::from_fn(m1, m2, |i, j| g.payoff(&[i, j]).expect("in range")[1]);
    let bt = b.transpose();

    let mut found: Vec<EquilibriumReport> = Vec::new();
    for s1 in subsets(m1) {
        for s2 in subsets(m2) {
            // player 2's mix makes player 1 indifferent on s1, and vice versa
            let Some(y) = indifferent_mix(&a, &s1, &s2) else {
                continue;
            };
            let Some(x) = indifferent_mix(&bt, &s2, &s1) else {
                continue;
            };
            let Ok(profile) = StrategyProfile::new(vec![x, y]) else {
                continue;
            };
            let report = verify(g, profile, eps, Method::SupportEnumeration)?;
            if !report.converged {
                continue;
            }
            if found
                .iter()
                .all(|r| r.profile.max_abs_diff(&report.profile) > 1e-8)
            {
                found.push(report);
            }
        }
    }
    found.sort_by(|p, q| lexicographic(&p.profile, &q.profile));
    Ok(found)
}

/// Non-empty subsets of `0..m`, smallest first.
fn subsets(m: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (1u32..(1 << m))
        .map(|mask| (0..m).filter(|&k| mask & (1 << k) != 0).collect())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Solves for a probability vector `y` supported on `cols` such that
/// `payoff[i, :] . y` is the same for every `i` in `rows`. Returns `None`
/// when the system is inconsistent or the solution has negative entries.
fn indifferent_mix(payoff: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> Option<Vec<f64>> {
    // unknowns: y on cols, then the common value v
    let k = cols.len();
    let mut sys = DMatrix::zeros(rows.len() + 1, k + 1);
    let mut rhs = vec![0.0; rows.len() + 1];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            sys[(r, c)] = payoff[(i, j)];
        }
        sys[(r, k)] = -1.0;
    }
    for c in 0..k {
        sys[(rows.len(), c)] = 1.0;
    }
    rhs[rows.len()] = 1.0;

    let tol = default_rank_tol(sys.nrows(), sys.ncols());
    let solution = FullSvd::new(&sys).solve(&rhs, tol);
    let check: Vec<f64> = mat_vec(&sys, &solution)
        .iter()
        .zip(&rhs)
        .map(|(a, b)| a - b)
        .collect();
    if max_abs(&check) > 1e-9 {
        return None;
    }
    let mut mix = vec![0.0; payoff.ncols()];
    for (c, &j) in cols.iter().enumerate() {
        let p = solution[c];
        if p < -1e-12 {
            return None;
        }
        mix[j] = p.max(0.0);
    }
    Some(mix)
}

/// Every vertex profile from [`pure_equilibria`] as a verified report.
pub fn pure_equilibrium_reports(g: &GameSpec, eps: f64) -> Result<Vec<EquilibriumReport>> {
    pure_equilibria(g)
        .into_iter()
        .map(|v| {
            let s = StrategyProfile::pure(g.strategy_counts(), &v)?;
            verify(g, s, eps, Method::PureEnumeration)
        })
        .collect()
}
