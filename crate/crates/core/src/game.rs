//! Normal-form games.
//!
//! A game with `n` players, where player `i` has `m_i` pure strategies, is
//! stored as a dense payoff tensor: one length-`n` payoff vector per pure
//! profile `(j_1, ..., j_n)`, laid out in row-major multi-index order with
//! the payoff component varying fastest.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on the number of pure profiles `M = prod m_i`.
pub const MAX_PROFILES: usize = 1_000_000;

/// Default tolerance for simplex membership of strategy blocks.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Default tolerance for zero-sum and affinity checks.
pub const EVAL_TOL: f64 = 1e-10;

/// A finite n-player game in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    strategy_counts: Vec<usize>,
    payoffs: Vec<f64>,
    player_names: Vec<String>,
    strategy_labels: Vec<Vec<String>>,
}

impl GameSpec {
    /// Builds a game from per-player strategy counts and a dense tensor of
    /// length `M * n` (row-major over profiles, component fastest).
    pub fn new(strategy_counts: Vec<usize>, payoffs: Vec<f64>) -> Result<Self> {
        let names = default_player_names(strategy_counts.len());
        let labels = default_strategy_labels(&strategy_counts);
        Self::with_labels(strategy_counts, payoffs, names, labels)
    }

    pub fn with_labels(
        strategy_counts: Vec<usize>,
        payoffs: Vec<f64>,
        player_names: Vec<String>,
        strategy_labels: Vec<Vec<String>>,
    ) -> Result<Self> {
        let mut defects = shape_defects(&strategy_counts);
        if defects.is_empty() {
            let n = strategy_counts.len();
            let m: usize = strategy_counts.iter().product();
            if payoffs.len() != m * n {
                defects.push(Defect::TensorLength {
                    expected: m * n,
                    found: payoffs.len(),
                });
            } else {
                for (k, v) in payoffs.iter().enumerate() {
                    if !v.is_finite() {
                        defects.push(Defect::NonFinite {
                            profile: unflatten(k / n, &strategy_counts),
                            player: k % n,
                        });
                    }
                }
            }
        }
        defects.extend(label_defects(
            &strategy_counts,
            &player_names,
            &strategy_labels,
        ));
        if !defects.is_empty() {
            return Err(Error::InvalidGame(defects));
        }
        Ok(Self {
            strategy_counts,
            payoffs,
            player_names,
            strategy_labels,
        })
    }

    /// Builds a game by evaluating `f` at every pure profile.
    pub fn from_fn<F>(strategy_counts: Vec<usize>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let defects = shape_defects(&strategy_counts);
        if !defects.is_empty() {
            return Err(Error::InvalidGame(defects));
        }
        let n = strategy_counts.len();
        let mut payoffs = Vec::with_capacity(strategy_counts.iter().product::<usize>() * n);
        for profile in ProfileIter::new(&strategy_counts) {
            let values = f(&profile);
            if values.len() != n {
                return Err(Error::InvalidGame(vec![Defect::ValueCount {
                    profile,
                    expected: n,
                    found: values.len(),
                }]));
            }
            payoffs.extend(values);
        }
        Self::new(strategy_counts, payoffs)
    }

    pub fn players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    /// `N`, the total number of pure strategies over all players.
    pub fn total_strategies(&self) -> usize {
        self.strategy_counts.iter().sum()
    }

    /// `M`, the number of pure profiles (vertices of the strategy space).
    pub fn profile_count(&self) -> usize {
        self.strategy_counts.iter().product()
    }

    /// Dimension `N - n` of the strategy space.
    pub fn reduced_dim(&self) -> usize {
        self.total_strategies() - self.players()
    }

    pub fn player_names(&self) -> &[String] {
        &self.player_names
    }

    pub fn strategy_labels(&self) -> &[Vec<String>] {
        &self.strategy_labels
    }

    /// The full tensor, row-major over profiles with the component fastest.
    pub fn payoff_tensor(&self) -> &[f64] {
        &self.payoffs
    }

    /// Row-major position of a pure profile.
    pub fn profile_index(&self, profile: &[usize]) -> Result<usize> {
        if profile.len() != self.players() {
            return Err(Error::ShapeMismatch(format!(
                "profile has {} entries, game has {} players",
                profile.len(),
                self.players()
            )));
        }
        let mut index = 0;
        for (player, (&j, &m)) in profile.iter().zip(&self.strategy_counts).enumerate() {
            if j >= m {
                return Err(Error::StrategyOutOfRange {
                    player,
                    index: j,
                    count: m,
                });
            }
            index = index * m + j;
        }
        Ok(index)
    }

    /// Payoff vector at a pure profile.
    pub fn payoff(&self, profile: &[usize]) -> Result<&[f64]> {
        let n = self.players();
        let k = self.profile_index(profile)?;
        Ok(&self.payoffs[k * n..(k + 1) * n])
    }

    /// Iterates over all pure profiles in lexicographic order.
    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(&self.strategy_counts)
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.players() {
            return Err(Error::PlayerOutOfRange {
                player,
                players: self.players(),
            });
        }
        Ok(())
    }

    /// Human-readable label of a pure profile, e.g. `(M, A)`.
    pub fn profile_label(&self, profile: &[usize]) -> String {
        let parts: Vec<&str> = profile
            .iter()
            .enumerate()
            .map(|(p, &j)| self.strategy_labels[p][j].as_str())
            .collect();
        format!("({})", parts.join(", "))
    }
}

/// Odometer over pure profiles; the last player's index varies fastest.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(counts: &[usize]) -> Self {
        let next = if counts.iter().all(|&m| m > 0) {
            Some(vec![0; counts.len()])
        } else {
            None
        };
        Self {
            counts: counts.to_vec(),
            next,
        }
    }
}

impl Iterator for ProfileIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.counts[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

pub(crate) fn unflatten(mut index: usize, counts: &[usize]) -> Vec<usize> {
    let mut profile = vec![0; counts.len()];
    for p in (0..counts.len()).rev() {
        profile[p] = index % counts[p];
        index /= counts[p];
    }
    profile
}

pub fn default_player_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("player {i}")).collect()
}

pub fn default_strategy_labels(counts: &[usize]) -> Vec<Vec<String>> {
    counts
        .iter()
        .map(|&m| (1..=m).map(|j| format!("s{j}")).collect())
        .collect()
}

/// A violated game invariant, reported as data by [`validate_game`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defect {
    TooFewPlayers {
        players: usize,
    },
    NoStrategies {
        player: usize,
    },
    TooLarge {
        profiles: usize,
        limit: usize,
    },
    TensorLength {
        expected: usize,
        found: usize,
    },
    ProfileLength {
        entry: usize,
        expected: usize,
        found: usize,
    },
    IndexOutOfRange {
        entry: usize,
        player: usize,
        index: usize,
        count: usize,
    },
    ValueCount {
        profile: Vec<usize>,
        expected: usize,
        found: usize,
    },
    DuplicateProfile {
        profile: Vec<usize>,
    },
    IncompleteTensor {
        missing: Vec<usize>,
    },
    NonFinite {
        profile: Vec<usize>,
        player: usize,
    },
    LabelCount {
        player: usize,
        expected: usize,
        found: usize,
    },
    NameCount {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::TooFewPlayers { players } => {
                write!(f, "too few players: {players} (need at least 2)")
            }
            Defect::NoStrategies { player } => {
                write!(f, "player {player} has no pure strategies")
            }
            Defect::TooLarge { profiles, limit } => {
                write!(f, "game too large: {profiles} pure profiles (limit {limit})")
            }
            Defect::TensorLength { expected, found } => write!(
                f,
                "incomplete tensor: expected {expected} payoff entries, found {found}"
            ),
            Defect::ProfileLength {
                entry,
                expected,
                found,
            } => write!(
                f,
                "entry {entry}: profile has {found} indices, expected {expected}"
            ),
            Defect::IndexOutOfRange {
                entry,
                player,
                index,
                count,
            } => write!(
                f,
                "entry {entry}: index out of range: strategy {index} for player {player} with {count} strategies"
            ),
            Defect::ValueCount {
                profile,
                expected,
                found,
            } => write!(
                f,
                "profile {profile:?}: {found} payoff values, expected {expected}"
            ),
            Defect::DuplicateProfile { profile } => {
                write!(f, "duplicate profile {profile:?}")
            }
            Defect::IncompleteTensor { missing } => {
                write!(f, "incomplete tensor: profile {missing:?} missing")
            }
            Defect::NonFinite { profile, player } => write!(
                f,
                "non-finite payoff at profile {profile:?} for player {player}"
            ),
            Defect::LabelCount {
                player,
                expected,
                found,
            } => write!(
                f,
                "player {player}: {found} strategy labels, expected {expected}"
            ),
            Defect::NameCount { expected, found } => {
                write!(f, "{found} player names, expected {expected}")
            }
        }
    }
}

/// One `(profile, values)` row of a sparse payoff listing.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffEntry {
    pub profile: Vec<usize>,
    pub values: Vec<f64>,
}

/// A game as listed entry by entry, before its invariants are checked.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    pub player_names: Vec<String>,
    pub strategy_labels: Vec<Vec<String>>,
    pub entries: Vec<PayoffEntry>,
}

impl PayoffTable {
    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategy_labels.iter().map(Vec::len).collect()
    }

    /// Validates and densifies the table.
    pub fn into_game(self) -> Result<GameSpec> {
        let defects = validate_game(&self);
        if !defects.is_empty() {
            return Err(Error::InvalidGame(defects));
        }
        let counts = self.strategy_counts();
        let n = counts.len();
        let m: usize = counts.iter().product();
        let mut payoffs = vec![0.0; m * n];
        for entry in &self.entries {
            let mut k = 0;
            for (&j, &c) in entry.profile.iter().zip(&counts) {
                k = k * c + j;
            }
            payoffs[k * n..(k + 1) * n].copy_from_slice(&entry.values);
        }
        GameSpec::with_labels(counts, payoffs, self.player_names, self.strategy_labels)
    }
}

impl From<&GameSpec> for PayoffTable {
    fn from(g: &GameSpec) -> Self {
        let entries = g
            .profiles()
            .map(|profile| {
                let values = g.payoff(&profile).expect("profile in range").to_vec();
                PayoffEntry { profile, values }
            })
            .collect();
        Self {
            player_names: g.player_names.clone(),
            strategy_labels: g.strategy_labels.clone(),
            entries,
        }
    }
}

fn shape_defects(counts: &[usize]) -> Vec<Defect> {
    let mut defects = Vec::new();
    if counts.len() < 2 {
        defects.push(Defect::TooFewPlayers {
            players: counts.len(),
        });
    }
    for (player, &m) in counts.iter().enumerate() {
        if m == 0 {
            defects.push(Defect::NoStrategies { player });
        }
    }
    let profiles = counts
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .unwrap_or(usize::MAX);
    if profiles > MAX_PROFILES {
        defects.push(Defect::TooLarge {
            profiles,
            limit: MAX_PROFILES,
        });
    }
    defects
}

fn label_defects(counts: &[usize], names: &[String], labels: &[Vec<String>]) -> Vec<Defect> {
    let mut defects = Vec::new();
    if names.len() != counts.len() {
        defects.push(Defect::NameCount {
            expected: counts.len(),
            found: names.len(),
        });
    }
    if labels.len() != counts.len() {
        defects.push(Defect::NameCount {
            expected: counts.len(),
            found: labels.len(),
        });
        return defects;
    }
    for (player, (l, &m)) in labels.iter().zip(counts).enumerate() {
        if l.len() != m {
            defects.push(Defect::LabelCount {
                player,
                expected: m,
                found: l.len(),
            });
        }
    }
    defects
}

/// Checks every game invariant on an entry listing; an empty result means
/// the table densifies to a valid [`GameSpec`].
pub fn validate_game(table: &PayoffTable) -> Vec<Defect> {
    let counts = table.strategy_counts();
    let n = counts.len();
    let mut defects = shape_defects(&counts);
    if table.player_names.len() != n {
        defects.push(Defect::NameCount {
            expected: n,
            found: table.player_names.len(),
        });
    }
    let shape_ok = defects.is_empty();

    let mut seen = BTreeSet::new();
    for (entry_index, entry) in table.entries.iter().enumerate() {
        if entry.profile.len() != n {
            defects.push(Defect::ProfileLength {
                entry: entry_index,
                expected: n,
                found: entry.profile.len(),
            });
            continue;
        }
        let mut in_range = true;
        for (player, (&j, &m)) in entry.profile.iter().zip(&counts).enumerate() {
            if j >= m {
                in_range = false;
                defects.push(Defect::IndexOutOfRange {
                    entry: entry_index,
                    player,
                    index: j,
                    count: m,
                });
            }
        }
        if entry.values.len() != n {
            defects.push(Defect::ValueCount {
                profile: entry.profile.clone(),
                expected: n,
                found: entry.values.len(),
            });
        }
        for (player, v) in entry.values.iter().enumerate() {
            if !v.is_finite() {
                defects.push(Defect::NonFinite {
                    profile: entry.profile.clone(),
                    player,
                });
            }
        }
        if in_range && !seen.insert(entry.profile.clone()) {
            defects.push(Defect::DuplicateProfile {
                profile: entry.profile.clone(),
            });
        }
    }

    if shape_ok {
        for profile in ProfileIter::new(&counts) {
            if !seen.contains(&profile) {
                defects.push(Defect::IncompleteTensor { missing: profile });
            }
        }
    }
    defects
}
