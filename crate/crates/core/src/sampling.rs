//! Seeded random streams and interior sampling of the strategy space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::game::GameSpec;
use crate::profile::StrategyProfile;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for the `index`-th task of a seeded computation, so
/// results do not depend on the order in which tasks run.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Uniform draw from the probability simplex in `R^m` (normalized
/// exponentials, i.e. a flat Dirichlet).
pub fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Independent uniform draws on each player's simplex.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, strategy_counts: &[usize]) -> StrategyProfile {
    let blocks = strategy_counts
        .iter()
        .map(|&m| uniform_simplex(rng, m))
        .collect();
    StrategyProfile::from_blocks_unchecked(blocks)
}

pub fn random_interior_profile<R: Rng + ?Sized>(rng: &mut R, g: &GameSpec) -> StrategyProfile {
    random_profile(rng, g.strategy_counts())
}
