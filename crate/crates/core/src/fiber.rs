//! Local structure of level sets for general games.
//!
//! At a point where the payoff Jacobian on the reduced chart has the
//! generic rank `k`, the level set through it is locally a manifold of
//! dimension `N - n - k` whose tangent space is the Jacobian nullspace.
//! This module estimates `k` by sampling, checks the tangent space by
//! second-order constancy, and walks along level sets by predictor-corrector
//! continuation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::linalg::{default_rank_tol, dot, max_abs, norm, FullSvd};
use crate::payoff::{payoff_at_reduced, pure_deviation_payoffs};
use crate::profile::{complete_blocks, PayoffVector, ReducedPoint, StrategyProfile};
use crate::sampling::{random_interior_profile, task_rng};

pub const DEFAULT_GENERIC_SAMPLES: usize = 64;

/// Smallest coordinate a point may have to count as interior.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// Step sizes used for the constancy check along nullspace directions.
pub const CONSTANCY_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

const MAX_CORRECTOR_ITERATIONS: usize = 20;

/// Jacobian of the payoff map on the reduced chart, `n x (N - n)`.
///
/// Column `(p, j)` is `p(s; p; e_j) - p(s; p; e_last)`: moving mass from
/// player `p`'s last strategy to strategy `j`. Exact because each payoff is
/// linear in every single block.
pub fn payoff_jacobian(g: &GameSpec, s: &StrategyProfile) -> Result<DMatrix<f64>> {
    s.check_shape(g)?;
    let n = g.players();
    let mut jac = DMatrix::zeros(n, g.reduced_dim());
    let mut col = 0;
    for (p, &m) in g.strategy_counts().iter().enumerate() {
        let rows = pure_deviation_payoffs(g, s, p)?;
        let last = &rows[m - 1];
        for row in &rows[..m - 1] {
            for i in 0..n {
                jac[(i, col)] = row[i] - last[i];
            }
            col += 1;
        }
    }
    Ok(jac)
}

/// Jacobian at an arbitrary point of the reduced chart, using the
/// polynomial extension of the payoff map off the simplex.
fn jacobian_at_reduced(g: &GameSpec, coords: &[f64]) -> Result<DMatrix<f64>> {
    let blocks = complete_blocks(g, coords)?;
    payoff_jacobian(g, &StrategyProfile::from_blocks_unchecked(blocks))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Counts singular values above `tau` times the largest one.
pub fn numerical_rank(mat: &DMatrix<f64>, tau: f64) -> RankInfo {
    let svd = FullSvd::new(mat);
    RankInfo {
        rank: svd.rank(tau),
        singular_values: svd.singular_values,
    }
}

fn jacobian_tol(jac: &DMatrix<f64>) -> f64 {
    default_rank_tol(jac.nrows(), jac.ncols())
}

/// Generic Jacobian rank: the maximum over `samples` interior points drawn
/// uniformly from the strategy space. Sample `i` uses its own stream derived
/// from `(seed, i)`.
pub fn generic_rank(g: &GameSpec, samples: usize, seed: u64) -> usize {
    (0..samples.max(1) as u64)
        .map(|i| {
            let mut rng = task_rng(seed, i);
            let s = random_interior_profile(&mut rng, g);
            let jac = payoff_jacobian(g, &s).expect("sampled profile matches game");
            numerical_rank(&jac, jacobian_tol(&jac)).rank
        })
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstancyResidual {
    /// Index into the nullspace basis.
    pub direction: usize,
    pub epsilon: f64,
    /// `max_i |p_i(r + epsilon v) - p_i(r)|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberReport {
    pub point: ReducedPoint,
    pub jacobian_rank: usize,
    pub singular_values: Vec<f64>,
    pub nullspace_basis: Vec<Vec<f64>>,
    pub constancy_residuals: Vec<ConstancyResidual>,
    pub regular: bool,
}

impl FiberReport {
    pub fn fiber_dimension(&self) -> usize {
        self.nullspace_basis.len()
    }

    /// Residuals along one nullspace direction, in the order of
    /// [`CONSTANCY_EPSILONS`].
    pub fn residuals_for(&self, direction: usize) -> Vec<f64> {
        self.constancy_residuals
            .iter()
            .filter(|c| c.direction == direction)
            .map(|c| c.deviation)
            .collect()
    }
}

fn check_interior(s: &StrategyProfile) -> Result<()> {
    let min = s.min_entry();
    if min < INTERIOR_MARGIN {
        return Err(Error::BoundaryPoint(format!(
            "smallest coordinate {min} is below {INTERIOR_MARGIN}"
        )));
    }
    Ok(())
}

/// Rank, tangent space and constancy residuals of the level set through
/// an interior point `s`.
pub fn fiber_report(g: &GameSpec, s: &StrategyProfile, k_generic: usize) -> Result<FiberReport> {
    s.check_shape(g)?;
    check_interior(s)?;
    let jac = payoff_jacobian(g, s)?;
    let tol = jacobian_tol(&jac);
    let svd = FullSvd::new(&jac);
    let rank = svd.rank(tol);
    let basis = svd.nullspace(tol);

    let r = s.reduce();
    let base = payoff_at_reduced(g, r.coords())?;
    let mut residuals = Vec::with_capacity(basis.len() * CONSTANCY_EPSILONS.len());
    for (direction, v) in basis.iter().enumerate() {
        for &epsilon in &CONSTANCY_EPSILONS {
            let moved: Vec<f64> = r
                .coords()
                .iter()
                .zip(v)
                .map(|(x, d)| x + epsilon * d)
                .collect();
            let value = payoff_at_reduced(g, &moved)?;
            residuals.push(ConstancyResidual {
                direction,
                epsilon,
                deviation: value.max_abs_diff(base.values()),
            });
        }
    }
    Ok(FiberReport {
        point: r,
        jacobian_rank: rank,
        singular_values: svd.singular_values,
        nullspace_basis: basis,
        constancy_residuals: residuals,
        regular: rank == k_generic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepBudget,
    Boundary,
    CorrectorFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::StepBudget => "step_budget",
            Termination::Boundary => "boundary",
            Termination::CorrectorFailure => "corrector_failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberPath {
    pub points: Vec<ReducedPoint>,
    pub target_payoff: PayoffVector,
    /// Largest `||p(point) - target||_inf` over accepted points.
    pub max_payoff_drift: f64,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    /// Index into the nullspace basis at the start point.
    pub direction: usize,
    pub step: f64,
    pub max_steps: usize,
    /// Corrector stops once `||p - target||_inf <= tol`.
    pub tol: f64,
    /// Generic rank to compare the start against; estimated with
    /// [`DEFAULT_GENERIC_SAMPLES`] samples and seed 0 when `None`.
    pub generic_rank: Option<usize>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            direction: 0,
            step: 0.02,
            max_steps: 100,
            tol: 1e-10,
            generic_rank: None,
        }
    }
}

fn min_implied_coordinate(g: &GameSpec, coords: &[f64]) -> Result<f64> {
    Ok(complete_blocks(g, coords)?
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Walks along the level set through `s0`.
///
/// Each step predicts along the current unit tangent, then corrects back
/// onto the level set with Gauss-Newton (minimum-norm steps through the
/// Jacobian pseudoinverse). The tangent is recomputed at every accepted
/// point as the projection of the previous tangent onto the new nullspace,
/// which keeps its orientation. The walk stops before leaving the interior.
pub fn trace_fiber(g: &GameSpec, s0: &StrategyProfile, config: &TraceConfig) -> Result<FiberPath> {
    s0.check_shape(g)?;
    check_interior(s0)?;
    let k = config
        .generic_rank
        .unwrap_or_else(|| generic_rank(g, DEFAULT_GENERIC_SAMPLES, 0));
    let jac = payoff_jacobian(g, s0)?;
    let tol = jacobian_tol(&jac);
    let svd = FullSvd::new(&jac);
    let rank = svd.rank(tol);
    if rank != k {
        return Err(Error::IrregularStart { rank, generic: k });
    }
    let basis = svd.nullspace(tol);
    if config.direction >= basis.len() {
        return Err(Error::InvalidDirection {
            index: config.direction,
            dimension: basis.len(),
        });
    }

    let mut r = s0.reduce().0;
    let target = payoff_at_reduced(g, &r)?;
    let mut tangent = basis[config.direction].clone();
    let mut points = vec![ReducedPoint(r.clone())];
    let mut drift: f64 = 0.0;
    let mut terminated_by = Termination::StepBudget;

    for _ in 0..config.max_steps {
        let predicted: Vec<f64> = r
            .iter()
            .zip(&tangent)
            .map(|(x, t)| x + config.step * t)
            .collect();
        if min_implied_coordinate(g, &predicted)? < INTERIOR_MARGIN {
            terminated_by = Termination::Boundary;
            break;
        }
        let Some((corrected, residual)) = correct(g, predicted, target.values(), config.tol)?
        else {
            terminated_by = Termination::CorrectorFailure;
            break;
        };
        if min_implied_coordinate(g, &corrected)? < INTERIOR_MARGIN {
            terminated_by = Termination::Boundary;
            break;
        }
        drift = drift.max(residual);
        tangent = next_tangent(g, &corrected, &tangent, config.direction)?;
        r = corrected;
        points.push(ReducedPoint(r.clone()));
    }

    Ok(FiberPath {
        points,
        target_payoff: target,
        max_payoff_drift: drift,
        terminated_by,
    })
}

/// Gauss-Newton projection onto `p = target`. Returns the corrected point
/// and its residual, or `None` if the iteration budget runs out.
fn correct(
    g: &GameSpec,
    mut x: Vec<f64>,
    target: &[f64],
    tol: f64,
) -> Result<Option<(Vec<f64>, f64)>> {
    for iteration in 0..=MAX_CORRECTOR_ITERATIONS {
        let value = payoff_at_reduced(g, &x)?;
        let residual: Vec<f64> = value
            .values()
            .iter()
            .zip(target)
            .map(|(a, b)| a - b)
            .collect();
        let size = max_abs(&residual);
        if size <= tol {
            return Ok(Some((x, size)));
        }
        if iteration == MAX_CORRECTOR_ITERATIONS || !size.is_finite() {
            break;
        }
        let jac = jacobian_at_reduced(g, &x)?;
        let svd = FullSvd::new(&jac);
        let neg: Vec<f64> = residual.iter().map(|v| -v).collect();
        let dx = svd.solve(&neg, jacobian_tol(&jac));
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    Ok(None)
}

fn next_tangent(
    g: &GameSpec,
    coords: &[f64],
    previous: &[f64],
    direction: usize,
) -> Result<Vec<f64>> {
    let jac = jacobian_at_reduced(g, coords)?;
    let basis = FullSvd::new(&jac).nullspace(jacobian_tol(&jac));
    if basis.is_empty() {
        return Ok(previous.to_vec());
    }
    let mut projected = vec![0.0; previous.len()];
    for v in &basis {
        let c = dot(v, previous);
        for (p, x) in projected.iter_mut().zip(v) {
            *p += c * x;
        }
    }
    let size = norm(&projected);
    if size > 1e-3 {
        return Ok(projected.into_iter().map(|x| x / size).collect());
    }
    // The previous tangent is nearly orthogonal to the new nullspace; fall
    // back to the requested basis index, oriented like the previous step.
    let mut v = basis[direction.min(basis.len() - 1)].clone();
    if dot(&v, previous) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{builtin, Builtin};

    #[test]
    fn bar_jacobian_is_constant() {
        let g = builtin(Builtin::Bar);
        for s in [
            StrategyProfile::uniform(&[2, 2]),
            StrategyProfile::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap(),
        ] {
            let jac = payoff_jacobian(&g, &s).unwrap();
            assert_eq!(jac, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        }
    }

    fn skewed_rps() -> StrategyProfile {
        StrategyProfile::new(vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.3, 0.5]]).unwrap()
    }

    #[test]
    fn rps_jacobian_rows_are_opposite() {
        let g = builtin(Builtin::Rps);
        // the uniform profile is a critical point, so move off it
        let uniform = payoff_jacobian(&g, &StrategyProfile::uniform(&[3, 3])).unwrap();
        assert!(uniform.iter().all(|&x| x == 0.0));
        let jac = payoff_jacobian(&g, &skewed_rps()).unwrap();
        for c in 0..4 {
            assert_eq!(jac[(1, c)], -jac[(0, c)]);
        }
        let info = numerical_rank(&jac, jacobian_tol(&jac));
        assert_eq!(info.rank, 1);
        assert!(info.singular_values[1] < 1e-15);
    }

    #[test]
    fn ranks_of_fixtures() {
        assert_eq!(generic_rank(&builtin(Builtin::Bar), 8, 0), 1);
        assert_eq!(generic_rank(&builtin(Builtin::Rps), 64, 7), 1);
        let constant = GameSpec::new(vec![2, 3], vec![2.0; 12]).unwrap();
        assert_eq!(generic_rank(&constant, 8, 0), 0);
    }

    #[test]
    fn bar_fiber_is_the_diagonal() {
        let g = builtin(Builtin::Bar);
        let s = StrategyProfile::uniform(&[2, 2]);
        let report = fiber_report(&g, &s, 1).unwrap();
        assert!(report.regular);
        assert_eq!(report.nullspace_basis.len(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((report.nullspace_basis[0][0] - h).abs() < 1e-15);
        assert!((report.nullspace_basis[0][1] - h).abs() < 1e-15);
        assert!(report
            .constancy_residuals
            .iter()
            .all(|c| c.deviation == 0.0));
    }

    #[test]
    fn constant_game_fiber_is_everything() {
        let g = GameSpec::new(vec![2, 3], vec![2.0; 12]).unwrap();
        let report = fiber_report(&g, &StrategyProfile::uniform(&[2, 3]), 0).unwrap();
        assert_eq!(report.fiber_dimension(), 3);
        assert!(report
            .constancy_residuals
            .iter()
            .all(|c| c.deviation == 0.0));
    }

    #[test]
    fn boundary_points_are_rejected() {
        let g = builtin(Builtin::Bar);
        let s = StrategyProfile::pure(&[2, 2], &[0, 0]).unwrap();
        assert!(matches!(
            fiber_report(&g, &s, 1),
            Err(Error::BoundaryPoint(_))
        ));
    }

    #[test]
    fn zero_step_stays_put() {
        let g = builtin(Builtin::Rps);
        let s = skewed_rps();
        let config = TraceConfig {
            step: 0.0,
            max_steps: 5,
            ..TraceConfig::default()
        };
        let path = trace_fiber(&g, &s, &config).unwrap();
        assert_eq!(path.points.len(), 6);
        assert!(path.points.iter().all(|p| p == &path.points[0]));
        assert_eq!(path.max_payoff_drift, 0.0);
        assert_eq!(path.terminated_by, Termination::StepBudget);
    }

    #[test]
    fn trace_errors() {
        let g = builtin(Builtin::Bar);
        let s = StrategyProfile::uniform(&[2, 2]);
        let bad_dir = TraceConfig {
            direction: 1,
            ..TraceConfig::default()
        };
        assert_eq!(
            trace_fiber(&g, &s, &bad_dir).unwrap_err(),
            Error::InvalidDirection {
                index: 1,
                dimension: 1
            }
        );
        let wrong_k = TraceConfig {
            generic_rank: Some(2),
            ..TraceConfig::default()
        };
        assert!(matches!(
            trace_fiber(&g, &s, &wrong_k),
            Err(Error::IrregularStart {
                rank: 1,
                generic: 2
            })
        ));
    }
}
