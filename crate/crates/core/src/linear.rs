//! Exact level sets for games whose payoff map is jointly affine.
//!
//! When every payoff is affine in all players' strategies at once, the map
//! on the reduced chart is `r -> A r + b` and each level set is a translate
//! of `ker A`. Rank-nullity then bounds its dimension from below by the
//! number of columns minus the number of rows.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{GameSpec, ProfileIter, EVAL_TOL};
use crate::linalg::{default_rank_tol, mat_vec, max_abs, phase_one_infeasibility, FullSvd};
use crate::payoff::is_zero_sum;
use crate::profile::ReducedPoint;

/// Residual above which a target payoff is declared outside the image.
pub const LEVEL_SET_RESIDUAL_TOL: f64 = 1e-8;

/// True iff every cross second difference of the payoff tensor vanishes
/// within `tol`: for each player pair `(p, q)`, component `i`, strategy
/// pairs `(a, a')` of `p` and `(b, b')` of `q`, and each fixed profile of
/// the remaining players,
/// `T(a,b) - T(a,b') - T(a',b) + T(a',b')` is zero.
pub fn test_joint_affinity(g: &GameSpec, tol: f64) -> bool {
    let counts = g.strategy_counts();
    let n = g.players();
    let tensor = g.payoff_tensor();
    // row-major strides in units of profiles
    let mut strides = vec![1usize; n];
    for p in (0..n.saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * counts[p + 1];
    }
    for p in 0..n {
        for q in p + 1..n {
            let mut rest_counts = counts.to_vec();
            rest_counts[p] = 1;
            rest_counts[q] = 1;
            for base in ProfileIter::new(&rest_counts) {
                let base_index: usize = base.iter().zip(&strides).map(|(j, s)| j * s).sum();
                let at = |a: usize, b: usize, i: usize| {
                    tensor[(base_index + a * strides[p] + b * strides[q]) * n + i]
                };
                for a in 0..counts[p] {
                    for a2 in a + 1..counts[p] {
                        for b in 0..counts[q] {
                            for b2 in b + 1..counts[q] {
                                for i in 0..n {
                                    let d =
                                        at(a, b, i) - at(a, b2, i) - at(a2, b, i) + at(a2, b2, i);
                                    if d.abs() > tol {
                                        return false;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// `p(embed(r)) = matrix * r + offset` on the reduced chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineRepresentation {
    #[serde(serialize_with = "serialize_matrix")]
    pub matrix: DMatrix<f64>,
    pub offset: Vec<f64>,
    /// The last payoff component was dropped (it is minus the sum of the
    /// others in a zero-sum game).
    pub zero_sum_reduced: bool,
    pub strategy_counts: Vec<usize>,
}

fn serialize_matrix<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl AffineRepresentation {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn evaluate(&self, r: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, r)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn rank(&self) -> usize {
        FullSvd::new(&self.matrix).rank(default_rank_tol(self.rows(), self.cols()))
    }

    pub fn nullity(&self) -> usize {
        self.cols() - self.rank()
    }
}

/// Reads the affine map off the payoff tensor. The offset is the payoff at
/// the reduced origin (every player on its last strategy); column `(p, j)`
/// is the change when player `p` switches to strategy `j`.
pub fn extract_affine(g: &GameSpec, use_zero_sum_reduction: bool) -> Result<AffineRepresentation> {
    if !test_joint_affinity(g, EVAL_TOL) {
        return Err(Error::NotJointlyAffine);
    }
    if use_zero_sum_reduction && !is_zero_sum(g, EVAL_TOL) {
        return Err(Error::NotZeroSum);
    }
    let n = g.players();
    let rows = if use_zero_sum_reduction { n - 1 } else { n };
    let counts = g.strategy_counts();
    let origin: Vec<usize> = counts.iter().map(|&m| m - 1).collect();
    let offset = g.payoff(&origin)?[..rows].to_vec();

    let mut matrix = DMatrix::zeros(rows, g.reduced_dim());
    let mut col = 0;
    for (p, &m) in counts.iter().enumerate() {
        for j in 0..m - 1 {
            let mut vertex = origin.clone();
            vertex[p] = j;
            let value = g.payoff(&vertex)?;
            for i in 0..rows {
                matrix[(i, col)] = value[i] - offset[i];
            }
            col += 1;
        }
    }
    Ok(AffineRepresentation {
        matrix,
        offset,
        zero_sum_reduced: use_zero_sum_reduction,
        strategy_counts: counts.to_vec(),
    })
}

/// Parameter interval `[t_min, t_max]` for which `base + t * direction`
/// stays in the strategy space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub t_min: f64,
    pub t_max: f64,
}

/// `{ r : matrix * r + offset = y }` on the reduced chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineLevelSet {
    /// Minimum-norm solution.
    pub base_point: ReducedPoint,
    /// Orthonormal basis of `ker(matrix)`.
    pub kernel_basis: Vec<Vec<f64>>,
    pub dimension: usize,
    pub rank: usize,
    /// Only for one-dimensional level sets: where the line meets the
    /// strategy space, or `None` if it misses it.
    pub segment: Option<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSet {
    /// `y` is not attained on the strategy space; `residual` is the least
    /// squares residual or, when that vanishes, the distance (in summed
    /// constraint violation) from the affine solutions to the strategy space.
    Empty {
        residual: f64,
    },
    Affine(AffineLevelSet),
}

impl LevelSet {
    pub fn affine(&self) -> Option<&AffineLevelSet> {
        match self {
            LevelSet::Affine(set) => Some(set),
            LevelSet::Empty { .. } => None,
        }
    }
}

pub fn affine_level_set(rep: &AffineRepresentation, y: &[f64]) -> Result<LevelSet> {
    if y.len() != rep.rows() {
        return Err(Error::ShapeMismatch(format!(
            "target has {} components, representation has {} rows",
            y.len(),
            rep.rows()
        )));
    }
    let tol = default_rank_tol(rep.rows(), rep.cols());
    let svd = FullSvd::new(&rep.matrix);
    let rhs: Vec<f64> = y.iter().zip(&rep.offset).map(|(y, b)| y - b).collect();
    let base = svd.solve(&rhs, tol);
    let residual = max_abs(
        &rep.evaluate(&base)
            .iter()
            .zip(y)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    if residual > LEVEL_SET_RESIDUAL_TOL {
        return Ok(LevelSet::Empty { residual });
    }
    let gap = strategy_space_gap(rep, &rhs);
    if gap > LEVEL_SET_RESIDUAL_TOL {
        return Ok(LevelSet::Empty { residual: gap });
    }
    let kernel_basis = svd.nullspace(tol);
    let dimension = kernel_basis.len();
    let segment = if dimension == 1 {
        line_segment(&rep.strategy_counts, &base, &kernel_basis[0])
    } else {
        None
    };
    Ok(LevelSet::Affine(AffineLevelSet {
        base_point: ReducedPoint(base),
        rank: rep.cols() - dimension,
        kernel_basis,
        dimension,
        segment,
    }))
}

/// How far the affine solution set of `matrix * r = rhs` is from meeting the
/// strategy space (`r >= 0`, per-player sums at most one), as the optimal
/// phase-one infeasibility. Zero when they intersect.
fn strategy_space_gap(rep: &AffineRepresentation, rhs: &[f64]) -> f64 {
    let players = rep.strategy_counts.len();
    let d = rep.cols();
    let rows = players + rep.rows();
    let mut eq = DMatrix::zeros(rows, d + players);
    let mut b = vec![0.0; rows];
    let mut offset = 0;
    for (p, &m) in rep.strategy_counts.iter().enumerate() {
        for k in offset..offset + m - 1 {
            eq[(p, k)] = 1.0;
        }
        offset += m - 1;
        eq[(p, d + p)] = 1.0;
        b[p] = 1.0;
    }
    for i in 0..rep.rows() {
        for k in 0..d {
            eq[(players + i, k)] = rep.matrix[(i, k)];
        }
        b[players + i] = rhs[i];
    }
    phase_one_infeasibility(&eq, &b)
}

/// Intersects `base + t * dir` with the constraints `r >= 0` and, per
/// player, `sum(r) <= 1`.
fn line_segment(counts: &[usize], base: &[f64], dir: &[f64]) -> Option<Segment> {
    const SLACK: f64 = 1e-12;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    // each constraint reads a + t * b >= 0
    let mut apply = |a: f64, b: f64| -> bool {
        if b.abs() <= SLACK {
            return a >= -SLACK;
        }
        let t = -a / b;
        if b > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        true
    };
    let mut offset = 0;
    for &m in counts {
        let block = offset..offset + m - 1;
        offset += m - 1;
        for k in block.clone() {
            if !apply(base[k], dir[k]) {
                return None;
            }
        }
        let a = 1.0 - base[block.clone()].iter().sum::<f64>();
        let b = -dir[block].iter().sum::<f64>();
        if !apply(a, b) {
            return None;
        }
    }
    (lo <= hi + SLACK && lo.is_finite() && hi.is_finite()).then_some(Segment {
        t_min: lo,
        t_max: hi,
    })
}

/// Lower bound on level-set dimensions for a jointly-affine game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionBound {
    pub rank: usize,
    pub nullity: usize,
    pub all_players_have_two: bool,
    /// Some player has three or more pure strategies.
    pub many_strategies: bool,
    pub zero_sum: bool,
    /// `N - 2n`, or `N - 2n + 1` when the game is zero-sum and the
    /// representation is reduced; `None` when neither condition holds.
    pub bound: Option<i64>,
    pub satisfied: bool,
}

pub fn dimension_bound(g: &GameSpec, rep: &AffineRepresentation) -> DimensionBound {
    let n = g.players() as i64;
    let total = g.total_strategies() as i64;
    let all_players_have_two = g.strategy_counts().iter().all(|&m| m >= 2);
    let many_strategies = g.strategy_counts().iter().any(|&m| m >= 3);
    let zero_sum = is_zero_sum(g, EVAL_TOL);
    let bound = if !all_players_have_two {
        None
    } else if zero_sum && rep.zero_sum_reduced {
        Some(total - 2 * n + 1)
    } else if many_strategies {
        Some(total - 2 * n)
    } else {
        None
    };
    let rank = rep.rank();
    let nullity = rep.cols() - rank;
    DimensionBound {
        rank,
        nullity,
        all_players_have_two,
        many_strategies,
        zero_sum,
        bound,
        satisfied: bound.is_none_or(|b| nullity as i64 >= b),
    }
}
