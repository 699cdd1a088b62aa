//! SVD-based rank, nullspace and minimum-norm least squares.

use nalgebra::DMatrix;

/// Default relative rank cutoff: `max(rows, cols) * 2^-46`. A singular value
/// counts when it exceeds this factor times the largest one.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * 2f64.powi(-46)
}

/// Full singular value decomposition `A = U diag(s) V^T` with singular values
/// sorted in decreasing order and a complete `cols x cols` right basis `V`.
#[derive(Debug, Clone)]
pub struct FullSvd {
    /// `rows x k` left singular vectors, `k = min(rows, cols)`.
    pub u: DMatrix<f64>,
    /// Length `k`, decreasing.
    pub singular_values: Vec<f64>,
    /// `cols x cols`, columns are right singular vectors; columns past `k`
    /// span part of the nullspace.
    pub v: DMatrix<f64>,
}

impl FullSvd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (rows, cols) = a.shape();
        let k = rows.min(cols);
        if rows == 0 || cols == 0 {
            return Self {
                u: DMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v: DMatrix::identity(cols, cols),
            };
        }
        // Wide matrices are padded with zero rows so the decomposition
        // yields every right singular vector.
        let padded;
        let work = if rows < cols {
            let mut p = DMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (rows, cols)).copy_from(a);
            padded = p;
            &padded
        } else {
            a
        };
        let svd = work.clone().svd(true, true);
        let u_all = svd.u.expect("requested U");
        let vt = svd.v_t.expect("requested V^T");
        let sv = svd.singular_values;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

        let mut u = DMatrix::zeros(rows, k);
        let mut v = DMatrix::zeros(cols, cols);
        let mut singular_values = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            v.set_column(dst, &vt.row(src).transpose());
            if dst < k {
                singular_values.push(sv[src]);
                u.set_column(dst, &u_all.column(src).rows(0, rows));
            }
        }
        Self {
            u,
            singular_values,
            v,
        }
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rel_tol * largest`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cutoff = rel_tol * self.largest();
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    /// Orthonormal nullspace basis with deterministic signs.
    pub fn nullspace(&self, rel_tol: f64) -> Vec<Vec<f64>> {
        let r = self.rank(rel_tol);
        (r..self.v.ncols())
            .map(|c| canonical_sign(self.v.column(c).iter().copied().collect()))
            .collect()
    }

    /// Minimum-norm least-squares solution of `A x = b`, truncating singular
    /// values at `rel_tol * largest`.
    pub fn solve(&self, b: &[f64], rel_tol: f64) -> Vec<f64> {
        let cols = self.v.nrows();
        let mut x = vec![0.0; cols];
        let r = self.rank(rel_tol);
        for c in 0..r {
            let coeff: f64 = self
                .u
                .column(c)
                .iter()
                .zip(b)
                .map(|(u, b)| u * b)
                .sum::<f64>()
                / self.singular_values[c];
            for (xi, vi) in x.iter_mut().zip(self.v.column(c).iter()) {
                *xi += coeff * vi;
            }
        }
        x
    }
}

/// Flips `v` so that its largest-magnitude entry is positive.
pub fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let pivot = v.iter().copied().fold(
        0.0f64,
        |best, x| if x.abs() > best.abs() { x } else { best },
    );
    if pivot < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    v
}

pub fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| a.row(i).iter().zip(x).map(|(a, x)| a * x).sum())
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest sine of the principal angles between the spans of two
/// orthonormal families of equal size: `||(I - P_a) b||_2`.
pub fn subspace_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() {
        return 1.0;
    }
    if a.is_empty() {
        return 0.0;
    }
    let dim = a[0].len();
    let residual = DMatrix::from_fn(dim, b.len(), |row, col| {
        let bv = &b[col];
        let proj: f64 = a.iter().map(|av| dot(av, bv) * av[row]).sum();
        bv[row] - proj
    });
    FullSvd::new(&residual).largest()
}

/// Minimum total infeasibility of `{x >= 0 : eq * x = rhs}`, computed by
/// the first phase of the simplex method with Bland's rule. Zero (up to
/// rounding) iff the polyhedron is non-empty.
pub fn phase_one_infeasibility(eq: &DMatrix<f64>, rhs: &[f64]) -> f64 {
    const PIVOT_TOL: f64 = 1e-12;
    let (rows, vars) = eq.shape();
    let width = vars + rows + 1;
    let mut t = DMatrix::<f64>::zeros(rows + 1, width);
    for i in 0..rows {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..vars {
            t[(i, j)] = sign * eq[(i, j)];
        }
        t[(i, vars + i)] = 1.0;
        t[(i, width - 1)] = sign * rhs[i];
    }
    // reduced costs of the phase-one objective (sum of artificials)
    for j in 0..vars {
        t[(rows, j)] = -(0..rows).map(|i| t[(i, j)]).sum::<f64>();
    }
    t[(rows, width - 1)] = -(0..rows).map(|i| t[(i, width - 1)]).sum::<f64>();
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    let max_pivots = 50 * (vars + rows + 1);
    for _ in 0..max_pivots {
        let Some(enter) = (0..vars + rows).find(|&j| t[(rows, j)] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let a = t[(i, enter)];
            if a > PIVOT_TOL {
                let ratio = t[(i, width - 1)] / a;
                let better = match leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && basis[i] < basis[k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // the phase-one objective is bounded below, so a leaving row exists
        let Some((row, _)) = leave else { break };
        let pivot = t[(row, enter)];
        for j in 0..width {
            t[(row, j)] /= pivot;
        }
        for i in 0..=rows {
            if i != row {
                let factor = t[(i, enter)];
                if factor != 0.0 {
                    for j in 0..width {
                        let v = t[(row, j)];
                        t[(i, j)] -= factor * v;
                    }
                }
            }
        }
        basis[row] = enter;
    }
    (0..rows)
        .filter(|&i| basis[i] >= vars)
        .map(|i| t[(i, width - 1)].abs())
        .sum()
}
