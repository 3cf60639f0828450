//! Box-constrained Tikhonov least squares,
//! `min ‖Ax − b‖² + λ‖x‖²  s.t.  0 ≤ x ≤ 1`.
//!
//! Primal active-set method. Every variable is either fixed at a bound or
//! free; the free subproblem is solved in its dual form
//! `x_F = A_Fᵀ (A_F A_Fᵀ + λI)⁻¹ (b − A_B x_B)`, which only needs an m×m
//! factorization (m = number of goals) and stays well conditioned for small λ.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest projected-gradient norm accepted at termination.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-8;

const KKT_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Weight of the `‖x‖²` term. Must be positive.
    pub lambda: f64,
    /// Iteration cap; `None` uses `20 * n + 100`.
    pub max_iterations: Option<usize>,
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedSolution {
    pub x: Vec<f64>,
    /// `‖Ax − b‖² + λ‖x‖²` at `x`.
    pub objective: f64,
    pub projected_gradient_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Lower,
    Upper,
    Free,
}

/// Solves the box-constrained problem for a dense row-major `rows × n`
/// matrix given as a slice of rows.
pub fn solve_box_tikhonov(
    a: &[Vec<f64>],
    b: &[f64],
    config: &SolverConfig,
) -> Result<BoundedSolution> {
    let m = a.len();
    if m == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    if b.len() != m {
        return Err(Error::mismatch("right-hand side", m, b.len()));
    }
    let n = a[0].len();
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::mismatch("matrix row", n, row.len()));
    }
    let lambda = config.lambda;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "regularization weight must be positive, got {lambda}"
        )));
    }
    let max_iterations = config.max_iterations.unwrap_or(20 * n + 100);

    let cols = Columns::new(a);
    // Start from the unconstrained minimizer clipped into the box.
    let all: Vec<usize> = (0..n).collect();
    let mut x = cols.solve_free(b, &vec![0.0; n], &vec![Bound::Free; n], &all, lambda)?;
    let mut state = vec![Bound::Free; n];
    for (xi, si) in x.iter_mut().zip(&mut state) {
        if *xi <= 0.0 {
            (*xi, *si) = (0.0, Bound::Lower);
        } else if *xi >= 1.0 {
            (*xi, *si) = (1.0, Bound::Upper);
        }
    }
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == Bound::Free).collect();
        if !free.is_empty() {
            let target = cols.solve_free(b, &x, &state, &free, lambda)?;
            let mut step = 1.0_f64;
            let mut blocking = None;
            for (&i, &t) in free.iter().zip(&target) {
                let alpha = if t < 0.0 {
                    x[i] / (x[i] - t)
                } else if t > 1.0 {
                    (1.0 - x[i]) / (t - x[i])
                } else {
                    continue;
                };
                if alpha < step {
                    step = alpha;
                    blocking = Some((i, t < 0.0));
                }
            }
            for (&i, &t) in free.iter().zip(&target) {
                x[i] = (x[i] + step * (t - x[i])).clamp(0.0, 1.0);
            }
            if let Some((i, at_lower)) = blocking {
                (x[i], state[i]) = if at_lower {
                    (0.0, Bound::Lower)
                } else {
                    (1.0, Bound::Upper)
                };
                continue;
            }
        }

        // Free the bound variable whose gradient most strongly points inward.
        let g = cols.gradient(b, &x, lambda);
        let mut worst = None;
        let mut worst_violation = KKT_TOLERANCE;
        for i in 0..n {
            let violation = match state[i] {
                Bound::Lower => -g[i],
                Bound::Upper => g[i],
                Bound::Free => continue,
            };
            if violation > worst_violation {
                worst_violation = violation;
                worst = Some(i);
            }
        }
        match worst {
            Some(i) => state[i] = Bound::Free,
            None => {
                converged = true;
                break;
            }
        }
    }

    let pg = projected_gradient_norm(a, b, &x, lambda);
    if !converged || pg > OPTIMALITY_TOLERANCE {
        return Err(Error::NoConvergence {
            iterations,
            pg_norm: pg,
        });
    }
    Ok(BoundedSolution {
        objective: objective(a, b, &x, lambda),
        x,
        projected_gradient_norm: pg,
        iterations,
    })
}

/// Column-major copy of the matrix; column `i` is `data[i*m..(i+1)*m]`.
struct Columns {
    m: usize,
    data: Vec<f64>,
}

impl Columns {
    fn new(a: &[Vec<f64>]) -> Self {
        let m = a.len();
        let n = a[0].len();
        let mut data = vec![0.0; m * n];
        for (r, row) in a.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                data[i * m + r] = v;
            }
        }
        Self { m, data }
    }

    fn col(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    /// `Ax − b`.
    fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (rj, aj) in r.iter_mut().zip(self.col(i)) {
                    *rj += aj * xi;
                }
            }
        }
        r
    }

    fn gradient(&self, b: &[f64], x: &[f64], lambda: f64) -> Vec<f64> {
        let r = self.residual(b, x);
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let dot: f64 = self.col(i).iter().zip(&r).map(|(a, r)| a * r).sum();
                2.0 * (dot + lambda * xi)
            })
            .collect()
    }

    /// Unconstrained minimizer over the free variables with the others held
    /// at their current bounds.
    fn solve_free(
        &self,
        b: &[f64],
        x: &[f64],
        state: &[Bound],
        free: &[usize],
        lambda: f64,
    ) -> Result<Vec<f64>> {
        let m = self.m;
        let mut rhs = DVector::from_column_slice(b);
        for (i, s) in state.iter().enumerate() {
            if *s == Bound::Upper {
                for (rj, aj) in rhs.iter_mut().zip(self.col(i)) {
                    *rj -= aj * x[i];
                }
            }
        }
        let mut gram = DMatrix::from_diagonal_element(m, m, lambda);
        for &i in free {
            let c = self.col(i);
            for r in 0..m {
                for k in r..m {
                    gram[(r, k)] += c[r] * c[k];
                }
            }
        }
        for r in 0..m {
            for k in 0..r {
                gram[(r, k)] = gram[(k, r)];
            }
        }
        let chol = gram.cholesky().ok_or_else(|| {
            Error::InvalidInput("free-variable system is not positive definite".into())
        })?;
        let y = chol.solve(&rhs);
        Ok(free
            .iter()
            .map(|&i| self.col(i).iter().zip(y.iter()).map(|(a, y)| a * y).sum())
            .collect())
    }
}

fn residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(row, bj)| row.iter().zip(x).map(|(aij, xi)| aij * xi).sum::<f64>() - bj)
        .collect()
}

/// Gradient of `‖Ax − b‖² + λ‖x‖²`.
pub fn gradient(a: &[Vec<f64>], b: &[f64], x: &[f64], lambda: f64) -> Vec<f64> {
    let r = residual(a, b, x);
    (0..x.len())
        .map(|i| 2.0 * (a.iter().zip(&r).map(|(row, rj)| row[i] * rj).sum::<f64>() + lambda * x[i]))
        .collect()
}

pub fn objective(a: &[Vec<f64>], b: &[f64], x: &[f64], lambda: f64) -> f64 {
    let r = residual(a, b, x);
    r.iter().map(|v| v * v).sum::<f64>() + lambda * x.iter().map(|v| v * v).sum::<f64>()
}

/// Norm of the gradient projected onto the feasible directions of the box.
pub fn projected_gradient_norm(a: &[Vec<f64>], b: &[f64], x: &[f64], lambda: f64) -> f64 {
    gradient(a, b, x, lambda)
        .iter()
        .zip(x)
        .map(|(&g, &xi)| {
            if xi <= 0.0 {
                g.min(0.0)
            } else if xi >= 1.0 {
                g.max(0.0)
            } else {
                g
            }
        })
        .map(|p| p * p)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn random_system(seed: u64, m: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = stream_rng(seed, 0);
        let a = (0..m)
            .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let b = (0..m).map(|_| rng.gen::<f64>() * n as f64 * 0.5).collect();
        (a, b)
    }

    #[test]
    fn zero_target_gives_origin() {
        let (a, _) = random_system(1, 5, 12);
        let sol = solve_box_tikhonov(&a, &[0.0; 5], &SolverConfig::with_lambda(1.0)).unwrap();
        assert!(sol.x.iter().all(|&v| v == 0.0));
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn interior_solution_matches_normal_equations() {
        // Small target keeps the minimizer strictly inside the box, so it
        // must equal (AᵀA + λI)⁻¹ Aᵀ b.
        let (a, _) = random_system(2, 3, 6);
        let b = vec![0.3, 0.2, 0.4];
        let lambda = 0.5;
        let sol = solve_box_tikhonov(&a, &b, &SolverConfig::with_lambda(lambda)).unwrap();
        let am = DMatrix::from_fn(3, 6, |r, c| a[r][c]);
        let normal = am.transpose() * &am + DMatrix::identity(6, 6) * lambda;
        let direct = normal
            .lu()
            .solve(&(am.transpose() * DVector::from_vec(b)))
            .unwrap();
        for (x, d) in sol.x.iter().zip(direct.iter()) {
            assert!((x - d).abs() < 1e-12, "{x} vs {d}");
        }
    }

    #[test]
    fn large_target_saturates_upper_bound() {
        let (a, _) = random_system(3, 2, 4);
        let sol = solve_box_tikhonov(&a, &[100.0, 100.0], &SolverConfig::with_lambda(1.0)).unwrap();
        assert!(sol.x.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn satisfies_optimality_on_random_systems() {
        for seed in 0..50 {
            let (a, b) = random_system(seed, 5, 30);
            for lambda in [1.0, 1e-2, 1e-6] {
                let sol = solve_box_tikhonov(&a, &b, &SolverConfig::with_lambda(lambda)).unwrap();
                assert!(sol.x.iter().all(|v| (0.0..=1.0).contains(v)));
                assert!(sol.projected_gradient_norm <= OPTIMALITY_TOLERANCE);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (a, b) = random_system(4, 3, 7);
        assert!(solve_box_tikhonov(&a, &b[..2], &SolverConfig::with_lambda(1.0)).is_err());
        assert!(matches!(
            solve_box_tikhonov(&a, &b, &SolverConfig::with_lambda(0.0)),
            Err(Error::InvalidConfig(_))
        ));
        let capped = SolverConfig {
            lambda: 1e-6,
            max_iterations: Some(0),
        };
        assert!(matches!(
            solve_box_tikhonov(&a, &b, &capped),
            Err(Error::NoConvergence { .. })
        ));
    }
}
