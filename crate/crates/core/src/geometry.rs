//! Randers metric data and pointwise Riemannian quantities.
//!
//! A Randers metric is `F(x, y) = sqrt(alpha_ij(x) y^i y^j) + beta_j(x) y^j`
//! with `alpha` a Riemannian metric and `beta` a 1-form. [`point_data`]
//! evaluates, at one chart point, everything the rest of the pipeline needs:
//! `alpha`, its inverse and first derivatives, `beta` and its derivatives,
//! and the Levi-Civita Christoffel symbols of `alpha`.
//!
//! Strong convexity is enforced through the standard Randers criterion
//! `||beta#||_alpha < 1` (with a small margin) instead of the fundamental
//! tensor's Hessian, which keeps the whole library first-order.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::CoreError;
use crate::expr::{Expression, VarSpace};
use crate::linalg::{self, Tensor3};

/// Tolerance on Cholesky pivots when checking that `alpha(p)` is SPD.
pub const SPD_PIVOT_TOL: f64 = 1e-12;
/// Safety margin on the convexity bound `||beta#||_alpha < 1`.
pub const CONVEXITY_MARGIN: f64 = 1e-9;
/// Below this alpha-norm, `beta` counts as vanishing at the point.
pub const DEGENERATE_BETA_TOL: f64 = 1e-12;

/// Symbolic description of a Randers metric on an `n`-dimensional chart.
///
/// `alpha` is stored as its upper triangle (row-major, diagonal included),
/// so the evaluated matrix is symmetric by construction.
#[derive(Clone, Debug)]
pub struct RandersMetricSpec {
    n: usize,
    alpha_upper: Vec<Expression>,
    beta: Vec<Expression>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i - 1) / 2 + (j - i)
}

impl RandersMetricSpec {
    /// Build a spec from the upper triangle of `alpha` (length
    /// `n (n + 1) / 2`, rows `(0,0), (0,1), .., (0,n-1), (1,1), ..`) and the
    /// `n` components of `beta`.
    pub fn new(
        n: usize,
        alpha_upper: Vec<Expression>,
        beta: Vec<Expression>,
    ) -> Result<Self, CoreError> {
        if n < 2 {
            return Err(CoreError::DimensionMismatch { expected: 2, got: n });
        }
        if alpha_upper.len() != n * (n + 1) / 2 {
            return Err(CoreError::DimensionMismatch {
                expected: n * (n + 1) / 2,
                got: alpha_upper.len(),
            });
        }
        if beta.len() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: beta.len(),
            });
        }
        for e in alpha_upper.iter().chain(beta.iter()) {
            if e.var_space() != VarSpace::Coords(n) {
                return Err(CoreError::DimensionMismatch {
                    expected: n,
                    got: e.dim(),
                });
            }
        }
        Ok(RandersMetricSpec {
            n,
            alpha_upper,
            beta,
        })
    }

    /// Euclidean Riemannian part (`alpha_ij = delta_ij`) with the given
    /// perturbation.
    pub fn euclidean(n: usize, beta: Vec<Expression>) -> Result<Self, CoreError> {
        let vars = VarSpace::Coords(n);
        let mut alpha = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                alpha.push(Expression::constant(if i == j { 1.0 } else { 0.0 }, vars));
            }
        }
        Self::new(n, alpha, beta)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn alpha_expr(&self, i: usize, j: usize) -> &Expression {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.alpha_upper[tri_index(self.n, i, j)]
    }

    pub fn beta_expr(&self, j: usize) -> &Expression {
        &self.beta[j]
    }

    /// Evaluate `alpha(x)` without derivatives.
    pub fn eval_alpha(&self, x: &[f64]) -> Result<DMatrix<f64>, CoreError> {
        let n = self.n;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.alpha_upper[tri_index(n, i, j)].eval(x)?;
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        Ok(a)
    }

    /// Evaluate `beta(x)` without derivatives.
    pub fn eval_beta(&self, x: &[f64]) -> Result<DVector<f64>, CoreError> {
        let mut b = DVector::<f64>::zeros(self.n);
        for j in 0..self.n {
            b[j] = self.beta[j].eval(x)?;
        }
        Ok(b)
    }

    /// Evaluate and cache all point-level data used by the pipeline.
    ///
    /// Fails if `alpha(p)` is not SPD, if `beta` vanishes at `p`, or if the
    /// convexity bound `||beta#||_alpha < 1` is violated.
    pub fn point_data(&self, p: &[f64]) -> Result<PointFrameData, CoreError> {
        let n = self.n;
        if p.len() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }

        let mut alpha = DMatrix::<f64>::zeros(n, n);
        let mut dalpha = Tensor3::zeros(n);
        for i in 0..n {
            for j in i..n {
                let (v, grad) = self.alpha_upper[tri_index(n, i, j)].eval_with_gradient(p)?;
                alpha[(i, j)] = v;
                alpha[(j, i)] = v;
                for (k, g) in grad.iter().enumerate() {
                    dalpha.set(k, i, j, *g);
                    dalpha.set(k, j, i, *g);
                }
            }
        }

        let chol = linalg::cholesky(&alpha, SPD_PIVOT_TOL)
            .map_err(|pivot| CoreError::NotPositiveDefinite { pivot })?;
        let alpha_inv = linalg::spd_inverse(&chol);

        let mut beta = DVector::<f64>::zeros(n);
        let mut dbeta = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let (v, grad) = self.beta[j].eval_with_gradient(p)?;
            beta[j] = v;
            for (i, g) in grad.iter().enumerate() {
                dbeta[(i, j)] = *g;
            }
        }

        // Levi-Civita: Gamma*^k_ij = 1/2 alpha^{kl} (d_i a_jl + d_j a_il - d_l a_ij).
        let mut christoffel = Tensor3::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        sum += alpha_inv[(k, l)]
                            * (dalpha.get(i, j, l) + dalpha.get(j, i, l) - dalpha.get(l, i, j));
                    }
                    let v = 0.5 * sum;
                    christoffel.set(k, i, j, v);
                    christoffel.set(k, j, i, v);
                }
            }
        }

        let beta_sharp = &alpha_inv * &beta;
        let beta_norm_sq = beta.dot(&beta_sharp);
        let beta_norm = beta_norm_sq.max(0.0).sqrt();
        if beta_norm < DEGENERATE_BETA_TOL {
            return Err(CoreError::DegeneratePoint);
        }
        if beta_norm >= 1.0 - CONVEXITY_MARGIN {
            return Err(CoreError::ConvexityViolated { norm: beta_norm });
        }

        Ok(PointFrameData {
            point: DVector::from_row_slice(p),
            alpha,
            alpha_inv,
            dalpha,
            beta,
            dbeta,
            christoffel,
            beta_sharp,
            beta_norm_sq,
        })
    }

    /// Finsler length `F(x, y) = sqrt(alpha_ij y^i y^j) + beta_j y^j`.
    pub fn finsler_value(&self, x: &[f64], y: &DVector<f64>) -> Result<f64, CoreError> {
        if y.amax() == 0.0 {
            return Err(CoreError::ZeroVector);
        }
        let a = self.eval_alpha(x)?;
        let b = self.eval_beta(x)?;
        finsler_from_parts(&a, &b, y)
    }

    /// Fibre derivative `dF/dy^r = (alpha y)_r / sqrt(y^T alpha y) + beta_r`.
    pub fn df_dy(&self, x: &[f64], y: &DVector<f64>) -> Result<DVector<f64>, CoreError> {
        if y.amax() == 0.0 {
            return Err(CoreError::ZeroVector);
        }
        let a = self.eval_alpha(x)?;
        let b = self.eval_beta(x)?;
        Ok(df_dy_from_parts(&a, &b, y))
    }
}

pub(crate) fn finsler_from_parts(
    alpha: &DMatrix<f64>,
    beta: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, CoreError> {
    let q = (alpha * y).dot(y);
    if q < 0.0 {
        return Err(CoreError::NotPositiveDefinite { pivot: q });
    }
    Ok(q.sqrt() + beta.dot(y))
}

pub(crate) fn df_dy_from_parts(
    alpha: &DMatrix<f64>,
    beta: &DVector<f64>,
    y: &DVector<f64>,
) -> DVector<f64> {
    let ay = alpha * y;
    let len = ay.dot(y).max(0.0).sqrt();
    ay / len + beta
}

/// Everything the pipeline needs at one point of the chart, built once by
/// [`RandersMetricSpec::point_data`] and immutable afterwards.
#[derive(Clone, Debug)]
pub struct PointFrameData {
    pub point: DVector<f64>,
    /// `alpha_ij(p)`.
    pub alpha: DMatrix<f64>,
    /// `alpha^{ij}(p)`.
    pub alpha_inv: DMatrix<f64>,
    /// `dalpha.get(k, i, j) = d alpha_ij / d x^k`.
    pub dalpha: Tensor3,
    /// `beta_j(p)`.
    pub beta: DVector<f64>,
    /// `dbeta[(i, j)] = d beta_j / d x^i`.
    pub dbeta: DMatrix<f64>,
    /// `christoffel.get(k, i, j) = Gamma*^k_ij`, symmetric in `(i, j)`.
    pub christoffel: Tensor3,
    /// `beta#^i = alpha^{ij} beta_j`.
    pub beta_sharp: DVector<f64>,
    /// `||beta#||^2_alpha = alpha^{ij} beta_i beta_j`.
    pub beta_norm_sq: f64,
}

impl PointFrameData {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// Dual vector of the perturbation and its squared alpha-norm.
    pub fn dual_vector(&self) -> (&DVector<f64>, f64) {
        (&self.beta_sharp, self.beta_norm_sq)
    }

    /// Horizontal derivatives `X_i^{h*} F (p, y)` of the Finsler function
    /// along the Levi-Civita horizontal lifts.
    ///
    /// Because the Levi-Civita connection is metrical for `alpha`, only the
    /// perturbation contributes:
    /// `X_i^{h*} F = y^j (d beta_j / d x^i - beta_k Gamma*^k_ij)`.
    pub fn horizontal_derivative(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let mut covariant = self.dbeta[(i, j)];
                for k in 0..n {
                    covariant -= self.beta[k] * self.christoffel.get(k, i, j);
                }
                sum += y[j] * covariant;
            }
            out[i] = sum;
        }
        out
    }

    /// `F(p, y)` from the cached point values.
    pub fn finsler_at(&self, y: &DVector<f64>) -> Result<f64, CoreError> {
        finsler_from_parts(&self.alpha, &self.beta, y)
    }

    /// `dF/dy (p, y)` from the cached point values.
    pub fn df_dy_at(&self, y: &DVector<f64>) -> DVector<f64> {
        df_dy_from_parts(&self.alpha, &self.beta, y)
    }
}
