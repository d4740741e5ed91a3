//! Adapted orthonormal frames and tensor transport between chart and frame.
//!
//! At a point with `beta != 0` the adapted frame is an `alpha`-orthonormal
//! basis whose last vector points along `beta#` and whose first `n - 1`
//! vectors span the kernel of `beta`. In that basis the Randers
//! compatibility equations collapse to the block structure the closed-form
//! solution is written in.
//!
//! The frame is realized as a constant linear change of chart coordinates,
//! which is exact for everything evaluated at the base point (only first
//! derivatives at the point are ever transformed, so no inhomogeneous terms
//! arise). Completion of the basis is deterministic: modified Gram-Schmidt
//! with respect to `alpha(p)` over the chart basis vectors in index order,
//! skipping the one vector that degenerates. The arbitrariness of this
//! choice is harmless — chart-coordinate outputs are gauge invariant, which
//! the test suite checks explicitly.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::CoreError;
use crate::geometry::PointFrameData;
use crate::linalg::Tensor3;
use crate::torsion::TorsionTensor;

/// Residual alpha-norm below which a Gram-Schmidt candidate is dropped.
const GS_SKIP_TOL: f64 = 1e-10;

/// An alpha-orthonormal basis at a point, adapted to `beta`.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    /// Columns are the adapted basis vectors in chart coordinates; the last
    /// column is `beta# / ||beta#||_alpha`.
    pub basis: DMatrix<f64>,
    pub basis_inv: DMatrix<f64>,
    /// `beta(e_n) = ||beta#||_alpha > 0`.
    pub beta_n_bar: f64,
}

impl AdaptedFrame {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Chart components of the `a`-th adapted basis vector.
    pub fn column(&self, a: usize) -> DVector<f64> {
        self.basis.column(a).into_owned()
    }
}

/// Build the adapted frame at a point.
///
/// The caller gets a degenerate-point error when `beta(p) = 0`; the Randers
/// structure is Riemannian there and the Levi-Civita connection is the
/// appropriate object instead.
pub fn adapted_frame(data: &PointFrameData) -> Result<AdaptedFrame, CoreError> {
    let n = data.dim();
    let beta_norm = data.beta_norm_sq.max(0.0).sqrt();
    if beta_norm < crate::geometry::DEGENERATE_BETA_TOL {
        return Err(CoreError::DegeneratePoint);
    }
    let e_last = &data.beta_sharp / beta_norm;

    let alpha = &data.alpha;
    let alpha_dot = |u: &DVector<f64>, v: &DVector<f64>| (alpha * v).dot(u);

    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(n);
    accepted.push(e_last.clone());
    for i in 0..n {
        if accepted.len() == n {
            break;
        }
        let mut v = DVector::<f64>::zeros(n);
        v[i] = 1.0;
        for u in &accepted {
            let proj = alpha_dot(&v, u);
            v -= u * proj;
        }
        let norm = alpha_dot(&v, &v).max(0.0).sqrt();
        if norm < GS_SKIP_TOL {
            continue;
        }
        accepted.push(v / norm);
    }
    debug_assert_eq!(accepted.len(), n, "Gram-Schmidt lost more than one vector");

    let mut basis = DMatrix::<f64>::zeros(n, n);
    for (a, v) in accepted.iter().skip(1).enumerate() {
        basis.set_column(a, v);
    }
    basis.set_column(n - 1, &e_last);

    let basis_inv = basis
        .clone()
        .try_inverse()
        .expect("adapted basis is invertible by construction");
    let beta_n_bar = data.beta.dot(&e_last);

    Ok(AdaptedFrame {
        basis,
        basis_inv,
        beta_n_bar,
    })
}

/// Point data re-expressed in an adapted frame, together with the `C` and
/// `S` coefficient tables of the Randers compatibility equations.
#[derive(Clone, Debug)]
pub struct AdaptedPointData {
    pub frame: AdaptedFrame,
    /// `gamma_bar.get(c, a, b) = Gamma-bar*^c_ab`, symmetric in `(a, b)`.
    pub gamma_bar: Tensor3,
    /// `dbeta_bar[(a, b)] = d beta-bar_b / d x-bar^a`.
    pub dbeta_bar: DMatrix<f64>,
    /// `c_mat[(i, j)] = C_{j;i}`: coefficient of `y^j` in equation `i`
    /// (up to the factor 2), see [`AdaptedPointData::c_coeff`].
    pub c_mat: DMatrix<f64>,
    /// `s_mat[(a, c)] = S_ac = C_{c;a} + C_{a;c}` for `a, c < n - 1`.
    pub s_mat: DMatrix<f64>,
}

impl AdaptedPointData {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// `C_{j;i} = Gamma-bar*^n_ij - (1 / beta-bar_n) d beta-bar_j / d x-bar^i`.
    pub fn c_coeff(&self, j: usize, i: usize) -> f64 {
        self.c_mat[(i, j)]
    }

    /// `S_ac` for `a, c < n - 1`.
    pub fn s_coeff(&self, a: usize, c: usize) -> f64 {
        self.s_mat[(a, c)]
    }
}

/// Transform the cached point data into the adapted frame and fill the
/// coefficient tables.
pub fn to_adapted(data: &PointFrameData, frame: AdaptedFrame) -> AdaptedPointData {
    let n = data.dim();
    let b = &frame.basis;
    let b_inv = &frame.basis_inv;

    // d beta-bar_b / d x-bar^a = B^i_a B^j_b d beta_j / d x^i
    let dbeta_bar = b.transpose() * &data.dbeta * b;

    // Gamma-bar*^c_ab = (B^-1)^c_k B^i_a B^j_b Gamma*^k_ij
    let mut gamma_bar = Tensor3::zeros(n);
    for c in 0..n {
        for a in 0..n {
            for bb in a..n {
                let mut sum = 0.0;
                for k in 0..n {
                    let w = b_inv[(c, k)];
                    if w == 0.0 {
                        continue;
                    }
                    let mut inner = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            inner += b[(i, a)] * b[(j, bb)] * data.christoffel.get(k, i, j);
                        }
                    }
                    sum += w * inner;
                }
                gamma_bar.set(c, a, bb, sum);
                gamma_bar.set(c, bb, a, sum);
            }
        }
    }

    let last = n - 1;
    let mut c_mat = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c_mat[(i, j)] = gamma_bar.get(last, i, j) - dbeta_bar[(i, j)] / frame.beta_n_bar;
        }
    }

    let mut s_mat = DMatrix::<f64>::zeros(last, last);
    for a in 0..last {
        for c in 0..last {
            s_mat[(a, c)] = c_mat[(a, c)] + c_mat[(c, a)];
        }
    }

    AdaptedPointData {
        frame,
        gamma_bar,
        dbeta_bar,
        c_mat,
        s_mat,
    }
}

/// Push adapted-frame torsion components to chart coordinates. The frame is
/// a constant linear map, so torsion transforms tensorially:
/// `T_ij^k = (B^-1)^a_i (B^-1)^b_j B^k_c T-bar_ab^c`.
pub fn torsion_to_chart(t_bar: &TorsionTensor, frame: &AdaptedFrame) -> TorsionTensor {
    transform_torsion(t_bar, &frame.basis_inv, &frame.basis)
}

/// Pull chart torsion components into the adapted frame (inverse of
/// [`torsion_to_chart`]).
pub fn torsion_to_adapted(t_chart: &TorsionTensor, frame: &AdaptedFrame) -> TorsionTensor {
    transform_torsion(t_chart, &frame.basis, &frame.basis_inv)
}

/// Common tensorial transform: `lower` contracts both lower indices
/// (`lower[(old, new)]`), `upper` pushes the upper index
/// (`upper[(new, old)]`).
fn transform_torsion(t: &TorsionTensor, lower: &DMatrix<f64>, upper: &DMatrix<f64>) -> TorsionTensor {
    let n = t.dim();
    let layout = t.layout();
    let mut out = TorsionTensor::zeros(n);
    for s_out in 0..layout.slot_count() {
        let (i, j, k) = layout.indices(s_out);
        let mut sum = 0.0;
        for (s_in, a, bb, c, _, v) in t.iter_slots() {
            let _ = s_in;
            if v == 0.0 {
                continue;
            }
            let pair = lower[(a, i)] * lower[(bb, j)] - lower[(a, j)] * lower[(bb, i)];
            sum += v * pair * upper[(k, c)];
        }
        let (a, b, c) = (i, j, k);
        out.set(a, b, c, sum);
    }
    out
}
