//! Independent validation of the closed-form connection.
//!
//! For sampled tangent vectors `v`, each chart direction `i` contributes one
//! linear equation `sum sigma~_{ab;i}^c(v) T_ab^c = -2 X_i^{h*}F(v)` on the
//! packed torsion components. Stacking enough samples pins the affine
//! solution set of the compatibility equations at the point; its minimum-
//! norm element must coincide with the closed-form extremal torsion, and the
//! kernel dimension must come out as `n * C(n-1, 2)`.
//!
//! Two assembly routes are provided. The adapted route uses the
//! Randers-reduced coefficients in an adapted frame, where the Euclidean
//! norm on components is exactly the tensor norm. The chart route uses the
//! general coefficient formula in raw chart coordinates; there the tensor
//! norm is encoded by a Gram matrix, which the solver minimizes instead.
//! The right-hand sides always come from the horizontal derivatives, never
//! from the `C` coefficient tables the closed form is built from.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::connection::randers_sigma;
use crate::error::CoreError;
use crate::frame::AdaptedFrame;
use crate::geometry::PointFrameData;
use crate::linalg;
use crate::torsion::{BlockLayout, TorsionTensor};

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_SV_TOL: f64 = 1e-9;
/// Tolerance for accepting the closed form against the oracle.
pub const CROSS_VALIDATION_REL_TOL: f64 = 1e-7;

/// Stacked pointwise compatibility system for the packed torsion unknowns.
#[derive(Clone, Debug)]
pub struct CompatibilitySystem {
    pub n: usize,
    pub unknown_count: usize,
    /// `n * samples.len()` rows by `unknown_count` columns.
    pub rows: DMatrix<f64>,
    /// `-2 X_i^{h*} F(v)` stacked in the same order.
    pub rhs: DVector<f64>,
    pub samples: Vec<DVector<f64>>,
    /// Gram matrix of the tensor norm on the unknowns; `None` means the
    /// components are already orthonormal (adapted frame).
    pub gram: Option<DMatrix<f64>>,
}

impl CompatibilitySystem {
    /// Inner product of two packed component vectors in the norm this
    /// system minimizes.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match &self.gram {
            Some(g) => (g * b).dot(a),
            None => a.dot(b),
        }
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Least-squares residual of an arbitrary candidate solution.
    pub fn residual_of(&self, candidate: &TorsionTensor) -> f64 {
        let x = DVector::from_row_slice(candidate.components());
        (&self.rows * x - &self.rhs).norm()
    }
}

/// Deterministic sampling strategy: the `2n` signed coordinate directions,
/// the `C(n,2)` diagonals `e_a + e_b`, and `extra_random` seeded unit
/// vectors. The deterministic core makes rank behavior reproducible; the
/// random tail guards against degenerate alignment.
pub fn sample_directions(n: usize, extra_random: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(2 * n + n * (n - 1) / 2 + extra_random);
    for a in 0..n {
        let mut plus = DVector::<f64>::zeros(n);
        plus[a] = 1.0;
        let mut minus = DVector::<f64>::zeros(n);
        minus[a] = -1.0;
        out.push(plus);
        out.push(minus);
    }
    for a in 0..n {
        for b in a + 1..n {
            let mut v = DVector::<f64>::zeros(n);
            v[a] = 1.0;
            v[b] = 1.0;
            out.push(v);
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut found = 0;
    while found < extra_random {
        let v = DVector::<f64>::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let q = v.norm_squared();
        if q > 1e-2 && q <= 1.0 {
            out.push(v / q.sqrt());
            found += 1;
        }
    }
    out
}

/// Assemble the system in raw chart coordinates with the general coefficient
/// formula (`gamma = alpha(p)`).
pub fn assemble_chart(
    data: &PointFrameData,
    samples: &[DVector<f64>],
) -> Result<CompatibilitySystem, CoreError> {
    let n = data.dim();
    if samples.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    let layout = BlockLayout::new(n);
    let unknowns = layout.slot_count();
    let mut rows = DMatrix::<f64>::zeros(n * samples.len(), unknowns);
    let mut rhs = DVector::<f64>::zeros(n * samples.len());

    for (m, v) in samples.iter().enumerate() {
        if v.amax() == 0.0 {
            return Err(CoreError::ZeroVector);
        }
        let fin_grad = data.df_dy_at(v); // dF/dy^r at (p, v)
        let raised = &data.alpha_inv * &fin_grad; // gamma^{ar} dF/dy^r
        let lowered_y = &data.alpha * v; // y^j gamma_jc
        let hd = data.horizontal_derivative(v);
        for i in 0..n {
            let row = m * n + i;
            rhs[row] = -2.0 * hd[i];
            for s in 0..unknowns {
                let (a, b, c) = layout.indices(s);
                let mut coeff = (v[a] * raised[b] - v[b] * raised[a]) * data.alpha[(i, c)];
                if i == a {
                    coeff += raised[b] * lowered_y[c] - v[b] * fin_grad[c];
                }
                if i == b {
                    coeff += -raised[a] * lowered_y[c] + v[a] * fin_grad[c];
                }
                rows[(row, s)] = coeff;
            }
        }
    }

    // Gram matrix of the alpha-induced tensor norm on packed components.
    let mut gram = DMatrix::<f64>::zeros(unknowns, unknowns);
    for s1 in 0..unknowns {
        let (a, b, c) = layout.indices(s1);
        for s2 in 0..unknowns {
            let (a2, b2, c2) = layout.indices(s2);
            let wedge = data.alpha_inv[(a, a2)] * data.alpha_inv[(b, b2)]
                - data.alpha_inv[(a, b2)] * data.alpha_inv[(b, a2)];
            gram[(s1, s2)] = wedge * data.alpha[(c, c2)];
        }
    }

    Ok(CompatibilitySystem {
        n,
        unknown_count: unknowns,
        rows,
        rhs,
        samples: samples.to_vec(),
        gram: Some(gram),
    })
}

/// Assemble the system in an adapted frame with the Randers-reduced
/// coefficients (`sigma * beta-bar_n`); the samples are adapted-frame
/// components. The right-hand side is still evaluated through the chart
/// horizontal derivatives.
pub fn assemble_adapted(
    data: &PointFrameData,
    frame: &AdaptedFrame,
    samples: &[DVector<f64>],
) -> Result<CompatibilitySystem, CoreError> {
    let n = data.dim();
    if samples.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    let layout = BlockLayout::new(n);
    let unknowns = layout.slot_count();
    let mut rows = DMatrix::<f64>::zeros(n * samples.len(), unknowns);
    let mut rhs = DVector::<f64>::zeros(n * samples.len());
    let beta_n = frame.beta_n_bar;

    for (m, y_bar) in samples.iter().enumerate() {
        if y_bar.amax() == 0.0 {
            return Err(CoreError::ZeroVector);
        }
        let v_chart = &frame.basis * y_bar;
        let hd = data.horizontal_derivative(&v_chart);
        let sigma = randers_sigma(n, y_bar);
        for i in 0..n {
            let row = m * n + i;
            // X-bar_i lifts e_i = B^j_i d_j, so the rhs contracts the chart
            // horizontal derivatives with the frame column.
            let mut hd_bar = 0.0;
            for j in 0..n {
                hd_bar += frame.basis[(j, i)] * hd[j];
            }
            rhs[row] = -2.0 * hd_bar;
            for (s, coeff) in sigma.equation_row(i).into_iter().enumerate() {
                rows[(row, s)] = beta_n * coeff;
            }
        }
    }

    Ok(CompatibilitySystem {
        n,
        unknown_count: unknowns,
        rows,
        rhs,
        samples: samples.to_vec(),
        gram: None,
    })
}

/// Affine solution set of a pointwise system: minimum-norm particular
/// solution, orthonormal kernel basis, and the least-squares residual.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    pub particular: TorsionTensor,
    pub null_basis: Vec<TorsionTensor>,
    pub residual: f64,
    pub affine_dimension: usize,
    pub singular_values: Vec<f64>,
}

/// Minimum-norm least-squares solve with an SVD rank decision at
/// `tol * sigma_max`. When the system carries a Gram matrix the minimized
/// norm is the Gram norm and the kernel basis is Gram-orthonormal.
pub fn min_norm_solve(sys: &CompatibilitySystem, tol: f64) -> Result<SolutionSpace, CoreError> {
    if tol <= 0.0 {
        return Err(CoreError::NonPositiveTolerance(tol));
    }
    let (m, u_count) = (sys.rows.nrows(), sys.rows.ncols());
    if m < u_count {
        return Err(CoreError::InsufficientRows {
            rows: m,
            cols: u_count,
        });
    }

    // Substitute x = L^{-T} z to reduce a Gram norm to the Euclidean one.
    let chol = match &sys.gram {
        Some(g) => Some(linalg::cholesky(g, 1e-14).map_err(|pivot| {
            CoreError::NotPositiveDefinite { pivot }
        })?),
        None => None,
    };
    let a_eff = match &chol {
        Some(l) => {
            let mut eff = DMatrix::<f64>::zeros(m, u_count);
            for r in 0..m {
                let row = sys.rows.row(r).transpose();
                let solved = linalg::solve_lower(l, &row);
                eff.set_row(r, &solved.transpose());
            }
            eff
        }
        None => sys.rows.clone(),
    };

    let svd = a_eff.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u requested");
    let v_t = svd.v_t.as_ref().expect("svd with v_t requested");
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().fold(0.0_f64, |acc, s| acc.max(*s));
    let cutoff = tol * sigma_max;

    let mut z = DVector::<f64>::zeros(u_count);
    for k in 0..sv.len() {
        if sv[k] > cutoff {
            let coeff = u.column(k).dot(&sys.rhs) / sv[k];
            z += v_t.row(k).transpose() * coeff;
        }
    }

    let to_x = |z: &DVector<f64>| match &chol {
        Some(l) => linalg::solve_lower_transpose(l, z),
        None => z.clone(),
    };

    let x = to_x(&z);
    let residual = (&sys.rows * &x - &sys.rhs).norm();
    let mut null_basis = Vec::new();
    for k in 0..sv.len() {
        if sv[k] <= cutoff {
            let dir = to_x(&v_t.row(k).transpose());
            null_basis.push(TorsionTensor::from_components(
                sys.n,
                dir.iter().copied().collect(),
            ));
        }
    }

    Ok(SolutionSpace {
        particular: TorsionTensor::from_components(sys.n, x.iter().copied().collect()),
        affine_dimension: null_basis.len(),
        null_basis,
        residual,
        singular_values: sv.iter().copied().collect(),
    })
}

/// Comparison of the closed-form torsion against the oracle solution of the
/// same system (same point, same frame convention).
#[derive(Clone, Debug)]
pub struct CrossValidation {
    /// `|| closed - particular ||` in the system's tensor norm.
    pub difference_norm: f64,
    /// Norm of the projection of the difference onto the kernel.
    pub null_projection: f64,
    /// Residual of the closed form in the stacked system.
    pub closed_form_residual: f64,
    pub particular_norm: f64,
    pub passes: bool,
}

pub fn cross_validate(
    closed_form: &TorsionTensor,
    space: &SolutionSpace,
    sys: &CompatibilitySystem,
) -> Result<CrossValidation, CoreError> {
    if closed_form.dim() != sys.n {
        return Err(CoreError::DimensionMismatch {
            expected: sys.n,
            got: closed_form.dim(),
        });
    }
    let closed = DVector::from_row_slice(closed_form.components());
    let part = DVector::from_row_slice(space.particular.components());
    let diff = &closed - &part;
    let difference_norm = sys.norm(&diff);
    let particular_norm = sys.norm(&part);

    let mut proj_sq = 0.0;
    for z in &space.null_basis {
        let zv = DVector::from_row_slice(z.components());
        let c = sys.inner(&diff, &zv);
        proj_sq += c * c;
    }

    let closed_form_residual = sys.residual_of(closed_form);
    let passes = difference_norm <= CROSS_VALIDATION_REL_TOL * (1.0 + particular_norm);

    Ok(CrossValidation {
        difference_norm,
        null_projection: proj_sq.sqrt(),
        closed_form_residual,
        particular_norm,
        passes,
    })
}

/// Sampling and rank-decision knobs for [`solve_adapted`].
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub sv_tol: f64,
    pub extra_random: usize,
    pub seed: u64,
}

impl OracleConfig {
    /// Defaults for dimension `n`: cutoff 1e-9, `4n` random extras, seed 0.
    pub fn for_dim(n: usize) -> Self {
        OracleConfig {
            sv_tol: DEFAULT_SV_TOL,
            extra_random: 4 * n,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// An oracle solve with its sampling-stability diagnostic.
#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub space: SolutionSpace,
    pub system: CompatibilitySystem,
    /// Whether the kernel dimension survives doubling the random samples.
    pub dimension_stable: bool,
}

/// Assemble and solve the adapted-frame system at a point, then re-solve
/// with twice the random samples to check that the kernel dimension is an
/// artifact of the equations, not of the sampling.
pub fn solve_adapted(
    data: &PointFrameData,
    frame: &AdaptedFrame,
    cfg: OracleConfig,
) -> Result<OracleSolution, CoreError> {
    let n = data.dim();
    let samples = sample_directions(n, cfg.extra_random, cfg.seed);
    let sys = assemble_adapted(data, frame, &samples)?;
    let space = min_norm_solve(&sys, cfg.sv_tol)?;

    let doubled = sample_directions(n, 2 * cfg.extra_random, cfg.seed);
    let sys2 = assemble_adapted(data, frame, &doubled)?;
    let space2 = min_norm_solve(&sys2, cfg.sv_tol)?;
    let dimension_stable = space.affine_dimension == space2.affine_dimension;

    Ok(OracleSolution {
        space,
        system: sys,
        dimension_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{extremal_torsion, CompatibilityMode};
    use crate::expr::Expression;
    use crate::frame::{adapted_frame, to_adapted, torsion_to_chart};
    use crate::geometry::RandersMetricSpec;
    use crate::instances;
    use crate::torsion::BlockKind;

    fn prepared(
        spec: &RandersMetricSpec,
        p: &[f64],
    ) -> (PointFrameData, AdaptedFrame) {
        let data = spec.point_data(p).unwrap();
        let frame = adapted_frame(&data).unwrap();
        (data, frame)
    }

    #[test]
    fn unknown_counts() {
        let spec = instances::rotating_beta();
        let (data, frame) = prepared(&spec, &[0.0, 0.0]);
        let sys = assemble_adapted(&data, &frame, &sample_directions(2, 8, 0)).unwrap();
        assert_eq!(sys.unknown_count, 2);

        let spec4 = instances::random_generalized_berwald(4, 1);
        let (data4, frame4) = prepared(&spec4, &[0.1, -0.2, 0.3, 0.0]);
        let sys4 = assemble_adapted(&data4, &frame4, &sample_directions(4, 16, 0)).unwrap();
        assert_eq!(sys4.unknown_count, 24);
        assert_eq!(sys4.rows.nrows(), 4 * sample_directions(4, 16, 0).len());
    }

    #[test]
    fn flat_constant_beta_gives_homogeneous_system() {
        let n = 2;
        let spec = RandersMetricSpec::euclidean(
            n,
            alloc::vec![
                Expression::parse("0.2", n).unwrap(),
                Expression::parse("0.1", n).unwrap(),
            ],
        )
        .unwrap();
        let (data, frame) = prepared(&spec, &[0.4, 0.6]);
        let samples = sample_directions(n, 8, 3);
        for sys in [
            assemble_adapted(&data, &frame, &samples).unwrap(),
            assemble_chart(&data, &samples).unwrap(),
        ] {
            assert!(sys.rhs.amax() < 1e-14);
            let space = min_norm_solve(&sys, DEFAULT_SV_TOL).unwrap();
            assert!(space.particular.norm() < 1e-12);
            assert!(space.residual < 1e-12);
        }
    }

    #[test]
    fn rotating_beta_minimum_norm_solution() {
        let spec = instances::rotating_beta();
        let (data, frame) = prepared(&spec, &[0.0, 0.0]);
        let sys = assemble_adapted(&data, &frame, &sample_directions(2, 8, 0)).unwrap();
        let space = min_norm_solve(&sys, DEFAULT_SV_TOL).unwrap();
        // Unique solution (T_12^1, T_12^2) = (0, -0.7); dim A_p = 0 at n=2.
        assert!(space.particular.get(0, 1, 0).abs() < 1e-10);
        assert!((space.particular.get(0, 1, 1) + 0.7).abs() < 1e-10);
        assert_eq!(space.affine_dimension, 0);
        assert!(space.residual < 1e-10);
    }

    #[test]
    fn zero_sample_vector_is_rejected() {
        let spec = instances::rotating_beta();
        let (data, frame) = prepared(&spec, &[0.0, 0.0]);
        let bad = alloc::vec![DVector::<f64>::zeros(2)];
        assert!(matches!(
            assemble_adapted(&data, &frame, &bad),
            Err(CoreError::ZeroVector)
        ));
        assert!(matches!(
            min_norm_solve(
                &assemble_chart(&data, &sample_directions(2, 8, 0)).unwrap(),
                -1.0
            ),
            Err(CoreError::NonPositiveTolerance(_))
        ));
    }

    #[test]
    fn front_short_columns_vanish_in_adapted_assembly() {
        let spec = instances::random_generalized_berwald(4, 7);
        let (data, frame) = prepared(&spec, &[0.2, -0.4, 0.1, 0.5]);
        let sys = assemble_adapted(&data, &frame, &sample_directions(4, 16, 1)).unwrap();
        let layout = BlockLayout::new(4);
        for s in 0..layout.slot_count() {
            let (a, b, c) = layout.indices(s);
            if layout.kind(a, b, c) == BlockKind::FrontShort {
                assert_eq!(sys.rows.column(s).amax(), 0.0, "slot {s} should be absent");
            }
        }
    }

    #[test]
    fn kernel_dimension_matches_the_formula() {
        for (n, expected) in [(2usize, 0usize), (3, 3), (4, 12)] {
            let spec = instances::random_generalized_berwald(n, 21 + n as u64);
            let p = instances::random_points(n, 1, -0.8, 0.8, 17)[0].clone();
            let (data, frame) = prepared(&spec, p.as_slice());
            let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(n)).unwrap();
            assert_eq!(sol.space.affine_dimension, expected, "n={n}");
            assert!(sol.dimension_stable);
            assert!(sol.space.residual < 1e-9);
        }
    }

    #[test]
    fn kernel_is_supported_on_free_directions_only() {
        // Kernel vectors live in the front short blocks and the
        // "difference" directions of rear off-diagonal pairs; all forced
        // slots must be zero in every kernel basis vector.
        for n in [3usize, 4] {
            let spec = instances::random_generalized_berwald(n, 4 * n as u64);
            let p = instances::random_points(n, 1, -0.8, 0.8, 5)[0].clone();
            let (data, frame) = prepared(&spec, p.as_slice());
            let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(n)).unwrap();
            let layout = BlockLayout::new(n);
            for z in &sol.space.null_basis {
                for s in 0..layout.slot_count() {
                    let (a, b, c) = layout.indices(s);
                    match layout.kind(a, b, c) {
                        BlockKind::FrontTail | BlockKind::RearDiagonal | BlockKind::RearTail => {
                            assert!(
                                z.components()[s].abs() < 1e-8,
                                "forced slot {s} in kernel, n={n}"
                            );
                        }
                        BlockKind::RearOffDiagonal => {
                            // paired slots move in opposite directions
                            let mirror = z.get(c, n - 1, a);
                            assert!(
                                (z.components()[s] + mirror).abs() < 1e-8,
                                "off-diagonal pair not balanced, n={n}"
                            );
                        }
                        BlockKind::FrontShort => {}
                    }
                }
            }
        }
    }

    #[test]
    fn particular_solution_is_orthogonal_to_kernel() {
        let spec = instances::random_generalized_berwald(4, 31);
        let p = instances::random_points(4, 1, -0.8, 0.8, 23)[0].clone();
        let (data, frame) = prepared(&spec, p.as_slice());
        let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(4)).unwrap();
        let part = DVector::from_row_slice(sol.space.particular.components());
        for z in &sol.space.null_basis {
            let zv = DVector::from_row_slice(z.components());
            assert!(sol.system.inner(&part, &zv).abs() < 1e-10);
        }
    }

    #[test]
    fn chart_and_adapted_modes_agree_after_transport() {
        for n in [2usize, 3] {
            let spec = instances::random_generalized_berwald(n, 100 + n as u64);
            let p = instances::random_points(n, 1, -0.8, 0.8, 2)[0].clone();
            let (data, frame) = prepared(&spec, p.as_slice());
            let samples = sample_directions(n, 4 * n, 9);

            let adapted_sys = assemble_adapted(&data, &frame, &samples).unwrap();
            let adapted_sol = min_norm_solve(&adapted_sys, DEFAULT_SV_TOL).unwrap();

            let chart_sys = assemble_chart(&data, &samples).unwrap();
            let chart_sol = min_norm_solve(&chart_sys, DEFAULT_SV_TOL).unwrap();

            assert_eq!(
                adapted_sol.affine_dimension, chart_sol.affine_dimension,
                "kernel dimensions differ at n={n}"
            );
            let moved = torsion_to_chart(&adapted_sol.particular, &frame);
            let diff = DVector::from_row_slice(moved.components())
                - DVector::from_row_slice(chart_sol.particular.components());
            assert!(diff.amax() < 1e-8, "particulars differ at n={n}");
        }
    }

    #[test]
    fn cross_validation_confirms_the_closed_form() {
        let spec = instances::rotating_beta();
        let (data, frame) = prepared(&spec, &[0.0, 0.0]);
        let adapted = to_adapted(&data, frame.clone());
        let ext = extremal_torsion(&adapted, CompatibilityMode::Strict, 1e-8).unwrap();
        let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(2)).unwrap();
        let report = cross_validate(&ext.torsion, &sol.space, &sol.system).unwrap();
        assert!(report.passes);
        assert!(report.difference_norm < 1e-9);
        assert!(report.closed_form_residual < 1e-9);
    }

    #[test]
    fn berwald_case_cross_validates_at_zero() {
        let spec = instances::product_berwald(3);
        let p = DVector::from_row_slice(&[0.3, -0.2, 0.6]);
        let (data, frame) = prepared(&spec, p.as_slice());
        let adapted = to_adapted(&data, frame.clone());
        let ext = extremal_torsion(&adapted, CompatibilityMode::Strict, 1e-8).unwrap();
        assert!(ext.torsion.norm() < 1e-10);
        let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(3)).unwrap();
        let report = cross_validate(&ext.torsion, &sol.space, &sol.system).unwrap();
        assert!(report.passes);
        assert!(report.difference_norm < 1e-10);
    }

    #[test]
    fn unsolvable_point_shows_in_the_residuals() {
        let spec = instances::linear_beta();
        let (data, frame) = prepared(&spec, &[0.5, 0.0]);
        let adapted = to_adapted(&data, frame.clone());
        let ext = extremal_torsion(&adapted, CompatibilityMode::Permissive, 1e-8).unwrap();
        assert!(!ext.compatible);
        let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(2)).unwrap();
        let report = cross_validate(&ext.torsion, &sol.space, &sol.system).unwrap();
        assert!(report.closed_form_residual > 1e-3);
        assert!(sol.space.residual > 1e-3);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let spec = instances::rotating_beta();
        let (data, frame) = prepared(&spec, &[0.0, 0.0]);
        let sol = solve_adapted(&data, &frame, OracleConfig::for_dim(2)).unwrap();
        let wrong = TorsionTensor::zeros(3);
        assert!(matches!(
            cross_validate(&wrong, &sol.space, &sol.system),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }
}
