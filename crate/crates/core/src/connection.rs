//! Solvability of the compatibility equations and the closed-form extremal
//! connection.
//!
//! In an adapted frame the Randers compatibility equations decouple block by
//! block. They are solvable at a point iff the row `C_{n;i}` vanishes —
//! equivalently, iff `||beta#||_alpha` has zero derivative there — and the
//! solution with pointwise minimal torsion norm is given explicitly:
//! front short blocks vanish, tails and rear diagonals are forced, and each
//! rear off-diagonal pair splits its forced sum `S_ac` evenly (the unique
//! minimizer of `x^2 + (s - x)^2`).
//!
//! The same formulas remain well defined when the solvability conditions
//! fail; permissive mode returns them anyway, flagged as incompatible.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::CoreError;
use crate::frame::{adapted_frame, to_adapted, AdaptedPointData};
use crate::geometry::{PointFrameData, RandersMetricSpec};
use crate::linalg::Tensor3;
use crate::torsion::{BlockLayout, TorsionTensor};

/// Default tolerance on the scale-normalized solvability conditions.
pub const DEFAULT_SOLVABILITY_TOL: f64 = 1e-8;

/// Whether failing solvability conditions abort or merely flag the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompatibilityMode {
    Strict,
    Permissive,
}

/// The solvability row `(C_{n;1}, .., C_{n;n})`; the compatibility equations
/// admit a solution at the point iff every entry vanishes.
pub fn solvability_conditions(adapted: &AdaptedPointData) -> DVector<f64> {
    let n = adapted.dim();
    let last = n - 1;
    DVector::from_fn(n, |i, _| adapted.c_coeff(last, i))
}

/// Scale used to normalize solvability tolerances: the magnitude of the
/// data entering the `C` coefficients, floored at 1.
pub fn solvability_scale(adapted: &AdaptedPointData) -> f64 {
    let gamma = adapted.gamma_bar.frobenius_norm();
    let dbeta = adapted.dbeta_bar.norm() / adapted.frame.beta_n_bar;
    (gamma + dbeta).max(1.0)
}

/// Closed-form extremal torsion in the adapted frame.
#[derive(Clone, Debug)]
pub struct ExtremalTorsion {
    /// Adapted-frame components.
    pub torsion: TorsionTensor,
    /// False when the solvability conditions failed (permissive mode only).
    pub compatible: bool,
    /// `max_i |C_{n;i}|` at the point.
    pub max_violation: f64,
    /// The scaled tolerance the violation was compared against.
    pub tolerance: f64,
}

/// Evaluate the extremal-torsion formulas at a point.
///
/// In strict mode a violation of the solvability conditions beyond
/// `tol * scale` is an error; in permissive mode the formula values are
/// returned with `compatible = false`.
pub fn extremal_torsion(
    adapted: &AdaptedPointData,
    mode: CompatibilityMode,
    tol: f64,
) -> Result<ExtremalTorsion, CoreError> {
    if tol <= 0.0 {
        return Err(CoreError::NonPositiveTolerance(tol));
    }
    let n = adapted.dim();
    let last = n - 1;

    let violations = solvability_conditions(adapted);
    let max_violation = violations.amax();
    let tolerance = tol * solvability_scale(adapted);
    let compatible = max_violation <= tolerance;
    if !compatible && mode == CompatibilityMode::Strict {
        return Err(CoreError::NotGeneralizedBerwald {
            max_violation,
            tolerance,
        });
    }

    let beta_n = adapted.frame.beta_n_bar;
    let mut t = TorsionTensor::zeros(n);
    // Front tails: T_ab^n = (d beta-bar_b / d x-bar^a - d beta-bar_a / d x-bar^b) / beta-bar_n.
    for a in 0..last {
        for b in a + 1..last {
            let v = (adapted.dbeta_bar[(a, b)] - adapted.dbeta_bar[(b, a)]) / beta_n;
            t.set(a, b, last, v);
        }
    }
    for a in 0..last {
        // Rear diagonal: T_an^a = C_{a;a}.
        t.set(a, last, a, adapted.c_coeff(a, a));
        // Rear tail: T_an^n = C_{a;n}.
        t.set(a, last, last, adapted.c_coeff(a, last));
        // Rear off-diagonal: the even split of the forced sum S_ac.
        for c in 0..last {
            if c != a {
                t.set(a, last, c, 0.5 * adapted.s_coeff(a, c));
            }
        }
    }

    Ok(ExtremalTorsion {
        torsion: t,
        compatible,
        max_violation,
        tolerance,
    })
}

/// Connection coefficients produced by the Christoffel process.
#[derive(Clone, Debug)]
pub struct ConnectionCoefficients {
    /// `gamma.get(r, i, j) = Gamma^r_ij` in chart coordinates.
    pub gamma: Tensor3,
    /// The chart torsion the coefficients were built from.
    pub torsion_chart: TorsionTensor,
    /// `levi_civita.get(r, i, j) = Gamma*^r_ij`.
    pub levi_civita: Tensor3,
}

/// Christoffel process: recover the unique metric connection of `alpha`
/// with the prescribed torsion,
/// `Gamma^r_ij = Gamma*^r_ij - 1/2 (T^l_jk a^{kr} a_il + T^l_ik a^{kr} a_jl - T_ij^r)`.
pub fn connection_coefficients(
    data: &PointFrameData,
    torsion_chart: &TorsionTensor,
) -> Result<ConnectionCoefficients, CoreError> {
    let n = data.dim();
    if torsion_chart.dim() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: torsion_chart.dim(),
        });
    }
    let a = &data.alpha;
    let a_inv = &data.alpha_inv;
    let mut gamma = Tensor3::zeros(n);
    for r in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut lowered = 0.0;
                for l in 0..n {
                    for k in 0..n {
                        lowered += a_inv[(k, r)]
                            * (torsion_chart.get(j, k, l) * a[(i, l)]
                                + torsion_chart.get(i, k, l) * a[(j, l)]);
                    }
                }
                let v = data.christoffel.get(r, i, j)
                    - 0.5 * (lowered - torsion_chart.get(i, j, r));
                gamma.set(r, i, j, v);
            }
        }
    }
    Ok(ConnectionCoefficients {
        gamma,
        torsion_chart: torsion_chart.clone(),
        levi_civita: data.christoffel.clone(),
    })
}

/// Coefficient table of the Randers compatibility equations in an adapted
/// frame: `sigma.get(a, b, c, i)` multiplies `T_ab^c` in equation `i`.
#[derive(Clone, Debug)]
pub struct SigmaTable {
    layout: BlockLayout,
    data: Vec<f64>,
}

impl SigmaTable {
    pub fn get(&self, a: usize, b: usize, c: usize, i: usize) -> f64 {
        self.data[self.layout.slot(a, b, c) * self.layout.dim() + i]
    }

    /// Row of coefficients for equation `i`, in packed slot order.
    pub fn equation_row(&self, i: usize) -> Vec<f64> {
        let n = self.layout.dim();
        (0..self.layout.slot_count())
            .map(|s| self.data[s * n + i])
            .collect()
    }

    /// `sum over a<b, c of sigma_{ab;i}^c T_ab^c`.
    pub fn contract(&self, t: &TorsionTensor, i: usize) -> f64 {
        let n = self.layout.dim();
        t.components()
            .iter()
            .enumerate()
            .map(|(s, v)| self.data[s * n + i] * v)
            .sum()
    }
}

/// Randers-reduced coefficients
/// `sigma_{ab;i}^c = (d_i^c y^a + d_i^a y^c) d_b^n + (d_i^b y^a - d_i^a y^b) d_c^n`
/// (adapted frame, already divided by `beta-bar_n`).
pub fn randers_sigma(n: usize, y: &DVector<f64>) -> SigmaTable {
    let layout = BlockLayout::new(n);
    let last = n - 1;
    let mut data = vec![0.0; layout.slot_count() * n];
    for s in 0..layout.slot_count() {
        let (a, b, c) = layout.indices(s);
        for i in 0..n {
            let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
            let mut v = 0.0;
            if b == last {
                v += (d(i, c) * y[a] + d(i, a) * y[c]) * 1.0;
            }
            if c == last {
                v += d(i, b) * y[a] - d(i, a) * y[b];
            }
            data[s * n + i] = v;
        }
    }
    SigmaTable { layout, data }
}

/// Coefficient of `y^k` on the left-hand side of the `i`-th compatibility
/// equation (`i < n - 1`; the last equation is covered by the rear tails).
pub fn kappa_coefficients(t: &TorsionTensor, i: usize) -> Result<DVector<f64>, CoreError> {
    let n = t.dim();
    let last = n - 1;
    if i >= last {
        return Err(CoreError::DimensionMismatch {
            expected: last,
            got: i,
        });
    }
    let mut kappa = DVector::<f64>::zeros(n);
    for k in 0..n {
        kappa[k] = if k == last {
            0.0
        } else if k < i {
            t.get(k, i, last) + t.get(i, last, k) + t.get(k, last, i)
        } else if k == i {
            2.0 * t.get(i, last, i)
        } else {
            -t.get(i, k, last) + t.get(i, last, k) + t.get(k, last, i)
        };
    }
    Ok(kappa)
}

/// Solvability data for one sampled point.
#[derive(Clone, Debug)]
pub struct PointSolvability {
    pub point: DVector<f64>,
    /// The row `(C_{n;1}, .., C_{n;n})`.
    pub c_n_row: DVector<f64>,
    pub norm_beta_sq: f64,
    /// `d_i (alpha^{jk} beta_j beta_k)` in chart coordinates.
    pub grad_norm_beta_sq: DVector<f64>,
    /// Largest disagreement between the `C`-row test and the gradient test
    /// after converting to common units.
    pub test_disagreement: f64,
    pub scale: f64,
    pub is_solvable: bool,
}

/// Verdict of the pointwise solvability tests over a sample of points.
#[derive(Clone, Debug)]
pub struct SolvabilityReport {
    pub points: Vec<PointSolvability>,
    pub verdict: bool,
    /// Largest gradient-test entry `max_i |d_i ||beta#||^2|` over all points.
    pub max_violation: f64,
    pub tol: f64,
}

/// Chart-coordinate gradient of `||beta#||^2_alpha = alpha^{jk} beta_j beta_k`.
pub fn grad_beta_norm_sq(data: &PointFrameData) -> DVector<f64> {
    let n = data.dim();
    let sharp = &data.beta_sharp;
    DVector::from_fn(n, |i, _| {
        let mut g = 0.0;
        for a in 0..n {
            g += 2.0 * data.dbeta[(i, a)] * sharp[a];
            for b in 0..n {
                g -= sharp[a] * data.dalpha.get(i, a, b) * sharp[b];
            }
        }
        g
    })
}

/// Run both pointwise solvability tests over the sampled points.
///
/// A Randers space is generalized Berwald iff `||beta#||_alpha` is a
/// positive constant; the `C`-row test and the gradient test are two
/// algebraic routes to the same condition and are cross-checked against
/// each other here.
pub fn global_solvability(
    spec: &RandersMetricSpec,
    sample_points: &[DVector<f64>],
    tol: f64,
) -> Result<SolvabilityReport, CoreError> {
    if sample_points.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    if tol <= 0.0 {
        return Err(CoreError::NonPositiveTolerance(tol));
    }
    let mut points = Vec::with_capacity(sample_points.len());
    let mut verdict = true;
    let mut max_violation = 0.0_f64;
    for p in sample_points {
        let data = spec.point_data(p.as_slice())?;
        let frame = adapted_frame(&data)?;
        let beta_n = frame.beta_n_bar;
        let basis = frame.basis.clone();
        let adapted = to_adapted(&data, frame);

        let c_n_row = solvability_conditions(&adapted);
        let grad = grad_beta_norm_sq(&data);
        let scale = solvability_scale(&adapted);

        // The two tests are linked by grad-bar_a = -2 beta_n^2 C_{n;a} in
        // the adapted frame.
        let grad_bar = basis.transpose() * &grad;
        let mut disagreement = 0.0_f64;
        for a in 0..data.dim() {
            disagreement =
                disagreement.max((grad_bar[a] + 2.0 * beta_n * beta_n * c_n_row[a]).abs());
        }

        let c_pass = c_n_row.amax() <= tol * scale;
        let grad_in_c_units = grad.amax() / (2.0 * beta_n * beta_n);
        let grad_pass = grad_in_c_units <= tol * scale;
        let is_solvable = c_pass && grad_pass && data.beta_norm_sq > 0.0;

        verdict &= is_solvable;
        max_violation = max_violation.max(grad.amax());
        points.push(PointSolvability {
            point: p.clone(),
            c_n_row,
            norm_beta_sq: data.beta_norm_sq,
            grad_norm_beta_sq: grad,
            test_disagreement: disagreement,
            scale,
            is_solvable,
        });
    }
    Ok(SolvabilityReport {
        points,
        verdict,
        max_violation,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(src: &str, n: usize) -> Expression {
        Expression::parse(src, n).unwrap()
    }

    fn rotating_beta_spec() -> RandersMetricSpec {
        RandersMetricSpec::euclidean(
            2,
            vec![c("0.3*cos(0.7*x1)", 2), c("0.3*sin(0.7*x1)", 2)],
        )
        .unwrap()
    }

    fn adapted_at(spec: &RandersMetricSpec, p: &[f64]) -> (PointFrameData, AdaptedPointData) {
        let data = spec.point_data(p).unwrap();
        let frame = adapted_frame(&data).unwrap();
        let adapted = to_adapted(&data, frame);
        (data, adapted)
    }

    #[test]
    fn solvability_vanishes_for_flat_constant_beta() {
        let spec = RandersMetricSpec::euclidean(3, vec![c("0.2", 3), c("0", 3), c("0.1", 3)])
            .unwrap();
        let (_, adapted) = adapted_at(&spec, &[0.3, -0.2, 0.8]);
        assert!(solvability_conditions(&adapted).amax() < 1e-15);
    }

    #[test]
    fn solvability_vanishes_for_rotating_beta() {
        let spec = rotating_beta_spec();
        for p in [[0.0, 0.0], [0.7, -0.3], [-1.2, 0.5]] {
            let (_, adapted) = adapted_at(&spec, &p);
            assert!(
                solvability_conditions(&adapted).amax() < 1e-13,
                "C_n row should vanish at {p:?}"
            );
        }
    }

    #[test]
    fn solvability_detects_nonconstant_norm() {
        let spec = RandersMetricSpec::euclidean(2, vec![c("x1", 2), c("0", 2)]).unwrap();
        let (_, adapted) = adapted_at(&spec, &[0.5, 0.0]);
        let row = solvability_conditions(&adapted);
        // C_{2;2} = -(1/0.5) * 1 = -2 in the adapted frame.
        assert!((row[1] + 2.0).abs() < 1e-12);
        assert!(row[0].abs() < 1e-12);
    }

    #[test]
    fn global_solvability_accepts_rotating_beta() {
        let spec = rotating_beta_spec();
        let mut rng = StdRng::seed_from_u64(11);
        let points: Vec<DVector<f64>> = (0..50)
            .map(|_| DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0)))
            .collect();
        let report = global_solvability(&spec, &points, 1e-9).unwrap();
        assert!(report.verdict);
        for pt in &report.points {
            assert!((pt.norm_beta_sq - 0.09).abs() < 1e-12);
            assert!(pt.test_disagreement < 1e-12);
        }
    }

    #[test]
    fn global_solvability_rejects_linear_beta() {
        let spec = RandersMetricSpec::euclidean(2, vec![c("x1", 2), c("0", 2)]).unwrap();
        let points = vec![
            DVector::from_row_slice(&[0.2, 0.0]),
            DVector::from_row_slice(&[0.5, 1.0]),
            DVector::from_row_slice(&[-0.8, 0.3]),
        ];
        let report = global_solvability(&spec, &points, 1e-9).unwrap();
        assert!(!report.verdict);
        // Worst sampled point has |x1| = 0.8; the analytic gradient there is
        // (2 x1, 0).
        assert!((report.max_violation - 1.6).abs() < 1e-12);
    }

    #[test]
    fn global_solvability_accepts_constant_beta() {
        let spec = RandersMetricSpec::euclidean(2, vec![c("0.4", 2), c("0.1", 2)]).unwrap();
        let points = vec![DVector::from_row_slice(&[3.0, -1.0])];
        let report = global_solvability(&spec, &points, 1e-9).unwrap();
        assert!(report.verdict);
        assert_eq!(report.max_violation, 0.0);
    }

    #[test]
    fn global_solvability_rejects_empty_sample() {
        let spec = rotating_beta_spec();
        assert!(matches!(
            global_solvability(&spec, &[], 1e-9),
            Err(CoreError::EmptySamples)
        ));
    }

    #[test]
    fn extremal_torsion_vanishes_in_the_berwald_case() {
        let spec = RandersMetricSpec::euclidean(3, vec![c("0.2", 3), c("0.1", 3), c("0", 3)])
            .unwrap();
        let (_, adapted) = adapted_at(&spec, &[0.1, 0.2, 0.3]);
        let ext = extremal_torsion(&adapted, CompatibilityMode::Strict, 1e-8).unwrap();
        assert!(ext.compatible);
        assert_eq!(ext.torsion.norm(), 0.0);
    }

    #[test]
    fn extremal_torsion_rotating_beta() {
        let (_, adapted) = adapted_at(&rotating_beta_spec(), &[0.0, 0.0]);
        let ext = extremal_torsion(&adapted, CompatibilityMode::Strict, 1e-8).unwrap();
        // Adapted components (T_12^1, T_12^2) = (0, -0.7): the rear diagonal
        // C_{1;1} vanishes and the rear tail equals C_{1;2}.
        assert!(ext.torsion.get(0, 1, 0).abs() < 1e-13);
        assert!((ext.torsion.get(0, 1, 1) + 0.7).abs() < 1e-13);
        assert!((ext.torsion.norm() - 0.7).abs() < 1e-13);
    }

    #[test]
    fn strict_mode_rejects_unsolvable_points() {
        let spec = RandersMetricSpec::euclidean(2, vec![c("x1", 2), c("0", 2)]).unwrap();
        let (_, adapted) = adapted_at(&spec, &[0.5, 0.0]);
        assert!(matches!(
            extremal_torsion(&adapted, CompatibilityMode::Strict, 1e-8),
            Err(CoreError::NotGeneralizedBerwald { .. })
        ));
        let ext = extremal_torsion(&adapted, CompatibilityMode::Permissive, 1e-8).unwrap();
        assert!(!ext.compatible);
        assert!(ext.max_violation > 1.0);
    }

    #[test]
    fn zero_torsion_recovers_levi_civita() {
        let spec = RandersMetricSpec::new(
            2,
            vec![c("1", 2), c("0", 2), c("x1^2", 2)],
            vec![c("0.1", 2), c("0", 2)],
        )
        .unwrap();
        let data = spec.point_data(&[2.0, 1.0]).unwrap();
        let conn = connection_coefficients(&data, &TorsionTensor::zeros(2)).unwrap();
        for r in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(conn.gamma.get(r, i, j), data.christoffel.get(r, i, j));
                }
            }
        }
    }

    #[test]
    fn rotating_beta_connection_coefficients() {
        // Chart torsion T_12^1 = 0.7 on flat alpha. The Christoffel process
        // gives Gamma^1_12 = 0.7, Gamma^2_11 = -0.7 and zeros elsewhere;
        // this is the unique metric connection with that torsion (its
        // transport co-rotates with beta, preserving F).
        let data = rotating_beta_spec().point_data(&[0.0, 0.0]).unwrap();
        let mut t = TorsionTensor::zeros(2);
        t.set(0, 1, 0, 0.7);
        let conn = connection_coefficients(&data, &t).unwrap();
        let expected = [
            ((0, 0, 1), 0.7),
            ((1, 0, 0), -0.7),
            ((0, 0, 0), 0.0),
            ((0, 1, 0), 0.0),
            ((0, 1, 1), 0.0),
            ((1, 0, 1), 0.0),
            ((1, 1, 0), 0.0),
            ((1, 1, 1), 0.0),
        ];
        for ((r, i, j), v) in expected {
            assert!(
                (conn.gamma.get(r, i, j) - v).abs() < 1e-14,
                "Gamma^{r}_{i}{j}"
            );
        }
    }

    fn random_torsion(n: usize, rng: &mut StdRng) -> TorsionTensor {
        let layout = BlockLayout::new(n);
        let comps: Vec<f64> = (0..layout.slot_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        TorsionTensor::from_components(n, comps)
    }

    #[test]
    fn christoffel_process_invariants_hold_for_random_torsion() {
        let spec = RandersMetricSpec::new(
            3,
            vec![
                c("1 + 0.1*sin(x2)", 3),
                c("0.05*cos(x3)", 3),
                c("0.03*x1", 3),
                c("1.4 + 0.1*cos(x1)", 3),
                c("0.04*sin(x2)", 3),
                c("0.9", 3),
            ],
            vec![c("0.2", 3), c("0.1", 3), c("0.05", 3)],
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        for trial in 0..5 {
            let p = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let data = spec.point_data(&p).unwrap();
            let t = random_torsion(3, &mut rng);
            let conn = connection_coefficients(&data, &t).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    for r in 0..3 {
                        // Antisymmetric part recovers the torsion.
                        let anti = conn.gamma.get(r, i, j) - conn.gamma.get(r, j, i);
                        assert!(
                            (anti - t.get(i, j, r)).abs() < 1e-12,
                            "torsion recovery, trial {trial}"
                        );
                    }
                    // Metric compatibility: d_k a_ij = G^l_ki a_lj + G^l_kj a_il.
                    for k in 0..3 {
                        let mut rhs = 0.0;
                        for l in 0..3 {
                            rhs += conn.gamma.get(l, k, i) * data.alpha[(l, j)]
                                + conn.gamma.get(l, k, j) * data.alpha[(i, l)];
                        }
                        assert!(
                            (data.dalpha.get(k, i, j) - rhs).abs() < 1e-9,
                            "metric compatibility, trial {trial}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_case_analysis() {
        let n = 4;
        let y = DVector::from_row_slice(&[1.3, -0.4, 2.2, 0.9]);
        let sigma = randers_sigma(n, &y);
        // Case I: front short blocks never appear.
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            for cc in 0..3 {
                for i in 0..4 {
                    assert_eq!(sigma.get(a, b, cc, i), 0.0);
                }
            }
        }
        // Case II: front tails appear in equations a and b only.
        assert_eq!(sigma.get(0, 1, 3, 0), -y[1]);
        assert_eq!(sigma.get(0, 1, 3, 1), y[0]);
        assert_eq!(sigma.get(0, 1, 3, 2), 0.0);
        assert_eq!(sigma.get(0, 1, 3, 3), 0.0);
        // Case III: rear diagonal 2 y^a in equation a; off-diagonal pair.
        assert_eq!(sigma.get(1, 3, 1, 1), 2.0 * y[1]);
        assert_eq!(sigma.get(0, 3, 2, 0), y[2]);
        assert_eq!(sigma.get(0, 3, 2, 2), y[0]);
        assert_eq!(sigma.get(0, 3, 2, 1), 0.0);
        // Case IV: rear tails live in the last equation only.
        assert_eq!(sigma.get(1, 3, 3, 3), 2.0 * y[1]);
        for i in 0..3 {
            assert_eq!(sigma.get(1, 3, 3, i), 0.0);
        }
    }

    #[test]
    fn kappa_examples() {
        let zero = TorsionTensor::zeros(3);
        assert_eq!(kappa_coefficients(&zero, 0).unwrap().amax(), 0.0);

        let mut t = TorsionTensor::zeros(2);
        t.set(0, 1, 0, 0.45);
        let kappa = kappa_coefficients(&t, 0).unwrap();
        assert_eq!(kappa[0], 0.9); // 2 T_12^1
        assert_eq!(kappa[1], 0.0); // y^n never appears
        assert!(kappa_coefficients(&t, 1).is_err());
    }

    #[test]
    fn kappa_matches_sigma_contraction() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in [3usize, 4, 5] {
            for _ in 0..10 {
                let t = random_torsion(n, &mut rng);
                let y = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
                let sigma = randers_sigma(n, &y);
                for i in 0..n - 1 {
                    let kappa = kappa_coefficients(&t, i).unwrap();
                    let lhs = kappa.dot(&y);
                    let rhs = sigma.contract(&t, i);
                    assert!(
                        (lhs - rhs).abs() < 1e-12,
                        "kappa-sigma mismatch n={n} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn extremal_torsion_solves_the_compatibility_equations() {
        // Plugging the closed form into the sigma-contraction must give
        // 2 C_{j;i} y^j for every y.
        let spec = rotating_beta_spec();
        let mut rng = StdRng::seed_from_u64(3);
        for p in [[0.0, 0.0], [0.6, -0.1], [-0.9, 0.4]] {
            let (_, adapted) = adapted_at(&spec, &p);
            let ext = extremal_torsion(&adapted, CompatibilityMode::Strict, 1e-8).unwrap();
            for _ in 0..100 {
                let y = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
                let sigma = randers_sigma(2, &y);
                for i in 0..2 {
                    let lhs = sigma.contract(&ext.torsion, i);
                    let mut rhs = 0.0;
                    for j in 0..2 {
                        rhs += 2.0 * adapted.c_coeff(j, i) * y[j];
                    }
                    assert!((lhs - rhs).abs() < 1e-10, "residual at {p:?} i={i}");
                }
            }
        }
    }
}
