//! Parallel transport along curves and length-preservation checks.
//!
//! A vector field `X` along a curve `c` is parallel for the connection
//! `Gamma` when `X^k' = -c^i' X^j Gamma^k_ij(c)`. For a compatible
//! connection the Finsler length `F(c, X)` is a first integral, and because
//! the connection is metrical for `alpha` the Riemannian length is one too;
//! both drifts are measured on the integration grid.
//!
//! Integration is classical fixed-step fourth order. The connection field
//! is recomputed from scratch (full pipeline) at every stage position;
//! adaptive stepping and field interpolation are deliberately avoided so
//! that drift-versus-step-size convergence stays clean. A Levi-Civita mode
//! serves as the negative control: it preserves the `alpha`-length but not
//! `F` unless `beta` happens to be parallel.

use alloc::boxed::Box;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::connection::{
    connection_coefficients, extremal_torsion, CompatibilityMode, DEFAULT_SOLVABILITY_TOL,
};
use crate::error::CoreError;
use crate::expr::{Expression, VarSpace};
use crate::frame::{adapted_frame, to_adapted, torsion_to_chart};
use crate::geometry::RandersMetricSpec;
use crate::linalg::Tensor3;

/// How far apart the endpoints of a loop may sit.
pub const LOOP_CLOSURE_TOL: f64 = 1e-10;

/// A parametrized curve `c : [0, 1] -> M` with expression coordinates.
#[derive(Clone, Debug)]
pub struct Curve {
    coords: Vec<Expression>,
}

impl Curve {
    pub fn new(coords: Vec<Expression>) -> Result<Self, CoreError> {
        for e in &coords {
            if e.var_space() != VarSpace::CurveParam {
                return Err(CoreError::DimensionMismatch {
                    expected: 1,
                    got: e.dim(),
                });
            }
        }
        Ok(Curve { coords })
    }

    /// Parse per-coordinate functions of `t`.
    pub fn parse(sources: &[&str]) -> Result<Self, CoreError> {
        let coords = sources
            .iter()
            .map(|s| Expression::parse_curve(s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn position(&self, t: f64) -> Result<DVector<f64>, CoreError> {
        let mut p = DVector::<f64>::zeros(self.dim());
        for (k, e) in self.coords.iter().enumerate() {
            p[k] = e.eval(&[t])?;
        }
        Ok(p)
    }

    /// `c'(t)` by a dual pass in `t`.
    pub fn velocity(&self, t: f64) -> Result<DVector<f64>, CoreError> {
        let mut v = DVector::<f64>::zeros(self.dim());
        for (k, e) in self.coords.iter().enumerate() {
            v[k] = e.eval_directional(&[t], &[1.0])?.dot;
        }
        Ok(v)
    }

    pub fn closure_gap(&self) -> Result<f64, CoreError> {
        Ok((self.position(1.0)? - self.position(0.0)?).norm())
    }
}

/// Which connection drives the transport.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportConnection {
    /// The extremal compatible connection (full pipeline per point).
    Extremal,
    /// Levi-Civita connection of `alpha` — the negative control.
    LeviCivita,
}

#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    pub steps: usize,
    pub connection: TransportConnection,
    pub mode: CompatibilityMode,
    pub solvability_tol: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            steps: 1000,
            connection: TransportConnection::Extremal,
            mode: CompatibilityMode::Strict,
            solvability_tol: DEFAULT_SOLVABILITY_TOL,
        }
    }
}

/// Transported field with its length-drift diagnostics.
#[derive(Clone, Debug)]
pub struct TransportResult {
    /// `(t, X(t))` at every grid node; the first entry is the initial
    /// condition exactly.
    pub trajectory: Vec<(f64, DVector<f64>)>,
    /// `max_t |F(c(t), X(t)) - F_0| / F_0`.
    pub f_drift: f64,
    /// Same for the `alpha`-norm.
    pub alpha_drift: f64,
    pub step_size: f64,
}

impl TransportResult {
    pub fn final_vector(&self) -> &DVector<f64> {
        &self.trajectory.last().expect("trajectory is never empty").1
    }
}

/// Holonomy data of a closed loop.
#[derive(Clone, Debug)]
pub struct HolonomyDefect {
    pub transported: DVector<f64>,
    pub f_drift: f64,
    /// `||X(1) - X(0)||` — generally nonzero (nontrivial holonomy) even
    /// though the Finsler length is preserved.
    pub displacement: f64,
}

fn connection_matrix(
    spec: &RandersMetricSpec,
    x: &DVector<f64>,
    velocity: &DVector<f64>,
    opts: &TransportOptions,
) -> Result<DMatrix<f64>, CoreError> {
    let data = spec.point_data(x.as_slice())?;
    let gamma: Tensor3 = match opts.connection {
        TransportConnection::LeviCivita => data.christoffel.clone(),
        TransportConnection::Extremal => {
            let frame = adapted_frame(&data)?;
            let adapted = to_adapted(&data, frame);
            let ext = extremal_torsion(&adapted, opts.mode, opts.solvability_tol)?;
            let t_chart = torsion_to_chart(&ext.torsion, &adapted.frame);
            connection_coefficients(&data, &t_chart)?.gamma
        }
    };
    let n = x.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for i in 0..n {
                sum -= velocity[i] * gamma.get(k, i, j);
            }
            m[(k, j)] = sum;
        }
    }
    Ok(m)
}

fn at_time(t: f64, e: CoreError) -> CoreError {
    CoreError::Transport {
        t,
        source: Box::new(e),
    }
}

/// Integrate the parallel-transport equation from `X0` over `t in [0, 1]`.
pub fn parallel_transport(
    spec: &RandersMetricSpec,
    curve: &Curve,
    x0: &DVector<f64>,
    opts: &TransportOptions,
) -> Result<TransportResult, CoreError> {
    let n = spec.dim();
    if curve.dim() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: curve.dim(),
        });
    }
    if x0.len() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if x0.amax() == 0.0 {
        return Err(CoreError::ZeroVector);
    }
    if opts.steps == 0 {
        return Err(CoreError::EmptySamples);
    }

    let h = 1.0 / opts.steps as f64;
    let field = |t: f64| -> Result<DMatrix<f64>, CoreError> {
        let x = curve.position(t)?;
        let v = curve.velocity(t)?;
        connection_matrix(spec, &x, &v, opts).map_err(|e| at_time(t, e))
    };

    let mut trajectory = Vec::with_capacity(opts.steps + 1);
    trajectory.push((0.0, x0.clone()));

    let mut x = x0.clone();
    let mut a_start = field(0.0)?;
    for step in 0..opts.steps {
        let t = step as f64 * h;
        let a_mid = field(t + 0.5 * h)?;
        let a_end = field(t + h)?;

        let k1 = &a_start * &x;
        let k2 = &a_mid * &(&x + &k1 * (0.5 * h));
        let k3 = &a_mid * &(&x + &k2 * (0.5 * h));
        let k4 = &a_end * &(&x + &k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        trajectory.push(((step + 1) as f64 * h, x.clone()));
        a_start = a_end;
    }

    // Length drifts on the same grid.
    let p0 = curve.position(0.0)?;
    let f0 = spec.finsler_value(p0.as_slice(), x0)?;
    let a0 = alpha_length(spec, &p0, x0)?;
    let mut f_drift = 0.0_f64;
    let mut alpha_drift = 0.0_f64;
    for (t, xt) in &trajectory {
        let pt = curve.position(*t)?;
        let ft = spec.finsler_value(pt.as_slice(), xt)?;
        let at = alpha_length(spec, &pt, xt)?;
        f_drift = f_drift.max((ft - f0).abs() / f0);
        alpha_drift = alpha_drift.max((at - a0).abs() / a0);
    }

    Ok(TransportResult {
        trajectory,
        f_drift,
        alpha_drift,
        step_size: h,
    })
}

fn alpha_length(
    spec: &RandersMetricSpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, CoreError> {
    let a = spec.eval_alpha(x.as_slice())?;
    Ok((&a * y).dot(y).max(0.0).sqrt())
}

/// Transport around a closed loop and report the holonomy displacement.
pub fn holonomy_defect(
    spec: &RandersMetricSpec,
    loop_curve: &Curve,
    x0: &DVector<f64>,
    opts: &TransportOptions,
) -> Result<HolonomyDefect, CoreError> {
    let gap = loop_curve.closure_gap()?;
    if gap > LOOP_CLOSURE_TOL {
        return Err(CoreError::LoopNotClosed { gap });
    }
    let result = parallel_transport(spec, loop_curve, x0, opts)?;
    let transported = result.final_vector().clone();
    Ok(HolonomyDefect {
        displacement: (&transported - x0).norm(),
        transported,
        f_drift: result.f_drift,
    })
}
