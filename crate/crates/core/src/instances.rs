//! Ready-made Randers instance families.
//!
//! These are the metrics the test-suite exercises; they are public because
//! they are equally handy for experimenting with the pipeline from code.

use alloc::vec::Vec;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::expr::{Expression, VarSpace};
use crate::geometry::RandersMetricSpec;

/// The crate's running worked example: `alpha = delta` on the plane with a
/// perturbation of constant length 0.3 rotating at rate 0.7,
/// `beta = (0.3 cos(0.7 x1), 0.3 sin(0.7 x1))`.
///
/// `||beta#||_alpha = 0.3` everywhere, so the space is generalized Berwald;
/// at the origin the extremal torsion is `(0, -0.7)` in the adapted frame
/// and `T_12^1 = 0.7` in chart coordinates.
pub fn rotating_beta() -> RandersMetricSpec {
    let n = 2;
    RandersMetricSpec::euclidean(
        n,
        alloc::vec![
            Expression::parse("0.3*cos(0.7*x1)", n).unwrap(),
            Expression::parse("0.3*sin(0.7*x1)", n).unwrap(),
        ],
    )
    .unwrap()
}

/// Flat metric with `beta = (x1, 0)`: `||beta#||_alpha = |x1|` is not
/// constant, so no compatible linear connection exists. Useful as the
/// negative control for the solvability detector. Only valid on
/// `0 < |x1| < 1`.
pub fn linear_beta() -> RandersMetricSpec {
    let n = 2;
    RandersMetricSpec::euclidean(
        n,
        alloc::vec![
            Expression::parse("x1", n).unwrap(),
            Expression::parse("0", n).unwrap(),
        ],
    )
    .unwrap()
}

/// Product metric `alpha = diag(a_1(x1)^2, .., a_n(xn)^2)` with
/// `beta = c a_1(x1) dx1`.
///
/// `beta` is parallel for the Levi-Civita connection of `alpha`
/// (`nabla* beta = 0`), so the space is Berwald: the extremal torsion
/// vanishes and the extremal connection degenerates to Levi-Civita, while
/// the Christoffel symbols themselves are nonzero.
pub fn product_berwald(n: usize) -> RandersMetricSpec {
    let vars = VarSpace::Coords(n);
    let factor = |k: usize, freq: f64| {
        // a_k(x_k) = 1 + 0.25 sin(freq x_k), strictly positive
        Expression::constant(1.0, vars)
            + (Expression::var(k, vars) * Expression::constant(freq, vars)).sin()
                * Expression::constant(0.25, vars)
    };
    let mut alpha = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j {
                alpha.push(factor(i, 0.8 + 0.1 * i as f64).powi(2));
            } else {
                alpha.push(Expression::constant(0.0, vars));
            }
        }
    }
    let mut beta = Vec::new();
    beta.push(factor(0, 0.8) * Expression::constant(0.35, vars));
    for _ in 1..n {
        beta.push(Expression::constant(0.0, vars));
    }
    RandersMetricSpec::new(n, alpha, beta).unwrap()
}

/// Random generalized Berwald instance.
///
/// The Riemannian part is a diagonally dominant trigonometric perturbation
/// of the identity (SPD on the whole chart); the perturbation is
/// `beta = c alpha(U, .)` with `U = W / ||W||_alpha` for a nonvanishing
/// field `W` and a constant `c` in `(0.2, 0.8)`. By construction
/// `||beta#||_alpha = c`, so the solvability conditions hold everywhere.
pub fn random_generalized_berwald(n: usize, seed: u64) -> RandersMetricSpec {
    let vars = VarSpace::Coords(n);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let osc = |amp: f64, rng: &mut ChaCha12Rng| {
        let freq = rng.random_range(0.3..1.2);
        let phase = rng.random_range(0.0..6.28);
        let var = rng.random_range(0..n);
        (Expression::var(var, vars) * Expression::constant(freq, vars)
            + Expression::constant(phase, vars))
        .sin()
            * Expression::constant(amp, vars)
    };

    // alpha = I + perturbation, kept SPD by strict diagonal dominance.
    let mut grid: Vec<Vec<Option<Expression>>> = alloc::vec![alloc::vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let e = if i == j {
                Expression::constant(1.0, vars) + osc(0.15, &mut rng)
            } else {
                osc(0.25 / n as f64, &mut rng)
            };
            grid[i][j] = Some(e.clone());
            grid[j][i] = Some(e);
        }
    }
    let alpha_at = |i: usize, j: usize| grid[i][j].clone().unwrap();

    // Nonvanishing W: the first component stays >= 1.2.
    let mut w: Vec<Expression> = Vec::with_capacity(n);
    w.push(Expression::constant(1.5, vars) + osc(0.3, &mut rng));
    for _ in 1..n {
        w.push(osc(0.4, &mut rng));
    }

    // ||W||^2_alpha as an expression.
    let mut norm_sq = Expression::constant(0.0, vars);
    for a in 0..n {
        for b in 0..n {
            norm_sq = norm_sq + alpha_at(a, b) * w[a].clone() * w[b].clone();
        }
    }
    let norm = norm_sq.sqrt();

    let c = rng.random_range(0.2..0.8);
    let mut beta = Vec::with_capacity(n);
    for j in 0..n {
        let mut lowered = Expression::constant(0.0, vars);
        for k in 0..n {
            lowered = lowered + alpha_at(j, k) * w[k].clone();
        }
        beta.push(lowered * Expression::constant(c, vars) / norm.clone());
    }

    let mut alpha_upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            alpha_upper.push(alpha_at(i, j));
        }
    }
    RandersMetricSpec::new(n, alpha_upper, beta).unwrap()
}

/// Deterministic sample of points in the box `[lo, hi]^n`.
pub fn random_points(n: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DVector::from_fn(n, |_, _| rng.random_range(lo..hi)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::solvability_conditions;
    use crate::frame::{adapted_frame, to_adapted};

    #[test]
    fn random_instances_are_solvable_with_constant_norm() {
        for n in 2..=4 {
            for seed in 0..3 {
                let spec = random_generalized_berwald(n, seed);
                let points = random_points(n, 5, -1.0, 1.0, 99 + seed);
                let mut norms = Vec::new();
                for p in &points {
                    let data = spec.point_data(p.as_slice()).unwrap();
                    norms.push(data.beta_norm_sq);
                    let adapted = to_adapted(&data, adapted_frame(&data).unwrap());
                    assert!(
                        solvability_conditions(&adapted).amax() < 1e-10,
                        "n={n} seed={seed} point {p:?}"
                    );
                }
                let first = norms[0];
                assert!(norms.iter().all(|v| (v - first).abs() < 1e-12));
                assert!(first > 0.2 * 0.2 - 1e-9 && first < 0.8 * 0.8 + 1e-9);
            }
        }
    }

    #[test]
    fn product_instance_has_parallel_beta() {
        for n in [2usize, 3] {
            let spec = product_berwald(n);
            for p in random_points(n, 4, -1.0, 1.0, 5) {
                let data = spec.point_data(p.as_slice()).unwrap();
                // nabla* beta = 0: d_i beta_j = Gamma*^k_ij beta_k.
                for i in 0..n {
                    for j in 0..n {
                        let mut cov = data.dbeta[(i, j)];
                        for k in 0..n {
                            cov -= data.christoffel.get(k, i, j) * data.beta[k];
                        }
                        assert!(cov.abs() < 1e-12, "n={n} p={p:?} i={i} j={j}");
                    }
                }
                assert!(data.christoffel.max_abs() > 1e-3, "Gamma* should not vanish");
            }
        }
    }
}
