//! Norm geometry for the unit `l_q` ball: norms, dual norms, exact
//! minimization of linear-plus-norm-power objectives, and best comparators.
//!
//! All learners in this crate operate on the ball `{x : ||x||_q <= 1}` with
//! costs measured in the dual `l_p` norm, `1/p + 1/q = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel exponent selecting the max norm in [`norm`].
pub const INF_EXPONENT: f64 = f64::INFINITY;

/// Feasibility slack: a point is accepted as inside the ball when its norm
/// does not exceed `1 + FEAS_TOL`.
pub const FEAS_TOL: f64 = 1e-9;

/// Termination tolerance for the scalar bisections in this module.
pub const SOLVER_TOL: f64 = 1e-10;

/// Geometry of the ambient space: primal exponent `q >= 2`, dual exponent
/// `p = q/(q-1)`, uniform-convexity modulus `mu`, and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub q: f64,
    pub p: f64,
    pub mu: f64,
    pub dim: usize,
}

impl SpaceSpec {
    /// Builds a spec from `q`, `mu`, and `dim`, deriving `p` from
    /// `1/p + 1/q = 1`.
    pub fn new(q: f64, mu: f64, dim: usize) -> Result<Self> {
        if !q.is_finite() || q < 2.0 {
            return Err(Error::Domain(format!(
                "q must be a finite real >= 2, got {q}"
            )));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let p = q / (q - 1.0);
        Ok(SpaceSpec { q, p, mu, dim })
    }

    /// Euclidean case: `q = p = 2`, `mu = 1`.
    pub fn euclidean(dim: usize) -> Self {
        SpaceSpec::new(2.0, 1.0, dim).expect("euclidean spec is always valid")
    }

    /// `l_q` space with the canonical modulus: `mu = 1` at `q = 2` and
    /// `mu = 2^(1-q)` for `q > 2` (the scalar power inequality
    /// `|b|^q >= |a|^q + q sgn(a)|a|^(q-1)(b-a) + 2^(1-q)|b-a|^q` summed
    /// per coordinate).
    pub fn lq(q: f64, dim: usize) -> Result<Self> {
        let mu = if q == 2.0 {
            1.0
        } else {
            (2.0f64).powf(1.0 - q)
        };
        SpaceSpec::new(q, mu, dim)
    }

    pub fn is_euclidean(&self) -> bool {
        self.q == 2.0 && self.mu == 1.0
    }

    /// Primal norm `||x||_q`.
    pub fn primal_norm(&self, x: &Point) -> f64 {
        norm_raw(&x.0, self.q)
    }

    /// Dual norm `||c||_p`.
    pub fn dual_norm(&self, c: &CostVector) -> f64 {
        norm_raw(&c.0, self.p)
    }

    /// Checks `||x||_q <= 1 + FEAS_TOL`.
    pub fn is_feasible(&self, x: &Point) -> bool {
        self.primal_norm(x) <= 1.0 + FEAS_TOL
    }
}

/// A primal vector (plays, hints, comparators).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

/// A dual vector (costs, subgradients).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector(pub Vec<f64>);

impl Point {
    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// `scale * e_i`.
    pub fn basis(dim: usize, i: usize, scale: f64) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = scale;
        Point(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl CostVector {
    pub fn zeros(dim: usize) -> Self {
        CostVector(vec![0.0; dim])
    }

    pub fn basis(dim: usize, i: usize, scale: f64) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = scale;
        CostVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Dual pairing `<c, x>`.
pub fn dot(c: &CostVector, x: &Point) -> f64 {
    dot_slices(&c.0, &x.0)
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(ai, bi)| ai * bi).sum()
}

/// `(sum_i |v_i|^exponent)^(1/exponent)`, or `max_i |v_i|` for the
/// [`INF_EXPONENT`] sentinel. Errors on non-finite entries or `exponent < 1`.
pub fn norm(v: &[f64], exponent: f64) -> Result<f64> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(
            "norm of a vector with non-finite entries".into(),
        ));
    }
    if exponent.is_nan() || exponent < 1.0 {
        return Err(Error::Domain(format!(
            "norm exponent must be >= 1, got {exponent}"
        )));
    }
    Ok(norm_raw(v, exponent))
}

/// Norm without input validation; used on internally produced vectors.
pub(crate) fn norm_raw(v: &[f64], exponent: f64) -> f64 {
    if exponent == INF_EXPONENT {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    if exponent == 2.0 {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    if exponent == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    v.iter()
        .map(|x| x.abs().powf(exponent))
        .sum::<f64>()
        .powf(1.0 / exponent)
}

/// `sum_i |v_i|^e` (the norm raised to its own power).
pub(crate) fn power_sum(v: &[f64], e: f64) -> f64 {
    if e == 2.0 {
        v.iter().map(|x| x * x).sum()
    } else {
        v.iter().map(|x| x.abs().powf(e)).sum()
    }
}

/// Exact minimizer of `<C, x> + (A/q) ||x||_q^q` over the unit `q`-ball.
///
/// For `q = 2` the KKT solution is closed-form: `-C/A` when interior, else
/// `-C/||C||_2`. For `q > 2` the stationarity condition
/// `x_i = -sign(C_i) (|C_i|/(A+nu))^(1/(q-1))` is solved for the multiplier
/// `nu >= 0` by bisection until the boundary residual drops below
/// [`SOLVER_TOL`]. `A = 0, C = 0` resolves to the origin.
pub fn ball_argmin(c: &CostVector, a: f64, spec: &SpaceSpec) -> Point {
    assert!(a >= 0.0, "ball_argmin needs A >= 0");
    debug_assert!(c.0.iter().all(|x| x.is_finite()));
    let dual = spec.dual_norm(c);
    if dual == 0.0 {
        // Any feasible point minimizes when A = 0 as well; pick the origin.
        return Point::zeros(c.dim());
    }
    if spec.q == 2.0 {
        let l2 = norm_raw(&c.0, 2.0);
        let scale = if a > 0.0 && l2 <= a { a } else { l2 };
        return Point(c.0.iter().map(|ci| -ci / scale).collect());
    }
    general_q_argmin(c, a, spec)
}

fn stationary_point(c: &[f64], denom: f64, q: f64) -> Vec<f64> {
    let inv = 1.0 / (q - 1.0);
    c.iter()
        .map(|&ci| {
            if ci == 0.0 {
                0.0
            } else {
                -ci.signum() * (ci.abs() / denom).powf(inv)
            }
        })
        .collect()
}

fn general_q_argmin(c: &CostVector, a: f64, spec: &SpaceSpec) -> Point {
    let q = spec.q;
    let norm_at = |nu: f64| -> (Vec<f64>, f64) {
        let denom = a + nu;
        if denom == 0.0 {
            return (Vec::new(), f64::INFINITY);
        }
        let x = stationary_point(&c.0, denom, q);
        let n = norm_raw(&x, q);
        (x, n)
    };

    // nu = 0: interior solution if already inside the ball.
    let (x0, n0) = norm_at(0.0);
    if n0 <= 1.0 {
        return Point(x0);
    }

    // Grow the bracket until the norm drops below 1, then bisect. The
    // fallback is the last feasible iterate, never the nu = 0 point.
    let mut lo = 0.0;
    let mut hi = a.max(1.0);
    for _ in 0..200 {
        if norm_at(hi).1 < 1.0 {
            break;
        }
        hi *= 2.0;
    }
    let mut best = norm_at(hi).0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (x, n) = norm_at(mid);
        if (n - 1.0).abs() <= SOLVER_TOL {
            return Point(x);
        }
        if n > 1.0 {
            lo = mid;
        } else {
            hi = mid;
            best = x;
        }
    }
    Point(best)
}

/// Best fixed comparator for the accumulated cost `z`:
/// `argmin_{||u||_q <= 1} <z, u>` together with its value `-||z||_p`.
///
/// Closed form `u_i = -sign(z_i) |z_i|^(p-1) / ||z||_p^(p-1)`; the origin
/// when `z = 0`.
pub fn best_comparator(z: &CostVector, spec: &SpaceSpec) -> (Point, f64) {
    let zp = spec.dual_norm(z);
    if zp == 0.0 {
        return (Point::zeros(z.dim()), 0.0);
    }
    let mut u = dual_maximizer(z, zp, spec.p);
    for ui in &mut u.0 {
        *ui = -*ui;
    }
    (u, -zp)
}

/// The point on the unit `q`-ball maximizing `<z, .>`: returns `m` with
/// `<z, m> = ||z||_p` and `||m||_q = 1`. `zp` must equal `||z||_p > 0`.
pub(crate) fn dual_maximizer(z: &CostVector, zp: f64, p: f64) -> Point {
    if p == 2.0 {
        return Point(z.0.iter().map(|zi| zi / zp).collect());
    }
    let e = p - 1.0;
    let scale = zp.powf(e);
    Point(
        z.0.iter()
            .map(|&zi| {
                if zi == 0.0 {
                    0.0
                } else {
                    zi.signum() * zi.abs().powf(e) / scale
                }
            })
            .collect(),
    )
}
