//! The hint-shifted surrogate loss.
//!
//! Given a hint `h`, cost `c`, and confidence scale `r >= 1`, the surrogate
//!
//! ```text
//! l_{h,r,c}(x) = <c, x> + (|<c,h>| / (q r)) (||x||_q^q - 1)
//! ```
//!
//! under-estimates the linear loss on the ball, matches the loss of the
//! shifted point `x - delta_r(x) h` exactly when the hint is positively
//! correlated, and is strongly convex whenever `<c, h> != 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{dot, norm_raw, power_sum, CostVector, Point, SpaceSpec, FEAS_TOL};

/// Scale factor `delta_r(x) = (1 - ||x||_q^q) / (q r)`, in `[0, 1/(qr)]`.
///
/// Errors if `x` lies outside the ball beyond [`FEAS_TOL`] (a caller bug).
pub fn delta(x: &Point, r: f64, spec: &SpaceSpec) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::Domain(format!(
            "confidence scale r must be >= 1, got {r}"
        )));
    }
    let nq = norm_raw(&x.0, spec.q);
    if nq > 1.0 + FEAS_TOL {
        return Err(Error::Domain(format!(
            "delta called outside the ball: ||x||_q = {nq}"
        )));
    }
    Ok(((1.0 - power_sum(&x.0, spec.q)) / (spec.q * r)).max(0.0))
}

/// The hint-shift map `x = xbar - delta_r(xbar) h`; the result stays in the
/// ball for any `||xbar||_q <= 1`, `||h||_q <= 1`, `r >= 1`.
pub fn hint_shift(xbar: &Point, h: &Point, r: f64, spec: &SpaceSpec) -> Result<Point> {
    if norm_raw(&h.0, spec.q) > 1.0 + FEAS_TOL {
        return Err(Error::Domain("hint outside the unit ball".into()));
    }
    let d = delta(xbar, r, spec)?;
    Ok(Point(
        xbar.0
            .iter()
            .zip(&h.0)
            .map(|(xi, hi)| xi - d * hi)
            .collect(),
    ))
}

/// The surrogate loss `l_{h,r,c}` together with the space it lives in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateLoss {
    pub h: Point,
    pub c: CostVector,
    pub r: f64,
    pub spec: SpaceSpec,
}

impl SurrogateLoss {
    pub fn new(h: Point, c: CostVector, r: f64, spec: SpaceSpec) -> Result<Self> {
        if r < 1.0 {
            return Err(Error::Domain(format!(
                "confidence scale r must be >= 1, got {r}"
            )));
        }
        if norm_raw(&h.0, spec.q) > 1.0 + FEAS_TOL {
            return Err(Error::Domain("hint outside the unit q-ball".into()));
        }
        if norm_raw(&c.0, spec.p) > 1.0 + FEAS_TOL {
            return Err(Error::Domain("cost outside the unit dual p-ball".into()));
        }
        Ok(SurrogateLoss { h, c, r, spec })
    }

    /// `<c, h>`.
    pub fn corr(&self) -> f64 {
        dot(&self.c, &self.h)
    }

    /// Coefficient of `||x||_q^q / q` in the loss: `|<c,h>| / r`.
    pub fn norm_power_coeff(&self) -> f64 {
        self.corr().abs() / self.r
    }

    /// Strong-convexity modulus `sigma = |<c,h>| mu / r`.
    pub fn sigma(&self) -> f64 {
        self.norm_power_coeff() * self.spec.mu
    }

    /// `l(x) = <c, x> + (|<c,h>|/(q r)) (||x||_q^q - 1)`.
    pub fn eval(&self, x: &Point) -> f64 {
        let k = self.norm_power_coeff() / self.spec.q;
        dot(&self.c, x) + k * (power_sum(&x.0, self.spec.q) - 1.0)
    }

    /// A subgradient at `x`: `c + (|<c,h>|/r) w` with
    /// `w_i = |x_i|^(q-1) sign(x_i)` (taken as 0 at `x_i = 0`).
    pub fn subgradient(&self, x: &Point) -> CostVector {
        let k = self.norm_power_coeff();
        let e = self.spec.q - 1.0;
        CostVector(
            self.c
                .0
                .iter()
                .zip(&x.0)
                .map(|(ci, &xi)| {
                    if xi == 0.0 || k == 0.0 {
                        *ci
                    } else {
                        ci + k * xi.signum() * xi.abs().powf(e)
                    }
                })
                .collect(),
        )
    }
}
