//! Seeded (hint, cost) sequence generators: the lower-bound constructions
//! plus a synthetic workbench adversary, and the explicit `l_q` comparator
//! certificates.
//!
//! Streams are driven by ChaCha8 seeded from the 64-bit config seed, one
//! generator per stream, with a fixed draw order per round; identical
//! configs therefore produce byte-identical streams on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{dot, dual_maximizer, norm_raw, CostVector, Point};

/// Dimension used by the synthetic generator (the other kinds fix their own
/// dimension; the config schema carries none).
pub const SYNTHETIC_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Orthogonal-hint random phase followed by perfect hints.
    FrontLoaded,
    /// One-dimensional costs in `{p-1, p}` with `p = B/T`; hints all 1.
    Bernoulli,
    /// Costs `(e_0 +- e_t)/2^(1/p)` in dimension `T+1`; hints `e_0`.
    LqOrthogonal,
    /// Planar costs `(e_1 +- e_2)/2^(1/p)`; hints `e_1`.
    LqPlanar,
    /// Unit-dual-norm random costs with alpha-correlated hints and random
    /// bad-hint flips.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub kind: AdversaryKind,
    /// Horizon.
    pub t: usize,
    /// Bad-hint budget (front_loaded, bernoulli).
    pub b: usize,
    /// Norm exponent of the ambient geometry.
    pub q: f64,
    /// Target correlation of good hints (synthetic).
    pub alpha: f64,
    /// Probability of a bad round (synthetic).
    pub bad_fraction: f64,
    pub seed: u64,
}

impl AdversaryConfig {
    pub fn new(kind: AdversaryKind, t: usize) -> Self {
        AdversaryConfig {
            kind,
            t,
            b: 0,
            q: 2.0,
            alpha: 0.5,
            bad_fraction: 0.0,
            seed: 0,
        }
    }

    /// Ambient dimension implied by the construction.
    pub fn dim(&self) -> usize {
        match self.kind {
            AdversaryKind::FrontLoaded | AdversaryKind::LqPlanar => 2,
            AdversaryKind::Bernoulli => 1,
            AdversaryKind::LqOrthogonal => self.t + 1,
            AdversaryKind::Synthetic => SYNTHETIC_DIM,
        }
    }

    pub fn dual_exponent(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.q.is_finite() || self.q < 2.0 {
            return Err(Error::Config(format!(
                "adversary q must be >= 2, got {}",
                self.q
            )));
        }
        if self.b > self.t {
            return Err(Error::Config(format!(
                "bad-hint budget B={} exceeds T={}",
                self.b, self.t
            )));
        }
        if !(0.0..=1.0).contains(&self.bad_fraction) {
            return Err(Error::Config(format!(
                "bad_fraction must lie in [0,1], got {}",
                self.bad_fraction
            )));
        }
        if self.kind == AdversaryKind::Synthetic
            && (self.alpha.is_nan() || self.alpha <= 0.0 || self.alpha > 1.0)
        {
            return Err(Error::Config(format!(
                "synthetic alpha must lie in (0,1] (hints cannot exceed correlation 1 with unit costs), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Hypothesis checks that the theorems assume but generation tolerates.
    pub fn hypothesis_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.kind == AdversaryKind::Bernoulli && 4 * self.b > self.t {
            w.push(format!(
                "bernoulli lower bound assumes B <= T/4 (B={}, T={})",
                self.b, self.t
            ));
        }
        w
    }

    /// Opens the seeded stream of (hint, cost) rounds.
    pub fn stream(&self) -> Result<AdversaryStream> {
        self.validate()?;
        Ok(AdversaryStream {
            cfg: *self,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            next_t: 1,
            sign_sum: 0,
        })
    }
}

/// Lazy per-round generator; rounds are produced in order `t = 1..=T`.
pub struct AdversaryStream {
    cfg: AdversaryConfig,
    rng: ChaCha8Rng,
    next_t: usize,
    /// front_loaded: running sum of the random first-phase signs.
    sign_sum: i64,
}

impl AdversaryStream {
    fn front_loaded(&mut self, t: usize) -> (Point, CostVector) {
        if t <= self.cfg.b {
            let sign = if self.rng.gen::<bool>() { 1.0 } else { -1.0 };
            self.sign_sum += sign as i64;
            (Point::basis(2, 1, 1.0), CostVector::basis(2, 0, sign))
        } else {
            // z = sum of first-phase costs lies on the e1 axis; z = 0 falls
            // back to e1
            let dir = if self.sign_sum == 0 {
                1.0
            } else {
                self.sign_sum.signum() as f64
            };
            (Point::basis(2, 0, dir), CostVector::basis(2, 0, dir))
        }
    }

    fn bernoulli(&mut self) -> (Point, CostVector) {
        let p = if self.cfg.t == 0 {
            0.0
        } else {
            self.cfg.b as f64 / self.cfg.t as f64
        };
        let c = if p > 0.0 && self.rng.gen::<f64>() < p {
            p - 1.0
        } else {
            p
        };
        (Point(vec![1.0]), CostVector(vec![c]))
    }

    fn lq_orthogonal(&mut self, t: usize) -> (Point, CostVector) {
        let dim = self.cfg.t + 1;
        let scale = (2.0f64).powf(-1.0 / self.cfg.dual_exponent());
        let sign = if self.rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mut c = vec![0.0; dim];
        c[0] = scale;
        c[t] = sign * scale;
        (Point::basis(dim, 0, 1.0), CostVector(c))
    }

    fn lq_planar(&mut self) -> (Point, CostVector) {
        let scale = (2.0f64).powf(-1.0 / self.cfg.dual_exponent());
        let sign = if self.rng.gen::<bool>() { 1.0 } else { -1.0 };
        (
            Point::basis(2, 0, 1.0),
            CostVector(vec![scale, sign * scale]),
        )
    }

    fn random_unit_dual(&mut self) -> CostVector {
        let p = self.cfg.dual_exponent();
        loop {
            let v: Vec<f64> = (0..SYNTHETIC_DIM)
                .map(|_| self.rng.gen_range(-1.0..1.0))
                .collect();
            let n = norm_raw(&v, p);
            if n > 1e-3 {
                return CostVector(v.iter().map(|x| x / n).collect());
            }
        }
    }

    fn synthetic(&mut self) -> (Point, CostVector) {
        let q = self.cfg.q;
        let c = self.random_unit_dual();
        let bad = self.cfg.bad_fraction > 0.0 && self.rng.gen::<f64>() < self.cfg.bad_fraction;
        let gamma = if bad {
            0.05 + 0.95 * self.rng.gen::<f64>()
        } else {
            self.cfg.alpha + (1.0 - self.cfg.alpha) * self.rng.gen::<f64>()
        };
        // dual maximizer m: <c, m> = ||c||_p = 1, ||m||_q = 1
        let m = dual_maximizer(&c, 1.0, self.cfg.dual_exponent());
        // noise with <c, n> = 0, scaled so the triangle inequality keeps
        // ||h||_q <= gamma + (1 - gamma) <= 1
        let v: Vec<f64> = (0..SYNTHETIC_DIM)
            .map(|_| self.rng.gen_range(-1.0..1.0))
            .collect();
        let cv = crate::spaces::dot_slices(&c.0, &v);
        let n: Vec<f64> = v.iter().zip(&m.0).map(|(vi, mi)| vi - cv * mi).collect();
        let nq = norm_raw(&n, q);
        let noise_scale = if nq < 1e-12 {
            0.0
        } else {
            (1.0 - gamma) * self.rng.gen::<f64>() / nq
        };
        let dir = if bad { -gamma } else { gamma };
        let h = Point(
            m.0.iter()
                .zip(&n)
                .map(|(mi, ni)| dir * mi + noise_scale * ni)
                .collect(),
        );
        debug_assert!(if bad {
            dot(&c, &h) < 0.0
        } else {
            dot(&c, &h) > 0.0
        });
        (h, c)
    }
}

impl Iterator for AdversaryStream {
    type Item = (Point, CostVector);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_t > self.cfg.t {
            return None;
        }
        let t = self.next_t;
        self.next_t += 1;
        Some(match self.cfg.kind {
            AdversaryKind::FrontLoaded => self.front_loaded(t),
            AdversaryKind::Bernoulli => self.bernoulli(),
            AdversaryKind::LqOrthogonal => self.lq_orthogonal(t),
            AdversaryKind::LqPlanar => self.lq_planar(),
            AdversaryKind::Synthetic => self.synthetic(),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = self.cfg.t + 1 - self.next_t;
        (rem, Some(rem))
    }
}

/// Comparator certificate for the orthogonal `l_q` construction: given the
/// sign sequence, returns `u = beta_0 e_0 + sum_t sigma_t T^(-1/(q-1)) e_t`
/// with `beta_0 = 1 - (3/2q) T^(-1/(q-1))`, plus the inner product with the
/// unnormalized cost sum `z = T e_0 + sum_t sigma_t e_t`, which equals
/// `T + (1 - 3/2q) T^(1 - 1/(q-1))`. Guarantees `||u||_q <= 1`.
pub fn lq_comparator_certificate(signs: &[f64], q: f64) -> Result<(Point, f64)> {
    if q.is_nan() || q <= 2.0 {
        return Err(Error::Domain(format!(
            "the certificate targets q > 2, got {q}"
        )));
    }
    if signs.is_empty() {
        return Err(Error::Domain("empty sign sequence".into()));
    }
    if signs.iter().any(|s| s.abs() != 1.0) {
        return Err(Error::Domain("signs must be +-1".into()));
    }
    let t = signs.len() as f64;
    let gamma = t.powf(-1.0 / (q - 1.0));
    let beta0 = 1.0 - 3.0 / (2.0 * q) * gamma;
    let mut u = Vec::with_capacity(signs.len() + 1);
    u.push(beta0);
    u.extend(signs.iter().map(|s| s * gamma));
    let value = t + (1.0 - 3.0 / (2.0 * q)) * t.powf(1.0 - 1.0 / (q - 1.0));
    Ok((Point(u), value))
}

/// Comparator certificate for the planar construction:
/// `u = (1 - (3/2q) T^(-q/(2(q-1)))) e_1 + sign(w) T^(-1/(2(q-1))) e_2`;
/// `w = 0` resolves the sign to +1. Feasible (`||u||_q <= 1`) for `q > 2`
/// and `T >= 4`.
pub fn lq_planar_certificate(w: f64, t: usize, q: f64) -> Result<Point> {
    if q.is_nan() || q <= 2.0 {
        return Err(Error::Domain(format!(
            "the certificate targets q > 2, got {q}"
        )));
    }
    if t == 0 {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    let tf = t as f64;
    let e1 = 1.0 - 3.0 / (2.0 * q) * tf.powf(-q / (2.0 * (q - 1.0)));
    let sign = if w == 0.0 { 1.0 } else { w.signum() };
    let e2 = sign * tf.powf(-1.0 / (2.0 * (q - 1.0)));
    Ok(Point(vec![e1, e2]))
}
