//! Standalone numeric checkers for the technical summation lemmas the
//! regret proofs lean on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LEMMA_TOL: f64 = 1e-9;

/// Outcome of a lemma fuzz run; `violations` counts samples whose left-hand
/// side exceeded the right by more than 1e-9.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaFuzzReport {
    pub samples: usize,
    pub max_violation_sum_formula: f64,
    pub max_violation_poly_sum: f64,
    pub max_violation_opt_lambda: f64,
    pub violations: usize,
}

impl LemmaFuzzReport {
    pub fn max_violation(&self) -> f64 {
        self.max_violation_sum_formula
            .max(self.max_violation_poly_sum)
            .max(self.max_violation_opt_lambda)
    }
}

/// `sum_t a_t h(a_{0:t}) <= integral_{a_0}^{a_{0:T}} h(z) dz` for
/// non-increasing integrable `h`; sampled over three function families with
/// closed-form antiderivatives.
fn sum_formula_violation(rng: &mut ChaCha8Rng) -> f64 {
    let t = rng.gen_range(1..=12usize);
    let family = rng.gen_range(0..3u8);
    let a0 = match family {
        0 => rng.gen_range(0.05..2.0), // h(z) = 1/z needs a positive start
        _ => rng.gen_range(0.0..2.0),
    };
    let a: Vec<f64> = (0..t)
        .map(|_| {
            if rng.gen::<f64>() < 0.2 {
                0.0
            } else {
                rng.gen_range(0.0..2.0)
            }
        })
        .collect();
    let s = rng.gen_range(0.1..0.95);
    let h = |z: f64| -> f64 {
        match family {
            0 => 1.0 / z,
            1 => z.powf(-s),
            _ => 1.0 / (1.0 + z * z),
        }
    };
    let antiderivative = |z: f64| -> f64 {
        match family {
            0 => z.ln(),
            1 => z.powf(1.0 - s) / (1.0 - s),
            _ => z.atan(),
        }
    };
    let mut cum = a0;
    let mut lhs = 0.0;
    for &at in &a {
        cum += at;
        if at > 0.0 {
            lhs += at * h(cum);
        }
    }
    let rhs = antiderivative(cum) - antiderivative(a0);
    lhs - rhs
}

/// `sum_t a_t / (a_{1:t})^(1/p) <= q (a_{1:T})^(1/q)`.
fn poly_sum_violation(rng: &mut ChaCha8Rng) -> f64 {
    let t = rng.gen_range(1..=12usize);
    let p = rng.gen_range(1.05..4.0);
    let q = p / (p - 1.0);
    let a: Vec<f64> = (0..t)
        .map(|_| {
            if rng.gen::<f64>() < 0.2 {
                0.0
            } else {
                rng.gen_range(0.0..3.0)
            }
        })
        .collect();
    let mut cum = 0.0;
    let mut lhs = 0.0;
    for &at in &a {
        cum += at;
        if at > 0.0 {
            lhs += at / cum.powf(1.0 / p);
        }
    }
    lhs - q * cum.powf(1.0 / q)
}

/// `inf_{lambda >= z} A lambda + B / lambda^(p/q) <= A z + 2 A^(1/q) B^(1/p)`.
/// The infimum is approximated from above by a dense grid plus the proof's
/// candidate `z + (pB/(qA))^(1/p)`, so the check direction stays valid.
fn opt_lambda_violation(rng: &mut ChaCha8Rng) -> f64 {
    let a = rng.gen_range(0.01..5.0);
    let b = rng.gen_range(0.01..5.0);
    let z = rng.gen_range(0.001..3.0);
    let p = rng.gen_range(1.05..4.0);
    let q = p / (p - 1.0);
    let g = |lam: f64| a * lam + b / lam.powf(p / q);
    let candidate = z + (p * b / (q * a)).powf(1.0 / p);
    let mut inf = g(candidate);
    let span = 4.0 * (candidate - z).max(1.0);
    for k in 0..=2000 {
        let lam = z + span * k as f64 / 2000.0;
        if lam > 0.0 {
            inf = inf.min(g(lam));
        }
    }
    inf - (a * z + 2.0 * a.powf(1.0 / q) * b.powf(1.0 / p))
}

/// Fuzzes all three lemmas `samples` times each and reports the worst
/// violation observed.
pub fn check_math_lemmas(samples: usize, seed: u64) -> Result<LemmaFuzzReport> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaFuzzReport {
        samples,
        max_violation_sum_formula: f64::NEG_INFINITY,
        max_violation_poly_sum: f64::NEG_INFINITY,
        max_violation_opt_lambda: f64::NEG_INFINITY,
        violations: 0,
    };
    for _ in 0..samples {
        let v1 = sum_formula_violation(&mut rng);
        let v2 = poly_sum_violation(&mut rng);
        let v3 = opt_lambda_violation(&mut rng);
        report.max_violation_sum_formula = report.max_violation_sum_formula.max(v1);
        report.max_violation_poly_sum = report.max_violation_poly_sum.max(v2);
        report.max_violation_opt_lambda = report.max_violation_opt_lambda.max(v3);
        report.violations += [v1, v2, v3].iter().filter(|&&v| v > LEMMA_TOL).count();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        // a = (1,1,1,1), h(z) = 1/z, a0 = 1: 1/2+1/3+1/4+1/5 <= log 5
        let lhs: f64 = 0.5 + 1.0 / 3.0 + 0.25 + 0.2;
        let rhs = 5.0f64.ln();
        assert!((lhs - 1.2833).abs() < 1e-4);
        assert!((rhs - 1.6094).abs() < 1e-4);
        assert!(lhs <= rhs);

        // polysum with a = (4,0,0), q = 2: LHS = 2 <= 2 sqrt(4) = 4
        let a = [4.0, 0.0, 0.0];
        let mut cum = 0.0f64;
        let mut s = 0.0f64;
        for x in a {
            cum += x;
            if x > 0.0 {
                s += x / cum.sqrt();
            }
        }
        assert_eq!(s, 2.0);
        assert!(s <= 2.0 * cum.sqrt());

        // optlambda equality case at A = B = 1, z -> 0, p = q = 2
        let g = |l: f64| l + 1.0 / l;
        let mut inf = f64::INFINITY;
        for k in 1..=4000 {
            inf = inf.min(g(k as f64 * 0.001));
        }
        assert!((inf - 2.0).abs() < 1e-5);
    }

    #[test]
    fn fuzz_reports_no_violations() {
        let report = check_math_lemmas(10_000, 99).unwrap();
        assert_eq!(
            report.violations,
            0,
            "max violation {}",
            report.max_violation()
        );
        assert!(report.max_violation() <= LEMMA_TOL);
        assert!(check_math_lemmas(0, 1).is_err());
    }
}
