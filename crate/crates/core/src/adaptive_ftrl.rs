//! Follow-the-regularized-leader over the unit ball with the
//! self-referential adaptive rate `lambda_t`.
//!
//! Every surrogate loss has the shape `<c, x> + (k/q) ||x||_q^q + const`,
//! so the FTRL objective folds into a single cost vector plus one norm-power
//! coefficient and the argmin is computed exactly by [`ball_argmin`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::trace::Trace;
use crate::spaces::{ball_argmin, norm_raw, power_sum, CostVector, Point, SpaceSpec};
use crate::surrogate::SurrogateLoss;

/// Which adaptive-rate equation the learner runs.
///
/// The two pseudocode variants disagree by a constant in the `lambda_t`
/// equation at q = 2 (`||c||^2` vs `(2^p/p) ||c||^p = 2 ||c||^2`); both are
/// kept and each regret bound is audited against its own variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// q = 2: `lambda_t = ||c_t||^2 / (sigma_{1:t} + mu lambda_{1:t})`,
    /// `lambda_0 = 1/mu`.
    MainQ2,
    /// General q >= 2:
    /// `lambda_t = (2^p/p) ||c_t||^p / (sigma_{1:t} + mu lambda_{1:t})^(p/q)`,
    /// `lambda_0 = 2 / (mu^(1/p) p^(1/p))`.
    GeneralQ,
}

impl Variant {
    /// The constant regularizer weight `lambda_0`.
    pub fn lambda0(&self, spec: &SpaceSpec) -> f64 {
        match self {
            Variant::MainQ2 => 1.0 / spec.mu,
            Variant::GeneralQ => 2.0 / (spec.mu.powf(1.0 / spec.p) * spec.p.powf(1.0 / spec.p)),
        }
    }

    /// Exponent `a` of the denominator in the fixed-point equation.
    pub fn exponent(&self, spec: &SpaceSpec) -> f64 {
        match self {
            Variant::MainQ2 => 1.0,
            Variant::GeneralQ => spec.p / spec.q,
        }
    }

    /// Numerator `G_t` of the fixed-point equation for a cost of dual norm
    /// `c_dual_norm`.
    pub fn numerator(&self, c_dual_norm: f64, spec: &SpaceSpec) -> f64 {
        match self {
            Variant::MainQ2 => c_dual_norm * c_dual_norm,
            Variant::GeneralQ => (2.0f64).powf(spec.p) / spec.p * c_dual_norm.powf(spec.p),
        }
    }
}

/// Solves `lambda = g / (sigma_cum + mu (lambda_cum_prev + lambda))^a` for
/// `lambda >= 0` by bisection; the left side is increasing and the right
/// side decreasing, so the root is unique. Residual at return is below
/// 1e-10.
pub fn solve_lambda_fixed_point(
    g: f64,
    a: f64,
    sigma_cum: f64,
    mu: f64,
    lambda_cum_prev: f64,
    bracket_hint: f64,
) -> f64 {
    if g == 0.0 {
        return 0.0;
    }
    let rhs = |lam: f64| g / (sigma_cum + mu * (lambda_cum_prev + lam)).powf(a);
    let mut lo = 0.0f64;
    let mut hi = bracket_hint.max(1e-12);
    for _ in 0..200 {
        if hi - rhs(hi) >= 0.0 {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let resid = mid - rhs(mid);
        if resid.abs() <= 1e-12 {
            return mid;
        }
        if resid > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the round-`t` rate equation. `sigma_cum` must already include the
/// current round's `sigma_t`; `lambda_cum_prev` is `lambda_{1:t-1}`.
///
/// The q = 2 variant is the positive root of
/// `mu lambda^2 + (sigma_{1:t} + mu lambda_{1:t-1}) lambda - ||c||^2 = 0`,
/// taken in closed form; the general variant bisects on `[0, lambda_0]`.
pub fn solve_lambda(
    c_dual_norm: f64,
    sigma_cum: f64,
    lambda_cum_prev: f64,
    spec: &SpaceSpec,
    variant: Variant,
) -> f64 {
    if c_dual_norm == 0.0 {
        return 0.0;
    }
    match variant {
        Variant::MainQ2 => {
            let b = sigma_cum + spec.mu * lambda_cum_prev;
            let csq = c_dual_norm * c_dual_norm;
            2.0 * csq / (b + (b * b + 4.0 * spec.mu * csq).sqrt())
        }
        Variant::GeneralQ => solve_lambda_fixed_point(
            variant.numerator(c_dual_norm, spec),
            variant.exponent(spec),
            sigma_cum,
            spec.mu,
            lambda_cum_prev,
            variant.lambda0(spec),
        ),
    }
}

/// Accumulated FTRL state: the linear part of `l_{1:t}`, the norm-power
/// coefficient contributed by the surrogates, and the running
/// `sigma` / `lambda` sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FtrlState {
    pub spec: SpaceSpec,
    pub variant: Variant,
    /// `sum_tau c_tau`.
    pub lin_sum: CostVector,
    /// `sum_tau |<c_tau, h_tau>| / r_tau` (coefficient of `||x||_q^q / q`).
    pub quad_coeff_sum: f64,
    /// `sigma_{1:t}`.
    pub sigma_sum: f64,
    /// `lambda_{1:t}`.
    pub lambda_sum: f64,
    pub lambda0: f64,
    /// Rounds folded in so far.
    pub round: usize,
}

impl FtrlState {
    pub fn new(spec: SpaceSpec, variant: Variant) -> Self {
        let lambda0 = variant.lambda0(&spec);
        FtrlState {
            spec,
            variant,
            lin_sum: CostVector::zeros(spec.dim),
            quad_coeff_sum: 0.0,
            sigma_sum: 0.0,
            lambda_sum: 0.0,
            lambda0,
            round: 0,
        }
    }

    /// The current prediction
    /// `argmin_{||x|| <= 1} l_{1:t}(x) + (lambda_{0:t}/q) ||x||_q^q`;
    /// the origin before any loss arrives.
    pub fn prediction(&self) -> Point {
        ball_argmin(
            &self.lin_sum,
            self.quad_coeff_sum + self.lambda0 + self.lambda_sum,
            &self.spec,
        )
    }

    /// Folds one surrogate loss and its solved rate, returning the next
    /// prediction.
    pub fn step(&mut self, loss: &SurrogateLoss, lambda_t: f64) -> Point {
        for (s, c) in self.lin_sum.0.iter_mut().zip(&loss.c.0) {
            *s += c;
        }
        self.quad_coeff_sum += loss.norm_power_coeff();
        self.sigma_sum += loss.sigma();
        self.lambda_sum += lambda_t;
        self.round += 1;
        self.prediction()
    }
}

/// Evaluates the adaptive-FTRL regret bound on a recorded run:
///
/// ```text
/// sum_{t=1}^{T-1} lambda_t ||u||_q^q
///   + (1/p) sum_{t=1}^T ||g_t||_p^p / (sigma_{1:t} + mu lambda_{0:t-1})^(p/q)
/// ```
///
/// with `g_t` the recorded subgradients at the inner predictions.
pub fn ftrl_bound(trace: &Trace, u: &Point) -> Result<f64> {
    let variant = trace.variant().ok_or_else(|| {
        Error::Trace("ftrl_bound needs a hinted-learner trace with lambda/sigma fields".into())
    })?;
    let spec = &trace.spec;
    let lambda0 = variant.lambda0(spec);
    let a = spec.p / spec.q;

    let u_term_weight = power_sum(&u.0, spec.q);
    let t_total = trace.len();
    let mut lambda_head = 0.0; // lambda_{1:T-1}
    let mut sigma_cum = 0.0;
    let mut lambda_prev_cum = 0.0; // lambda_{1:t-1}
    let mut grad_term = 0.0;
    for (i, rec) in trace.rounds.iter().enumerate() {
        sigma_cum += rec.sigma;
        let g_p = norm_raw(&rec.subgrad.0, spec.p);
        if g_p > 0.0 {
            let den = sigma_cum + spec.mu * (lambda0 + lambda_prev_cum);
            grad_term += g_p.powf(spec.p) / den.powf(a);
        }
        lambda_prev_cum += rec.lambda;
        if i + 1 < t_total {
            lambda_head += rec.lambda;
        }
    }
    Ok(lambda_head * u_term_weight + grad_term / spec.p)
}

/// `G_t / (sigma_{1:t} + mu lambda_{1:t})^a` with the 0/0 case resolved
/// to 0; shared by the rate equation audits.
pub fn rate_ratio(g: f64, den_base: f64, a: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g / den_base.powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trace::TraceKind;
    use crate::hinted_learner::HintedLearner;
    use crate::spaces::best_comparator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lambda_examples() {
        let spec = SpaceSpec::euclidean(2);
        // ||c|| = 1, empty history: lambda^2 = 1
        let l = solve_lambda(1.0, 0.0, 0.0, &spec, Variant::MainQ2);
        assert!((l - 1.0).abs() < 1e-12);
        // ||c||^2 = 4, sigma_{1:t} + mu lambda_{1:t-1} = 3: root of l^2+3l-4
        let l = solve_lambda(2.0, 3.0, 0.0, &spec, Variant::MainQ2);
        assert!((l - 1.0).abs() < 1e-12);
        assert_eq!(solve_lambda(0.0, 1.0, 2.0, &spec, Variant::MainQ2), 0.0);

        // q=3: root of lambda = (2^1.5/1.5)/(1+lambda)^0.5, frozen from a
        // bisection oracle
        let spec3 = SpaceSpec::new(3.0, 1.0, 2).unwrap();
        let l = solve_lambda(1.0, 1.0, 0.0, &spec3, Variant::GeneralQ);
        assert!((l - 1.2555352833377764).abs() < 1e-9, "got {l}");
    }

    #[test]
    fn lambda0_values() {
        let spec = SpaceSpec::euclidean(2);
        assert_eq!(Variant::MainQ2.lambda0(&spec), 1.0);
        // general-q constant at q = p = 2, mu = 1: 2/sqrt(2) = sqrt(2)
        assert!((Variant::GeneralQ.lambda0(&spec) - (2.0f64).sqrt()).abs() < 1e-15);
        let spec3 = SpaceSpec::new(3.0, 0.25, 2).unwrap();
        let p = spec3.p;
        let expect = 2.0 / (0.25f64.powf(1.0 / p) * p.powf(1.0 / p));
        assert_eq!(Variant::GeneralQ.lambda0(&spec3), expect);
    }

    #[test]
    fn lambda_residual_and_bisection_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let spec = SpaceSpec::euclidean(3);
        for _ in 0..2000 {
            let c: f64 = rng.gen_range(0.0..1.0);
            let sig: f64 = rng.gen_range(0.0..5.0);
            let prev: f64 = rng.gen_range(0.0..5.0);
            let closed = solve_lambda(c, sig, prev, &spec, Variant::MainQ2);
            // fixed-point residual
            let rhs = rate_ratio(c * c, sig + spec.mu * (prev + closed), 1.0);
            assert!(
                (closed - rhs).abs() <= 1e-10,
                "residual {}",
                (closed - rhs).abs()
            );
            // bisection on the same equation
            let bis = solve_lambda_fixed_point(c * c, 1.0, sig, spec.mu, prev, 1.0);
            assert!((closed - bis).abs() <= 1e-9);
        }
        // general-q residuals
        let spec4 = SpaceSpec::lq(4.0, 3).unwrap();
        for _ in 0..2000 {
            let c: f64 = rng.gen_range(0.0..1.0);
            let sig: f64 = rng.gen_range(0.0..5.0);
            let prev: f64 = rng.gen_range(0.0..5.0);
            let lam = solve_lambda(c, sig, prev, &spec4, Variant::GeneralQ);
            if c == 0.0 {
                assert_eq!(lam, 0.0);
                continue;
            }
            let g = Variant::GeneralQ.numerator(c, &spec4);
            let a = Variant::GeneralQ.exponent(&spec4);
            let rhs = rate_ratio(g, sig + spec4.mu * (prev + lam), a);
            assert!((lam - rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn ftrl_step_examples() {
        let spec = SpaceSpec::euclidean(2);
        let state = FtrlState::new(spec, Variant::MainQ2);
        assert_eq!(state.prediction(), Point::zeros(2));

        // one loss with c = h = e1, r = 1
        let mut state = FtrlState::new(spec, Variant::MainQ2);
        let loss = SurrogateLoss::new(
            Point::basis(2, 0, 1.0),
            CostVector::basis(2, 0, 1.0),
            1.0,
            spec,
        )
        .unwrap();
        let sigma1 = loss.sigma();
        let lambda1 = solve_lambda(1.0, sigma1, 0.0, &spec, Variant::MainQ2);
        let x2 = state.step(&loss, lambda1);
        let a = 1.0 + state.lambda0 + lambda1; // quad coeff 1/r = 1
        let expect = ball_argmin(&CostVector::basis(2, 0, 1.0), a, &spec);
        assert_eq!(x2, expect);
        assert!((x2.0[0] + 1.0 / a).abs() < 1e-12);
        // grid search over the disk confirms the composed objective minimum
        let objective = |x: &[f64]| x[0] + a / 2.0 * (x[0] * x[0] + x[1] * x[1]);
        let fx = objective(&x2.0);
        for i in 0..=200 {
            for j in 0..=200 {
                let r = i as f64 / 200.0;
                let th = j as f64 / 200.0 * std::f64::consts::TAU;
                assert!(fx <= objective(&[r * th.cos(), r * th.sin()]) + 1e-6);
            }
        }

        // zero costs keep the prediction at the origin
        let mut state = FtrlState::new(spec, Variant::MainQ2);
        for _ in 0..5 {
            let loss = SurrogateLoss::new(Point::basis(2, 0, 1.0), CostVector::zeros(2), 1.0, spec)
                .unwrap();
            let x = state.step(&loss, 0.0);
            assert_eq!(x, Point::zeros(2));
        }
    }

    fn synthetic_run(seed: u64, t: usize, q: f64, variant: Variant) -> Trace {
        use crate::adversaries::{AdversaryConfig, AdversaryKind};
        let mut cfg = AdversaryConfig::new(AdversaryKind::Synthetic, t);
        cfg.q = q;
        cfg.bad_fraction = 0.3;
        cfg.alpha = 0.4;
        cfg.seed = seed;
        let spec = SpaceSpec::lq(q, cfg.dim()).unwrap();
        let mut learner = HintedLearner::new(spec, variant).unwrap();
        learner.run(cfg.stream().unwrap()).unwrap()
    }

    #[test]
    fn ftrl_bound_examples() {
        let spec = SpaceSpec::euclidean(2);
        // all-zero costs: bound is 0
        let mut trace = Trace::new(
            TraceKind::Hinted {
                variant: Variant::MainQ2,
                eta: 1.0,
            },
            spec,
        );
        let mut learner = HintedLearner::new(spec, Variant::MainQ2).unwrap();
        for _ in 0..4 {
            let x = learner.predict(Point::basis(2, 0, 1.0)).unwrap();
            assert_eq!(x.0, vec![-0.5, 0.0]);
            trace
                .rounds
                .push(learner.update(CostVector::zeros(2)).unwrap());
        }
        assert_eq!(ftrl_bound(&trace, &Point::zeros(2)).unwrap(), 0.0);
        assert_eq!(ftrl_bound(&trace, &Point::basis(2, 0, 1.0)).unwrap(), 0.0);

        // single round, g1 = e1, sigma1 = 0, lambda0 = 1, u = 0 -> 1/2
        let mut trace = Trace::new(
            TraceKind::Hinted {
                variant: Variant::MainQ2,
                eta: 1.0,
            },
            spec,
        );
        let mut learner = HintedLearner::new(spec, Variant::MainQ2).unwrap();
        learner.predict(Point::zeros(2)).unwrap();
        trace
            .rounds
            .push(learner.update(CostVector::basis(2, 0, 1.0)).unwrap());
        let b0 = ftrl_bound(&trace, &Point::zeros(2)).unwrap();
        assert!((b0 - 0.5).abs() < 1e-12, "got {b0}");
        // scaling u from 0 to unit norm adds exactly lambda_{1:T-1} (empty here)
        let b1 = ftrl_bound(&trace, &Point::basis(2, 1, 1.0)).unwrap();
        assert!((b1 - b0).abs() < 1e-15);
    }

    #[test]
    fn ftrl_u_term_is_lambda_head() {
        let trace = synthetic_run(3, 40, 2.0, Variant::MainQ2);
        let b0 = ftrl_bound(&trace, &Point::zeros(trace.spec.dim)).unwrap();
        let b1 = ftrl_bound(&trace, &Point::basis(trace.spec.dim, 0, 1.0)).unwrap();
        let lambda_head: f64 = trace.rounds[..trace.len() - 1]
            .iter()
            .map(|r| r.lambda)
            .sum();
        assert!((b1 - b0 - lambda_head).abs() < 1e-9);
    }

    #[test]
    fn regret_domination_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for case in 0..24 {
            let (q, variant) = match case % 4 {
                0 => (2.0, Variant::MainQ2),
                1 => (2.0, Variant::GeneralQ),
                2 => (3.0, Variant::GeneralQ),
                _ => (4.0, Variant::GeneralQ),
            };
            let trace = synthetic_run(1000 + case as u64, 120, q, variant);
            let spec = trace.spec;
            let losses: Vec<SurrogateLoss> = trace
                .rounds
                .iter()
                .map(|rec| {
                    SurrogateLoss::new(rec.hint.clone(), rec.cost.clone(), rec.r, spec).unwrap()
                })
                .collect();
            let (best, _) = best_comparator(&trace.cum_cost(), &spec);
            let mut comparators = vec![Point::zeros(spec.dim), best];
            for _ in 0..20 {
                let v: Vec<f64> = (0..spec.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm_raw(&v, spec.q).max(1.0);
                let t: f64 = rng.gen_range(0.0..1.0);
                comparators.push(Point(v.iter().map(|x| x * t / n).collect()));
            }
            for u in &comparators {
                let lhs: f64 = trace
                    .rounds
                    .iter()
                    .zip(&losses)
                    .map(|(rec, l)| l.eval(&rec.xbar) - l.eval(u))
                    .sum();
                let rhs = ftrl_bound(&trace, u).unwrap();
                assert!(lhs <= rhs + 1e-6, "q={q} {variant:?}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn lambda_competitiveness_small_t() {
        // factor-2 optimality of the self-referential rate (grid of constant
        // alternatives)
        for seed in 0..20u64 {
            let trace = synthetic_run(seed, 10, 2.0, Variant::MainQ2);
            let spec = trace.spec;
            let stats = trace.round_stats();
            let a = Variant::MainQ2.exponent(&spec);
            let g: Vec<f64> = stats
                .iter()
                .map(|s| Variant::MainQ2.numerator(s.cost_dual_norm, &spec))
                .collect();
            let sig_cum: Vec<f64> = stats
                .iter()
                .scan(0.0, |acc, s| {
                    *acc += s.sigma;
                    Some(*acc)
                })
                .collect();
            let mut lam_cum = 0.0;
            let mut lhs = 0.0;
            for (i, s) in stats.iter().enumerate() {
                lam_cum += s.lambda;
                lhs += s.lambda + rate_ratio(g[i], sig_cum[i] + spec.mu * lam_cum, a);
                // lambda_t <= lambda_0 along the way
                assert!(s.lambda <= Variant::MainQ2.lambda0(&spec) + 1e-12);
            }
            let mut best = f64::INFINITY;
            for k in 0..=200 {
                let v = k as f64 * 0.01;
                let mut total = 0.0;
                for (i, _) in stats.iter().enumerate() {
                    total += v + rate_ratio(g[i], sig_cum[i] + spec.mu * v * (i + 1) as f64, a);
                }
                best = best.min(total);
            }
            assert!(lhs <= 2.0 * best + 1e-6, "seed {seed}: {lhs} > 2*{best}");
        }
    }
}
