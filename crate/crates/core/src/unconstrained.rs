//! Unconstrained learning with hints: a parameter-free base learner, the
//! hint combiner `z_t = x_t - y_t h_t`, the explicit `f` regret bound, and
//! the relaxed bad-set audit.
//!
//! The base learner is a polar decomposition: a wealth-betting scalar
//! learner (Krichevsky-Trofimov betting fraction clipped to half the
//! wealth) for the magnitude multiplied by an adaptive gradient-descent
//! direction learner on the Euclidean unit ball. Wealth starts at the user
//! epsilon and can never go negative, so the regret against the origin is
//! at most epsilon by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::trace::Trace;
use crate::spaces::{dot, dot_slices, norm_raw, CostVector, Point};

/// Parameter-free learner over the whole space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamFreeState {
    epsilon: f64,
    /// Betting wealth; nonnegative at all times.
    wealth: f64,
    /// Direction iterate, kept inside the Euclidean unit ball.
    direction: Vec<f64>,
    /// Sum of past betting gains `-s_tau` (KT numerator).
    bet_gain_sum: f64,
    rounds: usize,
    /// Running sum of observed costs.
    grad_sum: Vec<f64>,
    /// Running sum of squared cost norms (the `C_T` accumulator).
    grad_sq_sum: f64,
    awaiting_update: bool,
}

impl ParamFreeState {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::Domain(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        Ok(ParamFreeState {
            epsilon,
            wealth: epsilon,
            direction: vec![0.0; dim],
            bet_gain_sum: 0.0,
            rounds: 0,
            grad_sum: vec![0.0; dim],
            grad_sq_sum: 0.0,
            awaiting_update: false,
        })
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// `C_T` observed so far.
    pub fn cost_sq_sum(&self) -> f64 {
        self.grad_sq_sum
    }

    /// KT betting fraction for the upcoming round, clipped to [0, 1/2].
    fn bet_fraction(&self) -> f64 {
        (self.bet_gain_sum / (self.rounds as f64 + 1.0)).clamp(0.0, 0.5)
    }

    fn raw_prediction(&self) -> Point {
        let y = self.bet_fraction() * self.wealth;
        Point(self.direction.iter().map(|d| y * d).collect())
    }

    /// Commits to this round's play (zero before any evidence arrives).
    pub fn predict(&mut self) -> Result<Point> {
        if self.awaiting_update {
            return Err(Error::Protocol(
                "predict called twice without an update".into(),
            ));
        }
        self.awaiting_update = true;
        Ok(self.raw_prediction())
    }

    /// Folds the revealed cost: settles the bet against the played point and
    /// advances the direction learner.
    pub fn update(&mut self, c: &CostVector) -> Result<()> {
        if !self.awaiting_update {
            return Err(Error::Protocol(
                "update called with no prediction pending".into(),
            ));
        }
        if c.dim() != self.direction.len() {
            return Err(Error::Domain("cost dimension mismatch".into()));
        }
        let l2sq: f64 = c.0.iter().map(|x| x * x).sum();
        // wealth nonnegativity needs |<c, d>| <= 1, i.e. unit costs
        if l2sq > (1.0 + crate::spaces::FEAS_TOL) * (1.0 + crate::spaces::FEAS_TOL) {
            return Err(Error::Domain("cost outside the unit ball".into()));
        }
        self.awaiting_update = false;

        // settle: s_t = <c, d_t> in [-1, 1] for unit dual costs
        let s = dot_slices(&c.0, &self.direction);
        let y = self.bet_fraction() * self.wealth;
        // wealth compounds exponentially on long well-hinted streams; cap it
        // below the f64 overflow threshold
        self.wealth = (self.wealth - s * y).min(1e300);
        self.bet_gain_sum += -s;
        self.rounds += 1;

        for (g, ci) in self.grad_sum.iter_mut().zip(&c.0) {
            *g += ci;
        }
        self.grad_sq_sum += l2sq;

        // adaptive projected gradient step on the direction
        if self.grad_sq_sum > 0.0 {
            let step = (2.0f64).sqrt() / self.grad_sq_sum.sqrt();
            for (d, ci) in self.direction.iter_mut().zip(&c.0) {
                *d -= step * ci;
            }
            let n = norm_raw(&self.direction, 2.0);
            if n > 1.0 {
                for d in &mut self.direction {
                    *d /= n;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct CombinerPending {
    hint: Point,
    x: Point,
    y: f64,
    z: Point,
}

/// One settled combiner round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombinerRound {
    /// Vector learner's play.
    pub x: Point,
    /// Scalar learner's play on the hint-profit stream.
    pub y: f64,
    /// Combined play `x - y h`.
    pub z: Point,
    /// `<c_t, h_t>`.
    pub corr: f64,
    /// `<c_t, z_t>`.
    pub loss: f64,
}

/// The black-box hint combiner: a vector base learner on the costs plus a
/// scalar base learner fed the losses `-<c_t, h_t>`.
#[derive(Debug, Clone)]
pub struct CombinerState {
    vector_learner: ParamFreeState,
    scalar_learner: ParamFreeState,
    pending: Option<CombinerPending>,
}

impl CombinerState {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        Ok(CombinerState {
            vector_learner: ParamFreeState::new(epsilon, dim)?,
            scalar_learner: ParamFreeState::new(epsilon, 1)?,
            pending: None,
        })
    }

    pub fn vector_learner(&self) -> &ParamFreeState {
        &self.vector_learner
    }

    pub fn scalar_learner(&self) -> &ParamFreeState {
        &self.scalar_learner
    }

    /// Plays `z_t = x_t - y_t h_t`.
    pub fn predict(&mut self, hint: Point) -> Result<Point> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "predict called with a hint already pending".into(),
            ));
        }
        if hint.dim() != self.vector_learner.dim() {
            return Err(Error::Domain("hint dimension mismatch".into()));
        }
        let x = self.vector_learner.predict()?;
        let y = self.scalar_learner.predict()?.0[0];
        let z = Point(
            x.0.iter()
                .zip(&hint.0)
                .map(|(xi, hi)| xi - y * hi)
                .collect(),
        );
        self.pending = Some(CombinerPending {
            hint,
            x,
            y,
            z: z.clone(),
        });
        Ok(z)
    }

    /// Settles both base learners; the scalar learner sees `-<c_t, h_t>`.
    pub fn update(&mut self, cost: &CostVector) -> Result<CombinerRound> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("update called with no hint pending".into()))?;
        let corr = dot(cost, &pending.hint);
        self.vector_learner.update(cost)?;
        self.scalar_learner.update(&CostVector(vec![-corr]))?;
        let loss = dot(cost, &pending.z);
        Ok(CombinerRound {
            x: pending.x,
            y: pending.y,
            z: pending.z,
            corr,
            loss,
        })
    }
}

/// The explicit parameter-free regret bound
///
/// ```text
/// f(||u||, C_T, eps) = eps
///   + 8 ||u|| log(8 ||u||^2 (1 + 4 C_T)^4.5 / eps^2 + 1)
///   + (4 ||u|| / sqrt(mu)) sqrt(C_T (2 + log(5 ||u||^2 (2 + 8 C_T)^9 / eps^2 + 1)))
/// ```
pub fn f_bound(u_norm: f64, c_t: f64, epsilon: f64, mu: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if u_norm < 0.0 || c_t < 0.0 || mu.is_nan() || mu <= 0.0 {
        return Err(Error::Domain(
            "f_bound needs u_norm >= 0, C_T >= 0, mu > 0".into(),
        ));
    }
    let e2 = epsilon * epsilon;
    let log_term = (8.0 * u_norm * u_norm * (1.0 + 4.0 * c_t).powf(4.5) / e2 + 1.0).ln();
    let inner = 5.0 * u_norm * u_norm * (2.0 + 8.0 * c_t).powi(9) / e2 + 1.0;
    let sqrt_term = (c_t * (2.0 + inner.ln())).sqrt();
    Ok(epsilon + 8.0 * u_norm * log_term + 4.0 * u_norm / mu.sqrt() * sqrt_term)
}

/// Combiner regret bound from the adding lemma:
/// `min( f + eps, inf_{0 <= y <= ||u||} { 2 f - y sum_t <c_t, h_t> } )`.
/// The infimum over the clamped interval is attained at an endpoint.
pub fn combiner_bound(u_norm: f64, c_t: f64, corr_sum: f64, epsilon: f64, mu: f64) -> Result<f64> {
    let f = f_bound(u_norm, c_t, epsilon, mu)?;
    let second = 2.0 * f - u_norm * corr_sum.max(0.0);
    Ok((f + epsilon).min(second))
}

/// Greedy minimum relaxed bad set from raw margins
/// `m_t = <c_t, h_t> - alpha ||c_t||^2`: removes indices in ascending margin
/// order (ties to the lowest index) until the remaining margin sum is
/// nonnegative. Greedy-on-most-negative attains the minimum size.
pub fn relaxed_bad_set_margins(margins: &[f64]) -> Vec<usize> {
    let total: f64 = margins.iter().sum();
    if total >= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..margins.len()).collect();
    order.sort_by(|&a, &b| margins[a].partial_cmp(&margins[b]).unwrap().then(a.cmp(&b)));
    let mut removed = Vec::new();
    let mut remaining = total;
    for idx in order {
        removed.push(idx);
        remaining -= margins[idx];
        if remaining >= 0.0 {
            break;
        }
    }
    removed.sort_unstable();
    removed
}

/// Relaxed bad set `B*_{T,alpha}` of a recorded run: the smallest set of
/// rounds whose removal leaves the hints alpha-correlated on average.
/// Returns 0-based indices into the trace.
pub fn relaxed_bad_set(trace: &Trace, alpha: f64) -> Result<Vec<usize>> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let margins: Vec<f64> = trace
        .rounds
        .iter()
        .map(|rec| {
            let n = trace.spec.dual_norm(&rec.cost);
            rec.corr() - alpha * n * n
        })
        .collect();
    Ok(relaxed_bad_set_margins(&margins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit_cost(rng: &mut ChaCha8Rng, dim: usize) -> CostVector {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm_raw(&v, 2.0);
            if n > 1e-3 {
                let scale = rng.gen_range(0.0..1.0) / n;
                return CostVector(v.iter().map(|x| x * scale).collect());
            }
        }
    }

    #[test]
    fn base_learner_starts_at_zero_and_stays_solvent() {
        let mut state = ParamFreeState::new(1.0, 3).unwrap();
        assert_eq!(state.predict().unwrap(), Point::zeros(3));
        state.update(&CostVector::zeros(3)).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..30u64 {
            let eps = 0.5 + (seed as f64) * 0.1;
            let mut state = ParamFreeState::new(eps, 3).unwrap();
            let mut total_loss = 0.0;
            let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..400 {
                let x = state.predict().unwrap();
                let c = random_unit_cost(&mut rng2, 3);
                total_loss += dot(&c, &x);
                state.update(&c).unwrap();
                assert!(state.wealth() >= 0.0);
                // wealth accounting: eps - total loss
                assert!(
                    (state.wealth() - (eps - total_loss)).abs() <= 1e-9 * (1.0 + state.wealth())
                );
            }
            // regret against u = 0
            assert!(total_loss <= eps + 1e-9);
            let _ = rng.gen::<u64>();
        }
    }

    #[test]
    fn base_learner_all_zero_costs() {
        let mut state = ParamFreeState::new(1.0, 2).unwrap();
        for _ in 0..50 {
            let x = state.predict().unwrap();
            assert_eq!(x, Point::zeros(2));
            state.update(&CostVector::zeros(2)).unwrap();
        }
        assert_eq!(state.wealth(), 1.0);
    }

    #[test]
    fn base_learner_exploits_constant_cost() {
        // constant cost e1: comparator -e1 earns -T; measured regret must
        // stay under f(1, T, eps)
        let t = 100;
        let mut state = ParamFreeState::new(1.0, 2).unwrap();
        let mut total_loss = 0.0;
        for _ in 0..t {
            let x = state.predict().unwrap();
            let c = CostVector::basis(2, 0, 1.0);
            total_loss += dot(&c, &x);
            state.update(&c).unwrap();
        }
        let regret = total_loss + t as f64; // u = -e1
        let cap = f_bound(1.0, t as f64, 1.0, 1.0).unwrap();
        assert!(regret <= cap, "regret {regret} vs f {cap}");
        assert!(total_loss <= 1.0 + 1e-9);
    }

    #[test]
    fn protocol_latch() {
        let mut state = ParamFreeState::new(1.0, 2).unwrap();
        assert!(state.update(&CostVector::zeros(2)).is_err());
        state.predict().unwrap();
        assert!(state.predict().is_err());
        state.update(&CostVector::zeros(2)).unwrap();
        assert!(state.predict().is_ok());
    }

    #[test]
    fn combiner_examples() {
        let mut comb = CombinerState::new(1.0, 2).unwrap();
        // y = 0 before any evidence: z = x = 0
        let z = comb.predict(Point::basis(2, 1, 1.0)).unwrap();
        assert_eq!(z, Point::zeros(2));
        let round = comb.update(&CostVector::basis(2, 0, 1.0)).unwrap();
        assert_eq!(round.y, 0.0);
        assert_eq!(round.z, round.x);

        // z = x - y h per round, e.g. x=(1,0), y=0.5, h=(0,1) -> (1,-0.5)
        let x = Point(vec![1.0, 0.0]);
        let h = Point(vec![0.0, 1.0]);
        let y = 0.5;
        let z: Vec<f64> = x.0.iter().zip(&h.0).map(|(xi, hi)| xi - y * hi).collect();
        assert_eq!(z, vec![1.0, -0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut comb = CombinerState::new(1.0, 2).unwrap();
        for _ in 0..100 {
            let h = Point(vec![rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)]);
            let z = comb.predict(h.clone()).unwrap();
            let c = random_unit_cost(&mut rng, 2);
            let round = comb.update(&c).unwrap();
            for i in 0..2 {
                assert!((z.0[i] - (round.x.0[i] - round.y * h.0[i])).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn combiner_decomposition_identity() {
        // regret(z) = regret(x) - sum_t y_t <c_t, h_t>, an arithmetic identity
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20u64 {
            let mut comb = CombinerState::new(1.0, 3).unwrap();
            let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
            let mut z_loss = 0.0;
            let mut x_loss = 0.0;
            let mut profit = 0.0;
            for _ in 0..200 {
                let h = {
                    let v: Vec<f64> = (0..3).map(|_| rng2.gen_range(-1.0..1.0)).collect();
                    let n = norm_raw(&v, 2.0).max(1.0);
                    Point(v.iter().map(|x| x / n).collect())
                };
                comb.predict(h).unwrap();
                let c = random_unit_cost(&mut rng2, 3);
                let round = comb.update(&c).unwrap();
                z_loss += round.loss;
                x_loss += dot(&c, &round.x);
                profit += round.y * round.corr;
            }
            // comparator-independent identity on the loss side
            assert!((z_loss - (x_loss - profit)).abs() <= 1e-9, "identity broke");
            let _ = rng.gen::<u64>();
        }
    }

    #[test]
    fn f_bound_examples() {
        // u = 0 collapses to epsilon
        assert_eq!(f_bound(0.0, 123.0, 0.25, 1.0).unwrap(), 0.25);
        // C_T = 0, u = 1, eps = 1, mu = 1 -> 1 + 8 log 9
        let v = f_bound(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((v - (1.0 + 8.0 * 9.0f64.ln())).abs() < 1e-12);
        assert!((v - 18.5778).abs() < 1e-3);
        // monotone in ||u||
        assert!(f_bound(2.0, 7.0, 1.0, 1.0).unwrap() > f_bound(1.0, 7.0, 1.0, 1.0).unwrap());
        assert!(f_bound(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(f_bound(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn combiner_bound_cases() {
        let f = f_bound(1.0, 10.0, 1.0, 1.0).unwrap();
        // negative total correlation: y = 0 endpoint
        let b = combiner_bound(1.0, 10.0, -3.0, 1.0, 1.0).unwrap();
        assert_eq!(b, (f + 1.0).min(2.0 * f));
        // strongly positive correlation: y = ||u|| endpoint wins
        let b = combiner_bound(1.0, 10.0, 1000.0, 1.0, 1.0).unwrap();
        assert!((b - (2.0 * f - 1000.0)).abs() < 1e-12);
        assert!(b < 0.0);
    }

    #[test]
    fn relaxed_bad_set_examples() {
        assert_eq!(relaxed_bad_set_margins(&[0.5, -0.2, -0.4]), vec![2]);
        assert_eq!(
            relaxed_bad_set_margins(&[0.1, 0.0, 3.0]),
            Vec::<usize>::new()
        );
        assert_eq!(relaxed_bad_set_margins(&[-0.1, -0.2]), vec![0, 1]);
        // tie-break: equal margins remove the lowest index first
        assert_eq!(relaxed_bad_set_margins(&[-0.3, -0.3, 0.5]), vec![0]);
    }

    #[test]
    fn base_learner_regret_has_f_shape() {
        // normalized regret ratio regret / (||u|| sqrt(C_T (1 + log(1 + T||u||/eps))))
        // stays under a fitted constant across seeds, cost regimes, and
        // comparator norms; the explicit f bound sits far above this
        let mut worst: f64 = 0.0;
        for seed in 0..40u64 {
            let eps = 1.0;
            let dim = 3;
            let t_total = 500usize;
            let mut state = ParamFreeState::new(eps, dim).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let regime = seed % 3;
            let fixed: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fixed_norm = norm_raw(&fixed, 2.0);
            let mut total_loss = 0.0;
            let mut c_t = 0.0;
            let mut zsum = vec![0.0; dim];
            for tt in 0..t_total {
                let x = state.predict().unwrap();
                let c = match regime {
                    // unit-ball random, constant direction, block-flipping
                    0 => {
                        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let n = norm_raw(&v, 2.0).max(1.0);
                        CostVector(v.iter().map(|a| a / n).collect())
                    }
                    1 => CostVector(fixed.iter().map(|a| a / fixed_norm).collect()),
                    _ => {
                        let flip = if tt % 40 < 20 { 1.0 } else { -1.0 };
                        CostVector(fixed.iter().map(|a| flip * a / fixed_norm).collect())
                    }
                };
                total_loss += dot(&c, &x);
                let n = norm_raw(&c.0, 2.0);
                c_t += n * n;
                for (z, ci) in zsum.iter_mut().zip(&c.0) {
                    *z += ci;
                }
                state.update(&c).unwrap();
            }
            assert!(total_loss <= eps + 1e-9);
            let zn = norm_raw(&zsum, 2.0);
            if zn < 1e-9 {
                continue;
            }
            for &u_norm in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let comparator_value: f64 = -u_norm * zn;
                let regret = total_loss - comparator_value;
                let denom =
                    u_norm * (c_t * (1.0 + (1.0 + t_total as f64 * u_norm / eps).ln())).sqrt();
                worst = worst.max(regret / denom);
            }
        }
        assert!(worst <= 3.0, "normalized regret ratio {worst}");
    }

    #[test]
    fn relaxed_bad_set_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let t = rng.gen_range(1..=16usize);
            let margins: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let greedy = relaxed_bad_set_margins(&margins).len();
            let mut best = t;
            for mask in 0..(1u32 << t) {
                let kept: f64 = (0..t)
                    .filter(|i| mask & (1 << i) == 0)
                    .map(|i| margins[i])
                    .sum();
                if kept >= 0.0 {
                    best = best.min(mask.count_ones() as usize);
                }
            }
            assert_eq!(greedy, best, "margins {margins:?}");
        }
    }
}
