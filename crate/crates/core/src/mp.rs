//! Extended-precision evaluation of the coherence sign on the unit circle.
//!
//! In the disordered phase at large bath size the coherence near its first
//! zero can be exponentially small (below 1e-300 for N = 500 well above the
//! transition), far outside what f64 cancellation can resolve. The zero
//! finders fall back to this module whenever the f64 value of Re L is within
//! its rounding-error bound. Weights are rebuilt here from an exact product
//! recurrence rather than from f64 logarithms, which would poison the
//! coefficients at relative 1e-16.

use std::collections::HashMap;
use std::sync::Mutex;

use astro_float::{BigFloat, Consts, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision ladder in bits for adaptive escalation.
pub(crate) const PRECISION_LADDER: [usize; 6] = [192, 384, 768, 1536, 3072, 6144];

/// Sign of a reliably evaluated quantity, or `Unresolved` when the value is
/// indistinguishable from zero at the highest precision tried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SignEval {
    Negative,
    Positive,
    /// Magnitude below the precision floor; for bisection this means the
    /// query point sits on the root to far better than the target tolerance.
    Unresolved,
}

impl SignEval {
    pub(crate) fn flips(self, other: SignEval) -> bool {
        matches!(
            (self, other),
            (SignEval::Negative, SignEval::Positive) | (SignEval::Positive, SignEval::Negative)
        )
    }
}

struct Weights {
    w: Vec<BigFloat>,
    sum: BigFloat,
}

/// Evaluates sign(Re L(theta)) at h = 0 for one (N, beta*J) pair, caching
/// the weight vector per precision level.
pub(crate) struct MpCoherence {
    n: usize,
    beta_j: f64,
    cache: Mutex<HashMap<usize, Weights>>,
    consts: Mutex<Consts>,
}

impl MpCoherence {
    pub(crate) fn new(n: usize, beta_j: f64) -> Self {
        Self {
            n,
            beta_j,
            cache: Mutex::new(HashMap::new()),
            consts: Mutex::new(Consts::new().expect("constants cache")),
        }
    }

    /// w_{n+1} = w_n * (N - n)/(n + 1) * q^{2n + 1 - N},  q = exp(beta J / 2).
    fn build_weights(&self, p: usize) -> Weights {
        let n = self.n;
        let mut cc = self.consts.lock().unwrap();
        let one = BigFloat::from_f64(1.0, p);
        let half_bj = BigFloat::from_f64(self.beta_j, p).mul(&BigFloat::from_f64(0.5, p), p, RM);
        let q = half_bj.exp(p, RM, &mut cc);
        let q_sq = q.mul(&q, p, RM);
        // r starts at q^{1 - N}
        let r0 = if n >= 1 {
            one.div(&q.powi(n - 1, p, RM), p, RM)
        } else {
            one.clone()
        };
        let mut w = Vec::with_capacity(n + 1);
        w.push(one.clone());
        let mut r = r0;
        for k in 0..n {
            let ratio = BigFloat::from_f64((n - k) as f64, p)
                .div(&BigFloat::from_f64((k + 1) as f64, p), p, RM);
            let next = w[k].mul(&ratio, p, RM).mul(&r, p, RM);
            w.push(next);
            r = r.mul(&q_sq, p, RM);
        }
        let mut sum = BigFloat::from_f64(0.0, p);
        for wi in &w {
            sum = sum.add(wi, p, RM);
        }
        Weights { w, sum }
    }

    /// Sign of Re L(theta) and its log2 magnitude evaluated at `p` bits, or
    /// None when the result is below the rounding-error floor at this
    /// precision.
    pub(crate) fn eval_at(&self, theta: f64, p: usize) -> Option<(SignEval, f64)> {
        let mut cache = self.cache.lock().unwrap();
        let weights = cache.entry(p).or_insert_with(|| self.build_weights(p));

        let mut cc = self.consts.lock().unwrap();
        let th = BigFloat::from_f64(theta, p);
        let cos_t = th.cos(p, RM, &mut cc);
        let sin_t = th.sin(p, RM, &mut cc);
        // Horner over zeta = e^{-i theta}.
        let (zr, zi) = (cos_t, sin_t.neg());
        let mut re = BigFloat::from_f64(0.0, p);
        let mut im = BigFloat::from_f64(0.0, p);
        for wn in weights.w.iter().rev() {
            let nre = re.mul(&zr, p, RM).sub(&im.mul(&zi, p, RM), p, RM).add(wn, p, RM);
            let nim = re.mul(&zi, p, RM).add(&im.mul(&zr, p, RM), p, RM);
            re = nre;
            im = nim;
        }
        // Rotate by e^{i N theta / 2} and keep the real part.
        let phase = th.mul(&BigFloat::from_f64(self.n as f64 / 2.0, p), p, RM);
        let cos_p = phase.cos(p, RM, &mut cc);
        let sin_p = phase.sin(p, RM, &mut cc);
        let value = re.mul(&cos_p, p, RM).sub(&im.mul(&sin_p, p, RM), p, RM);

        // All intermediates are bounded by sum(w); correctly rounded ops give
        // an absolute error below sum(w) * c * N * 2^-p.
        let guard = (usize::BITS - self.n.leading_zeros()) as i64 + 8;
        let sum_exp = weights.sum.exponent()? as i64;
        let floor_exp = sum_exp - p as i64 + guard;
        if value.is_zero() || (value.exponent()? as i64) <= floor_exp {
            return None;
        }
        // log2 |L| up to one unit; enough for ranking suspicious intervals.
        let log2_mag = (value.exponent()? as i64 - sum_exp) as f64;
        match value.sign()? {
            astro_float::Sign::Neg => Some((SignEval::Negative, log2_mag)),
            astro_float::Sign::Pos => Some((SignEval::Positive, log2_mag)),
        }
    }

    /// Adaptive query walking up the precision ladder. An `Unresolved` result
    /// means the coherence is zero to better than 2^-6144 at this angle.
    pub(crate) fn eval_adaptive(&self, theta: f64) -> (SignEval, f64) {
        for &p in PRECISION_LADDER.iter() {
            if let Some(r) = self.eval_at(theta, p) {
                return r;
            }
        }
        (SignEval::Unresolved, f64::NEG_INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_f64_cosine_power_at_beta_zero() {
        // beta J = 0: L = cos^9(theta/2); check sign on both sides of pi.
        let mp = MpCoherence::new(9, 0.0);
        assert_eq!(mp.eval_adaptive(3.0).0, SignEval::Positive);
        assert_eq!(mp.eval_adaptive(3.3).0, SignEval::Negative);
        assert_eq!(mp.eval_adaptive(1.0).0, SignEval::Positive);
    }

    #[test]
    fn resolves_deep_subnormal_values() {
        // N = 500 far above the transition: |L| near theta = 2.8 is ~1e-700,
        // hopeless for f64 but a definite sign at a few hundred bits.
        let mp = MpCoherence::new(500, 1.0 / (0.6 * 500.0));
        let (s, mag) = mp.eval_adaptive(2.8);
        assert_ne!(s, SignEval::Unresolved);
        assert!(mag < -100.0, "expected a deeply suppressed value, got 2^{mag}");
    }

    #[test]
    fn first_zero_bracket_n500_supercritical() {
        // Frozen from an independent high-precision scan: first zero at
        // T/(NJ) = 0.6 sits at theta = 0.79490254.
        let mp = MpCoherence::new(500, 1.0 / (0.6 * 500.0));
        assert_eq!(mp.eval_adaptive(0.794).0, SignEval::Positive);
        assert_eq!(mp.eval_adaptive(0.796).0, SignEval::Negative);
    }
}
