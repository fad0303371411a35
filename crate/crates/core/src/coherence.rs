//! Probe-spin coherence L(theta): the normalized partition function at
//! complex field. At h = 0,
//!
//!   L(theta) = sum_n w_n e^{i (N/2 - n) theta} / sum_n w_n,
//!
//! with w_n = p_n z^n the field-weighted polynomial coefficients. The f64
//! path carries a rounding-error bound; sign queries that fall inside it
//! escalate to the extended-precision evaluator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{build_polynomial, IsingParams};
use crate::mp::{MpCoherence, SignEval};

/// Default samples per period for generated traces.
pub const DEFAULT_TRACE_SAMPLES: usize = 2048;

/// Sampled coherence over a time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceTrace {
    /// Sample times in seconds.
    pub times: Vec<f64>,
    /// Angles theta = lambda * t, radians.
    pub angles: Vec<f64>,
    /// Complex coherence at each sample.
    #[serde(with = "complex_vec")]
    pub values: Vec<Complex64>,
    pub params: IsingParams,
}

mod complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, f64)> = v.iter().map(|c| (c.re, c.im)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<(f64, f64)>::deserialize(d)?;
        Ok(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
    }
}

impl CoherenceTrace {
    /// CSV with columns (t, theta, re_L, im_L).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta", "re_L", "im_L"])?;
        for i in 0..self.times.len() {
            w.write_record([
                self.times[i].to_string(),
                self.angles[i].to_string(),
                self.values[i].re.to_string(),
                self.values[i].im.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shared evaluation core: normalized weights and error accounting.
pub(crate) struct Evaluator {
    n: usize,
    beta_j: f64,
    beta_h: f64,
    /// m_n = N/2 - n for n = 0..=N.
    m: Vec<f64>,
    /// exp(log w_n - max log w), all in (0, 1].
    w: Vec<f64>,
    sum_w: f64,
    /// Absolute rounding-error bound on Re L in coherence units.
    err_abs: f64,
    mp: std::sync::OnceLock<MpCoherence>,
}

impl Evaluator {
    pub(crate) fn new(params: &IsingParams) -> Result<Self> {
        let poly = build_polynomial(params)?;
        let n = params.n_spins;
        let beta_h = params.beta_h();
        let logs: Vec<f64> = poly
            .log_coeffs
            .iter()
            .enumerate()
            .map(|(k, &lp)| lp - beta_h * k as f64)
            .collect();
        let max_log = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let max_mag = logs.iter().map(|l| l.abs()).fold(0.0f64, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - max_log).exp()).collect();
        let sum_w: f64 = w.iter().sum();
        let err_abs = f64::EPSILON * (2.0 * max_mag + n as f64 + 8.0) * 4.0;
        Ok(Self {
            n,
            beta_j: params.beta_j(),
            beta_h,
            m: (0..=n).map(|k| n as f64 / 2.0 - k as f64).collect(),
            w,
            sum_w,
            err_abs,
            mp: std::sync::OnceLock::new(),
        })
    }

    pub(crate) fn coherence(&self, theta: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (&wi, &mi) in self.w.iter().zip(&self.m) {
            let (s, c) = (mi * theta).sin_cos();
            re += wi * c;
            im += wi * s;
        }
        Complex64::new(re / self.sum_w, im / self.sum_w)
    }

    /// Magnitudes of dL/dtheta below this bound are indistinguishable from
    /// an exactly flat zero in f64.
    pub(crate) fn sensitivity_floor(&self) -> f64 {
        self.err_abs * (self.n as f64 / 2.0 + 1.0)
    }

    /// Term-by-term derivative dL/dtheta = i sum_n w_n m_n e^{i m_n theta} / sum_w.
    pub(crate) fn sensitivity(&self, theta: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (&wi, &mi) in self.w.iter().zip(&self.m) {
            let (s, c) = (mi * theta).sin_cos();
            re -= wi * mi * s;
            im += wi * mi * c;
        }
        Complex64::new(re / self.sum_w, im / self.sum_w)
    }

    pub(crate) fn re_l(&self, theta: f64) -> f64 {
        let mut re = 0.0;
        for (&wi, &mi) in self.w.iter().zip(&self.m) {
            re += wi * (mi * theta).cos();
        }
        re / self.sum_w
    }

    /// Reliable sign of Re L together with a log2-magnitude estimate used by
    /// the zero finders to rank how suspicious an interval is. Requires h = 0
    /// for the extended-precision fallback.
    pub(crate) fn sign_re_l(&self, theta: f64) -> (SignEval, f64) {
        let v = self.re_l(theta);
        if v.abs() > self.err_abs {
            let s = if v > 0.0 {
                SignEval::Positive
            } else {
                SignEval::Negative
            };
            return (s, v.abs().log2());
        }
        debug_assert_eq!(self.beta_h, 0.0, "mp fallback is a zero-field path");
        let mp = self
            .mp
            .get_or_init(|| MpCoherence::new(self.n, self.beta_j));
        mp.eval_adaptive(theta)
    }

}

/// L(theta) for arbitrary real theta and any valid parameters.
pub fn coherence_at(params: &IsingParams, theta: f64) -> Result<Complex64> {
    if !theta.is_finite() {
        return Err(Error::InvalidInput("theta must be finite".into()));
    }
    Ok(Evaluator::new(params)?.coherence(theta))
}

/// dL/dtheta, analytic term-by-term derivative.
pub fn coherence_sensitivity(params: &IsingParams, theta: f64) -> Result<Complex64> {
    if !theta.is_finite() {
        return Err(Error::InvalidInput("theta must be finite".into()));
    }
    Ok(Evaluator::new(params)?.sensitivity(theta))
}

/// Uniform trace of L over [t_start, t_end] with n_samples points, endpoints
/// included. One full period is [0, 2 pi / lambda].
pub fn coherence_trace(
    params: &IsingParams,
    t_start: f64,
    t_end: f64,
    n_samples: usize,
) -> Result<CoherenceTrace> {
    if !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidInput("trace bounds must be finite".into()));
    }
    if t_end <= t_start {
        return Err(Error::InvalidInput("t_end must exceed t_start".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let ev = Evaluator::new(params)?;
    let lambda = params.probe_coupling;
    let dt = (t_end - t_start) / (n_samples - 1) as f64;
    let times: Vec<f64> = (0..n_samples).map(|i| t_start + i as f64 * dt).collect();
    let angles: Vec<f64> = times.iter().map(|&t| lambda * t).collect();
    let values: Vec<Complex64> = angles.iter().map(|&a| ev.coherence(a)).collect();
    Ok(CoherenceTrace {
        times,
        angles,
        values,
        params: params.clone(),
    })
}
