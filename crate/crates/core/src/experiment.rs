//! Simulation of the measurement chain: magnetization-sector ensemble
//! weights, state-preparation deviations, multiplicative T2* decay, and
//! per-sample Gaussian measurement noise, plus recovery of the zeros with
//! uncertainties from the synthetic signal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coherence::Evaluator;
use crate::error::{Error, Result};
use crate::ising::IsingParams;
use crate::numeric::{eval_cubic, fit_cubic, ln_binomial, ln_factorials};
use crate::zeros::ZeroSet;

/// Default half-width, in samples, of the local cubic fitted around each
/// sign change during zero extraction.
pub const DEFAULT_FIT_WINDOW: usize = 7;

/// Normalized weights of the magnetization sectors m = -N/2 .. N/2:
/// w(m) = C(N, N/2 - m) c_m / A with c_m = exp(beta J m^2 / 2) z^{-m}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleWeights {
    /// 2m for each sector, ascending from -N to N in steps of 2.
    pub two_m: Vec<i64>,
    /// Normalized probabilities, summing to one.
    pub weights: Vec<f64>,
    pub params: IsingParams,
}

impl EnsembleWeights {
    /// Weight of the sector with magnetization m = two_m / 2.
    pub fn weight(&self, two_m: i64) -> Option<f64> {
        self.two_m
            .iter()
            .position(|&t| t == two_m)
            .map(|i| self.weights[i])
    }

    /// The ideal coherence sum_m w_m e^{-i m theta}.
    pub fn coherence(&self, theta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&tm, &w) in self.two_m.iter().zip(&self.weights) {
            let m = tm as f64 / 2.0;
            let (s, c) = (m * theta).sin_cos();
            acc += w * Complex64::new(c, -s);
        }
        acc
    }
}

/// Sector weights in log space, then normalized.
pub fn ensemble_weights(params: &IsingParams) -> Result<EnsembleWeights> {
    let n = params.n_spins;
    let beta_j = params.beta_j();
    let beta_h = params.beta_h();
    if !beta_j.is_finite() {
        return Err(Error::InvalidInput("beta*J must be finite".into()));
    }
    let table = ln_factorials(n);
    let mut two_m = Vec::with_capacity(n + 1);
    let mut logs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let tm = -(n as i64) + 2 * k as i64;
        let m = tm as f64 / 2.0;
        // C(N, N/2 - m) with N/2 - m = n - k.
        logs.push(ln_binomial(&table, n, n - k) + beta_j * m * m / 2.0 + beta_h * m);
        two_m.push(tm);
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(EnsembleWeights {
        two_m,
        weights: unnorm.iter().map(|w| w / total).collect(),
        params: params.clone(),
    })
}

/// One state-preparation deviation entry, keyed by 2m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub two_m: i64,
    pub dx: f64,
    pub dy: f64,
}

/// Measurement imperfection model: per-sector deviations, decay time, and
/// per-sample Gaussian noise. A missing `t2_star_s` field means no decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Transverse decay time in seconds; infinity disables the envelope.
    #[serde(default = "infinite_t2", skip_serializing_if = "is_infinite")]
    pub t2_star_s: f64,
    /// Standard deviation of the per-sample Gaussian measurement noise.
    pub eta: f64,
    /// RNG seed; identical seeds reproduce traces bit for bit.
    #[serde(default)]
    pub seed: u64,
    pub delta: Vec<DeltaEntry>,
}

fn infinite_t2() -> f64 {
    f64::INFINITY
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_infinite(v: &f64) -> bool {
    v.is_infinite()
}

/// Fitted noise models shipped with the crate, one per effective temperature
/// of the reference experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoisePreset {
    /// Infinite effective temperature: T2* = 0.65 s, eta = 0.0005.
    InfiniteTemperature,
    /// T = 15J/8: T2* = 0.5 s, eta = 0.007.
    Intermediate,
    /// T = 9J/40: T2* = 0.5 s, eta = 0.022.
    LowTemperature,
}

impl NoiseModel {
    /// A deviation-free, noise-free, decay-free model.
    pub fn ideal(n_spins: usize) -> Self {
        let delta = (0..=n_spins)
            .map(|k| DeltaEntry {
                two_m: -(n_spins as i64) + 2 * k as i64,
                dx: 0.0,
                dy: 0.0,
            })
            .collect();
        Self {
            t2_star_s: f64::INFINITY,
            eta: 0.0,
            seed: 0,
            delta,
        }
    }

    pub fn preset(which: NoisePreset) -> Self {
        let raw = match which {
            NoisePreset::InfiniteTemperature => include_str!("../data/noise_t_inf.json"),
            NoisePreset::Intermediate => include_str!("../data/noise_15j8.json"),
            NoisePreset::LowTemperature => include_str!("../data/noise_9j40.json"),
        };
        serde_json::from_str(raw).expect("bundled noise model parses")
    }

    pub fn from_json(reader: impl std::io::Read) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the fitted-parameter ranges and that every sector of an
    /// N-spin bath has a deviation entry.
    pub fn validate_for(&self, n_spins: usize) -> Result<()> {
        if !(self.t2_star_s > 0.0) {
            return Err(Error::InvalidInput("t2_star_s must be positive".into()));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidInput("eta must be finite and >= 0".into()));
        }
        let mut seen: Vec<i64> = self.delta.iter().map(|d| d.two_m).collect();
        seen.sort_unstable();
        let expected: Vec<i64> = (0..=n_spins)
            .map(|k| -(n_spins as i64) + 2 * k as i64)
            .collect();
        if seen != expected {
            return Err(Error::InvalidInput(format!(
                "delta entries must cover every sector 2m in {:?}",
                expected
            )));
        }
        for d in &self.delta {
            if d.dx.abs() > 0.05 || d.dy.abs() > 0.05 {
                return Err(Error::InvalidInput(format!(
                    "deviation at 2m = {} outside the fitted range [-0.05, 0.05]",
                    d.two_m
                )));
            }
        }
        Ok(())
    }

    /// Re[Delta L(theta)] = sum_m (dx_m cos(m theta) - dy_m sin(m theta)).
    fn deviation_re(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for d in &self.delta {
            let m = d.two_m as f64 / 2.0;
            let (s, c) = (m * theta).sin_cos();
            acc += d.dx * c - d.dy * s;
        }
        acc
    }

    /// Upper bound sum_m |dx_m - i dy_m| on the deviation amplitude.
    pub fn deviation_bound(&self) -> f64 {
        self.delta.iter().map(|d| d.dx.hypot(d.dy)).sum()
    }
}

/// A synthesized measurement record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasuredTrace {
    /// Sample times, seconds.
    pub times: Vec<f64>,
    /// Observed real signal: Re[e^{-t/T2*} (L + Delta L)] + Gaussian noise.
    pub observed: Vec<f64>,
    /// The noiseless coherence for reference.
    #[serde(with = "complex_vec")]
    pub true_trace: Vec<Complex64>,
    pub noise_model: NoiseModel,
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

impl MeasuredTrace {
    /// CSV with columns (t, observed, true_re_L).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "observed", "true_re_L"])?;
        for i in 0..self.times.len() {
            w.write_record([
                self.times[i].to_string(),
                self.observed[i].to_string(),
                self.true_trace[i].re.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Observed signal with the known decay envelope divided out.
    fn envelope_divided(&self) -> Vec<f64> {
        let t2 = self.noise_model.t2_star_s;
        self.times
            .iter()
            .zip(&self.observed)
            .map(|(&t, &y)| if t2.is_finite() { y * (t / t2).exp() } else { y })
            .collect()
    }
}

/// Synthesize the observed signal on the given time grid (zero-field path):
///
///   observed(t) = Re[e^{-t/T2*} (L(t) + Delta L(t))] + N(0, eta),
///
/// with L built from the ensemble weights and the deviation from the
/// per-sector (dx, dy) entries. Seeded, so traces are reproducible.
pub fn synthesize_measurement(
    params: &IsingParams,
    noise: &NoiseModel,
    t_grid: &[f64],
) -> Result<MeasuredTrace> {
    if params.beta_h() != 0.0 {
        return Err(Error::InvalidInput(
            "measurement synthesis is a zero-field path".into(),
        ));
    }
    noise.validate_for(params.n_spins)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    let weights = ensemble_weights(params)?;
    let lambda = params.probe_coupling;
    let t2 = noise.t2_star_s;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let gauss = Normal::new(0.0, noise.eta)
        .map_err(|e| Error::InvalidInput(format!("bad noise width: {e}")))?;

    let mut observed = Vec::with_capacity(t_grid.len());
    let mut true_trace = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let theta = lambda * t;
        let l = weights.coherence(theta);
        let env = if t2.is_finite() { (-t / t2).exp() } else { 1.0 };
        let signal = (l.re + noise.deviation_re(theta)) * env;
        observed.push(signal + gauss.sample(&mut rng));
        true_trace.push(l);
    }
    Ok(MeasuredTrace {
        times: t_grid.to_vec(),
        observed,
        true_trace,
        noise_model: noise.clone(),
        params: params.clone(),
    })
}

/// Uniform time grid over one full period with the default sample count.
pub fn default_time_grid(params: &IsingParams, n_samples: usize) -> Vec<f64> {
    let period = params.period();
    (0..n_samples)
        .map(|i| period * i as f64 / (n_samples - 1) as f64)
        .collect()
}

/// Extraction outcome; `complete` is false when fewer crossings than N were
/// found, which is the legitimate signature of the degenerate high-T regime.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub zeros: ZeroSet,
    pub complete: bool,
}

/// Recover zero angles from a measured trace: divide out the decay envelope,
/// cluster raw sign changes (noise produces bundles of crossings around each
/// true zero), then fit a local cubic over +-window samples and take its root.
pub fn extract_zeros(trace: &MeasuredTrace) -> Result<Extraction> {
    extract_zeros_with_window(trace, DEFAULT_FIT_WINDOW)
}

pub fn extract_zeros_with_window(trace: &MeasuredTrace, window: usize) -> Result<Extraction> {
    let lambda = trace.params.probe_coupling;
    let n_samples = trace.times.len();
    if n_samples < 2 * window + 2 {
        return Err(Error::InvalidInput("trace too short for the fit window".into()));
    }
    let span = trace.times[n_samples - 1] - trace.times[0];
    if span * lambda < 2.0 * PI * (1.0 - 1e-9) {
        return Err(Error::InvalidInput(
            "trace must cover at least one full period".into(),
        ));
    }
    let y = trace.envelope_divided();
    let theta: Vec<f64> = trace.times.iter().map(|&t| lambda * t).collect();

    // Raw crossings, then clusters separated by more than 2*window samples.
    let mut crossings = Vec::new();
    for i in 0..n_samples - 1 {
        if y[i] == 0.0 {
            continue;
        }
        if y[i].signum() != y[i + 1].signum() {
            crossings.push(i);
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in crossings {
        match clusters.last_mut() {
            Some(c) if idx - *c.last().unwrap() <= 2 * window => c.push(idx),
            _ => clusters.push(vec![idx]),
        }
    }

    let mut angles = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let center = cluster[cluster.len() / 2];
        let lo = center.saturating_sub(window);
        let hi = (center + window + 1).min(n_samples);
        let scale = (theta[hi - 1] - theta[lo]).max(f64::MIN_POSITIVE);
        let u: Vec<f64> = theta[lo..hi]
            .iter()
            .map(|&t| (t - theta[center]) / scale)
            .collect();
        let root = fit_cubic(&u, &y[lo..hi])
            .and_then(|c| cubic_root_near_zero(&c, u[0], *u.last().unwrap()))
            .map(|u_root| theta[center] + u_root * scale)
            .unwrap_or(theta[center]);
        angles.push(root);
    }
    angles.sort_by(f64::total_cmp);

    let n = trace.params.n_spins;
    let complete = angles.len() == n;
    let count = angles.len();
    let zeros = ZeroSet {
        angles,
        multiplicities: vec![1; count],
        uncertainties: None,
        radii: vec![1.0; count],
        params: trace.params.clone(),
    };
    Ok(Extraction { zeros, complete })
}

/// Root of the fitted cubic nearest u = 0, by bisection over the sign change
/// closest to the window center.
fn cubic_root_near_zero(c: &[f64; 4], lo: f64, hi: f64) -> Option<f64> {
    let steps = 64;
    let mut best: Option<(f64, f64)> = None;
    let mut prev_u = lo;
    let mut prev_v = eval_cubic(c, lo);
    for i in 1..=steps {
        let u = lo + (hi - lo) * i as f64 / steps as f64;
        let v = eval_cubic(c, u);
        if prev_v.signum() != v.signum() {
            let mid = 0.5 * (prev_u + u);
            if best.map_or(true, |(b, _)| mid.abs() < b.abs()) {
                best = Some((mid, prev_u));
            }
        }
        prev_u = u;
        prev_v = v;
    }
    let (_, mut a) = best?;
    let mut b = a + (hi - lo) / steps as f64;
    let mut fa = eval_cubic(c, a);
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let fm = eval_cubic(c, mid);
        if fa.signum() != fm.signum() {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}

/// Midpoint of the angular span where |envelope-divided signal| < eta:
/// the first and last sub-threshold samples bound the degenerate zero
/// region of the high-temperature regime.
pub fn extract_degenerate_zero(trace: &MeasuredTrace, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    let y = trace.envelope_divided();
    let lambda = trace.params.probe_coupling;
    let first = y.iter().position(|v| v.abs() < eta);
    let last = y.iter().rposition(|v| v.abs() < eta);
    match (first, last) {
        (Some(i), Some(j)) => Ok(lambda * 0.5 * (trace.times[i] + trace.times[j])),
        _ => Err(Error::NoInterval(format!(
            "signal never drops below eta = {eta}"
        ))),
    }
}

/// Fill per-zero uncertainties Delta theta_n = eta / |dL/dtheta(theta_n)|.
/// A vanishing sensitivity yields an unbounded (infinite) uncertainty.
pub fn zero_uncertainty(params: &IsingParams, zeros: &ZeroSet, eta: f64) -> Result<ZeroSet> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidInput("eta must be finite and >= 0".into()));
    }
    let ev = Evaluator::new(params)?;
    let floor = ev.sensitivity_floor();
    let unc = zeros
        .angles
        .iter()
        .map(|&theta| {
            let s = ev.sensitivity(theta).norm();
            if s > floor {
                eta / s
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut out = zeros.clone();
    out.uncertainties = Some(unc);
    Ok(out)
}
