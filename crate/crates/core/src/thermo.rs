//! Free energy from the partition function and from the Lee-Yang zeros, and
//! transition detection from the Yang-Lee edge trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{partition_direct, saddle_point, IsingParams, DEFAULT_PROBE_COUPLING};
use crate::zeros::{find_first_zero, ZeroSet};

/// Which route produced a free-energy value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeEnergySource {
    Direct,
    FromZeros,
    SaddleLargeN,
}

impl std::fmt::Display for FreeEnergySource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FreeEnergySource::Direct => "direct",
            FreeEnergySource::FromZeros => "from_zeros",
            FreeEnergySource::SaddleLargeN => "saddle_large_n",
        };
        f.write_str(s)
    }
}

/// F = -T ln Xi together with the log-partition value it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeEnergyResult {
    pub log_partition: f64,
    pub free_energy: f64,
    pub per_spin: f64,
    pub beta: f64,
    pub field: f64,
    pub n_spins: usize,
    pub source: FreeEnergySource,
}

/// CSV columns (beta, logZ, F, F_per_spin, source) over a result table.
pub fn write_free_energy_csv<W: std::io::Write>(
    rows: &[FreeEnergyResult],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "logZ", "F", "F_per_spin", "source"])?;
    for r in rows {
        w.write_record([
            r.beta.to_string(),
            r.log_partition.to_string(),
            r.free_energy.to_string(),
            r.per_spin.to_string(),
            r.source.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// F = -(1/beta)(log prefactor + log sum p_n z^n). Rejects beta = 0, where
/// the free energy is undefined.
pub fn free_energy_direct(params: &IsingParams) -> Result<FreeEnergyResult> {
    if params.beta <= 0.0 {
        return Err(Error::InvalidInput(
            "free energy requires beta > 0 (finite temperature)".into(),
        ));
    }
    let log_z = partition_direct(params)?;
    let f = -log_z / params.beta;
    Ok(FreeEnergyResult {
        log_partition: log_z,
        free_energy: f,
        per_spin: f / params.n_spins as f64,
        beta: params.beta,
        field: params.field,
        n_spins: params.n_spins,
        source: FreeEnergySource::Direct,
    })
}

/// Reconstruction from the zero set:
///
///   log Xi = N(N-1) beta J / 8 + N beta h / 2 + sum_n m_n ln|z - e^{-i theta_n}|
///
/// with z = exp(-beta h). The product over conjugate-paired zeros is real
/// and positive, so logs of moduli suffice.
pub fn free_energy_from_zeros(zeros: &ZeroSet) -> Result<FreeEnergyResult> {
    let params = &zeros.params;
    let n = params.n_spins;
    if zeros.total_multiplicity() != n {
        return Err(Error::InvalidInput(format!(
            "incomplete zero set: {} of {} zeros",
            zeros.total_multiplicity(),
            n
        )));
    }
    if params.beta <= 0.0 {
        return Err(Error::InvalidInput(
            "free energy requires beta > 0 (finite temperature)".into(),
        ));
    }
    let beta_j = params.beta_j();
    let beta_h = params.beta_h();
    let z = (-beta_h).exp();
    let mut log_product = 0.0;
    for (&theta, &m) in zeros.angles.iter().zip(&zeros.multiplicities) {
        // |z - e^{-i theta}|^2 = (z - cos t)^2 + sin^2 t
        let dx = z - theta.cos();
        let dy = theta.sin();
        log_product += m as f64 * 0.5 * (dx * dx + dy * dy).ln();
    }
    let log_z = (n * (n - 1)) as f64 * beta_j / 8.0 + n as f64 * beta_h / 2.0 + log_product;
    let f = -log_z / params.beta;
    Ok(FreeEnergyResult {
        log_partition: log_z,
        free_energy: f,
        per_spin: f / n as f64,
        beta: params.beta,
        field: params.field,
        n_spins: n,
        source: FreeEnergySource::FromZeros,
    })
}

/// Large-N saddle-point free energy (zero field).
pub fn free_energy_saddle(params: &IsingParams) -> Result<FreeEnergyResult> {
    if params.beta <= 0.0 {
        return Err(Error::InvalidInput(
            "free energy requires beta > 0 (finite temperature)".into(),
        ));
    }
    let s = saddle_point(params)?;
    let n = params.n_spins as f64;
    Ok(FreeEnergyResult {
        log_partition: -params.beta * n * s.intensive_free_energy,
        free_energy: n * s.intensive_free_energy,
        per_spin: s.intensive_free_energy,
        beta: params.beta,
        field: params.field,
        n_spins: params.n_spins,
        source: FreeEnergySource::SaddleLargeN,
    })
}

/// One point of the Yang-Lee edge trajectory.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EdgeSample {
    /// Temperature in units of N J, matching the transition at 0.25.
    pub t_over_nj: f64,
    /// First zero angle theta_1, radians.
    pub theta1: f64,
}

/// The edge trajectory over a temperature grid, with the detected transition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeCurve {
    pub samples: Vec<EdgeSample>,
    pub n_spins: usize,
    /// Knee estimate in T/(N J) units, when the curve supports one.
    pub estimated_tc: Option<f64>,
    pub tc_method: String,
}

impl EdgeCurve {
    /// CSV columns (T_over_NJ, theta1).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["T_over_NJ", "theta1"])?;
        for s in &self.samples {
            w.write_record([s.t_over_nj.to_string(), s.theta1.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

const TC_METHOD: &str = "max-curvature knee (second difference of theta1 over T)";

/// Scan the first Lee-Yang zero over a grid of absolute temperatures
/// (same units as `coupling`). Samples are independent and evaluated in
/// parallel; assembly order is deterministic.
pub fn edge_scan(n_spins: usize, coupling: f64, temperatures: &[f64]) -> Result<EdgeCurve> {
    if coupling <= 0.0 || !coupling.is_finite() {
        return Err(Error::InvalidInput("coupling must be positive".into()));
    }
    if temperatures.is_empty() {
        return Err(Error::InvalidInput("empty temperature grid".into()));
    }
    for pair in temperatures.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidInput(
                "temperatures must be strictly ascending".into(),
            ));
        }
    }
    if temperatures[0] <= 0.0 || !temperatures.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidInput("temperatures must be positive".into()));
    }
    let nj = n_spins as f64 * coupling;
    let samples: Vec<EdgeSample> = temperatures
        .par_iter()
        .map(|&t| {
            let params =
                IsingParams::new(n_spins, coupling, 0.0, 1.0 / t, DEFAULT_PROBE_COUPLING)?;
            let theta1 = find_first_zero(&params)?;
            Ok(EdgeSample {
                t_over_nj: t / nj,
                theta1,
            })
        })
        .collect::<Result<_>>()?;
    let mut curve = EdgeCurve {
        samples,
        n_spins,
        estimated_tc: None,
        tc_method: TC_METHOD.to_string(),
    };
    curve.estimated_tc = estimate_tc(&curve).ok();
    Ok(curve)
}

/// Knee of theta1(T): the sample of maximum positive curvature by a
/// nonuniform second difference. Returns the temperature in T/(N J) units;
/// the analytic transition sits at 0.25. Flat or short curves, or grids
/// that do not span both sides of 0.25, yield a no-estimate error.
pub fn estimate_tc(curve: &EdgeCurve) -> Result<f64> {
    let s = &curve.samples;
    if s.len() < 8 {
        return Err(Error::NoEstimate(format!(
            "need at least 8 samples, got {}",
            s.len()
        )));
    }
    let (lo, hi) = (s.first().unwrap().t_over_nj, s.last().unwrap().t_over_nj);
    if !(lo < 0.25 && hi > 0.25) {
        return Err(Error::NoEstimate(
            "temperature grid does not span both sides of the transition".into(),
        ));
    }
    let spread = s
        .iter()
        .map(|p| p.theta1)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if spread.1 - spread.0 < 1e-6 * spread.1.abs().max(1e-300) {
        return Err(Error::NoEstimate("edge trajectory is flat".into()));
    }
    let mut best: Option<(f64, f64)> = None;
    for i in 1..s.len() - 1 {
        let h0 = s[i].t_over_nj - s[i - 1].t_over_nj;
        let h1 = s[i + 1].t_over_nj - s[i].t_over_nj;
        let d0 = (s[i].theta1 - s[i - 1].theta1) / h0;
        let d1 = (s[i + 1].theta1 - s[i].theta1) / h1;
        let curvature = 2.0 * (d1 - d0) / (h0 + h1);
        if best.map_or(true, |(c, _)| curvature > c) {
            best = Some((curvature, s[i].t_over_nj));
        }
    }
    match best {
        Some((c, t)) if c > 0.0 => Ok(t),
        _ => Err(Error::NoEstimate(
            "no convex knee found on the sampled grid".into(),
        )),
    }
}
