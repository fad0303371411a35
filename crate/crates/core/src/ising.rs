//! Long-range ferromagnetic Ising model with spins s = ±1/2: model
//! parameters, the partition function as a polynomial in z = exp(-beta h),
//! an exact enumeration oracle, subspace degeneracies, and the large-N
//! saddle-point analysis of the phase transition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial_u128, ln_binomial, ln_factorials, logsumexp};

/// Largest spin count accepted by the exact enumeration oracle.
pub const BRUTE_FORCE_MAX_SPINS: usize = 20;

/// Model definition. Units fix k_B = hbar = 1: couplings and fields are
/// angular frequencies (rad/s), temperature is an energy, and only the
/// products beta*J and beta*h enter any observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    /// Number of bath spins N.
    pub n_spins: usize,
    /// Pair coupling J, identical for all N(N-1)/2 pairs; J > 0 is ferromagnetic.
    pub coupling: f64,
    /// External field h, same units as J.
    pub field: f64,
    /// Inverse temperature 1/T.
    pub beta: f64,
    /// Probe-bath coupling lambda (rad/s); sets the time scale t = theta / lambda.
    pub probe_coupling: f64,
}

/// The paper system's probe coupling, 2*pi*10.57 rad/s.
pub const DEFAULT_PROBE_COUPLING: f64 = 2.0 * std::f64::consts::PI * 10.57;

impl IsingParams {
    pub fn new(
        n_spins: usize,
        coupling: f64,
        field: f64,
        beta: f64,
        probe_coupling: f64,
    ) -> Result<Self> {
        let p = Self {
            n_spins,
            coupling,
            field,
            beta,
            probe_coupling,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from the dimensionless products beta*J and beta*h with J = 1.
    /// At beta*J = 0 the temperature is infinite, so a nonzero beta*h is
    /// rejected as unrepresentable.
    pub fn from_dimensionless(
        n_spins: usize,
        beta_j: f64,
        beta_h: f64,
        probe_coupling: f64,
    ) -> Result<Self> {
        if beta_j == 0.0 && beta_h != 0.0 {
            return Err(Error::InvalidInput(
                "beta*h must be zero when beta*J = 0 (infinite temperature)".into(),
            ));
        }
        let field = if beta_j > 0.0 { beta_h / beta_j } else { 0.0 };
        Self::new(n_spins, 1.0, field, beta_j, probe_coupling)
    }

    fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::InvalidInput("n_spins must be at least 1".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidInput(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidInput("coupling must be finite".into()));
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidInput("field must be finite".into()));
        }
        if !(self.probe_coupling > 0.0) || !self.probe_coupling.is_finite() {
            return Err(Error::InvalidInput(
                "probe coupling must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    /// Dimensionless beta*J.
    pub fn beta_j(&self) -> f64 {
        self.beta * self.coupling
    }

    /// Dimensionless beta*h.
    pub fn beta_h(&self) -> f64 {
        self.beta * self.field
    }

    /// One coherence period 2*pi/lambda in seconds.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.probe_coupling
    }
}

/// The partition function as a degree-N polynomial in z = exp(-beta h),
/// carried entirely in log space:
///
///   log p_n = log C(N, n) + beta J (n^2 - N n) / 2,
///   log prefactor = N (N - 1) beta J / 8 + N beta h / 2.
///
/// All coefficients are strictly positive, so no sign track is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPolynomial {
    pub log_coeffs: Vec<f64>,
    pub log_prefactor: f64,
    pub n_spins: usize,
    pub beta: f64,
    pub coupling: f64,
    pub field: f64,
}

impl PartitionPolynomial {
    pub fn degree(&self) -> usize {
        self.n_spins
    }
}

/// Build the log-space partition polynomial. Binomials come from a ln-factorial
/// table (never factorial values), and the quadratic exponent is formed in
/// integer arithmetic so that log p_n = log p_{N-n} holds bit-for-bit.
pub fn build_polynomial(params: &IsingParams) -> Result<PartitionPolynomial> {
    let n = params.n_spins;
    let beta_j = params.beta_j();
    if !beta_j.is_finite() {
        return Err(Error::InvalidInput("beta*J must be finite".into()));
    }
    let table = ln_factorials(n);
    let log_coeffs: Vec<f64> = (0..=n)
        .map(|k| {
            let quad = (k as i64 * k as i64 - n as i64 * k as i64) as f64;
            ln_binomial(&table, n, k) + beta_j * quad / 2.0
        })
        .collect();
    let log_prefactor =
        (n * (n - 1)) as f64 * beta_j / 8.0 + n as f64 * params.beta_h() / 2.0;
    Ok(PartitionPolynomial {
        log_coeffs,
        log_prefactor,
        n_spins: n,
        beta: params.beta,
        coupling: params.coupling,
        field: params.field,
    })
}

/// log Xi = log prefactor + log sum_n p_n z^n with z = exp(-beta h),
/// reduced by log-sum-exp.
pub fn partition_direct(params: &IsingParams) -> Result<f64> {
    let poly = build_polynomial(params)?;
    let beta_h = params.beta_h();
    let terms: Vec<f64> = poly
        .log_coeffs
        .iter()
        .enumerate()
        .map(|(k, &lp)| lp - beta_h * k as f64)
        .collect();
    Ok(poly.log_prefactor + logsumexp(&terms))
}

/// Uniform coupling matrix J_ij = j for all i != j.
pub fn uniform_couplings(n: usize, j: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![j; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    m
}

/// Exact log-partition value by enumeration over all 2^N configurations of
/// H = -sum_{i<j} J_ij s_i s_j - h sum_j s_j with s_j = ±1/2. This is the
/// validation oracle; antiferromagnetic entries are accepted as input.
pub fn brute_force_partition(couplings: &[Vec<f64>], field: f64, beta: f64) -> Result<f64> {
    let n = couplings.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty coupling matrix".into()));
    }
    if n > BRUTE_FORCE_MAX_SPINS {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_SPINS,
        });
    }
    for (i, row) in couplings.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidInput("coupling matrix must be square".into()));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput("coupling entries must be finite".into()));
            }
            if (v - couplings[j][i]).abs() > 0.0 {
                return Err(Error::InvalidInput(
                    "coupling matrix must be symmetric".into(),
                ));
            }
        }
    }
    let mut log_terms = Vec::with_capacity(1usize << n);
    for state in 0u32..(1u32 << n) {
        let spin = |j: usize| -> f64 {
            if state >> j & 1 == 1 {
                0.5
            } else {
                -0.5
            }
        };
        let mut energy = 0.0;
        for i in 0..n {
            let si = spin(i);
            for j in i + 1..n {
                energy -= couplings[i][j] * si * spin(j);
            }
            energy -= field * si;
        }
        log_terms.push(-beta * energy);
    }
    Ok(logsumexp(&log_terms))
}

/// Degeneracy of the total-spin-S subspace, D(S) = C(N, N/2-S) - C(N, N/2-S-1),
/// with S passed as 2S to keep half-integers exact.
pub fn degeneracy(n_spins: usize, two_s: usize) -> Result<u128> {
    if two_s > n_spins || two_s % 2 != n_spins % 2 {
        return Err(Error::InvalidInput(format!(
            "total spin 2S = {two_s} outside the ladder for N = {n_spins}"
        )));
    }
    let k = (n_spins - two_s) / 2;
    let upper = binomial_u128(n_spins, k);
    let lower = if k == 0 {
        Some(0)
    } else {
        binomial_u128(n_spins, k - 1)
    };
    match (upper, lower) {
        (Some(a), Some(b)) => Ok(a - b),
        _ => Err(Error::InvalidInput(format!(
            "N = {n_spins} too large for exact degeneracy arithmetic"
        ))),
    }
}

/// Saddle-point analysis of phi(x) = (1/2+x)ln(1/2+x) + (1/2-x)ln(1/2-x)
/// - N beta J x^2 / 2 at zero field. The nonzero saddle exists exactly when
/// N beta J / 4 > 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddlePointResult {
    /// Saddle location x in [0, 1/2).
    pub magnetization_x: f64,
    /// phi evaluated at the saddle.
    pub phi_at_saddle: f64,
    /// Large-N free energy per spin, J/8 + phi(x*)/beta. Negative infinity
    /// at beta = 0.
    pub intensive_free_energy: f64,
    /// True when two symmetric nonzero saddles exist (N beta J / 4 > 1).
    pub is_ordered: bool,
}

fn phi(x: f64, n_beta_j: f64) -> f64 {
    (0.5 + x) * (0.5 + x).ln() + (0.5 - x) * (0.5 - x).ln() - n_beta_j * x * x / 2.0
}

fn phi_prime(x: f64, n_beta_j: f64) -> f64 {
    ((0.5 + x) / (0.5 - x)).ln() - n_beta_j * x
}

pub fn saddle_point(params: &IsingParams) -> Result<SaddlePointResult> {
    if params.field != 0.0 {
        return Err(Error::InvalidInput(
            "saddle-point analysis requires zero field".into(),
        ));
    }
    let n_beta_j = params.n_spins as f64 * params.beta_j();
    let ordered = n_beta_j / 4.0 > 1.0;
    let x = if !ordered {
        0.0
    } else {
        // phi'(x) = ln((1/2+x)/(1/2-x)) - N beta J x is negative just above 0
        // and diverges to +inf at 1/2, so bisection always brackets the root.
        let mut lo = 1e-15;
        let mut hi = 0.5 - 1e-15;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = phi_prime(mid, n_beta_j);
            if f.abs() < 1e-13 {
                lo = mid;
                hi = mid;
                break;
            }
            if f < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let phi_star = phi(x, n_beta_j);
    let intensive = if params.beta > 0.0 {
        params.coupling / 8.0 + phi_star / params.beta
    } else {
        f64::NEG_INFINITY
    };
    Ok(SaddlePointResult {
        magnetization_x: x,
        phi_at_saddle: phi_star,
        intensive_free_energy: intensive,
        is_ordered: ordered,
    })
}

/// Transition temperature T_c = N J / 4 of the uniformly coupled model.
pub fn critical_temperature(n_spins: usize, coupling: f64) -> f64 {
    n_spins as f64 * coupling / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(n: usize, beta_j: f64, beta_h: f64) -> IsingParams {
        IsingParams::from_dimensionless(n, beta_j, beta_h, DEFAULT_PROBE_COUPLING).unwrap()
    }

    #[test]
    fn coefficients_reduce_to_binomials_at_infinite_temperature() {
        let poly = build_polynomial(&params(9, 0.0, 0.0)).unwrap();
        assert_eq!(poly.log_coeffs.len(), 10);
        assert_eq!(poly.log_coeffs[0], 0.0);
        assert_eq!(poly.log_coeffs[9], 0.0);
        assert_relative_eq!(poly.log_coeffs[4].exp(), 126.0, max_relative = 1e-12);
        assert_eq!(poly.log_prefactor, 0.0);
    }

    #[test]
    fn two_spin_coefficients_at_beta_j_ln4() {
        // p_1 = 2 exp(-ln(4)/2) = 1, so the polynomial is 1 + z + z^2.
        let poly = build_polynomial(&params(2, 4.0f64.ln(), 0.0)).unwrap();
        for lc in &poly.log_coeffs {
            assert_abs_diff_eq!(*lc, 0.0, epsilon = 1e-14);
        }
        let brute = brute_force_partition(&uniform_couplings(2, 4.0f64.ln()), 0.0, 1.0).unwrap();
        let direct = partition_direct(&params(2, 4.0f64.ln(), 0.0)).unwrap();
        assert_relative_eq!(brute, direct, max_relative = 1e-13);
    }

    #[test]
    fn coefficient_symmetry_is_bitwise() {
        for (n, bj) in [(9usize, 0.5333), (12, 3.7), (500, 0.01), (500, 7.5)] {
            let poly = build_polynomial(&params(n, bj, 0.0)).unwrap();
            for k in 0..=n {
                assert_eq!(
                    poly.log_coeffs[k].to_bits(),
                    poly.log_coeffs[n - k].to_bits(),
                    "n={n} bj={bj} k={k}"
                );
            }
        }
    }

    #[test]
    fn single_spin_partition_is_two_cosh() {
        for bh in [-0.8, 0.0, 0.3, 2.0] {
            let p = IsingParams::new(1, 1.0, bh / 0.7, 0.7, DEFAULT_PROBE_COUPLING).unwrap();
            let expect = ((bh / 2.0).exp() + (-bh / 2.0).exp()).ln();
            assert_relative_eq!(partition_direct(&p).unwrap(), expect, max_relative = 1e-13);
            let brute = brute_force_partition(&uniform_couplings(1, 0.0), p.field, p.beta).unwrap();
            assert_relative_eq!(brute, expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn matches_brute_force_small_system() {
        // Frozen against an independent high-precision enumeration.
        let p = params(3, 0.7, 0.3);
        let direct = partition_direct(&p).unwrap();
        assert_relative_eq!(direct, 2.1773124353830865, max_relative = 1e-13);
        let brute = brute_force_partition(&uniform_couplings(3, 1.0), p.field, p.beta).unwrap();
        assert_relative_eq!(direct, brute, max_relative = 1e-12);
    }

    #[test]
    fn free_spins_at_beta_zero() {
        let direct = partition_direct(&params(9, 0.0, 0.0)).unwrap();
        assert_relative_eq!(direct, 9.0 * 2.0f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn brute_force_two_spins_closed_form() {
        // Four states at energies -J/4 (aligned, x2) and +J/4 (anti, x2).
        let bj = 1.3;
        let brute = brute_force_partition(&uniform_couplings(2, 1.0), 0.0, bj).unwrap();
        let expect = (2.0 * (bj / 4.0).exp() + 2.0 * (-bj / 4.0).exp()).ln();
        assert_relative_eq!(brute, expect, max_relative = 1e-13);
        assert_relative_eq!(
            brute,
            partition_direct(&params(2, bj, 0.0)).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn brute_force_rejects_oversized_systems() {
        let m = uniform_couplings(21, 1.0);
        assert!(matches!(
            brute_force_partition(&m, 0.0, 1.0),
            Err(Error::TooLarge { n: 21, max: 20 })
        ));
    }

    #[test]
    fn brute_force_rejects_asymmetric_matrix() {
        let mut m = uniform_couplings(3, 1.0);
        m[0][1] = 2.0;
        assert!(brute_force_partition(&m, 0.0, 1.0).is_err());
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(degeneracy(9, 9).unwrap(), 1);
        assert_eq!(degeneracy(9, 7).unwrap(), 8);
        assert_eq!(degeneracy(2, 0).unwrap(), 1);
        assert!(degeneracy(9, 8).is_err());
        assert!(degeneracy(9, 11).is_err());
    }

    #[test]
    fn degeneracy_counts_full_hilbert_space() {
        for n in 1..=30usize {
            let mut total: u128 = 0;
            let mut two_s = n % 2;
            while two_s <= n {
                total += degeneracy(n, two_s).unwrap() * (two_s as u128 + 1);
                two_s += 2;
            }
            assert_eq!(total, 1u128 << n, "n = {n}");
        }
    }

    #[test]
    fn saddle_point_disordered_and_boundary() {
        // N beta J / 4 = 0.5
        let p = params(9, 2.0 / 9.0, 0.0);
        let s = saddle_point(&p).unwrap();
        assert_eq!(s.magnetization_x, 0.0);
        assert!(!s.is_ordered);
        assert_relative_eq!(s.phi_at_saddle, -(2.0f64.ln()), max_relative = 1e-14);

        // Exactly at the transition.
        let p = params(9, 4.0 / 9.0, 0.0);
        let s = saddle_point(&p).unwrap();
        assert_eq!(s.magnetization_x, 0.0);
        assert!(!s.is_ordered);
    }

    #[test]
    fn saddle_point_ordered_phase() {
        // N beta J = 12: frozen root of ln((1/2+x)/(1/2-x)) = 12 x.
        let p = params(6, 2.0, 0.0);
        let s = saddle_point(&p).unwrap();
        assert!(s.is_ordered);
        assert_relative_eq!(s.magnetization_x, 0.4974507642263145, epsilon = 1e-12);
        // Central finite difference of phi at the root.
        let h = 1e-6;
        let d = (phi(s.magnetization_x + h, 12.0) - phi(s.magnetization_x - h, 12.0)) / (2.0 * h);
        assert!(d.abs() < 1e-6, "phi'(x*) = {d}");
    }

    #[test]
    fn saddle_switches_exactly_at_threshold() {
        for n in [2usize, 9, 100, 500] {
            for scale in [0.5, 0.999999, 1.0, 1.000001, 3.0] {
                let beta_j = 4.0 * scale / n as f64;
                let s = saddle_point(&params(n, beta_j, 0.0)).unwrap();
                let ordered = n as f64 * beta_j / 4.0 > 1.0;
                assert_eq!(s.is_ordered, ordered);
                assert_eq!(s.magnetization_x == 0.0, !ordered);
            }
        }
    }

    #[test]
    fn saddle_rejects_nonzero_field() {
        let p = IsingParams::new(9, 1.0, 0.2, 0.5, DEFAULT_PROBE_COUPLING).unwrap();
        assert!(saddle_point(&p).is_err());
    }

    #[test]
    fn critical_temperature_values() {
        assert_relative_eq!(critical_temperature(9, 2.0), 4.5);
        assert_relative_eq!(critical_temperature(500, 1.0), 125.0);
        assert_relative_eq!(critical_temperature(4, 1.0), 1.0);
    }

    #[test]
    fn params_validation() {
        assert!(IsingParams::new(0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(IsingParams::new(9, 1.0, 0.0, -0.1, 1.0).is_err());
        assert!(IsingParams::new(9, 1.0, 0.0, f64::NAN, 1.0).is_err());
        assert!(IsingParams::new(9, f64::INFINITY, 0.0, 1.0, 1.0).is_err());
        assert!(IsingParams::new(9, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(IsingParams::from_dimensionless(9, 0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn log_partition_monotone_in_beta_j_at_zero_field() {
        for n in [3usize, 9, 12] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=30 {
                let bj = 3.0 * i as f64 / 30.0;
                let v = partition_direct(&params(n, bj, 0.0)).unwrap();
                assert!(v >= prev - 1e-12, "n={n} bj={bj}");
                prev = v;
            }
        }
    }
}
