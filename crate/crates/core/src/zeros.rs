//! Locating the N Lee-Yang zeros within one period.
//!
//! Two routes: at h = 0 the coherence is real on the circle and a bracketed
//! bisection over sign changes is robust up to N = 500 (the production
//! path); for general field the polynomial is solved directly by
//! simultaneous Aberth iteration (degree <= 64, also the cross-check).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherence::Evaluator;
use crate::error::{Error, Result};
use crate::ising::{IsingParams, PartitionPolynomial};
use crate::mp::SignEval;

/// Zeros below this beta*J are treated as the analytic degenerate set
/// {pi with multiplicity N}.
pub const DEGENERATE_BETA_J: f64 = 1e-12;

/// Two refined roots closer than this merge into one entry with summed
/// multiplicity. Bisection converges to 1e-12, so distinct zeros separated
/// by 1e-8 or more are never merged.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;

const BISECTION_TOLERANCE: f64 = 1e-12;
const MAX_SUBDIVISION_QUERIES: usize = 20_000;

/// The Lee-Yang zero set: angles theta_n in (0, 2 pi) with z_n = e^{-i theta_n}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroSet {
    /// Ascending zero angles, radians.
    pub angles: Vec<f64>,
    /// Per-angle multiplicity; the total equals the polynomial degree N.
    pub multiplicities: Vec<usize>,
    /// Optional per-zero uncertainty (rad); infinite entries mean unbounded
    /// and serialize to JSON null.
    #[serde(with = "opt_unc")]
    pub uncertainties: Option<Vec<f64>>,
    /// Root moduli |z_n|; exactly 1 for the real path, as solved for the
    /// polynomial path.
    pub radii: Vec<f64>,
    pub params: IsingParams,
}

mod opt_unc {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<f64>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|u| {
                u.iter()
                    .map(|&x| if x.is_finite() { Some(x) } else { None })
                    .collect::<Vec<_>>()
            })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<f64>>, D::Error> {
        let v = Option::<Vec<Option<f64>>>::deserialize(d)?;
        Ok(v.map(|u| u.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect()))
    }
}

impl ZeroSet {
    /// Complex roots r_n e^{-i theta_n}.
    pub fn z_values(&self) -> Vec<Complex64> {
        self.angles
            .iter()
            .zip(&self.radii)
            .map(|(&t, &r)| r * Complex64::new(0.0, -t).exp())
            .collect()
    }

    /// Zero times t_n = theta_n / lambda in seconds.
    pub fn times(&self) -> Vec<f64> {
        self.angles
            .iter()
            .map(|&t| t / self.params.probe_coupling)
            .collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// CSV with columns (n, theta, t, re_z, im_z, delta_theta).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "theta", "t", "re_z", "im_z", "delta_theta"])?;
        let z = self.z_values();
        let t = self.times();
        let mut index = 1usize;
        for i in 0..self.angles.len() {
            for _ in 0..self.multiplicities[i] {
                let unc = self
                    .uncertainties
                    .as_ref()
                    .map(|u| u[i].to_string())
                    .unwrap_or_default();
                w.write_record([
                    index.to_string(),
                    self.angles[i].to_string(),
                    t[i].to_string(),
                    z[i].re.to_string(),
                    z[i].im.to_string(),
                    unc,
                ])?;
                index += 1;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Circle-theorem verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleReport {
    pub max_deviation: f64,
    pub pass: bool,
}

/// Max ||z_n| - 1| over the set against the 1e-8 acceptance line.
pub fn verify_circle_theorem(zeros: &ZeroSet) -> CircleReport {
    let max_deviation = zeros
        .radii
        .iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0f64, f64::max);
    CircleReport {
        max_deviation,
        pass: max_deviation < 1e-8,
    }
}

/// One evaluated grid point with a reliable sign.
#[derive(Clone, Copy)]
struct Probe {
    theta: f64,
    sign: SignEval,
    log2_mag: f64,
}

fn probe(ev: &Evaluator, theta: f64) -> Probe {
    let (sign, log2_mag) = ev.sign_re_l(theta);
    Probe {
        theta,
        sign,
        log2_mag,
    }
}

/// Bisect a bracketed sign change down to BISECTION_TOLERANCE. Only valid
/// when the bracket is known to hold a single crossing.
fn bisect(ev: &Evaluator, mut lo: Probe, mut hi: Probe) -> f64 {
    debug_assert!(lo.sign.flips(hi.sign));
    while hi.theta - lo.theta > BISECTION_TOLERANCE {
        let mid = probe(ev, 0.5 * (lo.theta + hi.theta));
        if mid.sign == SignEval::Unresolved {
            // Dead on the root to far better than the tolerance.
            return mid.theta;
        }
        if mid.sign == lo.sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo.theta + hi.theta)
}

/// Monotone key for max-heap ordering of f64 magnitudes (most negative
/// log-magnitude first when wrapped in Reverse).
fn ord_key(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 0 {
        bits | (1 << 63)
    } else {
        !bits
    }
}

/// Cluster ascending roots within CLUSTER_TOLERANCE and snap the exact
/// odd-N zero at pi onto pi.
fn cluster(mut roots: Vec<f64>, n: usize, params: &IsingParams) -> ZeroSet {
    roots.sort_by(f64::total_cmp);
    let mut angles: Vec<f64> = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    for r in roots {
        match angles.last() {
            Some(&last) if r - last <= CLUSTER_TOLERANCE => *mult.last_mut().unwrap() += 1,
            _ => {
                angles.push(r);
                mult.push(1);
            }
        }
    }
    if n % 2 == 1 {
        // L(pi) vanishes identically for odd N (all magnetization sectors are
        // half-integer), so the root there is pi exactly.
        for a in angles.iter_mut() {
            if (*a - PI).abs() < 1e-9 {
                *a = PI;
            }
        }
    }
    let radii = vec![1.0; angles.len()];
    ZeroSet {
        angles,
        multiplicities: mult,
        uncertainties: None,
        radii,
        params: params.clone(),
    }
}

fn degenerate_set(params: &IsingParams) -> ZeroSet {
    ZeroSet {
        angles: vec![PI],
        multiplicities: vec![params.n_spins],
        uncertainties: None,
        radii: vec![1.0],
        params: params.clone(),
    }
}

/// All N zeros at zero field by sign-bracketed bisection of Re L over a
/// uniform grid of max(4096, 64 N) points, with priority-driven subdivision
/// of the most suspicious cells when crossings are missing.
pub fn find_zeros_real(params: &IsingParams) -> Result<ZeroSet> {
    if params.beta_h() != 0.0 {
        return Err(Error::InvalidInput(
            "find_zeros_real requires zero field; use find_zeros_polynomial".into(),
        ));
    }
    let n = params.n_spins;
    let beta_j = params.beta_j();
    if !beta_j.is_finite() {
        return Err(Error::InvalidInput("beta*J must be finite".into()));
    }
    if beta_j < DEGENERATE_BETA_J {
        return Ok(degenerate_set(params));
    }

    let ev = Evaluator::new(params)?;
    let grid = 4096.max(64 * n);
    let two_pi = 2.0 * PI;
    // Virtual endpoints: L(0) = 1 and L(2 pi) = (-1)^N, both away from zero.
    let mut probes = Vec::with_capacity(grid + 2);
    probes.push(Probe {
        theta: 0.0,
        sign: SignEval::Positive,
        log2_mag: 0.0,
    });
    for i in 0..grid {
        let theta = two_pi * (i as f64 + 0.5) / grid as f64;
        probes.push(probe(&ev, theta));
    }
    probes.push(Probe {
        theta: two_pi,
        sign: if n % 2 == 0 {
            SignEval::Positive
        } else {
            SignEval::Negative
        },
        log2_mag: 0.0,
    });

    // Cells with a sign change are split until the bracket collapses; a cell
    // may hold any odd number of crossings, so both halves always re-enter
    // classification. Quiet cells wait in a min-magnitude priority queue and
    // are consulted only while crossings are missing.
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut roots: Vec<f64> = Vec::with_capacity(n);
    let mut flips: Vec<(Probe, Probe)> = Vec::new();
    let mut quiet: Vec<(Probe, Probe)> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();

    let mut route = |cell: (Probe, Probe),
                     roots: &mut Vec<f64>,
                     flips: &mut Vec<(Probe, Probe)>,
                     quiet: &mut Vec<(Probe, Probe)>,
                     heap: &mut BinaryHeap<Reverse<(u64, usize)>>| {
        let (a, b) = cell;
        if a.sign.flips(b.sign) {
            if b.theta - a.theta <= BISECTION_TOLERANCE {
                roots.push(0.5 * (a.theta + b.theta));
            } else {
                flips.push(cell);
            }
        } else if b.theta - a.theta > 1e-11 {
            let mag = a.log2_mag.min(b.log2_mag);
            quiet.push(cell);
            heap.push(Reverse((ord_key(mag), quiet.len() - 1)));
        }
    };

    for pair in probes.windows(2) {
        route((pair[0], pair[1]), &mut roots, &mut flips, &mut quiet, &mut heap);
    }

    let mut budget = MAX_SUBDIVISION_QUERIES;
    loop {
        // Drain pending sign changes first: each is guaranteed to yield at
        // least one root.
        while let Some((a, b)) = flips.pop() {
            let mid = probe(&ev, 0.5 * (a.theta + b.theta));
            if mid.sign == SignEval::Unresolved {
                roots.push(mid.theta);
                continue;
            }
            route((a, mid), &mut roots, &mut flips, &mut quiet, &mut heap);
            route((mid, b), &mut roots, &mut flips, &mut quiet, &mut heap);
        }
        if roots.len() >= n || budget == 0 {
            break;
        }
        // Most suspicious quiet cell: smallest endpoint magnitude.
        let Some(Reverse((_, idx))) = heap.pop() else {
            break;
        };
        let (a, b) = quiet[idx];
        if b.theta - a.theta <= 1e-11 {
            continue;
        }
        let mid = probe(&ev, 0.5 * (a.theta + b.theta));
        budget -= 1;
        if mid.sign == SignEval::Unresolved {
            roots.push(mid.theta);
            continue;
        }
        route((a, mid), &mut roots, &mut flips, &mut quiet, &mut heap);
        route((mid, b), &mut roots, &mut flips, &mut quiet, &mut heap);
    }

    let set = cluster(roots, n, params);
    let found = set.total_multiplicity();
    if found != n {
        let near = heap
            .pop()
            .map(|Reverse((_, idx))| {
                let (a, b) = quiet[idx];
                0.5 * (a.theta + b.theta)
            })
            .unwrap_or(PI);
        return Err(Error::ZeroCountMismatch {
            found,
            expected: n,
            near,
        });
    }
    Ok(set)
}

/// The smallest zero angle theta_1 (the Yang-Lee edge) without locating the
/// full set: marches upward in steps of pi/(2N) until the first sign change,
/// re-examining the two preceding cells on a finer lattice so an early
/// crossing pair cannot slip through, then bisects.
pub fn find_first_zero(params: &IsingParams) -> Result<f64> {
    if params.beta_h() != 0.0 {
        return Err(Error::InvalidInput("edge search requires zero field".into()));
    }
    let n = params.n_spins;
    if params.beta_j() < DEGENERATE_BETA_J {
        return Ok(PI);
    }
    let ev = Evaluator::new(params)?;
    let step = PI / (2.0 * n as f64);
    let mut prev = Probe {
        theta: 0.0,
        sign: SignEval::Positive,
        log2_mag: 0.0,
    };
    let max_steps = 2 * n + 4;
    for k in 1..=max_steps {
        let cur = probe(&ev, k as f64 * step);
        if cur.sign == SignEval::Unresolved {
            return Ok(cur.theta);
        }
        if prev.sign.flips(cur.sign) {
            // Look back two cells at 16x resolution for an earlier pair.
            let fine_lo = (prev.theta - 2.0 * step).max(0.0);
            let mut last = if fine_lo == 0.0 {
                Probe {
                    theta: 0.0,
                    sign: SignEval::Positive,
                    log2_mag: 0.0,
                }
            } else {
                probe(&ev, fine_lo)
            };
            let fine_steps = 48;
            let fine = (cur.theta - fine_lo) / fine_steps as f64;
            for j in 1..=fine_steps {
                let q = probe(&ev, fine_lo + j as f64 * fine);
                if q.sign == SignEval::Unresolved {
                    return Ok(q.theta);
                }
                if last.sign.flips(q.sign) {
                    return Ok(bisect(&ev, last, q));
                }
                last = q;
            }
            return Ok(bisect(&ev, prev, cur));
        }
        prev = cur;
    }
    Err(Error::ZeroCountMismatch {
        found: 0,
        expected: n,
        near: PI,
    })
}

/// All complex roots of sum_n p_n z^n by Aberth simultaneous iteration on the
/// max-normalized coefficients, started on the unit circle. Degree <= 64.
pub fn find_zeros_polynomial(poly: &PartitionPolynomial) -> Result<ZeroSet> {
    let deg = poly.degree();
    if deg > 64 {
        return Err(Error::InvalidInput(format!(
            "polynomial root path supports degree <= 64, got {deg}; use find_zeros_real"
        )));
    }
    let max_log = poly
        .log_coeffs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let coeffs: Vec<f64> = poly.log_coeffs.iter().map(|l| (l - max_log).exp()).collect();
    let roots = aberth_roots(&coeffs, 500, 1e-13)?;

    // Angles from z = e^{-i theta}: theta = -arg z mapped into (0, 2 pi].
    let mut pairs: Vec<(f64, f64)> = roots
        .iter()
        .map(|z| {
            let mut theta = -z.arg();
            if theta <= 0.0 {
                theta += 2.0 * PI;
            }
            (theta, z.norm())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut angles = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    for (theta, r) in pairs {
        match angles.last() {
            Some(&last) if theta - last <= CLUSTER_TOLERANCE => {
                *mult.last_mut().unwrap() += 1;
                let i = radii.len() - 1;
                if (r - 1.0).abs() > (radii[i] - 1.0).abs() {
                    radii[i] = r;
                }
            }
            _ => {
                angles.push(theta);
                mult.push(1);
                radii.push(r);
            }
        }
    }
    if poly.n_spins % 2 == 1 {
        for a in angles.iter_mut() {
            if (*a - PI).abs() < 1e-9 {
                *a = PI;
            }
        }
    }
    let params = IsingParams {
        n_spins: poly.n_spins,
        coupling: poly.coupling,
        field: poly.field,
        beta: poly.beta,
        probe_coupling: crate::ising::DEFAULT_PROBE_COUPLING,
    };
    Ok(ZeroSet {
        angles,
        multiplicities: mult,
        uncertainties: None,
        radii,
        params,
    })
}

fn horner_pair(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Aberth-Ehrlich iteration; `coeffs` ascending, real, strictly positive
/// leading coefficient. A root is accepted once its update drops below `tol`
/// or its residual |P(z)| reaches the rounding floor of the evaluation (at
/// which point the update can only jitter); errors out with the last update
/// size after `max_iter` sweeps.
pub(crate) fn aberth_roots(
    coeffs: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    // |P(z)| on the unit circle is computed to within eps * deg * sum|c|.
    let coeff_sum: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let residual_floor = 8.0 * f64::EPSILON * deg as f64 * coeff_sum;
    // Unit-circle start with an irrational phase offset to avoid symmetry
    // stalls and the real axis.
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / deg as f64 + 0.39))
        .collect();
    let mut settled = vec![false; deg];
    let mut max_update = f64::INFINITY;
    for _ in 0..max_iter {
        max_update = 0.0f64;
        for k in 0..deg {
            if settled[k] {
                continue;
            }
            let (p, dp) = horner_pair(coeffs, z[k]);
            if p.norm() <= residual_floor {
                settled[k] = true;
                continue;
            }
            let w = if dp.norm() == 0.0 {
                Complex64::new(1e-8, 1e-8)
            } else {
                p / dp
            };
            let mut repel = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > 1e-300 {
                        repel += 1.0 / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * repel;
            let delta = if denom.norm() > 1e-300 { w / denom } else { w };
            z[k] -= delta;
            let step = delta.norm();
            if step < tol {
                settled[k] = true;
            }
            max_update = max_update.max(step);
        }
        if settled.iter().all(|&s| s) || max_update < tol {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: max_update,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{build_polynomial, DEFAULT_PROBE_COUPLING};
    use approx::assert_abs_diff_eq;

    fn params(n: usize, beta_j: f64) -> IsingParams {
        IsingParams::from_dimensionless(n, beta_j, 0.0, DEFAULT_PROBE_COUPLING).unwrap()
    }

    /// Zero angles frozen from a high-precision independent scan at
    /// beta J = 8/15.
    const ZEROS_8_15: [f64; 9] = [
        0.5572375057330925,
        1.2773787275297162,
        1.9247286506014625,
        2.5398385133235513,
        3.141592653589793,
        3.743346793856035,
        4.358456656578124,
        5.005806579649871,
        5.725947801446495,
    ];

    #[test]
    fn degenerate_infinite_temperature() {
        let set = find_zeros_real(&params(9, 0.0)).unwrap();
        assert_eq!(set.angles, vec![PI]);
        assert_eq!(set.multiplicities, vec![9]);
        assert_eq!(set.total_multiplicity(), 9);
    }

    #[test]
    fn intermediate_temperature_zeros_match_reference() {
        let set = find_zeros_real(&params(9, 8.0 / 15.0)).unwrap();
        assert_eq!(set.angles.len(), 9);
        for (got, want) in set.angles.iter().zip(ZEROS_8_15) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn low_temperature_zeros_approach_uniform_comb() {
        let set = find_zeros_real(&params(9, 40.0 / 9.0)).unwrap();
        assert_eq!(set.angles.len(), 9);
        for (k, &theta) in set.angles.iter().enumerate() {
            let comb = (2 * k + 1) as f64 * PI / 9.0;
            // At beta J = 40/9 the zeros already sit within 4e-8 of the comb.
            assert_abs_diff_eq!(theta, comb, epsilon = 1e-6);
        }
    }

    #[test]
    fn two_spin_quadratic_roots() {
        let set = find_zeros_real(&params(2, 4.0f64.ln())).unwrap();
        assert_eq!(set.angles.len(), 2);
        assert_abs_diff_eq!(set.angles[0], 2.0 * PI / 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(set.angles[1], 4.0 * PI / 3.0, epsilon = 1e-11);
    }

    #[test]
    fn counts_and_pairing_across_regimes() {
        for n in 1..=12usize {
            for bj in [0.05, 0.5, 1.0, 4.0, 10.0] {
                let set = find_zeros_real(&params(n, bj)).unwrap();
                assert_eq!(set.total_multiplicity(), n, "n={n} bj={bj}");
                // Conjugate pairing: theta <-> 2 pi - theta with equal mult.
                for (i, &a) in set.angles.iter().enumerate() {
                    let partner = 2.0 * PI - a;
                    let j = set
                        .angles
                        .iter()
                        .position(|&b| (b - partner).abs() < 1e-8)
                        .unwrap_or_else(|| panic!("no partner for {a} (n={n}, bj={bj})"));
                    assert_eq!(set.multiplicities[i], set.multiplicities[j]);
                }
                if n % 2 == 1 {
                    assert!(set.angles.contains(&PI), "pi missing for odd n={n}");
                }
            }
        }
    }

    #[test]
    fn large_bath_counts() {
        for (n, bj) in [(100usize, 0.1), (100, 1.0), (500, 0.05), (500, 1.0)] {
            let set = find_zeros_real(&params(n, bj)).unwrap();
            assert_eq!(set.total_multiplicity(), n, "n={n} bj={bj}");
        }
    }

    #[test]
    fn deep_ferromagnetic_limit_comb() {
        let set = find_zeros_real(&params(9, 50.0)).unwrap();
        for (k, &theta) in set.angles.iter().enumerate() {
            assert_abs_diff_eq!(theta, (2 * k + 1) as f64 * PI / 9.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn near_degenerate_cluster_is_resolved() {
        // beta J = 1e-6 packs all nine zeros within a few millirad of pi,
        // far below the base grid spacing; subdivision must still find them.
        let set = find_zeros_real(&params(9, 1e-6)).unwrap();
        assert_eq!(set.total_multiplicity(), 9);
        for &a in &set.angles {
            assert!((a - PI).abs() < 0.01, "zero at {a} too far from pi");
        }
    }

    #[test]
    fn first_zero_agrees_with_full_scan() {
        for (n, bj) in [(9usize, 8.0 / 15.0), (9, 40.0 / 9.0), (12, 1.0), (9, 0.05)] {
            let full = find_zeros_real(&params(n, bj)).unwrap();
            let first = find_first_zero(&params(n, bj)).unwrap();
            assert_abs_diff_eq!(first, full.angles[0], epsilon = 1e-10);
        }
    }

    #[test]
    fn first_zero_large_bath_frozen_references() {
        // Frozen from the independent high-precision scan of the N = 500
        // edge: subcritical plateau, just above critical, and deep in the
        // disordered phase (the last needs ~120 decimal digits internally).
        let cases = [
            (0.02, 0.006283185307362682),
            (0.31, 0.1701613469452693),
            (0.252, 0.03792705667034335),
            (0.6, 0.7949025449973388),
        ];
        for (t_over_nj, want) in cases {
            let beta_j = 1.0 / (t_over_nj * 500.0);
            let got = find_first_zero(&params(500, beta_j)).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-7);
        }
    }

    #[test]
    fn polynomial_path_matches_real_path() {
        for (n, bj) in [
            (2usize, 4.0f64.ln()),
            (5, 0.5),
            (9, 8.0 / 15.0),
            (9, 40.0 / 9.0),
            (12, 1.0),
            (20, 0.1),
            (20, 5.0),
        ] {
            let p = params(n, bj);
            let real = find_zeros_real(&p).unwrap();
            let poly = find_zeros_polynomial(&build_polynomial(&p).unwrap()).unwrap();
            assert_eq!(poly.total_multiplicity(), n);
            let expanded_real = expand(&real);
            let expanded_poly = expand(&poly);
            for (a, b) in expanded_real.iter().zip(&expanded_poly) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
            }
        }
    }

    fn expand(set: &ZeroSet) -> Vec<f64> {
        let mut out = Vec::new();
        for (&a, &m) in set.angles.iter().zip(&set.multiplicities) {
            for _ in 0..m {
                out.push(a);
            }
        }
        out
    }

    #[test]
    fn single_spin_polynomial_root() {
        let poly = build_polynomial(&params(1, 0.7)).unwrap();
        let set = find_zeros_polynomial(&poly).unwrap();
        assert_eq!(set.angles, vec![PI]);
        assert_eq!(set.radii, vec![1.0]);
    }

    #[test]
    fn polynomial_roots_stay_on_circle_with_field() {
        // Coefficients are independent of h; the theorem holds regardless.
        let p = IsingParams::from_dimensionless(9, 8.0 / 15.0, 0.1, DEFAULT_PROBE_COUPLING)
            .unwrap();
        let set = find_zeros_polynomial(&build_polynomial(&p).unwrap()).unwrap();
        let report = verify_circle_theorem(&set);
        assert!(report.pass, "max deviation {}", report.max_deviation);
    }

    #[test]
    fn circle_theorem_negative_control() {
        let mut set = find_zeros_real(&params(2, 4.0f64.ln())).unwrap();
        set.radii[0] = 1.1;
        let report = verify_circle_theorem(&set);
        assert!(!report.pass);
        assert_abs_diff_eq!(report.max_deviation, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn circle_theorem_two_spin_exact() {
        // |z|^2 = e^{-beta J} + (1 - e^{-beta J}) = 1 analytically.
        let set = find_zeros_polynomial(&build_polynomial(&params(2, 4.0f64.ln())).unwrap())
            .unwrap();
        let report = verify_circle_theorem(&set);
        assert!(report.max_deviation < 1e-13);
    }

    #[test]
    fn reconstruction_closure_product_positive() {
        // prod_n (1 - z_n) is real and positive: z = 1 is never a root.
        for bj in [0.1, 8.0 / 15.0, 40.0 / 9.0] {
            let set = find_zeros_real(&params(9, bj)).unwrap();
            let mut prod = Complex64::new(1.0, 0.0);
            for (z, &m) in set.z_values().iter().zip(&set.multiplicities) {
                for _ in 0..m {
                    prod *= Complex64::new(1.0, 0.0) - z;
                }
            }
            assert!(prod.im.abs() < 1e-9 * prod.norm());
            assert!(prod.re > 0.0);
        }
    }

    #[test]
    fn aberth_reports_nonconvergence() {
        let coeffs: Vec<f64> = build_polynomial(&params(12, 0.5))
            .unwrap()
            .log_coeffs
            .iter()
            .map(|l| l.exp())
            .collect();
        assert!(matches!(
            aberth_roots(&coeffs, 2, 1e-13),
            Err(Error::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn polynomial_path_rejects_high_degree() {
        let poly = build_polynomial(&params(65, 0.1)).unwrap();
        assert!(find_zeros_polynomial(&poly).is_err());
    }

    #[test]
    fn real_path_rejects_nonzero_field() {
        let p = IsingParams::from_dimensionless(9, 0.5, 0.1, DEFAULT_PROBE_COUPLING).unwrap();
        assert!(find_zeros_real(&p).is_err());
    }

    #[test]
    fn zero_set_serde_round_trip_with_unbounded_uncertainty() {
        let mut set = find_zeros_real(&params(9, 8.0 / 15.0)).unwrap();
        set.uncertainties = Some(vec![
            0.004,
            0.007,
            0.009,
            0.01,
            f64::INFINITY,
            0.01,
            0.009,
            0.007,
            0.004,
        ]);
        let json = serde_json::to_string(&set).unwrap();
        assert!(json.contains("null"));
        let back: ZeroSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back.angles, set.angles);
        assert!(back.uncertainties.as_ref().unwrap()[4].is_infinite());
    }
}
