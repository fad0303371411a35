//! Small numerical utilities shared across the crate: log-space reductions,
//! exact log-binomials, and a dense least-squares cubic fit.

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log(sum(exp(v))) over a slice, max-normalized.
pub fn logsumexp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// Cumulative table of ln(k!) for k = 0..=n, built by direct summation.
/// Error stays at a few ulps for any n this crate handles.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// ln C(n, k) from a precomputed ln-factorial table.
///
/// The two lower terms are added before subtraction so that the result is
/// bit-for-bit symmetric under k -> n - k.
#[inline]
pub fn ln_binomial(table: &[f64], n: usize, k: usize) -> f64 {
    debug_assert!(k <= n && n < table.len());
    table[n] - (table[k] + table[n - k])
}

/// Exact binomial C(n, k) in u128, erroring out on overflow.
pub fn binomial_u128(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(c)
}

/// Least-squares cubic fit y ~ c0 + c1 u + c2 u^2 + c3 u^3.
///
/// Solves the 4x4 normal equations by Gaussian elimination with partial
/// pivoting. Callers should center and scale `u` to O(1) for conditioning.
pub fn fit_cubic(u: &[f64], y: &[f64]) -> Option<[f64; 4]> {
    if u.len() != y.len() || u.len() < 4 {
        return None;
    }
    // Accumulate moments sum(u^p) for p = 0..=6 and sum(u^p y) for p = 0..=3.
    let mut s = [0.0f64; 7];
    let mut t = [0.0f64; 4];
    for (&ui, &yi) in u.iter().zip(y) {
        let mut up = 1.0;
        for p in 0..7 {
            s[p] += up;
            if p < 4 {
                t[p] += up * yi;
            }
            up *= ui;
        }
    }
    let mut a = [[0.0f64; 5]; 4];
    for r in 0..4 {
        for c in 0..4 {
            a[r][c] = s[r + c];
        }
        a[r][4] = t[r];
    }
    solve4(&mut a)
}

fn solve4(a: &mut [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for c in col..5 {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut acc = a[row][4];
        for c in row + 1..4 {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Evaluate a cubic with coefficients in ascending order.
#[inline]
pub fn eval_cubic(c: &[f64; 4], u: f64) -> f64 {
    ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
}
