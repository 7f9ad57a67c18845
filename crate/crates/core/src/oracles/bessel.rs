//! Bessel functions of the first kind J_m(x) for integer m ≥ 0, x ≥ 0, and
//! the positive zeros of J_m′.

use super::OracleError;

/// J_0(x), …, J_nmax(x).
///
/// Power series for x ≤ 1; otherwise Miller's backward recurrence,
/// normalized with J_0 + 2 Σ J_2k = 1.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "negative argument");
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return out;
    }
    if x <= 1.0 {
        return (0..=nmax).map(|m| series(m, x)).collect();
    }
    let top = nmax.max(x as usize);
    let start = 2 * ((top + 16 + (40.0 * top as f64).sqrt() as usize) / 2);
    let mut out = vec![0.0; nmax + 1];
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        // j = J_k (unnormalized), jp1 = J_{k+1}
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

pub fn bessel_j(m: usize, x: f64) -> f64 {
    bessel_j_all(m, x)[m]
}

/// J_m and its first three derivatives at x.
pub fn bessel_j_jet(m: usize, x: f64) -> [f64; 4] {
    let all = bessel_j_all(m + 3, x);
    let j = |k: i64| -> f64 {
        let v = all[k.unsigned_abs() as usize];
        if k < 0 && k % 2 != 0 {
            -v
        } else {
            v
        }
    };
    let m = m as i64;
    [
        j(m),
        0.5 * (j(m - 1) - j(m + 1)),
        0.25 * (j(m - 2) - 2.0 * j(m) + j(m + 2)),
        0.125 * (j(m - 3) - 3.0 * j(m - 1) + 3.0 * j(m + 1) - j(m + 3)),
    ]
}

/// Bessel's integral (1/2π)∮ cos(mτ − x sin τ) dτ by the periodic trapezoid
/// rule, with its x-derivatives 0..=2. Independent of the recurrence.
pub fn bessel_j_integral(m: usize, x: f64) -> [f64; 3] {
    let n = 2 * (m + x.ceil() as usize) + 64;
    let (mut j0, mut j1, mut j2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let (s, c) = (m as f64 * t - x * t.sin()).sin_cos();
        let st = t.sin();
        j0 += c;
        j1 += s * st;
        j2 -= c * st * st;
    }
    let w = 1.0 / n as f64;
    [j0 * w, j1 * w, j2 * w]
}

/// The k-th positive zero of J_m′ (k ≥ 1), excluding x = 0.
pub fn bessel_jp_zero(m: usize, k: usize) -> Result<f64, OracleError> {
    bessel_jp_zero_with(m, k, |x| {
        let j = bessel_j_jet(m, x);
        (j[1], j[2])
    })
}

/// Same root, located with the integral representation only.
pub fn bessel_jp_zero_integral(m: usize, k: usize) -> Result<f64, OracleError> {
    bessel_jp_zero_with(m, k, |x| {
        let j = bessel_j_integral(m, x);
        (j[1], j[2])
    })
}

fn bessel_jp_zero_with(m: usize, k: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<f64, OracleError> {
    if k == 0 {
        return Err(OracleError::RootNotBracketed { m, k });
    }
    let step = 0.05;
    let mut a = if m == 0 { 0.5 } else { m as f64 };
    let mut fa = f(a).0;
    let mut found = 0;
    let limit = m as f64 + 4.0 * k as f64 + 50.0 + 4.0 * std::f64::consts::PI * k as f64;
    while a < limit {
        let b = a + step;
        let fb = f(b).0;
        if fa == 0.0 || fa * fb < 0.0 {
            found += 1;
            if found == k {
                return Ok(refine(&f, a, b));
            }
        }
        a = b;
        fa = fb;
    }
    Err(OracleError::RootNotBracketed { m, k })
}

fn refine(f: &impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo).0;
    if flo == 0.0 {
        return lo;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (v, d) = f(x);
        if v == 0.0 {
            return x;
        }
        if (v < 0.0) == (flo < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-16 * x {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        // Abramowitz & Stegun Table 9.1
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(0, 10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-14);
        assert!((bessel_j(5, 10.0) - (-0.234_061_528_186_793_7)).abs() < 1e-14);
    }

    #[test]
    fn recurrence_matches_integral_oracle() {
        let mut worst: f64 = 0.0;
        for m in [0, 1, 2, 7, 20, 45, 60] {
            for x in [0.3, 1.0, 2.5, 9.0, 33.3, 61.0, 119.9] {
                let a = bessel_j_jet(m, x);
                let b = bessel_j_integral(m, x);
                worst = worst.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs()).max((a[2] - b[2]).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn derivative_zeros() {
        let j11 = bessel_jp_zero(1, 1).unwrap();
        assert!((j11 - 1.841_183_781_340_659_3).abs() < 1e-14);
        let j01 = bessel_jp_zero(0, 1).unwrap();
        assert!((j01 - 3.831_705_970_207_512).abs() < 1e-13);
        assert!((bessel_jp_zero(2, 1).unwrap() - 3.054_236_928_227_140).abs() < 1e-13);
        assert!((bessel_jp_zero(0, 2).unwrap() - 7.015_586_669_815_619).abs() < 1e-13);
        let cross = bessel_jp_zero_integral(1, 1).unwrap();
        assert!((cross - j11).abs() < 1e-12);
    }
}
