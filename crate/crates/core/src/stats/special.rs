//! Special functions and distribution functions used by the tests.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::quad::integrate;
use super::StatsError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64, StatsError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(StatsError::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(StatsError::Domain(format!(
            "incomplete beta requires a, b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(StatsError::Domain(format!(
            "incomplete beta requires x in [0, 1], got {x}"
        )));
    }
    Ok(inc_beta(a, b, x))
}

fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    let v = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    };
    v.clamp(0.0, 1.0)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64, StatsError> {
    if !(a.is_finite() && a > 0.0 && x >= 0.0) {
        return Err(StatsError::Domain(format!(
            "incomplete gamma requires a > 0, x >= 0, got a={a}, x={x}"
        )));
    }
    Ok(gamma_p(a, x))
}

fn gamma_p(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

fn gamma_q(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma_unchecked(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    ((-x + a * x.ln() - ln_gamma_unchecked(a)).exp() * h).clamp(0.0, 1.0)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        1.0 + gamma_p(0.5, x * x)
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Two-sided tail probability `P(|T| ≥ |t|)` for Student's t with `df`
/// degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// `P(T ≤ t)` for Student's t.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Quantile of Student's t by bisection on the CDF.
pub fn student_t_quantile(p: f64, df: f64) -> Result<f64, StatsError> {
    if !(p > 0.0 && p < 1.0) || df.is_nan() || df <= 0.0 {
        return Err(StatsError::Domain(format!(
            "t quantile requires p in (0, 1) and df > 0, got p={p}, df={df}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while student_t_cdf(lo, df) > p {
        lo *= 2.0;
    }
    while student_t_cdf(hi, df) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper tail `P(F ≥ f)` of the F distribution.
pub fn f_upper_tail(f: f64, df1: f64, df2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    inc_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}

/// Upper tail `P(X ≥ x)` of the chi-square distribution.
pub fn chi_square_upper_tail(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

const QUAD_TOL: f64 = 1e-10;
const Z_LIMIT: f64 = 8.5;

/// `P(range of k iid standard normals ≤ w)`.
fn normal_range_cdf(w: f64, k: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let f = |z: f64| {
        let inner = 0.5 * (erfc(-z * FRAC_1_SQRT_2) - erfc(-(z - w) * FRAC_1_SQRT_2));
        if inner <= 0.0 {
            0.0
        } else {
            normal_pdf(z) * inner.powf(k - 1.0)
        }
    };
    (k * integrate(f, -Z_LIMIT, Z_LIMIT + w, QUAD_TOL)).clamp(0.0, 1.0)
}

/// CDF of the studentized range `Q = range / s` for `k` groups, where
/// `s² ~ χ²_df / df`.
///
/// The inner range probability and the outer integral over the density of
/// `s` are both computed by adaptive Gauss–Kronrod quadrature.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> Result<f64, StatsError> {
    if q.is_nan() || q < 0.0 || k < 2 || df.is_nan() || df <= 0.0 {
        return Err(StatsError::Domain(format!(
            "studentized range requires q >= 0, k >= 2, df > 0, got q={q}, k={k}, df={df}"
        )));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    if q.is_infinite() {
        return Ok(1.0);
    }
    if df.is_infinite() || df > 1e5 {
        return Ok(normal_range_cdf(q, kf));
    }
    // density of s = sqrt(χ²_df / df)
    let half = df / 2.0;
    let ln_norm = half * df.ln() - ln_gamma_unchecked(half) - (half - 1.0) * 2f64.ln();
    let density = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            (ln_norm + (df - 1.0) * s.ln() - 0.5 * df * s * s).exp()
        }
    };
    let spread = 1.0 / (2.0 * df).sqrt();
    let lo = (1.0 - 12.0 * spread).max(0.0);
    let hi = 1.0 + 12.0 * spread + if df < 4.0 { 6.0 } else { 0.0 };
    let val = integrate(|s| density(s) * normal_range_cdf(q * s, kf), lo, hi, 1e-9);
    Ok(val.clamp(0.0, 1.0))
}

/// Upper tail of the studentized range.
pub fn studentized_range_upper_tail(q: f64, k: usize, df: f64) -> Result<f64, StatsError> {
    Ok((1.0 - studentized_range_cdf(q, k, df)?).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - PI.sqrt().ln()).abs() < 1e-13);
        // ln(10!) = ln 3628800
        assert!((log_gamma(11.0).unwrap() - 3_628_800f64.ln()).abs() < 1e-11);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn incomplete_beta_identities() {
        for &x in &[0.0, 0.1, 0.37, 0.5, 0.99, 1.0] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-14);
            // I_x(a, 1) = x^a
            assert!((regularized_incomplete_beta(2.5, 1.0, x).unwrap() - x.powf(2.5)).abs() < 1e-13);
        }
        // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
        let v = regularized_incomplete_beta(3.2, 7.1, 0.3).unwrap();
        let w = regularized_incomplete_beta(7.1, 3.2, 0.7).unwrap();
        assert!((v + w - 1.0).abs() < 1e-14);
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-14);
    }

    #[test]
    fn t_quantile_table() {
        // t_{0.975, 10} = 2.228138851986274
        assert!((student_t_quantile(0.975, 10.0).unwrap() - 2.228_138_851_986_274).abs() < 1e-9);
        // one degree of freedom is Cauchy: tan(pi (p - 1/2))
        let p: f64 = 0.9;
        assert!((student_t_quantile(p, 1.0).unwrap() - (PI * (p - 0.5)).tan()).abs() < 1e-9);
    }

    #[test]
    fn chi_square_two_df_is_exponential() {
        for &x in &[0.1, 1.0, 5.0, 20.0] {
            assert!((chi_square_upper_tail(x, 2.0) - (-x / 2.0).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn studentized_range_two_groups_reduces_to_t() {
        // For k = 2, Q = sqrt(2)|T|.
        for &(t, df) in &[(1.0, 5.0), (2.3, 12.0), (0.4, 30.0)] {
            let q = 2f64.sqrt() * t;
            let p = studentized_range_upper_tail(q, 2, df).unwrap();
            assert!((p - student_t_two_sided(t, df)).abs() < 1e-7, "t={t} df={df}");
        }
    }

    #[test]
    fn studentized_range_table_point() {
        let p = studentized_range_cdf(3.877, 3, 10.0).unwrap();
        assert!((p - 0.95).abs() < 5e-4, "{p}");
        assert!(studentized_range_cdf(1.0, 1, 10.0).is_err());
        assert!(studentized_range_cdf(-1.0, 3, 10.0).is_err());
    }
}
