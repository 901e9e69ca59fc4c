//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::Rng;
use vinefab::geometry::{DHChain, DHLink};

pub type Mat4 = [[f64; 4]; 4];

pub fn identity4() -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matmul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Textbook homogeneous matrix for one classic DH link with zero offset.
pub fn dh_matrix(a: f64, alpha: f64, theta: f64) -> Mat4 {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    [
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// Cumulative frames by plain matrix products, base first.
pub fn oracle_fk(links: &[(f64, f64, f64)]) -> Vec<Mat4> {
    let mut out = vec![identity4()];
    for &(a, alpha, theta) in links {
        let next = matmul4(out.last().unwrap(), &dh_matrix(a, alpha, theta));
        out.push(next);
    }
    out
}

pub fn chain_tuples(chain: &DHChain) -> Vec<(f64, f64, f64)> {
    chain.links.iter().map(|l| (l.a, l.alpha, l.theta)).collect()
}

/// Direct evaluation of the fold relations, written out per joint.
pub fn oracle_plan(a: &[f64], theta: &[f64], alpha: &[f64], r: f64, d_g: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = a.len();
    let s_tilde: Vec<f64> = theta
        .iter()
        .map(|&t| {
            if t == 0.0 {
                0.0
            } else {
                2.0 * d_g / (2.0 + 2.0 * t.cos()).sqrt() + 2.0 * r * t.abs()
            }
        })
        .collect();
    let l: Vec<f64> = (0..n)
        .map(|i| {
            let next = if i + 1 < n { s_tilde[i + 1] } else { 0.0 };
            a[i] - (s_tilde[i] + next) / 4.0
        })
        .collect();
    let sign = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    let s: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                return 0.0;
            }
            let (t0, t1) = (theta[i], theta[i + 1]);
            r * sign(t0 * t1) * (alpha[i] - (PI * sign(t1)).min(0.0))
        })
        .collect();
    (s_tilde, l, s)
}

/// Chain that compiles and round-trips: every joint bent by 3°..150°,
/// interior twists anywhere, no twist on the last link, and each link long
/// enough for its folds.
pub fn feasible_chain(rng: &mut StdRng, n: usize, r: f64, d_g: f64) -> DHChain {
    let thetas: Vec<f64> = (0..n).map(|_| rng.random_range(3.0f64..150.0).to_radians()).collect();
    let fold = |t: f64| 2.0 * d_g / (2.0 + 2.0 * t.cos()).sqrt() + 2.0 * r * t;
    let links = (0..n)
        .map(|i| {
            let next = if i + 1 < n { fold(thetas[i + 1]) } else { 0.0 };
            let min_a = (fold(thetas[i]) + next) / 4.0;
            let alpha = if i + 1 == n { 0.0 } else { rng.random_range(-3.1..PI) };
            DHLink::new(min_a + rng.random_range(1.0..200.0), alpha, thetas[i])
        })
        .collect();
    DHChain::new(links, r).unwrap()
}

/// Arbitrary valid chain for kinematics checks.
pub fn random_chain(rng: &mut StdRng, n: usize) -> DHChain {
    let links = (0..n)
        .map(|_| {
            DHLink::new(
                rng.random_range(1.0..200.0),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
        })
        .collect();
    DHChain::new(links, rng.random_range(5.0..30.0)).unwrap()
}

/// Chain whose markers fully determine it: interior joints bent by
/// 3°..150° in either direction, and links longer than the marker offset.
pub fn measurable_chain(rng: &mut StdRng, n: usize) -> DHChain {
    let links = (0..n)
        .map(|i| {
            let theta = if i == 0 {
                rng.random_range(-PI..PI)
            } else {
                let t = rng.random_range(3.0f64..150.0).to_radians();
                if rng.random_bool(0.5) { t } else { -t }
            };
            let alpha = if i + 1 == n { 0.0 } else { rng.random_range(-3.1..PI) };
            DHLink::new(rng.random_range(80.0..200.0), alpha, theta)
        })
        .collect();
    DHChain::new(links, 16.5).unwrap()
}

/// Kolmogorov–Smirnov distance of a sample from the uniform distribution.
pub fn ks_uniform(p: &mut [f64]) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}
