// SPDX-License-Identifier: MIT OR Apache-2.0

//! Shared instance generators and brute-force oracles for integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use rfpop::loss::{mad_sigma, phi_sq_expectation, LossKind, LossSpec};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub enum NoiseKind {
    Gaussian,
    T3,
}

/// Random step signal with Gaussian or t(3) noise and a tiny jitter so the
/// optimum is unique with probability one.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, noise: NoiseKind) -> Vec<f64> {
    let n_cps = rng.gen_range(0..=n / 15);
    let mut cps: Vec<usize> = (0..n_cps).map(|_| rng.gen_range(1..n)).collect();
    cps.sort_unstable();
    cps.dedup();
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let t3 = StudentT::new(3.0).unwrap();
    let mut level = rng.gen_range(-5.0..5.0);
    let mut next = 0;
    (0..n)
        .map(|i| {
            if next < cps.len() && i == cps[next] {
                level += rng.gen_range(-6.0..6.0);
                next += 1;
            }
            let eps = match noise {
                NoiseKind::Gaussian => gauss.sample(rng),
                NoiseKind::T3 => t3.sample(rng),
            };
            level + eps + 1e-7 * rng.gen_range(-1.0..1.0)
        })
        .collect()
}

/// A loss of `kind` with K and u drawn at random, plus a β between a third
/// and three times the default, all scaled by σ̂ of `data` (1 when σ̂ is
/// unavailable).
pub fn random_config(rng: &mut ChaCha8Rng, kind: LossKind, data: &[f64]) -> (LossSpec, f64) {
    let sigma = mad_sigma(data)
        .ok()
        .filter(|s| !s.degenerate)
        .map_or(1.0, |s| s.sigma);
    let unit = match kind {
        LossKind::L2 => LossSpec::L2,
        LossKind::L1 => LossSpec::L1,
        LossKind::Huber => LossSpec::Huber {
            k: rng.gen_range(0.5..3.0),
        },
        LossKind::Biweight => LossSpec::Biweight {
            k: rng.gen_range(1.0..4.0),
        },
        LossKind::Quantile => LossSpec::Quantile {
            u: rng.gen_range(0.1..0.9),
        },
    };
    let spec = unit.rescaled(sigma);
    let scale = match kind {
        LossKind::L1 | LossKind::Quantile => sigma,
        _ => sigma * sigma,
    };
    let beta = rng.gen_range(0.33..3.0)
        * 2.0
        * scale
        * (data.len() as f64).ln()
        * phi_sq_expectation(&unit);
    (spec, beta)
}

/// Candidate kinks of Σ γ(y_i; θ).
fn breakpoints(values: &[f64], spec: &LossSpec) -> Vec<f64> {
    let mut pts = Vec::new();
    for &y in values {
        pts.push(y);
        if let Some(k) = spec.threshold() {
            pts.push(y - k);
            pts.push(y + k);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Minimum of Σ γ(y_i; θ) found from pointwise loss values only: between
/// adjacent kinks the sum is one quadratic, recovered from three samples.
pub fn oracle_segment_cost(values: &[f64], spec: &LossSpec) -> f64 {
    let total = |theta: f64| values.iter().map(|&y| spec.value(y, theta)).sum::<f64>();
    let lo_y = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_y = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<f64> = breakpoints(values, spec)
        .into_iter()
        .filter(|p| (lo_y..=hi_y).contains(p))
        .collect();
    let mut best = pts.iter().map(|&p| total(p)).fold(f64::INFINITY, f64::min);
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = 0.5 * (b - a);
        let m = a + h;
        let (fa, fm, fb) = (total(a), total(m), total(b));
        let curv = (fa - 2.0 * fm + fb) / (2.0 * h * h);
        if curv > 0.0 {
            let v = m - (fb - fa) / (4.0 * curv * h);
            if v > a && v < b {
                best = best.min(total(v));
            }
        }
    }
    best
}

pub fn oracle_penalised_cost(data: &[f64], cps: &[usize], spec: &LossSpec, beta: f64) -> f64 {
    let mut start = 0;
    let mut cost = 0.0;
    for &end in cps.iter().chain(std::iter::once(&data.len())) {
        cost += oracle_segment_cost(&data[start..end], spec) + beta;
        start = end;
    }
    cost
}

/// Every segmentation of `data` as (changepoints, cost).
pub fn enumerate_segmentations(data: &[f64], spec: &LossSpec, beta: f64) -> Vec<(Vec<usize>, f64)> {
    let n = data.len();
    assert!((1..=16).contains(&n));
    (0u32..1 << (n - 1))
        .map(|mask| {
            let cps: Vec<usize> = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let cost = oracle_penalised_cost(data, &cps, spec, beta);
            (cps, cost)
        })
        .collect()
}

/// Adjusted Rand index by classifying every pair of points.
pub fn brute_force_ari(a: &[usize], b: &[usize], n: usize) -> f64 {
    let labels = |cps: &[usize]| -> Vec<usize> {
        (1..=n)
            .map(|i| cps.iter().filter(|&&c| c < i).count())
            .collect()
    };
    let (la, lb) = (labels(a), labels(b));
    // Pair counts: both together, together in a only, in b only, neither.
    let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (la[i] == la[j], lb[i] == lb[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let total: f64 = n11 + n10 + n01 + n00;
    let expected = (n11 + n10) * (n11 + n01) / total;
    let max = 0.5 * ((n11 + n10) + (n11 + n01));
    (n11 - expected) / (max - expected)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
