// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reference methods: the quadratic-time optimal-partitioning recursion and
//! binary segmentation driven by a Huber-residual cusum statistic.

use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::fpop::{Segmentation, TIE_TOL};
use crate::loss::{mad_sigma, LossSpec};
use crate::pwq::PiecewiseQuadFn;

/// Largest series [`exact_dp`] accepts.
pub const EXACT_DP_LIMIT: usize = 10_000;

/// Minimum and argmin of Σ γ(y_i; θ), via the piecewise-quadratic sum.
pub fn segment_cost(data: &[f64], spec: &LossSpec) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    check_finite(data)?;
    spec.validate()?;
    let mut f = PiecewiseQuadFn::constant(0.0, 0);
    let mut next = PiecewiseQuadFn::constant(0.0, 0);
    for &y in data {
        f.add_loss_into(&spec.pieces_unchecked(y), &mut next)?;
        std::mem::swap(&mut f, &mut next);
    }
    let m = f.global_min()?;
    Ok((m.value, m.argmin))
}

/// Optimal partitioning: F(t) = min_s F(s) + C(y_{s+1..t}) + β, F(0) = 0.
///
/// O(n²) segment minimisations. Near-ties (within [`TIE_TOL`]) go to the
/// most recent last changepoint, matching the pruned recursion.
pub fn exact_dp(data: &[f64], spec: &LossSpec, beta: f64) -> Result<Segmentation> {
    let n = data.len();
    if n == 0 {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    if n > EXACT_DP_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: EXACT_DP_LIMIT,
        });
    }
    check_finite(data)?;
    spec.validate()?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidPenalty(beta));
    }

    let mut best = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    let mut theta = vec![0.0f64; n + 1];
    best[0] = 0.0;
    let mut f = PiecewiseQuadFn::constant(0.0, 0);
    let mut next = f.clone();
    // Every F(s) is final once all earlier starts have been swept.
    for s in 0..n {
        f.clone_from(&PiecewiseQuadFn::constant(0.0, 0));
        for t in s + 1..=n {
            f.add_loss_into(&spec.pieces_unchecked(data[t - 1]), &mut next)?;
            std::mem::swap(&mut f, &mut next);
            let m = f.global_min()?;
            let candidate = best[s] + m.value + beta;
            let slack = TIE_TOL * best[t].abs().max(1.0);
            if candidate <= best[t] + slack || best[t] == f64::INFINITY {
                best[t] = best[t].min(candidate);
                last[t] = s;
                theta[t] = m.argmin;
            }
        }
    }

    let mut changepoints = Vec::new();
    let mut means = Vec::new();
    let mut t = n;
    while t > 0 {
        means.push(theta[t]);
        t = last[t];
        if t > 0 {
            changepoints.push(t);
        }
    }
    changepoints.reverse();
    means.reverse();
    Ok(Segmentation {
        changepoints,
        segment_means: means,
        total_cost: best[n],
    })
}

/// ψ(θ) = Σ clamp(y_i - θ, -K, K); non-increasing in θ.
fn huber_psi(data: &[f64], k: f64, theta: f64) -> f64 {
    data.iter().map(|&y| (y - theta).clamp(-k, k)).sum()
}

/// Huber M-estimate of location: the root of Σ clamp(y_i - θ, -K, K).
///
/// When the root set is an interval the midpoint is returned.
pub fn huber_m_estimate(data: &[f64], k: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    check_finite(data)?;
    if !(k > 0.0) {
        return Err(Error::InvalidLoss(format!(
            "threshold K must be positive, got {k}"
        )));
    }
    let (min, max) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| {
            (a.min(y), b.max(y))
        });
    let tol = 1e-10 * max.abs().max(min.abs()).max(1.0);
    // Largest θ with ψ > 0 and smallest with ψ < 0 bracket the root set.
    let bisect = |positive_side: bool| {
        let (mut lo, mut hi) = (min - k, max + k);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let psi = huber_psi(data, k, mid);
            let go_right = if positive_side { psi > 0.0 } else { psi >= 0.0 };
            if go_right {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(0.5 * (bisect(true) + bisect(false)))
}

/// Wald-type cusum statistic on Huber residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CusumResult {
    /// max over m of n / (m (n - m)) · S_m², with residuals divided by σ̂.
    pub statistic: f64,
    /// Split maximising the statistic; the first segment is `y_1..y_m`.
    pub m_star: usize,
    pub theta_hat: f64,
}

/// Cusum test with σ̂ estimated from `data` itself.
pub fn robust_cusum(data: &[f64], k: f64) -> Result<CusumResult> {
    if data.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: data.len(),
        });
    }
    let s = mad_sigma(data)?;
    robust_cusum_scaled(data, k, if s.degenerate { 1.0 } else { s.sigma })
}

/// Cusum test with residuals scaled by a caller-supplied `sigma`.
pub fn robust_cusum_scaled(data: &[f64], k: f64, sigma: f64) -> Result<CusumResult> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooShort { need: 2, got: n });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "residual scale must be positive, got {sigma}"
        )));
    }
    let theta_hat = huber_m_estimate(data, k)?;
    let nf = n as f64;
    let mut partial = 0.0;
    let mut best = CusumResult {
        statistic: 0.0,
        m_star: 1,
        theta_hat,
    };
    for (i, &y) in data[..n - 1].iter().enumerate() {
        partial += (y - theta_hat).clamp(-k, k) / sigma;
        let m = (i + 1) as f64;
        let stat = nf / (m * (nf - m)) * partial * partial;
        if stat > best.statistic {
            best.statistic = stat;
            best.m_star = i + 1;
        }
    }
    Ok(best)
}

/// Binary segmentation with the robust cusum test; σ̂ is estimated once on
/// the full series.
pub fn binseg_robust(data: &[f64], k: f64, threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    check_finite(data)?;
    if data.len() < 2 {
        return Ok(Vec::new());
    }
    let s = mad_sigma(data)?;
    let sigma = if s.degenerate { 1.0 } else { s.sigma };
    let mut out = Vec::new();
    let mut stack = vec![(0usize, data.len())];
    while let Some((start, end)) = stack.pop() {
        if end - start < 2 {
            continue;
        }
        let res = robust_cusum_scaled(&data[start..end], k, sigma)?;
        if res.statistic > threshold {
            let split = start + res.m_star;
            out.push(split);
            stack.push((start, split));
            stack.push((split, end));
        }
    }
    out.sort_unstable();
    Ok(out)
}
