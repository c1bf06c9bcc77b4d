// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic piecewise-constant scenarios, accuracy metrics and the runtime
//! and accuracy drivers built on them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{binseg_robust, huber_m_estimate};
use crate::error::{Error, Result};
use crate::fpop::run;
use crate::loss::{
    information_penalty, resolve_config, segment_bounds, LossKind, LossSpec, Penalty, Tuning,
    HUBER_K_SIGMA,
};

/// Generator behind every simulated series; reported in all outputs.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// Half-width of the window within which a detection counts as a hit.
pub const DEFAULT_TP_WINDOW: usize = 15;

/// Noise added to the step signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    Gaussian {
        sigma: f64,
    },
    /// Raw Student-t variates times `scale` (not standardised).
    StudentT {
        df: f64,
        scale: f64,
    },
}

/// A piecewise-constant signal plus IID noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    /// Last index (1-based) of each segment but the final one.
    pub true_changepoints: Vec<usize>,
    pub segment_levels: Vec<f64>,
    pub noise: Noise,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        segment_bounds(&self.true_changepoints, self.n)?;
        if self.segment_levels.len() != self.true_changepoints.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} segment levels for {} changepoints",
                self.segment_levels.len(),
                self.true_changepoints.len()
            )));
        }
        if self.segment_levels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "adjacent segments must have different levels".into(),
            ));
        }
        match self.noise {
            Noise::StudentT { df, .. } if !(df > 0.0) => Err(Error::InvalidConfig(format!(
                "degrees of freedom must be positive, got {df}"
            ))),
            Noise::Gaussian { sigma: s } | Noise::StudentT { scale: s, .. } if !(s >= 0.0) => Err(
                Error::InvalidConfig(format!("noise scale must be non-negative, got {s}")),
            ),
            _ => Ok(()),
        }
    }

    /// The noiseless step signal.
    pub fn signal(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        let mut start = 0;
        for (i, &level) in self.segment_levels.iter().enumerate() {
            let end = self.true_changepoints.get(i).copied().unwrap_or(self.n);
            out.extend(std::iter::repeat(level).take(end - start));
            start = end;
        }
        out
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_noise(&self, noise: Noise) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }
}

/// Signal plus noise, reproducible for a fixed seed.
pub fn generate(config: &ScenarioConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut series = config.signal();
    match config.noise {
        Noise::Gaussian { sigma } => {
            let dist = Normal::new(0.0, 1.0).expect("unit normal");
            for y in series.iter_mut() {
                *y += sigma * dist.sample(&mut rng);
            }
        }
        Noise::StudentT { df, scale } => {
            let dist = StudentT::new(df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            for y in series.iter_mut() {
                *y += scale * dist.sample(&mut rng);
            }
        }
    }
    Ok(series)
}

/// Built-in example scenarios: `bundled-150` (fifteen equal steps of height
/// one) and `bundled-2048` (eleven irregular blocks).
pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    match name {
        "bundled-150" => Some(ScenarioConfig {
            name: name.into(),
            n: 150,
            true_changepoints: (1..15).map(|i| i * 10).collect(),
            segment_levels: (1..=15).map(f64::from).collect(),
            noise: Noise::Gaussian { sigma: 0.3 },
            seed: 0,
        }),
        "bundled-2048" => Some(ScenarioConfig {
            name: name.into(),
            n: 2048,
            true_changepoints: vec![205, 267, 308, 472, 512, 820, 902, 1332, 1557, 1598, 1659],
            segment_levels: vec![
                0.0, 14.64, -3.66, 7.32, -7.32, 10.98, -4.39, 3.29, 19.03, 7.68, 15.37, 0.0,
            ],
            noise: Noise::Gaussian { sigma: 10.0 },
            seed: 0,
        }),
        _ => None,
    }
}

pub const BUNDLED_SCENARIOS: [&str; 2] = ["bundled-150", "bundled-2048"];

/// Mean squared difference between two equal-length functions.
pub fn mse(fitted: &[f64], truth: &[f64]) -> Result<f64> {
    if fitted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: fitted.len(),
            right: truth.len(),
        });
    }
    if fitted.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    let sum: f64 = fitted
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / fitted.len() as f64)
}

fn pairs(m: usize) -> f64 {
    let m = m as f64;
    m * (m - 1.0) / 2.0
}

/// Chance-adjusted Rand index (Hubert and Arabie) of the partitions of 1..n
/// induced by two changepoint sets.
pub fn rand_index_normalized(seg_a: &[usize], seg_b: &[usize], n: usize) -> Result<f64> {
    let a = segment_bounds(seg_a, n)?;
    let b = segment_bounds(seg_b, n)?;
    if seg_a == seg_b {
        return Ok(1.0);
    }
    let sum_a: f64 = a.iter().map(|(s, e)| pairs(e - s)).sum();
    let sum_b: f64 = b.iter().map(|(s, e)| pairs(e - s)).sum();
    // Contingency cells are the overlaps of consecutive segments.
    let mut sum_ab = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            sum_ab += pairs(hi - lo);
        }
        if a[i].1 <= b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let total = pairs(n);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    Ok((sum_ab - expected) / (max - expected))
}

/// True positives (true changes with a detection within `window`) and false
/// positives (detections beyond the true-positive count).
pub fn tp_fp(true_cps: &[usize], pred_cps: &[usize], window: usize) -> (usize, usize) {
    let tp = true_cps
        .iter()
        .filter(|&&c| {
            let lo = c.saturating_sub(window);
            let hi = c + window;
            let start = pred_cps.partition_point(|&p| p < lo);
            pred_cps.get(start).is_some_and(|&p| p <= hi)
        })
        .count();
    (tp, pred_cps.len().saturating_sub(tp))
}

/// Per-replicate accuracy and cost of one method on one series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub mse: f64,
    pub rand: f64,
    pub tp: usize,
    pub fp: usize,
    pub runtime: f64,
}

/// A detection method with data-driven defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Penalised(LossKind),
    /// Binary segmentation with the Huber-residual cusum test.
    Cusum,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Penalised(kind) => kind.name(),
            Method::Cusum => "cusum",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("cusum") {
            Ok(Method::Cusum)
        } else {
            s.parse().map(Method::Penalised)
        }
    }
}

/// Output of a single detection.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub changepoints: Vec<usize>,
    pub fitted: Vec<f64>,
    /// β for penalised methods, threshold for the cusum.
    pub level: f64,
}

/// Runs `method` on `data`. `level` overrides β (penalised) or the test
/// threshold (cusum); `None` uses the information-criterion default.
pub fn detect(method: Method, data: &[f64], level: Option<f64>) -> Result<Detection> {
    match method {
        Method::Penalised(kind) => {
            let tuning = Tuning {
                penalty: level.map(Penalty::Absolute),
                ..Tuning::default()
            };
            let cfg = resolve_config(kind, data, &tuning)?;
            let (seg, _) = run(data, &cfg.spec, cfg.penalty.beta)?;
            Ok(Detection {
                fitted: seg.fitted(data.len()),
                changepoints: seg.changepoints,
                level: cfg.penalty.beta,
            })
        }
        Method::Cusum => {
            let cfg = resolve_config(LossKind::Huber, data, &Tuning::default())?;
            let k = cfg.spec.threshold().expect("huber threshold");
            let threshold = level.unwrap_or_else(|| {
                information_penalty(
                    &LossSpec::Huber { k: HUBER_K_SIGMA },
                    1.0,
                    data.len() as f64,
                )
            });
            let cps = binseg_robust(data, k, threshold)?;
            let mut fitted = Vec::with_capacity(data.len());
            for (s, e) in segment_bounds(&cps, data.len())? {
                let theta = huber_m_estimate(&data[s..e], k)?;
                fitted.extend(std::iter::repeat(theta).take(e - s));
            }
            Ok(Detection {
                changepoints: cps,
                fitted,
                level: threshold,
            })
        }
    }
}

/// Detection and scoring of one method on one simulated series.
pub fn evaluate(
    method: Method,
    data: &[f64],
    scenario: &ScenarioConfig,
    level: Option<f64>,
) -> Result<(Detection, EvalReport)> {
    let start = Instant::now();
    let det = detect(method, data, level)?;
    let runtime = start.elapsed().as_secs_f64();
    let (tp, fp) = tp_fp(
        &scenario.true_changepoints,
        &det.changepoints,
        DEFAULT_TP_WINDOW,
    );
    let report = EvalReport {
        mse: mse(&det.fitted, &scenario.signal())?,
        rand: rand_index_normalized(&det.changepoints, &scenario.true_changepoints, scenario.n)?,
        tp,
        fp,
        runtime,
    };
    Ok((det, report))
}

/// One point of a receiver-operating curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    pub penalty: f64,
    pub tp: usize,
    pub fp: usize,
}

/// One detection per grid value; averaging across replicates is left to the
/// caller.
pub fn roc_sweep(
    data: &[f64],
    true_cps: &[usize],
    method: Method,
    grid: &[f64],
    window: usize,
) -> Result<Vec<RocPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("penalty grid is empty".into()));
    }
    grid.iter()
        .map(|&level| {
            let det = detect(method, data, Some(level))?;
            let (tp, fp) = tp_fp(true_cps, &det.changepoints, window);
            Ok(RocPoint {
                penalty: level,
                tp,
                fp,
            })
        })
        .collect()
}

/// Where the scaling benchmark puts true changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeRegime {
    None,
    Every(usize),
}

impl FromStr for ChangeRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        if s == "none" {
            return Ok(ChangeRegime::None);
        }
        s.strip_prefix("every")
            .and_then(|rest| rest.trim_start_matches(['-', '_']).parse::<usize>().ok())
            .filter(|&p| p > 0)
            .map(ChangeRegime::Every)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("unknown change regime '{s}'; use none or everyN"))
            })
    }
}

/// Standard-Gaussian noise around a mean that jumps every `period` points.
pub fn scaling_series(n: usize, changes: ChangeRegime, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut level = 0.0;
    (0..n)
        .map(|i| {
            if let ChangeRegime::Every(p) = changes {
                if i > 0 && i % p == 0 {
                    let jump: f64 = rng.gen_range(2.0..5.0);
                    level += if rng.gen_bool(0.5) { jump } else { -jump };
                }
            }
            level + unit.sample(&mut rng)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub seconds: f64,
    pub max_intervals: usize,
    pub mean_intervals: f64,
    pub changepoints: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub loss: LossKind,
    pub changes: ChangeRegime,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of log(seconds) against log(n).
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Series at least this long are timed once.
pub const SINGLE_TIMING_FROM: usize = 100_000;

/// Times the detector with default K and β across an ascending grid of n.
pub fn runtime_scaling(
    kind: LossKind,
    n_grid: &[usize],
    changes: ChangeRegime,
    seed: u64,
) -> Result<ScalingReport> {
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "need at least two strictly ascending series lengths".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let data = scaling_series(n, changes, seed);
        let cfg = resolve_config(kind, &data, &Tuning::default())?;
        // Short runs are timed best-of-three to damp scheduler noise.
        let repeats = if n < SINGLE_TIMING_FROM { 3 } else { 1 };
        let mut seconds = f64::INFINITY;
        let mut result = None;
        for _ in 0..repeats {
            let start = Instant::now();
            let out = run(&data, &cfg.spec, cfg.penalty.beta)?;
            seconds = seconds.min(start.elapsed().as_secs_f64());
            result = Some(out);
        }
        let (seg, stats) = result.expect("at least one timing run");
        rows.push(ScalingRow {
            n,
            seconds: seconds.max(1e-9),
            max_intervals: stats.max,
            mean_intervals: stats.mean,
            changepoints: seg.k(),
        });
    }
    let slope = loglog_slope(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.seconds))
            .collect::<Vec<_>>(),
    );
    Ok(ScalingReport {
        loss: kind,
        changes,
        rows,
        slope,
    })
}

/// One (scenario, method, replicate) cell of an accuracy study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub method: String,
    pub penalty: f64,
    pub rep: usize,
    pub tp: usize,
    pub fp: usize,
    pub mse: f64,
    pub rand: f64,
    pub runtime_s: f64,
}

pub const RESULT_COLUMNS: [&str; 9] = [
    "scenario",
    "method",
    "penalty",
    "rep",
    "tp",
    "fp",
    "mse",
    "rand",
    "runtime_s",
];

/// Replicates `scenario` with seeds `seed, seed + 1, ...` and scores every
/// method on each series. Cells run in parallel; rows come back ordered by
/// (rep, method).
pub fn simulate(
    scenario: &ScenarioConfig,
    methods: &[Method],
    reps: usize,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    let cells: Vec<(usize, Method)> = (0..reps)
        .flat_map(|rep| methods.iter().map(move |&m| (rep, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(rep, method)| {
            let cfg = scenario.with_seed(seed.wrapping_add(rep as u64));
            let data = generate(&cfg)?;
            let (det, report) = evaluate(method, &data, &cfg, None)?;
            Ok(ResultRow {
                scenario: scenario.name.clone(),
                method: method.name().to_string(),
                penalty: det.level,
                rep,
                tp: report.tp,
                fp: report.fp,
                mse: report.mse,
                rand: report.rand,
                runtime_s: report.runtime,
            })
        })
        .collect()
}

/// Tab-separated table with a header line.
pub fn write_tsv<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", RESULT_COLUMNS.join("\t"))?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.scenario, r.method, r.penalty, r.rep, r.tp, r.fp, r.mse, r.rand, r.runtime_s
        )?;
    }
    Ok(())
}
