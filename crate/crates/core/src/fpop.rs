// SPDX-License-Identifier: MIT OR Apache-2.0

//! The robust functional-pruning dynamic program.
//!
//! `Q_t(θ)` is the cheapest penalised cost of `y_1..y_t` given that the last
//! segment has location θ. Each new observation applies
//!
//! ```text
//! Q_t(θ) = min{ Q_{t-1}(θ), min_θ Q_{t-1} + β } + γ(y_t; θ)
//! ```
//!
//! on a [`PiecewiseQuadFn`], so every candidate last-changepoint is kept only
//! on the set of θ where it is still optimal.

use std::fmt;

use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::loss::{min_segment_length, segment_bounds, segment_fit, LossSpec, MinSegmentLength};
use crate::pwq::PiecewiseQuadFn;

/// Candidate costs this close (relative) count as tied; ties go to the most
/// recent changepoint.
pub const TIE_TOL: f64 = 1e-11;

/// Running summary of how many pieces `Q_t` needed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntervalStats {
    /// Largest piece count seen at any step (either half of the update).
    pub max: usize,
    /// Mean piece count of `Q_t` over the steps taken.
    pub mean: f64,
    /// Pieces of `min{Q_{t-1}, Q_{t-1} + β}` at the latest step.
    pub last_pruned: usize,
    /// Pieces of `Q_t` at the latest step.
    pub last: usize,
    #[serde(skip)]
    total: u64,
}

/// Non-fatal conditions noticed while configuring a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Warning {
    /// β = 0 puts a changepoint wherever it lowers the cost at all.
    ZeroPenalty,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ZeroPenalty => f.write_str(
                "beta = 0: every split that lowers the loss is taken; expect degenerate segmentations",
            ),
        }
    }
}

/// Best cost of the prefix seen so far and its most recent changepoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checkpoint {
    pub cost: f64,
    pub most_recent_cp: usize,
}

/// An optimal segmentation of `y_1..y_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segmentation {
    /// Last index (1-based) of every segment except the final one.
    pub changepoints: Vec<usize>,
    /// Fitted location of every segment.
    pub segment_means: Vec<f64>,
    /// Σ (segment cost + β), recomputed from the fitted segments.
    pub total_cost: f64,
}

impl Segmentation {
    pub fn k(&self) -> usize {
        self.changepoints.len()
    }

    /// Fits every segment exactly and totals the penalised cost.
    pub fn from_changepoints(
        data: &[f64],
        changepoints: Vec<usize>,
        spec: &LossSpec,
        beta: f64,
    ) -> Result<Self> {
        let bounds = segment_bounds(&changepoints, data.len())?;
        let mut segment_means = Vec::with_capacity(bounds.len());
        let mut total_cost = 0.0;
        for (s, e) in bounds {
            let fit = segment_fit(&data[s..e], spec)?;
            segment_means.push(fit.theta);
            total_cost += fit.cost + beta;
        }
        Ok(Self {
            changepoints,
            segment_means,
            total_cost,
        })
    }

    /// The fitted location at every time point.
    pub fn fitted(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut start = 0;
        for (i, &mean) in self.segment_means.iter().enumerate() {
            let end = self.changepoints.get(i).copied().unwrap_or(n);
            out.extend(std::iter::repeat(mean).take(end - start));
            start = end;
        }
        out
    }
}

/// Streaming state of the detector.
#[derive(Clone, Debug)]
pub struct OnlineState {
    spec: LossSpec,
    beta: f64,
    q: PiecewiseQuadFn,
    scratch: PiecewiseQuadFn,
    /// `records[t - 1]` is `(Q_t, most recent changepoint before t)`.
    records: Vec<Checkpoint>,
    data: Vec<f64>,
    stats: IntervalStats,
    warnings: Vec<Warning>,
}

impl OnlineState {
    pub fn init(spec: LossSpec, beta: f64) -> Result<Self> {
        spec.validate()?;
        let q = PiecewiseQuadFn::make_initial(beta)?;
        let mut warnings = Vec::new();
        if beta == 0.0 {
            log::warn!("{}", Warning::ZeroPenalty);
            warnings.push(Warning::ZeroPenalty);
        }
        Ok(Self {
            spec,
            beta,
            scratch: q.clone(),
            q,
            records: Vec::new(),
            data: Vec::new(),
            stats: IntervalStats {
                max: 1,
                ..IntervalStats::default()
            },
            warnings,
        })
    }

    pub fn spec(&self) -> &LossSpec {
        &self.spec
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of observations consumed.
    pub fn t(&self) -> usize {
        self.records.len()
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn min_segment_length(&self) -> MinSegmentLength {
        min_segment_length(&self.spec, self.beta)
    }

    /// The current `Q_t(θ)`.
    pub fn cost_function(&self) -> &PiecewiseQuadFn {
        &self.q
    }

    pub fn records(&self) -> &[Checkpoint] {
        &self.records
    }

    pub fn interval_stats(&self) -> IntervalStats {
        self.stats
    }

    /// Consumes one observation and returns the updated prefix optimum.
    pub fn step(&mut self, y: f64) -> Result<Checkpoint> {
        if !y.is_finite() {
            return Err(Error::NonFinite {
                index: self.t(),
                value: y,
            });
        }
        let loss = self.spec.pieces_unchecked(y);
        let t = self.t();
        if let Some(prev) = self.records.last() {
            // Starting a new segment after y_t costs Q_t + β for every θ.
            let level = prev.cost + self.beta;
            let slack = TIE_TOL * level.abs().max(1.0);
            self.q
                .min_with_constant_tied_into(level, t, slack, &mut self.scratch);
        } else {
            self.scratch.clone_from(&self.q);
        }
        let pruned_pieces = self.scratch.piece_count();
        self.scratch.add_loss_into(&loss, &mut self.q)?;
        let best = self.q.global_min_latest(TIE_TOL)?;
        let record = Checkpoint {
            cost: best.value,
            most_recent_cp: best.tau,
        };
        self.records.push(record);
        self.data.push(y);

        let pieces = self.q.piece_count();
        let s = &mut self.stats;
        s.max = s.max.max(pieces).max(pruned_pieces);
        s.total += pieces as u64;
        s.mean = s.total as f64 / self.records.len() as f64;
        s.last_pruned = pruned_pieces;
        s.last = pieces;
        Ok(record)
    }

    /// `(Q_t, most recent changepoint)` for the data seen so far.
    pub fn current_best(&self) -> Result<Checkpoint> {
        self.records.last().copied().ok_or(Error::Empty)
    }

    /// Optimal changepoints of the prefix, oldest first.
    pub fn changepoints(&self) -> Result<Vec<usize>> {
        let mut tau = self.current_best()?.most_recent_cp;
        let mut cps = Vec::new();
        while tau > 0 {
            cps.push(tau);
            tau = self.records[tau - 1].most_recent_cp;
        }
        cps.reverse();
        Ok(cps)
    }

    /// Walks the stored changepoints back from `t` and fits each segment.
    pub fn backtrack(&self) -> Result<Segmentation> {
        let cps = self.changepoints()?;
        Segmentation::from_changepoints(&self.data, cps, &self.spec, self.beta)
    }
}

/// Batch driver: runs the recursion over `data` and backtracks.
pub fn run(data: &[f64], spec: &LossSpec, beta: f64) -> Result<(Segmentation, IntervalStats)> {
    if data.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    check_finite(data)?;
    let mut state = OnlineState::init(*spec, beta)?;
    for &y in data {
        state.step(y)?;
    }
    Ok((state.backtrack()?, state.interval_stats()))
}

/// Upper bound on stored pieces at step `t` for a convex loss with `pieces`
/// pieces per observation.
pub fn convex_piece_bound(t: usize, pieces: usize) -> usize {
    2 * t - 1 + t * (pieces - 1)
}
