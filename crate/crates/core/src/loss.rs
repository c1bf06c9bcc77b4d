// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-observation losses as piecewise quadratics in θ, plus the data-driven
//! defaults for the threshold `K` and the changepoint penalty `β`.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::pwq::{Interval, Quadratic};

/// Gaussian consistency factor for the median absolute deviation.
pub const MAD_GAUSSIAN_FACTOR: f64 = 1.4826;
/// Default biweight threshold in units of the noise scale.
pub const BIWEIGHT_K_SIGMA: f64 = 3.0;
/// Default Huber threshold in units of the noise scale.
pub const HUBER_K_SIGMA: f64 = 1.345;
/// Window of the running median used by [`biweight_k_diagnostic`].
pub const DIAGNOSTIC_WINDOW: usize = 21;

/// At most three pieces per observation for every supported loss.
pub type LossPieces = ArrayVec<(Interval, Quadratic), 3>;

/// Loss family without its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L2,
    L1,
    Huber,
    Biweight,
    Quantile,
}

impl LossKind {
    pub const ALL: [LossKind; 5] = [
        LossKind::L2,
        LossKind::L1,
        LossKind::Huber,
        LossKind::Biweight,
        LossKind::Quantile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::L2 => "l2",
            LossKind::L1 => "l1",
            LossKind::Huber => "huber",
            LossKind::Biweight => "biweight",
            LossKind::Quantile => "quantile",
        }
    }

    /// Default `K / σ̂` for thresholded losses.
    pub fn default_k_sigma(self) -> Option<f64> {
        match self {
            LossKind::Huber => Some(HUBER_K_SIGMA),
            LossKind::Biweight => Some(BIWEIGHT_K_SIGMA),
            _ => None,
        }
    }

    pub fn has_threshold(self) -> bool {
        matches!(self, LossKind::Huber | LossKind::Biweight)
    }

    /// Whether the loss grows with |y - θ|² (true) or |y - θ| (false) far out
    /// in its central region; decides whether β scales with σ̂² or σ̂.
    fn is_squared_scale(self) -> bool {
        matches!(self, LossKind::L2 | LossKind::Huber | LossKind::Biweight)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "square" | "squared" => Ok(LossKind::L2),
            "l1" | "absolute" => Ok(LossKind::L1),
            "huber" => Ok(LossKind::Huber),
            "biweight" => Ok(LossKind::Biweight),
            "quantile" => Ok(LossKind::Quantile),
            other => Err(Error::InvalidLoss(format!(
                "unknown loss '{other}'; expected l2, l1, huber, biweight or quantile"
            ))),
        }
    }
}

/// A fully parameterised loss γ(y; θ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossSpec {
    /// (y - θ)²
    L2,
    /// |y - θ|
    L1,
    /// Quadratic within `k` of y, linear with slope 2k beyond.
    Huber { k: f64 },
    /// min((y - θ)², k²)
    Biweight { k: f64 },
    /// Asymmetric absolute error targeting the `u`-th quantile.
    Quantile { u: f64 },
}

impl LossSpec {
    pub fn kind(&self) -> LossKind {
        match self {
            LossSpec::L2 => LossKind::L2,
            LossSpec::L1 => LossKind::L1,
            LossSpec::Huber { .. } => LossKind::Huber,
            LossSpec::Biweight { .. } => LossKind::Biweight,
            LossSpec::Quantile { .. } => LossKind::Quantile,
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match *self {
            LossSpec::Huber { k } | LossSpec::Biweight { k } => Some(k),
            _ => None,
        }
    }

    pub fn quantile(&self) -> Option<f64> {
        match *self {
            LossSpec::Quantile { u } => Some(u),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Huber { k } | LossSpec::Biweight { k } if !(k > 0.0 && k.is_finite()) => Err(
                Error::InvalidLoss(format!("threshold K must be positive and finite, got {k}")),
            ),
            LossSpec::Quantile { u } if !(u > 0.0 && u < 1.0) => Err(Error::InvalidLoss(format!(
                "quantile level must lie in (0, 1), got {u}"
            ))),
            _ => Ok(()),
        }
    }

    /// Number of quadratic pieces per observation.
    pub fn piece_count(&self) -> usize {
        match self {
            LossSpec::L2 => 1,
            LossSpec::L1 | LossSpec::Quantile { .. } => 2,
            LossSpec::Huber { .. } | LossSpec::Biweight { .. } => 3,
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, LossSpec::Biweight { .. })
    }

    /// Upper bound of the loss, if it is bounded.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            LossSpec::Biweight { k } => Some(k * k),
            _ => None,
        }
    }

    /// γ(y; θ) evaluated directly from its closed form.
    pub fn value(&self, y: f64, theta: f64) -> f64 {
        let r = y - theta;
        match *self {
            LossSpec::L2 => r * r,
            LossSpec::L1 => r.abs(),
            LossSpec::Huber { k } => {
                if r.abs() < k {
                    r * r
                } else {
                    2.0 * k * r.abs() - k * k
                }
            }
            LossSpec::Biweight { k } => (r * r).min(k * k),
            LossSpec::Quantile { u } => {
                if r > 0.0 {
                    2.0 * u * r
                } else {
                    -2.0 * (1.0 - u) * r
                }
            }
        }
    }

    /// The loss of datum `y` as line-tiling pieces in θ.
    pub fn pieces(&self, y: f64) -> Result<LossPieces> {
        if !y.is_finite() {
            return Err(Error::NonFinite { index: 0, value: y });
        }
        self.validate()?;
        Ok(self.pieces_unchecked(y))
    }

    pub(crate) fn pieces_unchecked(&self, y: f64) -> LossPieces {
        const NEG: f64 = f64::NEG_INFINITY;
        const POS: f64 = f64::INFINITY;
        let mut out = LossPieces::new();
        let mut push = |lo: f64, hi: f64, q: Quadratic| {
            out.push((Interval::new_unchecked(lo, hi), q));
        };
        match *self {
            LossSpec::L2 => push(NEG, POS, Quadratic::parabola(1.0, y, 0.0)),
            LossSpec::L1 => {
                push(NEG, y, Quadratic::line(-1.0, y, 0.0));
                push(y, POS, Quadratic::line(1.0, y, 0.0));
            }
            LossSpec::Quantile { u } => {
                push(NEG, y, Quadratic::line(-2.0 * u, y, 0.0));
                push(y, POS, Quadratic::line(2.0 * (1.0 - u), y, 0.0));
            }
            LossSpec::Huber { k } => {
                let (lo, hi) = (y - k, y + k);
                push(NEG, lo, Quadratic::line(-2.0 * k, lo, k * k));
                push(lo, hi, Quadratic::parabola(1.0, y, 0.0));
                push(hi, POS, Quadratic::line(2.0 * k, hi, k * k));
            }
            LossSpec::Biweight { k } => {
                let (lo, hi) = (y - k, y + k);
                push(NEG, lo, Quadratic::constant(k * k));
                push(lo, hi, Quadratic::parabola(1.0, y, 0.0));
                push(hi, POS, Quadratic::constant(k * k));
            }
        }
        out
    }

    /// Same loss with every length scale multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> LossSpec {
        match *self {
            LossSpec::Huber { k } => LossSpec::Huber { k: k * factor },
            LossSpec::Biweight { k } => LossSpec::Biweight { k: k * factor },
            other => other,
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LossSpec::Huber { k } | LossSpec::Biweight { k } => {
                write!(f, "{}(K={k})", self.kind())
            }
            LossSpec::Quantile { u } => write!(f, "quantile(u={u})"),
            _ => write!(f, "{}", self.kind()),
        }
    }
}

/// γ(y; ·) as ordered `(interval, quadratic)` pieces.
pub fn loss_pieces(y: f64, spec: &LossSpec) -> Result<LossPieces> {
    spec.pieces(y)
}

/// Exact minimiser of Σ γ(y_i; θ) over a segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentFit {
    pub cost: f64,
    pub theta: f64,
}

/// Minimises the summed loss of `values` by sweeping the sorted breakpoints.
///
/// Runs in O(m log m), so it is usable on long segments where building the
/// piecewise sum one observation at a time would be quadratic. Ties go to
/// the smallest θ.
pub fn segment_fit(values: &[f64], spec: &LossSpec) -> Result<SegmentFit> {
    if values.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    check_finite(values)?;
    spec.validate()?;

    // Work relative to the median so squared terms stay small.
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let origin = sorted[sorted.len() / 2];

    let coef = |q: &Quadratic| [q.a(), q.b(), q.c()];
    let mut start = [0.0f64; 3];
    let mut end = [0.0f64; 3];
    let mut events: Vec<(f64, [f64; 3])> = Vec::with_capacity(values.len() * 2);
    for &y in values {
        let pieces = spec.pieces_unchecked(y - origin);
        let first = coef(&pieces[0].1);
        let last = coef(&pieces[pieces.len() - 1].1);
        for i in 0..3 {
            start[i] += first[i];
            end[i] += last[i];
        }
        for w in pieces.windows(2) {
            let (l, r) = (coef(&w[0].1), coef(&w[1].1));
            events.push((w[0].0.hi(), [r[0] - l[0], r[1] - l[1], r[2] - l[2]]));
        }
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut best = (f64::INFINITY, 0.0);
    let mut consider = |acc: &[f64; 3], lo: f64, hi: f64| -> Result<()> {
        let (value, at) = min_on_interval(acc, lo, hi)?;
        if value < best.0 {
            best = (value, at);
        }
        Ok(())
    };

    let mut acc = start;
    let mut lo = f64::NEG_INFINITY;
    let mut e = 0;
    while e < events.len() {
        let hi = events[e].0;
        consider(&acc, lo, hi)?;
        while e < events.len() && events[e].0 == hi {
            for (a, d) in acc.iter_mut().zip(events[e].1) {
                *a += d;
            }
            e += 1;
        }
        lo = hi;
    }
    // The unbounded right-hand region is summed directly; accumulated deltas
    // can leave a spurious residual slope there.
    consider(&end, lo, f64::INFINITY)?;

    Ok(SegmentFit {
        cost: best.0,
        theta: best.1 + origin,
    })
}

fn min_on_interval(acc: &[f64; 3], lo: f64, hi: f64) -> Result<(f64, f64)> {
    let [a, b, c] = *acc;
    let value = |u: f64| a * u * u + b * u + c;
    if a > 0.0 {
        let vertex = -b / (2.0 * a);
        let u = if vertex <= lo {
            lo
        } else if vertex > hi {
            hi
        } else {
            vertex
        };
        Ok((value(u), u))
    } else if b > 0.0 {
        if lo.is_infinite() {
            return Err(Error::UnboundedBelow { lo, hi });
        }
        Ok((value(lo), lo))
    } else if b < 0.0 {
        if hi.is_infinite() {
            return Err(Error::UnboundedBelow { lo, hi });
        }
        Ok((value(hi), hi))
    } else {
        let u = if hi.is_finite() {
            hi
        } else if lo.is_finite() {
            lo
        } else {
            0.0
        };
        Ok((c, u))
    }
}

/// Penalised cost Σ (C(segment) + β) of an explicit segmentation.
///
/// `changepoints` are the last indices (1-based) of every segment but the
/// final one.
pub fn penalised_cost(
    data: &[f64],
    changepoints: &[usize],
    spec: &LossSpec,
    beta: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (s, e) in segment_bounds(changepoints, data.len())? {
        total += segment_fit(&data[s..e], spec)?.cost + beta;
    }
    Ok(total)
}

/// Half-open `[start, end)` index ranges of the segments implied by
/// `changepoints`.
pub fn segment_bounds(changepoints: &[usize], n: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(changepoints.len() + 1);
    let mut prev = 0;
    for &cp in changepoints {
        if cp <= prev || cp >= n {
            return Err(Error::InvalidSegmentation(format!(
                "changepoints must be strictly increasing within (0, {n}), got {changepoints:?}"
            )));
        }
        out.push((prev, cp));
        prev = cp;
    }
    if n == 0 {
        return Err(Error::InvalidSegmentation("empty series".into()));
    }
    out.push((prev, n));
    Ok(out)
}

pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Robust noise-scale estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleEstimate {
    pub sigma: f64,
    /// True when the estimate is zero and cannot be used to scale defaults.
    pub degenerate: bool,
}

/// MAD of the first differences, calibrated to a Gaussian standard deviation.
pub fn mad_sigma(data: &[f64]) -> Result<ScaleEstimate> {
    if data.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: data.len(),
        });
    }
    check_finite(data)?;
    let mut diffs: Vec<f64> = data.windows(2).map(|w| w[1] - w[0]).collect();
    let centre = median_in_place(&mut diffs);
    for d in diffs.iter_mut() {
        *d = (*d - centre).abs();
    }
    let mad = median_in_place(&mut diffs);
    let sigma = mad * MAD_GAUSSIAN_FACTOR / std::f64::consts::SQRT_2;
    Ok(ScaleEstimate {
        sigma,
        degenerate: !(sigma > 0.0),
    })
}

fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// E(φ(Z)²) for standard Gaussian Z, with φ the influence function
/// normalised so that the squared-error loss gives exactly one.
///
/// Thresholds in `spec` are read in units of the noise scale.
pub fn phi_sq_expectation(spec: &LossSpec) -> f64 {
    // Beyond ±12 the Gaussian mass is below 1e-32.
    const EDGE: f64 = 12.0;
    const TOL: f64 = 1e-14;
    match *spec {
        LossSpec::L2 | LossSpec::L1 => 1.0,
        LossSpec::Huber { k } => {
            let k = k.min(EDGE);
            let phi2 = move |x: f64| {
                let c = x.clamp(-k, k);
                c * c * gaussian_pdf(x)
            };
            integrate_split(&phi2, k, EDGE, TOL)
        }
        LossSpec::Biweight { k } => {
            let k = k.min(EDGE);
            let phi2 = move |x: f64| {
                if x.abs() <= k {
                    x * x * gaussian_pdf(x)
                } else {
                    0.0
                }
            };
            integrate_split(&phi2, k, EDGE, TOL)
        }
        LossSpec::Quantile { u } => {
            // φ = 2u above zero and -2(1-u) below; at u = 1/2 this is ±1.
            let phi2 = move |x: f64| {
                let v = if x > 0.0 { 2.0 * u } else { 2.0 * (1.0 - u) };
                v * v * gaussian_pdf(x)
            };
            adaptive_simpson(&phi2, -EDGE, 0.0, TOL) + adaptive_simpson(&phi2, 0.0, EDGE, TOL)
        }
    }
}

fn integrate_split<F: Fn(f64) -> f64>(f: &F, k: f64, edge: f64, tol: f64) -> f64 {
    let mut total = adaptive_simpson(f, -k, k, tol);
    if k < edge {
        total += adaptive_simpson(f, -edge, -k, tol) + adaptive_simpson(f, k, edge, tol);
    }
    total
}

/// σ̂, β and the series length behind a penalty choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PenaltyConfig {
    pub sigma_hat: Option<f64>,
    pub beta: f64,
    pub n: usize,
}

/// Loss and penalty resolved against a particular series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub spec: LossSpec,
    pub penalty: PenaltyConfig,
}

/// How `K` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    SigmaMultiple(f64),
}

/// How `β` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Penalty {
    Absolute(f64),
    /// Multiple of the information-criterion default.
    Multiplier(f64),
}

/// Caller overrides for [`resolve_config`]. `None` means "use the default".
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tuning {
    pub threshold: Option<Threshold>,
    pub penalty: Option<Penalty>,
    pub quantile: Option<f64>,
}

/// β = 2 σ̂² log(n) E(φ(Z)²), with `spec` thresholds in σ units.
///
/// Losses that grow linearly (L1, quantile) scale with σ̂ rather than σ̂².
pub fn information_penalty(spec_in_sigma_units: &LossSpec, sigma_hat: f64, n: f64) -> f64 {
    let scale = if spec_in_sigma_units.kind().is_squared_scale() {
        sigma_hat * sigma_hat
    } else {
        sigma_hat
    };
    2.0 * scale * n.max(1.0).ln() * phi_sq_expectation(spec_in_sigma_units)
}

/// Defaults: K = 3σ̂ (biweight) or 1.345σ̂ (Huber), β from
/// [`information_penalty`]. Quantile losses default to the median.
pub fn default_config(kind: LossKind, data: &[f64]) -> Result<ResolvedConfig> {
    resolve_config(kind, data, &Tuning::default())
}

/// Resolves `K` and `β` for `data`, estimating σ̂ only where needed.
pub fn resolve_config(kind: LossKind, data: &[f64], tuning: &Tuning) -> Result<ResolvedConfig> {
    check_finite(data)?;
    let scale = if data.len() >= 2 {
        Some(mad_sigma(data)?)
    } else {
        None
    };
    let sigma_hat = scale.map(|s| s.sigma);
    let usable_sigma = || match scale {
        Some(s) if !s.degenerate => Ok(s.sigma),
        _ => Err(Error::DegenerateScale),
    };

    let spec = match kind {
        LossKind::L2 => LossSpec::L2,
        LossKind::L1 => LossSpec::L1,
        LossKind::Quantile => LossSpec::Quantile {
            u: tuning.quantile.unwrap_or(0.5),
        },
        LossKind::Huber | LossKind::Biweight => {
            let k = match tuning
                .threshold
                .unwrap_or(Threshold::SigmaMultiple(kind.default_k_sigma().unwrap()))
            {
                Threshold::Absolute(k) => k,
                Threshold::SigmaMultiple(m) => m * usable_sigma()?,
            };
            if kind == LossKind::Huber {
                LossSpec::Huber { k }
            } else {
                LossSpec::Biweight { k }
            }
        }
    };
    if tuning.quantile.is_some() && kind != LossKind::Quantile {
        return Err(Error::InvalidConfig(
            "a quantile level only applies to the quantile loss".into(),
        ));
    }
    spec.validate()?;

    let beta = match tuning.penalty.unwrap_or(Penalty::Multiplier(1.0)) {
        Penalty::Absolute(b) => b,
        Penalty::Multiplier(m) => {
            let sigma = usable_sigma()?;
            m * information_penalty(&spec.rescaled(1.0 / sigma), sigma, data.len() as f64)
        }
    };
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidPenalty(beta));
    }
    Ok(ResolvedConfig {
        spec,
        penalty: PenaltyConfig {
            sigma_hat,
            beta,
            n: data.len(),
        },
    })
}

/// Shortest segment the penalised cost can ever select.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSegmentLength {
    /// Unbounded loss: a single extreme point can always be isolated.
    Unbounded,
    AtLeast(usize),
}

impl MinSegmentLength {
    pub fn as_option(self) -> Option<usize> {
        match self {
            MinSegmentLength::Unbounded => None,
            MinSegmentLength::AtLeast(m) => Some(m),
        }
    }
}

/// For a loss bounded by B, every optimal segment is longer than β/B.
pub fn min_segment_length(spec: &LossSpec, beta: f64) -> MinSegmentLength {
    match spec.bound() {
        Some(bound) if bound > 0.0 => {
            MinSegmentLength::AtLeast((beta / bound).floor() as usize + 1)
        }
        _ => MinSegmentLength::Unbounded,
    }
}

/// Outcome of the sufficient-threshold check for the biweight loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KDiagnostic {
    pub sufficient: bool,
    pub stat: f64,
}

/// Compares `k` with sqrt(3 · mean(min(r², k²))) on running-median residuals.
/// Advisory only.
pub fn biweight_k_diagnostic(data: &[f64], k: f64) -> Result<KDiagnostic> {
    if data.len() < DIAGNOSTIC_WINDOW {
        return Err(Error::TooShort {
            need: DIAGNOSTIC_WINDOW,
            got: data.len(),
        });
    }
    check_finite(data)?;
    if !(k > 0.0) {
        return Err(Error::InvalidLoss(format!(
            "threshold K must be positive, got {k}"
        )));
    }
    let half = DIAGNOSTIC_WINDOW / 2;
    let mut window = Vec::with_capacity(DIAGNOSTIC_WINDOW);
    let mut acc = 0.0;
    for i in 0..data.len() {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(data.len());
        window.clear();
        window.extend_from_slice(&data[lo..hi]);
        let r = data[i] - median_in_place(&mut window);
        acc += (r * r).min(k * k);
    }
    let stat = (3.0 * acc / data.len() as f64).sqrt();
    Ok(KDiagnostic {
        sufficient: k > stat,
        stat,
    })
}
