// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise-quadratic functions of a scalar location parameter.
//!
//! A [`PiecewiseQuadFn`] is an ordered list of pieces `(lo, hi] -> q(θ)`
//! tiling the whole real line, each tagged with the most recent changepoint
//! that produced it. The detector needs three manipulations of these
//! functions: adding a per-observation loss, finding the global minimum, and
//! taking the pointwise minimum with a constant.
//!
//! Quadratics are stored in vertex form `a(θ - h)² + m` (or `s(θ - h) + m`
//! when `a = 0`) rather than as raw `aθ² + bθ + c` coefficients. Sums of
//! many squared losses keep their precision this way even when the data sit
//! far from zero, and roots against a constant come out of a single square
//! root with no cancellation.

use crate::error::{Error, Result};

/// Coefficients closer than this (relative to their magnitude) are treated as
/// equal when deciding whether two neighbouring pieces can be merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Roots closer than this (relative) to an interval endpoint are snapped onto
/// the endpoint instead of creating a sliver piece.
pub const ROOT_SNAP_TOL: f64 = 1e-12;
/// `|c - m|` at or below this (relative) counts as a tangency: no split.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Relative tolerance for the continuity invariant at interior boundaries.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[inline]
fn scale(x: f64) -> f64 {
    x.abs().max(1.0)
}

#[inline]
fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * scale(x).max(scale(y))
}

/// A quadratic `θ ↦ aθ² + bθ + c`, including the linear and constant cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic {
    curvature: f64,
    center: f64,
    slope: f64,
    offset: f64,
}

impl Quadratic {
    /// Builds the quadratic `aθ² + bθ + c`.
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        if a != 0.0 {
            let center = -b / (2.0 * a);
            Self {
                curvature: a,
                center,
                slope: 0.0,
                offset: c - b * b / (4.0 * a),
            }
        } else {
            Self::line(b, 0.0, c)
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            curvature: 0.0,
            center: 0.0,
            slope: 0.0,
            offset: c,
        }
    }

    /// `a(θ - center)² + offset`.
    pub fn parabola(a: f64, center: f64, offset: f64) -> Self {
        if a == 0.0 {
            return Self::constant(offset);
        }
        Self {
            curvature: a,
            center,
            slope: 0.0,
            offset,
        }
    }

    /// The line through `(anchor, value)` with the given slope.
    pub fn line(slope: f64, anchor: f64, value: f64) -> Self {
        if slope == 0.0 {
            return Self::constant(value);
        }
        Self {
            curvature: 0.0,
            center: anchor,
            slope,
            offset: value,
        }
    }

    /// Coefficient of θ².
    pub fn a(&self) -> f64 {
        self.curvature
    }

    /// Coefficient of θ.
    pub fn b(&self) -> f64 {
        self.slope - 2.0 * self.curvature * self.center
    }

    /// Constant term.
    pub fn c(&self) -> f64 {
        self.curvature * self.center * self.center - self.slope * self.center + self.offset
    }

    pub fn is_constant(&self) -> bool {
        self.curvature == 0.0 && self.slope == 0.0
    }

    pub fn value(&self, theta: f64) -> f64 {
        if theta.is_infinite() {
            return self.value_at_infinity(theta > 0.0);
        }
        let d = theta - self.center;
        if self.curvature != 0.0 {
            self.curvature * d * d + self.offset
        } else if self.slope != 0.0 {
            self.slope * d + self.offset
        } else {
            self.offset
        }
    }

    fn value_at_infinity(&self, positive: bool) -> f64 {
        if self.curvature != 0.0 {
            self.curvature * f64::INFINITY
        } else if self.slope != 0.0 {
            if positive {
                self.slope * f64::INFINITY
            } else {
                -self.slope * f64::INFINITY
            }
        } else {
            self.offset
        }
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        2.0 * self.curvature * (theta - self.center) + self.slope
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Quadratic) -> Quadratic {
        let (p, q) = (self, other);
        match (p.curvature != 0.0, q.curvature != 0.0) {
            (true, true) => {
                let a = p.curvature + q.curvature;
                if a == 0.0 {
                    // Opposite curvatures cancel; fall back to expanded form.
                    return Quadratic::new(0.0, p.b() + q.b(), p.c() + q.c());
                }
                let gap = q.center - p.center;
                Quadratic {
                    curvature: a,
                    center: p.center + (q.curvature / a) * gap,
                    slope: 0.0,
                    offset: p.offset + q.offset + (p.curvature * q.curvature / a) * gap * gap,
                }
            }
            (true, false) => absorb_line(p, q),
            (false, true) => absorb_line(q, p),
            (false, false) => {
                // Anchor at whichever input actually carries a slope.
                let (anchor, other) = if p.slope != 0.0 { (p, q) } else { (q, p) };
                let slope = p.slope + q.slope;
                let offset = anchor.offset + other.value(anchor.center);
                Quadratic::line(slope, anchor.center, offset)
            }
        }
    }

    /// Whether two quadratics agree (curvature, slope and value) at `x`.
    pub fn approx_eq_at(&self, other: &Quadratic, x: f64) -> bool {
        if !close(self.curvature, other.curvature, MERGE_TOL) {
            return false;
        }
        if self.is_constant() && other.is_constant() {
            return close(self.offset, other.offset, MERGE_TOL);
        }
        let x = if x.is_finite() { x } else { 0.0 };
        close(self.derivative(x), other.derivative(x), MERGE_TOL)
            && close(self.value(x), other.value(x), MERGE_TOL)
    }

    /// Infimum over `(lo, hi]`, with the point where it is reached.
    fn min_on(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let unbounded = || Err(Error::UnboundedBelow { lo, hi });
        if self.curvature > 0.0 {
            let x = if self.center <= lo {
                lo
            } else if self.center > hi {
                hi
            } else {
                return Ok((self.offset, self.center));
            };
            Ok((self.value(x), x))
        } else if self.curvature < 0.0 {
            if lo.is_infinite() || hi.is_infinite() {
                return unbounded();
            }
            let (vl, vh) = (self.value(lo), self.value(hi));
            Ok(if vl < vh { (vl, lo) } else { (vh, hi) })
        } else if self.slope > 0.0 {
            if lo.is_infinite() {
                return unbounded();
            }
            Ok((self.value(lo), lo))
        } else if self.slope < 0.0 {
            if hi.is_infinite() {
                return unbounded();
            }
            Ok((self.value(hi), hi))
        } else {
            let x = if hi.is_finite() {
                hi
            } else if lo.is_finite() {
                lo
            } else {
                0.0
            };
            Ok((self.offset, x))
        }
    }

    /// Real roots of `self(θ) = level`, ascending. Tangencies yield none.
    fn roots_against(&self, level: f64) -> ([f64; 2], usize) {
        let gap = level - self.offset;
        if self.curvature != 0.0 {
            if gap.abs() <= TANGENCY_TOL * scale(level).max(scale(self.offset)) {
                return ([0.0; 2], 0);
            }
            let r = gap / self.curvature;
            if r <= 0.0 {
                return ([0.0; 2], 0);
            }
            let d = r.sqrt();
            ([self.center - d, self.center + d], 2)
        } else if self.slope != 0.0 {
            ([self.center + gap / self.slope, 0.0], 1)
        } else {
            ([0.0; 2], 0)
        }
    }
}

/// `p + q` where `p` has curvature and `q` is a line.
fn absorb_line(p: &Quadratic, q: &Quadratic) -> Quadratic {
    let s = q.slope;
    let a = p.curvature;
    // a(θ-h)² + m + s(θ-h) + q(h)  ==  a(θ-h')² + m'
    Quadratic {
        curvature: a,
        center: p.center - s / (2.0 * a),
        slope: 0.0,
        offset: p.offset + q.value(p.center) - s * s / (4.0 * a),
    }
}

/// Half-open interval `(lo, hi]` of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi && !lo.is_nan() && !hi.is_nan() && lo != f64::INFINITY && hi != f64::NEG_INFINITY
        {
            Ok(Self { lo, hi })
        } else {
            Err(Error::NotTiling(format!("empty interval ({lo}, {hi}]")))
        }
    }

    pub const fn whole_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub(crate) const fn new_unchecked(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo < theta && theta <= self.hi
    }
}

/// One piece of a [`PiecewiseQuadFn`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub interval: Interval,
    pub quad: Quadratic,
    /// Most recent changepoint associated with this piece.
    pub tau: usize,
}

/// Global minimum of a piecewise quadratic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub value: f64,
    pub argmin: f64,
    pub tau: usize,
}

/// Checks that `(interval, quadratic)` pairs tile the real line in order.
pub fn check_tiling(pieces: &[(Interval, Quadratic)]) -> Result<()> {
    let (first, last) = match (pieces.first(), pieces.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::NotTiling("no pieces".into())),
    };
    if first.0.lo != f64::NEG_INFINITY || last.0.hi != f64::INFINITY {
        return Err(Error::NotTiling(format!(
            "pieces span ({}, {}], not the whole line",
            first.0.lo, last.0.hi
        )));
    }
    for w in pieces.windows(2) {
        if w[0].0.hi != w[1].0.lo {
            return Err(Error::NotTiling(format!(
                "gap or overlap between {} and {}",
                w[0].0.hi, w[1].0.lo
            )));
        }
    }
    Ok(())
}

/// Ordered piecewise quadratic on `(-∞, ∞)` with changepoint labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseQuadFn {
    pieces: Vec<Piece>,
}

impl PiecewiseQuadFn {
    /// The constant function `beta` labelled with changepoint 0.
    pub fn make_initial(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidPenalty(beta));
        }
        Ok(Self::constant(beta, 0))
    }

    pub fn constant(value: f64, tau: usize) -> Self {
        Self {
            pieces: vec![Piece {
                interval: Interval::whole_line(),
                quad: Quadratic::constant(value),
                tau,
            }],
        }
    }

    /// Builds a function from explicit pieces, validating every invariant.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self> {
        let f = Self { pieces };
        f.check_invariants().map_err(Error::NotTiling)?;
        Ok(f)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Value at `theta`; on a boundary the left (closed-side) piece is used.
    pub fn evaluate(&self, theta: f64) -> f64 {
        let idx = self
            .pieces
            .partition_point(|p| p.interval.hi < theta)
            .min(self.pieces.len() - 1);
        self.pieces[idx].quad.value(theta)
    }

    /// Returns `self + loss`. Boundaries are the union of both inputs' and the
    /// labels come from `self`.
    pub fn add_loss(&self, loss: &[(Interval, Quadratic)]) -> Result<Self> {
        let mut out = Self { pieces: Vec::new() };
        self.add_loss_into(loss, &mut out)?;
        Ok(out)
    }

    /// Buffer-reusing form of [`add_loss`](Self::add_loss).
    pub fn add_loss_into(&self, loss: &[(Interval, Quadratic)], out: &mut Self) -> Result<()> {
        check_tiling(loss)?;
        out.pieces.clear();
        let (mut i, mut j) = (0, 0);
        let mut lo = f64::NEG_INFINITY;
        while i < self.pieces.len() && j < loss.len() {
            let p = &self.pieces[i];
            let (ref interval, ref lq) = loss[j];
            let hi = p.interval.hi.min(interval.hi);
            push_merged(
                &mut out.pieces,
                Piece {
                    interval: Interval::new_unchecked(lo, hi),
                    quad: p.quad.add(lq),
                    tau: p.tau,
                },
            );
            if p.interval.hi == hi {
                i += 1;
            }
            if interval.hi == hi {
                j += 1;
            }
            lo = hi;
        }
        out.debug_check();
        Ok(())
    }

    /// Minimum over the whole line; ties go to the leftmost piece.
    pub fn global_min(&self) -> Result<Minimum> {
        let mut best = Minimum {
            value: f64::INFINITY,
            argmin: 0.0,
            tau: 0,
        };
        for p in &self.pieces {
            let (value, argmin) = p.quad.min_on(p.interval.lo, p.interval.hi)?;
            if value < best.value {
                best = Minimum {
                    value,
                    argmin,
                    tau: p.tau,
                };
            }
        }
        Ok(best)
    }

    /// Like [`global_min`](Self::global_min), but among pieces whose minimum
    /// is within `rel_tol` (relative) of the global one, the largest tau wins.
    /// The returned value is still the exact global minimum.
    pub fn global_min_latest(&self, rel_tol: f64) -> Result<Minimum> {
        let best = self.global_min()?;
        let slack = rel_tol * best.value.abs().max(1.0);
        let mut pick = best;
        let mut pick_value = best.value;
        for p in &self.pieces {
            if p.tau < pick.tau {
                continue;
            }
            let (value, argmin) = p.quad.min_on(p.interval.lo, p.interval.hi)?;
            if value <= best.value + slack && (p.tau > pick.tau || value < pick_value) {
                pick = Minimum {
                    value: best.value,
                    argmin,
                    tau: p.tau,
                };
                pick_value = value;
            }
        }
        Ok(pick)
    }

    /// Pointwise `min(self, level)`. Wherever the constant is no larger, the
    /// piece becomes `level` labelled `new_tau`.
    pub fn min_with_constant(&self, level: f64, new_tau: usize) -> Self {
        let mut out = Self { pieces: Vec::new() };
        self.min_with_constant_into(level, new_tau, &mut out);
        out
    }

    /// Buffer-reusing form of [`min_with_constant`](Self::min_with_constant).
    pub fn min_with_constant_into(&self, level: f64, new_tau: usize, out: &mut Self) {
        self.min_with_constant_tied_into(level, new_tau, 0.0, out);
    }

    /// [`min_with_constant_into`](Self::min_with_constant_into) where values
    /// within `slack` below `level` also count as ties and go to `new_tau`.
    /// The result then exceeds the exact pointwise minimum by at most `slack`.
    pub fn min_with_constant_tied_into(
        &self,
        level: f64,
        new_tau: usize,
        slack: f64,
        out: &mut Self,
    ) {
        out.pieces.clear();
        let flat = Quadratic::constant(level);
        let cut = level - slack;
        for p in &self.pieces {
            let Interval { lo, hi } = p.interval;
            let (roots, count) = p.quad.roots_against(cut);
            let mut cuts = [0.0; 2];
            let mut n_cuts = 0;
            for &r in &roots[..count] {
                let above_lo = lo == f64::NEG_INFINITY || r > lo + ROOT_SNAP_TOL * scale(lo);
                let below_hi = hi == f64::INFINITY || r < hi - ROOT_SNAP_TOL * scale(hi);
                let after_prev = n_cuts == 0 || r > cuts[n_cuts - 1];
                if above_lo && below_hi && after_prev {
                    cuts[n_cuts] = r;
                    n_cuts += 1;
                }
            }
            let mut start = lo;
            for end in cuts[..n_cuts].iter().copied().chain(std::iter::once(hi)) {
                let probe = representative(start, end);
                let piece = if p.quad.value(probe) >= cut {
                    Piece {
                        interval: Interval::new_unchecked(start, end),
                        quad: flat,
                        tau: new_tau,
                    }
                } else {
                    Piece {
                        interval: Interval::new_unchecked(start, end),
                        quad: p.quad,
                        tau: p.tau,
                    }
                };
                push_merged(&mut out.pieces, piece);
                start = end;
            }
        }
        out.debug_check();
    }

    /// Verifies tiling, uniqueness and continuity; returns a description of
    /// the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let first = self.pieces.first().ok_or("no pieces")?;
        let last = self.pieces.last().ok_or("no pieces")?;
        if first.interval.lo != f64::NEG_INFINITY || last.interval.hi != f64::INFINITY {
            return Err("pieces do not cover the whole line".into());
        }
        for p in &self.pieces {
            if !(p.interval.lo < p.interval.hi) {
                return Err(format!(
                    "empty piece ({}, {}]",
                    p.interval.lo, p.interval.hi
                ));
            }
        }
        for w in self.pieces.windows(2) {
            let (l, r) = (&w[0], &w[1]);
            let x = l.interval.hi;
            if x != r.interval.lo {
                return Err(format!("gap between {} and {}", x, r.interval.lo));
            }
            if l.tau == r.tau && l.quad.approx_eq_at(&r.quad, x) {
                return Err(format!("unmerged duplicate pieces at {x}"));
            }
            let (vl, vr) = (l.quad.value(x), r.quad.value(x));
            // Boundaries are themselves rounded, so allow for the slope times
            // a few ulps of the boundary position.
            let slack = 4.0
                * f64::EPSILON
                * scale(x)
                * l.quad.derivative(x).abs().max(r.quad.derivative(x).abs());
            let tol = CONTINUITY_TOL * scale(vl).max(scale(vr)) + slack;
            if (vl - vr).abs() > tol {
                return Err(format!("discontinuity at {x}: {vl} vs {vr}"));
            }
        }
        Ok(())
    }

    #[inline]
    fn debug_check(&self) {
        if cfg!(debug_assertions) {
            if let Err(msg) = self.check_invariants() {
                panic!("piecewise quadratic invariant violated: {msg}");
            }
        }
    }
}

/// A point strictly inside `(lo, hi]` away from both ends.
fn representative(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => lo + 0.5 * (hi - lo),
        (false, true) => hi - scale(hi),
        (true, false) => lo + scale(lo),
        (false, false) => 0.0,
    }
}

fn push_merged(out: &mut Vec<Piece>, piece: Piece) {
    if let Some(last) = out.last_mut() {
        if last.tau == piece.tau && last.quad.approx_eq_at(&piece.quad, last.interval.hi) {
            last.interval.hi = piece.interval.hi;
            return;
        }
    }
    out.push(piece);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const INF: f64 = f64::INFINITY;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn biweight_at(y: f64, k: f64) -> Vec<(Interval, Quadratic)> {
        vec![
            (iv(-INF, y - k), Quadratic::constant(k * k)),
            (iv(y - k, y + k), Quadratic::parabola(1.0, y, 0.0)),
            (iv(y + k, INF), Quadratic::constant(k * k)),
        ]
    }

    fn bounds(f: &PiecewiseQuadFn) -> Vec<f64> {
        f.pieces()[..f.piece_count() - 1]
            .iter()
            .map(|p| p.interval.hi())
            .collect()
    }

    #[test]
    fn coefficient_round_trip() {
        let q = Quadratic::new(2.0, -4.0, 7.0);
        assert_relative_eq!(q.a(), 2.0);
        assert_relative_eq!(q.b(), -4.0);
        assert_relative_eq!(q.c(), 7.0);
        assert_relative_eq!(q.value(3.0), 18.0 - 12.0 + 7.0);
        let l = Quadratic::new(0.0, 3.0, -1.0);
        assert_relative_eq!(l.value(2.0), 5.0);
        assert_relative_eq!(l.c(), -1.0);
    }

    #[test]
    fn initial_function() {
        let f = PiecewiseQuadFn::make_initial(2.0).unwrap();
        assert_eq!(f.piece_count(), 1);
        assert_eq!(f.evaluate(-1e6), 2.0);
        assert_eq!(f.pieces()[0].tau, 0);
        let z = PiecewiseQuadFn::make_initial(0.0).unwrap();
        assert_eq!(z.evaluate(3.0), 0.0);
        assert!(PiecewiseQuadFn::make_initial(-1.0).is_err());
        assert!(PiecewiseQuadFn::make_initial(f64::NAN).is_err());
    }

    #[test]
    fn initial_plus_biweight() {
        let f = PiecewiseQuadFn::make_initial(2.0)
            .unwrap()
            .add_loss(&biweight_at(0.0, 1.0))
            .unwrap();
        assert_eq!(f.piece_count(), 3);
        assert_eq!(bounds(&f), vec![-1.0, 1.0]);
        assert_eq!(f.evaluate(-5.0), 3.0);
        assert_eq!(f.evaluate(0.5), 2.25);
        assert_eq!(f.evaluate(5.0), 3.0);
    }

    #[test]
    fn add_loss_single_pieces() {
        let f = PiecewiseQuadFn::constant(5.0, 0);
        let g = f
            .add_loss(&[(Interval::whole_line(), Quadratic::new(1.0, 0.0, 0.0))])
            .unwrap();
        assert_eq!(g.piece_count(), 1);
        assert_relative_eq!(g.evaluate(3.0), 14.0);
    }

    #[test]
    fn add_loss_shifted_biweight() {
        let g = PiecewiseQuadFn::constant(0.0, 0)
            .add_loss(&biweight_at(2.0, 1.0))
            .unwrap();
        assert_eq!(bounds(&g), vec![1.0, 3.0]);
        assert_eq!(g.evaluate(0.0), 1.0);
        assert_relative_eq!(g.evaluate(2.5), 0.25);
        assert_eq!(g.evaluate(10.0), 1.0);
    }

    #[test]
    fn add_loss_boundary_union() {
        let f = PiecewiseQuadFn::from_pieces(vec![
            Piece {
                interval: iv(-INF, 0.0),
                quad: Quadratic::line(-1.0, 0.0, 0.0),
                tau: 0,
            },
            Piece {
                interval: iv(0.0, INF),
                quad: Quadratic::line(1.0, 0.0, 0.0),
                tau: 0,
            },
        ])
        .unwrap();
        let loss = vec![
            (iv(-INF, 1.0), Quadratic::line(-2.0, 1.0, 0.0)),
            (iv(1.0, INF), Quadratic::line(2.0, 1.0, 0.0)),
        ];
        let g = f.add_loss(&loss).unwrap();
        assert_eq!(bounds(&g), vec![0.0, 1.0]);
        assert_relative_eq!(g.evaluate(0.5), 0.5 + 1.0);
    }

    #[test]
    fn add_loss_rejects_non_tiling() {
        let f = PiecewiseQuadFn::constant(0.0, 0);
        let gap = vec![
            (iv(-INF, 0.0), Quadratic::constant(0.0)),
            (iv(1.0, INF), Quadratic::constant(0.0)),
        ];
        assert!(matches!(f.add_loss(&gap), Err(Error::NotTiling(_))));
        let short = vec![(iv(-INF, 0.0), Quadratic::constant(0.0))];
        assert!(f.add_loss(&short).is_err());
        assert!(f.add_loss(&[]).is_err());
    }

    #[test]
    fn global_min_cases() {
        let f = PiecewiseQuadFn::constant(0.0, 4)
            .add_loss(&[(Interval::whole_line(), Quadratic::parabola(1.0, 2.0, 3.0))])
            .unwrap();
        let m = f.global_min().unwrap();
        assert_eq!((m.value, m.argmin, m.tau), (3.0, 2.0, 4));

        let g = PiecewiseQuadFn::constant(0.0, 0)
            .add_loss(&biweight_at(2.0, 1.0))
            .unwrap();
        let m = g.global_min().unwrap();
        assert_eq!((m.value, m.argmin), (0.0, 2.0));

        let c = PiecewiseQuadFn::constant(7.0, 1);
        let m = c.global_min().unwrap();
        assert_eq!((m.value, m.argmin, m.tau), (7.0, 0.0, 1));
    }

    #[test]
    fn global_min_rejects_unbounded() {
        let f = PiecewiseQuadFn::constant(0.0, 0)
            .add_loss(&[(Interval::whole_line(), Quadratic::line(1.0, 0.0, 0.0))])
            .unwrap();
        assert!(matches!(f.global_min(), Err(Error::UnboundedBelow { .. })));
    }

    #[test]
    fn global_min_prefers_leftmost_on_ties() {
        let f = PiecewiseQuadFn::from_pieces(vec![
            Piece {
                interval: iv(-INF, 5.0),
                quad: Quadratic::parabola(1.0, 0.0, 1.0),
                tau: 3,
            },
            Piece {
                interval: iv(5.0, INF),
                quad: Quadratic::parabola(1.0, 10.0, 1.0),
                tau: 7,
            },
        ])
        .unwrap();
        let m = f.global_min().unwrap();
        assert_eq!((m.value, m.argmin, m.tau), (1.0, 0.0, 3));
    }

    #[test]
    fn min_with_constant_splits_parabola() {
        let f = PiecewiseQuadFn::constant(0.0, 2)
            .add_loss(&[(Interval::whole_line(), Quadratic::new(1.0, 0.0, 0.0))])
            .unwrap();
        let g = f.min_with_constant(1.0, 9);
        assert_eq!(g.piece_count(), 3);
        assert_eq!(bounds(&g), vec![-1.0, 1.0]);
        let taus: Vec<usize> = g.pieces().iter().map(|p| p.tau).collect();
        assert_eq!(taus, vec![9, 2, 9]);
        assert_eq!(g.evaluate(-3.0), 1.0);
        assert_relative_eq!(g.evaluate(0.5), 0.25);
    }

    #[test]
    fn min_with_constant_below_everywhere_is_identity() {
        let f = PiecewiseQuadFn::constant(0.5, 3);
        assert_eq!(f.min_with_constant(1.0, 8), f);
    }

    #[test]
    fn min_with_constant_tangency_does_not_split() {
        // (θ-2)² touches 0 at a single point; it is >= 0 everywhere, so the
        // whole line takes the constant.
        let f = PiecewiseQuadFn::constant(0.0, 1)
            .add_loss(&[(Interval::whole_line(), Quadratic::parabola(1.0, 2.0, 0.0))])
            .unwrap();
        let g = f.min_with_constant(0.0, 5);
        assert_eq!(g.piece_count(), 1);
        assert_eq!(g.pieces()[0].tau, 5);
        assert_eq!(g.evaluate(2.0), 0.0);
        // A constant just above the vertex by less than the tangency
        // tolerance does not split either.
        let h = f.min_with_constant(1e-14, 5);
        assert_eq!(h.piece_count(), 1);
    }

    #[test]
    fn min_with_constant_merges_flat_neighbours() {
        let f = PiecewiseQuadFn::constant(0.0, 0)
            .add_loss(&biweight_at(0.0, 1.0))
            .unwrap();
        // Constant below the biweight plateau: both plateaus get replaced and
        // merge with the replaced tails of the parabola.
        let g = f.min_with_constant(0.25, 4);
        assert_eq!(g.piece_count(), 3);
        assert_eq!(bounds(&g), vec![-0.5, 0.5]);
        // Constant above the plateau: nothing changes.
        assert_eq!(f.min_with_constant(2.0, 4), f);
    }

    #[test]
    fn evaluate_uses_closed_side_on_boundary() {
        let f = PiecewiseQuadFn::constant(0.0, 0)
            .add_loss(&[(Interval::whole_line(), Quadratic::new(1.0, 0.0, 0.0))])
            .unwrap();
        assert_eq!(f.evaluate(3.0), 9.0);
        let g = f.min_with_constant(1.0, 1);
        assert_eq!(g.evaluate(1.0), 1.0);
        assert_eq!(g.pieces()[1].quad.value(1.0), 1.0);
    }

    #[test]
    fn far_from_origin_keeps_precision() {
        // Squared offsets of 1e18 would swamp a β of order one in expanded
        // coefficients; vertex form keeps the roots exact.
        let y = 1e9;
        let f = PiecewiseQuadFn::constant(5.0, 0)
            .add_loss(&[(Interval::whole_line(), Quadratic::parabola(1.0, y, 0.0))])
            .unwrap();
        let m = f.global_min().unwrap();
        assert_eq!((m.value, m.argmin), (5.0, y));
        let g = f.min_with_constant(9.0, 1);
        assert_eq!(bounds(&g), vec![y - 2.0, y + 2.0]);
    }
}
