//! Localization error seen by an operator that observes gateway traffic.
//!
//! With one gateway the best position estimate is the gateway itself. With
//! two gateways the operator also sees the split of each UE's rate between
//! them, the flow ratio β, and estimates the position as `E[p | β]` from an
//! empirical joint histogram of `(p, β)`.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::routing::RoutingResult;
use crate::scenario::Point2D;

/// Inflows at or below this are treated as zero.
pub const ZERO_RATE: f64 = 1e-12;

/// Ratio-bin edge tolerance, in bin widths.
const EDGE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowRatio {
    Finite(f64),
    /// Gateway 2 receives nothing while gateway 1 does.
    Infinite,
    /// Neither gateway receives traffic; the UE is invisible.
    NoTraffic,
}

impl FlowRatio {
    pub fn from_inflows(first: f64, second: f64) -> Self {
        match (first > ZERO_RATE, second > ZERO_RATE) {
            (false, false) => FlowRatio::NoTraffic,
            (_, false) => FlowRatio::Infinite,
            (false, true) => FlowRatio::Finite(0.0),
            (true, true) => FlowRatio::Finite(first / second),
        }
    }

    /// `β / (1 + β)`, mapping `[0, ∞]` monotonically onto `[0, 1]`.
    pub fn fraction(self) -> Option<f64> {
        match self {
            FlowRatio::Finite(b) => Some(b / (1.0 + b)),
            FlowRatio::Infinite => Some(1.0),
            FlowRatio::NoTraffic => None,
        }
    }
}

/// β of a two-gateway routing solution.
pub fn flow_ratio(sol: &RoutingResult) -> Result<FlowRatio> {
    match sol.inflows.as_slice() {
        &[first, second] => Ok(FlowRatio::from_inflows(first, second)),
        other => Err(invalid(format!("flow ratio needs exactly 2 gateways, got {}", other.len()))),
    }
}

/// Mean distance between UEs and the gateway standing in for their estimate.
pub fn single_gateway_error(samples: &[(Point2D, Point2D)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::UndefinedMetric("no VPMN members to localize".into()));
    }
    Ok(samples.iter().map(|(p, gw)| p.distance(gw)).sum::<f64>() / samples.len() as f64)
}

/// Mean `|p - p̂|` over `(true, estimate)` pairs on a line.
pub fn average_localization_error(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("no samples".into()));
    }
    Ok(pairs.iter().map(|(p, e)| (p - e).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Mean `‖p - p̂‖` over planar `(true, estimate)` pairs.
pub fn average_planar_error(pairs: &[(Point2D, Point2D)]) -> Result<f64> {
    single_gateway_error(pairs)
}

/// One observed UE: its line coordinate and the flow ratio it produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationSample {
    pub trial: usize,
    pub position: f64,
    pub ratio: FlowRatio,
}

/// 2-D histogram over (position, `β/(1+β)`) with uniform bins.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    pos_min: f64,
    pos_max: f64,
    pos_bins: usize,
    ratio_bins: usize,
    /// Position-major: `counts[p * ratio_bins + r]`.
    counts: Vec<u64>,
}

impl JointHistogram {
    pub fn new(pos_range: (f64, f64), pos_bins: usize, ratio_bins: usize) -> Result<Self> {
        let (lo, hi) = pos_range;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid(format!("position range [{lo}, {hi}] is empty")));
        }
        if pos_bins < 2 || ratio_bins < 2 {
            return Err(invalid("histograms need at least 2 bins per axis"));
        }
        Ok(JointHistogram {
            pos_min: lo,
            pos_max: hi,
            pos_bins,
            ratio_bins,
            counts: vec![0; pos_bins * ratio_bins],
        })
    }

    pub fn pos_bins(&self) -> usize {
        self.pos_bins
    }

    pub fn ratio_bins(&self) -> usize {
        self.ratio_bins
    }

    pub fn pos_range(&self) -> (f64, f64) {
        (self.pos_min, self.pos_max)
    }

    pub fn pos_edges(&self) -> Vec<f64> {
        let w = (self.pos_max - self.pos_min) / self.pos_bins as f64;
        (0..=self.pos_bins).map(|i| self.pos_min + w * i as f64).collect()
    }

    pub fn ratio_edges(&self) -> Vec<f64> {
        (0..=self.ratio_bins).map(|i| i as f64 / self.ratio_bins as f64).collect()
    }

    pub fn pos_center(&self, i: usize) -> f64 {
        let w = (self.pos_max - self.pos_min) / self.pos_bins as f64;
        self.pos_min + w * (i as f64 + 0.5)
    }

    pub fn ratio_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.ratio_bins as f64
    }

    pub fn pos_bin(&self, position: f64) -> usize {
        let t = (position - self.pos_min) / (self.pos_max - self.pos_min);
        ((t * self.pos_bins as f64).floor().max(0.0) as usize).min(self.pos_bins - 1)
    }

    /// Fractions within `EDGE_SNAP` bin widths below an edge count as on
    /// it, so `β = 1 ± ulp` always lands in the bin that starts at 0.5.
    pub fn ratio_bin(&self, fraction: f64) -> usize {
        let t = fraction * self.ratio_bins as f64 + EDGE_SNAP;
        (t.floor().max(0.0) as usize).min(self.ratio_bins - 1)
    }

    pub fn count(&self, pos_bin: usize, ratio_bin: usize) -> u64 {
        self.counts[pos_bin * self.ratio_bins + ratio_bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds one sample; returns false for a no-traffic ratio, which has no
    /// place in the histogram.
    pub fn add(&mut self, position: f64, ratio: FlowRatio) -> bool {
        let Some(f) = ratio.fraction() else {
            return false;
        };
        let (i, j) = (self.pos_bin(position), self.ratio_bin(f));
        self.counts[i * self.ratio_bins + j] += 1;
        true
    }

    pub fn merge(&mut self, other: &JointHistogram) -> Result<()> {
        if (self.pos_min, self.pos_max, self.pos_bins, self.ratio_bins)
            != (other.pos_min, other.pos_max, other.pos_bins, other.ratio_bins)
        {
            return Err(invalid("cannot merge histograms with different binning"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Counts per position bin, summed over ratio bins.
    pub fn position_marginal(&self) -> Vec<u64> {
        self.counts.chunks_exact(self.ratio_bins).map(|row| row.iter().sum()).collect()
    }

    /// `pos_center,ratio_center,count`, one line per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pos_center,ratio_center,count\n");
        self.write_csv_rows(&mut out, "");
        out
    }

    /// Appends `prefix` + `pos_center,ratio_center,count` lines.
    pub fn write_csv_rows(&self, out: &mut String, prefix: &str) {
        for i in 0..self.pos_bins {
            for j in 0..self.ratio_bins {
                let _ = writeln!(out, "{prefix}{},{},{}", self.pos_center(i), self.ratio_center(j), self.count(i, j));
            }
        }
    }
}

pub fn build_joint_histogram(
    samples: &[LocalizationSample],
    pos_range: (f64, f64),
    pos_bins: usize,
    ratio_bins: usize,
) -> Result<JointHistogram> {
    let mut h = JointHistogram::new(pos_range, pos_bins, ratio_bins)?;
    let mut added = 0usize;
    for s in samples {
        if h.add(s.position, s.ratio) {
            added += 1;
        }
    }
    if added == 0 {
        return Err(Error::UndefinedMetric("no samples carry traffic".into()));
    }
    Ok(h)
}

/// `E[p | β]` restricted to the ratio bin containing `β`, using position bin
/// centers.
pub fn conditional_mean_estimate(h: &JointHistogram, ratio: FlowRatio) -> Result<f64> {
    let fraction = ratio
        .fraction()
        .ok_or_else(|| Error::UndefinedMetric("no-traffic samples cannot be localized".into()))?;
    let j = h.ratio_bin(fraction);
    let (mut weighted, mut total) = (0.0, 0u64);
    for i in 0..h.pos_bins {
        let c = h.count(i, j);
        weighted += h.pos_center(i) * c as f64;
        total += c;
    }
    if total == 0 {
        return Err(Error::NoEstimate { fraction });
    }
    Ok(weighted / total as f64)
}

/// Conditional-mean estimator that falls back to the global mean position
/// when the queried ratio bin is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimator {
    pub histogram: JointHistogram,
    pub fallback: f64,
}

impl RatioEstimator {
    pub fn fit(samples: &[LocalizationSample], pos_range: (f64, f64), pos_bins: usize, ratio_bins: usize) -> Result<Self> {
        let histogram = build_joint_histogram(samples, pos_range, pos_bins, ratio_bins)?;
        let visible: Vec<f64> = samples
            .iter()
            .filter(|s| s.ratio != FlowRatio::NoTraffic)
            .map(|s| s.position)
            .collect();
        let fallback = visible.iter().sum::<f64>() / visible.len() as f64;
        Ok(RatioEstimator { histogram, fallback })
    }

    pub fn estimate(&self, ratio: FlowRatio) -> Result<f64> {
        match conditional_mean_estimate(&self.histogram, ratio) {
            Err(Error::NoEstimate { .. }) => Ok(self.fallback),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeldOutError {
    pub mean: f64,
    pub stderr: f64,
    pub train_samples: usize,
    pub eval_samples: usize,
    pub estimator: RatioEstimator,
}

/// Fits the estimator on even trials and measures `|p - p̂|` on odd trials.
/// Samples without traffic are skipped on both sides.
pub fn held_out_localization_error(
    samples: &[LocalizationSample],
    pos_range: (f64, f64),
    pos_bins: usize,
    ratio_bins: usize,
) -> Result<HeldOutError> {
    let (train, eval): (Vec<LocalizationSample>, Vec<LocalizationSample>) = samples
        .iter()
        .filter(|s| s.ratio != FlowRatio::NoTraffic)
        .partition(|s| s.trial % 2 == 0);
    if eval.is_empty() {
        return Err(Error::UndefinedMetric("no evaluation samples".into()));
    }
    let estimator = RatioEstimator::fit(&train, pos_range, pos_bins, ratio_bins)?;
    let errors = eval
        .iter()
        .map(|s| Ok((s.position - estimator.estimate(s.ratio)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = crate::experiments::mean_and_stderr(&errors);
    Ok(HeldOutError {
        mean,
        stderr,
        train_samples: train.len(),
        eval_samples: eval.len(),
        estimator,
    })
}
