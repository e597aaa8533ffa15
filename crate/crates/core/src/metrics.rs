//! Saliency-map evaluation: thresholded PR/ROC curves and scalar scores.
//!
//! At threshold `t` the predicted mask is `M = {s >= t}` restricted to the
//! valid pixels, and against ground truth `G`:
//!
//! * precision `P = |M & G| / |M|` (1 when `M` is empty),
//! * recall `R = |M & G| / |G|`,
//! * false-positive rate `!R = |M & !G| / |!G|`.
//!
//! Thresholds are `k / (levels - 1)` for `k = 0..levels`. From the curve come
//! the F-measure (best `(1 + b2) P R / (b2 P + R)` over thresholds), the
//! largest precision, the area under P(R) and the area under R(!R), both by
//! the trapezoid rule. MAE, RMSE and cross-entropy are per-pixel averages over
//! the valid pixels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, ValidMask};

/// Standard number of threshold levels.
pub const DEFAULT_LEVELS: usize = 256;
/// Reduced level count for quick validation passes.
pub const FAST_LEVELS: usize = 51;
/// Default `beta^2` weighting precision over recall.
pub const DEFAULT_BETA_SQUARED: f64 = 0.3;
/// Clamp applied to predictions inside the logarithms of [`cross_entropy`].
pub const CE_EPSILON: f64 = 1e-7;

/// Binary ground-truth mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    height: usize,
    width: usize,
    positive: Vec<bool>,
}

impl GroundTruth {
    pub fn from_flags(height: usize, width: usize, positive: Vec<bool>) -> Result<Self> {
        if positive.len() != height * width {
            return Err(Error::Dimension(format!(
                "{height}x{width} ground truth needs {} flags, got {}",
                height * width,
                positive.len()
            )));
        }
        Ok(Self {
            height,
            width,
            positive,
        })
    }

    /// Accepts a field whose values are exactly 0 or 1.
    pub fn from_binary_field(field: &ScalarField) -> Result<Self> {
        if let Some(i) = field.values().iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ground truth must be binary, found {} at index {i}",
                field.values()[i]
            )));
        }
        Ok(Self::binarize(field, 0.5))
    }

    /// Marks pixels `>= level` as positive.
    pub fn binarize(field: &ScalarField, level: f64) -> Self {
        Self {
            height: field.height(),
            width: field.width(),
            positive: field.values().iter().map(|&v| v >= level).collect(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn flags(&self) -> &[bool] {
        &self.positive
    }

    /// The mask as a 0/1 field.
    pub fn to_field(&self) -> ScalarField {
        ScalarField::new(
            self.height,
            self.width,
            self.positive.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect(),
        )
        .expect("ground truth dimensions are non-zero")
    }
}

/// One sample of the threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub false_positive_rate: f64,
}

/// Threshold sweep, ordered by ascending threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    points: Vec<PrPoint>,
}

impl PRCurve {
    /// Wraps precomputed points. Every rate must lie in `[0, 1]`.
    pub fn from_points(points: Vec<PrPoint>) -> Result<Self> {
        for p in &points {
            for v in [p.precision, p.recall, p.false_positive_rate] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!("curve rate {v} outside [0, 1]")));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[PrPoint] {
        &self.points
    }

    pub fn level_count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn non_empty(&self) -> Result<&[PrPoint]> {
        if self.points.is_empty() {
            Err(Error::InvalidArgument("empty PR curve".into()))
        } else {
            Ok(&self.points)
        }
    }
}

/// Scalar scores for one saliency map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub f_measure: f64,
    pub max_precision: f64,
    pub mean_pr: f64,
    pub auc: f64,
    pub mae: f64,
    pub rmse: f64,
    pub cross_entropy: f64,
    pub beta_squared: f64,
}

/// `k / (levels - 1)`.
pub fn threshold(k: usize, levels: usize) -> f64 {
    k as f64 / (levels - 1) as f64
}

fn check_inputs(s: &ScalarField, g: &GroundTruth, mask: &ValidMask) -> Result<()> {
    if s.dims() != g.dims() || s.dims() != mask.dims() {
        return Err(Error::Dimension(format!(
            "map is {:?}, ground truth {:?}, mask {:?}",
            s.dims(),
            g.dims(),
            mask.dims()
        )));
    }
    if mask.count() == 0 {
        return Err(Error::InvalidArgument("mask selects no pixels".into()));
    }
    if let Some(v) = s.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!("saliency value {v} outside [0, 1]")));
    }
    Ok(())
}

fn masked<'a>(
    s: &'a ScalarField,
    g: &'a GroundTruth,
    mask: &'a ValidMask,
) -> impl Iterator<Item = (f64, bool)> + 'a {
    s.values()
        .iter()
        .zip(g.flags())
        .zip(mask.flags())
        .filter(|&(_, &valid)| valid)
        .map(|((&v, &p), _)| (v, p))
}

/// Highest `k` with `threshold(k) <= value`, for `value` in `[0, 1]`.
fn level_index(value: f64, levels: usize) -> usize {
    let top = levels - 1;
    let mut k = ((value * top as f64).floor() as usize).min(top);
    while k < top && threshold(k + 1, levels) <= value {
        k += 1;
    }
    while k > 0 && threshold(k, levels) > value {
        k -= 1;
    }
    k
}

/// Sweeps `levels` uniform thresholds over `[0, 1]`.
///
/// Fails on mismatched dimensions, an empty mask, values outside `[0, 1]`,
/// fewer than two levels, or a ground truth with no positive or no negative
/// pixel under the mask.
pub fn pr_curve(s: &ScalarField, g: &GroundTruth, mask: &ValidMask, levels: usize) -> Result<PRCurve> {
    check_inputs(s, g, mask)?;
    if levels < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 levels, got {levels}")));
    }

    let mut pos_hist = vec![0usize; levels];
    let mut neg_hist = vec![0usize; levels];
    for (v, positive) in masked(s, g, mask) {
        let k = level_index(v, levels);
        if positive {
            pos_hist[k] += 1;
        } else {
            neg_hist[k] += 1;
        }
    }
    let positives: usize = pos_hist.iter().sum();
    let negatives: usize = neg_hist.iter().sum();
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateGroundTruth {
            positives,
            negatives,
        });
    }

    // Pixels at level index >= k are in the mask at threshold k.
    let mut points = Vec::with_capacity(levels);
    let (mut tp, mut fp) = (0usize, 0usize);
    for k in (0..levels).rev() {
        tp += pos_hist[k];
        fp += neg_hist[k];
        let selected = tp + fp;
        points.push(PrPoint {
            threshold: threshold(k, levels),
            precision: if selected == 0 { 1.0 } else { tp as f64 / selected as f64 },
            recall: tp as f64 / positives as f64,
            false_positive_rate: fp as f64 / negatives as f64,
        });
    }
    points.reverse();
    Ok(PRCurve { points })
}

/// Best F-score over the curve; thresholds with `b2 P + R = 0` are skipped.
/// Returns 0 when every threshold is skipped.
pub fn f_measure(curve: &PRCurve, beta_squared: f64) -> Result<f64> {
    let points = curve.non_empty()?;
    Ok(points
        .iter()
        .filter_map(|p| {
            let denom = beta_squared * p.precision + p.recall;
            (denom > 0.0).then(|| (1.0 + beta_squared) * p.precision * p.recall / denom)
        })
        .fold(0.0, f64::max))
}

pub fn max_precision(curve: &PRCurve) -> Result<f64> {
    Ok(curve.non_empty()?.iter().map(|p| p.precision).fold(0.0, f64::max))
}

/// Trapezoid area under `(x, y)` samples after sorting by `x` and keeping the
/// largest `y` for repeated `x`. A single distinct `x` yields its `y`.
fn trapezoid_area(mut samples: Vec<(f64, f64)>) -> f64 {
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for (x, y) in samples {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 = last.1.max(y),
            _ => merged.push((x, y)),
        }
    }
    if merged.len() == 1 {
        return merged[0].1;
    }
    merged
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Area under precision as a function of recall.
pub fn mean_pr(curve: &PRCurve) -> Result<f64> {
    let points = curve.non_empty()?;
    Ok(trapezoid_area(points.iter().map(|p| (p.recall, p.precision)).collect()))
}

/// Area under recall as a function of false-positive rate.
pub fn auc(curve: &PRCurve) -> Result<f64> {
    let points = curve.non_empty()?;
    Ok(trapezoid_area(
        points.iter().map(|p| (p.false_positive_rate, p.recall)).collect(),
    ))
}

fn masked_mean(
    s: &ScalarField,
    g: &GroundTruth,
    mask: &ValidMask,
    term: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    check_inputs(s, g, mask)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (v, positive) in masked(s, g, mask) {
        sum += term(v, if positive { 1.0 } else { 0.0 });
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Mean absolute error over valid pixels.
pub fn mae(s: &ScalarField, g: &GroundTruth, mask: &ValidMask) -> Result<f64> {
    masked_mean(s, g, mask, |v, t| (v - t).abs())
}

/// Root mean squared error over valid pixels.
pub fn rmse(s: &ScalarField, g: &GroundTruth, mask: &ValidMask) -> Result<f64> {
    masked_mean(s, g, mask, |v, t| (v - t).powi(2)).map(f64::sqrt)
}

/// Binary cross-entropy (natural log) over valid pixels, with predictions
/// clamped to `[CE_EPSILON, 1 - CE_EPSILON]`.
pub fn cross_entropy(s: &ScalarField, g: &GroundTruth, mask: &ValidMask) -> Result<f64> {
    masked_mean(s, g, mask, |v, t| {
        let p = v.clamp(CE_EPSILON, 1.0 - CE_EPSILON);
        -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
    })
}

/// Every score plus the curve it was derived from.
pub fn evaluate_with_curve(
    s: &ScalarField,
    g: &GroundTruth,
    mask: &ValidMask,
    levels: usize,
    beta_squared: f64,
) -> Result<(MetricReport, PRCurve)> {
    let curve = pr_curve(s, g, mask, levels)?;
    let report = MetricReport {
        f_measure: f_measure(&curve, beta_squared)?,
        max_precision: max_precision(&curve)?,
        mean_pr: mean_pr(&curve)?,
        auc: auc(&curve)?,
        mae: mae(s, g, mask)?,
        rmse: rmse(s, g, mask)?,
        cross_entropy: cross_entropy(s, g, mask)?,
        beta_squared,
    };
    Ok((report, curve))
}

pub fn evaluate_all(
    s: &ScalarField,
    g: &GroundTruth,
    mask: &ValidMask,
    levels: usize,
    beta_squared: f64,
) -> Result<MetricReport> {
    evaluate_with_curve(s, g, mask, levels, beta_squared).map(|(r, _)| r)
}

/// Field-wise mean, summed in slice order. `None` for an empty slice.
pub fn average_reports(reports: &[MetricReport]) -> Option<MetricReport> {
    let first = reports.first()?;
    let n = reports.len() as f64;
    let mean = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Some(MetricReport {
        f_measure: mean(|r| r.f_measure),
        max_precision: mean(|r| r.max_precision),
        mean_pr: mean(|r| r.mean_pr),
        auc: mean(|r| r.auc),
        mae: mean(|r| r.mae),
        rmse: mean(|r| r.rmse),
        cross_entropy: mean(|r| r.cross_entropy),
        beta_squared: first.beta_squared,
    })
}

/// One evaluation case for [`evaluate_batch`].
#[derive(Debug, Clone)]
pub struct EvalItem {
    pub saliency: ScalarField,
    pub ground_truth: GroundTruth,
    pub mask: ValidMask,
}

/// Evaluates items in parallel; reports come back in input order together
/// with their average.
pub fn evaluate_batch(
    items: &[EvalItem],
    levels: usize,
    beta_squared: f64,
) -> Result<(Vec<MetricReport>, MetricReport)> {
    let reports = items
        .par_iter()
        .map(|it| evaluate_all(&it.saliency, &it.ground_truth, &it.mask, levels, beta_squared))
        .collect::<Result<Vec<_>>>()?;
    let mean = average_reports(&reports)
        .ok_or_else(|| Error::InvalidArgument("no items to evaluate".into()))?;
    Ok((reports, mean))
}
