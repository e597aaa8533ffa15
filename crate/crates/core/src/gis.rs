//! Gradient Integration and Sum layer.
//!
//! A GIS layer maps `3n` input channels to `n` outputs. Each output channel
//! is built from a triple `(s, ex, ey)`: the gradient pair is integrated with
//! [`integrate_gradient`] and the result is added to `s`. There are no
//! weights; any scaling is expected to come from the layers before it.
//!
//! The layer is linear, and [`gis_adjoint`] is its exact transpose, which is
//! what backpropagation through the layer needs.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FeatureBatch, ScalarField, VectorField};
use crate::gfc::{integrate_gradient, integrate_gradient_adjoint, solve_laplacian, OperatorCache, PAD_MARGIN};

/// Where the `s`, `ex`, `ey` channels of triple `k` sit among the `3n` inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelLayout {
    /// `[0, n)` are `s`, `[n, 2n)` are `ex`, `[2n, 3n)` are `ey`.
    #[default]
    Grouped,
    /// Triple `k` occupies channels `3k`, `3k + 1`, `3k + 2`.
    Interleaved,
}

impl ChannelLayout {
    /// Channel indices `(s, ex, ey)` of triple `k` out of `n`.
    pub fn triple(self, k: usize, n: usize) -> (usize, usize, usize) {
        match self {
            ChannelLayout::Grouped => (k, n + k, 2 * n + k),
            ChannelLayout::Interleaved => (3 * k, 3 * k + 1, 3 * k + 2),
        }
    }
}

impl std::str::FromStr for ChannelLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grouped" => Ok(ChannelLayout::Grouped),
            "interleaved" => Ok(ChannelLayout::Interleaved),
            other => Err(Error::InvalidArgument(format!(
                "unknown channel layout {other:?} (expected grouped or interleaved)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GisConfig {
    pub layout: ChannelLayout,
    /// Process `(item, triple)` pairs on the rayon pool. Output does not
    /// depend on this flag.
    pub parallel: bool,
}

impl Default for GisConfig {
    fn default() -> Self {
        Self {
            layout: ChannelLayout::Grouped,
            parallel: true,
        }
    }
}

impl GisConfig {
    pub fn with_layout(layout: ChannelLayout) -> Self {
        Self {
            layout,
            ..Self::default()
        }
    }
}

fn map_planes<F>(count: usize, parallel: bool, f: F) -> Vec<Vec<f64>>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    if parallel {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}

/// `out[k] = s_k + integrate_gradient(ex_k, ey_k)` for every item and triple.
pub fn gis_forward(input: &FeatureBatch, cfg: &GisConfig, cache: &OperatorCache) -> Result<FeatureBatch> {
    let channels = input.n_channels();
    if !channels.is_multiple_of(3) {
        return Err(Error::Dimension(format!(
            "GIS input needs a multiple of 3 channels, got {channels}"
        )));
    }
    let n = channels / 3;
    let (h, w) = (input.height(), input.width());

    let planes = map_planes(input.n_items() * n, cfg.parallel, |idx| {
        let (item, k) = (idx / n, idx % n);
        let (s, ex, ey) = cfg.layout.triple(k, n);
        let field = VectorField::new(input.channel(item, ex), input.channel(item, ey))
            .expect("channels share dimensions");
        let integrated = integrate_gradient(&field, cache);
        input
            .channel_slice(item, s)
            .iter()
            .zip(integrated.values())
            .map(|(a, b)| a + b)
            .collect()
    });

    FeatureBatch::new(input.n_items(), n, h, w, planes.concat())
}

/// Transpose of [`gis_forward`]: maps an `n`-channel upstream gradient to the
/// `3n`-channel input gradient. The `s` slot receives the upstream values
/// unchanged; the gradient slots receive the adjoint integration.
pub fn gis_adjoint(upstream: &FeatureBatch, cfg: &GisConfig, cache: &OperatorCache) -> FeatureBatch {
    let n = upstream.n_channels();
    let (h, w) = (upstream.height(), upstream.width());
    let plane = h * w;

    let grads = map_planes(upstream.n_items() * n, cfg.parallel, |idx| {
        let (item, k) = (idx / n, idx % n);
        let up = upstream.channel(item, k);
        let (gx, gy) = integrate_gradient_adjoint(&up, cache).into_parts();
        let mut out = Vec::with_capacity(3 * plane);
        out.extend_from_slice(up.values());
        out.extend(gx.into_values());
        out.extend(gy.into_values());
        out
    });

    let mut values = vec![0.0; upstream.n_items() * 3 * n * plane];
    for (idx, triple) in grads.iter().enumerate() {
        let (item, k) = (idx / n, idx % n);
        let (s, ex, ey) = cfg.layout.triple(k, n);
        for (slot, channel) in [s, ex, ey].into_iter().enumerate() {
            let dst = (item * 3 * n + channel) * plane;
            values[dst..dst + plane].copy_from_slice(&triple[slot * plane..(slot + 1) * plane]);
        }
    }
    FeatureBatch::new(upstream.n_items(), 3 * n, h, w, values).expect("finite adjoint")
}

/// Number of warm iterations run and discarded before timing.
pub const WARMUP_RUNS: usize = 3;

/// Wall-clock statistics from [`gis_timing_bench`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub height: usize,
    pub width: usize,
    pub batch: usize,
    pub repeats: usize,
    /// First call, including Green operator construction.
    pub cold: Duration,
    /// Mean of the timed warm-cache calls, each over the whole batch.
    pub warm_mean: Duration,
    pub warm_stddev: Duration,
}

impl TimingReport {
    /// Mean warm cost of one integrated triple.
    pub fn per_solve(&self) -> Duration {
        self.warm_mean / self.batch as u32
    }

    /// Standard deviation of the per-solve cost.
    pub fn per_solve_stddev(&self) -> Duration {
        self.warm_stddev / self.batch as u32
    }
}

/// Mean and population standard deviation of a set of durations.
pub fn duration_stats(samples: &[Duration]) -> (Duration, Duration) {
    if samples.is_empty() {
        return (Duration::ZERO, Duration::ZERO);
    }
    let secs: Vec<f64> = samples.iter().map(Duration::as_secs_f64).collect();
    let mean = secs.iter().sum::<f64>() / secs.len() as f64;
    let var = secs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / secs.len() as f64;
    (Duration::from_secs_f64(mean), Duration::from_secs_f64(var.sqrt()))
}

/// A seeded `batch x channels x height x width` batch, uniform in `[-1, 1)`.
pub fn random_batch(batch: usize, channels: usize, height: usize, width: usize, seed: u64) -> FeatureBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..batch * channels * height * width)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    FeatureBatch::new(batch, channels, height, width, values).expect("non-empty batch")
}

/// Times [`gis_forward`] on a random single-triple batch.
///
/// The first call runs against an empty cache and is reported as `cold`.
/// After [`WARMUP_RUNS`] discarded calls, `repeats` warm calls are timed.
pub fn gis_timing_bench(
    height: usize,
    width: usize,
    batch: usize,
    repeats: usize,
    cfg: &GisConfig,
) -> Result<TimingReport> {
    if height < 8 || width < 8 {
        return Err(Error::InvalidArgument(format!(
            "timing needs at least 8x8, got {height}x{width}"
        )));
    }
    if batch == 0 || repeats == 0 {
        return Err(Error::InvalidArgument("batch and repeats must be positive".into()));
    }
    let input = random_batch(batch, 3, height, width, 0x6f5e_1d2c);
    let cache = OperatorCache::new();

    let start = Instant::now();
    gis_forward(&input, cfg, &cache)?;
    let cold = start.elapsed();

    for _ in 0..WARMUP_RUNS {
        gis_forward(&input, cfg, &cache)?;
    }
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        std::hint::black_box(gis_forward(&input, cfg, &cache)?);
        samples.push(start.elapsed());
    }
    let (warm_mean, warm_stddev) = duration_stats(&samples);
    Ok(TimingReport {
        height,
        width,
        batch,
        repeats,
        cold,
        warm_mean,
        warm_stddev,
    })
}

/// Wall-clock statistics from [`solve_timing_bench`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTiming {
    pub height: usize,
    pub width: usize,
    pub count: usize,
    /// Green operator construction for the padded size.
    pub cold: Duration,
    pub mean: Duration,
    pub stddev: Duration,
    /// Sum of the `count` timed solves.
    pub total: Duration,
}

/// Times `count` warm-cache [`solve_laplacian`] calls on a random Laplacian,
/// after [`WARMUP_RUNS`] discarded ones.
pub fn solve_timing_bench(height: usize, width: usize, count: usize) -> Result<SolveTiming> {
    if height == 0 || width == 0 || count == 0 {
        return Err(Error::InvalidArgument("size and count must be positive".into()));
    }
    let lap = random_batch(1, 1, height, width, 0x51ab).channel(0, 0);
    let cache = OperatorCache::new();
    let start = Instant::now();
    cache.get(height + 2 * PAD_MARGIN, width + 2 * PAD_MARGIN)?;
    let cold = start.elapsed();

    for _ in 0..WARMUP_RUNS {
        std::hint::black_box(solve_laplacian(&lap, &cache));
    }
    let samples: Vec<Duration> = (0..count)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(solve_laplacian(&lap, &cache));
            start.elapsed()
        })
        .collect();
    let (mean, stddev) = duration_stats(&samples);
    Ok(SolveTiming {
        height,
        width,
        count,
        cold,
        mean,
        stddev,
        total: samples.iter().sum(),
    })
}

/// Splits a 3-channel item into `(s, ex, ey)` fields, for callers that
/// want to run the triple through the lower-level solver API.
pub fn split_triple(input: &FeatureBatch, item: usize, k: usize, layout: ChannelLayout) -> (ScalarField, VectorField) {
    let n = input.n_channels() / 3;
    let (s, ex, ey) = layout.triple(k, n);
    let grad = VectorField::new(input.channel(item, ex), input.channel(item, ey)).expect("same dims");
    (input.channel(item, s), grad)
}
