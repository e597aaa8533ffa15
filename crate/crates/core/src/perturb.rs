//! Test-set degradations: salt-and-pepper noise and brightness reduction.
//!
//! Noise draws from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`), whose
//! output stream is fixed by its algorithm and therefore identical on every
//! platform. Exactly `round(fraction * pixels)` positions are sampled without
//! replacement (`rand::seq::index::sample`), then one fair coin per position,
//! in sampled order, picks salt (1) or pepper (0).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Salt-and-pepper parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    fraction: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidArgument(format!(
                "noise fraction {fraction} outside [0, 1]"
            )));
        }
        Ok(Self { fraction, seed })
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of corrupted positions in an image of `pixels` pixels.
    pub fn corrupted_count(&self, pixels: usize) -> usize {
        ((self.fraction * pixels as f64).round() as usize).min(pixels)
    }
}

/// The corrupted positions and whether each becomes salt (`true`, value 1)
/// or pepper (`false`, value 0), in sampling order.
pub fn salt_pepper_positions(pixels: usize, spec: &NoiseSpec) -> Vec<(usize, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let positions = rand::seq::index::sample(&mut rng, pixels, spec.corrupted_count(pixels));
    positions
        .into_iter()
        .map(|i| (i, rng.random::<bool>()))
        .collect()
}

/// Overwrites a random subset of pixels with 0 or 1.
pub fn salt_pepper(image: &ScalarField, spec: &NoiseSpec) -> ScalarField {
    let mut values = image.values().to_vec();
    for (i, salt) in salt_pepper_positions(values.len(), spec) {
        values[i] = if salt { 1.0 } else { 0.0 };
    }
    ScalarField::from_raw(image.height(), image.width(), values)
}

/// Applies one position set to every channel of a multi-channel image, so a
/// corrupted pixel is 0 (or 1) in all channels at once.
pub fn salt_pepper_channels(channels: &[ScalarField], spec: &NoiseSpec) -> Result<Vec<ScalarField>> {
    let Some(first) = channels.first() else {
        return Ok(Vec::new());
    };
    if channels.iter().any(|c| c.dims() != first.dims()) {
        return Err(Error::Dimension("channels differ in size".into()));
    }
    let hits = salt_pepper_positions(first.len(), spec);
    Ok(channels
        .iter()
        .map(|c| {
            let mut values = c.values().to_vec();
            for &(i, salt) in &hits {
                values[i] = if salt { 1.0 } else { 0.0 };
            }
            ScalarField::from_raw(c.height(), c.width(), values)
        })
        .collect())
}

/// Multiplies every pixel by `factor`, e.g. `0.2` keeps a fifth of the brightness.
pub fn darken(image: &ScalarField, factor: f64) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&factor) {
        return Err(Error::InvalidArgument(format!(
            "darken factor {factor} outside [0, 1]"
        )));
    }
    Ok(image.map(|v| v * factor))
}
