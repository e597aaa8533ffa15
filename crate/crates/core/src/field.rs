//! Grid containers shared by the solver, the GIS layer and the metrics.
//!
//! All containers are row-major `f64` grids. They are immutable once built:
//! every operation returns a new value.

use std::ops::Index;

use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// A 2-D real-valued grid: an image, a Laplacian, or a saliency map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ScalarField {
    /// Builds a field from row-major values.
    ///
    /// Fails when a dimension is zero, when `values.len() != height * width`,
    /// or when any value is NaN or infinite.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!(
                "field must be at least 1x1, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::Dimension(format!(
                "{height}x{width} field needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Internal constructor for values already known to satisfy the invariants.
    pub(crate) fn from_raw(height: usize, width: usize, values: Vec<f64>) -> Self {
        debug_assert!(height > 0 && width > 0);
        debug_assert_eq!(values.len(), height * width);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            height,
            width,
            values,
        }
    }

    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// # Panics
    ///
    /// Panics if either dimension is zero or `value` is not finite.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "field must be at least 1x1");
        assert!(value.is_finite(), "fill value must be finite");
        Self::from_raw(height, width, vec![value; height * width])
    }

    /// Builds a field by evaluating `f(row, col)` at every pixel.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero or `f` returns a non-finite value.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "field must be at least 1x1");
        let mut values = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                let v = f(row, col);
                assert!(v.is_finite(), "non-finite value at ({row}, {col})");
                values.push(v);
            }
        }
        Self::from_raw(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; fields hold at least one pixel.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        (row < self.height && col < self.width).then(|| self.values[row * self.width + col])
    }

    /// Applies `f` to every value.
    ///
    /// # Panics
    ///
    /// Panics if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        check_finite(&values).expect("map produced a non-finite value");
        Self::from_raw(self.height, self.width, values)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescales to `[0, 1]`. A constant field maps to all zeros.
    pub fn min_max_normalized(&self) -> Self {
        let (lo, hi) = (self.min(), self.max());
        let span = hi - lo;
        if span <= 0.0 {
            return Self::zeros(self.height, self.width);
        }
        self.map(|v| ((v - lo) / span).clamp(0.0, 1.0))
    }

    /// Largest absolute pixel difference. Panics on mismatched dimensions.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.dims(), other.dims(), "dimension mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Surrounds the field with a band of zeros `margin` pixels wide.
    pub fn zero_pad(&self, margin: usize) -> Self {
        if margin == 0 {
            return self.clone();
        }
        let (h, w) = (self.height + 2 * margin, self.width + 2 * margin);
        let mut values = vec![0.0; h * w];
        for (row, src) in self.values.chunks_exact(self.width).enumerate() {
            let start = (row + margin) * w + margin;
            values[start..start + self.width].copy_from_slice(src);
        }
        Self::from_raw(h, w, values)
    }

    /// Removes a band `margin` pixels wide from every side.
    ///
    /// Fails unless both dimensions exceed `2 * margin`.
    pub fn crop_pad(&self, margin: usize) -> Result<Self> {
        if self.height <= 2 * margin || self.width <= 2 * margin {
            return Err(Error::Dimension(format!(
                "cannot crop a {margin}-pixel margin from a {}x{} field",
                self.height, self.width
            )));
        }
        if margin == 0 {
            return Ok(self.clone());
        }
        let (h, w) = (self.height - 2 * margin, self.width - 2 * margin);
        let mut values = Vec::with_capacity(h * w);
        for row in margin..margin + h {
            let start = row * self.width + margin;
            values.extend_from_slice(&self.values[start..start + w]);
        }
        Ok(Self::from_raw(h, w, values))
    }

    /// Pixelwise `self + other`. Panics on mismatched dimensions.
    pub fn add(&self, other: &ScalarField) -> Self {
        assert_eq!(self.dims(), other.dims(), "dimension mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_raw(self.height, self.width, values)
    }

    /// Pixelwise `a * self + b * other`. Panics on mismatched dimensions.
    pub fn linear_combination(&self, a: f64, other: &ScalarField, b: f64) -> Self {
        assert_eq!(self.dims(), other.dims(), "dimension mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_raw(self.height, self.width, values)
    }

    /// Inner product of two same-size fields.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.dims(), other.dims(), "dimension mismatch");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

impl Index<(usize, usize)> for ScalarField {
    type Output = f64;

    fn index(&self, (row, col): (usize, usize)) -> &f64 {
        assert!(row < self.height && col < self.width, "index out of bounds");
        &self.values[row * self.width + col]
    }
}

/// A gradient-domain field: horizontal component `ex`, vertical component `ey`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    ex: ScalarField,
    ey: ScalarField,
}

impl VectorField {
    pub fn new(ex: ScalarField, ey: ScalarField) -> Result<Self> {
        if ex.dims() != ey.dims() {
            return Err(Error::Dimension(format!(
                "ex is {}x{} but ey is {}x{}",
                ex.height, ex.width, ey.height, ey.width
            )));
        }
        Ok(Self { ex, ey })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            ex: ScalarField::zeros(height, width),
            ey: ScalarField::zeros(height, width),
        }
    }

    pub fn ex(&self) -> &ScalarField {
        &self.ex
    }

    pub fn ey(&self) -> &ScalarField {
        &self.ey
    }

    pub fn dims(&self) -> (usize, usize) {
        self.ex.dims()
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.ex, self.ey)
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        self.ex.dot(&other.ex) + self.ey.dot(&other.ey)
    }
}

/// An `N x C x H x W` tensor of finite reals, stored item-major then
/// channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBatch {
    n_items: usize,
    n_channels: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl FeatureBatch {
    pub fn new(
        n_items: usize,
        n_channels: usize,
        height: usize,
        width: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if n_items == 0 || n_channels == 0 || height == 0 || width == 0 {
            return Err(Error::Dimension(format!(
                "batch dimensions must be non-zero, got {n_items}x{n_channels}x{height}x{width}"
            )));
        }
        let expected = n_items * n_channels * height * width;
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "{n_items}x{n_channels}x{height}x{width} batch needs {expected} values, got {}",
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            n_items,
            n_channels,
            height,
            width,
            values,
        })
    }

    pub fn zeros(n_items: usize, n_channels: usize, height: usize, width: usize) -> Self {
        Self::new(
            n_items,
            n_channels,
            height,
            width,
            vec![0.0; n_items * n_channels * height * width],
        )
        .expect("zero-sized batch")
    }

    /// Stacks `items[i][c]` into a batch. Every field must share one size and
    /// every item must have the same number of channels.
    pub fn from_fields(items: &[Vec<ScalarField>]) -> Result<Self> {
        let first = items
            .first()
            .and_then(|item| item.first())
            .ok_or_else(|| Error::Dimension("batch needs at least one field".into()))?;
        let (height, width) = first.dims();
        let n_channels = items[0].len();
        let mut values = Vec::with_capacity(items.len() * n_channels * height * width);
        for item in items {
            if item.len() != n_channels {
                return Err(Error::Dimension(format!(
                    "items disagree on channel count: {} vs {n_channels}",
                    item.len()
                )));
            }
            for field in item {
                if field.dims() != (height, width) {
                    return Err(Error::Dimension(format!(
                        "channel is {}x{}, expected {height}x{width}",
                        field.height, field.width
                    )));
                }
                values.extend_from_slice(field.values());
            }
        }
        Ok(Self {
            n_items: items.len(),
            n_channels,
            height,
            width,
            values,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `[n_items, n_channels, height, width]`.
    pub fn shape(&self) -> [usize; 4] {
        [self.n_items, self.n_channels, self.height, self.width]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn channel_slice(&self, item: usize, channel: usize) -> &[f64] {
        assert!(item < self.n_items && channel < self.n_channels);
        let plane = self.height * self.width;
        let start = (item * self.n_channels + channel) * plane;
        &self.values[start..start + plane]
    }

    pub fn channel(&self, item: usize, channel: usize) -> ScalarField {
        ScalarField::from_raw(
            self.height,
            self.width,
            self.channel_slice(item, channel).to_vec(),
        )
    }

    pub fn dot(&self, other: &FeatureBatch) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm over every entry.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn linear_combination(&self, a: f64, other: &FeatureBatch, b: f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self {
            n_items: self.n_items,
            n_channels: self.n_channels,
            height: self.height,
            width: self.width,
            values,
        }
    }
}

/// Per-pixel flags selecting which pixels a metric counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidMask {
    height: usize,
    width: usize,
    flags: Vec<bool>,
}

impl ValidMask {
    /// Every pixel counted.
    pub fn all(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            flags: vec![true; height * width],
        }
    }

    pub fn from_flags(height: usize, width: usize, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != height * width {
            return Err(Error::Dimension(format!(
                "{height}x{width} mask needs {} flags, got {}",
                height * width,
                flags.len()
            )));
        }
        Ok(Self {
            height,
            width,
            flags,
        })
    }

    /// Pixels with a strictly positive value are counted.
    pub fn from_field(field: &ScalarField) -> Self {
        Self {
            height: field.height(),
            width: field.width(),
            flags: field.values().iter().map(|&v| v > 0.0).collect(),
        }
    }

    /// Counts only the interior left after removing a `margin`-wide band,
    /// i.e. ignores the pixels added by [`ScalarField::zero_pad`].
    pub fn excluding_border(height: usize, width: usize, margin: usize) -> Self {
        let flags = (0..height * width)
            .map(|i| {
                let (row, col) = (i / width, i % width);
                row >= margin && col >= margin && row + margin < height && col + margin < width
            })
            .collect();
        Self {
            height,
            width,
            flags,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}
