//! Two-dimensional complex FFT built from `rustfft` row and column passes.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse 2-D transforms for one `(height, width)`.
///
/// Plans are immutable and shared; every call allocates its own scratch.
#[derive(Clone)]
pub struct Fft2 {
    height: usize,
    width: usize,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_forward: planner.plan_fft_forward(width),
            row_inverse: planner.plan_fft_inverse(width),
            col_forward: planner.plan_fft_forward(height),
            col_inverse: planner.plan_fft_inverse(height),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Unnormalized forward DFT, in place, row-major.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.row_forward, &self.col_forward);
    }

    /// Inverse DFT scaled by `1 / (height * width)`, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.row_inverse, &self.col_inverse);
        let scale = 1.0 / (self.height * self.width) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn transform(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (h, w) = (self.height, self.width);
        assert_eq!(data.len(), h * w, "buffer does not match transform size");
        let scratch_len = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];

        rows.process_with_scratch(data, &mut scratch[..rows.get_inplace_scratch_len()]);

        let mut transposed = vec![Complex64::default(); h * w];
        transpose(data, &mut transposed, h, w);
        cols.process_with_scratch(&mut transposed, &mut scratch[..cols.get_inplace_scratch_len()]);
        transpose(&transposed, data, w, h);
    }
}

/// Writes the transpose of the `rows x cols` matrix `src` into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

pub(crate) fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&re| Complex64::new(re, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    // Direct O(N^2) DFT used as the reference.
    fn naive_dft(data: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); h * w];
        for v in 0..h {
            for u in 0..w {
                let mut acc = Complex64::default();
                for y in 0..h {
                    for x in 0..w {
                        let phase = -TAU * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                        acc += data[y * w + x] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[v * w + u] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let (h, w) = (5, 7);
        let data: Vec<Complex64> = (0..h * w)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let expected = naive_dft(&data, h, w);
        let mut got = data.clone();
        Fft2::new(h, w).forward(&mut got);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let (h, w) = (6, 9);
        let data: Vec<Complex64> = (0..h * w).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let fft = Fft2::new(h, w);
        let mut buf = data.clone();
        fft.forward(&mut buf);
        fft.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
