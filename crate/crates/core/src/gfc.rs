//! Laplacian solving and gradient integration by Green's function convolution.
//!
//! The solver inverts the 5-point stencil
//!
//! ```text
//!  0 -1  0
//! -1  4 -1
//!  0 -1  0
//! ```
//!
//! in the Fourier domain. Its Green's function spectrum is the ratio of the
//! transforms of a zero-padded Dirac and the zero-padded stencil, both placed
//! with their centre at `(1, 1)`. The stencil's transform vanishes only at the
//! zero frequency, where the spectrum is set to 0, so solutions come out
//! mean-free and the additive constant is fixed afterwards.
//!
//! Sign convention: [`divergence`] is the *negated* backward-difference
//! divergence, which makes `divergence(forward_gradient(i))` equal to
//! `image_laplacian(i)` for any image zero on its outer pixel ring. Feeding a
//! gradient in therefore gives the original image back, not its negation.
//!
//! [`solve_laplacian`] pads its input with a 4-pixel band of zeros, solves on
//! the padded grid, subtracts the mean of the result over that band, and
//! crops the band away again.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, RwLock};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::spectral::{to_complex, Fft2};

/// The 3x3 Laplacian stencil (centre +4), row-major.
pub const LAPLACIAN_KERNEL: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]];

/// Width of the zero band added around a Laplacian before solving.
pub const PAD_MARGIN: usize = 4;

/// Smallest working grid that can hold the 3x3 stencil.
pub const MIN_OPERATOR_SIZE: usize = 3;

/// `4 - 2 cos(2 pi u / width) - 2 cos(2 pi v / height)`: the transform of the
/// stencil at column frequency `u` and row frequency `v`, up to a unit phase.
pub fn laplacian_symbol(height: usize, width: usize, v: usize, u: usize) -> f64 {
    4.0 - 2.0 * (TAU * u as f64 / width as f64).cos() - 2.0 * (TAU * v as f64 / height as f64).cos()
}

/// Cached Green's function spectrum for one working size.
#[derive(Debug)]
pub struct GreenOperator {
    height: usize,
    width: usize,
    spectrum: Vec<Complex64>,
    fft: Fft2,
}

impl GreenOperator {
    /// Builds the spectrum `F(dirac) / F(stencil)` with the DC bin set to 0.
    pub fn build(height: usize, width: usize) -> Result<Self> {
        if height < MIN_OPERATOR_SIZE || width < MIN_OPERATOR_SIZE {
            return Err(Error::Dimension(format!(
                "Green operator needs at least {MIN_OPERATOR_SIZE}x{MIN_OPERATOR_SIZE}, got {height}x{width}"
            )));
        }
        let fft = Fft2::new(height, width);

        let mut dirac = vec![Complex64::default(); height * width];
        dirac[width + 1] = Complex64::new(1.0, 0.0);
        let mut kernel = vec![Complex64::default(); height * width];
        for (r, row) in LAPLACIAN_KERNEL.iter().enumerate() {
            for (c, &k) in row.iter().enumerate() {
                kernel[r * width + c] = Complex64::new(k, 0.0);
            }
        }
        fft.forward(&mut dirac);
        fft.forward(&mut kernel);

        let mut spectrum: Vec<Complex64> = dirac.iter().zip(&kernel).map(|(d, k)| d / k).collect();
        spectrum[0] = Complex64::default();
        debug_assert!(spectrum.iter().all(|z| z.re.is_finite() && z.im.is_finite()));

        Ok(Self {
            height,
            width,
            spectrum,
            fft,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major spectrum; entry `v * width + u` is frequency `(v, u)`.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// `Re(F^-1(F(values) * spectrum))`: circular convolution with the
    /// Green's function on this operator's grid.
    pub fn convolve(&self, values: &[f64]) -> Vec<f64> {
        self.apply(values, false)
    }

    /// Transpose of [`GreenOperator::convolve`]: multiplies by the conjugate spectrum.
    pub fn convolve_adjoint(&self, values: &[f64]) -> Vec<f64> {
        self.apply(values, true)
    }

    fn apply(&self, values: &[f64], conjugate: bool) -> Vec<f64> {
        assert_eq!(values.len(), self.height * self.width, "size mismatch");
        let mut buf = to_complex(values);
        self.fft.forward(&mut buf);
        for (z, g) in buf.iter_mut().zip(&self.spectrum) {
            *z *= if conjugate { g.conj() } else { *g };
        }
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// Thread-safe store of [`GreenOperator`]s keyed by working `(height, width)`.
///
/// Lookups take a shared lock; building a missing operator is serialized.
/// The cache never evicts.
#[derive(Debug, Default)]
pub struct OperatorCache {
    operators: RwLock<HashMap<(usize, usize), Arc<GreenOperator>>>,
}

impl OperatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the operator for `(height, width)`, building it on first use.
    pub fn get(&self, height: usize, width: usize) -> Result<Arc<GreenOperator>> {
        let key = (height, width);
        if let Some(op) = self.operators.read().unwrap().get(&key) {
            return Ok(Arc::clone(op));
        }
        let mut map = self.operators.write().unwrap();
        if let Some(op) = map.get(&key) {
            return Ok(Arc::clone(op));
        }
        let op = Arc::new(GreenOperator::build(height, width)?);
        map.insert(key, Arc::clone(&op));
        Ok(op)
    }

    pub fn contains(&self, height: usize, width: usize) -> bool {
        self.operators.read().unwrap().contains_key(&(height, width))
    }

    pub fn len(&self) -> usize {
        self.operators.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn padded(&self, height: usize, width: usize) -> Arc<GreenOperator> {
        self.get(height + 2 * PAD_MARGIN, width + 2 * PAD_MARGIN)
            .expect("padded grids always hold the stencil")
    }
}

/// Convolves with [`LAPLACIAN_KERNEL`], treating pixels outside the image as 0.
pub fn image_laplacian(image: &ScalarField) -> ScalarField {
    let (h, w) = image.dims();
    let v = image.values();
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            v[r as usize * w + c as usize]
        }
    };
    ScalarField::from_fn(h, w, |r, c| {
        let (r, c) = (r as isize, c as isize);
        4.0 * at(r, c) - at(r - 1, c) - at(r + 1, c) - at(r, c - 1) - at(r, c + 1)
    })
}

/// Convolves with [`LAPLACIAN_KERNEL`] on the torus (wrap-around indexing).
pub fn image_laplacian_circular(image: &ScalarField) -> ScalarField {
    let (h, w) = image.dims();
    let v = image.values();
    ScalarField::from_fn(h, w, |r, c| {
        let up = v[((r + h - 1) % h) * w + c];
        let down = v[((r + 1) % h) * w + c];
        let left = v[r * w + (c + w - 1) % w];
        let right = v[r * w + (c + 1) % w];
        4.0 * v[r * w + c] - up - down - left - right
    })
}

/// Forward differences `ex = i(r, c+1) - i(r, c)`, `ey = i(r+1, c) - i(r, c)`,
/// with pixels outside the image taken as 0.
pub fn forward_gradient(image: &ScalarField) -> VectorField {
    let (h, w) = image.dims();
    let v = image.values();
    let ex = ScalarField::from_fn(h, w, |r, c| {
        let next = if c + 1 < w { v[r * w + c + 1] } else { 0.0 };
        next - v[r * w + c]
    });
    let ey = ScalarField::from_fn(h, w, |r, c| {
        let next = if r + 1 < h { v[(r + 1) * w + c] } else { 0.0 };
        next - v[r * w + c]
    });
    VectorField::new(ex, ey).expect("components share dimensions")
}

/// Negated backward-difference divergence:
/// `-(ex(r, c) - ex(r, c-1)) - (ey(r, c) - ey(r-1, c))`, with out-of-range
/// neighbours taken as 0.
pub fn divergence(field: &VectorField) -> ScalarField {
    let (h, w) = field.dims();
    let ex = field.ex().values();
    let ey = field.ey().values();
    ScalarField::from_fn(h, w, |r, c| {
        let i = r * w + c;
        let ex_prev = if c > 0 { ex[i - 1] } else { 0.0 };
        let ey_prev = if r > 0 { ey[i - w] } else { 0.0 };
        -(ex[i] - ex_prev) - (ey[i] - ey_prev)
    })
}

/// Indices of the `margin` band of an `h x w` grid.
fn in_band(h: usize, w: usize, margin: usize, i: usize) -> bool {
    let (r, c) = (i / w, i % w);
    r < margin || c < margin || r + margin >= h || c + margin >= w
}

fn band_size(h: usize, w: usize, margin: usize) -> usize {
    h * w - (h - 2 * margin) * (w - 2 * margin)
}

/// Solves `image_laplacian(x) = lap` for `x` by Green's function convolution.
///
/// The input is padded by [`PAD_MARGIN`] zeros; the integration constant is
/// the mean of the padded-grid solution over that band, so the returned
/// field is anchored to a zero surround. Output has the input's size.
pub fn solve_laplacian(lap: &ScalarField, cache: &OperatorCache) -> ScalarField {
    let (h, w) = lap.dims();
    let op = cache.padded(h, w);
    let padded = lap.zero_pad(PAD_MARGIN);
    let mut solved = op.convolve(padded.values());

    let (ph, pw) = (op.height(), op.width());
    let c = solved
        .iter()
        .enumerate()
        .filter(|&(i, _)| in_band(ph, pw, PAD_MARGIN, i))
        .map(|(_, v)| v)
        .sum::<f64>()
        / band_size(ph, pw, PAD_MARGIN) as f64;
    solved.iter_mut().for_each(|v| *v -= c);

    ScalarField::from_raw(ph, pw, solved)
        .crop_pad(PAD_MARGIN)
        .expect("padded grid exceeds the margin")
}

/// Transpose of [`solve_laplacian`] as a linear map.
///
/// Pads the upstream values, applies the transposed constant removal
/// (subtracting the upstream sum spread evenly over the band), convolves with
/// the conjugate spectrum, then crops.
pub fn solve_laplacian_adjoint(upstream: &ScalarField, cache: &OperatorCache) -> ScalarField {
    let (h, w) = upstream.dims();
    let op = cache.padded(h, w);
    let (ph, pw) = (op.height(), op.width());
    let total: f64 = upstream.values().iter().sum();
    let share = total / band_size(ph, pw, PAD_MARGIN) as f64;

    let mut padded = upstream.zero_pad(PAD_MARGIN).into_values();
    for (i, v) in padded.iter_mut().enumerate() {
        if in_band(ph, pw, PAD_MARGIN, i) {
            *v -= share;
        }
    }
    let solved = op.convolve_adjoint(&padded);
    ScalarField::from_raw(ph, pw, solved)
        .crop_pad(PAD_MARGIN)
        .expect("padded grid exceeds the margin")
}

/// Solves a Laplacian on the torus without padding or constant anchoring.
///
/// Inverts [`image_laplacian_circular`]: the result is the mean-free
/// preimage. Needs at least a 3x3 field.
pub fn solve_laplacian_circular(lap: &ScalarField, cache: &OperatorCache) -> Result<ScalarField> {
    let (h, w) = lap.dims();
    let op = cache.get(h, w)?;
    Ok(ScalarField::from_raw(h, w, op.convolve(lap.values())))
}

/// Integrates a (possibly non-conservative) gradient field:
/// `solve_laplacian(divergence(field))`.
pub fn integrate_gradient(field: &VectorField, cache: &OperatorCache) -> ScalarField {
    solve_laplacian(&divergence(field), cache)
}

/// Transpose of [`integrate_gradient`]. The transpose of [`divergence`] is
/// [`forward_gradient`], so this is `forward_gradient(solve_laplacian_adjoint(upstream))`.
pub fn integrate_gradient_adjoint(upstream: &ScalarField, cache: &OperatorCache) -> VectorField {
    forward_gradient(&solve_laplacian_adjoint(upstream, cache))
}
