//! Periodic grid, Fourier-series transforms and the dealiased power nonlinearity.
//!
//! Coefficients follow the Fourier-series convention
//! `v_hat_j = (1/L) * integral_0^L v(x) exp(-i xi_j x) dx`, so that
//! `sum_j |v_hat_j|^2 * L` is the squared L2 norm of the field. Arrays are kept
//! in FFT order: position `p < n/2` holds mode `j = p`, the rest hold `j = p - n`.
//! Position `n/2` is the Nyquist mode `j = -n/2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Tolerance used by [`SpectralField::hermitian_defect`] consumers.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub struct Grid {
    length: f64,
    n: usize,
    xs: Vec<f64>,
    freqs: Vec<f64>,
    planner: Mutex<FftPlanner<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("length", &self.length).field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

/// Builds a periodic grid of `n` points on `[0, length)`.
pub fn make_grid(length: f64, n: usize) -> Result<Arc<Grid>> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
    }
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("n must be even and >= 8, got {n}")));
    }
    let dx = length / n as f64;
    let xs = (0..n).map(|j| j as f64 * dx).collect();
    let freqs = (0..n).map(|p| 2.0 * PI * mode_index(p, n) as f64 / length).collect();
    Ok(Arc::new(Grid { length, n, xs, freqs, planner: Mutex::new(FftPlanner::new()) }))
}

/// Signed mode index stored at FFT position `p`.
#[inline]
pub fn mode_index(p: usize, n: usize) -> i64 {
    if p < n / 2 {
        p as i64
    } else {
        p as i64 - n as i64
    }
}

/// FFT position of signed mode `j` on an `n`-point array (modulo wrap).
#[inline]
pub fn position(j: i64, n: usize) -> usize {
    j.rem_euclid(n as i64) as usize
}

impl Grid {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Frequencies `2 pi j / L` in FFT order.
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nyquist_position(&self) -> usize {
        self.n / 2
    }

    /// Largest retained |xi| excluding the Nyquist mode.
    pub fn max_resolved_freq(&self) -> f64 {
        2.0 * PI * (self.n / 2 - 1) as f64 / self.length
    }

    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub(crate) fn plan(&self, len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let mut planner = self.planner.lock().expect("fft planner poisoned");
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_length: self.length,
                left_n: self.n,
                right_length: other.length,
                right_n: other.n,
            })
        }
    }

    /// Samples a closure at the collocation points.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> RealField {
        RealField { grid: Arc::clone(self), samples: self.xs.iter().map(|&x| f(x)).collect() }
    }
}

#[derive(Debug, Clone)]
pub struct RealField {
    pub grid: Arc<Grid>,
    pub samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Arc<Grid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::InvalidGrid(format!("expected {} samples, got {}", grid.n(), samples.len())));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n();
        Self { grid, samples: vec![0.0; n] }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// L2 norm by the (spectrally exact) rectangle rule.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: Arc<Grid>,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n();
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_coeffs(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::InvalidGrid(format!("expected {} coefficients, got {}", grid.n(), coeffs.len())));
        }
        Ok(Self { grid, coeffs })
    }

    /// Coefficient of signed mode `j` (`|j| <= n/2`).
    pub fn mode(&self, j: i64) -> Complex64 {
        self.coeffs[position(j, self.grid.n())]
    }

    pub fn set_mode(&mut self, j: i64, value: Complex64) {
        let p = position(j, self.grid.n());
        self.coeffs[p] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|v_{-j} - conj(v_j)|` over the paired modes.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = self.coeffs[0].im.abs();
        for p in 1..n / 2 {
            let a = self.coeffs[p];
            let b = self.coeffs[n - p];
            worst = worst.max((b - a.conj()).norm());
        }
        worst.max(self.coeffs[n / 2].im.abs())
    }

    /// `sum_j |v_j|^2 * L`, the squared L2 norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.length()
    }

    pub fn zero_nyquist(&mut self) {
        let p = self.grid.nyquist_position();
        self.coeffs[p] = Complex64::new(0.0, 0.0);
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { grid: Arc::clone(&self.grid), coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Samples of the field on an `m`-point grid (`m >= n`) over the same period,
    /// by zero-padding the spectrum. The Nyquist coefficient is split evenly
    /// between `+n/2` and `-n/2` so the padded field stays real.
    pub fn padded_samples(&self, m: usize) -> Vec<f64> {
        let n = self.grid.n();
        assert!(m >= n, "padded length {m} below grid size {n}");
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (p, c) in self.coeffs.iter().enumerate() {
            if p == n / 2 {
                if m == n {
                    buf[p] += c;
                } else {
                    let half = c * 0.5;
                    buf[n / 2] += half;
                    buf[m - n / 2] += half;
                }
            } else {
                buf[position(mode_index(p, n), m)] += c;
            }
        }
        self.grid.plan(m, true).process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Inverse of [`padded_samples`](Self::padded_samples) followed by truncation to
    /// the modes `|j| < n/2`; the Nyquist coefficient is zeroed.
    pub fn from_padded(grid: &Arc<Grid>, samples: &[f64]) -> Self {
        let n = grid.n();
        let m = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.plan(m, false).process(&mut buf);
        let scale = 1.0 / m as f64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (p, c) in coeffs.iter_mut().enumerate() {
            if p == n / 2 {
                continue;
            }
            *c = buf[position(mode_index(p, n), m)] * scale;
        }
        Self { grid: Arc::clone(grid), coeffs }
    }
}

pub fn to_spectral(field: &RealField) -> Result<SpectralField> {
    if let Some(index) = field.samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let n = field.grid.n();
    let mut buf: Vec<Complex64> = field.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    field.grid.plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(SpectralField { grid: Arc::clone(&field.grid), coeffs: buf })
}

pub fn from_spectral(field: &SpectralField) -> RealField {
    let n = field.grid.n();
    let mut buf = field.coeffs.clone();
    field.grid.plan(n, true).process(&mut buf);
    RealField { grid: Arc::clone(&field.grid), samples: buf.into_iter().map(|c| c.re).collect() }
}

/// Multiplies every coefficient by `symbol(xi_j)`.
///
/// Hermitian symmetry is preserved for even-real and odd-imaginary symbols on
/// the paired modes; an odd symbol makes the (unpaired) Nyquist coefficient
/// complex, so callers working with such symbols keep that mode at zero.
pub fn apply_symbol<F>(field: &SpectralField, symbol: F) -> Result<SpectralField>
where
    F: Fn(f64) -> Complex64,
{
    let mut coeffs = Vec::with_capacity(field.coeffs.len());
    for (c, &xi) in field.coeffs.iter().zip(field.grid.freqs()) {
        let s = symbol(xi);
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFiniteSymbol { xi });
        }
        coeffs.push(c * s);
    }
    Ok(SpectralField { grid: Arc::clone(&field.grid), coeffs })
}

/// Japanese bracket `<a> = (1 + a^2)^(1/2)`.
#[inline]
pub fn bracket(a: f64) -> f64 {
    (1.0 + a * a).sqrt()
}

/// Padded length that makes a degree-`degree` product of grid fields alias-free
/// on the retained modes.
pub fn dealias_len(n: usize, degree: u32) -> usize {
    (degree as usize + 1) * n / 2
}

/// Spectral field of `sign * u^(2k+1)`, evaluated on a grid padded to
/// `(k+1) n` points so that the product has no aliasing into the retained modes.
pub fn nonlinearity(field: &SpectralField, k: u32, sign: f64) -> Result<SpectralField> {
    if k < 2 {
        return Err(Error::InvalidParameter { name: "k", reason: format!("power index must satisfy k >= 2, got {k}") });
    }
    let m = dealias_len(field.grid.n(), 2 * k + 1);
    let mut samples = field.padded_samples(m);
    let exponent = (2 * k + 1) as i32;
    for (index, v) in samples.iter_mut().enumerate() {
        let p = sign * v.powi(exponent);
        if !p.is_finite() {
            return Err(Error::Divergence { index, value: *v });
        }
        *v = p;
    }
    Ok(SpectralField::from_padded(&field.grid, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_frequencies() {
        let g = make_grid(2.0 * PI, 8).unwrap();
        let mut f: Vec<f64> = g.freqs().to_vec();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in f.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }

        let g = make_grid(PI, 8).unwrap();
        let mut f: Vec<f64> = g.freqs().to_vec();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, j) in f.iter().zip(-4..4) {
            assert_abs_diff_eq!(*a, 2.0 * j as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(make_grid(2.0 * PI, 7).is_err());
        assert!(make_grid(2.0 * PI, 6).is_err());
        assert!(make_grid(0.0, 8).is_err());
        assert!(make_grid(-1.0, 8).is_err());
        assert!(make_grid(f64::NAN, 8).is_err());
    }

    #[test]
    fn constant_and_cosine_transforms() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        let one = to_spectral(&g.sample(|_| 1.0)).unwrap();
        assert_abs_diff_eq!(one.mode(0).re, 1.0, epsilon = 1e-15);
        for p in 1..16 {
            assert!(one.coeffs[p].norm() < 1e-15);
        }

        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        assert_abs_diff_eq!(cos.mode(1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cos.mode(-1).re, 0.5, epsilon = 1e-15);
        let others: f64 = (2..15).map(|p| cos.coeffs[p].norm()).sum::<f64>() + cos.coeffs[0].norm();
        assert!(others < 1e-14);
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = make_grid(2.0 * PI, 8).unwrap();
        let mut f = g.sample(f64::sin);
        f.samples[3] = f64::INFINITY;
        assert_eq!(to_spectral(&f).unwrap_err(), Error::NonFinite { index: 3 });
        assert!(RealField::new(g.clone(), vec![f64::NAN; 8]).is_err());
    }

    #[test]
    fn derivative_symbol_on_cosine() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        let d = apply_symbol(&cos, |xi| c(0.0, xi)).unwrap();
        let back = from_spectral(&d);
        for (x, v) in g.xs().iter().zip(&back.samples) {
            assert_abs_diff_eq!(*v, -x.sin(), epsilon = 1e-14);
        }
        let id = apply_symbol(&cos, |_| c(1.0, 0.0)).unwrap();
        assert_eq!(id.coeffs, cos.coeffs);
    }

    #[test]
    fn bracket_symbol_on_cosine() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        let j = apply_symbol(&cos, |xi| c(bracket(xi), 0.0)).unwrap();
        assert_abs_diff_eq!(j.mode(1).re, 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.mode(-1).re, 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn non_finite_symbol_rejected() {
        let g = make_grid(2.0 * PI, 8).unwrap();
        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        let err = apply_symbol(&cos, |xi| c(1.0 / xi, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSymbol { .. }));
    }

    #[test]
    fn nonlinearity_basic_cases() {
        let g = make_grid(2.0 * PI, 16).unwrap();
        let zero = SpectralField::zeros(g.clone());
        let z = nonlinearity(&zero, 2, 1.0).unwrap();
        assert!(z.max_abs() == 0.0);

        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        let plus = nonlinearity(&cos, 2, 1.0).unwrap();
        let minus = nonlinearity(&cos, 2, -1.0).unwrap();
        for (a, b) in plus.coeffs.iter().zip(&minus.coeffs) {
            assert_eq!(*a, -*b);
        }
        assert!(matches!(nonlinearity(&cos, 1, 1.0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn cos_fifth_power() {
        // cos^5 = (10 cos x + 5 cos 3x + cos 5x) / 16, cross-checked by quadrature
        // of cos^5 x * cos(jx) on a fine independent grid.
        let g = make_grid(2.0 * PI, 16).unwrap();
        let cos = to_spectral(&g.sample(f64::cos)).unwrap();
        let p = nonlinearity(&cos, 2, 1.0).unwrap();
        let quad = |j: f64| {
            let m = 4096;
            (0..m)
                .map(|i| {
                    let x = 2.0 * PI * i as f64 / m as f64;
                    x.cos().powi(5) * (j * x).cos()
                })
                .sum::<f64>()
                / m as f64
        };
        for (j, binom) in [(1, 10.0 / 32.0), (3, 5.0 / 32.0), (5, 1.0 / 32.0)] {
            assert_abs_diff_eq!(quad(j as f64), binom, epsilon = 1e-14);
            assert_abs_diff_eq!(p.mode(j).re, binom, epsilon = 1e-14);
            assert_abs_diff_eq!(p.mode(-j).re, binom, epsilon = 1e-14);
        }
        for j in [0, 2, 4, 6, 7] {
            assert!(p.mode(j).norm() < 1e-14);
        }
    }

    #[test]
    fn nyquist_zeroed_after_nonlinearity() {
        let g = make_grid(2.0 * PI, 8).unwrap();
        let f = to_spectral(&g.sample(|x| (3.0 * x).cos() + 0.3 * (4.0 * x).cos())).unwrap();
        let p = nonlinearity(&f, 2, 1.0).unwrap();
        assert_eq!(p.coeffs[4], c(0.0, 0.0));
    }
}
