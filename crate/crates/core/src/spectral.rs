//! Fourier representation of functions on the unit torus.
//!
//! A [`SpectralField`] of resolution `N` holds the coefficients `a_k` of the
//! modes `φ_k(x) = e^{i2πkx}` for `k ∈ {k₀, …, ⌊N/2⌋}`, where
//! `k₀ = −⌊N/2⌋` for odd `N` and `k₀ = −⌊N/2⌋ + 1` for even `N`. Coefficients
//! follow the analysis convention `a_k = ∫ u(x) e^{−i2πkx} dx`, so the L² norm
//! of a field is the Euclidean norm of its coefficients.
//!
//! Storage uses FFT order: slot `i` holds mode `i` for `i ≤ ⌊N/2⌋` and mode
//! `i − N` above that. This is exactly the index set above, for either parity.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::config::ModelParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SCGL";
const FORMAT_VERSION: u16 = 1;

/// Lowest and highest retained mode at resolution `n`.
pub fn mode_bounds(n: usize) -> (i64, i64) {
    let half = (n / 2) as i64;
    if n % 2 == 1 {
        (-half, half)
    } else {
        (-half + 1, half)
    }
}

/// Mode stored in FFT slot `i`.
#[inline]
pub fn slot_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT slot of mode `k`, if `k` is retained at resolution `n`.
#[inline]
pub fn mode_slot(k: i64, n: usize) -> Option<usize> {
    let (lo, hi) = mode_bounds(n);
    if k < lo || k > hi {
        None
    } else if k >= 0 {
        Some(k as usize)
    } else {
        Some((k + n as i64) as usize)
    }
}

/// Laplacian eigenvalue `λ_k = (2πk)²`.
#[inline]
pub fn eigenvalue(k: i64) -> f64 {
    let w = 2.0 * PI * k as f64;
    w * w
}

/// Multiplier of `e^{tA}` on mode `k`: `e^{−(1+iν)λ_k t}`.
#[inline]
pub fn semigroup_multiplier(k: i64, t: f64, nu: f64) -> Complex64 {
    let lam = eigenvalue(k);
    Complex64::new(-lam * t, -nu * lam * t).exp()
}

/// Multiplier of `∫₀ᵗ e^{sA} ds` on mode `k`: `(1 − e^{−(1+iν)λ_k t}) / ((1+iν)λ_k)`, and `t` for `k = 0`.
pub fn semigroup_integral_multiplier(k: i64, t: f64, nu: f64) -> Complex64 {
    let lam = eigenvalue(k);
    if lam == 0.0 {
        return Complex64::new(t, 0.0);
    }
    let c = Complex64::new(lam, nu * lam);
    let z = c * t;
    if z.norm() < 1e-3 {
        // (1 − e^{−z})/z = 1 − z/2 + z²/6 − z³/24 + z⁴/120 − …
        let series = Complex64::new(1.0, 0.0) - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0;
        series * t
    } else {
        (Complex64::new(1.0, 0.0) - (-z).exp()) / c
    }
}

/// Fourier coefficients of a function on the torus at resolution `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "resolution must be positive");
        SpectralField {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Builds a field from coefficients stored in FFT order.
    pub fn from_fft_order(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "resolution must be positive");
        SpectralField { n: coeffs.len(), coeffs }
    }

    /// Builds a field whose coefficient for mode `k` is `f(k)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = (0..n).map(|i| f(slot_mode(i, n))).collect();
        SpectralField { n, coeffs }
    }

    /// `amplitude · φ_k` at resolution `n`.
    pub fn single_mode(n: usize, k: i64, amplitude: Complex64) -> Self {
        let mut f = SpectralField::zeros(n);
        let slot = mode_slot(k, n).expect("mode outside the resolution's index set");
        f.coeffs[slot] = amplitude;
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `k`; zero when `k` is not retained.
    pub fn get(&self, k: i64) -> Complex64 {
        mode_slot(k, self.n).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set(&mut self, k: i64, value: Complex64) -> Result<()> {
        let i = mode_slot(k, self.n)
            .ok_or_else(|| Error::ShapeMismatch(format!("mode {k} is not retained at N={}", self.n)))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// `(k, a_k)` pairs in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n;
        self.coeffs.iter().enumerate().map(move |(i, c)| (slot_mode(i, n), *c))
    }

    /// `(k, a_k)` pairs in ascending mode order `k₀ … ⌊N/2⌋`.
    pub fn ascending(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let (lo, hi) = mode_bounds(self.n);
        (lo..=hi).map(move |k| (k, self.get(k)))
    }

    /// Every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Spectral Galerkin projection `P_{N'}` onto the modes retained at `n_target`.
    pub fn project(&self, n_target: usize) -> Result<SpectralField> {
        if n_target > self.n || n_target == 0 {
            return Err(Error::InvalidResolution {
                from: self.n,
                to: n_target,
            });
        }
        Ok(SpectralField::from_fn(n_target, |k| self.get(k)))
    }

    /// Embeds the field into a larger resolution with zero high modes.
    pub fn zero_pad(&self, n_target: usize) -> Result<SpectralField> {
        if n_target < self.n {
            return Err(Error::ShapeMismatch(format!(
                "cannot pad N={} down to N={n_target}",
                self.n
            )));
        }
        let (lo, hi) = mode_bounds(n_target);
        let (slo, shi) = mode_bounds(self.n);
        debug_assert!(lo <= slo && shi <= hi);
        Ok(SpectralField::from_fn(n_target, |k| self.get(k)))
    }

    /// `e^{tA}` with `A = (1+iν)Δ`.
    pub fn semigroup_apply(&self, t: f64, params: &ModelParams) -> SpectralField {
        debug_assert!(t >= 0.0);
        let n = self.n;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * semigroup_multiplier(slot_mode(i, n), t, params.nu))
            .collect();
        SpectralField { n, coeffs }
    }

    /// `∫₀ᵗ e^{sA} ds` applied mode-wise.
    pub fn semigroup_integral_apply(&self, t: f64, params: &ModelParams) -> SpectralField {
        debug_assert!(t >= 0.0);
        let n = self.n;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * semigroup_integral_multiplier(slot_mode(i, n), t, params.nu))
            .collect();
        SpectralField { n, coeffs }
    }

    /// Multiplies each mode by `m(k)`.
    pub fn apply_multipliers(&mut self, m: &[Complex64]) {
        assert_eq!(m.len(), self.n);
        for (c, w) in self.coeffs.iter_mut().zip(m) {
            *c *= w;
        }
    }

    /// `self += scale · other` on matching resolutions.
    pub fn add_scaled(&mut self, other: &SpectralField, scale: f64) -> Result<()> {
        if other.n != self.n {
            return Err(Error::ShapeMismatch(format!("adding N={} to N={}", other.n, self.n)));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * scale;
        }
        Ok(())
    }

    /// L² norm on the unit torus: `(Σ |a_k|²)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Ḣ^α` norm `(Σ (1+λ_k)^α |a_k|²)^{1/2}`.
    pub fn norm_sobolev(&self, alpha: f64) -> f64 {
        self.modes()
            .map(|(k, c)| (1.0 + eigenvalue(k)).powf(alpha) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Writes the binary record: `"SCGL"`, version `u16`, `N` as `u32`, then
    /// `N` little-endian `(re, im)` `f64` pairs in ascending mode order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = u32::try_from(self.n)
            .map_err(|_| Error::ShapeMismatch(format!("N={} does not fit the binary header", self.n)))?;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        for (_, c) in self.ascending() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<SpectralField> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse(format!("bad field magic {magic:?}")));
        }
        let mut v = [0u8; 2];
        r.read_exact(&mut v)?;
        let version = u16::from_le_bytes(v);
        if version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported field format version {version}")));
        }
        let mut nb = [0u8; 4];
        r.read_exact(&mut nb)?;
        let n = u32::from_le_bytes(nb) as usize;
        if n == 0 {
            return Err(Error::Parse("field resolution is zero".into()));
        }
        let mut field = SpectralField::zeros(n);
        let (lo, hi) = mode_bounds(n);
        let mut buf = [0u8; 8];
        for k in lo..=hi {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = f64::from_le_bytes(buf);
            field.set(k, Complex64::new(re, im))?;
        }
        Ok(field)
    }

    /// CSV export with columns `k,re,im` in ascending mode order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,re,im")?;
        for (k, c) in self.ascending() {
            writeln!(w, "{k},{:e},{:e}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Samples `u(x_j)` at `x_j = j/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(!values.is_empty(), "resolution must be positive");
        GridField { values }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64) -> Complex64) -> Self {
        GridField::new((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridField {
        GridField {
            values: self.values.iter().map(|z| f(*z)).collect(),
        }
    }

    /// Quadrature L² norm `((1/N) Σ |u_j|²)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        let n = self.values.len() as f64;
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n).sqrt()
    }

    /// Quadrature L⁴ norm `((1/N) Σ |u_j|⁴)^{1/4}`.
    pub fn norm_l4(&self) -> f64 {
        let n = self.values.len() as f64;
        (self.values.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / n).powf(0.25)
    }
}

/// Planned forward/inverse DFT pair for one resolution.
///
/// Plans are immutable and shareable across threads; scratch buffers are
/// allocated per call.
#[derive(Clone)]
pub struct FourierTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierTransform").field("n", &self.n).finish()
    }
}

impl FourierTransform {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "resolution must be positive");
        let mut planner = FftPlanner::new();
        FourierTransform {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `a_k = (1/N) Σ_j u_j e^{−i2πk x_j}`.
    pub fn to_coeffs(&self, g: &GridField) -> SpectralField {
        assert_eq!(g.n(), self.n, "grid resolution does not match transform");
        let mut buf = g.values.clone();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        SpectralField { n: self.n, coeffs: buf }
    }

    /// `u_j = Σ_k a_k e^{i2πk x_j}`.
    pub fn to_grid(&self, f: &SpectralField) -> GridField {
        assert_eq!(f.n(), self.n, "field resolution does not match transform");
        let mut buf = f.coeffs.clone();
        self.inverse.process(&mut buf);
        GridField { values: buf }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct O(N²) sums, independent of the FFT path.
    fn dft_oracle(values: &[Complex64]) -> Vec<(i64, Complex64)> {
        let n = values.len();
        let (lo, hi) = mode_bounds(n);
        (lo..=hi)
            .map(|k| {
                let s: Complex64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * j as f64 / n as f64))
                    .sum();
                (k, s / n as f64)
            })
            .collect()
    }

    fn lcg_field(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| c(next(), next())).collect()
    }

    #[test]
    fn index_sets_follow_parity() {
        assert_eq!(mode_bounds(7), (-3, 3));
        assert_eq!(mode_bounds(8), (-3, 4));
        assert_eq!(mode_bounds(1), (0, 0));
        for n in 1..20 {
            let (lo, hi) = mode_bounds(n);
            assert_eq!((hi - lo + 1) as usize, n);
            for i in 0..n {
                assert_eq!(mode_slot(slot_mode(i, n), n), Some(i));
            }
        }
    }

    #[test]
    fn constant_and_pure_mode_transforms() {
        let t = FourierTransform::new(8);
        let ones = GridField::new(vec![c(1.0, 0.0); 8]);
        let f = t.to_coeffs(&ones);
        assert!((f.get(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(f.modes().filter(|(k, _)| *k != 0).all(|(_, a)| a.norm() < 1e-15));

        let wave = GridField::from_fn(8, |x| Complex64::from_polar(1.0, 2.0 * PI * x));
        let f = t.to_coeffs(&wave);
        assert!((f.get(1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(f.modes().filter(|(k, _)| *k != 1).all(|(_, a)| a.norm() < 1e-15));

        let g = t.to_grid(&SpectralField::single_mode(8, 0, c(1.0, 0.0)));
        assert!(g.values().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let g = t.to_grid(&SpectralField::single_mode(8, 1, c(1.0, 0.0)));
        for (j, v) in g.values().iter().enumerate() {
            assert!((v - Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 8.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_sum() {
        for &n in &[16usize, 15] {
            let values = lcg_field(n, 3 + n as u64);
            let f = FourierTransform::new(n).to_coeffs(&GridField::new(values.clone()));
            for (k, a) in dft_oracle(&values) {
                assert!((f.get(k) - a).norm() < 1e-12, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn nyquist_mode_on_even_grid() {
        // k = N/2 is retained for even N and alternates sign on the grid
        let t = FourierTransform::new(8);
        let g = t.to_grid(&SpectralField::single_mode(8, 4, c(1.0, 0.0)));
        for (j, v) in g.values().iter().enumerate() {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - c(s, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn projection_examples() {
        let f = SpectralField::from_fft_order(lcg_field(12, 9));
        assert_eq!(f.project(12).unwrap(), f);
        let only5 = SpectralField::single_mode(16, 5, c(1.0, 0.0));
        assert_eq!(only5.project(7).unwrap(), SpectralField::zeros(7));
        assert!(matches!(f.project(13), Err(Error::InvalidResolution { from: 12, to: 13 })));
        // even target keeps +N/2 and drops −N/2
        let g = SpectralField::from_fn(16, |k| c(k as f64, 0.0));
        let p = g.project(8).unwrap();
        assert_eq!(p.get(4), c(4.0, 0.0));
        assert_eq!(p.get(-4), c(0.0, 0.0));
        assert_eq!(p.get(-3), c(-3.0, 0.0));
    }

    #[test]
    fn projection_error_bound() {
        // a_k = (1+λ_k)^(−α/2−1/2): ‖f − P_N f‖ ≤ N^{−α} ‖f‖_{Ḣ^α}
        for &alpha in &[0.5, 1.0, 1.5] {
            let f = SpectralField::from_fn(1024, |k| c((1.0 + eigenvalue(k)).powf(-alpha / 2.0 - 0.5), 0.0));
            let full = f.norm_sobolev(alpha);
            for &nt in &[8usize, 15, 64, 101] {
                let mut tail = f.clone();
                tail.add_scaled(&f.project(nt).unwrap().zero_pad(1024).unwrap(), -1.0).unwrap();
                assert!(tail.norm_l2() <= (nt as f64).powf(-alpha) * full, "alpha={alpha} N={nt}");
            }
        }
    }

    #[test]
    fn semigroup_examples() {
        let p = ModelParams { nu: 0.0, ..ModelParams::default() };
        let f = SpectralField::from_fft_order(lcg_field(9, 1));
        assert_eq!(f.semigroup_apply(0.0, &p), f);
        for &t in &[0.0, 0.3, 5.0] {
            assert_eq!(semigroup_multiplier(0, t, 1.3), c(1.0, 0.0));
        }
        let t = 1.0 / (2.0 * PI).powi(2);
        assert!((semigroup_multiplier(1, t, 0.0).norm() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((semigroup_multiplier(1, t, 0.0).norm() - 0.367_879_4).abs() < 1e-7);
    }

    /// Composite Gauss–Legendre on many panels, independent of the closed form.
    fn quad_integral(lam: f64, nu: f64, t: f64) -> Complex64 {
        let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        let weights = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let panels = 200;
        let h = t / panels as f64;
        let mut sum = c(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(&weights) {
                let s = mid + 0.5 * h * x;
                sum += Complex64::new(-lam * s, -nu * lam * s).exp() * (w * 0.5 * h);
            }
        }
        sum
    }

    #[test]
    fn semigroup_integral_examples() {
        assert_eq!(semigroup_integral_multiplier(0, 0.25, 1.0), c(0.25, 0.0));
        let p = ModelParams::default();
        let f = SpectralField::from_fft_order(lcg_field(9, 2));
        assert!(f.semigroup_integral_apply(0.0, &p).norm_l2() == 0.0);
        for &(k, t) in &[(1i64, 1e-3), (1, 1e-7), (5, 0.2), (40, 1e-3)] {
            let m = semigroup_integral_multiplier(k, t, 1.0);
            let q = quad_integral(eigenvalue(k), 1.0, t);
            assert!((m - q).norm() < 1e-10 * t.max(1e-3), "k={k} t={t}: {m} vs {q}");
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(SpectralField::zeros(5).norm_l2(), 0.0);
        let f = SpectralField::single_mode(9, 3, c(0.0, 2.0));
        assert_eq!(f.norm_l2(), 2.0);
        let g = SpectralField::single_mode(9, 1, c(1.0, 0.0));
        assert!((g.norm_sobolev(1.0) - (1.0 + 4.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((g.norm_sobolev(1.0) - 6.3623).abs() < 1e-4);
        let h = SpectralField::from_fft_order(lcg_field(10, 5));
        assert_eq!(h.norm_sobolev(0.0), h.norm_l2());
    }

    #[test]
    fn l4_examples() {
        assert_eq!(GridField::new(vec![c(1.0, 0.0); 4]).norm_l4(), 1.0);
        assert!((GridField::new(vec![c(0.0, 2.0); 4]).norm_l4() - 2.0).abs() < 1e-15);
        let s = GridField::from_fn(256, |x| c((2.0 * PI * x).sin(), 0.0));
        assert!((s.norm_l4() - 0.375f64.powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn smoothing_estimate() {
        // ‖e^{tA} φ_k‖_{Ḣ^{2γ}} = (1+λ)^γ e^{−λt} ≤ (1 + (γ/e)^γ) t^{−γ} for t ≤ 1
        let p = ModelParams { nu: 1.0, ..ModelParams::default() };
        for &gamma in &[0.25f64, 0.5] {
            let bound_c = 1.0 + (gamma / std::f64::consts::E).powf(gamma);
            for e in 0..=40 {
                let t = 10f64.powf(-4.0 + 4.0 * e as f64 / 40.0);
                for k in 0..400 {
                    let f = SpectralField::single_mode(1024, k, c(1.0, 0.0));
                    let v = f.semigroup_apply(t, &p).norm_sobolev(2.0 * gamma);
                    assert!(v <= bound_c * t.powf(-gamma), "γ={gamma} t={t} k={k}");
                }
            }
        }
    }

    #[test]
    fn binary_and_csv_layout() {
        let f = SpectralField::from_fn(4, |k| c(k as f64, -(k as f64)));
        let mut bytes = Vec::new();
        f.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"SCGL");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 4);
        assert_eq!(bytes.len(), 10 + 4 * 16);
        // first record is k₀ = −1
        assert_eq!(f64::from_le_bytes(bytes[10..18].try_into().unwrap()), -1.0);
        assert_eq!(SpectralField::read_binary(&bytes[..]).unwrap(), f);
        assert!(SpectralField::read_binary(&b"NOPE\x01\x00"[..]).is_err());

        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,re,im");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("-1,"));
        assert!(lines[4].starts_with("2,"));
    }

    fn arb_field() -> impl Strategy<Value = SpectralField> {
        (1usize..40).prop_flat_map(|n| {
            prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n)
                .prop_map(|v| SpectralField::from_fft_order(v.into_iter().map(|(a, b)| c(a, b)).collect()))
        })
    }

    proptest! {
        #[test]
        fn roundtrip_and_parseval(f in arb_field()) {
            let t = FourierTransform::new(f.n());
            let g = t.to_grid(&f);
            prop_assert!((g.norm_l2() - f.norm_l2()).abs() <= 1e-12 * (1.0 + f.norm_l2()));
            let back = t.to_coeffs(&g);
            let mut diff = back.clone();
            diff.add_scaled(&f, -1.0).unwrap();
            prop_assert!(diff.norm_l2() <= 1e-12 * (1.0 + f.norm_l2()));
        }

        #[test]
        fn semigroup_contracts_and_composes(f in arb_field(), s in 0.0f64..1e-2, t in 0.0f64..1e-2, nu in -3.0f64..3.0) {
            let p = ModelParams { nu, ..ModelParams::default() };
            let st = f.semigroup_apply(t, &p);
            prop_assert!(st.norm_l2() <= f.norm_l2() * (1.0 + 1e-15));
            let two = f.semigroup_apply(s, &p).semigroup_apply(t, &p);
            let one = f.semigroup_apply(s + t, &p);
            let mut d = two.clone();
            d.add_scaled(&one, -1.0).unwrap();
            prop_assert!(d.norm_l2() <= 1e-12 * (1.0 + f.norm_l2()));
            // strict contraction once a nonzero mode is populated
            let nonzero_mode = f.modes().any(|(k, a)| k != 0 && a.norm() > 1e-3);
            if t > 1e-6 && nonzero_mode {
                prop_assert!(st.norm_l2() < f.norm_l2());
            }
        }

        #[test]
        fn projection_idempotent(f in arb_field(), frac in 0.0f64..1.0) {
            let nt = 1 + ((f.n() - 1) as f64 * frac) as usize;
            let p = f.project(nt).unwrap();
            prop_assert_eq!(p.project(nt).unwrap(), p);
        }

        #[test]
        fn sobolev_monotone_in_alpha(f in arb_field(), a in -1.0f64..2.0, b in 0.0f64..1.0) {
            prop_assert!(f.norm_sobolev(a) <= f.norm_sobolev(a + b) * (1.0 + 1e-14));
        }
    }
}
