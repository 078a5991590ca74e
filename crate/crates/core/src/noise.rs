//! Sampling of the stochastic forcing, per Fourier mode.
//!
//! Each mode of the complex Q-Wiener process is `√q_k (β^r_k + iβ^i_k)`. Over one
//! step the stochastic convolution `∫ e^{(t−s)A} dW_k(s)` is a two-dimensional
//! Ornstein–Uhlenbeck increment: its real and imaginary parts are independent
//! centred Gaussians with variance `q_k(1 − e^{−2λ_k dt})/(2λ_k)` (`q_k dt` for
//! `k = 0`), whatever the dispersion `ν`. That lets the engine draw the increment
//! exactly instead of discretizing the integral.
//!
//! The noise amplitude `σ` is not applied here; integrators scale increments.

use std::io::Write;

use num_complex::Complex64;

use crate::config::NoiseSpec;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spectral::{eigenvalue, mode_slot, semigroup_multiplier, slot_mode, SpectralField};

/// Per-component variance of the exact convolution increment of mode `k`.
pub fn variance_conv(k: i64, dt: f64, spec: &NoiseSpec) -> Result<f64> {
    let q = spec.qk_value(k)?;
    let lam = eigenvalue(k);
    if lam == 0.0 {
        Ok(q * dt)
    } else {
        Ok(q * -(-2.0 * lam * dt).exp_m1() / (2.0 * lam))
    }
}

/// Per-component variance of a plain Brownian increment of mode `k`.
pub fn variance_brownian(k: i64, dt: f64, spec: &NoiseSpec) -> Result<f64> {
    Ok(spec.qk_value(k)? * dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncrementKind {
    /// Exact samples of `∫_{t_m}^{t_{m+1}} e^{(t_{m+1}−s)A} dW_k(s)`.
    Convolution,
    /// `W_k(t_{m+1}) − W_k(t_m)`.
    Brownian,
}

/// One step of sampled forcing at resolution `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseIncrement {
    pub kind: IncrementKind,
    pub dt: f64,
    pub values: SpectralField,
}

impl NoiseIncrement {
    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn zeros(kind: IncrementKind, n: usize, dt: f64) -> Self {
        NoiseIncrement {
            kind,
            dt,
            values: SpectralField::zeros(n),
        }
    }
}

/// Draws increments of one kind at fixed `(N, dt)`; per-mode standard
/// deviations are computed once.
#[derive(Clone, Debug)]
pub struct IncrementSampler {
    kind: IncrementKind,
    n: usize,
    dt: f64,
    std_dev: Vec<f64>,
}

impl IncrementSampler {
    pub fn new(kind: IncrementKind, n: usize, dt: f64, spec: &NoiseSpec) -> Result<Self> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::validation("dt", format!("noise step must be > 0, got {dt}")));
        }
        let std_dev = (0..n)
            .map(|i| {
                let k = slot_mode(i, n);
                let v = match kind {
                    IncrementKind::Convolution => variance_conv(k, dt, spec)?,
                    IncrementKind::Brownian => variance_brownian(k, dt, spec)?,
                };
                Ok(v.sqrt())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IncrementSampler { kind, n, dt, std_dev })
    }

    pub fn kind(&self) -> IncrementKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Draws one increment. Modes are visited in FFT slot order, real part first.
    pub fn sample(&self, rng: &mut RngStream) -> NoiseIncrement {
        let coeffs = self
            .std_dev
            .iter()
            .map(|s| {
                let re = rng.standard_normal();
                let im = rng.standard_normal();
                Complex64::new(s * re, s * im)
            })
            .collect();
        NoiseIncrement {
            kind: self.kind,
            dt: self.dt,
            values: SpectralField::from_fft_order(coeffs),
        }
    }
}

pub fn sample_conv_increment(rng: &mut RngStream, n: usize, dt: f64, spec: &NoiseSpec) -> Result<NoiseIncrement> {
    Ok(IncrementSampler::new(IncrementKind::Convolution, n, dt, spec)?.sample(rng))
}

pub fn sample_brownian_increment(rng: &mut RngStream, n: usize, dt: f64, spec: &NoiseSpec) -> Result<NoiseIncrement> {
    Ok(IncrementSampler::new(IncrementKind::Brownian, n, dt, spec)?.sample(rng))
}

/// Aggregates four consecutive fine increments into one coarse increment at
/// resolution `n_coarse`.
///
/// Convolution increments are propagated to the end of the coarse step,
/// `I_k = Σ_j e^{−(1+iν)λ_k(3−j)h} I_k^{(j)}` with fine step `h`; Brownian
/// increments are summed. No randomness is consumed.
pub fn couple_down(fine: &[NoiseIncrement], n_coarse: usize, nu: f64) -> Result<NoiseIncrement> {
    if fine.len() != 4 {
        return Err(Error::ShapeMismatch(format!("couple_down needs 4 fine increments, got {}", fine.len())));
    }
    let kind = fine[0].kind;
    let n_fine = fine[0].n();
    let h = fine[0].dt;
    for f in fine {
        if f.kind != kind || f.n() != n_fine || f.dt != h {
            return Err(Error::ShapeMismatch("fine increments differ in kind, resolution or step".into()));
        }
    }
    if n_coarse > n_fine {
        return Err(Error::ShapeMismatch(format!("coarse N={n_coarse} exceeds fine N={n_fine}")));
    }
    let mut out = SpectralField::zeros(n_coarse);
    for (i, slot) in out.coeffs_mut().iter_mut().enumerate() {
        let k = slot_mode(i, n_coarse);
        let src = mode_slot(k, n_fine).expect("coarse modes are retained at the fine level");
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, f) in fine.iter().enumerate() {
            let v = f.values.coeffs()[src];
            acc += match kind {
                IncrementKind::Convolution => semigroup_multiplier(k, (3 - j) as f64 * h, nu) * v,
                IncrementKind::Brownian => v,
            };
        }
        *slot = acc;
    }
    Ok(NoiseIncrement {
        kind,
        dt: 4.0 * h,
        values: out,
    })
}

/// Brownian-only aggregation: coarse `ΔW_k = Σ_j ΔW_k^{(j)}`.
pub fn couple_down_brownian(fine: &[NoiseIncrement], n_coarse: usize) -> Result<NoiseIncrement> {
    if fine.iter().any(|f| f.kind != IncrementKind::Brownian) {
        return Err(Error::ShapeMismatch("couple_down_brownian received convolution increments".into()));
    }
    couple_down(fine, n_coarse, 0.0)
}

/// Refinement-coupled increments on levels `N_ℓ = base_n·2^ℓ`, `dt_ℓ = base_dt/4^ℓ`.
///
/// Only the finest level is sampled; coarser levels are aggregated from it, so
/// every level sees the same Brownian path.
#[derive(Clone, Debug)]
pub struct NoiseHierarchy {
    finest: IncrementSampler,
    resolutions: Vec<usize>,
    nu: f64,
}

impl NoiseHierarchy {
    pub fn new(kind: IncrementKind, base_n: usize, base_dt: f64, levels: usize, spec: &NoiseSpec, nu: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::ShapeMismatch("noise hierarchy needs at least one level".into()));
        }
        let resolutions: Vec<usize> = (0..levels).map(|l| base_n << l).collect();
        let finest_dt = base_dt / 4f64.powi(levels as i32 - 1);
        let finest = IncrementSampler::new(kind, resolutions[levels - 1], finest_dt, spec)?;
        Ok(NoiseHierarchy { finest, resolutions, nu })
    }

    pub fn levels(&self) -> usize {
        self.resolutions.len()
    }

    pub fn resolution(&self, level: usize) -> usize {
        self.resolutions[level]
    }

    /// Increments for one coarsest step: entry `ℓ` holds the `4^ℓ` consecutive
    /// increments of level `ℓ`.
    pub fn next_block(&self, rng: &mut RngStream) -> Result<Vec<Vec<NoiseIncrement>>> {
        let levels = self.levels();
        let count = 1usize << (2 * (levels - 1));
        let mut out = vec![Vec::new(); levels];
        out[levels - 1] = (0..count).map(|_| self.finest.sample(rng)).collect();
        for l in (0..levels - 1).rev() {
            let coarse = out[l + 1]
                .chunks(4)
                .map(|four| couple_down(four, self.resolutions[l], self.nu))
                .collect::<Result<Vec<_>>>()?;
            out[l] = coarse;
        }
        Ok(out)
    }

    /// Writes `steps` coarsest steps as CSV rows `level,step,k,re,im`, where `step`
    /// counts steps of that level and modes are in ascending order.
    pub fn write_csv<W: Write>(&self, mut w: W, rng: &mut RngStream, steps: usize) -> Result<()> {
        writeln!(w, "level,step,k,re,im")?;
        for block_index in 0..steps {
            let block = self.next_block(rng)?;
            for (level, incs) in block.iter().enumerate() {
                for (j, inc) in incs.iter().enumerate() {
                    let step = block_index * incs.len() + j;
                    for (k, v) in inc.values.ascending() {
                        writeln!(w, "{level},{step},{k},{:e},{:e}", v.re, v.im)?;
                    }
                }
            }
        }
        Ok(())
    }
}
