//! Strong-convergence experiments with refinement-coupled noise.
//!
//! The error at a level compares the end state at `(N, dt)` with the end state
//! at `(2N, dt/4)` computed on the same Brownian path:
//!
//! ```text
//! rmse ≈ ( (1/J) Σ_j ‖U^M_{N,dt}(ω_j) − U^{4M}_{2N,dt/4}(ω_j)‖² )^{1/2}
//! ```
//!
//! The difference is the full `L²` distance, so the modes the coarse run does
//! not carry count in full. The part of the error on the coarse modes alone is
//! reported as `projected_rmse`, and the RMS of the fine tail as `tail_norm`.
//!
//! Samples run in parallel; sample `j` of level `ℓ` draws from the stream
//! `(mix(seed ^ mix(ℓ)), j)` and partial results are reduced in sample order
//! with pairwise summation, so reports do not depend on the thread count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::integrators::{increment_kind, simulate, Integrator, NoiseSource, SampledNoise};
use crate::noise::{NoiseHierarchy, NoiseIncrement};
use crate::rng::RngStream;
use crate::spectral::SpectralField;
use crate::stats::{pairwise_sum, sample_variance};

/// Levels with a larger failure share are marked invalid.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;
/// Levels with `stderr / rmse` at or above this are marked under-sampled.
pub const UNDER_SAMPLED_RATIO: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub base_n: usize,
    pub levels: usize,
    /// Monte-Carlo samples per level.
    pub samples: usize,
    /// Enforce `N² dt = c` on every level; otherwise level 0 uses the template step.
    pub parabolic: bool,
    pub c: f64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec {
            base_n: 64,
            levels: 4,
            samples: 20,
            parabolic: true,
            c: 1.0,
        }
    }
}

impl LadderSpec {
    /// `(N_ℓ, dt_ℓ)` for level `ℓ`.
    pub fn level(&self, level: usize, template_dt: f64) -> (usize, f64) {
        let n = self.base_n << level;
        let dt = if self.parabolic {
            self.c / (n as f64 * n as f64)
        } else {
            template_dt / 4f64.powi(level as i32)
        };
        (n, dt)
    }
}

/// How the reference run of a pair is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refinement {
    /// Reference at `(2N, dt/4)`.
    Parabolic,
    /// Reference identical to the coarse run; the error is zero by construction.
    Identity,
}

/// Whether the two runs of a pair see the same Brownian path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    Coupled,
    Independent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairResult {
    pub rmse: f64,
    pub stderr: f64,
    pub failures: usize,
    pub samples: usize,
    /// RMS of `‖U_coarse − P_N U_fine‖`.
    pub projected_rmse: f64,
    /// RMS of `‖(I − P_N) U_fine‖`.
    pub tail_norm: f64,
    /// Squared errors of the successful samples, in sample order.
    pub squared_errors: Vec<f64>,
}

enum SampleOutcome {
    Done { sq_error: f64, projected_sq: f64, tail_sq: f64 },
    Blowup,
}

struct HierarchyLevel {
    hierarchy: NoiseHierarchy,
    rng: RngStream,
    pending: std::collections::VecDeque<NoiseIncrement>,
    level: usize,
}

/// Feeds increments of one hierarchy level; every level owns a copy of the
/// stream, so each replays the same finest-level draws.
impl NoiseSource for HierarchyLevel {
    fn next_increment(&mut self) -> Result<NoiseIncrement> {
        if self.pending.is_empty() {
            let mut block = self.hierarchy.next_block(&mut self.rng)?;
            self.pending.extend(block.swap_remove(self.level));
        }
        Ok(self.pending.pop_front().expect("block is non-empty"))
    }
}

fn run_sample(
    coarse: &Integrator,
    fine: &Integrator,
    refinement: Refinement,
    coupling: Coupling,
    stream: RngStream,
) -> Result<SampleOutcome> {
    let ccfg = coarse.config();
    let fcfg = fine.config();
    let levels = match refinement {
        Refinement::Parabolic => 2,
        Refinement::Identity => 1,
    };
    let hierarchy = NoiseHierarchy::new(increment_kind(ccfg.method), ccfg.n, ccfg.dt, levels, &ccfg.noise, ccfg.model.nu)?;
    let mut fine_noise = HierarchyLevel {
        hierarchy: hierarchy.clone(),
        rng: stream.clone(),
        pending: Default::default(),
        level: levels - 1,
    };
    let fine_end = match fine.final_state(fcfg.steps(), &mut fine_noise) {
        Err(Error::DiagnosticBlowup { .. }) => return Ok(SampleOutcome::Blowup),
        other => other?,
    };
    let coarse_end = match coupling {
        Coupling::Coupled => {
            let mut noise = HierarchyLevel {
                hierarchy,
                rng: stream,
                pending: Default::default(),
                level: 0,
            };
            coarse.final_state(ccfg.steps(), &mut noise)
        }
        Coupling::Independent => {
            let mut noise = SampledNoise::new(ccfg, stream.derive(u64::MAX))?;
            coarse.final_state(ccfg.steps(), &mut noise)
        }
    };
    let coarse_end = match coarse_end {
        Err(Error::DiagnosticBlowup { .. }) => return Ok(SampleOutcome::Blowup),
        other => other?,
    };
    let mut diff = coarse_end.zero_pad(fcfg.n)?;
    diff.add_scaled(&fine_end, -1.0)?;
    let low_sq = diff.project(ccfg.n)?.norm_l2().powi(2);
    let sq_error = diff.norm_l2().powi(2);
    Ok(SampleOutcome::Done {
        sq_error,
        projected_sq: low_sq,
        tail_sq: (sq_error - low_sq).max(0.0),
    })
}

/// Stream for sample `j` of a level.
pub fn sample_stream(seed: u64, level: usize, sample: usize) -> RngStream {
    RngStream::new(seed, level as u64).derive(sample as u64)
}

/// Monte-Carlo RMSE between `coarse_cfg` and its refinement, over `samples`
/// samples drawn from `(seed, level)`.
pub fn rmse_pair(
    coarse_cfg: &RunConfig,
    samples: usize,
    level: usize,
    refinement: Refinement,
    coupling: Coupling,
) -> Result<PairResult> {
    let fine_cfg = match refinement {
        Refinement::Parabolic => RunConfig {
            n: 2 * coarse_cfg.n,
            dt: coarse_cfg.dt / 4.0,
            ..coarse_cfg.clone()
        },
        Refinement::Identity => coarse_cfg.clone(),
    };
    let coarse = Integrator::new(coarse_cfg)?;
    let fine = Integrator::new(&fine_cfg)?;
    let outcomes: Vec<SampleOutcome> = (0..samples)
        .into_par_iter()
        .map(|j| run_sample(&coarse, &fine, refinement, coupling, sample_stream(coarse_cfg.seed, level, j)))
        .collect::<Result<Vec<_>>>()?;

    let mut squared_errors = Vec::with_capacity(samples);
    let mut projected = Vec::with_capacity(samples);
    let mut tails = Vec::with_capacity(samples);
    let mut failures = 0;
    for o in outcomes {
        match o {
            SampleOutcome::Done {
                sq_error,
                projected_sq,
                tail_sq,
            } => {
                squared_errors.push(sq_error);
                projected.push(projected_sq);
                tails.push(tail_sq);
            }
            SampleOutcome::Blowup => failures += 1,
        }
    }
    let ok = squared_errors.len();
    let rms = |xs: &[f64]| (pairwise_sum(xs) / ok as f64).sqrt();
    let (rmse, stderr, projected_rmse, tail_norm) = if ok == 0 {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mse = pairwise_sum(&squared_errors) / ok as f64;
        let rmse = mse.sqrt();
        // delta method: se(√m) = se(m) / (2√m)
        let stderr = if ok > 1 && rmse > 0.0 {
            (sample_variance(&squared_errors) / ok as f64).sqrt() / (2.0 * rmse)
        } else {
            0.0
        };
        (rmse, stderr, rms(&projected), rms(&tails))
    };
    Ok(PairResult {
        rmse,
        stderr,
        failures,
        samples,
        projected_rmse,
        tail_norm,
        squared_errors,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::DegeneratePoints(format!("need at least 2 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::DegeneratePoints("all coordinates must be positive".into()));
    }
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let n = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegeneratePoints("all x values are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    pub n: usize,
    pub dt: f64,
    pub rmse: f64,
    pub stderr: f64,
    pub failures: usize,
    pub samples: usize,
    pub projected_rmse: f64,
    pub tail_norm: f64,
    pub under_sampled: bool,
    /// More than 10% of samples blew up.
    pub invalid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryFlags {
    pub nu_in_theory_range: bool,
    pub noise_r: f64,
    pub noise_in_theory_range: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub label: String,
    pub seed: u64,
    pub ladder: LadderSpec,
    pub levels: Vec<LevelResult>,
    /// Fit of `rmse` against `dt`; `None` with fewer than two usable levels.
    pub slope_dt: Option<SlopeFit>,
    /// Fit of `rmse` against `N`.
    pub slope_n: Option<SlopeFit>,
    pub flags: TheoryFlags,
}

impl ConvergenceReport {
    /// CSV with columns `level,N,dt,rmse,stderr,failures`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "level,N,dt,rmse,stderr,failures")?;
        for l in &self.levels {
            writeln!(w, "{},{},{:e},{:e},{:e},{}", l.level, l.n, l.dt, l.rmse, l.stderr, l.failures)?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "label": self.label,
            "seed": self.seed,
            "slope": self.slope_dt.map(|s| s.slope),
            "intercept": self.slope_dt.map(|s| s.intercept),
            "residual": self.slope_dt.map(|s| s.residual),
            "slope_vs_n": self.slope_n,
            "flags": self.flags,
            "levels": self.levels,
        })
    }

    /// Gnuplot script plotting `rmse` against `dt` on log axes from `csv_name`.
    pub fn gnuplot_script(&self, csv_name: &str) -> String {
        let slope = self.slope_dt.map_or(f64::NAN, |s| s.slope);
        format!(
            "# rmse vs dt, fitted slope {slope:.4}\n\
             set datafile separator ','\n\
             set logscale xy\n\
             set xlabel 'dt'\n\
             set ylabel 'rmse'\n\
             set key top left\n\
             set title '{label} ({method})'\n\
             plot '{csv_name}' using 3:4:5 skip 1 with yerrorlines title 'rmse', \\\n\
             \x20    '{csv_name}' using 3:(sqrt($3)*{scale:e}) skip 1 with lines dashtype 2 title 'dt^{{1/2}}'\n",
            label = self.label,
            method = self.method,
            scale = self
                .levels
                .first()
                .map_or(1.0, |l| if l.dt > 0.0 && l.rmse.is_finite() { l.rmse / l.dt.sqrt() } else { 1.0 }),
        )
    }
}

/// Builds the coarse configuration of level `ℓ` from a template.
pub fn level_config(spec: &LadderSpec, template: &RunConfig, method: Method, level: usize) -> RunConfig {
    let (n, dt) = spec.level(level, template.dt);
    RunConfig {
        n,
        dt,
        method,
        ..template.clone()
    }
}

/// Runs every level of the ladder and fits the observed order.
pub fn run_ladder(spec: &LadderSpec, template: &RunConfig, method: Method, label: &str) -> Result<ConvergenceReport> {
    if spec.levels < 2 {
        return Err(Error::InsufficientLevels(spec.levels));
    }
    let mut levels = Vec::with_capacity(spec.levels);
    for level in 0..spec.levels {
        let cfg = level_config(spec, template, method, level);
        let pair = rmse_pair(&cfg, spec.samples, level, Refinement::Parabolic, Coupling::Coupled)?;
        let invalid = pair.failures as f64 > MAX_FAILURE_FRACTION * spec.samples as f64;
        let ratio = pair.stderr / pair.rmse;
        levels.push(LevelResult {
            level,
            n: cfg.n,
            dt: cfg.dt,
            rmse: pair.rmse,
            stderr: pair.stderr,
            failures: pair.failures,
            samples: pair.samples,
            projected_rmse: pair.projected_rmse,
            tail_norm: pair.tail_norm,
            under_sampled: ratio.is_nan() || ratio >= UNDER_SAMPLED_RATIO,
            invalid,
        });
    }
    let usable: Vec<&LevelResult> = levels.iter().filter(|l| !l.invalid && l.rmse > 0.0 && l.rmse.is_finite()).collect();
    let fit = |x: fn(&LevelResult) -> f64| -> Option<SlopeFit> {
        let pts: Vec<(f64, f64)> = usable.iter().map(|l| (x(l), l.rmse)).collect();
        fit_slope(&pts).ok()
    };
    Ok(ConvergenceReport {
        method,
        label: label.to_string(),
        seed: template.seed,
        ladder: spec.clone(),
        slope_dt: fit(|l| l.dt),
        slope_n: fit(|l| l.n as f64),
        levels,
        flags: TheoryFlags {
            nu_in_theory_range: template.model.nu_in_theory_range(),
            noise_r: template.noise.r,
            noise_in_theory_range: template.noise.in_theory_range(),
        },
    })
}

/// `E‖U^m‖²` for every step `m`, estimated from `samples` independent runs.
pub fn second_moment_profile(cfg: &RunConfig, samples: usize) -> Result<Vec<f64>> {
    let runs: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let traj = simulate(cfg, j as u64)?;
            Ok(traj.diagnostics.iter().map(|d| d.l2 * d.l2).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = runs[0].len();
    Ok((0..steps)
        .map(|m| {
            let col: Vec<f64> = runs.iter().map(|r| r[m]).collect();
            pairwise_sum(&col) / samples as f64
        })
        .collect())
}

/// End states of the coarse and fine runs for one coupled sample; exposed for
/// pathwise inspection.
pub fn coupled_end_states(coarse_cfg: &RunConfig, level: usize, sample: usize) -> Result<(SpectralField, SpectralField)> {
    let fine_cfg = RunConfig {
        n: 2 * coarse_cfg.n,
        dt: coarse_cfg.dt / 4.0,
        ..coarse_cfg.clone()
    };
    let coarse = Integrator::new(coarse_cfg)?;
    let fine = Integrator::new(&fine_cfg)?;
    let hierarchy = NoiseHierarchy::new(
        increment_kind(coarse_cfg.method),
        coarse_cfg.n,
        coarse_cfg.dt,
        2,
        &coarse_cfg.noise,
        coarse_cfg.model.nu,
    )?;
    let stream = sample_stream(coarse_cfg.seed, level, sample);
    let mut cn = HierarchyLevel {
        hierarchy: hierarchy.clone(),
        rng: stream.clone(),
        pending: Default::default(),
        level: 0,
    };
    let mut fnz = HierarchyLevel {
        hierarchy,
        rng: stream,
        pending: Default::default(),
        level: 1,
    };
    Ok((
        coarse.final_state(coarse_cfg.steps(), &mut cn)?,
        fine.final_state(fine_cfg.steps(), &mut fnz)?,
    ))
}
