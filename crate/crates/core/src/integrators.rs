//! Time stepping for the three schemes.
//!
//! All schemes share the spectral Galerkin space of `N` modes. Pointwise
//! nonlinearities are evaluated on the `N`-point grid and transformed back,
//! which realizes `P_N` up to aliasing; with `dealias` set they are evaluated
//! on a 2N-point grid and truncated exactly.
//!
//! * ESM:   `U⁺ = e^{ΔtA} P_N Φ_Δt(U) + σ ∫ e^{(t⁺−s)A} dW_N`
//! * ExpSM: `U⁺ = e^{ΔtA} P_N Φ_Δt(U) + σ e^{ΔtA} ΔW_N`
//! * Tam:   `U⁺ = e^{ΔtA} U + (1 + Δt‖Ψ₀(U)‖)⁻¹ ∫₀^Δt e^{sA} ds P_N Ψ₀(U) + σ ∫ e^{(t⁺−s)A} dW_N`

use num_complex::Complex64;

use crate::config::{InitialCondition, Method, RunConfig};
use crate::error::{Error, Result};
use crate::flow::{psi0, FlowMap, FlowParams};
use crate::noise::{IncrementKind, IncrementSampler, NoiseIncrement};
use crate::rng::RngStream;
use crate::spectral::{
    mode_slot, semigroup_integral_multiplier, semigroup_multiplier, slot_mode, FourierTransform, SpectralField,
};

/// Runs abort once the L² norm exceeds this value.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub field: SpectralField,
    pub step_index: usize,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub step: usize,
    pub t: f64,
    pub l2: f64,
    pub l4: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub config: RunConfig,
    /// `(step_index, field)`, strictly increasing, ending at the last step.
    pub snapshots: Vec<(usize, SpectralField)>,
    /// One row per state, including the initial one.
    pub diagnostics: Vec<DiagnosticRow>,
}

impl Trajectory {
    pub fn final_field(&self) -> &SpectralField {
        &self.snapshots.last().expect("trajectory has an initial snapshot").1
    }

    /// Diagnostics CSV with columns `step,t,l2,l4`.
    pub fn write_diagnostics_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,t,l2,l4")?;
        for d in &self.diagnostics {
            writeln!(w, "{},{:e},{:e},{:e}", d.step, d.t, d.l2, d.l4)?;
        }
        Ok(())
    }
}

/// Supplies one increment per time step.
pub trait NoiseSource {
    fn next_increment(&mut self) -> Result<NoiseIncrement>;
}

impl<F: FnMut() -> Result<NoiseIncrement>> NoiseSource for F {
    fn next_increment(&mut self) -> Result<NoiseIncrement> {
        self()
    }
}

/// Fresh increments from a random stream at the run's own resolution.
pub struct SampledNoise {
    sampler: IncrementSampler,
    rng: RngStream,
}

impl SampledNoise {
    pub fn new(cfg: &RunConfig, rng: RngStream) -> Result<Self> {
        let kind = increment_kind(cfg.method);
        Ok(SampledNoise {
            sampler: IncrementSampler::new(kind, cfg.n, cfg.dt, &cfg.noise)?,
            rng,
        })
    }
}

impl NoiseSource for SampledNoise {
    fn next_increment(&mut self) -> Result<NoiseIncrement> {
        Ok(self.sampler.sample(&mut self.rng))
    }
}

/// Increment type a method consumes.
pub fn increment_kind(method: Method) -> IncrementKind {
    match method {
        Method::Esm | Method::Tam => IncrementKind::Convolution,
        Method::ExpSm => IncrementKind::Brownian,
    }
}

/// Step operator for one configuration; multipliers and FFT plans are built once.
#[derive(Clone, Debug)]
pub struct Integrator {
    cfg: RunConfig,
    flow_params: FlowParams,
    flow: FlowMap,
    transform: FourierTransform,
    padded: Option<FourierTransform>,
    semigroup: Vec<Complex64>,
    integral: Vec<Complex64>,
}

impl Integrator {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n;
        let nu = cfg.model.nu;
        let flow_params = FlowParams::from(&cfg.model);
        Ok(Integrator {
            cfg: cfg.clone(),
            flow_params,
            flow: FlowMap::new(cfg.dt, flow_params),
            transform: FourierTransform::new(n),
            padded: cfg.dealias.then(|| FourierTransform::new(2 * n)),
            semigroup: (0..n).map(|i| semigroup_multiplier(slot_mode(i, n), cfg.dt, nu)).collect(),
            integral: (0..n)
                .map(|i| semigroup_integral_multiplier(slot_mode(i, n), cfg.dt, nu))
                .collect(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn initial_state(&self) -> Result<SolverState> {
        let field = match self.cfg.init {
            InitialCondition::Zero => SpectralField::zeros(self.cfg.n),
            InitialCondition::PlaneWave { mode, amplitude } => {
                if mode_slot(mode, self.cfg.n).is_none() {
                    return Err(Error::validation("init.mode", format!("mode {mode} is not retained at N={}", self.cfg.n)));
                }
                SpectralField::single_mode(self.cfg.n, mode, Complex64::new(amplitude, 0.0))
            }
        };
        Ok(SolverState {
            field,
            step_index: 0,
            t: 0.0,
        })
    }

    /// Evaluates a pointwise map on the grid and returns its `P_N` projection.
    fn pointwise(&self, f: &SpectralField, map: impl Fn(Complex64) -> Complex64) -> SpectralField {
        match &self.padded {
            None => {
                let mut g = self.transform.to_grid(f);
                for z in g.values_mut() {
                    *z = map(*z);
                }
                self.transform.to_coeffs(&g)
            }
            Some(big) => {
                let wide = f.zero_pad(big.n()).expect("padding to 2N");
                let mut g = big.to_grid(&wide);
                for z in g.values_mut() {
                    *z = map(*z);
                }
                big.to_coeffs(&g).project(self.cfg.n).expect("projection from 2N")
            }
        }
    }

    /// `P_N Φ_Δt(U)`.
    pub fn nonlinear_flow(&self, f: &SpectralField) -> SpectralField {
        let map = self.flow;
        self.pointwise(f, |z| map.apply(z))
    }

    /// `P_N Ψ₀(U)`.
    pub fn drift(&self, f: &SpectralField) -> SpectralField {
        let p = self.flow_params;
        self.pointwise(f, |z| psi0(z, p))
    }

    fn check_increment(&self, inc: &NoiseIncrement, kind: IncrementKind) -> Result<()> {
        let dt_ok = (inc.dt - self.cfg.dt).abs() <= 1e-12 * self.cfg.dt;
        if inc.kind != kind || !dt_ok || inc.n() < self.cfg.n {
            return Err(Error::ResolutionMismatch {
                expected: self.cfg.n,
                expected_dt: self.cfg.dt,
                got: inc.n(),
                got_dt: inc.dt,
            });
        }
        Ok(())
    }

    /// Noise restricted to the retained modes; fine-only modes are dropped.
    fn restricted(&self, inc: &NoiseIncrement) -> SpectralField {
        if inc.n() == self.cfg.n {
            inc.values.clone()
        } else {
            inc.values.project(self.cfg.n).expect("increment resolution checked")
        }
    }

    fn advance(&self, state: &SolverState, field: SpectralField) -> SolverState {
        let step_index = state.step_index + 1;
        SolverState {
            field,
            step_index,
            t: step_index as f64 * self.cfg.dt,
        }
    }

    pub fn esm_step(&self, state: &SolverState, inc: &NoiseIncrement) -> Result<SolverState> {
        self.check_increment(inc, IncrementKind::Convolution)?;
        let mut next = self.nonlinear_flow(&state.field);
        next.apply_multipliers(&self.semigroup);
        if self.cfg.model.sigma != 0.0 {
            next.add_scaled(&self.restricted(inc), self.cfg.model.sigma)?;
        }
        Ok(self.advance(state, next))
    }

    pub fn expsm_step(&self, state: &SolverState, inc: &NoiseIncrement) -> Result<SolverState> {
        self.check_increment(inc, IncrementKind::Brownian)?;
        let mut next = self.nonlinear_flow(&state.field);
        next.apply_multipliers(&self.semigroup);
        if self.cfg.model.sigma != 0.0 {
            let mut dw = self.restricted(inc);
            dw.apply_multipliers(&self.semigroup);
            next.add_scaled(&dw, self.cfg.model.sigma)?;
        }
        Ok(self.advance(state, next))
    }

    pub fn tam_step(&self, state: &SolverState, inc: &NoiseIncrement) -> Result<SolverState> {
        self.check_increment(inc, IncrementKind::Convolution)?;
        let mut drift = self.drift(&state.field);
        let taming = taming_factor(drift.norm_l2(), self.cfg.dt);
        drift.apply_multipliers(&self.integral);
        let mut next = state.field.clone();
        next.apply_multipliers(&self.semigroup);
        next.add_scaled(&drift, taming)?;
        if self.cfg.model.sigma != 0.0 {
            next.add_scaled(&self.restricted(inc), self.cfg.model.sigma)?;
        }
        Ok(self.advance(state, next))
    }

    /// One step of the configured method.
    pub fn step(&self, state: &SolverState, inc: &NoiseIncrement) -> Result<SolverState> {
        match self.cfg.method {
            Method::Esm => self.esm_step(state, inc),
            Method::ExpSm => self.expsm_step(state, inc),
            Method::Tam => self.tam_step(state, inc),
        }
    }

    fn guard(state: &SolverState) -> Result<f64> {
        let l2 = state.field.norm_l2();
        if l2.is_nan() || l2 > BLOWUP_THRESHOLD {
            return Err(Error::DiagnosticBlowup {
                step: state.step_index,
                norm: l2,
            });
        }
        Ok(l2)
    }

    fn diagnostics(&self, state: &SolverState, l2: f64) -> DiagnosticRow {
        DiagnosticRow {
            step: state.step_index,
            t: state.t,
            l2,
            l4: self.transform.to_grid(&state.field).norm_l4(),
        }
    }

    /// Full run over `M = T/dt` steps from the configured initial datum.
    pub fn run(&self, noise: &mut dyn NoiseSource) -> Result<Trajectory> {
        self.run_steps(self.cfg.steps(), noise)
    }

    /// Runs `steps` steps, recording every `record_every` steps and at the end.
    pub fn run_steps(&self, steps: usize, noise: &mut dyn NoiseSource) -> Result<Trajectory> {
        let mut state = self.initial_state()?;
        let l2 = Self::guard(&state)?;
        let mut snapshots = vec![(0, state.field.clone())];
        let mut diagnostics = vec![self.diagnostics(&state, l2)];
        for m in 1..=steps {
            let inc = noise.next_increment()?;
            state = self.step(&state, &inc)?;
            let l2 = Self::guard(&state)?;
            diagnostics.push(self.diagnostics(&state, l2));
            if m % self.cfg.record_every == 0 || m == steps {
                snapshots.push((m, state.field.clone()));
            }
        }
        Ok(Trajectory {
            config: self.cfg.clone(),
            snapshots,
            diagnostics,
        })
    }

    /// End state after `steps` steps, without recording.
    pub fn final_state(&self, steps: usize, noise: &mut dyn NoiseSource) -> Result<SpectralField> {
        let mut state = self.initial_state()?;
        for _ in 0..steps {
            let inc = noise.next_increment()?;
            state = self.step(&state, &inc)?;
            Self::guard(&state)?;
        }
        Ok(state.field)
    }
}

/// `(1 + dt·‖Ψ₀(U)‖)⁻¹`.
pub fn taming_factor(drift_norm: f64, dt: f64) -> f64 {
    1.0 / (1.0 + dt * drift_norm)
}

/// Convenience: a full run with increments drawn from `(cfg.seed, stream_id)`.
pub fn simulate(cfg: &RunConfig, stream_id: u64) -> Result<Trajectory> {
    let integrator = Integrator::new(cfg)?;
    let mut noise = SampledNoise::new(cfg, RngStream::new(cfg.seed, stream_id))?;
    integrator.run(&mut noise)
}
