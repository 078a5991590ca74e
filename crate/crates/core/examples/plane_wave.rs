//! Deterministic check of the splitting scheme against a travelling plane wave.
//!
//! With `σ = 0`, `u₀ = Aφ₁` and `A² = R − λ₁`, the exact solution is
//! `A e^{i(2πx − ωt)}` with `ω = νλ₁ + μA²`. The error at `T` should halve with
//! the step.
//!
//! ```text
//! cargo run --example plane_wave
//! ```

use scgle::config::{InitialCondition, Method, ModelParams, RunConfig};
use scgle::integrators::{Integrator, SampledNoise};
use scgle::rng::RngStream;
use scgle::spectral::eigenvalue;
use scgle::Complex64;

fn main() -> scgle::Result<()> {
    let lam = eigenvalue(1);
    let (mu, nu) = (1.0, 1.0);
    let amplitude = lam.sqrt();
    let t_final = 0.1;
    let omega = nu * lam + mu * amplitude * amplitude;

    let mut previous: Option<f64> = None;
    for dt in [2e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4] {
        let cfg = RunConfig {
            model: ModelParams {
                r: 2.0 * lam,
                mu,
                nu,
                sigma: 0.0,
                t_final,
            },
            n: 16,
            dt,
            method: Method::Esm,
            init: InitialCondition::PlaneWave { mode: 1, amplitude },
            ..RunConfig::default()
        };
        let integrator = Integrator::new(&cfg)?;
        let mut noise = SampledNoise::new(&cfg, RngStream::new(0, 0))?;
        let end = integrator.final_state(cfg.steps(), &mut noise)?;
        let exact = Complex64::from_polar(amplitude, -omega * t_final);
        let err = end
            .modes()
            .map(|(k, c)| if k == 1 { (c - exact).norm_sqr() } else { c.norm_sqr() })
            .sum::<f64>()
            .sqrt();
        match previous {
            Some(p) => println!("dt={dt:<9} error={err:.6e} ratio={:.4}", p / err),
            None => println!("dt={dt:<9} error={err:.6e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
