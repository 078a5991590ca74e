//! Exact sampling of the per-mode stochastic convolution and the
//! refinement-coupled noise hierarchy.
//!
//! ```text
//! cargo run --release --example noise_sampling
//! ```

use scgle::noise::{couple_down, variance_conv, IncrementKind, IncrementSampler, NoiseHierarchy};
use scgle::rng::RngStream;
use scgle::stats::{ks_standard_normal, sample_variance};
use scgle::NoiseSpec;

fn main() -> scgle::Result<()> {
    let spec = NoiseSpec::regular();
    let (n, dt) = (64, 2f64.powi(-12));
    let sampler = IncrementSampler::new(IncrementKind::Convolution, n, dt, &spec)?;
    let mut rng = RngStream::new(2024, 0);

    let draws = 50_000;
    let modes = [0i64, 1, 7, 31];
    let mut samples = vec![Vec::with_capacity(draws); modes.len()];
    for _ in 0..draws {
        let inc = sampler.sample(&mut rng);
        for (i, k) in modes.iter().enumerate() {
            samples[i].push(inc.values.get(*k).re);
        }
    }
    println!("{:>4} {:>14} {:>14} {:>8}", "k", "exact var", "sample var", "KS p");
    for (i, k) in modes.iter().enumerate() {
        let v = variance_conv(*k, dt, &spec)?;
        let z: Vec<f64> = samples[i].iter().map(|x| x / v.sqrt()).collect();
        println!(
            "{k:>4} {v:>14.6e} {:>14.6e} {:>8.3}",
            sample_variance(&samples[i]),
            ks_standard_normal(&z).p_value
        );
    }

    // three levels on one Brownian path: every coarse increment is an exact
    // aggregate of the four finer ones below it
    let hierarchy = NoiseHierarchy::new(IncrementKind::Convolution, 16, dt, 3, &spec, 1.0)?;
    let block = hierarchy.next_block(&mut RngStream::new(7, 1))?;
    for (level, incs) in block.iter().enumerate() {
        println!("level {level}: {} increments at N={}", incs.len(), incs[0].n());
    }
    let rebuilt = couple_down(&block[1], 16, 1.0)?;
    println!("coarse increment rebuilt from level 1: {}", rebuilt == block[0][0]);
    Ok(())
}
