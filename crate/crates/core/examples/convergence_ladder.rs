//! Strong-convergence ladder for the exact splitting scheme with
//! refinement-coupled noise and parabolic scaling `N² dt = 1`.
//!
//! ```text
//! cargo run --release --example convergence_ladder -- [levels] [samples]
//! ```

use scgle::config::{Method, RunConfig};
use scgle::harness::{run_ladder, LadderSpec};

fn main() -> scgle::Result<()> {
    let mut args = std::env::args().skip(1);
    let levels = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let samples = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = LadderSpec {
        levels,
        samples,
        ..LadderSpec::default()
    };
    let report = run_ladder(&spec, &RunConfig::default(), Method::Esm, "stable, regular noise")?;

    println!("{:>6} {:>12} {:>12} {:>10} {:>12} {:>10}", "N", "dt", "rmse", "stderr", "projected", "tail");
    for l in &report.levels {
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>10.2e} {:>12.4e} {:>10.3e}",
            l.n, l.dt, l.rmse, l.stderr, l.projected_rmse, l.tail_norm
        );
    }
    if let Some(fit) = report.slope_dt {
        println!("fitted order in dt: {:.3} (residual {:.3})", fit.slope, fit.residual);
    }
    if let Some(fit) = report.slope_n {
        println!("fitted order in N:  {:.3}", fit.slope);
    }

    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    print!("\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}
