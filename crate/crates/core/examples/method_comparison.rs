//! ESM, ExpSM and Tam on the same ladder, in the stable and the
//! defect-turbulence settings.
//!
//! ```text
//! cargo run --release --example method_comparison
//! ```

use scgle::config::{Method, RunConfig};
use scgle::harness::{run_ladder, LadderSpec};

fn main() -> scgle::Result<()> {
    let spec = LadderSpec {
        levels: 3,
        samples: 16,
        ..LadderSpec::default()
    };
    let stable = RunConfig::default();
    let mut turbulent = RunConfig::default();
    turbulent.model.mu = -3.0;
    turbulent.model.nu = 3.0;

    for (label, template) in [("stable", &stable), ("defect turbulence", &turbulent)] {
        println!("{label}");
        for method in [Method::Esm, Method::ExpSm, Method::Tam] {
            let report = run_ladder(&spec, template, method, label)?;
            let errs: Vec<String> = report.levels.iter().map(|l| format!("{:.3e}", l.rmse)).collect();
            let failures: usize = report.levels.iter().map(|l| l.failures).sum();
            println!(
                "  {method:>5}: rmse [{}] slope {:.3} failures {failures}",
                errs.join(", "),
                report.slope_dt.map_or(f64::NAN, |s| s.slope)
            );
        }
        println!(
            "  dispersion within theory: {}",
            template.model.nu_in_theory_range()
        );
    }
    Ok(())
}
