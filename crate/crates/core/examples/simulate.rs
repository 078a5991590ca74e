//! One stochastic trajectory per method in the stable setting, with norm
//! diagnostics and snapshot files written to a temporary directory.
//!
//! ```text
//! cargo run --release --example simulate
//! ```

use std::fs::File;
use std::io::BufWriter;

use scgle::config::{config_from_str, Method};
use scgle::integrators::simulate;

fn main() -> scgle::Result<()> {
    let doc = r#"
        [model]
        R = "2^12"
        mu = 1
        nu = 1
        sigma = "2^6"
        T = "2^-8"

        [run]
        N = 128
        dt = "2^-14"
        record_every = 16
    "#;
    let out = std::env::temp_dir().join("scgle-simulate-example");
    std::fs::create_dir_all(&out)?;

    for method in [Method::Esm, Method::ExpSm, Method::Tam] {
        let mut cfg = config_from_str(doc, &[])?;
        cfg.method = method;
        let traj = simulate(&cfg, 0)?;
        let last = traj.diagnostics.last().expect("initial row");
        println!(
            "{method:>5}: {} steps, {} snapshots, final L2 {:.4}, L4 {:.4}",
            cfg.steps(),
            traj.snapshots.len(),
            last.l2,
            last.l4
        );
        traj.write_diagnostics_csv(BufWriter::new(File::create(out.join(format!("{method}.csv")))?))?;
        let (step, field) = traj.snapshots.last().expect("final snapshot");
        field.write_binary(BufWriter::new(File::create(out.join(format!("{method}_{step}.scgl")))?))?;
    }
    println!("wrote diagnostics and final snapshots to {}", out.display());
    Ok(())
}
