//! Config documents, overrides and the fast property suite.
//!
//! ```text
//! cargo run --release --example config_and_checks
//! ```

use scgle::config::config_from_str;
use scgle::validate::run_property_suite;

fn main() -> scgle::Result<()> {
    let doc = r#"
        model.R = "2^12"
        model.T = 0.9
        noise.kind = "white"
        run.N = 32
        run.dt = 0.9
        run.method = "tam"
    "#;
    let cfg = config_from_str(doc, &["run.seed=42".into(), "model.mu=-3".into()])?;
    print!("{}", cfg.to_document());
    println!("noise inside proved range: {}", cfg.noise.in_theory_range());

    for check in run_property_suite(&cfg) {
        println!("[{}] {}: {}", if check.passed { "ok" } else { "FAIL" }, check.name, check.detail);
    }

    match config_from_str("run.dt = 0.3\nmodel.T = 1.0", &[]) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
