//! The closed-form flow of the pointwise reaction `z' = Rz − (1+iμ)|z|²z`.
//!
//! Every orbit is pulled onto the circle `|z| = √R` and turns on it at rate
//! `−μR`. The map stays finite for any step below 1, even when `R dt` is huge.
//!
//! ```text
//! cargo run --example flow_map
//! ```

use scgle::flow::{phi_flow, psi0, psi_dt, FlowParams};
use scgle::Complex64;

fn main() {
    let p = FlowParams::new(4096.0, 1.0);
    let dt = 2f64.powi(-12);

    println!("{:>10} {:>14} {:>14} {:>12}", "|z|", "|Phi(z)|", "e^{R dt}|z|", "arg change");
    for modulus in [1e-3, 1.0, 10.0, 64.0, 200.0] {
        let z = Complex64::from_polar(modulus, 0.0);
        let w = phi_flow(z, dt, p);
        println!(
            "{modulus:>10.3} {:>14.6} {:>14.6} {:>12.6}",
            w.norm(),
            (p.r * dt).exp() * modulus,
            w.arg()
        );
    }

    // one long step relaxes onto the invariant circle
    let w = phi_flow(Complex64::new(0.3, -0.2), 0.9, p);
    println!("\nafter dt=0.9: |Phi(z)| = {:.12} (sqrt R = {})", w.norm(), p.r.sqrt());

    // the increment map converges to the drift as the step shrinks
    let z = Complex64::new(3.0, 4.0);
    println!("\ndrift Psi_0(z) = {:.6}", psi0(z, p));
    for dt in [1e-3, 1e-5, 1e-7, 1e-9] {
        let d = psi_dt(z, dt, p);
        println!("dt={dt:e}: Psi_dt(z) = {d:.6}, |Psi_dt − Psi_0| = {:.3e}", (d - psi0(z, p)).norm());
    }
}
