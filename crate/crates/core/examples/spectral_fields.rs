//! Fourier fields on the unit torus: transforms, projection, the linear
//! semigroup, norms and the binary snapshot format.
//!
//! ```text
//! cargo run --example spectral_fields
//! ```

use scgle::spectral::{eigenvalue, FourierTransform, GridField, SpectralField};
use scgle::{Complex64, ModelParams};

fn main() -> scgle::Result<()> {
    let n = 32;
    let t = FourierTransform::new(n);

    // a smooth grid function and its coefficients
    let g = GridField::from_fn(n, |x| {
        let th = std::f64::consts::TAU * x;
        Complex64::new(th.cos() + 0.25 * (3.0 * th).sin(), 0.5 * (2.0 * th).cos())
    });
    let f = t.to_coeffs(&g);
    for (k, c) in f.ascending().filter(|(_, c)| c.norm() > 1e-12) {
        println!("k={k:>3}  a_k = {c:.4}");
    }
    println!("grid L2 {:.12}  coefficient L2 {:.12}", g.norm_l2(), f.norm_l2());

    // spectrally decaying field, projected to fewer modes
    let rough = SpectralField::from_fn(n, |k| Complex64::new(1.0 / (1.0 + eigenvalue(k)), 0.0));
    for m in [16, 8, 4] {
        let mut tail = rough.clone();
        tail.add_scaled(&rough.project(m)?.zero_pad(n)?, -1.0)?;
        println!("N'={m:>2}: ||f − P f|| = {:.3e}", tail.norm_l2());
    }

    // e^{tA} damps mode k by e^{−λ_k t} and rotates it by −νλ_k t
    let params = ModelParams::default();
    let wave = SpectralField::single_mode(n, 2, Complex64::new(1.0, 0.0));
    for time in [0.0, 1e-3, 1e-2] {
        let c = wave.semigroup_apply(time, &params).get(2);
        println!("t={time:<6} mode 2 -> |c|={:.6} arg={:.6}", c.norm(), c.arg());
    }

    let mut bytes = Vec::new();
    f.write_binary(&mut bytes)?;
    let back = SpectralField::read_binary(bytes.as_slice())?;
    println!("snapshot: {} bytes, round trip exact: {}", bytes.len(), back == f);
    Ok(())
}
