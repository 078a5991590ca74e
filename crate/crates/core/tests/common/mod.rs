#![allow(dead_code)]

use scgle::Complex64;

/// Dormand–Prince 5(4) tableau; the systems here are autonomous, so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of a 2-component autonomous system
/// from `0` to `t_end`. The time is accumulated with compensated summation.
pub fn dopri<F>(f: F, y0: [f64; 2], t_end: f64, tol: f64) -> [f64; 2]
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let mut y = y0;
    let mut t = 0.0f64;
    let mut t_comp = 0.0f64;
    let mut h = (t_end / 100.0).clamp(f64::MIN_POSITIVE, 1e-6);
    while t < t_end {
        let h_step = h.min(t_end - t);
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, a) in A[s].iter().enumerate().take(s) {
                for c in 0..2 {
                    ys[c] += h_step * a * k[j][c];
                }
            }
            k[s] = f(ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for c in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][c];
                d4 += B4[s] * k[s][c];
            }
            y5[c] += h_step * d5;
            let scale = tol * (1.0 + y[c].abs().max(y5[c].abs()));
            err = err.max((h_step * (d5 - d4)).abs() / scale);
        }
        if err <= 1.0 {
            y = y5;
            // Kahan update of t
            let inc = h_step - t_comp;
            let next = t + inc;
            t_comp = (next - t) - inc;
            t = next;
            if t_end - t <= 1e-15 * t_end {
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_step * factor;
    }
    y
}

/// Reference solution of `z' = Rz − (1+iμ)|z|²z` at time `dt`.
///
/// Integrates the polar form in `y = ln|z|²`: `y' = 2(R − e^y)`, together with
/// `I' = e^y − R`, and the phase is `arg z₀ − μ(R t + I)`. The log variable keeps
/// full relative precision while `|z|` is small, and keeping `μRt` out of the
/// integration keeps the phase accurate over thousands of radians.
pub fn reference_flow(z: Complex64, dt: f64, r: f64, mu: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) || dt == 0.0 {
        return z;
    }
    let rhs = |y: [f64; 2]| {
        let rho = y[0].exp();
        [2.0 * (r - rho), rho - r]
    };
    let [log_rho, integral] = dopri(rhs, [z.norm_sqr().ln(), 0.0], dt, 1e-14);
    let phase = z.arg() - mu * (r * dt) - mu * integral;
    Complex64::from_polar((0.5 * log_rho).exp(), phase.rem_euclid(std::f64::consts::TAU))
}

/// `L²` distance between a numerical single-mode field and `a φ_k`.
pub fn single_mode_error(field: &scgle::SpectralField, k: i64, a: Complex64) -> f64 {
    let mut sq = 0.0;
    for (m, c) in field.modes() {
        let target = if m == k { a } else { Complex64::new(0.0, 0.0) };
        sq += (c - target).norm_sqr();
    }
    sq.sqrt()
}
