//! Closed-form flow of the pointwise reaction ODE `z' = Rz − (1+iμ)|z|²z`.
//!
//! Writing `s = |z|²`, the modulus obeys a logistic equation and the phase is
//! slaved to it, which gives
//!
//! ```text
//! Φ_t(z) = sqrt(R / (s − e^{−2Rt}(s − R))) · exp(−i μ/2 · ln(1 + s(e^{2Rt} − 1)/R)) · z
//! ```
//!
//! Both factors are evaluated in a form that stays finite for any `Rt`: the
//! radicand as `s(1 − e^{−2Rt}) + R e^{−2Rt}` and, for `2Rt > 1`, the
//! logarithm as `2Rt + ln(radicand / R)`.

use num_complex::Complex64;

use crate::config::ModelParams;
use crate::spectral::GridField;

/// Below this step the increment map switches to its Taylor expansion.
const PSI_TAYLOR_DT: f64 = 1e-8;

/// Reaction coefficients consumed by the flow maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    pub r: f64,
    pub mu: f64,
}

impl FlowParams {
    pub fn new(r: f64, mu: f64) -> Self {
        FlowParams { r, mu }
    }

    /// `α(t) = (e^{2Rt} − 1)/R`.
    pub fn alpha(&self, dt: f64) -> f64 {
        (2.0 * self.r * dt).exp_m1() / self.r
    }
}

impl From<&ModelParams> for FlowParams {
    fn from(m: &ModelParams) -> Self {
        FlowParams { r: m.r, mu: m.mu }
    }
}

/// Drift `Ψ₀(z) = Rz − (1+iμ)|z|²z`.
#[inline]
pub fn psi0(z: Complex64, p: FlowParams) -> Complex64 {
    z * p.r - Complex64::new(1.0, p.mu) * (z.norm_sqr() * z)
}

/// `Φ_dt` with the step-dependent constants hoisted out of the per-point work.
#[derive(Clone, Copy, Debug)]
pub struct FlowMap {
    p: FlowParams,
    dt: f64,
    /// `2R dt`
    x: f64,
    /// `e^{−2R dt}`
    decay: f64,
    /// `1 − e^{−2R dt}`
    growth: f64,
    /// `α(dt)`; only used when `2R dt ≤ 1`
    alpha: f64,
}

impl FlowMap {
    pub fn new(dt: f64, p: FlowParams) -> Self {
        debug_assert!(dt >= 0.0);
        let x = 2.0 * p.r * dt;
        FlowMap {
            p,
            dt,
            x,
            decay: (-x).exp(),
            growth: -(-x).exp_m1(),
            alpha: if x <= 1.0 { x.exp_m1() / p.r } else { f64::NAN },
        }
    }

    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        if self.dt == 0.0 {
            return z;
        }
        let s = z.norm_sqr();
        if s == 0.0 {
            return z;
        }
        let radicand = s * self.growth + self.p.r * self.decay;
        debug_assert!(radicand > 0.0, "flow radicand must be positive");
        let modulus = (self.p.r / radicand).sqrt();
        let log_arg = if self.x <= 1.0 {
            (self.alpha * s).ln_1p()
        } else {
            self.x + (radicand / self.p.r).ln()
        };
        let phase = -0.5 * self.p.mu * log_arg;
        z * Complex64::from_polar(modulus, phase)
    }
}

/// Exact time-`dt` flow `Φ_dt(z)`; `Φ_0 = id`.
pub fn phi_flow(z: Complex64, dt: f64, p: FlowParams) -> Complex64 {
    FlowMap::new(dt, p).apply(z)
}

/// Increment map `Ψ_dt(z) = (Φ_dt(z) − z)/dt`, equal to `Ψ₀` at `dt = 0`.
pub fn psi_dt(z: Complex64, dt: f64, p: FlowParams) -> Complex64 {
    if dt == 0.0 {
        return psi0(z, p);
    }
    if dt < PSI_TAYLOR_DT {
        // Φ_dt(z) = g_z(dt)·z with g_z(0) = 1, g'_z(0) = R − (1+iμ)s,
        // g''_z(0) = g'_z(0)² + 2(1+iμ)s(s − R).
        let s = z.norm_sqr();
        let c = Complex64::new(1.0, p.mu);
        let g1 = c * (-s) + p.r;
        let g2 = g1 * g1 + c * (2.0 * s * (s - p.r));
        return z * (g1 + g2 * (0.5 * dt));
    }
    (phi_flow(z, dt, p) - z) / dt
}

/// Applies `Φ_dt` independently at every grid point.
pub fn apply_flow(g: &GridField, dt: f64, p: FlowParams) -> GridField {
    let map = FlowMap::new(dt, p);
    g.map(|z| map.apply(z))
}

pub fn apply_flow_in_place(g: &mut GridField, dt: f64, p: FlowParams) {
    let map = FlowMap::new(dt, p);
    for z in g.values_mut() {
        *z = map.apply(*z);
    }
}

/// Pointwise drift `Ψ₀` on a grid.
pub fn apply_drift(g: &GridField, p: FlowParams) -> GridField {
    g.map(|z| psi0(z, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Classical RK4 on the Cartesian ODE, many small steps.
    fn rk4(z0: Complex64, dt: f64, p: FlowParams, steps: usize) -> Complex64 {
        let h = dt / steps as f64;
        let mut z = z0;
        for _ in 0..steps {
            let k1 = psi0(z, p);
            let k2 = psi0(z + k1 * (h / 2.0), p);
            let k3 = psi0(z + k2 * (h / 2.0), p);
            let k4 = psi0(z + k3 * h, p);
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        z
    }

    #[test]
    fn psi0_examples() {
        let p = FlowParams::new(2.0, 1.0);
        assert_eq!(psi0(c(0.0, 0.0), p), c(0.0, 0.0));
        assert_eq!(psi0(c(1.0, 0.0), p), c(1.0, -1.0));
        // R=2^12, μ=−3, z=(1+i)/2: |z|²=1/2, so Ψ₀ = z(4096 − (1−3i)/2) = z(4095.5 + 1.5i)
        let q = FlowParams::new(4096.0, -3.0);
        let z = c(0.5, 0.5);
        let expected = c(0.5 * 4095.5 - 0.5 * 1.5, 0.5 * 4095.5 + 0.5 * 1.5);
        assert!((psi0(z, q) - expected).norm() < 1e-12);
    }

    #[test]
    fn phi_examples() {
        let p = FlowParams::new(2.0, 1.0);
        let z = c(0.3, -1.7);
        assert_eq!(phi_flow(z, 0.0, p), z);
        let unit = FlowParams::new(1.0, 0.0);
        for &dt in &[1e-6, 0.1, 0.5, 0.99] {
            assert!((phi_flow(c(1.0, 0.0), dt, unit) - c(1.0, 0.0)).norm() < 1e-15);
        }
        let oracle = rk4(c(1.0, 0.0), 0.1, p, 20_000);
        assert!((phi_flow(c(1.0, 0.0), 0.1, p) - oracle).norm() < 1e-8);
    }

    #[test]
    fn psi_examples() {
        let p = FlowParams::new(2.0, 1.0);
        assert_eq!(psi_dt(c(1.0, 0.0), 0.0, p), c(1.0, -1.0));
        for &dt in &[0.0, 1e-10, 1e-3, 0.5] {
            assert_eq!(psi_dt(c(0.0, 0.0), dt, p), c(0.0, 0.0));
        }
        let z = c(1.0, 0.0);
        let e1 = (psi_dt(z, 1e-3, p) - psi0(z, p)).norm();
        let e2 = (psi_dt(z, 5e-4, p) - psi0(z, p)).norm();
        let ratio = e1 / e2;
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn taylor_branch_joins_direct_formula() {
        let p = FlowParams::new(3.0, -2.0);
        for &z in &[c(0.2, 0.1), c(1.5, -0.7), c(-3.0, 2.0)] {
            let below = psi_dt(z, PSI_TAYLOR_DT * 0.999, p);
            let above = psi_dt(z, PSI_TAYLOR_DT * 1.001, p);
            assert!((below - above).norm() <= 1e-6 * psi0(z, p).norm(), "z={z}");
            // Taylor branch is second order accurate against Ψ₀
            assert!((psi_dt(z, 1e-12, p) - psi0(z, p)).norm() < 1e-9 * (1.0 + psi0(z, p).norm()));
        }
    }

    #[test]
    fn large_step_stays_finite() {
        // 2R dt ≈ 7373: exp would overflow in the textbook form
        let p = FlowParams::new(4096.0, 1.0);
        for &z in &[c(1e-3, 0.0), c(5.0, 5.0), c(100.0, -3.0)] {
            let w = phi_flow(z, 0.9, p);
            assert!(w.re.is_finite() && w.im.is_finite());
            assert!((w.norm() - 64.0).abs() < 1e-10, "relaxes onto |z| = √R");
        }
    }

    #[test]
    fn apply_flow_pointwise() {
        let p = FlowParams::new(2.0, 1.0);
        let g = GridField::new(vec![c(0.3, 0.1), c(-1.0, 2.0), c(0.0, 0.0)]);
        assert_eq!(apply_flow(&g, 0.0, p), g);
        let k = GridField::new(vec![c(0.7, -0.2); 5]);
        let out = apply_flow(&k, 0.05, p);
        let z = phi_flow(c(0.7, -0.2), 0.05, p);
        assert!(out.values().iter().all(|v| *v == z));
        let mut h = g.clone();
        apply_flow_in_place(&mut h, 0.05, p);
        assert_eq!(h, apply_flow(&g, 0.05, p));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = FlowParams> {
            prop_oneof![Just(FlowParams::new(2.0, 1.0)), Just(FlowParams::new(4096.0, -3.0)), Just(FlowParams::new(1.0, 0.0))]
        }

        proptest! {
            #[test]
            fn growth_bound(p in params(), r in 0.0f64..1e3, th in 0.0f64..6.3, dt in 0.0f64..1.0) {
                let z = Complex64::from_polar(r, th);
                let bound = (p.r * dt).exp() * r;
                prop_assert!(phi_flow(z, dt, p).norm() <= bound + 1e-12);
            }

            #[test]
            fn contracts_outside_invariant_circle(p in params(), extra in 0.0f64..900.0, th in 0.0f64..6.3, dt in 0.0f64..1.0) {
                let r = p.r.sqrt() + extra;
                let z = Complex64::from_polar(r, th);
                prop_assert!(phi_flow(z, dt, p).norm() <= r + 1e-12 * r.max(1.0));
            }

            #[test]
            fn invariant_circle_fixed(p in params(), th in 0.0f64..6.3, dt in 0.0f64..1.0) {
                let z = Complex64::from_polar(p.r.sqrt(), th);
                prop_assert!((phi_flow(z, dt, p).norm() - z.norm()).abs() <= 1e-12 * z.norm());
            }

            #[test]
            fn rotation_equivariant(p in params(), r in 0.0f64..50.0, th in 0.0f64..6.3, w in 0.0f64..6.3, dt in 0.0f64..0.01) {
                let z = Complex64::from_polar(r, th);
                let rot = Complex64::from_polar(1.0, w);
                let lhs = phi_flow(rot * z, dt, p);
                let rhs = rot * phi_flow(z, dt, p);
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }

            #[test]
            fn one_sided_bound(p in params(), r in 0.0f64..1e3, th in 0.0f64..6.3, dt in 1e-9f64..0.05) {
                let z = Complex64::from_polar(r, th);
                let lhs = (psi_dt(z, dt, p) * z.conj()).re;
                let sharp = (p.r * dt).exp_m1() / dt * z.norm_sqr();
                prop_assert!(lhs <= sharp * (1.0 + 1e-9) + 1e-9);
            }
        }

        #[test]
        fn cubic_bound_uniform_in_dt() {
            // C fitted at dt = 0 over a log-spaced |z| sweep, then reused for all dt.
            // Orbits of Φ stay in the disc of radius max(|z|, √R), hence the (1 + R^{3/2}) factor.
            let p = FlowParams::new(2.0, 1.0);
            let radii: Vec<f64> = (0..=60).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 60.0)).collect();
            let c0 = radii
                .iter()
                .map(|&r| psi0(Complex64::new(r, 0.0), p).norm() / (1.0 + r.powi(3)))
                .fold(0.0, f64::max);
            let bound_c = c0 * (1.0 + p.r.powf(1.5));
            for dt in [1e-9, 1e-4, 1e-2, 0.1, 0.5, 0.99] {
                for &r in &radii {
                    let z = Complex64::from_polar(r, 0.7);
                    assert!(psi_dt(z, dt, p).norm() <= bound_c * (1.0 + r.powi(3)), "dt={dt} r={r}");
                }
            }
        }
    }
}
