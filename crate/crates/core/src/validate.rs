//! Fast property suite run by `scgle validate` against a configuration.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::flow::{phi_flow, FlowParams};
use crate::noise::{couple_down, variance_conv, IncrementKind, IncrementSampler, NoiseHierarchy};
use crate::rng::RngStream;
use crate::spectral::{eigenvalue, FourierTransform, SpectralField};
use crate::stats::{ks_standard_normal, sample_variance};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }
}

const DRAWS: usize = 20_000;

fn flow_bounds(p: FlowParams, dt_max: f64) -> CheckResult {
    let mut worst_growth = f64::NEG_INFINITY;
    let mut worst_contraction = f64::NEG_INFINITY;
    let mut worst_circle: f64 = 0.0;
    for i in 0..=40 {
        let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 40.0);
        for j in 0..=20 {
            let dt = dt_max * j as f64 / 20.0;
            let z = Complex64::from_polar(r, 0.37 * i as f64 + 1.1 * j as f64);
            let w = phi_flow(z, dt, p).norm();
            worst_growth = worst_growth.max(w - (p.r * dt).exp() * r);
            if r >= p.r.sqrt() {
                worst_contraction = worst_contraction.max(w - r);
            }
            let zc = Complex64::from_polar(p.r.sqrt(), 0.3 * j as f64);
            worst_circle = worst_circle.max((phi_flow(zc, dt, p).norm() - p.r.sqrt()).abs() / p.r.sqrt());
        }
    }
    let slack = 1e-12;
    let passed = worst_growth <= slack * 1e3 && worst_contraction <= slack * 1e3 && worst_circle <= 1e-12;
    CheckResult::new(
        "flow_bounds",
        passed,
        format!(
            "R={} mu={}: max growth excess {worst_growth:e}, max contraction excess {worst_contraction:e}, circle drift {worst_circle:e}",
            p.r, p.mu
        ),
    )
}

fn sampler_law(cfg: &RunConfig) -> CheckResult {
    let modes: Vec<i64> = [0i64, 1, 7]
        .into_iter()
        .filter(|k| crate::spectral::mode_slot(*k, cfg.n).is_some())
        .collect();
    let sampler = match IncrementSampler::new(IncrementKind::Convolution, cfg.n, cfg.dt, &cfg.noise) {
        Ok(s) => s,
        Err(e) => return CheckResult::new("sampler_law", false, e.to_string()),
    };
    let mut rng = RngStream::new(cfg.seed, u64::MAX);
    let mut re = vec![Vec::with_capacity(DRAWS); modes.len()];
    for _ in 0..DRAWS {
        let inc = sampler.sample(&mut rng);
        for (slot, k) in modes.iter().enumerate() {
            re[slot].push(inc.values.get(*k).re);
        }
    }
    let mut passed = true;
    let mut detail = Vec::new();
    for (slot, k) in modes.iter().enumerate() {
        let v = variance_conv(*k, cfg.dt, &cfg.noise).unwrap_or(f64::NAN);
        let emp = sample_variance(&re[slot]);
        let rel = (emp / v - 1.0).abs();
        let standardized: Vec<f64> = re[slot].iter().map(|x| x / v.sqrt()).collect();
        let ks = ks_standard_normal(&standardized);
        passed &= rel < 0.05 && ks.p_value > 1e-3;
        detail.push(format!("k={k}: var rel err {rel:.4}, KS p={:.3}", ks.p_value));
    }
    CheckResult::new("sampler_law", passed, detail.join("; "))
}

fn coupling_identity(cfg: &RunConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    let h = cfg.dt / 4.0;
    for k in [0i64, 1, 3, 7, (cfg.n / 2) as i64] {
        let lam = eigenvalue(k);
        let weights: f64 = (0..4).map(|j| (-2.0 * lam * (3 - j) as f64 * h).exp()).sum();
        let (Ok(vf), Ok(vc)) = (variance_conv(k, h, &cfg.noise), variance_conv(k, cfg.dt, &cfg.noise)) else {
            return CheckResult::new("coupling_identity", false, format!("no variance for mode {k}"));
        };
        worst = worst.max((weights * vf - vc).abs() / vc);
    }
    // the hierarchy's coarse level must equal explicit aggregation of its fine level
    let pathwise = NoiseHierarchy::new(IncrementKind::Convolution, cfg.n, cfg.dt, 2, &cfg.noise, cfg.model.nu)
        .and_then(|h| h.next_block(&mut RngStream::new(cfg.seed, 0)))
        .and_then(|b| Ok(couple_down(&b[1], cfg.n, cfg.model.nu)? == b[0][0]));
    let pathwise_ok = matches!(pathwise, Ok(true));
    CheckResult::new(
        "coupling_identity",
        worst <= 1e-12 && pathwise_ok,
        format!("max relative variance identity error {worst:e}; pathwise aggregation ok: {pathwise_ok}"),
    )
}

fn pseudo_random_field(n: usize, seed: u64) -> SpectralField {
    let mut rng = RngStream::new(seed, 1);
    SpectralField::from_fn(n, |_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
}

fn parseval(cfg: &RunConfig) -> CheckResult {
    let f = pseudo_random_field(cfg.n, cfg.seed);
    let t = FourierTransform::new(cfg.n);
    let g = t.to_grid(&f);
    let rel = (g.norm_l2() - f.norm_l2()).abs() / f.norm_l2();
    let back = t.to_coeffs(&g);
    let mut d = back;
    let _ = d.add_scaled(&f, -1.0);
    let round = d.norm_l2() / f.norm_l2();
    CheckResult::new(
        "parseval",
        rel <= 1e-12 && round <= 1e-12,
        format!("norm mismatch {rel:e}, round-trip error {round:e}"),
    )
}

fn semigroup_law(cfg: &RunConfig) -> CheckResult {
    let f = pseudo_random_field(cfg.n, cfg.seed ^ 0x5eed);
    let (s, t) = (0.3 * cfg.dt, 0.7 * cfg.dt);
    let two = f.semigroup_apply(s, &cfg.model).semigroup_apply(t, &cfg.model);
    let mut d = f.semigroup_apply(s + t, &cfg.model);
    let _ = d.add_scaled(&two, -1.0);
    let rel = d.norm_l2() / f.norm_l2();
    let contracts = f.semigroup_apply(cfg.dt, &cfg.model).norm_l2() <= f.norm_l2();
    CheckResult::new(
        "semigroup_law",
        rel <= 1e-12 && contracts,
        format!("composition error {rel:e}, contraction holds: {contracts}"),
    )
}

/// Runs all checks; the configuration is assumed to be validated already.
pub fn run_property_suite(cfg: &RunConfig) -> Vec<CheckResult> {
    let dt_max = cfg.dt.min(0.999);
    vec![
        flow_bounds(FlowParams::from(&cfg.model), dt_max),
        flow_bounds(FlowParams::new(2.0, 1.0), 0.5),
        sampler_law(cfg),
        coupling_identity(cfg),
        parseval(cfg),
        semigroup_law(cfg),
    ]
}
