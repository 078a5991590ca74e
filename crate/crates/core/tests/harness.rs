use scgle::config::{Method, RunConfig};
use scgle::harness::{coupled_end_states, rmse_pair, run_ladder, Coupling, LadderSpec, Refinement};

fn paper_scale(n: usize) -> RunConfig {
    RunConfig {
        n,
        dt: 1.0 / (n * n) as f64,
        ..RunConfig::default()
    }
}

#[test]
fn coupling_reduces_the_error() {
    let cfg = paper_scale(64);
    let coupled = rmse_pair(&cfg, 50, 0, Refinement::Parabolic, Coupling::Coupled).unwrap();
    let independent = rmse_pair(&cfg, 50, 0, Refinement::Parabolic, Coupling::Independent).unwrap();
    assert!(coupled.rmse < independent.rmse, "{} vs {}", coupled.rmse, independent.rmse);
}

#[test]
fn refinement_lowers_the_error() {
    let spec = LadderSpec {
        levels: 3,
        samples: 12,
        ..LadderSpec::default()
    };
    let report = run_ladder(&spec, &RunConfig::default(), Method::Esm, "stable").unwrap();
    let mut inversions = 0;
    for w in report.levels.windows(2) {
        if w[1].rmse >= w[0].rmse {
            inversions += 1;
            assert!(w[1].rmse - w[0].rmse <= w[1].stderr.max(w[0].stderr));
        }
    }
    assert!(inversions <= 1);
    assert!(report.levels.iter().all(|l| !l.under_sampled && !l.invalid));
}

#[test]
fn baseline_pair_is_finite_and_positive() {
    let r = rmse_pair(&paper_scale(64), 20, 0, Refinement::Parabolic, Coupling::Coupled).unwrap();
    assert!(r.rmse.is_finite() && r.rmse > 0.0);
    assert_eq!(r.failures, 0);
    assert_eq!(r.squared_errors.len(), 20);
    assert!(r.tail_norm > 0.0);
    let split = (r.projected_rmse.powi(2) + r.tail_norm.powi(2)).sqrt();
    assert!((split - r.rmse).abs() < 1e-12 * r.rmse);
}

#[test]
fn pair_error_matches_explicit_end_states() {
    let cfg = paper_scale(128);
    let pair = rmse_pair(&cfg, 3, 2, Refinement::Parabolic, Coupling::Coupled).unwrap();
    for (j, sq) in pair.squared_errors.iter().enumerate() {
        let (coarse, fine) = coupled_end_states(&cfg, 2, j).unwrap();
        let mut d = coarse.zero_pad(256).unwrap();
        d.add_scaled(&fine, -1.0).unwrap();
        assert_eq!(d.norm_l2().powi(2), *sq);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let spec = LadderSpec {
        levels: 2,
        samples: 9,
        ..LadderSpec::default()
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_ladder(&spec, &RunConfig::default(), Method::Tam, "t").unwrap())
    };
    let one = run(1);
    let three = run(3);
    assert_eq!(one, three);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    one.write_csv(&mut a).unwrap();
    three.write_csv(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn out_of_theory_settings_are_flagged() {
    let mut cfg = RunConfig::default();
    cfg.model.mu = -3.0;
    cfg.model.nu = 3.0;
    cfg.noise = scgle::NoiseSpec::white();
    let spec = LadderSpec {
        levels: 2,
        samples: 4,
        ..LadderSpec::default()
    };
    let report = run_ladder(&spec, &cfg, Method::Esm, "defect").unwrap();
    assert!(!report.flags.nu_in_theory_range);
    assert!(!report.flags.noise_in_theory_range);
    assert_eq!(report.flags.noise_r, -0.5);
    let summary = report.summary_json();
    assert_eq!(summary["flags"]["nu_in_theory_range"], false);
}
