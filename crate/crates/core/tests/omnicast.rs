use mmf_multicast::channel::{ensemble_drop, FadingProfile};
use mmf_multicast::omnicast::{conditional_se, min_conditional_se, omnicast_se};
use mmf_multicast::SystemConfig;

/// ∫₀^∞ log2(1 + a x) e^{-x} dx by composite Simpson on x = t/(1−t).
fn rayleigh_capacity(a: f64) -> f64 {
    let m = 200_000;
    let h = 1.0 / m as f64;
    let f = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = t / (1.0 - t);
        (1.0 + a * x).log2() * (-x).exp() / (1.0 - t).powi(2)
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn single_antenna_matches_quadrature() {
    let mut cfg = SystemConfig::reference_cell(1, vec![1], 1.0, 1.0);
    cfg.dl_power_budget = 5.0;
    let prof = FadingProfile::from_betas(vec![1], vec![2.0]).unwrap();
    let (mean, se) = conditional_se(&cfg, &prof, 200_000, 4).unwrap()[0];
    let exact = rayleigh_capacity(10.0);
    assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
    assert!(se < 5e-3);
}

#[test]
fn doubling_groups_halves_the_se() {
    let mut cfg = SystemConfig::reference_cell(16, vec![2, 2], 1.0, 1.0);
    cfg.dl_power_budget = 30.0;
    let betas = vec![0.1, 0.5, 1.0, 2.0];
    let two = FadingProfile::from_betas(vec![2, 2], betas.clone()).unwrap();
    let four = FadingProfile::from_betas(vec![1, 1, 1, 1], betas).unwrap();
    let a = conditional_se(&cfg, &two, 50, 9).unwrap();
    let b = conditional_se(&cfg, &four, 50, 9).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.0, 2.0 * y.0);
    }
}

#[test]
fn below_the_jensen_bound_per_drop() {
    let cfg = SystemConfig::reference_cell(64, vec![5, 5, 5], 40.0, 1.0);
    for d in 0..5 {
        let prof = ensemble_drop(&cfg, 3, d);
        let (min_se, _) = min_conditional_se(&cfg, &prof, 100, d as u64).unwrap();
        let per_user = conditional_se(&cfg, &prof, 100, d as u64).unwrap();
        let (weakest, beta_min) = prof
            .betas
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let bound = (1.0 + cfg.dl_power_budget * beta_min * 64.0).log2() / 3.0;
        // sampling slack on the weakest user's estimate
        assert!(min_se <= bound + 3.0 * per_user[weakest].1);
    }
}

#[test]
fn monotone_in_power_and_antennas() {
    let base = SystemConfig::reference_cell(16, vec![4, 4], 1.0, 1.0);
    let mut prev = 0.0;
    for p in [0.01, 0.1, 1.0, 10.0, 40.0] {
        let mut cfg = base.clone();
        cfg.dl_power_budget = base.normalize(p);
        let r = omnicast_se(&cfg, 4, 20, 5).unwrap();
        assert!(r.se >= prev);
        prev = r.se;
    }
    let mut prev = 0.0;
    for n in [1, 4, 16, 64, 256] {
        let mut cfg = base.clone();
        cfg.n_antennas = n;
        let r = omnicast_se(&cfg, 4, 20, 5).unwrap();
        assert!(r.se >= prev);
        prev = r.se;
    }
}

#[test]
fn reproducible_and_vanishing_at_low_power() {
    let mut cfg = SystemConfig::reference_cell(32, vec![3, 3], 1.0, 1.0);
    assert_eq!(omnicast_se(&cfg, 6, 30, 2).unwrap(), omnicast_se(&cfg, 6, 30, 2).unwrap());
    cfg.dl_power_budget = 1e-12;
    let r = omnicast_se(&cfg, 3, 10, 2).unwrap();
    assert!(r.se < 1e-9 && r.standard_error.is_finite());
}
