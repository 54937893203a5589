//! Property tests for invariants that hold over whole parameter families.

use std::f64::consts::PI;

use noonsim::observables::difference_moments;
use noonsim::ramsey::RamseyChannel;
use noonsim::*;
use proptest::prelude::*;

fn state_strategy(max_atoms: usize) -> impl Strategy<Value = FockVector> {
    (1..=max_atoms)
        .prop_flat_map(|n| prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n + 1))
        .prop_filter_map("zero vector", |v| {
            FockVector::normalized(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok()
        })
}

fn ensemble_strategy(max_atoms: usize) -> impl Strategy<Value = MixedEnsemble> {
    (1..=max_atoms, 1..4usize)
        .prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(
                    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n + 1),
                    k,
                ),
                prop::collection::vec(0.05..1.0f64, k),
            )
        })
        .prop_filter_map("degenerate ensemble", |(vecs, raw_w)| {
            let total: f64 = raw_w.iter().sum();
            let comps = vecs
                .into_iter()
                .zip(raw_w)
                .map(|(v, w)| {
                    FockVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
                        .map(|s| (w / total, s))
                })
                .collect::<Result<Vec<_>>>()
                .ok()?;
            MixedEnsemble::new(comps).ok()
        })
}

fn params_strategy() -> impl Strategy<Value = SystemParams> {
    (
        0.0..5.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        -1.0..1.0f64,
        -1.0..1.0f64,
        any::<bool>(),
    )
        .prop_map(|(kappa, ul, ur, el, er, half)| SystemParams {
            kappa,
            u_left: ul,
            u_right: ur,
            e_left: el,
            e_right: er,
            interaction_convention: if half {
                InteractionConvention::Half
            } else {
                InteractionConvention::Full
            },
        })
}

fn std_dev(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_is_hermitian(params in params_strategy(), n in 1usize..30) {
        let h = hamiltonian_matrix(&params, n).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                prop_assert_eq!(h.entry(i, j), h.entry(j, i).conj());
                if i.abs_diff(j) > 1 {
                    prop_assert_eq!(h.entry(i, j), C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn symmetric_wells_commute_with_reversal(kappa in 0.0..5.0f64, u in -2.0..2.0f64, n in 1usize..30) {
        let h = hamiltonian_matrix(&SystemParams::symmetric(kappa, u), n).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                prop_assert!((h.entry(i, j) - h.entry(n - i, n - j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_observables_are_weighted_sums(ens in ensemble_strategy(10), probe in state_strategy(10)) {
        let n = ens.total_atoms();
        let comps = ens.components();
        let weighted = |f: &dyn Fn(&FockVector) -> f64| comps.iter().map(|(w, s)| w * f(s)).sum::<f64>();
        prop_assert!((mean_left(&ens) - weighted(&|s| mean_left(s))).abs() < 1e-12);
        prop_assert!((parity(&ens) - weighted(&|s| parity(s))).abs() < 1e-12);
        let second = |s: &FockVector| difference_moments(&s.probabilities(), 2)[1];
        let ens_second = diff_variance(&ens) + (2.0 * mean_left(&ens) - n as f64).powi(2);
        prop_assert!((ens_second - weighted(&second)).abs() < 1e-9);
        if probe.total_atoms() == n {
            let f = fidelity(&probe, &ens).unwrap();
            prop_assert!((f - weighted(&|s| fidelity(&probe, s).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn noon_fidelity_bounds(s in state_strategy(12), phi in 0.0..(2.0 * PI)) {
        let (best, best_phi) = noon_fidelity(&s);
        let at_phi = fidelity(&make_noon(s.total_atoms(), phi).unwrap(), &s).unwrap();
        prop_assert!(best <= 1.0 + 1e-12);
        prop_assert!(at_phi <= best + 1e-12);
        let at_best = fidelity(&make_noon(s.total_atoms(), best_phi).unwrap(), &s).unwrap();
        prop_assert!((at_best - best).abs() < 1e-12);
    }

    #[test]
    fn real_time_evolution_preserves_norm(s in state_strategy(12), params in params_strategy(), t in 0.0..2.0f64) {
        let sched = ParamSchedule::constant(params, t);
        let report = real_evolve_report(&s, &sched, &IntegratorConfig::default()).unwrap();
        prop_assert!(report.norm_drift < 1e-9);
        let exact = propagate_exact(&s, &params, t).unwrap();
        prop_assert!((fidelity(&report.state, &exact).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn protocol_moments_match_operator_moments(s in state_strategy(12), theta in 0.0..(2.0 * PI), kappa in 0.1..20.0f64) {
        let n = s.total_atoms();
        let record = ramsey_run(&s, theta, &RamseyConfig::new(kappa)).unwrap();
        prop_assert_eq!(record.moments.len(), n);
        for k in 1..=n {
            let oracle = quadrature_moment(&s, theta, k as u32).unwrap();
            // Moments scale like N^k; compare on that scale.
            let scale = (n as f64).powi(k as i32);
            prop_assert!((record.moments[k - 1] - oracle).abs() <= 1e-9 * scale,
                "k={} protocol={} operator={}", k, record.moments[k - 1], oracle);
        }
    }

    #[test]
    fn fringe_is_two_pi_periodic(s in state_strategy(10), theta in 0.0..(2.0 * PI)) {
        let cfg = RamseyConfig::default();
        let a = ramsey_run(&s, theta, &cfg).unwrap();
        let b = ramsey_run(&s, theta + 2.0 * PI, &cfg).unwrap();
        for (x, y) in a.distribution.iter().zip(&b.distribution) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn noon_parity_has_period_two_pi_over_n(n in 1usize..16, phi in 0.0..(2.0 * PI), theta in 0.0..(2.0 * PI)) {
        let s = make_noon(n, phi).unwrap();
        let cfg = RamseyConfig::default();
        let a = ramsey_run(&s, theta, &cfg).unwrap().parity;
        let b = ramsey_run(&s, theta + 2.0 * PI / n as f64, &cfg).unwrap().parity;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn noon_fringe_depends_only_on_relative_phase(
        n in 1usize..16, phi in 0.0..(2.0 * PI), delta in -PI..PI, theta in 0.0..(2.0 * PI),
    ) {
        // Shifting phi by delta is undone by shifting theta by delta / N.
        let cfg = RamseyConfig::default();
        let a = ramsey_run(&make_noon(n, phi).unwrap(), theta, &cfg).unwrap();
        let b = ramsey_run(&make_noon(n, phi + delta).unwrap(), theta + delta / n as f64, &cfg).unwrap();
        for (x, y) in a.distribution.iter().zip(&b.distribution) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert!((a.mean_diff - b.mean_diff).abs() < 1e-10);
        prop_assert!((a.var_diff - b.var_diff).abs() < 1e-10);
        prop_assert!((a.parity - b.parity).abs() < 1e-10);
    }

    #[test]
    fn mixture_statistics_are_flat(n in 1usize..16, u in -0.5..0.5f64, kappa in 0.5..10.0f64) {
        let cfg = RamseyConfig::new(kappa).with_interaction(u * kappa);
        let f = fringe_sweep(&make_mixture(n).unwrap(), &uniform_grid(32), &cfg, 2).unwrap();
        prop_assert!(std_dev(&f.parity()) < 1e-10);
        prop_assert!(std_dev(&f.mean_diff()) < 1e-10);
        prop_assert!(std_dev(&f.var_diff()) < 1e-10);
        for k in 0..=n {
            let pk: Vec<f64> = f.records.iter().map(|r| r.distribution[k]).collect();
            prop_assert!(std_dev(&pk) < 1e-10);
        }
    }

    #[test]
    fn fringe_distributions_are_normalized(ens in ensemble_strategy(10), u in -0.5..0.5f64) {
        let cfg = RamseyConfig::default().with_interaction(u);
        let f = fringe_sweep(&ens, &uniform_grid(16), &cfg, 1).unwrap();
        for r in &f.records {
            prop_assert!((r.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let p: f64 = r.distribution.iter().enumerate()
                .map(|(n, p)| if n % 2 == 0 { *p } else { -p }).sum();
            prop_assert_eq!(p, r.parity);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parity_reconstruction_is_exact_for_pure_states(s in state_strategy(12)) {
        let report = verify_decomposition(&s, &RamseyConfig::default()).unwrap();
        prop_assert!(report.max_error < 1e-8);
        prop_assert!(report.max_b_imaginary < 1e-10);
    }

    #[test]
    fn parity_reconstruction_is_exact_for_ensembles(ens in ensemble_strategy(12)) {
        let report = verify_decomposition(&ens, &RamseyConfig::new(4.0)).unwrap();
        prop_assert!(report.max_error < 1e-8);
    }

    #[test]
    fn absent_coherences_leave_no_fringe_component(
        n in 2usize..12,
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 12),
    ) {
        // Support on even n only: every odd coherence sum vanishes.
        let amps: Vec<C64> = (0..=n)
            .map(|k| if k % 2 == 0 { C64::new(raw[k].0, raw[k].1) } else { C64::new(0.0, 0.0) })
            .collect();
        prop_assume!(amps.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-3);
        let s = FockVector::normalized(amps).unwrap();
        let spec = parity_fourier(&fringe_sweep(&s, &uniform_grid(4 * (n + 1)), &RamseyConfig::default(), 1).unwrap())
            .unwrap();
        let sums = coherence_sums(&s);
        for m in (1..=n).step_by(2) {
            prop_assert!(sums[m].norm() < 1e-15);
            prop_assert!(spec.amplitude(m).norm() < 1e-12, "m={} |F|={}", m, spec.amplitude(m).norm());
        }
        if sums[n].norm() > 1e-6 {
            prop_assert!(spec.amplitude(n).norm() > 1e-9);
        }
    }
}

#[test]
fn frequency_n_amplitude_is_linear_in_the_extreme_coherence() {
    let n = 10;
    let noon = make_noon(n, 0.0).unwrap();
    let grid = uniform_grid(64);
    let cfg = RamseyConfig::default();
    let f_noon = parity_fourier(&fringe_sweep(&noon, &grid, &cfg, 1).unwrap())
        .unwrap()
        .amplitude(n);
    for &keep in &[0.5, 0.25] {
        // Dephased blend: keep * NOON + (1 - keep) * incoherent mixture.
        let mix = make_mixture(n).unwrap();
        let mut comps = vec![(keep, noon.clone())];
        comps.extend(
            mix.components()
                .iter()
                .map(|(w, s)| ((1.0 - keep) * w, s.clone())),
        );
        let blend = MixedEnsemble::new(comps).unwrap();
        let f = parity_fourier(&fringe_sweep(&blend, &grid, &cfg, 1).unwrap())
            .unwrap()
            .amplitude(n);
        assert!((f - f_noon * keep).norm() < 1e-8);
        assert!((coherence_sums(&blend)[n] - coherence_sums(&noon)[n] * keep).norm() < 1e-15);
    }
}

#[test]
fn nonlinearity_keeps_fringe_phase() {
    let n = 10;
    let kappa = 1.0;
    let noon = make_noon(n, 0.0).unwrap();
    let grid = uniform_grid(512);
    let phase_at = |ratio: f64| {
        let cfg = RamseyConfig::new(kappa).with_interaction(ratio * kappa);
        parity_fourier(&fringe_sweep(&noon, &grid, &cfg, 1).unwrap())
            .unwrap()
            .amplitude(n)
            .arg()
    };
    let reference = phase_at(0.0);
    for &ratio in &[-0.01, -0.025] {
        let diff = (phase_at(ratio) - reference + PI).rem_euclid(2.0 * PI) - PI;
        assert!(diff.abs() < 1e-6, "U/kappa = {ratio}: shift {diff}");
    }
}

#[test]
fn interaction_strength_is_linear_and_signed() {
    let spec = |a0: f64| {
        TrapSpec::from_lab_units(85.0, [900.0, 1100.0, 120.0], FrequencyUnits::Angular, a0).unwrap()
    };
    let u1 = interaction_strength(&spec(37.0)).unwrap();
    let u2 = interaction_strength(&spec(74.0)).unwrap();
    let un = interaction_strength(&spec(-37.0)).unwrap();
    assert!((u2 - 2.0 * u1).abs() < 1e-12 * u2.abs());
    assert!(u1 > 0.0 && un < 0.0);
    assert!((un + u1).abs() < 1e-15);
    let mut all_doubled = spec(37.0);
    all_doubled.omega_x *= 2.0;
    all_doubled.omega_y *= 2.0;
    all_doubled.omega_z *= 2.0;
    let ratio = interaction_strength(&all_doubled).unwrap() / u1;
    assert!((ratio - 2f64.powf(1.5)).abs() < 1e-12);
}

#[test]
fn channel_reuse_matches_one_shot_runs() {
    let s = make_noon(6, 0.3).unwrap();
    let cfg = RamseyConfig::new(2.5).with_interaction(-0.05);
    let channel = RamseyChannel::new(6, &cfg).unwrap();
    for theta in uniform_grid(8) {
        let a = channel.record(&s, theta, 6).unwrap();
        let b = ramsey_run(&s, theta, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
