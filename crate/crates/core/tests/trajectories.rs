use peakon_core::functionals::{growth_exponent, ExteriorFrame, ScaleParams};
use peakon_core::initial::{gaussian_bumps, mckean_indicator, peakon_train, Bump, PeakonSpec};
use peakon_core::observers::{
    ConservedObserver, EPsiObserver, ExteriorObserver, ExtremaObserver, L1Observer,
};
use peakon_core::verification::{
    check_conservation, check_green_lemma, check_sign_preservation, ConservationTolerances,
};
use peakon_core::{
    make_grid, run, BFamilyParams, Field, Form, SimConfig, SnapshotPolicy, State, Termination,
};

#[test]
fn mckean_pattern_breaks() {
    let g = make_grid(64.0, 8192).unwrap();
    let m0 = gaussian_bumps(
        &[
            Bump {
                amplitude: 1.0,
                center: -5.0,
                sigma: 1.0,
            },
            Bump {
                amplitude: -1.0,
                center: 5.0,
                sigma: 1.0,
            },
        ],
        &g,
    )
    .unwrap();
    assert!(mckean_indicator(&m0));
    let cfg = SimConfig::new(BFamilyParams::ch(Form::UForm), 10.0, 0.05);
    let traj = run(
        &cfg,
        State::from_m(m0, Form::UForm).unwrap(),
        &[&ExtremaObserver],
    )
    .unwrap();
    assert!(traj.mckean);
    match traj.termination {
        Termination::WaveBreaking { t } => assert!((5.5..7.0).contains(&t), "t = {t}"),
        ref other => panic!("expected breaking, got {other:?}"),
    }
    let slope = traj.series("max_slope").unwrap();
    assert!(slope
        .windows(2)
        .skip(slope.len() / 2)
        .all(|w| w[1] >= w[0] * 0.99));
}

#[test]
fn zero_data_stays_zero() {
    let g = make_grid(32.0, 256).unwrap();
    let mut cfg = SimConfig::new(BFamilyParams::new(2.5, Form::MForm).unwrap(), 2.0, 0.1);
    cfg.snapshots = SnapshotPolicy::EverySample;
    let s = State::new(0.0, Field::zeros(g), Form::MForm).unwrap();
    let traj = run(&cfg, s, &[&ConservedObserver, &ExtremaObserver]).unwrap();
    assert!(traj.is_completed());
    assert_eq!(traj.times.len(), 21);
    assert!(traj.series.iter().all(|(_, v)| v.iter().all(|&x| x == 0.0)));
    assert!(traj.snapshots.iter().all(|s| s.primary.max_abs() == 0.0));
}

#[test]
fn sample_times_are_exact_cadence_multiples() {
    let g = make_grid(32.0, 256).unwrap();
    let u0 = gaussian_bumps(
        &[Bump {
            amplitude: 0.5,
            center: 0.0,
            sigma: 1.5,
        }],
        &g,
    )
    .unwrap();
    let cfg = SimConfig::new(BFamilyParams::ch(Form::UForm), 1.0, 0.1);
    let traj = run(&cfg, State::from_u(u0, Form::UForm).unwrap(), &[]).unwrap();
    for (k, &t) in traj.times.iter().enumerate() {
        assert_eq!(t, (k as f64 * 0.1).min(1.0));
    }
}

#[test]
fn forms_agree_along_a_run() {
    let g = make_grid(32.0, 512).unwrap();
    let u0 = gaussian_bumps(
        &[Bump {
            amplitude: 0.5,
            center: 0.0,
            sigma: 1.5,
        }],
        &g,
    )
    .unwrap();
    let go = |form| {
        let cfg = SimConfig::new(BFamilyParams::new(1.5, form).unwrap(), 2.0, 0.5);
        run(&cfg, State::from_u(u0.clone(), form).unwrap(), &[])
            .unwrap()
            .last
            .u()
            .unwrap()
    };
    let diff = go(Form::UForm).sub(&go(Form::MForm)).unwrap().max_abs();
    assert!(diff < 1e-8, "diff = {diff}");
}

#[test]
fn dp_sign_and_momentum_conservation() {
    let g = make_grid(64.0, 2048).unwrap();
    let m0 = gaussian_bumps(
        &[Bump {
            amplitude: 0.2,
            center: 0.0,
            sigma: 2.0,
        }],
        &g,
    )
    .unwrap();
    let cfg = SimConfig::new(BFamilyParams::dp(Form::MForm), 10.0, 0.1);
    let traj = run(
        &cfg,
        State::from_m(m0, Form::MForm).unwrap(),
        &[&ConservedObserver, &ExtremaObserver],
    )
    .unwrap();
    let s = check_sign_preservation(&traj, 1e-8).unwrap();
    assert!(s.is_pass(), "{s:?}");
    let r = check_conservation(
        &traj,
        ConservationTolerances {
            momentum: 1e-8,
            energy: 1e-8,
        },
    )
    .unwrap();
    assert!(r.is_pass(), "{r:?}");
    assert!(r.notes.iter().any(|n| n.contains("not gated")));
}

#[test]
fn positive_functionals_stay_nonnegative() {
    let g = make_grid(128.0, 2048).unwrap();
    let u0 = peakon_train(&PeakonSpec::single(1.0, -10.0, 0.2).unwrap(), &g).unwrap();
    let params = BFamilyParams::ch(Form::UForm);
    let e = EPsiObserver {
        sp: ScaleParams::with_c(0.5).unwrap(),
        params,
    };
    let x = ExteriorObserver {
        frame: ExteriorFrame::new(3.0, 30.0, 3.0).unwrap(),
        shifted: true,
        params,
    };
    let cfg = SimConfig::new(params, 10.0, 0.1);
    let traj = run(
        &cfg,
        State::from_u(u0, Form::UForm).unwrap(),
        &[&e, &x, &L1Observer],
    )
    .unwrap();
    for col in ["EPsi_c0.5_q2", "IShift_s3_L30"] {
        assert!(traj.series(col).unwrap().iter().all(|&v| v >= 0.0), "{col}");
    }
    // ‖u‖₁ = ∫m for positive momentum, so the growth exponent is zero
    let fit = growth_exponent(&traj.times, traj.series("l1_u").unwrap()).unwrap();
    assert!(fit.a.abs() < 0.05, "a = {}", fit.a);
}

#[test]
fn green_lemma_uniform_in_lambda() {
    let mut prev = f64::INFINITY;
    for (lambda, len, n) in [
        (10.0, 256.0, 8192),
        (30.0, 1024.0, 32768),
        (100.0, 4096.0, 131072),
    ] {
        let r = check_green_lemma(lambda, &make_grid(len, n).unwrap(), 1e-5).unwrap();
        assert!(r.is_pass(), "{r:?}");
        assert!(r.measured < prev);
        prev = r.measured;
    }
}
