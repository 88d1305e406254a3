//! `verify`: fixed-configuration check suites.

use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use peakon_core::functionals::{mq_derivative_single, mq_rhs_analytic, ExteriorFrame, ScaleParams};
use peakon_core::initial::{
    gaussian_bumps, peakon_train, random_band_limited, random_nonnegative_bumps, Bump, PeakonSpec,
};
use peakon_core::integrator::Observer;
use peakon_core::observers::{
    ConservedObserver, ExteriorNormObserver, ExteriorObserver, ExtremaObserver, ITanhObserver,
    MqObserver, WindowNormObserver,
};
use peakon_core::verification::{
    check_conservation, check_decay_trends, check_functional_derivative, check_green_lemma,
    check_green_lemma_dx, check_p_estimate, check_partial_integrals, check_sign_preservation,
    CheckReport, CheckStatus, ConservationTolerances, DecayColumns, DerivativeKind, Direction,
};
use peakon_core::{
    cross_check_forms, make_grid, run, BFamilyParams, Field, Form, Result, SimConfig,
    SpectralWorkspace, State, Trajectory,
};

use crate::error::CliError;
use crate::output::{ensure_dir, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Operators,
    Conservation,
    Functionals,
    Decay,
    All,
}

type Job = Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync>;

fn job(f: impl Fn() -> Result<Vec<CheckReport>> + Send + Sync + 'static) -> Job {
    Box::new(f)
}

fn one(f: impl Fn() -> Result<CheckReport> + Send + Sync + 'static) -> Job {
    Box::new(move || Ok(vec![f()?]))
}

fn u_run(
    u0: Field,
    b: f64,
    t_end: f64,
    cadence: f64,
    cfl: f64,
    obs: &[&dyn Observer],
) -> Result<Trajectory> {
    let params = BFamilyParams::new(b, Form::UForm)?;
    let mut cfg = SimConfig::new(params, t_end, cadence);
    cfg.cfl_safety = cfl;
    run(&cfg, State::from_u(u0, Form::UForm)?, obs)
}

/// Mollified unit peakon at `x = -5` on the conservation benchmark grid.
fn benchmark_peakon() -> Result<Field> {
    peakon_train(
        &PeakonSpec::single(1.0, -5.0, 0.05)?,
        &make_grid(128.0, 4096)?,
    )
}

fn operators() -> Vec<Job> {
    let mut jobs = Vec::new();
    // fine enough that the kink aliasing, about h²/(12λ), stays below 1e-6
    for (lambda, len, n) in [
        (10.0, 256.0, 32768),
        (30.0, 1024.0, 131072),
        (100.0, 4096.0, 262144),
    ] {
        jobs.push(one(move || {
            check_green_lemma(lambda, &make_grid(len, n)?, 1e-6)
        }));
    }
    jobs.push(one(|| {
        check_green_lemma_dx(10.0, &make_grid(256.0, 8192)?, 1e-5)
    }));
    jobs.push(one(|| {
        let errs = [1024, 2048, 4096, 8192]
            .iter()
            .map(|&n| Ok(check_green_lemma(10.0, &make_grid(256.0, n)?, 1e-6)?.measured))
            .collect::<Result<Vec<f64>>>()?;
        let increases = errs.windows(2).filter(|w| w[1] >= w[0]).count();
        let mut r = CheckReport::graded(
            "green_lemma_refinement",
            increases as f64,
            0.0,
            Direction::AtMost,
        );
        for (n, e) in [1024, 2048, 4096, 8192].iter().zip(&errs) {
            r = r.with(&format!("err_n{n}"), *e);
        }
        Ok(r)
    }));
    jobs.push(one(|| {
        let g = make_grid(64.0, 2048)?;
        let ws = SpectralWorkspace::shared(&g);
        let mut worst: f64 = 0.0;
        for seed in 0..50 {
            let f = random_band_limited(&g, 40, 1.0, seed)?;
            worst = worst.max(
                ws.green_apply(&f)?
                    .sub(&ws.green_apply_direct(&f)?)?
                    .max_abs(),
            );
        }
        Ok(
            CheckReport::graded("spectral_vs_direct", worst, 1e-8, Direction::AtMost)
                .with("fields", 50.0),
        )
    }));
    jobs.push(job(|| {
        let g = make_grid(64.0, 2048)?;
        let ps = [1.0, 2.0, f64::INFINITY];
        let unit = gaussian_bumps(
            &[Bump {
                amplitude: 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
                center: 0.0,
                sigma: 1.0,
            }],
            &g,
        )?;
        let two = gaussian_bumps(
            &[
                Bump {
                    amplitude: 1.0,
                    center: -8.0,
                    sigma: 1.0,
                },
                Bump {
                    amplitude: 0.5,
                    center: 8.0,
                    sigma: 2.0,
                },
            ],
            &g,
        )?;
        let mut out = vec![
            check_p_estimate(&unit, &ps)?,
            check_p_estimate(&Field::zeros(g), &ps)?,
            check_p_estimate(&two, &ps)?,
        ];
        for seed in 0..20 {
            out.push(check_p_estimate(
                &random_nonnegative_bumps(&g, 1 + seed as usize % 5, 100 + seed)?,
                &ps,
            )?);
        }
        let names = ["unit_gaussian", "zero", "two_gaussians"];
        for (i, r) in out.iter_mut().enumerate() {
            r.name = match names.get(i) {
                Some(s) => format!("p_estimate[{s}]"),
                None => format!("p_estimate[random{}]", i - names.len()),
            };
        }
        Ok(out)
    }));
    jobs.push(one(|| {
        let g = make_grid(32.0, 512)?;
        let mut worst: f64 = 0.0;
        for (i, &b) in [0.5, 1.0, 2.0, 2.5, 3.0].iter().enumerate() {
            for seed in 0..20u64 {
                let u = random_band_limited(&g, 24, 1.0, 1000 * i as u64 + seed)?;
                worst = worst.max(
                    cross_check_forms(&u, BFamilyParams::new(b, Form::UForm)?, 1e-6)?.discrepancy,
                );
            }
        }
        Ok(
            CheckReport::graded("form_equivalence", worst, 1e-6, Direction::AtMost)
                .with("cases", 100.0),
        )
    }));
    jobs
}

fn conservation() -> Vec<Job> {
    let tol = ConservationTolerances {
        momentum: 1e-6,
        energy: 1e-5,
    };
    let mut jobs = Vec::new();
    for b in [2.0, 2.5] {
        jobs.push(one(move || {
            let traj = u_run(
                benchmark_peakon()?,
                b,
                10.0,
                0.1,
                0.1,
                &[&ConservedObserver],
            )?;
            check_conservation(&traj, tol)
        }));
    }
    for b in [2.0, 3.0] {
        jobs.push(one(move || {
            let g = make_grid(64.0, 2048)?;
            let m0 = gaussian_bumps(
                &[Bump {
                    amplitude: 0.2,
                    center: 0.0,
                    sigma: 2.0,
                }],
                &g,
            )?;
            let cfg = SimConfig::new(BFamilyParams::new(b, Form::MForm)?, 10.0, 0.05);
            let traj = run(&cfg, State::from_m(m0, Form::MForm)?, &[&ExtremaObserver])?;
            check_sign_preservation(&traj, 1e-8)
        }));
    }
    jobs.push(job(move || {
        let g = make_grid(32.0, 256)?;
        let cfg = SimConfig::new(BFamilyParams::ch(Form::MForm), 1.0, 0.1);
        let traj = run(
            &cfg,
            State::new(0.0, Field::zeros(g), Form::MForm)?,
            &[&ConservedObserver, &ExtremaObserver],
        )?;
        let mut a = check_conservation(&traj, tol)?;
        let mut b = check_sign_preservation(&traj, 1e-8)?;
        a.name = "conservation[zero]".into();
        b.name = "sign_preservation[zero]".into();
        Ok(vec![a, b])
    }));
    jobs
}

fn functionals() -> Vec<Job> {
    let mut jobs = Vec::new();
    jobs.push(job(|| {
        let params = BFamilyParams::ch(Form::UForm);
        let mq = MqObserver {
            sp: ScaleParams::new(0.4, 2.0, 10.0)?,
            params,
        };
        let it = ITanhObserver {
            sp: ScaleParams::with_c(0.5)?,
            params,
        };
        let traj = u_run(benchmark_peakon()?, 2.0, 10.0, 0.01, 0.1, &[&mq, &it])?;
        Ok(vec![
            check_functional_derivative(
                &traj,
                DerivativeKind::Mq,
                "Mq_c0.4_q2",
                "dMq_c0.4_q2",
                1e-3,
                0.0,
            )?,
            check_functional_derivative(
                &traj,
                DerivativeKind::ITanh,
                "ITanh_c0.5_q2",
                "dITanh_c0.5_q2",
                1e-3,
                0.0,
            )?,
        ])
    }));
    jobs.push(one(|| {
        let u0 = peakon_train(
            &PeakonSpec::single(1.0, 0.0, 0.2)?,
            &make_grid(256.0, 4096)?,
        )?;
        let params = BFamilyParams::ch(Form::UForm);
        let ext = ExteriorObserver {
            frame: ExteriorFrame::new(4.0, 50.0, 3.0)?,
            shifted: false,
            params,
        };
        let traj = u_run(u0, 2.0, 20.0, 0.01, 0.3, &[&ExtremaObserver, &ext])?;
        check_functional_derivative(
            &traj,
            DerivativeKind::Exterior {
                sigma: 4.0,
                l: 50.0,
            },
            "IExt_s4_L50",
            "dIExt_s4_L50",
            1e-3,
            1e-10,
        )
    }));
    jobs.push(one(|| {
        let g = make_grid(64.0, 1024)?;
        let u = gaussian_bumps(
            &[Bump {
                amplitude: 0.8,
                center: 3.0,
                sigma: 1.5,
            }],
            &g,
        )?;
        let s = State::from_u(u, Form::UForm)?;
        let sp = ScaleParams::new(0.4, 2.0, 10.0)?;
        let params = BFamilyParams::ch(Form::UForm);
        let parts = mq_rhs_analytic(&s, &sp, params)?;
        let single = mq_derivative_single(&s, &sp, params)?;
        let rel = (parts.signed_sum() - single).abs() / single.abs().max(f64::MIN_POSITIVE);
        let structure = parts
            .terms
            .iter()
            .map(|t| t.label)
            .eq(["M1", "M2", "M3", "M4", "M5"])
            && parts
                .terms
                .iter()
                .all(|t| t.uses_nonlocal == (t.label == "M4" || t.label == "M5"));
        let mut r = CheckReport::graded("mq_breakdown", rel, 1e-12, Direction::AtMost)
            .with("single", single);
        if !structure {
            r.status = CheckStatus::Fail;
            r = r.note("breakdown does not have the -M1-M2-M3+M4+M5 structure");
        }
        Ok(r)
    }));
    jobs
}

fn decay() -> Vec<Job> {
    let sp = ScaleParams::with_c(0.5).expect("valid scale");
    let cols = move |ext: Option<&str>| DecayColumns {
        h1_window: "h1_u_win_c0.5".into(),
        l1_m_window: "l1_m_win_c0.5".into(),
        exterior_norm: ext.map(String::from),
        t_offset: sp.t_offset,
        c: sp.c,
    };
    let mut jobs = Vec::new();
    jobs.push(job(move || {
        let u0 = peakon_train(
            &PeakonSpec::new(vec![2.0, 1.0], vec![0.0, -3.0], 0.1)?,
            &make_grid(512.0, 8192)?,
        )?;
        let wn = WindowNormObserver { sp };
        let en = ExteriorNormObserver { sigma: 5.0, p: 2.0 };
        let it = ITanhObserver {
            sp,
            params: BFamilyParams::ch(Form::UForm),
        };
        let traj = u_run(
            u0,
            2.0,
            60.0,
            0.1,
            0.3,
            &[&ConservedObserver, &wn, &en, &it],
        )?;
        let mut r = check_decay_trends(&traj, &cols(Some("ext_w1p2_s5")), 0.9)?;
        r.name = "decay_trends[two_peakon]".into();
        Ok(vec![r, check_partial_integrals(&traj, "vITanh_c0.5_q2")?])
    }));
    jobs.push(one(move || {
        let g = make_grid(128.0, 2048)?;
        let m0 = gaussian_bumps(
            &[Bump {
                amplitude: 0.5,
                center: 0.0,
                sigma: 1.0,
            }],
            &g,
        )?;
        let cfg = SimConfig::new(BFamilyParams::ch(Form::UForm), 40.0, 0.1);
        let wn = WindowNormObserver { sp };
        let traj = run(
            &cfg,
            State::from_m(m0, Form::UForm)?,
            &[&ConservedObserver, &wn],
        )?;
        let mut r = check_decay_trends(&traj, &cols(None), 0.5)?;
        r.name = "decay_trends[single_bump]".into();
        Ok(r)
    }));
    jobs.push(one(move || {
        let g = make_grid(64.0, 512)?;
        let cfg = SimConfig::new(BFamilyParams::ch(Form::UForm), 5.0, 0.1);
        let wn = WindowNormObserver { sp };
        let traj = run(
            &cfg,
            State::new(0.0, Field::zeros(g), Form::UForm)?,
            &[&ConservedObserver, &wn],
        )?;
        let mut r = check_decay_trends(&traj, &cols(None), 0.9)?;
        r.name = "decay_trends[zero]".into();
        Ok(r)
    }));
    jobs
}

pub fn suite_jobs(suite: Suite) -> Vec<Job> {
    match suite {
        Suite::Operators => operators(),
        Suite::Conservation => conservation(),
        Suite::Functionals => functionals(),
        Suite::Decay => decay(),
        Suite::All => [operators(), conservation(), functionals(), decay()]
            .into_iter()
            .flatten()
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            0
        } else {
            crate::error::EXIT_INVALID
        }
    }
}

/// Runs the suite's checks concurrently, in a stable order.
pub fn run_suite(suite: Suite) -> Result<VerifyReport> {
    let results: Vec<Result<Vec<CheckReport>>> =
        suite_jobs(suite).par_iter().map(|j| j()).collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    let count = |s| checks.iter().filter(|c| c.status == s).count();
    Ok(VerifyReport {
        suite,
        passed: count(CheckStatus::Pass),
        failed: count(CheckStatus::Fail),
        inconclusive: count(CheckStatus::Inconclusive),
        checks,
    })
}

pub fn verify(suite: Suite, out: &Path) -> std::result::Result<VerifyReport, CliError> {
    ensure_dir(out)?;
    let report = run_suite(suite)?;
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}
