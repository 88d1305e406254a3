//! `simulate`: one run, written out as CSV, SVG and a JSON report.

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use peakon_core::integrator::Observer;
use peakon_core::observers::{
    ClockObserver, ConservedObserver, EPsiObserver, ExteriorNormObserver, ExteriorObserver,
    ExtremaObserver, ITanhObserver, MqObserver, WindowNormObserver,
};
use peakon_core::{run, Field, Termination, Trajectory};

use crate::config::{FunctionalKind, RunConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, max_rel_drift, num, write_csv, write_json, write_text};
use crate::svg::{self, Line, Panel};

pub const EXIT_COMPLETED: i32 = 0;
pub const EXIT_BREAKING: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

pub fn exit_code(t: &Termination) -> i32 {
    match t {
        Termination::Completed => EXIT_COMPLETED,
        Termination::WaveBreaking { .. } => EXIT_BREAKING,
        Termination::NumericalFailure { .. } => EXIT_FAILURE,
    }
}

/// Observers for every column requested by the configuration.
pub fn observers(cfg: &RunConfig, u0: &Field) -> Result<Vec<Box<dyn Observer>>, CliError> {
    let params = cfg.params();
    let mut obs: Vec<Box<dyn Observer>> = vec![
        Box::new(ClockObserver {
            t_offset: cfg.t_offset(),
        }),
        Box::new(ConservedObserver),
        Box::new(ExtremaObserver),
    ];
    for s in &cfg.scale {
        let sp = s.params()?;
        for kind in &s.functionals {
            obs.push(match kind {
                FunctionalKind::Mq => Box::new(MqObserver { sp, params }),
                FunctionalKind::Itanh => Box::new(ITanhObserver { sp, params }),
                FunctionalKind::Epsi => Box::new(EPsiObserver { sp, params }),
                FunctionalKind::Window => Box::new(WindowNormObserver { sp }),
            });
        }
    }
    for x in &cfg.exterior {
        let frame = x.frame(u0)?;
        obs.push(Box::new(ExteriorObserver {
            frame,
            shifted: x.shifted,
            params,
        }));
        obs.push(Box::new(ExteriorNormObserver {
            sigma: frame.sigma,
            p: x.p,
        }));
    }
    Ok(obs)
}

/// Runs the configured simulation and returns the trajectory.
pub fn simulate_trajectory(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let initial = cfg.initial_state()?;
    let obs = observers(cfg, &initial.u()?)?;
    let refs: Vec<&dyn Observer> = obs.iter().map(|b| b.as_ref()).collect();
    Ok(run(&cfg.sim_config(), initial, &refs)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutcome {
    pub exit_code: i32,
    pub termination: Termination,
    pub rows: usize,
}

pub fn termination_json(t: &Termination) -> serde_json::Value {
    match t {
        Termination::Completed => json!({ "kind": "completed" }),
        Termination::WaveBreaking { t } => json!({ "kind": "wave_breaking", "t": t }),
        Termination::NumericalFailure { t, reason } => {
            json!({ "kind": "numerical_failure", "t": t, "reason": reason })
        }
    }
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<SimOutcome, CliError> {
    ensure_dir(out)?;
    let traj = simulate_trajectory(cfg)?;

    let mut header = vec!["t_phys".to_string()];
    header.extend(traj.series.iter().map(|(n, _)| n.clone()));
    let rows = (0..traj.times.len()).map(|i| {
        let mut row = vec![num(traj.times[i])];
        row.extend(traj.series.iter().map(|(_, v)| num(v[i])));
        row
    });
    write_csv(&out.join("series.csv"), &header, rows)?;

    let grid = cfg.grid();
    let mut snap_rows = Vec::new();
    for s in &traj.snapshots {
        let (u, m) = (s.u()?, s.m()?);
        for j in 0..grid.n() {
            snap_rows.push(vec![
                num(s.t),
                num(grid.node(j)),
                num(u.values()[j]),
                num(m.values()[j]),
            ]);
        }
    }
    write_csv(
        &out.join("snapshots.csv"),
        &["t", "x", "u", "m"].map(String::from),
        snap_rows,
    )?;

    write_text(&out.join("plots.svg"), &plots(&traj))?;

    let drift = |k: &str| traj.series(k).map(max_rel_drift);
    let last = |k: &str| traj.series(k).and_then(|v| v.last().copied());
    let report = json!({
        "config": cfg,
        "termination": termination_json(&traj.termination),
        "exit_code": exit_code(&traj.termination),
        "samples": traj.times.len(),
        "steps": traj.steps,
        "t_final": traj.last.t,
        "t_offset": cfg.t_offset(),
        "breaking_threshold": traj.breaking_threshold,
        "initial_max_slope": traj.initial_max_slope,
        "mckean_pattern": traj.mckean,
        "drift": { "Iu": drift("Iu"), "Hm": drift("Hm"), "Energy": drift("Energy") },
        "final": { "min_m": last("min_m"), "max_slope": last("max_slope"), "max_abs_u": last("max_abs_u") },
        "warnings": traj.warnings,
    });
    write_json(&out.join("report.json"), &report)?;

    Ok(SimOutcome {
        exit_code: exit_code(&traj.termination),
        termination: traj.termination.clone(),
        rows: traj.times.len(),
    })
}

fn plots(traj: &Trajectory) -> String {
    let t = &traj.times;
    let line = |name: &str, ys: Vec<f64>| Line {
        label: name.to_string(),
        xs: t.clone(),
        ys,
    };
    let mut panels = Vec::new();

    let drift_lines = ["Iu", "Hm", "Energy"]
        .iter()
        .filter_map(|&k| {
            let v = traj.series(k)?;
            let q0 = v[0];
            let scale = if q0 != 0.0 { q0.abs() } else { 1.0 };
            Some(line(k, v.iter().map(|q| (q - q0) / scale).collect()))
        })
        .collect();
    panels.push(Panel {
        title: "relative drift of conserved quantities".into(),
        x_label: "t".into(),
        lines: drift_lines,
    });

    let norms = ["max_abs_u", "max_slope", "min_m"]
        .iter()
        .filter_map(|&k| Some(line(k, traj.series(k)?.to_vec())))
        .collect();
    panels.push(Panel {
        title: "extrema".into(),
        x_label: "t".into(),
        lines: norms,
    });

    let skip = [
        "t_func",
        "Iu",
        "Hm",
        "Energy",
        "min_m",
        "max_m",
        "min_u",
        "max_abs_u",
        "max_slope",
    ];
    let functionals: Vec<Line> = traj
        .series
        .iter()
        .filter(|(n, _)| {
            !skip.contains(&n.as_str()) && !n.starts_with('d') && !n.starts_with("Mq_bound")
        })
        .map(|(n, v)| {
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let s = if scale > 0.0 { scale } else { 1.0 };
            line(&format!("{n} / {s:.3e}"), v.iter().map(|x| x / s).collect())
        })
        .collect();
    if !functionals.is_empty() {
        panels.push(Panel {
            title: "functionals and windowed norms (scaled)".into(),
            x_label: "t".into(),
            lines: functionals,
        });
    }

    if !traj.snapshots.is_empty() {
        let grid = *traj.snapshots[0].grid();
        let xs: Vec<f64> = grid.nodes();
        let profiles: Vec<Field> = traj.snapshots.iter().filter_map(|s| s.u().ok()).collect();
        let amp = profiles.iter().fold(0.0f64, |m, u| m.max(u.max_abs()));
        let step = if amp > 0.0 { 0.5 * amp } else { 1.0 };
        let lines = traj
            .snapshots
            .iter()
            .zip(&profiles)
            .enumerate()
            .map(|(i, (s, u))| Line {
                label: format!("t = {:.3}", s.t),
                xs: xs.clone(),
                ys: u.values().iter().map(|v| v + step * i as f64).collect(),
            })
            .collect();
        panels.push(Panel {
            title: "waterfall of u".into(),
            x_label: "x".into(),
            lines,
        });
    }
    svg::render(&panels)
}
