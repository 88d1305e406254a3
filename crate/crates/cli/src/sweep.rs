//! `sweep`: a cartesian grid over `b`, `c`, `q` and `σ`, one row per cell.

use std::path::Path;

use rayon::prelude::*;

use peakon_core::Termination;

use crate::config::{
    all_functionals, parse_config, render, ExteriorSection, RunConfig, ScaleSection,
};
use crate::error::CliError;
use crate::output::{ensure_dir, max_rel_drift, num, write_csv};
use crate::simulate::simulate_trajectory;

pub const MAX_CELLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub b: f64,
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub sigma: Option<f64>,
}

/// The cells in row-major order over `(b, c, q, σ)`.
pub fn cells(cfg: &RunConfig) -> Result<Vec<Cell>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Refused("configuration has no [sweep] section".into()))?;
    let axes = [&sweep.b, &sweep.c, &sweep.q, &sweep.sigma];
    if axes.iter().all(|a| a.is_none()) {
        return Err(CliError::Refused("empty sweep grid: no axis given".into()));
    }
    if let Some(name) = ["b", "c", "q", "sigma"]
        .iter()
        .zip(axes)
        .find(|(_, a)| a.as_ref().is_some_and(|v| v.is_empty()))
    {
        return Err(CliError::Refused(format!(
            "empty sweep grid: axis {} has no values",
            name.0
        )));
    }
    let scale0 = cfg.scale.first();
    let ext0 = cfg.exterior.first();
    let axis = |a: &Option<Vec<f64>>, base: Option<f64>| -> Vec<Option<f64>> {
        a.as_ref()
            .map_or(vec![base], |v| v.iter().copied().map(Some).collect())
    };
    let bs = axis(&sweep.b, Some(cfg.model.b));
    let cs = axis(&sweep.c, scale0.map(|s| s.c));
    let qs = axis(&sweep.q, scale0.map(|s| s.q));
    let ss = axis(&sweep.sigma, ext0.and_then(|x| x.sigma));
    let total = bs.len() * cs.len() * qs.len() * ss.len();
    if total > MAX_CELLS {
        return Err(CliError::Refused(format!(
            "sweep grid has {total} cells, the limit is {MAX_CELLS}"
        )));
    }
    let mut out = Vec::with_capacity(total);
    for &b in &bs {
        for &c in &cs {
            for &q in &qs {
                for &sigma in &ss {
                    out.push(Cell {
                        b: b.expect("b always has a base value"),
                        c,
                        q,
                        sigma,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The base configuration specialized to one cell, re-validated.
pub fn cell_config(base: &RunConfig, cell: &Cell) -> Result<RunConfig, CliError> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.model.b = cell.b;
    if cell.c.is_some() || cell.q.is_some() {
        if cfg.scale.is_empty() {
            cfg.scale.push(ScaleSection {
                c: 0.0,
                q: 2.0,
                t_offset: peakon_core::functionals::DEFAULT_T_OFFSET,
                functionals: all_functionals(),
            });
        }
        if let Some(c) = cell.c {
            cfg.scale[0].c = c;
        }
        if let Some(q) = cell.q {
            cfg.scale[0].q = q;
        }
    }
    if let Some(sigma) = cell.sigma {
        if cfg.exterior.is_empty() {
            cfg.exterior.push(ExteriorSection {
                sigma: None,
                l: None,
                t0: 3.0,
                shifted: false,
                p: 2.0,
            });
        }
        cfg.exterior[0].sigma = Some(sigma);
    }
    // the rendered text is re-parsed so cells obey the same validation as files
    parse_config(&render(&cfg)).map_err(|mut e| {
        e.message = format!("cell {cell:?}: {}", e.message);
        CliError::Config(e)
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub const COLUMNS: [&str; 16] = [
    "cell",
    "b",
    "c",
    "q",
    "sigma",
    "termination",
    "t_final",
    "steps",
    "drift_Iu",
    "drift_Hm",
    "drift_Energy",
    "min_m",
    "max_slope",
    "Mq_final",
    "h1_u_win_final",
    "ext_norm_final",
];

fn run_cell(index: usize, cell: &Cell, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let traj = simulate_trajectory(cfg)?;
    let last = |pred: &dyn Fn(&str) -> bool| {
        traj.series
            .iter()
            .find(|(n, _)| pred(n))
            .and_then(|(_, v)| v.last().copied())
    };
    let drift = |k: &str| traj.series(k).map(max_rel_drift);
    let min_m = traj
        .series("min_m")
        .map(|v| v.iter().copied().fold(f64::INFINITY, f64::min));
    let termination = match traj.termination {
        Termination::Completed => "completed",
        Termination::WaveBreaking { .. } => "wave_breaking",
        Termination::NumericalFailure { .. } => "numerical_failure",
    };
    Ok(vec![
        index.to_string(),
        num(cell.b),
        opt(cell.c),
        opt(cell.q),
        opt(cell.sigma),
        termination.to_string(),
        num(traj.last.t),
        traj.steps.to_string(),
        opt(drift("Iu")),
        opt(drift("Hm")),
        opt(drift("Energy")),
        opt(min_m),
        opt(last(&|n| n == "max_slope")),
        opt(last(&|n| n.starts_with("Mq_c"))),
        opt(last(&|n| n.starts_with("h1_u_win"))),
        opt(last(&|n| n.starts_with("ext_w1p"))),
    ])
}

/// Runs every cell on `workers` threads and writes `sweep.csv`; returns the rows.
pub fn sweep(base: &RunConfig, out: &Path, workers: usize) -> Result<Vec<Vec<String>>, CliError> {
    let grid = cells(base)?;
    let configs = grid
        .iter()
        .map(|c| cell_config(base, c))
        .collect::<Result<Vec<_>, _>>()?;
    ensure_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Refused(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        grid.par_iter()
            .zip(configs.par_iter())
            .enumerate()
            .map(|(i, (cell, cfg))| run_cell(i, cell, cfg))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let header: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
    write_csv(&out.join("sweep.csv"), &header, rows.clone())?;
    Ok(rows)
}
