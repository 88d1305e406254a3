//! Method-of-lines time stepping with classical RK4.
//!
//! The step size is fixed inside each observer block and recomputed from
//! the CFL bound at block boundaries, so samples land on exact multiples of
//! the cadence.

use serde::{Deserialize, Serialize};

use crate::dynamics::{BFamilyParams, Dynamics, State};
use crate::error::{config_err, Error, Result};
use crate::grid::Field;
use crate::initial::mckean_indicator;

/// Default multiple of the initial slope at which breaking is declared.
pub const DEFAULT_BREAKING_FACTOR: f64 = 50.0;
pub const DEFAULT_CFL_SAFETY: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SnapshotPolicy {
    None,
    EverySample,
    /// Every k-th sample, starting with the first.
    Stride(usize),
    /// The first sample at or after each listed time.
    AtTimes(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: BFamilyParams,
    pub t_end: f64,
    pub dt: StepSize,
    pub cfl_safety: f64,
    pub cadence: f64,
    /// Largest admissible `max|u_x|`; `None` means `50 max|u₀_x|`.
    pub breaking_threshold: Option<f64>,
    pub snapshots: SnapshotPolicy,
}

impl SimConfig {
    pub fn new(params: BFamilyParams, t_end: f64, cadence: f64) -> Self {
        Self {
            params,
            t_end,
            dt: StepSize::Auto,
            cfl_safety: DEFAULT_CFL_SAFETY,
            cadence,
            breaking_threshold: None,
            snapshots: SnapshotPolicy::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        BFamilyParams::new(self.params.b, self.params.form)?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(config_err(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.cadence > 0.0 && self.cadence <= self.t_end) {
            return Err(config_err(format!(
                "cadence must lie in (0, t_end], got {}",
                self.cadence
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(config_err(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if let StepSize::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(config_err(format!("dt must be positive, got {dt}")));
            }
        }
        if let Some(th) = self.breaking_threshold {
            if !(th > 0.0) {
                return Err(config_err(format!(
                    "breaking threshold must be positive, got {th}"
                )));
            }
        }
        if let SnapshotPolicy::Stride(0) = self.snapshots {
            return Err(config_err("snapshot stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    WaveBreaking { t: f64 },
    NumericalFailure { t: f64, reason: String },
}

/// A pure function of the state sampled at the observer cadence.
pub trait Observer: Send + Sync {
    fn columns(&self) -> Vec<String>;
    fn observe(&self, state: &State) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: BFamilyParams,
    pub times: Vec<f64>,
    pub snapshots: Vec<State>,
    pub series: Vec<(String, Vec<f64>)>,
    pub termination: Termination,
    /// Last finite state reached.
    pub last: State,
    pub breaking_threshold: f64,
    pub initial_max_slope: f64,
    /// Whether the initial momentum shows the McKean sign pattern.
    pub mckean: bool,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn is_completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// `safety · h / max|u|`, capped by the cadence.
pub fn cfl_dt(state: &State, safety: f64, cadence: f64) -> Result<f64> {
    let umax = state.u()?.max_abs();
    if umax == 0.0 {
        return Ok(cadence);
    }
    Ok((safety * state.grid().spacing() / umax).min(cadence))
}

/// One classical RK4 step.
pub fn step_rk4<F>(state: &State, dt: f64, rhs: F) -> Result<State>
where
    F: Fn(&State) -> Result<Field>,
{
    if !(dt > 0.0) {
        return Err(config_err(format!("step size must be positive, got {dt}")));
    }
    let y = &state.primary;
    let stage = |base: &Field, k: &Field, a: f64, t: f64| -> Result<State> {
        Ok(state.with_primary(t, base.lin_comb(1.0, k, a)?))
    };
    let k1 = rhs(state)?;
    let k2 = rhs(&stage(y, &k1, 0.5 * dt, state.t + 0.5 * dt)?)?;
    let k3 = rhs(&stage(y, &k2, 0.5 * dt, state.t + 0.5 * dt)?)?;
    let k4 = rhs(&stage(y, &k3, dt, state.t + dt)?)?;
    let w = dt / 6.0;
    let values: Vec<f64> = (0..y.values().len())
        .map(|j| {
            y.values()[j]
                + w * (k1.values()[j]
                    + 2.0 * k2.values()[j]
                    + 2.0 * k3.values()[j]
                    + k4.values()[j])
        })
        .collect();
    let t = state.t + dt;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dynamics {
            t,
            reason: "non-finite value after RK4 step".into(),
        });
    }
    Ok(state.with_primary(t, Field::from_raw(*y.grid(), values)))
}

fn boundary_warning(state: &State) -> Option<String> {
    let u = state.u().ok()?;
    let max = u.max_abs();
    let v = u.values();
    let edge = v[0].abs().max(v[v.len() - 1].abs());
    (max > 0.0 && edge > 1e-8 * max).then(|| {
        format!(
            "boundary |u| = {edge:.3e} exceeds 1e-8 max|u| at t = {}; the box may be too small",
            state.t
        )
    })
}

struct Recorder<'a> {
    observers: &'a [&'a dyn Observer],
    columns: Vec<Vec<f64>>,
    times: Vec<f64>,
    snapshots: Vec<State>,
    policy: &'a SnapshotPolicy,
    next_snap: usize,
}

impl<'a> Recorder<'a> {
    fn record(&mut self, state: &State) -> Result<()> {
        let mut row = Vec::new();
        for obs in self.observers {
            row.extend(obs.observe(state)?);
        }
        for (col, v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
        let idx = self.times.len();
        self.times.push(state.t);
        let keep = match self.policy {
            SnapshotPolicy::None => false,
            SnapshotPolicy::EverySample => true,
            SnapshotPolicy::Stride(k) => idx.is_multiple_of(*k),
            SnapshotPolicy::AtTimes(ts) => {
                let mut hit = false;
                while self.next_snap < ts.len() && state.t >= ts[self.next_snap] - 1e-9 {
                    hit = true;
                    self.next_snap += 1;
                }
                hit
            }
        };
        if keep {
            self.snapshots.push(state.clone());
        }
        Ok(())
    }
}

/// Evolves `initial` to `t_end` or until breaking or failure.
pub fn run(config: &SimConfig, initial: State, observers: &[&dyn Observer]) -> Result<Trajectory> {
    config.validate()?;
    if initial.form != config.params.form {
        return Err(config_err(
            "initial state form does not match the configured form",
        ));
    }
    let dynamics = Dynamics::new(initial.grid(), config.params);
    let mut warnings = Vec::new();
    // modes above the 2/3 cutoff are never evolved; left in place they would
    // sit at the initial position for the whole run
    let projected = dynamics.workspace().dealias(&initial.primary)?;
    let removed = projected.sub(&initial.primary)?.max_abs();
    if removed > 1e-8 * initial.primary.max_abs() {
        warnings.push(format!(
            "initial data projected onto resolved modes; sup change {removed:.3e}"
        ));
    }
    let initial = initial.with_primary(initial.t, projected);
    let initial_max_slope = initial.u_x()?.max_abs();
    let threshold = match config.breaking_threshold {
        Some(th) => {
            if th <= initial_max_slope {
                return Err(config_err(format!(
                    "breaking threshold {th} must exceed the initial slope {initial_max_slope}"
                )));
            }
            th
        }
        None if initial_max_slope > 0.0 => DEFAULT_BREAKING_FACTOR * initial_max_slope,
        None => f64::INFINITY,
    };
    let mckean = mckean_indicator(&initial.m()?);

    let names: Vec<String> = observers.iter().flat_map(|o| o.columns()).collect();
    let mut rec = Recorder {
        observers,
        columns: vec![Vec::new(); names.len()],
        times: Vec::new(),
        snapshots: Vec::new(),
        policy: &config.snapshots,
        next_snap: 0,
    };
    warnings.extend(boundary_warning(&initial));
    rec.record(&initial)?;

    let t0 = initial.t;
    let blocks = ((config.t_end / config.cadence) - 1e-9).ceil().max(1.0) as usize;
    let mut state = initial;
    let mut steps = 0usize;
    let mut termination = Termination::Completed;
    let rhs = |s: &State| dynamics.rhs(s);

    'blocks: for k in 1..=blocks {
        let target = t0 + (k as f64 * config.cadence).min(config.t_end);
        let block = target - state.t;
        let dt_max = match config.dt {
            StepSize::Auto => cfl_dt(&state, config.cfl_safety, config.cadence)?,
            StepSize::Fixed(dt) => dt,
        };
        let nsub = ((block / dt_max) - 1e-9).ceil().max(1.0) as usize;
        let dt = block / nsub as f64;
        for i in 0..nsub {
            let next = match step_rk4(&state, dt, rhs) {
                Ok(s) => s,
                Err(Error::Dynamics { t, reason }) => {
                    termination = Termination::NumericalFailure { t, reason };
                    break 'blocks;
                }
                Err(e) => return Err(e),
            };
            steps += 1;
            let mut next = next;
            if i + 1 == nsub {
                next.t = target;
            }
            let slope = next.u_x()?.max_abs();
            if !slope.is_finite() {
                termination = Termination::NumericalFailure {
                    t: next.t,
                    reason: "non-finite slope".into(),
                };
                break 'blocks;
            }
            if slope > threshold {
                termination = Termination::WaveBreaking { t: next.t };
                state = next;
                break 'blocks;
            }
            state = next;
        }
        rec.record(&state)?;
    }
    warnings.extend(boundary_warning(&state));

    let series = names.into_iter().zip(rec.columns).collect();
    Ok(Trajectory {
        params: config.params,
        times: rec.times,
        snapshots: rec.snapshots,
        series,
        termination,
        last: state,
        breaking_threshold: threshold,
        initial_max_slope,
        mckean,
        steps,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Form;
    use crate::grid::{integrate, make_grid, sample};
    use crate::initial::{peakon_train, PeakonSpec};

    struct Mass;
    impl Observer for Mass {
        fn columns(&self) -> Vec<String> {
            vec!["mass".into()]
        }
        fn observe(&self, s: &State) -> Result<Vec<f64>> {
            Ok(vec![integrate(&s.primary)])
        }
    }

    fn state_with_umax(umax: f64) -> State {
        let g = make_grid(64.0, 1024).unwrap();
        let u = sample(|x: f64| umax * (-x * x).exp(), &g).unwrap();
        State::new(0.0, u, Form::UForm).unwrap()
    }

    #[test]
    fn cfl_examples() {
        assert!((cfl_dt(&state_with_umax(1.0), 0.3, 1.0).unwrap() - 0.01875).abs() < 1e-15);
        assert!((cfl_dt(&state_with_umax(2.0), 0.3, 1.0).unwrap() - 0.009375).abs() < 1e-15);
        assert_eq!(cfl_dt(&state_with_umax(0.0), 0.3, 0.05).unwrap(), 0.05);
        assert_eq!(cfl_dt(&state_with_umax(1.0), 0.3, 0.01).unwrap(), 0.01);
    }

    #[test]
    fn rk4_identity_flow() {
        let s = state_with_umax(1.0);
        let out = step_rk4(&s, 0.1, |st| Ok(Field::zeros(*st.grid()))).unwrap();
        assert_eq!(out.primary, s.primary);
        assert_eq!(out.t, 0.1);
    }

    #[test]
    fn rk4_linear_decay_factor() {
        let s = state_with_umax(1.0);
        let out = step_rk4(&s, 0.1, |st| Ok(st.primary.scaled(-1.0))).unwrap();
        let j = s.grid().origin_index();
        let factor = out.primary.values()[j] / s.primary.values()[j];
        let poly = 1.0 - 0.1 + 0.01 / 2.0 - 0.001 / 6.0 + 0.0001 / 24.0;
        assert!((factor - poly).abs() < 1e-15);
        assert!((factor - 0.9048375).abs() < 1e-7);
        assert!((factor - (-0.1f64).exp()).abs() <= 1e-7);
    }

    #[test]
    fn rk4_preserves_mean_on_peakon() {
        let g = make_grid(128.0, 4096).unwrap();
        let u = peakon_train(&PeakonSpec::single(1.0, 0.0, 0.05).unwrap(), &g).unwrap();
        let s = State::new(0.0, u, Form::UForm).unwrap();
        let d = Dynamics::new(&g, BFamilyParams::ch(Form::UForm));
        let out = step_rk4(&s, 0.01, |st| d.rhs(st)).unwrap();
        let before = integrate(&s.primary);
        assert!(((integrate(&out.primary) - before) / before).abs() < 1e-12);
    }

    #[test]
    fn rk4_reports_nan() {
        let s = state_with_umax(1.0);
        let err = step_rk4(&s, 0.1, |st| Ok(st.primary.map(|_| 1e308).scaled(1e10))).unwrap_err();
        assert!(matches!(err, Error::Dynamics { .. }));
    }

    #[test]
    fn zero_data_completes_with_zero_series() {
        let g = make_grid(32.0, 256).unwrap();
        let s = State::new(0.0, Field::zeros(g), Form::UForm).unwrap();
        let cfg = SimConfig::new(BFamilyParams::ch(Form::UForm), 1.0, 0.1);
        let traj = run(&cfg, s, &[&Mass]).unwrap();
        assert!(traj.is_completed());
        assert_eq!(traj.times.len(), 11);
        assert!((traj.times[10] - 1.0).abs() < 1e-15);
        assert!(traj.series("mass").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn runs_are_deterministic_and_hit_cadence() {
        let g = make_grid(64.0, 512).unwrap();
        let u = sample(|x: f64| 0.5 * (-x * x / 4.0).exp(), &g).unwrap();
        let mut cfg = SimConfig::new(BFamilyParams::ch(Form::UForm), 0.5, 0.05);
        cfg.snapshots = SnapshotPolicy::AtTimes(vec![0.0, 0.25, 0.5]);
        let a = run(
            &cfg,
            State::new(0.0, u.clone(), Form::UForm).unwrap(),
            &[&Mass],
        )
        .unwrap();
        let b = run(&cfg, State::new(0.0, u, Form::UForm).unwrap(), &[&Mass]).unwrap();
        assert_eq!(a.last.primary, b.last.primary);
        assert_eq!(a.series, b.series);
        assert_eq!(a.snapshots.len(), 3);
        for (i, t) in a.times.iter().enumerate() {
            assert!((t - 0.05 * i as f64).abs() < 1e-12);
        }
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn config_validation() {
        let p = BFamilyParams::ch(Form::UForm);
        assert!(SimConfig::new(p, 0.0, 0.1).validate().is_err());
        assert!(SimConfig::new(p, 1.0, 2.0).validate().is_err());
        let mut c = SimConfig::new(p, 1.0, 0.1);
        c.cfl_safety = 1.5;
        assert!(c.validate().is_err());
        let mut c = SimConfig::new(p, 1.0, 0.1);
        c.breaking_threshold = Some(1e-6);
        let s = state_with_umax(1.0);
        assert!(run(&c, s, &[]).is_err());
    }
}
