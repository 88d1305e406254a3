//! Right-hand sides of the b-family in the u-form and the momentum form.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::grid::{Field, Grid};
use crate::spectral::SpectralWorkspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    /// Evolve `u` with the nonlocal conservative flux.
    UForm,
    /// Evolve `m = u - u_xx` with `u = G m`.
    MForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BFamilyParams {
    pub b: f64,
    pub form: Form,
}

impl BFamilyParams {
    /// Accepts `b ∈ (0, 3]`. DP (`b = 3`) is included on purpose.
    pub fn new(b: f64, form: Form) -> Result<Self> {
        if !(b > 0.0 && b <= 3.0) {
            return Err(config_err(format!("b must lie in (0, 3], got {b}")));
        }
        Ok(Self { b, form })
    }

    pub fn ch(form: Form) -> Self {
        Self { b: 2.0, form }
    }

    pub fn dp(form: Form) -> Self {
        Self { b: 3.0, form }
    }

    pub fn is_ch(&self) -> bool {
        self.b == 2.0
    }

    pub fn is_dp(&self) -> bool {
        self.b == 3.0
    }

    /// Coefficients `(b/2, (3-b)/2)` of `u²` and `u_x²` inside `G`.
    pub fn nonlocal_coefficients(&self) -> (f64, f64) {
        (0.5 * self.b, 0.5 * (3.0 - self.b))
    }
}

/// Sign class of the momentum density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentumSign {
    Zero,
    Nonnegative,
    Nonpositive,
    Signed,
}

impl MomentumSign {
    /// Classifies `m`, treating `|m| < 1e-12 max|m|` as zero.
    pub fn classify(m: &Field) -> Self {
        let scale = m.max_abs();
        if scale == 0.0 {
            return MomentumSign::Zero;
        }
        let tol = 1e-12 * scale;
        let pos = m.values().iter().any(|&v| v > tol);
        let neg = m.values().iter().any(|&v| v < -tol);
        match (pos, neg) {
            (true, true) => MomentumSign::Signed,
            (true, false) => MomentumSign::Nonnegative,
            (false, true) => MomentumSign::Nonpositive,
            (false, false) => MomentumSign::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    /// `u` in the u-form, `m` in the momentum form.
    pub primary: Field,
    pub form: Form,
    /// Sign class of `m` at `t = 0`.
    pub momentum_sign: MomentumSign,
}

impl State {
    pub fn new(t: f64, primary: Field, form: Form) -> Result<Self> {
        if !t.is_finite() {
            return Err(config_err(format!("state time must be finite, got {t}")));
        }
        if !primary.is_finite() {
            return Err(Error::Dynamics {
                t,
                reason: "non-finite initial field".into(),
            });
        }
        let ws = SpectralWorkspace::shared(primary.grid());
        let sign = match form {
            Form::MForm => MomentumSign::classify(&primary),
            Form::UForm => MomentumSign::classify(&ws.helmholtz_forward(&primary)?),
        };
        Ok(Self {
            t,
            primary,
            form,
            momentum_sign: sign,
        })
    }

    /// Starts from `u`, converting to `m` if `form` is the momentum form.
    pub fn from_u(u: Field, form: Form) -> Result<Self> {
        let primary = match form {
            Form::UForm => u,
            Form::MForm => SpectralWorkspace::shared(u.grid()).helmholtz_forward(&u)?,
        };
        Self::new(0.0, primary, form)
    }

    /// Starts from `m`, converting to `u` if `form` is the u-form.
    pub fn from_m(m: Field, form: Form) -> Result<Self> {
        let primary = match form {
            Form::MForm => m,
            Form::UForm => SpectralWorkspace::shared(m.grid()).green_apply(&m)?,
        };
        Self::new(0.0, primary, form)
    }

    pub fn grid(&self) -> &Grid {
        self.primary.grid()
    }

    pub fn u(&self) -> Result<Field> {
        match self.form {
            Form::UForm => Ok(self.primary.clone()),
            Form::MForm => SpectralWorkspace::shared(self.grid()).green_apply(&self.primary),
        }
    }

    pub fn m(&self) -> Result<Field> {
        match self.form {
            Form::MForm => Ok(self.primary.clone()),
            Form::UForm => SpectralWorkspace::shared(self.grid()).helmholtz_forward(&self.primary),
        }
    }

    pub fn u_x(&self) -> Result<Field> {
        let ws = SpectralWorkspace::shared(self.grid());
        match self.form {
            Form::UForm => ws.deriv(&self.primary, 1),
            Form::MForm => ws.green_apply_dx(&self.primary),
        }
    }

    pub(crate) fn with_primary(&self, t: f64, primary: Field) -> Self {
        Self {
            t,
            primary,
            form: self.form,
            momentum_sign: self.momentum_sign,
        }
    }
}

/// Pieces of the u-form flux `½u² + G(b/2 u² + (3-b)/2 u_x²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxParts {
    pub local: Field,
    pub nonlocal: Field,
}

#[derive(Debug, Clone)]
pub struct Dynamics {
    ws: Arc<SpectralWorkspace>,
    params: BFamilyParams,
}

fn finite_or_fail(values: Vec<f64>, grid: Grid, t: f64, what: &str) -> Result<Field> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dynamics {
            t,
            reason: format!("non-finite {what}"),
        });
    }
    Ok(Field::from_raw(grid, values))
}

impl Dynamics {
    pub fn new(grid: &Grid, params: BFamilyParams) -> Self {
        Self {
            ws: SpectralWorkspace::shared(grid),
            params,
        }
    }

    pub fn params(&self) -> BFamilyParams {
        self.params
    }

    pub fn workspace(&self) -> &SpectralWorkspace {
        &self.ws
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid() != self.ws.grid() {
            return Err(Error::Operator(
                "field grid does not match dynamics grid".into(),
            ));
        }
        Ok(())
    }

    /// Dealiased spectrum of `u`, `P u` and `P u_x` on the grid.
    fn projected(&self, u: &Field) -> (Vec<Complex64>, Vec<f64>, Vec<f64>) {
        let ws = &self.ws;
        let mut uh = ws.forward(u.values());
        ws.dealias_in_place(&mut uh);
        let up = ws.inverse(uh.clone());
        let uxh: Vec<Complex64> = uh.iter().zip(ws.ik_table()).map(|(a, b)| a * b).collect();
        let ux = ws.inverse(uxh);
        (uh, up, ux)
    }

    fn flux_spectra(&self, u: &Field) -> (Vec<Complex64>, Vec<Complex64>) {
        let ws = &self.ws;
        let (_, up, ux) = self.projected(u);
        let (cu, cx) = self.params.nonlocal_coefficients();
        let sq: Vec<f64> = up.iter().map(|v| v * v).collect();
        let mut sqh = ws.forward(&sq);
        ws.dealias_in_place(&mut sqh);
        let local: Vec<Complex64> = sqh.iter().map(|c| 0.5 * c).collect();
        let mut arg: Vec<Complex64> = sqh.iter().map(|c| cu * c).collect();
        // at b = 3 the slope term is absent, not merely small
        if cx != 0.0 {
            let sqx: Vec<f64> = ux.iter().map(|v| v * v).collect();
            let mut sqxh = ws.forward(&sqx);
            ws.dealias_in_place(&mut sqxh);
            for (a, s) in arg.iter_mut().zip(&sqxh) {
                *a += cx * s;
            }
        }
        let nonlocal = arg
            .iter()
            .zip(ws.inv_helm_table())
            .map(|(a, w)| a * w)
            .collect();
        (local, nonlocal)
    }

    /// The two flux pieces as fields.
    pub fn flux(&self, u: &Field) -> Result<FluxParts> {
        self.check(u)?;
        let (l, nl) = self.flux_spectra(u);
        let grid = *self.ws.grid();
        Ok(FluxParts {
            local: Field::from_raw(grid, self.ws.inverse(l)),
            nonlocal: Field::from_raw(grid, self.ws.inverse(nl)),
        })
    }

    /// `∂ₜu = -∂ₓ(½u² + G(b/2 u² + (3-b)/2 u_x²))`.
    pub fn rhs_u(&self, u: &Field, t: f64) -> Result<Field> {
        self.check(u)?;
        let (l, nl) = self.flux_spectra(u);
        let out: Vec<Complex64> = l
            .iter()
            .zip(&nl)
            .zip(self.ws.ik_table())
            .map(|((a, b), ik)| -ik * (a + b))
            .collect();
        finite_or_fail(
            self.ws.inverse(out),
            *self.ws.grid(),
            t,
            "u-form right-hand side",
        )
    }

    /// `∂ₜm = -(u m_x + b m u_x)` with `u = G m`.
    pub fn rhs_m(&self, m: &Field, t: f64) -> Result<Field> {
        self.check(m)?;
        let ws = &self.ws;
        let mut mh = ws.forward(m.values());
        ws.dealias_in_place(&mut mh);
        let mp = ws.inverse(mh.clone());
        let scaled = |table: &[f64]| -> Vec<Complex64> {
            mh.iter().zip(table).map(|(a, w)| a * w).collect()
        };
        let scaled_c = |table: &[Complex64]| -> Vec<Complex64> {
            mh.iter().zip(table).map(|(a, w)| a * w).collect()
        };
        let u = ws.inverse(scaled(ws.inv_helm_table()));
        let ux = ws.inverse(scaled_c(ws.dx_inv_helm_table()));
        let mx = ws.inverse(scaled_c(ws.ik_table()));
        let b = self.params.b;
        let prod: Vec<f64> = (0..mp.len())
            .map(|j| u[j] * mx[j] + b * mp[j] * ux[j])
            .collect();
        let mut ph = ws.forward(&prod);
        ws.dealias_in_place(&mut ph);
        for c in ph.iter_mut() {
            *c = -*c;
        }
        finite_or_fail(ws.inverse(ph), *ws.grid(), t, "momentum right-hand side")
    }

    pub fn rhs(&self, state: &State) -> Result<Field> {
        match state.form {
            Form::UForm => self.rhs_u(&state.primary, state.t),
            Form::MForm => self.rhs_m(&state.primary, state.t),
        }
    }
}

pub fn rhs_u(u: &Field, params: BFamilyParams) -> Result<Field> {
    Dynamics::new(u.grid(), params).rhs_u(u, 0.0)
}

pub fn rhs_m(m: &Field, params: BFamilyParams) -> Result<Field> {
    Dynamics::new(m.grid(), params).rhs_m(m, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub discrepancy: f64,
    pub m_sup: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares `(1 - ∂²) rhs_u(u)` with `rhs_m((1 - ∂²) u)`.
pub fn cross_check_forms(u: &Field, params: BFamilyParams, tol: f64) -> Result<ConsistencyReport> {
    let dynamics = Dynamics::new(u.grid(), params);
    let ws = dynamics.workspace();
    let m = ws.helmholtz_forward(u)?;
    let lhs = ws.helmholtz_forward(&dynamics.rhs_u(u, 0.0)?)?;
    let rhs = dynamics.rhs_m(&m, 0.0)?;
    let discrepancy = lhs
        .values()
        .iter()
        .zip(rhs.values())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let m_sup = m.max_abs();
    Ok(ConsistencyReport {
        discrepancy,
        m_sup,
        tol,
        pass: discrepancy <= tol * m_sup,
    })
}
