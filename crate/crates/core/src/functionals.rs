//! Weights, scale functions, conserved quantities and virial functionals.
//!
//! Scale functions are evaluated on a shifted clock `t_func = t + t_offset`
//! so that `log t_func >= 1` from the first sample. Exterior functionals run
//! on the physical clock.

use serde::{Deserialize, Serialize};

use crate::dynamics::{BFamilyParams, Dynamics, State};
use crate::error::{config_err, Error, Result};
use crate::grid::{integrate, norm, window_restrict, Field, NormKind, Window};

const E: f64 = std::f64::consts::E;

/// `λ_c(t) = t^c / log t`, with `λ_0 ≡ 1`.
pub fn scale_lambda(t: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(1.0);
    }
    if !(t >= E) {
        return Err(Error::Domain(format!(
            "λ_c needs t >= e when c > 0, got t = {t}"
        )));
    }
    Ok(t.powf(c) / t.ln())
}

/// `μ_c(t) = t^{1-c} log² t`.
pub fn scale_mu(t: f64, c: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!("μ_c needs t > 1, got t = {t}")));
    }
    let l = t.ln();
    Ok(t.powf(1.0 - c) * l * l)
}

/// `λ_c'/λ_c = (c - 1/log t)/t`; zero under the `c = 0` convention.
pub fn lambda_log_deriv(t: f64, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    scale_lambda(t, c)?;
    Ok((c - 1.0 / t.ln()) / t)
}

/// `μ_c'/μ_c = (1-c)/t + 2/(t log t)`.
pub fn mu_log_deriv(t: f64, c: f64) -> Result<f64> {
    scale_mu(t, c)?;
    Ok((1.0 - c) / t + 2.0 / (t * t.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `sgn(x)(1 - e^{-|x|})`.
    PhiExp,
    Tanh,
    /// `½(tanh x + 1)`.
    ShiftedTanh,
    /// `sech² x`.
    Sech2,
}

fn sech2(x: f64) -> f64 {
    let s = 1.0 / x.cosh();
    s * s
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl WeightKind {
    pub fn value(self, x: f64) -> f64 {
        match self {
            WeightKind::PhiExp => sgn(x) * -(-x.abs()).exp_m1(),
            WeightKind::Tanh => x.tanh(),
            WeightKind::ShiftedTanh => 0.5 * (x.tanh() + 1.0),
            WeightKind::Sech2 => sech2(x),
        }
    }

    pub fn d1(self, x: f64) -> f64 {
        match self {
            WeightKind::PhiExp => (-x.abs()).exp(),
            WeightKind::Tanh => sech2(x),
            WeightKind::ShiftedTanh => 0.5 * sech2(x),
            WeightKind::Sech2 => -2.0 * sech2(x) * x.tanh(),
        }
    }

    pub fn d2(self, x: f64) -> f64 {
        match self {
            WeightKind::PhiExp => -sgn(x) * (-x.abs()).exp(),
            WeightKind::Tanh => -2.0 * sech2(x) * x.tanh(),
            WeightKind::ShiftedTanh => -sech2(x) * x.tanh(),
            WeightKind::Sech2 => {
                let th = x.tanh();
                sech2(x) * (6.0 * th * th - 2.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub c: f64,
    pub q: f64,
    pub t_offset: f64,
}

pub const DEFAULT_T_OFFSET: f64 = 10.0;

impl ScaleParams {
    pub fn new(c: f64, q: f64, t_offset: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c) {
            return Err(config_err(format!("c must lie in [0, 1), got {c}")));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(config_err(format!("q must exceed 1, got {q}")));
        }
        if c > 2.0 / (2.0 + q) {
            return Err(config_err(format!(
                "c ≤ 2/(2+q) required, got c = {c} with q = {q}"
            )));
        }
        if !(t_offset >= E && t_offset.is_finite()) {
            return Err(config_err(format!(
                "t_offset must be at least e, got {t_offset}"
            )));
        }
        Ok(Self { c, q, t_offset })
    }

    /// Exponent `c` with `q = 2` and the default clock offset.
    pub fn with_c(c: f64) -> Result<Self> {
        Self::new(c, 2.0, DEFAULT_T_OFFSET)
    }

    pub fn clock(&self, t_phys: f64) -> f64 {
        t_phys + self.t_offset
    }

    pub fn lambda(&self, t_phys: f64) -> Result<f64> {
        scale_lambda(self.clock(t_phys), self.c)
    }

    pub fn mu(&self, t_phys: f64) -> Result<f64> {
        scale_mu(self.clock(t_phys), self.c)
    }

    /// `Λ_c(t) = (-λ_c, λ_c)` on the functional clock.
    pub fn window(&self, t_phys: f64) -> Result<Window> {
        Window::symmetric(self.lambda(t_phys)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorFrame {
    pub sigma: f64,
    pub l: f64,
    pub t0: f64,
}

impl ExteriorFrame {
    pub fn new(sigma: f64, l: f64, t0: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(config_err(format!("sigma must be positive, got {sigma}")));
        }
        if !(l >= 10.0 * sigma && l.is_finite()) {
            return Err(config_err(format!(
                "L >= 10 sigma required, got L = {l}, sigma = {sigma}"
            )));
        }
        if !(t0 > 2.0 && t0.is_finite()) {
            return Err(config_err(format!("t0 must exceed 2, got {t0}")));
        }
        Ok(Self { sigma, l, t0 })
    }

    /// Weight argument at `(x, t)` and its time derivative.
    fn argument(&self, x: f64, t: f64, shifted: bool) -> (f64, f64) {
        if shifted {
            let xi = (x - self.sigma * self.t0 + 0.5 * self.sigma * (self.t0 - t)) / self.l;
            (xi, -0.5 * self.sigma / self.l)
        } else {
            ((x - self.sigma * t) / self.l, -self.sigma / self.l)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub name: String,
    pub t: f64,
    pub t_func: f64,
    pub value: f64,
    pub derivative_analytic: Option<f64>,
    pub derivative_fd: Option<f64>,
}

impl FunctionalValue {
    fn new(name: &str, t: f64, t_func: f64, value: f64, derivative: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            t,
            t_func,
            value,
            derivative_analytic: derivative,
            derivative_fd: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conserved {
    /// `∫u`.
    Iu,
    /// `∫(u² + u_x²)`, conserved only for `b = 2`.
    Energy,
    /// `∫m`.
    Hm,
}

pub fn conserved(state: &State, which: Conserved) -> Result<f64> {
    match which {
        Conserved::Iu => Ok(integrate(&state.u()?)),
        Conserved::Hm => Ok(integrate(&state.m()?)),
        Conserved::Energy => {
            let u = state.u()?;
            let ux = state.u_x()?;
            Ok(integrate(&u.mul(&u)?) + integrate(&ux.mul(&ux)?))
        }
    }
}

fn weighted(f: &Field, w: impl Fn(f64) -> f64) -> f64 {
    let g = f.grid();
    g.spacing()
        * f.values()
            .iter()
            .enumerate()
            .map(|(j, &v)| w(g.node(j)) * v)
            .sum::<f64>()
}

/// `M_q = μ⁻¹ ∫ φ(x/λ) φ'(x/λ^q) u`.
pub fn functional_mq(state: &State, sp: &ScaleParams) -> Result<FunctionalValue> {
    let tf = sp.clock(state.t);
    let lam = sp.lambda(state.t)?;
    let lq = lam.powf(sp.q);
    let mu = sp.mu(state.t)?;
    let phi = WeightKind::PhiExp;
    let u = state.u()?;
    let v = weighted(&u, |x| phi.value(x / lam) * phi.d1(x / lq)) / mu;
    Ok(FunctionalValue::new("Mq", state.t, tf, v, None))
}

/// Right side of the `|M_q|` bound `λ^{q/2} μ⁻¹ ‖φ‖_∞ ‖φ'‖₂ ‖u‖₂`; both weight norms are 1.
pub fn mq_bound(state: &State, sp: &ScaleParams) -> Result<f64> {
    let lam = sp.lambda(state.t)?;
    let mu = sp.mu(state.t)?;
    Ok(lam.powf(0.5 * sp.q) / mu * norm(&state.u()?, NormKind::Lp(2.0), None)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MqTerm {
    pub label: &'static str,
    /// Sign with which the term enters `dM_q/dt`.
    pub sign: f64,
    pub value: f64,
    /// Whether the term contains `G(...)`.
    pub uses_nonlocal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MqBreakdown {
    pub terms: Vec<MqTerm>,
}

impl MqBreakdown {
    pub fn signed_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.sign * t.value).sum()
    }
}

struct MqPieces {
    lam: f64,
    lq: f64,
    mu: f64,
    dlog_lam: f64,
    dlog_mu: f64,
    u: Field,
    flux: Field,
}

fn mq_pieces(state: &State, sp: &ScaleParams, params: BFamilyParams) -> Result<MqPieces> {
    let tf = sp.clock(state.t);
    let lam = sp.lambda(state.t)?;
    let u = state.u()?;
    let parts = Dynamics::new(u.grid(), params).flux(&u)?;
    Ok(MqPieces {
        lam,
        lq: lam.powf(sp.q),
        mu: sp.mu(state.t)?,
        dlog_lam: lambda_log_deriv(tf, sp.c)?,
        dlog_mu: mu_log_deriv(tf, sp.c)?,
        u,
        flux: parts.local.lin_comb(1.0, &parts.nonlocal, 1.0)?,
    })
}

/// The five terms of `dM_q/dt = -M1 - M2 - M3 + M4 + M5`.
///
/// `M1` is `(μ'/μ) M_q`; `F = ½u² + G(b/2 u² + (3-b)/2 u_x²)` is the flux
/// of the u-form, built with the same projections as the evolution.
pub fn mq_rhs_analytic(
    state: &State,
    sp: &ScaleParams,
    params: BFamilyParams,
) -> Result<MqBreakdown> {
    let p = mq_pieces(state, sp, params)?;
    let phi = WeightKind::PhiExp;
    let (lam, lq, q) = (p.lam, p.lq, sp.q);
    let mq = weighted(&p.u, |x| phi.value(x / lam) * phi.d1(x / lq)) / p.mu;
    let m1 = p.dlog_mu * mq;
    let m2 = p.dlog_lam / p.mu * weighted(&p.u, |x| x / lam * phi.d1(x / lam) * phi.d1(x / lq));
    let m3 =
        q * p.dlog_lam / p.mu * weighted(&p.u, |x| x / lq * phi.value(x / lam) * phi.d2(x / lq));
    let m4 = weighted(&p.flux, |x| phi.d1(x / lam) * phi.d1(x / lq)) / (p.mu * lam);
    let m5 = weighted(&p.flux, |x| phi.value(x / lam) * phi.d2(x / lq)) / (p.mu * lq);
    let term = |label, sign, value, uses_nonlocal| MqTerm {
        label,
        sign,
        value,
        uses_nonlocal,
    };
    Ok(MqBreakdown {
        terms: vec![
            term("M1", -1.0, m1, false),
            term("M2", -1.0, m2, false),
            term("M3", -1.0, m3, false),
            term("M4", 1.0, m4, true),
            term("M5", 1.0, m5, true),
        ],
    })
}

/// `dM_q/dt` as one quadrature of the combined integrand.
pub fn mq_derivative_single(state: &State, sp: &ScaleParams, params: BFamilyParams) -> Result<f64> {
    let p = mq_pieces(state, sp, params)?;
    let phi = WeightKind::PhiExp;
    let (lam, lq, q) = (p.lam, p.lq, sp.q);
    let g = p.u.grid();
    let mut acc = 0.0;
    for j in 0..g.n() {
        let x = g.node(j);
        let (a, b) = (x / lam, x / lq);
        let u = p.u.values()[j];
        let f = p.flux.values()[j];
        acc += -p.dlog_mu / p.mu * phi.value(a) * phi.d1(b) * u
            - p.dlog_lam / p.mu * a * phi.d1(a) * phi.d1(b) * u
            - q * p.dlog_lam / p.mu * b * phi.value(a) * phi.d2(b) * u
            + phi.d1(a) * phi.d1(b) * f / (p.mu * lam)
            + phi.value(a) * phi.d2(b) * f / (p.mu * lq);
    }
    Ok(acc * g.spacing())
}

/// `I(t) = ∫ tanh(x/λ) u` with its analytic derivative.
///
/// `dI/dt = -(λ'/λ)∫(x/λ)φ'(x/λ)u + (2λ)⁻¹∫φ'(x/λ)u² + λ⁻¹∫φ'(x/λ)G(b/2 u² + (3-b)/2 u_x²)`.
pub fn functional_i_tanh(
    state: &State,
    sp: &ScaleParams,
    params: BFamilyParams,
) -> Result<FunctionalValue> {
    let tf = sp.clock(state.t);
    let lam = sp.lambda(state.t)?;
    let dlog = lambda_log_deriv(tf, sp.c)?;
    let w = WeightKind::Tanh;
    let u = state.u()?;
    let value = weighted(&u, |x| w.value(x / lam));
    let parts = Dynamics::new(u.grid(), params).flux(&u)?;
    let d = -dlog * weighted(&u, |x| x / lam * w.d1(x / lam))
        + weighted(&parts.local, |x| w.d1(x / lam)) / lam
        + weighted(&parts.nonlocal, |x| w.d1(x / lam)) / lam;
    Ok(FunctionalValue::new("ITanh", state.t, tf, value, Some(d)))
}

/// `λ⁻¹ ∫ sech²(x/λ)(u² + u_x²)`, the dissipated density whose time integral the tanh virial bounds.
pub fn tanh_virial_density(state: &State, sp: &ScaleParams) -> Result<f64> {
    let lam = sp.lambda(state.t)?;
    let (u, ux) = (state.u()?, state.u_x()?);
    let g = u.grid();
    let sum: f64 = (0..g.n())
        .map(|j| sech2(g.node(j) / lam) * (u.values()[j].powi(2) + ux.values()[j].powi(2)))
        .sum();
    Ok(sum * g.spacing() / lam)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyPsi {
    pub value: FunctionalValue,
    /// `∫ψ(x/λ)u - λ⁻²∫ψ''(x/λ)u`, equal to the value after integrating by parts.
    pub u_form: f64,
    /// Smallest `ψ(x/λ)` over the nodes of `Λ_c(t)`.
    pub min_weight_on_window: f64,
    pub l1_m_window: f64,
    pub l1_u_window: f64,
}

/// `E(t) = ∫ sech²(x/λ) m` with its analytic derivative from the momentum equation.
pub fn functional_e_psi(
    state: &State,
    sp: &ScaleParams,
    params: BFamilyParams,
) -> Result<EnergyPsi> {
    let tf = sp.clock(state.t);
    let lam = sp.lambda(state.t)?;
    let dlog = lambda_log_deriv(tf, sp.c)?;
    let w = WeightKind::Sech2;
    let m = state.m()?;
    let u = state.u()?;
    let value = weighted(&m, |x| w.value(x / lam));
    let u_form = weighted(&u, |x| w.value(x / lam)) - weighted(&u, |x| w.d2(x / lam)) / (lam * lam);
    let mt = Dynamics::new(m.grid(), params).rhs_m(&m, state.t)?;
    let d = -dlog * weighted(&m, |x| x / lam * w.d1(x / lam)) + weighted(&mt, |x| w.value(x / lam));

    let window = Window::symmetric(lam)?;
    let (mask, _) = window.mask(m.grid());
    let g = m.grid();
    let min_weight_on_window = (0..g.n())
        .filter(|&j| mask[j])
        .map(|j| w.value(g.node(j) / lam))
        .fold(f64::INFINITY, f64::min);
    Ok(EnergyPsi {
        value: FunctionalValue::new("EPsi", state.t, tf, value, Some(d)),
        u_form,
        min_weight_on_window,
        l1_m_window: norm(&m, NormKind::Lp(1.0), Some(&window))?,
        l1_u_window: norm(&u, NormKind::Lp(1.0), Some(&window))?,
    })
}

/// `I(t) = ∫ φ((x - σt)/L) m` with `φ = ½(tanh + 1)`, or the shifted `I_{t₀}`.
pub fn functional_exterior(
    state: &State,
    frame: &ExteriorFrame,
    shifted: bool,
    params: BFamilyParams,
) -> Result<FunctionalValue> {
    let w = WeightKind::ShiftedTanh;
    let t = state.t;
    let m = state.m()?;
    let value = weighted(&m, |x| w.value(frame.argument(x, t, shifted).0));
    let mt = Dynamics::new(m.grid(), params).rhs_m(&m, t)?;
    let d = weighted(&m, |x| {
        let (xi, rate) = frame.argument(x, t, shifted);
        rate * w.d1(xi)
    }) + weighted(&mt, |x| w.value(frame.argument(x, t, shifted).0));
    let name = if shifted {
        "IExteriorShifted"
    } else {
        "IExterior"
    };
    Ok(FunctionalValue::new(name, t, t, value, Some(d)))
}

/// `‖u‖_{W^{1,p}(σt, ∞)}` at physical time.
pub fn exterior_norm(state: &State, sigma: f64, p: f64) -> Result<f64> {
    let lo = sigma * state.t;
    let hi = 0.5 * state.grid().length();
    if lo >= hi {
        return Ok(0.0);
    }
    norm(
        &state.u()?,
        NormKind::W1p(p),
        Some(&Window::new(lo, f64::INFINITY)?),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowNorms {
    pub lambda: f64,
    pub h1_u: f64,
    pub l1_u: f64,
    pub l1_m: f64,
    pub empty: bool,
}

pub fn window_norms_with_scale(state: &State, lambda: f64) -> Result<WindowNorms> {
    let w = Window::symmetric(lambda)?;
    let u = state.u()?;
    let m = state.m()?;
    let empty = window_restrict(&u, &w).empty;
    if empty {
        return Ok(WindowNorms {
            lambda,
            h1_u: 0.0,
            l1_u: 0.0,
            l1_m: 0.0,
            empty,
        });
    }
    Ok(WindowNorms {
        lambda,
        h1_u: norm(&u, NormKind::H1, Some(&w))?,
        l1_u: norm(&u, NormKind::Lp(1.0), Some(&w))?,
        l1_m: norm(&m, NormKind::Lp(1.0), Some(&w))?,
        empty,
    })
}

/// Norms of `u` and `m` on `Λ_c(t)`.
pub fn window_norms(state: &State, sp: &ScaleParams) -> Result<WindowNorms> {
    window_norms_with_scale(state, sp.lambda(state.t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub a: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares slope of `log ‖u‖₁` against `log ⟨t⟩`, `⟨t⟩ = (1 + t²)^{1/2}`.
pub fn growth_exponent(times: &[f64], values: &[f64]) -> Result<GrowthFit> {
    if times.len() != values.len() {
        return Err(config_err(
            "growth series needs equal-length time and value arrays",
        ));
    }
    if times.len() < 10 {
        return Err(Error::Insufficient(format!(
            "growth fit needs at least 10 samples, got {}",
            times.len()
        )));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Insufficient(
            "growth fit needs positive norms".into(),
        ));
    }
    let xs: Vec<f64> = times.iter().map(|t| (1.0 + t * t).sqrt().ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if hi - lo < std::f64::consts::LN_10 * (1.0 - 1e-12) {
        return Err(Error::Insufficient(format!(
            "growth fit needs <t> to span a decade, spans a factor {:.3}",
            (hi - lo).exp()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let intercept = my - a * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - a * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(GrowthFit {
        a,
        intercept,
        residual,
    })
}
