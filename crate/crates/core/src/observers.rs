//! Observers that turn states into named time series.

use crate::dynamics::{BFamilyParams, State};
use crate::error::Result;
use crate::functionals::{
    conserved, exterior_norm, functional_e_psi, functional_exterior, functional_i_tanh,
    functional_mq, mq_bound, mq_rhs_analytic, tanh_virial_density, window_norms, Conserved,
    ExteriorFrame, ScaleParams,
};
use crate::integrator::Observer;

/// `Iu`, `Energy`, `Hm`.
pub struct ConservedObserver;

impl Observer for ConservedObserver {
    fn columns(&self) -> Vec<String> {
        vec!["Iu".into(), "Energy".into(), "Hm".into()]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        Ok(vec![
            conserved(s, Conserved::Iu)?,
            conserved(s, Conserved::Energy)?,
            conserved(s, Conserved::Hm)?,
        ])
    }
}

/// `min_m`, `max_m`, `min_u`, `max_abs_u` and `max_slope`.
pub struct ExtremaObserver;

impl Observer for ExtremaObserver {
    fn columns(&self) -> Vec<String> {
        ["min_m", "max_m", "min_u", "max_abs_u", "max_slope"]
            .map(String::from)
            .to_vec()
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        let m = s.m()?;
        let u = s.u()?;
        Ok(vec![
            m.min(),
            m.max(),
            u.min(),
            u.max_abs(),
            s.u_x()?.max_abs(),
        ])
    }
}

/// Functional clock `t + t_offset`.
pub struct ClockObserver {
    pub t_offset: f64,
}

impl Observer for ClockObserver {
    fn columns(&self) -> Vec<String> {
        vec!["t_func".into()]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        Ok(vec![s.t + self.t_offset])
    }
}

fn scale_tag(sp: &ScaleParams) -> String {
    format!("c{}_q{}", sp.c, sp.q)
}

/// `M_q`, its analytic derivative and its a-priori bound.
pub struct MqObserver {
    pub sp: ScaleParams,
    pub params: BFamilyParams,
}

impl Observer for MqObserver {
    fn columns(&self) -> Vec<String> {
        let tag = scale_tag(&self.sp);
        vec![
            format!("Mq_{tag}"),
            format!("dMq_{tag}"),
            format!("Mq_bound_{tag}"),
        ]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        Ok(vec![
            functional_mq(s, &self.sp)?.value,
            mq_rhs_analytic(s, &self.sp, self.params)?.signed_sum(),
            mq_bound(s, &self.sp)?,
        ])
    }
}

/// `I(t)`, its analytic derivative and `tanh_virial_density`.
pub struct ITanhObserver {
    pub sp: ScaleParams,
    pub params: BFamilyParams,
}

impl Observer for ITanhObserver {
    fn columns(&self) -> Vec<String> {
        let tag = scale_tag(&self.sp);
        vec![
            format!("ITanh_{tag}"),
            format!("dITanh_{tag}"),
            format!("vITanh_{tag}"),
        ]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        let v = functional_i_tanh(s, &self.sp, self.params)?;
        Ok(vec![
            v.value,
            v.derivative_analytic.unwrap_or(f64::NAN),
            tanh_virial_density(s, &self.sp)?,
        ])
    }
}

pub struct EPsiObserver {
    pub sp: ScaleParams,
    pub params: BFamilyParams,
}

impl Observer for EPsiObserver {
    fn columns(&self) -> Vec<String> {
        let tag = scale_tag(&self.sp);
        vec![format!("EPsi_{tag}"), format!("dEPsi_{tag}")]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        let v = functional_e_psi(s, &self.sp, self.params)?.value;
        Ok(vec![v.value, v.derivative_analytic.unwrap_or(f64::NAN)])
    }
}

pub struct ExteriorObserver {
    pub frame: ExteriorFrame,
    pub shifted: bool,
    pub params: BFamilyParams,
}

impl ExteriorObserver {
    fn tag(&self) -> String {
        let kind = if self.shifted { "IShift" } else { "IExt" };
        format!("{kind}_s{}_L{}", self.frame.sigma, self.frame.l)
    }
}

impl Observer for ExteriorObserver {
    fn columns(&self) -> Vec<String> {
        let tag = self.tag();
        vec![tag.clone(), format!("d{tag}")]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        let v = functional_exterior(s, &self.frame, self.shifted, self.params)?;
        Ok(vec![v.value, v.derivative_analytic.unwrap_or(f64::NAN)])
    }
}

/// `‖u‖_{H¹}`, `‖u‖_{L¹}`, `‖m‖_{L¹}` on `Λ_c(t)`.
pub struct WindowNormObserver {
    pub sp: ScaleParams,
}

impl Observer for WindowNormObserver {
    fn columns(&self) -> Vec<String> {
        let c = self.sp.c;
        vec![
            format!("h1_u_win_c{c}"),
            format!("l1_u_win_c{c}"),
            format!("l1_m_win_c{c}"),
        ]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        let w = window_norms(s, &self.sp)?;
        Ok(vec![w.h1_u, w.l1_u, w.l1_m])
    }
}

/// `‖u‖_{W^{1,p}(σt, ∞)}`.
pub struct ExteriorNormObserver {
    pub sigma: f64,
    pub p: f64,
}

impl Observer for ExteriorNormObserver {
    fn columns(&self) -> Vec<String> {
        vec![format!("ext_w1p{}_s{}", self.p, self.sigma)]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        Ok(vec![exterior_norm(s, self.sigma, self.p)?])
    }
}

/// `‖u‖_{L¹}` over the whole box.
pub struct L1Observer;

impl Observer for L1Observer {
    fn columns(&self) -> Vec<String> {
        vec!["l1_u".into()]
    }

    fn observe(&self, s: &State) -> Result<Vec<f64>> {
        Ok(vec![crate::grid::norm(
            &s.u()?,
            crate::grid::NormKind::Lp(1.0),
            None,
        )?])
    }
}
