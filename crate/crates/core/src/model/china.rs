//! Nine-compartment model (S, E, I, Iu, HR, HD, Rd, Ru, D) for China,
//! discretized with explicit Euler sub-steps (one hour by default). The
//! control is held constant over the sub-steps of a day.
//!
//! No calibrated parameter set ships with the crate: values have to come
//! from the calibration of the source model (experiment EXP_29M).

use super::{check_shape, clamp_small_negative, DynamicsError, ModelKind, StateVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChinaState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub iu: f64,
    pub hr: f64,
    pub hd: f64,
    pub rd: f64,
    pub ru: f64,
    pub d: f64,
}

impl ChinaState {
    pub const LABELS: [&'static str; 9] = ["S", "E", "I", "Iu", "HR", "HD", "Rd", "Ru", "D"];

    pub fn to_array(&self) -> [f64; 9] {
        [self.s, self.e, self.i, self.iu, self.hr, self.hd, self.rd, self.ru, self.d]
    }

    pub fn from_array(v: [f64; 9]) -> Self {
        ChinaState {
            s: v[0],
            e: v[1],
            i: v[2],
            iu: v[3],
            hr: v[4],
            hd: v[5],
            rd: v[6],
            ru: v[7],
            d: v[8],
        }
    }

    pub fn total(&self) -> f64 {
        self.to_array().iter().sum()
    }

    pub fn disease_free(population: f64) -> Self {
        let mut v = [0.0; 9];
        v[0] = population;
        ChinaState::from_array(v)
    }
}

impl From<ChinaState> for StateVec {
    fn from(s: ChinaState) -> Self {
        StateVec::new(ModelKind::China9, s.to_array().to_vec())
    }
}

impl TryFrom<&StateVec> for ChinaState {
    type Error = DynamicsError;

    fn try_from(x: &StateVec) -> Result<Self, Self::Error> {
        check_shape(x, ModelKind::China9, 9)?;
        let v = x.values();
        let mut a = [0.0; 9];
        a.copy_from_slice(v);
        Ok(ChinaState::from_array(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChinaParams {
    pub beta_e: f64,
    pub beta_i: f64,
    pub beta_iu: f64,
    pub beta_hr: f64,
    pub beta_hd: f64,
    pub gamma_e: f64,
    pub gamma_i: f64,
    pub gamma_iu: f64,
    pub gamma_hr: f64,
    pub gamma_hd: f64,
    /// Fraction of infected that are hospitalized and recover.
    pub phi_ihr: f64,
    /// Fraction of infected that are hospitalized and die.
    pub phi_ihd: f64,
    pub delta_hat: f64,
    pub population: f64,
    /// Euler sub-steps per day; the step is `1 / substeps` days.
    pub substeps: u32,
}

impl ChinaParams {
    pub const DEFAULT_SUBSTEPS: u32 = 24;
    pub const DEFAULT_DELTA_HAT: f64 = 0.25;

    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.substeps)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let betas = [
            ("beta_E", self.beta_e),
            ("beta_I", self.beta_i),
            ("beta_Iu", self.beta_iu),
            ("beta_HR", self.beta_hr),
            ("beta_HD", self.beta_hd),
        ];
        let gammas = [
            ("gamma_E", self.gamma_e),
            ("gamma_I", self.gamma_i),
            ("gamma_Iu", self.gamma_iu),
            ("gamma_HR", self.gamma_hr),
            ("gamma_HD", self.gamma_hd),
        ];
        for (name, v) in betas.iter().chain(gammas.iter()) {
            if !(v.is_finite() && *v > 0.0) {
                out.push(format!("{name} must be a positive rate (got {v})"));
            }
        }
        if self.substeps == 0 {
            out.push("substeps must be at least 1".to_string());
        } else {
            for (name, v) in gammas {
                if v * self.dt() > 1.0 {
                    out.push(format!("dt * {name} = {} exceeds 1", v * self.dt()));
                }
            }
        }
        for (name, v) in [("phi_IHR", self.phi_ihr), ("phi_IHD", self.phi_ihd)] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("{name} must lie in [0, 1] (got {v})"));
            }
        }
        if self.phi_ihr + self.phi_ihd > 1.0 {
            out.push(format!(
                "phi_IHR + phi_IHD must not exceed 1 (got {})",
                self.phi_ihr + self.phi_ihd
            ));
        }
        if !(self.delta_hat > 0.0 && self.delta_hat < 1.0) {
            out.push(format!("delta_hat must lie in (0, 1) (got {})", self.delta_hat));
        }
        if !(self.population.is_finite() && self.population > 0.0) {
            out.push(format!("population must be positive (got {})", self.population));
        }
        out
    }
}

/// Controlled contagion rate (1/day); the control scales every contact.
pub fn china_contagion_rate(x: &ChinaState, u: f64, p: &ChinaParams) -> f64 {
    let pressure = p.beta_e * x.e
        + p.beta_i * x.i
        + p.beta_iu * x.iu
        + p.beta_hr * x.hr
        + p.beta_hd * x.hd;
    (1.0 - u) * pressure / p.population
}

fn euler_substep(x: &ChinaState, u: f64, p: &ChinaParams) -> Result<ChinaState, DynamicsError> {
    let dt = p.dt();
    let infections = china_contagion_rate(x, u, p) * x.s;
    let e_out = p.gamma_e * x.e;
    let i_out = p.gamma_i * x.i;
    let iu_out = p.gamma_iu * x.iu;
    let hr_out = p.gamma_hr * x.hr;
    let hd_out = p.gamma_hd * x.hd;
    let next = [
        x.s - dt * infections,
        x.e + dt * (infections - e_out),
        x.i + dt * (e_out - i_out),
        x.iu + dt * ((1.0 - p.phi_ihr - p.phi_ihd) * i_out - iu_out),
        x.hr + dt * (p.phi_ihr * i_out - hr_out),
        x.hd + dt * (p.phi_ihd * i_out - hd_out),
        x.rd + dt * hr_out,
        x.ru + dt * iu_out,
        x.d + dt * hd_out,
    ];
    let mut out = [0.0; 9];
    for (k, v) in next.into_iter().enumerate() {
        out[k] = clamp_small_negative(ChinaState::LABELS[k], v, p.population)?;
    }
    Ok(ChinaState::from_array(out))
}

/// One calendar day: `substeps` Euler steps with the control held fixed.
pub fn china_step_day(x: &ChinaState, u: f64, p: &ChinaParams) -> Result<ChinaState, DynamicsError> {
    let mut state = *x;
    for _ in 0..p.substeps {
        state = euler_substep(&state, u, p)?;
    }
    Ok(state)
}
