//! Eight-compartment model (S, E, Im, I, R, H, Hc, D) of the Metropolitan
//! Region of Chile, updated once per day.
//!
//! Hospitalized compartments are treated as isolated and do not contribute
//! to the contagion rate. Detected infected (`I`) are already isolated, so
//! the NPI acts only on `E` and `Im`; `delta_hat` is the fraction of
//! detected infected that still transmit.

use super::{check_shape, clamp_small_negative, DynamicsError, ModelKind, StateVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChileState {
    pub s: f64,
    pub e: f64,
    pub im: f64,
    pub i: f64,
    pub r: f64,
    pub h: f64,
    pub hc: f64,
    pub d: f64,
}

impl ChileState {
    pub const LABELS: [&'static str; 8] = ["S", "E", "Im", "I", "R", "H", "Hc", "D"];

    pub fn to_array(&self) -> [f64; 8] {
        [self.s, self.e, self.im, self.i, self.r, self.h, self.hc, self.d]
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        ChileState { s: v[0], e: v[1], im: v[2], i: v[3], r: v[4], h: v[5], hc: v[6], d: v[7] }
    }

    pub fn total(&self) -> f64 {
        self.to_array().iter().sum()
    }

    /// Everyone susceptible.
    pub fn disease_free(population: f64) -> Self {
        ChileState::from_array([population, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }
}

impl From<ChileState> for StateVec {
    fn from(s: ChileState) -> Self {
        StateVec::new(ModelKind::Chile8, s.to_array().to_vec())
    }
}

impl TryFrom<&StateVec> for ChileState {
    type Error = DynamicsError;

    fn try_from(x: &StateVec) -> Result<Self, Self::Error> {
        check_shape(x, ModelKind::Chile8, 8)?;
        let v = x.values();
        Ok(ChileState::from_array([v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]]))
    }
}

/// Daily rates (1/day) and branching fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChileParams {
    pub beta_e: f64,
    pub beta_im: f64,
    pub beta_i: f64,
    pub gamma_e: f64,
    pub gamma_im: f64,
    pub gamma_i: f64,
    pub gamma_h: f64,
    pub gamma_hc: f64,
    /// Fraction of exposed that become detected (symptomatic) infected.
    pub phi_ei: f64,
    pub phi_ir: f64,
    pub phi_hr: f64,
    pub phi_hd: f64,
    pub phi_hcd: f64,
    pub delta_hat: f64,
    pub population: f64,
}

impl ChileParams {
    /// Posterior means of the calibration for the Metropolitan Region,
    /// starting September 21, 2020.
    pub fn metropolitan_region() -> Self {
        ChileParams {
            beta_e: 0.04,
            beta_im: 0.04,
            beta_i: 0.2,
            gamma_e: 0.39,
            gamma_im: 0.17,
            gamma_i: 0.17,
            gamma_h: 0.17,
            gamma_hc: 0.14,
            phi_ei: 0.6,
            phi_ir: 0.61,
            phi_hr: 0.61,
            phi_hd: 0.12,
            phi_hcd: 0.12,
            delta_hat: 0.2,
            population: 7_112_808.0,
        }
    }

    /// Returns every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let rates = [
            ("beta_E", self.beta_e),
            ("beta_Im", self.beta_im),
            ("beta_I", self.beta_i),
            ("gamma_E", self.gamma_e),
            ("gamma_Im", self.gamma_im),
            ("gamma_I", self.gamma_i),
            ("gamma_H", self.gamma_h),
            ("gamma_Hc", self.gamma_hc),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be a positive rate (got {v})"));
            }
        }
        for (name, v) in &rates[3..] {
            if *v > 1.0 {
                out.push(format!("{name} = {v} exceeds 1/day; a one-day step would overshoot"));
            }
        }
        let fractions = [
            ("phi_EI", self.phi_ei),
            ("phi_IR", self.phi_ir),
            ("phi_HR", self.phi_hr),
            ("phi_HD", self.phi_hd),
            ("phi_HcD", self.phi_hcd),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("{name} must lie in [0, 1] (got {v})"));
            }
        }
        if self.phi_hr + self.phi_hd > 1.0 {
            out.push(format!(
                "phi_HR + phi_HD must not exceed 1 (got {})",
                self.phi_hr + self.phi_hd
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

/// Controlled contagion rate (1/day).
pub fn chile_contagion_rate(x: &ChileState, u: f64, p: &ChileParams) -> Result<f64, DynamicsError> {
    let living = p.population - x.d;
    if living <= 0.0 {
        return Err(DynamicsError::DegeneratePopulation(living));
    }
    let undetected = (1.0 - u) * (p.beta_e * x.e + p.beta_im * x.im);
    let detected = p.delta_hat * p.beta_i * x.i;
    Ok((undetected + detected) / living)
}

/// One day of the difference equations.
pub fn chile_step(x: &ChileState, u: f64, p: &ChileParams) -> Result<ChileState, DynamicsError> {
    let infections = chile_contagion_rate(x, u, p)? * x.s;
    let e_out = p.gamma_e * x.e;
    let im_out = p.gamma_im * x.im;
    let i_out = p.gamma_i * x.i;
    let h_out = p.gamma_h * x.h;
    let hc_out = p.gamma_hc * x.hc;

    let next = [
        x.s - infections,
        x.e + infections - e_out,
        x.im + (1.0 - p.phi_ei) * e_out - im_out,
        x.i + p.phi_ei * e_out - i_out,
        x.r + im_out + p.phi_ir * i_out + p.phi_hr * h_out,
        x.h + (1.0 - p.phi_ir) * i_out + (1.0 - p.phi_hcd) * hc_out - h_out,
        x.hc + (1.0 - p.phi_hr - p.phi_hd) * h_out - hc_out,
        x.d + p.phi_hd * h_out + p.phi_hcd * hc_out,
    ];
    let mut out = [0.0; 8];
    for (k, v) in next.into_iter().enumerate() {
        out[k] = clamp_small_negative(ChileState::LABELS[k], v, p.population)?;
    }
    Ok(ChileState::from_array(out))
}
