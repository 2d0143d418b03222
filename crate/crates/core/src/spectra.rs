//! Closed-form spectral densities for a sensor with cancelled self-phase
//! modulation.
//!
//! With `e = e^{-2r}`, `eps2 = (1 - eta)/eta` and `kappa = kappa' + kappa''`
//! the signal-referred measurement noise is
//!
//! ```text
//! S(Ω) = [ (e + eps2) Ω² + (kappa' - kappa'' - k_c)² e + 4 kappa' kappa''
//!          + eps2 (kappa + k_c)² ] / (8 kappa' N)
//! ```
//!
//! and each scenario is a specialisation of it.

use crate::curve::{check_grid, CurveKind, SpectrumCurve};
use crate::error::{Error, Result};
use crate::params::{Scenario, ValidatedParams};

/// Sum-noise density S_w(Ω) of the detected sine quadrature.
pub fn sum_noise_psd(params: &ValidatedParams, omega: f64) -> Result<f64> {
    params.require_spm_cancelled()?;
    let (kp, kpp) = (params.kappa_prime, params.kappa_double_prime);
    let e = params.squeeze_gain();
    let w2 = omega * omega;
    let detune = kp - kpp - params.k_c;
    let decay = params.kappa() + params.k_c;
    let ratio = ((w2 + detune * detune) * e + 4.0 * kp * kpp) / (w2 + decay * decay);
    Ok(0.5 * params.eta * (ratio + params.eps_sq()))
}

/// Signal-referred noise S(Ω) = S_w / |G|^2 for arbitrary stable k_c.
pub fn measurement_psd_raw(params: &ValidatedParams, omega: f64) -> Result<f64> {
    params.require_spm_cancelled()?;
    if params.k_c.abs() >= params.kappa() {
        return Err(Error::range("k_c", "|k_c| must be below kappa"));
    }
    Ok(measurement_psd_at(params, params.k_c, omega))
}

/// Unchecked evaluation at an explicit internal gain; the objective of the
/// numeric k_c search.
pub(crate) fn measurement_psd_at(params: &ValidatedParams, k_c: f64, omega: f64) -> f64 {
    let (kp, kpp) = (params.kappa_prime, params.kappa_double_prime);
    let e = params.squeeze_gain();
    let eps2 = params.eps_sq();
    let detune = kp - kpp - k_c;
    let decay = params.kappa() + k_c;
    ((e + eps2) * omega * omega + detune * detune * e + 4.0 * kp * kpp + eps2 * decay * decay)
        / (8.0 * kp * params.n_photons)
}

/// Coherent input without internal drive: (Ω² + kappa²) / (8 kappa' eta N).
pub fn no_squeeze_psd(params: &ValidatedParams, omega: f64) -> f64 {
    let kappa = params.kappa();
    (omega * omega + kappa * kappa) / (8.0 * params.kappa_prime * params.eta * params.n_photons)
}

/// Squeezed input without internal drive.
pub fn input_squeeze_psd(params: &ValidatedParams, omega: f64) -> f64 {
    let (kp, kpp) = (params.kappa_prime, params.kappa_double_prime);
    let e = params.squeeze_gain();
    let eps2 = params.eps_sq();
    let kappa = params.kappa();
    let inner = ((e + eps2) * omega * omega + (kp - kpp) * (kp - kpp) * e + eps2 * kappa * kappa)
        / (4.0 * kp);
    (inner + kpp) / (2.0 * params.n_photons)
}

/// Squeezed input with the optimal internal gain.
pub fn double_squeeze_psd(params: &ValidatedParams, omega: f64) -> f64 {
    let (kp, kpp) = (params.kappa_prime, params.kappa_double_prime);
    let e = params.squeeze_gain();
    let eps2 = params.eps_sq();
    let anti = (2.0 * params.r_squeeze).exp();
    ((e + eps2) * omega * omega / (4.0 * kp) + eps2 * kp / (1.0 + eps2 * anti) + kpp)
        / (2.0 * params.n_photons)
}

/// Dispatches to the closed form matching `scenario`.
///
/// The parameters must already satisfy the scenario (see
/// [`Scenario::materialize`]); `DoubleSqueezeOptimal` also accepts k_c = 0
/// and evaluates the optimum regardless.
pub fn closed_form_psd(scenario: Scenario, params: &ValidatedParams, omega: f64) -> Result<f64> {
    params.require_spm_cancelled()?;
    scenario.check(params)?;
    Ok(match scenario {
        Scenario::NoSqueeze => no_squeeze_psd(params, omega),
        Scenario::InputSqueeze => input_squeeze_psd(params, omega),
        Scenario::DoubleSqueezeOptimal => double_squeeze_psd(params, omega),
        Scenario::Custom(k_c) => measurement_psd_raw(&params.with_kc(k_c)?, omega)?,
    })
}

/// Fourier form of the shot-noise limit, |Ω| / (4N).
pub fn shot_noise_limit(n_photons: f64, omega: f64) -> f64 {
    omega.abs() / (4.0 * n_photons)
}

pub fn snl(params: &ValidatedParams, omega: f64) -> f64 {
    shot_noise_limit(params.n_photons, omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LosslessKind {
    InputOnly,
    Double,
}

/// Closed forms for a resonator without intrinsic loss (kappa'' = 0).
pub fn lossless_resonator_psd(kind: LosslessKind, params: &ValidatedParams, omega: f64) -> Result<f64> {
    if params.kappa_double_prime != 0.0 {
        return Err(Error::range("kappa_double_prime", "lossless forms require kappa'' = 0"));
    }
    let kappa = params.kappa();
    let e = params.squeeze_gain();
    let eps2 = params.eps_sq();
    let w2 = omega * omega;
    let scale = 1.0 / (8.0 * kappa * params.n_photons);
    Ok(match kind {
        LosslessKind::InputOnly => scale * (e + eps2) * (w2 + kappa * kappa),
        LosslessKind::Double => {
            scale * ((e + eps2) * w2 + 4.0 * kappa * kappa * eps2 * e / (e + eps2))
        }
    })
}

/// Suppression of losses placed after an output-path anti-squeezer of factor R.
pub fn apply_external_antisqueeze(eps_ext_sq: f64, r_anti: f64) -> f64 {
    eps_ext_sq * (-2.0 * r_anti).exp()
}

/// Output efficiency split into a stage before the anti-squeezer (coupling
/// optics) and one after it (detection). The product is the total `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageLoss {
    pub eta_coupling: f64,
    pub eta_detection: f64,
}

impl TwoStageLoss {
    pub fn new(eta_coupling: f64, eta_detection: f64) -> Result<Self> {
        for (field, v) in [("eta_coupling", eta_coupling), ("eta_detection", eta_detection)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::range(field, format!("{v} not in (0, 1]")));
            }
        }
        Ok(TwoStageLoss { eta_coupling, eta_detection })
    }

    pub fn eta(&self) -> f64 {
        self.eta_coupling * self.eta_detection
    }

    /// Loss factor of the coupling stage, untouched by the anti-squeezer.
    pub fn eps_coupling_sq(&self) -> f64 {
        (1.0 - self.eta_coupling) / self.eta_coupling
    }

    /// Loss factor contributed by the detection stage, referred to the cavity output.
    pub fn eps_external_sq(&self) -> f64 {
        (1.0 - self.eta_detection) / (self.eta_coupling * self.eta_detection)
    }

    /// Total loss factor with an anti-squeezer of factor `r_anti` between the stages.
    pub fn eps_sq(&self, r_anti: f64) -> f64 {
        self.eps_coupling_sq() + apply_external_antisqueeze(self.eps_external_sq(), r_anti)
    }

    /// Equivalent single-stage efficiency 1 / (1 + eps^2).
    pub fn effective_eta(&self, r_anti: f64) -> f64 {
        1.0 / (1.0 + self.eps_sq(r_anti))
    }
}

/// Closed-form curve for `scenario` after materializing it on `params`.
pub fn scenario_curve(scenario: Scenario, params: &ValidatedParams, grid: &[f64]) -> Result<SpectrumCurve> {
    check_grid(grid)?;
    let p = scenario.materialize(params)?;
    let values = grid
        .iter()
        .map(|&w| closed_form_psd(scenario, &p, w))
        .collect::<Result<Vec<_>>>()?;
    SpectrumCurve::new(grid.to_vec(), values, CurveKind::Scenario(scenario), &p)
}

pub fn snl_curve(params: &ValidatedParams, grid: &[f64]) -> Result<SpectrumCurve> {
    check_grid(grid)?;
    let values = grid.iter().map(|&w| snl(params, w)).collect();
    SpectrumCurve::new(grid.to_vec(), values, CurveKind::ShotNoiseLimit, params)
}
