//! Sensor parameters, validation and the squeezing scenarios.
//!
//! All rates are amplitude half-widths in rad/s (or in units of the coupling
//! rate `kappa_prime` when [`Units::KappaPrime`] is selected). Spectral
//! densities use the double-sided convention in which a vacuum quadrature has
//! density 1/2.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit convention for every rate stored in [`SensorParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Rates measured in units of the coupling half-bandwidth; `kappa_prime` must be 1.
    #[default]
    KappaPrime,
    /// Rates in rad/s.
    Si,
}

/// Physical parameters of the sensor.
///
/// The intracavity parametric drive enters only through its two quadrature
/// components `k_c = k cos(phi)` and `k_s = k sin(phi)`; use
/// [`SensorParams::with_gain_phase`] to set them from magnitude and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    /// Coupling part of the half-bandwidth.
    pub kappa_prime: f64,
    /// Intrinsic-loss part of the half-bandwidth.
    pub kappa_double_prime: f64,
    /// Output-path quantum efficiency in (0, 1].
    pub eta: f64,
    /// Mean intracavity photon number N = beta^2.
    pub n_photons: f64,
    /// Self-phase modulation factor, rate per photon.
    pub gamma_spm: f64,
    /// Input squeeze factor r; the measured input quadrature has density e^{-2r}/2.
    pub r_squeeze: f64,
    pub k_c: f64,
    pub k_s: f64,
    #[serde(default)]
    pub units: Units,
}

impl SensorParams {
    /// Dimensionless parameter set of the reference plots: kappa' = 10 kappa'',
    /// eta = 0.7, e^{2r} = 30, N = 1, no Kerr term and no internal drive.
    pub fn fig2() -> Self {
        SensorParams {
            kappa_prime: 1.0,
            kappa_double_prime: 0.1,
            eta: 0.7,
            n_photons: 1.0,
            gamma_spm: 0.0,
            r_squeeze: 30f64.ln() / 2.0,
            k_c: 0.0,
            k_s: 0.0,
            units: Units::KappaPrime,
        }
    }

    /// Lossless, unsqueezed cavity with kappa' = 1 and N = 1.
    pub fn lossless() -> Self {
        SensorParams {
            kappa_prime: 1.0,
            kappa_double_prime: 0.0,
            eta: 1.0,
            n_photons: 1.0,
            gamma_spm: 0.0,
            r_squeeze: 0.0,
            k_c: 0.0,
            k_s: 0.0,
            units: Units::KappaPrime,
        }
    }

    pub fn with_squeeze_db(mut self, db: f64) -> Self {
        self.r_squeeze = squeeze_factor_from_db(db);
        self
    }

    pub fn with_gain_phase(mut self, k: f64, phi: f64) -> Self {
        self.k_c = k * phi.cos();
        self.k_s = k * phi.sin();
        self
    }

    /// Sets `k_s` to the value that cancels self-phase modulation.
    pub fn with_spm_cancelled(mut self) -> Self {
        self.k_s = spm_cancelling_ks(self.gamma_spm, self.n_photons);
        self
    }

    pub fn validate(self) -> Result<ValidatedParams> {
        ValidatedParams::new(self)
    }
}

/// Parameters that passed [`SensorParams::validate`], with the total
/// half-bandwidth and the loss factor precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "SensorParams")]
pub struct ValidatedParams {
    raw: SensorParams,
    kappa: f64,
    eps_sq: f64,
}

impl From<ValidatedParams> for SensorParams {
    fn from(p: ValidatedParams) -> Self {
        p.raw
    }
}

impl Deref for ValidatedParams {
    type Target = SensorParams;

    fn deref(&self) -> &SensorParams {
        &self.raw
    }
}

fn require_finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::range(field, format!("{value} is not finite")))
    }
}

impl ValidatedParams {
    fn new(raw: SensorParams) -> Result<Self> {
        let fields = [
            ("kappa_prime", raw.kappa_prime),
            ("kappa_double_prime", raw.kappa_double_prime),
            ("eta", raw.eta),
            ("n_photons", raw.n_photons),
            ("gamma_spm", raw.gamma_spm),
            ("r_squeeze", raw.r_squeeze),
            ("k_c", raw.k_c),
            ("k_s", raw.k_s),
        ];
        for (name, value) in fields {
            require_finite(name, value)?;
        }
        if raw.kappa_prime <= 0.0 {
            return Err(Error::range("kappa_prime", "must be > 0"));
        }
        if raw.units == Units::KappaPrime && raw.kappa_prime != 1.0 {
            return Err(Error::range(
                "kappa_prime",
                "must equal 1 when rates are given in units of kappa_prime",
            ));
        }
        if raw.kappa_double_prime < 0.0 {
            return Err(Error::range("kappa_double_prime", "must be >= 0"));
        }
        if !(raw.eta > 0.0 && raw.eta <= 1.0) {
            return Err(Error::range("eta", format!("{} not in (0, 1]", raw.eta)));
        }
        if raw.n_photons <= 0.0 {
            return Err(Error::range("n_photons", "must be > 0"));
        }
        if raw.gamma_spm < 0.0 {
            return Err(Error::range("gamma_spm", "must be >= 0"));
        }
        if raw.r_squeeze < 0.0 {
            return Err(Error::range("r_squeeze", "must be >= 0"));
        }
        let kappa = raw.kappa_prime + raw.kappa_double_prime;
        if raw.k_c.abs() >= kappa {
            return Err(Error::range(
                "k_c",
                format!("|k_c| = {} must be below kappa = {kappa} (unstable)", raw.k_c.abs()),
            ));
        }
        Ok(ValidatedParams {
            raw,
            kappa,
            eps_sq: (1.0 - raw.eta) / raw.eta,
        })
    }

    pub fn raw(&self) -> &SensorParams {
        &self.raw
    }

    /// Total half-bandwidth kappa' + kappa''.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Output loss factor (1 - eta) / eta.
    pub fn eps_sq(&self) -> f64 {
        self.eps_sq
    }

    /// e^{-2r}: input noise of the measured quadrature relative to vacuum.
    pub fn squeeze_gain(&self) -> f64 {
        (-2.0 * self.raw.r_squeeze).exp()
    }

    /// Classical intracavity amplitude, taken real and positive.
    pub fn beta(&self) -> f64 {
        self.raw.n_photons.sqrt()
    }

    /// Residual SPM coupling k_s - 2 gamma N in the sine-quadrature equation.
    pub fn spm_residual(&self) -> f64 {
        self.raw.k_s - spm_cancelling_ks(self.raw.gamma_spm, self.raw.n_photons)
    }

    pub fn is_spm_cancelled(&self) -> bool {
        self.spm_residual().abs() <= 1e-12 * self.kappa
    }

    pub(crate) fn require_spm_cancelled(&self) -> Result<()> {
        if self.is_spm_cancelled() {
            Ok(())
        } else {
            Err(Error::SpmNotCancelled {
                k_s: self.raw.k_s,
                required: spm_cancelling_ks(self.raw.gamma_spm, self.raw.n_photons),
            })
        }
    }

    /// Returns a copy with a different internal gain, re-validated.
    pub fn with_kc(&self, k_c: f64) -> Result<Self> {
        SensorParams { k_c, ..self.raw }.validate()
    }

    pub fn with_squeeze(&self, r_squeeze: f64) -> Result<Self> {
        SensorParams {
            r_squeeze,
            ..self.raw
        }
        .validate()
    }

    pub fn map(&self, f: impl FnOnce(&mut SensorParams)) -> Result<Self> {
        let mut raw = self.raw;
        f(&mut raw);
        raw.validate()
    }
}

/// r such that the measured-quadrature noise is reduced by `db` decibels.
pub fn squeeze_factor_from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0).ln()
}

pub fn squeeze_db_from_factor(r: f64) -> f64 {
    20.0 * r.exp().log10()
}

/// Converts an intrinsic quality factor into (kappa', kappa'') in rad/s.
///
/// `Q = omega_0 / (2 kappa'')` and `kappa' = coupling_ratio * kappa''`.
pub fn rates_from_quality(omega_0: f64, q_intrinsic: f64, coupling_ratio: f64) -> Result<(f64, f64)> {
    for (field, value) in [
        ("omega_0", omega_0),
        ("q_intrinsic", q_intrinsic),
        ("coupling_ratio", coupling_ratio),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::range(field, format!("{value} must be positive and finite")));
        }
    }
    let kappa_double_prime = omega_0 / (2.0 * q_intrinsic);
    Ok((coupling_ratio * kappa_double_prime, kappa_double_prime))
}

/// Angular optical frequency for a vacuum wavelength in metres.
pub fn optical_frequency(wavelength_m: f64) -> f64 {
    const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength_m
}

/// Sine-quadrature parametric gain that cancels self-phase modulation: 2 gamma N.
pub fn spm_cancelling_ks(gamma_spm: f64, n_photons: f64) -> f64 {
    2.0 * gamma_spm * n_photons
}

/// Offset of the rotating-frame frequency from the bare resonance, -gamma N.
pub fn detuning_offset(gamma_spm: f64, n_photons: f64) -> f64 {
    -gamma_spm * n_photons
}

/// Which closed-form spectrum applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k_c", rename_all = "snake_case")]
pub enum Scenario {
    /// Coherent input, no internal drive (r = 0, k_c = 0).
    NoSqueeze,
    /// Squeezed input, no internal drive (k_c = 0).
    InputSqueeze,
    /// Squeezed input plus the optimal internal gain.
    DoubleSqueezeOptimal,
    /// Squeezed input with a user-chosen internal gain.
    Custom(f64),
}

impl Scenario {
    pub const CLOSED_FORMS: [Scenario; 3] = [
        Scenario::NoSqueeze,
        Scenario::InputSqueeze,
        Scenario::DoubleSqueezeOptimal,
    ];

    /// Applies the scenario's constraints to `params`.
    ///
    /// `NoSqueeze` zeroes r and k_c, `InputSqueeze` zeroes k_c,
    /// `DoubleSqueezeOptimal` sets k_c to the closed-form optimum for the
    /// remaining parameters.
    pub fn materialize(&self, params: &ValidatedParams) -> Result<ValidatedParams> {
        match *self {
            Scenario::NoSqueeze => params.map(|p| {
                p.r_squeeze = 0.0;
                p.k_c = 0.0;
            }),
            Scenario::InputSqueeze => params.with_kc(0.0),
            Scenario::DoubleSqueezeOptimal => {
                let base = params.with_kc(0.0)?;
                base.with_kc(crate::optimize::optimal_kc(&base))
            }
            Scenario::Custom(k_c) => params.with_kc(k_c),
        }
    }

    /// Checks that `params` already satisfy the scenario's constraints.
    pub fn check(&self, params: &ValidatedParams) -> Result<()> {
        let mismatch = |reason: String| Error::ScenarioMismatch {
            scenario: self.to_string(),
            reason,
        };
        match *self {
            Scenario::NoSqueeze => {
                if params.r_squeeze != 0.0 || params.k_c != 0.0 {
                    return Err(mismatch(format!(
                        "requires r = 0 and k_c = 0, got r = {}, k_c = {}",
                        params.r_squeeze, params.k_c
                    )));
                }
            }
            Scenario::InputSqueeze => {
                if params.k_c != 0.0 {
                    return Err(mismatch(format!("requires k_c = 0, got {}", params.k_c)));
                }
            }
            Scenario::DoubleSqueezeOptimal => {
                let optimum = crate::optimize::optimal_kc(params);
                if params.k_c != 0.0 && (params.k_c - optimum).abs() > 1e-12 * params.kappa() {
                    return Err(mismatch(format!(
                        "k_c = {} differs from the optimum {optimum}",
                        params.k_c
                    )));
                }
            }
            Scenario::Custom(k_c) => {
                if params.k_c != 0.0 && params.k_c != k_c {
                    return Err(mismatch(format!("k_c = {} differs from {k_c}", params.k_c)));
                }
            }
        }
        Ok(())
    }

    pub fn slug(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::NoSqueeze => f.write_str("no-squeeze"),
            Scenario::InputSqueeze => f.write_str("input-squeeze"),
            Scenario::DoubleSqueezeOptimal => f.write_str("double-squeeze"),
            Scenario::Custom(k) => write!(f, "custom={k}"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-squeeze" | "none" => Ok(Scenario::NoSqueeze),
            "input-squeeze" | "input" => Ok(Scenario::InputSqueeze),
            "double-squeeze" | "double" | "double-squeeze-optimal" => Ok(Scenario::DoubleSqueezeOptimal),
            other => {
                let k = other
                    .strip_prefix("custom=")
                    .or_else(|| other.strip_prefix("custom:"))
                    .ok_or_else(|| Error::Parse(format!("unknown scenario `{other}`")))?;
                k.parse::<f64>()
                    .map(Scenario::Custom)
                    .map_err(|e| Error::Parse(format!("bad custom k_c `{k}`: {e}")))
            }
        }
    }
}

/// On-disk JSON parameter file.
///
/// Either `k_s` is given explicitly or `auto_spm_cancel` is true, in which
/// case `k_s = 2 gamma N`. Squeezing is given as `squeeze_db` or as the
/// squeeze factor `r_squeeze`, not both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub kappa_prime: f64,
    pub kappa_double_prime: f64,
    pub eta: f64,
    pub n_photons: f64,
    #[serde(default)]
    pub gamma_spm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_squeeze: Option<f64>,
    #[serde(default)]
    pub k_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_spm_cancel: Option<bool>,
    #[serde(default)]
    pub units: Units,
}

impl ParamFile {
    pub fn into_params(self) -> Result<ValidatedParams> {
        let auto = self.auto_spm_cancel.unwrap_or(false);
        let k_s = match (self.k_s, auto) {
            (Some(_), true) => {
                return Err(Error::Parse(
                    "give either `k_s` or `auto_spm_cancel: true`, not both".into(),
                ))
            }
            (Some(k_s), false) => k_s,
            (None, true) => spm_cancelling_ks(self.gamma_spm, self.n_photons),
            (None, false) => 0.0,
        };
        let r_squeeze = match (self.squeeze_db, self.r_squeeze) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse("give either `squeeze_db` or `r_squeeze`, not both".into()))
            }
            (Some(db), None) if db < 0.0 => return Err(Error::range("squeeze_db", "must be >= 0")),
            (Some(db), None) => squeeze_factor_from_db(db),
            (None, r) => r.unwrap_or(0.0),
        };
        SensorParams {
            kappa_prime: self.kappa_prime,
            kappa_double_prime: self.kappa_double_prime,
            eta: self.eta,
            n_photons: self.n_photons,
            gamma_spm: self.gamma_spm,
            r_squeeze,
            k_c: self.k_c,
            k_s,
            units: self.units,
        }
        .validate()
    }

    pub fn from_params(p: &SensorParams) -> Self {
        ParamFile {
            kappa_prime: p.kappa_prime,
            kappa_double_prime: p.kappa_double_prime,
            eta: p.eta,
            n_photons: p.n_photons,
            gamma_spm: p.gamma_spm,
            squeeze_db: None,
            r_squeeze: Some(p.r_squeeze),
            k_c: p.k_c,
            k_s: Some(p.k_s),
            auto_spm_cancel: None,
            units: p.units,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fig2_params_validate() {
        let p = SensorParams::fig2().validate().unwrap();
        assert_relative_eq!(p.kappa(), 1.1, max_relative = 1e-15);
        assert_relative_eq!(p.eps_sq(), 3.0 / 7.0, max_relative = 1e-15);
        assert_relative_eq!(1.0 / p.squeeze_gain(), 30.0, max_relative = 1e-14);
    }

    #[test]
    fn lossless_detection_has_no_loss_factor() {
        let p = SensorParams::lossless().validate().unwrap();
        assert_eq!(p.eps_sq(), 0.0);
    }

    #[test]
    fn eps_sq_reference_points_and_monotone() {
        let eps = |eta: f64| {
            SensorParams { eta, ..SensorParams::lossless() }
                .validate()
                .unwrap()
                .eps_sq()
        };
        assert_eq!(eps(0.5), 1.0);
        let mut last = f64::INFINITY;
        for i in 1..=100 {
            let e = eps(i as f64 / 100.0);
            assert!(e < last);
            last = e;
        }
    }

    #[test]
    fn unstable_gain_is_rejected() {
        let err = SensorParams { k_c: 1.2, ..SensorParams::fig2() }.validate().unwrap_err();
        assert!(matches!(err, Error::Range { field: "k_c", .. }), "{err}");
        let err = SensorParams { k_c: -1.1, ..SensorParams::fig2() }.validate().unwrap_err();
        assert!(matches!(err, Error::Range { field: "k_c", .. }));
    }

    #[test]
    fn range_errors_name_the_field() {
        let cases: [(SensorParams, &str); 6] = [
            (SensorParams { eta: 0.0, ..SensorParams::fig2() }, "eta"),
            (SensorParams { eta: 1.5, ..SensorParams::fig2() }, "eta"),
            (SensorParams { kappa_double_prime: -0.1, ..SensorParams::fig2() }, "kappa_double_prime"),
            (SensorParams { n_photons: 0.0, ..SensorParams::fig2() }, "n_photons"),
            (SensorParams { r_squeeze: -1.0, ..SensorParams::fig2() }, "r_squeeze"),
            (SensorParams { kappa_prime: 2.0, ..SensorParams::fig2() }, "kappa_prime"),
        ];
        for (params, expected) in cases {
            match params.validate() {
                Err(Error::Range { field, .. }) => assert_eq!(field, expected),
                other => panic!("expected range error on {expected}, got {other:?}"),
            }
        }
        let si = SensorParams { kappa_prime: 2.0, units: Units::Si, ..SensorParams::fig2() };
        assert!(si.validate().is_ok());
    }

    #[test]
    fn quality_factor_conversion() {
        let (kp, kpp) = rates_from_quality(2e15, 1e9, 10.0).unwrap();
        assert_relative_eq!(kpp, 1e6, max_relative = 1e-15);
        assert_relative_eq!(kp, 1e7, max_relative = 1e-15);
        assert_relative_eq!(kp / (2.0 * std::f64::consts::PI), 1.591_549_430_9e6, max_relative = 1e-10);

        let (_, kpp10) = rates_from_quality(2e15, 1e10, 10.0).unwrap();
        assert_relative_eq!(kpp / kpp10, 10.0, max_relative = 1e-15);

        assert!(matches!(rates_from_quality(0.0, 1e9, 10.0), Err(Error::Range { field: "omega_0", .. })));
        assert!(matches!(rates_from_quality(1.0, -1.0, 10.0), Err(Error::Range { field: "q_intrinsic", .. })));
    }

    #[test]
    fn quality_factor_at_1064nm() {
        // 2 pi c / 1064 nm = 1.770349217e15 rad/s
        let omega_0 = optical_frequency(1064e-9);
        assert_relative_eq!(omega_0, 1.770_349_217_395_54e15, max_relative = 1e-12);
        let (kp, _) = rates_from_quality(omega_0, 1e9, 10.0).unwrap();
        assert_relative_eq!(kp / (2.0 * std::f64::consts::PI), 1.408_799_144_7e6, max_relative = 1e-9);
    }

    #[test]
    fn spm_helpers() {
        assert_eq!(spm_cancelling_ks(0.0, 1.0), 0.0);
        assert_relative_eq!(spm_cancelling_ks(0.05, 4.0), 0.4, max_relative = 1e-15);
        assert_eq!(detuning_offset(0.0, 1.0), 0.0);
        assert_relative_eq!(detuning_offset(0.05, 4.0), -0.2, max_relative = 1e-15);
        for (g, n) in [(0.05, 4.0), (1.3, 0.2), (0.0, 7.0)] {
            assert_eq!(detuning_offset(g, n), -spm_cancelling_ks(g, n) / 2.0);
        }
    }

    #[test]
    fn squeeze_db_round_trip() {
        assert_relative_eq!((2.0 * squeeze_factor_from_db(15.0)).exp(), 10f64.powf(1.5), max_relative = 1e-14);
        let db = squeeze_db_from_factor(30f64.ln() / 2.0);
        assert_relative_eq!(db, 10.0 * 30f64.log10(), max_relative = 1e-14);
        assert_relative_eq!(squeeze_factor_from_db(db), 30f64.ln() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn gain_phase_constructor() {
        let p = SensorParams::fig2().with_gain_phase(0.5, std::f64::consts::FRAC_PI_2);
        assert!(p.k_c.abs() < 1e-16);
        assert_relative_eq!(p.k_s, 0.5);
    }

    #[test]
    fn scenario_materialization() {
        let p = SensorParams { k_c: 0.3, ..SensorParams::fig2() }.validate().unwrap();
        let none = Scenario::NoSqueeze.materialize(&p).unwrap();
        assert_eq!((none.r_squeeze, none.k_c), (0.0, 0.0));
        let input = Scenario::InputSqueeze.materialize(&p).unwrap();
        assert_eq!(input.k_c, 0.0);
        assert_eq!(input.r_squeeze, p.r_squeeze);
        let double = Scenario::DoubleSqueezeOptimal.materialize(&p).unwrap();
        assert_eq!(double.k_c, crate::optimize::optimal_kc(&input));
        assert!(Scenario::DoubleSqueezeOptimal.check(&double).is_ok());
        assert!(Scenario::NoSqueeze.check(&p).is_err());
        assert!(Scenario::InputSqueeze.check(&p).is_err());
        assert!(Scenario::Custom(0.3).check(&p).is_ok());
    }

    #[test]
    fn scenario_names_parse() {
        for s in Scenario::CLOSED_FORMS {
            assert_eq!(s.to_string().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!("custom=-0.5".parse::<Scenario>().unwrap(), Scenario::Custom(-0.5));
        assert!("squeezy".parse::<Scenario>().is_err());
    }

    #[test]
    fn param_file_schema() {
        let text = r#"{"kappa_prime": 1, "kappa_double_prime": 0.1, "eta": 0.7,
            "n_photons": 4, "gamma_spm": 0.05, "squeeze_db": 15, "k_c": 0,
            "auto_spm_cancel": true, "units": "kappa_prime"}"#;
        let p = ParamFile::from_json(text).unwrap().into_params().unwrap();
        assert_relative_eq!(p.k_s, 0.4, max_relative = 1e-15);
        assert!(p.is_spm_cancelled());

        let both = r#"{"kappa_prime": 1, "kappa_double_prime": 0.1, "eta": 0.7,
            "n_photons": 4, "k_s": 0.1, "auto_spm_cancel": true}"#;
        assert!(ParamFile::from_json(both).unwrap().into_params().is_err());

        let unknown = r#"{"kappa_prime": 1, "kappa_double_prime": 0.1, "eta": 0.7, "n_photons": 1, "bogus": 1}"#;
        assert!(ParamFile::from_json(unknown).is_err());

        let si = r#"{"kappa_prime": 1e7, "kappa_double_prime": 1e6, "eta": 0.7, "n_photons": 1e6, "units": "si"}"#;
        let p = ParamFile::from_json(si).unwrap().into_params().unwrap();
        assert_eq!(p.units, Units::Si);
    }

    #[test]
    fn param_file_round_trip() {
        let p = SensorParams::fig2().validate().unwrap();
        let back = ParamFile::from_params(&p).into_params().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn squeeze_given_once() {
        let r = r#"{"kappa_prime": 1, "kappa_double_prime": 0, "eta": 1, "n_photons": 1, "r_squeeze": 0.5}"#;
        assert_eq!(ParamFile::from_json(r).unwrap().into_params().unwrap().r_squeeze, 0.5);
        let both = r#"{"kappa_prime": 1, "kappa_double_prime": 0, "eta": 1, "n_photons": 1,
            "r_squeeze": 0.5, "squeeze_db": 3}"#;
        assert!(ParamFile::from_json(both).unwrap().into_params().is_err());
    }
}
