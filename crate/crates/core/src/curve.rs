//! Sampled spectral densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Scenario, SensorParams, ValidatedParams};

/// Header text describing the density convention used by every output.
pub const PSD_CONVENTION: &str = "double-sided; vacuum quadrature density = 1/2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    /// Frequencies divided by kappa', densities multiplied by N / kappa'.
    KappaPrimeOverN,
}

/// What a curve represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Signal-referred measurement noise for a squeezing scenario.
    Scenario(Scenario),
    /// Fourier form of the shot-noise limit, |omega| / (4 N).
    ShotNoiseLimit,
    /// Signal-referred density assembled from the general frequency response.
    Response,
    /// Welch estimate from a stochastic run.
    Estimate,
}

impl CurveKind {
    pub fn label(&self) -> String {
        match self {
            CurveKind::Scenario(s) => s.to_string(),
            CurveKind::ShotNoiseLimit => "snl".into(),
            CurveKind::Response => "response".into(),
            CurveKind::Estimate => "estimate".into(),
        }
    }
}

/// Double-sided spectral density sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    frequencies: Vec<f64>,
    values: Vec<f64>,
    normalization: Normalization,
    kind: CurveKind,
    params: SensorParams,
}

impl SpectrumCurve {
    pub fn new(
        frequencies: Vec<f64>,
        values: Vec<f64>,
        kind: CurveKind,
        params: &ValidatedParams,
    ) -> Result<Self> {
        check_grid(&frequencies)?;
        if values.len() != frequencies.len() {
            return Err(Error::Grid(format!(
                "{} values for {} frequencies",
                values.len(),
                frequencies.len()
            )));
        }
        let allow_zero = kind == CurveKind::ShotNoiseLimit;
        if let Some((w, v)) = frequencies
            .iter()
            .zip(&values)
            .find(|(_, v)| !(v.is_finite() && (**v > 0.0 || (allow_zero && **v == 0.0))))
        {
            return Err(Error::Grid(format!("non-positive density {v} at omega = {w}")));
        }
        Ok(SpectrumCurve {
            frequencies,
            values,
            normalization: Normalization::Raw,
            kind,
            params: *params.raw(),
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn params(&self) -> &SensorParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frequencies.iter().copied().zip(self.values.iter().copied())
    }
}

/// Rescales a raw curve to frequencies in units of kappa' and densities in
/// units of kappa' / N.
pub fn normalize_curve(curve: &SpectrumCurve) -> Result<SpectrumCurve> {
    if curve.normalization != Normalization::Raw {
        return Err(Error::DoubleNormalization);
    }
    let kp = curve.params.kappa_prime;
    let n = curve.params.n_photons;
    Ok(SpectrumCurve {
        frequencies: curve.frequencies.iter().map(|w| w / kp).collect(),
        values: curve.values.iter().map(|s| s * n / kp).collect(),
        normalization: Normalization::KappaPrimeOverN,
        ..curve.clone()
    })
}

pub fn denormalize_curve(curve: &SpectrumCurve) -> Result<SpectrumCurve> {
    if curve.normalization != Normalization::KappaPrimeOverN {
        return Err(Error::NotNormalized);
    }
    let kp = curve.params.kappa_prime;
    let n = curve.params.n_photons;
    Ok(SpectrumCurve {
        frequencies: curve.frequencies.iter().map(|w| w * kp).collect(),
        values: curve.values.iter().map(|s| s * kp / n).collect(),
        normalization: Normalization::Raw,
        ..curve.clone()
    })
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("empty frequency grid".into()));
    }
    if let Some(w) = grid.iter().find(|w| !w.is_finite()) {
        return Err(Error::Grid(format!("non-finite frequency {w}")));
    }
    if let Some(pair) = grid.windows(2).find(|p| p[1] <= p[0]) {
        return Err(Error::Grid(format!(
            "grid not strictly increasing at {} -> {}",
            pair[0], pair[1]
        )));
    }
    Ok(())
}

/// `points` evenly spaced values from `min` to `max` inclusive; a single
/// point sits at `min`.
pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        n => {
            let step = (max - min) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { max } else { min + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(params: SensorParams) -> SpectrumCurve {
        let p = params.validate().unwrap();
        SpectrumCurve::new(
            vec![0.0, 0.5, 1.0],
            vec![0.3, 0.2, 0.4],
            CurveKind::Scenario(Scenario::InputSqueeze),
            &p,
        )
        .unwrap()
    }

    #[test]
    fn normalization_is_identity_for_unit_rates() {
        let c = curve(SensorParams::fig2());
        let n = normalize_curve(&c).unwrap();
        assert_eq!(n.values(), c.values());
        assert_eq!(n.frequencies(), c.frequencies());
        assert_eq!(n.normalization(), Normalization::KappaPrimeOverN);
    }

    #[test]
    fn normalization_round_trip() {
        let params = SensorParams {
            kappa_prime: 3.7e6,
            kappa_double_prime: 2.1e5,
            n_photons: 1.3e7,
            units: crate::params::Units::Si,
            ..SensorParams::fig2()
        };
        let c = curve(params);
        let n = normalize_curve(&c).unwrap();
        assert!((n.values()[1] - 0.2 * 1.3e7 / 3.7e6).abs() < 1e-15 * n.values()[1]);
        let back = denormalize_curve(&n).unwrap();
        for ((a, b), (x, y)) in back.iter().zip(c.iter()) {
            assert!((a - x).abs() <= 1e-15 * x.abs().max(1.0));
            assert!((b - y).abs() <= 1e-15 * y);
        }
        assert!(matches!(normalize_curve(&n), Err(Error::DoubleNormalization)));
        assert!(matches!(denormalize_curve(&c), Err(Error::NotNormalized)));
    }

    #[test]
    fn rejects_bad_grids_and_values() {
        let p = SensorParams::fig2().validate().unwrap();
        let kind = CurveKind::Scenario(Scenario::NoSqueeze);
        assert!(SpectrumCurve::new(vec![0.0, 0.0], vec![1.0, 1.0], kind, &p).is_err());
        assert!(SpectrumCurve::new(vec![0.0, 1.0], vec![1.0, 0.0], kind, &p).is_err());
        assert!(SpectrumCurve::new(vec![0.0, 1.0], vec![1.0], kind, &p).is_err());
        assert!(SpectrumCurve::new(vec![0.0, 1.0], vec![0.0, 0.25], CurveKind::ShotNoiseLimit, &p).is_ok());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 4.0, 401);
        assert_eq!(g.len(), 401);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[400], 4.0);
        assert!((g[100] - 1.0).abs() < 1e-15);
        assert_eq!(linspace(1.0, 4.0, 1), vec![1.0]);
    }
}
