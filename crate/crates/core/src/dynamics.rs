//! Linearized quadrature dynamics in the frequency domain.
//!
//! The intracavity quadratures obey `d/dt b + M b = F(t)` with the drift
//! matrix `M` ordered (cosine, sine):
//!
//! ```text
//! M = [[kappa - k_c,         k_s        ],
//!      [k_s - 2 gamma N,     kappa + k_c]]
//! ```
//!
//! and forcing `F_c = sqrt(2 kappa') a_c + sqrt(2 kappa'') v_c`,
//! `F_s = -sqrt(2) beta xi + sqrt(2 kappa') a_s + sqrt(2 kappa'') v_s`.
//! The detected quadrature is
//! `d_s = sqrt(eta) (sqrt(2 kappa') b_s - a_s) + sqrt(1 - eta) u_s`.
//!
//! Nothing here assumes self-phase modulation is cancelled, so the solver
//! doubles as an independent check of the closed forms in [`crate::spectra`].
//! Fourier components follow `x(t) = ∫ x(Ω) e^{-iΩt} dΩ/2π`, so `d/dt -> -iΩ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{check_grid, CurveKind, SpectrumCurve};
use crate::error::{Error, Result};
use crate::params::ValidatedParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftMatrix(pub [[f64; 2]; 2]);

impl DriftMatrix {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn determinant(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half = 0.5 * self.trace();
        let disc = Complex64::new(half * half - self.determinant(), 0.0).sqrt();
        [half + disc, half - disc]
    }

    /// Both eigenvalues have strictly positive real part.
    pub fn is_stable(&self) -> bool {
        self.eigenvalues().iter().all(|l| l.re > 0.0)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.0[1][0] == 0.0
    }

    pub(crate) fn require_stable(&self) -> Result<()> {
        let [a, b] = self.eigenvalues();
        if a.re > 0.0 && b.re > 0.0 {
            Ok(())
        } else {
            Err(Error::Instability(a.re, b.re))
        }
    }

    /// Largest eigenvalue magnitude; sets the stiffness of time stepping.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
    }
}

pub fn drift_matrix(params: &ValidatedParams) -> DriftMatrix {
    let kappa = params.kappa();
    DriftMatrix([
        [kappa - params.k_c, params.k_s],
        [params.spm_residual(), kappa + params.k_c],
    ])
}

/// Coefficients multiplying each input noise quadrature in `d_s(Ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseTransfer {
    pub a_c: Complex64,
    pub a_s: Complex64,
    pub v_c: Complex64,
    pub v_s: Complex64,
    pub u_s: Complex64,
}

/// Double-sided densities of the independent input noise quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputPsd {
    pub a_c: f64,
    pub a_s: f64,
    pub v_c: f64,
    pub v_s: f64,
    pub u_s: f64,
}

impl InputPsd {
    /// Squeezed-vacuum input (measured quadrature e^{-2r}/2, conjugate
    /// e^{+2r}/2, uncorrelated) with vacuum loss channels.
    pub fn for_params(params: &ValidatedParams) -> Self {
        let r = params.r_squeeze;
        InputPsd {
            a_c: 0.5 * (2.0 * r).exp(),
            a_s: 0.5 * (-2.0 * r).exp(),
            v_c: 0.5,
            v_s: 0.5,
            u_s: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    pub omega: f64,
    /// Coefficient of the signal xi(Ω) in d_s(Ω).
    pub gain: Complex64,
    pub transfer: NoiseTransfer,
}

impl FrequencyResponse {
    /// Density of the sum noise w_s.
    pub fn sum_noise_psd(&self, inputs: &InputPsd) -> f64 {
        let t = &self.transfer;
        t.a_c.norm_sqr() * inputs.a_c
            + t.a_s.norm_sqr() * inputs.a_s
            + t.v_c.norm_sqr() * inputs.v_c
            + t.v_s.norm_sqr() * inputs.v_s
            + t.u_s.norm_sqr() * inputs.u_s
    }

    /// Sum noise referred to the signal, S_w / |G|^2.
    pub fn signal_referred_psd(&self, inputs: &InputPsd) -> f64 {
        self.sum_noise_psd(inputs) / self.gain.norm_sqr()
    }
}

/// Solves the quadrature equations at one sideband frequency.
pub fn frequency_response(params: &ValidatedParams, omega: f64) -> Result<FrequencyResponse> {
    let m = drift_matrix(params);
    m.require_stable()?;

    // (-iΩ I + M)^{-1} via the 2x2 adjugate
    let iw = Complex64::new(0.0, omega);
    let a00 = m.0[0][0] - iw;
    let a11 = m.0[1][1] - iw;
    let a01 = Complex64::from(m.0[0][1]);
    let a10 = Complex64::from(m.0[1][0]);
    let det = a00 * a11 - a01 * a10;
    // row s of the inverse
    let inv_sc = -a10 / det;
    let inv_ss = a00 / det;

    let sqrt_eta = params.eta.sqrt();
    let out = sqrt_eta * (2.0 * params.kappa_prime).sqrt();
    let couple_a = (2.0 * params.kappa_prime).sqrt();
    let couple_v = (2.0 * params.kappa_double_prime).sqrt();
    let signal = -std::f64::consts::SQRT_2 * params.beta();

    Ok(FrequencyResponse {
        omega,
        gain: out * inv_ss * signal,
        transfer: NoiseTransfer {
            a_c: out * inv_sc * couple_a,
            a_s: out * inv_ss * couple_a - sqrt_eta,
            v_c: out * inv_sc * couple_v,
            v_s: out * inv_ss * couple_v,
            u_s: Complex64::from((1.0 - params.eta).sqrt()),
        },
    })
}

/// Sum-noise density S_w(Ω) from the general solver.
pub fn sum_noise_from_response(params: &ValidatedParams, omega: f64) -> Result<f64> {
    let inputs = InputPsd::for_params(params);
    Ok(frequency_response(params, omega)?.sum_noise_psd(&inputs))
}

/// Signal-referred density S(Ω) = S_w / |G|^2 sampled on `grid`.
pub fn psd_from_response(params: &ValidatedParams, grid: &[f64]) -> Result<SpectrumCurve> {
    check_grid(grid)?;
    let inputs = InputPsd::for_params(params);
    let values = grid
        .iter()
        .map(|&w| Ok(frequency_response(params, w)?.signal_referred_psd(&inputs)))
        .collect::<Result<Vec<_>>>()?;
    SpectrumCurve::new(grid.to_vec(), values, CurveKind::Response, params)
}

/// Classical eigenfrequency perturbation xi(t).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalWaveform {
    #[default]
    Zero,
    /// `amplitude * cos(omega t + phase)`.
    Sinusoid { amplitude: f64, omega: f64, phase: f64 },
    /// Uniformly sampled values starting at t = 0, linearly interpolated and
    /// zero outside the record.
    Samples { dt: f64, values: Vec<f64> },
}


impl SignalWaveform {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            SignalWaveform::Zero => 0.0,
            SignalWaveform::Sinusoid { amplitude, omega, phase } => amplitude * (omega * t + phase).cos(),
            SignalWaveform::Samples { dt, values } => {
                if t < 0.0 || values.is_empty() {
                    return 0.0;
                }
                let x = t / dt;
                let i = x.floor() as usize;
                match (values.get(i), values.get(i + 1)) {
                    (Some(a), Some(b)) => a + (b - a) * (x - i as f64),
                    (Some(a), None) if x == i as f64 => *a,
                    _ => 0.0,
                }
            }
        }
    }
}
