use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{simulate, SimulationConfig};
use crate::dynamics::{frequency_response, SignalWaveform};
use crate::error::{Error, Result};
use crate::params::ValidatedParams;

/// Minimum accepted ratio of probe amplitude to demodulated noise.
pub const MIN_PROBE_SNR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMeasurement {
    pub omega: f64,
    /// Demodulated complex gain Z / amplitude.
    pub gain: Complex64,
    /// |G(Ω)| from the frequency-domain solver.
    pub expected: f64,
    pub snr: f64,
}

impl GainMeasurement {
    pub fn magnitude(&self) -> f64 {
        self.gain.norm()
    }

    pub fn relative_error(&self) -> f64 {
        self.magnitude() / self.expected - 1.0
    }
}

/// Hann-weighted complex amplitude of `samples` at `omega`, scaled so a tone
/// `A cos(omega t + phi)` returns `A e^{-i phi}`.
fn demodulate(samples: &[f64], dt: f64, omega: f64) -> Complex64 {
    let n = samples.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut weight = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
        acc += w * x * Complex64::from_polar(1.0, omega * i as f64 * dt);
        weight += w;
    }
    2.0 * acc / weight
}

/// Drives the sensor with `xi(t) = amplitude * cos(probe_omega t)` and
/// recovers |G| by demodulating the detector output.
///
/// The noise floor is the RMS demodulated amplitude of the residual (record
/// minus the fitted tone) at eight frequencies four bins either side of the
/// probe.
pub fn measure_gain(
    params: &ValidatedParams,
    probe_omega: f64,
    probe_amplitude: f64,
    config: &SimulationConfig,
) -> Result<GainMeasurement> {
    let config = config.clone().with_signal(SignalWaveform::Sinusoid {
        amplitude: probe_amplitude,
        omega: probe_omega,
        phase: 0.0,
    });
    let run = simulate(params, &config)?;
    let dt = run.dt();
    let z = demodulate(&run.samples, dt, probe_omega);

    let residual: Vec<f64> = run
        .samples
        .iter()
        .enumerate()
        .map(|(i, x)| x - (z * Complex64::from_polar(1.0, -probe_omega * i as f64 * dt)).re)
        .collect();
    let record = run.samples.len() as f64 * dt;
    let spacing = 4.0 * 2.0 * std::f64::consts::PI / record;
    let nyquist = std::f64::consts::PI / dt;
    let off: Vec<f64> = (1..=4)
        .flat_map(|k| [probe_omega - k as f64 * spacing, probe_omega + k as f64 * spacing])
        .filter(|w| *w > 0.0 && *w < nyquist)
        .map(|w| demodulate(&residual, dt, w).norm_sqr())
        .collect();
    if off.is_empty() {
        return Err(Error::Config("record too short to estimate the noise floor".into()));
    }
    let floor = (off.iter().sum::<f64>() / off.len() as f64).sqrt();
    let snr = z.norm() / floor;
    if snr < MIN_PROBE_SNR {
        return Err(Error::Snr { snr, required: MIN_PROBE_SNR });
    }
    Ok(GainMeasurement {
        omega: probe_omega,
        gain: z / probe_amplitude,
        expected: frequency_response(params, probe_omega)?.gain.norm(),
        snr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SensorParams;

    #[test]
    fn demodulation_recovers_tone() {
        let dt = 0.01;
        let w = 1.3;
        let samples: Vec<f64> = (0..100_000).map(|i| 2.5 * (w * i as f64 * dt + 0.4).cos()).collect();
        let z = demodulate(&samples, dt, w);
        assert!((z.norm() - 2.5).abs() < 1e-3, "{z}");
        assert!((z.arg() + 0.4).abs() < 1e-3);
    }

    #[test]
    fn weak_probe_fails_snr_gate() {
        let p = SensorParams::lossless().validate().unwrap();
        let cfg = SimulationConfig { duration: 200.0, ..SimulationConfig::for_params(&p, 1, 9) };
        assert!(matches!(measure_gain(&p, 1.0, 1e-4, &cfg), Err(Error::Snr { .. })));
    }
}
