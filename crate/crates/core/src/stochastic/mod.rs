//! Time-domain Langevin simulation of the quadrature dynamics.
//!
//! White input noises are drawn per time step with variance `PSD / dt`, so a
//! discrete sample sequence has the same double-sided density as the
//! continuous process it stands for. The detected quadrature is recorded
//! after a burn-in and can be turned into a spectral estimate with
//! [`estimate_psd`] or demodulated against a probe tone with
//! [`measure_gain`].

mod gain;
mod welch;

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curve::PSD_CONVENTION;
use crate::dynamics::{drift_matrix, DriftMatrix, InputPsd, SignalWaveform};
use crate::error::{Error, Result};
use crate::params::{SensorParams, ValidatedParams};

pub use gain::{measure_gain, GainMeasurement};
pub use welch::{estimate_psd, welch_psd, Referral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Forward Euler drift with midpoint readout of the cavity quadrature.
    #[default]
    EulerMaruyama,
    /// Exact propagation for noise held constant over each step, with the
    /// readout averaged over the step.
    ExactHold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt: f64,
    /// Recorded time, excluding burn-in.
    pub duration: f64,
    /// Time simulated and discarded before recording starts.
    pub burn_in: f64,
    pub seed: u64,
    /// Welch segments (50% overlap) the record is split into.
    pub n_segments: usize,
    #[serde(default)]
    pub signal: SignalWaveform,
    #[serde(default)]
    pub integrator: Integrator,
}

/// Fastest admissible step is `STEP_LIMIT / rate`.
pub const STEP_LIMIT: f64 = 0.1;

impl SimulationConfig {
    /// Default budget for `params`: step `0.02 / (kappa + |k_c|)`, segments
    /// of `64 pi / kappa'` (frequency resolution kappa'/32) and a burn-in of
    /// twenty slowest decay times.
    pub fn for_params(params: &ValidatedParams, n_segments: usize, seed: u64) -> Self {
        let m = drift_matrix(params);
        let fastest = fastest_rate(params, &m);
        let slowest = m.eigenvalues().iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
        let segment_time = 64.0 * std::f64::consts::PI / params.kappa_prime;
        SimulationConfig {
            dt: 0.02 / fastest,
            duration: 0.5 * (n_segments as f64 + 1.0) * segment_time,
            burn_in: 20.0 / slowest.max(1e-12 * fastest),
            seed,
            n_segments,
            signal: SignalWaveform::Zero,
            integrator: Integrator::EulerMaruyama,
        }
    }

    pub fn with_signal(mut self, signal: SignalWaveform) -> Self {
        self.signal = signal;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).floor() as usize
    }

    pub fn burn_in_steps(&self) -> usize {
        (self.burn_in / self.dt).ceil() as usize
    }

    /// Samples per Welch segment; consecutive segments overlap by half.
    pub fn segment_len(&self) -> usize {
        let len = 2 * self.n_steps() / (self.n_segments + 1);
        len & !1
    }

    pub fn validate(&self, params: &ValidatedParams) -> Result<()> {
        let m = drift_matrix(params);
        m.require_stable()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        let limit = STEP_LIMIT / fastest_rate(params, &m);
        if self.dt >= limit {
            return Err(Error::Config(format!(
                "dt = {} too coarse, must be below {limit}",
                self.dt
            )));
        }
        if self.duration.is_nan() || self.duration <= 0.0 || self.burn_in.is_nan() || self.burn_in < 0.0 {
            return Err(Error::Config("duration must be positive and burn_in non-negative".into()));
        }
        if self.n_segments == 0 {
            return Err(Error::Config("n_segments must be at least 1".into()));
        }
        if self.segment_len() < 16 {
            return Err(Error::Config(format!(
                "{} steps cannot hold {} segments of at least 16 samples",
                self.n_steps(),
                self.n_segments
            )));
        }
        Ok(())
    }
}

fn fastest_rate(params: &ValidatedParams, m: &DriftMatrix) -> f64 {
    (params.kappa() + params.k_c.abs()).max(m.spectral_radius())
}

/// Recorded detector output of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    #[serde(skip)]
    pub samples: Vec<f64>,
    pub config: SimulationConfig,
    pub input_psd: InputPsd,
    pub params: SensorParams,
}

impl SimulationRun {
    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    /// Writes `<stem>.bin` (little-endian f64 samples) and `<stem>.json`
    /// (parameters, config, density convention).
    pub fn write_raw(&self, stem: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(8 * self.samples.len());
        for s in &self.samples {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        let bin = stem.with_extension("bin");
        crate::io::write_atomic(&bin, &bytes)?;
        let sidecar = serde_json::json!({
            "format": "f64-le",
            "samples": self.samples.len(),
            "psd_convention": PSD_CONVENTION,
            "data_file": bin.file_name().map(|n| n.to_string_lossy().into_owned()),
            "run": self,
        });
        crate::io::write_atomic(&stem.with_extension("json"), serde_json::to_string_pretty(&sidecar)?.as_bytes())
    }

    /// Reads a run written by [`SimulationRun::write_raw`].
    pub fn read_raw(stem: &Path) -> Result<Self> {
        let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
        let mut run: SimulationRun = serde_json::from_value(sidecar["run"].clone())?;
        let bytes = fs::read(stem.with_extension("bin"))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Parse("sample file length is not a multiple of 8".into()));
        }
        run.samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(run)
    }
}

/// Independent Gaussian sources, one per input quadrature.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    InputCos = 0,
    InputSin = 1,
    LossCos = 2,
    LossSin = 3,
    Detection = 4,
}

fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

struct NoiseSources {
    rngs: [ChaCha8Rng; 5],
}

impl NoiseSources {
    fn new(seed: u64) -> Self {
        NoiseSources {
            rngs: [
                stream_rng(seed, Stream::InputCos),
                stream_rng(seed, Stream::InputSin),
                stream_rng(seed, Stream::LossCos),
                stream_rng(seed, Stream::LossSin),
                stream_rng(seed, Stream::Detection),
            ],
        }
    }

    #[inline]
    fn draw(&mut self) -> [f64; 5] {
        let mut z = [0.0; 5];
        for (out, rng) in z.iter_mut().zip(self.rngs.iter_mut()) {
            *out = StandardNormal.sample(rng);
        }
        z
    }
}

/// exp(-M dt) and M^{-1} (I - exp(-M dt)) for a stable 2x2 drift matrix.
fn exact_hold_propagators(m: &DriftMatrix, dt: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let a = [[-m.0[0][0] * dt, -m.0[0][1] * dt], [-m.0[1][0] * dt, -m.0[1][1] * dt]];
    let s = 0.5 * (a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let q2 = s * s - det;
    let (c, sinc) = if q2.abs() < 1e-16 {
        (1.0 + 0.5 * q2, 1.0 + q2 / 6.0)
    } else if q2 > 0.0 {
        let q = q2.sqrt();
        (q.cosh(), q.sinh() / q)
    } else {
        let q = (-q2).sqrt();
        (q.cos(), q.sin() / q)
    };
    let es = s.exp();
    let e = [
        [es * (c + sinc * (a[0][0] - s)), es * sinc * a[0][1]],
        [es * sinc * a[1][0], es * (c + sinc * (a[1][1] - s))],
    ];
    let inv = inverse(&m.0);
    let i_minus_e = [[1.0 - e[0][0], -e[0][1]], [-e[1][0], 1.0 - e[1][1]]];
    (e, mat_mul(&inv, &i_minus_e))
}

fn inverse(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn mat_vec(a: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Integrates the linear Langevin equations and records the detected
/// sine quadrature. Identical `(params, config)` give bit-identical output.
pub fn simulate(params: &ValidatedParams, config: &SimulationConfig) -> Result<SimulationRun> {
    config.validate(params)?;
    let m = drift_matrix(params);
    let dt = config.dt;
    let inputs = InputPsd::for_params(params);

    let white = |psd: f64| (psd / dt).sqrt();
    let (sa_c, sa_s, sv_c, sv_s, su) = (
        white(inputs.a_c),
        white(inputs.a_s),
        white(inputs.v_c),
        white(inputs.v_s),
        white(inputs.u_s),
    );
    let couple_a = (2.0 * params.kappa_prime).sqrt();
    let couple_v = (2.0 * params.kappa_double_prime).sqrt();
    let signal_coupling = -std::f64::consts::SQRT_2 * params.beta();
    let sqrt_eta = params.eta.sqrt();
    let loss = (1.0 - params.eta).sqrt();

    let burn = config.burn_in_steps();
    let n = config.n_steps();
    let mut noise = NoiseSources::new(config.seed);
    let mut samples = Vec::with_capacity(n);
    let mut b = [0.0f64; 2];

    let (prop, hold) = exact_hold_propagators(&m, dt);
    let inv_m = inverse(&m.0);

    for step in 0..burn + n {
        let t = (step as f64 - burn as f64) * dt;
        let z = noise.draw();
        let a_c = sa_c * z[0];
        let a_s = sa_s * z[1];
        let v_c = sv_c * z[2];
        let v_s = sv_s * z[3];
        let u_s = su * z[4];
        let force = [
            couple_a * a_c + couple_v * v_c,
            signal_coupling * config.signal.value_at(t) + couple_a * a_s + couple_v * v_s,
        ];
        let (next, readout) = match config.integrator {
            Integrator::EulerMaruyama => {
                let drift = mat_vec(&m.0, b);
                let next = [
                    b[0] + dt * (force[0] - drift[0]),
                    b[1] + dt * (force[1] - drift[1]),
                ];
                (next, 0.5 * (b[1] + next[1]))
            }
            Integrator::ExactHold => {
                let pe = mat_vec(&prop, b);
                let ph = mat_vec(&hold, force);
                let next = [pe[0] + ph[0], pe[1] + ph[1]];
                // step average of b from  d/dt b = F - M b
                let rhs = [force[0] - (next[0] - b[0]) / dt, force[1] - (next[1] - b[1]) / dt];
                (next, mat_vec(&inv_m, rhs)[1])
            }
        };
        if step >= burn {
            samples.push(sqrt_eta * (couple_a * readout - a_s) + loss * u_s);
        }
        b = next;
    }

    Ok(SimulationRun {
        samples,
        config: config.clone(),
        input_psd: inputs,
        params: *params.raw(),
    })
}

/// Steady-state variance of b_s for a vacuum-driven cavity with no internal
/// drive: the Lorentzian density 2 kappa * (1/2) / (Ω² + kappa²) integrated
/// over dΩ/2π gives 1/2 independent of kappa.
pub const VACUUM_QUADRATURE_VARIANCE: f64 = 0.5;

/// Intracavity sine quadrature trace, used to check equipartition.
pub fn simulate_intracavity(params: &ValidatedParams, config: &SimulationConfig) -> Result<Vec<f64>> {
    config.validate(params)?;
    let m = drift_matrix(params);
    let dt = config.dt;
    let inputs = InputPsd::for_params(params);
    let couple_a = (2.0 * params.kappa_prime).sqrt();
    let couple_v = (2.0 * params.kappa_double_prime).sqrt();
    let mut noise = NoiseSources::new(config.seed);
    let mut b = [0.0f64; 2];
    let burn = config.burn_in_steps();
    let mut out = Vec::with_capacity(config.n_steps());
    for step in 0..burn + config.n_steps() {
        let z = noise.draw();
        let force = [
            couple_a * (inputs.a_c / dt).sqrt() * z[0] + couple_v * (inputs.v_c / dt).sqrt() * z[2],
            couple_a * (inputs.a_s / dt).sqrt() * z[1] + couple_v * (inputs.v_s / dt).sqrt() * z[3],
        ];
        let drift = mat_vec(&m.0, b);
        b = [b[0] + dt * (force[0] - drift[0]), b[1] + dt * (force[1] - drift[1])];
        if step >= burn {
            out.push(b[1]);
        }
    }
    Ok(out)
}
