//! Quantum-noise model of a microresonator sensor probed with squeezed light.
//!
//! The sensor reads out a small shift `xi(t)` of a cavity eigenfrequency
//! through homodyne detection of the output sine quadrature. This crate
//! computes the signal-referred noise for three operating points (coherent
//! input, squeezed input, squeezed input plus intracavity parametric gain),
//! optimizes the internal gain, finds where the shot-noise limit is beaten,
//! and checks every closed form against two independent routes: a general
//! frequency-domain solver ([`dynamics`]) and a time-domain Langevin
//! simulation ([`stochastic`]).

pub mod curve;
pub mod dynamics;
pub mod error;
pub mod fig2;
pub mod io;
pub mod numeric;
pub mod optimize;
pub mod params;
pub mod spectra;
pub mod stochastic;
pub mod validate;

pub use curve::{denormalize_curve, linspace, normalize_curve, CurveKind, Normalization, SpectrumCurve};
pub use dynamics::{drift_matrix, frequency_response, psd_from_response, DriftMatrix, FrequencyResponse, SignalWaveform};
pub use error::{Error, Result};
pub use optimize::{numeric_min_kc, optimal_kc, snl_crossings, OptimizationResult, SnlBand};
pub use params::{rates_from_quality, Scenario, SensorParams, Units, ValidatedParams};
pub use spectra::{closed_form_psd, measurement_psd_raw, snl, sum_noise_psd};
pub use stochastic::{estimate_psd, measure_gain, simulate, SimulationConfig, SimulationRun};
