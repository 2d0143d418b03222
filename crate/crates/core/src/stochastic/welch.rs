use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::SimulationRun;
use crate::curve::{check_grid, CurveKind, SpectrumCurve};
use crate::dynamics::frequency_response;
use crate::error::{Error, Result};
use crate::params::SensorParams;

/// What the estimated density is referred to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Referral {
    /// Density of the detected quadrature itself (the sum noise when xi = 0).
    Detector,
    /// Detector density divided by |G(Ω)|² from the frequency-domain solver.
    Signal,
}

/// Segments are summed in fixed-size groups so the floating-point reduction
/// order, and therefore the result, does not depend on the thread count.
const SEGMENTS_PER_GROUP: usize = 16;

/// Welch estimate of the double-sided density of `samples` at `grid`.
///
/// Hann-windowed segments of `2 len / (n_segments + 1)` samples overlap by
/// half; the averaged periodogram is linearly interpolated between FFT bins.
/// No detrending is applied.
pub fn welch_psd(samples: &[f64], dt: f64, n_segments: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let nyquist = std::f64::consts::PI / dt;
    if let Some(w) = grid.iter().find(|w| w.abs() > nyquist) {
        return Err(Error::Grid(format!("omega = {w} exceeds the Nyquist frequency {nyquist}")));
    }
    if n_segments == 0 {
        return Err(Error::Config("n_segments must be at least 1".into()));
    }
    let len = (2 * samples.len() / (n_segments + 1)) & !1;
    if len < 16 {
        return Err(Error::Config(format!(
            "{} samples are too few for {n_segments} segments",
            samples.len()
        )));
    }
    let hop = len / 2;
    let segments = (samples.len() - len) / hop + 1;

    let window: Vec<f64> = (0..len)
        .map(|j| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / len as f64).cos())
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(len);
    let bins = len / 2 + 1;

    let groups: Vec<Vec<f64>> = (0..segments.div_ceil(SEGMENTS_PER_GROUP))
        .into_par_iter()
        .map(|g| {
            let mut acc = vec![0.0; bins];
            let mut buf = vec![Complex::new(0.0, 0.0); len];
            let first = g * SEGMENTS_PER_GROUP;
            for s in first..(first + SEGMENTS_PER_GROUP).min(segments) {
                let seg = &samples[s * hop..s * hop + len];
                for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
                    *b = Complex::new(x * w, 0.0);
                }
                fft.process(&mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b.norm_sqr();
                }
            }
            acc
        })
        .collect();

    let mut power = vec![0.0; bins];
    for g in &groups {
        for (p, v) in power.iter_mut().zip(g) {
            *p += v;
        }
    }
    let scale = dt / (window_power * segments as f64);
    power.iter_mut().for_each(|p| *p *= scale);

    let bin_width = 2.0 * std::f64::consts::PI / (len as f64 * dt);
    Ok(grid
        .iter()
        .map(|w| {
            let x = w.abs() / bin_width;
            let i = (x.floor() as usize).min(bins - 1);
            let frac = x - i as f64;
            if i + 1 < bins {
                power[i] * (1.0 - frac) + power[i + 1] * frac
            } else {
                power[i]
            }
        })
        .collect())
}

/// Spectral estimate of a simulated detector record.
pub fn estimate_psd(run: &SimulationRun, grid: &[f64], referral: Referral) -> Result<SpectrumCurve> {
    check_grid(grid)?;
    let mut values = welch_psd(&run.samples, run.dt(), run.config.n_segments, grid)?;
    let params = SensorParams::validate(run.params)?;
    if referral == Referral::Signal {
        for (v, &w) in values.iter_mut().zip(grid) {
            *v /= frequency_response(&params, w)?.gain.norm_sqr();
        }
    }
    SpectrumCurve::new(grid.to_vec(), values, CurveKind::Estimate, &params)
}
