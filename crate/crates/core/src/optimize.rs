//! Optimal internal parametric gain, the shot-noise-limited bandwidth, and
//! the frequency band in which a scenario beats the shot-noise limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, minimize_scalar, MinimizeOptions};
use crate::params::{Scenario, ValidatedParams};
use crate::spectra::{closed_form_psd, measurement_psd_at, shot_noise_limit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    GridRefine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub argmin: f64,
    pub objective: f64,
    pub method: Method,
    /// Estimated absolute error of `argmin` (zero for closed forms).
    pub tolerance: f64,
    /// The optimum lies on the edge of the admissible interval.
    pub boundary: bool,
}

/// Internal gain k_c minimizing the measurement noise at every frequency:
///
/// ```text
/// k_c = ((kappa' - kappa'') e^{-2r} - eps2 kappa) / (e^{-2r} + eps2)
/// ```
///
/// This is a convex combination of `kappa' - kappa''` and `-kappa`, so it is
/// always stable except in the lossless limit (eps2 = 0, kappa'' = 0), where
/// it reaches the stability edge `kappa`.
pub fn optimal_kc(params: &ValidatedParams) -> f64 {
    let e = params.squeeze_gain();
    let eps2 = params.eps_sq();
    ((params.kappa_prime - params.kappa_double_prime) * e - eps2 * params.kappa()) / (e + eps2)
}

/// Closed-form optimum together with the noise it attains at `omega`.
pub fn optimal_kc_result(params: &ValidatedParams, omega: f64) -> OptimizationResult {
    let k_c = optimal_kc(params);
    OptimizationResult {
        argmin: k_c,
        objective: measurement_psd_at(params, k_c, omega),
        method: Method::ClosedForm,
        tolerance: 0.0,
        boundary: k_c >= params.kappa(),
    }
}

/// Squeeze factor at which the optimal k_c changes sign:
/// e^{-2r} = eps2 kappa / (kappa' - kappa''). `None` if no such r >= 0 exists.
pub fn kc_sign_change_squeeze(params: &ValidatedParams) -> Option<f64> {
    let detune = params.kappa_prime - params.kappa_double_prime;
    if detune <= 0.0 || params.eps_sq() == 0.0 {
        return None;
    }
    let e = params.eps_sq() * params.kappa() / detune;
    (e <= 1.0).then(|| -0.5 * e.ln())
}

/// Numeric minimization of the measurement noise over k_c at a fixed probe
/// frequency, searching the stable interval (-kappa, kappa).
pub fn numeric_min_kc(params: &ValidatedParams, omega_probe: f64) -> Result<OptimizationResult> {
    params.require_spm_cancelled()?;
    let kappa = params.kappa();
    let margin = 1e-9 * kappa;
    let m = minimize_scalar(
        |k| measurement_psd_at(params, k, omega_probe),
        -kappa + margin,
        kappa - margin,
        &MinimizeOptions {
            grid_points: 256,
            ..MinimizeOptions::default()
        },
    )?;
    Ok(OptimizationResult {
        argmin: m.x,
        objective: m.fx,
        method: Method::GridRefine,
        tolerance: m.tolerance,
        boundary: m.at_boundary,
    })
}

/// Total half-bandwidth that minimizes the unsqueezed, lossless noise at
/// `omega`: kappa = |omega|, attaining |omega| / (4N).
pub fn snl_optimal_kappa(omega: f64, n_photons: f64) -> Result<OptimizationResult> {
    check_snl_inputs(omega, n_photons)?;
    Ok(OptimizationResult {
        argmin: omega.abs(),
        objective: shot_noise_limit(n_photons, omega),
        method: Method::ClosedForm,
        tolerance: 0.0,
        boundary: false,
    })
}

/// Numeric counterpart of [`snl_optimal_kappa`]: minimizes
/// (Ω² + kappa²) / (8 kappa N) over kappa in [|Ω|/100, 100 |Ω|].
pub fn numeric_snl_kappa(omega: f64, n_photons: f64) -> Result<OptimizationResult> {
    check_snl_inputs(omega, n_photons)?;
    let w = omega.abs();
    let objective = |kappa: f64| (w * w + kappa * kappa) / (8.0 * kappa * n_photons);
    // search in log-kappa so the grid resolves both decades evenly
    let m = minimize_scalar(
        |u: f64| objective(w * u.exp()),
        (0.01f64).ln(),
        (100.0f64).ln(),
        &MinimizeOptions::default(),
    )?;
    let argmin = w * m.x.exp();
    Ok(OptimizationResult {
        argmin,
        objective: objective(argmin),
        method: Method::GridRefine,
        tolerance: m.tolerance * argmin,
        boundary: m.at_boundary,
    })
}

fn check_snl_inputs(omega: f64, n_photons: f64) -> Result<()> {
    if n_photons.is_nan() || n_photons <= 0.0 {
        return Err(Error::range("n_photons", "must be > 0"));
    }
    if omega == 0.0 || !omega.is_finite() {
        // kappa -> 0 drives the noise to zero at DC; there is no finite optimum
        return Err(Error::range("omega", "optimal bandwidth is degenerate at omega = 0"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// Noise is strictly below the SNL between two crossings.
    Open,
    /// The curve only touches the SNL; lower == upper.
    Tangent,
}

/// Frequency interval where a scenario's noise is below the shot-noise limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnlBand {
    pub lower: f64,
    pub upper: f64,
    pub kind: BandKind,
    /// The band continues past the lower end of the search interval.
    pub lower_clamped: bool,
    /// The band continues past the upper end of the search interval.
    pub upper_clamped: bool,
}

impl SnlBand {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lower && omega <= self.upper
    }
}

/// Number of points in the sign-change scan of [`snl_crossings`].
pub const CROSSING_SCAN_POINTS: usize = 512;

/// Finds the widest sub-SNL band of `scenario` inside `interval`.
///
/// Ω = 0 is never part of a band: the noise is positive there while the SNL
/// vanishes.
pub fn snl_crossings(scenario: Scenario, params: &ValidatedParams, interval: (f64, f64)) -> Result<SnlBand> {
    let (lo, hi) = interval;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Grid(format!("invalid search interval [{lo}, {hi}]")));
    }
    let p = scenario.materialize(params)?;
    closed_form_psd(scenario, &p, hi)?;
    let excess = |w: f64| {
        closed_form_psd(scenario, &p, w).expect("checked above") - shot_noise_limit(p.n_photons, w)
    };
    let n = CROSSING_SCAN_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&w| excess(w)).collect();

    let root = |a: f64, b: f64| bisect(excess, a, b, 1e-15, 400);
    let mut bands: Vec<(f64, f64, bool, bool)> = Vec::new();
    let mut start: Option<(f64, bool)> = (values[0] < 0.0 && grid[0] > 0.0).then_some((grid[0], true));
    for i in 1..n {
        let (a, b) = (values[i - 1], values[i]);
        if a >= 0.0 && b < 0.0 {
            start = Some((root(grid[i - 1], grid[i])?, false));
        } else if a < 0.0 && b >= 0.0 {
            let end = root(grid[i - 1], grid[i])?;
            if let Some((s, clamped)) = start.take() {
                bands.push((s, end, clamped, false));
            }
        }
    }
    if let Some((s, clamped)) = start {
        bands.push((s, hi, clamped, true));
    }

    let tangent_tol = 1e-12;
    let widest = bands
        .into_iter()
        .filter(|&(a, b, _, _)| {
            let mid = 0.5 * (a + b);
            excess(mid) < -tangent_tol * shot_noise_limit(p.n_photons, mid)
        })
        .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)));
    if let Some((lower, upper, lower_clamped, upper_clamped)) = widest {
        return Ok(SnlBand {
            lower,
            upper,
            kind: BandKind::Open,
            lower_clamped,
            upper_clamped,
        });
    }

    // look for a touching point
    let touch = minimize_scalar(
        |w| excess(w) / shot_noise_limit(p.n_photons, w).max(f64::MIN_POSITIVE),
        lo.max(1e-12 * hi),
        hi,
        &MinimizeOptions::default(),
    )?;
    if touch.fx.abs() <= 1e-10 && !touch.at_boundary {
        return Ok(SnlBand {
            lower: touch.x,
            upper: touch.x,
            kind: BandKind::Tangent,
            lower_clamped: false,
            upper_clamped: false,
        });
    }
    Err(Error::NoBand { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SensorParams;
    use crate::spectra::measurement_psd_raw;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig2() -> ValidatedParams {
        SensorParams::fig2().validate().unwrap()
    }

    /// Brute-force argmin over a fine uniform grid.
    fn grid_argmin(p: &ValidatedParams, omega: f64) -> f64 {
        let kappa = p.kappa();
        let n = 200_001;
        (1..n)
            .map(|i| -kappa + 2.0 * kappa * i as f64 / n as f64)
            .min_by(|a, b| measurement_psd_at(p, *a, omega).total_cmp(&measurement_psd_at(p, *b, omega)))
            .unwrap()
    }

    #[test]
    fn fig2_optimal_gain() {
        let p = fig2();
        let k = optimal_kc(&p);
        assert_relative_eq!(k, -0.955_670_103_092_783_5, max_relative = 1e-13);
        assert!((grid_argmin(&p, 0.0) - k).abs() < 2.0 * 2.2 / 200_001.0);
        assert!(k > -p.kappa() && k < 0.0);
    }

    #[test]
    fn lossless_detection_gives_squeezing_regime() {
        let p = SensorParams { eta: 1.0, ..SensorParams::fig2() }.validate().unwrap();
        assert_relative_eq!(optimal_kc(&p), 0.9, max_relative = 1e-15);
    }

    #[test]
    fn optimal_gain_changes_sign_at_balance() {
        let p = fig2();
        let r0 = kc_sign_change_squeeze(&p).unwrap();
        // e^{-2 r0} = (3/7)(1.1)/0.9
        assert_relative_eq!((-2.0 * r0).exp(), 3.0 / 7.0 * 1.1 / 0.9, max_relative = 1e-14);
        assert!(optimal_kc(&p.with_squeeze(r0).unwrap()).abs() < 1e-15);
        assert!(optimal_kc(&p.with_squeeze(r0 + 0.01).unwrap()) < 0.0);
        assert!(optimal_kc(&p.with_squeeze(r0 - 0.01).unwrap()) > 0.0);
    }

    #[test]
    fn optimum_substituted_gives_double_squeeze_form() {
        let p = fig2();
        let opt = p.with_kc(optimal_kc(&p)).unwrap();
        for w in crate::curve::linspace(0.0, 4.0, 41) {
            let a = measurement_psd_raw(&opt, w).unwrap();
            let b = crate::spectra::double_squeeze_psd(&p, w);
            assert!((a - b).abs() <= 1e-12 * b, "{w}: {a} vs {b}");
        }
    }

    #[test]
    fn numeric_kc_matches_closed_form() {
        let p = fig2();
        let exact = optimal_kc(&p);
        for w in [0.0, 1.0, 2.0, 3.0] {
            let m = numeric_min_kc(&p, w).unwrap();
            assert!((m.argmin - exact).abs() < 1e-8, "{w}: {}", m.argmin - exact);
            assert!(!m.boundary);
        }
    }

    #[test]
    fn lossless_unsqueezed_optimum_hits_the_boundary() {
        let p = SensorParams::lossless().validate().unwrap();
        let m = numeric_min_kc(&p, 0.0).unwrap();
        assert!(m.boundary);
        assert!((m.argmin - 1.0).abs() < 1e-8);
        assert_eq!(optimal_kc(&p), 1.0);
        assert!(optimal_kc_result(&p, 0.0).boundary);
        // decreasing towards the edge
        let f = |k| measurement_psd_at(&p, k, 0.0);
        assert!(f(0.9) < f(0.5) && f(0.99) < f(0.9));
    }

    #[test]
    fn snl_kappa_closed_and_numeric() {
        let r = snl_optimal_kappa(1.0, 1.0).unwrap();
        assert_eq!((r.argmin, r.objective), (1.0, 0.25));
        let r = snl_optimal_kappa(3.0, 2.0).unwrap();
        assert_eq!((r.argmin, r.objective), (3.0, 0.375));
        for w in [0.25, 0.5, 1.0, 2.0, 4.0, -2.0] {
            let m = numeric_snl_kappa(w, 1.5).unwrap();
            assert!((m.argmin / w.abs() - 1.0).abs() < 1e-10);
            assert!((m.objective / shot_noise_limit(1.5, w) - 1.0).abs() < 1e-10);
        }
        assert!(matches!(snl_optimal_kappa(0.0, 1.0), Err(Error::Range { .. })));
    }

    /// Roots of a Ω² - Ω/(4N) + c = 0 with the closed-form coefficients.
    fn quadratic_band(p: &ValidatedParams, at_zero: f64) -> (f64, f64) {
        let a = (p.squeeze_gain() + p.eps_sq()) / (8.0 * p.kappa_prime * p.n_photons);
        let b = -1.0 / (4.0 * p.n_photons);
        let disc = (b * b - 4.0 * a * at_zero).sqrt();
        // numerically stable pair
        let q = -0.5 * (b - disc);
        (at_zero / q, q / a)
    }

    #[test]
    fn fig2_bands_match_quadratic_roots() {
        let p = fig2();
        for (s, c0) in [
            (Scenario::InputSqueeze, crate::spectra::input_squeeze_psd(&p, 0.0)),
            (Scenario::DoubleSqueezeOptimal, crate::spectra::double_squeeze_psd(&p, 0.0)),
        ] {
            let band = snl_crossings(s, &p, (0.0, 10.0)).unwrap();
            let (lo, hi) = quadratic_band(&p, c0);
            assert!((band.lower - lo).abs() < 1e-10, "{s}: {} vs {lo}", band.lower);
            assert!((band.upper - hi).abs() < 1e-10, "{s}: {} vs {hi}", band.upper);
            assert_eq!(band.kind, BandKind::Open);
            assert!(band.width() > p.kappa());
        }
    }

    #[test]
    fn unsqueezed_lossless_band_is_a_tangent_point() {
        for kappa in [0.5, 1.0, 2.0] {
            let p = SensorParams { kappa_prime: kappa, units: crate::params::Units::Si, ..SensorParams::lossless() }
                .validate()
                .unwrap();
            let band = snl_crossings(Scenario::NoSqueeze, &p, (0.0, 8.0)).unwrap();
            assert_eq!(band.kind, BandKind::Tangent);
            assert!((band.lower - kappa).abs() < 1e-6 * kappa, "{band:?}");
        }
    }

    #[test]
    fn lossy_unsqueezed_has_no_band() {
        let err = snl_crossings(Scenario::NoSqueeze, &fig2(), (0.0, 8.0)).unwrap_err();
        assert!(matches!(err, Error::NoBand { .. }));
    }

    #[test]
    fn truncated_band_is_flagged() {
        let band = snl_crossings(Scenario::InputSqueeze, &fig2(), (1.0, 2.0)).unwrap();
        assert!(band.lower_clamped && band.upper_clamped);
        assert_eq!((band.lower, band.upper), (1.0, 2.0));
    }

    proptest! {
        #[test]
        fn optimal_kc_is_stable_and_inside_interval(kpp in 0.0..2.0f64, eta in 0.05..0.999f64, r in 0.0..3.0f64) {
            let p = SensorParams { kappa_double_prime: kpp, eta, r_squeeze: r, ..SensorParams::fig2() }.validate().unwrap();
            let k = optimal_kc(&p);
            prop_assert!(k > -p.kappa());
            prop_assert!(k <= p.kappa_prime - p.kappa_double_prime + 1e-12);
            prop_assert!(p.with_kc(k).is_ok());
        }

        #[test]
        fn double_band_contains_input_band(kpp in 0.0..0.3f64, eta in 0.6..0.99f64, r in 0.5..2.0f64) {
            let p = SensorParams { kappa_double_prime: kpp, eta, r_squeeze: r, ..SensorParams::fig2() }.validate().unwrap();
            if let Ok(input) = snl_crossings(Scenario::InputSqueeze, &p, (0.0, 20.0)) {
                let double = snl_crossings(Scenario::DoubleSqueezeOptimal, &p, (0.0, 20.0)).unwrap();
                prop_assert!(double.lower <= input.lower + 1e-12);
                prop_assert!(double.upper >= input.upper - 1e-12);
            }
        }
    }
}
