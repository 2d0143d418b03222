//! Python bindings for `sqz-sensor`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sqz_sensor::curve::CurveKind;
use sqz_sensor::optimize::BandKind;
use sqz_sensor::params::{Scenario, Units};
use sqz_sensor::stochastic::{estimate_psd, simulate, Referral, SimulationConfig};
use sqz_sensor::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Range { .. }
        | Error::ScenarioMismatch { .. }
        | Error::SpmNotCancelled { .. }
        | Error::Parse(_)
        | Error::Grid(_)
        | Error::Config(_)
        | Error::Instability(..) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn scenario(name: &str) -> PyResult<Scenario> {
    name.parse().map_err(to_py)
}

/// Validated sensor parameters.
#[pyclass(frozen, from_py_object, name = "SensorParams")]
#[derive(Clone)]
struct PySensorParams {
    inner: sqz_sensor::ValidatedParams,
}

#[pymethods]
impl PySensorParams {
    /// `k_s` defaults to the self-phase-modulation cancelling value 2 gamma N.
    /// `units` is "kappa_prime" (rates in units of kappa', which must be 1)
    /// or "si".
    #[new]
    #[pyo3(signature = (kappa_prime, kappa_double_prime, eta, n_photons, gamma_spm=0.0, r_squeeze=0.0, k_c=0.0, k_s=None, units="kappa_prime"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        kappa_prime: f64,
        kappa_double_prime: f64,
        eta: f64,
        n_photons: f64,
        gamma_spm: f64,
        r_squeeze: f64,
        k_c: f64,
        k_s: Option<f64>,
        units: &str,
    ) -> PyResult<Self> {
        let units = match units {
            "kappa_prime" => Units::KappaPrime,
            "si" => Units::Si,
            other => return Err(PyValueError::new_err(format!("unknown units `{other}`"))),
        };
        let raw = sqz_sensor::SensorParams {
            kappa_prime,
            kappa_double_prime,
            eta,
            n_photons,
            gamma_spm,
            r_squeeze,
            k_c,
            k_s: k_s.unwrap_or(2.0 * gamma_spm * n_photons),
            units,
        };
        Ok(PySensorParams { inner: raw.validate().map_err(to_py)? })
    }

    /// kappa' = 1, kappa'' = 0.1, eta = 0.7, e^{2r} = 30, N = 1.
    #[staticmethod]
    fn fig2() -> Self {
        PySensorParams { inner: sqz_sensor::SensorParams::fig2().validate().expect("reference parameters are valid") }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = sqz_sensor::params::ParamFile::from_json(text)
            .and_then(|f| f.into_params())
            .map_err(to_py)?;
        Ok(PySensorParams { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        let file = sqz_sensor::params::ParamFile::from_params(self.inner.raw());
        serde_json::to_string(&file).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn with_kc(&self, k_c: f64) -> PyResult<Self> {
        Ok(PySensorParams { inner: self.inner.with_kc(k_c).map_err(to_py)? })
    }

    #[getter]
    fn kappa_prime(&self) -> f64 {
        self.inner.kappa_prime
    }

    #[getter]
    fn kappa_double_prime(&self) -> f64 {
        self.inner.kappa_double_prime
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn n_photons(&self) -> f64 {
        self.inner.n_photons
    }

    #[getter]
    fn r_squeeze(&self) -> f64 {
        self.inner.r_squeeze
    }

    #[getter]
    fn k_c(&self) -> f64 {
        self.inner.k_c
    }

    #[getter]
    fn k_s(&self) -> f64 {
        self.inner.k_s
    }

    /// Total half-bandwidth kappa' + kappa''.
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    /// (1 - eta) / eta.
    #[getter]
    fn eps_sq(&self) -> f64 {
        self.inner.eps_sq()
    }

    fn __repr__(&self) -> String {
        format!(
            "SensorParams(kappa_prime={}, kappa_double_prime={}, eta={}, n_photons={}, r_squeeze={}, k_c={}, k_s={})",
            self.inner.kappa_prime,
            self.inner.kappa_double_prime,
            self.inner.eta,
            self.inner.n_photons,
            self.inner.r_squeeze,
            self.inner.k_c,
            self.inner.k_s
        )
    }
}

/// Frequency band where a scenario beats the shot-noise limit.
#[pyclass(frozen, skip_from_py_object, name = "SnlBand")]
#[derive(Clone)]
struct PySnlBand {
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper: f64,
    /// "open" or "tangent".
    #[pyo3(get)]
    kind: &'static str,
}

#[pymethods]
impl PySnlBand {
    #[getter]
    fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn __repr__(&self) -> String {
        format!("SnlBand(lower={}, upper={}, kind='{}')", self.lower, self.upper, self.kind)
    }
}

/// Closed-form signal-referred noise of `scenario` at each frequency.
#[pyfunction]
fn closed_form_psd(scenario_name: &str, params: &PySensorParams, omegas: Vec<f64>) -> PyResult<Vec<f64>> {
    let s = scenario(scenario_name)?;
    let p = s.materialize(&params.inner).map_err(to_py)?;
    omegas.iter().map(|w| sqz_sensor::closed_form_psd(s, &p, *w).map_err(to_py)).collect()
}

/// Shot-noise limit |omega| / (4N).
#[pyfunction]
fn snl(params: &PySensorParams, omegas: Vec<f64>) -> Vec<f64> {
    omegas.iter().map(|w| sqz_sensor::snl(&params.inner, *w)).collect()
}

/// Noise of the parameters as given (any stable k_c), from the closed form.
#[pyfunction]
fn measurement_psd(params: &PySensorParams, omegas: Vec<f64>) -> PyResult<Vec<f64>> {
    omegas.iter().map(|w| sqz_sensor::measurement_psd_raw(&params.inner, *w).map_err(to_py)).collect()
}

/// Complex gain G and the signal-referred noise from the frequency-domain solver.
#[pyfunction]
fn frequency_response(params: &PySensorParams, omega: f64) -> PyResult<(num_complex::Complex64, f64)> {
    let r = sqz_sensor::frequency_response(&params.inner, omega).map_err(to_py)?;
    let inputs = sqz_sensor::dynamics::InputPsd::for_params(&params.inner);
    Ok((r.gain, r.signal_referred_psd(&inputs)))
}

#[pyfunction]
fn optimal_kc(params: &PySensorParams) -> f64 {
    sqz_sensor::optimal_kc(&params.inner)
}

/// Numeric minimizer of the noise over k_c at a probe frequency.
#[pyfunction]
fn numeric_min_kc(params: &PySensorParams, omega: f64) -> PyResult<f64> {
    Ok(sqz_sensor::numeric_min_kc(&params.inner, omega).map_err(to_py)?.argmin)
}

/// Widest sub-SNL band inside `[lo, hi]`, or None.
#[pyfunction]
#[pyo3(signature = (scenario_name, params, lo=0.0, hi=10.0))]
fn snl_crossings(scenario_name: &str, params: &PySensorParams, lo: f64, hi: f64) -> PyResult<Option<PySnlBand>> {
    let s = scenario(scenario_name)?;
    let p = s.materialize(&params.inner).map_err(to_py)?;
    match sqz_sensor::snl_crossings(s, &p, (lo, hi)) {
        Ok(b) => Ok(Some(PySnlBand {
            lower: b.lower,
            upper: b.upper,
            kind: match b.kind {
                BandKind::Open => "open",
                BandKind::Tangent => "tangent",
            },
        })),
        Err(Error::NoBand { .. }) => Ok(None),
        Err(e) => Err(to_py(e)),
    }
}

/// (kappa', kappa'') from the resonance frequency, intrinsic Q and kappa'/kappa''.
#[pyfunction]
fn rates_from_quality(omega_0: f64, q_intrinsic: f64, coupling_ratio: f64) -> PyResult<(f64, f64)> {
    sqz_sensor::rates_from_quality(omega_0, q_intrinsic, coupling_ratio).map_err(to_py)
}

/// Simulates the sensor and returns the signal-referred Welch estimate.
#[pyfunction]
#[pyo3(signature = (scenario_name, params, omegas, segments=400, seed=1))]
fn simulate_psd(
    py: Python<'_>,
    scenario_name: &str,
    params: &PySensorParams,
    omegas: Vec<f64>,
    segments: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let s = scenario(scenario_name)?;
    let p = s.materialize(&params.inner).map_err(to_py)?;
    py.detach(|| {
        let run = simulate(&p, &SimulationConfig::for_params(&p, segments, seed))?;
        estimate_psd(&run, &omegas, Referral::Signal).map(|c| c.values().to_vec())
    })
    .map_err(to_py)
}

/// Reference curves keyed by label, plus "omega".
#[pyfunction]
#[pyo3(signature = (points=401))]
fn fig2_curves<'py>(py: Python<'py>, points: usize) -> PyResult<Bound<'py, PyDict>> {
    let curves = sqz_sensor::fig2::fig2_curves(points).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("omega", curves.no_squeeze.frequencies().to_vec())?;
    for c in curves.all() {
        let key = match c.kind() {
            CurveKind::ShotNoiseLimit => "snl".to_string(),
            k => k.label(),
        };
        out.set_item(key, c.values().to_vec())?;
    }
    Ok(out)
}

/// Runs the validation suite and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (params, segments=1200, seed=1))]
fn validate(py: Python<'_>, params: &PySensorParams, segments: usize, seed: u64) -> PyResult<String> {
    let opts = sqz_sensor::validate::ValidationOptions { segments, seed, ..Default::default() };
    let report = py
        .detach(|| sqz_sensor::validate::run_validation(&params.inner, &opts))
        .map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
mod sqz_sensor_py {
    #[pymodule_export]
    use super::{
        closed_form_psd, fig2_curves, frequency_response, measurement_psd, numeric_min_kc, optimal_kc,
        rates_from_quality, simulate_psd, snl, snl_crossings, validate, PySensorParams, PySnlBand,
    };

    #[pymodule_init]
    fn init(m: &pyo3::Bound<'_, pyo3::types::PyModule>) -> pyo3::PyResult<()> {
        use pyo3::types::PyModuleMethods;
        m.add("PSD_CONVENTION", sqz_sensor::curve::PSD_CONVENTION)?;
        m.add("__version__", env!("CARGO_PKG_VERSION"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_map_to_value_errors() {
        assert!(scenario("double-squeeze").is_ok());
        assert!(scenario("nope").is_err());
    }

    #[test]
    fn params_default_to_spm_cancellation() {
        let p = PySensorParams::new(1.0, 0.1, 0.7, 4.0, 0.05, 1.0, 0.0, None, "kappa_prime").unwrap();
        assert!(p.inner.is_spm_cancelled());
        assert!(PySensorParams::new(2.0, 0.1, 0.7, 1.0, 0.0, 0.0, 0.0, None, "kappa_prime").is_err());
        assert!(PySensorParams::new(2.0, 0.1, 0.7, 1.0, 0.0, 0.0, 0.0, None, "si").is_ok());
    }
}
