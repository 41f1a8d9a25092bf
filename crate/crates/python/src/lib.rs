//! Python bindings: controllers, the lossy channel, estimator primitives and
//! scenario runs. Scenario configs cross the boundary as JSON text; results
//! come back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use mfc_lfc::attack::HoldPolicy;
use mfc_lfc::config::{defaults_document, parse_config, to_json};
use mfc_lfc::mfc;
use mfc_lfc::{integrator, ControllerKind, Preset, Scenario};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn model(alpha: f64, kp: f64, tau: f64, sample_period: f64) -> PyResult<mfc::UltraLocalModel> {
    mfc::UltraLocalModel::new(alpha, kp, tau, sample_period).map_err(value_err)
}

#[pyclass(module = "lfcsim")]
struct MfcController {
    inner: mfc::MfcController,
}

#[pymethods]
impl MfcController {
    #[new]
    #[pyo3(signature = (alpha = 10.0, kp = 0.3, tau = 0.5, sample_period = 0.01))]
    fn new(alpha: f64, kp: f64, tau: f64, sample_period: f64) -> PyResult<Self> {
        Ok(Self {
            inner: mfc::MfcController::new(model(alpha, kp, tau, sample_period)?),
        })
    }

    /// One control step; returns the commanded control.
    #[pyo3(signature = (y, y_ref = 0.0))]
    fn step(&mut self, y: f64, y_ref: f64) -> PyResult<f64> {
        self.inner.step(y, y_ref).map_err(value_err)
    }

    #[getter]
    fn warming_up(&self) -> bool {
        self.inner.is_warming_up()
    }

    #[getter]
    fn last_f_est(&self) -> Option<f64> {
        self.inner.last_f_est()
    }

    #[getter]
    fn window_len(&self) -> usize {
        self.inner.model().window_len()
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

#[pyclass(module = "lfcsim")]
struct IntegratorController {
    inner: integrator::IntegratorController,
}

#[pymethods]
impl IntegratorController {
    #[new]
    #[pyo3(signature = (gain = 1.0, sample_period = 0.01))]
    fn new(gain: f64, sample_period: f64) -> PyResult<Self> {
        let inner = integrator::IntegratorController::new(gain, sample_period).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn step(&mut self, e: f64) -> PyResult<f64> {
        self.inner.step(e).map_err(value_err)
    }

    #[getter]
    fn output(&self) -> f64 {
        self.inner.output()
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

#[pyclass(module = "lfcsim")]
struct LossyChannel {
    inner: mfc_lfc::LossyChannel,
}

#[pymethods]
impl LossyChannel {
    #[new]
    #[pyo3(signature = (loss_prob, seed = 0, stream = 1, hold = "hold_last"))]
    fn new(loss_prob: f64, seed: u64, stream: u64, hold: &str) -> PyResult<Self> {
        let hold = match hold {
            "hold_last" => HoldPolicy::HoldLast,
            "zero" => HoldPolicy::Zero,
            other => return Err(value_err(format!("unknown hold policy {other:?}"))),
        };
        let inner = mfc_lfc::LossyChannel::new(loss_prob, hold, seed, stream).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (value, active = true))]
    fn transmit(&mut self, value: f64, active: bool) -> f64 {
        self.inner.transmit(value, active)
    }

    #[getter]
    fn drops(&self) -> u64 {
        self.inner.drops()
    }

    #[getter]
    fn calls(&self) -> u64 {
        self.inner.calls()
    }
}

/// Estimate `F` from a full window of outputs and the controls paired with
/// them (oldest first).
#[pyfunction]
#[pyo3(signature = (ys, us, alpha = 10.0, tau = 0.5, sample_period = 0.01))]
fn estimate_f(ys: Vec<f64>, us: Vec<f64>, alpha: f64, tau: f64, sample_period: f64) -> PyResult<f64> {
    let m = model(alpha, 0.3, tau, sample_period)?;
    if ys.len() != m.window_len() || us.len() != m.window_len() {
        return Err(value_err(format!(
            "window needs {} samples, got {} outputs and {} controls",
            m.window_len(),
            ys.len(),
            us.len()
        )));
    }
    let mut w = mfc::SlidingWindow::for_model(&m);
    for (y, u) in ys.into_iter().zip(us) {
        w.push(y, u);
    }
    mfc::estimate_f(&m, &w).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (f_est, y, y_ref = 0.0, y_ref_rate = 0.0, alpha = 10.0, kp = 0.3))]
fn ip_control_step(f_est: f64, y: f64, y_ref: f64, y_ref_rate: f64, alpha: f64, kp: f64) -> PyResult<f64> {
    let m = model(alpha, kp, 0.5, 0.01)?;
    mfc::ip_control_step(&m, f_est, y, y_ref, y_ref_rate).map_err(value_err)
}

#[pyfunction]
fn compute_metrics<'py>(py: Python<'py>, e1: Vec<f64>, e2: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    if e1.len() != e2.len() {
        return Err(value_err("error sequences differ in length"));
    }
    to_py(py, &mfc_lfc::compute_metrics(&e1, &e2))
}

/// JSON document with the default scenario and every preset.
#[pyfunction]
fn defaults() -> String {
    defaults_document()
}

/// JSON for a preset by name (`scenario1` .. `scenario4`).
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    let p = Preset::from_name(name).ok_or_else(|| value_err(format!("unknown preset {name:?}")))?;
    Ok(to_json(&Scenario::preset(p)))
}

fn load(config: &str, controller: Option<&str>) -> PyResult<Scenario> {
    let mut s = parse_config(config).map_err(value_err)?;
    if let Some(c) = controller {
        s = s.with_controller(c.parse::<ControllerKind>().map_err(value_err)?);
    }
    Ok(s)
}

#[derive(Serialize)]
struct Columns {
    t: Vec<f64>,
    y1: Vec<f64>,
    y2: Vec<f64>,
    y1_meas: Vec<f64>,
    y2_meas: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    u1_del: Vec<f64>,
    u2_del: Vec<f64>,
    load1: Vec<f64>,
    load2: Vec<f64>,
}

impl From<&mfc_lfc::TimeSeries> for Columns {
    fn from(ts: &mfc_lfc::TimeSeries) -> Self {
        let col = |f: &dyn Fn(&mfc_lfc::sim::Sample) -> f64| ts.samples.iter().map(f).collect();
        Self {
            t: col(&|s| s.t),
            y1: col(&|s| s.y[0]),
            y2: col(&|s| s.y[1]),
            y1_meas: col(&|s| s.y_meas[0]),
            y2_meas: col(&|s| s.y_meas[1]),
            u1: col(&|s| s.u[0]),
            u2: col(&|s| s.u[1]),
            u1_del: col(&|s| s.u_del[0]),
            u2_del: col(&|s| s.u_del[1]),
            load1: col(&|s| s.load[0]),
            load2: col(&|s| s.load[1]),
        }
    }
}

/// Single run at the config's base seed. Returns `{"metrics", "timeseries"}`.
#[pyfunction]
#[pyo3(signature = (config = "{}", controller = None))]
fn run_scenario<'py>(py: Python<'py>, config: &str, controller: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let s = load(config, controller)?;
    let (report, ts) = py.detach(|| mfc_lfc::run_scenario(&s)).map_err(value_err)?;
    #[derive(Serialize)]
    struct Out {
        metrics: mfc_lfc::MetricsReport,
        timeseries: Columns,
    }
    to_py(
        py,
        &Out {
            metrics: report,
            timeseries: Columns::from(&ts),
        },
    )
}

/// Monte Carlo batch. Returns `{"mean", "runs"}`.
#[pyfunction]
#[pyo3(signature = (config = "{}", runs = None, controller = None))]
fn run_monte_carlo<'py>(
    py: Python<'py>,
    config: &str,
    runs: Option<usize>,
    controller: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let s = load(config, controller)?;
    let n = runs.unwrap_or(s.runs);
    let mc = py.detach(|| mfc_lfc::run_monte_carlo(&s, n)).map_err(value_err)?;
    to_py(py, &mc)
}

#[pymodule]
fn lfcsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MfcController>()?;
    m.add_class::<IntegratorController>()?;
    m.add_class::<LossyChannel>()?;
    m.add_function(wrap_pyfunction!(estimate_f, m)?)?;
    m.add_function(wrap_pyfunction!(ip_control_step, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(defaults, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    Ok(())
}
