//! Python bindings. States cross the boundary as 6-tuples
//! `(x, y, z, px, py, pz)`, matrices as `GluingMatrix` objects.

use nalgebra::Matrix2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use solflow::flow::{self as rflow, CoverState};
use solflow::fundgroup as rgroup;
use solflow::integrals as rint;
use solflow::sectionmap as rsec;
use solflow::{IntegratorConfig, QuotientIntegrals, TorusPoint};

type State = (f64, f64, f64, f64, f64, f64);

fn err(e: solflow::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_state(s: State) -> CoverState {
    CoverState::new(s.0, s.1, s.2, s.3, s.4, s.5)
}

fn from_state(s: &CoverState) -> State {
    (s.x, s.y, s.z, s.px, s.py, s.pz)
}

fn mat(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

#[pyclass(name = "GluingMatrix", frozen, module = "solflow", skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyGluingMatrix(pub solflow::GluingMatrix);

#[pymethods]
impl PyGluingMatrix {
    #[new]
    fn new(c11: i64, c12: i64, c21: i64, c22: i64) -> PyResult<Self> {
        solflow::GluingMatrix::new([[c11, c12], [c21, c22]]).map(Self).map_err(err)
    }

    /// Parses `"c11,c12,c21,c22"`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(err)
    }

    #[staticmethod]
    fn cat() -> Self {
        Self(solflow::GluingMatrix::cat())
    }

    #[staticmethod]
    fn shear() -> Self {
        Self(solflow::GluingMatrix::shear())
    }

    fn entries(&self) -> [[i64; 2]; 2] {
        self.0.entries()
    }

    fn det(&self) -> i64 {
        self.0.det()
    }

    fn trace(&self) -> i64 {
        self.0.trace()
    }

    fn spectral_radius(&self) -> f64 {
        self.0.spectral_radius()
    }

    fn is_hyperbolic(&self) -> bool {
        self.0.is_hyperbolic()
    }

    fn real_log(&self) -> PyResult<[[f64; 2]; 2]> {
        self.0.real_log().map(|m| mat(&m)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("GluingMatrix({})", self.0)
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "MetricFamily", frozen, module = "solflow")]
pub struct PyMetricFamily(pub solflow::MetricFamily);

#[pymethods]
impl PyMetricFamily {
    #[new]
    fn new(gluing: PyRef<'_, PyGluingMatrix>) -> PyResult<Self> {
        solflow::MetricFamily::new(gluing.0).map(Self).map_err(err)
    }

    fn gluing(&self) -> PyGluingMatrix {
        PyGluingMatrix(*self.0.gluing())
    }

    fn log(&self) -> [[f64; 2]; 2] {
        mat(self.0.log())
    }

    fn metric_at(&self, z: f64) -> [[f64; 2]; 2] {
        mat(&self.0.metric_at(z))
    }

    fn co_metric_at(&self, z: f64) -> [[f64; 2]; 2] {
        mat(&self.0.co_metric_at(z))
    }

    fn deck_invariance_defect(&self, z: f64) -> f64 {
        self.0.deck_invariance_defect(z)
    }

    fn hamiltonian(&self, state: State) -> f64 {
        rflow::hamiltonian(&to_state(state), &self.0)
    }

    /// Integrates to `t_final`. Returns `(times, states)`.
    #[pyo3(signature = (state, t_final, dt = 1e-3, scheme = "leapfrog", sample_every = 1))]
    fn integrate(
        &self,
        state: State,
        t_final: f64,
        dt: f64,
        scheme: &str,
        sample_every: usize,
    ) -> PyResult<(Vec<f64>, Vec<State>)> {
        let cfg = match scheme {
            "leapfrog" => IntegratorConfig::leapfrog(dt),
            "rk4" => IntegratorConfig::rk4(dt),
            other => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
        };
        let rec = rflow::integrate(&to_state(state), &self.0, &cfg, t_final, sample_every).map_err(err)?;
        Ok((rec.times.clone(), rec.states.iter().map(from_state).collect()))
    }

    /// Integrates and returns the trajectory CSV as text.
    #[pyo3(signature = (state, t_final, dt = 1e-3, sample_every = 1))]
    fn trajectory_csv(&self, state: State, t_final: f64, dt: f64, sample_every: usize) -> PyResult<String> {
        let rec = rflow::integrate(&to_state(state), &self.0, &IntegratorConfig::leapfrog(dt), t_final, sample_every)
            .map_err(err)?;
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(String::from_utf8(buf).expect("csv is ascii"))
    }

    /// `(I1, I2)` of the quotient integrals for this gluing matrix.
    fn quotient_integrals(&self, px: f64, py: f64) -> PyResult<(f64, f64)> {
        let q = QuotientIntegrals::for_matrix(self.0.gluing()).map_err(err)?;
        Ok((q.i1(px, py), q.i2(px, py)))
    }

    fn independence_rank(&self, state: State) -> PyResult<usize> {
        rint::independence_rank(&to_state(state), &self.0).map_err(err)
    }

    /// First return of the point `(x, y)` of `N`: `(x1, y1, crossing_time)`.
    #[pyo3(signature = (x, y, dt = 1e-3))]
    fn return_map(&self, x: f64, y: f64, dt: f64) -> PyResult<(f64, f64, f64)> {
        let r = rsec::return_map_detailed(&TorusPoint::new(x, y), &self.0, &IntegratorConfig::leapfrog(dt))
            .map_err(err)?;
        Ok((r.point.x(), r.point.y(), r.crossing_time))
    }
}

#[pyfunction]
fn deck_apply(state: State, gluing: PyRef<'_, PyGluingMatrix>, k: i64) -> State {
    from_state(&rflow::deck_apply(&to_state(state), &gluing.0, k))
}

#[pyfunction]
fn normalize(state: State, gluing: PyRef<'_, PyGluingMatrix>) -> State {
    from_state(rflow::normalize(&to_state(state), &gluing.0).state())
}

/// `I1 = px^2 - px py - py^2` for the cat map.
#[pyfunction]
fn eval_i1(px: f64, py: f64) -> f64 {
    rint::eval_i1(px, py)
}

#[pyfunction]
fn eval_i2(px: f64, py: f64) -> f64 {
    rint::eval_i2(px, py)
}

#[pyfunction]
fn cat_map(x: f64, y: f64, gluing: PyRef<'_, PyGluingMatrix>) -> (f64, f64) {
    let q = rsec::cat_map(&TorusPoint::new(x, y), &gluing.0);
    (q.x(), q.y())
}

/// `(top_exponent, per_orbit)`.
#[pyfunction]
#[pyo3(signature = (gluing, iterations = 10_000, seed = 42))]
fn lyapunov_top(gluing: PyRef<'_, PyGluingMatrix>, iterations: usize, seed: u64) -> PyResult<(f64, Vec<f64>)> {
    let e = rsec::lyapunov_top(&gluing.0, iterations, seed).map_err(err)?;
    Ok((e.top_exponent, e.per_orbit))
}

#[pyfunction]
fn entropy_lower_bound(gluing: PyRef<'_, PyGluingMatrix>) -> f64 {
    rsec::entropy_lower_bound(&gluing.0)
}

/// Ball sizes `gamma(0..=max_radius)`.
#[pyfunction]
fn growth_function(gluing: PyRef<'_, PyGluingMatrix>, max_radius: usize) -> PyResult<Vec<u64>> {
    let t = rgroup::growth_function(&gluing.0, max_radius).map_err(err)?;
    if !t.complete {
        return Err(PyValueError::new_err("element cap reached"));
    }
    Ok(t.counts)
}

#[pyfunction]
fn growth_rate(gluing: PyRef<'_, PyGluingMatrix>, max_radius: usize) -> PyResult<f64> {
    let t = rgroup::growth_function(&gluing.0, max_radius).map_err(err)?;
    rgroup::growth_rate(&t).map_err(err)
}

/// `([a,b] = 1, [c,a] = ab, [c,b] = a)`.
#[pyfunction]
fn check_relations(gluing: PyRef<'_, PyGluingMatrix>) -> PyResult<(bool, bool, bool)> {
    let r = rgroup::check_relations(&gluing.0).map_err(err)?;
    Ok((r.ab_commute, r.ca_is_ab, r.cb_is_a))
}

/// Number of repeated values among the `2^k` certificate words.
#[pyfunction]
fn certificate_collisions(gluing: PyRef<'_, PyGluingMatrix>, k: usize) -> PyResult<usize> {
    Ok(rgroup::certificate_words(&gluing.0, k).map_err(err)?.collisions)
}

#[pymodule]
#[pyo3(name = "solflow")]
fn pysolflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGluingMatrix>()?;
    m.add_class::<PyMetricFamily>()?;
    m.add_function(wrap_pyfunction!(deck_apply, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(eval_i1, m)?)?;
    m.add_function(wrap_pyfunction!(eval_i2, m)?)?;
    m.add_function(wrap_pyfunction!(cat_map, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_top, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(growth_function, m)?)?;
    m.add_function(wrap_pyfunction!(growth_rate, m)?)?;
    m.add_function(wrap_pyfunction!(check_relations, m)?)?;
    m.add_function(wrap_pyfunction!(certificate_collisions, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyDict;

    #[test]
    fn module_runs_from_python() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "solflow").unwrap();
            pysolflow(&m).unwrap();
            let locals = PyDict::new(py);
            locals.set_item("solflow", m).unwrap();
            let code = c"
a = solflow.GluingMatrix.cat()
fam = solflow.MetricFamily(a)
assert abs(fam.deck_invariance_defect(0.3)) < 1e-12
times, states = fam.integrate((0.1, 0.2, 0.0, 0.0, 0.0, 1.0), 1.0)
assert times[-1] == 1.0 and abs(states[-1][2] - 1.0) < 1e-12
assert solflow.growth_function(a, 4) == [1, 7, 33, 103, 273]
try:
    solflow.MetricFamily(solflow.GluingMatrix(0, -1, 1, 0))
    raise SystemExit('rotation accepted')
except ValueError:
    pass
";
            py.run(code, None, Some(&locals)).unwrap();
        });
    }
}
