use hardkernel_core::harness::{run_scaling_experiment, write_csv, ExperimentConfig};
use hardkernel_core::harness::verify::run_criterion;
use hardkernel_core::instance::BlockKernel;
use hardkernel_core::learners::LearnerSpec;
use hardkernel_core::losses::{expected_gap_bound, Loss, DEFAULT_P_GRID};
use hardkernel_core::oracle::BudgetedOracle;
use hardkernel_core::solvers::{self, Coefficients, Objective};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::{create_exception, exceptions::PyException};

create_exception!(hardkernel, HardKernelError, PyException);

fn err(e: hardkernel_core::Error) -> PyErr {
    HardKernelError::new_err(e.to_string())
}

fn parse_loss(name: &str) -> PyResult<Loss> {
    name.parse().map_err(err)
}

/// A kernel matrix drawn from the hard block distribution, stored implicitly.
#[pyclass(name = "Kernel", frozen)]
struct PyKernel(BlockKernel);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    #[pyo3(signature = (d, m, seed=1))]
    fn sample(d: usize, m: usize, seed: u64) -> PyResult<Self> {
        BlockKernel::sample(d, m, seed).map(Self).map_err(err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn sigma(&self) -> Vec<bool> {
        self.0.sigma().to_vec()
    }

    fn entry(&self, s: usize, r: usize) -> PyResult<u8> {
        self.0.entry(s, r).map_err(err)
    }

    fn block_sizes(&self) -> Vec<usize> {
        self.0.block_sizes().to_vec()
    }

    /// Dense m×m matrix as nested lists.
    fn to_dense(&self) -> PyResult<Vec<Vec<f64>>> {
        let k = self.0.materialize().map_err(err)?;
        Ok((0..k.rows()).map(|i| k.row(i).to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Kernel(d={}, m={}, sigma_popcount={})", self.0.d(), self.0.m(), self.0.sigma_popcount())
    }
}

/// Loss plus either a norm bound or a soft penalty.
#[pyclass(name = "Objective", frozen)]
#[derive(Clone)]
struct PyObjective(Objective);

#[pymethods]
impl PyObjective {
    #[staticmethod]
    fn soft(loss: &str, lam: f64) -> PyResult<Self> {
        Objective::soft(parse_loss(loss)?, lam).map(Self).map_err(err)
    }

    #[staticmethod]
    fn norm_bound(radius_sq: f64) -> PyResult<Self> {
        Objective::norm_bound(radius_sq).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Objective({:?})", self.0)
    }
}

#[pyfunction]
fn loss_value(loss: &str, u: f64, y: f64) -> PyResult<f64> {
    parse_loss(loss)?.eval(u, y).map_err(err)
}

/// Minimizer of `loss(u, y) + a·u²`.
#[pyfunction]
fn u_star(loss: &str, y: f64, a: f64) -> PyResult<f64> {
    parse_loss(loss)?.u_star(y, a).map_err(err)
}

/// Expected-gap lower bound; returns `(grid, analytic)`.
#[pyfunction]
#[pyo3(signature = (loss, lam, d, labels, p_grid=DEFAULT_P_GRID))]
fn gap_bound(loss: &str, lam: f64, d: usize, labels: Vec<f64>, p_grid: usize) -> PyResult<(f64, f64)> {
    let b = expected_gap_bound(parse_loss(loss)?, lam, d, &labels, p_grid).map_err(err)?;
    Ok((b.grid, b.analytic))
}

/// Exact minimizer; returns `(coefficients, value)`.
#[pyfunction]
fn solve(kernel: &PyKernel, objective: &PyObjective, y: f64) -> PyResult<(Vec<f64>, f64)> {
    let sol = solvers::solve_objective(&kernel.0, &objective.0, y).map_err(err)?;
    let alpha = solvers::spread_block_coefficients(&kernel.0, &sol.beta).map_err(err)?;
    Ok((alpha.0, sol.value))
}

#[pyfunction]
fn objective_value(kernel: &PyKernel, objective: &PyObjective, alpha: Vec<f64>, y: f64) -> PyResult<f64> {
    solvers::objective_value(&kernel.0, &objective.0, &Coefficients(alpha), y).map_err(err)
}

#[pyfunction]
fn delta_gap(kernel: &PyKernel, objective: &PyObjective, alpha: Vec<f64>, y: f64) -> PyResult<f64> {
    let gap = solvers::delta_gap(&kernel.0, &objective.0, &Coefficients(alpha), y).map_err(err)?;
    Ok(gap.value)
}

/// Runs a learner against a budgeted oracle on `kernel`.
///
/// Returns a dict with `alpha`, `queries`, `missed_blocks` and `gap`.
#[pyfunction]
#[pyo3(signature = (kernel, objective, y, learner, budget, seed=0))]
fn learn<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    objective: &PyObjective,
    y: f64,
    learner: &str,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec: LearnerSpec = learner.parse().map_err(err)?;
    let mut oracle = BudgetedOracle::new(&kernel.0, budget);
    let alpha = spec.learn(&mut oracle, &objective.0, y, seed).map_err(err)?;
    let gap = solvers::delta_gap(&kernel.0, &objective.0, &alpha, y).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("queries", oracle.used())?;
    out.set_item("missed_blocks", oracle.missed_count())?;
    out.set_item("gap", gap.value)?;
    out.set_item("alpha", alpha.0)?;
    Ok(out)
}

/// Runs a sweep from `key = value` configuration text; returns
/// `(report_json, trials_csv)`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<(String, String)> {
    let cfg: ExperimentConfig = config.parse().map_err(err)?;
    let (report, records) = py.allow_threads(|| run_scaling_experiment(&cfg)).map_err(err)?;
    let mut csv = Vec::new();
    write_csv(&records, &mut csv).map_err(err)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| HardKernelError::new_err(e.to_string()))?;
    Ok((json, String::from_utf8_lossy(&csv).into_owned()))
}

/// Runs one acceptance criterion; returns `(passed, detail)`.
#[pyfunction]
#[pyo3(signature = (criterion, seed=20_240_601))]
fn verify_criterion(py: Python<'_>, criterion: u8, seed: u64) -> PyResult<(bool, String)> {
    let r = py.allow_threads(|| run_criterion(criterion, seed)).map_err(err)?;
    Ok((r.passed, r.detail))
}

#[pymodule]
fn hardkernel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HardKernelError", m.py().get_type::<HardKernelError>())?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyObjective>()?;
    m.add_function(wrap_pyfunction!(loss_value, m)?)?;
    m.add_function(wrap_pyfunction!(u_star, m)?)?;
    m.add_function(wrap_pyfunction!(gap_bound, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(objective_value, m)?)?;
    m.add_function(wrap_pyfunction!(delta_gap, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_criterion, m)?)?;
    Ok(())
}
