//! Python bindings. Rationals cross the boundary as `fractions.Fraction`.

use mlrf_core::analysis::{analyze, Analysis, Engine, Options};
use mlrf_core::displacement::{depth_decision, min_depth};
use mlrf_core::engine::{dellrf_membership, Limits, Outcome};
use mlrf_core::loops::TransitionPoly;
use mlrf_core::parse::{parse_loop, LoopFile, Mode};
use mlrf_core::report::VerdictDocument;
use num_bigint::BigInt;
use num_rational::Ratio;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Frac = Ratio<BigInt>;

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A loop parsed from `.slc` text.
#[pyclass(module = "mlrf", frozen)]
struct Loop {
    file: LoopFile,
    q: TransitionPoly,
}

#[pymethods]
impl Loop {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let file = parse_loop(text).map_err(value_error)?;
        let q = file.slc.transition();
        Ok(Self { file, q })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(value_error)?;
        Self::new(&text)
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.q.names().to_vec()
    }

    /// Analyse the loop. Unset limits fall back to the file's directives.
    #[pyo3(signature = (mode=None, engine="both", depth_bound=None, max_iters=None))]
    fn analyze(
        &self,
        mode: Option<&str>,
        engine: &str,
        depth_bound: Option<usize>,
        max_iters: Option<usize>,
    ) -> PyResult<Verdict> {
        let defaults = Limits::default();
        let mode = match mode {
            Some(m) => m.parse::<Mode>().map_err(|_| value_error(format!("unknown mode `{m}`")))?,
            None => self.file.mode.unwrap_or_default(),
        };
        let engine = engine
            .parse::<Engine>()
            .map_err(|_| value_error(format!("unknown engine `{engine}`")))?;
        let limits = Limits::new(
            depth_bound.or(self.file.depth_bound).or(defaults.depth_bound),
            max_iters.or(self.file.max_iters).unwrap_or(defaults.max_iterations),
        )
        .map_err(value_error)?;
        let opts = Options { limits, mode, engine };
        let analysis = analyze(&self.q, &opts).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let doc = VerdictDocument::from_analysis(&self.q, &analysis, &opts, None);
        Ok(Verdict { analysis, doc })
    }

    /// Whether an MLRF of depth at most `d` exists, by the displacement LP.
    fn has_mlrf_of_depth(&self, d: usize) -> bool {
        depth_decision(&self.q, d)
    }

    #[pyo3(signature = (d_max=10))]
    fn min_depth(&self, d_max: usize) -> Option<usize> {
        min_depth(&self.q, d_max)
    }

    /// An LRF for the transitions that have `b - 1` more steps ahead.
    fn dellrf(&self, b: usize) -> PyResult<Option<(Vec<Frac>, Frac)>> {
        if b == 0 {
            return Err(value_error("b must be positive"));
        }
        Ok(dellrf_membership(&self.q, b).map(|f| (f.coeffs, f.constant)))
    }

    fn __repr__(&self) -> String {
        format!("Loop(vars={:?})", self.q.names())
    }
}

#[pyclass(module = "mlrf", frozen)]
struct Verdict {
    analysis: Analysis,
    doc: VerdictDocument,
}

#[pymethods]
impl Verdict {
    /// `"MLRF"`, `"NONTERMINATING"` or `"UNKNOWN"`.
    #[getter]
    fn kind(&self) -> &'static str {
        self.analysis.verdict.kind()
    }

    #[getter]
    fn depth(&self) -> Option<usize> {
        self.analysis.verdict.mlrf().map(|m| m.depth())
    }

    /// Components as `(coefficients, constant)` pairs.
    #[getter]
    fn mlrf(&self) -> Option<Vec<(Vec<Frac>, Frac)>> {
        self.analysis
            .verdict
            .mlrf()
            .map(|m| m.components.iter().map(|f| (f.coeffs.clone(), f.constant.clone())).collect())
    }

    #[getter]
    fn states(&self) -> Option<String> {
        self.doc.recurrent_set.as_ref().map(|r| r.text.clone())
    }

    #[getter]
    fn witness(&self) -> Option<Vec<Frac>> {
        match &self.analysis.verdict.outcome {
            Outcome::Nonterminating { witness, .. } => witness.clone(),
            _ => None,
        }
    }

    #[getter]
    fn reason(&self) -> Option<String> {
        self.doc.reason.as_ref().map(|r| r.code.clone())
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.analysis.verdict.iterations
    }

    #[getter]
    fn route(&self) -> &'static str {
        self.analysis.route
    }

    /// Whether the witness re-verified and the engines did not disagree.
    #[getter]
    fn checked(&self) -> bool {
        self.analysis.checks.all_passed() && self.analysis.engines_agree != Some(false)
    }

    fn to_json(&self) -> String {
        self.doc.to_json()
    }

    fn __repr__(&self) -> String {
        match (self.depth(), self.reason()) {
            (Some(d), _) => format!("Verdict(MLRF, depth={d})"),
            (_, Some(r)) => format!("Verdict(UNKNOWN, reason={r:?})"),
            _ => format!("Verdict({})", self.kind()),
        }
    }
}

#[pymodule]
fn mlrf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Loop>()?;
    m.add_class::<Verdict>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
