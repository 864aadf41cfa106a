//! Python bindings: Gaussian terms, wavepacket sums, family construction,
//! norms, diagonal traces, and scaling scans. Thin wrappers over the core
//! crate; every domain error surfaces as ValueError.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use collapse_core as cc;

fn err(e: cc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_family(name: &str) -> PyResult<cc::Family> {
    let family = match name {
        "lambda-p" => cc::Family::LambdaP,
        "gamma-p" => cc::Family::GammaP,
        "g-p" => cc::Family::GP,
        "lambda-q" => cc::Family::LambdaQ,
        "gamma-q" => cc::Family::GammaQ,
        "g-q" => cc::Family::GQ,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown family \"{other}\" (expected one of lambda-p, gamma-p, g-p, lambda-q, gamma-q, g-q)"
            )))
        }
    };
    Ok(family)
}

/// Signature blocks cross the boundary as (dim, sign) pairs with sign ±1.
fn parse_signature(blocks: Vec<(usize, i8)>) -> PyResult<cc::BlockSignature> {
    let mut parsed = Vec::with_capacity(blocks.len());
    for (n, sign) in blocks {
        let sign = match sign {
            1 => cc::BlockSign::Plus,
            -1 => cc::BlockSign::Minus,
            other => {
                return Err(PyValueError::new_err(format!(
                    "block sign must be 1 or -1, got {other}"
                )))
            }
        };
        parsed.push((n, sign));
    }
    cc::BlockSignature::new(parsed).map_err(err)
}

fn signature_tuples(sig: &cc::BlockSignature) -> Vec<(usize, i8)> {
    sig.blocks()
        .iter()
        .map(|&(n, s)| (n, if s == cc::BlockSign::Plus { 1 } else { -1 }))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn family_spec(
    family: &str,
    n: usize,
    r: f64,
    c: Option<f64>,
    m: Option<u32>,
    seed: u64,
    direction: Option<Vec<f64>>,
    term_cap: Option<usize>,
) -> PyResult<cc::FamilySpec> {
    let mut spec = cc::FamilySpec::new(parse_family(family)?, n, r).with_seed(seed);
    if let Some(c) = c {
        spec.c = c;
    }
    if let Some(m) = m {
        spec = spec.with_m(m);
    }
    if let Some(cap) = term_cap {
        spec.term_cap = cap;
    }
    spec.direction = direction;
    Ok(spec)
}

/// One modulated Gaussian: amplitude · e^{i modulation·x} ·
/// e^{-|x - center|^2 / (2 width)}.
#[pyclass(frozen)]
struct GaussianTerm {
    inner: cc::GaussianTerm,
}

#[pymethods]
impl GaussianTerm {
    #[new]
    fn new(
        amplitude: Complex64,
        center: Vec<f64>,
        modulation: Vec<f64>,
        width: f64,
    ) -> PyResult<Self> {
        let inner = cc::GaussianTerm::new(amplitude, center, modulation, width).map_err(err)?;
        Ok(GaussianTerm { inner })
    }

    #[getter]
    fn amplitude(&self) -> Complex64 {
        self.inner.amplitude()
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.inner.center().to_vec()
    }

    #[getter]
    fn modulation(&self) -> Vec<f64> {
        self.inner.modulation().to_vec()
    }

    #[getter]
    fn width(&self) -> f64 {
        self.inner.width()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value_at(&self, point: Vec<f64>) -> PyResult<Complex64> {
        self.inner.value_at(&point).map_err(err)
    }

    /// Closed-form free evolution under the given block signature.
    fn evolve_at(
        &self,
        signature: Vec<(usize, i8)>,
        t: f64,
        point: Vec<f64>,
    ) -> PyResult<Complex64> {
        let sig = parse_signature(signature)?;
        cc::evolve_eval(&self.inner, &sig, t, &point).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "GaussianTerm(dim={}, width={})",
            self.inner.dim(),
            self.inner.width()
        )
    }
}

/// A finite sum of Gaussian terms sharing one signature and one width.
#[pyclass(frozen)]
struct WavepacketSum {
    inner: cc::WavepacketSum,
}

#[pymethods]
impl WavepacketSum {
    #[new]
    fn new(signature: Vec<(usize, i8)>, terms: Vec<PyRef<GaussianTerm>>) -> PyResult<Self> {
        let sig = parse_signature(signature)?;
        let terms: Vec<cc::GaussianTerm> = terms.iter().map(|t| t.inner.clone()).collect();
        let inner = cc::WavepacketSum::new(sig, terms).map_err(err)?;
        Ok(WavepacketSum { inner })
    }

    #[getter]
    fn signature(&self) -> Vec<(usize, i8)> {
        signature_tuples(self.inner.signature())
    }

    #[getter]
    fn term_count(&self) -> usize {
        self.inner.term_count()
    }

    #[getter]
    fn width(&self) -> f64 {
        self.inner.width()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn terms(&self) -> Vec<GaussianTerm> {
        self.inner
            .terms()
            .iter()
            .map(|t| GaussianTerm { inner: t.clone() })
            .collect()
    }

    fn value_at(&self, point: Vec<f64>) -> PyResult<Complex64> {
        self.inner.value_at(&point).map_err(err)
    }

    fn evolve_at(&self, t: f64, point: Vec<f64>) -> PyResult<Complex64> {
        self.inner.evolve_at(t, &point).map_err(err)
    }

    /// Evolved diagonal trace at (t, x) with magnitude-based term culling.
    #[pyo3(signature = (t, x, cull_tol = 1e-8))]
    fn diagonal(&self, t: f64, x: Vec<f64>, cull_tol: f64) -> PyResult<Complex64> {
        cc::eval_diagonal(&self.inner, t, &x, cull_tol).map_err(err)
    }

    /// Exact L2 norm of the initial data via pairwise inner products.
    fn l2_norm(&self) -> f64 {
        cc::gram_l2_norm(&self.inner)
    }

    /// Exact H^s norm of the initial data for integer s.
    fn hs_norm(&self, s: u32) -> PyResult<f64> {
        cc::hs_norm_exact(&self.inner, s).map_err(err)
    }

    /// Mixed L^p(dt) L^q(dx) norm of the diagonal trace over the box
    /// [-x_half, x_half]^n and the given time interval, with a doubled-
    /// resolution convergence check. Returns a dict with value, coarse,
    /// refined, rel_change, converged.
    #[pyo3(signature = (p, q, time_interval, x_half, t_samples = 12, x_samples = 8, alpha = 0.0, cull_tol = 1e-8))]
    #[allow(clippy::too_many_arguments)]
    fn mixed_norm<'py>(
        &self,
        py: Python<'py>,
        p: f64,
        q: f64,
        time_interval: (f64, f64),
        x_half: f64,
        t_samples: usize,
        x_samples: usize,
        alpha: f64,
        cull_tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let n = self
            .inner
            .signature()
            .uniform_block_dim()
            .map_err(err)?;
        let region = cc::RegionSpec::new(
            time_interval,
            vec![(-x_half, x_half); n],
            t_samples,
            x_samples,
            cc::QuadRule::GaussLegendre,
        )
        .map_err(err)?;
        let mut spec = cc::MixedNormSpec::new(p, q, region).map_err(err)?;
        spec.cull_tol = cull_tol;
        let deriv = (alpha != 0.0).then(|| cc::FracDerivSpec::new(alpha));
        let outcome = cc::mixed_norm(&self.inner, &spec, deriv.as_ref()).map_err(err)?;
        let dict = PyDict::new(py);
        dict.set_item("value", outcome.value)?;
        dict.set_item("coarse", outcome.convergence.coarse)?;
        dict.set_item("refined", outcome.convergence.refined)?;
        dict.set_item("rel_change", outcome.convergence.rel_change)?;
        dict.set_item("converged", outcome.convergence.converged)?;
        Ok(dict)
    }

    fn __repr__(&self) -> String {
        match self.inner.meta() {
            Some(meta) => format!(
                "WavepacketSum(family={}, n={}, r={}, terms={})",
                meta.family,
                meta.n,
                meta.r,
                self.inner.term_count()
            ),
            None => format!(
                "WavepacketSum(terms={}, width={})",
                self.inner.term_count(),
                self.inner.width()
            ),
        }
    }
}

/// Width multiplier giving every family its evolved-tube positivity margin.
#[pyfunction]
fn tube_constant(n: usize) -> f64 {
    cc::tube_constant(n)
}

/// Exact pairwise inner product of two equal-width terms.
#[pyfunction]
fn inner_product(a: PyRef<'_, GaussianTerm>, b: PyRef<'_, GaussianTerm>) -> PyResult<Complex64> {
    cc::inner_product(&a.inner, &b.inner).map_err(err)
}

/// Builds one of the six separated-packet families. Family names:
/// lambda-p, gamma-p, g-p (sphere, separation surface, cone packets) and
/// lambda-q, gamma-q, g-q (ball-lattice packets, which need m >= 1).
#[pyfunction]
#[pyo3(signature = (family, n, r, c = None, m = None, seed = 0, direction = None, term_cap = None))]
#[allow(clippy::too_many_arguments)]
fn build_family(
    family: &str,
    n: usize,
    r: f64,
    c: Option<f64>,
    m: Option<u32>,
    seed: u64,
    direction: Option<Vec<f64>>,
    term_cap: Option<usize>,
) -> PyResult<WavepacketSum> {
    let spec = family_spec(family, n, r, c, m, seed, direction, term_cap)?;
    let inner = cc::build_family(&spec).map_err(err)?;
    Ok(WavepacketSum { inner })
}

/// Sweeps R over `resolutions`, fitting log(lhs/rhs) against log R.
/// Returns the full report as a JSON string (same schema as the CLI's
/// `report` field).
#[pyfunction]
#[pyo3(signature = (family, n, resolutions, p, q, alpha = 0.0, s = 0, m = None, c = None, seed = 0, region = None, t_samples = None, x_samples = None, cull_tol = None))]
#[allow(clippy::too_many_arguments)]
fn run_scan(
    family: &str,
    n: usize,
    resolutions: Vec<f64>,
    p: f64,
    q: f64,
    alpha: f64,
    s: u32,
    m: Option<u32>,
    c: Option<f64>,
    seed: u64,
    region: Option<&str>,
    t_samples: Option<usize>,
    x_samples: Option<usize>,
    cull_tol: Option<f64>,
) -> PyResult<String> {
    if resolutions.is_empty() {
        return Err(PyValueError::new_err("resolutions must be nonempty"));
    }
    let fam = family_spec(family, n, resolutions[0], c, m, seed, None, None)?;
    let mut spec = cc::ScanSpec::new(fam, resolutions, p, q);
    spec.alpha = alpha;
    spec.s = s;
    if let Some(policy) = region {
        spec.region = match policy {
            "late-focus" => cc::RegionPolicy::LateFocus,
            "early-spread" => cc::RegionPolicy::EarlySpread,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown region \"{other}\" (expected \"late-focus\" or \"early-spread\")"
                )))
            }
        };
    }
    if let Some(v) = t_samples {
        spec.t_samples = v;
    }
    if let Some(v) = x_samples {
        spec.x_samples = v;
    }
    if let Some(v) = cull_tol {
        spec.cull_tol = v;
    }
    let report = cc::run_scan(&spec).map_err(err)?;
    serde_json::to_string_pretty(&report)
        .map_err(|e| PyValueError::new_err(format!("report serialization failed: {e}")))
}

/// Predicted asymptotic slope of log(lhs/rhs) against log R.
#[pyfunction]
#[pyo3(signature = (family, n, m, p, q))]
fn predicted_slope(family: &str, n: usize, m: Option<u32>, p: f64, q: f64) -> PyResult<f64> {
    cc::predicted_slope(parse_family(family)?, n, m, p, q).map_err(err)
}

/// Least squares on (log R, log value): returns (slope, intercept, stderr,
/// points).
#[pyfunction]
fn fit_log_slope(rs: Vec<f64>, values: Vec<f64>) -> PyResult<(f64, f64, f64, usize)> {
    let fit = cc::fit_log_slope(&rs, &values).map_err(err)?;
    Ok((fit.slope, fit.intercept, fit.stderr, fit.points))
}

#[pymodule]
fn collapse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GaussianTerm>()?;
    m.add_class::<WavepacketSum>()?;
    m.add_function(wrap_pyfunction!(tube_constant, m)?)?;
    m.add_function(wrap_pyfunction!(inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(build_family, m)?)?;
    m.add_function(wrap_pyfunction!(run_scan, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_slope, m)?)?;
    m.add_function(wrap_pyfunction!(fit_log_slope, m)?)?;
    Ok(())
}
