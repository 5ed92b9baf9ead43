//! Python bindings. Tensors cross the boundary as flat `list[float]` plus a
//! shape, matrices as `list[list[float]]`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

use datainit_core::harness::{self, RunConfig, RunMetrics};
use datainit_core::init::{self, Scheme};
use datainit_core::nn::{self, NetworkSpec};
use datainit_core::numerics::{self, Matrix, Tensor};
use datainit_core::{rng, Error};

create_exception!(
    datainit,
    DataError,
    PyValueError,
    "Malformed or degenerate input data."
);
create_exception!(
    datainit,
    NumericalFailure,
    PyArithmeticError,
    "Non-finite values or an indefinite matrix."
);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.root() {
        Error::InvalidArgument(_) | Error::Config { .. } => PyValueError::new_err(msg),
        Error::Format { .. } | Error::UnsupportedVersion { .. } | Error::DegenerateInput(_) => {
            DataError::new_err(msg)
        }
        Error::Io { .. } => PyOSError::new_err(msg),
        Error::NumericalFailure(_) => NumericalFailure::new_err(msg),
        Error::Layer { .. } => unreachable!(),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(to_py)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn scheme(name: &str) -> PyResult<Scheme> {
    name.parse().map_err(to_py)
}

/// A feed-forward network with its weights.
#[pyclass(name = "Network", module = "datainit", skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: nn::Network,
}

#[pymethods]
impl PyNetwork {
    /// Zero-weight network, e.g. `Network("flatten dense(10)", (1, 28, 28), 10)`.
    #[new]
    fn new(layers: &str, input_shape: [usize; 3], class_count: usize) -> PyResult<Self> {
        let spec = NetworkSpec::parse(layers, input_shape, class_count).map_err(to_py)?;
        Ok(Self {
            inner: nn::Network::zeros(spec),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        harness::load_model(path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        harness::save_model(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn layers(&self) -> String {
        self.inner.spec().describe()
    }

    #[getter]
    fn input_shape(&self) -> [usize; 3] {
        self.inner.spec().input_shape()
    }

    #[getter]
    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    #[getter]
    fn affine_count(&self) -> usize {
        self.inner.affine_count()
    }

    /// `(shape, weights, bias)` of affine layer `k` (1-based).
    fn weights(&self, k: usize) -> PyResult<(Vec<usize>, Vec<f64>, Vec<f64>)> {
        let p = k
            .checked_sub(1)
            .and_then(|i| self.inner.params().get(i))
            .ok_or_else(|| PyValueError::new_err(format!("layer {k} out of range")))?;
        Ok((
            p.weight.shape().to_vec(),
            p.weight.data().to_vec(),
            p.bias.data().to_vec(),
        ))
    }

    fn set_weights(&mut self, k: usize, weights: Vec<f64>, bias: Vec<f64>) -> PyResult<()> {
        let mut params = self.inner.params().to_vec();
        let p = k
            .checked_sub(1)
            .and_then(|i| params.get_mut(i))
            .ok_or_else(|| PyValueError::new_err(format!("layer {k} out of range")))?;
        p.weight = Tensor::new(p.weight.shape().to_vec(), weights).map_err(to_py)?;
        p.bias = Tensor::vector(bias);
        self.inner = nn::Network::from_params(self.inner.spec().clone(), params).map_err(to_py)?;
        Ok(())
    }

    /// Logits for one image given as a flat `C·H·W` list.
    fn forward(&self, image: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = self.image(image)?;
        self.inner.forward(&x).map(Tensor::into_data).map_err(to_py)
    }

    fn predict(&self, image: Vec<f64>) -> PyResult<usize> {
        let x = self.image(image)?;
        self.inner.predict(&x).map_err(to_py)
    }

    /// `(loss, flat gradient)` for one labelled image.
    fn loss_and_gradient(&self, image: Vec<f64>, label: usize) -> PyResult<(f64, Vec<f64>)> {
        let x = self.image(image)?;
        let (loss, g) = nn::backward(&self.inner, &x, label).map_err(to_py)?;
        Ok((loss, g.flatten()))
    }

    /// Input-gradient heatmap, `H` rows of `W` values in `[0, 1]`.
    fn saliency(&self, image: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let x = self.image(image)?;
        let map = harness::saliency_map(&self.inner, &x).map_err(to_py)?;
        let w = map.shape()[1];
        Ok(map.data().chunks(w).map(<[f64]>::to_vec).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Network('{}', {:?})",
            self.inner.spec().describe(),
            self.inner.spec().input_shape()
        )
    }
}

impl PyNetwork {
    fn image(&self, data: Vec<f64>) -> PyResult<Tensor> {
        Tensor::new(self.inner.spec().input_shape().to_vec(), data).map_err(to_py)
    }
}

/// A parsed run configuration file.
#[pyclass(name = "RunConfig", module = "datainit", skip_from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        RunConfig::load(path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (text, base_dir = PathBuf::from(".")))]
    fn parse(text: &str, base_dir: PathBuf) -> PyResult<Self> {
        RunConfig::parse(text, &base_dir)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn with_init(&self, name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_scheme(scheme(name)?),
        })
    }

    fn with_seed(&self, seed: u64) -> Self {
        Self {
            inner: self.inner.with_seed(seed),
        }
    }

    #[getter]
    fn out_dir(&self) -> PathBuf {
        self.inner.out_dir.clone()
    }

    #[setter]
    fn set_out_dir(&mut self, dir: PathBuf) {
        self.inner.out_dir = dir;
    }

    #[getter]
    fn init(&self) -> String {
        self.inner.init.scheme.to_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn epochs(&self) -> usize {
        self.inner.epochs
    }

    #[setter]
    fn set_epochs(&mut self, epochs: usize) {
        self.inner.epochs = epochs;
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

type Rows = Vec<(usize, f64, f64, f64)>;
type SchemeResult = (String, Option<Rows>, Option<String>);

fn metric_rows(m: &RunMetrics) -> Rows {
    m.rows
        .iter()
        .map(|r| (r.epoch, r.train_loss, r.val_loss, r.val_accuracy))
        .collect()
}

/// Train per the config and write its artifacts. Returns
/// `(rows, network)` with rows `(epoch, train_loss, val_loss, val_accuracy)`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &PyRunConfig) -> PyResult<(Rows, PyNetwork)> {
    let cfg = config.inner.clone();
    let out = py
        .detach(move || harness::run_experiment(&cfg))
        .map_err(to_py)?;
    Ok((metric_rows(&out.metrics), PyNetwork { inner: out.network }))
}

/// Run several initializers on one split. Each entry is
/// `(scheme, rows, error)`; exactly one of `rows` and `error` is `None`.
#[pyfunction]
fn compare_initializers(
    py: Python<'_>,
    config: &PyRunConfig,
    inits: Vec<String>,
) -> PyResult<Vec<SchemeResult>> {
    let schemes = inits
        .iter()
        .map(|s| scheme(s))
        .collect::<PyResult<Vec<_>>>()?;
    let cfg = config.inner.clone();
    let results = py
        .detach(move || harness::compare_initializers(&cfg, &schemes))
        .map_err(to_py)?;
    Ok(results
        .into_iter()
        .map(|(s, r)| match r {
            Ok(o) => (s.to_string(), Some(metric_rows(&o.metrics)), None),
            Err(e) => (s.to_string(), None, Some(e.to_string())),
        })
        .collect())
}

/// Initial network a `train` run with this config would start from.
#[pyfunction]
fn initial_network(config: &PyRunConfig) -> PyResult<PyNetwork> {
    let cfg = &config.inner;
    let dataset = harness::load_dataset(&cfg.dataset, cfg.seed).map_err(to_py)?;
    let data = harness::prepare(cfg, &dataset).map_err(to_py)?;
    harness::initial_network(cfg, &data)
        .map(|inner| PyNetwork { inner })
        .map_err(to_py)
}

/// Eigenvalues (descending) and eigenvectors (as rows) of a symmetric matrix.
#[pyfunction]
fn sym_eigh(matrix_rows: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let eig = numerics::sym_eigendecomposition(&matrix(matrix_rows)?).map_err(to_py)?;
    Ok((eig.values, rows(&eig.vectors.transpose())))
}

#[pyfunction]
#[pyo3(signature = (samples, epsilon = 1e-5))]
fn zca_whiten(samples: Vec<Vec<f64>>, epsilon: f64) -> PyResult<Vec<Vec<f64>>> {
    numerics::zca_whiten(&matrix(samples)?, epsilon)
        .map(|m| rows(&m))
        .map_err(to_py)
}

/// `count` draws from `N(mean, covariance + εI)`.
#[pyfunction]
#[pyo3(signature = (mean, covariance, count, seed, epsilon = 1e-5))]
fn sample_gaussian(
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    count: usize,
    seed: u64,
    epsilon: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let model = numerics::GaussianModel::new(mean, matrix(covariance)?).map_err(to_py)?;
    numerics::sample_multivariate_gaussian(&model, count, epsilon, &mut rng::seeded(seed))
        .map(|m| rows(&m))
        .map_err(to_py)
}

/// Block-PCA filter bank from images given as flat lists of shape `(c, h, w)`.
#[pyfunction]
#[pyo3(signature = (images, shape, n_k, m, center = false))]
fn pca_init(
    images: Vec<Vec<f64>>,
    shape: [usize; 3],
    n_k: usize,
    m: usize,
    center: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let images = images
        .into_iter()
        .map(|d| Tensor::new(shape.to_vec(), d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    init::pca_init(&images, n_k, m, shape[0], center)
        .map(|b| rows(&b.filters))
        .map_err(to_py)
}

/// Data-statistics filter bank for one layer from its crop matrix.
#[pyfunction]
#[pyo3(signature = (crops, n_k, fan_in, seed, epsilon = 1e-5))]
fn data_stats_init_layer(
    crops: Vec<Vec<f64>>,
    n_k: usize,
    fan_in: usize,
    seed: u64,
    epsilon: f64,
) -> PyResult<Vec<Vec<f64>>> {
    init::data_stats_init_layer(
        &matrix(crops)?,
        n_k,
        fan_in,
        epsilon,
        &mut rng::seeded(seed),
    )
    .map(|b| rows(&b.filters))
    .map_err(to_py)
}

#[pyfunction]
fn he_weights(fan_in: usize, shape: Vec<usize>, seed: u64) -> PyResult<Vec<f64>> {
    init::init_he(fan_in, &shape, &mut rng::seeded(seed))
        .map(Tensor::into_data)
        .map_err(to_py)
}

#[pymodule]
fn datainit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DataError", m.py().get_type::<DataError>())?;
    m.add("NumericalFailure", m.py().get_type::<NumericalFailure>())?;
    m.add(
        "SCHEMES",
        Scheme::ALL.iter().map(|s| s.name()).collect::<Vec<_>>(),
    )?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(compare_initializers, m)?)?;
    m.add_function(wrap_pyfunction!(initial_network, m)?)?;
    m.add_function(wrap_pyfunction!(sym_eigh, m)?)?;
    m.add_function(wrap_pyfunction!(zca_whiten, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(pca_init, m)?)?;
    m.add_function(wrap_pyfunction!(data_stats_init_layer, m)?)?;
    m.add_function(wrap_pyfunction!(he_weights, m)?)?;
    Ok(())
}
