//! Python module `dexkit`.
//!
//! Tensors cross the boundary as flat channel-major value lists plus a
//! `(C, H, W)` shape. Every library error is raised as `dexkit.DexError`
//! with the error kind at the start of the message.

use std::path::PathBuf;

use ::dexkit as core;
use core::pipeline::quantize::NormalizationSpec;
use core::{
    DType, DeviceProfile, ExtensionConfig, ImageTensor, LayerSpec, PlanRequest, Shape, Strategy,
    UtilizationReport,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(dexkit, DexError, PyValueError, "Raised for every dexkit failure.");

fn raise(err: core::DexError) -> PyErr {
    DexError::new_err(err.to_string())
}

type Dims = (usize, usize, usize);

fn shape_of(dims: Dims) -> Shape {
    Shape::new(dims.0, dims.1, dims.2)
}

fn dims_of(shape: Shape) -> Dims {
    (shape.channels, shape.height, shape.width)
}

/// A `C x H x W` tensor of dtype `u8`, `f32` or `i8q7`.
#[pyclass(name = "Tensor", module = "dexkit", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyTensor {
    inner: ImageTensor,
}

#[pymethods]
impl PyTensor {
    #[new]
    #[pyo3(signature = (values, shape, dtype = "u8"))]
    fn new(values: Vec<f64>, shape: Dims, dtype: &str) -> PyResult<Self> {
        let dtype: DType = dtype.parse().map_err(raise)?;
        let inner = ImageTensor::from_values(dtype, shape_of(shape), &values).map_err(raise)?;
        Ok(PyTensor { inner })
    }

    #[getter]
    fn shape(&self) -> Dims {
        dims_of(self.inner.shape())
    }

    #[getter]
    fn dtype(&self) -> &'static str {
        self.inner.dtype().name()
    }

    fn get(&self, c: usize, i: usize, j: usize) -> PyResult<f64> {
        let s = self.inner.shape();
        if c >= s.channels || i >= s.height || j >= s.width {
            return Err(raise(core::DexError::IndexOutOfRange(format!(
                "({c}, {i}, {j}) outside {s}"
            ))));
        }
        Ok(self.inner.get(c, i, j))
    }

    /// Flat channel-major values.
    fn tolist(&self) -> Vec<f64> {
        self.inner.to_f64_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.shape().len()
    }

    fn __repr__(&self) -> String {
        format!("Tensor(shape={}, dtype={})", self.inner.shape(), self.dtype())
    }
}

impl From<ImageTensor> for PyTensor {
    fn from(inner: ImageTensor) -> Self {
        PyTensor { inner }
    }
}

/// Builds an accelerator input with any strategy.
#[pyfunction]
#[pyo3(signature = (tensor, strategy, out_shape, seed = 0, rotation_range = (-30.0, 30.0)))]
fn transform(
    tensor: &PyTensor,
    strategy: &str,
    out_shape: Dims,
    seed: u64,
    rotation_range: (f64, f64),
) -> PyResult<PyTensor> {
    let strategy: Strategy = strategy.parse().map_err(raise)?;
    let config = ExtensionConfig::new(strategy, shape_of(out_shape))
        .with_seed(seed)
        .with_rotation_range(rotation_range.0, rotation_range.1);
    core::extend(&tensor.inner, &config).map(Into::into).map_err(raise)
}

#[pyfunction]
fn dex_extend(tensor: &PyTensor, out_shape: Dims) -> PyResult<PyTensor> {
    core::dex_extend(&tensor.inner, shape_of(out_shape))
        .map(Into::into)
        .map_err(raise)
}

#[pyfunction]
fn downsample(tensor: &PyTensor, out_height: usize, out_width: usize) -> PyResult<PyTensor> {
    core::downsample(&tensor.inner, out_height, out_width)
        .map(Into::into)
        .map_err(raise)
}

/// `(start_row, end_row, start_col, end_col)`, end exclusive.
#[pyfunction]
fn patch_bounds(
    i: usize,
    j: usize,
    in_h: usize,
    in_w: usize,
    out_h: usize,
    out_w: usize,
) -> PyResult<(usize, usize, usize, usize)> {
    let b = core::patch_bounds(i, j, in_h, in_w, out_h, out_w).map_err(raise)?;
    Ok((b.start_row, b.end_row, b.start_col, b.end_col))
}

/// Fit verdict and utilization for a tensor shape on a device profile.
///
/// The returned dict always has the same keys; metrics that need
/// `orig_shape` or a layer are `None` without them.
#[pyfunction]
#[pyo3(signature = (shape, profile = "max78000", orig_shape = None, strategy = "dex", bytes_per_value = 1, kernel = None, layer_out = None))]
#[allow(clippy::too_many_arguments)]
fn plan<'py>(
    py: Python<'py>,
    shape: Dims,
    profile: &str,
    orig_shape: Option<Dims>,
    strategy: &str,
    bytes_per_value: usize,
    kernel: Option<usize>,
    layer_out: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let profile = DeviceProfile::resolve(profile).map_err(raise)?;
    let mut request = PlanRequest::new(shape_of(shape))
        .with_strategy(strategy.parse().map_err(raise)?)
        .with_bytes_per_value(bytes_per_value);
    if let Some(src) = orig_shape {
        request = request.with_source(shape_of(src));
    }
    match (kernel, layer_out) {
        (Some(k), Some(n)) => request = request.with_layer(LayerSpec::new(k, n).map_err(raise)?),
        (None, None) => {}
        _ => {
            return Err(raise(core::DexError::InvalidArgument(
                "kernel and layer_out must be given together".into(),
            )))
        }
    }
    let UtilizationReport {
        fits,
        bytes_per_channel,
        processors_used,
        processor_utilization,
        info_utilization,
        info_ratio,
        first_layer_params,
        first_layer_param_delta,
    } = UtilizationReport::compute(&request, &profile);
    let d = PyDict::new(py);
    d.set_item("fits", fits)?;
    d.set_item("bytes_per_channel", bytes_per_channel)?;
    d.set_item("processors_used", processors_used)?;
    d.set_item("processor_utilization", processor_utilization)?;
    d.set_item("info_utilization", info_utilization)?;
    d.set_item("info_ratio", info_ratio)?;
    d.set_item("first_layer_params", first_layer_params)?;
    d.set_item("first_layer_param_delta", first_layer_param_delta)?;
    Ok(d)
}

/// `(p / 255 - mean) / std` per channel. Defaults to ImageNet statistics.
#[pyfunction]
#[pyo3(signature = (tensor, mean = None, std = None))]
fn normalize(tensor: &PyTensor, mean: Option<Vec<f32>>, std: Option<Vec<f32>>) -> PyResult<PyTensor> {
    let spec = match (mean, std) {
        (None, None) => NormalizationSpec::default(),
        (Some(mean), Some(std)) => NormalizationSpec::new(mean, std).map_err(raise)?,
        _ => {
            return Err(raise(core::DexError::InvalidArgument(
                "mean and std must be given together".into(),
            )))
        }
    };
    core::pipeline::normalize(&tensor.inner, &spec)
        .map(Into::into)
        .map_err(raise)
}

#[pyfunction]
fn quantize_q7(tensor: &PyTensor) -> PyResult<PyTensor> {
    core::pipeline::quantize_q7(&tensor.inner)
        .map(Into::into)
        .map_err(raise)
}

#[pyfunction]
fn read_tensor(path: PathBuf) -> PyResult<PyTensor> {
    core::pipeline::read_tensor(&path).map(Into::into).map_err(raise)
}

#[pyfunction]
fn write_tensor(path: PathBuf, tensor: &PyTensor) -> PyResult<()> {
    core::pipeline::write_tensor(&path, &tensor.inner).map_err(raise)
}

/// Decodes a PNG or PNM file into a `(3, H, W)` u8 tensor.
#[pyfunction]
fn load_image(path: PathBuf) -> PyResult<PyTensor> {
    core::pipeline::load_image(&path).map(Into::into).map_err(raise)
}

#[pyfunction]
fn strategies() -> Vec<&'static str> {
    Strategy::ALL.iter().map(|s| s.name()).collect()
}

#[pyfunction]
fn profiles() -> Vec<String> {
    DeviceProfile::builtins().into_iter().map(|p| p.name).collect()
}

#[pymodule(name = "dexkit")]
fn dexkit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DexError", m.py().get_type::<DexError>())?;
    m.add_class::<PyTensor>()?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(dex_extend, m)?)?;
    m.add_function(wrap_pyfunction!(downsample, m)?)?;
    m.add_function(wrap_pyfunction!(patch_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_q7, m)?)?;
    m.add_function(wrap_pyfunction!(read_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(write_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(strategies, m)?)?;
    m.add_function(wrap_pyfunction!(profiles, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PyTensor {
        PyTensor::new((0..48).map(f64::from).collect(), (3, 4, 4), "u8").unwrap()
    }

    #[test]
    fn dex_through_the_wrapper() {
        let out = dex_extend(&toy(), (6, 1, 1)).unwrap();
        assert_eq!(out.tolist(), vec![0.0, 16.0, 32.0, 15.0, 31.0, 47.0]);
        assert_eq!(out.shape(), (6, 1, 1));
        let out = transform(&toy(), "dex", (6, 2, 2), 0, (-30.0, 30.0)).unwrap();
        assert_eq!(&out.tolist()[..6], &[0.0, 2.0, 8.0, 10.0, 16.0, 18.0]);
    }

    #[test]
    fn errors_carry_the_kind() {
        Python::initialize();
        Python::attach(|py| {
            let err = PyTensor::new(vec![1.0; 5], (1, 2, 2), "u8").err().unwrap();
            assert!(err.is_instance_of::<DexError>(py));
            assert!(err.to_string().contains("LengthMismatch"), "{err}");
            let err = transform(&toy(), "zoom", (6, 1, 1), 0, (0.0, 0.0)).err().unwrap();
            assert!(err.to_string().contains("UnknownStrategy"));
            let err = plan(py, (3, 4, 4), "nope", None, "dex", 1, None, None).err().unwrap();
            assert!(err.to_string().contains("UnknownProfile"));
        });
    }

    #[test]
    fn plan_dict_keys() {
        Python::initialize();
        Python::attach(|py| {
            let d = plan(py, (64, 32, 32), "max78000", Some((3, 350, 350)), "dex", 1, Some(3), Some(64)).unwrap();
            let keys: Vec<String> = d.keys().extract().unwrap();
            assert_eq!(
                keys,
                [
                    "fits",
                    "bytes_per_channel",
                    "processors_used",
                    "processor_utilization",
                    "info_utilization",
                    "info_ratio",
                    "first_layer_params",
                    "first_layer_param_delta"
                ]
            );
            let delta: i64 = d.get_item("first_layer_param_delta").unwrap().unwrap().extract().unwrap();
            assert_eq!(delta, 35136);
        });
    }
}
