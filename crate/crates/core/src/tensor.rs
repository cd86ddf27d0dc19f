//! Channel-major image tensors and the configuration types shared by every
//! transform.
//!
//! The flat layout mirrors how the accelerator stores inputs: one channel per
//! memory instance, so each channel occupies a contiguous `H * W` slice and
//! element `(c, i, j)` lives at `c * H * W + i * W + j`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DexError, Result};

/// `(C, H, W)` extents of a tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        Shape {
            channels,
            height,
            width,
        }
    }

    /// Number of elements, `C * H * W`.
    pub const fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn plane(&self) -> usize {
        self.height * self.width
    }

    pub fn with_channels(self, channels: usize) -> Self {
        Shape { channels, ..self }
    }

    fn ensure_nonzero(&self) -> Result<()> {
        if self.channels == 0 || self.height == 0 || self.width == 0 {
            return Err(DexError::Shape(format!(
                "every dimension must be at least 1, got {self}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

impl FromStr for Shape {
    type Err = DexError;

    /// Parses `CxHxW`.
    fn from_str(s: &str) -> Result<Self> {
        let dims = parse_dims(s)?;
        match dims.as_slice() {
            &[c, h, w] => {
                let shape = Shape::new(c, h, w);
                shape.ensure_nonzero()?;
                Ok(shape)
            }
            _ => Err(DexError::InvalidArgument(format!(
                "expected a shape of the form CxHxW, got {s:?}"
            ))),
        }
    }
}

/// Parses an `x`-separated list of positive integers such as `64x32x32` or `32x32`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X'])
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| {
                    DexError::InvalidArgument(format!(
                        "{s:?} is not a list of positive integers separated by 'x'"
                    ))
                })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DType {
    /// Raw pixel, 0..=255.
    U8,
    /// Normalized real value.
    F32,
    /// Q7 fixed point, one signed byte per value.
    I8Q7,
}

impl DType {
    pub const fn element_size(self) -> usize {
        match self {
            DType::U8 | DType::I8Q7 => 1,
            DType::F32 => 4,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            DType::U8 => "u8",
            DType::F32 => "f32",
            DType::I8Q7 => "i8q7",
        }
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DType {
    type Err = DexError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u8" | "uint8" => Ok(DType::U8),
            "f32" | "float32" => Ok(DType::F32),
            "i8q7" | "q7" | "i8" | "int8" => Ok(DType::I8Q7),
            _ => Err(DexError::InvalidArgument(format!("unknown dtype {s:?}"))),
        }
    }
}

/// Typed backing storage for an [`ImageTensor`].
#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    F32(Vec<f32>),
    I8Q7(Vec<i8>),
}

impl TensorData {
    pub fn zeros(dtype: DType, len: usize) -> Self {
        match dtype {
            DType::U8 => TensorData::U8(vec![0; len]),
            DType::F32 => TensorData::F32(vec![0.0; len]),
            DType::I8Q7 => TensorData::I8Q7(vec![0; len]),
        }
    }

    pub fn dtype(&self) -> DType {
        match self {
            TensorData::U8(_) => DType::U8,
            TensorData::F32(_) => DType::F32,
            TensorData::I8Q7(_) => DType::I8Q7,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::F32(v) => v.len(),
            TensorData::I8Q7(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at `index`, widened to `f64`.
    pub fn value(&self, index: usize) -> f64 {
        match self {
            TensorData::U8(v) => f64::from(v[index]),
            TensorData::F32(v) => f64::from(v[index]),
            TensorData::I8Q7(v) => f64::from(v[index]),
        }
    }

    /// Builds a new buffer where element `n` is `self[sources[n]]`, or zero
    /// for `None`.
    ///
    /// Every pixel-selection strategy reduces to one of these gathers, which
    /// keeps them dtype-agnostic.
    pub fn gather(&self, sources: &[Option<usize>]) -> TensorData {
        fn pick<T: Copy + Default>(src: &[T], sources: &[Option<usize>]) -> Vec<T> {
            sources
                .iter()
                .map(|s| s.map_or_else(T::default, |idx| src[idx]))
                .collect()
        }
        match self {
            TensorData::U8(v) => TensorData::U8(pick(v, sources)),
            TensorData::F32(v) => TensorData::F32(pick(v, sources)),
            TensorData::I8Q7(v) => TensorData::I8Q7(pick(v, sources)),
        }
    }
}

/// A validated `(C, H, W)` image in channel-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageTensor {
    shape: Shape,
    data: TensorData,
}

impl ImageTensor {
    pub fn new(shape: Shape, data: TensorData) -> Result<Self> {
        shape.ensure_nonzero()?;
        if data.len() != shape.len() {
            return Err(DexError::LengthMismatch {
                shape: shape.to_string(),
                expected: shape.len(),
                actual: data.len(),
            });
        }
        Ok(ImageTensor { shape, data })
    }

    pub fn from_u8(shape: Shape, data: Vec<u8>) -> Result<Self> {
        Self::new(shape, TensorData::U8(data))
    }

    pub fn from_f32(shape: Shape, data: Vec<f32>) -> Result<Self> {
        Self::new(shape, TensorData::F32(data))
    }

    pub fn from_q7(shape: Shape, data: Vec<i8>) -> Result<Self> {
        Self::new(shape, TensorData::I8Q7(data))
    }

    /// Builds a tensor of `dtype` from untyped values, rejecting anything the
    /// dtype cannot represent exactly.
    pub fn from_values(dtype: DType, shape: Shape, values: &[f64]) -> Result<Self> {
        shape.ensure_nonzero()?;
        if values.len() != shape.len() {
            return Err(DexError::LengthMismatch {
                shape: shape.to_string(),
                expected: shape.len(),
                actual: values.len(),
            });
        }
        let out_of_range = |index: usize, value: f64| DexError::ValueOutOfRange {
            dtype: dtype.name(),
            index,
            value,
        };
        let integral = |index: usize, v: f64, lo: f64, hi: f64| {
            if v.fract() == 0.0 && (lo..=hi).contains(&v) {
                Ok(v)
            } else {
                Err(out_of_range(index, v))
            }
        };
        let data = match dtype {
            DType::U8 => TensorData::U8(
                values
                    .iter()
                    .enumerate()
                    .map(|(n, &v)| integral(n, v, 0.0, 255.0).map(|v| v as u8))
                    .collect::<Result<_>>()?,
            ),
            DType::I8Q7 => TensorData::I8Q7(
                values
                    .iter()
                    .enumerate()
                    .map(|(n, &v)| integral(n, v, -128.0, 127.0).map(|v| v as i8))
                    .collect::<Result<_>>()?,
            ),
            DType::F32 => TensorData::F32(
                values
                    .iter()
                    .enumerate()
                    .map(|(n, &v)| {
                        let x = v as f32;
                        if x.is_finite() {
                            Ok(x)
                        } else {
                            Err(out_of_range(n, v))
                        }
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(ImageTensor { shape, data })
    }

    pub fn zeros(dtype: DType, shape: Shape) -> Result<Self> {
        Self::new(shape, TensorData::zeros(dtype, shape.len()))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.shape.channels
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn into_data(self) -> TensorData {
        self.data
    }

    /// Flat offset of `(c, i, j)`.
    #[inline]
    pub fn offset(&self, c: usize, i: usize, j: usize) -> usize {
        debug_assert!(c < self.shape.channels && i < self.shape.height && j < self.shape.width);
        c * self.shape.plane() + i * self.shape.width + j
    }

    /// Element `(c, i, j)` widened to `f64`.
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data.value(self.offset(c, i, j))
    }

    /// All values widened to `f64`, in storage order.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.data.len()).map(|n| self.data.value(n)).collect()
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.data {
            TensorData::U8(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            TensorData::F32(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_q7(&self) -> Option<&[i8]> {
        match &self.data {
            TensorData::I8Q7(v) => Some(v),
            _ => None,
        }
    }

    /// Output tensor of `shape` whose element `n` is `self[sources[n]]` (zero for `None`).
    pub(crate) fn gather(&self, shape: Shape, sources: &[Option<usize>]) -> ImageTensor {
        debug_assert_eq!(shape.len(), sources.len());
        ImageTensor {
            shape,
            data: self.data.gather(sources),
        }
    }
}

/// Validated tensor construction from untyped values.
pub fn make_tensor(
    dtype: DType,
    channels: usize,
    height: usize,
    width: usize,
    values: &[f64],
) -> Result<ImageTensor> {
    ImageTensor::from_values(dtype, Shape::new(channels, height, width), values)
}

/// Channel-extension strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Downsample,
    Dex,
    #[serde(rename = "coordconv")]
    CoordConv,
    #[serde(rename = "coordconv_r")]
    CoordConvR,
    Repetition,
    Rotation,
    Tile,
    PatchSequential,
    PatchRandom,
}

impl Strategy {
    pub const ALL: [Strategy; 9] = [
        Strategy::Downsample,
        Strategy::Dex,
        Strategy::CoordConv,
        Strategy::CoordConvR,
        Strategy::Repetition,
        Strategy::Rotation,
        Strategy::Tile,
        Strategy::PatchSequential,
        Strategy::PatchRandom,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Strategy::Downsample => "downsample",
            Strategy::Dex => "dex",
            Strategy::CoordConv => "coordconv",
            Strategy::CoordConvR => "coordconv_r",
            Strategy::Repetition => "repetition",
            Strategy::Rotation => "rotation",
            Strategy::Tile => "tile",
            Strategy::PatchSequential => "patch_sequential",
            Strategy::PatchRandom => "patch_random",
        }
    }

    pub fn valid_names() -> String {
        Strategy::ALL.map(Strategy::name).join(", ")
    }

    /// Whether the strategy pulls pixels beyond the plain downsampled grid
    /// into its extra channels.
    pub const fn samples_extra_pixels(self) -> bool {
        matches!(
            self,
            Strategy::Dex | Strategy::Tile | Strategy::PatchSequential | Strategy::PatchRandom
        )
    }

    /// Channel count this strategy emits for a `input_channels`-channel
    /// input when `requested` channels are configured.
    pub const fn output_channels(self, input_channels: usize, requested: usize) -> usize {
        match self {
            Strategy::Downsample => input_channels,
            Strategy::CoordConv => input_channels + 2,
            Strategy::CoordConvR => input_channels + 3,
            _ => requested,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = DexError;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match normalized.as_str() {
            "downsampling" => "downsample",
            "coordconv_with_r" | "coordconvr" => "coordconv_r",
            "patch_seq" | "sequential" => "patch_sequential",
            "patch_rand" | "random" => "patch_random",
            other => other,
        };
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == alias)
            .ok_or_else(|| DexError::UnknownStrategy {
                name: s.to_string(),
                valid: Strategy::valid_names(),
            })
    }
}

pub const DEFAULT_ROTATION_RANGE_DEG: (f64, f64) = (-30.0, 30.0);

fn default_rotation_range() -> (f64, f64) {
    DEFAULT_ROTATION_RANGE_DEG
}

/// Strategy selector plus target output shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConfig {
    pub strategy: Strategy,
    pub out_channels: usize,
    pub out_height: usize,
    pub out_width: usize,
    /// Only read by [`Strategy::PatchRandom`].
    #[serde(default)]
    pub seed: u64,
    /// Only read by [`Strategy::Rotation`].
    #[serde(default = "default_rotation_range")]
    pub rotation_range_deg: (f64, f64),
}

impl ExtensionConfig {
    pub fn new(strategy: Strategy, out_shape: Shape) -> Self {
        ExtensionConfig {
            strategy,
            out_channels: out_shape.channels,
            out_height: out_shape.height,
            out_width: out_shape.width,
            seed: 0,
            rotation_range_deg: DEFAULT_ROTATION_RANGE_DEG,
        }
    }

    pub fn dex(out_shape: Shape) -> Self {
        Self::new(Strategy::Dex, out_shape)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rotation_range(mut self, lo_deg: f64, hi_deg: f64) -> Self {
        self.rotation_range_deg = (lo_deg, hi_deg);
        self
    }

    pub fn out_shape(&self) -> Shape {
        Shape::new(self.out_channels, self.out_height, self.out_width)
    }

    /// Checks the configuration against a concrete input shape.
    pub fn validate_for(&self, input: Shape) -> Result<()> {
        let out = self.out_shape();
        out.ensure_nonzero()?;
        check_no_upsampling(input, out.height, out.width)?;
        let c_in = input.channels;
        let expected = self.strategy.output_channels(c_in, self.out_channels);
        match self.strategy {
            Strategy::Downsample | Strategy::CoordConv | Strategy::CoordConvR
                if self.out_channels != expected =>
            {
                Err(DexError::Channel(format!(
                    "{} on a {c_in}-channel input emits {expected} channels, but {} were configured",
                    self.strategy, self.out_channels
                )))
            }
            _ if self.out_channels < c_in => Err(DexError::Channel(format!(
                "out_channels {} is smaller than the {c_in} input channels",
                self.out_channels
            ))),
            _ => Ok(()),
        }
    }
}

pub(crate) fn check_no_upsampling(input: Shape, out_height: usize, out_width: usize) -> Result<()> {
    if out_height == 0 || out_width == 0 {
        return Err(DexError::Shape("output height and width must be at least 1".into()));
    }
    if out_height > input.height || out_width > input.width {
        return Err(DexError::Shape(format!(
            "cannot upsample {}x{} to {out_height}x{out_width}",
            input.height, input.width
        )));
    }
    Ok(())
}

/// First convolution layer of a model, as far as parameter accounting needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    /// Spatial edge of the (square) kernel, e.g. 3 for 3x3.
    pub kernel_edge: usize,
    pub out_channels: usize,
}

impl LayerSpec {
    pub fn new(kernel_edge: usize, out_channels: usize) -> Result<Self> {
        if kernel_edge == 0 || out_channels == 0 {
            return Err(DexError::InvalidArgument(
                "kernel_edge and out_channels must both be at least 1".into(),
            ));
        }
        Ok(LayerSpec {
            kernel_edge,
            out_channels,
        })
    }
}
