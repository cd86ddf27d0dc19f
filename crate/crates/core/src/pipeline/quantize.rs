//! Normalization and Q7 conversion.

use serde::{Deserialize, Serialize};

use crate::error::{DexError, Result};
use crate::tensor::{ImageTensor, TensorData};

pub const IMAGENET_MEAN: [f32; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STD: [f32; 3] = [0.229, 0.224, 0.225];

/// Q7 has 7 fractional bits.
pub const Q7_SCALE: f32 = 128.0;

/// Per-channel mean and standard deviation.
///
/// Statistics shorter than the tensor's channel count are cycled, so RGB
/// statistics apply to every stacked RGB group of an extended image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub mean: Vec<f32>,
    pub std: Vec<f32>,
}

impl Default for NormalizationSpec {
    fn default() -> Self {
        NormalizationSpec {
            mean: IMAGENET_MEAN.to_vec(),
            std: IMAGENET_STD.to_vec(),
        }
    }
}

impl NormalizationSpec {
    pub fn new(mean: Vec<f32>, std: Vec<f32>) -> Result<Self> {
        let spec = NormalizationSpec { mean, std };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero mean and unit deviation, i.e. a plain division by 255.
    pub fn identity(channels: usize) -> Self {
        NormalizationSpec {
            mean: vec![0.0; channels],
            std: vec![1.0; channels],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.is_empty() || self.mean.len() != self.std.len() {
            return Err(DexError::SpecMismatch(format!(
                "{} means vs {} standard deviations",
                self.mean.len(),
                self.std.len()
            )));
        }
        if let Some(bad) = self.std.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(DexError::SpecMismatch(format!(
                "standard deviations must be positive, got {bad}"
            )));
        }
        Ok(())
    }

    fn check_channels(&self, channels: usize) -> Result<()> {
        self.validate()?;
        let n = self.mean.len();
        if channels < n {
            return Err(DexError::SpecMismatch(format!(
                "{n} channel statistics for a {channels}-channel tensor"
            )));
        }
        Ok(())
    }

    fn stats(&self, channel: usize) -> (f32, f32) {
        let n = channel % self.mean.len();
        (self.mean[n], self.std[n])
    }
}

/// `(pixel / 255 - mean_c) / std_c` for every element of a `U8` tensor.
pub fn normalize(input: &ImageTensor, spec: &NormalizationSpec) -> Result<ImageTensor> {
    let pixels = input.as_u8().ok_or_else(|| {
        DexError::Dtype(format!("normalize expects a u8 image, got {}", input.dtype()))
    })?;
    let shape = input.shape();
    spec.check_channels(shape.channels)?;
    let plane = shape.plane();
    let data = pixels
        .chunks_exact(plane)
        .enumerate()
        .flat_map(|(c, chan)| {
            let (mean, std) = spec.stats(c);
            chan.iter().map(move |&p| (f32::from(p) / 255.0 - mean) / std)
        })
        .collect();
    ImageTensor::new(shape, TensorData::F32(data))
}

/// One value to Q7: `clamp(round(x * 128), -128, 127)`, ties away from zero.
/// NaN maps to 0.
pub fn to_q7(x: f32) -> i8 {
    let scaled = (x * Q7_SCALE).round();
    if scaled.is_nan() {
        0
    } else {
        scaled.clamp(-128.0, 127.0) as i8
    }
}

pub fn from_q7(q: i8) -> f32 {
    f32::from(q) / Q7_SCALE
}

/// Saturating conversion of an `F32` tensor to Q7.
pub fn quantize_q7(input: &ImageTensor) -> Result<ImageTensor> {
    let values = input.as_f32().ok_or_else(|| {
        DexError::Dtype(format!("Q7 conversion expects an f32 tensor, got {}", input.dtype()))
    })?;
    ImageTensor::new(
        input.shape(),
        TensorData::I8Q7(values.iter().copied().map(to_q7).collect()),
    )
}
