//! Resource analytics for an input tensor on a per-processor-memory
//! accelerator: fit verdicts, processor and information utilization, and the
//! first-layer parameter cost of extra channels.

use serde::{Deserialize, Serialize};

use crate::profile::DeviceProfile;
use crate::tensor::{LayerSpec, Shape, Strategy};

/// Rounds to one decimal place, half away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Result of checking one tensor against a device's memory instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitVerdict {
    pub fits: bool,
    /// Every channel occupies one instance of this many bytes.
    pub bytes_per_channel: u64,
    pub per_instance_bytes: u64,
    pub channels: usize,
    pub num_processors: usize,
}

impl FitVerdict {
    pub fn channels_fit(&self) -> bool {
        self.channels <= self.num_processors
    }

    pub fn channel_bytes_fit(&self) -> bool {
        self.bytes_per_channel <= self.per_instance_bytes
    }
}

/// A tensor fits when each channel gets its own processor and each channel
/// plane fits in one memory instance.
pub fn check_fit(
    channels: usize,
    height: usize,
    width: usize,
    bytes_per_value: usize,
    profile: &DeviceProfile,
) -> FitVerdict {
    let bytes_per_channel = (height as u64) * (width as u64) * (bytes_per_value as u64);
    FitVerdict {
        fits: channels <= profile.num_processors && bytes_per_channel <= profile.per_instance_bytes,
        bytes_per_channel,
        per_instance_bytes: profile.per_instance_bytes,
        channels,
        num_processors: profile.num_processors,
    }
}

/// Number of first-layer processors kept busy by `channels` input channels.
pub fn processors_used(channels: usize, profile: &DeviceProfile) -> usize {
    channels.min(profile.num_processors)
}

/// Fraction of processors used by the first layer, in `(0, 1]`.
pub fn processor_utilization(channels: usize, profile: &DeviceProfile) -> f64 {
    processors_used(channels, profile) as f64 / profile.num_processors as f64
}

/// Fraction of the source image's pixels represented in the output, capped at 1.
///
/// Plain downsampling keeps `H_O*W_O / (H_I*W_I)`; channel extension
/// multiplies this by `C_O / C_I`.
pub fn info_utilization(source: Shape, output: Shape) -> f64 {
    let spatial = output.plane() as f64 / source.plane() as f64;
    (output.channels as f64 / source.channels as f64 * spatial).min(1.0)
}

/// Information gain over plain downsampling: `C_O / C_I`, uncapped.
pub fn info_ratio(in_channels: usize, out_channels: usize) -> f64 {
    out_channels as f64 / in_channels as f64
}

/// Information ratio of a strategy. Strategies that only replicate or
/// re-project the downsampled grid, or append coordinates, stay at 1.
pub fn strategy_info_ratio(strategy: Strategy, in_channels: usize, out_channels: usize) -> f64 {
    if strategy.samples_extra_pixels() {
        info_ratio(in_channels, out_channels)
    } else {
        1.0
    }
}

/// Information utilization of a strategy's output relative to its source.
pub fn strategy_info_utilization(strategy: Strategy, source: Shape, output: Shape) -> f64 {
    let effective = if strategy.samples_extra_pixels() {
        output
    } else {
        output.with_channels(source.channels)
    };
    info_utilization(source, effective)
}

/// Largest channel count that runs without extra latency: one channel per
/// memory instance.
pub fn max_channels(profile: &DeviceProfile) -> usize {
    profile.num_processors
}

/// First-layer weights, `C * kernel_edge^2 * out_channels`.
pub fn first_layer_params(channels: usize, layer: &LayerSpec) -> u64 {
    (channels * layer.kernel_edge * layer.kernel_edge * layer.out_channels) as u64
}

/// Weights added by extending the input from `in_channels` to `out_channels`.
pub fn param_delta(in_channels: usize, out_channels: usize, layer: &LayerSpec) -> i64 {
    first_layer_params(out_channels, layer) as i64 - first_layer_params(in_channels, layer) as i64
}

/// What to analyse: the on-device tensor and, optionally, where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanRequest {
    pub shape: Shape,
    pub bytes_per_value: usize,
    /// Original image, for information metrics.
    pub source: Option<Shape>,
    pub strategy: Strategy,
    pub layer: Option<LayerSpec>,
}

impl PlanRequest {
    pub fn new(shape: Shape) -> Self {
        PlanRequest {
            shape,
            bytes_per_value: 1,
            source: None,
            strategy: Strategy::Dex,
            layer: None,
        }
    }

    pub fn with_source(mut self, source: Shape) -> Self {
        self.source = Some(source);
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_layer(mut self, layer: LayerSpec) -> Self {
        self.layer = Some(layer);
        self
    }

    pub fn with_bytes_per_value(mut self, bytes: usize) -> Self {
        self.bytes_per_value = bytes;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilizationReport {
    pub fits: bool,
    pub bytes_per_channel: u64,
    pub processors_used: usize,
    pub processor_utilization: f64,
    /// Needs a source shape.
    pub info_utilization: Option<f64>,
    /// Needs a source shape.
    pub info_ratio: Option<f64>,
    /// Needs a layer spec.
    pub first_layer_params: Option<u64>,
    /// Needs a layer spec and a source shape.
    pub first_layer_param_delta: Option<i64>,
}

impl UtilizationReport {
    pub fn compute(request: &PlanRequest, profile: &DeviceProfile) -> Self {
        let shape = request.shape;
        let fit = check_fit(
            shape.channels,
            shape.height,
            shape.width,
            request.bytes_per_value,
            profile,
        );
        let source = request.source;
        UtilizationReport {
            fits: fit.fits,
            bytes_per_channel: fit.bytes_per_channel,
            processors_used: processors_used(shape.channels, profile),
            processor_utilization: processor_utilization(shape.channels, profile),
            info_utilization: source
                .map(|src| strategy_info_utilization(request.strategy, src, shape)),
            info_ratio: source
                .map(|src| strategy_info_ratio(request.strategy, src.channels, shape.channels)),
            first_layer_params: request
                .layer
                .map(|layer| first_layer_params(shape.channels, &layer)),
            first_layer_param_delta: request
                .layer
                .zip(source)
                .map(|(layer, src)| param_delta(src.channels, shape.channels, &layer)),
        }
    }
}
