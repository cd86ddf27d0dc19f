use crate::baselines::{
    coordconv_augment, patch_random_extend, patch_sequential_extend, repetition_extend,
    rotation_extend, tile_extend,
};
use crate::error::Result;
use crate::tensor::{ExtensionConfig, ImageTensor, Strategy};
use crate::transform::{dex_extend, downsample};

/// Applies the configured strategy to `input`.
///
/// CoordConv variants downsample first and then append coordinates, so they
/// need an `F32` input; every other strategy preserves the input dtype.
pub fn extend(input: &ImageTensor, config: &ExtensionConfig) -> Result<ImageTensor> {
    config.validate_for(input.shape())?;
    let (c, h, w) = (config.out_channels, config.out_height, config.out_width);
    match config.strategy {
        Strategy::Downsample => downsample(input, h, w),
        Strategy::Dex => dex_extend(input, config.out_shape()),
        Strategy::CoordConv => coordconv_augment(&downsample(input, h, w)?, false),
        Strategy::CoordConvR => coordconv_augment(&downsample(input, h, w)?, true),
        Strategy::Repetition => repetition_extend(input, c, h, w),
        Strategy::Rotation => rotation_extend(input, c, h, w, config.rotation_range_deg),
        Strategy::Tile => tile_extend(input, c, h, w),
        Strategy::PatchSequential => patch_sequential_extend(input, c, h, w),
        Strategy::PatchRandom => patch_random_extend(input, c, h, w, config.seed),
    }
}
