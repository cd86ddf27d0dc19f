//! Patch-wise even sampling with channel-wise stacking.
//!
//! The input is split into `H_O x W_O` patches. From each patch,
//! `K = ceil(C_O / C_I)` pixels are taken at evenly spaced flat positions, and
//! the `C_I` values of sample `k` land in output channels `k*C_I..(k+1)*C_I`
//! of the patch's output pixel. The last group is truncated at `C_O`, keeping
//! its lower channels.

use crate::error::{DexError, Result};
use crate::tensor::{check_no_upsampling, ImageTensor, Shape};

/// Half-open row/column window of the input that feeds one output pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatchBounds {
    pub start_row: usize,
    pub end_row: usize,
    pub start_col: usize,
    pub end_col: usize,
}

impl PatchBounds {
    pub fn height(&self) -> usize {
        self.end_row - self.start_row
    }

    pub fn width(&self) -> usize {
        self.end_col - self.start_col
    }

    pub fn area(&self) -> usize {
        self.height() * self.width()
    }

    /// Input `(row, col)` of the pixel at row-major position `flat` inside the patch.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let w = self.width();
        (self.start_row + flat / w, self.start_col + flat % w)
    }
}

/// `floor(index * input / output)` on integers.
#[inline]
fn scaled_floor(index: usize, input: usize, output: usize) -> usize {
    index * input / output
}

/// Window of the input covered by output pixel `(i, j)`.
///
/// Rows are `[floor(i*H_I/H_O), floor((i+1)*H_I/H_O))`, columns likewise.
/// Products are formed before dividing so non-integral ratios such as
/// 350/32 are exact.
pub fn patch_bounds(
    i: usize,
    j: usize,
    in_height: usize,
    in_width: usize,
    out_height: usize,
    out_width: usize,
) -> Result<PatchBounds> {
    if out_height == 0 || out_width == 0 || out_height > in_height || out_width > in_width {
        return Err(DexError::Shape(format!(
            "patch grid {out_height}x{out_width} does not tile a {in_height}x{in_width} input"
        )));
    }
    if i >= out_height || j >= out_width {
        return Err(DexError::IndexOutOfRange(format!(
            "patch ({i}, {j}) outside a {out_height}x{out_width} grid"
        )));
    }
    Ok(PatchBounds {
        start_row: scaled_floor(i, in_height, out_height),
        end_row: scaled_floor(i + 1, in_height, out_height),
        start_col: scaled_floor(j, in_width, out_width),
        end_col: scaled_floor(j + 1, in_width, out_width),
    })
}

/// `K = ceil(C_O / C_I)`, the number of pixels drawn from every patch.
pub fn samples_per_patch(in_channels: usize, out_channels: usize) -> usize {
    out_channels.div_ceil(in_channels)
}

/// Row-major positions `l_k = k * floor((H_P*W_P - 1) / (K - 1))`, with
/// `l_0 = 0` as the only sample when `K == 1`.
///
/// Small patches give a zero step and therefore repeated positions; these
/// are kept as-is.
pub fn even_sample_indices(patch_h: usize, patch_w: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(DexError::InvalidArgument("K must be at least 1".into()));
    }
    if patch_h == 0 || patch_w == 0 {
        return Err(DexError::InvalidArgument(format!(
            "empty {patch_h}x{patch_w} patch"
        )));
    }
    if k == 1 {
        return Ok(vec![0]);
    }
    let step = (patch_h * patch_w - 1) / (k - 1);
    Ok((0..k).map(|n| n * step).collect())
}

/// [`even_sample_indices`] as `(row, col)` offsets inside the patch.
pub fn even_sample_offsets(patch_h: usize, patch_w: usize, k: usize) -> Result<Vec<(usize, usize)>> {
    Ok(even_sample_indices(patch_h, patch_w, k)?
        .into_iter()
        .map(|l| (l / patch_w, l % patch_w))
        .collect())
}

/// Shared driver for every patch-sampling strategy.
///
/// `pick(i, j, bounds, K)` returns `K` row-major positions inside the
/// patch; the driver performs the channel-wise stacking and truncation.
pub(crate) fn stack_patch_samples<F>(
    input: &ImageTensor,
    out_channels: usize,
    out_height: usize,
    out_width: usize,
    pick: F,
) -> Result<ImageTensor>
where
    F: Fn(usize, usize, &PatchBounds, usize) -> Vec<usize>,
{
    let in_shape = input.shape();
    check_no_upsampling(in_shape, out_height, out_width)?;
    let c_in = in_shape.channels;
    if out_channels < c_in {
        return Err(DexError::Channel(format!(
            "cannot extend {c_in} channels down to {out_channels}"
        )));
    }
    let out_shape = Shape::new(out_channels, out_height, out_width);
    let k = samples_per_patch(c_in, out_channels);
    let mut sources = vec![None; out_shape.len()];
    for i in 0..out_height {
        for j in 0..out_width {
            let bounds = patch_bounds(i, j, in_shape.height, in_shape.width, out_height, out_width)?;
            let picks = pick(i, j, &bounds, k);
            debug_assert_eq!(picks.len(), k);
            for (group, &flat) in picks.iter().enumerate() {
                debug_assert!(flat < bounds.area());
                let (row, col) = bounds.locate(flat);
                for c in 0..c_in {
                    let oc = group * c_in + c;
                    if oc >= out_channels {
                        break;
                    }
                    sources[oc * out_shape.plane() + i * out_width + j] =
                        Some(input.offset(c, row, col));
                }
            }
        }
    }
    Ok(input.gather(out_shape, &sources))
}

/// Extends `input` to `out_shape` by patch-wise even sampling and
/// channel-wise stacking. The dtype is preserved.
pub fn dex_extend(input: &ImageTensor, out_shape: Shape) -> Result<ImageTensor> {
    stack_patch_samples(
        input,
        out_shape.channels,
        out_shape.height,
        out_shape.width,
        |_, _, bounds, k| {
            even_sample_indices(bounds.height(), bounds.width(), k)
                .expect("patch bounds are never empty")
        },
    )
}

/// Keeps the top-left pixel of every patch.
pub fn downsample(input: &ImageTensor, out_height: usize, out_width: usize) -> Result<ImageTensor> {
    stack_patch_samples(input, input.channels(), out_height, out_width, |_, _, _, _| vec![0])
}
