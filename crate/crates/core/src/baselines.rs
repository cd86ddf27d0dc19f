//! Coordinate augmentation and the alternative channel-extension strategies
//! used for ablation: repetition, rotation, tiling, and sequential or random
//! sampling within each patch.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DexError, Result};
use crate::tensor::{check_no_upsampling, ImageTensor, Shape, TensorData};
use crate::transform::{downsample, patch_bounds, samples_per_patch, stack_patch_samples};

/// Appends CoordConv coordinate channels to an `F32` image.
///
/// The `i` and `j` channels are linear ramps over `[-1, 1]`; a 1-pixel axis
/// has a constant 0 ramp. The optional `r` channel is
/// `sqrt((i - H/2)^2 + (j - W/2)^2)` divided by `sqrt((H/2)^2 + (W/2)^2)`.
pub fn coordconv_augment(input: &ImageTensor, with_r: bool) -> Result<ImageTensor> {
    let src = input.as_f32().ok_or_else(|| {
        DexError::Dtype(format!(
            "coordinate augmentation expects an f32 image, got {}",
            input.dtype()
        ))
    })?;
    let shape = input.shape();
    let (h, w) = (shape.height, shape.width);
    let ramp = |pos: usize, extent: usize| -> f32 {
        if extent == 1 {
            0.0
        } else {
            (2.0 * pos as f64 / (extent - 1) as f64 - 1.0) as f32
        }
    };
    let extra = if with_r { 3 } else { 2 };
    let out_shape = shape.with_channels(shape.channels + extra);
    let mut data = Vec::with_capacity(out_shape.len());
    data.extend_from_slice(src);
    data.extend((0..h).flat_map(|i| (0..w).map(move |_| ramp(i, h))));
    data.extend((0..h).flat_map(|_| (0..w).map(move |j| ramp(j, w))));
    if with_r {
        let (ch, cw) = (h as f64 / 2.0, w as f64 / 2.0);
        let r_max = ch.hypot(cw);
        data.extend((0..h).flat_map(|i| {
            (0..w).map(move |j| ((i as f64 - ch).hypot(j as f64 - cw) / r_max) as f32)
        }));
    }
    ImageTensor::new(out_shape, TensorData::F32(data))
}

fn check_extension(input: &ImageTensor, out_channels: usize, out_height: usize, out_width: usize) -> Result<()> {
    check_no_upsampling(input.shape(), out_height, out_width)?;
    if out_channels < input.channels() {
        return Err(DexError::Channel(format!(
            "cannot extend {} channels down to {out_channels}",
            input.channels()
        )));
    }
    Ok(())
}

/// Sources for stacking `groups` images of `group_shape` channel-wise, each
/// already flattened into `group_sources`, truncated at `out_channels`.
fn stack_groups(group_sources: &[Vec<Option<usize>>], group_shape: Shape, out_channels: usize) -> Vec<Option<usize>> {
    let plane = group_shape.plane();
    let mut sources = Vec::with_capacity(out_channels * plane);
    for oc in 0..out_channels {
        let (group, c) = (oc / group_shape.channels, oc % group_shape.channels);
        sources.extend_from_slice(&group_sources[group][c * plane..(c + 1) * plane]);
    }
    sources
}

/// Downsamples once, then repeats the channel group until `out_channels`.
pub fn repetition_extend(
    input: &ImageTensor,
    out_channels: usize,
    out_height: usize,
    out_width: usize,
) -> Result<ImageTensor> {
    check_extension(input, out_channels, out_height, out_width)?;
    let small = downsample(input, out_height, out_width)?;
    let c_in = small.channels();
    let plane = small.shape().plane();
    let sources: Vec<Option<usize>> = (0..out_channels)
        .flat_map(|oc| {
            let base = (oc % c_in) * plane;
            (base..base + plane).map(Some)
        })
        .collect();
    Ok(small.gather(Shape::new(out_channels, out_height, out_width), &sources))
}

/// `K` angles spread linearly and inclusively across `range_deg`; a single
/// variant is left unrotated.
pub fn rotation_angles(k: usize, range_deg: (f64, f64)) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let (lo, hi) = range_deg;
            (0..k)
                .map(|n| lo + (hi - lo) * n as f64 / (k - 1) as f64)
                .collect()
        }
    }
}

/// Nearest-neighbour source for every pixel of an `h x w` plane rotated by
/// `angle_deg` about its centre. `None` marks pixels that fall outside.
fn rotation_plane_sources(h: usize, w: usize, angle_deg: f64) -> Vec<Option<usize>> {
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let (dy, dx) = (y as f64 - cy, x as f64 - cx);
            let sx = (cx + dx * cos + dy * sin).round();
            let sy = (cy - dx * sin + dy * cos).round();
            let inside = sx >= 0.0 && sy >= 0.0 && sx < w as f64 && sy < h as f64;
            out.push(inside.then(|| sy as usize * w + sx as usize));
        }
    }
    out
}

/// Downsamples once, then stacks `K` rotated copies in ascending angle
/// order. Rotation is nearest-neighbour with zero fill.
pub fn rotation_extend(
    input: &ImageTensor,
    out_channels: usize,
    out_height: usize,
    out_width: usize,
    range_deg: (f64, f64),
) -> Result<ImageTensor> {
    check_extension(input, out_channels, out_height, out_width)?;
    let small = downsample(input, out_height, out_width)?;
    let shape = small.shape();
    let plane = shape.plane();
    let k = samples_per_patch(shape.channels, out_channels);
    let groups: Vec<Vec<Option<usize>>> = rotation_angles(k, range_deg)
        .into_iter()
        .map(|angle| {
            let rotated = rotation_plane_sources(out_height, out_width, angle);
            (0..shape.channels)
                .flat_map(|c| rotated.iter().map(move |s| s.map(|p| c * plane + p)))
                .collect()
        })
        .collect();
    let sources = stack_groups(&groups, shape, out_channels);
    Ok(small.gather(Shape::new(out_channels, out_height, out_width), &sources))
}

/// Edge of the smallest square grid holding at least `k` tiles.
pub fn tile_grid_edge(k: usize) -> usize {
    let mut edge = 1;
    while edge * edge < k {
        edge += 1;
    }
    edge
}

/// Splits the input into a `g x g` grid (`g*g` the smallest square `>= K`),
/// downsamples every tile to the output size, and stacks the tiles in
/// row-major order. Tiles beyond `out_channels` are dropped.
pub fn tile_extend(
    input: &ImageTensor,
    out_channels: usize,
    out_height: usize,
    out_width: usize,
) -> Result<ImageTensor> {
    check_extension(input, out_channels, out_height, out_width)?;
    let in_shape = input.shape();
    let k = samples_per_patch(in_shape.channels, out_channels);
    let edge = tile_grid_edge(k);
    if edge > in_shape.height || edge > in_shape.width {
        return Err(DexError::Shape(format!(
            "a {edge}x{edge} tile grid does not fit a {}x{} input",
            in_shape.height, in_shape.width
        )));
    }
    let group_shape = Shape::new(in_shape.channels, out_height, out_width);
    let needed = k.min(edge * edge);
    let mut groups = Vec::with_capacity(needed);
    for t in 0..needed {
        let tile = patch_bounds(t / edge, t % edge, in_shape.height, in_shape.width, edge, edge)?;
        check_no_upsampling(
            Shape::new(in_shape.channels, tile.height(), tile.width()),
            out_height,
            out_width,
        )?;
        let mut sources = Vec::with_capacity(group_shape.len());
        for c in 0..in_shape.channels {
            for i in 0..out_height {
                let row = tile.start_row + i * tile.height() / out_height;
                for j in 0..out_width {
                    let col = tile.start_col + j * tile.width() / out_width;
                    sources.push(Some(input.offset(c, row, col)));
                }
            }
        }
        groups.push(sources);
    }
    let sources = stack_groups(&groups, group_shape, out_channels);
    Ok(input.gather(Shape::new(out_channels, out_height, out_width), &sources))
}

/// Like DEX, but takes the first `K` row-major pixels of every patch,
/// repeating the last pixel when the patch is smaller than `K`.
pub fn patch_sequential_extend(
    input: &ImageTensor,
    out_channels: usize,
    out_height: usize,
    out_width: usize,
) -> Result<ImageTensor> {
    stack_patch_samples(input, out_channels, out_height, out_width, |_, _, bounds, k| {
        let last = bounds.area() - 1;
        (0..k).map(|n| n.min(last)).collect()
    })
}

/// Per-patch generator keyed by `(seed, i, j)`, independent of visit order.
fn patch_rng(seed: u64, i: usize, j: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 32) | (j as u64 & 0xffff_ffff));
    rng
}

/// Like DEX, but draws `K` pixels uniformly at random from every patch.
///
/// Draws are without replacement when the patch has at least `K` pixels and
/// with replacement otherwise. Positions are sorted ascending before
/// stacking.
pub fn patch_random_extend(
    input: &ImageTensor,
    out_channels: usize,
    out_height: usize,
    out_width: usize,
    seed: u64,
) -> Result<ImageTensor> {
    stack_patch_samples(input, out_channels, out_height, out_width, |i, j, bounds, k| {
        let mut rng = patch_rng(seed, i, j);
        let area = bounds.area();
        let mut picks = if area >= k {
            index::sample(&mut rng, area, k).into_vec()
        } else {
            (0..k).map(|_| rng.random_range(0..area)).collect()
        };
        picks.sort_unstable();
        picks
    })
}
