//! Reference implementations used as test oracles. Nothing here calls into
//! `dexkit::transform`; patch limits and sample positions are recomputed by
//! counting rather than by division.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `floor(num / den)` by counting up.
pub fn floor_div(num: usize, den: usize) -> usize {
    let mut q = 0;
    while (q + 1) * den <= num {
        q += 1;
    }
    q
}

/// `ceil(num / den)` by counting up.
pub fn ceil_div(num: usize, den: usize) -> usize {
    let mut q = 0;
    while q * den < num {
        q += 1;
    }
    q
}

/// Image as `[channel][row][col]`.
pub type Planes = Vec<Vec<Vec<i64>>>;

pub fn to_planes(values: &[i64], c: usize, h: usize, w: usize) -> Planes {
    (0..c)
        .map(|ci| {
            (0..h)
                .map(|i| (0..w).map(|j| values[ci * h * w + i * w + j]).collect())
                .collect()
        })
        .collect()
}

/// Materializes the patch feeding output pixel `(i, j)` as a row-major list
/// of pixels, each pixel being its channel vector.
pub fn materialize_patch(img: &Planes, i: usize, j: usize, h_out: usize, w_out: usize) -> Vec<Vec<i64>> {
    let (h, w) = (img[0].len(), img[0][0].len());
    let r0 = floor_div(i * h, h_out);
    let r1 = floor_div((i + 1) * h, h_out);
    let c0 = floor_div(j * w, w_out);
    let c1 = floor_div((j + 1) * w, w_out);
    let mut pixels = Vec::new();
    for r in r0..r1 {
        for c in c0..c1 {
            pixels.push(img.iter().map(|plane| plane[r][c]).collect());
        }
    }
    pixels
}

/// Brute-force patch-wise even sampling with channel stacking, returning
/// the flat channel-major output.
pub fn dex_reference(img: &Planes, c_out: usize, h_out: usize, w_out: usize) -> Vec<i64> {
    let c_in = img.len();
    let k = ceil_div(c_out, c_in);
    let mut out = vec![vec![vec![0i64; w_out]; h_out]; c_out];
    for i in 0..h_out {
        for j in 0..w_out {
            let patch = materialize_patch(img, i, j, h_out, w_out);
            let chosen: Vec<usize> = if k == 1 {
                vec![0]
            } else {
                let step = floor_div(patch.len() - 1, k - 1);
                (0..k).map(|n| n * step).collect()
            };
            let stacked: Vec<i64> = chosen
                .iter()
                .flat_map(|&flat| patch[flat].iter().copied())
                .take(c_out)
                .collect();
            for (oc, v) in stacked.into_iter().enumerate() {
                out[oc][i][j] = v;
            }
        }
    }
    out.into_iter().flatten().flatten().collect()
}

/// Top-left pixel of every patch.
pub fn downsample_reference(img: &Planes, h_out: usize, w_out: usize) -> Vec<i64> {
    dex_reference(img, img.len(), h_out, w_out)
}

/// A small random case: `(c_in, h, w, c_out, h_out, w_out, values)`.
#[derive(Debug, Clone)]
pub struct Case {
    pub c_in: usize,
    pub h: usize,
    pub w: usize,
    pub c_out: usize,
    pub h_out: usize,
    pub w_out: usize,
    pub values: Vec<u8>,
}

pub fn random_case(rng: &mut ChaCha8Rng, max_edge: usize, max_c_out: usize) -> Case {
    let c_in = if rng.random_bool(0.5) { 1 } else { 3 };
    let h = rng.random_range(1..=max_edge);
    let w = rng.random_range(1..=max_edge);
    let h_out = rng.random_range(1..=h);
    let w_out = rng.random_range(1..=w);
    let c_out = rng.random_range(c_in..=max_c_out);
    let values = (0..c_in * h * w).map(|_| rng.random()).collect();
    Case {
        c_in,
        h,
        w,
        c_out,
        h_out,
        w_out,
        values,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
