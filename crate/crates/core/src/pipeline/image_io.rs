use std::path::Path;

use image::{ImageError, ImageFormat, ImageReader};

use crate::error::{DexError, Result};
use crate::tensor::{ImageTensor, Shape};

/// File extensions `load_image` accepts.
pub const SUPPORTED_EXTENSIONS: [&str; 3] = ["png", "ppm", "pnm"];

pub fn is_supported_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| SUPPORTED_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Loads a PNG or binary PPM as a `(3, H, W)` `U8` tensor.
///
/// Grayscale is replicated into three channels; alpha is dropped; 16-bit
/// samples are reduced to 8 bits.
pub fn load_image(path: &Path) -> Result<ImageTensor> {
    let corrupt = |reason: String| DexError::CorruptFile {
        path: path.to_path_buf(),
        reason,
    };
    let reader = ImageReader::open(path)?
        .with_guessed_format()
        .map_err(|e| corrupt(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        _ => return Err(DexError::UnsupportedFormat(path.to_path_buf())),
    }
    let decoded = reader.decode().map_err(|e| match e {
        ImageError::Unsupported(_) => DexError::UnsupportedFormat(path.to_path_buf()),
        other => corrupt(other.to_string()),
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let plane = w * h;
    let mut data = vec![0u8; 3 * plane];
    for (n, px) in rgb.pixels().enumerate() {
        for c in 0..3 {
            data[c * plane + n] = px.0[c];
        }
    }
    ImageTensor::from_u8(Shape::new(3, h, w), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma};

    #[test]
    fn white_ppm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("white.ppm");
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend([255u8; 12]);
        std::fs::write(&path, bytes).unwrap();
        let t = load_image(&path).unwrap();
        assert_eq!(t.shape(), Shape::new(3, 2, 2));
        assert!(t.as_u8().unwrap().iter().all(|&v| v == 255));
    }

    #[test]
    fn ppm_is_channel_major() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend([1, 2, 3, 4, 5, 6]);
        std::fs::write(&path, bytes).unwrap();
        let t = load_image(&path).unwrap();
        assert_eq!(t.as_u8().unwrap(), &[1, 4, 2, 5, 3, 6]);
    }

    #[test]
    fn grayscale_png_replicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        GrayImage::from_fn(3, 2, |x, y| Luma([(10 * x + y) as u8]))
            .save(&path)
            .unwrap();
        let t = load_image(&path).unwrap();
        assert_eq!(t.shape(), Shape::new(3, 2, 3));
        for i in 0..2 {
            for j in 0..3 {
                let v = (10 * j + i) as f64;
                assert_eq!((t.get(0, i, j), t.get(1, i, j), t.get(2, i, j)), (v, v, v));
            }
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.ppm");
        let mut bytes = b"P6\n4 4\n255\n".to_vec();
        bytes.extend([0u8; 10]);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_image(&path), Err(DexError::CorruptFile { .. })));
        let png = dir.path().join("cut.png");
        let full = dir.path().join("full.png");
        GrayImage::from_pixel(16, 16, Luma([3])).save(&full).unwrap();
        let raw = std::fs::read(&full).unwrap();
        std::fs::write(&png, &raw[..raw.len() / 2]).unwrap();
        assert!(matches!(load_image(&png), Err(DexError::CorruptFile { .. })));
    }

    #[test]
    fn unknown_content_is_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("photo.jpg");
        std::fs::write(&path, [0xff, 0xd8, 0xff, 0xe0, 0, 0x10]).unwrap();
        assert!(matches!(load_image(&path), Err(DexError::UnsupportedFormat(_))));
        assert!(!is_supported_path(&path));
        assert!(is_supported_path(Path::new("a/B.PNG")));
    }
}
