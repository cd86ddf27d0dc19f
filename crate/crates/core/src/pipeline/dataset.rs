//! Batch conversion of an image directory into `.dext` tensors.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::format::write_tensor;
use super::image_io::{is_supported_path, load_image};
use super::quantize::{normalize, quantize_q7, NormalizationSpec};
use crate::accel::{strategy_info_utilization, PlanRequest, UtilizationReport};
use crate::error::{DexError, Result};
use crate::profile::DeviceProfile;
use crate::strategy::extend;
use crate::tensor::{DType, ExtensionConfig, ImageTensor, Shape, Strategy};
use crate::transform::downsample;

pub const SUMMARY_FILE: &str = "summary.json";
pub const TENSOR_EXTENSION: &str = "dext";

fn default_profile() -> String {
    "max78000".into()
}

fn default_true() -> bool {
    true
}

/// Everything needed to turn one raw image into an accelerator input.
///
/// The JSON form puts the extension fields at the top level next to
/// `normalization`, `profile` and `quantize`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(flatten)]
    pub extension: ExtensionConfig,
    #[serde(default)]
    pub normalization: NormalizationSpec,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default = "default_true")]
    pub quantize: bool,
}

impl PipelineConfig {
    pub fn new(extension: ExtensionConfig) -> Self {
        PipelineConfig {
            extension,
            normalization: NormalizationSpec::default(),
            profile: default_profile(),
            quantize: true,
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| DexError::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn output_dtype(&self) -> DType {
        if self.quantize {
            DType::I8Q7
        } else {
            DType::F32
        }
    }

    /// Shape emitted for a source with `source_channels` channels.
    pub fn output_shape(&self, source_channels: usize) -> Shape {
        let ext = &self.extension;
        Shape::new(
            ext.strategy.output_channels(source_channels, ext.out_channels),
            ext.out_height,
            ext.out_width,
        )
    }
}

/// Transform, normalize and (optionally) quantize one `U8` image.
///
/// Pixel selection runs on raw integers before normalization. CoordConv
/// variants are the exception: their coordinate channels are appended after
/// normalizing the downsampled image so they are not rescaled.
pub fn preprocess(image: &ImageTensor, config: &PipelineConfig) -> Result<ImageTensor> {
    let ext = &config.extension;
    let normalized = match ext.strategy {
        Strategy::CoordConv | Strategy::CoordConvR => {
            ext.validate_for(image.shape())?;
            let small = downsample(image, ext.out_height, ext.out_width)?;
            extend(&normalize(&small, &config.normalization)?, ext)?
        }
        _ => normalize(&extend(image, ext)?, &config.normalization)?,
    };
    if config.quantize {
        quantize_q7(&normalized)
    } else {
        Ok(normalized)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the input root, `/`-separated.
    pub input: String,
    pub output: Option<String>,
    pub status: FileStatus,
    pub error: Option<String>,
    pub source_shape: Option<Shape>,
    pub info_utilization: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub strategy: Strategy,
    pub output_shape: Shape,
    pub dtype: DType,
    pub profile: String,
    pub normalization: NormalizationSpec,
    /// Computed against the first successfully converted image.
    pub report: UtilizationReport,
    pub total: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub files: Vec<FileRecord>,
    /// Files ignored because of their extension.
    pub skipped: Vec<String>,
}

impl BatchSummary {
    pub fn is_complete_success(&self) -> bool {
        self.failed == 0
    }
}

fn relative_name(path: &Path, root: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Lists the images under `input` (a file or a directory tree), sorted by
/// relative path, plus the files that were skipped.
fn collect_inputs(input: &Path) -> Result<(PathBuf, Vec<PathBuf>, Vec<String>)> {
    if input.is_file() {
        let root = input.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok((root, vec![input.to_path_buf()], Vec::new()));
    }
    if !input.is_dir() {
        return Err(DexError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input {} does not exist", input.display()),
        )));
    }
    let mut images = Vec::new();
    let mut skipped = Vec::new();
    for entry in WalkDir::new(input).sort_by_file_name() {
        let entry = entry.map_err(|e| DexError::Io(e.into()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        if is_supported_path(entry.path()) {
            images.push(entry.into_path());
        } else {
            skipped.push(relative_name(entry.path(), input));
        }
    }
    images.sort();
    Ok((input.to_path_buf(), images, skipped))
}

fn convert_one(path: &Path, root: &Path, out_dir: &Path, config: &PipelineConfig) -> FileRecord {
    let input = relative_name(path, root);
    let mut record = FileRecord {
        input: input.clone(),
        output: None,
        status: FileStatus::Failed,
        error: None,
        source_shape: None,
        info_utilization: None,
    };
    let result = (|| -> Result<(Shape, String)> {
        let image = load_image(path)?;
        let tensor = preprocess(&image, config)?;
        let rel_out = Path::new(&input).with_extension(TENSOR_EXTENSION);
        let target = out_dir.join(&rel_out);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent)?;
        }
        write_tensor(&target, &tensor)?;
        Ok((image.shape(), relative_name(&rel_out, Path::new(""))))
    })();
    match result {
        Ok((source, output)) => {
            record.status = FileStatus::Ok;
            record.output = Some(output);
            record.source_shape = Some(source);
            record.info_utilization = Some(strategy_info_utilization(
                config.extension.strategy,
                source,
                config.output_shape(source.channels),
            ));
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Converts every supported image under `input` into `out_dir`, mirroring
/// the directory layout, and writes `summary.json`.
///
/// Per-file failures are recorded and the batch carries on; only failing to
/// prepare `out_dir` or to write the summary aborts.
pub fn process_dataset(input: &Path, config: &PipelineConfig, out_dir: &Path) -> Result<BatchSummary> {
    let profile = DeviceProfile::resolve(&config.profile)?;
    config.normalization.validate()?;
    let (root, images, skipped) = collect_inputs(input)?;
    fs::create_dir_all(out_dir)?;

    let files: Vec<FileRecord> = images
        .par_iter()
        .map(|path| convert_one(path, &root, out_dir, config))
        .collect();

    let succeeded = files.iter().filter(|f| f.status == FileStatus::Ok).count();
    let source = files.iter().find_map(|f| f.source_shape);
    let output_shape = config.output_shape(source.map_or(3, |s| s.channels));
    let mut request = PlanRequest::new(output_shape)
        .with_strategy(config.extension.strategy)
        .with_bytes_per_value(config.output_dtype().element_size());
    request.source = source;
    let summary = BatchSummary {
        strategy: config.extension.strategy,
        output_shape,
        dtype: config.output_dtype(),
        profile: profile.name.clone(),
        normalization: config.normalization.clone(),
        report: UtilizationReport::compute(&request, &profile),
        total: files.len(),
        succeeded,
        failed: files.len() - succeeded,
        files,
        skipped,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| DexError::Config(e.to_string()))?;
    fs::write(out_dir.join(SUMMARY_FILE), json)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::round1;
    use crate::pipeline::format::read_tensor;
    use image::{Rgb, RgbImage};

    fn write_png(path: &Path, w: u32, h: u32) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        RgbImage::from_fn(w, h, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, ((x + y) % 256) as u8]))
            .save(path)
            .unwrap();
    }

    #[test]
    fn config_json_is_flat() {
        let cfg = PipelineConfig::from_json_str(
            r#"{"strategy":"patch_random","out_channels":64,"out_height":32,"out_width":32,
                "seed":9,"profile":"max78002","quantize":false,
                "normalization":{"mean":[0.5],"std":[0.25]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.extension.strategy, Strategy::PatchRandom);
        assert_eq!(cfg.extension.seed, 9);
        assert_eq!(cfg.profile, "max78002");
        assert!(!cfg.quantize);
        assert_eq!(cfg.normalization.mean, vec![0.5]);
        let minimal = PipelineConfig::from_json_str(
            r#"{"strategy":"dex","out_channels":64,"out_height":32,"out_width":32}"#,
        )
        .unwrap();
        assert_eq!(minimal.normalization, NormalizationSpec::default());
        assert!(minimal.quantize);
        assert!(PipelineConfig::from_json_str("{}").is_err());
    }

    #[test]
    fn empty_directory() {
        let input = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::new(ExtensionConfig::dex(Shape::new(64, 32, 32)));
        let summary = process_dataset(input.path(), &cfg, out.path()).unwrap();
        assert_eq!((summary.total, summary.succeeded, summary.failed), (0, 0, 0));
        assert!(out.path().join(SUMMARY_FILE).is_file());
    }

    #[test]
    fn dex_batch_with_one_bad_file() {
        let input = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        write_png(&input.path().join("cats/a.png"), 350, 350);
        write_png(&input.path().join("dogs/b.png"), 64, 48);
        fs::write(input.path().join("dogs/broken.png"), b"not a png").unwrap();
        fs::write(input.path().join("README.txt"), b"labels").unwrap();

        let cfg = PipelineConfig::new(ExtensionConfig::dex(Shape::new(64, 32, 32)));
        let summary = process_dataset(input.path(), &cfg, out.path()).unwrap();
        assert_eq!((summary.total, summary.succeeded, summary.failed), (3, 2, 1));
        assert_eq!(summary.skipped, vec!["README.txt".to_string()]);
        let names: Vec<_> = summary.files.iter().map(|f| f.input.as_str()).collect();
        assert_eq!(names, vec!["cats/a.png", "dogs/b.png", "dogs/broken.png"]);
        assert!(summary.files[2].error.as_ref().unwrap().contains("CorruptFile"));
        assert_eq!(round1(summary.report.info_ratio.unwrap()), 21.3);
        assert!(summary.report.fits);

        let a = out.path().join("cats/a.dext");
        assert_eq!(fs::metadata(&a).unwrap().len(), 20 + 65536);
        let t = read_tensor(&a).unwrap();
        assert_eq!(t.shape(), Shape::new(64, 32, 32));
        assert_eq!(t.dtype(), DType::I8Q7);
        assert!(out.path().join("dogs/b.dext").is_file());
        assert!(!out.path().join("dogs/broken.dext").exists());

        let on_disk: BatchSummary =
            serde_json::from_str(&fs::read_to_string(out.path().join(SUMMARY_FILE)).unwrap())
                .unwrap();
        assert_eq!(on_disk, summary);
    }

    #[test]
    fn output_matches_single_image_preprocess() {
        let input = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let src = input.path().join("x.png");
        write_png(&src, 40, 40);
        let cfg = PipelineConfig::new(ExtensionConfig::dex(Shape::new(12, 8, 8)));
        process_dataset(&src, &cfg, out.path()).unwrap();
        let written = read_tensor(&out.path().join("x.dext")).unwrap();
        let direct = preprocess(&load_image(&src).unwrap(), &cfg).unwrap();
        assert_eq!(written, direct);
    }

    #[test]
    fn coordconv_pipeline_keeps_coordinates_unnormalized() {
        let img = ImageTensor::from_u8(Shape::new(3, 8, 8), vec![128; 192]).unwrap();
        let mut cfg = PipelineConfig::new(ExtensionConfig::new(Strategy::CoordConv, Shape::new(5, 4, 4)));
        cfg.quantize = false;
        let out = preprocess(&img, &cfg).unwrap();
        assert_eq!(out.shape(), Shape::new(5, 4, 4));
        assert_eq!(out.get(3, 0, 0), -1.0);
        assert_eq!(out.get(4, 0, 3), 1.0);
    }

    #[test]
    fn unwritable_output_is_fatal() {
        let input = tempfile::tempdir().unwrap();
        let blocker = input.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let cfg = PipelineConfig::new(ExtensionConfig::dex(Shape::new(64, 32, 32)));
        assert!(process_dataset(input.path(), &cfg, &blocker.join("out")).is_err());
    }
}
