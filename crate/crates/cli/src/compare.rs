use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use dexkit::accel::{processor_utilization, round1, strategy_info_ratio};
use dexkit::pipeline::{load_image, preprocess, write_tensor, PipelineConfig};
use dexkit::{ExtensionConfig, ImageTensor, Shape, Strategy};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder};
use serde::Serialize;

use crate::error::{CliError, CliResult, Outcome};
use crate::{resolve_profile, CompareArgs};

pub const CSV_FILE: &str = "compare.csv";
pub const PREVIEW_DIR: &str = "previews";

#[derive(Debug, Serialize)]
struct Row {
    strategy: &'static str,
    input_channels: usize,
    info_ratio: f64,
    proc_util: f64,
}

/// Parses a comma-separated list, dropping repeats but keeping order.
pub fn parse_strategies(list: &str) -> Result<Vec<Strategy>, CliError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let strategy: Strategy = name.parse().map_err(CliError::usage)?;
        if !out.contains(&strategy) {
            out.push(strategy);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!(
            "--strategies is empty (valid: {})",
            Strategy::valid_names()
        )));
    }
    Ok(out)
}

/// Stretches each channel's value range to 0..=255.
fn channel_previews(tensor: &ImageTensor) -> Vec<GrayImage> {
    let values = tensor.to_f64_vec();
    let plane = tensor.height() * tensor.width();
    values
        .chunks(plane)
        .map(|chan| {
            let lo = chan.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = chan.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            let pixels = chan
                .iter()
                .map(|v| ((v - lo) / span * 255.0).round() as u8)
                .collect();
            GrayImage::from_raw(tensor.width() as u32, tensor.height() as u32, pixels)
                .expect("plane length matches dimensions")
        })
        .collect()
}

fn write_previews(dir: &Path, tensor: &ImageTensor) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (c, img) in channel_previews(tensor).into_iter().enumerate() {
        let file = BufWriter::new(File::create(dir.join(format!("c{c:03}.pgm")))?);
        PnmEncoder::new(file)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::L8)?;
    }
    Ok(())
}

pub fn run(args: &CompareArgs) -> CliResult {
    let strategies = parse_strategies(&args.strategies)?;
    let profile = resolve_profile(&args.profile)?;
    let image = load_image(&args.input)?;
    let c_in = image.channels();
    fs::create_dir_all(&args.output)?;

    let csv_path = args.output.join(CSV_FILE);
    let mut writer = csv::Writer::from_path(&csv_path)?;
    let mut outcome = Outcome::Success;
    for strategy in strategies {
        let shape = Shape::new(
            strategy.output_channels(c_in, args.out_shape.channels),
            args.out_shape.height,
            args.out_shape.width,
        );
        let mut config = PipelineConfig::new(ExtensionConfig::new(strategy, shape).with_seed(args.seed));
        config.quantize = !args.no_quantize;
        let tensor = match preprocess(&image, &config) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("dexkit: {}: {e}", strategy.name());
                outcome = Outcome::Partial;
                continue;
            }
        };
        write_tensor(&args.output.join(format!("{}.dext", strategy.name())), &tensor)?;
        if args.previews {
            write_previews(&args.output.join(PREVIEW_DIR).join(strategy.name()), &tensor)?;
        }
        writer.serialize(Row {
            strategy: strategy.name(),
            input_channels: shape.channels,
            info_ratio: round1(strategy_info_ratio(strategy, c_in, shape.channels)),
            proc_util: round1(100.0 * processor_utilization(shape.channels, &profile)),
        })?;
    }
    writer.flush()?;
    println!("{}", csv_path.display());
    Ok(outcome)
}
