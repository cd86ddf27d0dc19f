use dexkit::pipeline::dataset::SUMMARY_FILE;
use dexkit::pipeline::{process_dataset, PipelineConfig};
use dexkit::{ExtensionConfig, Strategy};

use crate::error::{CliError, CliResult, Outcome};
use crate::{resolve_profile, ConvertArgs};

/// Merges `--config` with the flags; flags win.
pub fn build_config(args: &ConvertArgs) -> Result<PipelineConfig, CliError> {
    let strategy = args
        .strategy
        .as_deref()
        .map(str::parse::<Strategy>)
        .transpose()
        .map_err(CliError::usage)?;

    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_json_file(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => {
            let shape = args
                .out_shape
                .ok_or_else(|| CliError::usage("--out-shape is required without --config"))?;
            let strategy =
                strategy.ok_or_else(|| CliError::usage("--strategy is required without --config"))?;
            PipelineConfig::new(ExtensionConfig::new(strategy, shape))
        }
    };

    let ext = &mut config.extension;
    if let Some(strategy) = strategy {
        ext.strategy = strategy;
    }
    if let Some(shape) = args.out_shape {
        ext.out_channels = shape.channels;
        ext.out_height = shape.height;
        ext.out_width = shape.width;
    }
    if let Some(seed) = args.seed {
        ext.seed = seed;
    }
    if let Some(profile) = &args.profile {
        config.profile = profile.clone();
    }
    if args.no_quantize {
        config.quantize = false;
    }
    config.normalization.validate().map_err(CliError::usage)?;
    resolve_profile(&config.profile)?;
    Ok(config)
}

pub fn run(args: &ConvertArgs) -> CliResult {
    let config = build_config(args)?;
    let summary = process_dataset(&args.input, &config, &args.output)?;
    for record in summary.files.iter().filter(|r| r.error.is_some()) {
        eprintln!("dexkit: {}: {}", record.input, record.error.as_deref().unwrap_or_default());
    }
    eprintln!(
        "{} of {} converted, {} skipped",
        summary.succeeded,
        summary.total,
        summary.skipped.len()
    );
    println!("{}", args.output.join(SUMMARY_FILE).display());
    Ok(if summary.is_complete_success() {
        Outcome::Success
    } else {
        Outcome::Partial
    })
}
