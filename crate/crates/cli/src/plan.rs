use dexkit::accel::{check_fit, round1, FitVerdict};
use dexkit::{DeviceProfile, LayerSpec, PlanRequest, Shape, Strategy, UtilizationReport};
use serde::Serialize;

use crate::error::{CliError, CliResult, Outcome};
use crate::{resolve_profile, PlanArgs};

/// `--json` envelope. Every key is always present; absent inputs are null.
#[derive(Debug, Serialize)]
struct PlanOutput {
    profile: String,
    shape: String,
    bytes_per_value: u64,
    strategy: &'static str,
    orig_shape: Option<String>,
    per_instance_bytes: u64,
    num_processors: usize,
    report: UtilizationReport,
}

pub fn verdict_line(fit: &FitVerdict) -> String {
    let mut reasons = Vec::new();
    if !fit.channel_bytes_fit() {
        reasons.push(format!(
            "{} B > {} B per instance",
            fit.bytes_per_channel, fit.per_instance_bytes
        ));
    }
    if !fit.channels_fit() {
        reasons.push(format!(
            "{} channels > {} processors",
            fit.channels, fit.num_processors
        ));
    }
    if reasons.is_empty() {
        format!(
            "fits ({} B <= {} B per instance, {} of {} processors)",
            fit.bytes_per_channel, fit.per_instance_bytes, fit.channels, fit.num_processors
        )
    } else {
        format!("does not fit ({})", reasons.join("; "))
    }
}

fn build_request(args: &PlanArgs) -> Result<PlanRequest, CliError> {
    let strategy: Strategy = args.strategy.parse().map_err(CliError::usage)?;
    let bytes = usize::try_from(args.bytes_per_value).map_err(CliError::usage)?;
    let mut request = PlanRequest::new(args.shape)
        .with_strategy(strategy)
        .with_bytes_per_value(bytes);
    if let Some(source) = args.orig_shape {
        request = request.with_source(source);
    }
    if let (Some(kernel), Some(out)) = (args.kernel, args.layer_out) {
        request = request.with_layer(LayerSpec::new(kernel, out).map_err(CliError::usage)?);
    }
    Ok(request)
}

fn render_text(args: &PlanArgs, profile: &DeviceProfile, report: &UtilizationReport) -> String {
    let shape: Shape = args.shape;
    let fit = check_fit(
        shape.channels,
        shape.height,
        shape.width,
        args.bytes_per_value as usize,
        profile,
    );
    let mut lines = vec![
        format!(
            "profile    {} ({} processors, {} B per instance)",
            profile.name, profile.num_processors, profile.per_instance_bytes
        ),
        format!("shape      {shape}, {} B per value", args.bytes_per_value),
        format!("verdict    {}", verdict_line(&fit)),
        format!(
            "ProcUtil   {:.1}% ({} of {} processors)",
            round1(100.0 * report.processor_utilization),
            report.processors_used,
            profile.num_processors
        ),
    ];
    if let (Some(ratio), Some(util), Some(src)) =
        (report.info_ratio, report.info_utilization, args.orig_shape)
    {
        lines.push(format!("InfoRatio  {:.1} ({} from {src})", round1(ratio), args.strategy));
        lines.push(format!("InfoUtil   {:.1}%", round1(100.0 * util)));
    }
    if let Some(params) = report.first_layer_params {
        lines.push(format!(
            "params     {params} first-layer weights ({k}x{k} kernel, {} outputs)",
            args.layer_out.unwrap_or_default(),
            k = args.kernel.unwrap_or_default()
        ));
    }
    if let Some(delta) = report.first_layer_param_delta {
        lines.push(format!("delta      {delta:+} vs the original channel count"));
    }
    lines.join("\n")
}

pub fn run(args: &PlanArgs) -> CliResult {
    let profile = resolve_profile(&args.profile)?;
    let request = build_request(args)?;
    let report = UtilizationReport::compute(&request, &profile);
    if args.json {
        let out = PlanOutput {
            profile: profile.name.clone(),
            shape: args.shape.to_string(),
            bytes_per_value: args.bytes_per_value,
            strategy: request.strategy.name(),
            orig_shape: args.orig_shape.map(|s| s.to_string()),
            per_instance_bytes: profile.per_instance_bytes,
            num_processors: profile.num_processors,
            report,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&out).expect("plan output is always serializable")
        );
    } else {
        println!("{}", render_text(args, &profile, &report));
    }
    Ok(Outcome::Success)
}
