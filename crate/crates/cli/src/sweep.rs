use std::fs::File;
use std::io::{self, Write};

use dexkit::accel::{info_utilization, processor_utilization, round1};
use dexkit::Shape;
use serde::Serialize;

use crate::error::{CliError, CliResult, Outcome};
use crate::{resolve_profile, SweepArgs};

#[derive(Debug, Serialize)]
struct Row {
    c_out: usize,
    info_utilization: f64,
    proc_util: f64,
}

pub fn parse_channels(list: &str) -> Result<Vec<usize>, CliError> {
    let channels = list
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<i64>()
                .ok()
                .filter(|&c| c > 0)
                .map(|c| c as usize)
                .ok_or_else(|| CliError::Usage(format!("channel count {part:?} is not positive")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(channels)
}

pub fn run(args: &SweepArgs) -> CliResult {
    let channels = parse_channels(&args.channels)?;
    let profile = resolve_profile(&args.profile)?;
    let (h, w) = args.out_shape;
    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for c in channels {
        writer.serialize(Row {
            c_out: c,
            info_utilization: round1(100.0 * info_utilization(args.orig_shape, Shape::new(c, h, w))),
            proc_util: round1(100.0 * processor_utilization(c, &profile)),
        })?;
    }
    writer.flush()?;
    Ok(Outcome::Success)
}
