//! Scenario files.
//!
//! ```toml
//! format = 1
//! name = "single fade"
//! transfer_duration = 40.0
//! seed = 1
//!
//! [topology]
//! wired_delay = 0.05
//! wireless_delay = 0.01
//! wireless_jitter = 0.02
//! bottleneck_rate = 1000.0
//! queue_limit = 100
//! segment_size = 1000
//! advertised_window = 64
//!
//! [fades]
//! windows = [[15.0, 10.0]]   # (start, duration) seconds
//!
//! [sender]
//! rto_clamp = [1.0, 64.0]
//!
//! [prediction]
//! lead = 0.1
//! error_factor = 1.0
//!
//! [holder]
//! guard_fraction = 0.02
//! max_duplicates_per_ack = 2
//! ```
//!
//! Every key except `format` is optional and defaults to
//! [`Scenario::default`].

use std::path::Path;

use ackhold_core::netsim::{FadeWindow, Scenario};
use serde::Deserialize;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    format: u32,
    name: Option<String>,
    transfer_duration: Option<f64>,
    seed: Option<u64>,
    #[serde(default)]
    topology: Topology,
    #[serde(default)]
    fades: Fades,
    #[serde(default)]
    sender: Sender,
    #[serde(default)]
    prediction: Prediction,
    #[serde(default)]
    holder: Holder,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Topology {
    wired_delay: Option<f64>,
    wireless_delay: Option<f64>,
    wireless_jitter: Option<f64>,
    bottleneck_rate: Option<f64>,
    queue_limit: Option<usize>,
    segment_size: Option<u32>,
    advertised_window: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fades {
    #[serde(default)]
    windows: Vec<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sender {
    rto_clamp: Option<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Prediction {
    lead: Option<f64>,
    error_factor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Holder {
    guard_fraction: Option<f64>,
    max_duplicates_per_ack: Option<u8>,
}

/// A parsed scenario and its display name.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub scenario: Scenario,
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioSpec, CliError> {
    let file: File = toml::from_str(text).map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
    if file.format != FORMAT_VERSION {
        return Err(CliError::Input(format!(
            "{origin}: unsupported format {} (expected {FORMAT_VERSION})",
            file.format
        )));
    }
    let d = Scenario::default();
    let t = file.topology;
    let scenario = Scenario {
        transfer_duration: file.transfer_duration.unwrap_or(d.transfer_duration),
        fade_windows: file.fades.windows.into_iter().map(|(s, len)| FadeWindow::new(s, len)).collect(),
        prediction_lead: file.prediction.lead.unwrap_or(d.prediction_lead),
        prediction_error_factor: file.prediction.error_factor.unwrap_or(d.prediction_error_factor),
        wired_delay: t.wired_delay.unwrap_or(d.wired_delay),
        wireless_delay: t.wireless_delay.unwrap_or(d.wireless_delay),
        wireless_jitter: t.wireless_jitter.unwrap_or(d.wireless_jitter),
        bottleneck_rate: t.bottleneck_rate.unwrap_or(d.bottleneck_rate),
        queue_limit: t.queue_limit.unwrap_or(d.queue_limit),
        segment_size: t.segment_size.unwrap_or(d.segment_size),
        advertised_window: t.advertised_window.unwrap_or(d.advertised_window),
        sender_variant: d.sender_variant,
        rto_clamp: file.sender.rto_clamp.or(d.rto_clamp),
        guard_fraction: file.holder.guard_fraction.unwrap_or(d.guard_fraction),
        max_duplicates_per_ack: file.holder.max_duplicates_per_ack.unwrap_or(d.max_duplicates_per_ack),
        rng_seed: file.seed.unwrap_or(d.rng_seed),
    };
    scenario.validate().map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
    Ok(ScenarioSpec { name: file.name.unwrap_or_else(|| origin.to_string()), scenario })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text, &path.display().to_string())
}
