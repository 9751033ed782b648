//! Browser bindings: each export takes plain arguments and returns JSON (or
//! CSV for sweeps). Searches run single-threaded.

use chsh_core::channels::{ChannelFamily, ChannelParam};
use chsh_core::protocols::{
    activation_search, check_breaking as core_check_breaking, robustness_sweep, ProtocolDescriptor,
    ProtocolKind, SweepPoint,
};
use chsh_core::seesaw::SeesawConfig;
use wasm_bindgen::prelude::*;

fn config(restarts: u32, seed: u32) -> Result<SeesawConfig, String> {
    let cfg = SeesawConfig { restarts: restarts as usize, seed: seed as u64, ..Default::default() };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn channel(spec: &str) -> Result<ChannelParam, String> {
    spec.trim().parse().map_err(|e: chsh_core::Error| e.to_string())
}

/// Analytic verdict and numerical single-channel maximum for `family:p`.
#[wasm_bindgen]
pub fn check_breaking(spec: &str, restarts: u32, seed: u32) -> Result<String, String> {
    let check = core_check_breaking(&channel(spec)?, &config(restarts, seed)?).map_err(|e| e.to_string())?;
    serde_json::to_string(&check).map_err(|e| e.to_string())
}

/// Activation search; an empty `spec2` selects the single-channel protocol.
#[wasm_bindgen]
pub fn activate(protocol: &str, spec1: &str, spec2: &str, restarts: u32, seed: u32) -> Result<String, String> {
    let kind = ProtocolKind::parse(protocol.trim()).map_err(|e| e.to_string())?;
    let ch2 = if spec2.trim().is_empty() { None } else { Some(channel(spec2)?) };
    let desc = ProtocolDescriptor::new(kind, channel(spec1)?, ch2).map_err(|e| e.to_string())?;
    let result = activation_search(&desc, &config(restarts, seed)?).map_err(|e| e.to_string())?;
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

/// Square sweep `[lo, hi]²`, returned as a JSON array of grid points.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    protocol: &str,
    family1: &str,
    family2: &str,
    lo: f64,
    hi: f64,
    step: f64,
    restarts: u32,
    seed: u32,
) -> Result<String, String> {
    let kind = ProtocolKind::parse(protocol.trim()).map_err(|e| e.to_string())?;
    let f1 = ChannelFamily::from_tag(family1.trim()).map_err(|e| e.to_string())?;
    let f2 = ChannelFamily::from_tag(family2.trim()).map_err(|e| e.to_string())?;
    let points: Vec<SweepPoint> = robustness_sweep(kind, f1, f2, (lo, hi), (lo, hi), step, &config(restarts, seed)?)
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}
