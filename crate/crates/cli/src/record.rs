//! Serialized run records and CSV sweep output.

use chsh_core::channels::ChannelFamily;
use chsh_core::protocols::{
    ActivationResult, BreakingCheck, ProtocolDescriptor, ProtocolKind, SweepPoint,
};
use chsh_core::seesaw::SeesawConfig;
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub command: String,
    pub config: SeesawConfig,
    /// `null` for commands that cover several protocols.
    pub descriptor: Option<ProtocolDescriptor>,
    pub result: RunResult,
    pub seed: u64,
    /// Seconds; `null` unless timing was requested.
    pub wall_time: Option<f64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunResult {
    Activation(ActivationResult),
    Sweep(SweepGrid),
    Breaking(Vec<BreakingCheck>),
    Superactivation(SuperactivationReport),
    Table(Vec<TableEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub kind: ProtocolKind,
    pub family1: ChannelFamily,
    pub family2: ChannelFamily,
    pub p1_range: (f64, f64),
    pub p2_range: (f64, f64),
    pub step: f64,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperactivationReport {
    pub activation: ActivationResult,
    /// CHSH value `v` on `σ₁ ⊗ σ₂`.
    pub v: f64,
    /// Whether the two inputs were constrained to be swap-related.
    pub symmetric_constraint: bool,
    /// Whether the constructed `σ̃` is invariant under exchanging the parties.
    pub symmetric: bool,
    /// Simulated value of the ancilla-conditioned scheme on `σ̃ ⊗ σ̃`.
    pub scheme_value: f64,
    /// `(2v + 4) / 4`.
    pub predicted_scheme_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub descriptor: ProtocolDescriptor,
    pub published: f64,
    pub achieved: f64,
    pub pass: bool,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run records serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

pub const CSV_HEADER: &str = "p1,p2,chsh,activated";

/// Decimal notation with 10 significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0.000000000".into() } else { x.to_string() };
    }
    // the exponent after rounding to 10 digits, so carries are accounted for
    let sci = format!("{x:.9e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if exp > 9 {
        return sci;
    }
    format!("{x:.*}", (9 - exp) as usize)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for pt in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig10(pt.p1),
            sig10(pt.p2),
            sig10(pt.best_value),
            pt.activated
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.49000000000000005), "0.4900000000");
        assert_eq!(sig10(2.0119443214567), "2.011944321");
        assert_eq!(sig10(0.5), "0.5000000000");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(0.0), "0.000000000");
        assert_eq!(sig10(9.99999999996), "10.00000000");
        assert_eq!(sig10(0.0123456789012), "0.01234567890");
    }

    #[test]
    fn csv_layout() {
        let pts = [
            SweepPoint { p1: 0.48, p2: 0.48, best_value: 2.0, activated: false },
            SweepPoint { p1: 0.48, p2: 0.49, best_value: 2.0051234567891, activated: true },
        ];
        assert_eq!(
            sweep_csv(&pts),
            "p1,p2,chsh,activated\n0.4800000000,0.4800000000,2.000000000,false\n\
             0.4800000000,0.4900000000,2.005123457,true\n"
        );
    }
}
