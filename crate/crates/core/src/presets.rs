//! Scenario files shipped with the crate.

use crate::error::{Error, Result};
use crate::game::ScenarioConfig;

pub const WEAK_JAMMER: &str = include_str!("../../../scenarios/weak-jammer.scn");
pub const SMART_JAMMER: &str = include_str!("../../../scenarios/smart-jammer.scn");
pub const CASE2: &str = include_str!("../../../scenarios/case2.scn");
pub const DEGRADED_RELAY: &str = include_str!("../../../scenarios/degraded-relay.scn");

pub const NAMES: [&str; 4] = ["weak-jammer", "smart-jammer", "case2", "degraded-relay"];

pub fn text(name: &str) -> Option<&'static str> {
    match name {
        "weak-jammer" => Some(WEAK_JAMMER),
        "smart-jammer" => Some(SMART_JAMMER),
        "case2" => Some(CASE2),
        "degraded-relay" => Some(DEGRADED_RELAY),
        _ => None,
    }
}

/// Parses a shipped preset by name.
pub fn load(name: &str) -> Result<ScenarioConfig> {
    let t = text(name).ok_or_else(|| Error::Config(format!("no preset named '{name}'")))?;
    ScenarioConfig::from_text(t)
}
