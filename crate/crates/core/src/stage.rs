use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Machine sizes every stage is characterized on.
pub const VCPU_OPTIONS: [u32; 4] = [1, 2, 4, 8];

/// Position of `vcpus` in [`VCPU_OPTIONS`].
pub fn vcpu_index(vcpus: u32) -> Option<usize> {
    VCPU_OPTIONS.iter().position(|&v| v == vcpus)
}

/// An EDA flow stage. Doubles as the "application" a runtime model is trained for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Synthesis,
    Placement,
    Routing,
    Sta,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Synthesis, Stage::Placement, Stage::Routing, Stage::Sta];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Synthesis => "synthesis",
            Stage::Placement => "placement",
            Stage::Routing => "routing",
            Stage::Sta => "sta",
        }
    }

    /// Synthesis runs on AIGs, every later stage on the mapped netlist.
    pub fn expects_aig(self) -> bool {
        self == Stage::Synthesis
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Stage::Synthesis => 0,
            Stage::Placement => 1,
            Stage::Routing => 2,
            Stage::Sta => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Stage> {
        Stage::ALL.get(tag as usize).copied()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "synthesis" | "synth" => Ok(Stage::Synthesis),
            "placement" | "place" => Ok(Stage::Placement),
            "routing" | "route" => Ok(Stage::Routing),
            "sta" | "timing" => Ok(Stage::Sta),
            other => Err(Error::Config(format!("unknown stage/application `{other}`"))),
        }
    }
}

/// Whole-second runtimes of one stage on 1, 2, 4 and 8 vCPUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuntimeEstimate {
    seconds: [u64; 4],
}

impl RuntimeEstimate {
    /// Runtimes ordered as [`VCPU_OPTIONS`]; every entry must be at least one second.
    pub fn new(seconds: [u64; 4]) -> Result<Self> {
        if let Some(i) = seconds.iter().position(|&s| s == 0) {
            return Err(Error::Contract(format!(
                "runtime for {} vCPU(s) must be positive",
                VCPU_OPTIONS[i]
            )));
        }
        Ok(RuntimeEstimate { seconds })
    }

    pub fn seconds(&self) -> [u64; 4] {
        self.seconds
    }

    pub fn get(&self, vcpus: u32) -> Option<u64> {
        vcpu_index(vcpus).map(|i| self.seconds[i])
    }

    /// `(vcpus, seconds)` pairs in ascending vCPU order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        VCPU_OPTIONS.iter().copied().zip(self.seconds.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
            assert_eq!(Stage::from_tag(s.tag()), Some(s));
        }
        assert!("layout".parse::<Stage>().is_err());
    }

    #[test]
    fn zero_runtime_rejected() {
        assert!(RuntimeEstimate::new([10, 5, 0, 2]).is_err());
        let e = RuntimeEstimate::new([10, 5, 3, 2]).unwrap();
        assert_eq!(e.get(4), Some(3));
        assert_eq!(e.get(3), None);
    }
}
