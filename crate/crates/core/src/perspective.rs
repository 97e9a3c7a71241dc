use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The stance a model reasons from.
///
/// Variant order is the fixed listing order used everywhere a set of
/// perspectives is rendered or a tie is broken: Direct, Role, ThirdPerson.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PerspectiveKind {
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "role")]
    Role,
    #[serde(rename = "third")]
    ThirdPerson,
}

pub type PerspectiveSet = BTreeSet<PerspectiveKind>;

impl PerspectiveKind {
    pub const ALL: [PerspectiveKind; 3] = [
        PerspectiveKind::Direct,
        PerspectiveKind::Role,
        PerspectiveKind::ThirdPerson,
    ];

    /// Name used in prompts and expected in model output.
    pub fn display_name(self) -> &'static str {
        match self {
            PerspectiveKind::Direct => "Direct Perspective",
            PerspectiveKind::Role => "Role Perspective",
            PerspectiveKind::ThirdPerson => "Third-person Perspective",
        }
    }

    /// Short key used in CLI flags, CSV files and record logs.
    pub fn key(self) -> &'static str {
        match self {
            PerspectiveKind::Direct => "direct",
            PerspectiveKind::Role => "role",
            PerspectiveKind::ThirdPerson => "third",
        }
    }
}

impl fmt::Display for PerspectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown perspective `{0}` (expected direct, role or third)")]
pub struct UnknownPerspective(pub String);

impl FromStr for PerspectiveKind {
    type Err = UnknownPerspective;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let norm = norm.strip_suffix("perspective").unwrap_or(&norm);
        match norm {
            "direct" | "dp" => Ok(PerspectiveKind::Direct),
            "role" | "rp" => Ok(PerspectiveKind::Role),
            "third" | "thirdperson" | "tp" => Ok(PerspectiveKind::ThirdPerson),
            _ => Err(UnknownPerspective(s.to_string())),
        }
    }
}

pub fn all_perspectives() -> PerspectiveSet {
    PerspectiveKind::ALL.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_three_variants_in_fixed_order() {
        let set = all_perspectives();
        assert_eq!(set.len(), 3);
        assert_eq!(set.into_iter().collect::<Vec<_>>(), PerspectiveKind::ALL.to_vec());
    }

    #[test]
    fn serde_round_trip() {
        for kind in PerspectiveKind::ALL {
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.key()));
            let back: PerspectiveKind = serde_json::from_str(&json).unwrap();
            assert_eq!(back, kind);
        }
    }

    #[test]
    fn parses_flag_spellings() {
        assert_eq!("third".parse::<PerspectiveKind>().unwrap(), PerspectiveKind::ThirdPerson);
        assert_eq!("Third-person Perspective".parse::<PerspectiveKind>().unwrap(), PerspectiveKind::ThirdPerson);
        assert_eq!("ROLE".parse::<PerspectiveKind>().unwrap(), PerspectiveKind::Role);
        assert!("fourth".parse::<PerspectiveKind>().is_err());
    }
}
