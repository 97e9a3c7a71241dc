//! Confidence ranking and perspective selection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::perspective::{PerspectiveKind, PerspectiveSet};
use crate::response_parser::RankedPerspective;
use crate::seeding::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SelectionPolicy {
    Highest,
    Second,
    Lowest,
    Random { seed: u64 },
}

impl SelectionPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionPolicy::Highest => "highest",
            SelectionPolicy::Second => "second",
            SelectionPolicy::Lowest => "lowest",
            SelectionPolicy::Random { .. } => "random",
        }
    }

    /// Parses `highest`, `second`, `lowest` or `random`; the seed is only
    /// used by `random`.
    pub fn parse_with_seed(name: &str, seed: u64) -> Result<Self, UnknownPolicy> {
        match name.trim().to_ascii_lowercase().as_str() {
            "highest" => Ok(SelectionPolicy::Highest),
            "second" => Ok(SelectionPolicy::Second),
            "lowest" => Ok(SelectionPolicy::Lowest),
            "random" => Ok(SelectionPolicy::Random { seed }),
            _ => Err(UnknownPolicy(name.to_string())),
        }
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::Random { seed } => write!(f, "random({seed})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown selection policy `{0}` (expected highest, second, lowest or random)")]
pub struct UnknownPolicy(pub String);

impl FromStr for SelectionPolicy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_with_seed(s, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub chosen: PerspectiveKind,
    pub rankings: Vec<RankedPerspective>,
    pub policy: SelectionPolicy,
    pub fallback_used: bool,
}

/// Stable sort, highest confidence first; ties keep the listed order.
pub fn rank_by_confidence(rankings: &[RankedPerspective]) -> Vec<RankedPerspective> {
    let mut sorted = rankings.to_vec();
    sorted.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    sorted
}

/// Chooses a perspective from `rankings` restricted to `enabled`.
/// `instance_id` keys the random policy's draw.
///
/// # Panics
/// Panics when `enabled` is empty.
pub fn select(
    rankings: &[RankedPerspective],
    policy: SelectionPolicy,
    enabled: &PerspectiveSet,
    instance_id: &str,
) -> SelectionOutcome {
    assert!(!enabled.is_empty(), "selection needs at least one enabled perspective");
    let filtered: Vec<RankedPerspective> = rankings.iter().filter(|r| enabled.contains(&r.kind)).copied().collect();
    let ranked = rank_by_confidence(&filtered);
    let n = ranked.len();
    let (index, fallback_used) = match (policy, n) {
        (_, 0) => {
            let chosen = if enabled.contains(&PerspectiveKind::Direct) {
                PerspectiveKind::Direct
            } else {
                *enabled.iter().next().expect("non-empty")
            };
            return SelectionOutcome { chosen, rankings: ranked, policy, fallback_used: true };
        }
        (SelectionPolicy::Highest, _) => (0, false),
        (SelectionPolicy::Second | SelectionPolicy::Lowest, 1) => (0, true),
        (SelectionPolicy::Second, _) => (1, false),
        (SelectionPolicy::Lowest, _) => (n - 1, false),
        (SelectionPolicy::Random { seed }, _) => (keyed_rng(seed, "select", instance_id).gen_range(0..n), false),
    };
    SelectionOutcome { chosen: ranked[index].kind, rankings: ranked, policy, fallback_used }
}

/// Enabled perspectives after an ablation removes some of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Restriction {
    Perspectives(PerspectiveSet),
    /// Everything removed: plain reasoning without perspective instructions.
    SimpleReasoning,
}

pub fn restrict_enabled(full: &PerspectiveSet, removed: &PerspectiveSet) -> Restriction {
    let kept: PerspectiveSet = full.difference(removed).copied().collect();
    if kept.is_empty() {
        Restriction::SimpleReasoning
    } else {
        Restriction::Perspectives(kept)
    }
}
