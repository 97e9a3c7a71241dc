//! Perspective-transition prompting and evaluation.
//!
//! The crate renders prompts that ask a model to explore direct, role and
//! third-person perspectives, rank them by self-reported confidence and answer
//! from the chosen one. It parses the responses, applies selection policies,
//! talks to OpenAI-compatible backends (or a scripted mock), loads the task
//! files, and scores runs into CSV tables.

pub mod backend;
pub mod datasets;
pub mod metrics;
pub mod perspective;
pub mod prompt_forge;
pub mod record;
pub mod response_parser;
pub mod runner;
pub mod seeding;
pub mod selector;

pub use perspective::{all_perspectives, PerspectiveKind, PerspectiveSet};
pub use record::PredictionRecord;
