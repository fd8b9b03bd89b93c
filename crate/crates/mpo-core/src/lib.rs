//! Black-box optimization of multimodal prompts.
//!
//! A multimodal prompt pairs a textual instruction with non-textual assets
//! (reference images, video clips, molecules as SMILES). The engine explores
//! this joint space with alignment-preserving operators - generation, edit,
//! and mix, each steered by textual feedback distilled from a prompt's
//! failures - and picks winners with prior-inherited Bayesian-UCB selection,
//! where every child candidate starts from its parent's posterior instead of
//! a cold uniform prior.
//!
//! The crate ships pluggable model backends (HTTP, deterministic mocks,
//! record/replay fixtures), a JSONL-logged checkpointable run loop, and a
//! Bernoulli-world simulator that verifies the selection-strategy claims at
//! desk scale.

pub mod backend;
pub mod bandit;
pub mod engine;
pub mod error;
pub mod explore;
pub mod prompt;
pub mod sim;
pub mod store;
pub mod task;
pub mod template;
mod util;

pub use error::{Error, Result};
