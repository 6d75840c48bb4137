//! Core logic for the exercise platform: seeded generation, crypto
//! primitives, exercise engines, student identities, and grading.

pub mod api;
pub mod config;
pub mod cryptokit;
pub mod exercises;
pub mod fortunes;
pub mod gradebook;
pub mod identity;
pub mod seedgen;
