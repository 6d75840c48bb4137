//! JSON shapes shared by the web service and its clients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exercises::{ExerciseKind, ExerciseMode, ExerciseSpec};

pub use crate::exercises::{ExerciseInstance, PartResult, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub exercise_id: String,
    pub kind: ExerciseKind,
    pub mode: ExerciseMode,
    pub title: String,
    pub points: u32,
    pub part_names: Vec<String>,
}

impl From<&ExerciseSpec> for CatalogEntry {
    fn from(spec: &ExerciseSpec) -> Self {
        CatalogEntry {
            exercise_id: spec.exercise_id.clone(),
            kind: spec.kind,
            mode: spec.mode,
            title: spec.kind.title().to_string(),
            points: spec.points,
            part_names: spec.part_names.clone(),
        }
    }
}

/// Body of `POST /ex/{id}`. `nonce` and `tag` are hex, as served.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub user: String,
    #[serde(default)]
    pub answers: BTreeMap<String, String>,
    #[serde(default)]
    pub nonce: String,
    #[serde(default)]
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UacRequest {
    pub user: String,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub catalog_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
}
