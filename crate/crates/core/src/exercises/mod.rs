//! Exercise engines: per-student instance generation, rendering, answer
//! checking, and reference solvers.
//!
//! Instances are stateless on the server. Whatever randomness a dynamic
//! instance used travels with the page as a nonce plus an integrity tag, and
//! the checker regenerates the parameters from them.

mod feedback;
mod milk;
mod mitm;
mod rng;
mod rsa2;
mod sdes_multi;
mod seed_eq;
mod uac;
mod values;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fortunes::FortuneCorpus;
use crate::gradebook::summary_line;
use crate::seedgen::{derive_seed, validate_user_id, DerivationContext, Seed, SeedError};

pub use feedback::wrap_paragraph;
pub use rsa2::derive_e;
pub use values::{format_bits, parse_bits8, parse_hex_bytes, parse_i64, parse_uint};

/// Dynamic nonces are 8 bytes of big-endian milliseconds plus 4 random bytes.
pub const NONCE_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseKind {
    SeedEq,
    MilkRsa,
    SdesMulti,
    Rsa2,
    RngTime,
    RngChallenge,
    Mitm,
    Uac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseMode {
    Static,
    DynamicTimeless,
    RealTime,
}

impl ExerciseKind {
    pub const ALL: [ExerciseKind; 8] = [
        ExerciseKind::SeedEq,
        ExerciseKind::MilkRsa,
        ExerciseKind::SdesMulti,
        ExerciseKind::Rsa2,
        ExerciseKind::RngTime,
        ExerciseKind::RngChallenge,
        ExerciseKind::Mitm,
        ExerciseKind::Uac,
    ];

    pub fn mode(self) -> ExerciseMode {
        match self {
            ExerciseKind::RngTime | ExerciseKind::RngChallenge | ExerciseKind::Mitm => {
                ExerciseMode::DynamicTimeless
            }
            _ => ExerciseMode::Static,
        }
    }

    /// Every field the answer form carries, graded or not.
    pub fn answer_fields(self) -> &'static [&'static str] {
        match self {
            ExerciseKind::SeedEq => &["x0"],
            ExerciseKind::MilkRsa => &["s", "kegs"],
            ExerciseKind::SdesMulti => &["K1", "K2", "IP", "fK1", "SW", "fK2", "c"],
            ExerciseKind::Rsa2 => &["e", "p", "q", "d_A", "d_B", "m", "h", "s"],
            ExerciseKind::RngTime | ExerciseKind::RngChallenge => &["next"],
            ExerciseKind::Mitm => &["XTa", "XTb", "M", "Cb"],
            ExerciseKind::Uac => &["code"],
        }
    }

    /// The graded parts, in feedback order.
    pub fn part_names(self) -> &'static [&'static str] {
        match self {
            ExerciseKind::MilkRsa => &["s"],
            ExerciseKind::Rsa2 => &["e", "p", "q", "d_A", "d_B", "s"],
            ExerciseKind::Mitm => &["M", "Cb"],
            other => other.answer_fields(),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ExerciseKind::SeedEq => "Seed Equation",
            ExerciseKind::MilkRsa => "Milk Order",
            ExerciseKind::SdesMulti => "Simplified DES",
            ExerciseKind::Rsa2 => "Two-user RSA Key",
            ExerciseKind::RngTime => "Pseudo-random Numbers",
            ExerciseKind::RngChallenge => "Pseudo-random Numbers Challenge",
            ExerciseKind::Mitm => "Man in the Middle",
            ExerciseKind::Uac => "User Authentication Code",
        }
    }

    /// Kinds whose page carries a fresh nonce on every access.
    pub fn uses_nonce(self) -> bool {
        self.mode() == ExerciseMode::DynamicTimeless || self == ExerciseKind::Rsa2
    }
}

impl fmt::Display for ExerciseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json_name(*self);
        f.write_str(name)
    }
}

fn serde_json_name(kind: ExerciseKind) -> &'static str {
    match kind {
        ExerciseKind::SeedEq => "seed_eq",
        ExerciseKind::MilkRsa => "milk_rsa",
        ExerciseKind::SdesMulti => "sdes_multi",
        ExerciseKind::Rsa2 => "rsa2",
        ExerciseKind::RngTime => "rng_time",
        ExerciseKind::RngChallenge => "rng_challenge",
        ExerciseKind::Mitm => "mitm",
        ExerciseKind::Uac => "uac",
    }
}

impl std::str::FromStr for ExerciseKind {
    type Err = ExerciseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExerciseKind::ALL
            .into_iter()
            .find(|k| serde_json_name(*k) == s)
            .ok_or_else(|| ExerciseError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExerciseSpec {
    pub exercise_id: String,
    pub kind: ExerciseKind,
    pub mode: ExerciseMode,
    pub points: u32,
    pub part_names: Vec<String>,
}

impl ExerciseSpec {
    pub fn new(exercise_id: impl Into<String>, kind: ExerciseKind, points: u32) -> Self {
        ExerciseSpec {
            exercise_id: exercise_id.into(),
            kind,
            mode: kind.mode(),
            points,
            part_names: kind.part_names().iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ExerciseError> {
        let bad = |reason: &str| {
            Err(ExerciseError::InvalidSpec(
                self.exercise_id.clone(),
                reason.into(),
            ))
        };
        if self.exercise_id.is_empty()
            || !self
                .exercise_id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        {
            return bad("exercise id must be [A-Za-z0-9_-]+");
        }
        if self.part_names.is_empty() {
            return bad("no parts");
        }
        if self.mode != self.kind.mode() {
            return bad("mode does not match kind");
        }
        if self
            .part_names
            .iter()
            .map(String::as_str)
            .ne(self.kind.part_names().iter().copied())
        {
            return bad("part names do not match kind");
        }
        Ok(())
    }
}

/// The standard course catalog, 25 points per exercise.
pub fn default_catalog() -> Vec<ExerciseSpec> {
    [
        ("seed", ExerciseKind::SeedEq),
        ("milk", ExerciseKind::MilkRsa),
        ("sdes", ExerciseKind::SdesMulti),
        ("rsa2", ExerciseKind::Rsa2),
        ("rng", ExerciseKind::RngTime),
        ("rng2", ExerciseKind::RngChallenge),
        ("mitm", ExerciseKind::Mitm),
        ("uac", ExerciseKind::Uac),
    ]
    .into_iter()
    .map(|(id, kind)| ExerciseSpec::new(id, kind, 25))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExerciseInstance {
    pub exercise_id: String,
    pub user_id: String,
    pub kind: ExerciseKind,
    /// Published parameters only; hidden values never appear here.
    pub params: BTreeMap<String, String>,
    pub answer_fields: Vec<String>,
    pub part_names: Vec<String>,
    /// Kind-specific problem text with concrete values filled in.
    pub statement: String,
    pub display_text: String,
    #[serde(with = "hex_bytes")]
    pub nonce: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pub integrity_tag: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub exercise_id: String,
    pub user_id: String,
    pub fields: BTreeMap<String, String>,
    pub nonce: Vec<u8>,
    pub integrity_tag: Vec<u8>,
    pub received_at: DateTime<Utc>,
}

impl Submission {
    /// An empty answer sheet for `instance`, with its nonce and tag.
    pub fn for_instance(instance: &ExerciseInstance) -> Self {
        Submission {
            exercise_id: instance.exercise_id.clone(),
            user_id: instance.user_id.clone(),
            fields: BTreeMap::new(),
            nonce: instance.nonce.clone(),
            integrity_tag: instance.integrity_tag.clone(),
            received_at: Utc::now(),
        }
    }

    pub fn with_field(mut self, name: &str, value: impl Into<String>) -> Self {
        self.fields.insert(name.to_string(), value.into());
        self
    }

    fn field(&self, name: &str) -> &str {
        self.fields.get(name).map(|s| s.trim()).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartResult {
    pub name: String,
    pub correct: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub exercise_id: String,
    pub user_id: String,
    pub parts: Vec<PartResult>,
    pub correct_count: usize,
    pub total: usize,
    /// Full body, starting `UserID: <user>` and a blank line.
    pub feedback_text: String,
    pub reward: Option<String>,
}

impl Verdict {
    pub fn is_fully_correct(&self) -> bool {
        self.correct_count == self.total
    }

    /// One-line log summary.
    pub fn summary(&self) -> String {
        summary_line(self.correct_count, self.total)
    }

    pub fn part(&self, name: &str) -> Option<&PartResult> {
        self.parts.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExerciseError {
    #[error("unknown exercise {0:?}")]
    UnknownExercise(String),
    #[error("unknown exercise kind {0:?}")]
    UnknownKind(String),
    #[error("invalid exercise {0}: {1}")]
    InvalidSpec(String, String),
    #[error(transparent)]
    InvalidInput(#[from] SeedError),
    #[error("exercise {0} needs a {NONCE_LEN}-byte nonce")]
    MissingNonce(String),
    #[error("integrity check failed")]
    Integrity,
    #[error("solver failed: {0}")]
    Solver(String),
}

/// What a kind module returns from checking.
pub(crate) struct Outcome {
    pub parts: Vec<PartResult>,
    pub body: String,
    pub reward: Option<String>,
}

/// Tunables that are not fixed by the exercise definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    /// Half-width of the offset between the displayed access time and the
    /// actual generator seed of the time-seeded exercise.
    pub time_offset_window_ms: u64,
    pub mitm_prime_bits: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            time_offset_window_ms: 250,
            mitm_prime_bits: 64,
        }
    }
}

/// Inputs every kind module builds its parameters from.
pub(crate) struct GenInput<'a> {
    pub ctx: &'a DerivationContext,
    pub corpus: &'a FortuneCorpus,
    pub options: &'a EngineOptions,
    pub user_id: &'a str,
    pub nonce: &'a [u8],
    pub seed: Seed,
}

enum Params {
    SeedEq(seed_eq::Params),
    Milk(milk::Params),
    Sdes(sdes_multi::Params),
    Rsa2(rsa2::Params),
    RngTime(rng::TimeParams),
    RngChallenge(rng::ChallengeParams),
    Mitm(mitm::Params),
    Uac(uac::Params),
}

pub struct ExerciseEngine {
    ctx: DerivationContext,
    corpus: FortuneCorpus,
    catalog: Vec<ExerciseSpec>,
    options: EngineOptions,
}

impl ExerciseEngine {
    pub fn new(
        ctx: DerivationContext,
        corpus: FortuneCorpus,
        catalog: Vec<ExerciseSpec>,
    ) -> Result<Self, ExerciseError> {
        Self::with_options(ctx, corpus, catalog, EngineOptions::default())
    }

    pub fn with_options(
        ctx: DerivationContext,
        corpus: FortuneCorpus,
        catalog: Vec<ExerciseSpec>,
        options: EngineOptions,
    ) -> Result<Self, ExerciseError> {
        for (i, spec) in catalog.iter().enumerate() {
            spec.validate()?;
            if catalog[..i]
                .iter()
                .any(|s| s.exercise_id == spec.exercise_id)
            {
                return Err(ExerciseError::InvalidSpec(
                    spec.exercise_id.clone(),
                    "duplicate id".into(),
                ));
            }
        }
        Ok(ExerciseEngine {
            ctx,
            corpus,
            catalog,
            options,
        })
    }

    pub fn catalog(&self) -> &[ExerciseSpec] {
        &self.catalog
    }

    pub fn corpus(&self) -> &FortuneCorpus {
        &self.corpus
    }

    pub fn context(&self) -> &DerivationContext {
        &self.ctx
    }

    pub fn spec(&self, exercise_id: &str) -> Result<&ExerciseSpec, ExerciseError> {
        self.catalog
            .iter()
            .find(|s| s.exercise_id == exercise_id)
            .ok_or_else(|| ExerciseError::UnknownExercise(exercise_id.to_string()))
    }

    /// `SHA-256(master_secret ‖ exercise_id ‖ user_id ‖ nonce)[..16]`.
    pub fn integrity_tag(&self, exercise_id: &str, user_id: &str, nonce: &[u8]) -> Vec<u8> {
        Sha256::new()
            .chain_update(self.ctx.master_secret())
            .chain_update(exercise_id.as_bytes())
            .chain_update(user_id.as_bytes())
            .chain_update(nonce)
            .finalize()[..16]
            .to_vec()
    }

    fn effective_nonce<'n>(
        &self,
        spec: &ExerciseSpec,
        nonce: Option<&'n [u8]>,
    ) -> Result<&'n [u8], ExerciseError> {
        let nonce = nonce.unwrap_or_default();
        match spec.kind {
            k if k.mode() == ExerciseMode::DynamicTimeless => {
                if nonce.len() != NONCE_LEN {
                    return Err(ExerciseError::MissingNonce(spec.exercise_id.clone()));
                }
                Ok(nonce)
            }
            ExerciseKind::Rsa2 if !nonce.is_empty() && nonce.len() != NONCE_LEN => {
                Err(ExerciseError::MissingNonce(spec.exercise_id.clone()))
            }
            ExerciseKind::Rsa2 => Ok(nonce),
            _ => Ok(&[]),
        }
    }

    fn build(
        &self,
        spec: &ExerciseSpec,
        user_id: &str,
        nonce: &[u8],
    ) -> Result<Params, ExerciseError> {
        let seed = derive_seed(&self.ctx, user_id, &spec.exercise_id, Some(nonce))?;
        let input = GenInput {
            ctx: &self.ctx,
            corpus: &self.corpus,
            options: &self.options,
            user_id,
            nonce,
            seed,
        };
        Ok(match spec.kind {
            ExerciseKind::SeedEq => Params::SeedEq(seed_eq::build(&input)),
            ExerciseKind::MilkRsa => Params::Milk(milk::build(&input)),
            ExerciseKind::SdesMulti => Params::Sdes(sdes_multi::build(&input)),
            ExerciseKind::Rsa2 => Params::Rsa2(rsa2::build(&input)?),
            ExerciseKind::RngTime => Params::RngTime(rng::build_time(&input)),
            ExerciseKind::RngChallenge => Params::RngChallenge(rng::build_challenge(&input)),
            ExerciseKind::Mitm => Params::Mitm(mitm::build(&input)),
            ExerciseKind::Uac => Params::Uac(uac::build(&input)?),
        })
    }

    /// Renders the instance `user_id` sees for `exercise_id`. Static kinds
    /// ignore `nonce`; dynamic kinds require one.
    pub fn generate(
        &self,
        exercise_id: &str,
        user_id: &str,
        nonce: Option<&[u8]>,
    ) -> Result<ExerciseInstance, ExerciseError> {
        let spec = self.spec(exercise_id)?;
        validate_user_id(user_id)?;
        let nonce = self.effective_nonce(spec, nonce)?;
        let (params, statement) = match self.build(spec, user_id, nonce)? {
            Params::SeedEq(p) => seed_eq::publish(&p),
            Params::Milk(p) => milk::publish(&p),
            Params::Sdes(p) => sdes_multi::publish(&p),
            Params::Rsa2(p) => rsa2::publish(&p),
            Params::RngTime(p) => rng::publish_time(&p),
            Params::RngChallenge(p) => rng::publish_challenge(&p),
            Params::Mitm(p) => mitm::publish(&p),
            Params::Uac(p) => uac::publish(&p),
        };
        let mut instance = ExerciseInstance {
            exercise_id: spec.exercise_id.clone(),
            user_id: user_id.to_string(),
            kind: spec.kind,
            params,
            answer_fields: spec
                .kind
                .answer_fields()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            part_names: spec.part_names.clone(),
            statement,
            display_text: String::new(),
            nonce: nonce.to_vec(),
            integrity_tag: self.integrity_tag(&spec.exercise_id, user_id, nonce),
        };
        instance.display_text = render(&instance);
        Ok(instance)
    }

    /// Checks a submission. Fails with [`ExerciseError::Integrity`] before
    /// looking at any answer if the nonce or tag has been altered.
    pub fn check(&self, submission: &Submission) -> Result<Verdict, ExerciseError> {
        let spec = self.spec(&submission.exercise_id)?;
        validate_user_id(&submission.user_id)?;
        let expected =
            self.integrity_tag(&spec.exercise_id, &submission.user_id, &submission.nonce);
        if expected != submission.integrity_tag {
            return Err(ExerciseError::Integrity);
        }
        let nonce = match self.effective_nonce(spec, Some(&submission.nonce)) {
            Ok(n) if n == submission.nonce.as_slice() => n,
            _ => return Err(ExerciseError::Integrity),
        };
        let outcome = match self.build(spec, &submission.user_id, nonce)? {
            Params::SeedEq(p) => seed_eq::check(&p, submission),
            Params::Milk(p) => milk::check(&p, submission),
            Params::Sdes(p) => sdes_multi::check(&p, submission),
            Params::Rsa2(p) => rsa2::check(&p, &self.corpus, submission),
            Params::RngTime(p) => {
                rng::check_time(&p, submission, self.challenge_link(&submission.user_id))
            }
            Params::RngChallenge(p) => rng::check_challenge(&p, submission),
            Params::Mitm(p) => mitm::check(&p, submission),
            Params::Uac(p) => uac::check(&p, submission),
        };
        let correct_count = outcome.parts.iter().filter(|p| p.correct).count();
        let total = outcome.parts.len();
        Ok(Verdict {
            exercise_id: spec.exercise_id.clone(),
            user_id: submission.user_id.clone(),
            parts: outcome.parts,
            correct_count,
            total,
            feedback_text: format!("UserID: {}\n\n{}\n", submission.user_id, outcome.body),
            reward: outcome.reward,
        })
    }

    fn challenge_link(&self, user_id: &str) -> Option<String> {
        self.catalog
            .iter()
            .find(|s| s.kind == ExerciseKind::RngChallenge)
            .map(|s| format!("/ex/{}?user={}", s.exercise_id, user_id))
    }

    /// Reference solution for an instance this engine generated. Works from
    /// the published parameters, the way a student would.
    pub fn solve(&self, instance: &ExerciseInstance) -> Result<Submission, ExerciseError> {
        let params = &instance.params;
        let fields = match instance.kind {
            ExerciseKind::SeedEq => seed_eq::solve(params),
            ExerciseKind::MilkRsa => milk::solve(params),
            ExerciseKind::SdesMulti => sdes_multi::solve(params),
            ExerciseKind::Rsa2 => rsa2::solve(params),
            ExerciseKind::RngTime => rng::solve_time(params),
            ExerciseKind::RngChallenge => rng::solve_challenge(params),
            ExerciseKind::Mitm => mitm::solve(self, instance),
            ExerciseKind::Uac => uac::solve(&self.ctx, &instance.user_id),
        }?;
        let mut submission = Submission::for_instance(instance);
        submission.fields = fields;
        Ok(submission)
    }
}

/// Deterministic plain-text page for an instance.
pub fn render(instance: &ExerciseInstance) -> String {
    let mut out = String::new();
    out.push_str(instance.kind.title());
    out.push_str("\n\n");
    out.push_str(&format!("UserID: {}\n\n", instance.user_id));
    out.push_str(instance.statement.trim_end());
    out.push_str("\n\n");
    if !instance.params.is_empty() {
        out.push_str("Parameters:\n");
        for (name, value) in &instance.params {
            if value.contains('\n') {
                out.push_str(&format!("  {name} =\n"));
                for line in value.lines() {
                    out.push_str(&format!("    {line}\n"));
                }
            } else {
                out.push_str(&format!("  {name} = {value}\n"));
            }
        }
        out.push('\n');
    }
    out.push_str("Answer fields: ");
    out.push_str(&instance.answer_fields.join(", "));
    out.push('\n');
    if instance.kind.uses_nonce() {
        out.push_str(&format!(
            "\n[nonce {}] [tag {}]\n",
            hex::encode(&instance.nonce),
            hex::encode(&instance.integrity_tag)
        ));
    }
    out
}

/// Builds a dynamic nonce from the access time and four random bytes.
pub fn make_nonce(time_ms: u64, random: [u8; 4]) -> Vec<u8> {
    let mut nonce = time_ms.to_be_bytes().to_vec();
    nonce.extend_from_slice(&random);
    nonce
}

/// Access time recorded in a dynamic nonce.
pub fn nonce_time_ms(nonce: &[u8]) -> Option<u64> {
    let head: [u8; 8] = nonce.get(..8)?.try_into().ok()?;
    Some(u64::from_be_bytes(head))
}

pub(crate) fn part(name: &str, correct: bool, message: impl Into<String>) -> PartResult {
    PartResult {
        name: name.to_string(),
        correct,
        message: message.into(),
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text).map_err(serde::de::Error::custom)
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::{engine, nonce};
    use super::*;

    #[test]
    fn catalog_is_consistent() {
        let engine = engine();
        assert_eq!(engine.catalog().len(), 8);
        let mut bad = ExerciseSpec::new("x", ExerciseKind::Mitm, 10);
        bad.mode = ExerciseMode::Static;
        assert!(bad.validate().is_err());
        let mut dup = default_catalog();
        dup.push(ExerciseSpec::new("seed", ExerciseKind::SeedEq, 1));
        let ctx = DerivationContext::new(*b"unit-test-master-secret!", "c").unwrap();
        assert!(ExerciseEngine::new(ctx, FortuneCorpus::bundled(), dup).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ExerciseKind::ALL {
            assert_eq!(kind.to_string().parse::<ExerciseKind>().unwrap(), kind);
            assert_eq!(serde_json::to_string(&kind).unwrap(), format!("\"{kind}\""));
        }
        assert!("nope".parse::<ExerciseKind>().is_err());
    }

    #[test]
    fn static_generation_is_pure() {
        let engine = engine();
        for id in ["seed", "milk", "sdes", "uac"] {
            let a = engine.generate(id, "fred", None).unwrap();
            let b = engine.generate(id, "fred", Some(&nonce(3))).unwrap();
            assert_eq!(a, b, "{id}");
            assert!(a.nonce.is_empty());
        }
    }

    #[test]
    fn dynamic_generation_requires_nonce() {
        let engine = engine();
        for id in ["rng", "rng2", "mitm"] {
            assert!(matches!(
                engine.generate(id, "fred", None),
                Err(ExerciseError::MissingNonce(_))
            ));
            let a = engine.generate(id, "fred", Some(&nonce(1))).unwrap();
            let b = engine.generate(id, "fred", Some(&nonce(2))).unwrap();
            assert_ne!(a.params, b.params, "{id}");
        }
    }

    #[test]
    fn errors_for_unknown_exercise_and_bad_user() {
        let engine = engine();
        assert!(matches!(
            engine.generate("nope", "fred", None),
            Err(ExerciseError::UnknownExercise(_))
        ));
        assert!(matches!(
            engine.generate("seed", "Fred", None),
            Err(ExerciseError::InvalidInput(_))
        ));
    }

    #[test]
    fn tag_covers_nonce_user_and_exercise() {
        let engine = engine();
        let inst = engine.generate("rng2", "fred", Some(&nonce(1))).unwrap();
        let solved = engine.solve(&inst).unwrap();
        assert!(engine.check(&solved).unwrap().is_fully_correct());

        let mut other_user = solved.clone();
        other_user.user_id = "bob".into();
        assert_eq!(engine.check(&other_user), Err(ExerciseError::Integrity));

        let mut other_nonce = solved.clone();
        other_nonce.nonce[11] ^= 1;
        assert_eq!(engine.check(&other_nonce), Err(ExerciseError::Integrity));

        let mut other_tag = solved;
        other_tag.integrity_tag[0] ^= 0x80;
        assert_eq!(engine.check(&other_tag), Err(ExerciseError::Integrity));
    }

    #[test]
    fn render_is_deterministic_and_complete() {
        let engine = engine();
        for spec in engine.catalog() {
            let inst = engine
                .generate(&spec.exercise_id, "alice", Some(&nonce(9)))
                .unwrap();
            assert_eq!(render(&inst), inst.display_text);
            for (name, value) in &inst.params {
                assert!(inst.display_text.contains(name.as_str()));
                for line in value.lines() {
                    assert!(inst.display_text.contains(line), "{name}: {line}");
                }
            }
            for field in &inst.answer_fields {
                assert!(inst.display_text.contains(field.as_str()));
            }
            if spec.kind.uses_nonce() {
                assert!(inst
                    .display_text
                    .contains(&hex::encode(&inst.integrity_tag)));
            }
        }
    }

    #[test]
    fn missing_fields_are_wrong_not_errors() {
        let engine = engine();
        for spec in engine.catalog() {
            let inst = engine
                .generate(&spec.exercise_id, "fred", Some(&nonce(4)))
                .unwrap();
            let verdict = engine.check(&Submission::for_instance(&inst)).unwrap();
            assert_eq!(verdict.correct_count, 0, "{}", spec.exercise_id);
            assert_eq!(verdict.total, spec.part_names.len());
            assert!(verdict.feedback_text.starts_with("UserID: fred\n\n"));
        }
    }

    #[test]
    fn nonce_layout() {
        let n = make_nonce(0x0102_0304_0506_0708, [9, 10, 11, 12]);
        assert_eq!(n, (1..=12).collect::<Vec<u8>>());
        assert_eq!(nonce_time_ms(&n), Some(0x0102_0304_0506_0708));
        assert_eq!(nonce_time_ms(&[1, 2]), None);
    }

    #[test]
    fn instance_json_carries_hex_nonce() {
        let engine = engine();
        let inst = engine.generate("mitm", "fred", Some(&nonce(5))).unwrap();
        let json = serde_json::to_value(&inst).unwrap();
        assert_eq!(json["nonce"], hex::encode(&inst.nonce));
        let back: ExerciseInstance = serde_json::from_value(json).unwrap();
        assert_eq!(back, inst);
    }
}
