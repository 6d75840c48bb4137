//! Per-student secrets derived from the course master secret, and the
//! roster file that caches them.

use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cryptokit::{decode_hex, encode_hex, kdf, BlockKey};
use crate::seedgen::{validate_user_id, DerivationContext, SeedError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentIdentity {
    pub user_id: String,
    pub password_key: BlockKey,
    pub uac: [u8; 32],
}

impl StudentIdentity {
    /// `K_p = kdf("pw", [master_secret, user_id])`,
    /// `uac = SHA-256(master_secret ‖ "UAC" ‖ user_id)`.
    pub fn derive(ctx: &DerivationContext, user_id: &str) -> Result<Self, SeedError> {
        validate_user_id(user_id)?;
        let password_key = kdf("pw", &[ctx.master_secret(), user_id.as_bytes()]);
        let uac = Sha256::new()
            .chain_update(ctx.master_secret())
            .chain_update(b"UAC")
            .chain_update(user_id.as_bytes())
            .finalize()
            .into();
        Ok(StudentIdentity {
            user_id: user_id.to_string(),
            password_key,
            uac,
        })
    }

    pub fn uac_hex(&self) -> String {
        encode_hex(&self.uac)
    }
}

#[derive(Debug, Error)]
pub enum RosterError {
    #[error("roster line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate user {0}")]
    Duplicate(String),
    #[error("roster i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Identity(#[from] SeedError),
}

/// Class list, persisted as `user_id password_key_hex uac_hex` lines.
#[derive(Debug, Clone, Default)]
pub struct Roster {
    entries: Vec<StudentIdentity>,
    index: HashMap<String, usize>,
}

impl Roster {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, RosterError> {
        let mut roster = Roster::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| RosterError::Parse {
                line: i + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [user, key, uac] = fields[..] else {
                return Err(bad("expected three fields"));
            };
            validate_user_id(user).map_err(|e| bad(&e.to_string()))?;
            let key: [u8; 16] = decode_hex(key)
                .ok()
                .and_then(|b| b.try_into().ok())
                .ok_or_else(|| bad("password key must be 32 hex digits"))?;
            let uac: [u8; 32] = decode_hex(uac)
                .ok()
                .and_then(|b| b.try_into().ok())
                .ok_or_else(|| bad("uac must be 64 hex digits"))?;
            roster.insert(StudentIdentity {
                user_id: user.to_string(),
                password_key: BlockKey::from_bytes(key),
                uac,
            })?;
        }
        Ok(roster)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RosterError> {
        let path = path.as_ref();
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Roster::new()),
            Err(source) => Err(RosterError::Io {
                path: path.display().to_string(),
                source,
            }),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RosterError> {
        let path = path.as_ref();
        std::fs::write(path, self.render()).map_err(|source| RosterError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|s| {
                format!(
                    "{} {} {}\n",
                    s.user_id,
                    encode_hex(&s.password_key.to_bytes()),
                    s.uac_hex()
                )
            })
            .collect()
    }

    pub fn insert(&mut self, identity: StudentIdentity) -> Result<(), RosterError> {
        if self.index.contains_key(&identity.user_id) {
            return Err(RosterError::Duplicate(identity.user_id));
        }
        self.index
            .insert(identity.user_id.clone(), self.entries.len());
        self.entries.push(identity);
        Ok(())
    }

    /// Derives and adds `user_id`; returns false if it was already present.
    pub fn add(&mut self, ctx: &DerivationContext, user_id: &str) -> Result<bool, RosterError> {
        if self.index.contains_key(user_id) {
            return Ok(false);
        }
        self.insert(StudentIdentity::derive(ctx, user_id)?)?;
        Ok(true)
    }

    pub fn get(&self, user_id: &str) -> Option<&StudentIdentity> {
        self.index.get(user_id).map(|&i| &self.entries[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &StudentIdentity> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Case-insensitive comparison of a submitted code against the roster.
/// Unknown users simply fail.
pub fn verify_uac(roster: &Roster, user_id: &str, submitted: &str) -> bool {
    roster
        .get(user_id)
        .is_some_and(|s| submitted.trim().eq_ignore_ascii_case(&s.uac_hex()))
}
