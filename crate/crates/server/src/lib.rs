//! The two long-running services: the HTTP exercise front end and the
//! real-time challenge-response authentication server. Both share one
//! [`Service`] holding the immutable course state and the log appender.

pub mod auth;
pub mod web;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use pex_core::config::{Config, ConfigError};
use pex_core::exercises::{default_catalog, ExerciseEngine, ExerciseError};
use pex_core::fortunes::{load_corpus, CorpusError, FortuneCorpus};
use pex_core::gradebook::{LogAppender, LogError, LogRecord, LogTimestamp};
use pex_core::identity::{Roster, RosterError};
use pex_core::seedgen::DerivationContext;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Exercise(#[from] ExerciseError),
}

pub struct Service {
    pub engine: ExerciseEngine,
    pub roster: Roster,
    pub logs: LogAppender,
    /// Per-prompt deadline on the authentication server.
    pub prompt_deadline: Duration,
    active_sessions: AtomicUsize,
}

impl Service {
    pub fn new(
        engine: ExerciseEngine,
        roster: Roster,
        log_dir: impl AsRef<Path>,
        prompt_deadline: Duration,
    ) -> Result<Self, ServiceError> {
        Ok(Service {
            engine,
            roster,
            logs: LogAppender::new(log_dir.as_ref())?,
            prompt_deadline,
            active_sessions: AtomicUsize::new(0),
        })
    }

    /// Default catalog, corpus from the config (bundled if unset), roster
    /// from disk, secret from the environment.
    pub fn from_config(config: &Config) -> Result<Self, ServiceError> {
        let ctx: DerivationContext = config.derivation_context()?;
        let corpus = match &config.corpus_path {
            Some(path) => load_corpus(path)?,
            None => FortuneCorpus::bundled(),
        };
        let engine = ExerciseEngine::new(ctx, corpus, default_catalog())?;
        let roster = Roster::load(&config.roster_path)?;
        Self::new(engine, roster, &config.log_dir, config.prompt_deadline)
    }

    /// Authentication sessions currently being handled.
    pub fn active_sessions(&self) -> usize {
        self.active_sessions.load(Ordering::SeqCst)
    }

    pub(crate) fn session_guard(self: &Arc<Self>) -> SessionGuard {
        self.active_sessions.fetch_add(1, Ordering::SeqCst);
        SessionGuard(Arc::clone(self))
    }

    /// Appends one record; failures are reported, never fatal to a request.
    pub(crate) fn log(&self, log_name: &str, user_id: &str, message: &str) {
        let record = match LogRecord::new(LogTimestamp::now(), user_id, message) {
            Ok(r) => r,
            Err(e) => {
                tracing::warn!("unloggable record for {user_id}: {e}");
                return;
            }
        };
        if let Err(e) = self.logs.append(log_name, &record) {
            tracing::error!("log append to {log_name} failed: {e}");
        }
    }
}

pub(crate) struct SessionGuard(Arc<Service>);

impl Drop for SessionGuard {
    fn drop(&mut self) {
        self.0.active_sessions.fetch_sub(1, Ordering::SeqCst);
    }
}
