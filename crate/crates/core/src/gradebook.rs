//! Append-only exercise logs and grading.
//!
//! One line per submission, `Dow Mon DD HH:MM:SS ZONE YYYY user message`,
//! in `{log_dir}/{exercise_id}.log`. Grading is a pure function of those
//! bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, NaiveDateTime, Utc};
use thiserror::Error;

use crate::seedgen::validate_user_id;

const HEAD_FORMAT: &str = "%a %b %e %H:%M:%S";
const HEAD_LEN: usize = 19;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid log record: {0}")]
    Record(String),
    #[error("invalid exercise id {0:?}")]
    ExerciseId(String),
}

/// Wall-clock time plus the zone abbreviation it was written in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogTimestamp {
    pub local: NaiveDateTime,
    pub zone: String,
}

impl LogTimestamp {
    pub fn new(local: NaiveDateTime, zone: impl Into<String>) -> Result<Self, LogError> {
        let zone = zone.into();
        if zone.is_empty() || zone.chars().any(|c| c.is_whitespace()) {
            return Err(LogError::Record(format!("bad zone {zone:?}")));
        }
        Ok(LogTimestamp { local, zone })
    }

    pub fn from_utc(at: DateTime<Utc>) -> Self {
        LogTimestamp {
            local: at.naive_utc(),
            zone: "UTC".into(),
        }
    }

    pub fn now() -> Self {
        Self::from_utc(Utc::now())
    }
}

impl fmt::Display for LogTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.local.format(HEAD_FORMAT),
            self.zone,
            self.local.format("%Y")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub timestamp: LogTimestamp,
    pub user_id: String,
    pub message: String,
}

impl LogRecord {
    pub fn new(
        timestamp: LogTimestamp,
        user_id: impl Into<String>,
        message: impl Into<String>,
    ) -> Result<Self, LogError> {
        let user_id = user_id.into();
        let message = message.into();
        validate_user_id(&user_id).map_err(|e| LogError::Record(e.to_string()))?;
        if message.is_empty() || message.contains(['\n', '\r']) {
            return Err(LogError::Record(
                "message must be one non-empty line".into(),
            ));
        }
        Ok(LogRecord {
            timestamp,
            user_id,
            message,
        })
    }

    /// `(parts correct, total parts)` when the message carries the summary
    /// sentence.
    pub fn parts(&self) -> Option<(u32, u32)> {
        parts_from_message(&self.message)
    }
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.timestamp, self.user_id, self.message)
    }
}

/// The sentence every graded submission is summarized with.
pub fn summary_line(correct: usize, total: usize) -> String {
    format!("You have {correct} out of {total} parts correct.")
}

fn parts_from_message(message: &str) -> Option<(u32, u32)> {
    let start = message.find("You have ")? + "You have ".len();
    let rest = &message[start..];
    let (correct, rest) = rest.split_once(" out of ")?;
    let (total, _) = rest.split_once(" parts correct.")?;
    let correct: u32 = correct.parse().ok()?;
    let total: u32 = total.parse().ok()?;
    (total > 0 && correct <= total).then_some((correct, total))
}

pub fn parse_record(line: &str) -> Result<LogRecord, String> {
    if line.len() < HEAD_LEN || !line.is_char_boundary(HEAD_LEN) {
        return Err("line too short".into());
    }
    let (head, rest) = line.split_at(HEAD_LEN);
    let rest = rest.strip_prefix(' ').ok_or("missing zone separator")?;
    let (zone, rest) = rest.split_once(' ').ok_or("missing zone")?;
    let (year, rest) = rest.split_once(' ').ok_or("missing year")?;
    let (user, message) = rest.split_once(' ').ok_or("missing user or message")?;
    if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad year {year:?}"));
    }
    let local =
        NaiveDateTime::parse_from_str(&format!("{head} {year}"), &format!("{HEAD_FORMAT} %Y"))
            .map_err(|e| format!("bad timestamp: {e}"))?;
    if local.format(HEAD_FORMAT).to_string() != head {
        return Err("timestamp not in canonical form".into());
    }
    let timestamp = LogTimestamp::new(local, zone).map_err(|e| e.to_string())?;
    LogRecord::new(timestamp, user, message).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    /// 1-based.
    pub line_number: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedLog {
    pub records: Vec<LogRecord>,
    pub rejected: Vec<RejectedLine>,
}

/// Total over arbitrary bytes: every line lands in `records` or `rejected`.
pub fn parse_log_bytes(bytes: &[u8]) -> ParsedLog {
    let mut parsed = ParsedLog::default();
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    if body.is_empty() && bytes.len() <= 1 {
        return parsed;
    }
    for (index, raw) in body.split(|&b| b == b'\n').enumerate() {
        let result = std::str::from_utf8(raw)
            .map_err(|_| "invalid UTF-8".to_string())
            .and_then(parse_record);
        match result {
            Ok(record) => parsed.records.push(record),
            Err(reason) => parsed.rejected.push(RejectedLine {
                line_number: index + 1,
                text: String::from_utf8_lossy(raw).into_owned(),
                reason,
            }),
        }
    }
    parsed
}

pub fn parse_log(path: impl AsRef<Path>) -> Result<ParsedLog, LogError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| LogError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_log_bytes(&bytes))
}

pub fn log_path(log_dir: &Path, exercise_id: &str) -> Result<PathBuf, LogError> {
    let valid = !exercise_id.is_empty()
        && exercise_id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
    if !valid {
        return Err(LogError::ExerciseId(exercise_id.into()));
    }
    Ok(log_dir.join(format!("{exercise_id}.log")))
}

/// Appends one record with a single `write` on an `O_APPEND` handle.
pub fn append_log(log_dir: &Path, exercise_id: &str, record: &LogRecord) -> Result<(), LogError> {
    let path = log_path(log_dir, exercise_id)?;
    let line = format!("{record}\n");
    let write_err = |source| LogError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(write_err)?;
    file.write_all(line.as_bytes()).map_err(write_err)
}

/// Serialized appender shared by concurrent request handlers.
#[derive(Debug)]
pub struct LogAppender {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl LogAppender {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, LogError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| LogError::Write {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(LogAppender {
            dir,
            lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn append(&self, exercise_id: &str, record: &LogRecord) -> Result<(), LogError> {
        let _guard = self
            .lock
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        append_log(&self.dir, exercise_id, record)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRules {
    pub points: u32,
    pub effort_threshold: usize,
    pub effort_fraction: f64,
}

impl Default for ScoreRules {
    fn default() -> Self {
        ScoreRules {
            points: 25,
            effort_threshold: 3,
            effort_fraction: 0.2,
        }
    }
}

fn round_ratio(points: u32, num: u32, den: u32) -> u32 {
    let (p, n, d) = (points as u64, num as u64, den as u64);
    ((2 * p * n + d) / (2 * d)) as u32
}

/// Score for one user's records of one exercise.
///
/// Best attempt wins. A user with at least `effort_threshold` attempts is
/// never scored below `effort_fraction` of the points, which covers the
/// student who never got a part right but kept trying.
pub fn score_user<'a>(records: impl IntoIterator<Item = &'a LogRecord>, rules: &ScoreRules) -> u32 {
    let mut attempts = 0usize;
    let mut best: Option<(u32, u32)> = None;
    for (correct, total) in records.into_iter().filter_map(LogRecord::parts) {
        attempts += 1;
        let better = match best {
            None => true,
            Some((bc, bt)) => (correct as u64) * (bt as u64) > (bc as u64) * (total as u64),
        };
        if better {
            best = Some((correct, total));
        }
    }
    let earned = match best {
        Some((correct, total)) => round_ratio(rules.points, correct, total),
        None => 0,
    };
    if attempts >= rules.effort_threshold {
        let credit = (rules.effort_fraction.clamp(0.0, 1.0) * rules.points as f64).round();
        earned.max((credit as u32).min(rules.points))
    } else {
        earned
    }
}

/// Scores every user that appears in `records`.
pub fn score(records: &[LogRecord], rules: &ScoreRules) -> BTreeMap<String, u32> {
    let mut by_user: BTreeMap<&str, Vec<&LogRecord>> = BTreeMap::new();
    for record in records {
        by_user.entry(&record.user_id).or_default().push(record);
    }
    by_user
        .into_iter()
        .map(|(user, recs)| (user.to_string(), score_user(recs, rules)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRow {
    pub user_id: String,
    pub scores: Vec<u32>,
}

/// `user` left-aligned, scores right-aligned (width at least 2), one space
/// between columns.
pub fn render_table(rows: &[ScoreRow]) -> String {
    let name_width = rows.iter().map(|r| r.user_id.len()).max().unwrap_or(0);
    let score_width = rows
        .iter()
        .flat_map(|r| &r.scores)
        .map(|s| s.to_string().len())
        .max()
        .unwrap_or(0)
        .max(2);
    let mut out = String::new();
    for row in rows {
        out.push_str(&format!("{:<name_width$}", row.user_id));
        for s in &row.scores {
            out.push_str(&format!(" {s:>score_width$}"));
        }
        out.push('\n');
    }
    out
}

pub fn render_csv(exercise_ids: &[&str], rows: &[ScoreRow]) -> String {
    let mut out = String::from("user");
    for id in exercise_ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.user_id);
        for s in &row.scores {
            out.push_str(&format!(",{s}"));
        }
        out.push('\n');
    }
    out
}

/// Score line, blank line, `log count =  N`, blank line, the raw records.
pub fn render_detail(score: u32, records: &[&LogRecord]) -> String {
    let mut out = format!("{score}\n\nlog count =  {:>2}\n\n", records.len());
    for record in records {
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}
