//! Three-level challenge-response authentication over a line-oriented TCP
//! connection, with a deadline on every prompt.

use std::sync::Arc;
use std::time::Duration;

use pex_core::cryptokit::{
    block_encrypt, cbc_encrypt, decode_hex, encode_base64_wrapped, encode_hex, kdf,
    BASE64_LINE_WIDTH,
};
use pex_core::gradebook::summary_line;
use pex_core::identity::StudentIdentity;
use pex_core::seedgen::validate_user_id;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tokio::io::{AsyncBufReadExt, AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt, BufReader};
use tokio::net::TcpListener;

use crate::Service;

pub const PROMPT_USER: &str = "UserID: ";
pub const PROMPT_LEVEL: &str = "Request #: ";
pub const PROMPT_RESPONSE: &str = "Response: ";
pub const PROMPT_CHALLENGE: &str = "Your challenge for me: ";
pub const PROMPT_CHECK_BYTE: &str = "Check byte: ";
pub const FAILED: &str = "\nAuthentication failed.  No fortune for you!\n";
pub const SUCCEEDED: &str = "\nAuthentication succeeded.  Here is your random fortune:\n\n";

/// Longest line a client may send to any prompt.
pub const MAX_LINE: usize = 1024;
/// Log user for sessions that never named a well-formed UserID.
pub const ANONYMOUS_USER: &str = "nobody";

/// How a session ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionOutcome {
    Succeeded { level: u8 },
    Failed { level: Option<u8> },
    TimedOut { prompt: &'static str },
    Disconnected { prompt: &'static str },
}

/// Replaces one byte of `c2`, chosen uniformly, by a uniformly chosen
/// different value. Returns the modified block, the index and the new value.
pub fn make_check_byte_challenge(c2: [u8; 8], rng: &mut impl Rng) -> ([u8; 8], usize, u8) {
    let index = rng.gen_range(0..8);
    let value = loop {
        let v: u8 = rng.gen();
        if v != c2[index] {
            break v;
        }
    };
    let mut modified = c2;
    modified[index] = value;
    (modified, index, value)
}

/// Level-3 reward: the fortune and the UAC, CBC-encrypted under a key bound
/// to both challenges, base64 in 60-column lines.
pub fn level3_payload(
    identity: &StudentIdentity,
    c1: &[u8; 8],
    c2: &[u8; 8],
    fortune: &str,
) -> String {
    let key = kdf("sess", &[&identity.password_key.to_bytes(), c1, c2]);
    let plaintext = format!("{fortune}\n\n{}\n", identity.uac_hex());
    encode_base64_wrapped(&cbc_encrypt(&key, plaintext.as_bytes()), BASE64_LINE_WIDTH)
}

enum Read {
    Line(String),
    TimedOut,
    Closed,
}

struct Conn<R, W> {
    reader: BufReader<R>,
    writer: W,
    deadline: Duration,
}

impl<R: AsyncRead + Unpin, W: AsyncWrite + Unpin> Conn<R, W> {
    async fn send(&mut self, text: &str) -> std::io::Result<()> {
        self.writer.write_all(text.as_bytes()).await?;
        self.writer.flush().await
    }

    /// Prompts and reads one line, trimmed of its line ending and spaces.
    async fn ask(&mut self, prompt: &'static str) -> Read {
        if self.send(prompt).await.is_err() {
            return Read::Closed;
        }
        let mut raw = Vec::new();
        let mut limited = (&mut self.reader).take(MAX_LINE as u64 + 1);
        match tokio::time::timeout(self.deadline, limited.read_until(b'\n', &mut raw)).await {
            Err(_) => Read::TimedOut,
            Ok(Err(_)) | Ok(Ok(0)) => Read::Closed,
            Ok(Ok(_)) if raw.len() > MAX_LINE || !raw.ends_with(b"\n") => Read::Closed,
            Ok(Ok(_)) => Read::Line(String::from_utf8_lossy(&raw).trim().to_string()),
        }
    }
}

macro_rules! ask {
    ($conn:expr, $prompt:expr) => {
        match $conn.ask($prompt).await {
            Read::Line(line) => line,
            Read::TimedOut => return SessionOutcome::TimedOut { prompt: $prompt },
            Read::Closed => return SessionOutcome::Disconnected { prompt: $prompt },
        }
    };
}

fn decode_block(text: &str) -> Option<[u8; 8]> {
    decode_hex(text).ok()?.try_into().ok()
}

/// Runs one dialogue on an already-open stream and logs its outcome.
pub async fn run_session<R, W>(
    service: &Service,
    reader: R,
    writer: W,
    rng: &mut impl Rng,
) -> SessionOutcome
where
    R: AsyncRead + Unpin,
    W: AsyncWrite + Unpin,
{
    let mut conn = Conn {
        reader: BufReader::new(reader),
        writer,
        deadline: service.prompt_deadline,
    };
    let mut user = None;
    let mut level = None;
    let outcome = dialogue(service, &mut conn, rng, &mut user, &mut level).await;
    let _ = conn.writer.shutdown().await;

    let log_user = user
        .as_deref()
        .filter(|u| validate_user_id(u).is_ok())
        .unwrap_or(ANONYMOUS_USER);
    let log_name = match level {
        Some(l) => format!("auth{l}"),
        None => "auth".to_string(),
    };
    let message = match &outcome {
        SessionOutcome::Succeeded { level } => {
            format!("level {level} succeeded: {}", summary_line(1, 1))
        }
        SessionOutcome::Failed { .. } => format!("failed: {}", summary_line(0, 1)),
        SessionOutcome::TimedOut { prompt } => {
            format!("TIMEOUT waiting for {:?}", prompt.trim_end())
        }
        SessionOutcome::Disconnected { prompt } => format!("DISCONNECT at {:?}", prompt.trim_end()),
    };
    service.log(&log_name, log_user, &message);
    outcome
}

async fn dialogue<R, W>(
    service: &Service,
    conn: &mut Conn<R, W>,
    rng: &mut impl Rng,
    user_slot: &mut Option<String>,
    level_slot: &mut Option<u8>,
) -> SessionOutcome
where
    R: AsyncRead + Unpin,
    W: AsyncWrite + Unpin,
{
    let user = ask!(conn, PROMPT_USER);
    *user_slot = Some(user.clone());
    let level_text = ask!(conn, PROMPT_LEVEL);
    let level = match level_text.as_str() {
        "1" => Some(1),
        "2" => Some(2),
        "3" => Some(3),
        _ => None,
    };
    *level_slot = level;

    let c1: [u8; 8] = rng.gen();
    if conn
        .send(&format!("Challenge: {}\n", encode_hex(&c1)))
        .await
        .is_err()
    {
        return SessionOutcome::Disconnected {
            prompt: PROMPT_RESPONSE,
        };
    }
    let response = ask!(conn, PROMPT_RESPONSE);

    let fail = |level| SessionOutcome::Failed { level };
    // Unknown users take the same path as a wrong response.
    let identity = service.roster.get(&user);
    let (Some(identity), Some(level)) = (identity, level) else {
        let _ = conn.send(FAILED).await;
        return fail(level);
    };
    let expected = block_encrypt(&identity.password_key, u64::from_be_bytes(c1));
    if decode_block(&response).map(u64::from_be_bytes) != Some(expected) {
        let _ = conn.send(FAILED).await;
        return fail(Some(level));
    }

    let mut c2 = [0u8; 8];
    if level >= 2 {
        let text = ask!(conn, PROMPT_CHALLENGE);
        let Some(block) = decode_block(&text) else {
            let _ = conn.send(FAILED).await;
            return fail(Some(level));
        };
        c2 = block;
        let (modified, _, value) = make_check_byte_challenge(c2, rng);
        let reply = block_encrypt(&identity.password_key, u64::from_be_bytes(modified));
        if conn
            .send(&format!(
                "My response: {}\n",
                encode_hex(&reply.to_be_bytes())
            ))
            .await
            .is_err()
        {
            return SessionOutcome::Disconnected {
                prompt: PROMPT_CHECK_BYTE,
            };
        }
        let check = ask!(conn, PROMPT_CHECK_BYTE);
        let ok = check.len() == 2 && decode_hex(&check).ok().as_deref() == Some(&[value][..]);
        if !ok {
            let _ = conn.send(FAILED).await;
            return fail(Some(level));
        }
    }

    let (_, fortune) = service
        .engine
        .corpus()
        .pick(pex_core::seedgen::lcg48_init(rng.gen()));
    let reward = if level == 3 {
        level3_payload(identity, &c1, &c2, fortune)
    } else {
        format!("{fortune}\n")
    };
    let _ = conn.send(&format!("{SUCCEEDED}{reward}")).await;
    SessionOutcome::Succeeded { level }
}

/// Accepts connections forever, one task per session.
pub async fn serve(listener: TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        let service = Arc::clone(&service);
        tokio::spawn(async move {
            let _guard = service.session_guard();
            let (reader, writer) = stream.into_split();
            let mut rng = StdRng::from_entropy();
            let outcome = run_session(&service, reader, writer, &mut rng).await;
            tracing::debug!(%peer, ?outcome, "auth session finished");
        });
    }
}
