#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use pex_core::cryptokit::{block_decrypt, block_encrypt, cbc_decrypt, decode_base64, kdf};
use pex_core::exercises::{default_catalog, ExerciseEngine};
use pex_core::fortunes::FortuneCorpus;
use pex_core::gradebook::{log_path, parse_log, LogRecord};
use pex_core::identity::{Roster, StudentIdentity};
use pex_core::seedgen::DerivationContext;
use pex_server::Service;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

pub const SECRET: &str = "integration-master-secret";
pub const COURSE: &str = "sec101";
pub const USERS: [&str; 4] = ["fred", "alice", "bob", "carol"];

pub struct Harness {
    pub service: Arc<Service>,
    pub web: SocketAddr,
    pub auth: SocketAddr,
    _dir: tempfile::TempDir,
    pub log_dir: PathBuf,
}

impl Harness {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.web)
    }

    pub fn records(&self, log_name: &str) -> Vec<LogRecord> {
        read_records(&self.log_dir, log_name)
    }

    pub fn identity(&self, user: &str) -> StudentIdentity {
        self.service.roster.get(user).expect("on roster").clone()
    }
}

pub fn read_records(dir: &Path, log_name: &str) -> Vec<LogRecord> {
    let path = log_path(dir, log_name).unwrap();
    if !path.exists() {
        return Vec::new();
    }
    let parsed = parse_log(&path).unwrap();
    assert!(parsed.rejected.is_empty(), "{:?}", parsed.rejected);
    parsed.records
}

pub fn context() -> DerivationContext {
    DerivationContext::new(SECRET.as_bytes(), COURSE).unwrap()
}

pub fn engine() -> ExerciseEngine {
    ExerciseEngine::new(context(), FortuneCorpus::bundled(), default_catalog()).unwrap()
}

pub async fn start(deadline: Duration) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let log_dir = dir.path().join("logs");
    let ctx = context();
    let mut roster = Roster::new();
    for user in USERS {
        roster.add(&ctx, user).unwrap();
    }
    let service = Arc::new(Service::new(engine(), roster, &log_dir, deadline).unwrap());

    let web_listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let auth_listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let web = web_listener.local_addr().unwrap();
    let auth = auth_listener.local_addr().unwrap();
    tokio::spawn(pex_server::web::serve(web_listener, Arc::clone(&service)));
    tokio::spawn(pex_server::auth::serve(auth_listener, Arc::clone(&service)));
    Harness {
        service,
        web,
        auth,
        _dir: dir,
        log_dir,
    }
}

/// Line-protocol client that records every byte the server sends.
pub struct AuthClient {
    stream: TcpStream,
    pub transcript: String,
    pending: Vec<u8>,
}

impl AuthClient {
    pub async fn connect(addr: SocketAddr) -> Self {
        AuthClient {
            stream: TcpStream::connect(addr).await.unwrap(),
            transcript: String::new(),
            pending: Vec::new(),
        }
    }

    /// Reads until the received text ends with `marker`; returns the text
    /// received since the previous call.
    pub async fn expect(&mut self, marker: &str) -> String {
        let mut buf = [0u8; 512];
        while !self.pending.ends_with(marker.as_bytes()) {
            let n = tokio::time::timeout(Duration::from_secs(10), self.stream.read(&mut buf))
                .await
                .expect("server stalled")
                .unwrap();
            assert!(
                n > 0,
                "closed while waiting for {marker:?}; got {:?}",
                String::from_utf8_lossy(&self.pending)
            );
            self.pending.extend_from_slice(&buf[..n]);
        }
        self.take()
    }

    pub async fn read_to_end(&mut self) -> String {
        let mut rest = Vec::new();
        tokio::time::timeout(Duration::from_secs(10), self.stream.read_to_end(&mut rest))
            .await
            .expect("server did not close")
            .unwrap();
        self.pending.extend_from_slice(&rest);
        self.take()
    }

    fn take(&mut self) -> String {
        let text = String::from_utf8(std::mem::take(&mut self.pending)).unwrap();
        self.transcript.push_str(&text);
        text
    }

    pub async fn send_line(&mut self, line: &str) {
        self.stream
            .write_all(format!("{line}\n").as_bytes())
            .await
            .unwrap();
    }
}

fn block(hex_text: &str) -> [u8; 8] {
    hex::decode(hex_text.trim()).unwrap().try_into().unwrap()
}

fn after<'a>(text: &'a str, label: &str) -> &'a str {
    let start = text
        .find(label)
        .unwrap_or_else(|| panic!("{label:?} not in {text:?}"))
        + label.len();
    text[start..].lines().next().unwrap()
}

pub struct Reward {
    pub fortune: String,
    pub uac: Option<String>,
    pub transcript: String,
    pub check_byte: Option<u8>,
}

/// Completes a session at `level` the way a student with the right key would.
pub async fn authenticate(
    addr: SocketAddr,
    identity: &StudentIdentity,
    level: u8,
    c2: [u8; 8],
) -> Reward {
    let key = &identity.password_key;
    let mut client = AuthClient::connect(addr).await;
    client.expect("UserID: ").await;
    client.send_line(&identity.user_id).await;
    client.expect("Request #: ").await;
    client.send_line(&level.to_string()).await;
    let text = client.expect("Response: ").await;
    let c1 = block(after(&text, "Challenge: "));
    let response = block_encrypt(key, u64::from_be_bytes(c1));
    client.send_line(&hex::encode(response.to_be_bytes())).await;

    let mut check_byte = None;
    if level >= 2 {
        client.expect("Your challenge for me: ").await;
        client.send_line(&hex::encode(c2)).await;
        let text = client.expect("Check byte: ").await;
        let reply = u64::from_str_radix(after(&text, "My response: "), 16).unwrap();
        let modified = block_decrypt(key, reply).to_be_bytes();
        let changed: Vec<usize> = (0..8).filter(|&i| modified[i] != c2[i]).collect();
        assert_eq!(changed.len(), 1, "server must change exactly one byte");
        let value = modified[changed[0]];
        check_byte = Some(value);
        client.send_line(&format!("{value:02x}")).await;
    }

    let rest = client.read_to_end().await;
    let header = "\nAuthentication succeeded.  Here is your random fortune:\n\n";
    let body = rest
        .strip_prefix(header)
        .unwrap_or_else(|| panic!("no success header in {rest:?}"));
    let (fortune, uac) = if level == 3 {
        let session = kdf("sess", &[&key.to_bytes(), &c1, &c2]);
        let plain = cbc_decrypt(&session, &decode_base64(body).unwrap()).unwrap();
        let plain = String::from_utf8(plain).unwrap();
        let (fortune, uac) = plain.trim_end_matches('\n').rsplit_once("\n\n").unwrap();
        (fortune.to_string(), Some(uac.to_string()))
    } else {
        (body.trim_end_matches('\n').to_string(), None)
    };
    Reward {
        fortune,
        uac,
        transcript: client.transcript,
        check_byte,
    }
}
