mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{authenticate, start, AuthClient};
use pex_server::auth::FAILED;

#[tokio::test]
async fn level_one_returns_a_fortune() {
    let h = start(Duration::from_secs(5)).await;
    let reward = authenticate(h.auth, &h.identity("fred"), 1, [0; 8]).await;
    assert!(
        h.service.engine.corpus().contains(&reward.fortune),
        "{:?}",
        reward.fortune
    );
    assert!(reward.uac.is_none());
    let records = h.records("auth1");
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].user_id, "fred");
    assert_eq!(records[0].parts(), Some((1, 1)));
}

#[tokio::test]
async fn level_two_check_byte_recovery() {
    let h = start(Duration::from_secs(5)).await;
    let reward = authenticate(
        h.auth,
        &h.identity("alice"),
        2,
        *b"\x01\x23\x45\x67\x89\xab\xcd\xef",
    )
    .await;
    assert!(reward.check_byte.is_some());
    assert!(h.service.engine.corpus().contains(&reward.fortune));
    assert_eq!(h.records("auth2").len(), 1);
}

#[tokio::test]
async fn level_three_reveals_fortune_and_uac() {
    let h = start(Duration::from_secs(5)).await;
    let identity = h.identity("bob");
    let reward = authenticate(h.auth, &identity, 3, [9, 8, 7, 6, 5, 4, 3, 2]).await;
    assert!(h.service.engine.corpus().contains(&reward.fortune));
    let uac = reward.uac.unwrap();
    assert_eq!(uac.len(), 64);
    assert!(uac.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(uac, identity.uac_hex());
    assert_eq!(h.records("auth3")[0].parts(), Some((1, 1)));
}

#[tokio::test]
async fn wrong_response_transcript() {
    let h = start(Duration::from_secs(5)).await;
    let mut c = AuthClient::connect(h.auth).await;
    c.expect("UserID: ").await;
    c.send_line("fred").await;
    c.expect("Request #: ").await;
    c.send_line("1").await;
    let text = c.expect("Response: ").await;
    let challenge = text
        .strip_prefix("Challenge: ")
        .unwrap()
        .strip_suffix("\nResponse: ")
        .unwrap();
    assert_eq!(challenge.len(), 16);
    c.send_line("abc").await;
    c.read_to_end().await;
    assert_eq!(
        c.transcript,
        format!("UserID: Request #: Challenge: {challenge}\nResponse: \nAuthentication failed.  No fortune for you!\n")
    );
    let records = h.records("auth1");
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].parts(), Some((0, 1)));
}

#[tokio::test]
async fn unknown_user_fails_like_a_wrong_response() {
    let h = start(Duration::from_secs(5)).await;
    let mut c = AuthClient::connect(h.auth).await;
    c.expect("UserID: ").await;
    c.send_line("mallory").await;
    c.expect("Request #: ").await;
    c.send_line("1").await;
    c.expect("Response: ").await;
    c.send_line("0000000000000000").await;
    assert_eq!(c.read_to_end().await, FAILED);
    assert_eq!(h.records("auth1")[0].user_id, "mallory");
}

#[tokio::test]
async fn wrong_check_byte_fails() {
    let h = start(Duration::from_secs(5)).await;
    let identity = h.identity("carol");
    let mut c = AuthClient::connect(h.auth).await;
    c.expect("UserID: ").await;
    c.send_line("carol").await;
    c.expect("Request #: ").await;
    c.send_line("2").await;
    let text = c.expect("Response: ").await;
    let c1 = u64::from_str_radix(&text[11..27], 16).unwrap();
    let r = pex_core::cryptokit::block_encrypt(&identity.password_key, c1);
    c.send_line(&format!("{r:016x}")).await;
    c.expect("Your challenge for me: ").await;
    c.send_line("0000000000000000").await;
    c.expect("Check byte: ").await;
    // The server never leaves the chosen byte at its old value, zero.
    c.send_line("00").await;
    assert_eq!(c.read_to_end().await, FAILED);
    assert_eq!(h.records("auth2")[0].parts(), Some((0, 1)));
}

#[tokio::test]
async fn stalled_client_is_dropped_after_deadline() {
    let deadline = Duration::from_secs(2);
    let h = start(deadline).await;
    let mut c = AuthClient::connect(h.auth).await;
    c.expect("UserID: ").await;
    let started = Instant::now();
    let rest = c.read_to_end().await;
    let waited = started.elapsed();
    assert!(rest.is_empty());
    assert!(
        waited >= deadline - Duration::from_millis(100),
        "{waited:?}"
    );
    assert!(waited <= deadline + Duration::from_secs(2), "{waited:?}");
    tokio::time::sleep(Duration::from_millis(100)).await;
    let records = h.records("auth");
    assert_eq!(records.len(), 1);
    assert!(records[0].message.starts_with("TIMEOUT"));
    assert_eq!(records[0].parts(), None);
}

#[tokio::test]
async fn challenges_are_fresh() {
    let h = start(Duration::from_secs(5)).await;
    let mut seen = BTreeSet::new();
    for _ in 0..50 {
        let mut c = AuthClient::connect(h.auth).await;
        c.expect("UserID: ").await;
        c.send_line("fred").await;
        c.expect("Request #: ").await;
        c.send_line("1").await;
        let text = c.expect("Response: ").await;
        seen.insert(text);
    }
    assert_eq!(seen.len(), 50);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_sessions_leave_nothing_behind() {
    let h = start(Duration::from_secs(5)).await;
    let mut tasks = Vec::new();
    for i in 0..100 {
        let identity = h.identity(common::USERS[i % common::USERS.len()]);
        let addr = h.auth;
        tasks.push(tokio::spawn(async move {
            authenticate(addr, &identity, (i % 3 + 1) as u8, [i as u8; 8]).await
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    let settle = Instant::now();
    while h.service.active_sessions() > 0 && settle.elapsed() < Duration::from_secs(2) {
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    assert_eq!(h.service.active_sessions(), 0);
    let total: usize = (1..=3).map(|l| h.records(&format!("auth{l}")).len()).sum();
    assert_eq!(total, 100);
}
