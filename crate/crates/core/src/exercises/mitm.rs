use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::feedback::*;
use super::values::{parse_hex_bytes, parse_uint};
use super::{part, ExerciseEngine, ExerciseError, ExerciseInstance, GenInput, Outcome, Submission};
use crate::cryptokit::{
    cbc_decrypt, cbc_encrypt, gen_safe_prime, kdf, mod_pow, BitSource, BlockKey,
};
use crate::seedgen::Lcg48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub ya: BigUint,
    pub yb: BigUint,
    pub message: String,
}

pub fn build(input: &GenInput) -> Params {
    let mut rng = Lcg48::new(input.seed.0);
    let (p, q) = gen_safe_prime(input.options.mitm_prime_bits, &mut rng);
    let two = BigUint::from(2u32);
    // Squares lie in the order-q subgroup; anything but 1 generates it.
    let g = loop {
        let h = &two + rng.random_below(&(&p - 3u32));
        let g = mod_pow(&h, &two, &p).expect("p > 1");
        if !g.is_one() {
            break g;
        }
    };
    let xa = &two + rng.random_below(&(&q - 2u32));
    let xb = &two + rng.random_below(&(&q - 2u32));
    let ya = mod_pow(&g, &xa, &p).expect("p > 1");
    let yb = mod_pow(&g, &xb, &p).expect("p > 1");
    let (_, message) = input.corpus.pick(rng.state());
    Params {
        p,
        q,
        g,
        ya,
        yb,
        message: message.to_string(),
    }
}

pub fn publish(p: &Params) -> (BTreeMap<String, String>, String) {
    let statement = format!(
        "Alice and Bob agree on a key with Diffie-Hellman over the prime p = {} and\n\
         generator g = {}. Alice sends YA = g^XA mod p and Bob sends YB = g^XB mod p.\n\n\
         You are Darth, in the middle. Choose XTa for your exchange with Alice and\n\
         XTb for your exchange with Bob: Alice will use Ka = YA^XTb mod p, Bob will\n\
         use Kb = YB^XTa mod p.\n\n\
         Part 1: submit XTa and XTb and intercept Alice's message CA, CBC-encrypted\n\
         with XTEA under kdf(\"mitm\", Ka).\n\
         Part 2: decrypt CA and submit the plaintext M (hex) and Cb, the same\n\
         message encrypted under kdf(\"mitm\", Kb) (hex).",
        p.p, p.g
    );
    let params = BTreeMap::from([
        ("p".to_string(), p.p.to_string()),
        ("g".to_string(), p.g.to_string()),
        ("YA".to_string(), p.ya.to_string()),
        ("YB".to_string(), p.yb.to_string()),
    ]);
    (params, statement)
}

/// Session key from a shared secret, encoded at the width of p.
pub fn session_key(k: &BigUint, p: &BigUint) -> BlockKey {
    let width = p.bits().div_ceil(8) as usize;
    let raw = k.to_bytes_be();
    let mut bytes = vec![0u8; width.saturating_sub(raw.len())];
    bytes.extend_from_slice(&raw);
    kdf("mitm", &[&bytes])
}

fn is_trivial(k: &BigUint, p: &BigUint) -> bool {
    k.is_zero() || k.is_one() || *k == p - 1u32
}

pub fn check(params: &Params, sub: &Submission) -> Outcome {
    let p = &params.p;
    let xt = |name: &str| parse_uint(sub.field(name)).unwrap_or_default();
    let (xta, xtb) = (xt("XTa"), xt("XTb"));
    let ka = mod_pow(&params.ya, &xtb, p).expect("p > 1");
    let kb = mod_pow(&params.yb, &xta, p).expect("p > 1");
    let trivial = is_trivial(&ka, p) || is_trivial(&kb, p);

    let message = params.message.as_bytes();
    let ca = (!trivial).then(|| hex::encode(cbc_encrypt(&session_key(&ka, p), message)));
    let part1_only = sub.field("M").is_empty() && sub.field("Cb").is_empty();
    let m_ok = !trivial && parse_hex_bytes(sub.field("M")).as_deref() == Some(message);
    let cb_ok = !trivial
        && parse_hex_bytes(sub.field("Cb")) == Some(cbc_encrypt(&session_key(&kb, p), message));

    let status = |name: &str, ok: bool| {
        format!(
            "your value for {name} is {}",
            if ok { "correct" } else { "wrong" }
        )
    };
    let parts = vec![
        part("M", m_ok, capitalize(&status("M", m_ok)) + "."),
        part("Cb", cb_ok, capitalize(&status("Cb", cb_ok)) + "."),
    ];

    let body = if m_ok && cb_ok {
        format!("Your value for M is correct and your value for Cb is correct.\n\n{MITM_DONE}")
    } else if part1_only && !trivial {
        format!(
            "{MITM_PART1_OK}\n\nAlice's message for Bob, encrypted under Ka:\n\nCA = {}\n\n{MITM_PART1_NEXT}",
            ca.as_deref().unwrap_or_default()
        )
    } else {
        let mut text = if part1_only {
            "Your values for XTa and XTb do not put you in the middle.".to_string()
        } else {
            let mut failing = Vec::new();
            if !m_ok {
                failing.push(status("M", false));
            }
            if !cb_ok {
                failing.push(status("Cb", false));
            }
            capitalize(&failing.join(" and ")) + "."
        };
        text.push_str(&format!(" (checking... Ka={ka} Kb={kb})"));
        if ka == kb {
            text.push(' ');
            text.push_str(MITM_EQUAL);
        }
        if trivial {
            text.push(' ');
            text.push_str(MITM_TRIVIAL);
        }
        text.push_str(&format!(
            " XTa {} XTb {}",
            shown(sub.field("XTa")),
            shown(sub.field("XTb"))
        ));
        format!("{}\n\n{MITM_RETRY}", wrap_paragraph(&text, WRAP_COLUMNS))
    };
    Outcome {
        parts,
        body,
        reward: ca,
    }
}

fn shown(raw: &str) -> &str {
    if raw.is_empty() {
        "0"
    } else {
        raw
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Plays Darth honestly: picks exponents, runs part 1 against the engine to
/// intercept CA, then decrypts and re-encrypts.
pub fn solve(
    engine: &ExerciseEngine,
    instance: &ExerciseInstance,
) -> Result<BTreeMap<String, String>, ExerciseError> {
    let get = |k: &str| {
        instance
            .params
            .get(k)
            .and_then(|v| parse_uint(v))
            .ok_or_else(|| ExerciseError::Solver(format!("missing {k}")))
    };
    let (p, ya, yb) = (get("p")?, get("YA")?, get("YB")?);
    let q = (&p - 1u32) >> 1;
    let mut rng = Lcg48::new(u64::from_be_bytes(
        instance.integrity_tag[..8]
            .try_into()
            .map_err(|_| ExerciseError::Solver("short tag".into()))?,
    ));
    let (xta, xtb, ka, kb) = loop {
        let xta = BigUint::from(2u32) + rng.random_below(&(&q - 2u32));
        let xtb = BigUint::from(2u32) + rng.random_below(&(&q - 2u32));
        let ka = mod_pow(&ya, &xtb, &p).map_err(|e| ExerciseError::Solver(e.to_string()))?;
        let kb = mod_pow(&yb, &xta, &p).map_err(|e| ExerciseError::Solver(e.to_string()))?;
        if !is_trivial(&ka, &p) && !is_trivial(&kb, &p) {
            break (xta, xtb, ka, kb);
        }
    };
    let part1 = Submission::for_instance(instance)
        .with_field("XTa", xta.to_string())
        .with_field("XTb", xtb.to_string());
    let ca = engine
        .check(&part1)?
        .reward
        .ok_or_else(|| ExerciseError::Solver("no CA in part 1 reply".into()))?;
    let ca = hex::decode(ca).map_err(|e| ExerciseError::Solver(e.to_string()))?;
    let m = cbc_decrypt(&session_key(&ka, &p), &ca)
        .map_err(|e| ExerciseError::Solver(e.to_string()))?;
    let cb = cbc_encrypt(&session_key(&kb, &p), &m);
    Ok(BTreeMap::from([
        ("XTa".to_string(), xta.to_string()),
        ("XTb".to_string(), xtb.to_string()),
        ("M".to_string(), hex::encode(&m)),
        ("Cb".to_string(), hex::encode(cb)),
    ]))
}
