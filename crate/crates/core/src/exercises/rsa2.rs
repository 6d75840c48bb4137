use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use super::feedback::*;
use super::values::parse_uint;
use super::{part, ExerciseError, GenInput, Outcome, PartResult, Submission};
use crate::cryptokit::{
    bit_length, gcd, gen_prime, hash_to_modulus, is_probable_prime, lcm, mod_inv, mod_pow,
    BitSource,
};
use crate::fortunes::FortuneCorpus;
use crate::gradebook::summary_line;
use crate::seedgen::{validate_user_id, Lcg48, SeedError};

pub const PRIME_BITS: u64 = 128;
pub const MIN_DA_BITS: u64 = 240;

/// The user id read as a base-36 number, plus one if even.
pub fn derive_e(user_id: &str) -> Result<BigUint, SeedError> {
    validate_user_id(user_id)?;
    let mut e = BigUint::zero();
    for ch in user_id.chars() {
        e = e * 36u32 + ch.to_digit(36).expect("validated");
    }
    if e.is_even() {
        e += 1u32;
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub e: BigUint,
    pub message: String,
}

pub fn build(input: &GenInput) -> Result<Params, ExerciseError> {
    let rng = Lcg48::new(input.seed.0);
    let (_, message) = input.corpus.pick(rng.state());
    Ok(Params {
        e: derive_e(input.user_id)?,
        message: message.to_string(),
    })
}

pub fn publish(p: &Params) -> (BTreeMap<String, String>, String) {
    let statement = format!(
        "Design a two-user split RSA key and sign the message m with it.\n\n\
         Your public exponent e is your UserID treated as a base-36 number, plus 1\n\
         if it is even: e = {}.\n\n\
         Choose 128-bit primes p != q with gcd(e, p-1) = gcd(e, q-1) = 1, and split\n\
         the private exponent between Alice and Bob: d_A of at least 240 bits,\n\
         coprime to p-1 and q-1, and d_B != 1 with e * d_A * d_B = 1 mod\n\
         lcm(p-1, q-1). Then compute h = SHA-256(m) mod p*q and the signature\n\
         s = (h^d_A)^d_B mod p*q.",
        p.e
    );
    let params = BTreeMap::from([
        ("e".to_string(), p.e.to_string()),
        ("m".to_string(), p.message.clone()),
    ]);
    (params, statement)
}

fn normalize_message(text: &str) -> String {
    text.replace("\r\n", "\n").trim().to_string()
}

fn minus_one(x: &Option<BigUint>) -> Option<BigUint> {
    x.as_ref().filter(|v| !v.is_zero()).map(|v| v - 1u32)
}

/// Walks `checks` in order, emitting each line until the first failing one.
fn group(name: &str, checks: &[(bool, &str, &str)], lines: &mut Vec<String>) -> PartResult {
    for &(ok, good, bad) in checks {
        if !ok {
            lines.push(bad.to_string());
            return part(name, false, bad);
        }
        lines.push(good.to_string());
    }
    let last = checks.last().map_or("", |c| c.1);
    part(name, true, last)
}

pub fn check(params: &Params, corpus: &FortuneCorpus, sub: &Submission) -> Outcome {
    let num = |k: &str| parse_uint(sub.field(k));
    let e = &params.e;
    let one = BigUint::one();
    let (p, q, d_a, d_b, h, s) = (
        num("p"),
        num("q"),
        num("d_A"),
        num("d_B"),
        num("h"),
        num("s"),
    );
    let (p1, q1) = (minus_one(&p), minus_one(&q));
    let coprime = |a: &BigUint, b: &Option<BigUint>| b.as_ref().is_some_and(|b| gcd(a, b).is_one());
    let prime_bits = |x: &Option<BigUint>| x.as_ref().is_some_and(|x| bit_length(x) == PRIME_BITS);
    let prime = |x: &Option<BigUint>| x.as_ref().is_some_and(is_probable_prime);

    let mut lines = Vec::new();
    let mut parts = Vec::new();

    parts.push(group(
        "e",
        &[(num("e").as_ref() == Some(e), RSA2_E_OK, RSA2_E_BAD)],
        &mut lines,
    ));
    parts.push(group(
        "p",
        &[
            (prime_bits(&p), RSA2_P_BITS, RSA2_P_NOT_BITS),
            (prime(&p), RSA2_P_PRIME, RSA2_P_NOT_PRIME),
            (coprime(e, &p1), RSA2_P_OK, RSA2_P_NOT_COPRIME),
        ],
        &mut lines,
    ));
    parts.push(group(
        "q",
        &[
            (q.is_some() && q != p, RSA2_Q_DISTINCT, RSA2_Q_SAME),
            (prime_bits(&q), RSA2_Q_BITS, RSA2_Q_NOT_BITS),
            (prime(&q), RSA2_Q_PRIME, RSA2_Q_NOT_PRIME),
            (coprime(e, &q1), RSA2_Q_OK, RSA2_Q_NOT_COPRIME),
        ],
        &mut lines,
    ));
    let da_ok = |m: &Option<BigUint>| d_a.as_ref().is_some_and(|d| coprime(d, m));
    parts.push(group(
        "d_A",
        &[
            (
                d_a.as_ref().is_some_and(|d| bit_length(d) >= MIN_DA_BITS),
                RSA2_DA_BITS,
                RSA2_DA_SHORT,
            ),
            (da_ok(&p1), RSA2_DA_P, RSA2_DA_NOT_P),
            (da_ok(&q1), RSA2_DA_OK, RSA2_DA_NOT_Q),
        ],
        &mut lines,
    ));
    let inverse_ok = match (&p1, &q1, &d_a, &d_b) {
        (Some(p1), Some(q1), Some(da), Some(db)) => {
            let lambda = lcm(p1, q1);
            lambda > one && (e * da * db) % &lambda == one
        }
        _ => false,
    };
    parts.push(group(
        "d_B",
        &[
            (
                d_b.as_ref().is_some_and(|d| !d.is_one()),
                RSA2_DB_NOT_ONE,
                RSA2_DB_ONE,
            ),
            (inverse_ok, RSA2_DB_OK, RSA2_DB_BAD),
        ],
        &mut lines,
    ));
    let n = match (&p, &q) {
        (Some(p), Some(q)) => Some(p * q).filter(|n| n > &one),
        _ => None,
    };
    let m = normalize_message(sub.fields.get("m").map_or("", String::as_str));
    let m_ok = corpus.contains(&m);
    let h_ok = m_ok
        && n.as_ref()
            .zip(h.as_ref())
            .is_some_and(|(n, h)| &hash_to_modulus(m.as_bytes(), n) == h);
    let s_ok = h_ok
        && match (&n, &h, &s) {
            (Some(n), Some(h), Some(s)) => s < n && mod_pow(s, e, n).is_ok_and(|v| &v == h),
            _ => false,
        };
    let h_bad = if m_ok { RSA2_H_BAD } else { RSA2_M_BAD };
    parts.push(group(
        "s",
        &[(h_ok, RSA2_H_OK, h_bad), (s_ok, RSA2_S_OK, RSA2_S_BAD)],
        &mut lines,
    ));

    let k = parts.iter().filter(|p| p.correct).count();
    let mut body = lines.join("\n");
    body.push_str("\n\n");
    body.push_str(&summary_line(k, parts.len()));
    if k == parts.len() {
        body.push_str(RSA2_MASTER);
    }
    Outcome {
        parts,
        body,
        reward: None,
    }
}

/// A fresh key for the published e, then an honest split signature on m.
pub fn solve(params: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, ExerciseError> {
    let e = params
        .get("e")
        .and_then(|v| parse_uint(v))
        .ok_or_else(|| ExerciseError::Solver("missing e".into()))?;
    let m = params
        .get("m")
        .ok_or_else(|| ExerciseError::Solver("missing m".into()))?;
    let digest = Sha256::new()
        .chain_update(m.as_bytes())
        .chain_update(e.to_bytes_be())
        .finalize();
    let mut rng = Lcg48::new(u64::from_be_bytes(digest[..8].try_into().expect("8 bytes")));
    let key = SplitKey::generate(&e, &mut rng);
    let (h, s) = key.sign(m.as_bytes());
    Ok(BTreeMap::from([
        ("e".to_string(), e.to_string()),
        ("p".to_string(), key.p.to_string()),
        ("q".to_string(), key.q.to_string()),
        ("d_A".to_string(), key.d_a.to_string()),
        ("d_B".to_string(), key.d_b.to_string()),
        ("m".to_string(), m.clone()),
        ("h".to_string(), h.to_string()),
        ("s".to_string(), s.to_string()),
    ]))
}

#[derive(Debug, Clone)]
pub struct SplitKey {
    pub p: BigUint,
    pub q: BigUint,
    pub d_a: BigUint,
    pub d_b: BigUint,
}

impl SplitKey {
    pub fn generate(e: &BigUint, rng: &mut impl BitSource) -> Self {
        let p = gen_prime(PRIME_BITS, e, rng);
        let q = loop {
            let q = gen_prime(PRIME_BITS, e, rng);
            if q != p {
                break q;
            }
        };
        let lambda = lcm(&(&p - 1u32), &(&q - 1u32));
        loop {
            let top = BigUint::one() << (MIN_DA_BITS + 9);
            let d_a = rng.random_bits(MIN_DA_BITS + 9) | top | BigUint::one();
            if !gcd(&d_a, &lambda).is_one() {
                continue;
            }
            let Ok(d_b) = mod_inv(&((e * &d_a) % &lambda), &lambda) else {
                continue;
            };
            if !d_b.is_one() {
                return SplitKey { p, q, d_a, d_b };
            }
        }
    }

    pub fn n(&self) -> BigUint {
        &self.p * &self.q
    }

    /// `(h, (h^d_A)^d_B)` modulo n.
    pub fn sign(&self, message: &[u8]) -> (BigUint, BigUint) {
        let n = self.n();
        let h = hash_to_modulus(message, &n);
        let s_a = mod_pow(&h, &self.d_a, &n).expect("n > 1");
        let s = mod_pow(&s_a, &self.d_b, &n).expect("n > 1");
        (h, s)
    }
}
