use std::collections::BTreeMap;

use super::feedback::answer_line;
use super::values::{format_bits, parse_bits8};
use super::{part, ExerciseError, GenInput, Outcome, Submission};
use crate::cryptokit::{sdes_encrypt_trace, BitSource, SdesKey, SdesTrace};
use crate::gradebook::summary_line;
use crate::seedgen::Lcg48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    pub key: SdesKey,
    pub plaintext: u8,
}

pub fn build(input: &GenInput) -> Params {
    let mut rng = Lcg48::new(input.seed.0);
    let key = SdesKey::new(rng.below(1024) as u16).expect("10-bit key");
    Params {
        key,
        plaintext: rng.below(256) as u8,
    }
}

pub fn publish(p: &Params) -> (BTreeMap<String, String>, String) {
    let k = format_bits(p.key.bits() as u32, 10);
    let pt = format_bits(p.plaintext as u32, 8);
    let statement = format!(
        "Encrypt the plaintext p = {pt} under the key K = {k} with simplified DES.\n\
         Show the subkeys K1 and K2, then each stage: IP, fK1, SW, fK2, and the\n\
         ciphertext c. Give every answer as an 8-bit binary string."
    );
    let params = BTreeMap::from([("K".to_string(), k), ("p".to_string(), pt)]);
    (params, statement)
}

pub fn check(p: &Params, sub: &Submission) -> Outcome {
    let trace = sdes_encrypt_trace(p.key, p.plaintext);
    let parts: Vec<_> = SdesTrace::PART_NAMES
        .iter()
        .map(|&name| {
            let correct = parse_bits8(sub.field(name)) == trace.get(name);
            part(name, correct, answer_line(name, correct))
        })
        .collect();
    let k = parts.iter().filter(|p| p.correct).count();
    let mut body: String = parts.iter().map(|p| format!("{}\n", p.message)).collect();
    body.push('\n');
    body.push_str(&summary_line(k, parts.len()));
    Outcome {
        parts,
        body,
        reward: None,
    }
}

pub fn solve(params: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, ExerciseError> {
    let bits = |k: &str| {
        params
            .get(k)
            .and_then(|v| u16::from_str_radix(v, 2).ok())
            .ok_or_else(|| ExerciseError::Solver(format!("missing {k}")))
    };
    let key = SdesKey::new(bits("K")?).map_err(|e| ExerciseError::Solver(e.to_string()))?;
    let trace = sdes_encrypt_trace(key, bits("p")? as u8);
    Ok(SdesTrace::PART_NAMES
        .iter()
        .map(|&name| {
            (
                name.to_string(),
                format_bits(trace.get(name).unwrap() as u32, 8),
            )
        })
        .collect())
}
