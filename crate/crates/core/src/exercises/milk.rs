use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::feedback::{MILK_CANCELLED, MILK_INVALID, MILK_SHIPPED, MILK_VALID};
use super::values::parse_uint;
use super::{part, ExerciseError, GenInput, Outcome, Submission};
use crate::cryptokit::{gen_prime, lcm, mod_inv, mod_pow, BitSource};
use crate::seedgen::Lcg48;

pub const PUBLIC_EXPONENT: u32 = 65537;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub n: BigUint,
    pub e: BigUint,
    pub d: BigUint,
    pub cc: BigUint,
}

pub fn build(input: &GenInput) -> Params {
    let mut rng = Lcg48::new(input.seed.0);
    let e = BigUint::from(PUBLIC_EXPONENT);
    let p = gen_prime(32, &e, &mut rng);
    let q = loop {
        let q = gen_prime(32, &e, &mut rng);
        if q != p {
            break q;
        }
    };
    let one = BigUint::from(1u32);
    let lambda = lcm(&(&p - &one), &(&q - &one));
    let d = mod_inv(&e, &lambda).expect("e coprime to p-1 and q-1");
    // 16 decimal digits; n > 2^62 so cc < n always holds.
    let cc = BigUint::from(1_000_000_000_000_000u64 + rng.below(9_000_000_000_000_000));
    Params { n: p * q, e, d, cc }
}

pub fn publish(p: &Params) -> (BTreeMap<String, String>, String) {
    let params = [("n", &p.n), ("d", &p.d), ("cc", &p.cc)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let statement = format!(
        "Order milk online. Sign your credit-card number with your RSA private key:\n\n    \
         s = cc^d mod n\n\n\
         with n = {}, d = {}, cc = {}.\n\
         The store verifies s with the public exponent e = {PUBLIC_EXPONENT}.\n\n\
         How many kegs of milk would you like?",
        p.n, p.d, p.cc
    );
    (params, statement)
}

pub fn check(p: &Params, sub: &Submission) -> Outcome {
    let correct = parse_uint(sub.field("s"))
        .is_some_and(|s| s < p.n && mod_pow(&s, &p.e, &p.n).is_ok_and(|v| v == p.cc));
    let (first, second) = if correct {
        (MILK_VALID, MILK_SHIPPED)
    } else {
        (MILK_INVALID, MILK_CANCELLED)
    };
    Outcome {
        parts: vec![part("s", correct, first)],
        body: format!("{first}\n\n{second}"),
        reward: None,
    }
}

pub fn solve(params: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, ExerciseError> {
    let get = |k: &str| {
        params
            .get(k)
            .and_then(|v| parse_uint(v))
            .ok_or_else(|| ExerciseError::Solver(format!("missing {k}")))
    };
    let s = mod_pow(&get("cc")?, &get("d")?, &get("n")?)
        .map_err(|e| ExerciseError::Solver(e.to_string()))?;
    Ok(BTreeMap::from([
        ("s".to_string(), s.to_string()),
        ("kegs".to_string(), "3".to_string()),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exercises::test_support::engine;

    #[test]
    fn shape_of_parameters() {
        let engine = engine();
        let inst = engine.generate("milk", "fred", None).unwrap();
        let cc = &inst.params["cc"];
        assert_eq!(cc.len(), 16);
        assert!(parse_uint(cc).unwrap() < parse_uint(&inst.params["n"]).unwrap());
    }

    #[test]
    fn kegs_and_hex_signatures() {
        let engine = engine();
        let inst = engine.generate("milk", "fred", None).unwrap();
        let mut sub = engine.solve(&inst).unwrap();
        let s = parse_uint(&sub.fields["s"]).unwrap();
        sub.fields.insert("s".into(), format!("0x{s:x}"));
        sub.fields.insert("kegs".into(), "lots".into());
        assert!(engine.check(&sub).unwrap().is_fully_correct());
        sub.fields.remove("kegs");
        assert!(engine.check(&sub).unwrap().is_fully_correct());
    }

    #[test]
    fn signature_must_be_reduced() {
        let engine = engine();
        let inst = engine.generate("milk", "fred", None).unwrap();
        let mut sub = engine.solve(&inst).unwrap();
        let s = parse_uint(&sub.fields["s"]).unwrap() + parse_uint(&inst.params["n"]).unwrap();
        sub.fields.insert("s".into(), s.to_string());
        assert!(!engine.check(&sub).unwrap().is_fully_correct());
    }
}
