use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::feedback::answer_line;
use super::values::parse_uint;
use super::{part, ExerciseError, GenInput, Outcome, Submission};
use crate::cryptokit::{gen_prime, mod_inv, BitSource};
use crate::seedgen::Lcg48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    pub a: u64,
    pub c: u64,
    pub m: u64,
    pub x0: u64,
    pub x1: u64,
}

pub fn build(input: &GenInput) -> Params {
    let mut rng = Lcg48::new(input.seed.0);
    let m = gen_prime(16, &BigUint::from(1u32), &mut rng)
        .to_u64()
        .expect("16-bit prime");
    let a = 2 + rng.below(m - 2);
    let c = rng.below(m);
    let x0 = rng.below(m);
    Params {
        a,
        c,
        m,
        x0,
        x1: (a * x0 + c) % m,
    }
}

pub fn publish(p: &Params) -> (BTreeMap<String, String>, String) {
    let params = [("a", p.a), ("c", p.c), ("m", p.m), ("x1", p.x1)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let statement = format!(
        "A linear congruential generator produced x1 from a secret seed x0:\n\n    \
         x1 = (a * x0 + c) mod m\n    \
         {} = ({} * x0 + {}) mod {}\n\n\
         Find x0, with 0 <= x0 < m.",
        p.x1, p.a, p.c, p.m
    );
    (params, statement)
}

pub fn check(p: &Params, sub: &Submission) -> Outcome {
    let correct = parse_uint(sub.field("x0"))
        .and_then(|x| x.to_u64())
        .is_some_and(|x0| {
            x0 < p.m && (p.a as u128 * x0 as u128 + p.c as u128) % p.m as u128 == p.x1 as u128
        });
    let line = answer_line("x0", correct);
    Outcome {
        parts: vec![part("x0", correct, line.clone())],
        body: line,
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
    let (a, c, m, x1) = (get("a")?, get("c")?, get("m")?, get("x1")?);
    let inv = mod_inv(&a, &m).map_err(|e| ExerciseError::Solver(e.to_string()))?;
    let x0 = ((x1 + &m - c % &m) * inv) % &m;
    Ok(BTreeMap::from([("x0".to_string(), x0.to_string())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exercises::test_support::engine;

    fn sub(x0: &str) -> Submission {
        let engine = engine();
        let inst = engine.generate("seed", "fred", None).unwrap();
        Submission::for_instance(&inst).with_field("x0", x0)
    }

    #[test]
    fn identity_congruence() {
        let p = Params {
            a: 1,
            c: 0,
            m: 65521,
            x0: 77,
            x1: 77,
        };
        assert!(check(&p, &sub("77")).parts[0].correct);
        assert!(!check(&p, &sub("78")).parts[0].correct);
        assert!(!check(&p, &sub("65598")).parts[0].correct, "x0 >= m");
    }

    #[test]
    fn published_values_admit_hidden_seed() {
        let engine = engine();
        for user in ["fred", "alice", "z9", "bob"] {
            let inst = engine.generate("seed", user, None).unwrap();
            let v = |k: &str| inst.params[k].parse::<u64>().unwrap();
            let m = v("m");
            assert!((1 << 15..1 << 16).contains(&m));
            assert!(crate::cryptokit::is_probable_prime(&BigUint::from(m)));
            let x0: u64 = engine.solve(&inst).unwrap().fields["x0"].parse().unwrap();
            assert_eq!((v("a") * x0 + v("c")) % m, v("x1"));
        }
    }

    #[test]
    fn page_shows_concrete_congruence() {
        let engine = engine();
        let inst = engine.generate("seed", "fred", None).unwrap();
        let eq = format!(
            "{} = ({} * x0 + {}) mod {}",
            inst.params["x1"], inst.params["a"], inst.params["c"], inst.params["m"]
        );
        assert!(inst.display_text.contains(&eq), "{}", inst.display_text);
    }
}
