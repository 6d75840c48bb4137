use std::collections::BTreeMap;

use super::feedback::{RNG_CORRECT, RNG_GIVE_UP, RNG_HARDER, RNG_TRY_THIS, RNG_WIN, RNG_WRONG};
use super::values::parse_i64;
use super::{nonce_time_ms, part, ExerciseError, GenInput, Outcome, Submission};
use crate::cryptokit::BitSource;
use crate::seedgen::{invert_long_output, next_long64, time_window_candidates, Lcg48};

/// Outputs shown before the one the student must predict.
pub const SHOWN_OUTPUTS: usize = 5;
/// Search half-width the reference solver uses around the shown time.
pub const SOLVER_WINDOW_MS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeParams {
    pub time_ms: u64,
    pub seed: u64,
    pub outputs: [i32; SHOWN_OUTPUTS + 1],
}

pub fn build_time(input: &GenInput) -> TimeParams {
    let time_ms = nonce_time_ms(input.nonce).expect("dynamic nonce");
    let window = input.options.time_offset_window_ms;
    let offset = Lcg48::new(input.seed.0).below(2 * window + 1) as i64 - window as i64;
    let seed = time_ms.saturating_add_signed(offset);
    let mut gen = Lcg48::new(seed);
    let mut outputs = [0; SHOWN_OUTPUTS + 1];
    for out in outputs.iter_mut() {
        *out = gen.next_i32();
    }
    TimeParams {
        time_ms,
        seed,
        outputs,
    }
}

pub fn publish_time(p: &TimeParams) -> (BTreeMap<String, String>, String) {
    let mut params = BTreeMap::from([("t".to_string(), p.time_ms.to_string())]);
    for (i, v) in p.outputs[..SHOWN_OUTPUTS].iter().enumerate() {
        params.insert(format!("x{}", i + 1), v.to_string());
    }
    let shown: Vec<String> = p.outputs[..SHOWN_OUTPUTS]
        .iter()
        .map(|v| format!("    {v}"))
        .collect();
    let statement = format!(
        "These values came from successive calls to nextInt() on an instance of\n\
         java.util.Random initialized with a value close to the time of day in\n\
         milliseconds when you loaded this page (t = {}):\n\n{}\n\n\
         What is the next value?",
        p.time_ms,
        shown.join("\n")
    );
    (params, statement)
}

pub fn check_time(p: &TimeParams, sub: &Submission, challenge_link: Option<String>) -> Outcome {
    let correct = parse_i64(sub.field("next")) == Some(p.outputs[SHOWN_OUTPUTS] as i64);
    if !correct {
        return Outcome {
            parts: vec![part("next", false, RNG_WRONG)],
            body: RNG_WRONG.to_string(),
            reward: None,
        };
    }
    let body = match &challenge_link {
        Some(link) => format!("{RNG_WIN}\n\n{RNG_HARDER}\n\n{RNG_TRY_THIS}<{link}>"),
        None => RNG_WIN.to_string(),
    };
    Outcome {
        parts: vec![part("next", true, RNG_WIN)],
        body,
        reward: challenge_link,
    }
}

/// Scans the seeds around the shown time for one that reproduces every shown output.
pub fn solve_time(
    params: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>, ExerciseError> {
    let missing = |k: &str| ExerciseError::Solver(format!("missing {k}"));
    let t: u64 = params
        .get("t")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| missing("t"))?;
    let shown = (1..=SHOWN_OUTPUTS)
        .map(|i| {
            let key = format!("x{i}");
            params
                .get(&key)
                .and_then(|v| v.parse::<i32>().ok())
                .ok_or_else(|| missing(&key))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let candidates = time_window_candidates(t, SOLVER_WINDOW_MS)
        .map_err(|e| ExerciseError::Solver(e.to_string()))?;
    for seed in candidates {
        let mut gen = Lcg48::new(seed.0);
        if shown.iter().all(|&x| gen.next_i32() == x) {
            return Ok(BTreeMap::from([(
                "next".to_string(),
                gen.next_i32().to_string(),
            )]));
        }
    }
    Err(ExerciseError::Solver("no seed in window".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChallengeParams {
    pub first: i64,
    pub second: i64,
}

pub fn build_challenge(input: &GenInput) -> ChallengeParams {
    let mut gen = Lcg48::new(input.seed.0);
    ChallengeParams {
        first: gen.next_i64(),
        second: gen.next_i64(),
    }
}

pub fn publish_challenge(p: &ChallengeParams) -> (BTreeMap<String, String>, String) {
    let statement = format!(
        "Here is one value from nextLong(), using an instance of java.util.Random\n\
         initialized in a secret way, not related to the time of day:\n\n    {}\n\n\
         What is the next value from nextLong()?",
        p.first
    );
    (
        BTreeMap::from([("y".to_string(), p.first.to_string())]),
        statement,
    )
}

pub fn check_challenge(p: &ChallengeParams, sub: &Submission) -> Outcome {
    let correct = parse_i64(sub.field("next")) == Some(p.second);
    let (line, body) = if correct {
        (RNG_CORRECT, format!("{RNG_CORRECT}\n\n{RNG_GIVE_UP}"))
    } else {
        (RNG_WRONG, RNG_WRONG.to_string())
    };
    Outcome {
        parts: vec![part("next", correct, line)],
        body,
        reward: None,
    }
}

/// Recovers the generator state from the single published output.
pub fn solve_challenge(
    params: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>, ExerciseError> {
    let y: i64 = params
        .get("y")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| ExerciseError::Solver("missing y".into()))?;
    let state = invert_long_output(y)
        .into_iter()
        .next()
        .ok_or_else(|| ExerciseError::Solver("no state produces y".into()))?;
    let (after, first) = next_long64(state);
    debug_assert_eq!(first, y);
    let (_, next) = next_long64(after);
    Ok(BTreeMap::from([("next".to_string(), next.to_string())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exercises::test_support::{engine, nonce};
    use crate::exercises::{make_nonce, EngineOptions};

    #[test]
    fn success_transcripts() {
        let engine = engine();
        let inst = engine.generate("rng", "fred", Some(&nonce(1))).unwrap();
        let v = engine.check(&engine.solve(&inst).unwrap()).unwrap();
        assert_eq!(
            v.feedback_text,
            "UserID: fred\n\n\
Your answer is correct. You win!

That was fun. Are you ready for a harder problem?

Try this: I'll give you just one value from nextLong(), using an instance
of Random initialized in a secret way, not related to the time of day.
And I bet you can't guess the next number...</ex/rng2?user=fred>
"
        );
        assert_eq!(v.reward.as_deref(), Some("/ex/rng2?user=fred"));

        let inst = engine.generate("rng2", "fred", Some(&nonce(1))).unwrap();
        let v = engine.check(&engine.solve(&inst).unwrap()).unwrap();
        assert_eq!(
            v.feedback_text,
            "UserID: fred\n\nYour answer is correct.\n\nI give up! You are the master of pseudo-random numbers!\n"
        );
    }

    #[test]
    fn seed_offset_stays_in_window() {
        let engine = engine();
        let w = EngineOptions::default().time_offset_window_ms;
        let mut offsets = std::collections::BTreeSet::new();
        for i in 0..200 {
            let n = nonce(i);
            let inst = engine.generate("rng", "alice", Some(&n)).unwrap();
            let t = nonce_time_ms(&n).unwrap();
            assert_eq!(inst.params["t"], t.to_string());
            let found = (t - w..=t + w).find(|&s| {
                let mut g = Lcg48::new(s);
                (1..=SHOWN_OUTPUTS)
                    .all(|k| g.next_i32().to_string() == inst.params[&format!("x{k}")])
            });
            offsets.insert(found.expect("seed within window") as i64 - t as i64);
        }
        assert!(offsets.len() > 100, "offsets should vary");
    }

    #[test]
    fn challenge_is_not_time_related() {
        let engine = engine();
        let a = engine
            .generate("rng2", "fred", Some(&make_nonce(5, [0; 4])))
            .unwrap();
        let b = engine
            .generate("rng2", "fred", Some(&make_nonce(5, [0, 0, 0, 1])))
            .unwrap();
        assert_ne!(a.params["y"], b.params["y"]);
    }

    #[test]
    fn challenge_solver_uses_published_value_only() {
        // A bare generator with a known seed, unrelated to the engine.
        for seed in [0u64, 42, 12345, 0xdead_beef_cafe] {
            let mut g = Lcg48::new(seed);
            let y = g.next_i64();
            let expected = g.next_i64();
            let params = BTreeMap::from([("y".to_string(), y.to_string())]);
            assert_eq!(
                solve_challenge(&params).unwrap()["next"],
                expected.to_string()
            );
        }
    }
}
