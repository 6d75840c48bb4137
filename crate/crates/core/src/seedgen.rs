//! Per-student randomness and the 48-bit linear congruential generator.
//!
//! Every exercise parameter is drawn from a stream seeded by [`derive_seed`],
//! which mixes a course master secret with the UserID so that instances are
//! reproducible for the instructor but unpredictable to other students.
//!
//! The generator itself is bit-compatible with `java.util.Random`: the
//! time-seeded and `nextLong()` exercises only make sense if students can
//! replay it with the standard library they already have.

use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// LCG multiplier (`0x5DEECE66D`).
pub const MULTIPLIER: u64 = 25_214_903_917;
/// LCG increment.
pub const INCREMENT: u64 = 11;
/// Mask for arithmetic mod 2^48.
pub const STATE_MASK: u64 = (1 << 48) - 1;
/// Inverse of [`MULTIPLIER`] modulo 2^48.
pub const MULTIPLIER_INVERSE: u64 = inverse_mod_2_48(MULTIPLIER);

/// Largest accepted half-width for [`time_window_candidates`].
pub const MAX_TIME_WINDOW_MS: u64 = 1_000_000;

const MIN_SECRET_LEN: usize = 16;
const MAX_USER_ID_LEN: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },
}

impl SeedError {
    fn field(field: &'static str, reason: impl Into<String>) -> Self {
        SeedError::Validation {
            field,
            reason: reason.into(),
        }
    }
}

/// 64-bit seed produced by [`derive_seed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

/// Hidden state of the 48-bit generator. Always `< 2^48`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lcg48State(u64);

impl Lcg48State {
    /// Builds a state from a raw value, keeping only the low 48 bits.
    pub fn from_raw(raw: u64) -> Self {
        Lcg48State(raw & STATE_MASK)
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

/// Course-wide secret material used for all derivations.
#[derive(Clone)]
pub struct DerivationContext {
    master_secret: Vec<u8>,
    course_id: String,
}

impl DerivationContext {
    pub fn new(
        master_secret: impl Into<Vec<u8>>,
        course_id: impl Into<String>,
    ) -> Result<Self, SeedError> {
        let master_secret = master_secret.into();
        if master_secret.len() < MIN_SECRET_LEN {
            return Err(SeedError::field(
                "master_secret",
                format!("must be at least {MIN_SECRET_LEN} bytes"),
            ));
        }
        Ok(DerivationContext {
            master_secret,
            course_id: course_id.into(),
        })
    }

    pub fn master_secret(&self) -> &[u8] {
        &self.master_secret
    }

    pub fn course_id(&self) -> &str {
        &self.course_id
    }
}

impl fmt::Debug for DerivationContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DerivationContext")
            .field("master_secret", &"<redacted>")
            .field("course_id", &self.course_id)
            .finish()
    }
}

/// Checks that a UserID matches `[a-z0-9]{1,12}`.
pub fn validate_user_id(user_id: &str) -> Result<(), SeedError> {
    if user_id.is_empty() || user_id.len() > MAX_USER_ID_LEN {
        return Err(SeedError::field(
            "user_id",
            format!("must be 1 to {MAX_USER_ID_LEN} characters"),
        ));
    }
    if let Some(bad) = user_id
        .chars()
        .find(|c| !(c.is_ascii_lowercase() || c.is_ascii_digit()))
    {
        return Err(SeedError::field(
            "user_id",
            format!("character {bad:?} is not in [a-z0-9]"),
        ));
    }
    Ok(())
}

/// Seed = first 8 bytes (big-endian) of
/// `SHA-256(master_secret ‖ course_id ‖ user_id ‖ exercise_id ‖ nonce)`.
pub fn derive_seed(
    ctx: &DerivationContext,
    user_id: &str,
    exercise_id: &str,
    nonce: Option<&[u8]>,
) -> Result<Seed, SeedError> {
    validate_user_id(user_id)?;
    if exercise_id.is_empty() {
        return Err(SeedError::field("exercise_id", "must not be empty"));
    }
    let digest = Sha256::new()
        .chain_update(&ctx.master_secret)
        .chain_update(ctx.course_id.as_bytes())
        .chain_update(user_id.as_bytes())
        .chain_update(exercise_id.as_bytes())
        .chain_update(nonce.unwrap_or_default())
        .finalize();
    let mut prefix = [0u8; 8];
    prefix.copy_from_slice(&digest[..8]);
    Ok(Seed(u64::from_be_bytes(prefix)))
}

/// Scrambles a seed the way `new Random(seed)` does.
pub fn lcg48_init(seed: u64) -> Lcg48State {
    Lcg48State((seed ^ MULTIPLIER) & STATE_MASK)
}

fn step(state: u64) -> u64 {
    state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT) & STATE_MASK
}

/// Advances the generator and returns the top `bits` bits of the new state.
pub fn lcg48_next(state: Lcg48State, bits: u32) -> Result<(Lcg48State, u32), SeedError> {
    if !(1..=32).contains(&bits) {
        return Err(SeedError::field(
            "bits",
            format!("{bits} is outside 1..=32"),
        ));
    }
    let next = step(state.0);
    Ok((Lcg48State(next), (next >> (48 - bits)) as u32))
}

fn next32(state: Lcg48State) -> (Lcg48State, u32) {
    let next = step(state.0);
    (Lcg48State(next), (next >> 16) as u32)
}

/// Equivalent of `Random.nextLong()`.
pub fn next_long64(state: Lcg48State) -> (Lcg48State, i64) {
    let (state, hi) = next32(state);
    let (state, lo) = next32(state);
    let value = ((hi as i32 as i64) << 32).wrapping_add(lo as i32 as i64);
    (state, value)
}

/// All pre-call states `s` with `next_long64(s).1 == y`.
///
/// The two 32-bit halves of `y` pin the top 32 bits of both intermediate
/// states, leaving 16 unknown low bits of the first one to enumerate.
pub fn invert_long_output(y: i64) -> Vec<Lcg48State> {
    let lo = y as u32;
    let hi = (y.wrapping_sub(lo as i32 as i64) >> 32) as u32;
    let base = (hi as u64) << 16;
    (0..1u64 << 16)
        .filter_map(|low| {
            let first = base | low;
            ((step(first) >> 16) as u32 == lo).then(|| {
                let prev = first
                    .wrapping_sub(INCREMENT)
                    .wrapping_mul(MULTIPLIER_INVERSE)
                    & STATE_MASK;
                Lcg48State(prev)
            })
        })
        .collect()
}

/// Seeds `[t_center - window, t_center + window]`, clamped at zero.
pub fn time_window_candidates(t_center_ms: u64, window_ms: u64) -> Result<Vec<Seed>, SeedError> {
    if window_ms > MAX_TIME_WINDOW_MS {
        return Err(SeedError::field(
            "window_ms",
            format!("{window_ms} exceeds {MAX_TIME_WINDOW_MS}"),
        ));
    }
    let lo = t_center_ms.saturating_sub(window_ms);
    let hi = t_center_ms.saturating_add(window_ms);
    Ok((lo..=hi).map(Seed).collect())
}

const fn inverse_mod_2_48(a: u64) -> u64 {
    // Newton iteration: each round doubles the number of correct low bits.
    let mut x = a;
    let mut i = 0;
    while i < 6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        i += 1;
    }
    x & STATE_MASK
}

/// Mutable convenience wrapper around [`Lcg48State`].
#[derive(Debug, Clone)]
pub struct Lcg48 {
    state: Lcg48State,
}

impl Lcg48 {
    pub fn new(seed: u64) -> Self {
        Lcg48 {
            state: lcg48_init(seed),
        }
    }

    pub fn from_state(state: Lcg48State) -> Self {
        Lcg48 { state }
    }

    pub fn state(&self) -> Lcg48State {
        self.state
    }

    /// `Random.next(bits)`; panics if `bits` is outside `1..=32`.
    pub fn next_bits(&mut self, bits: u32) -> u32 {
        let (state, out) = lcg48_next(self.state, bits).expect("bit count in 1..=32");
        self.state = state;
        out
    }

    /// `Random.nextInt()`.
    pub fn next_i32(&mut self) -> i32 {
        self.next_bits(32) as i32
    }

    /// `Random.nextLong()`.
    pub fn next_i64(&mut self) -> i64 {
        let (state, out) = next_long64(self.state);
        self.state = state;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> DerivationContext {
        DerivationContext::new(*b"0123456789abcdef-secret", "sec101").unwrap()
    }

    #[test]
    fn derive_seed_is_deterministic_and_user_sensitive() {
        let a = derive_seed(&ctx(), "fred", "seed", None).unwrap();
        assert_eq!(a, derive_seed(&ctx(), "fred", "seed", None).unwrap());
        assert_ne!(a, derive_seed(&ctx(), "bob", "seed", None).unwrap());
        let timed = derive_seed(
            &ctx(),
            "fred",
            "seed",
            Some(&1_270_424_385_000u64.to_be_bytes()),
        )
        .unwrap();
        assert_ne!(a, timed);
    }

    #[test]
    fn derive_seed_matches_digest_prefix() {
        let mut material = b"0123456789abcdef-secret".to_vec();
        material.extend_from_slice(b"sec101fredseed");
        let digest = Sha256::digest(&material);
        let expected = u64::from_be_bytes(digest[..8].try_into().unwrap());
        assert_eq!(
            derive_seed(&ctx(), "fred", "seed", None).unwrap(),
            Seed(expected)
        );
    }

    #[test]
    fn user_id_validation_names_the_field() {
        for bad in ["", "Fred", "fred!", "averyveryverylongname"] {
            match derive_seed(&ctx(), bad, "seed", None) {
                Err(SeedError::Validation { field, .. }) => assert_eq!(field, "user_id"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
        assert!(derive_seed(&ctx(), "fred", "", None).is_err());
    }

    #[test]
    fn short_master_secret_rejected() {
        assert!(DerivationContext::new(*b"short", "c").is_err());
        assert!(!format!("{:?}", ctx()).contains("secret\""));
        assert!(!format!("{:?}", ctx()).contains("0123456789"));
    }

    #[test]
    fn init_scrambles_with_multiplier() {
        assert_eq!(lcg48_init(0).raw(), 25_214_903_917);
        assert_eq!(lcg48_init(25_214_903_917).raw(), 0);
        assert_eq!(lcg48_init(42).raw(), 25_214_903_879);
    }

    #[test]
    fn next_matches_java_random() {
        // new Random(0).nextInt() and new Random(42).nextInt()
        let (_, out) = lcg48_next(lcg48_init(0), 32).unwrap();
        assert_eq!(out, 3_139_482_720);
        assert_eq!(out as i32, -1_155_484_576);
        assert_eq!(Lcg48::new(42).next_i32(), -1_170_105_035);
        // new Random(0).nextLong(), new Random(42).nextLong()
        assert_eq!(next_long64(lcg48_init(0)).1, -4_962_768_465_676_381_896);
        assert_eq!(next_long64(lcg48_init(42)).1, -5_025_562_857_975_149_833);
        assert_eq!(next_long64(lcg48_init(12345)).1, 6_674_089_274_190_705_457);
    }

    #[test]
    fn successive_outputs_differ() {
        let (s1, a) = lcg48_next(lcg48_init(0), 32).unwrap();
        let (_, b) = lcg48_next(s1, 32).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn bits_out_of_range_rejected() {
        assert!(lcg48_next(lcg48_init(0), 0).is_err());
        assert!(lcg48_next(lcg48_init(0), 33).is_err());
    }

    #[test]
    fn next_long_is_two_next32_calls() {
        let s = lcg48_init(987_654_321);
        let (s1, hi) = lcg48_next(s, 32).unwrap();
        let (s2, lo) = lcg48_next(s1, 32).unwrap();
        let expected = ((hi as i32 as i64) << 32).wrapping_add(lo as i32 as i64);
        assert_eq!(next_long64(s), (s2, expected));
    }

    #[test]
    fn multiplier_inverse() {
        assert_eq!(MULTIPLIER_INVERSE, 0xDFE0_5BCB_1365);
        assert_eq!(MULTIPLIER.wrapping_mul(MULTIPLIER_INVERSE) & STATE_MASK, 1);
    }

    #[test]
    fn inversion_recovers_state() {
        let s = lcg48_init(7);
        let (_, y) = next_long64(s);
        let candidates = invert_long_output(y);
        assert!(candidates.contains(&s));
        for c in candidates {
            assert_eq!(next_long64(c).1, y);
        }
    }

    #[test]
    fn time_window() {
        assert_eq!(time_window_candidates(1000, 0).unwrap(), vec![Seed(1000)]);
        let five = time_window_candidates(1000, 2).unwrap();
        assert_eq!(five, (998..=1002).map(Seed).collect::<Vec<_>>());
        assert_eq!(time_window_candidates(1, 3).unwrap().len(), 5);
        assert!(time_window_candidates(0, MAX_TIME_WINDOW_MS + 1).is_err());
    }

    #[test]
    fn one_bit_output_is_binary() {
        let mut s = lcg48_init(3);
        for _ in 0..64 {
            let (next, bit) = lcg48_next(s, 1).unwrap();
            assert!(bit <= 1);
            s = next;
        }
    }

    proptest! {
        #[test]
        fn state_stays_below_2_48(raw in any::<u64>(), bits in 1u32..=32) {
            let (next, out) = lcg48_next(Lcg48State::from_raw(raw), bits).unwrap();
            prop_assert!(next.raw() < 1 << 48);
            prop_assert!(bits == 32 || out < 1 << bits);
        }

        #[test]
        fn derive_seed_pure(user in "[a-z0-9]{1,12}", ex in "[a-z]{1,8}", nonce in proptest::collection::vec(any::<u8>(), 0..16)) {
            let a = derive_seed(&ctx(), &user, &ex, Some(&nonce)).unwrap();
            prop_assert_eq!(a, derive_seed(&ctx(), &user, &ex, Some(&nonce)).unwrap());
        }
    }
}
