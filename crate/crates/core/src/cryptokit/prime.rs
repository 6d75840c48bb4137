use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::arith::mod_pow;
use crate::seedgen::Lcg48;

/// Miller-Rabin rounds used when the caller has no preference.
pub const DEFAULT_MR_ROUNDS: u32 = 24;

/// Deterministic witness set for every n < 2^64.
const SMALL_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

const TRIAL_PRIMES: [u32; 53] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// A stream of uniformly distributed 32-bit words.
pub trait BitSource {
    fn next_u32(&mut self) -> u32;

    fn next_u64(&mut self) -> u64 {
        ((self.next_u32() as u64) << 32) | self.next_u32() as u64
    }

    /// Uniform in `0..bound` by rejection; `bound` must be nonzero.
    fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Uniform `bits`-bit value (top bit not forced).
    fn random_bits(&mut self, bits: u64) -> BigUint {
        let words = bits.div_ceil(32) as usize;
        let mut digits: Vec<u32> = (0..words).map(|_| self.next_u32()).collect();
        let spare = (words as u64 * 32 - bits) as u32;
        if let Some(top) = digits.last_mut() {
            *top = top.checked_shr(spare).unwrap_or(0);
        }
        BigUint::new(digits)
    }

    /// Uniform in `0..bound`; `bound` must be nonzero.
    fn random_below(&mut self, bound: &BigUint) -> BigUint {
        assert!(!bound.is_zero(), "empty range");
        let bits = bound.bits();
        loop {
            let x = self.random_bits(bits);
            if &x < bound {
                return x;
            }
        }
    }
}

impl BitSource for Lcg48 {
    fn next_u32(&mut self) -> u32 {
        self.next_bits(32)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin. Deterministic below 2^64; above that, `rounds` bases drawn
/// from `rng`.
pub fn is_prime(n: &BigUint, rounds: u32, rng: &mut impl BitSource) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    if TRIAL_PRIMES.iter().any(|&p| (n % p).is_zero()) {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> s;
    let base_range = n - 3u32;
    'witness: for _ in 0..rounds.max(1) {
        let a = rng.random_below(&base_range) + 2u32;
        let mut x = mod_pow(&a, &d, n).expect("n > 1");
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// [`is_prime`] with [`DEFAULT_MR_ROUNDS`] and a fixed-seed base stream, for
/// checkers that must give the same answer on every call.
pub fn is_probable_prime(n: &BigUint) -> bool {
    is_prime(n, DEFAULT_MR_ROUNDS, &mut Lcg48::new(0x6d69_6c6c_6572))
}

fn passes_trial_division(n: &BigUint) -> bool {
    TRIAL_PRIMES
        .iter()
        .all(|&p| !(n % p).is_zero() || n == &BigUint::from(p))
}

/// Random prime of exactly `bits` bits with `gcd(coprime_to, p - 1) = 1`.
pub fn gen_prime(bits: u64, coprime_to: &BigUint, rng: &mut impl BitSource) -> BigUint {
    assert!(bits >= 8, "prime size below 8 bits");
    let one = BigUint::one();
    loop {
        let mut candidate = rng.random_bits(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if !passes_trial_division(&candidate) {
            continue;
        }
        if !(coprime_to.gcd(&(&candidate - &one))).is_one() {
            continue;
        }
        if is_prime(&candidate, DEFAULT_MR_ROUNDS, rng) {
            return candidate;
        }
    }
}

/// Random safe prime `p = 2q + 1` of exactly `bits` bits; returns `(p, q)`.
pub fn gen_safe_prime(bits: u64, rng: &mut impl BitSource) -> (BigUint, BigUint) {
    assert!(bits >= 8, "prime size below 8 bits");
    loop {
        let mut q = rng.random_bits(bits - 1);
        q.set_bit(bits - 2, true);
        q.set_bit(0, true);
        // q = 1 mod 3 makes 3 | p, q = 0 mod 3 makes 3 | q.
        if (&q % 3u32) != BigUint::from(2u32) && q != BigUint::from(3u32) {
            continue;
        }
        let p = (&q << 1u32) + 1u32;
        if !passes_trial_division(&q) || !passes_trial_division(&p) {
            continue;
        }
        if is_prime(&q, DEFAULT_MR_ROUNDS, rng) && is_prime(&p, DEFAULT_MR_ROUNDS, rng) {
            return (p, q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cryptokit::gcd;

    fn sieve(limit: usize) -> Vec<bool> {
        let mut is = vec![true; limit];
        is[0] = false;
        is[1] = false;
        let mut i = 2;
        while i * i < limit {
            if is[i] {
                let mut j = i * i;
                while j < limit {
                    is[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        is
    }

    /// Lucas-Lehmer: independent primality route for Mersenne numbers.
    fn lucas_lehmer(p: u32) -> bool {
        let m = (BigUint::one() << p) - 1u32;
        let mut s = BigUint::from(4u32);
        for _ in 0..p - 2 {
            s = (&s * &s + &m - 2u32) % &m;
        }
        s.is_zero()
    }

    #[test]
    fn definition_edges() {
        let mut rng = Lcg48::new(1);
        assert!(is_prime(&BigUint::from(2u32), 1, &mut rng));
        assert!(!is_prime(&BigUint::from(1u32), 1, &mut rng));
        assert!(!is_prime(&BigUint::zero(), 1, &mut rng));
    }

    #[test]
    fn matches_sieve_below_10k() {
        let table = sieve(10_000);
        let mut rng = Lcg48::new(2);
        for (n, &expected) in table.iter().enumerate() {
            assert_eq!(is_prime(&BigUint::from(n), 1, &mut rng), expected, "{n}");
        }
    }

    #[test]
    fn mersenne_127() {
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(lucas_lehmer(127));
        assert!(is_prime(&m127, 20, &mut Lcg48::new(3)));
        // 2^67 - 1 is composite (Cole, 1903).
        assert!(!lucas_lehmer(67));
        assert!(!is_prime(
            &((BigUint::one() << 67u32) - 1u32),
            20,
            &mut Lcg48::new(3)
        ));
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // 3215031751 fools bases 2, 3, 5, 7; 3825123056546413051 fools 2..23.
        for n in [3_215_031_751u64, 3_825_123_056_546_413_051, 561, 1_105] {
            assert!(!is_prime(&BigUint::from(n), 1, &mut Lcg48::new(4)), "{n}");
        }
        assert!(is_prime(
            &BigUint::from(18_446_744_073_709_551_557u64),
            1,
            &mut Lcg48::new(4)
        ));
    }

    #[test]
    fn gen_prime_postconditions() {
        let mut rng = Lcg48::new(5);
        for bits in [8u64, 16, 32, 64, 128] {
            let e = BigUint::from(65_537u32);
            let p = gen_prime(bits, &e, &mut rng);
            assert_eq!(p.bits(), bits);
            assert!(is_probable_prime(&p));
            assert!(gcd(&e, &(&p - 1u32)).is_one());
        }
    }

    #[test]
    fn gen_prime_16_bit_coprime_to_3() {
        let mut rng = Lcg48::new(6);
        let three = BigUint::from(3u32);
        for _ in 0..50 {
            let p = gen_prime(16, &three, &mut rng);
            let small = p.to_u64().unwrap();
            assert!((1u64 << 15..1 << 16).contains(&small));
            assert!(sieve(1 << 16)[small as usize]);
            assert_ne!(small % 3, 1);
        }
    }

    #[test]
    fn safe_prime() {
        let mut rng = Lcg48::new(7);
        let (p, q) = gen_safe_prime(64, &mut rng);
        assert_eq!(p.bits(), 64);
        assert_eq!(p, &q * 2u32 + 1u32);
        assert!(is_probable_prime(&p) && is_probable_prime(&q));
    }

    #[test]
    fn random_below_in_range() {
        let mut rng = Lcg48::new(8);
        let bound = BigUint::from(1_000_003u32);
        for _ in 0..1000 {
            assert!(rng.random_below(&bound) < bound);
            assert!(rng.below(7) < 7);
        }
        assert!(rng.random_bits(5) < BigUint::from(32u32));
    }
}
