use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::CryptoError;

/// `base^exp mod m` by left-to-right square-and-multiply.
pub fn mod_pow(base: &BigUint, exp: &BigUint, m: &BigUint) -> Result<BigUint, CryptoError> {
    if m.is_zero() {
        return Err(CryptoError::Modulus { min: 1 });
    }
    if m.is_one() {
        return Ok(BigUint::zero());
    }
    let base = base % m;
    let mut acc = BigUint::one();
    for i in (0..exp.bits()).rev() {
        acc = &acc * &acc % m;
        if exp.bit(i) {
            acc = acc * &base % m;
        }
    }
    Ok(acc)
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inv(a: &BigUint, m: &BigUint) -> Result<BigUint, CryptoError> {
    if m < &BigUint::from(2u32) {
        return Err(CryptoError::Modulus { min: 2 });
    }
    // Track Bezout coefficients of `a` as (magnitude, negative) pairs.
    let (mut r0, mut r1) = (m.clone(), a % m);
    let (mut t0, mut t1) = ((BigUint::zero(), false), (BigUint::one(), false));
    while !r1.is_zero() {
        let (q, r2) = r0.div_rem(&r1);
        let qt = &q * &t1.0;
        // t2 = t0 - q * t1
        let t2 = match (t0.1, t1.1) {
            (false, false) | (true, true) if t0.0 >= qt => (&t0.0 - &qt, t0.1),
            (false, false) | (true, true) => (&qt - &t0.0, !t0.1),
            _ => (&t0.0 + &qt, t0.1),
        };
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if !r0.is_one() {
        return Err(CryptoError::NotInvertible {
            a: a.clone(),
            m: m.clone(),
            gcd: r0,
        });
    }
    let (mag, negative) = t0;
    let mag = mag % m;
    Ok(if negative && !mag.is_zero() {
        m - mag
    } else {
        mag
    })
}

pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}

pub fn lcm(a: &BigUint, b: &BigUint) -> BigUint {
    a.lcm(b)
}

/// Position of the highest set bit; zero for zero.
pub fn bit_length(n: &BigUint) -> u64 {
    n.bits()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaPublicKey {
    pub n: BigUint,
    pub e: BigUint,
}

impl RsaPublicKey {
    pub fn new(n: BigUint, e: BigUint) -> Result<Self, CryptoError> {
        if n < BigUint::from(2u32) {
            return Err(CryptoError::InvalidKey("n must be at least 2"));
        }
        if e < BigUint::from(3u32) || e.is_even() {
            return Err(CryptoError::InvalidKey("e must be odd and at least 3"));
        }
        Ok(RsaPublicKey { n, e })
    }

    /// `s^e mod n`.
    pub fn apply(&self, s: &BigUint) -> BigUint {
        mod_pow(s, &self.e, &self.n).expect("n >= 2")
    }
}
