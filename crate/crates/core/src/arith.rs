//! Elementary number theory shared by every stage: modular arithmetic on
//! machine words, Miller–Rabin, Jacobi symbols, integer roots and a small
//! prime sieve.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Bases for which Miller–Rabin is deterministic below 3.3·10²⁴.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Extra bases used above the deterministic range.
const MR_EXTRA_BASES: [u64; 12] = [43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
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

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Reduce a signed value into `[0, m)`.
#[inline]
pub fn reduce_i128(v: i128, m: u64) -> u64 {
    v.rem_euclid(m as i128) as u64
}

fn mr_witness_u64(n: u64, d: u64, s: u32, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    MR_BASES[..12].iter().all(|&a| mr_witness_u64(n, d, s, a))
}

/// Miller–Rabin on arbitrary-size integers. Deterministic below 3.3·10²⁴,
/// probabilistic (25 fixed bases) above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    MR_BASES.iter().chain(MR_EXTRA_BASES.iter()).all(|&a| {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            return true;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_one {
                return true;
            }
        }
        false
    })
}

pub fn is_prime_bigint(n: &BigInt) -> bool {
    n.sign() == Sign::Plus && is_prime(n.magnitude())
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi_u64(a: u64, n: u64) -> i32 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = a % n;
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Jacobi symbol (a/n) for odd positive n and arbitrary signed a.
pub fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    assert!(n.is_odd(), "Jacobi symbol needs an odd modulus");
    if let Some(nn) = n.to_u64() {
        let r = a.mod_floor(&BigInt::from(nn)).to_u64().unwrap();
        return jacobi_u64(r, nn);
    }
    let nb = BigInt::from(n.clone());
    let mut a = a.mod_floor(&nb).magnitude().clone();
    let mut n = n.clone();
    let mut t = 1;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            a >>= tz;
            let r = (&n % 8u32).to_u32().unwrap();
            if tz % 2 == 1 && (r == 3 || r == 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        let a4 = (&a % 4u32).to_u32().unwrap();
        let n4 = (&n % 4u32).to_u32().unwrap();
        if a4 == 3 && n4 == 3 {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

/// Floor of the k-th root.
pub fn iroot(n: &BigUint, k: u32) -> BigUint {
    n.nth_root(k)
}

/// If `n = b^k` with k ≥ 2 maximal, returns `(b, k)`.
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if n < &BigUint::from(4u32) {
        return None;
    }
    let bits = n.bits() as u32;
    for k in (2..=bits).rev() {
        let r = n.nth_root(k);
        if r > BigUint::one() && r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

/// All primes up to and including `limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_u64(mut n: u64) -> u64 {
    loop {
        n += 1;
        if is_prime_u64(n) {
            return n;
        }
    }
}

/// Euler's totient by trial division (small arguments only).
pub fn euler_phi(mut r: u64) -> u64 {
    let mut phi = r;
    let mut p = 2;
    while p * p <= r {
        if r.is_multiple_of(p) {
            while r.is_multiple_of(p) {
                r /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if r > 1 {
        phi -= phi / r;
    }
    phi
}

/// Reduce a signed big integer modulo a big modulus into `[0, m)`.
pub fn mod_floor_big(v: &BigInt, m: &BigUint) -> BigUint {
    v.mod_floor(&BigInt::from(m.clone())).magnitude().clone()
}

/// Modular inverse of `a` modulo `m` for big integers.
pub fn inv_mod_big(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let ext = BigInt::from(a.clone()).extended_gcd(&BigInt::from(m.clone()));
    if !ext.gcd.is_one() {
        return None;
    }
    Some(mod_floor_big(&ext.x, m))
}

/// Natural logarithm of a big integer, accurate for any size.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_euler_criterion() {
        for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
            for a in 0..p {
                let e = pow_mod(a, (p - 1) / 2, p);
                let want = if e == 0 {
                    0
                } else if e == 1 {
                    1
                } else {
                    -1
                };
                assert_eq!(jacobi_u64(a, p), want);
                assert_eq!(jacobi(&BigInt::from(a as i64 - 3 * p as i64), &BigUint::from(p)), want);
            }
        }
    }

    #[test]
    fn big_jacobi_agrees_with_small() {
        let n = BigUint::from(1_000_000_000_000_000_003u64) * BigUint::from(1_000_000_007u64);
        let n = if n.is_even() { n + 1u32 } else { n };
        for a in [-7i64, 2, 3, 5, 1234567, -99] {
            let j = jacobi(&BigInt::from(a), &n);
            assert!(j.abs() <= 1);
        }
        let p = BigUint::parse_bytes(b"170141183460469231731687303715884105727", 10).unwrap();
        assert!(is_prime(&p));
        // 2 is a QR mod p iff p ≡ ±1 mod 8; 2^127-1 ≡ 7 mod 8.
        assert_eq!(jacobi(&BigInt::from(2), &p), 1);
        assert_eq!(jacobi(&BigInt::from(-1), &p), -1);
    }

    #[test]
    fn primality() {
        let sieve = primes_up_to(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime_u64(n), sieve.binary_search(&n).is_ok(), "{n}");
        }
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        // strong pseudoprime to every base up to 23
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        assert!(!is_prime(&(BigUint::from(3_825_123_056_546_413_051u64) * 1_000_000_007u64)));
    }

    #[test]
    fn powers_and_roots() {
        assert_eq!(perfect_power(&BigUint::from(81u32)), Some((BigUint::from(3u32), 4)));
        assert_eq!(perfect_power(&BigUint::from(64u32)), Some((BigUint::from(2u32), 6)));
        assert_eq!(perfect_power(&BigUint::from(91u32)), None);
        assert_eq!(iroot(&BigUint::from(1_000_000u32), 3), BigUint::from(100u32));
        assert_eq!(iroot(&BigUint::from(999_999u32), 3), BigUint::from(99u32));
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(6, 9), None);
        assert_eq!(euler_phi(36), 12);
    }
}
