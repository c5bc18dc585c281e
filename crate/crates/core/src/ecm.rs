//! Lenstra's elliptic curve method, stage 1 only, on Montgomery curves
//! with Suyama's parametrisation.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::arith::primes_up_to;

/// A B1 that finds primes up to `bound` with a handful of curves.
pub fn suggested_b1(bound: u64) -> u64 {
    match bound {
        0..=100_000 => 400,
        100_001..=10_000_000 => 2_000,
        _ => 11_000,
    }
}

struct Curve<'a> {
    n: &'a BigUint,
    a24: BigUint,
}

impl Curve<'_> {
    fn sub(&self, x: &BigUint, y: &BigUint) -> BigUint {
        if x >= y {
            x - y
        } else {
            self.n - (y - x) % self.n
        }
    }

    fn dbl(&self, x: &BigUint, z: &BigUint) -> (BigUint, BigUint) {
        let n = self.n;
        let s = (x + z) % n;
        let d = self.sub(x, z);
        let s2 = &s * &s % n;
        let d2 = &d * &d % n;
        let t = self.sub(&s2, &d2);
        let x2 = &s2 * &d2 % n;
        let z2 = &t * ((&d2 + &self.a24 * &t) % n) % n;
        (x2, z2)
    }

    fn add(&self, p: (&BigUint, &BigUint), q: (&BigUint, &BigUint), diff: (&BigUint, &BigUint)) -> (BigUint, BigUint) {
        let n = self.n;
        let u = self.sub(p.0, p.1) * ((q.0 + q.1) % n) % n;
        let v = ((p.0 + p.1) % n) * self.sub(q.0, q.1) % n;
        let plus = (&u + &v) % n;
        let minus = self.sub(&u, &v);
        let x = diff.1 * (&plus * &plus % n) % n;
        let z = diff.0 * (&minus * &minus % n) % n;
        (x, z)
    }

    fn ladder(&self, k: u64, x: &BigUint, z: &BigUint) -> (BigUint, BigUint) {
        if k == 1 {
            return (x.clone(), z.clone());
        }
        let (mut r0x, mut r0z) = (x.clone(), z.clone());
        let (mut r1x, mut r1z) = self.dbl(x, z);
        let bits = 64 - k.leading_zeros();
        for i in (0..bits - 1).rev() {
            if (k >> i) & 1 == 1 {
                let (ax, az) = self.add((&r0x, &r0z), (&r1x, &r1z), (x, z));
                let (dx, dz) = self.dbl(&r1x, &r1z);
                (r0x, r0z, r1x, r1z) = (ax, az, dx, dz);
            } else {
                let (ax, az) = self.add((&r0x, &r0z), (&r1x, &r1z), (x, z));
                let (dx, dz) = self.dbl(&r0x, &r0z);
                (r0x, r0z, r1x, r1z) = (dx, dz, ax, az);
            }
        }
        (r0x, r0z)
    }
}

/// Try up to `curves` random curves; returns a nontrivial factor of the odd
/// composite `n` if one is found.
pub fn find_factor<R: Rng + ?Sized>(n: &BigUint, b1: u64, curves: usize, rng: &mut R) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let primes = primes_up_to(b1);
    let six = BigUint::from(6u32);
    for _ in 0..curves {
        let sigma = rng.gen_biguint_range(&six, n);
        let u = (&sigma * &sigma + n - 5u32) % n;
        let v = (&sigma << 2u32) % n;
        let x0 = u.modpow(&BigUint::from(3u32), n);
        let z0 = v.modpow(&BigUint::from(3u32), n);
        let vmu = if v >= u { &v - &u } else { n - (&u - &v) };
        let num = vmu.modpow(&BigUint::from(3u32), n) * ((BigUint::from(3u32) * &u + &v) % n) % n;
        let den = (BigUint::from(16u32) * &x0 % n) * &v % n;
        let g = den.gcd(n);
        if !g.is_one() {
            if &g != n {
                return Some(g);
            }
            continue;
        }
        let inv = crate::arith::inv_mod_big(&den, n)?;
        let curve = Curve { n, a24: num * inv % n };
        let (mut x, mut z) = (x0, z0);
        for &p in &primes {
            let mut q = p;
            while q <= b1 / p {
                q *= p;
            }
            (x, z) = curve.ladder(q, &x, &z);
        }
        if z.is_zero() {
            continue;
        }
        let g = z.gcd(n);
        if !g.is_one() && &g != n {
            return Some(g);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn splits_product_of_moderate_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = BigUint::from(1_000_003u64);
        let q = BigUint::from(998_244_353u64);
        let n = &p * &q;
        let g = find_factor(&n, 2000, 200, &mut rng).expect("ecm should split");
        assert!(g == p || g == q);
    }
}
