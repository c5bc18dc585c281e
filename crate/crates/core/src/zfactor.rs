//! Exact factor search for integer polynomials: modular degree patterns,
//! Hensel lifting and recombination of lifted factors.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::next_prime_u64;
use crate::gfpoly::{Fp64, Poly, PolyRing};
use crate::zpoly::ZPoly;

/// Primes tried for the degree-pattern sieve.
const PATTERN_PRIMES: usize = 6;

/// Primitive gcd over Q of two integer polynomials (primitive PRS).
pub fn gcd_q(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let (mut a, mut b) = (a.primitive_part(), b.primitive_part());
    if a.degree() < b.degree() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_zero() {
        let r = pseudo_rem(&a, &b).primitive_part();
        a = b;
        b = r;
    }
    a.primitive_part()
}

/// `lc(b)^(deg a - deg b + 1) · a mod b`.
pub fn pseudo_rem(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let db = b.degree().expect("pseudo-division by zero");
    let lc = b.leading();
    let mut r: Vec<BigInt> = a.coeffs().to_vec();
    while r.len() > db && !r.is_empty() {
        let top = r.len() - 1;
        let c = r[top].clone();
        for x in r.iter_mut() {
            *x *= &lc;
        }
        for (j, bj) in b.coeffs().iter().enumerate() {
            r[top - db + j] -= &c * bj;
        }
        r.pop();
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
    }
    ZPoly::new(r)
}

fn to_fp(ring: &PolyRing<Fp64>, f: &ZPoly) -> Poly<Fp64> {
    ring.from_bigints(f.coeffs())
}

/// Achievable degree sums of subsets of `degrees`.
fn subset_sums(degrees: &[usize]) -> BTreeSet<usize> {
    let mut sums = BTreeSet::from([0usize]);
    for &k in degrees {
        let next: Vec<usize> = sums.iter().map(|s| s + k).collect();
        sums.extend(next);
    }
    sums
}

/// Degrees of the irreducible factors of `f` modulo `p`, or `None` when `p`
/// divides the leading coefficient or `f` is not squarefree mod `p`.
fn degree_pattern(f: &ZPoly, p: u64) -> Option<Vec<usize>> {
    let ring = PolyRing::new(Fp64::new(p));
    let fp = to_fp(&ring, f);
    if PolyRing::<Fp64>::degree(&fp) != f.degree() {
        return None;
    }
    let g = ring.gcd(&fp, &ring.derivative(&fp));
    if g.len() > 1 {
        return None;
    }
    let mut out = Vec::new();
    for (k, g) in ring.distinct_degree(&fp) {
        let count = (g.len() - 1) / k;
        out.extend(std::iter::repeat_n(k, count));
    }
    Some(out)
}

fn symmetric_mod(v: &BigInt, m: &BigInt) -> BigInt {
    let r = v.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

fn reduce_poly(f: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = f.iter().map(|c| c.mod_floor(m)).collect();
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn mul_mod_m(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    reduce_poly(&out, m)
}

fn fp_to_big(p: &Poly<Fp64>) -> Vec<BigInt> {
    p.iter().map(|&c| BigInt::from(c)).collect()
}

fn big_to_fp(ring: &PolyRing<Fp64>, p: &[BigInt]) -> Poly<Fp64> {
    ring.from_bigints(p)
}

/// Lift `target ≡ g·h (mod p)` with monic `g`, `h` to modulus `p^k`.
fn hensel_pair(
    ring: &PolyRing<Fp64>,
    target: &[BigInt],
    g0: &Poly<Fp64>,
    h0: &Poly<Fp64>,
    k: u32,
) -> (Vec<BigInt>, Vec<BigInt>) {
    let p = BigInt::from(ring.field.p);
    let (one, s, t) = ring.ext_gcd(g0, h0);
    debug_assert_eq!(one, vec![1u64]);
    let mut g = fp_to_big(g0);
    let mut h = fp_to_big(h0);
    let mut pj = p.clone();
    for _ in 1..k {
        let next = &pj * &p;
        let gh = mul_mod_m(&g, &h, &next);
        let n = target.len().max(gh.len());
        let diff: Vec<BigInt> = (0..n)
            .map(|i| {
                let a = target.get(i).cloned().unwrap_or_default();
                let b = gh.get(i).cloned().unwrap_or_default();
                (a - b).mod_floor(&next) / &pj
            })
            .collect();
        let e = big_to_fp(ring, &diff);
        let dg = ring.rem(&ring.mul(&t, &e), g0);
        let dh = ring.rem(&ring.mul(&s, &e), h0);
        for (i, c) in dg.iter().enumerate() {
            g[i] += BigInt::from(*c) * &pj;
        }
        for (i, c) in dh.iter().enumerate() {
            h[i] += BigInt::from(*c) * &pj;
        }
        pj = next;
    }
    (g, h)
}

/// Lift a full monic factorization of `target` mod `p` to mod `p^k`.
fn hensel_multi(ring: &PolyRing<Fp64>, target: &[BigInt], factors: &[Poly<Fp64>], k: u32) -> Vec<Vec<BigInt>> {
    if factors.len() == 1 {
        let m = BigInt::from(ring.field.p).pow(k);
        return vec![reduce_poly(target, &m)];
    }
    let mid = factors.len() / 2;
    let prod = |fs: &[Poly<Fp64>]| fs.iter().fold(vec![1u64], |acc, f| ring.mul(&acc, f));
    let g0 = prod(&factors[..mid]);
    let h0 = prod(&factors[mid..]);
    let (g, h) = hensel_pair(ring, target, &g0, &h0, k);
    let mut out = hensel_multi(ring, &g, &factors[..mid], k);
    out.extend(hensel_multi(ring, &h, &factors[mid..], k));
    out
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out);
    out
}

/// A nontrivial factor of `f` over the integers (degree in `1..deg f`),
/// or `None` when the primitive part of `f` is irreducible over Q.
pub fn find_factor(f: &ZPoly) -> Option<ZPoly> {
    let f = f.primitive_part();
    let d = f.degree()?;
    if d <= 1 {
        return None;
    }
    if f.coeff(0).is_zero() {
        return Some(ZPoly::from_i64(&[0, 1]));
    }
    let g = gcd_q(&f, &f.derivative());
    if g.degree().unwrap_or(0) > 0 {
        return Some(g);
    }

    // Degree-pattern sieve over several primes.
    let mut allowed: BTreeSet<usize> = (1..d).collect();
    let mut best: Option<(u64, usize)> = None;
    let mut p = 2u64;
    let mut found = 0;
    while found < PATTERN_PRIMES {
        p = next_prime_u64(p);
        let Some(pattern) = degree_pattern(&f, p) else { continue };
        found += 1;
        if pattern.len() == 1 {
            return None;
        }
        let sums = subset_sums(&pattern);
        allowed.retain(|s| sums.contains(s));
        if allowed.is_empty() {
            return None;
        }
        if best.is_none_or(|(_, n)| pattern.len() < n) {
            best = Some((p, pattern.len()));
        }
    }
    let (p, _) = best?;

    let ring = PolyRing::new(Fp64::new(p));
    let lc = f.leading();
    let fp = to_fp(&ring, &f);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let mut factors = ring.factor_squarefree(&ring.monic(&fp), &mut rng);
    factors.sort();

    // Coefficients of lc·(any factor) are bounded by |lc|·2^d·‖f‖₂.
    let norm2: BigInt = f.coeffs().iter().map(|c| c * c).sum();
    let bound = lc.abs() * (BigInt::one() << d) * (norm2.sqrt() + 1u32);
    let limit = bound * 2u32 + 1u32;
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut modulus = pb.clone();
    while modulus <= limit {
        modulus *= &pb;
        k += 1;
    }
    let lc_inv = lc.mod_floor(&modulus).extended_gcd(&modulus).x.mod_floor(&modulus);
    let target: Vec<BigInt> = f.coeffs().iter().map(|c| (c * &lc_inv).mod_floor(&modulus)).collect();
    let lifted = hensel_multi(&ring, &target, &factors, k);

    let r = lifted.len();
    for size in 1..=r / 2 {
        for subset in subsets(r, size) {
            let mut prod = vec![lc.mod_floor(&modulus)];
            for &i in &subset {
                prod = mul_mod_m(&prod, &lifted[i], &modulus);
            }
            let cand = ZPoly::new(prod.iter().map(|c| symmetric_mod(c, &modulus)).collect()).primitive_part();
            let dc = cand.degree().unwrap_or(0);
            if dc == 0 || dc >= d || !allowed.contains(&dc) {
                continue;
            }
            if let Some(other) = f.div_exact(&cand) {
                let other = other.primitive_part();
                return Some(if other.degree() < cand.degree() { other } else { cand });
            }
        }
    }
    None
}

/// Exact irreducibility over Q of a polynomial of degree ≥ 1.
pub fn is_irreducible_q(f: &ZPoly) -> bool {
    find_factor(f).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_cases() {
        assert!(find_factor(&ZPoly::from_i64(&[-2, 0, 0, 1])).is_none());
        assert_eq!(find_factor(&ZPoly::from_i64(&[-1, 0, 0, 1])).unwrap().degree(), Some(1));
        assert!(find_factor(&ZPoly::from_i64(&[3, 2, 1, 1])).is_none());
        // (x^2 + 1)(x^2 + 3) has no rational root but is reducible
        let f = &ZPoly::from_i64(&[1, 0, 1]) * &ZPoly::from_i64(&[3, 0, 1]);
        let w = find_factor(&f).unwrap();
        assert_eq!(w.degree(), Some(2));
        assert!(f.div_exact(&w).is_some());
        // x^4 + 1 is irreducible but splits modulo every prime
        assert!(find_factor(&ZPoly::from_i64(&[1, 0, 0, 0, 1])).is_none());
        // non-monic with a rational root 3/2
        let g = &ZPoly::from_i64(&[-3, 2]) * &ZPoly::from_i64(&[7, 1, 5]);
        let w = find_factor(&g).unwrap();
        assert!(g.div_exact(&w).is_some());
        // repeated factor
        let h = &ZPoly::from_i64(&[1, 1]) * &ZPoly::from_i64(&[1, 1, 0, 1]);
        let h = &h * &ZPoly::from_i64(&[1, 1]);
        assert!(find_factor(&h).is_some());
    }

    #[test]
    fn large_coefficients() {
        let a = ZPoly::new(vec![BigInt::from(-123_456_789_012i64), BigInt::from(77)]);
        let b = ZPoly::new(vec![BigInt::from(98_765_432_101i64), BigInt::from(-5), BigInt::from(3)]);
        let f = &a * &b;
        let w = find_factor(&f).unwrap();
        assert!(f.div_exact(&w).is_some());
        assert!(matches!(w.degree(), Some(1) | Some(2)));
    }
}
