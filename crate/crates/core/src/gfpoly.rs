//! Polynomials over prime fields, generic over the word size of the
//! characteristic. Used for roots of `f` modulo factor-base primes,
//! character ideals, residue-field square roots and the modular stages of
//! integer factorization.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::arith::{inv_mod, inv_mod_big, mod_floor_big, mul_mod};

// `from_*` methods need the field for its modulus
#[allow(clippy::wrong_self_convention)]
pub trait PrimeField: Clone + Debug {
    type Elem: Clone + PartialEq + Eq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Panics on zero.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    fn from_u64(&self, v: u64) -> Self::Elem;
    fn to_biguint(&self, a: &Self::Elem) -> BigUint;
    fn modulus(&self) -> BigUint;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
}

/// Prime field with a characteristic below 2⁶³.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp64 {
    pub p: u64,
}

impl Fp64 {
    pub fn new(p: u64) -> Self {
        assert!((2..(1u64 << 63)).contains(&p));
        Fp64 { p }
    }
}

impl PrimeField for Fp64 {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        inv_mod(*a, self.p).expect("inverse of zero")
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }
    fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }
    fn to_biguint(&self, a: &u64) -> BigUint {
        BigUint::from(*a)
    }
    fn modulus(&self) -> BigUint {
        BigUint::from(self.p)
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
}

/// Prime field of arbitrary size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpBig {
    pub p: BigUint,
}

impl FpBig {
    pub fn new(p: BigUint) -> Self {
        FpBig { p }
    }
}

impl PrimeField for FpBig {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one() % &self.p
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.p {
            s - &self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            a + &self.p - b
        }
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.p
    }
    fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.p - a
        }
    }
    fn inv(&self, a: &BigUint) -> BigUint {
        inv_mod_big(a, &self.p).expect("inverse of zero")
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn from_bigint(&self, v: &BigInt) -> BigUint {
        mod_floor_big(v, &self.p)
    }
    fn from_u64(&self, v: u64) -> BigUint {
        BigUint::from(v) % &self.p
    }
    fn to_biguint(&self, a: &BigUint) -> BigUint {
        a.clone()
    }
    fn modulus(&self) -> BigUint {
        self.p.clone()
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_below(&self.p)
    }
}

/// Polynomial over `F`, constant term first, no trailing zeros.
pub type Poly<F> = Vec<<F as PrimeField>::Elem>;

/// Polynomial arithmetic over a fixed prime field.
#[derive(Clone, Debug)]
pub struct PolyRing<F: PrimeField> {
    pub field: F,
}

impl<F: PrimeField> PolyRing<F> {
    pub fn new(field: F) -> Self {
        PolyRing { field }
    }

    pub fn trim(&self, mut a: Poly<F>) -> Poly<F> {
        while a.last().is_some_and(|c| self.field.is_zero(c)) {
            a.pop();
        }
        a
    }

    pub fn degree(a: &Poly<F>) -> Option<usize> {
        a.len().checked_sub(1)
    }

    pub fn from_bigints(&self, coeffs: &[BigInt]) -> Poly<F> {
        self.trim(coeffs.iter().map(|c| self.field.from_bigint(c)).collect())
    }

    pub fn x(&self) -> Poly<F> {
        self.trim(vec![self.field.zero(), self.field.one()])
    }

    pub fn constant(&self, c: F::Elem) -> Poly<F> {
        self.trim(vec![c])
    }

    pub fn add(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        let n = a.len().max(b.len());
        let z = self.field.zero();
        self.trim((0..n).map(|i| self.field.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect())
    }

    pub fn sub(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        let n = a.len().max(b.len());
        let z = self.field.zero();
        self.trim((0..n).map(|i| self.field.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect())
    }

    pub fn scale(&self, a: &Poly<F>, k: &F::Elem) -> Poly<F> {
        self.trim(a.iter().map(|c| self.field.mul(c, k)).collect())
    }

    pub fn mul(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.field.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.field.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = self.field.mul(x, y);
                out[i + j] = self.field.add(&out[i + j], &t);
            }
        }
        self.trim(out)
    }

    /// Quotient and remainder; panics if `b` is zero.
    pub fn divrem(&self, a: &Poly<F>, b: &Poly<F>) -> (Poly<F>, Poly<F>) {
        let db = Self::degree(b).expect("division by zero polynomial");
        let inv_lc = self.field.inv(&b[db]);
        let mut r = a.clone();
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![self.field.zero(); r.len() - db];
        for k in (0..q.len()).rev() {
            let c = self.field.mul(&r[k + db], &inv_lc);
            if !self.field.is_zero(&c) {
                for (j, bj) in b.iter().enumerate() {
                    let t = self.field.mul(&c, bj);
                    r[k + j] = self.field.sub(&r[k + j], &t);
                }
            }
            q[k] = c;
        }
        r.truncate(db);
        (self.trim(q), self.trim(r))
    }

    pub fn rem(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        self.divrem(a, b).1
    }

    pub fn mul_mod(&self, a: &Poly<F>, b: &Poly<F>, m: &Poly<F>) -> Poly<F> {
        self.rem(&self.mul(a, b), m)
    }

    pub fn monic(&self, a: &Poly<F>) -> Poly<F> {
        match a.last() {
            None => Vec::new(),
            Some(lc) => self.scale(a, &self.field.inv(lc)),
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// Returns `(g, s, t)` with `s·a + t·b = g`, `g` monic.
    pub fn ext_gcd(&self, a: &Poly<F>, b: &Poly<F>) -> (Poly<F>, Poly<F>, Poly<F>) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (self.constant(self.field.one()), Vec::new());
        let (mut t0, mut t1) = (Vec::new(), self.constant(self.field.one()));
        while !r1.is_empty() {
            let (q, r) = self.divrem(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let s2 = self.sub(&s0, &self.mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = self.sub(&t0, &self.mul(&q, &t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        match r0.last() {
            None => (r0, s0, t0),
            Some(lc) => {
                let inv = self.field.inv(lc);
                (self.scale(&r0, &inv), self.scale(&s0, &inv), self.scale(&t0, &inv))
            }
        }
    }

    pub fn derivative(&self, a: &Poly<F>) -> Poly<F> {
        self.trim(
            a.iter().enumerate().skip(1).map(|(i, c)| self.field.mul(c, &self.field.from_u64(i as u64))).collect(),
        )
    }

    pub fn eval(&self, a: &Poly<F>, x: &F::Elem) -> F::Elem {
        a.iter().rev().fold(self.field.zero(), |acc, c| self.field.add(&self.field.mul(&acc, x), c))
    }

    /// `base^exp mod m`.
    pub fn pow_mod(&self, base: &Poly<F>, exp: &BigUint, m: &Poly<F>) -> Poly<F> {
        let mut acc = self.rem(&self.constant(self.field.one()), m);
        let base = self.rem(base, m);
        for i in (0..exp.bits()).rev() {
            acc = self.mul_mod(&acc, &acc, m);
            if exp.bit(i) {
                acc = self.mul_mod(&acc, &base, m);
            }
        }
        acc
    }

    /// Rabin/Ben-Or irreducibility test.
    pub fn is_irreducible(&self, f: &Poly<F>) -> bool {
        let Some(d) = Self::degree(f) else {
            return false;
        };
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let f = self.monic(f);
        let p = self.field.modulus();
        let x = self.x();
        let mut h = self.rem(&x, &f);
        for _ in 1..=d / 2 {
            h = self.pow_mod(&h, &p, &f);
            if self.gcd(&f, &self.sub(&h, &x)).len() > 1 {
                return false;
            }
        }
        true
    }

    /// Distinct-degree factorization of a monic squarefree polynomial:
    /// `(k, product of all degree-k irreducible factors)`.
    pub fn distinct_degree(&self, f: &Poly<F>) -> Vec<(usize, Poly<F>)> {
        let p = self.field.modulus();
        let x = self.x();
        let mut rest = self.monic(f);
        let mut out = Vec::new();
        let mut h = self.rem(&x, &rest);
        let mut k = 0;
        while Self::degree(&rest).unwrap_or(0) >= 2 * (k + 1) {
            k += 1;
            h = self.pow_mod(&h, &p, &rest);
            let g = self.gcd(&rest, &self.sub(&h, &x));
            if g.len() > 1 {
                rest = self.divrem(&rest, &g).0;
                h = self.rem(&h, &rest);
                out.push((k, g));
            }
        }
        if let Some(dr) = Self::degree(&rest) {
            if dr > 0 {
                out.push((dr, rest));
            }
        }
        out
    }

    /// Equal-degree splitting (Cantor–Zassenhaus) for odd characteristic.
    pub fn equal_degree<R: Rng + ?Sized>(&self, f: &Poly<F>, k: usize, rng: &mut R) -> Vec<Poly<F>> {
        let d = Self::degree(f).unwrap_or(0);
        if d <= k {
            return vec![self.monic(f)];
        }
        let q = self.field.modulus().pow(k as u32);
        let e = (q - 1u32) >> 1;
        loop {
            let a: Poly<F> = self.trim((0..d).map(|_| self.field.random(rng)).collect());
            if Self::degree(&a).unwrap_or(0) < 1 {
                continue;
            }
            let g = self.gcd(f, &a);
            let split = if g.len() > 1 {
                g
            } else {
                let b = self.pow_mod(&a, &e, f);
                self.gcd(f, &self.sub(&b, &self.constant(self.field.one())))
            };
            let ds = Self::degree(&split).unwrap_or(0);
            if ds > 0 && ds < d {
                let other = self.divrem(f, &split).0;
                let mut out = self.equal_degree(&split, k, rng);
                out.extend(self.equal_degree(&other, k, rng));
                return out;
            }
        }
    }

    /// Complete factorization of a monic squarefree polynomial.
    pub fn factor_squarefree<R: Rng + ?Sized>(&self, f: &Poly<F>, rng: &mut R) -> Vec<Poly<F>> {
        let mut out = Vec::new();
        for (k, g) in self.distinct_degree(f) {
            out.extend(self.equal_degree(&g, k, rng));
        }
        out
    }

    /// Product of the irreducible factors that occur exactly once in `f`.
    /// Requires the characteristic to exceed `deg f`.
    pub fn simple_part(&self, f: &Poly<F>) -> Poly<F> {
        let f = self.monic(f);
        let g = self.gcd(&f, &self.derivative(&f));
        let radical = self.divrem(&f, &g).0;
        let repeated = self.gcd(&radical, &g);
        self.divrem(&radical, &repeated).0
    }

    /// Distinct roots in the field, sorted by representative.
    pub fn roots<R: Rng + ?Sized>(&self, f: &Poly<F>, rng: &mut R) -> Vec<F::Elem> {
        let Some(d) = Self::degree(f) else {
            return Vec::new();
        };
        if d == 0 {
            return Vec::new();
        }
        let f = self.monic(f);
        let p = self.field.modulus();
        let x = self.x();
        let xp = self.pow_mod(&x, &p, &f);
        let g = self.gcd(&f, &self.sub(&xp, &x));
        let Some(dg) = Self::degree(&g) else {
            return Vec::new();
        };
        if dg == 0 {
            return Vec::new();
        }
        let linear = if p == BigUint::from(2u32) {
            // only candidates are 0 and 1
            let mut v = Vec::new();
            for c in [self.field.zero(), self.field.one()] {
                if self.field.is_zero(&self.eval(&g, &c)) {
                    v.push(self.trim(vec![self.field.neg(&c), self.field.one()]));
                }
            }
            v
        } else {
            self.equal_degree(&g, 1, rng)
        };
        let mut roots: Vec<F::Elem> = linear.iter().map(|l| self.field.neg(&l[0])).collect();
        roots.sort_by_key(|r| self.field.to_biguint(r));
        roots
    }
}
