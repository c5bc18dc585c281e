//! Square roots in `Z[θ]`, `θ = f_d α`, and the resulting congruence of
//! squares modulo `n`.
//!
//! The square `P = g'(θ)² Π (f_d a − b θ)` is formed exactly. Its root is
//! found modulo several inert primes `q ≡ 3 (mod 4)`, where the residue ring
//! is the field `F_{q^d}`; signs are fixed by matching the norm of the root
//! against the integer norm recovered from the relations' factorizations.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{inv_mod, inv_mod_big, is_prime_u64, mod_floor_big};
use crate::error::{Error, Result};
use crate::gfpoly::{Fp64, PolyRing, PrimeField};
use crate::polyselect::HomogeneousPoly;
use crate::relations::Relation;
use crate::zpoly::ZPoly;

/// Verified `x² ≡ y² (mod n)` from a relation subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceOfSquares {
    pub n: BigUint,
    /// Algebraic side, `v(θ)` mapped to `Z/n`.
    pub x: BigUint,
    /// Rational side.
    pub y: BigUint,
    pub subset: Vec<usize>,
    pub fruitful: bool,
}

/// Outcome of the final gcd step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extracted {
    Factors(Vec<BigUint>),
    Trivial,
}

/// Nontrivial divisors among `gcd(u ± v, n)`, sorted and deduplicated.
pub fn extract_factors(u: &BigUint, v: &BigUint, n: &BigUint) -> Extracted {
    assert_eq!((u * u) % n, (v * v) % n, "extract_factors needs u² ≡ v² (mod n)");
    let (u, v) = (u % n, v % n);
    let diff = if u >= v { &u - &v } else { &v - &u };
    let mut out = Vec::new();
    for t in [diff, (&u + &v) % n] {
        let g = t.gcd(n);
        if !g.is_one() && &g != n && !out.contains(&g) {
            out.push(g);
        }
    }
    out.sort();
    if out.is_empty() {
        Extracted::Trivial
    } else {
        Extracted::Factors(out)
    }
}

/// Root in the θ basis plus bookkeeping.
#[derive(Clone, Debug)]
pub struct AlgebraicRoot {
    /// `v` with `v² ≡ P (mod g)`.
    pub v: ZPoly,
    pub primes_used: usize,
}

fn product_tree(mut layer: Vec<ZPoly>, g: &ZPoly) -> ZPoly {
    if layer.is_empty() {
        return ZPoly::one();
    }
    while layer.len() > 1 {
        layer =
            layer.chunks(2).map(|c| if c.len() == 2 { c[0].mul_mod_monic(&c[1], g) } else { c[0].clone() }).collect();
    }
    layer.pop().unwrap()
}

/// `P = g'(θ)² Π (f_d a − b θ) mod g`.
pub fn theta_square(f: &HomogeneousPoly, rels: &[&Relation]) -> ZPoly {
    let g = f.monic_companion();
    let fd = f.fd();
    let linear: Vec<ZPoly> = rels.iter().map(|r| ZPoly::linear(fd * BigInt::from(r.a), -BigInt::from(r.b))).collect();
    let gp = g.derivative();
    let gp2 = gp.mul_mod_monic(&gp, &g);
    product_tree(linear, &g).mul_mod_monic(&gp2, &g)
}

/// Inert primes for `g`: `q ≡ 3 (mod 4)`, `g` irreducible mod `q`, below 2⁶².
pub struct InertPrimes<'a> {
    g: &'a ZPoly,
    next: u64,
}

impl<'a> InertPrimes<'a> {
    pub fn new(g: &'a ZPoly) -> Self {
        InertPrimes { g, next: (1u64 << 62) - 1 }
    }
}

impl Iterator for InertPrimes<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        // give up after a generous window; reached only for exotic Galois groups
        for _ in 0..200_000 {
            let q = self.next;
            self.next -= 4;
            if !is_prime_u64(q) {
                continue;
            }
            let ring = PolyRing::new(Fp64::new(q));
            let gq = ring.from_bigints(self.g.coeffs());
            if ring.is_irreducible(&gq) {
                return Some(q);
            }
        }
        None
    }
}

/// `√|Π F(a, b)|` from the summed algebraic exponents.
fn norm_root(rels: &[&Relation]) -> Result<BigUint> {
    let mut exps: BTreeMap<u64, u64> = BTreeMap::new();
    let mut negative = false;
    for r in rels {
        negative ^= r.fab.is_negative();
        for &(p, _, e) in &r.algebraic {
            *exps.entry(p).or_default() += e as u64;
        }
    }
    if negative {
        return Err(Error::NotASquare("product of norms is negative".into()));
    }
    let mut root = BigUint::one();
    for (p, e) in exps {
        if e % 2 == 1 {
            return Err(Error::NotASquare(format!("norm exponent of {p} is odd")));
        }
        root *= BigUint::from(p).pow((e / 2) as u32);
    }
    Ok(root)
}

/// `u = f'(m) · Π p^{e/2} · f_d^{|S|/2} mod n`, never forming the product.
pub fn rational_sqrt(rels: &[&Relation], f: &HomogeneousPoly) -> Result<BigUint> {
    let n = f.n.to_biguint().ok_or_else(|| Error::Domain("n must be positive".into()))?;
    if rels.len() % 2 == 1 {
        return Err(Error::Domain("square roots need an even number of relations".into()));
    }
    let mut exps: BTreeMap<u64, u64> = BTreeMap::new();
    let mut negative = false;
    for r in rels {
        negative ^= r.rational.sign < 0;
        for &(p, e) in &r.rational.factors {
            *exps.entry(p).or_default() += e as u64;
        }
    }
    if negative {
        return Err(Error::NotASquare("rational product is negative".into()));
    }
    let mut u = mod_floor_big(&f.derivative_at_m(), &n);
    for (p, e) in exps {
        if e % 2 == 1 {
            return Err(Error::NotASquare(format!("rational exponent of {p} is odd")));
        }
        u = u * BigUint::from(p).modpow(&BigUint::from(e / 2), &n) % &n;
    }
    let fd = mod_floor_big(f.fd(), &n);
    Ok(u * fd.modpow(&BigUint::from(rels.len() / 2), &n) % &n)
}

fn centered(x: &BigUint, m: &BigUint) -> BigInt {
    let half = m >> 1u32;
    if x > &half {
        BigInt::from(x.clone()) - BigInt::from(m.clone())
    } else {
        BigInt::from(x.clone())
    }
}

fn max_bits(p: &ZPoly) -> u64 {
    p.coeffs().iter().map(|c| c.bits()).max().unwrap_or(0)
}

/// Root of `P` modulo one inert prime with the sign fixed by the norm.
fn root_mod_q(g: &ZPoly, p: &ZPoly, q: u64, target_norm: &BigInt) -> Result<Vec<u64>> {
    let field = Fp64::new(q);
    let ring = PolyRing::new(field);
    let gq = ring.from_bigints(g.coeffs());
    let pq = ring.from_bigints(p.coeffs());
    if pq.is_empty() {
        return Err(Error::Consistency(format!("square vanishes modulo {q}")));
    }
    let d = g.degree().unwrap() as u32;
    let qd = BigUint::from(q).pow(d);
    let root = ring.pow_mod(&pq, &((&qd + 1u32) >> 2u32), &gq);
    if ring.mul_mod(&root, &root, &gq) != pq {
        return Err(Error::NotASquare(format!("no square root modulo the inert prime {q}")));
    }
    let norm_exp = (&qd - 1u32) / (q - 1);
    let norm = ring.pow_mod(&root, &norm_exp, &gq);
    let norm = norm.first().copied().unwrap_or(0);
    let want = mod_floor_big(target_norm, &BigUint::from(q)).to_u64().unwrap();
    let mut root = root;
    if norm == want {
    } else if field.neg(&norm) == want {
        root = root.iter().map(|c| field.neg(c)).collect();
    } else {
        return Err(Error::NotASquare(format!("root norm disagrees with the factored norm modulo {q}")));
    }
    root.resize(d as usize, 0);
    Ok(root)
}

/// Exact square root of `P` in `Z[θ]` via CRT over inert primes.
pub fn algebraic_sqrt(f: &HomogeneousPoly, rels: &[&Relation]) -> Result<AlgebraicRoot> {
    if rels.len() % 2 == 1 {
        return Err(Error::Domain("square roots need an even number of relations".into()));
    }
    let d = f.d;
    if d.is_multiple_of(2) {
        return Err(Error::Domain("inert-prime square roots need odd degree".into()));
    }
    let g = f.monic_companion();
    let p = theta_square(f, rels);
    let fd = f.fd();
    // N(v) = N(g'(θ)) · f_d^{(d−1)|S|/2} · √Π F(a, b), up to sign fixed here
    let norm_root = BigInt::from(norm_root(rels)?);
    let fd_pow = fd.pow(((d - 1) * rels.len() / 2) as u32);
    let gp = g.derivative();
    let bits = max_bits(&p) / 2 + 64 * d as u64 + 64;
    let mut want = (bits / 62 + 1) as usize;
    let mut primes = InertPrimes::new(&g);
    let mut residues: Vec<Vec<u64>> = Vec::new();
    let mut moduli: Vec<u64> = Vec::new();
    for _attempt in 0..8 {
        while moduli.len() < want {
            let q =
                primes.next().ok_or_else(|| Error::Consistency("no inert primes found for the polynomial".into()))?;
            let ring = PolyRing::new(Fp64::new(q));
            let gq = ring.from_bigints(g.coeffs());
            let qd = BigUint::from(q).pow(d as u32);
            let norm_gp = ring.pow_mod(&ring.from_bigints(gp.coeffs()), &((&qd - 1u32) / (q - 1)), &gq);
            let norm_gp = norm_gp.first().copied().unwrap_or(0);
            let field = Fp64::new(q);
            let qb = BigUint::from(q);
            let rest = mod_floor_big(&(&fd_pow * &norm_root), &qb).to_u64().unwrap();
            let target = BigInt::from(field.mul(&norm_gp, &rest));
            residues.push(root_mod_q(&g, &p, q, &target)?);
            moduli.push(q);
        }
        let v = crt(&residues, &moduli, d);
        if v.mul_mod_monic(&v, &g) == p {
            return Ok(AlgebraicRoot { v, primes_used: moduli.len() });
        }
        want *= 2;
    }
    Err(Error::NotASquare("CRT reconstruction never verified".into()))
}

fn crt(residues: &[Vec<u64>], moduli: &[u64], d: usize) -> ZPoly {
    let mut m = BigUint::one();
    let mut xs = vec![BigUint::zero(); d];
    for (res, &q) in residues.iter().zip(moduli) {
        let qb = BigUint::from(q);
        let minv = inv_mod((&m % &qb).to_u64().unwrap(), q).expect("distinct primes");
        for (x, &r) in xs.iter_mut().zip(res) {
            let cur = (&*x % &qb).to_u64().unwrap();
            let t = crate::arith::mul_mod((r + q - cur) % q, minv, q);
            *x += &m * t;
        }
        m *= qb;
    }
    ZPoly::new(xs.iter().map(|x| centered(x, &m)).collect())
}

/// `v(f_d m) · f_d^{−(d−2)} mod n`: the image of `v / f_d^{d−2}` under `α ↦ m`.
pub fn algebraic_value_at_m(f: &HomogeneousPoly, v: &ZPoly) -> Result<BigUint> {
    let n = f.n.to_biguint().ok_or_else(|| Error::Domain("n must be positive".into()))?;
    let fd = mod_floor_big(f.fd(), &n);
    let fd_inv = inv_mod_big(&fd, &n).ok_or_else(|| Error::Consistency("f_d is not invertible modulo n".into()))?;
    let theta_m = mod_floor_big(&(f.fd() * &f.m), &n);
    let at = mod_floor_big(&v.eval(&BigInt::from(theta_m)), &n);
    Ok(at * fd_inv.modpow(&BigUint::from(f.d as u32 - 2), &n) % &n)
}

/// Both square roots for `subset` (indices into `rels`) and the checked congruence.
pub fn congruence(
    f: &HomogeneousPoly,
    rels: &[Relation],
    subset: Vec<usize>,
) -> Result<(CongruenceOfSquares, AlgebraicRoot)> {
    let n = f.n.to_biguint().ok_or_else(|| Error::Domain("n must be positive".into()))?;
    let chosen: Vec<&Relation> = subset.iter().map(|&i| &rels[i]).collect();
    let y = rational_sqrt(&chosen, f)?;
    let root = algebraic_sqrt(f, &chosen)?;
    let x = algebraic_value_at_m(f, &root.v)?;
    assert_eq!((&x * &x) % &n, (&y * &y) % &n, "square roots disagree modulo n");
    let fruitful = matches!(extract_factors(&x, &y, &n), Extracted::Factors(_));
    Ok((CongruenceOfSquares { n, x, y, subset, fruitful }, root))
}

/// Element `p(α) / f_d^k` of `Q(α)`, `deg p < d`.
#[derive(Clone, Debug)]
pub struct AlphaElement {
    pub poly: ZPoly,
    pub denom_exp: u32,
}

impl AlphaElement {
    fn reduce(mut p: Vec<BigInt>, mut k: u32, f: &HomogeneousPoly) -> Self {
        let d = f.d;
        let fd = f.fd();
        while p.len() > d {
            let top = p.len() - 1;
            let c = p[top].clone();
            for x in p.iter_mut() {
                *x *= fd;
            }
            for i in 0..=d {
                p[top - d + i] -= &c * &f.coeffs[i];
            }
            debug_assert!(p[top].is_zero());
            p.pop();
            k += 1;
        }
        AlphaElement { poly: ZPoly::new(p), denom_exp: k }
    }

    pub fn from_poly(p: &ZPoly, k: u32, f: &HomogeneousPoly) -> Self {
        Self::reduce(p.coeffs().to_vec(), k, f)
    }

    pub fn mul(&self, other: &Self, f: &HomogeneousPoly) -> Self {
        let prod = &self.poly * &other.poly;
        Self::reduce(prod.into_coeffs(), self.denom_exp + other.denom_exp, f)
    }

    pub fn equals(&self, other: &Self, fd: &BigInt) -> bool {
        let l = self.poly.scale(&fd.pow(other.denom_exp));
        let r = other.poly.scale(&fd.pow(self.denom_exp));
        l == r
    }
}

/// Recheck a θ-basis root in α coordinates: `v_α² = f'(α)² Π f_d (a − b α)`
/// where `v_α = V(α) / f_d^{d−2}` and `V(x) = v(f_d x)`.
pub fn verify_in_alpha(f: &HomogeneousPoly, rels: &[&Relation], v_theta: &ZPoly) -> bool {
    let fd = f.fd();
    let scaled: Vec<BigInt> = v_theta.coeffs().iter().enumerate().map(|(i, c)| c * fd.pow(i as u32)).collect();
    let v = AlphaElement::from_poly(&ZPoly::new(scaled), (f.d - 2) as u32, f);
    let lhs = v.mul(&v, f);
    let fp = AlphaElement::from_poly(&f.univariate().derivative(), 0, f);
    let mut rhs = fp.mul(&fp, f);
    for r in rels {
        let lin = ZPoly::linear(fd * BigInt::from(r.a), -(fd * BigInt::from(r.b)));
        rhs = rhs.mul(&AlphaElement::from_poly(&lin, 0, f), f);
    }
    lhs.equals(&rhs, fd)
}

/// True when `Π (a − b m)` is a positive perfect square.
pub fn rational_side_is_square(rels: &[&Relation]) -> bool {
    let prod: BigInt = rels.iter().map(|r| r.rational.value()).product();
    prod.sign() != Sign::Minus && {
        let m = prod.magnitude();
        let s = m.sqrt();
        &(&s * &s) == m
    }
}
