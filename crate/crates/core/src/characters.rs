//! First-degree primes, quadratic character ideals and their evaluation.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, is_prime, jacobi, jacobi_u64, ln_big, mod_floor_big, pow_mod};
use crate::error::{domain, Error, Result};
use crate::gfpoly::{Fp64, FpBig, Poly, PolyRing, PrimeField};
use crate::polyselect::HomogeneousPoly;

/// Attempts before [`ideal_sampler`] gives up.
pub const SAMPLER_ITERATION_CAP: usize = 1_000_000;

/// `⌈4d(δκ log₂ n + δ²κ/(2 ln 2) · (ln n)^{4/3} / (ln ln n)^{1/3})⌉`.
pub fn char_count(n: &BigUint, d: usize, delta: f64, kappa: f64) -> Result<usize> {
    if n < &BigUint::from(16u32) {
        return domain("character count needs n >= 16");
    }
    let ln_n = ln_big(n);
    Ok(char_count_from_log(ln_n, d, delta, kappa))
}

fn char_count_from_log(ln_n: f64, d: usize, delta: f64, kappa: f64) -> usize {
    let log2_n = ln_n / std::f64::consts::LN_2;
    let second = delta * delta * kappa / (2.0 * std::f64::consts::LN_2) * ln_n.powf(4.0 / 3.0) / ln_n.ln().cbrt();
    (4.0 * d as f64 * (delta * kappa * log2_n + second)).ceil() as usize
}

/// Roots of `f(x, 1)` modulo a prime `r`, sorted. `None` when `r | f_d`.
pub fn find_roots_mod_p(f: &HomogeneousPoly, r: u64) -> Option<Vec<u64>> {
    let ring = PolyRing::new(Fp64::new(r));
    let fr = ring.from_bigints(&f.coeffs);
    if PolyRing::<Fp64>::degree(&fr) != Some(f.d) {
        return None;
    }
    if r < 64 {
        // exhaustive for tiny primes, which also covers r = 2
        return Some((0..r).filter(|&s| ring.eval(&fr, &s) == 0).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(r);
    Some(ring.roots(&fr, &mut rng))
}

/// A prime ideal of residue degree `k` given by `(r, p(x))` with `p` monic
/// irreducible and a simple factor of `f mod r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterSpec {
    #[serde(with = "crate::io::biguint_str")]
    pub r: BigUint,
    /// Monic, constant term first; `[-s, 1]` for a first-degree ideal.
    #[serde(with = "crate::io::bigint_vec_str")]
    pub poly: Vec<BigInt>,
}

impl CharacterSpec {
    pub fn linear(r: u64, s: u64) -> Self {
        CharacterSpec { r: BigUint::from(r), poly: vec![-BigInt::from(s), BigInt::one()] }
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    /// The root `s` of a first-degree ideal.
    pub fn root(&self) -> Option<BigUint> {
        (self.degree() == 1).then(|| mod_floor_big(&-&self.poly[0], &self.r))
    }

    fn small(&self) -> Option<(u64, Vec<u64>)> {
        let r = self.r.to_u64().filter(|&r| r < (1u64 << 62))?;
        let rb = BigInt::from(r);
        Some((r, self.poly.iter().map(|c| c.mod_floor(&rb).to_u64().unwrap()).collect()))
    }

    /// Check every invariant against `f`.
    pub fn validate(&self, f: &HomogeneousPoly) -> bool {
        if self.r.is_even() || !is_prime(&self.r) || self.poly.last() != Some(&BigInt::one()) {
            return false;
        }
        fn go<F: PrimeField>(ring: PolyRing<F>, spec: &CharacterSpec, f: &HomogeneousPoly) -> bool {
            let p = ring.from_bigints(&spec.poly);
            let fr = ring.from_bigints(&f.coeffs);
            if !ring.is_irreducible(&p) || !ring.rem(&fr, &p).is_empty() {
                return false;
            }
            let fprime = ring.derivative(&fr);
            ring.gcd(&p, &fprime).len() == 1 && {
                let p2 = ring.mul(&p, &p);
                !ring.rem(&fr, &p2).is_empty()
            }
        }
        match self.small() {
            Some((r, _)) => go(PolyRing::new(Fp64::new(r)), self, f),
            None => go(PolyRing::new(FpBig::new(self.r.clone())), self, f),
        }
    }
}

fn symbol_from<F: PrimeField>(field: &F, v: &Poly<F>) -> i8 {
    if v.is_empty() {
        0
    } else if v.len() == 1 && v[0] == field.one() {
        1
    } else if v.len() == 1 && v[0] == field.neg(&field.one()) {
        -1
    } else {
        panic!("modulus is not irreducible: power is not ±1");
    }
}

/// `g^((r^k − 1)/2) mod (p, r)` mapped to `{+1, −1, 0}`.
pub fn legendre_polyfield(g: &[BigInt], p_poly: &[BigInt], r: &BigUint) -> i8 {
    fn go<F: PrimeField>(ring: PolyRing<F>, g: &[BigInt], p: &[BigInt], r: &BigUint) -> i8 {
        let p = ring.from_bigints(p);
        let k = p.len() - 1;
        let g = ring.rem(&ring.from_bigints(g), &p);
        let e = (r.pow(k as u32) - 1u32) >> 1;
        let v = ring.pow_mod(&g, &e, &p);
        symbol_from(&ring.field, &v)
    }
    match r.to_u64().filter(|&v| v < (1u64 << 62)) {
        Some(rs) => go(PolyRing::new(Fp64::new(rs)), g, p_poly, r),
        None => go(PolyRing::new(FpBig::new(r.clone())), g, p_poly, r),
    }
}

/// χ(a − bX) via the function-field reciprocity chain.
pub fn char_eval(spec: &CharacterSpec, a: &BigInt, b: &BigInt) -> i8 {
    let k = spec.degree();
    if let Some((r, poly)) = spec.small() {
        let ra = a.mod_floor(&BigInt::from(r)).to_u64().unwrap();
        let rb = b.mod_floor(&BigInt::from(r)).to_u64().unwrap();
        return char_eval_u64(r, &poly, ra, rb, k);
    }
    let r = &spec.r;
    let ra = mod_floor_big(a, r);
    let rb = mod_floor_big(b, r);
    let power = |s: i32| if k % 2 == 1 { s } else { s * s };
    if rb.is_zero() {
        return power(jacobi(&BigInt::from(ra), r)) as i8;
    }
    if k == 1 {
        let s = spec.root().unwrap();
        let v = BigInt::from(ra) - BigInt::from(rb) * BigInt::from(s);
        return jacobi(&v, r) as i8;
    }
    let binv = crate::arith::inv_mod_big(&rb, r).unwrap();
    let c = ra * binv % r;
    let pc =
        spec.poly.iter().rev().fold(BigInt::zero(), |acc, coef| {
            (acc * BigInt::from(c.clone()) + coef).mod_floor(&BigInt::from(r.clone()))
        });
    let base = jacobi(&pc, r);
    if base == 0 {
        return 0;
    }
    let neg_b = power(jacobi(&-BigInt::from(rb), r));
    let half: BigUint = (r - 1u32) >> 1;
    let flip = if half.is_odd() && k % 2 == 1 { -1 } else { 1 };
    (neg_b * flip * base) as i8
}

fn char_eval_u64(r: u64, poly: &[u64], a: u64, b: u64, k: usize) -> i8 {
    let power = |s: i32| if k % 2 == 1 { s } else { s * s };
    if b == 0 {
        return power(jacobi_u64(a, r)) as i8;
    }
    if k == 1 {
        let s = (r - poly[0]) % r;
        let v = (a as u128 + r as u128 * r as u128 - (b as u128 * s as u128) % (r as u128 * r as u128)) % r as u128;
        return jacobi_u64(v as u64, r) as i8;
    }
    let c = crate::arith::mul_mod(a, inv_mod(b, r).unwrap(), r);
    let pc = poly.iter().rev().fold(0u64, |acc, &coef| (crate::arith::mul_mod(acc, c, r) + coef) % r);
    let base = jacobi_u64(pc, r);
    if base == 0 {
        return 0;
    }
    let neg_b = power(jacobi_u64(r - b, r));
    let flip = if ((r - 1) / 2) % 2 == 1 && k % 2 == 1 { -1 } else { 1 };
    (neg_b * flip * base) as i8
}

/// Filters every sampled ideal must pass beyond simplicity.
#[derive(Clone, Debug)]
pub struct SamplerFilter {
    /// First-degree ideals are only emitted for primes above this value so
    /// they never coincide with factor-base columns.
    pub min_linear_prime: u64,
    /// `f_d · Δ_f`; primes dividing it are skipped.
    pub excluded: BigInt,
}

impl SamplerFilter {
    pub fn for_poly(f: &HomogeneousPoly, min_linear_prime: u64) -> Result<Self> {
        let disc = crate::polyselect::discriminant(f)?;
        Ok(SamplerFilter { min_linear_prime, excluded: disc * f.fd() })
    }
}

fn simple_factors<F: PrimeField, R: Rng + ?Sized>(
    ring: &PolyRing<F>,
    f: &HomogeneousPoly,
    rng: &mut R,
) -> Vec<Poly<F>> {
    let fr = ring.from_bigints(&f.coeffs);
    let simple = ring.simple_part(&fr);
    let mut out = ring.factor_squarefree(&simple, rng);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| format!("{a:?}").cmp(&format!("{b:?}"))));
    out
}

/// Steps 4–6 of the sampler for a fixed draw `(k, r)`: factor `f mod r` and
/// emit an eligible factor with probability `j/d`. `None` means restart.
pub fn sampler_step<R: Rng + ?Sized>(
    f: &HomogeneousPoly,
    k: usize,
    r: &BigUint,
    filter: &SamplerFilter,
    rng: &mut R,
) -> Option<CharacterSpec> {
    if r.is_even() || !is_prime(r) {
        return None;
    }
    if (&filter.excluded % BigInt::from(r.clone())).is_zero() {
        return None;
    }
    fn eligible<F: PrimeField, R: Rng + ?Sized>(
        ring: PolyRing<F>,
        f: &HomogeneousPoly,
        k: usize,
        linear_ok: bool,
        rng: &mut R,
    ) -> Vec<Vec<BigInt>> {
        simple_factors(&ring, f, rng)
            .into_iter()
            .filter(|p| {
                let deg = p.len() - 1;
                deg <= k && (deg > 1 || linear_ok)
            })
            .map(|p| p.iter().map(|c| BigInt::from(ring.field.to_biguint(c))).collect())
            .collect()
    }
    let linear_ok = r > &BigUint::from(filter.min_linear_prime);
    let candidates = match r.to_u64().filter(|&v| v < (1u64 << 62)) {
        Some(rs) => eligible(PolyRing::new(Fp64::new(rs)), f, k, linear_ok, rng),
        None => eligible(PolyRing::new(FpBig::new(r.clone())), f, k, linear_ok, rng),
    };
    let u = rng.gen_range(0..f.d);
    let chosen = candidates.get(u)?;
    let mut poly = chosen.clone();
    if poly.len() == 2 {
        // store first-degree ideals as x − s
        let s = mod_floor_big(&-&poly[0], r);
        poly[0] = -BigInt::from(s);
    }
    Some(CharacterSpec { r: r.clone(), poly })
}

/// Draw one character ideal: `k` uniform in `[1, d]`, `r` uniform in
/// `(x^{1/(k+1)}, x^{1/k}]`, then [`sampler_step`].
pub fn ideal_sampler<R: Rng + ?Sized>(
    f: &HomogeneousPoly,
    x_bound: &BigUint,
    filter: &SamplerFilter,
    rng: &mut R,
) -> Result<CharacterSpec> {
    for _ in 0..SAMPLER_ITERATION_CAP {
        let k = rng.gen_range(1..=f.d);
        let lo = x_bound.nth_root(k as u32 + 1) + 1u32;
        let hi = x_bound.nth_root(k as u32);
        if lo > hi {
            continue;
        }
        let r = rng.gen_biguint_range(&lo, &(hi + 1u32));
        if let Some(spec) = sampler_step(f, k, &r, filter, rng) {
            return Ok(spec);
        }
    }
    Err(Error::Domain("ideal sampler exhausted its iteration cap".into()))
}

/// Prime range `[e^{d^4}, 2e^{d^4}]` used by the faithful sampler.
pub fn faithful_prime_range(d: usize) -> (BigUint, BigUint) {
    let exp = (d as f64).powi(4);
    // e^{d^4} = 2^{d^4 / ln 2}; split into an integer shift and a mantissa
    let bits = exp / std::f64::consts::LN_2;
    let whole = bits.floor();
    let mantissa = (2f64.powf(bits - whole) * (1u64 << 52) as f64) as u64;
    let shift = whole as i64 - 52;
    let lo = if shift >= 0 {
        BigUint::from(mantissa) << shift as usize
    } else {
        BigUint::from(mantissa) >> (-shift) as usize
    };
    let hi = &lo << 1u32;
    (lo.max(BigUint::from(3u32)), hi.max(BigUint::from(5u32)))
}

/// Faithful variant: `r` uniform in `[e^{d^4}, 2e^{d^4}]`, any simple factor
/// of degree ≤ `k` for `k` uniform in `[1, d]`.
pub fn faithful_sampler<R: Rng + ?Sized>(
    f: &HomogeneousPoly,
    filter: &SamplerFilter,
    rng: &mut R,
) -> Result<CharacterSpec> {
    let (lo, hi) = faithful_prime_range(f.d);
    for _ in 0..SAMPLER_ITERATION_CAP {
        let k = rng.gen_range(1..=f.d);
        let r = rng.gen_biguint_range(&lo, &(&hi + 1u32));
        if let Some(spec) = sampler_step(f, k, &r, filter, rng) {
            return Ok(spec);
        }
    }
    Err(Error::Domain("faithful sampler exhausted its iteration cap".into()))
}

/// `count` distinct character ideals, sorted for a canonical column order.
pub fn sample_characters<R: Rng + ?Sized>(
    f: &HomogeneousPoly,
    count: usize,
    b_prime: u64,
    faithful: bool,
    rng: &mut R,
) -> Result<Vec<CharacterSpec>> {
    let filter = SamplerFilter::for_poly(f, b_prime)?;
    let x_bound = BigUint::from(b_prime).pow(2);
    let mut out: Vec<CharacterSpec> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 50 * count + 1000 {
            return Err(Error::Domain(format!("found only {} distinct characters", out.len())));
        }
        let spec =
            if faithful { faithful_sampler(f, &filter, rng)? } else { ideal_sampler(f, &x_bound, &filter, rng)? };
        if !out.contains(&spec) {
            out.push(spec);
        }
    }
    out.sort();
    Ok(out)
}

/// Character values packed as bits: `1` where χ = −1.
pub fn char_bits(chars: &[CharacterSpec], a: i64, b: i64) -> Vec<bool> {
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    chars.iter().map(|c| char_eval(c, &a, &b) == -1).collect()
}

/// Quick Legendre helper for tests and demos.
pub fn legendre_u64(a: u64, r: u64) -> i8 {
    match pow_mod(a % r, (r - 1) / 2, r) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}
