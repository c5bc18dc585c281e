//! Smoothness testing, homogeneous evaluation and exact Ψ counters.
//!
//! Convention: a number is `y`-smooth when every prime factor is `≤ y`.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primes_up_to};
use crate::ecm;
use crate::error::{domain, Result};
use crate::polyselect::HomogeneousPoly;

/// Largest `x` the enumeration oracles accept.
pub const PSI_LIMIT: u64 = 100_000_000;

/// `sign · Π p^e`, primes strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub sign: i8,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mut v = BigInt::one();
        for &(p, e) in &self.factors {
            v *= BigInt::from(p).pow(e);
        }
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors.binary_search_by_key(&p, |&(q, _)| q).map(|i| self.factors[i].1).unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmoothOutcome {
    Smooth(Factorization),
    /// The cofactor left after removing every prime `≤ bound` that could be
    /// found; it exceeds the bound.
    NotSmooth(BigUint),
}

/// Knobs for [`factor_if_smooth_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmoothOptions {
    /// Inputs of at least this many bits use trial division only up to
    /// [`ECM_TRIAL_LIMIT`] and split the rest with ECM. `None` disables ECM.
    pub ecm_min_bits: Option<u64>,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        SmoothOptions { ecm_min_bits: Some(48) }
    }
}

/// Trial-division ceiling used when the ECM stage is active.
pub const ECM_TRIAL_LIMIT: u64 = 1 << 14;

fn prime_cache() -> &'static RwLock<Arc<Vec<u64>>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<u64>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Arc::new(primes_up_to(1 << 16))))
}

/// All primes `≤ limit`, from a process-wide sieve that grows on demand.
pub fn primes_to(limit: u64) -> Vec<u64> {
    let cache = prime_cache();
    {
        let guard = cache.read().expect("prime cache poisoned");
        if guard.last().is_some_and(|&p| p >= limit) || limit <= 1 << 16 {
            let end = guard.partition_point(|&p| p <= limit);
            return guard[..end].to_vec();
        }
    }
    let fresh = Arc::new(primes_up_to(limit.max(1 << 16)));
    let out = fresh.to_vec();
    *cache.write().expect("prime cache poisoned") = fresh;
    out
}

/// Exact `Σ coeffs[i]·a^i·b^(d−i)`.
pub fn eval_homogeneous(f: &HomogeneousPoly, a: &BigInt, b: &BigInt) -> BigInt {
    let mut total = BigInt::zero();
    let mut apow = BigInt::one();
    for (i, c) in f.coeffs.iter().enumerate() {
        total += c * &apow * b.pow((f.d - i) as u32);
        apow *= a;
    }
    total
}

/// Trial division by precomputed primes with multiply-by-inverse
/// divisibility tests on 64-bit values.
#[derive(Clone, Debug)]
pub struct TrialDivider {
    bound: u64,
    primes: Vec<u64>,
    inv: Vec<u64>,
    lim: Vec<u64>,
}

impl TrialDivider {
    pub fn new(bound: u64) -> Self {
        let primes = primes_to(bound);
        let mut inv = Vec::with_capacity(primes.len());
        let mut lim = Vec::with_capacity(primes.len());
        for &p in &primes {
            if p == 2 {
                inv.push(0);
                lim.push(0);
                continue;
            }
            // Newton iteration for p^{-1} mod 2^64.
            let mut x: u64 = p;
            for _ in 0..5 {
                x = x.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(x)));
            }
            inv.push(x);
            lim.push(u64::MAX / p);
        }
        TrialDivider { bound, primes, inv, lim }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Factor `v > 0` over primes `≤ bound`. On failure returns the
    /// unfactored cofactor.
    pub fn factor_u64(&self, mut v: u64, out: &mut Vec<(u64, u32)>) -> std::result::Result<(), u64> {
        debug_assert!(v > 0);
        out.clear();
        if v & 1 == 0 && self.bound >= 2 {
            let tz = v.trailing_zeros();
            out.push((2, tz));
            v >>= tz;
        }
        for i in 1..self.primes.len() {
            if v == 1 {
                return Ok(());
            }
            let p = self.primes[i];
            if p.saturating_mul(p) > v {
                break;
            }
            let (inv, lim) = (self.inv[i], self.lim[i]);
            let mut q = v.wrapping_mul(inv);
            if q <= lim {
                let mut e = 0;
                while q <= lim {
                    v = q;
                    e += 1;
                    q = v.wrapping_mul(inv);
                }
                out.push((p, e));
            }
        }
        if v == 1 {
            return Ok(());
        }
        if v <= self.bound {
            // every prime factor ≤ sqrt(v) has been removed, so v is prime
            out.push((v, 1));
            return Ok(());
        }
        Err(v)
    }
}

fn factor_big_trial(mut v: BigUint, primes: &[u64], out: &mut Vec<(u64, u32)>) -> BigUint {
    for &p in primes {
        if v.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > v {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = v.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            v = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    v
}

/// Full factorization of `z` if every prime factor is `≤ bound`.
pub fn factor_if_smooth(z: &BigInt, bound: u64) -> Result<SmoothOutcome> {
    factor_if_smooth_with(z, bound, SmoothOptions { ecm_min_bits: None })
}

pub fn factor_if_smooth_with(z: &BigInt, bound: u64, opts: SmoothOptions) -> Result<SmoothOutcome> {
    if bound < 2 {
        return domain("smoothness bound must be at least 2");
    }
    if z.is_zero() {
        return domain("zero is never smooth");
    }
    let sign = if z.sign() == Sign::Minus { -1 } else { 1 };
    let mag = z.magnitude().clone();
    let use_ecm = opts.ecm_min_bits.is_some_and(|b| mag.bits() >= b) && bound > ECM_TRIAL_LIMIT;
    let td_limit = if use_ecm { ECM_TRIAL_LIMIT } else { bound };
    let primes = primes_to(td_limit);
    let mut factors = Vec::new();
    let rest = factor_big_trial(mag, &primes, &mut factors);
    if rest.is_one() {
        return Ok(SmoothOutcome::Smooth(Factorization { sign, factors }));
    }
    let bound_big = BigUint::from(bound);
    let td_big = BigUint::from(td_limit);
    if !use_ecm || &td_big * &td_big > rest {
        // `rest` is prime or has a factor above the trial limit
        if &td_big * &td_big > rest && rest <= bound_big {
            factors.push((rest.to_u64().unwrap(), 1));
            factors.sort_unstable();
            return Ok(SmoothOutcome::Smooth(Factorization { sign, factors }));
        }
        if !use_ecm {
            return Ok(SmoothOutcome::NotSmooth(rest));
        }
    }
    // Split the cofactor with ECM; every piece must be a prime ≤ bound.
    let mut rng = ChaCha8Rng::seed_from_u64(rest.to_u64_digits().first().copied().unwrap_or(1));
    let mut stack = vec![rest.clone()];
    let mut large = BigUint::one();
    let b1 = ecm::suggested_b1(bound);
    while let Some(piece) = stack.pop() {
        if piece.is_one() {
            continue;
        }
        if is_prime(&piece) {
            if piece <= bound_big {
                let p = piece.to_u64().unwrap();
                match factors.iter_mut().find(|(q, _)| *q == p) {
                    Some(entry) => entry.1 += 1,
                    None => factors.push((p, 1)),
                }
            } else {
                large *= piece;
            }
            continue;
        }
        if let Some((root, k)) = crate::arith::perfect_power(&piece) {
            for _ in 0..k {
                stack.push(root.clone());
            }
            continue;
        }
        match ecm::find_factor(&piece, b1, 64, &mut rng) {
            Some(g) => {
                let other = &piece / &g;
                stack.push(g);
                stack.push(other);
            }
            None => large *= piece,
        }
    }
    if large.is_one() {
        factors.sort_unstable();
        Ok(SmoothOutcome::Smooth(Factorization { sign, factors }))
    } else {
        Ok(SmoothOutcome::NotSmooth(large))
    }
}

/// Depth-first enumeration of every `y`-smooth `z ∈ [1, x]`.
pub fn for_each_smooth(x: u64, y: u64, mut visit: impl FnMut(u64)) -> Result<()> {
    if x == 0 {
        return domain("x must be at least 1");
    }
    if y < 2 {
        return domain("y must be at least 2");
    }
    if x > PSI_LIMIT {
        return domain(format!("Ψ oracle refuses x > {PSI_LIMIT}"));
    }
    let primes = primes_to(y.min(x));
    fn walk(v: u64, start: usize, x: u64, primes: &[u64], visit: &mut impl FnMut(u64)) {
        visit(v);
        for (j, &p) in primes.iter().enumerate().skip(start) {
            let Some(w) = v.checked_mul(p) else { break };
            if w > x {
                break;
            }
            walk(w, j, x, primes, visit);
        }
    }
    walk(1, 0, x, &primes, &mut visit);
    Ok(())
}

/// Ψ(x, y).
pub fn psi_count(x: u64, y: u64) -> Result<u64> {
    psi_count_restricted(x, y, None)
}

/// Ψ(x, y), or Ψ_r(x, y) when `coprime_to = Some(r)`.
pub fn psi_count_restricted(x: u64, y: u64, coprime_to: Option<u64>) -> Result<u64> {
    let mut count = 0u64;
    match coprime_to {
        None => for_each_smooth(x, y, |_| count += 1)?,
        Some(r) => for_each_smooth(x, y, |z| {
            if z.gcd(&r) == 1 {
                count += 1
            }
        })?,
    }
    Ok(count)
}

/// Ψ(x, y; r, s): smooth `z ≤ x` with `z ≡ s (mod r)`.
pub fn psi_count_ap(x: u64, y: u64, r: u64, s: u64) -> Result<u64> {
    if r == 0 || s >= r {
        return domain("need 0 <= s < r");
    }
    let mut count = 0u64;
    for_each_smooth(x, y, |z| {
        if z % r == s {
            count += 1
        }
    })?;
    Ok(count)
}

/// Ψ(x, y; r, a) for every residue `a ∈ [0, r)`.
pub fn smooth_residue_counts(x: u64, y: u64, r: u64) -> Result<Vec<u64>> {
    if r == 0 {
        return domain("modulus must be positive");
    }
    let mut counts = vec![0u64; r as usize];
    for_each_smooth(x, y, |z| counts[(z % r) as usize] += 1)?;
    Ok(counts)
}

/// Quick ratio used by demos: Ψ(x, y)/x.
pub fn psi_density(x: u64, y: u64) -> Result<f64> {
    Ok(psi_count(x, y)? as f64 / x as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Largest-prime-factor sieve, an independent Ψ oracle.
    fn lpf_sieve(x: usize) -> Vec<u32> {
        let mut lpf = vec![0u32; x + 1];
        for p in 2..=x {
            if lpf[p] == 0 {
                let mut q = p;
                while q <= x {
                    lpf[q] = p as u32;
                    q += p;
                }
            }
        }
        lpf
    }

    fn fact(z: i64, bound: u64) -> SmoothOutcome {
        factor_if_smooth(&BigInt::from(z), bound).unwrap()
    }

    #[test]
    fn smooth_examples() {
        assert_eq!(
            fact(720, 7),
            SmoothOutcome::Smooth(Factorization { sign: 1, factors: vec![(2, 4), (3, 2), (5, 1)] })
        );
        assert_eq!(fact(722, 7), SmoothOutcome::NotSmooth(BigUint::from(361u32)));
        assert_eq!(
            fact(-30, 7),
            SmoothOutcome::Smooth(Factorization { sign: -1, factors: vec![(2, 1), (3, 1), (5, 1)] })
        );
        assert_eq!(fact(-1, 7), SmoothOutcome::Smooth(Factorization { sign: -1, factors: vec![] }));
        assert_eq!(fact(7, 7), SmoothOutcome::Smooth(Factorization { sign: 1, factors: vec![(7, 1)] }));
        assert!(factor_if_smooth(&BigInt::zero(), 7).is_err());
        assert!(factor_if_smooth(&BigInt::from(5), 1).is_err());
    }

    #[test]
    fn trial_divider_agrees_with_reference() {
        let td = TrialDivider::new(200);
        let mut buf = Vec::new();
        for v in 1..20_000u64 {
            let want = fact(v as i64, 200);
            match (td.factor_u64(v, &mut buf), want) {
                (Ok(()), SmoothOutcome::Smooth(f)) => assert_eq!(buf, f.factors, "{v}"),
                (Err(r), SmoothOutcome::NotSmooth(w)) => assert_eq!(BigUint::from(r), w, "{v}"),
                (got, want) => panic!("{v}: {got:?} vs {want:?}"),
            }
        }
    }

    #[test]
    fn ecm_stage_splits_large_smooth_values() {
        // 65537 · 65539 · 131071 exceeds 48 bits and every prime exceeds
        // the trial-division ceiling.
        let z = BigInt::from(65_537u64) * 65_539u64 * 131_071u64 * 12u64;
        let out = factor_if_smooth_with(&z, 200_000, SmoothOptions::default()).unwrap();
        match out {
            SmoothOutcome::Smooth(f) => {
                assert_eq!(f.value(), z);
                assert_eq!(f.factors, vec![(2, 2), (3, 1), (65_537, 1), (65_539, 1), (131_071, 1)]);
            }
            other => panic!("{other:?}"),
        }
        let z2 = BigInt::from(65_537u64) * 1_000_003u64 * 1_000_033u64;
        assert!(matches!(
            factor_if_smooth_with(&z2, 200_000, SmoothOptions::default()).unwrap(),
            SmoothOutcome::NotSmooth(_)
        ));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_count(16, 2).unwrap(), 5);
        assert_eq!(psi_count(100, 5).unwrap(), 34);
        assert_eq!(psi_count_ap(50, 5, 3, 1).unwrap(), 6);
        assert!(psi_count(PSI_LIMIT + 1, 5).is_err());
        assert!(psi_count_ap(50, 5, 3, 3).is_err());
    }

    #[test]
    fn psi_matches_sieve_oracle() {
        let x = 1_000_000usize;
        let lpf = lpf_sieve(x);
        for y in [2u64, 7, 30, 100, 1000] {
            let want = 1 + (2..=x).filter(|&z| lpf[z] as u64 <= y).count() as u64;
            assert_eq!(psi_count(x as u64, y).unwrap(), want, "y={y}");
        }
        // recorded values of the dual oracle
        assert_eq!(psi_count(1_000_000, 1000).unwrap(), 344_299);
        assert_eq!(psi_count(1_000_000, 100).unwrap(), 72_271);
    }

    #[test]
    fn psi_monotone_on_grid() {
        let xs = [10u64, 100, 1000, 5000, 20_000];
        let ys = [2u64, 3, 10, 50, 200];
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                let v = psi_count(x, y).unwrap();
                if i > 0 {
                    assert!(psi_count(xs[i - 1], y).unwrap() <= v);
                }
                if j > 0 {
                    assert!(psi_count(x, ys[j - 1]).unwrap() <= v);
                }
            }
        }
    }

    #[test]
    fn residue_counts_partition() {
        let counts = smooth_residue_counts(10_000, 20, 7).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), psi_count(10_000, 20).unwrap());
        let coprime: u64 = (1..7).map(|a| counts[a]).sum();
        assert_eq!(coprime, psi_count_restricted(10_000, 20, Some(7)).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn factorization_round_trip(z in -1_000_000_000_000i64..1_000_000_000_000i64, bound in 2u64..5000) {
            prop_assume!(z != 0);
            match factor_if_smooth(&BigInt::from(z), bound).unwrap() {
                SmoothOutcome::Smooth(f) => {
                    prop_assert_eq!(f.value(), BigInt::from(z));
                    for w in f.factors.windows(2) {
                        prop_assert!(w[0].0 < w[1].0);
                    }
                    for &(p, _) in &f.factors {
                        prop_assert!(crate::arith::is_prime_u64(p) && p <= bound);
                    }
                }
                SmoothOutcome::NotSmooth(rest) => {
                    prop_assert!(rest > BigUint::from(bound));
                    prop_assert!((BigInt::from(z) % BigInt::from(rest)).is_zero());
                }
            }
        }
    }
}
