//! Dixon's random-squares method.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{dependencies, SparseMatrixGF2};
use crate::smooth::{factor_if_smooth, primes_to, SmoothOutcome, TrialDivider};
use crate::sqrt::{extract_factors, Extracted};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DixonStats {
    pub draws: u64,
    pub relations: u64,
    pub congruences: u64,
    pub fruitful: u64,
    /// Congruences failing the independent `x² ≡ y² (mod n)` recheck.
    pub violations: u64,
}

struct DixonRelation {
    x: BigUint,
    factors: Vec<(u64, u32)>,
}

fn smooth_square<R: Rng + ?Sized>(
    n: &BigUint,
    td: &TrialDivider,
    rng: &mut R,
    buf: &mut Vec<(u64, u32)>,
) -> Result<Option<DixonRelation>, BigUint> {
    let x = rng.gen_biguint_range(&BigUint::one(), n);
    let g = x.gcd(n);
    if !g.is_one() {
        return Err(g);
    }
    let z = &x * &x % n;
    let factors = match z.to_u64() {
        Some(v) => match td.factor_u64(v, buf) {
            Ok(()) => buf.clone(),
            Err(_) => return Ok(None),
        },
        None => match factor_if_smooth(&BigInt::from(z), td.bound()) {
            Ok(SmoothOutcome::Smooth(f)) => f.factors,
            _ => return Ok(None),
        },
    };
    Ok(Some(DixonRelation { x, factors }))
}

/// Try to split the odd composite `n` with factor base primes `≤ bound`.
pub fn dixon_split<R: Rng + ?Sized>(
    n: &BigUint,
    bound: u64,
    max_draws: u64,
    kernel_retries: u32,
    rng: &mut R,
    stats: &mut DixonStats,
) -> Option<BigUint> {
    let primes = primes_to(bound);
    for &p in &primes {
        let pb = BigUint::from(p);
        if (n % &pb).is_zero() && &pb != n {
            return Some(pb);
        }
    }
    let index: BTreeMap<u64, usize> = primes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let td = TrialDivider::new(bound);
    let mut rels: Vec<DixonRelation> = Vec::new();
    let mut target = primes.len() + 10;
    let mut buf = Vec::new();
    while stats.draws < max_draws {
        while rels.len() < target && stats.draws < max_draws {
            stats.draws += 1;
            match smooth_square(n, &td, rng, &mut buf) {
                Err(g) => return Some(g),
                Ok(Some(r)) => {
                    stats.relations += 1;
                    rels.push(r);
                }
                Ok(None) => {}
            }
        }
        if rels.len() < target {
            break;
        }
        let rows = rels
            .iter()
            .map(|r| {
                let mut row: Vec<u32> = r.factors.iter().filter(|f| f.1 % 2 == 1).map(|f| index[&f.0] as u32).collect();
                row.sort_unstable();
                row
            })
            .collect();
        let m = SparseMatrixGF2::new(primes.len(), rows).expect("well-formed rows");
        for _ in 0..kernel_retries {
            let Ok(deps) = dependencies(&m, 4, rng) else { break };
            for dep in deps {
                let mut x = BigUint::one();
                let mut exps: BTreeMap<u64, u64> = BTreeMap::new();
                for i in dep.ones() {
                    x = x * &rels[i].x % n;
                    for &(p, e) in &rels[i].factors {
                        *exps.entry(p).or_default() += e as u64;
                    }
                }
                let mut y = BigUint::one();
                for (p, e) in exps {
                    debug_assert!(e % 2 == 0);
                    y = y * BigUint::from(p).modpow(&BigUint::from(e / 2), n) % n;
                }
                stats.congruences += 1;
                if (&x * &x) % n != (&y * &y) % n {
                    stats.violations += 1;
                }
                if let Extracted::Factors(fs) = extract_factors(&x, &y, n) {
                    stats.fruitful += 1;
                    return fs.into_iter().next();
                }
            }
        }
        target += 10;
    }
    None
}
