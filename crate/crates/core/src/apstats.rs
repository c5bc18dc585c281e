//! Smooth numbers in residue classes: good/bad moduli and bad fractions.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::euler_phi;
use crate::error::{domain, Result};
use crate::smooth::{for_each_smooth, primes_to, PSI_LIMIT};

/// Largest `x` accepted by the sieve-based second counter.
pub const SIEVE_LIMIT: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Good,
    Bad,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub r: u64,
    pub phi_r: u64,
    /// Points of the F range that were classified.
    pub xs: Vec<u64>,
    pub y: u64,
    pub epsilon: f64,
    /// `Ψ_r(x, y)` at the largest point.
    pub psi_r: u64,
    pub max_dev: f64,
    pub verdict: Verdict,
    /// `Ψ(x, y; r, a)` for every `a ∈ [0, r)` at the largest point.
    pub counts: Vec<u64>,
}

/// Which counter produced the residue table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counter {
    /// Depth-first enumeration over prime products.
    Enumerate,
    /// Largest-prime-factor sieve over `[1, x]`.
    Sieve,
}

/// `Ψ(x, y; r, a)` for all `a` by the sieve: independent of the enumeration.
pub fn residue_counts_sieve(x: u64, y: u64, r: u64) -> Result<Vec<u64>> {
    if r == 0 || y < 2 || x == 0 {
        return domain("need r >= 1, y >= 2, x >= 1");
    }
    if x > SIEVE_LIMIT {
        return domain(format!("sieve counter refuses x > {SIEVE_LIMIT}"));
    }
    // rough[z] holds the part of z left after dividing out primes ≤ y
    let mut rest: Vec<u32> = (0..=x as u32).collect();
    for p in primes_to(y.min(x)) {
        let mut pk = p;
        while pk <= x {
            let mut z = pk;
            while z <= x {
                rest[z as usize] /= p as u32;
                z += pk;
            }
            match pk.checked_mul(p) {
                Some(v) => pk = v,
                None => break,
            }
        }
    }
    let mut counts = vec![0u64; r as usize];
    for z in 1..=x {
        if rest[z as usize] == 1 {
            counts[(z % r) as usize] += 1;
        }
    }
    Ok(counts)
}

fn residue_counts(x: u64, y: u64, r: u64, counter: Counter) -> Result<Vec<u64>> {
    match counter {
        Counter::Enumerate => crate::smooth::smooth_residue_counts(x, y, r),
        Counter::Sieve => residue_counts_sieve(x, y, r),
    }
}

/// `(Ψ_r, max_a |Ψ(·; r, a) φ(r)/Ψ_r − 1|)` over `a` coprime to `r`.
pub fn deviation(counts: &[u64], r: u64) -> (u64, Option<f64>) {
    let phi = euler_phi(r);
    let psi_r: u64 = (0..r).filter(|a| a.gcd(&r) == 1).map(|a| counts[a as usize]).sum();
    if psi_r == 0 {
        return (0, None);
    }
    let mean = psi_r as f64 / phi as f64;
    let dev =
        (0..r).filter(|a| a.gcd(&r) == 1).map(|a| (counts[a as usize] as f64 / mean - 1.0).abs()).fold(0.0, f64::max);
    (psi_r, Some(dev))
}

fn report_from_counts(
    r: u64,
    xs: Vec<u64>,
    y: u64,
    eps: f64,
    per_point: &[(Vec<u64>, u64, Option<f64>)],
) -> ModulusReport {
    let mut max_dev = 0.0f64;
    let mut indeterminate = false;
    for (_, _, d) in per_point {
        match d {
            Some(d) => max_dev = max_dev.max(*d),
            None => indeterminate = true,
        }
    }
    let verdict = if indeterminate {
        Verdict::Indeterminate
    } else if max_dev <= eps {
        Verdict::Good
    } else {
        Verdict::Bad
    };
    let (counts, psi_r, _) = per_point.last().cloned().expect("at least one point");
    ModulusReport { r, phi_r: euler_phi(r), xs, y, epsilon: eps, psi_r, max_dev, verdict, counts }
}

fn check_args(r: u64, x: u64, y: u64) -> Result<()> {
    if r < 2 {
        return domain("modulus must be at least 2");
    }
    if y < 2 {
        return domain("y must be at least 2");
    }
    if x == 0 || x > PSI_LIMIT {
        return domain(format!("x must lie in [1, {PSI_LIMIT}]"));
    }
    Ok(())
}

/// Classify `r` at the single point `F = x`.
pub fn classify_modulus(r: u64, x: u64, y: u64, epsilon: f64) -> Result<ModulusReport> {
    classify_modulus_with(r, x, y, epsilon, Counter::Enumerate)
}

pub fn classify_modulus_with(r: u64, x: u64, y: u64, epsilon: f64, counter: Counter) -> Result<ModulusReport> {
    check_args(r, x, y)?;
    let counts = residue_counts(x, y, r, counter)?;
    let (psi_r, dev) = deviation(&counts, r);
    Ok(report_from_counts(r, vec![x], y, epsilon, &[(counts, psi_r, dev)]))
}

/// Classification points for the range `[x_lo, x_hi]`: both ends and the
/// powers of two strictly inside.
pub fn range_points(x_lo: u64, x_hi: u64) -> Vec<u64> {
    let mut pts = vec![x_lo];
    let mut p = 1u64;
    while p <= x_lo {
        p <<= 1;
    }
    while p < x_hi {
        pts.push(p);
        p <<= 1;
    }
    if x_hi != x_lo {
        pts.push(x_hi);
    }
    pts
}

/// Good near the range: good at every point of [`range_points`].
pub fn classify_modulus_near(r: u64, x_lo: u64, x_hi: u64, y: u64, epsilon: f64) -> Result<ModulusReport> {
    if x_lo > x_hi {
        return domain("empty F range");
    }
    check_args(r, x_hi, y)?;
    let xs = range_points(x_lo.max(1), x_hi);
    let per: Vec<_> = xs
        .iter()
        .map(|&x| {
            let counts = residue_counts(x, y, r, Counter::Enumerate)?;
            let (psi_r, dev) = deviation(&counts, r);
            Ok((counts, psi_r, dev))
        })
        .collect::<Result<_>>()?;
    Ok(report_from_counts(r, xs, y, epsilon, &per))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadFractionReport {
    pub x: u64,
    pub y: u64,
    pub epsilon: f64,
    pub smooth_bound: u64,
    pub psi: u64,
    pub moduli: Vec<ModulusReport>,
    pub good: usize,
    pub bad: usize,
    pub indeterminate: usize,
    pub good_fraction: f64,
    pub bad_fraction: f64,
    /// `Σ_r max_a |Ψ(x, y; r, a) − Ψ_r(x, y)/φ(r)|`.
    pub restricted_deviation_sum: f64,
    /// `Σ_a Ψ(x, y; r, a) = Ψ(x, y)` held for every modulus.
    pub partition_identity_holds: bool,
}

fn is_smooth(mut r: u64, bound: u64) -> bool {
    for p in primes_to(bound) {
        while r.is_multiple_of(p) {
            r /= p;
        }
    }
    r == 1
}

/// Census over every `smooth_bound`-smooth modulus in `[r_min, r_max]` at `F = x`.
pub fn bad_fraction_report(
    r_min: u64,
    r_max: u64,
    smooth_bound: u64,
    x: u64,
    y: u64,
    epsilon: f64,
) -> Result<BadFractionReport> {
    bad_fraction_report_near(r_min, r_max, smooth_bound, x, x, y, epsilon)
}

/// As [`bad_fraction_report`], but each modulus must be good at every point
/// of [`range_points`]`(x_lo, x_hi)`. Smooth numbers are enumerated once.
pub fn bad_fraction_report_near(
    r_min: u64,
    r_max: u64,
    smooth_bound: u64,
    x_lo: u64,
    x_hi: u64,
    y: u64,
    epsilon: f64,
) -> Result<BadFractionReport> {
    let moduli: Vec<u64> = (r_min.max(2)..=r_max).filter(|&r| is_smooth(r, smooth_bound)).collect();
    if moduli.is_empty() {
        return domain("no smooth moduli in range");
    }
    if x_lo > x_hi {
        return domain("empty F range");
    }
    check_args(moduli[0], x_hi, y)?;
    let xs = range_points(x_lo.max(1), x_hi);
    let mut smooth = Vec::new();
    for_each_smooth(x_hi, y, |z| smooth.push(z))?;
    smooth.sort_unstable();
    // prefix lengths: smooth[..cut[i]] are the smooth numbers ≤ xs[i]
    let cuts: Vec<usize> = xs.iter().map(|&x| smooth.partition_point(|&z| z <= x)).collect();
    let psi = smooth.len() as u64;
    let mut reports = Vec::with_capacity(moduli.len());
    let mut sum = 0.0;
    let mut partition = true;
    for &r in &moduli {
        let mut counts = vec![0u64; r as usize];
        let mut per_point = Vec::with_capacity(xs.len());
        let mut done = 0;
        for &cut in &cuts {
            for &z in &smooth[done..cut] {
                counts[(z % r) as usize] += 1;
            }
            done = cut;
            partition &= counts.iter().sum::<u64>() == cut as u64;
            let (psi_r, dev) = deviation(&counts, r);
            per_point.push((counts.clone(), psi_r, dev));
        }
        let (counts, psi_r, _) = per_point.last().unwrap();
        let mean = *psi_r as f64 / euler_phi(r) as f64;
        sum += (0..r).filter(|a| a.gcd(&r) == 1).map(|a| (counts[a as usize] as f64 - mean).abs()).fold(0.0, f64::max);
        reports.push(report_from_counts(r, xs.clone(), y, epsilon, &per_point));
    }
    let good = reports.iter().filter(|m| m.verdict == Verdict::Good).count();
    let bad = reports.iter().filter(|m| m.verdict == Verdict::Bad).count();
    let total = reports.len() as f64;
    Ok(BadFractionReport {
        x: x_hi,
        y,
        epsilon,
        smooth_bound,
        psi,
        good,
        bad,
        indeterminate: reports.len() - good - bad,
        good_fraction: good as f64 / total,
        bad_fraction: bad as f64 / total,
        restricted_deviation_sum: sum,
        partition_identity_holds: partition,
        moduli: reports,
    })
}

/// CSV with columns `r,phi_r,psi_r,max_dev,verdict`.
pub fn to_csv(report: &BadFractionReport) -> String {
    let mut s = String::from("r,phi_r,psi_r,max_dev,verdict\n");
    for m in &report.moduli {
        s.push_str(&format!("{},{},{},{:.6},{:?}\n", m.r, m.phi_r, m.psi_r, m.max_dev, m.verdict));
    }
    s
}
