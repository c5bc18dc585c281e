//! L-notation, smooth-number density estimates and the parameter set for
//! one factorization attempt.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::arith::ln_big;
use crate::characters::char_count;
use crate::error::{domain, Error, Result};

/// Desk cap on the number of quadratic characters.
pub const DESK_CHAR_CAP: usize = 64;

/// Fewest characters used at desk scale; small `n` get `2·bits(n)` up to the cap.
pub const MIN_DESK_CHARS: usize = 16;

/// Below this size the L-formulas degenerate and fixed floors apply.
pub const TINY_N_BITS: u64 = 16;
const TINY_FLOORS: (u64, u64, u64) = (200, 200, 200);

/// Floors for B, B' and A at desk sizes (n ≥ 2^16). The asymptotic values
/// leave too few pairs in the sampling region to ever fill the matrix.
pub const DESK_FLOORS: (u64, u64, u64) = (2000, 2000, 2000);

/// Upper bound on the per-level budget, as a multiple of the number of
/// distinct pairs in the sampling region.
const BUDGET_REGION_MULTIPLE: u64 = 4;

/// `exp(c · L^a · (ln L)^(1-a))` with `L = ln n` supplied directly.
pub fn l_value_from_log(ln_n: f64, a: f64, c: f64) -> f64 {
    let lnln = ln_n.ln();
    (c * ln_n.powf(a) * lnln.powf(1.0 - a)).exp()
}

/// `L_n(a, c) = exp(c (ln n)^a (ln ln n)^(1-a))`.
pub fn l_value(n: &BigUint, a: f64, c: f64) -> Result<f64> {
    if n < &BigUint::from(16u32) {
        return domain("L-notation needs n >= 16");
    }
    if !(0.0..=1.0).contains(&a) {
        return domain("L-notation exponent must lie in [0, 1]");
    }
    Ok(l_value_from_log(ln_big(n), a, c))
}

const RHO_TERMS: usize = 48;
const RHO_INTERVALS: usize = 100;

/// Taylor coefficients of ρ on each unit interval `[k, k+1]`, expanded
/// about the midpoint `k + 1/2`.
fn rho_table() -> &'static [[f64; RHO_TERMS]] {
    static TABLE: OnceLock<Vec<[f64; RHO_TERMS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(RHO_INTERVALS);
        let mut first = [0.0; RHO_TERMS];
        first[0] = 1.0;
        table.push(first);
        for k in 1..RHO_INTERVALS {
            let prev: &[f64; RHO_TERMS] = &table[k - 1];
            let centre = k as f64 + 0.5;
            let mut a = [0.0; RHO_TERMS];
            // u ρ'(u) = -ρ(u-1), matched term by term in x = u - centre.
            for j in 0..RHO_TERMS - 1 {
                a[j + 1] = -(prev[j] + j as f64 * a[j]) / (centre * (j + 1) as f64);
            }
            let rho_at_k: f64 = horner(prev, 0.5);
            let tail: f64 = horner(&a, -0.5) - a[0];
            a[0] = rho_at_k - tail;
            table.push(a);
        }
        table
    })
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Dickman's ρ, solving `u ρ'(u) = -ρ(u-1)` with ρ = 1 on `[0, 1]`.
pub fn dickman_rho(u: f64) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return domain("dickman_rho needs u >= 0");
    }
    if u <= 1.0 {
        return Ok(1.0);
    }
    let k = u.floor() as usize;
    if k >= RHO_INTERVALS {
        return Ok(0.0);
    }
    let table = rho_table();
    let x = u - k as f64 - 0.5;
    Ok(horner(&table[k], x).max(0.0))
}

/// An exponent pair `(a, c)` naming the size `L_n(a, c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LExp {
    pub a: f64,
    pub c: f64,
}

impl LExp {
    pub fn new(a: f64, c: f64) -> Self {
        LExp { a, c }
    }
}

/// Heuristic probability that an integer of size `value` is `bound`-smooth:
/// `L_n(b - a, d (b - a) / c)^{-1}`, clamped to at most 1.
pub fn cep_density(value: LExp, bound: LExp, n: &BigUint) -> Result<f64> {
    if bound.a >= value.a {
        return domain("smoothness bound exponent must be below the value exponent");
    }
    if bound.c <= 0.0 {
        return domain("smoothness bound coefficient must be positive");
    }
    let gap = value.a - bound.a;
    let l = l_value(n, gap, value.c * gap / bound.c)?;
    Ok((1.0 / l).min(1.0))
}

/// Every tuning constant for one factorization attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfsParams {
    #[serde(with = "crate::io::biguint_str")]
    pub n: BigUint,
    pub d: usize,
    pub delta: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub beta: f64,
    pub beta_prime: f64,
    /// Rational smoothness bound.
    pub b: u64,
    /// Algebraic smoothness bound.
    pub b_prime: u64,
    /// Randomisation half-range: each `c_i` lies in `[-H, H)`.
    pub h: u64,
    /// Pair bound: `|b| ∈ [⌈A/2⌉, A]`, `0 ≤ a < |b|`.
    pub a: u64,
    pub char_count: usize,
    pub deepening_levels: u32,
    pub budget_per_level: u64,
    pub batch_k: usize,
    pub early_abort: bool,
    pub faithful_characters: bool,
    /// Outer restarts of the whole deepening schedule before giving up.
    pub max_rounds: u32,
    /// Fresh kernel draws per relation set before collecting again.
    pub kernel_retries: u32,
}

/// Optimum constants with zero slack.
pub fn optimal_constants() -> (f64, f64, f64, f64, f64) {
    let delta = 3f64.cbrt();
    let kappa = 1.0 / 3f64.cbrt();
    let s = (8.0f64 / 9.0).cbrt();
    (delta, kappa, s, s, s)
}

/// `λ = 2 max(2δ/3, β, β')`, the run-time exponent when the other
/// constraint is tight.
pub fn runtime_exponent(delta: f64, beta: f64, beta_prime: f64) -> f64 {
    2.0 * (2.0 * delta / 3.0).max(beta).max(beta_prime)
}

/// Partial parameter set; `None` means "derive".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamOverrides {
    values: BTreeMap<String, String>,
}

pub const PARAM_KEYS: &[&str] = &[
    "d",
    "delta",
    "kappa",
    "sigma",
    "beta",
    "beta_prime",
    "B",
    "B_prime",
    "H",
    "A",
    "char_count",
    "deepening_levels",
    "budget_per_level",
    "batch_k",
    "early_abort",
    "faithful_characters",
    "max_rounds",
    "kernel_retries",
];

impl ParamOverrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !PARAM_KEYS.contains(&key) {
            return Err(Error::Parse(format!("unknown parameter `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Parse a `key=value` assignment.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{assignment}`")))?;
        self.set(k.trim(), v)
    }

    /// Parse a config file body: one `key=value` per line, `#` comments.
    pub fn parse_config(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.set_assignment(line)?;
        }
        Ok(())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`"))),
        }
    }
}

/// Nearest odd integer to `x`, ties and anything below 3 mapped to 3.
pub fn nearest_odd_degree(x: f64) -> usize {
    let k = ((x - 1.0) / 2.0 - 0.5).ceil().max(0.0);
    ((2.0 * k + 1.0) as usize).max(3)
}

/// Number of pairs `(a, b)` with `0 ≤ a < |b|`, `|b| ∈ [⌈A/2⌉, A]`.
pub fn pair_region_size(a_bound: u64) -> u64 {
    let lo = a_bound.div_ceil(2).max(1);
    let sum: u64 = (lo..=a_bound).sum();
    2 * sum
}

pub fn derive_params(n: &BigUint, overrides: &ParamOverrides) -> Result<NfsParams> {
    let (d0, k0, s0, b0, bp0) = optimal_constants();
    let delta: f64 = overrides.get("delta")?.unwrap_or(d0);
    let kappa: f64 = overrides.get("kappa")?.unwrap_or(k0);
    let sigma: f64 = overrides.get("sigma")?.unwrap_or(s0);
    let beta: f64 = overrides.get("beta")?.unwrap_or(b0);
    let beta_prime: f64 = overrides.get("beta_prime")?.unwrap_or(bp0);
    for (name, v) in [("delta", delta), ("kappa", kappa), ("sigma", sigma), ("beta", beta), ("beta_prime", beta_prime)]
    {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Constraint { constraint: "positive constants", detail: format!("{name} = {v}") });
        }
    }
    // κ > 1/δ holds with equality at the zero-slack optimum.
    if kappa < 1.0 / delta - 1e-12 {
        return Err(Error::Constraint {
            constraint: "kappa > 1/delta",
            detail: format!("kappa = {kappa}, 1/delta = {}", 1.0 / delta),
        });
    }
    if 1.0 / delta >= (kappa + sigma * delta) / 2.0 {
        return Err(Error::Constraint {
            constraint: "1/delta < (kappa + sigma*delta)/2",
            detail: format!("1/delta = {}, (kappa + sigma*delta)/2 = {}", 1.0 / delta, (kappa + sigma * delta) / 2.0),
        });
    }

    let usable = n >= &BigUint::from(16u32);
    let ln_n = if usable { ln_big(n) } else { 16f64.ln() };
    let lnln = ln_n.ln();
    let l = |a: f64, c: f64| l_value_from_log(ln_n, a, c);

    let d_auto = nearest_odd_degree(delta * (ln_n / lnln).cbrt());
    let mut b = l(1.0 / 3.0, beta).ceil() as u64;
    let mut b_prime = l(1.0 / 3.0, beta_prime).ceil() as u64;
    let mut a = l(1.0 / 3.0, sigma).ceil() as u64;
    let h_auto = (l(2.0 / 3.0, kappa - 1.0 / delta).ceil() as u64).max(1);
    let floors = if n.bits() < TINY_N_BITS { TINY_FLOORS } else { DESK_FLOORS };
    b = b.max(floors.0);
    b_prime = b_prime.max(floors.1);
    a = a.max(floors.2);

    let d: usize = overrides.get("d")?.unwrap_or(d_auto);
    let b: u64 = overrides.get("B")?.unwrap_or(b);
    let b_prime: u64 = overrides.get("B_prime")?.unwrap_or(b_prime);
    let a: u64 = overrides.get("A")?.unwrap_or(a);
    let h: u64 = overrides.get("H")?.unwrap_or(h_auto);
    let faithful: bool = overrides.get("faithful_characters")?.unwrap_or(false);

    let formula = if usable { char_count(n, d, delta, kappa)? } else { 1 };
    let desk_cap = DESK_CHAR_CAP.min((2 * n.bits() as usize).max(MIN_DESK_CHARS));
    let cc_auto = if faithful { formula } else { formula.min(desk_cap) };
    let char_count_v: usize = overrides.get("char_count")?.unwrap_or(cc_auto);

    let tau = 2.0 * sigma - 1.0 / (3.0 * delta * beta_prime) - (sigma * delta + kappa) / (3.0 * beta);
    let spread = l(1.0 / 3.0, (2.0 * sigma - tau).max(0.0));
    let levels_auto = 1 + spread.log2().ceil().max(0.0) as u32;
    let rate_exp = 1.0 / (3.0 * delta * beta) + (kappa + sigma * delta) / (3.0 * beta_prime);
    let budget_formula = 4.0 * (b + b_prime) as f64 * l(1.0 / 3.0, rate_exp) * (4.0 / 3.0) * lnln.max(1.0);
    let budget_cap = BUDGET_REGION_MULTIPLE * pair_region_size(a);
    let budget_auto = (budget_formula.ceil() as u64).clamp(pair_region_size(a), budget_cap);
    let batch_auto = ((4.0 / 3.0 * lnln).ceil() as usize).max(3);

    let params = NfsParams {
        n: n.clone(),
        d,
        delta,
        kappa,
        sigma,
        beta,
        beta_prime,
        b,
        b_prime,
        h,
        a,
        char_count: char_count_v,
        deepening_levels: overrides.get("deepening_levels")?.unwrap_or(levels_auto),
        budget_per_level: overrides.get("budget_per_level")?.unwrap_or(budget_auto),
        batch_k: overrides.get("batch_k")?.unwrap_or(batch_auto),
        early_abort: overrides.get("early_abort")?.unwrap_or(true),
        faithful_characters: faithful,
        max_rounds: overrides.get("max_rounds")?.unwrap_or(4),
        kernel_retries: overrides.get("kernel_retries")?.unwrap_or(32),
    };
    params.validate()?;
    Ok(params)
}

impl NfsParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |constraint: &'static str, detail: String| Err(Error::Constraint { constraint, detail });
        if self.d < 3 || self.d.is_multiple_of(2) {
            return fail("d odd and >= 3", format!("d = {}", self.d));
        }
        if self.b < 2 || self.b_prime < 2 {
            return fail("B, B' >= 2", format!("B = {}, B' = {}", self.b, self.b_prime));
        }
        if self.a < 2 {
            return fail("A >= 2", format!("A = {}", self.a));
        }
        if self.h < 1 {
            return fail("H >= 1", format!("H = {}", self.h));
        }
        if self.batch_k < 3 {
            return fail("batch_k >= 3", format!("batch_k = {}", self.batch_k));
        }
        if self.deepening_levels < 1 || self.budget_per_level < 1 {
            return fail(
                "levels, budget >= 1",
                format!("levels = {}, budget = {}", self.deepening_levels, self.budget_per_level),
            );
        }
        if self.char_count < 1 {
            return fail("char_count >= 1", format!("char_count = {}", self.char_count));
        }
        if self.kappa < 1.0 / self.delta - 1e-12 {
            return fail("kappa > 1/delta", format!("kappa = {}", self.kappa));
        }
        if 1.0 / self.delta >= (self.kappa + self.sigma * self.delta) / 2.0 {
            return fail("1/delta < (kappa + sigma*delta)/2", format!("delta = {}", self.delta));
        }
        Ok(())
    }

    /// Relations needed before the matrix is guaranteed a kernel, given the
    /// number of first-degree primes in the factor base.
    pub fn target_relations(&self, rational_primes: usize, algebraic_primes: usize) -> usize {
        2 + rational_primes + algebraic_primes + self.char_count + 16
    }
}

impl fmt::Display for NfsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "d={}", self.d)?;
        writeln!(f, "delta={}", self.delta)?;
        writeln!(f, "kappa={}", self.kappa)?;
        writeln!(f, "sigma={}", self.sigma)?;
        writeln!(f, "beta={}", self.beta)?;
        writeln!(f, "beta_prime={}", self.beta_prime)?;
        writeln!(f, "B={}", self.b)?;
        writeln!(f, "B_prime={}", self.b_prime)?;
        writeln!(f, "H={}", self.h)?;
        writeln!(f, "A={}", self.a)?;
        writeln!(f, "char_count={}", self.char_count)?;
        writeln!(f, "deepening_levels={}", self.deepening_levels)?;
        writeln!(f, "budget_per_level={}", self.budget_per_level)?;
        writeln!(f, "batch_k={}", self.batch_k)?;
        writeln!(f, "early_abort={}", self.early_abort)?;
        writeln!(f, "faithful_characters={}", self.faithful_characters)?;
        writeln!(f, "max_rounds={}", self.max_rounds)?;
        write!(f, "kernel_retries={}", self.kernel_retries)
    }
}
