//! Pair sampling, relation building and the stochastic-deepening search.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{char_bits, find_roots_mod_p, CharacterSpec};
use crate::error::{Error, Result};
use crate::polyselect::HomogeneousPoly;
use crate::smooth::{factor_if_smooth, Factorization, SmoothOutcome, TrialDivider};

/// Draws handled by one RNG stream; the unit of parallel work.
pub const CHUNK_DRAWS: u64 = 2048;

// ---------------------------------------------------------------- sampling

/// Uniform sampler over `{(a, b) : 0 ≤ a < |b|, |b| ∈ [⌈A/2⌉, A]}`.
#[derive(Clone, Copy, Debug)]
pub struct PairSampler {
    lo: u64,
    hi: u64,
}

impl PairSampler {
    pub fn new(a_bound: u64) -> Self {
        let hi = a_bound.max(1);
        PairSampler { lo: hi.div_ceil(2).max(1), hi }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, i64) {
        // |b| has weight |b|; rejection against the largest weight
        let k = loop {
            let k = rng.gen_range(self.lo..=self.hi);
            if rng.gen_range(0..self.hi) < k {
                break k;
            }
        };
        let a = rng.gen_range(0..k);
        let b = if rng.gen::<bool>() { k as i64 } else { -(k as i64) };
        (a as i64, b)
    }

    /// Number of pairs in the region.
    pub fn support_size(&self) -> u64 {
        2 * (self.lo..=self.hi).sum::<u64>()
    }
}

pub fn sample_pair<R: Rng + ?Sized>(a_bound: u64, rng: &mut R) -> (i64, i64) {
    PairSampler::new(a_bound).sample(rng)
}

// ---------------------------------------------------------------- relations

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reject {
    NotCoprime,
    RationalNotSmooth,
    AlgebraicNotSmooth,
    ProjectivePrime,
    ZeroValue,
}

impl Reject {
    pub const ALL: [Reject; 5] = [
        Reject::NotCoprime,
        Reject::RationalNotSmooth,
        Reject::AlgebraicNotSmooth,
        Reject::ProjectivePrime,
        Reject::ZeroValue,
    ];

    pub fn code(self) -> usize {
        self as usize
    }
}

mod bits_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(D::Error::custom("character bits must be 0 or 1")),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub a: i64,
    pub b: i64,
    /// Factorization of `a − m b`.
    pub rational: Factorization,
    /// `(r, s, e_{r,s})`, sorted.
    pub algebraic: Vec<(u64, u64, u32)>,
    #[serde(with = "crate::io::bigint_str")]
    pub fab: BigInt,
    #[serde(with = "bits_str")]
    pub char_bits: Vec<bool>,
}

/// Rational primes ≤ B and first-degree primes `(r, s)` with r ≤ B'.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBase {
    pub rational: Vec<u64>,
    pub algebraic: Vec<(u64, u64)>,
    /// Primes ≤ B' dividing `f_d`; they have no columns.
    pub projective: Vec<u64>,
}

impl FactorBase {
    pub fn build(f: &HomogeneousPoly, b: u64, b_prime: u64) -> Self {
        let rational = crate::smooth::primes_to(b);
        let mut algebraic = Vec::new();
        let mut projective = Vec::new();
        for r in crate::smooth::primes_to(b_prime) {
            match find_roots_mod_p(f, r) {
                Some(roots) => algebraic.extend(roots.into_iter().map(|s| (r, s))),
                None => projective.push(r),
            }
        }
        FactorBase { rational, algebraic, projective }
    }

    pub fn rational_index(&self, p: u64) -> Option<usize> {
        self.rational.binary_search(&p).ok()
    }

    pub fn algebraic_index(&self, r: u64, s: u64) -> Option<usize> {
        self.algebraic.binary_search(&(r, s)).ok()
    }
}

/// Precomputed state for testing many pairs against one polynomial.
#[derive(Clone, Debug)]
pub struct RelationBuilder {
    pub f: HomogeneousPoly,
    pub chars: Vec<CharacterSpec>,
    rational_td: TrialDivider,
    algebraic_td: TrialDivider,
    projective: Vec<u64>,
    m_small: Option<i128>,
    coeffs_small: Option<Vec<i128>>,
}

impl RelationBuilder {
    pub fn new(f: &HomogeneousPoly, b: u64, b_prime: u64, chars: Vec<CharacterSpec>) -> Self {
        let projective =
            crate::smooth::primes_to(b_prime).into_iter().filter(|&r| (f.fd() % BigInt::from(r)).is_zero()).collect();
        let small = |v: &BigInt| v.to_i64().map(i128::from);
        RelationBuilder {
            f: f.clone(),
            chars,
            rational_td: TrialDivider::new(b),
            algebraic_td: TrialDivider::new(b_prime),
            projective,
            m_small: small(&f.m),
            coeffs_small: f.coeffs.iter().map(small).collect(),
        }
    }

    fn rational_value(&self, a: i64, b: i64) -> BigInt {
        if let Some(m) = self.m_small {
            if let Some(v) = m.checked_mul(b as i128).and_then(|mb| (a as i128).checked_sub(mb)) {
                return BigInt::from(v);
            }
        }
        BigInt::from(a) - &self.f.m * BigInt::from(b)
    }

    fn algebraic_value(&self, a: i64, b: i64) -> BigInt {
        if let Some(c) = &self.coeffs_small {
            let (a, b) = (a as i128, b as i128);
            let d = c.len() - 1;
            let mut acc = Some(c[d]);
            let mut bpow: Option<i128> = Some(1);
            for i in (0..d).rev() {
                bpow = bpow.and_then(|p| p.checked_mul(b));
                acc = acc
                    .and_then(|v| v.checked_mul(a))
                    .zip(bpow.and_then(|p| p.checked_mul(c[i])))
                    .and_then(|(x, y)| x.checked_add(y));
            }
            if let Some(v) = acc {
                return BigInt::from(v);
            }
        }
        self.f.eval(&BigInt::from(a), &BigInt::from(b))
    }

    fn smooth_part(td: &TrialDivider, v: &BigInt, buf: &mut Vec<(u64, u32)>) -> Option<Factorization> {
        let sign = if v.is_negative() { -1 } else { 1 };
        if let Some(mag) = v.magnitude().to_u64() {
            return td.factor_u64(mag, buf).ok().map(|_| Factorization { sign, factors: buf.clone() });
        }
        match factor_if_smooth(v, td.bound()).ok()? {
            SmoothOutcome::Smooth(f) => Some(f),
            SmoothOutcome::NotSmooth(_) => None,
        }
    }

    /// Test one pair; on success the relation carries its character bits.
    pub fn build(&self, a: i64, b: i64) -> std::result::Result<Relation, Reject> {
        if b == 0 || a.gcd(&b) != 1 {
            return Err(Reject::NotCoprime);
        }
        let rv = self.rational_value(a, b);
        if rv.is_zero() {
            return Err(Reject::ZeroValue);
        }
        let mut buf = Vec::new();
        let rational = Self::smooth_part(&self.rational_td, &rv, &mut buf).ok_or(Reject::RationalNotSmooth)?;
        let fab = self.algebraic_value(a, b);
        if fab.is_zero() {
            return Err(Reject::ZeroValue);
        }
        let alg = Self::smooth_part(&self.algebraic_td, &fab, &mut buf).ok_or(Reject::AlgebraicNotSmooth)?;
        let mut algebraic = Vec::with_capacity(alg.factors.len());
        for &(r, e) in &alg.factors {
            let br = b.rem_euclid(r as i64) as u64;
            if br == 0 {
                return Err(Reject::ProjectivePrime);
            }
            if self.projective.binary_search(&r).is_ok() {
                return Err(Reject::AlgebraicNotSmooth);
            }
            let ar = a.rem_euclid(r as i64) as u64;
            let s = crate::arith::mul_mod(ar, crate::arith::inv_mod(br, r).expect("r prime"), r);
            algebraic.push((r, s, e));
        }
        let char_bits = char_bits(&self.chars, a, b);
        Ok(Relation { a, b, rational, algebraic, fab, char_bits })
    }
}

/// Build a single relation without characters.
pub fn build_relation(
    f: &HomogeneousPoly,
    pair: (i64, i64),
    b: u64,
    b_prime: u64,
) -> std::result::Result<Relation, Reject> {
    RelationBuilder::new(f, b, b_prime, Vec::new()).build(pair.0, pair.1)
}

/// Re-derive every relation invariant from scratch.
pub fn verify_relation(
    rel: &Relation,
    f: &HomogeneousPoly,
    fb: &FactorBase,
    chars: &[CharacterSpec],
    a_bound: Option<u64>,
) -> Result<()> {
    let fail = |msg: String| Err(Error::Consistency(format!("relation ({}, {}): {msg}", rel.a, rel.b)));
    let (a, b) = (BigInt::from(rel.a), BigInt::from(rel.b));
    if rel.b == 0 {
        return fail("b = 0".into());
    }
    if let Some(bound) = a_bound {
        if rel.a < 0 || rel.a >= rel.b.abs() {
            return fail("pair outside 0 <= a < |b|".into());
        }
        let k = rel.b.unsigned_abs();
        if k < bound.div_ceil(2).max(1) || k > bound {
            return fail("|b| outside [A/2, A]".into());
        }
    }
    if !a.gcd(&b).is_one() {
        return fail("gcd(a, b) != 1".into());
    }
    if rel.rational.value() != &a - &f.m * &b {
        return fail("rational factorization does not reproduce a - mb".into());
    }
    for &(p, _) in &rel.rational.factors {
        if fb.rational_index(p).is_none() {
            return fail(format!("rational prime {p} outside the factor base"));
        }
    }
    let fab = f.eval(&a, &b);
    if fab != rel.fab {
        return fail("cached f(a, b) is wrong".into());
    }
    let mut prod = BigInt::one();
    for &(r, s, e) in &rel.algebraic {
        if fb.algebraic_index(r, s).is_none() {
            return fail(format!("({r}, {s}) outside the factor base"));
        }
        let (rr, ss) = (BigInt::from(r), BigInt::from(s));
        if !((&a - &b * &ss) % &rr).is_zero() {
            return fail(format!("a != b s mod {r}"));
        }
        prod *= rr.pow(e);
    }
    if prod != fab.abs() {
        return fail("algebraic exponents do not reproduce |f(a, b)|".into());
    }
    let bits = char_bits(chars, rel.a, rel.b);
    if bits != rel.char_bits {
        return fail("character bits differ".into());
    }
    Ok(())
}

// ---------------------------------------------------------------- search

/// Outcome of one draw inside a search context.
pub enum Draw<T> {
    Accept(T),
    /// Reject code, below [`REJECT_SLOTS`].
    Reject(usize),
}

/// One random (m, f) context: a target and a pair generator.
pub trait SearchContext: Sync {
    type Item: Clone + Send;
    fn target(&self) -> usize;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Draw<Self::Item>;
    /// Deduplication key; `None` keeps every accepted item.
    fn key(&self, item: &Self::Item) -> Option<(i64, i64)>;
}

/// Produces fresh contexts for the deepening schedule.
pub trait ContextFactory {
    type Ctx: SearchContext;
    /// `None` records a failed context (for example a reducible polynomial).
    fn make(&mut self, level: u32, index: u64, seed: u64) -> Option<Self::Ctx>;
    /// Lets the factory end the search early (a factor was found en route).
    fn stop(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub levels: u32,
    pub base_budget: u64,
    /// `Some(ln n)` enables early abort at fraction `1/max(ln n, 8)`.
    pub early_abort_ln_n: Option<f64>,
    pub workers: usize,
    pub seed: u64,
}

/// Reject counters per search level, indexed by the context's reject code.
pub const REJECT_SLOTS: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u32,
    pub contexts: u64,
    pub failed_contexts: u64,
    pub aborted: u64,
    pub draws: u64,
    pub accepted: u64,
    /// `REJECT_SLOTS` counters; for the NFS context, slot `i` is `Reject::ALL[i]`.
    pub rejects: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub levels: Vec<LevelStats>,
}

impl SearchStats {
    pub fn total_draws(&self) -> u64 {
        self.levels.iter().map(|l| l.draws).sum()
    }
}

pub enum SearchResult<C: SearchContext> {
    Success { context: C, items: Vec<C::Item>, level: u32, index: u64 },
    Exhausted,
    Stopped,
}

pub struct SearchOutcome<C: SearchContext> {
    pub result: SearchResult<C>,
    pub stats: SearchStats,
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut z = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        z = z.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z = x ^ (x >> 31);
    }
    z
}

struct ChunkResult<T> {
    /// `255` for an accepted draw, otherwise the reject code.
    codes: Vec<u8>,
    items: Vec<T>,
}

fn run_chunk<C: SearchContext>(ctx: &C, seed: u64, chunk: u64, draws: u64) -> ChunkResult<C::Item> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, chunk]));
    let mut codes = Vec::with_capacity(draws as usize);
    let mut items = Vec::new();
    for _ in 0..draws {
        match ctx.draw(&mut rng) {
            Draw::Accept(item) => {
                codes.push(u8::MAX);
                items.push(item);
            }
            Draw::Reject(code) => {
                assert!(code < REJECT_SLOTS, "reject code {code} out of range");
                codes.push(code as u8)
            }
        }
    }
    ChunkResult { codes, items }
}

/// Result of spending one budget on one context.
pub struct ContextRun<T> {
    pub items: Vec<T>,
    pub draws: u64,
    pub accepted: u64,
    pub rejects: Vec<u64>,
    pub aborted: bool,
    pub success: bool,
}

/// Spend up to `budget` draws on `ctx`, stopping at the exact draw where
/// `target` distinct items exist. Output is independent of `workers`.
pub fn run_context<C: SearchContext>(
    ctx: &C,
    budget: u64,
    seed: u64,
    workers: usize,
    abort_at: Option<u64>,
    initial: Vec<C::Item>,
) -> ContextRun<C::Item> {
    let target = ctx.target();
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut items = Vec::new();
    for it in initial {
        match ctx.key(&it) {
            Some(k) if !seen.insert(k) => {}
            _ => items.push(it),
        }
    }
    let mut run = ContextRun {
        draws: 0,
        accepted: 0,
        rejects: vec![0; REJECT_SLOTS],
        aborted: false,
        success: items.len() >= target,
        items,
    };
    if run.success {
        return run;
    }
    let n_chunks = budget.div_ceil(CHUNK_DRAWS);
    let wave = (workers.max(1) * 2) as u64;
    let mut next = 0u64;
    while next < n_chunks {
        let end = (next + wave).min(n_chunks);
        let draws_in = |c: u64| CHUNK_DRAWS.min(budget - c * CHUNK_DRAWS);
        let results: Vec<ChunkResult<C::Item>> = if workers <= 1 {
            (next..end).map(|c| run_chunk(ctx, seed, c, draws_in(c))).collect()
        } else {
            let mut slots: Vec<Option<ChunkResult<C::Item>>> = (next..end).map(|_| None).collect();
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|t| {
                        let start = next;
                        scope.spawn(move || {
                            (start..end)
                                .filter(|c| (c - start) as usize % workers == t)
                                .map(|c| (c, run_chunk(ctx, seed, c, draws_in(c))))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for h in handles {
                    for (c, r) in h.join().expect("search worker panicked") {
                        slots[(c - next) as usize] = Some(r);
                    }
                }
            });
            slots.into_iter().map(|s| s.expect("every chunk computed")).collect()
        };
        for chunk in results {
            let mut items = chunk.items.into_iter();
            for code in chunk.codes {
                run.draws += 1;
                if code == u8::MAX {
                    run.accepted += 1;
                    let item = items.next().expect("item per accepted draw");
                    match ctx.key(&item) {
                        Some(k) if !seen.insert(k) => {}
                        _ => run.items.push(item),
                    }
                } else {
                    run.rejects[code as usize] += 1;
                }
                if run.items.len() >= target {
                    run.success = true;
                    return run;
                }
                if abort_at == Some(run.draws) {
                    let projected = run.items.len() as f64 * budget as f64 / run.draws as f64;
                    if projected < 0.5 * target as f64 {
                        run.aborted = true;
                        return run;
                    }
                }
            }
        }
        next = end;
    }
    run
}

/// Per-context budget at level `i`: `base · 2^{-i}`, at least one draw.
pub fn level_budget(base: u64, level: u32) -> u64 {
    (base >> level.min(63)).max(1)
}

/// Budget-doubling search over fresh contexts: level `i` tries `2^i`
/// contexts with `base · 2^{-i}` draws each.
pub fn stochastic_search<F: ContextFactory>(factory: &mut F, cfg: &SearchConfig) -> SearchOutcome<F::Ctx> {
    let mut stats = SearchStats::default();
    for level in 0..cfg.levels {
        let budget = level_budget(cfg.base_budget, level);
        let abort_at = cfg.early_abort_ln_n.map(|ln_n| {
            let frac = 1.0 / ln_n.max(8.0);
            ((budget as f64 * frac).ceil() as u64).max(1)
        });
        let mut ls = LevelStats { level, rejects: vec![0; REJECT_SLOTS], ..Default::default() };
        for index in 0..(1u64 << level.min(62)) {
            let ctx_seed = mix_seed(&[cfg.seed, level as u64, index]);
            ls.contexts += 1;
            let Some(ctx) = factory.make(level, index, ctx_seed) else {
                ls.failed_contexts += 1;
                if factory.stop() {
                    stats.levels.push(ls);
                    return SearchOutcome { result: SearchResult::Stopped, stats };
                }
                continue;
            };
            let run = run_context(&ctx, budget, ctx_seed, cfg.workers, abort_at, Vec::new());
            ls.draws += run.draws;
            ls.accepted += run.accepted;
            for (t, r) in ls.rejects.iter_mut().zip(&run.rejects) {
                *t += r;
            }
            if run.aborted {
                ls.aborted += 1;
            }
            if run.success {
                stats.levels.push(ls);
                return SearchOutcome {
                    result: SearchResult::Success { context: ctx, items: run.items, level, index },
                    stats,
                };
            }
        }
        stats.levels.push(ls);
    }
    SearchOutcome { result: SearchResult::Exhausted, stats }
}

/// The NFS search context: one polynomial, its factor base and characters.
pub struct NfsContext {
    pub builder: RelationBuilder,
    pub fb: FactorBase,
    pub sampler: PairSampler,
    pub target: usize,
    pub b: u64,
    pub b_prime: u64,
    pub a_bound: u64,
}

impl NfsContext {
    pub fn new(
        f: &HomogeneousPoly,
        b: u64,
        b_prime: u64,
        a_bound: u64,
        chars: Vec<CharacterSpec>,
        extra: usize,
    ) -> Self {
        let fb = FactorBase::build(f, b, b_prime);
        let target = 2 + fb.rational.len() + fb.algebraic.len() + chars.len() + extra;
        NfsContext {
            builder: RelationBuilder::new(f, b, b_prime, chars),
            fb,
            sampler: PairSampler::new(a_bound),
            target,
            b,
            b_prime,
            a_bound,
        }
    }
}

impl SearchContext for NfsContext {
    type Item = Relation;

    fn target(&self) -> usize {
        self.target
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Draw<Relation> {
        let (a, b) = self.sampler.sample(rng);
        match self.builder.build(a, b) {
            Ok(rel) => Draw::Accept(rel),
            Err(r) => Draw::Reject(r.code()),
        }
    }

    fn key(&self, item: &Relation) -> Option<(i64, i64)> {
        Some((item.a, item.b))
    }
}

/// Canonical order: by `(|b|, b, a)`.
pub fn canonical_sort(rels: &mut [Relation]) {
    rels.sort_by_key(|r| (r.b.unsigned_abs(), r.b, r.a));
}
