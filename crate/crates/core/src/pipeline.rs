//! End-to-end driver: screening, NFS or Dixon splitting, recursion to a full
//! factorization, and the report written by the CLI.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, ln_big, perfect_power};
use crate::characters::{sample_characters, CharacterSpec};
use crate::dixon::{dixon_split, DixonStats};
use crate::error::{Error, Result};
use crate::io::{read_jsonl, write_jsonl};
use crate::linalg::{assemble_matrix, dependency_vector, find_dependencies, BitVec, Solver};
use crate::params::{derive_params, NfsParams, ParamOverrides};
use crate::polyselect::{
    base_m_expansion, choose_m, factor_from_witness, is_irreducible, randomize_poly, HomogeneousPoly, Irreducibility,
};
use crate::relations::{
    canonical_sort, mix_seed, run_context, stochastic_search, verify_relation, ContextFactory, NfsContext, Reject,
    Relation, SearchConfig, SearchResult, SearchStats,
};
use crate::sqrt::{congruence, extract_factors, verify_in_alpha, CongruenceOfSquares, Extracted};

/// Trial division limit applied by [`factor`].
pub const TRIAL_LIMIT: u64 = 10_000;
/// Default algorithm switch point.
pub const DIXON_BELOW_BITS: u64 = 24;
/// Slack rows over the column count.
pub const EXTRA_RELATIONS: usize = 16;

/// Wall clock for the optional timing block. Reads zero on wasm32, which
/// has no monotonic clock in std.
#[derive(Clone, Copy)]
struct Clock {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Clock {
    fn now() -> Self {
        Clock {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64() * 1e3;
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Factored,
    Prime,
    PerfectPower,
    Exhausted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    #[default]
    Auto,
    Nfs,
    Dixon,
}

#[derive(Clone, Debug, Default)]
pub struct FactorConfig {
    pub algo: Algo,
    pub seed: u64,
    pub overrides: ParamOverrides,
    pub workers: usize,
    /// Dixon factor base bound; derived from `n` when absent.
    pub dixon_bound: Option<u64>,
    pub solver: Solver,
    pub relations_in: Option<PathBuf>,
    pub relations_out: Option<PathBuf>,
    /// Adds wall-clock timings to the report (breaks byte-identical output).
    pub timing: bool,
}

/// Per-stage counters, summed over every split attempted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounters {
    pub trial_division_factors: u64,
    pub factor_base_hits: u64,
    pub nfs_splits: u64,
    pub dixon_splits: u64,
    pub rounds: u64,
    pub contexts: u64,
    pub failed_contexts: u64,
    pub zero_leading: u64,
    pub reducible_polys: u64,
    pub witness_factors: u64,
    pub character_failures: u64,
    pub aborted_contexts: u64,
    pub draws: u64,
    pub accepted: u64,
    pub rejects: BTreeMap<String, u64>,
    pub relations_loaded: u64,
    pub matrix_rows: u64,
    pub matrix_cols: u64,
    pub kernel_vectors: u64,
    pub not_square: u64,
    /// Independent recheck of `x² ≡ y² (mod n)` on every emitted congruence.
    pub congruence_checks: u64,
    pub congruence_violations: u64,
    pub alpha_checks: u64,
    pub alpha_violations: u64,
    pub dixon: DixonStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub search_ms: f64,
    pub linalg_ms: f64,
    pub sqrt_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    #[serde(with = "crate::io::biguint_str")]
    pub n: BigUint,
    pub status: Status,
    /// Prime factors with multiplicity, ascending. An unsplit composite is
    /// kept when the status is `Exhausted`.
    #[serde(with = "crate::io::biguint_vec_str")]
    pub factors: Vec<BigUint>,
    pub seed: u64,
    pub algorithm: String,
    pub congruences_tried: u64,
    pub fruitful_count: u64,
    pub counters: StageCounters,
    pub search: Vec<SearchStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl FactorReport {
    fn new(n: &BigUint, seed: u64, algorithm: &str) -> Self {
        FactorReport {
            n: n.clone(),
            status: Status::Exhausted,
            factors: Vec::new(),
            seed,
            algorithm: algorithm.to_string(),
            congruences_tried: 0,
            fruitful_count: 0,
            counters: StageCounters::default(),
            search: Vec::new(),
            timing: None,
        }
    }

    /// Recheck the factor list against `n`.
    pub fn check(&self) -> Result<()> {
        match self.status {
            Status::Factored | Status::Prime | Status::PerfectPower => {
                let prod: BigUint = self.factors.iter().product();
                if prod != self.n {
                    return Err(Error::Consistency("factors do not multiply to n".into()));
                }
                if let Some(f) = self.factors.iter().find(|f| !is_prime(f)) {
                    return Err(Error::Consistency(format!("factor {f} is not prime")));
                }
                Ok(())
            }
            Status::Exhausted => Ok(()),
        }
    }
}

/// `(valid, fruitful)`: `x² ≡ y²` and `x ≢ ±y (mod n)`.
pub fn verify_congruence(x: &BigUint, y: &BigUint, n: &BigUint) -> (bool, bool) {
    let valid = (x * x) % n == (y * y) % n;
    if !valid {
        return (false, false);
    }
    let (x, y) = (x % n, y % n);
    let neg_y = (n - &y) % n;
    (true, x != y && x != neg_y)
}

/// Header line of a relations file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationsHeader {
    #[serde(with = "crate::io::biguint_str")]
    pub n: BigUint,
    pub poly: HomogeneousPoly,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "B_prime")]
    pub b_prime: u64,
    #[serde(rename = "A")]
    pub a: u64,
    pub characters: Vec<CharacterSpec>,
}

/// Builds random `(m, f)` contexts for the search.
struct NfsFactory<'a> {
    n: &'a BigUint,
    params: &'a NfsParams,
    witness: Option<BigUint>,
    counters: &'a mut StageCounters,
}

impl ContextFactory for NfsFactory<'_> {
    type Ctx = NfsContext;

    fn make(&mut self, _level: u32, _index: u64, seed: u64) -> Option<NfsContext> {
        let p = self.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = choose_m(self.n, p.d, &mut rng).ok()?;
        let fhat = base_m_expansion(self.n, &m, p.d).ok()?;
        let f = randomize_poly(&fhat, p.h, &mut rng);
        if f.fd().is_zero() {
            self.counters.zero_leading += 1;
            return None;
        }
        let g = BigInt::from(self.n.clone()).gcd(f.fd());
        if !g.is_one() {
            self.witness = g.to_biguint();
            self.counters.witness_factors += 1;
            return None;
        }
        match is_irreducible(&f).ok()? {
            Irreducibility::Irreducible => {}
            Irreducibility::Reducible(w) => {
                self.counters.reducible_polys += 1;
                if let Some(q) = factor_from_witness(&f, &w) {
                    self.counters.witness_factors += 1;
                    self.witness = Some(q);
                }
                return None;
            }
        }
        let chars = match sample_characters(&f, p.char_count, p.b_prime, p.faithful_characters, &mut rng) {
            Ok(c) => c,
            Err(_) => {
                self.counters.character_failures += 1;
                return None;
            }
        };
        Some(NfsContext::new(&f, p.b, p.b_prime, p.a, chars, EXTRA_RELATIONS))
    }

    fn stop(&self) -> bool {
        self.witness.is_some()
    }
}

/// Congruences gathered for the fruitfulness statistic.
#[derive(Clone, Debug, Default)]
pub struct CensusReport {
    pub congruences: Vec<CongruenceOfSquares>,
    pub not_square: u64,
    pub alpha_checks: u64,
    pub alpha_violations: u64,
    pub kernel_draws: u64,
}

impl CensusReport {
    pub fn fruitful(&self) -> usize {
        self.congruences.iter().filter(|c| c.fruitful).count()
    }
}

/// Mutable state of one factorization run.
struct Run<'a> {
    cfg: &'a FactorConfig,
    report: FactorReport,
    timing: Timing,
    splits: u64,
    resume_used: bool,
}

enum SubsetOutcome {
    Factor(BigUint),
    Trivial,
    NotSquare,
}

impl<'a> Run<'a> {
    fn new(n: &BigUint, cfg: &'a FactorConfig, algorithm: &str) -> Self {
        Run {
            cfg,
            report: FactorReport::new(n, cfg.seed, algorithm),
            timing: Timing::default(),
            splits: 0,
            resume_used: false,
        }
    }

    fn workers(&self) -> usize {
        self.cfg.workers.max(1)
    }

    fn absorb_search(&mut self, stats: SearchStats) {
        let c = &mut self.report.counters;
        for l in &stats.levels {
            c.contexts += l.contexts;
            c.failed_contexts += l.failed_contexts;
            c.aborted_contexts += l.aborted;
            c.draws += l.draws;
            c.accepted += l.accepted;
            for r in Reject::ALL {
                let count = l.rejects.get(r.code()).copied().unwrap_or(0);
                if count > 0 {
                    *c.rejects.entry(format!("{r:?}")).or_default() += count;
                }
            }
        }
        self.report.search.push(stats);
    }

    fn try_subset(&mut self, f: &HomogeneousPoly, rels: &[Relation], dep: &BitVec) -> Result<SubsetOutcome> {
        let subset: Vec<usize> = dep.ones().collect();
        if subset.is_empty() {
            return Ok(SubsetOutcome::Trivial);
        }
        let t = Clock::now();
        let res = congruence(f, rels, subset);
        self.timing.sqrt_ms += t.elapsed_ms();
        match res {
            Ok((c, root)) => {
                self.report.congruences_tried += 1;
                self.report.counters.congruence_checks += 1;
                if !verify_congruence(&c.x, &c.y, &c.n).0 {
                    self.report.counters.congruence_violations += 1;
                }
                let chosen: Vec<&Relation> = c.subset.iter().map(|&i| &rels[i]).collect();
                self.report.counters.alpha_checks += 1;
                if !verify_in_alpha(f, &chosen, &root.v) {
                    self.report.counters.alpha_violations += 1;
                }
                if c.fruitful {
                    self.report.fruitful_count += 1;
                    if let Extracted::Factors(fs) = extract_factors(&c.x, &c.y, &c.n) {
                        return Ok(SubsetOutcome::Factor(fs[0].clone()));
                    }
                }
                Ok(SubsetOutcome::Trivial)
            }
            Err(Error::NotASquare(_)) => {
                self.report.counters.not_square += 1;
                Ok(SubsetOutcome::NotSquare)
            }
            Err(e) => Err(e),
        }
    }

    /// Matrix, kernel draws, square roots; singletons then pairwise sums.
    fn linear_algebra(
        &mut self,
        n: &BigUint,
        params: &NfsParams,
        ctx: &NfsContext,
        rels: &[Relation],
        seed: u64,
    ) -> Result<Option<BigUint>> {
        let t = Clock::now();
        let m = assemble_matrix(rels, &ctx.fb, ctx.builder.chars.len())?;
        self.report.counters.matrix_rows += m.n_rows() as u64;
        self.report.counters.matrix_cols += m.n_cols as u64;
        self.timing.linalg_ms += t.elapsed_ms();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, 0x11a1]));
        let f = &ctx.builder.f;
        debug_assert_eq!(f.n, BigInt::from(n.clone()));
        for _ in 0..params.kernel_retries {
            let t = Clock::now();
            let deps = match find_dependencies(&m, params.batch_k, self.cfg.solver, &mut rng) {
                Ok(d) => d,
                Err(Error::NoKernel) => return Ok(None),
                Err(e) => return Err(e),
            };
            self.timing.linalg_ms += t.elapsed_ms();
            self.report.counters.kernel_vectors += deps.len() as u64;
            let mut failed = Vec::new();
            for dep in &deps {
                match self.try_subset(f, rels, dep)? {
                    SubsetOutcome::Factor(g) => return Ok(Some(g)),
                    SubsetOutcome::NotSquare => failed.push(dep.clone()),
                    SubsetOutcome::Trivial => {}
                }
            }
            for i in 0..failed.len() {
                for j in i + 1..failed.len() {
                    let mut s = failed[i].clone();
                    s.xor_assign(&failed[j]);
                    if let SubsetOutcome::Factor(g) = self.try_subset(f, rels, &s)? {
                        return Ok(Some(g));
                    }
                }
            }
        }
        Ok(None)
    }

    fn write_relations(&self, n: &BigUint, ctx: &NfsContext, rels: &[Relation]) -> Result<()> {
        let Some(path) = &self.cfg.relations_out else { return Ok(()) };
        let header = RelationsHeader {
            n: n.clone(),
            poly: ctx.builder.f.clone(),
            b: ctx.b,
            b_prime: ctx.b_prime,
            a: ctx.a_bound,
            characters: ctx.builder.chars.clone(),
        };
        let w = BufWriter::new(File::create(path)?);
        write_jsonl(w, &header, rels)
    }

    fn load_relations(&mut self, n: &BigUint, params: &NfsParams) -> Result<Option<(NfsContext, Vec<Relation>)>> {
        let Some(path) = &self.cfg.relations_in else { return Ok(None) };
        if self.resume_used {
            return Ok(None);
        }
        let (header, rels): (RelationsHeader, Vec<Relation>) = read_jsonl(BufReader::new(File::open(path)?))?;
        if &header.n != n {
            return Ok(None);
        }
        self.resume_used = true;
        header.poly.check()?;
        let ctx = NfsContext::new(
            &header.poly,
            header.b,
            header.b_prime,
            header.a,
            header.characters.clone(),
            EXTRA_RELATIONS,
        );
        for r in &rels {
            verify_relation(r, &header.poly, &ctx.fb, &header.characters, Some(header.a))?;
        }
        self.report.counters.relations_loaded += rels.len() as u64;
        let run =
            run_context(&ctx, params.budget_per_level, mix_seed(&[self.cfg.seed, 0x5e5]), self.workers(), None, rels);
        self.report.counters.draws += run.draws;
        self.report.counters.accepted += run.accepted;
        if !run.success {
            return Ok(None);
        }
        let mut items = run.items;
        canonical_sort(&mut items);
        Ok(Some((ctx, items)))
    }

    /// One NFS split attempt on the odd composite `n`.
    fn nfs_split(&mut self, n: &BigUint, seed: u64) -> Result<Option<BigUint>> {
        self.report.counters.nfs_splits += 1;
        let params = derive_params(n, &self.cfg.overrides)?;
        // a factor-base prime dividing n ends the split before any sieving
        for p in crate::smooth::primes_to(params.b.max(params.b_prime)) {
            let pb = BigUint::from(p);
            if (n % &pb).is_zero() && &pb != n {
                self.report.counters.factor_base_hits += 1;
                return Ok(Some(pb));
            }
        }
        if let Some((ctx, rels)) = self.load_relations(n, &params)? {
            self.write_relations(n, &ctx, &rels)?;
            if let Some(g) = self.linear_algebra(n, &params, &ctx, &rels, seed)? {
                return Ok(Some(g));
            }
        }
        let ln_n = ln_big(n);
        for round in 0..params.max_rounds {
            self.report.counters.rounds += 1;
            let round_seed = mix_seed(&[seed, round as u64]);
            let scfg = SearchConfig {
                levels: params.deepening_levels,
                base_budget: params.budget_per_level,
                early_abort_ln_n: params.early_abort.then_some(ln_n),
                workers: self.workers(),
                seed: round_seed,
            };
            let t = Clock::now();
            let (outcome, witness) = {
                let mut factory = NfsFactory { n, params: &params, witness: None, counters: &mut self.report.counters };
                let out = stochastic_search(&mut factory, &scfg);
                (out, factory.witness)
            };
            self.timing.search_ms += t.elapsed_ms();
            self.absorb_search(outcome.stats);
            match outcome.result {
                SearchResult::Stopped => {
                    if let Some(g) = witness.filter(|g| !g.is_one() && g != n) {
                        return Ok(Some(g));
                    }
                }
                SearchResult::Success { context, mut items, .. } => {
                    canonical_sort(&mut items);
                    self.write_relations(n, &context, &items)?;
                    if let Some(g) = self.linear_algebra(n, &params, &context, &items, round_seed)? {
                        return Ok(Some(g));
                    }
                }
                SearchResult::Exhausted => {}
            }
        }
        Ok(None)
    }

    fn dixon_split(&mut self, n: &BigUint, seed: u64) -> Option<BigUint> {
        self.report.counters.dixon_splits += 1;
        let bound = self.cfg.dixon_bound.unwrap_or_else(|| default_dixon_bound(n));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stats = DixonStats::default();
        let g = dixon_split(n, bound, 50_000_000, 32, &mut rng, &mut stats);
        let c = &mut self.report.counters.dixon;
        c.draws += stats.draws;
        c.relations += stats.relations;
        c.congruences += stats.congruences;
        c.fruitful += stats.fruitful;
        self.report.congruences_tried += stats.congruences;
        self.report.fruitful_count += stats.fruitful;
        g
    }

    fn split(&mut self, n: &BigUint, algo: Algo) -> Result<Option<BigUint>> {
        let seed = mix_seed(&[self.cfg.seed, self.splits]);
        self.splits += 1;
        let use_dixon = match algo {
            Algo::Dixon => true,
            Algo::Nfs => false,
            Algo::Auto => n.bits() < DIXON_BELOW_BITS,
        };
        if use_dixon {
            Ok(self.dixon_split(n, seed))
        } else {
            self.nfs_split(n, seed)
        }
    }

    /// Split every composite in `queue` down to primes. Returns false if some
    /// composite could not be split.
    fn complete(&mut self, queue: Vec<BigUint>, algo: Algo, out: &mut Vec<BigUint>) -> Result<bool> {
        let mut queue = queue;
        let mut complete = true;
        while let Some(m) = queue.pop() {
            if m.is_one() {
                continue;
            }
            if is_prime(&m) {
                out.push(m);
                continue;
            }
            if m.is_even() {
                out.push(BigUint::from(2u32));
                queue.push(m >> 1u32);
                continue;
            }
            if let Some((base, k)) = perfect_power(&m) {
                for _ in 0..k {
                    queue.push(base.clone());
                }
                continue;
            }
            match self.split(&m, algo)? {
                Some(g) => {
                    debug_assert!((&m % &g).is_zero());
                    queue.push(&m / &g);
                    queue.push(g);
                }
                None => {
                    complete = false;
                    out.push(m);
                }
            }
        }
        Ok(complete)
    }

    fn finish(mut self, mut factors: Vec<BigUint>, status: Status, started: Clock) -> FactorReport {
        factors.sort();
        self.report.factors = factors;
        self.report.status = status;
        if self.cfg.timing {
            self.timing.total_ms = started.elapsed_ms();
            self.report.timing = Some(self.timing);
        }
        debug_assert!(self.report.check().is_ok());
        self.report
    }
}

/// `exp(½ √(ln n ln ln n))`, floored at 50.
pub fn default_dixon_bound(n: &BigUint) -> u64 {
    let l = ln_big(n).max(3.0);
    ((0.5 * (l * l.ln()).sqrt()).exp() as u64).max(50)
}

fn screen(n: &BigUint, run: &mut Run, algo: Algo, started: Clock) -> Result<Option<FactorReport>> {
    if n < &BigUint::from(2u32) {
        return Err(Error::Domain("n must be at least 2".into()));
    }
    if is_prime(n) {
        let r = std::mem::replace(run, Run::new(n, run.cfg, "none"));
        return Ok(Some(r.finish(vec![n.clone()], Status::Prime, started)));
    }
    if let Some((base, k)) = perfect_power(n) {
        let mut base_factors = Vec::new();
        let ok = run.complete(vec![base], algo, &mut base_factors)?;
        let factors: Vec<BigUint> = (0..k).flat_map(|_| base_factors.iter().cloned()).collect();
        let r = std::mem::replace(run, Run::new(n, run.cfg, "none"));
        let status = if ok { Status::PerfectPower } else { Status::Exhausted };
        return Ok(Some(r.finish(factors, status, started)));
    }
    Ok(None)
}

fn algorithm_name(algo: Algo, n: &BigUint) -> &'static str {
    match algo {
        Algo::Nfs => "nfs",
        Algo::Dixon => "dixon",
        Algo::Auto if n.bits() < DIXON_BELOW_BITS => "dixon",
        Algo::Auto => "nfs",
    }
}

/// Full factorization: screening, trial division to [`TRIAL_LIMIT`], then
/// Dixon or NFS on what remains.
pub fn factor(n: &BigUint, cfg: &FactorConfig) -> Result<FactorReport> {
    let started = Clock::now();
    let mut run = Run::new(n, cfg, algorithm_name(cfg.algo, n));
    if let Some(r) = screen(n, &mut run, cfg.algo, started)? {
        return Ok(r);
    }
    let mut factors = Vec::new();
    let mut rest = n.clone();
    for p in crate::smooth::primes_to(TRIAL_LIMIT) {
        let pb = BigUint::from(p);
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            factors.push(pb.clone());
            run.report.counters.trial_division_factors += 1;
        }
    }
    let ok = run.complete(vec![rest], cfg.algo, &mut factors)?;
    Ok(run.finish(factors, if ok { Status::Factored } else { Status::Exhausted }, started))
}

/// NFS without trial division, so small inputs exercise the sieve itself.
pub fn random_nfs_factor(n: &BigUint, cfg: &FactorConfig) -> Result<FactorReport> {
    factor_with(n, cfg, Algo::Nfs)
}

/// Dixon without trial division; factor base primes `≤ bound`.
pub fn dixon_factor(n: &BigUint, bound: u64, cfg: &FactorConfig) -> Result<FactorReport> {
    let cfg = FactorConfig { dixon_bound: Some(bound), ..cfg.clone() };
    factor_with(n, &cfg, Algo::Dixon)
}

fn factor_with(n: &BigUint, cfg: &FactorConfig, algo: Algo) -> Result<FactorReport> {
    let started = Clock::now();
    let mut run = Run::new(n, cfg, algorithm_name(algo, n));
    if let Some(r) = screen(n, &mut run, algo, started)? {
        return Ok(r);
    }
    let mut factors = Vec::new();
    let ok = run.complete(vec![n.clone()], algo, &mut factors)?;
    Ok(run.finish(factors, if ok { Status::Factored } else { Status::Exhausted }, started))
}

/// Collect relations once, then draw `draws` independent uniform dependencies
/// and record every congruence they produce.
pub fn congruence_census(n: &BigUint, cfg: &FactorConfig, draws: usize) -> Result<CensusReport> {
    let params = derive_params(n, &cfg.overrides)?;
    let ln_n = ln_big(n);
    let mut counters = StageCounters::default();
    for round in 0..params.max_rounds.max(1) * 4 {
        let seed = mix_seed(&[cfg.seed, 0xce, round as u64]);
        let scfg = SearchConfig {
            levels: params.deepening_levels,
            base_budget: params.budget_per_level,
            early_abort_ln_n: params.early_abort.then_some(ln_n),
            workers: cfg.workers.max(1),
            seed,
        };
        let mut factory = NfsFactory { n, params: &params, witness: None, counters: &mut counters };
        let SearchResult::Success { context, mut items, .. } = stochastic_search(&mut factory, &scfg).result else {
            continue;
        };
        canonical_sort(&mut items);
        let m = assemble_matrix(&items, &context.fb, context.builder.chars.len())?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, 0xd1]));
        let mut report = CensusReport::default();
        let f = &context.builder.f;
        for _ in 0..draws {
            let dep = dependency_vector(&m, &mut rng)?;
            report.kernel_draws += 1;
            match congruence(f, &items, dep.ones().collect()) {
                Ok((c, root)) => {
                    let chosen: Vec<&Relation> = c.subset.iter().map(|&i| &items[i]).collect();
                    report.alpha_checks += 1;
                    if !verify_in_alpha(f, &chosen, &root.v) {
                        report.alpha_violations += 1;
                    }
                    report.congruences.push(c);
                }
                Err(Error::NotASquare(_)) => report.not_square += 1,
                Err(e) => return Err(e),
            }
        }
        return Ok(report);
    }
    Err(Error::Consistency("no context reached the relation target".into()))
}

/// Small helper for callers holding decimal strings.
pub fn parse_biguint(s: &str) -> Result<BigUint> {
    s.trim().parse::<BigUint>().map_err(|_| Error::Parse(format!("not a nonnegative integer: `{s}`")))
}

/// `n` as `u64` when it fits, for quick checks in tests and the CLI.
pub fn small(n: &BigUint) -> Option<u64> {
    n.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> FactorConfig {
        FactorConfig { seed, workers: 1, ..Default::default() }
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn nfs_factors_91() {
        let r = random_nfs_factor(&big(91), &cfg(1)).unwrap();
        assert_eq!(r.status, Status::Factored);
        assert_eq!(r.factors, vec![big(7), big(13)]);
        assert!(r.counters.nfs_splits >= 1);
        r.check().unwrap();
    }

    #[test]
    fn nfs_sieves_when_factors_exceed_the_factor_base() {
        let n = big(2003 * 2011);
        let r = random_nfs_factor(&n, &cfg(2)).unwrap();
        assert_eq!(r.status, Status::Factored, "{}", serde_json::to_string(&r.counters).unwrap());
        assert_eq!(r.factors, vec![big(2003), big(2011)]);
        assert_eq!(r.counters.factor_base_hits, 0);
        assert!(r.fruitful_count >= 1);
        assert!(r.counters.alpha_checks >= 1);
        assert_eq!(r.counters.alpha_violations, 0);
    }

    #[test]
    fn screening() {
        let r = random_nfs_factor(&big(97), &cfg(1)).unwrap();
        assert_eq!(r.status, Status::Prime);
        assert_eq!(r.factors, vec![big(97)]);
        let r = random_nfs_factor(&big(81), &cfg(1)).unwrap();
        assert_eq!(r.status, Status::PerfectPower);
        assert_eq!(r.factors, vec![big(3); 4]);
        assert!(factor(&big(1), &cfg(1)).is_err());
    }

    #[test]
    fn dixon_examples() {
        let r = dixon_factor(&big(84_923), 30, &cfg(1)).unwrap();
        assert_eq!(r.status, Status::Factored);
        assert_eq!(r.factors, vec![big(163), big(521)]);
        assert!(r.counters.dixon_splits >= 1);
        let r = dixon_factor(&big(15), 5, &cfg(1)).unwrap();
        assert_eq!(r.factors, vec![big(3), big(5)]);
        let r = dixon_factor(&big(2 * 84_923), 30, &cfg(1)).unwrap();
        assert_eq!(r.factors, vec![big(2), big(163), big(521)]);
    }

    #[test]
    fn full_factorization_with_small_factors() {
        let n = big(2 * 2 * 3 * 101 * 65_537 * 65_537);
        let r = factor(&n, &cfg(3)).unwrap();
        assert_eq!(r.status, Status::Factored);
        assert_eq!(r.factors, vec![big(2), big(2), big(3), big(101), big(65_537), big(65_537)]);
    }

    #[test]
    fn congruence_verification() {
        assert_eq!(verify_congruence(&big(3), &big(10), &big(91)), (true, true));
        assert_eq!(verify_congruence(&big(5), &big(5), &big(91)), (true, false));
        assert_eq!(verify_congruence(&big(5), &big(86), &big(91)), (true, false));
        assert_eq!(verify_congruence(&big(5), &big(6), &big(91)), (false, false));
    }
}
