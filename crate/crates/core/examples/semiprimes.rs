//! Factor random semiprimes with p, q in [2^15, 2^17] and print per-run stats.
//!
//! `cargo run --release -p rnfs --example semiprimes -- [count] [seed]`

use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnfs::arith::is_prime_u64;
use rnfs::pipeline::{random_nfs_factor, FactorConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().map_or(5, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("seed"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prime = || loop {
        let p = rng.gen_range(1u64 << 15..=1u64 << 17);
        if is_prime_u64(p) {
            return p;
        }
    };
    println!("n\tfactors\tseconds\tdraws\tcontexts\tmatrix_rows\tcongruences\tfruitful");
    for run in 1..=count {
        let n = BigUint::from(prime()) * prime();
        let cfg = FactorConfig { seed: run, workers: 1, ..Default::default() };
        let t = Instant::now();
        let r = random_nfs_factor(&n, &cfg).expect("valid input");
        let fs: Vec<String> = r.factors.iter().map(|f| f.to_string()).collect();
        println!(
            "{n}\t{}\t{:.2}\t{}\t{}\t{}\t{}\t{}",
            fs.join("*"),
            t.elapsed().as_secs_f64(),
            r.counters.draws,
            r.counters.contexts,
            r.counters.matrix_rows,
            r.congruences_tried,
            r.fruitful_count
        );
    }
}
