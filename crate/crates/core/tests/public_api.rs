use std::path::PathBuf;

use num_bigint::BigUint;
use rnfs::linalg::Solver;
use rnfs::params::{derive_params, ParamOverrides};
use rnfs::pipeline::{factor, random_nfs_factor, Algo, FactorConfig, Status};

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("rnfs-{}-{name}", std::process::id()))
}

fn semiprime() -> BigUint {
    BigUint::from(40_009u32) * 100_003u32
}

#[test]
fn nfs_with_wiedemann_solver() {
    let cfg = FactorConfig { seed: 2, workers: 1, solver: Solver::Wiedemann, ..Default::default() };
    let r = random_nfs_factor(&semiprime(), &cfg).unwrap();
    assert_eq!(r.status, Status::Factored);
    assert_eq!(r.factors, vec![BigUint::from(40_009u32), BigUint::from(100_003u32)]);
    assert_eq!(r.counters.congruence_violations, 0);
    assert_eq!(r.counters.alpha_violations, 0);
}

#[test]
fn relations_file_resumes_the_run() {
    let path = tmp("rels.jsonl");
    let n = semiprime();
    let out = FactorConfig { seed: 9, workers: 1, relations_out: Some(path.clone()), ..Default::default() };
    let first = random_nfs_factor(&n, &out).unwrap();
    assert_eq!(first.status, Status::Factored);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines = text.lines().count();
    assert!(lines > 100, "header plus relations, got {lines} lines");
    assert!(text.lines().next().unwrap().contains("\"characters\""));

    let resume = FactorConfig { seed: 10, workers: 1, relations_in: Some(path.clone()), ..Default::default() };
    let second = random_nfs_factor(&n, &resume).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(second.status, Status::Factored);
    assert_eq!(second.counters.relations_loaded as usize, lines - 1);
    assert_eq!(second.factors, first.factors);
}

#[test]
fn corrupted_relations_file_is_rejected() {
    let path = tmp("bad.jsonl");
    let n = semiprime();
    let out = FactorConfig { seed: 9, workers: 1, relations_out: Some(path.clone()), ..Default::default() };
    random_nfs_factor(&n, &out).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // flip b in the first relation; its stored factorisation no longer matches
    let rel: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    let b = rel["b"].as_i64().unwrap();
    lines[1] = lines[1].replacen(&format!("\"b\":{b}"), &format!("\"b\":{}", b + 1), 1);
    std::fs::write(&path, lines.join("\n")).unwrap();
    let resume = FactorConfig { seed: 1, workers: 1, relations_in: Some(path.clone()), ..Default::default() };
    let res = random_nfs_factor(&n, &resume);
    std::fs::remove_file(&path).unwrap();
    assert!(res.is_err());
}

#[test]
fn auto_algorithm_full_factorisation() {
    let cfg = FactorConfig { seed: 1, workers: 1, ..Default::default() };
    let n = BigUint::from(2u32).pow(5) * 3u32 * BigUint::from(1_000_003u32) * 1_000_033u32;
    let r = factor(&n, &cfg).unwrap();
    assert_eq!(r.status, Status::Factored);
    assert_eq!(r.factors.iter().product::<BigUint>(), n);
    assert_eq!(r.factors.len(), 8);
    assert_eq!(r.counters.trial_division_factors, 6);
}

#[test]
fn dixon_forced_on_nfs_sized_input() {
    let cfg = FactorConfig { seed: 4, workers: 1, algo: Algo::Dixon, ..Default::default() };
    let r = factor(&semiprime(), &cfg).unwrap();
    assert_eq!(r.status, Status::Factored);
    assert_eq!(r.algorithm, "dixon");
    // a random square root may share a factor with n before any congruence
    assert_eq!(r.counters.dixon_splits, 1);
    assert_eq!(r.counters.nfs_splits, 0);
    assert_eq!(r.counters.dixon.violations, 0);
}

#[test]
fn overrides_reach_the_search() {
    let mut o = ParamOverrides::new();
    o.parse_config("# desk run\nB=3000\nB_prime = 2500\nchar_count=20\n").unwrap();
    let p = derive_params(&semiprime(), &o).unwrap();
    assert_eq!((p.b, p.b_prime, p.char_count), (3000, 2500, 20));
    let cfg = FactorConfig { seed: 3, workers: 1, overrides: o, ..Default::default() };
    let r = random_nfs_factor(&semiprime(), &cfg).unwrap();
    assert_eq!(r.status, Status::Factored);
    let default = random_nfs_factor(&semiprime(), &FactorConfig { seed: 3, workers: 1, ..Default::default() }).unwrap();
    // π(3000) = 430 rational columns versus π(2000) = 303
    assert!(r.counters.matrix_cols >= default.counters.matrix_cols + 100);
}
