//! Sparse GF(2) matrices, dense elimination and a Wiedemann solver.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relations::{FactorBase, Relation};

/// Meaning of a matrix column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnLabel {
    RationalSign,
    AlgebraicSign,
    RationalPrime(u64),
    AlgebraicIdeal(u64, u64),
    Character(usize),
    Parity,
}

/// Rows store the column indices holding a 1, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrixGF2 {
    pub n_cols: usize,
    pub rows: Vec<Vec<u32>>,
    pub legend: Vec<ColumnLabel>,
}

/// Dense bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i);
            }
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = BitVec { len, words: (0..len.div_ceil(64)).map(|_| rng.gen()).collect() };
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl SparseMatrixGF2 {
    pub fn new(n_cols: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        for row in &rows {
            if row.windows(2).any(|w| w[0] >= w[1]) || row.last().is_some_and(|&c| c as usize >= n_cols) {
                return Err(Error::Consistency("row indices must be increasing and in range".into()));
            }
        }
        Ok(SparseMatrixGF2 { n_cols, rows, legend: Vec::new() })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn from_dense(rows: &[Vec<bool>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let rows =
            rows.iter().map(|r| r.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32).collect()).collect();
        SparseMatrixGF2 { n_cols, rows, legend: Vec::new() }
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![false; self.n_cols];
                for &c in r {
                    v[c as usize] = true;
                }
                v
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c as usize].push(i as u32);
            }
        }
        SparseMatrixGF2 { n_cols: self.rows.len(), rows: cols, legend: Vec::new() }
    }

    /// `M v` for `v` of length `n_cols`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.iter().filter(|&&c| v.get(c as usize)).count() % 2 == 1 {
                out.set(i);
            }
        }
        out
    }

    /// `Mᵀ x` for `x` of length `n_rows`.
    pub fn mul_vec_transposed(&self, x: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            if x.get(i) {
                for &c in row {
                    out.flip(c as usize);
                }
            }
        }
        out
    }

    pub fn weight(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `rows cols` header followed by one `row col` line per nonzero entry.
    pub fn dump(&self) -> String {
        let mut s = format!("{} {}\n", self.rows.len(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for c in row {
                let _ = writeln!(s, "{i} {c}");
            }
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let parse_pair = |l: &str| -> Result<(usize, usize)> {
            let mut it = l.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(Error::Parse(format!("bad matrix line: {l}"))),
            }
        };
        let (n_rows, n_cols) = parse_pair(lines.next().ok_or_else(|| Error::Parse("empty matrix".into()))?)?;
        let mut rows = vec![Vec::new(); n_rows];
        for l in lines {
            let (r, c) = parse_pair(l)?;
            if r >= n_rows || c >= n_cols {
                return Err(Error::Parse(format!("entry out of range: {l}")));
            }
            rows[r].push(c as u32);
        }
        for row in &mut rows {
            row.sort_unstable();
            // duplicate entries cancel over GF(2)
            let mut out: Vec<u32> = Vec::with_capacity(row.len());
            for &c in row.iter() {
                if out.last() == Some(&c) {
                    out.pop();
                } else {
                    out.push(c);
                }
            }
            *row = out;
        }
        SparseMatrixGF2::new(n_cols, rows)
    }
}

/// Column layout for a set of relations: signs, rational primes, ideals,
/// characters, parity.
pub fn assemble_matrix(rels: &[Relation], fb: &FactorBase, n_chars: usize) -> Result<SparseMatrixGF2> {
    if rels.is_empty() {
        return Err(Error::Domain("no relations to assemble".into()));
    }
    let nr = fb.rational.len();
    let na = fb.algebraic.len();
    let n_cols = 2 + nr + na + n_chars + 1;
    let mut legend = vec![ColumnLabel::RationalSign, ColumnLabel::AlgebraicSign];
    legend.extend(fb.rational.iter().map(|&p| ColumnLabel::RationalPrime(p)));
    legend.extend(fb.algebraic.iter().map(|&(r, s)| ColumnLabel::AlgebraicIdeal(r, s)));
    legend.extend((0..n_chars).map(ColumnLabel::Character));
    legend.push(ColumnLabel::Parity);
    let mut rows = Vec::with_capacity(rels.len());
    for rel in rels {
        if rel.char_bits.len() != n_chars {
            return Err(Error::Consistency("character bit count differs from column count".into()));
        }
        let mut row = Vec::new();
        if rel.rational.sign < 0 {
            row.push(0);
        }
        if rel.fab < num_bigint::BigInt::default() {
            row.push(1);
        }
        for &(p, e) in &rel.rational.factors {
            let i = fb
                .rational_index(p)
                .ok_or_else(|| Error::Consistency(format!("prime {p} missing from factor base")))?;
            if e % 2 == 1 {
                row.push((2 + i) as u32);
            }
        }
        for &(r, s, e) in &rel.algebraic {
            let i = fb
                .algebraic_index(r, s)
                .ok_or_else(|| Error::Consistency(format!("ideal ({r}, {s}) missing from factor base")))?;
            if e % 2 == 1 {
                row.push((2 + nr + i) as u32);
            }
        }
        for (j, &bit) in rel.char_bits.iter().enumerate() {
            if bit {
                row.push((2 + nr + na + j) as u32);
            }
        }
        row.push((n_cols - 1) as u32);
        row.sort_unstable();
        rows.push(row);
    }
    let mut m = SparseMatrixGF2::new(n_cols, rows)?;
    m.legend = legend;
    Ok(m)
}

/// Basis of `{x : xᵀ M = 0}` by Gaussian elimination with row tracking.
pub fn left_kernel_basis(m: &SparseMatrixGF2) -> Vec<BitVec> {
    let n = m.n_rows();
    let mut work: Vec<(BitVec, BitVec)> = m
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v = BitVec::zeros(m.n_cols);
            for &c in row {
                v.set(c as usize);
            }
            let mut t = BitVec::zeros(n);
            t.set(i);
            (v, t)
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..m.n_cols {
        let Some(p) = (pivot_row..n).find(|&i| work[i].0.get(col)) else {
            continue;
        };
        work.swap(pivot_row, p);
        let (pv, pt) = work[pivot_row].clone();
        for (i, (v, t)) in work.iter_mut().enumerate() {
            if i != pivot_row && v.get(col) {
                v.xor_assign(&pv);
                t.xor_assign(&pt);
            }
        }
        pivot_row += 1;
        if pivot_row == n {
            break;
        }
    }
    work.into_iter().skip(pivot_row).map(|(_, t)| t).collect()
}

/// Basis of `{v : M v = 0}`.
pub fn right_kernel_basis(m: &SparseMatrixGF2) -> Vec<BitVec> {
    left_kernel_basis(&m.transpose())
}

/// Rank over GF(2).
pub fn rank(m: &SparseMatrixGF2) -> usize {
    m.n_rows() - left_kernel_basis(m).len()
}

/// Uniformly random nonzero element of the span of `basis`.
pub fn random_combination<R: Rng + ?Sized>(basis: &[BitVec], rng: &mut R) -> Option<BitVec> {
    if basis.is_empty() {
        return None;
    }
    loop {
        let mut v = BitVec::zeros(basis[0].len());
        let mut any = false;
        for b in basis {
            if rng.gen::<bool>() {
                v.xor_assign(b);
                any = true;
            }
        }
        if any {
            return Some(v);
        }
    }
}

/// Random nonzero `v` with `M v = 0`.
pub fn kernel_vector<R: Rng + ?Sized>(m: &SparseMatrixGF2, rng: &mut R) -> Result<BitVec> {
    let v = random_combination(&right_kernel_basis(m), rng).ok_or(Error::NoKernel)?;
    assert!(m.mul_vec(&v).is_zero(), "kernel vector fails M v = 0");
    Ok(v)
}

/// Random nonzero `x` with `xᵀ M = 0`: a subset of rows summing to zero.
pub fn dependency_vector<R: Rng + ?Sized>(m: &SparseMatrixGF2, rng: &mut R) -> Result<BitVec> {
    let x = random_combination(&left_kernel_basis(m), rng).ok_or(Error::NoKernel)?;
    assert!(m.mul_vec_transposed(&x).is_zero(), "dependency fails xᵀ M = 0");
    Ok(x)
}

/// `k` independent random dependencies from one elimination.
pub fn dependencies<R: Rng + ?Sized>(m: &SparseMatrixGF2, k: usize, rng: &mut R) -> Result<Vec<BitVec>> {
    let basis = left_kernel_basis(m);
    if basis.is_empty() {
        return Err(Error::NoKernel);
    }
    let deps: Vec<BitVec> = (0..k).filter_map(|_| random_combination(&basis, rng)).collect();
    for x in &deps {
        assert!(m.mul_vec_transposed(x).is_zero(), "dependency fails xᵀ M = 0");
    }
    Ok(deps)
}

/// Berlekamp–Massey over GF(2): connection polynomial `c` with
/// `Σ c_j s_{i-j} = 0` for all valid `i`, `c_0 = 1`.
pub fn berlekamp_massey(s: &[bool]) -> Vec<bool> {
    let mut c = vec![true];
    let mut b = vec![true];
    let mut l = 0usize;
    let mut shift = 1usize;
    for n in 0..s.len() {
        let mut disc = s[n];
        for j in 1..=l.min(c.len() - 1) {
            disc ^= c[j] & s[n - j];
        }
        if !disc {
            shift += 1;
            continue;
        }
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, false);
        }
        for (j, &bj) in b.iter().enumerate() {
            c[j + shift] ^= bj;
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.truncate(l + 1);
    c.resize(l + 1, false);
    c
}

/// Nonzero `v` with `M v = 0` via scalar Wiedemann on `MᵀM`.
pub fn wiedemann_kernel<R: Rng + ?Sized>(m: &SparseMatrixGF2, attempts: usize, rng: &mut R) -> Result<BitVec> {
    let n = m.n_cols;
    if n == 0 {
        return Err(Error::NoKernel);
    }
    let apply = |v: &BitVec| m.mul_vec_transposed(&m.mul_vec(v));
    for _ in 0..attempts {
        let x = BitVec::random(n, rng);
        let u = BitVec::random(n, rng);
        let y = apply(&x);
        let mut seq = Vec::with_capacity(2 * n + 2);
        let mut cur = y.clone();
        for _ in 0..2 * n + 2 {
            seq.push(u.dot(&cur));
            cur = apply(&cur);
        }
        // reversed connection polynomial = annihilating polynomial of the sequence
        let c = berlekamp_massey(&seq);
        let l = c.len() - 1;
        let poly: Vec<bool> = (0..=l).map(|i| c[l - i]).collect();
        // P(A) y = 0 where P(z) = Σ poly_i z^i; strip z^t to get Q with Q(0) = 1.
        let Some(t) = poly.iter().position(|&b| b) else { continue };
        let q = &poly[t..];
        // w = Q(A) x: then A^{t+1} w = 0 (up to the projection being faithful)
        let mut w = BitVec::zeros(n);
        let mut pw = x.clone();
        for &qi in q {
            if qi {
                w.xor_assign(&pw);
            }
            pw = apply(&pw);
        }
        if w.is_zero() {
            continue;
        }
        for _ in 0..=t + 1 {
            let next = apply(&w);
            if next.is_zero() {
                if m.mul_vec(&w).is_zero() {
                    return Ok(w);
                }
                // MᵀM w = 0 but M w ≠ 0: M w is a kernel element of Mᵀ only
                break;
            }
            w = next;
        }
    }
    Err(Error::NoKernel)
}

/// Solver selection for the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Solver {
    #[default]
    Gauss,
    Wiedemann,
}

/// `k` dependencies with the chosen solver.
pub fn find_dependencies<R: Rng + ?Sized>(
    m: &SparseMatrixGF2,
    k: usize,
    solver: Solver,
    rng: &mut R,
) -> Result<Vec<BitVec>> {
    match solver {
        Solver::Gauss => dependencies(m, k, rng),
        Solver::Wiedemann => {
            let t = m.transpose();
            let mut out = Vec::new();
            for _ in 0..k {
                match wiedemann_kernel(&t, 8, rng) {
                    Ok(v) => out.push(v),
                    Err(_) if !out.is_empty() => break,
                    Err(e) => {
                        // fall back to elimination when the black box keeps failing
                        return dependencies(m, k, rng).map_err(|_| e);
                    }
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Rank by elimination on plain boolean rows.
    fn naive_rank(rows: &[Vec<bool>]) -> usize {
        let mut rows: Vec<Vec<bool>> = rows.to_vec();
        let cols = rows.first().map_or(0, Vec::len);
        let mut r = 0;
        for c in 0..cols {
            if let Some(p) = (r..rows.len()).find(|&i| rows[i][c]) {
                rows.swap(r, p);
                for i in 0..rows.len() {
                    if i != r && rows[i][c] {
                        let pr = rows[r].clone();
                        for (x, y) in rows[i].iter_mut().zip(pr) {
                            *x ^= y;
                        }
                    }
                }
                r += 1;
            }
        }
        r
    }

    fn dense(rows: usize, cols: usize, seed: u64, density: f64) -> Vec<Vec<bool>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows).map(|_| (0..cols).map(|_| rng.gen::<f64>() < density).collect()).collect()
    }

    #[test]
    fn square_identity_has_no_kernel() {
        let id: Vec<Vec<bool>> = (0..5).map(|i| (0..5).map(|j| i == j).collect()).collect();
        let m = SparseMatrixGF2::from_dense(&id);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(kernel_vector(&m, &mut rng), Err(Error::NoKernel)));
        assert!(matches!(dependency_vector(&m, &mut rng), Err(Error::NoKernel)));
    }

    #[test]
    fn more_rows_than_columns_always_has_a_dependency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..50 {
            let cols = 1 + (seed as usize % 40);
            let m = SparseMatrixGF2::from_dense(&dense(cols + 1, cols, seed, 0.3));
            let x = dependency_vector(&m, &mut rng).unwrap();
            assert!(!x.is_zero());
            assert!(m.mul_vec_transposed(&x).is_zero());
        }
    }

    #[test]
    fn wide_matrix_has_right_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = SparseMatrixGF2::from_dense(&dense(10, 11, 9, 0.5));
        let v = kernel_vector(&m, &mut rng).unwrap();
        assert!(!v.is_zero() && m.mul_vec(&v).is_zero());
    }

    #[test]
    fn kernel_sampling_is_uniform() {
        // kernel of dimension 2: three nonzero elements, each ~1/3
        let m = SparseMatrixGF2::from_dense(&[vec![true, true, false, false], vec![false, false, true, true]]);
        let basis = right_kernel_basis(&m);
        assert_eq!(basis.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..30_000 {
            *counts.entry(kernel_vector(&m, &mut rng).unwrap()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 3);
        for &c in counts.values() {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn zero_matrix_kernel_is_uniform() {
        let m = SparseMatrixGF2::from_dense(&[vec![false; 3], vec![false; 3]]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut counts = std::collections::HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts.entry(kernel_vector(&m, &mut rng).unwrap().to_bools()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 7);
        let p = 1.0 / 7.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn worked_relation_row() {
        use crate::polyselect::base_m_expansion;
        use crate::relations::build_relation;
        use num_bigint::BigUint;
        let f = base_m_expansion(&BigUint::from(91u32), &BigUint::from(4u32), 3).unwrap();
        let rel = build_relation(&f, (3, -1), 7, 7).unwrap();
        let fb = FactorBase::build(&f, 7, 7);
        let m = assemble_matrix(&[rel.clone(), rel], &fb, 0).unwrap();
        let labels: Vec<&ColumnLabel> = m.rows[0].iter().map(|&c| &m.legend[c as usize]).collect();
        assert_eq!(
            labels,
            vec![
                &ColumnLabel::RationalPrime(7),
                &ColumnLabel::AlgebraicIdeal(3, 0),
                &ColumnLabel::AlgebraicIdeal(7, 4),
                &ColumnLabel::Parity
            ]
        );
        assert_eq!(m.legend.len(), m.n_cols);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = dependency_vector(&m, &mut rng).unwrap();
        assert_eq!(x.to_bools(), vec![true, true]);
        assert!(assemble_matrix(&[], &fb, 0).is_err());
    }

    #[test]
    fn berlekamp_massey_finds_fibonacci_mod_2() {
        // s_i = s_{i-1} + s_{i-2}
        let mut s = vec![true, true];
        for i in 2..20 {
            s.push(s[i - 1] ^ s[i - 2]);
        }
        assert_eq!(berlekamp_massey(&s), vec![true, true, true]);
    }

    #[test]
    fn wiedemann_agrees_with_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut found = 0;
        for seed in 0..20 {
            let m = SparseMatrixGF2::from_dense(&dense(30, 40, 100 + seed, 0.1));
            if let Ok(v) = wiedemann_kernel(&m, 20, &mut rng) {
                assert!(!v.is_zero() && m.mul_vec(&v).is_zero());
                found += 1;
            }
        }
        assert!(found >= 15, "{found}");
    }

    #[test]
    fn dump_round_trip() {
        let m = SparseMatrixGF2::from_dense(&dense(7, 9, 1, 0.4));
        let text = m.dump();
        assert!(text.starts_with("7 9\n"));
        assert_eq!(SparseMatrixGF2::parse_dump(&text).unwrap(), m);
        assert!(SparseMatrixGF2::parse_dump("2 2\n0 5\n").is_err());
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in 1usize..24, cols in 1usize..24, seed: u64, density in 0.05f64..0.9) {
            let d = dense(rows, cols, seed, density);
            let m = SparseMatrixGF2::from_dense(&d);
            let r = naive_rank(&d);
            let left = left_kernel_basis(&m);
            let right = right_kernel_basis(&m);
            prop_assert_eq!(left.len(), rows - r);
            prop_assert_eq!(right.len(), cols - r);
            for x in &left {
                prop_assert!(!x.is_zero() && m.mul_vec_transposed(x).is_zero());
            }
            for v in &right {
                prop_assert!(!v.is_zero() && m.mul_vec(v).is_zero());
            }
        }
    }
}
