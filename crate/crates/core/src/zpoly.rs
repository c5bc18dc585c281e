//! Dense univariate polynomials over the integers, constant term first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ZPoly(Vec<BigInt>);

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        ZPoly(Vec::new())
    }

    pub fn one() -> Self {
        ZPoly(vec![BigInt::one()])
    }

    /// `c0 + c1 x`
    pub fn linear(c0: BigInt, c1: BigInt) -> Self {
        Self::new(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.0
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.0.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        Self::new(self.0.iter().map(|c| c / &g).collect())
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, g: &ZPoly) -> ZPoly {
        let dg = g.degree().expect("modulus must be nonzero");
        debug_assert!(g.leading().is_one(), "modulus must be monic");
        let mut r = self.0.clone();
        while r.len() > dg {
            let top = r.len() - 1;
            let c = r[top].clone();
            if !c.is_zero() {
                for (j, gj) in g.0.iter().enumerate().take(dg) {
                    r[top - dg + j] -= &c * gj;
                }
            }
            r.pop();
        }
        ZPoly::new(r)
    }

    pub fn mul_mod_monic(&self, other: &ZPoly, g: &ZPoly) -> ZPoly {
        (self * other).rem_monic(g)
    }

    /// Exact division over the integers: `Some(q)` iff `self = q·d`.
    pub fn div_exact(&self, d: &ZPoly) -> Option<ZPoly> {
        let dd = d.degree()?;
        let lc = d.leading();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return if self.is_zero() { Some(ZPoly::zero()) } else { None };
        }
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let top = r[k + dd].clone();
            let (qk, rem) = top.div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            if !qk.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[k + j] -= &qk * dj;
                }
            }
            q[k] = qk;
        }
        if r.iter().all(|c| c.is_zero()) {
            Some(ZPoly::new(q))
        } else {
            None
        }
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.0.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &ZPoly {
    type Output = ZPoly;
    fn add(self, rhs: &ZPoly) -> ZPoly {
        let n = self.0.len().max(rhs.0.len());
        ZPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ZPoly {
    type Output = ZPoly;
    fn sub(self, rhs: &ZPoly) -> ZPoly {
        let n = self.0.len().max(rhs.0.len());
        ZPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &ZPoly {
    type Output = ZPoly;
    fn neg(self) -> ZPoly {
        ZPoly(self.0.iter().map(|c| -c).collect())
    }
}

impl Mul for &ZPoly {
    type Output = ZPoly;
    fn mul(self, rhs: &ZPoly) -> ZPoly {
        if self.is_zero() || rhs.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::new(out)
    }
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Sylvester matrix of `p` and `q` (rows of `p` first, highest power leftmost).
pub fn sylvester_matrix(p: &ZPoly, q: &ZPoly) -> Vec<Vec<BigInt>> {
    let dp = p.degree().unwrap_or(0);
    let dq = q.degree().unwrap_or(0);
    let size = dp + dq;
    let mut rows = Vec::with_capacity(size);
    for i in 0..dq {
        let mut row = vec![BigInt::zero(); size];
        for k in 0..=dp {
            row[i + k] = p.coeff(dp - k);
        }
        rows.push(row);
    }
    for i in 0..dp {
        let mut row = vec![BigInt::zero(); size];
        for k in 0..=dq {
            row[i + k] = q.coeff(dq - k);
        }
        rows.push(row);
    }
    rows
}

pub fn resultant(p: &ZPoly, q: &ZPoly) -> BigInt {
    determinant(sylvester_matrix(p, q))
}

/// Polynomial discriminant `(-1)^{d(d-1)/2} Res(p, p') / lc(p)`.
pub fn discriminant(p: &ZPoly) -> BigInt {
    let d = p.degree().unwrap_or(0);
    let res = resultant(p, &p.derivative());
    let q = res / p.leading();
    if (d * (d.saturating_sub(1)) / 2) % 2 == 1 {
        -q
    } else {
        q
    }
}
