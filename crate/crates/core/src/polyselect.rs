//! Base-m polynomial construction, randomisation and irreducibility.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::iroot;
use crate::error::{domain, Result};
use crate::zfactor;
use crate::zpoly::{self, ZPoly};

/// Degree-`d` binary form with `f(m, 1) = n`; `coeffs[i]` multiplies
/// `x^i y^(d-i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneousPoly {
    pub d: usize,
    #[serde(with = "crate::io::bigint_vec_str")]
    pub coeffs: Vec<BigInt>,
    #[serde(with = "crate::io::bigint_str")]
    pub m: BigInt,
    #[serde(with = "crate::io::bigint_str")]
    pub n: BigInt,
    #[serde(with = "crate::io::bigint_vec_str")]
    pub c: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    /// A nontrivial factor of `f(x, 1)` over the integers.
    Reducible(ZPoly),
}

impl HomogeneousPoly {
    /// Leading coefficient `f_d`.
    pub fn fd(&self) -> &BigInt {
        &self.coeffs[self.d]
    }

    /// The dehomogenised polynomial `f(x, 1)`.
    pub fn univariate(&self) -> ZPoly {
        ZPoly::new(self.coeffs.clone())
    }

    pub fn eval(&self, a: &BigInt, b: &BigInt) -> BigInt {
        crate::smooth::eval_homogeneous(self, a, b)
    }

    /// `f'(m)` for the dehomogenised polynomial.
    pub fn derivative_at_m(&self) -> BigInt {
        self.univariate().derivative().eval(&self.m)
    }

    /// Monic `g(y) = f_d^(d-1) f(y / f_d)`, the minimal polynomial of
    /// `θ = f_d α`.
    pub fn monic_companion(&self) -> ZPoly {
        let fd = self.fd();
        let mut g: Vec<BigInt> = (0..self.d).map(|i| &self.coeffs[i] * fd.pow((self.d - 1 - i) as u32)).collect();
        g.push(BigInt::one());
        ZPoly::new(g)
    }

    /// Recheck every structural invariant.
    pub fn check(&self) -> Result<()> {
        if self.coeffs.len() != self.d + 1 || self.c.len() != self.d {
            return domain("coefficient vector has the wrong length");
        }
        if self.eval(&self.m, &BigInt::one()) != self.n {
            return domain("f(m, 1) != n");
        }
        if *self.fd() != BigInt::one() + &self.c[0] {
            return domain("leading coefficient is not 1 + c_0");
        }
        Ok(())
    }
}

/// Uniform `m` with `m^d ≤ n < 2 m^d`.
pub fn choose_m<R: Rng + ?Sized>(n: &BigUint, d: usize, rng: &mut R) -> Result<BigUint> {
    let (lo, hi) = m_range(n, d)?;
    Ok(rng.gen_biguint_range(&lo, &(hi + 1u32)))
}

/// Inclusive range of admissible `m`.
pub fn m_range(n: &BigUint, d: usize) -> Result<(BigUint, BigUint)> {
    if d == 0 {
        return domain("degree must be positive");
    }
    if n < &(BigUint::one() << d) {
        return domain("need n >= 2^d");
    }
    let hi = iroot(n, d as u32);
    let lo = iroot(&(n >> 1u32), d as u32) + 1u32;
    if lo > hi {
        return domain("no integer m with m^d <= n < 2m^d");
    }
    Ok((lo, hi))
}

/// Base-`m` digits of `n`, as a monic form with `c = 0`.
pub fn base_m_expansion(n: &BigUint, m: &BigUint, d: usize) -> Result<HomogeneousPoly> {
    if m < &BigUint::from(2u32) {
        return domain("m must be at least 2");
    }
    let md = m.pow(d as u32);
    if &md > n || n >= &(&md << 1u32) {
        return domain("need m^d <= n < 2m^d");
    }
    let mut coeffs = Vec::with_capacity(d + 1);
    let mut rest = n.clone();
    for _ in 0..d {
        let (q, r) = rest.div_rem(m);
        coeffs.push(BigInt::from(r));
        rest = q;
    }
    debug_assert!(rest.is_one());
    coeffs.push(BigInt::from(rest));
    Ok(HomogeneousPoly {
        d,
        coeffs,
        m: BigInt::from(m.clone()),
        n: BigInt::from(n.clone()),
        c: vec![BigInt::zero(); d],
    })
}

/// `f = f̂ + Σ c_i (x − m y) x^(d−1−i) y^i` for a given `c`.
pub fn apply_randomization(fhat: &HomogeneousPoly, c: &[BigInt]) -> HomogeneousPoly {
    let d = fhat.d;
    assert_eq!(c.len(), d);
    let mut coeffs = fhat.coeffs.clone();
    for (i, ci) in c.iter().enumerate() {
        coeffs[d - i] += ci;
        coeffs[d - 1 - i] -= &fhat.m * ci;
    }
    let c = fhat.c.iter().zip(c).map(|(a, b)| a + b).collect();
    HomogeneousPoly { d, coeffs, m: fhat.m.clone(), n: fhat.n.clone(), c }
}

/// Draw each `c_i` uniformly from `[-H, H)` and apply it.
pub fn randomize_poly<R: Rng + ?Sized>(fhat: &HomogeneousPoly, h: u64, rng: &mut R) -> HomogeneousPoly {
    let h = h as i64;
    let c: Vec<BigInt> = (0..fhat.d).map(|_| BigInt::from(rng.gen_range(-h..h))).collect();
    apply_randomization(fhat, &c)
}

/// Exact irreducibility of `f(x, 1)` over Q.
pub fn is_irreducible(f: &HomogeneousPoly) -> Result<Irreducibility> {
    let u = f.univariate();
    if u.is_zero() {
        return domain("zero polynomial");
    }
    if f.fd().is_zero() {
        return domain("leading coefficient vanishes");
    }
    Ok(match zfactor::find_factor(&u) {
        None => Irreducibility::Irreducible,
        Some(w) => Irreducibility::Reducible(w),
    })
}

/// `Δ_f` of `f(x, 1)`.
pub fn discriminant(f: &HomogeneousPoly) -> Result<BigInt> {
    if f.d < 2 {
        return domain("discriminant needs degree >= 2");
    }
    if f.fd().is_zero() {
        return domain("leading coefficient vanishes");
    }
    Ok(zpoly::discriminant(&f.univariate()))
}

/// `Δ_g = Δ_f · f_d^((d−1)(d−2))` for the monic companion `g`.
pub fn discriminant_g(f: &HomogeneousPoly) -> Result<BigInt> {
    let df = discriminant(f)?;
    Ok(df * f.fd().pow(((f.d - 1) * (f.d - 2)) as u32))
}

/// Try to read a factor of `n` off a reducible `f`: evaluate the witness at
/// `(m, 1)` and take gcds with `n`.
pub fn factor_from_witness(f: &HomogeneousPoly, witness: &ZPoly) -> Option<BigUint> {
    let n = f.n.magnitude();
    let v = witness.eval(&f.m);
    [v.magnitude().gcd(n), f.fd().magnitude().gcd(n)].into_iter().find(|c| !c.is_one() && c != n && !c.is_zero())
}

/// Largest coefficient size in bits, recorded for statistics.
pub fn coefficient_bits(f: &HomogeneousPoly) -> u64 {
    f.coeffs.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn poly(coeffs: &[i64]) -> HomogeneousPoly {
        let d = coeffs.len() - 1;
        let mut c = vec![BigInt::zero(); d];
        c[0] = BigInt::from(coeffs[d] - 1);
        HomogeneousPoly {
            d,
            coeffs: coeffs.iter().map(|&v| BigInt::from(v)).collect(),
            m: BigInt::zero(),
            n: BigInt::from(coeffs[0]),
            c,
        }
    }

    #[test]
    fn m_selection() {
        let (lo, hi) = m_range(&big(1_000_000), 3).unwrap();
        assert_eq!((lo, hi), (big(80), big(100)));
        // 79 fails: 2·79³ = 986078 < 10^6
        assert!(base_m_expansion(&big(1_000_000), &big(79), 3).is_err());
        assert!(base_m_expansion(&big(1_000_000), &big(100), 3).is_ok());
        assert_eq!(m_range(&big(8), 3).unwrap(), (big(2), big(2)));
        assert!(m_range(&big(7), 3).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = choose_m(&big(1_000_000), 3, &mut rng).unwrap();
            assert!(m >= big(80) && m <= big(100));
        }
    }

    #[test]
    fn base_m_examples() {
        let f = base_m_expansion(&big(1_000_003), &big(100), 3).unwrap();
        assert_eq!(f.coeffs, [3, 0, 0, 1].map(BigInt::from).to_vec());
        let f = base_m_expansion(&big(1_999_999), &big(100), 3).unwrap();
        assert_eq!(f.coeffs, [99, 99, 99, 1].map(BigInt::from).to_vec());
        let f = base_m_expansion(&big(91), &big(4), 3).unwrap();
        assert_eq!(f.coeffs, [3, 2, 1, 1].map(BigInt::from).to_vec());
        assert_eq!(f.univariate().to_string(), "x^3 + x^2 + 2x + 3");
        f.check().unwrap();
    }

    #[test]
    fn randomisation_examples() {
        let fhat = base_m_expansion(&big(91), &big(4), 3).unwrap();
        let same = apply_randomization(&fhat, &[BigInt::zero(), BigInt::zero(), BigInt::zero()]);
        assert_eq!(same, fhat);
        let f = apply_randomization(&fhat, &[BigInt::one(), BigInt::zero(), BigInt::zero()]);
        assert_eq!(*f.fd(), BigInt::from(2));
        assert_eq!(f.coeffs[2], &fhat.coeffs[2] - BigInt::from(4));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = randomize_poly(&fhat, 5, &mut rng);
        assert_eq!(f.eval(&BigInt::from(4), &BigInt::one()), BigInt::from(91));
        f.check().unwrap();
    }

    #[test]
    fn irreducibility_examples() {
        assert_eq!(is_irreducible(&poly(&[-2, 0, 0, 1])).unwrap(), Irreducibility::Irreducible);
        match is_irreducible(&poly(&[-1, 0, 0, 1])).unwrap() {
            Irreducibility::Reducible(w) => assert_eq!(w, ZPoly::from_i64(&[-1, 1])),
            other => panic!("{other:?}"),
        }
        assert_eq!(is_irreducible(&poly(&[3, 2, 1, 1])).unwrap(), Irreducibility::Irreducible);
    }

    /// Brute-force oracle for cubics: reducible iff a rational root `r/s`
    /// exists with `s | f_3`, `r | f_0`.
    fn cubic_reducible_brute(c: [i64; 4]) -> bool {
        if c[0] == 0 {
            return true;
        }
        let divisors = |v: i64| (1..=v.abs()).filter(move |k| v % k == 0);
        for r in divisors(c[0]) {
            for s in divisors(c[3]) {
                for sign in [-1, 1] {
                    let r = sign * r;
                    // s^3 f(r/s) = c3 r^3 + c2 r^2 s + c1 r s^2 + c0 s^3
                    let v = c[3] * r * r * r + c[2] * r * r * s + c[1] * r * s * s + c[0] * s * s * s;
                    if v == 0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn irreducibility_matches_brute_force_on_small_cubics() {
        let range: Vec<i64> = (-20..=20).collect();
        let mut checked = 0;
        for &c3 in range.iter().filter(|&&v| v != 0).step_by(3) {
            for &c2 in range.iter().step_by(2) {
                for &c1 in range.iter().step_by(3) {
                    for &c0 in &range {
                        let c = [c0, c1, c2, c3];
                        let got = zfactor::find_factor(&ZPoly::from_i64(&c));
                        let want = cubic_reducible_brute(c);
                        assert_eq!(got.is_some(), want, "{c:?}");
                        if let Some(w) = got {
                            assert!(ZPoly::from_i64(&c).div_exact(&w).is_some());
                        }
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 50_000);
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&poly(&[-2, 0, 0, 1])).unwrap(), BigInt::from(-108));
        assert_eq!(discriminant(&poly(&[0, -1, 0, 1])).unwrap(), BigInt::from(4));
        assert_eq!(discriminant(&poly(&[1, 1, 0, 1])).unwrap(), BigInt::from(-31));
        let f = poly(&[7, -5, 3, 2]);
        assert_eq!(discriminant(&f).unwrap(), BigInt::from(-8603));
        assert_eq!(discriminant_g(&f).unwrap(), BigInt::from(-34412));
        // Δ_g computed directly from the monic companion
        assert_eq!(zpoly::discriminant(&f.monic_companion()), BigInt::from(-34412));
        assert!(discriminant(&poly(&[1, 1])).is_err());
    }

    #[test]
    fn zero_discriminant_iff_repeated_root() {
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                for c in -6i64..=6 {
                    let p = ZPoly::from_i64(&[c, b, a, 1]);
                    let g = zfactor::gcd_q(&p, &p.derivative());
                    let repeated = g.degree().unwrap_or(0) > 0;
                    assert_eq!(zpoly::discriminant(&p).is_zero(), repeated, "{p}");
                }
            }
        }
    }

    #[test]
    fn reducibility_rate_is_low() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = big(1_000_000_007);
        let mut reducible = 0;
        let draws = 10_000;
        for _ in 0..draws {
            let m = choose_m(&n, 3, &mut rng).unwrap();
            let fhat = base_m_expansion(&n, &m, 3).unwrap();
            let f = randomize_poly(&fhat, 8, &mut rng);
            if f.fd().is_zero() {
                continue;
            }
            if matches!(is_irreducible(&f).unwrap(), Irreducibility::Reducible(_)) {
                reducible += 1;
            }
        }
        assert!((reducible as f64) < 0.05 * draws as f64, "{reducible}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn randomised_poly_keeps_root(seed in any::<u64>(), n in 1_000u64..1_000_000_000_000, h in 1u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = big(n);
            let m = choose_m(&n, 3, &mut rng).unwrap();
            let fhat = base_m_expansion(&n, &m, 3).unwrap();
            let f = randomize_poly(&fhat, h, &mut rng);
            prop_assert_eq!(f.eval(&f.m, &BigInt::one()), BigInt::from(n));
            prop_assert_eq!(f.fd().clone(), BigInt::one() + &f.c[0]);
            for c in &f.c {
                prop_assert!(c.abs() <= BigInt::from(h));
            }
        }
    }
}
