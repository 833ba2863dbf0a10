//! Exact arithmetic in the ring of cyclotomic integers `Z[ζ_p]`.
//!
//! A [`CycInt`] is stored in the basis `1, ζ, ..., ζ^{p-2}`; the relation
//! `ζ^{p-1} = -(1 + ζ + ... + ζ^{p-2})` makes the representation canonical,
//! so equality is coefficient equality.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::gf::{is_prime, legendre};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycError {
    #[error("operands live in Z[ζ_{0}] and Z[ζ_{1}]")]
    PrimeMismatch(u32, u32),
    #[error("G^{0} is irrational; only even powers have an integer value")]
    OddExponentValue(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    p: u32,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    pub fn zero(p: u32) -> Self {
        debug_assert!(p >= 3 && is_prime(p as u64));
        CycInt {
            p,
            coeffs: vec![BigInt::zero(); p as usize - 1],
        }
    }

    pub fn one(p: u32) -> Self {
        Self::from_integer(p, 1)
    }

    pub fn from_integer(p: u32, n: impl Into<BigInt>) -> Self {
        let mut out = Self::zero(p);
        out.coeffs[0] = n.into();
        out
    }

    /// `ζ_p^k`, with `k` taken modulo `p`.
    pub fn root(p: u32, k: i64) -> Self {
        let mut counts = vec![0u64; p as usize];
        counts[k.rem_euclid(p as i64) as usize] = 1;
        Self::from_exponent_counts(p, &counts)
    }

    /// `Σ_k counts[k]·ζ^k` for a histogram of exponents in `[0, p)`.
    pub fn from_exponent_counts(p: u32, counts: &[u64]) -> Self {
        assert_eq!(counts.len(), p as usize, "one count per residue");
        let top = BigInt::from(counts[p as usize - 1]);
        CycInt {
            p,
            coeffs: counts[..p as usize - 1]
                .iter()
                .map(|&c| BigInt::from(c) - &top)
                .collect(),
        }
    }

    /// Signed variant of [`CycInt::from_exponent_counts`].
    pub fn from_signed_exponent_counts(p: u32, counts: &[i64]) -> Self {
        assert_eq!(counts.len(), p as usize, "one count per residue");
        Self::reduce(p, counts.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Canonical form of `Σ_k c_k ζ^k` for a coefficient vector of length `p`.
    pub fn reduce(p: u32, mut full: Vec<BigInt>) -> Self {
        assert_eq!(full.len(), p as usize, "one coefficient per residue");
        let top = full.pop().expect("p >= 3");
        CycInt {
            p,
            coeffs: full.into_iter().map(|c| c - &top).collect(),
        }
    }

    /// Coefficients over `1, ζ, ..., ζ^{p-1}` with a zero top entry; the
    /// inverse of [`CycInt::reduce`].
    pub fn expand(&self) -> Vec<BigInt> {
        let mut full = self.coeffs.clone();
        full.push(BigInt::zero());
        full
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn same_ring(&self, other: &Self) -> Result<(), CycError> {
        if self.p != other.p {
            return Err(CycError::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, CycError> {
        self.same_ring(other)?;
        Ok(CycInt {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, CycError> {
        self.try_add(&-other.clone())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, CycError> {
        self.same_ring(other)?;
        let p = self.p as usize;
        let mut full = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % p] += a * b;
                }
            }
        }
        Ok(Self::reduce(self.p, full))
    }

    /// Multiplication by a rational integer.
    pub fn scale(&self, n: &BigInt) -> Self {
        CycInt {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * n).collect(),
        }
    }

    /// `ζ^k · self`.
    pub fn shift(&self, k: i64) -> Self {
        let p = self.p as usize;
        let k = k.rem_euclid(p as i64) as usize;
        let mut full = vec![BigInt::zero(); p];
        for (j, c) in self.coeffs.iter().enumerate() {
            full[(j + k) % p] = c.clone();
        }
        Self::reduce(self.p, full)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.p);
        for _ in 0..n {
            acc = acc.try_mul(self).expect("same ring");
        }
        acc
    }

    /// `Some(n)` iff the element equals the rational integer `n`.
    pub fn is_rational(&self) -> Option<BigInt> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl Neg for CycInt {
    type Output = CycInt;

    fn neg(self) -> CycInt {
        CycInt {
            p: self.p,
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = c.abs();
            let mono = match j {
                0 => String::new(),
                1 => "ζ".to_string(),
                _ => format!("ζ^{j}"),
            };
            if j == 0 {
                write!(f, "{sign}{mag}")?;
            } else if mag.is_one() {
                write!(f, "{sign}{mono}")?;
            } else {
                write!(f, "{sign}{mag}{mono}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The quadratic Gauss sum `G(η) = Σ_{v ∈ F_p} η(v) ζ^v`.
pub fn gauss_sum(p: u32) -> CycInt {
    let counts: Vec<i64> = (0..p).map(|v| legendre(v as i64, p) as i64).collect();
    CycInt::from_signed_exponent_counts(p, &counts)
}

/// The Gaussian period `Σ_{x ∈ C_i} ζ^x` over the squares (`i = 0`) or the
/// non-squares (`i = 1`).
pub fn gaussian_period(i: u8, p: u32) -> CycInt {
    let target = if i == 0 { 1 } else { -1 };
    let counts: Vec<u64> = (0..p)
        .map(|v| (legendre(v as i64, p) == target) as u64)
        .collect();
    CycInt::from_exponent_counts(p, &counts)
}

/// `G^k` for `G² = p* = η(-1)·p`, kept symbolic so odd powers are never
/// silently turned into integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPrimePower {
    pub p: u32,
    /// `η(-1)`.
    pub star_sign: i8,
    pub exponent: u64,
}

pub fn g_power(p: u32, k: u64) -> SignedPrimePower {
    SignedPrimePower {
        p,
        star_sign: legendre(-1, p),
        exponent: k,
    }
}

impl SignedPrimePower {
    /// `p* = η(-1)·p`.
    pub fn p_star(&self) -> i64 {
        self.star_sign as i64 * self.p as i64
    }

    /// `(p*)^{k/2}`; an error for odd `k`.
    pub fn value(&self) -> Result<BigInt, CycError> {
        if self.exponent % 2 == 1 {
            return Err(CycError::OddExponentValue(self.exponent));
        }
        Ok(BigInt::from(self.p_star()).pow((self.exponent / 2) as u32))
    }

    /// `G^k` as an exact cyclotomic integer.
    pub fn to_cyc(&self) -> CycInt {
        let even = BigInt::from(self.p_star()).pow((self.exponent / 2) as u32);
        if self.exponent % 2 == 1 {
            gauss_sum(self.p).scale(&even)
        } else {
            CycInt::from_integer(self.p, even)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PRIMES: [u32; 5] = [3, 5, 7, 11, 13];

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn random_cyc(rng: &mut ChaCha8Rng, p: u32) -> CycInt {
        let full = (0..p).map(|_| int(rng.gen_range(-20..=20))).collect();
        CycInt::reduce(p, full)
    }

    /// Multiplication through the full length-p convolution with no
    /// intermediate reduction, as an independent oracle.
    fn naive_mul(a: &CycInt, b: &CycInt) -> CycInt {
        let p = a.p() as usize;
        let (x, y) = (a.expand(), b.expand());
        let mut full = vec![BigInt::zero(); p];
        for i in 0..p {
            for j in 0..p {
                full[(i + j) % p] += &x[i] * &y[j];
            }
        }
        CycInt::reduce(a.p(), full)
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(CycInt::root(3, 0).coeffs(), &[int(1), int(0)]);
        assert_eq!(CycInt::root(3, 0), CycInt::one(3));
        assert_eq!(CycInt::root(3, 2).coeffs(), &[int(-1), int(-1)]);
        let total = (0..5).fold(CycInt::zero(5), |acc, k| {
            acc.try_add(&CycInt::root(5, k)).unwrap()
        });
        assert!(total.is_zero());
    }

    #[test]
    fn products() {
        let prod = CycInt::root(3, 1).try_mul(&CycInt::root(3, 2)).unwrap();
        assert_eq!(prod, CycInt::one(3));
        let a = CycInt::root(5, 1).try_add(&CycInt::root(5, 4)).unwrap();
        let b = CycInt::root(5, 2).try_add(&CycInt::root(5, 3)).unwrap();
        assert_eq!(a.try_mul(&b).unwrap().is_rational(), Some(int(-1)));
        assert_eq!(
            CycInt::one(3).try_mul(&CycInt::one(5)).unwrap_err(),
            CycError::PrimeMismatch(3, 5)
        );
    }

    #[test]
    fn rationality() {
        let s = (0..3).fold(CycInt::zero(3), |acc, k| {
            acc.try_add(&CycInt::root(3, k)).unwrap()
        });
        assert_eq!(s.is_rational(), Some(int(0)));
        assert_eq!(CycInt::root(3, 1).is_rational(), None);
        let g = CycInt::root(3, 1).try_sub(&CycInt::root(3, 2)).unwrap();
        assert_eq!(g.try_mul(&g).unwrap().is_rational(), Some(int(-3)));
    }

    #[test]
    fn gauss_sums_square_to_p_star() {
        let g3 = CycInt::root(3, 1).try_sub(&CycInt::root(3, 2)).unwrap();
        assert_eq!(gauss_sum(3), g3);
        for p in PRIMES {
            let g = gauss_sum(p);
            let expected = legendre(-1, p) as i64 * p as i64;
            assert_eq!(
                g.try_mul(&g).unwrap().is_rational(),
                Some(int(expected)),
                "p={p}"
            );
        }
        assert_eq!(gauss_sum(5).pow(2).is_rational(), Some(int(5)));
        assert_eq!(gauss_sum(7).pow(2).is_rational(), Some(int(-7)));
    }

    #[test]
    fn gaussian_period_identities() {
        let p5 = CycInt::root(5, 1).try_add(&CycInt::root(5, 4)).unwrap();
        assert_eq!(gaussian_period(0, 5), p5);
        for p in PRIMES {
            let r0 = gaussian_period(0, p);
            let r1 = gaussian_period(1, p);
            assert_eq!(r0.try_add(&r1).unwrap().is_rational(), Some(int(-1)));
            let lhs = r0.scale(&int(2)).try_add(&CycInt::one(p)).unwrap();
            assert_eq!(lhs, gauss_sum(p), "p={p}");
        }
    }

    #[test]
    fn character_orthogonality() {
        for p in PRIMES {
            for c in 0..p as i64 {
                let s = (0..p as i64).fold(CycInt::zero(p), |acc, k| {
                    acc.try_add(&CycInt::root(p, c * k)).unwrap()
                });
                let expected = if c == 0 { p as i64 } else { 0 };
                assert_eq!(s.is_rational(), Some(int(expected)));
            }
        }
    }

    #[test]
    fn g_powers() {
        assert_eq!(g_power(3, 2).value().unwrap(), int(-3));
        assert_eq!(g_power(3, 4).value().unwrap(), int(9));
        assert_eq!(g_power(5, 0).value().unwrap(), int(1));
        assert_eq!(
            g_power(7, 3).value().unwrap_err(),
            CycError::OddExponentValue(3)
        );
        for p in PRIMES {
            for k in 0..6u32 {
                assert_eq!(g_power(p, k as u64).to_cyc(), gauss_sum(p).pow(k));
            }
        }
    }

    #[test]
    fn ring_laws_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for trial in 0..1000 {
            let p = PRIMES[trial % PRIMES.len()];
            let (a, b, c) = (
                random_cyc(&mut rng, p),
                random_cyc(&mut rng, p),
                random_cyc(&mut rng, p),
            );
            let ab = a.try_mul(&b).unwrap();
            assert_eq!(ab, b.try_mul(&a).unwrap());
            assert_eq!(ab, naive_mul(&a, &b));
            assert_eq!(
                ab.try_mul(&c).unwrap(),
                a.try_mul(&b.try_mul(&c).unwrap()).unwrap()
            );
            assert_eq!(a.try_mul(&CycInt::one(p)).unwrap(), a);
            let k = rng.gen_range(0..p as i64);
            assert_eq!(a.shift(k), a.try_mul(&CycInt::root(p, k)).unwrap());
        }
    }

    #[test]
    fn display() {
        assert_eq!(CycInt::zero(5).to_string(), "0");
        assert_eq!(gauss_sum(3).to_string(), "1+2ζ");
        assert_eq!(CycInt::from_integer(3, -4).to_string(), "-4");
    }

    proptest! {
        #[test]
        fn reduce_expand_round_trip(idx in 0usize..5, raw in proptest::collection::vec(-1000i64..1000, 13)) {
            let p = PRIMES[idx];
            let a = CycInt::reduce(p, raw[..p as usize].iter().map(|&c| int(c)).collect());
            prop_assert_eq!(CycInt::reduce(p, a.expand()), a);
        }

        #[test]
        fn exponent_histogram_matches_root_sum(counts in proptest::collection::vec(0u64..50, 7)) {
            let direct = counts.iter().enumerate().fold(CycInt::zero(7), |acc, (k, &c)| {
                acc.try_add(&CycInt::root(7, k as i64).scale(&BigInt::from(c))).unwrap()
            });
            prop_assert_eq!(CycInt::from_exponent_counts(7, &counts), direct);
        }
    }
}
