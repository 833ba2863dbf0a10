//! Arithmetic in the prime field `F_p` and its extensions `F_{p^e}`.
//!
//! Elements of `F_{p^e}` are plain coefficient vectors over `F_p` with respect
//! to the polynomial basis `1, x, ..., x^{e-1}` of `F_p[x]/(m)`. The context
//! ([`FieldCtx`]) owns the modulus `m` and is passed explicitly to every
//! operation, so elements stay cheap values and contexts are freely shared.
//!
//! Fields with at most [`MAX_TABLE_ORDER`] elements additionally get lazily
//! built log/antilog/trace tables ([`FieldTables`]) addressed by element
//! index; the enumeration cores run on those.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use thiserror::Error;

/// Largest extension degree accepted by [`FieldCtx::new`].
pub const MAX_DEGREE: usize = 16;

/// Largest field order for which index tables are built.
pub const MAX_TABLE_ORDER: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("p must be an odd prime (got {0}, which is not prime)")]
    NonPrime(u64),
    #[error("p must be an odd prime (got 2)")]
    EvenCharacteristic,
    #[error("extension degree {0} is out of range 1..={MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("element does not belong to F_{p}^{e}")]
    FieldMismatch { p: u32, e: usize },
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field of order {p}^{e} exceeds the enumeration limit of {limit} elements")]
    FieldTooLarge { p: u32, e: usize, limit: u64 },
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Modular exponentiation in `Z/pZ`.
pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc = 1u128 % m;
    let mut b = (base as u128) % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Reduces a signed integer into `[0, p)`.
pub fn residue(c: i64, p: u32) -> u32 {
    c.rem_euclid(p as i64) as u32
}

/// Inverse of a nonzero residue modulo the prime `p`.
pub fn inv_mod(c: u32, p: u32) -> Result<u32, GfError> {
    if c.is_multiple_of(p) {
        return Err(GfError::ZeroInverse);
    }
    Ok(pow_mod(c as u64, p as u64 - 2, p as u64) as u32)
}

/// Legendre symbol `(c/p)`, computed as `c^{(p-1)/2} mod p`.
pub fn legendre(c: i64, p: u32) -> i8 {
    let r = residue(c, p);
    if r == 0 {
        return 0;
    }
    match pow_mod(r as u64, (p as u64 - 1) / 2, p as u64) {
        1 => 1,
        _ => -1,
    }
}

/// Index of the cyclotomic class of order two containing `c`: 0 for the
/// nonzero squares, 1 for the non-squares.
pub fn cyclotomic_class(c: i64, p: u32) -> Result<u8, GfError> {
    match legendre(c, p) {
        0 => Err(GfError::ZeroArgument),
        1 => Ok(0),
        _ => Ok(1),
    }
}

/// The members of the cyclotomic class `i` of order two in `F_p^*`, ascending.
pub fn cyclotomic_class_members(i: u8, p: u32) -> Vec<u32> {
    (1..p)
        .filter(|&c| cyclotomic_class(c as i64, p) == Ok(i))
        .collect()
}

/// An element of the prime subfield.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeElem(u32);

impl PrimeElem {
    pub fn new(c: i64, p: u32) -> Self {
        PrimeElem(residue(c, p))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn legendre(self, p: u32) -> i8 {
        legendre(self.0 as i64, p)
    }

    pub fn cyclotomic_class(self, p: u32) -> Result<u8, GfError> {
        cyclotomic_class(self.0 as i64, p)
    }
}

impl fmt::Display for PrimeElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of `F_{p^e}`: `coeffs[j]` is the coefficient of `x^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FFElem {
    coeffs: Vec<u32>,
}

impl FFElem {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

// ---------------------------------------------------------------------------
// Polynomials over F_p (coefficient vectors, constant term first).

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|j| {
            let x = a.get(j).copied().unwrap_or(0);
            let y = b.get(j).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

/// Remainder of `a` modulo `b` (`b` nonzero, any leading coefficient).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p).expect("trimmed polynomial has a nonzero lead") as u64;
    while r.len() > db {
        let dr = r.len() - 1;
        let factor = (r[dr] as u64 * lead_inv) % p as u64;
        let shift = dr - db;
        for (j, &bj) in b.iter().enumerate() {
            let sub = (factor * bj as u64) % p as u64;
            r[shift + j] = ((r[shift + j] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Product of two reduced residues modulo a monic modulus of degree `e`.
fn mul_mod_poly(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let e = modulus.len() - 1;
    let pp = p as u64;
    let mut prod = vec![0u64; 2 * e.max(1) - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % pp;
        }
    }
    for d in (e..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        // x^d = x^{d-e} * x^e and x^e = -(m_0 + ... + m_{e-1} x^{e-1})
        for (j, &mj) in modulus[..e].iter().enumerate() {
            let t = &mut prod[d - e + j];
            *t = (*t + (pp - c) * mj as u64) % pp;
        }
        prod[d] = 0;
    }
    prod[..e].iter().map(|&c| c as u32).collect()
}

fn pow_mod_poly(base: &[u32], exp: &BigUint, modulus: &[u32], p: u32) -> Vec<u32> {
    let e = modulus.len() - 1;
    let mut acc = vec![0u32; e];
    acc[0] = 1 % p;
    if e == 1 {
        acc[0] = 1;
    }
    let bits = exp.bits();
    for bit in (0..bits).rev() {
        acc = mul_mod_poly(&acc, &acc, modulus, p);
        if exp.bit(bit) {
            acc = mul_mod_poly(&acc, base, modulus, p);
        }
    }
    acc
}

/// Irreducibility test: `gcd(x^{p^k} - x, m) = 1` for every `1 <= k <= e/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = trim(modulus.to_vec());
    if m.len() < 2 {
        return false;
    }
    let e = m.len() - 1;
    if e == 1 {
        return true;
    }
    let pexp = BigUint::from(p);
    let mut h = vec![0u32; e];
    h[1] = 1;
    let x = h.clone();
    for _ in 1..=e / 2 {
        h = pow_mod_poly(&h, &pexp, &m, p);
        let diff = poly_sub(&h, &x, p);
        if diff.is_empty() {
            return false;
        }
        if poly_gcd(&m, &diff, p).len() != 1 {
            return false;
        }
    }
    true
}

/// All monic irreducible polynomials of degree `e` over `F_p` in
/// lexicographic order of their coefficient lists (constant term compared
/// first). Each item includes the leading 1.
pub fn irreducible_moduli(p: u32, e: usize) -> impl Iterator<Item = Vec<u32>> {
    let mut low = vec![0u32; e];
    let mut done = e == 0;
    std::iter::from_fn(move || {
        while !done {
            let mut candidate = low.clone();
            candidate.push(1);
            // odometer with the highest non-leading coefficient varying fastest
            let mut j = e;
            loop {
                if j == 0 {
                    done = true;
                    break;
                }
                j -= 1;
                low[j] += 1;
                if low[j] < p {
                    break;
                }
                low[j] = 0;
            }
            if is_irreducible(&candidate, p) {
                return Some(candidate);
            }
        }
        None
    })
}

/// The finite field `F_{p^e}` with a fixed irreducible modulus.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    e: usize,
    modulus: Vec<u32>,
    tables: OnceLock<Option<Arc<FieldTables>>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

fn check_characteristic(p: u32) -> Result<(), GfError> {
    if p == 2 {
        return Err(GfError::EvenCharacteristic);
    }
    if !is_prime(p as u64) {
        return Err(GfError::NonPrime(p as u64));
    }
    Ok(())
}

impl FieldCtx {
    /// `F_{p^e}` with the lexicographically smallest monic irreducible modulus.
    pub fn new(p: u32, e: usize) -> Result<Self, GfError> {
        check_characteristic(p)?;
        if e == 0 || e > MAX_DEGREE {
            return Err(GfError::DegreeTooLarge(e));
        }
        let modulus = irreducible_moduli(p, e)
            .next()
            .expect("irreducible polynomials exist in every degree");
        Ok(Self::from_parts(p, modulus))
    }

    /// `F_{p^e}` with a caller-supplied monic irreducible modulus (coefficients
    /// constant term first, leading 1 included).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self, GfError> {
        check_characteristic(p)?;
        if modulus.len() < 2 {
            return Err(GfError::InvalidModulus("degree must be at least 1".into()));
        }
        let e = modulus.len() - 1;
        if e > MAX_DEGREE {
            return Err(GfError::DegreeTooLarge(e));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(GfError::InvalidModulus(format!(
                "coefficients must lie in [0, {p})"
            )));
        }
        if modulus[e] != 1 {
            return Err(GfError::InvalidModulus("polynomial is not monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(GfError::InvalidModulus(format!(
                "{} is reducible over F_{p}",
                format_poly(&modulus)
            )));
        }
        Ok(Self::from_parts(p, modulus))
    }

    fn from_parts(p: u32, modulus: Vec<u32>) -> Self {
        FieldCtx {
            p,
            e: modulus.len() - 1,
            modulus,
            tables: OnceLock::new(),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.e
    }

    /// Modulus coefficients, constant term first, leading 1 included.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `q = p^e`, or `None` if it does not fit in a `u64`.
    pub fn order(&self) -> Option<u64> {
        (self.p as u64).checked_pow(self.e as u32)
    }

    pub fn order_big(&self) -> BigUint {
        BigUint::from(self.p).pow(self.e as u32)
    }

    pub fn zero(&self) -> FFElem {
        FFElem {
            coeffs: vec![0; self.e],
        }
    }

    pub fn one(&self) -> FFElem {
        self.constant(1)
    }

    /// The image of an integer in the prime subfield.
    pub fn constant(&self, c: i64) -> FFElem {
        let mut coeffs = vec![0; self.e];
        coeffs[0] = residue(c, self.p);
        FFElem { coeffs }
    }

    /// The class of `x` in `F_p[x]/(m)`.
    pub fn generator(&self) -> FFElem {
        let mut coeffs = vec![0; self.e];
        if self.e == 1 {
            coeffs[0] = (self.p - self.modulus[0]) % self.p;
        } else {
            coeffs[1] = 1;
        }
        FFElem { coeffs }
    }

    /// Validated element constructor.
    pub fn element(&self, coeffs: Vec<u32>) -> Result<FFElem, GfError> {
        let a = FFElem { coeffs };
        self.check(&a)?;
        Ok(a)
    }

    fn check(&self, a: &FFElem) -> Result<(), GfError> {
        if a.coeffs.len() != self.e || a.coeffs.iter().any(|&c| c >= self.p) {
            return Err(GfError::FieldMismatch {
                p: self.p,
                e: self.e,
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> Result<FFElem, GfError> {
        self.check(a)?;
        self.check(b)?;
        let p = self.p;
        Ok(FFElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| (x + y) % p)
                .collect(),
        })
    }

    pub fn neg(&self, a: &FFElem) -> Result<FFElem, GfError> {
        self.check(a)?;
        let p = self.p;
        Ok(FFElem {
            coeffs: a.coeffs.iter().map(|&x| (p - x) % p).collect(),
        })
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> Result<FFElem, GfError> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// Multiplication by a prime-field scalar.
    pub fn scale(&self, a: &FFElem, c: i64) -> Result<FFElem, GfError> {
        self.check(a)?;
        let p = self.p as u64;
        let c = residue(c, self.p) as u64;
        Ok(FFElem {
            coeffs: a
                .coeffs
                .iter()
                .map(|&x| (x as u64 * c % p) as u32)
                .collect(),
        })
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> Result<FFElem, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(FFElem {
            coeffs: mul_mod_poly(&a.coeffs, &b.coeffs, &self.modulus, self.p),
        })
    }

    pub fn pow(&self, a: &FFElem, n: u64) -> Result<FFElem, GfError> {
        self.pow_big(a, &BigUint::from(n))
    }

    /// Square-and-multiply exponentiation with an arbitrary-size exponent.
    pub fn pow_big(&self, a: &FFElem, n: &BigUint) -> Result<FFElem, GfError> {
        self.check(a)?;
        Ok(FFElem {
            coeffs: pow_mod_poly(&a.coeffs, n, &self.modulus, self.p),
        })
    }

    /// `a^{-1} = a^{q-2}`.
    pub fn inv(&self, a: &FFElem) -> Result<FFElem, GfError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        self.pow_big(a, &(self.order_big() - 2u32))
    }

    /// `a^p`.
    pub fn frobenius(&self, a: &FFElem) -> Result<FFElem, GfError> {
        self.pow(a, self.p as u64)
    }

    /// `a^{p^k}`; `k` is reduced modulo `e`.
    pub fn frobenius_pow(&self, a: &FFElem, k: u64) -> Result<FFElem, GfError> {
        let mut out = a.clone();
        for _ in 0..(k % self.e as u64) {
            out = self.frobenius(&out)?;
        }
        Ok(out)
    }

    /// Absolute trace `Tr(a) = a + a^p + ... + a^{p^{e-1}}`.
    pub fn trace(&self, a: &FFElem) -> Result<PrimeElem, GfError> {
        self.check(a)?;
        let mut acc = a.clone();
        let mut conj = a.clone();
        for _ in 1..self.e {
            conj = self.frobenius(&conj)?;
            acc = self.add(&acc, &conj)?;
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
        Ok(PrimeElem(acc.coeffs[0]))
    }

    /// Quadratic character of `F_q`: `a^{(q-1)/2}` mapped to `{-1, 0, 1}`.
    pub fn quad_char_ext(&self, a: &FFElem) -> Result<i8, GfError> {
        self.check(a)?;
        if a.is_zero() {
            return Ok(0);
        }
        let half = (self.order_big() - 1u32) >> 1;
        let r = self.pow_big(a, &half)?;
        Ok(if r == self.one() { 1 } else { -1 })
    }

    /// Enumeration index of `a`: `sum_j coeffs[j] * p^j`.
    pub fn index_of(&self, a: &FFElem) -> Result<u64, GfError> {
        self.check(a)?;
        let q = self.order().ok_or(GfError::FieldTooLarge {
            p: self.p,
            e: self.e,
            limit: u64::MAX,
        })?;
        debug_assert!(q > 0);
        Ok(a.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64))
    }

    /// Inverse of [`FieldCtx::index_of`]; the index is taken modulo `q`.
    pub fn element_at(&self, mut index: u64) -> FFElem {
        let p = self.p as u64;
        let coeffs = (0..self.e)
            .map(|_| {
                let c = (index % p) as u32;
                index /= p;
                c
            })
            .collect();
        FFElem { coeffs }
    }

    /// Every element of the field exactly once, in index order (coefficient 0
    /// varies fastest).
    pub fn elements(&self) -> Elements {
        Elements {
            p: self.p,
            next: Some(vec![0; self.e]),
        }
    }

    /// Index tables for this field, built on first use.
    pub fn tables(&self) -> Result<&FieldTables, GfError> {
        self.tables
            .get_or_init(|| match self.order() {
                Some(q) if q <= MAX_TABLE_ORDER => Some(Arc::new(FieldTables::build(self))),
                _ => None,
            })
            .as_deref()
            .ok_or(GfError::FieldTooLarge {
                p: self.p,
                e: self.e,
                limit: MAX_TABLE_ORDER,
            })
    }

    /// Human-readable modulus, highest degree first.
    pub fn modulus_string(&self) -> String {
        format_poly(&self.modulus)
    }
}

/// Renders a coefficient list (constant term first) as `x^3+2x+1`.
pub fn format_poly(coeffs: &[u32]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| {
            let mono = match j {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{j}"),
            };
            match (c, j) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// Iterator over all field elements; see [`FieldCtx::elements`].
pub struct Elements {
    p: u32,
    next: Option<Vec<u32>>,
}

impl Iterator for Elements {
    type Item = FFElem;

    fn next(&mut self) -> Option<FFElem> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut wrapped = true;
        for c in succ.iter_mut() {
            *c += 1;
            if *c < self.p {
                wrapped = false;
                break;
            }
            *c = 0;
        }
        if !wrapped {
            self.next = Some(succ);
        }
        Some(FFElem { coeffs: current })
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Index-addressed lookup tables for a small field.
///
/// Elements are identified by their enumeration index. `exp[k]` is the index
/// of `g^k` for a fixed primitive element `g`, `log` is its inverse on nonzero
/// indices, and `trace[i]` is the absolute trace of element `i`.
#[derive(Debug)]
pub struct FieldTables {
    p: u32,
    q: u32,
    primitive: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
}

impl FieldTables {
    fn build(ctx: &FieldCtx) -> Self {
        let p = ctx.p;
        let q = ctx.order().expect("checked by caller");
        let index = |a: &FFElem| ctx.index_of(a).expect("valid element") as u32;

        // Tr is F_p-linear, so the traces of the basis monomials determine it.
        let mut basis_traces = Vec::with_capacity(ctx.e);
        let mut mono = ctx.one();
        for _ in 0..ctx.e {
            basis_traces.push(ctx.trace(&mono).expect("valid element").value() as u64);
            mono = ctx.mul(&mono, &ctx.generator()).expect("valid element");
        }
        let trace = (0..q)
            .map(|i| {
                let a = ctx.element_at(i);
                let t: u64 = a
                    .coeffs
                    .iter()
                    .zip(&basis_traces)
                    .map(|(&c, &t)| c as u64 * t)
                    .sum();
                (t % p as u64) as u32
            })
            .collect();

        let order = q - 1;
        let factors = prime_factors(order);
        let one = ctx.one();
        let primitive = (1..q)
            .map(|i| ctx.element_at(i))
            .find(|g| {
                factors
                    .iter()
                    .all(|&r| ctx.pow(g, order / r).expect("valid element") != one)
            })
            .expect("the multiplicative group is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = one;
        for k in 0..order {
            let idx = index(&cur);
            exp.push(idx);
            log[idx as usize] = k as u32;
            cur = ctx.mul(&cur, &primitive).expect("valid element");
        }
        FieldTables {
            p,
            q: q as u32,
            primitive: index(&primitive),
            exp,
            log,
            trace,
        }
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Index of the primitive element used for the log tables.
    pub fn primitive(&self) -> u32 {
        self.primitive
    }

    /// Discrete log of a nonzero index.
    pub fn log(&self, a: u32) -> Option<u32> {
        match self.log[a as usize] {
            u32::MAX => None,
            l => Some(l),
        }
    }

    /// Index of `g^k`, `k` taken modulo `q - 1`.
    pub fn exp(&self, k: u64) -> u32 {
        self.exp[(k % (self.q as u64 - 1)) as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match (self.log(a), self.log(b)) {
            (Some(x), Some(y)) => self.exp(x as u64 + y as u64),
            _ => 0,
        }
    }

    pub fn pow(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(x) => {
                let m = self.q as u64 - 1;
                self.exp(((x as u64 % m) * (n % m)) % m)
            }
        }
    }

    pub fn trace(&self, a: u32) -> u32 {
        self.trace[a as usize]
    }

    /// Trace of every element, indexed by element index.
    pub fn traces(&self) -> &[u32] {
        &self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Irreducibility oracle for degree <= 3: no root in F_p.
    fn has_root(poly: &[u32], p: u32) -> bool {
        (0..p).any(|x| {
            let v = poly
                .iter()
                .rev()
                .fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p as u64);
            v == 0
        })
    }

    /// Trial division by every monic polynomial of degree <= deg/2.
    fn irreducible_by_trial_division(poly: &[u32], p: u32) -> bool {
        let e = poly.len() - 1;
        for d in 1..=e / 2 {
            let count = (p as u64).pow(d as u32);
            for idx in 0..count {
                let mut div: Vec<u32> = (0..d)
                    .scan(idx, |rest, _| {
                        let c = (*rest % p as u64) as u32;
                        *rest /= p as u64;
                        Some(c)
                    })
                    .collect();
                div.push(1);
                if poly_rem(poly, &div, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn degree_one_modulus_is_x() {
        let ctx = FieldCtx::new(3, 1).unwrap();
        assert_eq!(ctx.modulus(), &[0, 1]);
        let elems: Vec<_> = ctx.elements().map(|a| a.coeffs()[0]).collect();
        assert_eq!(elems, vec![0, 1, 2]);
    }

    #[test]
    fn cubic_modulus_over_f3_is_smallest_irreducible() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        let m = ctx.modulus().to_vec();
        assert!(!has_root(&m, 3));
        assert!(irreducible_by_trial_division(&m, 3));
        // every lexicographically smaller monic cubic is reducible
        let mut smaller = 0;
        for idx in 0..27u32 {
            let cand = vec![idx / 9, (idx / 3) % 3, idx % 3, 1];
            if cand < m {
                smaller += 1;
                assert!(has_root(&cand, 3), "{cand:?} should be reducible");
            }
        }
        assert!(smaller > 0);
        assert_eq!(m, vec![1, 0, 2, 1]);
    }

    #[test]
    fn quadratic_modulus_over_f5_has_no_root() {
        let ctx = FieldCtx::new(5, 2).unwrap();
        assert!(!has_root(ctx.modulus(), 5));
        assert_eq!(ctx.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn irreducibility_matches_trial_division() {
        for (p, e) in [(3u32, 2usize), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2)] {
            let count = (p as u64).pow(e as u32);
            for idx in 0..count {
                let mut poly: Vec<u32> = (0..e)
                    .scan(idx, |rest, _| {
                        let c = (*rest % p as u64) as u32;
                        *rest /= p as u64;
                        Some(c)
                    })
                    .collect();
                poly.push(1);
                assert_eq!(
                    is_irreducible(&poly, p),
                    irreducible_by_trial_division(&poly, p),
                    "p={p} poly={poly:?}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_characteristic_and_degree() {
        assert_eq!(
            FieldCtx::new(2, 3).unwrap_err(),
            GfError::EvenCharacteristic
        );
        assert_eq!(FieldCtx::new(9, 2).unwrap_err(), GfError::NonPrime(9));
        assert_eq!(
            FieldCtx::new(3, 17).unwrap_err(),
            GfError::DegreeTooLarge(17)
        );
        assert!(FieldCtx::new(3, 0).is_err());
        assert!(FieldCtx::with_modulus(3, vec![1, 0, 1, 1]).is_err()); // x^3+x^2+1 has root 1
        assert!(FieldCtx::with_modulus(3, vec![1, 2, 0, 2]).is_err());
    }

    #[test]
    fn mul_x_by_x_reduces_modulo_modulus() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        // modulus x^2 + 1, so x^2 = -1 = 2
        assert_eq!(ctx.modulus(), &[1, 0, 1]);
        let x = ctx.generator();
        assert_eq!(ctx.mul(&x, &x).unwrap().coeffs(), &[2, 0]);
    }

    #[test]
    fn fermat_and_inverses_exhaustive_f27() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        let one = ctx.one();
        for a in ctx.elements().filter(|a| !a.is_zero()) {
            assert_eq!(ctx.pow(&a, 26).unwrap(), one);
            let inv = ctx.inv(&a).unwrap();
            assert_eq!(ctx.mul(&inv, &a).unwrap(), one);
        }
        assert_eq!(ctx.inv(&ctx.zero()).unwrap_err(), GfError::ZeroInverse);
    }

    #[test]
    fn mismatched_elements_are_rejected() {
        let f9 = FieldCtx::new(3, 2).unwrap();
        let f27 = FieldCtx::new(3, 3).unwrap();
        let a = f27.one();
        assert!(matches!(
            f9.mul(&a, &f9.one()),
            Err(GfError::FieldMismatch { .. })
        ));
        assert!(f9.element(vec![3, 0]).is_err());
    }

    #[test]
    fn frobenius_order_divides_degree() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        assert!(ctx.frobenius(&ctx.zero()).unwrap().is_zero());
        for c in 0..3 {
            let a = ctx.constant(c);
            assert_eq!(ctx.frobenius(&a).unwrap(), a);
        }
        for a in ctx.elements() {
            let mut b = a.clone();
            for _ in 0..3 {
                b = ctx.frobenius(&b).unwrap();
            }
            assert_eq!(a, b);
        }
    }

    #[test]
    fn trace_values() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        assert_eq!(ctx.trace(&ctx.zero()).unwrap().value(), 0);
        assert_eq!(ctx.trace(&ctx.one()).unwrap().value(), 0); // e = 3 = 0 mod 3
        let ctx5 = FieldCtx::new(5, 2).unwrap();
        assert_eq!(ctx5.trace(&ctx5.one()).unwrap().value(), 2);
        let kernel = ctx
            .elements()
            .filter(|a| ctx.trace(a).unwrap().is_zero())
            .count();
        assert_eq!(kernel, 9);
    }

    #[test]
    fn legendre_by_squaring() {
        for p in [3u32, 5, 7, 11, 13] {
            let squares: Vec<u32> = (1..p).map(|x| x * x % p).collect();
            for c in 1..p {
                let expected = if squares.contains(&c) { 1 } else { -1 };
                assert_eq!(legendre(c as i64, p), expected);
            }
            assert_eq!(legendre(0, p), 0);
            assert_eq!(legendre(1, p), 1);
        }
        assert_eq!(legendre(-1, 3), -1);
        assert_eq!(legendre(-1, 5), 1);
        assert_eq!(legendre(2, 7), 1);
    }

    #[test]
    fn cyclotomic_classes() {
        assert_eq!(cyclotomic_class(1, 3), Ok(0));
        assert_eq!(cyclotomic_class(2, 3), Ok(1));
        assert_eq!(cyclotomic_class_members(0, 7), vec![1, 2, 4]);
        assert_eq!(cyclotomic_class_members(1, 7), vec![3, 5, 6]);
        assert_eq!(cyclotomic_class(0, 7), Err(GfError::ZeroArgument));
    }

    #[test]
    fn quadratic_character_on_prime_subfield() {
        // even degree: every element of F_p^* is a square in F_q
        let ctx = FieldCtx::new(5, 2).unwrap();
        for y in 1..5 {
            assert_eq!(ctx.quad_char_ext(&ctx.constant(y)).unwrap(), 1);
        }
        // odd degree: agrees with the Legendre symbol; check against squares in F_27
        let ctx = FieldCtx::new(3, 3).unwrap();
        let squares: Vec<FFElem> = ctx
            .elements()
            .filter(|a| !a.is_zero())
            .map(|a| ctx.mul(&a, &a).unwrap())
            .collect();
        let two = ctx.constant(2);
        assert!(!squares.contains(&two));
        assert_eq!(ctx.quad_char_ext(&two).unwrap(), -1);
        assert_eq!(ctx.quad_char_ext(&ctx.one()).unwrap(), 1);
        assert_eq!(ctx.quad_char_ext(&ctx.zero()).unwrap(), 0);
    }

    #[test]
    fn enumeration_order_and_count() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        let all: Vec<FFElem> = ctx.elements().collect();
        assert_eq!(all.len(), 27);
        assert!(all[0].is_zero());
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 27);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(ctx.index_of(a).unwrap(), i as u64);
            assert_eq!(&ctx.element_at(i as u64), a);
        }
        assert_eq!(FieldCtx::new(5, 2).unwrap().elements().count(), 25);
    }

    #[test]
    fn tables_agree_with_polynomial_arithmetic() {
        for (p, e) in [(3u32, 3usize), (5, 2), (7, 2), (3, 4)] {
            let ctx = FieldCtx::new(p, e).unwrap();
            let t = ctx.tables().unwrap();
            let q = ctx.order().unwrap();
            for i in 0..q {
                let a = ctx.element_at(i);
                assert_eq!(t.trace(i as u32), ctx.trace(&a).unwrap().value());
                for j in (0..q).step_by(7) {
                    let b = ctx.element_at(j);
                    let prod = ctx.index_of(&ctx.mul(&a, &b).unwrap()).unwrap();
                    assert_eq!(t.mul(i as u32, j as u32) as u64, prod);
                }
                let cube = ctx.index_of(&ctx.pow(&a, p as u64 + 1).unwrap()).unwrap();
                assert_eq!(t.pow(i as u32, p as u64 + 1) as u64, cube);
            }
        }
    }

    #[test]
    fn big_fields_have_no_tables() {
        let ctx = FieldCtx::new(3, 16).unwrap();
        assert!(matches!(ctx.tables(), Err(GfError::FieldTooLarge { .. })));
        assert!(ctx.modulus().len() == 17);
    }
}
