//! Weil sums `S(α, β) = Σ_x ζ^{Tr(α x^{p^l+1} + βx)}`, the linearized affine
//! equation that governs their value, and the aggregated character sums
//! `δ_1`, `δ_2`, `δ_3` used for lengths and weights of the trace codes.

use num_bigint::BigInt;
use num_integer::Integer;
use thiserror::Error;

use crate::cyclotomic::{g_power, CycError, CycInt};
use crate::gf::{
    cyclotomic_class_members, legendre, FFElem, FieldCtx, FieldTables, GfError, MAX_TABLE_ORDER,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpSumError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Cyc(#[from] CycError),
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("closed form is only available for l = 1 (got l = {0})")]
    UnsupportedExponent(u64),
    #[error("character sum is not a rational integer: {0}")]
    NonRationalSum(String),
    #[error("solutions of the affine equation give different trace values")]
    InconsistentSolutions,
}

/// Parameters of a Weil sum. `s = gcd(l, e)` is derived.
#[derive(Debug, Clone)]
pub struct WeilParams<'a> {
    pub ctx: &'a FieldCtx,
    pub alpha: FFElem,
    pub beta: FFElem,
    pub l: u64,
}

impl<'a> WeilParams<'a> {
    pub fn new(
        ctx: &'a FieldCtx,
        alpha: FFElem,
        beta: FFElem,
        l: u64,
    ) -> Result<Self, ExpSumError> {
        ctx.element(alpha.coeffs().to_vec())?;
        ctx.element(beta.coeffs().to_vec())?;
        if alpha.is_zero() {
            return Err(ExpSumError::ZeroAlpha);
        }
        if l == 0 {
            return Err(ExpSumError::UnsupportedExponent(0));
        }
        Ok(WeilParams {
            ctx,
            alpha,
            beta,
            l,
        })
    }

    pub fn s(&self) -> u64 {
        self.l.gcd(&(self.ctx.degree() as u64))
    }
}

/// `Σ_{x ∈ F_q} ζ^{f(x)}` where `f` maps an element index to an exponent.
pub fn additive_character_sum(tables: &FieldTables, mut f: impl FnMut(u32) -> u32) -> CycInt {
    let p = tables.p();
    let mut counts = vec![0u64; p as usize];
    for x in 0..tables.order() {
        counts[(f(x) % p) as usize] += 1;
    }
    CycInt::from_exponent_counts(p, &counts)
}

fn index(ctx: &FieldCtx, a: &FFElem) -> Result<u32, GfError> {
    Ok(ctx.index_of(a)? as u32)
}

/// Exact `S(α, β)` by summing over every `x ∈ F_q`.
pub fn weil_sum_bruteforce(params: &WeilParams) -> Result<CycInt, ExpSumError> {
    let ctx = params.ctx;
    let t = ctx.tables()?;
    let p = ctx.p();
    let a = index(ctx, &params.alpha)?;
    let b = index(ctx, &params.beta)?;
    // x^{p^l + 1}: p^l only matters modulo q - 1
    let q1 = t.order() as u64 - 1;
    let mut pl_mod = 1u64;
    for _ in 0..params.l {
        pl_mod = pl_mod * p as u64 % q1;
    }
    let exp = pl_mod + 1;
    Ok(additive_character_sum(t, |x| {
        t.trace(t.mul(a, t.pow(x, exp))) + t.trace(t.mul(b, x))
    }))
}

/// `S(α, β)` from the closed forms for `l = 1`.
///
/// Odd `e`: `G^e η'(α) ζ^{Tr(-α x0^{p+1})}` with `x0` the unique solution of
/// the affine equation. Even `e = 2m`: `(-1)^m p^m ζ^{...}` when
/// `α^{(q-1)/(p+1)} != (-1)^m`, otherwise `(-1)^{m+1} p^{m+1} ζ^{...}` if the
/// equation is solvable and 0 if not.
pub fn weil_sum_closed(params: &WeilParams) -> Result<CycInt, ExpSumError> {
    if params.l != 1 {
        return Err(ExpSumError::UnsupportedExponent(params.l));
    }
    let ctx = params.ctx;
    let p = ctx.p();
    let e = ctx.degree() as u64;
    let report = solve_affine(ctx, &params.alpha, &params.beta, 1)?;
    let phase = |x0: &FFElem| -> Result<u32, ExpSumError> {
        let v = ctx.mul(&params.alpha, &ctx.pow(x0, p as u64 + 1)?)?;
        Ok(ctx.trace(&ctx.neg(&v)?)?.value())
    };
    let common_phase = || -> Result<Option<u32>, ExpSumError> {
        let mut it = report.solutions.iter();
        let Some(first) = it.next() else {
            return Ok(None);
        };
        let t0 = phase(first)?;
        for x in it {
            if phase(x)? != t0 {
                return Err(ExpSumError::InconsistentSolutions);
            }
        }
        Ok(Some(t0))
    };

    if e % 2 == 1 {
        let t0 = common_phase()?.expect("the affine map is a permutation for odd e");
        let eta = ctx.quad_char_ext(&params.alpha)?;
        let value = g_power(p, e).to_cyc().scale(&BigInt::from(eta));
        return Ok(value.shift(t0 as i64));
    }

    let m = e / 2;
    let q = ctx.order_big();
    let t = ctx.pow_big(&params.alpha, &((q - 1u32) / (p + 1)))?;
    let sign_m: i64 = if m.is_multiple_of(2) { 1 } else { -1 };
    let pp = BigInt::from(p);
    let (magnitude, t0) = if t != ctx.constant(sign_m) {
        let t0 = common_phase()?.expect("the affine map is a permutation here");
        (BigInt::from(sign_m) * pp.pow(m as u32), t0)
    } else {
        match common_phase()? {
            None => return Ok(CycInt::zero(p)),
            Some(t0) => (BigInt::from(-sign_m) * pp.pow(m as u32 + 1), t0),
        }
    };
    Ok(CycInt::from_integer(p, magnitude).shift(t0 as i64))
}

/// All solutions of `α^{p^l} X^{p^{2l}} + αX = -β^{p^l}` in `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvabilityReport {
    /// Solutions in enumeration order.
    pub solutions: Vec<FFElem>,
}

impl SolvabilityReport {
    pub fn solvable(&self) -> bool {
        !self.solutions.is_empty()
    }

    pub fn count(&self) -> usize {
        self.solutions.len()
    }
}

/// Solves the linearized equation as an `F_p`-linear system in the
/// coordinates of `X`: particular solution plus kernel.
pub fn solve_affine(
    ctx: &FieldCtx,
    alpha: &FFElem,
    beta: &FFElem,
    l: u64,
) -> Result<SolvabilityReport, ExpSumError> {
    if ctx.order().is_none_or(|q| q > MAX_TABLE_ORDER) {
        return Err(GfError::FieldTooLarge {
            p: ctx.p(),
            e: ctx.degree(),
            limit: MAX_TABLE_ORDER,
        }
        .into());
    }
    let e = ctx.degree();
    let p = ctx.p();
    let alpha_pl = ctx.frobenius_pow(alpha, l)?;
    let map = |x: &FFElem| -> Result<FFElem, GfError> {
        let a = ctx.mul(&alpha_pl, &ctx.frobenius_pow(x, 2 * l)?)?;
        let b = ctx.mul(alpha, x)?;
        ctx.add(&a, &b)
    };
    let rhs = ctx.neg(&ctx.frobenius_pow(beta, l)?)?;

    // columns are images of the basis x^j
    let mut columns = Vec::with_capacity(e);
    for j in 0..e {
        let mut basis = vec![0u32; e];
        basis[j] = 1;
        columns.push(map(&ctx.element(basis)?)?);
    }
    let rows: Vec<Vec<u32>> = (0..e)
        .map(|r| columns.iter().map(|c| c.coeffs()[r]).collect())
        .collect();
    let Some((particular, kernel)) = solve_linear_system(rows, rhs.coeffs().to_vec(), p) else {
        return Ok(SolvabilityReport { solutions: vec![] });
    };

    let pp = p as u64;
    let total = pp.pow(kernel.len() as u32);
    let mut solutions = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let mut v = particular.clone();
        for k in &kernel {
            let c = idx % pp;
            idx /= pp;
            for (vi, &ki) in v.iter_mut().zip(k) {
                *vi = ((*vi as u64 + c * ki as u64) % pp) as u32;
            }
        }
        solutions.push(ctx.element(v)?);
    }
    solutions.sort_by_key(|x| ctx.index_of(x).expect("valid element"));
    Ok(SolvabilityReport { solutions })
}

/// Solves `A v = b` over `F_p`. Returns a particular solution and a basis of
/// the kernel, or `None` if the system is inconsistent.
fn solve_linear_system(
    mut a: Vec<Vec<u32>>,
    mut b: Vec<u32>,
    p: u32,
) -> Option<(Vec<u32>, Vec<Vec<u32>>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let pp = p as u64;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, pr);
        b.swap(r, pr);
        let inv = crate::gf::inv_mod(a[r][c], p).expect("nonzero pivot") as u64;
        for x in a[r].iter_mut() {
            *x = (*x as u64 * inv % pp) as u32;
        }
        b[r] = (b[r] as u64 * inv % pp) as u32;
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c] as u64;
                for k in 0..cols {
                    a[i][k] = ((a[i][k] as u64 + (pp - f) * a[r][k] as u64) % pp) as u32;
                }
                b[i] = ((b[i] as u64 + (pp - f) * b[r] as u64) % pp) as u32;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|&x| x != 0) {
        return None;
    }
    let mut particular = vec![0u32; cols];
    for (row, &c) in pivots.iter().enumerate() {
        particular[c] = b[row];
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![0u32; cols];
            v[f] = 1;
            for (row, &c) in pivots.iter().enumerate() {
                v[c] = (p - a[row][f]) % p;
            }
            v
        })
        .collect();
    Some((particular, kernel))
}

fn rational(sum: CycInt) -> Result<BigInt, ExpSumError> {
    sum.is_rational()
        .ok_or_else(|| ExpSumError::NonRationalSum(sum.to_string()))
}

/// Histogram of `Tr(x^{p+1}) - Tr(x)` over `F_q`.
fn defining_trace_histogram(tables: &FieldTables) -> Vec<u64> {
    let p = tables.p();
    let mut h = vec![0u64; p as usize];
    for x in 0..tables.order() {
        let t = (tables.trace(tables.pow(x, p as u64 + 1)) + p - tables.trace(x)) % p;
        h[t as usize] += 1;
    }
    h
}

/// `δ_{1,i} = Σ_{c ∈ C_i} Σ_{y ∈ F_p^*} ζ^{-cy} Σ_x ζ^{Tr(y x^{p+1} - y x)}`.
pub fn delta1(ctx: &FieldCtx, i: u8) -> Result<BigInt, ExpSumError> {
    let t = ctx.tables()?;
    let p = ctx.p() as u64;
    let h = defining_trace_histogram(t);
    let mut counts = vec![0u64; p as usize];
    for c in cyclotomic_class_members(i, ctx.p()) {
        for y in 1..p {
            for (v, &n) in h.iter().enumerate() {
                let k = y * ((v as u64 + p - c as u64) % p) % p;
                counts[k as usize] += n;
            }
        }
    }
    rational(CycInt::from_exponent_counts(ctx.p(), &counts))
}

/// `δ_{2,i} = Σ_{c ∈ C_i} Σ_{z ∈ F_p^*} Σ_x ζ^{Tr(azx)}`.
pub fn delta2(ctx: &FieldCtx, i: u8, a: &FFElem) -> Result<BigInt, ExpSumError> {
    let t = ctx.tables()?;
    let p = ctx.p() as u64;
    let ai = index(ctx, a)?;
    let mut h = vec![0u64; p as usize];
    for x in 0..t.order() {
        h[t.trace(t.mul(ai, x)) as usize] += 1;
    }
    let class_size = cyclotomic_class_members(i, ctx.p()).len() as u64;
    let mut counts = vec![0u64; p as usize];
    for z in 1..p {
        for (v, &n) in h.iter().enumerate() {
            counts[(z * v as u64 % p) as usize] += n * class_size;
        }
    }
    rational(CycInt::from_exponent_counts(ctx.p(), &counts))
}

/// `δ_{3,i} = Σ_{c ∈ C_i} Σ_{y ∈ F_p^*} ζ^{-cy} Σ_{z ∈ F_p^*} Σ_x ζ^{Tr(y x^{p+1} + (az - y) x)}`.
pub fn delta3(ctx: &FieldCtx, i: u8, a: &FFElem) -> Result<BigInt, ExpSumError> {
    let t = ctx.tables()?;
    let p = ctx.p() as u64;
    let ai = index(ctx, a)?;
    // joint histogram of (Tr(x^{p+1}) - Tr(x), Tr(ax))
    let mut joint = vec![0u64; (p * p) as usize];
    for x in 0..t.order() {
        let u = (t.trace(t.pow(x, p + 1)) as u64 + p - t.trace(x) as u64) % p;
        let w = t.trace(t.mul(ai, x)) as u64;
        joint[(u * p + w) as usize] += 1;
    }
    let mut counts = vec![0u64; p as usize];
    for c in cyclotomic_class_members(i, ctx.p()) {
        for y in 1..p {
            for z in 1..p {
                for u in 0..p {
                    for w in 0..p {
                        let n = joint[(u * p + w) as usize];
                        if n == 0 {
                            continue;
                        }
                        let k = (y * ((u + p - c as u64) % p) + z * w) % p;
                        counts[k as usize] += n;
                    }
                }
            }
        }
    }
    rational(CycInt::from_exponent_counts(ctx.p(), &counts))
}

/// `δ_{1,i}` from its six-branch closed form.
pub fn delta1_closed(p: u32, e: usize, i: u8) -> Result<BigInt, ExpSumError> {
    let pp = BigInt::from(p);
    let half = (p as i64 - 1) / 2;
    let sign_i: i64 = if i == 0 { 1 } else { -1 };
    let eta_m1 = legendre(-1, p) as i64;
    let p_div_e = (e as u64).is_multiple_of(p as u64);
    let e_i = e as i64;
    let value = if e % 2 == 1 {
        let g = g_power(p, e as u64 + 1).value()?;
        if p_div_e {
            g * (sign_i * eta_m1 * half)
        } else {
            let num = sign_i + legendre(e_i, p) as i64;
            debug_assert!(num % 2 == 0);
            g * (-(num / 2) * eta_m1)
        }
    } else {
        let extra = if e % 4 == 2 { 0 } else { 1 };
        let pw = pp.pow((e / 2 + extra) as u32);
        if p_div_e {
            pw * half
        } else {
            let num = sign_i * legendre(-e_i, p) as i64 * p as i64 + 1;
            debug_assert!(num % 2 == 0);
            pw * (-(num / 2))
        }
    };
    Ok(value)
}
