//! Closed-form predictions for the trace codes and their verification.
//!
//! Table rows, lengths and counting formulas are expressions of the fixed
//! shape `Σ c·p^a·G^b` with rational `c` and `G² = η(-1)·p`. They are
//! evaluated exactly; a row that needs an odd power of `G`, or evaluates to a
//! non-integer or negative number, is reported as an anomaly rather than
//! rejected.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::codes::{defining_set, weight_distribution, CodeError, WeightDistribution};
use crate::cyclotomic::CycError;
use crate::gf::{is_prime, legendre, FieldCtx, GfError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Cyc(#[from] CycError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("e = {0} is outside the theorems' scope (e >= 2 required)")]
    OutOfScope(usize),
    #[error("no closed form for {0}")]
    BranchUnavailable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} is not an integer")]
    NonInteger(String),
}

// ---------------------------------------------------------------------------
// Expressions

#[derive(Debug, Clone, PartialEq, Eq)]
struct Term {
    coeff: BigRational,
    p_exp: i64,
    g_exp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Expr(Vec<Term>);

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn t(coeff: BigRational, p_exp: i64, g_exp: i64) -> Expr {
    Expr(vec![Term {
        coeff,
        p_exp,
        g_exp,
    }])
}

impl std::ops::Add for Expr {
    type Output = Expr;

    fn add(mut self, rhs: Expr) -> Expr {
        self.0.extend(rhs.0);
        self
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr(
            self.0
                .into_iter()
                .map(|t| Term {
                    coeff: -t.coeff,
                    ..t
                })
                .collect(),
        )
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

fn rational_pow(base: i64, exp: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(base));
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        num_traits::pow(b.recip(), (-exp) as usize)
    }
}

impl Expr {
    /// Exact value, or the first odd power of `G` encountered.
    fn eval(&self, p: u32) -> Result<BigRational, i64> {
        let p_star = legendre(-1, p) as i64 * p as i64;
        let mut acc = BigRational::zero();
        for term in &self.0 {
            if term.coeff.is_zero() {
                continue;
            }
            if term.g_exp % 2 != 0 {
                return Err(term.g_exp);
            }
            acc += &term.coeff
                * rational_pow(p as i64, term.p_exp)
                * rational_pow(p_star, term.g_exp / 2);
        }
        Ok(acc)
    }
}

fn integral(value: BigRational, what: &str) -> Result<BigInt, TheoryError> {
    if value.is_integer() {
        Ok(value.to_integer())
    } else {
        Err(TheoryError::NonInteger(format!("{what} = {value}")))
    }
}

fn eval_integer(expr: &Expr, p: u32, what: &str) -> Result<BigInt, TheoryError> {
    let v = expr
        .eval(p)
        .map_err(|k| TheoryError::Cyc(CycError::OddExponentValue(k.unsigned_abs())))?;
    integral(v, what)
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaseKey {
    pub p: u32,
    pub e: usize,
    pub i: u8,
    pub e_odd: bool,
    pub e_mod4: u8,
    pub p_divides_e: bool,
    /// `(e/p)`.
    pub legendre_e: i8,
    /// `(-e/p)`.
    pub legendre_neg_e: i8,
    /// `η(-1)`.
    pub eta_minus1: i8,
    /// Table selected by the table captions, which key even `e` on `(-e/p)`.
    pub table: u8,
    /// Theorem that lists [`CaseKey::table`].
    pub theorem: u8,
    /// Theorem whose hypothesis holds when read with `(e/p)`, as the theorem
    /// statements are written.
    pub statement_theorem: u8,
}

impl CaseKey {
    /// `(-1)^i`.
    pub fn sign_i(&self) -> i64 {
        if self.i == 0 {
            1
        } else {
            -1
        }
    }
}

fn check_prime(p: u32) -> Result<(), TheoryError> {
    if p == 2 {
        return Err(GfError::EvenCharacteristic.into());
    }
    if !is_prime(p as u64) {
        return Err(GfError::NonPrime(p as u64).into());
    }
    Ok(())
}

pub fn classify(p: u32, e: usize, i: u8) -> Result<CaseKey, TheoryError> {
    check_prime(p)?;
    if e < 2 {
        return Err(TheoryError::OutOfScope(e));
    }
    if i > 1 {
        return Err(CodeError::InvalidClass(i).into());
    }
    let sign_i: i8 = if i == 0 { 1 } else { -1 };
    let p_divides_e = (e as u64).is_multiple_of(p as u64);
    let legendre_e = legendre(e as i64, p);
    let legendre_neg_e = legendre(-(e as i64), p);
    let pick = |base: u8, symbol: i8| -> u8 {
        if p_divides_e {
            base
        } else if symbol == sign_i {
            base + 1
        } else {
            base + 2
        }
    };
    let (table, statement_theorem) = if e % 2 == 1 {
        (pick(1, legendre_e), pick(1, legendre_e))
    } else if e % 4 == 2 {
        (pick(4, legendre_neg_e), pick(4, legendre_e))
    } else {
        (pick(7, legendre_neg_e), pick(7, legendre_e))
    };
    Ok(CaseKey {
        p,
        e,
        i,
        e_odd: e % 2 == 1,
        e_mod4: (e % 4) as u8,
        p_divides_e,
        legendre_e,
        legendre_neg_e,
        eta_minus1: legendre(-1, p),
        table,
        theorem: table,
        statement_theorem,
    })
}

// ---------------------------------------------------------------------------
// Lengths

fn base_length(p: i64, e: i64) -> Expr {
    t(q(p - 1, 2), e - 1, 0)
}

/// `n_i` from the length lemma.
pub fn length_closed(p: u32, e: usize, i: u8) -> Result<BigInt, TheoryError> {
    let key = classify(p, e, i)?;
    let (pi, ei) = (p as i64, e as i64);
    let s = key.sign_i();
    let eta_e = key.legendre_e as i64;
    let eta_ne = key.legendre_neg_e as i64;
    let expr = if key.e_odd {
        if key.p_divides_e {
            base_length(pi, ei) + t(q(s * (pi - 1), 2), 0, ei - 1)
        } else {
            base_length(pi, ei) - t(q(s + eta_e, 2), 0, ei - 1)
        }
    } else {
        let half = if key.e_mod4 == 2 { ei / 2 - 1 } else { ei / 2 };
        if key.p_divides_e {
            base_length(pi, ei) + t(q(pi - 1, 2), half, 0)
        } else {
            base_length(pi, ei) - t(q(s * eta_ne * pi + 1, 2), half, 0)
        }
    };
    eval_integer(&expr, p, "length")
}

/// The length `[n, e]` claimed in the statement of `theorem`.
pub fn theorem_length_claim(theorem: u8, p: u32, e: usize, i: u8) -> Result<BigInt, TheoryError> {
    check_prime(p)?;
    let (pi, ei) = (p as i64, e as i64);
    let s: i64 = if i == 0 { 1 } else { -1 };
    let h = legendre(-1, p) as i64;
    let expr = match theorem {
        1 => base_length(pi, ei) + t(q(s * (pi - 1), 2), 0, ei - 1),
        2 => base_length(pi, ei) - t(q(s, 1), 0, ei - 1),
        3 => base_length(pi, ei),
        4 => base_length(pi, ei) + t(q(pi - 1, 2), ei / 2 - 1, 0),
        5 => base_length(pi, ei) - t(q(1 + h * pi, 2), ei / 2 - 1, 0),
        6 => base_length(pi, ei) - t(q(1 - h * pi, 2), ei / 2 - 1, 0),
        7 => base_length(pi, ei) + t(q(pi - 1, 2), ei / 2, 0),
        8 => base_length(pi, ei) - t(q(1 + h * pi, 2), ei / 2, 0),
        9 => base_length(pi, ei) - t(q(1 - h * pi, 2), ei / 2, 0),
        _ => {
            return Err(TheoryError::InvalidArgument(format!(
                "no theorem {theorem}"
            )))
        }
    };
    eval_integer(&expr, p, "claimed length")
}

// ---------------------------------------------------------------------------
// Tables

fn table_rows(table: u8, p: u32, e: usize, i: u8) -> Vec<(Expr, Expr)> {
    let (p, e) = (p as i64, e as i64);
    let s: i64 = if i == 0 { 1 } else { -1 };
    let h = legendre(-1, p as u32) as i64;
    let a = || t(q((p - 1) * (p - 1), 2), e - 2, 0);
    let one = || t(q(1, 1), 0, 0);
    match table {
        1 => {
            let w2 = || a() + t(q(s * (p - 1), 2), 0, e - 1);
            vec![
                (a(), t(q(1, 1), e - 2, 0) - one()),
                (w2(), t(q(p - 1, 1), e - 2, 0)),
                (
                    w2() + t(q(s * (p - 1), 2), 0, e - 3),
                    t(q(p - 1, 2), e - 2, 0) - t(q(s * (p - 1), 2), 0, e - 1)
                        + t(q((1 - h) * (p - 1) * (p - 1), 4), e - 2, 0),
                ),
                (
                    w2() - t(q(s * (p - 1), 2), 0, e - 3),
                    t(q(p - 1, 2), e - 1, 0)
                        + t(q(s * (p - 1), 2), 0, e - 1)
                        + t(q((1 + h) * (p - 1) * (p - 1), 4), e - 2, 0),
                ),
                (
                    w2() - t(q(s * (p + 1), 2), 0, e + 3),
                    t(q((p - 1) * (p - 1), 2), e - 2, 0),
                ),
            ]
        }
        2 => {
            let sh = s * h;
            let w2 = || a() - t(q(s, 1), 0, e - 1);
            vec![
                (
                    a(),
                    t(q(1, 1), e - 2, 0) - one() + t(q(sh * (p - 1), 1), 0, e - 3),
                ),
                (
                    w2(),
                    t(q(p - 1, 1), e - 2, 0) - t(q(sh * (p - 1), 1), 0, e - 3),
                ),
                (
                    w2() - t(q(sh * (p - 1), 2), 0, e - 3),
                    t(q((p - 1) * (p - 1), 4), e - 2, 0)
                        - t(q(sh * (p - 1) * (p - 1), 4), 0, e - 3),
                ),
                (
                    w2() + t(q(sh * (p - 1), 2), 0, e - 3),
                    t(q((p - 1) * (p + 3), 4), e - 2, 0)
                        + t(q(sh * 3 * (p - 1) * (p - 1), 4), 0, e - 3),
                ),
                (
                    w2() + t(q(sh * (p + 1), 2), 0, e - 3),
                    t(q(p * p - 1, 4), e - 2, 0) - t(q(sh * (p * p - 1), 4), 0, e - 3),
                ),
                (
                    w2() - t(q(sh * (p + 1), 2), 0, e - 3),
                    t(q((p - 1) * (p - 3), 4), e - 2, 0)
                        - t(q(sh * (p - 1) * (p - 3), 4), 0, e - 3),
                ),
            ]
        }
        3 => {
            let sh = s * h;
            let m45 =
                || t(q((p - 1) * (p - 1), 4), e - 2, 0) + t(q(sh * (p - 1) * (p - 1), 4), 0, e - 3);
            vec![
                (a(), t(q(1, 1), e - 1, 0) - one()),
                (
                    a() + t(q(sh * (p - 1), 2), 0, e - 3),
                    t(q(p * p - 1, 4), e - 2, 0) + t(q(sh * (p * p - 1), 4), 0, e - 3),
                ),
                (
                    a() - t(q(sh * (p - 1), 2), 0, e - 3),
                    t(q(p * p - 1, 4), e - 2, 0) - t(q(sh * (p - 1) * (3 * p - 1), 4), 0, e - 3),
                ),
                (a() - t(q(s * (p + 1), 2), 0, e - 3), m45()),
                (a() + t(q(s * (p + 1), 2), 0, e - 3), m45()),
            ]
        }
        4 => {
            let k = e / 2 - 1;
            vec![
                (a(), t(q(p + 1, 2), e - 2, 0) - one() - t(q(p - 1, 2), k, 0)),
                (a() + t(q(p - 1, 2), k, 0), t(q(p * p - 1, 2), e - 2, 0)),
                (
                    a() + t(q(p - 1, 1), k, 0),
                    t(q(p - 1, 2), e - 2, 0) + t(q(p - 1, 2), k, 0),
                ),
                (
                    a() + t(q(p - 3, 2), k, 0),
                    t(q((p - 1) * (p - 1), 2), e - 2, 0),
                ),
            ]
        }
        5 => {
            let k = e / 2 - 1;
            vec![
                (a(), t(q(1, 1), e - 2, 0) - one()),
                (
                    a() - t(q(p + 1, 2), k, 0),
                    t(q(p * p - 1, 2), e - 2, 0) - t(q(p - 1, 1), k, 0),
                ),
                (
                    a() - t(q(p + 3, 2), k, 0),
                    t(q((p - 1) * (p - 3), 4), e - 2, 0) - t(q((p - 1) * (p - 3), 4), k, 0),
                ),
                (
                    a() - t(q(p - 1, 2), k, 0),
                    t(q(p * p - 1, 4), e - 2, 0) + t(q(p * p - 1, 4), k, 0),
                ),
                (a() - t(q(1, 1), k, 0), t(q(p - 1, 1), e - 2, 0)),
            ]
        }
        6 => {
            let k = e / 2 - 1;
            vec![
                (a(), t(q(1, 1), e - 1, 0) - one()),
                (a() + t(q(p - 1, 2), k, 0), t(q(p * p - 1, 2), e - 2, 0)),
                (
                    a() + t(q(p - 3, 2), k, 0),
                    t(q((p - 1) * (p - 1), 4), e - 2, 0) - t(q((p - 1) * (p - 1), 4), k, 0),
                ),
                (
                    a() + t(q(p + 1, 2), k, 0),
                    t(q((p - 1) * (p - 1), 4), e - 2, 0) + t(q((p - 1) * (p - 1), 4), k, 0),
                ),
            ]
        }
        7 => {
            let k = e / 2;
            vec![
                (
                    a() + t(q((p - 1) * (p - 1), 2), e / 2 - 1, 0),
                    t(q(1, 1), e, 0) - t(q(1, 1), e - 2, 0),
                ),
                (
                    a(),
                    t(q(p + 1, 2), e - 4, 0) - one() - t(q(p - 1, 2), e / 2 - 2, 0),
                ),
                (a() + t(q(p - 1, 2), k, 0), t(q(p * p - 1, 2), e - 4, 0)),
                (
                    a() + t(q(p - 1, 1), k, 0),
                    t(q(p - 1, 2), e - 4, 0) + t(q(p - 1, 2), e / 2 - 2, 0),
                ),
                (
                    a() + t(q(p - 3, 2), k, 0),
                    t(q((p - 1) * (p - 1), 2), e - 4, 0),
                ),
            ]
        }
        8 => {
            let k = e / 2;
            vec![
                (
                    a() - t(q(p * p - 1, 2), e / 2 - 1, 0),
                    t(q(1, 1), e, 0) - t(q(1, 1), e - 2, 0),
                ),
                (a(), t(q(1, 1), e - 4, 0) - one()),
                (
                    a() - t(q(p + 1, 2), k, 0),
                    t(q(p * p - 1, 2), e - 4, 0) - t(q(p - 1, 1), e / 2 - 2, 0),
                ),
                (
                    a() - t(q(p + 3, 2), k, 0),
                    t(q((p - 1) * (p - 3), 4), e - 4, 0) - t(q((p - 1) * (p - 3), 4), e / 2 - 2, 0),
                ),
                (
                    a() - t(q(p - 1, 2), k, 0),
                    t(q(p * p - 1, 4), e - 4, 0) + t(q(p * p - 1, 4), e / 2 - 2, 0),
                ),
                (a() - t(q(1, 1), k, 0), t(q(p - 1, 1), e - 4, 0)),
            ]
        }
        9 => {
            let k = e / 2;
            vec![
                (
                    a() + t(q((p - 1) * (p - 1), 2), e / 2 - 1, 0),
                    t(q(1, 1), e, 0) - t(q(1, 1), e - 2, 0),
                ),
                (a(), t(q(1, 1), e - 3, 0) - one()),
                (a() + t(q(p - 1, 2), k, 0), t(q(p * p - 1, 2), e - 4, 0)),
                (
                    a() + t(q(p - 3, 2), k, 0),
                    t(q((p - 1) * (p - 1), 4), e - 4, 0) - t(q((p - 1) * (p - 1), 4), e / 2 - 2, 0),
                ),
                (
                    a() + t(q(p + 1, 2), k, 0),
                    t(q((p - 1) * (p - 1), 4), e - 4, 0) + t(q((p - 1) * (p - 1), 4), e / 2 - 2, 0),
                ),
            ]
        }
        _ => unreachable!("tables are numbered 1..=9"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    Weight,
    Multiplicity,
}

impl Column {
    pub fn as_str(self) -> &'static str {
        match self {
            Column::Weight => "weight",
            Column::Multiplicity => "multiplicity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnomalyKind {
    /// The expression contains `G^k` with `k` odd, which has no integer value.
    OddGPower {
        exponent: i64,
    },
    NonInteger {
        value: String,
    },
    Negative {
        value: BigInt,
    },
    /// A weight larger than the code length.
    ExceedsLength {
        weight: BigInt,
        length: BigInt,
    },
}

impl AnomalyKind {
    pub fn code(&self) -> &'static str {
        match self {
            AnomalyKind::OddGPower { .. } => "odd-g-power",
            AnomalyKind::NonInteger { .. } => "non-integer",
            AnomalyKind::Negative { .. } => "negative",
            AnomalyKind::ExceedsLength { .. } => "exceeds-length",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anomaly {
    /// Table row, counted from 1 below the weight-0 row.
    pub row: usize,
    pub column: Column,
    pub kind: AnomalyKind,
}

impl fmt::Display for Anomaly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail = match &self.kind {
            AnomalyKind::OddGPower { exponent } => format!("needs G^{exponent}"),
            AnomalyKind::NonInteger { value } => format!("evaluates to {value}"),
            AnomalyKind::Negative { value } => format!("evaluates to {value}"),
            AnomalyKind::ExceedsLength { weight, length } => {
                format!("weight {weight} exceeds length {length}")
            }
        };
        write!(
            f,
            "row {} {}: {} ({})",
            self.row,
            self.column.as_str(),
            self.kind.code(),
            detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedRow {
    /// 0 for the weight-0 row, then table rows from 1.
    pub row: usize,
    pub weight: Option<BigInt>,
    pub multiplicity: Option<BigInt>,
}

impl PredictedRow {
    /// A row whose multiplicity evaluates to 0; kept, but absent from the code.
    pub fn is_empty(&self) -> bool {
        self.multiplicity.as_ref().is_some_and(|m| m.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedDistribution {
    pub theorem: u8,
    pub table: u8,
    pub rows: Vec<PredictedRow>,
    pub anomalies: Vec<Anomaly>,
}

impl PredictedDistribution {
    /// Weight → multiplicity over rows with integral values, rows of equal
    /// weight merged and multiplicity-0 rows dropped.
    pub fn distribution(&self) -> BTreeMap<BigInt, BigInt> {
        let mut out: BTreeMap<BigInt, BigInt> = BTreeMap::new();
        for row in &self.rows {
            if let (Some(w), Some(m)) = (&row.weight, &row.multiplicity) {
                *out.entry(w.clone()).or_default() += m;
            }
        }
        out.retain(|_, m| !m.is_zero());
        out
    }

    /// Multiplicities sum to `p^e` and weights are distinct.
    pub fn is_consistent(&self, p: u32, e: usize) -> bool {
        let total: BigInt = self
            .rows
            .iter()
            .filter_map(|r| r.multiplicity.clone())
            .sum();
        let mut weights: Vec<&BigInt> =
            self.rows.iter().filter_map(|r| r.weight.as_ref()).collect();
        let n = weights.len();
        weights.sort();
        weights.dedup();
        self.rows
            .iter()
            .all(|r| r.weight.is_some() && r.multiplicity.is_some())
            && total == BigInt::from(p).pow(e as u32)
            && weights.len() == n
    }
}

fn evaluate_cell(
    expr: &Expr,
    p: u32,
    row: usize,
    column: Column,
    anomalies: &mut Vec<Anomaly>,
) -> Option<BigInt> {
    let push = |kind, anomalies: &mut Vec<Anomaly>| anomalies.push(Anomaly { row, column, kind });
    match expr.eval(p) {
        Err(exponent) => {
            push(AnomalyKind::OddGPower { exponent }, anomalies);
            None
        }
        Ok(v) if !v.is_integer() => {
            push(
                AnomalyKind::NonInteger {
                    value: v.to_string(),
                },
                anomalies,
            );
            None
        }
        Ok(v) => {
            let v = v.to_integer();
            if v.is_negative() {
                push(AnomalyKind::Negative { value: v.clone() }, anomalies);
            }
            Some(v)
        }
    }
}

/// Evaluates the table selected by [`classify`], row by row.
pub fn predicted_table(p: u32, e: usize, i: u8) -> Result<PredictedDistribution, TheoryError> {
    let key = classify(p, e, i)?;
    let length = length_closed(p, e, i)?;
    let mut anomalies = Vec::new();
    let mut rows = vec![PredictedRow {
        row: 0,
        weight: Some(BigInt::zero()),
        multiplicity: Some(BigInt::one()),
    }];
    for (idx, (w, m)) in table_rows(key.table, p, e, i).iter().enumerate() {
        let row = idx + 1;
        let multiplicity = evaluate_cell(m, p, row, Column::Multiplicity, &mut anomalies);
        // weight problems in an empty row never reach the code
        let populated = multiplicity.as_ref().is_none_or(|m| !m.is_zero());
        let mut weight_anomalies = Vec::new();
        let weight = evaluate_cell(w, p, row, Column::Weight, &mut weight_anomalies);
        if let (Some(wv), true) = (&weight, populated) {
            if *wv > length {
                weight_anomalies.push(Anomaly {
                    row,
                    column: Column::Weight,
                    kind: AnomalyKind::ExceedsLength {
                        weight: wv.clone(),
                        length: length.clone(),
                    },
                });
            }
        }
        if populated {
            anomalies.extend(weight_anomalies);
        }
        rows.push(PredictedRow {
            row,
            weight,
            multiplicity,
        });
    }
    Ok(PredictedDistribution {
        theorem: key.theorem,
        table: key.table,
        rows,
        anomalies,
    })
}

// ---------------------------------------------------------------------------
// Counting lemmas

/// The point counts used in the weight-distribution proofs. Throughout,
/// `u = Tr(x^{p+1})` and `v = Tr(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Counting {
    /// `u = 0, v = 0`.
    N00,
    /// `u = 0, v != 0`.
    N00bar,
    /// `(u/p) = (-1)^l, v = 0`.
    M0 { l: u8 },
    /// `(u/p) = (-1)^l, v != 0`.
    M0bar { l: u8 },
    /// `u != 0, v != 0, v² = e·u`.
    NbarE,
    /// `u != 0, v != 0, v² = s·u` for `s ∈ F_p^*`, `s != e`.
    V { s: u32 },
    /// `s ∈ F_p^* \ {e}` with `(s/p) = (-1)^k`, `((s-e)/p) = (-1)^j·η(-1)`.
    Nu { k: u8, j: u8 },
    /// `u ∈ C_k, v != 0, v² != e·u, (e·u - v²)/u ∈ C_j`.
    N4 { k: u8, j: u8 },
}

impl fmt::Display for Counting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counting::N00 => write!(f, "N(0,0)"),
            Counting::N00bar => write!(f, "N(0,0bar)"),
            Counting::M0 { l } => write!(f, "M({l},0)"),
            Counting::M0bar { l } => write!(f, "M({l},0bar)"),
            Counting::NbarE => write!(f, "N(0bar,0bar,e)"),
            Counting::V { s } => write!(f, "|V_{s}|"),
            Counting::Nu { k, j } => write!(f, "|nu({k},{j})|"),
            Counting::N4 { k, j } => write!(f, "N({k},0bar,0bar,{j})"),
        }
    }
}

fn check_bit(name: &str, v: u8) -> Result<i64, TheoryError> {
    match v {
        0 => Ok(1),
        1 => Ok(-1),
        _ => Err(TheoryError::InvalidArgument(format!(
            "{name} must be 0 or 1"
        ))),
    }
}

/// Every counting with a closed form at `(p, e)`, over all admissible
/// arguments.
pub fn counting_cases(p: u32, e: usize) -> Vec<Counting> {
    let mut out = vec![Counting::N00, Counting::N00bar];
    for l in 0..2 {
        out.push(Counting::M0 { l });
        out.push(Counting::M0bar { l });
    }
    if !(e as u64).is_multiple_of(p as u64) {
        out.push(Counting::NbarE);
        let e_mod = (e as u64 % p as u64) as u32;
        out.extend((1..p).filter(|&s| s != e_mod).map(|s| Counting::V { s }));
        for k in 0..2 {
            for j in 0..2 {
                out.push(Counting::Nu { k, j });
                out.push(Counting::N4 { k, j });
            }
        }
    }
    out
}

/// Closed-form value of a counting function.
pub fn counting_closed(which: Counting, p: u32, e: usize) -> Result<BigInt, TheoryError> {
    check_prime(p)?;
    if e == 0 {
        return Err(TheoryError::OutOfScope(e));
    }
    let (pi, ei) = (p as i64, e as i64);
    let p_div_e = ei % pi == 0;
    let odd = e % 2 == 1;
    let mod4 = e % 4;
    let h = legendre(-1, p) as i64;
    let eta_e = legendre(ei, p) as i64;
    let eta_ne = legendre(-ei, p) as i64;
    let requires_coprime = |name: &str| -> Result<(), TheoryError> {
        if p_div_e {
            Err(TheoryError::BranchUnavailable(format!("{name} when p | e")))
        } else {
            Ok(())
        }
    };
    // p^{e/2-1} for e ≡ 2 mod 4 and p^{e/2} for e ≡ 0 mod 4
    let even_k = if mod4 == 2 { ei / 2 - 1 } else { ei / 2 };
    let name = which.to_string();

    let expr = match which {
        Counting::N00 => {
            let base = t(q(1, 1), ei - 2, 0);
            if odd && p_div_e {
                base
            } else if odd {
                base + t(q(eta_ne * (pi - 1), 1), -2, ei + 1)
            } else if p_div_e {
                base - t(q(pi - 1, 1), even_k, 0)
            } else {
                base
            }
        }
        Counting::N00bar => {
            let base = t(q(pi - 1, 1), ei - 2, 0);
            if p_div_e {
                base
            } else if odd {
                base - t(q(eta_ne * (pi - 1), 1), -2, ei + 1)
            } else {
                base - t(q(pi - 1, 1), even_k, 0)
            }
        }
        Counting::M0 { l } => {
            let sl = check_bit("l", l)?;
            let base = t(q(pi - 1, 2), ei - 2, 0);
            if odd && p_div_e {
                base + t(q(sl * h * (pi - 1), 2), -1, ei + 1)
            } else if odd {
                base - t(q(eta_ne * (pi - 1), 2), -2, ei + 1)
            } else if p_div_e {
                base + t(q(pi - 1, 2), even_k, 0)
            } else {
                base - t(q(sl * eta_ne * (pi - 1), 2), even_k, 0)
            }
        }
        Counting::M0bar { l } => {
            let sl = check_bit("l", l)?;
            let base = t(q((pi - 1) * (pi - 1), 2), ei - 2, 0);
            if p_div_e {
                base
            } else if odd {
                base + t(q((sl * h * pi + eta_ne) * (pi - 1), 2), -2, ei + 1)
            } else {
                base + t(q((1 + sl * eta_ne) * (pi - 1), 2), even_k, 0)
            }
        }
        Counting::NbarE => {
            requires_coprime(&name)?;
            let base = t(q(pi - 1, 1), ei - 2, 0);
            if odd {
                base + t(q(eta_ne * (pi - 1) * (pi - 1), 1), -2, ei + 1)
            } else {
                base
            }
        }
        Counting::V { s } => {
            requires_coprime(&name)?;
            let s_mod = s as i64 % pi;
            if s_mod == 0 || s_mod == ei % pi {
                return Err(TheoryError::InvalidArgument(format!(
                    "s must lie in F_{p}^* and differ from e"
                )));
            }
            let base = t(q(pi - 1, 1), ei - 2, 0);
            if odd {
                base - t(q(eta_ne * (pi - 1), 1), -2, ei + 1)
            } else {
                let sign = legendre(s_mod, p) as i64 * legendre(s_mod - ei, p) as i64;
                base - t(q(sign * (pi - 1), 1), even_k, 0)
            }
        }
        Counting::Nu { k, j } => {
            requires_coprime(&name)?;
            let (sk, sj) = (check_bit("k", k)?, check_bit("j", j)?);
            t(q(pi - 2 - sk * eta_e - sj * eta_e - sk * sj * h, 4), 0, 0)
        }
        Counting::N4 { k, j } => {
            requires_coprime(&name)?;
            let (sk, sj) = (check_bit("k", k)?, check_bit("j", j)?);
            let nu = t(q(pi - 2 - sk * eta_e - sj * eta_e - sk * sj * h, 4), 0, 0)
                .eval(p)
                .expect("no G terms");
            let v = if odd {
                t(q(pi - 1, 1), ei - 2, 0) - t(q(eta_ne * (pi - 1), 1), -2, ei + 1)
            } else {
                t(q(pi - 1, 1), ei - 2, 0) - t(q(sk * sj * h * (pi - 1), 1), even_k, 0)
            };
            let v = v
                .eval(p)
                .map_err(|k| TheoryError::Cyc(CycError::OddExponentValue(k.unsigned_abs())))?;
            return integral(nu * v, &name);
        }
    };
    eval_integer(&expr, p, &name)
}

/// Literal count of the set defining `which`, by enumeration.
pub fn counting_bruteforce(which: Counting, ctx: &FieldCtx) -> Result<u64, TheoryError> {
    let p = ctx.p();
    let pi = p as i64;
    let e_mod = (ctx.degree() as u64 % p as u64) as i64;
    let class_sign = |v: i64| legendre(v, p) as i64;
    if let Counting::Nu { k, j } = which {
        let (sk, sj) = (check_bit("k", k)?, check_bit("j", j)?);
        let h = legendre(-1, p) as i64;
        return Ok((1..pi)
            .filter(|&s| s != e_mod && class_sign(s) == sk && class_sign(s - e_mod) == sj * h)
            .count() as u64);
    }
    if let Counting::V { s } = which {
        let s = s as i64 % pi;
        if s == 0 || s == e_mod {
            return Err(TheoryError::InvalidArgument(format!(
                "s must lie in F_{p}^* and differ from e"
            )));
        }
    }
    let sl = match which {
        Counting::M0 { l } | Counting::M0bar { l } => check_bit("l", l)?,
        Counting::N4 { k, .. } => check_bit("k", k)?,
        _ => 1,
    };
    let sj = match which {
        Counting::N4 { j, .. } => check_bit("j", j)?,
        _ => 1,
    };
    let tables = ctx.tables()?;
    let mut count = 0u64;
    for x in 0..tables.order() {
        let u = tables.trace(tables.pow(x, p as u64 + 1)) as i64;
        let v = tables.trace(x) as i64;
        let v2 = v * v % pi;
        let hit = match which {
            Counting::N00 => u == 0 && v == 0,
            Counting::N00bar => u == 0 && v != 0,
            Counting::M0 { .. } => u != 0 && class_sign(u) == sl && v == 0,
            Counting::M0bar { .. } => u != 0 && class_sign(u) == sl && v != 0,
            Counting::NbarE => u != 0 && v != 0 && v2 == e_mod * u % pi,
            Counting::V { s } => u != 0 && v != 0 && v2 == s as i64 * u % pi,
            Counting::N4 { .. } => {
                if u == 0 || v == 0 || v2 == e_mod * u % pi || class_sign(u) != sl {
                    false
                } else {
                    let u_inv = crate::gf::inv_mod(u as u32, p).expect("u != 0") as i64;
                    let ratio = (e_mod * u - v2).rem_euclid(pi) * u_inv % pi;
                    class_sign(ratio) == sj
                }
            }
            Counting::Nu { .. } => unreachable!("handled above"),
        };
        count += hit as u64;
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Match,
    Mismatch,
    FormulaAnomaly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Match => "MATCH",
            Verdict::Mismatch => "MISMATCH",
            Verdict::FormulaAnomaly => "FORMULA_ANOMALY",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Verdict::Match, Verdict::Mismatch, Verdict::FormulaAnomaly]
            .into_iter()
            .find(|v| v.as_str() == s)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One weight in the predicted/enumerated diff; absent sides count as 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDiff {
    pub weight: BigInt,
    pub predicted: BigInt,
    pub enumerated: BigInt,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub case: CaseKey,
    pub modulus: Vec<u32>,
    pub predicted: PredictedDistribution,
    pub enumerated: WeightDistribution,
    /// Length claimed by the statement of `case.statement_theorem`.
    pub claimed_length: BigInt,
    /// `[n, e]` per the theorem statement equals the enumerated `[n, k]`.
    pub parameter_match: bool,
    pub rows_matched: Vec<RowDiff>,
    pub rows_mismatched: Vec<RowDiff>,
    pub verdict: Verdict,
}

/// Diffs two weight → multiplicity maps over the union of their weights.
pub fn diff_distributions(
    predicted: &BTreeMap<BigInt, BigInt>,
    enumerated: &BTreeMap<BigInt, BigInt>,
) -> (Vec<RowDiff>, Vec<RowDiff>) {
    let mut weights: Vec<&BigInt> = predicted.keys().chain(enumerated.keys()).collect();
    weights.sort();
    weights.dedup();
    let zero = BigInt::zero();
    let (mut matched, mut mismatched) = (Vec::new(), Vec::new());
    for w in weights {
        let d = RowDiff {
            weight: w.clone(),
            predicted: predicted.get(w).unwrap_or(&zero).clone(),
            enumerated: enumerated.get(w).unwrap_or(&zero).clone(),
        };
        if d.predicted == d.enumerated {
            matched.push(d);
        } else {
            mismatched.push(d);
        }
    }
    (matched, mismatched)
}

/// Predicts the distribution of `C_{D_i}` over `ctx`, enumerates it, and
/// compares the two exactly.
pub fn verify(ctx: &FieldCtx, i: u8, budget: u64) -> Result<VerifyReport, TheoryError> {
    let (p, e) = (ctx.p(), ctx.degree());
    let case = classify(p, e, i)?;
    let predicted = predicted_table(p, e, i)?;
    let set = defining_set(ctx, i)?;
    let enumerated = weight_distribution(&set, budget)?;
    let claimed_length = theorem_length_claim(case.statement_theorem, p, e, i)?;
    let parameter_match =
        claimed_length == BigInt::from(enumerated.n()) && enumerated.k() as usize == e;

    let enumerated_map: BTreeMap<BigInt, BigInt> = enumerated
        .counts()
        .iter()
        .map(|(&w, &c)| (BigInt::from(w), BigInt::from(c)))
        .collect();
    let (rows_matched, rows_mismatched) =
        diff_distributions(&predicted.distribution(), &enumerated_map);
    let verdict = if rows_mismatched.is_empty() {
        Verdict::Match
    } else if predicted.anomalies.is_empty() {
        Verdict::Mismatch
    } else {
        Verdict::FormulaAnomaly
    };
    Ok(VerifyReport {
        case,
        modulus: ctx.modulus().to_vec(),
        predicted,
        enumerated,
        claimed_length,
        parameter_match,
        rows_matched,
        rows_mismatched,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::DEFAULT_BUDGET;

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn map(pairs: &[(i64, i64)]) -> BTreeMap<BigInt, BigInt> {
        pairs.iter().map(|&(w, m)| (int(w), int(m))).collect()
    }

    #[test]
    fn dispatch_examples() {
        assert_eq!(classify(3, 3, 0).unwrap().theorem, 1);
        assert_eq!(classify(5, 2, 0).unwrap().theorem, 6);
        assert_eq!(classify(7, 4, 0).unwrap().theorem, 9);
        assert_eq!(classify(7, 4, 0).unwrap().statement_theorem, 8);
        assert_eq!(classify(7, 4, 1).unwrap().table, 8);
        assert_eq!(classify(5, 2, 1).unwrap().table, 5);
        assert_eq!(classify(3, 1, 0).unwrap_err(), TheoryError::OutOfScope(1));
        assert!(matches!(
            classify(2, 3, 0),
            Err(TheoryError::Gf(GfError::EvenCharacteristic))
        ));
    }

    #[test]
    fn dispatch_is_total() {
        for p in [3u32, 5, 7, 11, 13] {
            for e in 2..=12 {
                for i in 0..2 {
                    let key = classify(p, e, i).unwrap();
                    let family = if e % 2 == 1 {
                        1
                    } else if e % 4 == 2 {
                        4
                    } else {
                        7
                    };
                    assert!((family..family + 3).contains(&key.table));
                    assert!((family..family + 3).contains(&key.statement_theorem));
                    if p == 5 || p == 13 {
                        // (-1/p) = 1, so both readings coincide
                        assert_eq!(key.table, key.statement_theorem);
                    }
                }
            }
        }
    }

    #[test]
    fn stated_lengths() {
        assert_eq!(length_closed(3, 3, 0).unwrap(), int(6));
        assert_eq!(length_closed(3, 3, 1).unwrap(), int(12));
        assert_eq!(length_closed(5, 2, 0).unwrap(), int(12));
        assert_eq!(length_closed(5, 2, 1).unwrap(), int(7));
        assert_eq!(length_closed(7, 4, 0).unwrap(), int(1176));
        assert_eq!(length_closed(7, 4, 1).unwrap(), int(833));
    }

    #[test]
    fn length_agrees_with_delta_one() {
        use crate::expsums::delta1_closed;
        for (p, e) in [
            (3u32, 3usize),
            (3, 5),
            (5, 3),
            (3, 2),
            (5, 2),
            (7, 2),
            (3, 4),
            (5, 4),
            (7, 4),
        ] {
            for i in 0..2 {
                let d = delta1_closed(p, e, i).unwrap();
                let base = BigInt::from(p - 1) * BigInt::from(p).pow(e as u32 - 1) / 2;
                assert_eq!(length_closed(p, e, i).unwrap(), base + d / BigInt::from(p));
            }
        }
    }

    #[test]
    fn table_one_rows() {
        let pred = predicted_table(3, 3, 0).unwrap();
        let w: Vec<_> = pred
            .rows
            .iter()
            .map(|r| r.weight.clone().unwrap())
            .collect();
        let m: Vec<_> = pred
            .rows
            .iter()
            .map(|r| r.multiplicity.clone().unwrap())
            .collect();
        assert_eq!(w[1..4], [int(6), int(3), int(4)]);
        assert_eq!(m[1..4], [int(2), int(6), int(12)]);
        // row 5 weight: 6 - 3 + 27·2
        assert_eq!(w[5], int(57));
        assert!(pred
            .anomalies
            .iter()
            .any(|a| a.row == 5 && matches!(a.kind, AnomalyKind::ExceedsLength { .. })));
    }

    #[test]
    fn golden_tables() {
        let cases: [(u32, usize, u8, &[(i64, i64)]); 4] = [
            (5, 2, 0, &[(0, 1), (8, 4), (10, 12), (11, 8)]),
            (5, 2, 1, &[(0, 1), (5, 8), (6, 12), (7, 4)]),
            (
                7,
                4,
                0,
                &[(0, 1), (882, 6), (1008, 2352), (1029, 24), (1078, 18)],
            ),
            (
                7,
                4,
                1,
                &[(0, 1), (686, 18), (714, 2352), (735, 24), (833, 6)],
            ),
        ];
        for (p, e, i, expected) in cases {
            let pred = predicted_table(p, e, i).unwrap();
            assert!(pred.anomalies.is_empty(), "{:?}", pred.anomalies);
            assert!(pred.is_consistent(p, e), "p={p} e={e} i={i}");
            assert_eq!(pred.distribution(), map(expected));
        }
    }

    #[test]
    fn odd_g_power_is_an_anomaly() {
        let expr = t(q(1, 1), 0, 3);
        assert_eq!(expr.eval(3), Err(3));
        let mut anomalies = Vec::new();
        assert_eq!(
            evaluate_cell(&expr, 3, 2, Column::Weight, &mut anomalies),
            None
        );
        assert_eq!(anomalies[0].kind, AnomalyKind::OddGPower { exponent: 3 });
        let half = t(q(1, 2), 0, 0);
        assert_eq!(
            evaluate_cell(&half, 3, 1, Column::Multiplicity, &mut anomalies),
            None
        );
        assert_eq!(anomalies[1].kind.code(), "non-integer");
    }

    #[test]
    fn counting_examples() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        assert_eq!(counting_closed(Counting::N00, 3, 3).unwrap(), int(3));
        assert_eq!(counting_bruteforce(Counting::N00, &ctx).unwrap(), 3);
        let n0 = ctx
            .elements()
            .filter(|x| ctx.trace(&ctx.pow(x, 4).unwrap()).unwrap().is_zero())
            .count() as u64;
        assert_eq!(
            counting_bruteforce(Counting::N00, &ctx).unwrap()
                + counting_bruteforce(Counting::N00bar, &ctx).unwrap(),
            n0
        );
        assert!(matches!(
            counting_closed(Counting::NbarE, 3, 3),
            Err(TheoryError::BranchUnavailable(_))
        ));
        assert!(matches!(
            counting_closed(Counting::V { s: 2 }, 5, 2),
            Err(TheoryError::InvalidArgument(_))
        ));
    }

    #[test]
    fn partition_of_the_field_at_25() {
        let ctx = FieldCtx::new(5, 2).unwrap();
        let mut total = counting_bruteforce(Counting::N00, &ctx).unwrap()
            + counting_bruteforce(Counting::N00bar, &ctx).unwrap();
        for l in 0..2 {
            total += counting_bruteforce(Counting::M0 { l }, &ctx).unwrap();
            total += counting_bruteforce(Counting::M0bar { l }, &ctx).unwrap();
        }
        assert_eq!(total, 25);
    }

    #[test]
    fn nu_classes_partition() {
        for (p, e) in [(5u32, 2usize), (7, 4), (11, 3), (13, 5)] {
            let total: BigInt = (0..2)
                .flat_map(|k| (0..2).map(move |j| Counting::Nu { k, j }))
                .map(|c| counting_closed(c, p, e).unwrap())
                .sum();
            assert_eq!(total, int(p as i64 - 2));
        }
    }

    #[test]
    fn closed_counts_at_25() {
        let ctx = FieldCtx::new(5, 2).unwrap();
        for c in counting_cases(5, 2) {
            let closed = counting_closed(c, 5, 2).unwrap();
            let brute = counting_bruteforce(c, &ctx).unwrap();
            assert_eq!(closed, BigInt::from(brute), "{c}");
        }
    }

    #[test]
    fn n4_is_a_sum_of_v_sets() {
        let ctx = FieldCtx::new(5, 3).unwrap();
        let h = legendre(-1, 5) as i64;
        for k in 0..2u8 {
            for j in 0..2u8 {
                let (sk, sj) = (if k == 0 { 1 } else { -1 }, if j == 0 { 1 } else { -1 });
                let sum: u64 = (1..5i64)
                    .filter(|&s| {
                        s != 3 && legendre(s, 5) as i64 == sk && legendre(s - 3, 5) as i64 == sj * h
                    })
                    .map(|s| counting_bruteforce(Counting::V { s: s as u32 }, &ctx).unwrap())
                    .sum();
                assert_eq!(
                    counting_bruteforce(Counting::N4 { k, j }, &ctx).unwrap(),
                    sum
                );
            }
        }
    }

    #[test]
    fn verify_golden_cases() {
        for (p, e, i, verdict) in [
            (5u32, 2usize, 0u8, Verdict::Match),
            (5, 2, 1, Verdict::Match),
            (3, 3, 0, Verdict::FormulaAnomaly),
        ] {
            let ctx = FieldCtx::new(p, e).unwrap();
            let rep = verify(&ctx, i, DEFAULT_BUDGET).unwrap();
            assert_eq!(rep.verdict, verdict, "p={p} e={e} i={i}");
            assert!(rep.parameter_match);
        }
    }
}
