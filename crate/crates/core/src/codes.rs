//! The trace codes `C_D = {(Tr(ax))_{x ∈ D} : a ∈ F_q}` for the defining sets
//! `D_i = {x : Tr(x^{p+1} - x) ∈ C_i}`, their weight distributions, and the
//! Griesmer-bound checks.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::gf::{cyclotomic_class, FFElem, FieldCtx, GfError, PrimeElem};

/// Default cap on `q·|D|` scalar operations for one weight distribution.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error("class index must be 0 or 1 (got {0})")]
    InvalidClass(u8),
    #[error("work estimate {required} exceeds the budget of {budget} operations")]
    WorkBudgetExceeded { required: u128, budget: u64 },
    #[error("the code has dimension 0")]
    ZeroDimension,
    #[error("invalid weight distribution: {0}")]
    InvalidDistribution(String),
}

/// `D_i` with its elements in field enumeration order.
#[derive(Debug, Clone)]
pub struct DefiningSet {
    ctx: FieldCtx,
    class: u8,
    indices: Vec<u32>,
}

impl DefiningSet {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn class(&self) -> u8 {
        self.class
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Element indices (see [`FieldCtx::index_of`]).
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn elements(&self) -> Vec<FFElem> {
        self.indices
            .iter()
            .map(|&i| self.ctx.element_at(i as u64))
            .collect()
    }
}

/// `D_i = {x ∈ F_q : Tr(x^{p+1} - x) ∈ C_i}`.
pub fn defining_set(ctx: &FieldCtx, i: u8) -> Result<DefiningSet, CodeError> {
    if i > 1 {
        return Err(CodeError::InvalidClass(i));
    }
    let t = ctx.tables()?;
    let p = ctx.p();
    let indices = (0..t.order())
        .filter(|&x| {
            let v = (t.trace(t.pow(x, p as u64 + 1)) + p - t.trace(x)) % p;
            v != 0 && cyclotomic_class(v as i64, p) == Ok(i)
        })
        .collect();
    Ok(DefiningSet {
        ctx: ctx.clone(),
        class: i,
        indices,
    })
}

/// `c(a) = (Tr(ax))_{x ∈ D}`.
pub fn codeword(a: &FFElem, set: &DefiningSet) -> Result<Vec<PrimeElem>, CodeError> {
    let ctx = &set.ctx;
    let t = ctx.tables()?;
    let ai = ctx.index_of(a)? as u32;
    Ok(set
        .indices
        .iter()
        .map(|&x| PrimeElem::new(t.trace(t.mul(ai, x)) as i64, ctx.p()))
        .collect())
}

pub fn hamming_weight(word: &[PrimeElem]) -> u64 {
    word.iter().filter(|c| !c.is_zero()).count() as u64
}

/// Exact weight distribution of a code of length `n` over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    p: u32,
    n: u64,
    k: u32,
    counts: BTreeMap<u64, u64>,
}

impl WeightDistribution {
    /// Validates `A_0 = 1`, `Σ A_w = p^k` and `w <= n`; zero multiplicities are
    /// dropped.
    pub fn from_counts(
        p: u32,
        n: u64,
        k: u32,
        counts: BTreeMap<u64, u64>,
    ) -> Result<Self, CodeError> {
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        if counts.get(&0) != Some(&1) {
            return Err(CodeError::InvalidDistribution("A_0 must be 1".into()));
        }
        let total: u128 = counts.values().map(|&c| c as u128).sum();
        if Some(total) != (p as u128).checked_pow(k) {
            return Err(CodeError::InvalidDistribution(format!(
                "multiplicities sum to {total}, expected {p}^{k}"
            )));
        }
        if let Some((&w, _)) = counts.iter().next_back() {
            if w > n {
                return Err(CodeError::InvalidDistribution(format!(
                    "weight {w} exceeds length {n}"
                )));
            }
        }
        Ok(WeightDistribution { p, n, k, counts })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Minimum nonzero weight, `None` for the zero code.
    pub fn d(&self) -> Option<u64> {
        self.counts.keys().copied().find(|&w| w > 0)
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Nonzero weights and their multiplicities.
    pub fn nonzero(&self) -> BTreeMap<u64, u64> {
        self.counts
            .iter()
            .filter(|(&w, _)| w > 0)
            .map(|(&w, &c)| (w, c))
            .collect()
    }

    /// `[n,k,d]`.
    pub fn parameters(&self) -> String {
        match self.d() {
            Some(d) => format!("[{},{},{}]", self.n, self.k, d),
            None => format!("[{},{},-]", self.n, self.k),
        }
    }
}

/// `(w, A_w)` ascending, zero multiplicities omitted, `(0, 1)` first.
pub fn enumerator_polynomial(wd: &WeightDistribution) -> Vec<(u64, u64)> {
    wd.counts.iter().map(|(&w, &c)| (w, c)).collect()
}

/// Renders `1+6z^3+12z^4`.
pub fn format_enumerator(wd: &WeightDistribution) -> String {
    enumerator_polynomial(wd)
        .iter()
        .map(|&(w, c)| match (w, c) {
            (0, _) => c.to_string(),
            (1, 1) => "z".to_string(),
            (1, _) => format!("{c}z"),
            (_, 1) => format!("z^{w}"),
            _ => format!("{c}z^{w}"),
        })
        .collect::<Vec<_>>()
        .join("+")
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.parameters(), format_enumerator(self))
    }
}

fn check_budget(set: &DefiningSet, budget: u64) -> Result<u64, CodeError> {
    let q = set.ctx.order().ok_or(GfError::FieldTooLarge {
        p: set.ctx.p(),
        e: set.ctx.degree(),
        limit: u64::MAX,
    })?;
    let required = q as u128 * set.len() as u128;
    if required > budget as u128 {
        return Err(CodeError::WorkBudgetExceeded { required, budget });
    }
    Ok(q)
}

/// Turns the number of `a` per weight into a distribution over codewords.
fn finish(set: &DefiningSet, per_a: Vec<u64>) -> Result<WeightDistribution, CodeError> {
    let p = set.ctx.p() as u64;
    let e = set.ctx.degree() as u32;
    let kernel = per_a[0];
    let mut kernel_dim = 0u32;
    let mut rest = kernel;
    while rest > 1 && rest.is_multiple_of(p) {
        rest /= p;
        kernel_dim += 1;
    }
    if rest != 1 {
        return Err(CodeError::InvalidDistribution(format!(
            "{kernel} elements map to the zero word, not a power of {p}"
        )));
    }
    let counts = per_a
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(w, c)| (w as u64, c / kernel))
        .collect();
    WeightDistribution::from_counts(set.ctx.p(), set.len() as u64, e - kernel_dim, counts)
}

/// Weight distribution through coordinate buckets.
///
/// Every `x ∈ D` is bucketed by `v(x) = (Tr(x^j·x))_j`; then `Tr(ax) = â·v(x)`
/// where `â` are the coordinates of `a`, and a staged transform over the `e`
/// coordinates yields, for every `â`, how many `x ∈ D` have `â·v(x) = 0`.
pub fn weight_distribution(
    set: &DefiningSet,
    budget: u64,
) -> Result<WeightDistribution, CodeError> {
    let q = check_budget(set, budget)? as usize;
    let ctx = &set.ctx;
    let t = ctx.tables()?;
    let p = ctx.p() as usize;
    let e = ctx.degree();

    // indices of the basis monomials x^j
    let basis: Vec<u32> = (0..e).map(|j| (p as u64).pow(j as u32) as u32).collect();
    let mut state = vec![0u64; q * p];
    for &x in &set.indices {
        let mut v = 0usize;
        for (j, &b) in basis.iter().enumerate() {
            v += t.trace(t.mul(b, x)) as usize * p.pow(j as u32);
        }
        state[v * p] += 1;
    }

    // Stage j replaces the v_j slot of the position by a_j and shifts the
    // accumulated dot product by a_j·v_j.
    for j in 0..e {
        let stride = p.pow(j as u32);
        let prev = std::mem::take(&mut state);
        state = vec![0u64; q * p];
        state.par_chunks_mut(p).enumerate().for_each(|(pos, out)| {
            let aj = (pos / stride) % p;
            let base = pos - aj * stride;
            for vj in 0..p {
                let src = &prev[(base + vj * stride) * p..][..p];
                let shift = aj * vj % p;
                for (tv, o) in out.iter_mut().enumerate() {
                    *o += src[(tv + p - shift) % p];
                }
            }
        });
    }

    let n = set.len();
    let per_a = state
        .par_chunks(p)
        .fold(
            || vec![0u64; n + 1],
            |mut hist, chunk| {
                hist[n - chunk[0] as usize] += 1;
                hist
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    finish(set, per_a)
}

/// Weight distribution by evaluating every codeword directly.
pub fn weight_distribution_direct(
    set: &DefiningSet,
    budget: u64,
) -> Result<WeightDistribution, CodeError> {
    let q = check_budget(set, budget)?;
    let t = set.ctx.tables()?;
    let n = set.len();
    let per_a = (0..q as u32)
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut hist, a| {
                let w = set
                    .indices
                    .iter()
                    .filter(|&&x| t.trace(t.mul(a, x)) != 0)
                    .count();
                hist[w] += 1;
                hist
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    finish(set, per_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    GriesmerOptimalCandidate,
    AlmostOptimalCandidate,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::GriesmerOptimalCandidate => "griesmer-optimal-candidate",
            Classification::AlmostOptimalCandidate => "almost-optimal-candidate",
            Classification::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Classification::GriesmerOptimalCandidate,
            Classification::AlmostOptimalCandidate,
            Classification::Inconclusive,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GriesmerVerdict {
    pub bound_n: u128,
    pub passes: bool,
    pub next_passes: bool,
    pub classification: Classification,
}

/// `Σ_{i<k} ⌈d/p^i⌉`.
pub fn griesmer_bound(p: u32, k: u32, d: u64) -> u128 {
    let mut total = 0u128;
    let mut pi = 1u128;
    for _ in 0..k {
        total += (d as u128).div_ceil(pi);
        if pi <= d as u128 {
            pi *= p as u128;
        }
    }
    total
}

pub fn griesmer(wd: &WeightDistribution) -> Result<GriesmerVerdict, CodeError> {
    let d = wd.d().ok_or(CodeError::ZeroDimension)?;
    let (p, k, n) = (wd.p, wd.k, wd.n as u128);
    let bound_n = griesmer_bound(p, k, d);
    let next_passes = n >= griesmer_bound(p, k, d + 1);
    let classification = if !next_passes {
        Classification::GriesmerOptimalCandidate
    } else if n < griesmer_bound(p, k, d + 2) {
        Classification::AlmostOptimalCandidate
    } else {
        Classification::Inconclusive
    };
    Ok(GriesmerVerdict {
        bound_n,
        passes: n >= bound_n,
        next_passes,
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WtRatio {
    pub wt_min: u64,
    pub wt_max: u64,
    /// `wt_min / wt_max > (p - 1) / p`.
    pub exceeds: bool,
}

pub fn wt_ratio(wd: &WeightDistribution) -> Result<WtRatio, CodeError> {
    let wt_min = wd.d().ok_or(CodeError::ZeroDimension)?;
    let wt_max = *wd.counts.keys().next_back().expect("nonempty");
    let p = wd.p as u128;
    Ok(WtRatio {
        wt_min,
        wt_max,
        exceeds: wt_min as u128 * p > wt_max as u128 * (p - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(pairs: &[(u64, u64)]) -> BTreeMap<u64, u64> {
        pairs.iter().copied().collect()
    }

    /// Weight distribution by materializing every codeword with polynomial
    /// arithmetic, independent of the lookup tables.
    fn oracle_distribution(set: &DefiningSet) -> BTreeMap<u64, u64> {
        let ctx = set.ctx();
        let elems = set.elements();
        let mut seen = std::collections::BTreeSet::new();
        let mut counts = BTreeMap::new();
        for a in ctx.elements() {
            let word: Vec<u32> = elems
                .iter()
                .map(|x| ctx.trace(&ctx.mul(&a, x).unwrap()).unwrap().value())
                .collect();
            let w = word.iter().filter(|&&c| c != 0).count() as u64;
            if seen.insert(word) {
                *counts.entry(w).or_insert(0) += 1;
            }
        }
        counts
    }

    #[test]
    fn example_sizes() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        assert_eq!(defining_set(&ctx, 0).unwrap().len(), 6);
        assert_eq!(defining_set(&ctx, 1).unwrap().len(), 12);
        assert_eq!(
            defining_set(&ctx, 2).unwrap_err(),
            CodeError::InvalidClass(2)
        );
    }

    #[test]
    fn defining_sets_partition_the_field() {
        for (p, e) in [(3u32, 3usize), (5, 2), (7, 2), (3, 4)] {
            let ctx = FieldCtx::new(p, e).unwrap();
            let d0 = defining_set(&ctx, 0).unwrap();
            let d1 = defining_set(&ctx, 1).unwrap();
            let zero = ctx
                .elements()
                .filter(|x| {
                    let a = ctx
                        .trace(&ctx.pow(x, p as u64 + 1).unwrap())
                        .unwrap()
                        .value();
                    let b = ctx.trace(x).unwrap().value();
                    a == b
                })
                .count();
            assert!(d0.indices().iter().all(|x| !d1.indices().contains(x)));
            assert_eq!(d0.len() + d1.len() + zero, ctx.order().unwrap() as usize);
            for x in d0.elements() {
                let v = ctx
                    .trace(&ctx.sub(&ctx.pow(&x, p as u64 + 1).unwrap(), &x).unwrap())
                    .unwrap();
                assert_eq!(v.cyclotomic_class(p), Ok(0));
            }
        }
    }

    #[test]
    fn codeword_basics() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        let set = defining_set(&ctx, 0).unwrap();
        let z = codeword(&ctx.zero(), &set).unwrap();
        assert_eq!(z.len(), 6);
        assert_eq!(hamming_weight(&z), 0);
        let w = hamming_weight(&codeword(&ctx.one(), &set).unwrap());
        assert!((3..=6).contains(&w));
        for ai in [1u64, 5, 13] {
            for bi in [2u64, 7, 26] {
                let (a, b) = (ctx.element_at(ai), ctx.element_at(bi));
                let sum = codeword(&ctx.add(&a, &b).unwrap(), &set).unwrap();
                let ca = codeword(&a, &set).unwrap();
                let cb = codeword(&b, &set).unwrap();
                for k in 0..6 {
                    assert_eq!(sum[k].value(), (ca[k].value() + cb[k].value()) % 3);
                }
            }
        }
    }

    #[test]
    fn bucket_transform_equals_direct_and_oracle() {
        for (p, e) in [(3u32, 3usize), (5, 2), (3, 2), (7, 2), (3, 4)] {
            let ctx = FieldCtx::new(p, e).unwrap();
            for i in 0..2 {
                let set = defining_set(&ctx, i).unwrap();
                let fast = weight_distribution(&set, DEFAULT_BUDGET).unwrap();
                let direct = weight_distribution_direct(&set, DEFAULT_BUDGET).unwrap();
                assert_eq!(fast, direct, "p={p} e={e} i={i}");
                assert_eq!(fast.counts(), &oracle_distribution(&set));
            }
        }
    }

    #[test]
    fn example_one_distribution() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        let wd = weight_distribution(&defining_set(&ctx, 0).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(wd.parameters(), "[6,3,3]");
        assert_eq!(
            enumerator_polynomial(&wd),
            vec![(0, 1), (3, 6), (4, 12), (5, 6), (6, 2)]
        );
        assert_eq!(format_enumerator(&wd), "1+6z^3+12z^4+6z^5+2z^6");
        assert_eq!(wd.to_string(), "[6,3,3] 1+6z^3+12z^4+6z^5+2z^6");
    }

    #[test]
    fn degenerate_code_has_smaller_dimension() {
        // over F_9 the class-0 set has a single element, so the code is [1,1,1]
        let ctx = FieldCtx::new(3, 2).unwrap();
        let set = defining_set(&ctx, 0).unwrap();
        assert_eq!(set.len(), 1);
        let wd = weight_distribution(&set, DEFAULT_BUDGET).unwrap();
        assert_eq!(wd.k(), 1);
        assert_eq!(enumerator_polynomial(&wd), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = FieldCtx::new(3, 3).unwrap();
        let set = defining_set(&ctx, 0).unwrap();
        assert_eq!(
            weight_distribution(&set, 100).unwrap_err(),
            CodeError::WorkBudgetExceeded {
                required: 162,
                budget: 100
            }
        );
        assert!(weight_distribution(&set, 162).is_ok());
    }

    #[test]
    fn distribution_validation() {
        assert!(WeightDistribution::from_counts(3, 6, 1, dist(&[(0, 1), (3, 2)])).is_ok());
        assert!(WeightDistribution::from_counts(3, 6, 1, dist(&[(0, 2), (3, 1)])).is_err());
        assert!(WeightDistribution::from_counts(3, 6, 1, dist(&[(0, 1), (3, 1)])).is_err());
        assert!(WeightDistribution::from_counts(3, 2, 1, dist(&[(0, 1), (3, 2)])).is_err());
        let zero = WeightDistribution::from_counts(3, 4, 0, dist(&[(0, 1)])).unwrap();
        assert_eq!(enumerator_polynomial(&zero), vec![(0, 1)]);
        assert_eq!(zero.d(), None);
        assert_eq!(griesmer(&zero).unwrap_err(), CodeError::ZeroDimension);
    }

    #[test]
    fn griesmer_examples() {
        let wd = WeightDistribution::from_counts(
            3,
            6,
            3,
            dist(&[(0, 1), (3, 6), (4, 12), (5, 6), (6, 2)]),
        )
        .unwrap();
        let v = griesmer(&wd).unwrap();
        assert_eq!(v.bound_n, 5);
        assert!(v.passes);
        assert!(!v.next_passes);
        assert_eq!(v.classification, Classification::GriesmerOptimalCandidate);

        let wd = WeightDistribution::from_counts(5, 7, 2, dist(&[(0, 1), (5, 8), (6, 12), (7, 4)]))
            .unwrap();
        let v = griesmer(&wd).unwrap();
        assert_eq!(v.bound_n, 6);
        assert_eq!(v.classification, Classification::GriesmerOptimalCandidate);

        // repetition code [n,1,n]
        let wd = WeightDistribution::from_counts(5, 9, 1, dist(&[(0, 1), (9, 4)])).unwrap();
        let v = griesmer(&wd).unwrap();
        assert_eq!(v.bound_n, 9);
        assert!(v.passes);
        assert_eq!(
            Classification::parse(v.classification.as_str()),
            Some(v.classification)
        );
    }

    #[test]
    fn wt_ratio_examples() {
        let wd = WeightDistribution::from_counts(
            3,
            6,
            3,
            dist(&[(0, 1), (3, 6), (4, 12), (5, 6), (6, 2)]),
        )
        .unwrap();
        let r = wt_ratio(&wd).unwrap();
        assert_eq!((r.wt_min, r.wt_max, r.exceeds), (3, 6, false));
        let eq = WeightDistribution::from_counts(3, 4, 1, dist(&[(0, 1), (4, 2)])).unwrap();
        assert!(wt_ratio(&eq).unwrap().exceeds);
    }

    proptest! {
        #[test]
        fn griesmer_bound_matches_definition(p in prop::sample::select(vec![3u32, 5, 7]), k in 1u32..6, d in 1u64..500) {
            let expected: u128 = (0..k).map(|i| (d as u128).div_ceil((p as u128).pow(i))).sum();
            prop_assert_eq!(griesmer_bound(p, k, d), expected);
        }

        #[test]
        fn griesmer_bound_is_monotone_in_d(k in 1u32..8, d in 1u64..10_000) {
            prop_assert!(griesmer_bound(3, k, d) < griesmer_bound(3, k, d + 1));
        }
    }
}
