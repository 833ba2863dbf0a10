//! Serializable case records and their JSON, CSV and text renderings.

use std::fmt::Write as _;
use std::time::Duration;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::codes::{griesmer, wt_ratio, WeightDistribution};
use crate::gf::{format_poly, FieldCtx};
use crate::theory::{RowDiff, VerifyReport};

pub const TOOL: &str = "codeweights";
pub const SCHEMA_VERSION: u32 = 1;

/// Integers above `2^53` in magnitude are written as decimal strings.
const EXACT_LIMIT: u64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Num(pub BigInt);

impl<T: Into<BigInt>> From<T> for Num {
    fn from(v: T) -> Self {
        Num(v.into())
    }
}

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.abs() <= BigInt::from(EXACT_LIMIT) {
            s.serialize_i64(self.0.to_i64().expect("within 2^53"))
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Signed(i64),
            Unsigned(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Signed(v) => Ok(Num(v.into())),
            Raw::Unsigned(v) => Ok(Num(v.into())),
            Raw::Text(s) => s
                .parse::<BigInt>()
                .map(Num)
                .map_err(|_| serde::de::Error::custom(format!("not an integer: {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Ok,
    Match,
    Mismatch,
    FormulaAnomaly,
    Skipped,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Match => "MATCH",
            Status::Mismatch => "MISMATCH",
            Status::FormulaAnomaly => "FORMULA_ANOMALY",
            Status::Skipped => "SKIPPED",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GriesmerRecord {
    pub bound_n: Num,
    pub passes: bool,
    pub next_passes: bool,
    pub classification: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WtRatioRecord {
    pub wt_min: Num,
    pub wt_max: Num,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyRecord {
    pub row: usize,
    pub column: String,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRecord {
    pub weight: Num,
    pub predicted: Num,
    pub enumerated: Num,
}

impl From<&RowDiff> for RowRecord {
    fn from(d: &RowDiff) -> Self {
        RowRecord {
            weight: Num(d.weight.clone()),
            predicted: Num(d.predicted.clone()),
            enumerated: Num(d.enumerated.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub order: Num,
    pub primitive_element: Option<String>,
}

/// One `(p, e, i)` case. Fields that do not apply are omitted from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub p: u32,
    pub e: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u8>,
    pub modulus: Vec<u32>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Num>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub enumerator: Vec<(Num, Num)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement_theorem: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_length: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter_match: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicted: Vec<(Num, Num)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows_mismatched: Vec<RowRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anomalies: Vec<AnomalyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub griesmer: Option<GriesmerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wt_ratio: Option<WtRatioRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_us: Option<u64>,
}

impl CaseRecord {
    pub fn bare(p: u32, e: usize, i: Option<u8>, modulus: Vec<u32>, status: Status) -> Self {
        CaseRecord {
            p,
            e,
            i,
            modulus,
            status,
            n: None,
            k: None,
            d: None,
            enumerator: Vec::new(),
            verdict: None,
            theorem: None,
            table: None,
            statement_theorem: None,
            claimed_length: None,
            parameter_match: None,
            predicted: Vec::new(),
            rows_mismatched: Vec::new(),
            anomalies: Vec::new(),
            griesmer: None,
            wt_ratio: None,
            field: None,
            error: None,
            wall_us: None,
        }
    }

    pub fn skipped(p: u32, e: usize, i: u8, modulus: Vec<u32>, reason: String) -> Self {
        CaseRecord {
            error: Some(reason),
            ..Self::bare(p, e, Some(i), modulus, Status::Skipped)
        }
    }

    pub fn failed(p: u32, e: usize, i: Option<u8>, modulus: Vec<u32>, reason: String) -> Self {
        CaseRecord {
            error: Some(reason),
            ..Self::bare(p, e, i, modulus, Status::Error)
        }
    }

    pub fn with_wall_time(mut self, t: Duration) -> Self {
        self.wall_us = Some(t.as_micros() as u64);
        self
    }

    fn fill_code(&mut self, wd: &WeightDistribution) {
        self.n = Some(wd.n().into());
        self.k = Some(wd.k().into());
        self.d = wd.d().map(Num::from);
        self.enumerator = wd
            .counts()
            .iter()
            .map(|(&w, &c)| (w.into(), c.into()))
            .collect();
        self.griesmer = griesmer(wd).ok().map(|g| GriesmerRecord {
            bound_n: g.bound_n.into(),
            passes: g.passes,
            next_passes: g.next_passes,
            classification: g.classification.as_str().to_string(),
        });
        self.wt_ratio = wt_ratio(wd).ok().map(|r| WtRatioRecord {
            wt_min: r.wt_min.into(),
            wt_max: r.wt_max.into(),
            exceeds: r.exceeds,
        });
    }

    pub fn construct(ctx: &FieldCtx, i: u8, wd: &WeightDistribution) -> Self {
        let mut rec = Self::bare(
            ctx.p(),
            ctx.degree(),
            Some(i),
            ctx.modulus().to_vec(),
            Status::Ok,
        );
        rec.fill_code(wd);
        rec
    }

    pub fn verify(rep: &VerifyReport) -> Self {
        use crate::theory::Verdict;
        let status = match rep.verdict {
            Verdict::Match => Status::Match,
            Verdict::Mismatch => Status::Mismatch,
            Verdict::FormulaAnomaly => Status::FormulaAnomaly,
        };
        let case = &rep.case;
        let mut rec = Self::bare(case.p, case.e, Some(case.i), rep.modulus.clone(), status);
        rec.fill_code(&rep.enumerated);
        rec.verdict = Some(rep.verdict.as_str().to_string());
        rec.theorem = Some(case.theorem);
        rec.table = Some(case.table);
        rec.statement_theorem = Some(case.statement_theorem);
        rec.claimed_length = Some(Num(rep.claimed_length.clone()));
        rec.parameter_match = Some(rep.parameter_match);
        rec.predicted = rep
            .predicted
            .distribution()
            .into_iter()
            .map(|(w, m)| (Num(w), Num(m)))
            .collect();
        rec.rows_mismatched = rep.rows_mismatched.iter().map(RowRecord::from).collect();
        rec.anomalies = rep
            .predicted
            .anomalies
            .iter()
            .map(|a| AnomalyRecord {
                row: a.row,
                column: a.column.as_str().to_string(),
                kind: a.kind.code().to_string(),
                detail: a.to_string(),
            })
            .collect();
        rec
    }

    pub fn field_info(ctx: &FieldCtx) -> Self {
        let mut rec = Self::bare(
            ctx.p(),
            ctx.degree(),
            None,
            ctx.modulus().to_vec(),
            Status::Ok,
        );
        let primitive_element = ctx
            .tables()
            .ok()
            .map(|t| format_poly(ctx.element_at(t.primitive() as u64).coeffs()));
        rec.field = Some(FieldRecord {
            order: Num(BigInt::from(ctx.order_big())),
            primitive_element,
        });
        rec
    }

    fn enumerator_string(&self) -> String {
        self.enumerator
            .iter()
            .map(|(w, a)| {
                let one = a.0 == BigInt::from(1);
                match w.0.to_u64() {
                    Some(0) => a.to_string(),
                    Some(1) if one => "z".to_string(),
                    Some(1) => format!("{a}z"),
                    _ if one => format!("z^{w}"),
                    _ => format!("{a}z^{w}"),
                }
            })
            .collect::<Vec<_>>()
            .join("+")
    }

    fn parameters(&self) -> Option<String> {
        Some(format!(
            "[{},{},{}]",
            self.n.as_ref()?,
            self.k.as_ref()?,
            self.d
                .as_ref()
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".into())
        ))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub ok: usize,
    #[serde(rename = "MATCH")]
    pub matched: usize,
    #[serde(rename = "MISMATCH")]
    pub mismatched: usize,
    #[serde(rename = "FORMULA_ANOMALY")]
    pub anomalous: usize,
    #[serde(rename = "SKIPPED")]
    pub skipped: usize,
    #[serde(rename = "ERROR")]
    pub errors: usize,
}

impl Summary {
    pub fn of(cases: &[CaseRecord]) -> Self {
        let mut s = Summary::default();
        for c in cases {
            match c.status {
                Status::Ok => s.ok += 1,
                Status::Match => s.matched += 1,
                Status::Mismatch => s.mismatched += 1,
                Status::FormulaAnomaly => s.anomalous += 1,
                Status::Skipped => s.skipped += 1,
                Status::Error => s.errors += 1,
            }
        }
        s
    }

    pub fn line(&self) -> String {
        format!(
            "summary: MATCH={} MISMATCH={} FORMULA_ANOMALY={} SKIPPED={} ERROR={}",
            self.matched, self.mismatched, self.anomalous, self.skipped, self.errors
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
}

impl Envelope {
    pub fn new(cases: Vec<CaseRecord>) -> Self {
        Envelope {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version: SCHEMA_VERSION,
            summary: Summary::of(&cases),
            cases,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Construct,
    Verify,
    Sweep,
    FieldInfo,
}

fn modulus_csv(m: &[u32]) -> String {
    m.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn opt(n: &Option<Num>) -> String {
    n.as_ref().map(Num::to_string).unwrap_or_default()
}

pub fn render_csv(env: &Envelope, kind: Kind) -> String {
    let mut out = String::new();
    match kind {
        Kind::Construct => {
            out.push_str("weight,multiplicity\n");
            for c in &env.cases {
                for (w, a) in &c.enumerator {
                    writeln!(out, "{w},{a}").unwrap();
                }
            }
        }
        Kind::Verify => {
            out.push_str("weight,predicted,enumerated\n");
            for c in &env.cases {
                let mut rows: Vec<(Num, Num, Num)> = Vec::new();
                let zero = Num::from(0);
                let mut weights: Vec<&Num> = c
                    .predicted
                    .iter()
                    .map(|r| &r.0)
                    .chain(c.enumerator.iter().map(|r| &r.0))
                    .collect();
                weights.sort();
                weights.dedup();
                for w in weights {
                    let look = |v: &[(Num, Num)]| {
                        v.iter()
                            .find(|r| &r.0 == w)
                            .map(|r| r.1.clone())
                            .unwrap_or(zero.clone())
                    };
                    rows.push((w.clone(), look(&c.predicted), look(&c.enumerator)));
                }
                for (w, p, e) in rows {
                    writeln!(out, "{w},{p},{e}").unwrap();
                }
            }
        }
        Kind::Sweep => {
            out.push_str("p,e,i,status,n,k,d,modulus\n");
            for c in &env.cases {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    c.p,
                    c.e,
                    c.i.map(|i| i.to_string()).unwrap_or_default(),
                    c.status.as_str(),
                    opt(&c.n),
                    opt(&c.k),
                    opt(&c.d),
                    modulus_csv(&c.modulus)
                )
                .unwrap();
            }
        }
        Kind::FieldInfo => {
            out.push_str("p,e,modulus,order\n");
            for c in &env.cases {
                let order = c
                    .field
                    .as_ref()
                    .map(|f| f.order.to_string())
                    .unwrap_or_default();
                writeln!(out, "{},{},{},{}", c.p, c.e, modulus_csv(&c.modulus), order).unwrap();
            }
        }
    }
    out
}

fn render_case_text(c: &CaseRecord, out: &mut String) {
    let i = c.i.map(|i| format!(" i={i}")).unwrap_or_default();
    writeln!(
        out,
        "p={} e={}{} modulus {}",
        c.p,
        c.e,
        i,
        format_poly(&c.modulus)
    )
    .unwrap();
    if let Some(f) = &c.field {
        writeln!(out, "order {}", f.order).unwrap();
        if let Some(g) = &f.primitive_element {
            writeln!(out, "primitive element {g}").unwrap();
        }
    }
    if let Some(params) = c.parameters() {
        writeln!(out, "{} {}", params, c.enumerator_string()).unwrap();
    }
    if let Some(g) = &c.griesmer {
        writeln!(
            out,
            "griesmer bound {} ({}), {}",
            g.bound_n,
            if g.passes { "passes" } else { "fails" },
            g.classification
        )
        .unwrap();
    }
    if let Some(r) = &c.wt_ratio {
        writeln!(
            out,
            "wt_min/wt_max = {}/{}, exceeds (p-1)/p: {}",
            r.wt_min,
            r.wt_max,
            if r.exceeds { "yes" } else { "no" }
        )
        .unwrap();
    }
    if let (Some(t), Some(tab), Some(st)) = (c.theorem, c.table, c.statement_theorem) {
        writeln!(
            out,
            "theorem {t} (table {tab}); statement reading: theorem {st}"
        )
        .unwrap();
    }
    if let (Some(len), Some(pm)) = (&c.claimed_length, c.parameter_match) {
        writeln!(
            out,
            "claimed [{len},{}]: {}",
            c.e,
            if pm { "matches" } else { "differs" }
        )
        .unwrap();
    }
    if !c.predicted.is_empty() {
        let pred: Vec<String> = c
            .predicted
            .iter()
            .map(|(w, m)| format!("{m}z^{w}"))
            .collect();
        writeln!(out, "predicted {}", pred.join("+")).unwrap();
    }
    for r in &c.rows_mismatched {
        writeln!(
            out,
            "  weight {}: predicted {} enumerated {}",
            r.weight, r.predicted, r.enumerated
        )
        .unwrap();
    }
    for a in &c.anomalies {
        writeln!(out, "  anomaly {}", a.detail).unwrap();
    }
    if let Some(v) = &c.verdict {
        writeln!(out, "verdict {v}").unwrap();
    } else if matches!(c.status, Status::Skipped | Status::Error) {
        writeln!(
            out,
            "{}: {}",
            c.status.as_str(),
            c.error.as_deref().unwrap_or("")
        )
        .unwrap();
    }
}

pub fn render_text(env: &Envelope, kind: Kind) -> String {
    let mut out = String::new();
    for (idx, c) in env.cases.iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        render_case_text(c, &mut out);
    }
    if kind == Kind::Sweep {
        writeln!(out, "\n{}", env.summary.line()).unwrap();
    }
    out
}
