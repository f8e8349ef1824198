//! Distributions, C∞-symmetries, C∞-structures and their dual 1-forms.

use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{Certainty, Chart, Expr, Point, ZeroTestError, ZeroTester};
use crate::forms::{all_zero, volume_form, FormError, KForm, VectorField};
use crate::linalg::{self, LinAlgError};

#[derive(Debug, Clone, Error)]
pub enum StructureError {
    #[error("empty list of fields")]
    Empty,
    #[error("distribution rank {r} must satisfy 1 <= r < {n}")]
    BadRank { r: usize, n: usize },
    #[error("expected {expected} structure fields, got {got}")]
    Count { expected: usize, got: usize },
    #[error("fields are dependent: rank {rank} < {expected}")]
    Dependent { rank: usize, expected: usize },
    #[error("[{0}, {1}] is not in the span")]
    NotInSpan(String, String, Option<Point>),
    #[error("decomposition of [{0}, {1}] is not unique")]
    NonUnique(String, String),
    #[error("volume contraction vanishes identically")]
    Degenerate,
    #[error("contraction and cofactor forms disagree for omega{0}")]
    CofactorMismatch(usize),
    #[error("pairing X{0} with sigma{1} failed")]
    Pairing(usize, usize),
    #[error("rescaled coefficients disagree with direct decomposition")]
    RescaleMismatch,
    #[error("rescaling function vanishes identically")]
    ZeroScale,
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

impl StructureError {
    pub fn witness(&self) -> Option<&Point> {
        match self {
            StructureError::NotInSpan(_, _, w) => w.as_ref(),
            StructureError::Form(FormError::NotTangent { witness, .. }) => witness.as_ref(),
            _ => None,
        }
    }
}

/// `S({Z_1,…,Z_r})` with display names for the generators.
#[derive(Clone, Debug)]
pub struct Distribution {
    chart: Arc<Chart>,
    gens: Vec<VectorField>,
    names: Vec<String>,
}

impl Distribution {
    pub fn new(chart: Arc<Chart>, gens: Vec<VectorField>, names: Vec<String>) -> Result<Self, StructureError> {
        let (r, n) = (gens.len(), chart.dim());
        if r == 0 {
            return Err(StructureError::Empty);
        }
        if r >= n {
            return Err(StructureError::BadRank { r, n });
        }
        Ok(Distribution { chart, gens, names })
    }

    pub fn unnamed(chart: Arc<Chart>, gens: Vec<VectorField>) -> Result<Self, StructureError> {
        let names = (1..=gens.len()).map(|i| format!("Z{i}")).collect();
        Distribution::new(chart, gens, names)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn gens(&self) -> &[VectorField] {
        &self.gens
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    /// Certify a candidate first integral: every generator annihilates `f`.
    pub fn annihilates(&self, f: &Expr, t: &ZeroTester) -> Result<Certainty, ZeroTestError> {
        let vals: Vec<Expr> = self.gens.iter().map(|z| z.apply(f)).collect();
        all_zero(vals.iter(), t)
    }
}

/// Rank of a family of fields, with the minor that witnesses it.
#[derive(Clone, Debug)]
pub struct RankCertificate {
    pub rank: usize,
    pub expected: usize,
    /// A maximal non-vanishing minor; its zero set is where the rank drops.
    pub minor: Expr,
    pub columns: Vec<usize>,
    pub witness: Option<Point>,
}

impl RankCertificate {
    pub fn full(&self) -> bool {
        self.rank == self.expected
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "expected": self.expected,
            "full": self.full(),
            "minor": self.minor.to_string(),
            "columns": self.columns,
            "witness": self.witness.as_ref().map(|p| p.to_json()),
        })
    }
}

pub fn check_independent(fields: &[&VectorField], t: &ZeroTester) -> Result<RankCertificate, StructureError> {
    if fields.is_empty() {
        return Err(StructureError::Empty);
    }
    let m: Vec<Vec<Expr>> = fields.iter().map(|f| f.coeffs().to_vec()).collect();
    let cols = m[0].len();
    let e = linalg::echelon(&m, cols, t)?;
    let rank = e.rank();
    let sub: Vec<Vec<Expr>> = e.perm[..rank]
        .iter()
        .map(|&i| e.pivots.iter().map(|&c| m[i][c].clone()).collect())
        .collect();
    let minor = linalg::det(&sub, t)?;
    let witness = t.regular_points(&[&minor], 1).into_iter().next();
    Ok(RankCertificate { rank, expected: fields.len(), minor, columns: e.pivots.clone(), witness })
}

/// Coefficients of `v` in the span of `basis`.
pub fn decompose_in_span(
    v: &VectorField,
    basis: &[&VectorField],
    t: &ZeroTester,
) -> Result<(Vec<Expr>, Certainty), LinAlgError> {
    let n = v.coeffs().len();
    let a: Vec<Vec<Expr>> = (0..n).map(|j| basis.iter().map(|b| b.coeffs()[j].clone()).collect()).collect();
    let coeffs = linalg::solve(&a, v.coeffs(), t)?;
    let mut residual = v.clone();
    for (c, b) in coeffs.iter().zip(basis) {
        residual = residual.sub(&b.scale(c)).map_err(|_| LinAlgError::RankDeficient { rank: 0, cols: 0 })?;
    }
    let cert = residual.vanishes(t)?;
    Ok((coeffs, cert))
}

fn decompose_named(
    v: &VectorField,
    basis: &[&VectorField],
    pair: (&str, &str),
    t: &ZeroTester,
) -> Result<(Vec<Expr>, Certainty), StructureError> {
    match decompose_in_span(v, basis, t) {
        Ok(r) => Ok(r),
        Err(LinAlgError::Inconsistent { residual, witness }) => {
            let w = span_witness(&residual, v, basis, t).or(witness);
            Err(StructureError::NotInSpan(pair.0.to_string(), pair.1.to_string(), w))
        }
        Err(LinAlgError::RankDeficient { .. }) => Err(StructureError::NonUnique(pair.0.to_string(), pair.1.to_string())),
        Err(LinAlgError::ZeroTest(e)) => Err(e.into()),
    }
}

/// A regular point of all coefficients at which the elimination residual is
/// non-zero, so that the witness names every coordinate.
fn span_witness(residual: &Expr, v: &VectorField, basis: &[&VectorField], t: &ZeroTester) -> Option<Point> {
    let coords: Vec<Expr> = (0..v.chart().dim()).map(|i| v.chart().coord(i)).collect();
    let mut all: Vec<&Expr> = coords.iter().collect();
    all.push(residual);
    all.extend(v.coeffs());
    for b in basis {
        all.extend(b.coeffs());
    }
    t.regular_points(&all, 8).into_iter().find(|p| {
        residual.eval_at(p, t.policy.eps_sing).is_ok_and(|e| e.value != num_rational::BigRational::from_integer(0.into()))
    })
}

/// `[Z_i, Z_j] = Σ c_k Z_k` for one pair.
#[derive(Clone, Debug)]
pub struct PairBracket {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<Expr>,
    pub residual: Certainty,
}

#[derive(Clone, Debug)]
pub struct InvolutiveCertificate {
    pub pairs: Vec<PairBracket>,
}

impl InvolutiveCertificate {
    pub fn lines(&self, d: &Distribution) -> Vec<String> {
        self.pairs
            .iter()
            .map(|p| format!("[{},{}] = {}", d.names[p.i], d.names[p.j], combination(&p.coeffs, &d.names)))
            .collect()
    }

    pub fn to_json(&self, d: &Distribution) -> Value {
        Value::Array(
            self.pairs
                .iter()
                .map(|p| {
                    json!({
                        "pair": [d.names[p.i], d.names[p.j]],
                        "coefficients": p.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                        "residual": p.residual,
                    })
                })
                .collect(),
        )
    }
}

/// `c1*A + c2*B` with zero terms dropped.
pub fn combination(coeffs: &[Expr], names: &[String]) -> String {
    let parts: Vec<String> = coeffs
        .iter()
        .zip(names)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, n)| {
            if c.is_one() {
                n.clone()
            } else if c.num().len() == 1 && c.den().is_one() {
                format!("{c}*{n}")
            } else {
                format!("({c})*{n}")
            }
        })
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

pub fn check_involutive(d: &Distribution, t: &ZeroTester) -> Result<InvolutiveCertificate, StructureError> {
    let basis: Vec<&VectorField> = d.gens.iter().collect();
    let mut pairs = Vec::new();
    for i in 0..d.gens.len() {
        for j in i + 1..d.gens.len() {
            let br = d.gens[i].bracket(&d.gens[j])?;
            let (coeffs, residual) = decompose_named(&br, &basis, (&d.names[i], &d.names[j]), t)?;
            pairs.push(PairBracket { i, j, coeffs, residual });
        }
    }
    Ok(InvolutiveCertificate { pairs })
}

/// `[X, V] = λ X + Σ c_k W_k` for one span generator `V`.
#[derive(Clone, Debug)]
pub struct BracketEntry {
    pub against: String,
    pub lambda: Expr,
    pub span: Vec<Expr>,
    pub residual: Certainty,
}

/// Result of checking that `X` is a C∞-symmetry of a span.
#[derive(Clone, Debug)]
pub struct SymmetryCheck {
    pub field: String,
    pub span_names: Vec<String>,
    pub entries: Vec<BracketEntry>,
}

impl SymmetryCheck {
    pub fn lambdas(&self) -> Vec<Expr> {
        self.entries.iter().map(|e| e.lambda.clone()).collect()
    }

    /// Standard symmetry: every λ vanishes.
    pub fn is_standard(&self) -> bool {
        self.entries.iter().all(|e| e.lambda.is_zero())
    }

    pub fn lines(&self) -> Vec<String> {
        let mut names = vec![self.field.clone()];
        names.extend(self.span_names.iter().cloned());
        self.entries
            .iter()
            .map(|e| {
                let mut c = vec![e.lambda.clone()];
                c.extend(e.span.iter().cloned());
                format!("[{},{}] = {}", self.field, e.against, combination(&c, &names))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field,
            "span": self.span_names,
            "standard": self.is_standard(),
            "brackets": self.entries.iter().map(|e| json!({
                "with": e.against,
                "lambda": e.lambda.to_string(),
                "span_coefficients": e.span.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "residual": e.residual,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Decompose `[X, V]` over `{X} ∪ span` for every `V` in the span.
pub fn check_symmetry(
    x: &VectorField,
    x_name: &str,
    span: &[&VectorField],
    span_names: &[String],
    t: &ZeroTester,
) -> Result<SymmetryCheck, StructureError> {
    let mut basis: Vec<&VectorField> = vec![x];
    basis.extend_from_slice(span);
    let mut entries = Vec::new();
    for (v, name) in span.iter().zip(span_names) {
        let br = x.bracket(v)?;
        let (coeffs, residual) = decompose_named(&br, &basis, (x_name, name), t)?;
        entries.push(BracketEntry {
            against: name.clone(),
            lambda: coeffs[0].clone(),
            span: coeffs[1..].to_vec(),
            residual,
        });
    }
    Ok(SymmetryCheck { field: x_name.to_string(), span_names: span_names.to_vec(), entries })
}

/// C∞-symmetry of a distribution, after checking independence.
pub fn check_cinf_symmetry(
    d: &Distribution,
    x: &VectorField,
    x_name: &str,
    t: &ZeroTester,
) -> Result<SymmetryCheck, StructureError> {
    let mut all: Vec<&VectorField> = d.gens.iter().collect();
    all.push(x);
    let rc = check_independent(&all, t)?;
    if !rc.full() {
        return Err(StructureError::Dependent { rank: rc.rank, expected: rc.expected });
    }
    let span: Vec<&VectorField> = d.gens.iter().collect();
    check_symmetry(x, x_name, &span, &d.names, t)
}

/// Ordered fields `X_1…X_{n−r}` certified level by level.
#[derive(Clone, Debug)]
pub struct CinfStructure {
    pub dist: Distribution,
    pub fields: Vec<VectorField>,
    pub names: Vec<String>,
    pub levels: Vec<SymmetryCheck>,
    pub independence: RankCertificate,
}

impl CinfStructure {
    pub fn chart(&self) -> &Arc<Chart> {
        self.dist.chart()
    }

    pub fn corank(&self) -> usize {
        self.fields.len()
    }

    /// Generators of `S(𝒳_{k−1})`: the distribution plus `X_1…X_{k−1}`.
    pub fn span_before(&self, k: usize) -> (Vec<&VectorField>, Vec<String>) {
        let mut v: Vec<&VectorField> = self.dist.gens.iter().collect();
        v.extend(self.fields[..k - 1].iter());
        let mut n = self.dist.names.clone();
        n.extend(self.names[..k - 1].iter().cloned());
        (v, n)
    }

    /// Loci where the certificate may fail: the independence minor and the
    /// denominators of all decomposition coefficients.
    pub fn loci(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = Vec::new();
        let mut push = |e: Expr| {
            if e.as_rational().is_none() && !out.contains(&e) {
                out.push(e);
            }
        };
        push(self.independence.minor.numerator());
        for l in &self.levels {
            for e in &l.entries {
                push(e.lambda.denominator());
                for c in &e.span {
                    push(c.denominator());
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "distribution": self.dist.names,
            "fields": self.names,
            "independence": self.independence.to_json(),
            "levels": self.levels.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
            "loci": self.loci().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "conditional": !self.loci().is_empty(),
        })
    }
}

pub fn check_cinf_structure(
    d: &Distribution,
    fields: Vec<VectorField>,
    names: Vec<String>,
    t: &ZeroTester,
) -> Result<CinfStructure, StructureError> {
    let expected = d.chart.dim() - d.rank();
    if fields.len() != expected {
        return Err(StructureError::Count { expected, got: fields.len() });
    }
    let mut all: Vec<&VectorField> = d.gens.iter().collect();
    all.extend(fields.iter());
    let independence = check_independent(&all, t)?;
    if !independence.full() {
        return Err(StructureError::Dependent { rank: independence.rank, expected: independence.expected });
    }
    let mut levels = Vec::new();
    for k in 0..fields.len() {
        let mut span: Vec<&VectorField> = d.gens.iter().collect();
        span.extend(fields[..k].iter());
        let mut span_names = d.names.clone();
        span_names.extend(names[..k].iter().cloned());
        levels.push(check_symmetry(&fields[k], &names[k], &span, &span_names, t)?);
    }
    Ok(CinfStructure { dist: d.clone(), fields, names, levels, independence })
}

/// `Δ`, the contracted forms `ω_i` and optionally the normalised `σ_i`.
#[derive(Clone, Debug)]
pub struct DualForms {
    pub delta: Expr,
    pub omegas: Vec<KForm>,
    pub sigmas: Option<Vec<KForm>>,
}

impl DualForms {
    pub fn to_json(&self) -> Value {
        json!({
            "delta": self.delta.to_string(),
            "omegas": self.omegas.iter().map(|w| w.to_json()).collect::<Vec<_>>(),
            "sigmas": self.sigmas.as_ref().map(|s| s.iter().map(|w| w.to_json()).collect::<Vec<_>>()),
        })
    }
}

fn contract(mut k: KForm, fields: &[&VectorField]) -> Result<KForm, StructureError> {
    for f in fields {
        k = k.interior(f)?;
    }
    Ok(k)
}

pub fn dual_one_forms(s: &CinfStructure, t: &ZeroTester) -> Result<DualForms, StructureError> {
    let chart = s.chart().clone();
    let n = chart.dim();
    let r = s.dist.rank();
    let omega = volume_form(chart.clone());
    let zs: Vec<&VectorField> = s.dist.gens.iter().collect();
    let base = contract(omega, &zs)?;
    let xs: Vec<&VectorField> = s.fields.iter().collect();
    let delta = contract(base.clone(), &xs)?.as_scalar().expect("full contraction is a 0-form");
    if !linalg::is_nonzero(&delta, t)? {
        return Err(StructureError::Degenerate);
    }
    let rows: Vec<Vec<Expr>> = zs.iter().chain(xs.iter()).map(|f| f.coeffs().to_vec()).collect();
    let mut omegas = Vec::new();
    for i in 0..xs.len() {
        let others: Vec<&VectorField> = xs.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, f)| *f).collect();
        let w = contract(base.clone(), &others)?;
        // Cofactor form: ω_i^j = (−1)^{n+j} Δ_{r+i,j} with 1-based j.
        let cof: Vec<Expr> = (0..n)
            .map(|j| {
                let m = linalg::delete(&rows, r + i, j);
                let d = linalg::det(&m, t)?;
                Ok(if (n + j + 1) % 2 == 1 { -d } else { d })
            })
            .collect::<Result<_, ZeroTestError>>()?;
        if w.coeff_vec() != cof {
            return Err(StructureError::CofactorMismatch(i + 1));
        }
        omegas.push(w);
    }
    Ok(DualForms { delta, omegas, sigmas: None })
}

/// `σ_i = (−1)^{n−r−i} ω_i / Δ`, certified against `X_i⌟σ_j = δ_ij`.
pub fn normalize_dual(s: &CinfStructure, d: &mut DualForms, t: &ZeroTester) -> Result<(), StructureError> {
    let m = s.corank();
    let inv = d.delta.recip().map_err(|_| StructureError::Degenerate)?;
    let sigmas: Vec<KForm> = d
        .omegas
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let sign = if (m - (i + 1)) % 2 == 1 { Expr::int(-1) } else { Expr::one() };
            w.scale(&(&sign * &inv))
        })
        .collect();
    for (i, x) in s.fields.iter().enumerate() {
        for (j, sg) in sigmas.iter().enumerate() {
            let v = sg.interior(x)?.as_scalar().expect("1-form contraction");
            let target = if i == j { Expr::one() } else { Expr::zero() };
            if !t.is_zero(&(&v - &target))?.holds() {
                return Err(StructureError::Pairing(i + 1, j + 1));
            }
        }
    }
    d.sigmas = Some(sigmas);
    Ok(())
}

/// `Z_j⌟ω_i = 0` for every generator and dual form.
pub fn check_annihilation(s: &CinfStructure, d: &DualForms, t: &ZeroTester) -> Result<Certainty, StructureError> {
    let mut vals = Vec::new();
    for w in &d.omegas {
        for z in &s.dist.gens {
            vals.push(w.interior(z)?.as_scalar().expect("1-form contraction"));
        }
    }
    Ok(all_zero(vals.iter(), t)?)
}

/// `dω_m ∧ ω_{k+1} ∧ … ∧ ω_last = 0` for every `k ≥ 1` and `m > k`.
pub fn check_differential_ideal(omegas: &[KForm], t: &ZeroTester) -> Result<Certainty, StructureError> {
    let mut vals = Vec::new();
    let q = omegas.len();
    let n = omegas.first().map_or(0, |w| w.chart().dim());
    for k in 1..q {
        let mut tail = omegas[k].clone();
        for w in &omegas[k + 1..] {
            tail = tail.wedge(w)?;
        }
        for m in k..q {
            if 2 + tail.degree() > n {
                continue;
            }
            let dw = omegas[m].d()?;
            let prod = dw.wedge(&tail)?;
            vals.extend(prod.terms().map(|(_, c)| c.clone()));
        }
    }
    Ok(all_zero(vals.iter(), t)?)
}

/// Coefficients of `hX` from those of `X`: `λ′ = λ − V(h)/h`, `c′ = h c`,
/// checked against a direct decomposition.
pub fn rescale_symmetry(
    check: &SymmetryCheck,
    x: &VectorField,
    h: &Expr,
    span: &[&VectorField],
    t: &ZeroTester,
) -> Result<SymmetryCheck, StructureError> {
    if h.is_zero() {
        return Err(StructureError::ZeroScale);
    }
    let entries: Vec<BracketEntry> = check
        .entries
        .iter()
        .zip(span)
        .map(|(e, v)| {
            let vh = v.apply(h).checked_div(h).expect("h is non-zero");
            BracketEntry {
                against: e.against.clone(),
                lambda: &e.lambda - &vh,
                span: e.span.iter().map(|c| h * c).collect(),
                residual: Certainty::ProvedZero,
            }
        })
        .collect();
    let hx = x.scale(h);
    let direct = check_symmetry(&hx, &check.field, span, &check.span_names, t)?;
    for (a, b) in entries.iter().zip(&direct.entries) {
        let mut diffs = vec![&a.lambda - &b.lambda];
        diffs.extend(a.span.iter().zip(&b.span).map(|(p, q)| p - q));
        if !all_zero(diffs.iter(), t)?.holds() {
            return Err(StructureError::RescaleMismatch);
        }
    }
    Ok(SymmetryCheck { field: check.field.clone(), span_names: check.span_names.clone(), entries: direct.entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Context;

    pub(crate) fn example31() -> (Distribution, Vec<VectorField>) {
        let c = Arc::new(Chart::new("U", &["x1", "x2", "x3", "x4"], &["C1", "C2"], Arc::new(Context::new())).unwrap());
        let z1 = VectorField::parse(&c, &["0", "x2 - x3*x4", "-x3", "x4"]).unwrap();
        let z2 = VectorField::parse(&c, &["1", "0", "-x3^2", "2*x3*x4 - x2"]).unwrap();
        let x1 = VectorField::parse(&c, &["0", "x4", "1", "0"]).unwrap();
        let x2 = VectorField::parse(&c, &["0", "0", "0", "1"]).unwrap();
        let d = Distribution::unnamed(c, vec![z1, z2]).unwrap();
        (d, vec![x1, x2])
    }

    fn names() -> Vec<String> {
        vec!["X1".into(), "X2".into()]
    }

    #[test]
    fn involutive_with_expected_coefficients() {
        let (d, _) = example31();
        let t = ZeroTester::default();
        let cert = check_involutive(&d, &t).unwrap();
        assert_eq!(cert.lines(&d), vec!["[Z1,Z2] = -x3*Z1".to_string()]);
    }

    #[test]
    fn non_involutive_reports_witness() {
        let c = Arc::new(Chart::new("R3", &["x", "y", "z"], &[], Arc::new(Context::new())).unwrap());
        let a = VectorField::parse(&c, &["1", "0", "0"]).unwrap();
        let b = VectorField::parse(&c, &["0", "1", "x"]).unwrap();
        let d = Distribution::unnamed(c.clone(), vec![a.clone(), b]).unwrap();
        let t = ZeroTester::default();
        match check_involutive(&d, &t) {
            Err(e @ StructureError::NotInSpan(..)) => assert!(e.witness().is_some()),
            other => panic!("{other:?}"),
        }
        // [d/dx, x d/dy] = d/dy = (1/x) x d/dy: in the span off x = 0.
        let b = VectorField::parse(&c, &["0", "x", "0"]).unwrap();
        let d = Distribution::unnamed(c.clone(), vec![a, b]).unwrap();
        let cert = check_involutive(&d, &t).unwrap();
        assert_eq!(cert.pairs[0].coeffs[1], c.parse("1/x").unwrap());
    }

    #[test]
    fn structure_levels_and_dual_forms() {
        let (d, xs) = example31();
        let t = ZeroTester::default();
        let s = check_cinf_structure(&d, xs, names(), &t).unwrap();
        let c = s.chart().clone();
        assert_eq!(s.levels[0].lambdas(), vec![Expr::int(-1), c.parse("-x3").unwrap()]);
        assert!(!s.levels[0].is_standard());
        let x2 = c.parse("x2").unwrap();
        assert!(s.independence.minor == x2 || s.independence.minor == -&x2);
        let mut dual = dual_one_forms(&s, &t).unwrap();
        assert_eq!(dual.delta, c.parse("-x2").unwrap());
        let w1: Vec<Expr> = ["x3^2*(x2 - x3*x4)", "x3", "x2 - x3*x4", "0"].iter().map(|e| c.parse(e).unwrap()).collect();
        let w2: Vec<Expr> = ["-(x2 - x3*x4)^2", "x4", "-x4^2", "-x2"].iter().map(|e| c.parse(e).unwrap()).collect();
        assert_eq!(dual.omegas[0].coeff_vec(), w1);
        assert_eq!(dual.omegas[1].coeff_vec(), w2);
        normalize_dual(&s, &mut dual, &t).unwrap();
        assert!(check_annihilation(&s, &dual, &t).unwrap().is_proved_zero());
        assert!(check_differential_ideal(&dual.omegas, &t).unwrap().is_proved_zero());
    }

    #[test]
    fn level_one_bracket_and_rescaling() {
        let (d, xs) = example31();
        let t = ZeroTester::default();
        let s = check_cinf_structure(&d, xs.clone(), names(), &t).unwrap();
        assert_eq!(s.levels[0].lines()[1], "[X1,Z2] = -x3*X1 + Z1");
        let c = s.chart().clone();
        let f1 = c.parse("-x3^2*(x2 - x3*x4)").unwrap();
        let span: Vec<&VectorField> = d.gens().iter().collect();
        let r = rescale_symmetry(&s.levels[0], &xs[0], &f1, &span, &t).unwrap();
        assert!(r.is_standard());
        assert_eq!(r.entries[1].span, vec![f1.clone(), Expr::zero()]);
        let same = rescale_symmetry(&s.levels[0], &xs[0], &Expr::one(), &span, &t).unwrap();
        assert_eq!(same.lambdas(), s.levels[0].lambdas());
    }

    #[test]
    fn reordered_structure_is_checked_not_assumed() {
        let (d, xs) = example31();
        let t = ZeroTester::default();
        let rev = vec![xs[1].clone(), xs[0].clone()];
        // X2 = ∂x4 against 𝒵: the verdict is whatever the decomposition says.
        let out = check_cinf_structure(&d, rev, vec!["X2".into(), "X1".into()], &t);
        match out {
            Ok(s) => assert_eq!(s.levels.len(), 2),
            Err(e) => assert!(matches!(e, StructureError::NotInSpan(..))),
        }
    }

    #[test]
    fn independence_ranks() {
        let (d, xs) = example31();
        let t = ZeroTester::default();
        let all: Vec<&VectorField> = d.gens().iter().chain(xs.iter()).collect();
        let rc = check_independent(&all, &t).unwrap();
        assert!(rc.full());
        let rc = check_independent(&[&xs[0], &xs[0]], &t).unwrap();
        assert_eq!(rc.rank, 1);
    }
}
