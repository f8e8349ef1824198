//! Symmetrizing factors, relative integrating factors and their conversions.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{Certainty, Expr, Point, ZeroTestError, ZeroTester};
use crate::forms::{all_zero, FormError, VectorField};
use crate::structures::{check_symmetry, CinfStructure, DualForms, StructureError};

pub mod quadrature;

pub use quadrature::{primitive_by_quadrature, Primitive, QuadratureError};

#[derive(Debug, Clone, Error)]
pub enum FactorError {
    #[error("level {0} is out of range")]
    Level(usize),
    #[error("factor vanishes identically")]
    ZeroFactor,
    #[error("X(F) vanishes identically: F does not separate the field from the span")]
    NotSeparating,
    #[error("F is not a first integral of the span")]
    NotFirstIntegral(Option<Point>),
    #[error("converted factor failed its own certification")]
    SelfCertification(Box<FactorCertificate>),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    Symmetrizing,
    RelativeIntegrating,
    Integrating,
}

/// One checked identity.
#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    pub identity: String,
    pub certainty: Certainty,
}

#[derive(Clone, Debug)]
pub struct FactorCertificate {
    pub kind: FactorKind,
    pub level: usize,
    pub factor: Expr,
    pub evidence: Vec<Evidence>,
    /// Informational checks that need not hold (e.g. global closedness of a
    /// relative integrating factor).
    pub notes: Vec<Evidence>,
    pub locus: Vec<Expr>,
}

impl FactorCertificate {
    pub fn valid(&self) -> bool {
        self.evidence.iter().all(|e| e.certainty.holds())
    }

    /// First refuted identity and its witness.
    pub fn refutation(&self) -> Option<&Evidence> {
        self.evidence.iter().find(|e| !e.certainty.holds())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "level": self.level,
            "factor": self.factor.to_string(),
            "valid": self.valid(),
            "evidence": self.evidence,
            "notes": self.notes,
            "locus": self.locus.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }
}

fn locus_of(f: &Expr) -> Vec<Expr> {
    [f.numerator(), f.denominator()].into_iter().filter(|e| e.as_rational().is_none()).collect()
}

fn level_index(s: &CinfStructure, level: usize) -> Result<usize, FactorError> {
    if level == 0 || level > s.corank() {
        return Err(FactorError::Level(level));
    }
    Ok(level - 1)
}

/// `V(f) = λ f` for every generator `V` of the span below `level`, with `λ`
/// the coefficient of `X_level` in `[X_level, V]`.
pub fn check_symmetrizing_factor(
    s: &CinfStructure,
    level: usize,
    f: &Expr,
    t: &ZeroTester,
) -> Result<FactorCertificate, FactorError> {
    let k = level_index(s, level)?;
    if f.is_zero() {
        return Err(FactorError::ZeroFactor);
    }
    let (span, names) = s.span_before(level);
    let mut evidence = Vec::new();
    for ((v, name), entry) in span.iter().zip(&names).zip(&s.levels[k].entries) {
        let res = &v.apply(f) - &(&entry.lambda * f);
        evidence.push(Evidence { identity: format!("{name}(f) - lambda*f = 0"), certainty: t.is_zero(&res)? });
    }
    Ok(FactorCertificate {
        kind: FactorKind::Symmetrizing,
        level,
        factor: f.clone(),
        evidence,
        notes: Vec::new(),
        locus: locus_of(f),
    })
}

/// `d(μω_k) ∧ ω_{k+1} ∧ … ∧ ω_last = 0`, or `d(μω_last) = 0` at the top level.
pub fn check_relative_integrating_factor(
    s: &CinfStructure,
    d: &DualForms,
    level: usize,
    mu: &Expr,
    t: &ZeroTester,
) -> Result<FactorCertificate, FactorError> {
    let k = level_index(s, level)?;
    if mu.is_zero() {
        return Err(FactorError::ZeroFactor);
    }
    let dw = d.omegas[k].scale(mu).d()?;
    let closed = dw.vanishes(t)?;
    let top = level == s.corank();
    let (kind, evidence, notes) = if top {
        let e = Evidence { identity: format!("d(mu*omega{level}) = 0"), certainty: closed };
        (FactorKind::Integrating, vec![e], Vec::new())
    } else {
        let mut w = dw;
        for om in &d.omegas[k + 1..] {
            w = w.wedge(om)?;
        }
        let tail: Vec<String> = (level + 1..=s.corank()).map(|i| format!("omega{i}")).collect();
        let e = Evidence {
            identity: format!("d(mu*omega{level}) ^ {} = 0", tail.join(" ^ ")),
            certainty: w.vanishes(t)?,
        };
        let n = Evidence { identity: format!("d(mu*omega{level}) = 0"), certainty: closed };
        (FactorKind::RelativeIntegrating, vec![e], vec![n])
    };
    Ok(FactorCertificate { kind, level, factor: mu.clone(), evidence, notes, locus: locus_of(mu) })
}

fn pairing(s: &CinfStructure, d: &DualForms, k: usize) -> Result<Expr, FactorError> {
    Ok(d.omegas[k].interior(&s.fields[k])?.as_scalar().expect("1-form contraction"))
}

/// `μ = 1 / (f · X_k⌟ω_k)`, self-certified.
pub fn factor_to_integrating(
    s: &CinfStructure,
    d: &DualForms,
    level: usize,
    f: &Expr,
    t: &ZeroTester,
) -> Result<(Expr, FactorCertificate), FactorError> {
    let k = level_index(s, level)?;
    let mu = (f * &pairing(s, d, k)?).recip().map_err(|_| FactorError::ZeroFactor)?;
    let cert = check_relative_integrating_factor(s, d, level, &mu, t)?;
    if !cert.valid() {
        return Err(FactorError::SelfCertification(Box::new(cert)));
    }
    Ok((mu, cert))
}

/// `f = 1 / (μ · X_k⌟ω_k)`, self-certified.
pub fn integrating_to_factor(
    s: &CinfStructure,
    d: &DualForms,
    level: usize,
    mu: &Expr,
    t: &ZeroTester,
) -> Result<(Expr, FactorCertificate), FactorError> {
    let k = level_index(s, level)?;
    let f = (mu * &pairing(s, d, k)?).recip().map_err(|_| FactorError::ZeroFactor)?;
    let cert = check_symmetrizing_factor(s, level, &f, t)?;
    if !cert.valid() {
        return Err(FactorError::SelfCertification(Box::new(cert)));
    }
    Ok((f, cert))
}

/// `f = 1 / X(F)` for a first integral `F` of `span`.
pub fn factor_from_first_integral(
    span: &[&VectorField],
    span_names: &[String],
    x: &VectorField,
    big_f: &Expr,
    t: &ZeroTester,
) -> Result<(Expr, FactorCertificate), FactorError> {
    let vals: Vec<Expr> = span.iter().map(|v| v.apply(big_f)).collect();
    let ann = all_zero(vals.iter(), t)?;
    if !ann.holds() {
        return Err(FactorError::NotFirstIntegral(ann.witness().cloned()));
    }
    let xf = x.apply(big_f);
    let f = xf.recip().map_err(|_| FactorError::NotSeparating)?;
    let sym = check_symmetry(x, "X", span, span_names, t)?;
    let mut evidence = vec![Evidence { identity: "span annihilates F".into(), certainty: ann }];
    for (v, e) in span.iter().zip(&sym.entries) {
        let res = &v.apply(&f) - &(&e.lambda * &f);
        evidence.push(Evidence { identity: format!("{}(f) - lambda*f = 0", e.against), certainty: t.is_zero(&res)? });
    }
    let cert = FactorCertificate {
        kind: FactorKind::Symmetrizing,
        level: span.len(),
        factor: f.clone(),
        evidence,
        notes: Vec::new(),
        locus: locus_of(&f),
    };
    Ok((f, cert))
}

/// Two symmetrizing factors of the same field differ by a first integral:
/// certify `V(f2/f) = 0` for every span generator.
pub fn factor_quotient_check(
    f: &Expr,
    f2: &Expr,
    span: &[&VectorField],
    span_names: &[String],
    t: &ZeroTester,
) -> Result<Vec<Evidence>, FactorError> {
    let g = f2.checked_div(f).map_err(|_| FactorError::ZeroFactor)?;
    span.iter()
        .zip(span_names)
        .map(|(v, n)| Ok(Evidence { identity: format!("{n}(f2/f) = 0"), certainty: t.is_zero(&v.apply(&g))? }))
        .collect()
}

/// Standard levels: when all `λ` vanish, `f = 1` and
/// `μ = 1/(X_k⌟ω_k)` certify.
pub fn standard_level_factors(
    s: &CinfStructure,
    d: &DualForms,
    level: usize,
    t: &ZeroTester,
) -> Result<Option<(FactorCertificate, FactorCertificate)>, FactorError> {
    let k = level_index(s, level)?;
    if !s.levels[k].is_standard() {
        return Ok(None);
    }
    let f = check_symmetrizing_factor(s, level, &Expr::one(), t)?;
    let mu = pairing(s, d, k)?.recip().map_err(|_| FactorError::ZeroFactor)?;
    let m = check_relative_integrating_factor(s, d, level, &mu, t)?;
    Ok(Some((f, m)))
}
