//! Stepwise reduction: solve the last Pfaffian equation, restrict to its
//! level set, repeat, then compose the parametrizations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{Atom, Certainty, Chart, Expr, ExprError, Point, Sym, Var, ZeroTestError, ZeroTester};
use crate::factors::{check_relative_integrating_factor, check_symmetrizing_factor, Evidence, FactorCertificate, FactorError};
use crate::forms::{differential, FormError, KForm, SmoothMap, VectorField};
use crate::linalg::is_nonzero;
use crate::structures::{
    check_differential_ideal, check_symmetry, dual_one_forms, CinfStructure, Distribution, DualForms, StructureError,
    SymmetryCheck,
};

#[derive(Debug, Clone, Error)]
pub enum ReductionError {
    #[error("all levels are already reduced")]
    Done,
    #[error("reduction incomplete: {remaining} level(s) remain")]
    Incomplete { remaining: usize },
    #[error("dI vanishes identically")]
    ConstantIntegral,
    #[error("not a first integral of the level-{} form", .0.level)]
    NotIntegral(Box<IntegralCertificate>),
    #[error("parametrization misses the level set: I∘ι - {constant} = {residual}")]
    LevelSet { constant: Sym, residual: Expr, witness: Option<Point> },
    #[error("parametrization is not an immersion: rank {rank} < {expected}")]
    Rank { rank: usize, expected: usize },
    #[error("expected a map from a {expected}-dimensional chart, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("parametrization components that are not coordinates: cannot infer the reduced chart")]
    NotGraph,
    #[error("constant {0} has no integral to substitute")]
    UnresolvedConstant(Sym),
    #[error("{field} is not tangent: residual {residual}")]
    NotTangent { field: String, residual: Expr, witness: Option<Point> },
    #[error("lifted factor failed certification")]
    Lift(Box<FactorCertificate>),
    #[error("Y{level} is not a standard symmetry")]
    NotSolvable { level: usize, witness: Option<Point> },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Form(FormError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

impl From<FormError> for ReductionError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::ZeroTest(z) => ReductionError::ZeroTest(z),
            other => ReductionError::Form(other),
        }
    }
}

impl ReductionError {
    pub fn witness(&self) -> Option<&Point> {
        match self {
            ReductionError::NotIntegral(c) => c.evidence.iter().find_map(|e| e.certainty.witness()),
            ReductionError::LevelSet { witness, .. } | ReductionError::NotTangent { witness, .. } => witness.as_ref(),
            ReductionError::NotSolvable { witness, .. } => witness.as_ref(),
            ReductionError::Lift(c) => c.refutation().and_then(|e| e.certainty.witness()),
            ReductionError::Form(FormError::NotTangent { witness, .. }) => witness.as_ref(),
            ReductionError::Structure(s) => s.witness(),
            _ => None,
        }
    }
}

fn all_hold(ev: &[Evidence]) -> bool {
    ev.iter().all(|e| e.certainty.holds())
}

fn evidence_json(ev: &[Evidence]) -> Value {
    serde_json::to_value(ev).expect("evidence serializes")
}

#[derive(Clone, Debug)]
pub struct IntegralCertificate {
    pub level: usize,
    pub integral: Expr,
    pub evidence: Vec<Evidence>,
}

impl IntegralCertificate {
    pub fn valid(&self) -> bool {
        all_hold(&self.evidence)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "integral": self.integral.to_string(),
            "valid": self.valid(),
            "evidence": evidence_json(&self.evidence),
        })
    }
}

#[derive(Clone, Debug)]
pub struct ReductionStep {
    pub level: usize,
    /// Chart of dimension `r + level` on which `integral` lives.
    pub chart: Arc<Chart>,
    pub forms: Vec<KForm>,
    pub gens: Vec<VectorField>,
    pub integral: Expr,
    pub constant: Sym,
    pub iota: SmoothMap,
    /// Composite of the earlier parametrizations, `chart → original chart`.
    pub into_original: SmoothMap,
    pub certificate: IntegralCertificate,
    /// Level set, immersion, restriction and ideal checks.
    pub checks: Vec<Evidence>,
    /// `μ̃` with `dI = μ̃ ω̂_level`, when one coefficient ratio works.
    pub reduced_factor: Option<Expr>,
}

impl ReductionStep {
    pub fn to_json(&self) -> Value {
        let names = (1..=self.forms.len()).map(|i| format!("omega{i}"));
        json!({
            "level": self.level,
            "chart": self.chart.coords().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "forms": names.zip(&self.forms).map(|(n, f)| json!({"name": n, "form": f.to_json()})).collect::<Vec<_>>(),
            "integral": self.integral.to_string(),
            "constant": self.constant.to_string(),
            "parametrization": self.iota.comps().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "certificate": self.certificate.to_json(),
            "checks": evidence_json(&self.checks),
            "reduced_factor": self.reduced_factor.as_ref().map(|e| e.to_string()),
        })
    }
}

/// Progress of the reduction, from level `n − r` down to `0`.
#[derive(Clone, Debug)]
pub struct ReductionState {
    pub structure: CinfStructure,
    pub dual: DualForms,
    pub level: usize,
    pub chart: Arc<Chart>,
    pub forms: Vec<KForm>,
    pub gens: Vec<VectorField>,
    pub steps: Vec<ReductionStep>,
    /// `ι_{n−r} ∘ … ∘ ι_{level+1}`, current chart into the original chart.
    pub composed: SmoothMap,
    pub lifted: Vec<FactorCertificate>,
}

pub fn init_reduction(s: &CinfStructure, t: &ZeroTester) -> Result<ReductionState, ReductionError> {
    let dual = dual_one_forms(s, t)?;
    let chart = s.chart().clone();
    Ok(ReductionState {
        structure: s.clone(),
        level: s.corank(),
        forms: dual.omegas.clone(),
        gens: s.dist.gens().to_vec(),
        composed: SmoothMap::identity(chart.clone()),
        chart,
        dual,
        steps: Vec::new(),
        lifted: Vec::new(),
    })
}

/// Graph parametrization into `target`: components equal to their own
/// coordinate are kept as the reduced chart's coordinates.
pub fn graph_parametrization(target: &Arc<Chart>, name: &str, comps: &[&str]) -> Result<SmoothMap, ReductionError> {
    let exprs = comps.iter().map(|s| target.parse(s)).collect::<Result<Vec<_>, _>>()?;
    graph_map(target, name, exprs)
}

pub fn graph_map(target: &Arc<Chart>, name: &str, comps: Vec<Expr>) -> Result<SmoothMap, ReductionError> {
    if comps.len() != target.dim() {
        return Err(ReductionError::Dimension { expected: target.dim(), got: comps.len() });
    }
    let kept: Vec<Sym> = target
        .coords()
        .iter()
        .zip(&comps)
        .filter(|(s, c)| c.as_symbol() == Some(*s))
        .map(|(s, _)| s.clone())
        .collect();
    let kept_set: BTreeSet<&Sym> = kept.iter().collect();
    for c in &comps {
        if c.free_symbols().iter().any(|s| target.coord_index(s).is_some() && !kept_set.contains(s)) {
            return Err(ReductionError::NotGraph);
        }
    }
    let source = Arc::new(target.with_symbols(name, kept, target.constants().to_vec())?);
    Ok(SmoothMap::new(source, target.clone(), comps)?)
}

impl ReductionState {
    /// `dI ∧ ω̂_k = 0`, `dI ≠ 0`; at the top level also `Z_i(I) = 0` and
    /// `X_j(I) = 0` for the earlier structure fields.
    pub fn verify_first_integral(&self, integral: &Expr, t: &ZeroTester) -> Result<IntegralCertificate, ReductionError> {
        let k = self.level;
        if k == 0 {
            return Err(ReductionError::Done);
        }
        let di = differential(&self.chart, integral);
        if di.vanishes(t)?.holds() {
            return Err(ReductionError::ConstantIntegral);
        }
        let mut evidence = vec![Evidence {
            identity: format!("dI{k} ^ omega{k} = 0"),
            certainty: di.wedge(&self.forms[k - 1])?.vanishes(t)?,
        }];
        if self.steps.is_empty() {
            let s = &self.structure;
            for (z, n) in s.dist.gens().iter().zip(s.dist.names()) {
                evidence.push(Evidence { identity: format!("{n}(I{k}) = 0"), certainty: t.is_zero(&z.apply(integral))? });
            }
            for (x, n) in s.fields[..k - 1].iter().zip(&s.names) {
                evidence.push(Evidence { identity: format!("{n}(I{k}) = 0"), certainty: t.is_zero(&x.apply(integral))? });
            }
        }
        Ok(IntegralCertificate { level: k, integral: integral.clone(), evidence })
    }

    /// Restrict to `{I = constant}` through `iota` and move to the next level.
    pub fn descend(
        &mut self,
        integral: &Expr,
        constant: &Sym,
        iota: SmoothMap,
        t: &ZeroTester,
    ) -> Result<&ReductionStep, ReductionError> {
        let k = self.level;
        let certificate = self.verify_first_integral(integral, t)?;
        if !certificate.valid() {
            return Err(ReductionError::NotIntegral(Box::new(certificate)));
        }
        let dim = self.chart.dim();
        if iota.target.coords() != self.chart.coords() {
            return Err(FormError::ChartMismatch(iota.target.name.clone(), self.chart.name.clone()).into());
        }
        if iota.source.dim() != dim - 1 {
            return Err(ReductionError::Dimension { expected: dim - 1, got: iota.source.dim() });
        }
        let mut checks = Vec::new();
        let residual = &iota.apply(integral)? - &Expr::symbol(constant);
        let level_set = t.is_zero(&residual)?;
        if !level_set.holds() {
            let witness = level_set.witness().cloned();
            return Err(ReductionError::LevelSet { constant: constant.clone(), residual, witness });
        }
        checks.push(Evidence { identity: format!("I{k}∘iota{k} - {constant} = 0"), certainty: level_set });
        let rank = iota.rank(t)?;
        if rank < dim - 1 {
            return Err(ReductionError::Rank { rank, expected: dim - 1 });
        }
        let own = self.forms[k - 1].pullback(&iota)?;
        checks.push(Evidence { identity: format!("iota{k}*(omega{k}) = 0"), certainty: own.vanishes(t)? });
        let forms = self.forms[..k - 1].iter().map(|w| w.pullback(&iota)).collect::<Result<Vec<_>, _>>()?;
        let mut gens = Vec::new();
        for (z, n) in self.gens.iter().zip(self.structure.dist.names()) {
            match iota.pushforward(z, t) {
                Ok(w) => gens.push(w),
                Err(FormError::NotTangent { residual, witness }) => {
                    return Err(ReductionError::NotTangent { field: n.clone(), residual, witness })
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !forms.is_empty() {
            checks.push(Evidence {
                identity: "restricted forms generate a differential ideal".into(),
                certainty: check_differential_ideal(&forms, t)?,
            });
            let vals: Vec<Expr> = gens
                .iter()
                .flat_map(|z| forms.iter().map(move |w| w.interior(z).map(|s| s.as_scalar().expect("scalar"))))
                .collect::<Result<_, _>>()?;
            checks.push(Evidence {
                identity: "restricted forms annihilate the restricted distribution".into(),
                certainty: crate::forms::all_zero(vals.iter(), t)?,
            });
        }
        let di = differential(&self.chart, integral);
        let reduced_factor = reduced_factor(&di, &self.forms[k - 1], t)?;
        let composed = self.composed.compose(&iota)?;
        let step = ReductionStep {
            level: k,
            chart: self.chart.clone(),
            forms: self.forms.clone(),
            gens: std::mem::replace(&mut self.gens, gens),
            integral: integral.clone(),
            constant: constant.clone(),
            into_original: std::mem::replace(&mut self.composed, composed),
            iota: iota.clone(),
            certificate,
            checks,
            reduced_factor,
        };
        self.chart = iota.source.clone();
        self.forms = forms;
        self.level = k - 1;
        self.steps.push(step);
        Ok(self.steps.last().expect("just pushed"))
    }

    /// Constant → integral pairs recorded so far.
    pub fn integrals(&self) -> BTreeMap<Sym, Expr> {
        self.steps.iter().map(|s| (s.constant.clone(), s.integral.clone())).collect()
    }

    /// Replace the constants of `reduced` by their integrals (innermost level
    /// first) and certify the result at `level` on the original chart.
    pub fn lift_relative_factor(
        &mut self,
        level: usize,
        reduced: &Expr,
        integrals: Option<&BTreeMap<Sym, Expr>>,
        t: &ZeroTester,
    ) -> Result<FactorCertificate, ReductionError> {
        let recorded = self.integrals();
        let map = integrals.unwrap_or(&recorded);
        let ctx = self.structure.chart().ctx_arc().clone();
        let mut order: Vec<(usize, Sym)> = Vec::new();
        for (c, _) in map.iter() {
            let lv = self.steps.iter().find(|s| &s.constant == c).map_or(usize::MAX, |s| s.level);
            order.push((lv, c.clone()));
        }
        order.sort();
        let mut mu = reduced.clone();
        for (_, c) in &order {
            if mu.contains_symbol(c) {
                mu = mu.substitute_one(c, &map[c], &ctx)?;
            }
        }
        for s in &self.steps {
            if s.level > level && mu.contains_symbol(&s.constant) {
                return Err(ReductionError::UnresolvedConstant(s.constant.clone()));
            }
        }
        let mut cert = check_relative_integrating_factor(&self.structure, &self.dual, level, &mu, t)?;
        if level < self.structure.corank() {
            let into = if let Some(s) = self.steps.iter().find(|s| s.level == level) {
                Some(&s.into_original)
            } else if self.level == level {
                Some(&self.composed)
            } else {
                None
            };
            if let Some(m) = into {
                let w = self.dual.omegas[level - 1].scale(&mu).pullback(m)?;
                cert.evidence.push(Evidence {
                    identity: format!("d(iota*(mu*omega{level})) = 0 on the reduced chart"),
                    certainty: w.d()?.vanishes(t)?,
                });
            }
        }
        if !cert.valid() {
            return Err(ReductionError::Lift(Box::new(cert)));
        }
        self.lifted.push(cert.clone());
        Ok(cert)
    }

    pub fn final_report(&self) -> Result<ManifoldReport, ReductionError> {
        if self.level > 0 {
            return Err(ReductionError::Incomplete { remaining: self.level });
        }
        Ok(manifold_report(&self.composed))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "structure": self.structure.to_json(),
            "dual": self.dual.to_json(),
            "steps": self.steps.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "lifted": self.lifted.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "complete": self.level == 0,
            "manifold": self.final_report().ok().map(|r| r.to_json()),
        })
    }
}

/// `μ̃` with `dI = μ̃ ω`, taken from the first non-zero coefficient of `ω`.
fn reduced_factor(di: &KForm, w: &KForm, t: &ZeroTester) -> Result<Option<Expr>, ReductionError> {
    let cw = w.coeff_vec();
    let ci = di.coeff_vec();
    for (a, b) in ci.iter().zip(&cw) {
        if is_nonzero(b, t)? {
            let mu = a.checked_div(b)?;
            if di.sub(&w.scale(&mu))?.vanishes(t)?.holds() {
                return Ok(Some(mu));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

/// Explicit description of the integral manifolds.
#[derive(Clone, Debug)]
pub struct ManifoldReport {
    pub params: Vec<Sym>,
    pub constants: Vec<Sym>,
    pub components: Vec<(Sym, Expr)>,
    /// `x = expr` for every component that is not a free parameter.
    pub equations: Vec<(Sym, Expr)>,
    /// Rewrite rules of abstract functions the components depend on.
    pub definitions: Vec<String>,
}

pub fn manifold_report(map: &SmoothMap) -> ManifoldReport {
    let components: Vec<(Sym, Expr)> = map.target.coords().iter().cloned().zip(map.comps().iter().cloned()).collect();
    let equations = components.iter().filter(|(s, c)| c.as_symbol() != Some(s)).cloned().collect();
    let ctx = map.source.ctx();
    let mut funcs: BTreeSet<Sym> = BTreeSet::new();
    let mut queue: Vec<Expr> = map.comps().to_vec();
    while let Some(e) = queue.pop() {
        for v in e.free_vars() {
            if let Var::Jet(j) = v {
                if funcs.insert(j.func.clone()) {
                    queue.extend(ctx.rules().iter().filter(|r| r.target.func == j.func).map(|r| r.rhs.clone()));
                }
            }
        }
    }
    let definitions = ctx
        .rules()
        .iter()
        .filter(|r| funcs.contains(&r.target.func))
        .map(|r| format!("{} = {}", Expr::from_atom(Atom::Jet(r.target.clone())), r.rhs))
        .collect();
    ManifoldReport {
        params: map.source.coords().to_vec(),
        constants: map.source.constants().to_vec(),
        components,
        equations,
        definitions,
    }
}

impl ManifoldReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ps: Vec<String> = self.params.iter().map(|s| s.to_string()).collect();
        let comps: Vec<String> = self.components.iter().map(|(_, c)| c.to_string()).collect();
        out.push(format!("iota({}) = ({})", ps.join(", "), comps.join(", ")));
        for (s, e) in &self.equations {
            out.push(format!("{s} = {e}"));
        }
        for d in &self.definitions {
            out.push(format!("where {d}"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "parameters": self.params.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "constants": self.constants.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "components": self.components.iter().map(|(s, e)| json!({"coord": s.to_string(), "expr": e.to_string()})).collect::<Vec<_>>(),
            "equations": self.equations.iter().map(|(s, e)| format!("{s} = {e}")).collect::<Vec<_>>(),
            "definitions": self.definitions,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ManifoldCertificate {
    pub tangent: Vec<(String, VectorField)>,
    pub pullbacks: Vec<Evidence>,
}

impl ManifoldCertificate {
    pub fn valid(&self) -> bool {
        all_hold(&self.pullbacks)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.valid(),
            "tangent": self.tangent.iter().map(|(n, w)| json!({"field": n, "preimage": w.to_string()})).collect::<Vec<_>>(),
            "pullbacks": evidence_json(&self.pullbacks),
        })
    }
}

/// Every generator is tangent to `ι`, and the given dual forms pull back to zero.
pub fn verify_integral_manifold(
    d: &Distribution,
    omegas: &[KForm],
    iota: &SmoothMap,
    t: &ZeroTester,
) -> Result<ManifoldCertificate, ReductionError> {
    if iota.source.dim() != d.rank() {
        return Err(ReductionError::Dimension { expected: d.rank(), got: iota.source.dim() });
    }
    let mut tangent = Vec::new();
    for (z, n) in d.gens().iter().zip(d.names()) {
        match iota.pushforward(z, t) {
            Ok(w) => tangent.push((n.clone(), w)),
            Err(FormError::NotTangent { residual, witness }) => {
                return Err(ReductionError::NotTangent { field: n.clone(), residual, witness })
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut pullbacks = Vec::new();
    for (i, w) in omegas.iter().enumerate() {
        pullbacks.push(Evidence { identity: format!("iota*(omega{}) = 0", i + 1), certainty: w.pullback(iota)?.vanishes(t)? });
    }
    Ok(ManifoldCertificate { tangent, pullbacks })
}

#[derive(Clone, Debug)]
pub struct SolvableCertificate {
    pub fields: Vec<VectorField>,
    pub names: Vec<String>,
    pub factors: Vec<FactorCertificate>,
    pub checks: Vec<SymmetryCheck>,
    pub lambdas: Vec<Vec<Certainty>>,
}

impl SolvableCertificate {
    pub fn valid(&self) -> bool {
        self.factors.iter().all(|f| f.valid())
            && self.checks.iter().all(|c| c.entries.iter().all(|e| e.residual.holds()))
            && self.lambdas.iter().flatten().all(|c| c.holds())
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.names.iter().zip(&self.fields).map(|(n, y)| format!("{n} = {y}")).collect();
        for c in &self.checks {
            out.extend(c.lines());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.valid(),
            "fields": self.names.iter().zip(&self.fields).map(|(n, y)| json!({"name": n, "field": y.to_string()})).collect::<Vec<_>>(),
            "factors": self.factors.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            "levels": self.checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "lambda_zero": self.lambdas,
        })
    }
}

/// `Y_k = f_k X_k`, each checked as a standard symmetry of the distribution
/// together with the earlier `Y`s.
pub fn build_solvable_structure(
    s: &CinfStructure,
    factors: &[Expr],
    t: &ZeroTester,
) -> Result<SolvableCertificate, ReductionError> {
    if factors.len() != s.corank() {
        return Err(StructureError::Count { expected: s.corank(), got: factors.len() }.into());
    }
    let certs = factors
        .iter()
        .enumerate()
        .map(|(k, f)| check_symmetrizing_factor(s, k + 1, f, t))
        .collect::<Result<Vec<_>, _>>()?;
    let fields: Vec<VectorField> = s.fields.iter().zip(factors).map(|(x, f)| x.scale(f)).collect();
    let names: Vec<String> = (1..=fields.len()).map(|k| format!("Y{k}")).collect();
    let mut checks = Vec::new();
    let mut lambdas = Vec::new();
    for k in 0..fields.len() {
        let mut span: Vec<&VectorField> = s.dist.gens().iter().collect();
        span.extend(fields[..k].iter());
        let mut span_names = s.dist.names().to_vec();
        span_names.extend(names[..k].iter().cloned());
        let c = check_symmetry(&fields[k], &names[k], &span, &span_names, t)?;
        lambdas.push(c.entries.iter().map(|e| t.is_zero(&e.lambda)).collect::<Result<Vec<_>, _>>()?);
        checks.push(c);
    }
    Ok(SolvableCertificate { fields, names, factors: certs, checks, lambdas })
}

#[cfg(test)]
mod tests;
