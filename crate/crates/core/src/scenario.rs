//! JSON scenario files: chart, fields, forms, structure, rules, reduction
//! script and zero-test policy.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse_rule, Chart, Context, Expr, ExprError, Sym, ZeroTestPolicy, ZeroTester};
use crate::forms::{FormError, KForm, VectorField};
use crate::reduction::{graph_map, init_reduction, ReductionError, ReductionState};
use crate::structures::{check_cinf_structure, CinfStructure, Distribution, StructureError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{what}: {source}")]
    Expr { what: String, source: ExprError },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{what}: {source}")]
    Form { what: String, source: FormError },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub coords: Vec<String>,
    #[serde(default)]
    pub constants: Vec<String>,
    /// Abstract functions and their parameter coordinates.
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    pub components: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub name: String,
    pub degree: usize,
    /// Basis key such as `d x1^d x3` to coefficient.
    pub terms: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub distribution: Vec<String>,
    #[serde(default)]
    pub fields: Vec<String>,
    /// Per-level symmetrizing factors, level 1 first.
    #[serde(default)]
    pub symmetrizing_factors: Vec<String>,
    /// Per-level (relative) integrating factors, level 1 first.
    #[serde(default)]
    pub integrating_factors: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionEntry {
    pub level: usize,
    pub integral: String,
    #[serde(default)]
    pub constant: Option<String>,
    pub parametrization: Vec<String>,
    #[serde(default)]
    pub rewrite_rules: Vec<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub eps_sing: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub chart: ChartSpec,
    #[serde(default)]
    pub rules: Vec<String>,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub forms: Vec<FormSpec>,
    #[serde(default)]
    pub structure: Option<StructureSpec>,
    #[serde(default)]
    pub reduction: Vec<ReductionEntry>,
    #[serde(default)]
    pub policy: PolicySpec,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub chart: Arc<Chart>,
    pub fields: Vec<(String, VectorField)>,
    pub forms: Vec<(String, KForm)>,
    pub structure: Option<StructureSpec>,
    pub reduction: Vec<ReductionEntry>,
    pub policy: ZeroTestPolicy,
}

fn expr_err(what: impl Into<String>) -> impl FnOnce(ExprError) -> ScenarioError {
    let what = what.into();
    move |source| ScenarioError::Expr { what, source }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|source| ScenarioError::Io { path: p.display().to_string(), source })?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Scenario::build(file)
    }

    pub fn build(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let mut ctx = Context::new();
        for (f, params) in &file.chart.functions {
            let ps: Vec<&str> = params.iter().map(String::as_str).collect();
            ctx.declare_function(f, &ps).map_err(expr_err(format!("function {f}")))?;
        }
        // Rules from the reduction script are installed up front: charts share
        // one immutable context.
        let rules = file.rules.iter().chain(file.reduction.iter().flat_map(|e| e.rewrite_rules.iter()));
        for r in rules {
            let rule = parse_rule(r, &ctx).map_err(expr_err(format!("rule `{r}`")))?;
            ctx.add_rule(rule).map_err(expr_err(format!("rule `{r}`")))?;
        }
        let coords: Vec<&str> = file.chart.coords.iter().map(String::as_str).collect();
        let consts: Vec<&str> = file.chart.constants.iter().map(String::as_str).collect();
        let name = file.chart.name.as_deref().unwrap_or("U");
        let chart = Arc::new(Chart::new(name, &coords, &consts, Arc::new(ctx)).map_err(expr_err("chart"))?);

        let mut fields = Vec::new();
        for f in &file.fields {
            if fields.iter().any(|(n, _)| n == &f.name) {
                return Err(ScenarioError::Invalid(format!("field `{}` defined twice", f.name)));
            }
            let comps: Vec<&str> = f.components.iter().map(String::as_str).collect();
            let v = VectorField::parse(&chart, &comps)
                .map_err(|source| ScenarioError::Form { what: format!("field {}", f.name), source })?;
            fields.push((f.name.clone(), v));
        }
        let mut forms = Vec::new();
        for f in &file.forms {
            let mut terms = Vec::new();
            for (k, v) in &f.terms {
                let idx = KForm::parse_basis(&chart, k)
                    .ok_or_else(|| ScenarioError::Invalid(format!("form {}: bad basis element `{k}`", f.name)))?;
                if idx.len() != f.degree {
                    return Err(ScenarioError::Invalid(format!("form {}: `{k}` has the wrong degree", f.name)));
                }
                terms.push((idx, chart.parse(v).map_err(expr_err(format!("form {} term {k}", f.name)))?));
            }
            let w = KForm::from_terms(chart.clone(), f.degree, terms)
                .map_err(|source| ScenarioError::Form { what: format!("form {}", f.name), source })?;
            forms.push((f.name.clone(), w));
        }
        let mut policy = ZeroTestPolicy::default();
        let p = &file.policy;
        policy.samples = p.samples.unwrap_or(policy.samples);
        policy.seed = p.seed.unwrap_or(policy.seed);
        policy.tol = p.tol.unwrap_or(policy.tol);
        policy.eps_sing = p.eps_sing.unwrap_or(policy.eps_sing);
        policy.lo = p.lo.unwrap_or(policy.lo);
        policy.hi = p.hi.unwrap_or(policy.hi);
        let sc = Scenario { chart, fields, forms, structure: file.structure, reduction: file.reduction, policy };
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let Some(s) = &self.structure else {
            if !self.reduction.is_empty() {
                return Err(ScenarioError::Invalid("a reduction script needs a structure".into()));
            }
            return Ok(());
        };
        for n in s.distribution.iter().chain(&s.fields) {
            self.field(n)?;
        }
        let corank = s.fields.len();
        for (what, v) in [("symmetrizing_factors", &s.symmetrizing_factors), ("integrating_factors", &s.integrating_factors)] {
            if !v.is_empty() && v.len() != corank {
                return Err(ScenarioError::Invalid(format!("{what} needs one entry per structure field")));
            }
        }
        for (i, e) in self.reduction.iter().enumerate() {
            if e.level + i != corank {
                return Err(ScenarioError::Invalid(format!(
                    "reduction levels must run contiguously from {corank} down to 1; entry {} has level {}",
                    i + 1,
                    e.level
                )));
            }
        }
        Ok(())
    }

    pub fn tester(&self) -> ZeroTester {
        ZeroTester::new(self.policy.clone())
    }

    pub fn field(&self, name: &str) -> Result<&VectorField, ScenarioError> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| ScenarioError::UnknownName(name.to_string()))
    }

    pub fn form(&self, name: &str) -> Result<&KForm, ScenarioError> {
        self.forms
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| ScenarioError::UnknownName(name.to_string()))
    }

    pub fn parse(&self, src: &str) -> Result<Expr, ScenarioError> {
        self.chart.parse(src).map_err(expr_err(format!("`{src}`")))
    }

    fn structure_spec(&self) -> Result<&StructureSpec, ScenarioError> {
        self.structure.as_ref().ok_or_else(|| ScenarioError::Invalid("scenario has no structure section".into()))
    }

    pub fn distribution(&self) -> Result<Distribution, StructureOrScenario> {
        let s = self.structure_spec()?;
        let gens = s.distribution.iter().map(|n| self.field(n).cloned()).collect::<Result<Vec<_>, _>>()?;
        Ok(Distribution::new(self.chart.clone(), gens, s.distribution.clone())?)
    }

    pub fn structure_fields(&self) -> Result<(Vec<VectorField>, Vec<String>), ScenarioError> {
        let s = self.structure_spec()?;
        let f = s.fields.iter().map(|n| self.field(n).cloned()).collect::<Result<Vec<_>, _>>()?;
        Ok((f, s.fields.clone()))
    }

    pub fn cinf_structure(&self, t: &ZeroTester) -> Result<CinfStructure, StructureOrScenario> {
        let d = self.distribution()?;
        let (fields, names) = self.structure_fields()?;
        Ok(check_cinf_structure(&d, fields, names, t)?)
    }

    pub fn factors(&self, integrating: bool) -> Result<Option<Vec<Expr>>, ScenarioError> {
        let s = self.structure_spec()?;
        let v = if integrating { &s.integrating_factors } else { &s.symmetrizing_factors };
        if v.is_empty() {
            return Ok(None);
        }
        v.iter().map(|e| self.parse(e)).collect::<Result<Vec<_>, _>>().map(Some)
    }

    /// Run the reduction script, stopping at the first failure. The state
    /// reached so far is returned alongside the error.
    pub fn run_reduction(&self, s: &CinfStructure, t: &ZeroTester) -> (Option<ReductionState>, Option<StructureOrScenario>) {
        let mut st = match init_reduction(s, t) {
            Ok(st) => st,
            Err(e) => return (None, Some(e.into())),
        };
        for e in &self.reduction {
            if let Err(err) = self.run_entry(&mut st, e, t) {
                return (Some(st), Some(err));
            }
        }
        (Some(st), None)
    }

    fn run_entry(&self, st: &mut ReductionState, e: &ReductionEntry, t: &ZeroTester) -> Result<(), StructureOrScenario> {
        let chart = st.chart.clone();
        let integral = chart.parse(&e.integral).map_err(expr_err(format!("integral of level {}", e.level)))?;
        let comps = e
            .parametrization
            .iter()
            .map(|c| chart.parse(c).map_err(expr_err(format!("parametrization of level {}", e.level))))
            .collect::<Result<Vec<_>, _>>()?;
        let iota = graph_map(&chart, &format!("N{}", e.level - 1), comps)?;
        let constant = Sym::new(e.constant.as_deref().unwrap_or(&format!("C{}", e.level)));
        if !chart.constants().contains(&constant) {
            return Err(ScenarioError::UnknownName(constant.to_string()).into());
        }
        st.descend(&integral, &constant, iota, t)?;
        Ok(())
    }
}

/// Input problems versus mathematical refutations.
#[derive(Debug, Error)]
pub enum StructureOrScenario {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

impl StructureOrScenario {
    /// Input errors map to exit code 2, refutations to 1.
    pub fn is_input_error(&self) -> bool {
        match self {
            StructureOrScenario::Scenario(_) => true,
            StructureOrScenario::Structure(e) => matches!(
                e,
                StructureError::Empty | StructureError::BadRank { .. } | StructureError::Count { .. } | StructureError::Form(_)
            ),
            StructureOrScenario::Reduction(e) => matches!(
                e,
                ReductionError::Dimension { .. }
                    | ReductionError::NotGraph
                    | ReductionError::Expr(_)
                    | ReductionError::Form(FormError::ChartMismatch(..))
                    | ReductionError::Form(FormError::Arity { .. })
                    | ReductionError::Done
            ),
        }
    }

    pub fn witness(&self) -> Option<&crate::expr::Point> {
        match self {
            StructureOrScenario::Structure(e) => e.witness(),
            StructureOrScenario::Reduction(e) => e.witness(),
            StructureOrScenario::Scenario(_) => None,
        }
    }
}
