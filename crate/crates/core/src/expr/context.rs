use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::atom::{Atom, Jet};
use super::symbol::Sym;
use super::{Expr, ExprError};

/// `D(f, v..) = rhs`: a derivative of an abstract function expressed through
/// lower derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct RewriteRule {
    pub target: Jet,
    pub rhs: Expr,
}

/// Abstract functions and their differential rewrite rules.
#[derive(Clone, Debug, Default)]
pub struct Context {
    functions: BTreeMap<Sym, Vec<Sym>>,
    rules: Vec<RewriteRule>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn declare_function(&mut self, name: &str, params: &[&str]) -> Result<(), ExprError> {
        let name = Sym::new(name);
        if params.is_empty() {
            return Err(ExprError::InvalidChart(format!("function `{name}` has no parameters")));
        }
        let params: Vec<Sym> = params.iter().map(|p| Sym::new(p)).collect();
        let distinct: BTreeSet<&Sym> = params.iter().collect();
        if distinct.len() != params.len() {
            return Err(ExprError::InvalidChart(format!("repeated parameter for `{name}`")));
        }
        if self.functions.insert(name.clone(), params).is_some() {
            return Err(ExprError::InvalidChart(format!("function `{name}` declared twice")));
        }
        Ok(())
    }

    pub fn functions(&self) -> impl Iterator<Item = (&Sym, &[Sym])> {
        self.functions.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn params(&self, func: &Sym) -> Option<&[Sym]> {
        self.functions.get(func).map(|v| v.as_slice())
    }

    pub fn is_function(&self, name: &str) -> bool {
        self.functions.contains_key(&Sym::new(name))
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// Register a rule. Its right-hand side is reduced by the rules already
    /// present, and existing right-hand sides are reduced by the new rule.
    pub fn add_rule(&mut self, rule: RewriteRule) -> Result<(), ExprError> {
        let target = &rule.target;
        let params = self
            .params(&target.func)
            .ok_or_else(|| ExprError::InvalidRule(format!("`{}` is not a declared function", target.func)))?;
        if target.total_order() == 0 {
            return Err(ExprError::InvalidRule("target must be a derivative".into()));
        }
        for (v, _) in &target.orders {
            if !params.contains(v) {
                return Err(ExprError::InvalidRule(format!("`{v}` is not a parameter of `{}`", target.func)));
            }
        }
        if self.rules.iter().any(|r| target.dominates(&r.target) || r.target.dominates(target)) {
            return Err(ExprError::InvalidRule(format!("overlapping rules for `{}`", target.func)));
        }
        for v in rule.rhs.free_vars() {
            if let super::Var::Jet(j) = v {
                if j.dominates(target) {
                    return Err(ExprError::InvalidRule(format!(
                        "right-hand side does not lower the order of `{}`",
                        target.func
                    )));
                }
            }
        }
        let rhs = self.reduce_jets(&rule.rhs)?;
        self.rules.push(RewriteRule { target: rule.target, rhs });
        for i in 0..self.rules.len() {
            let r = self.reduce_jets(&self.rules[i].rhs)?;
            self.rules[i].rhs = r;
        }
        Ok(())
    }

    /// Value of a jet after applying the rules: the matching rule's
    /// right-hand side differentiated by the excess orders.
    pub fn jet_value(&self, jet: &Jet) -> Expr {
        for r in &self.rules {
            if jet.dominates(&r.target) {
                let mut e = r.rhs.clone();
                for (v, k) in jet.excess_over(&r.target) {
                    for _ in 0..k {
                        e = e.diff(&v, self);
                    }
                }
                return e;
            }
        }
        Expr::from_atom(Atom::Jet(jet.clone()))
    }

    /// Replace every jet that a rule applies to.
    pub fn reduce_jets(&self, e: &Expr) -> Result<Expr, ExprError> {
        if self.rules.is_empty() {
            return Ok(e.clone());
        }
        let mut cur = e.clone();
        for _ in 0..32 {
            let next = cur.map_atoms(&mut |a| {
                Ok(match a {
                    Atom::Jet(j) if self.rules.iter().any(|r| j.dominates(&r.target)) => Some(self.jet_value(j)),
                    _ => None,
                })
            })?;
            if next == cur {
                return Ok(next);
            }
            cur = next;
        }
        Err(ExprError::InvalidRule("rewrite rules do not terminate".into()))
    }
}

/// A coordinate chart: ordered coordinates, symbolic constants, and the
/// abstract functions available in it.
#[derive(Clone, Debug)]
pub struct Chart {
    pub name: String,
    coords: Vec<Sym>,
    constants: Vec<Sym>,
    ctx: Arc<Context>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], constants: &[&str], ctx: Arc<Context>) -> Result<Self, ExprError> {
        let coords: Vec<Sym> = coords.iter().map(|c| Sym::new(c)).collect();
        let constants: Vec<Sym> = constants.iter().map(|c| Sym::new(c)).collect();
        Chart::from_syms(name, coords, constants, ctx)
    }

    pub fn from_syms(name: &str, coords: Vec<Sym>, constants: Vec<Sym>, ctx: Arc<Context>) -> Result<Self, ExprError> {
        if coords.is_empty() {
            return Err(ExprError::InvalidChart("a chart needs at least one coordinate".into()));
        }
        let mut seen = BTreeSet::new();
        for s in coords.iter().chain(&constants) {
            if !seen.insert(s.clone()) {
                return Err(ExprError::InvalidChart(format!("symbol `{s}` declared twice")));
            }
            if ctx.functions.contains_key(s) {
                return Err(ExprError::InvalidChart(format!("`{s}` is both a symbol and a function")));
            }
        }
        for (f, params) in &ctx.functions {
            for p in params {
                if !coords.contains(p) {
                    return Err(ExprError::InvalidChart(format!("parameter `{p}` of `{f}` is not a coordinate")));
                }
            }
        }
        Ok(Chart { name: name.to_string(), coords, constants, ctx })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Sym] {
        &self.coords
    }

    pub fn constants(&self) -> &[Sym] {
        &self.constants
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ctx_arc(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::symbol(&self.coords[i])
    }

    pub fn coord_index(&self, s: &Sym) -> Option<usize> {
        self.coords.iter().position(|c| c == s)
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        let s = Sym::new(name);
        self.coords.contains(&s) || self.constants.contains(&s)
    }

    /// Same functions and rules, different coordinates and constants.
    pub fn with_symbols(&self, name: &str, coords: Vec<Sym>, constants: Vec<Sym>) -> Result<Chart, ExprError> {
        Chart::from_syms(name, coords, constants, self.ctx.clone())
    }

    pub fn parse(&self, src: &str) -> Result<Expr, ExprError> {
        super::parse_expression(src, self)
    }
}
