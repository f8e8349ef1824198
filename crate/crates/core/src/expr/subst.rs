use std::collections::BTreeMap;

use super::atom::Atom;
use super::context::Context;
use super::symbol::Sym;
use super::{Expr, ExprError};

impl Expr {
    /// Simultaneous substitution of symbols.
    ///
    /// Abstract functions are only known at their declared parameters, so a
    /// binding that moves one of those parameters is an error, as is a
    /// substitution under which some denominator vanishes identically.
    pub fn substitute(&self, bindings: &BTreeMap<Sym, Expr>, ctx: &Context) -> Result<Expr, ExprError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        self.map_atoms(&mut |a| match a {
            Atom::Sym(s) => Ok(bindings.get(s).cloned()),
            Atom::Jet(j) => {
                if let Some(params) = ctx.params(&j.func) {
                    for p in params {
                        if let Some(v) = bindings.get(p) {
                            if v.as_symbol() != Some(p) {
                                return Err(ExprError::JetSubstitution {
                                    func: j.func.to_string(),
                                    param: p.to_string(),
                                });
                            }
                        }
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        })
    }

    pub fn substitute_one(&self, s: &Sym, value: &Expr, ctx: &Context) -> Result<Expr, ExprError> {
        let mut b = BTreeMap::new();
        b.insert(s.clone(), value.clone());
        self.substitute(&b, ctx)
    }
}
