use num_rational::BigRational;
use num_traits::One;

use super::atom::{Atom, Elementary};
use super::context::Context;
use super::poly::Poly;
use super::symbol::Sym;
use super::Expr;

impl Expr {
    /// Partial derivative with respect to the symbol `v`. Jets of functions
    /// that have `v` as a parameter are bumped and then reduced by the rules.
    pub fn diff(&self, v: &Sym, ctx: &Context) -> Expr {
        let dn = diff_poly(self.num(), v, ctx);
        if self.den().is_one() {
            return dn;
        }
        let dd = diff_poly(self.den(), v, ctx);
        if dn.is_zero() && dd.is_zero() {
            return Expr::zero();
        }
        let n = self.numerator();
        let d = self.denominator();
        let top = &(&dn * &d) - &(&n * &dd);
        top.checked_div(&(&d * &d)).expect("canonical denominator is non-zero")
    }

    /// Derivative along the coordinate list, as an `n`-vector.
    pub fn gradient(&self, coords: &[Sym], ctx: &Context) -> Vec<Expr> {
        coords.iter().map(|c| self.diff(c, ctx)).collect()
    }
}

fn diff_poly(p: &Poly, v: &Sym, ctx: &Context) -> Expr {
    let mut acc = Expr::zero();
    for a in p.atoms() {
        let da = diff_atom(&a, v, ctx);
        if da.is_zero() {
            continue;
        }
        let coeff = if a.is_exp() {
            Expr::from_poly(p.weighted_by_exponent(&a))
        } else {
            Expr::from_poly(p.formal_partial(&a))
        };
        acc = &acc + &(&coeff * &da);
    }
    acc
}

fn diff_atom(a: &Atom, v: &Sym, ctx: &Context) -> Expr {
    match a {
        Atom::Sym(s) => {
            if s == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Jet(j) => match ctx.params(&j.func) {
            Some(ps) if ps.contains(v) => ctx.jet_value(&j.bumped(v, 1)),
            _ => Expr::zero(),
        },
        Atom::Exp(b) => b.diff(v, ctx),
        Atom::Func(k, arg) => {
            let darg = arg.diff(v, ctx);
            if darg.is_zero() {
                return darg;
            }
            let outer = match k {
                Elementary::Ln => arg.recip().expect("logarithm of zero"),
                Elementary::Sin => arg.apply(Elementary::Cos),
                Elementary::Cos => -arg.apply(Elementary::Sin),
                Elementary::Sqrt => {
                    let two = Expr::rational(BigRational::one() + BigRational::one());
                    (&two * &arg.apply(Elementary::Sqrt)).recip().expect("sqrt of zero")
                }
            };
            &outer * &darg
        }
    }
}
