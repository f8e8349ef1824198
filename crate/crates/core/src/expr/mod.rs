//! Symbolic expressions in canonical rational-function form.
//!
//! Every [`Expr`] is stored as a reduced quotient `num / den` of sparse
//! polynomials over ℚ whose generators are [`Atom`]s: chart symbols, jet
//! symbols of abstract functions, opaque elementary-function applications and
//! exponentials. The denominator is normalised (leading coefficient one,
//! exponential content removed), so two rational expressions are equal as
//! functions exactly when their trees compare equal.

mod atom;
mod context;
mod diff;
mod eval;
mod format;
mod ipoly;
mod norm;
mod parse;
mod poly;
mod subst;
mod symbol;
mod zero;

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use thiserror::Error;

pub use atom::{Atom, Elementary, Jet, Monomial};
pub use context::{Chart, Context, RewriteRule};
pub use eval::{EvalError, Evaluation, Point, Var};
pub use format::format_expression;
pub use parse::{parse_expression, parse_free, parse_rule};
pub use poly::Poly;
pub use symbol::Sym;
pub use zero::{Certainty, ExecMode, ZeroTestError, ZeroTestPolicy, ZeroTester};

use poly::{big_to_rat64, rat64_to_big};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at byte {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("substitution makes a denominator vanish identically")]
    ZeroDenominator,
    #[error("cannot substitute into parameter `{param}` of abstract function `{func}`")]
    JetSubstitution { func: String, param: String },
    #[error("invalid rewrite rule: {0}")]
    InvalidRule(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Frac {
    num: Poly,
    den: Poly,
}

/// Immutable canonical expression. Cheap to clone and safe to share across threads.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Frac>);

impl Expr {
    fn from_canonical(num: Poly, den: Poly) -> Expr {
        Expr(Arc::new(Frac { num, den }))
    }

    pub(crate) fn from_parts(num: Poly, den: Poly) -> Expr {
        if den.is_one() || num.is_zero() {
            let den = if num.is_zero() { Poly::one() } else { den };
            return Expr::from_canonical(num, den);
        }
        let (n, d) = norm::normalize(num, den);
        Expr::from_canonical(n, d)
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_canonical(p, Poly::one())
    }

    pub fn zero() -> Expr {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(c: BigRational) -> Expr {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_atom(Atom::Sym(Sym::new(name)))
    }

    pub fn symbol(s: &Sym) -> Expr {
        Expr::from_atom(Atom::Sym(s.clone()))
    }

    pub fn from_atom(a: Atom) -> Expr {
        Expr::from_poly(Poly::atom(a))
    }

    pub fn num(&self) -> &Poly {
        &self.0.num
    }

    pub fn den(&self) -> &Poly {
        &self.0.den
    }

    pub fn numerator(&self) -> Expr {
        Expr::from_poly(self.0.num.clone())
    }

    pub fn denominator(&self) -> Expr {
        Expr::from_poly(self.0.den.clone())
    }

    /// Canonical zero test: exact for every rational expression.
    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_one() && self.0.num.is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.0.den.is_one() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_symbol(&self) -> Option<&Sym> {
        if !self.0.den.is_one() {
            return None;
        }
        match self.0.num.single_term() {
            Some((m, c)) if c.is_one() => match m.factors() {
                [(Atom::Sym(s), e)] if e.is_one() => Some(s),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    /// Rough syntactic size used to rank pivots.
    pub fn node_count(&self) -> usize {
        self.0.num.node_count() + self.0.den.node_count()
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Expr::from_parts(self.0.den.clone(), self.0.num.clone()))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if other.is_one() {
            return Ok(self.clone());
        }
        let num = self.0.num.mul(&other.0.den);
        let den = self.0.den.mul(&other.0.num);
        Ok(Expr::from_parts(num, den))
    }

    pub fn powi(&self, k: i64) -> Result<Expr, ExprError> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let k = u32::try_from(k).map_err(|_| ExprError::InvalidRule("exponent too large".into()))?;
        Ok(Expr::from_canonical(self.0.num.pow(k), self.0.den.pow(k)))
    }

    /// `exp(self)`, folded into the exponential group.
    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        if self.0.den.is_one() {
            let mut m = Monomial::one();
            for (mono, c) in self.0.num.terms() {
                let (base, e) = match big_to_rat64(c) {
                    Some(e) => (Expr::from_poly(Poly::term(mono.clone(), BigRational::one())), e),
                    None => (Expr::from_poly(Poly::term(mono.clone(), c.clone())), Rational64::one()),
                };
                m = m.mul(&Monomial::with_power(Atom::Exp(base), e));
            }
            return Expr::from_poly(Poly::term(m, BigRational::one()));
        }
        let lc = self.0.num.leading().map(|(_, c)| c.clone()).unwrap();
        let (base, e) = match big_to_rat64(&lc) {
            Some(e) => (self.checked_div(&Expr::rational(lc)).unwrap(), e),
            None => (self.clone(), Rational64::one()),
        };
        Expr::from_poly(Poly::term(Monomial::with_power(Atom::Exp(base), e), BigRational::one()))
    }

    pub fn apply(&self, f: Elementary) -> Expr {
        match f {
            Elementary::Ln => {
                if self.is_one() {
                    return Expr::zero();
                }
                // ln of a pure exponential unit is its exponent.
                if self.0.den.is_one() {
                    if let Some((m, c)) = self.0.num.single_term() {
                        if c.is_one() && m.is_unit() && !m.is_one() {
                            let mut acc = Expr::zero();
                            for (a, e) in m.factors() {
                                if let Atom::Exp(base) = a {
                                    acc = &acc + &(base * &Expr::rational(rat64_to_big(*e)));
                                }
                            }
                            return acc;
                        }
                    }
                }
            }
            Elementary::Sin | Elementary::Sqrt if self.is_zero() => return Expr::zero(),
            Elementary::Cos if self.is_zero() => return Expr::one(),
            Elementary::Sqrt if self.is_one() => return Expr::one(),
            _ => {}
        }
        Expr::from_atom(Atom::Func(f, self.clone()))
    }

    /// Symbols and jets occurring anywhere in the expression, including
    /// inside function arguments and exponential bases.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for p in [&self.0.num, &self.0.den] {
            for (m, _) in p.terms() {
                for (a, _) in m.factors() {
                    match a {
                        Atom::Sym(s) => {
                            out.insert(Var::Sym(s.clone()));
                        }
                        Atom::Jet(j) => {
                            out.insert(Var::Jet(j.clone()));
                        }
                        Atom::Func(_, e) | Atom::Exp(e) => e.collect_vars(out),
                    }
                }
            }
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Sym> {
        self.free_vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Sym(s) => Some(s),
                Var::Jet(_) => None,
            })
            .collect()
    }

    pub fn contains_symbol(&self, s: &Sym) -> bool {
        self.free_vars().contains(&Var::Sym(s.clone()))
    }

    /// Rebuild the expression with some atoms replaced. `f` returns `None`
    /// to keep an atom; exponential and function atoms are offered to `f`
    /// first and otherwise rebuilt from their transformed arguments.
    pub(crate) fn map_atoms(
        &self,
        f: &mut dyn FnMut(&Atom) -> Result<Option<Expr>, ExprError>,
    ) -> Result<Expr, ExprError> {
        let num = map_poly(&self.0.num, f)?;
        let den = map_poly(&self.0.den, f)?;
        if den.is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        Ok(num.checked_div(&den).expect("non-zero denominator"))
    }
}

fn map_poly(
    p: &Poly,
    f: &mut dyn FnMut(&Atom) -> Result<Option<Expr>, ExprError>,
) -> Result<Expr, ExprError> {
    let mut acc = Expr::zero();
    let mut kept_sum = Poly::zero();
    for (m, c) in p.terms() {
        let mut kept = Monomial::one();
        let mut factor = Expr::one();
        for (a, e) in m.factors() {
            let replaced = match f(a)? {
                Some(v) => Some(v),
                None => match a {
                    Atom::Func(k, arg) => {
                        let new_arg = arg.map_atoms(f)?;
                        if &new_arg == arg {
                            None
                        } else {
                            Some(new_arg.apply(*k))
                        }
                    }
                    Atom::Exp(base) => {
                        let new_base = base.map_atoms(f)?;
                        if &new_base == base {
                            None
                        } else {
                            Some(new_base.exp())
                        }
                    }
                    _ => None,
                },
            };
            match replaced {
                None => kept = kept.mul(&Monomial::with_power(a.clone(), *e)),
                Some(v) => {
                    let pw = if a.is_exp() {
                        // v = exp(new base); raise by a rational power through the base.
                        match v.exp_base_power(*e) {
                            Some(x) => x,
                            None => v.powi(e.to_integer())?,
                        }
                    } else {
                        v.powi(e.to_integer())?
                    };
                    factor = &factor * &pw;
                }
            }
        }
        if factor.is_one() {
            kept_sum.add_term(kept, c.clone());
        } else {
            let t = Expr::from_poly(Poly::term(kept, c.clone()));
            acc = &acc + &(&t * &factor);
        }
    }
    Ok(&acc + &Expr::from_poly(kept_sum))
}

impl Expr {
    /// For a pure exponential `exp(b)`, return `exp(b * e)`.
    fn exp_base_power(&self, e: Rational64) -> Option<Expr> {
        if !self.0.den.is_one() {
            return None;
        }
        let (m, c) = self.0.num.single_term()?;
        if !c.is_one() || !m.is_unit() {
            return None;
        }
        Some(Expr::from_poly(Poly::term(m.pow_rational(e), BigRational::one())))
    }
}

impl Monomial {
    fn pow_rational(&self, e: Rational64) -> Monomial {
        Monomial(self.0.iter().map(|(a, f)| (a.clone(), *f * e)).filter(|(_, f)| !f.is_zero()).collect())
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.0.den == other.0.den {
            let num = self.0.num.add(&other.0.num);
            return Expr::from_parts(num, self.0.den.clone());
        }
        let num = self.0.num.mul(&other.0.den).add(&other.0.num.mul(&self.0.den));
        let den = self.0.den.mul(&other.0.den);
        Expr::from_parts(num, den)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, other: &Expr) -> Expr {
        self + &(-other)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let num = self.0.num.mul(&other.0.num);
        let den = self.0.den.mul(&other.0.den);
        Expr::from_parts(num, den)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_canonical(self.0.num.neg(), self.0.den.clone())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, other: Expr) -> Expr {
                (&self).$m(&other)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, other: &Expr) -> Expr {
                (&self).$m(other)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, other: Expr) -> Expr {
                self.$m(&other)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}
