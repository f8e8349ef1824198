use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::atom::{Atom, Jet, Monomial};
use super::poly::{rat64_to_big, Poly};
use super::symbol::Sym;
use super::Expr;

/// A free variable of an expression: a symbol or a jet of an abstract function.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Sym(Sym),
    Jet(Jet),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Sym(s) => write!(f, "{s}"),
            Var::Jet(j) => write!(f, "{}", Expr::from_atom(Atom::Jet(j.clone()))),
        }
    }
}

/// Exact rational values for symbols and jet symbols.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    values: BTreeMap<Var, BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    Unassigned(Var),
    Singular,
}

/// Value of an expression at a point. `scale` is the sum of absolute term
/// values of the numerator and sets the yardstick for relative tolerances.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: BigRational,
    pub scale: BigRational,
    pub exact: bool,
}

impl Point {
    pub fn new() -> Self {
        Point::default()
    }

    pub fn set(&mut self, v: Var, value: BigRational) {
        self.values.insert(v, value);
    }

    pub fn set_sym(&mut self, name: &str, value: BigRational) {
        self.values.insert(Var::Sym(Sym::new(name)), value);
    }

    pub fn get(&self, v: &Var) -> Option<&BigRational> {
        self.values.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &BigRational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `{"x1": "1/2", ...}` with exact rationals, for reports.
    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> = self
            .values
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
            .collect();
        serde_json::Value::Object(m)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

struct Ctx<'a> {
    pt: &'a Point,
    eps: f64,
}

fn from_f64(x: f64) -> Result<BigRational, EvalError> {
    if !x.is_finite() {
        return Err(EvalError::Singular);
    }
    BigRational::from_float(x).ok_or(EvalError::Singular)
}

impl Ctx<'_> {
    fn atom_power(&self, a: &Atom, e: num_rational::Rational64) -> Result<(BigRational, bool), EvalError> {
        match a {
            Atom::Sym(s) => {
                let v = Var::Sym(s.clone());
                let x = self.pt.get(&v).ok_or(EvalError::Unassigned(v))?;
                Ok((pow_int(x, e.to_integer()), true))
            }
            Atom::Jet(j) => {
                let v = Var::Jet(j.clone());
                let x = self.pt.get(&v).ok_or(EvalError::Unassigned(v))?;
                Ok((pow_int(x, e.to_integer()), true))
            }
            Atom::Exp(base) => {
                let b = self.expr(base)?;
                let arg = &b.value * rat64_to_big(e);
                if arg.is_zero() {
                    return Ok((BigRational::one(), b.exact));
                }
                let x = arg.to_f64().ok_or(EvalError::Singular)?;
                Ok((from_f64(x.exp())?, false))
            }
            Atom::Func(f, arg) => {
                let b = self.expr(arg)?;
                let x = b.value.to_f64().ok_or(EvalError::Singular)?;
                let y = f.apply_f64(x);
                let v = from_f64(y)?;
                Ok((pow_int(&v, e.to_integer()), false))
            }
        }
    }

    fn monomial(&self, m: &Monomial) -> Result<(BigRational, bool), EvalError> {
        let mut acc = BigRational::one();
        let mut exact = true;
        for (a, e) in m.factors() {
            let (v, ex) = self.atom_power(a, *e)?;
            acc *= v;
            exact &= ex;
        }
        Ok((acc, exact))
    }

    fn poly(&self, p: &Poly) -> Result<Evaluation, EvalError> {
        let mut value = BigRational::zero();
        let mut scale = BigRational::zero();
        let mut exact = true;
        for (m, c) in p.terms() {
            let (v, ex) = self.monomial(m)?;
            let t = c * v;
            scale += t.abs();
            value += t;
            exact &= ex;
        }
        Ok(Evaluation { value, scale, exact })
    }

    fn expr(&self, e: &Expr) -> Result<Evaluation, EvalError> {
        let n = self.poly(e.num())?;
        if e.den().is_one() {
            return Ok(n);
        }
        let d = self.poly(e.den())?;
        let guard = d.scale.to_f64().unwrap_or(f64::MAX).max(1.0) * self.eps;
        if d.value.is_zero() || d.value.abs().to_f64().unwrap_or(0.0) < guard {
            return Err(EvalError::Singular);
        }
        Ok(Evaluation {
            value: &n.value / &d.value,
            scale: &n.scale / d.value.abs(),
            exact: n.exact && d.exact,
        })
    }
}

fn pow_int(x: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

impl Expr {
    /// Evaluate at `pt`; denominators smaller than `eps_sing` (relative to
    /// their own term scale, at least absolute) make the point singular.
    pub fn eval_at(&self, pt: &Point, eps_sing: f64) -> Result<Evaluation, EvalError> {
        Ctx { pt, eps: eps_sing }.expr(self)
    }

    /// Plain floating-point evaluation for numerics such as quadrature.
    pub fn eval_f64(&self, values: &dyn Fn(&Var) -> Option<f64>) -> f64 {
        let d = eval_poly_f64(self.den(), values);
        eval_poly_f64(self.num(), values) / d
    }
}

fn eval_poly_f64(p: &Poly, values: &dyn Fn(&Var) -> Option<f64>) -> f64 {
    let mut acc = 0.0;
    for (m, c) in p.terms() {
        let mut t = c.to_f64().unwrap_or(f64::NAN);
        for (a, e) in m.factors() {
            let v = match a {
                Atom::Sym(s) => values(&Var::Sym(s.clone())).unwrap_or(f64::NAN).powi(e.to_integer() as i32),
                Atom::Jet(j) => values(&Var::Jet(j.clone())).unwrap_or(f64::NAN).powi(e.to_integer() as i32),
                Atom::Exp(b) => {
                    let r = *e.numer() as f64 / *e.denom() as f64;
                    (b.eval_f64(values) * r).exp()
                }
                Atom::Func(f, arg) => f.apply_f64(arg.eval_f64(values)).powi(e.to_integer() as i32),
            };
            t *= v;
        }
        acc += t;
    }
    acc
}
