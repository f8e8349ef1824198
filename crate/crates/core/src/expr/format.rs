use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::atom::{Atom, Jet, Monomial};
use super::poly::{rat64_to_big, Poly};
use super::Expr;

/// Text form that parses back to the same canonical expression.
pub fn format_expression(e: &Expr) -> String {
    e.to_string()
}

fn write_jet(out: &mut String, j: &Jet) {
    if j.orders.is_empty() {
        out.push_str(j.func.as_str());
        return;
    }
    let _ = write!(out, "D({}", j.func);
    for (v, k) in &j.orders {
        if j.orders.len() == 1 && *k == 1 {
            let _ = write!(out, ", {v}");
        } else {
            let _ = write!(out, ", {v}, {k}");
        }
    }
    out.push(')');
}

fn write_atom(out: &mut String, a: &Atom, e: num_rational::Rational64) {
    match a {
        Atom::Exp(base) => {
            let arg = base * &Expr::rational(rat64_to_big(e));
            let _ = write!(out, "exp({arg})");
        }
        _ => {
            match a {
                Atom::Sym(s) => out.push_str(s.as_str()),
                Atom::Jet(j) => write_jet(out, j),
                Atom::Func(f, arg) => {
                    let _ = write!(out, "{}({arg})", f.name());
                }
                Atom::Exp(_) => unreachable!(),
            }
            if !e.is_one() {
                let _ = write!(out, "^{e}");
            }
        }
    }
}

fn write_monomial(out: &mut String, m: &Monomial) {
    for (i, (a, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        write_atom(out, a, *e);
    }
}

fn write_rational(out: &mut String, c: &BigRational) {
    if c.is_integer() {
        let _ = write!(out, "{}", c.numer());
    } else {
        let _ = write!(out, "{}/{}", c.numer(), c.denom());
    }
}

fn write_poly(out: &mut String, p: &Poly) {
    let terms = p.sorted_terms();
    if terms.is_empty() {
        out.push('0');
        return;
    }
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            write_rational(out, &a);
        } else {
            if !a.is_one() {
                write_rational(out, &a);
                out.push('*');
            }
            write_monomial(out, m);
        }
    }
}

fn is_simple(p: &Poly) -> bool {
    match p.single_term() {
        Some((m, c)) => c.is_one() && m.factors().len() <= 1,
        None => false,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if self.den().is_one() {
            write_poly(&mut out, self.num());
            return f.write_str(&out);
        }
        if self.num().len() > 1 {
            out.push('(');
            write_poly(&mut out, self.num());
            out.push(')');
        } else {
            write_poly(&mut out, self.num());
        }
        out.push('/');
        if is_simple(self.den()) {
            write_poly(&mut out, self.den());
        } else {
            out.push('(');
            write_poly(&mut out, self.den());
            out.push(')');
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
