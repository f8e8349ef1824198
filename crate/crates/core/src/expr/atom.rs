use std::cmp::Ordering;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use super::symbol::Sym;
use super::Expr;

/// Elementary functions that stay opaque in the polynomial ring.
///
/// `exp` is not listed: exponentials are folded into [`Atom::Exp`] so that
/// `exp(a) * exp(b)` and `exp(a + b)` share one representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elementary {
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Ln => "ln",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ln" | "log" => Elementary::Ln,
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "sqrt" => Elementary::Sqrt,
            _ => return None,
        })
    }

    pub fn apply_f64(self, x: f64) -> f64 {
        match self {
            Elementary::Ln => x.ln(),
            Elementary::Sin => x.sin(),
            Elementary::Cos => x.cos(),
            Elementary::Sqrt => x.sqrt(),
        }
    }
}

/// A jet symbol: an abstract function differentiated along its declared
/// parameters. Zero orders are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet {
    pub func: Sym,
    pub orders: Vec<(Sym, u32)>,
}

impl Jet {
    pub fn base(func: Sym) -> Self {
        Jet { func, orders: Vec::new() }
    }

    pub fn new(func: Sym, mut orders: Vec<(Sym, u32)>) -> Self {
        orders.retain(|(_, k)| *k > 0);
        orders.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Sym, u32)> = Vec::with_capacity(orders.len());
        for (v, k) in orders {
            match merged.last_mut() {
                Some((w, acc)) if *w == v => *acc += k,
                _ => merged.push((v, k)),
            }
        }
        Jet { func, orders: merged }
    }

    pub fn order_of(&self, var: &Sym) -> u32 {
        self.orders
            .iter()
            .find(|(v, _)| v == var)
            .map_or(0, |(_, k)| *k)
    }

    pub fn total_order(&self) -> u32 {
        self.orders.iter().map(|(_, k)| k).sum()
    }

    pub fn bumped(&self, var: &Sym, by: u32) -> Jet {
        let mut orders = self.orders.clone();
        orders.push((var.clone(), by));
        Jet::new(self.func.clone(), orders)
    }

    /// `true` when every order of `self` is at least the matching order of `other`.
    pub fn dominates(&self, other: &Jet) -> bool {
        self.func == other.func && other.orders.iter().all(|(v, k)| self.order_of(v) >= *k)
    }

    /// Componentwise difference; assumes `self.dominates(other)`.
    pub fn excess_over(&self, other: &Jet) -> Vec<(Sym, u32)> {
        self.orders
            .iter()
            .map(|(v, k)| (v.clone(), k - other.order_of(v)))
            .filter(|(_, k)| *k > 0)
            .collect()
    }
}

/// Generator of the polynomial ring underlying the canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(Sym),
    Jet(Jet),
    Func(Elementary, Expr),
    /// `exp(base)`; the base is normalised (monic numerator, or a bare
    /// monomial) and the exponent carried by the monomial may be any rational.
    Exp(Expr),
}

impl Atom {
    pub fn is_exp(&self) -> bool {
        matches!(self, Atom::Exp(_))
    }
}

/// Power product of atoms, sorted by atom. Ordinary atoms carry positive
/// integer exponents; exponential atoms carry any non-zero rational.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub(crate) Vec<(Atom, Rational64)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, Rational64::one())])
    }

    pub fn with_power(a: Atom, e: Rational64) -> Self {
        if e.is_zero() {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, Rational64)] {
        &self.0
    }

    /// Units of the ring: pure products of exponentials.
    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|(a, _)| a.is_exp())
    }

    pub fn exponent_of(&self, a: &Atom) -> Rational64 {
        self.0
            .binary_search_by(|(b, _)| b.cmp(a))
            .map_or(Rational64::zero(), |i| self.0[i].1)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if !e.is_zero() {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, k: i64) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(
            self.0
                .iter()
                .map(|(a, e)| (a.clone(), *e * Rational64::from_integer(k)))
                .collect(),
        )
    }

    /// Drop one factor of `a` (exponent decreases by one).
    pub fn without_one(&self, a: &Atom) -> Monomial {
        let mut out = self.clone();
        if let Ok(i) = out.0.binary_search_by(|(b, _)| b.cmp(a)) {
            let e = out.0[i].1 - Rational64::one();
            if e.is_zero() {
                out.0.remove(i);
            } else {
                out.0[i].1 = e;
            }
        }
        out
    }

    /// Sum of the integer exponents of ordinary atoms.
    pub fn degree(&self) -> i64 {
        self.0
            .iter()
            .filter(|(a, _)| !a.is_exp())
            .map(|(_, e)| e.to_integer())
            .sum()
    }

    /// Lexicographic monomial order with the smallest atom most significant.
    pub fn cmp_lex(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => return sign_order(e),
                (None, Some((_, e))) => return sign_order(e).reverse(),
                (Some((x, e)), Some((y, f))) => match x.cmp(y) {
                    Ordering::Less => return sign_order(e),
                    Ordering::Greater => return sign_order(f).reverse(),
                    Ordering::Equal => match e.cmp(f) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
    }
}

fn sign_order(e: &Rational64) -> Ordering {
    if e.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}
