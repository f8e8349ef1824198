//! Reduction of a numerator/denominator pair to the canonical quotient.
//!
//! Exponential atoms carry rational exponents of either sign, so before the
//! gcd each one is rescaled to an integer variable `T = exp(b)^(1/D)` and
//! shifted to non-negative exponents. Those shifts are units and are folded
//! back into the numerator afterwards.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::atom::{Atom, Monomial};
use super::ipoly::{self, IPoly};
use super::poly::Poly;

struct VarMap {
    atoms: Vec<Atom>,
    /// Common denominator of each atom's exponents (1 for ordinary atoms).
    scale: Vec<i64>,
}

impl VarMap {
    fn build(polys: &[&Poly]) -> VarMap {
        let mut scales: BTreeMap<Atom, i64> = BTreeMap::new();
        for p in polys {
            for m in p.terms.keys() {
                for (a, e) in &m.0 {
                    let s = scales.entry(a.clone()).or_insert(1);
                    *s = s.lcm(e.denom());
                }
            }
        }
        let (atoms, scale) = scales.into_iter().unzip();
        VarMap { atoms, scale }
    }

    /// Per-atom minimum exponent of the exponential atoms (zero for ordinary
    /// atoms). Subtracting it leaves non-negative exponents.
    fn shift_for(&self, p: &Poly) -> Vec<Rational64> {
        self.atoms
            .iter()
            .map(|a| {
                if !a.is_exp() {
                    return Rational64::zero();
                }
                p.terms
                    .keys()
                    .map(|m| m.exponent_of(a))
                    .min()
                    .unwrap_or_else(Rational64::zero)
            })
            .collect()
    }

    fn to_ipoly(&self, p: &Poly, shift: &[Rational64]) -> IPoly {
        let n = self.atoms.len();
        IPoly::from_terms(
            n,
            p.terms.iter().map(|(m, c)| {
                let mut ex = vec![0u32; n];
                for (i, a) in self.atoms.iter().enumerate() {
                    let e = m.exponent_of(a) - shift[i];
                    let scaled = e * Rational64::from_integer(self.scale[i]);
                    debug_assert!(scaled.is_integer() && scaled >= Rational64::zero());
                    ex[i] = scaled.to_integer() as u32;
                }
                (ex, c.clone())
            }),
        )
    }

    fn from_ipoly(&self, p: &IPoly, shift: &[Rational64]) -> Poly {
        let mut out = Poly::zero();
        for (ex, c) in p.terms() {
            let mut factors = Vec::new();
            for (i, a) in self.atoms.iter().enumerate() {
                let e = Rational64::new(ex[i] as i64, self.scale[i]) + shift[i];
                if !e.is_zero() {
                    factors.push((a.clone(), e));
                }
            }
            out.add_term(Monomial(factors), c.clone());
        }
        out
    }
}

/// Canonical `(num, den)` for `num / den`. Panics if `den` is zero; callers
/// check that first.
pub(crate) fn normalize(num: Poly, den: Poly) -> (Poly, Poly) {
    assert!(!den.is_zero(), "canonical quotient with zero denominator");
    if num.is_zero() {
        return (Poly::zero(), Poly::one());
    }
    if let Some((m, c)) = den.single_term() {
        if m.is_unit() {
            let inv = m.pow(-1);
            let k = c.recip();
            return (num.mul_term(&inv, &k), Poly::one());
        }
    }
    let vm = VarMap::build(&[&num, &den]);
    let sn = vm.shift_for(&num);
    let sd = vm.shift_for(&den);
    let a = vm.to_ipoly(&num, &sn);
    let b = vm.to_ipoly(&den, &sd);
    let g = ipoly::gcd(&a, &b);
    let (a, b) = if g.is_constant() {
        (a, b)
    } else {
        (
            a.div_exact(&g).expect("gcd divides numerator"),
            b.div_exact(&g).expect("gcd divides denominator"),
        )
    };
    let zero = vec![Rational64::zero(); vm.atoms.len()];
    let rel: Vec<Rational64> = sn.iter().zip(&sd).map(|(x, y)| x - y).collect();
    let mut num = vm.from_ipoly(&a, &rel);
    let mut den = vm.from_ipoly(&b, &zero);

    // Unit normalisation: the denominator's exponential exponents start at 0.
    let dshift = vm.shift_for(&den);
    let unit = Monomial(
        vm.atoms
            .iter()
            .zip(&dshift)
            .filter(|(_, l)| !l.is_zero())
            .map(|(a, l)| (a.clone(), -*l))
            .collect(),
    );
    if !unit.is_one() {
        num = num.mul_term(&unit, &BigRational::one());
        den = den.mul_term(&unit, &BigRational::one());
    }
    let lc = den.leading().map(|(_, c)| c.clone()).unwrap();
    if !lc.is_one() {
        let inv = lc.recip();
        num = num.scale(&inv);
        den = den.scale(&inv);
    }
    if let Some(c) = den.as_constant() {
        debug_assert!(c.is_one());
    }
    (num, den)
}
