#![allow(dead_code)]

use std::sync::Arc;

use cinf_core::{Chart, Context, Expr, KForm, VectorField};
use rand::Rng;

pub fn chart(n: usize) -> Arc<Chart> {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Arc::new(Chart::new(&format!("R{n}"), &refs, &[], Arc::new(Context::new())).unwrap())
}

/// Polynomial of total degree `≤ deg` with small integer coefficients.
pub fn poly(rng: &mut impl Rng, c: &Chart, deg: u32) -> Expr {
    let n = c.dim();
    let mut acc = Expr::zero();
    let mut push = |rng: &mut dyn rand::RngCore, m: Expr| {
        if rng.random_bool(0.6) {
            let k = rng.random_range(-3..=3i64);
            acc = &acc + &(&Expr::int(k) * &m);
        }
    };
    push(rng, Expr::one());
    for i in 0..n {
        push(rng, c.coord(i));
        if deg >= 2 {
            for j in i..n {
                push(rng, &c.coord(i) * &c.coord(j));
            }
        }
    }
    acc
}

/// Same, but never identically zero.
pub fn nonzero_poly(rng: &mut impl Rng, c: &Chart, deg: u32) -> Expr {
    loop {
        let p = poly(rng, c, deg);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn field(rng: &mut impl Rng, c: &Arc<Chart>, deg: u32) -> VectorField {
    VectorField::new(c.clone(), (0..c.dim()).map(|_| poly(rng, c, deg)).collect()).unwrap()
}

fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in subsets(n, p - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
    }
    out
}

pub fn form(rng: &mut impl Rng, c: &Arc<Chart>, p: usize, deg: u32) -> KForm {
    let terms: Vec<(Vec<usize>, Expr)> = subsets(c.dim(), p).into_iter().map(|idx| (idx, poly(rng, c, deg))).collect();
    KForm::from_terms(c.clone(), p, terms).unwrap()
}
