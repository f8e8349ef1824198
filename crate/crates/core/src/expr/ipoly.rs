//! Dense-exponent multivariate polynomials over ℚ used for gcd and exact
//! division. Variables are positional; exponent vectors compare
//! lexicographically, first variable most significant.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct IPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl IPoly {
    pub fn zero(nvars: usize) -> Self {
        IPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        let mut p = IPoly::zero(nvars);
        p.terms.insert(vec![0; nvars], BigRational::one());
        p
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Vec<u32>, BigRational)>) -> Self {
        let mut p = IPoly::zero(nvars);
        for (m, c) in it {
            debug_assert_eq!(m.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0)
    }

    fn add_term(&mut self, m: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn lead(&self) -> Option<(&Vec<u32>, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn mul(&self, other: &IPoly) -> IPoly {
        let mut out = IPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                let e: Vec<u32> = m.iter().zip(n).map(|(a, b)| a + b).collect();
                out.add_term(e, c * d);
            }
        }
        out
    }

    fn sub(&self, other: &IPoly) -> IPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    fn scale(&self, k: &BigRational) -> IPoly {
        IPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn monic(&self) -> IPoly {
        match self.lead() {
            Some((_, c)) if !c.is_one() => {
                let inv = c.recip();
                self.scale(&inv)
            }
            _ => self.clone(),
        }
    }

    fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m[v]).max().unwrap_or(0)
    }

    fn min_exponents(&self) -> Vec<u32> {
        let mut out = vec![u32::MAX; self.nvars];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(m) {
                *o = (*o).min(e);
            }
        }
        if self.terms.is_empty() {
            out.iter_mut().for_each(|o| *o = 0);
        }
        out
    }

    fn shift_down(&self, by: &[u32]) -> IPoly {
        IPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.iter().zip(by).map(|(a, b)| a - b).collect(), c.clone()))
                .collect(),
        }
    }

    fn shift_up(&self, by: &[u32]) -> IPoly {
        IPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.iter().zip(by).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Coefficients with respect to variable `v`, keyed by degree.
    fn coeffs_in(&self, v: usize) -> BTreeMap<u32, IPoly> {
        let mut out: BTreeMap<u32, IPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m[v];
            let mut k = m.clone();
            k[v] = 0;
            out.entry(d)
                .or_insert_with(|| IPoly::zero(self.nvars))
                .add_term(k, c.clone());
        }
        out
    }

    /// Exact quotient, or `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &IPoly) -> Option<IPoly> {
        let (lm, lc) = divisor.lead().expect("division by the zero polynomial");
        let (lm, lc_inv) = (lm.clone(), lc.recip());
        // An exact quotient has degree deg(self) - deg(divisor) in every variable.
        let mut room = Vec::with_capacity(self.nvars);
        for v in 0..self.nvars {
            room.push(self.degree_in(v).checked_sub(divisor.degree_in(v))?);
        }
        let mut rem = self.clone();
        let mut quot = IPoly::zero(self.nvars);
        while let Some((m, c)) = rem.lead() {
            if m.iter().zip(&lm).any(|(a, b)| a < b) {
                return None;
            }
            let tm: Vec<u32> = m.iter().zip(&lm).map(|(a, b)| a - b).collect();
            if tm.iter().zip(&room).any(|(a, b)| a > b) {
                return None;
            }
            let tc = c * &lc_inv;
            for (n, d) in &divisor.terms {
                let e: Vec<u32> = n.iter().zip(&tm).map(|(a, b)| a + b).collect();
                rem.add_term(e, -(d * &tc));
            }
            quot.add_term(tm, tc);
        }
        Some(quot)
    }

    /// Coefficients with respect to the monomials in `vars` jointly.
    fn coeffs_in_all(&self, vars: &[usize]) -> Vec<IPoly> {
        let mut out: BTreeMap<Vec<u32>, IPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Vec<u32> = vars.iter().map(|&v| m[v]).collect();
            let mut k = m.clone();
            for &v in vars {
                k[v] = 0;
            }
            out.entry(key).or_insert_with(|| IPoly::zero(self.nvars)).add_term(k, c.clone());
        }
        out.into_values().collect()
    }

    fn content_in(&self, v: usize) -> IPoly {
        let mut it = self.coeffs_in(v).into_values();
        let mut g = match it.next() {
            Some(c) => c.monic(),
            None => return IPoly::zero(self.nvars),
        };
        for c in it {
            if g.is_constant() {
                break;
            }
            g = gcd(&g, &c);
        }
        g
    }

    fn primitive_in(&self, v: usize) -> IPoly {
        let c = self.content_in(v);
        if c.is_constant() {
            return self.monic();
        }
        self.div_exact(&c).expect("content divides its polynomial").monic()
    }

    /// Pseudo-remainder of `self` by `b` viewed as univariate in `v`.
    fn prem(&self, b: &IPoly, v: usize) -> IPoly {
        let db = b.degree_in(v);
        let coeffs_b = b.coeffs_in(v);
        let lb = coeffs_b.get(&db).cloned().unwrap_or_else(|| IPoly::zero(self.nvars));
        let mut r = self.clone();
        loop {
            if r.is_zero() {
                return r;
            }
            let dr = r.degree_in(v);
            if dr < db {
                return r;
            }
            let lr = r.coeffs_in(v).remove(&dr).unwrap();
            let mut shift = vec![0; self.nvars];
            shift[v] = dr - db;
            r = lb.mul(&r).sub(&lr.mul(&b.shift_up(&shift)));
        }
    }
}

/// Monic greatest common divisor over ℚ.
pub(crate) fn gcd(a: &IPoly, b: &IPoly) -> IPoly {
    let n = a.nvars;
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return IPoly::one(n);
    }
    let ma = a.min_exponents();
    let mb = b.min_exponents();
    let common: Vec<u32> = ma.iter().zip(&mb).map(|(x, y)| *x.min(y)).collect();
    let g = gcd_no_monomial(&a.shift_down(&ma), &b.shift_down(&mb));
    g.shift_up(&common)
}

fn gcd_no_monomial(a: &IPoly, b: &IPoly) -> IPoly {
    let n = a.nvars;
    if a.is_constant() || b.is_constant() {
        return IPoly::one(n);
    }
    if a.terms.len() >= b.terms.len() {
        if a.div_exact(b).is_some() {
            return b.monic();
        }
    } else if b.div_exact(a).is_some() {
        return a.monic();
    }
    let active: Vec<usize> = (0..n).filter(|&v| a.degree_in(v) > 0 || b.degree_in(v) > 0).collect();
    if active.is_empty() {
        return IPoly::one(n);
    }
    let bounds: Vec<(usize, u32)> = active.iter().map(|&v| (v, degree_bound(a, b, v))).collect();
    if bounds.iter().all(|&(_, d)| d == 0) {
        return IPoly::one(n);
    }
    let free: Vec<usize> = bounds.iter().filter(|&&(_, d)| d == 0).map(|&(v, _)| v).collect();
    if !free.is_empty() {
        // The gcd does not involve the free variables, so it divides every
        // coefficient with respect to them.
        let mut cs: Vec<IPoly> = a.coeffs_in_all(&free);
        cs.extend(b.coeffs_in_all(&free));
        cs.sort_by_key(|c| c.terms.len());
        let mut g = IPoly::zero(n);
        for c in &cs {
            g = gcd(&g, c);
            if g.is_constant() {
                break;
            }
        }
        return g;
    }
    if let Some(h) = heuristic_gcd(&a.integer_primitive(), &b.integer_primitive(), 0) {
        // A common divisor meeting every degree bound is the gcd.
        if bounds.iter().all(|&(v, d)| h.degree_in(v) == d) {
            return h.monic();
        }
    }
    let v = bounds.iter().min_by_key(|&&(_, d)| d).map(|&(v, _)| v).unwrap();
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let pa = if ca.is_constant() { a.clone() } else { a.div_exact(&ca).unwrap() };
    let pb = if cb.is_constant() { b.clone() } else { b.div_exact(&cb).unwrap() };
    let gc = gcd(&ca, &cb);
    let gp = primitive_prs(pa, pb, v);
    gc.mul(&gp).monic()
}

/// Upper bound on `deg_v gcd(a, b)` from univariate images modulo a prime.
/// An image whose leading coefficients survive bounds the true degree.
fn degree_bound(a: &IPoly, b: &IPoly, v: usize) -> u32 {
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    let mut best = da.min(db);
    let mut state = 0x9e37_79b9_7f4a_7c15_u64 ^ ((v as u64) << 32);
    for _ in 0..3 {
        if best == 0 {
            break;
        }
        let pt: Vec<u64> = (0..a.nvars)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                2 + (state >> 4) % (PRIME - 3)
            })
            .collect();
        let (Some(ua), Some(ub)) = (a.image_mod(v, &pt), b.image_mod(v, &pt)) else { continue };
        if ua.len() as u32 != da + 1 || ub.len() as u32 != db + 1 {
            continue;
        }
        best = best.min(gcd_degree_mod(ua, ub));
    }
    best
}

const PRIME: u64 = (1 << 61) - 1;

fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powm(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a);
        }
        a = mulm(a, a);
        e >>= 1;
    }
    r
}

fn invm(a: u64) -> u64 {
    powm(a, PRIME - 2)
}

fn rat_mod(c: &BigRational) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let red = |x: &BigInt| -> u64 {
        let r = x % &p;
        let r = if r.sign() == num_bigint::Sign::Minus { r + &p } else { r };
        r.try_into().expect("reduced below the prime")
    };
    if c.denom().is_one() {
        return Some(red(c.numer()));
    }
    let d = red(c.denom());
    (d != 0).then(|| mulm(red(c.numer()), invm(d)))
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>) -> u32 {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let inv = invm(*b.last().unwrap());
        while a.len() >= b.len() {
            let k = mulm(*a.last().unwrap(), inv);
            let off = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[off + i] = (a[off + i] + PRIME - mulm(k, *c)) % PRIME;
            }
            while a.last() == Some(&0) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1) as u32
}

impl IPoly {
    /// Dense coefficients in `v` modulo the prime after substituting `pt`
    /// for the other variables.
    fn image_mod(&self, v: usize, pt: &[u64]) -> Option<Vec<u64>> {
        let mut out = vec![0u64; self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = rat_mod(c)?;
            for (i, &e) in m.iter().enumerate() {
                if i != v && e > 0 {
                    t = mulm(t, powm(pt[i], e as u64));
                }
            }
            let slot = &mut out[m[v] as usize];
            *slot = (*slot + t) % PRIME;
        }
        while out.last() == Some(&0) {
            out.pop();
        }
        Some(out)
    }

    /// Rescaled to coprime integer coefficients.
    fn integer_primitive(&self) -> IPoly {
        let mut l = BigInt::one();
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            l = l.lcm(c.denom());
            g = g.gcd(c.numer());
        }
        if g.is_zero() {
            return self.clone();
        }
        self.scale(&BigRational::new(l, g))
    }

    fn max_norm(&self) -> BigInt {
        self.terms.values().map(|c| c.numer().abs()).max().unwrap_or_default()
    }

    /// Substitute the integer `xi` for `v`.
    fn eval_var(&self, v: usize, xi: &BigInt) -> IPoly {
        let mut out = IPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut k = m.clone();
            k[v] = 0;
            out.add_term(k, c * BigRational::from_integer(num_traits::pow(xi.clone(), m[v] as usize)));
        }
        out
    }

    fn int_content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c.numer()))
    }

    fn active_vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.degree_in(v) > 0).collect()
    }
}

/// Inverse of `eval_var`: the symmetric `xi`-adic expansion of `h` becomes
/// the coefficients of the powers of `v`.
fn interpolate(h: &IPoly, v: usize, xi: &BigInt) -> IPoly {
    let mut h = h.clone();
    let mut out = IPoly::zero(h.nvars);
    let half = xi / 2;
    let mut power = 0u32;
    while !h.is_zero() {
        let mut g = IPoly::zero(h.nvars);
        for (m, c) in &h.terms {
            let mut r = c.numer().mod_floor(xi);
            if r > half {
                r -= xi;
            }
            g.add_term(m.clone(), BigRational::from_integer(r));
        }
        for (m, c) in &g.terms {
            let mut k = m.clone();
            k[v] += power;
            out.add_term(k, c.clone());
        }
        let inv = BigRational::from_integer(xi.clone()).recip();
        h = h.sub(&g).scale(&inv);
        power += 1;
    }
    out
}

/// Heuristic gcd of integer polynomials (evaluation at a large integer and
/// `xi`-adic reconstruction). Returns a common divisor or gives up.
fn heuristic_gcd(f: &IPoly, g: &IPoly, depth: u32) -> Option<IPoly> {
    let n = f.nvars;
    let (cf, cg) = (f.int_content(), g.int_content());
    let c = BigRational::from_integer(cf.gcd(&cg));
    let vf = f.active_vars();
    let vg = g.active_vars();
    if vf.is_empty() || vg.is_empty() {
        return Some(IPoly::from_terms(n, [(vec![0; n], c)]));
    }
    let f = f.scale(&BigRational::from_integer(cf).recip());
    let g = g.scale(&BigRational::from_integer(cg).recip());
    let v = *vf.iter().chain(&vg).max().unwrap();
    let b = f.max_norm().min(g.max_norm());
    let mut xi: BigInt = b * 2 + 29;
    for _ in 0..6 {
        let (ff, gg) = (f.eval_var(v, &xi), g.eval_var(v, &xi));
        if !ff.is_zero() && !gg.is_zero() && depth < 16 {
            if let Some(h) = heuristic_gcd(&ff, &gg, depth + 1) {
                let cand = interpolate(&h, v, &xi);
                if !cand.is_zero() {
                    let cand = cand.integer_primitive();
                    if f.div_exact(&cand).is_some() && g.div_exact(&cand).is_some() {
                        return Some(cand.scale(&c));
                    }
                }
            }
        }
        xi = &xi * 73794 * xi.sqrt().sqrt() / 27011;
    }
    None
}

fn primitive_prs(a: IPoly, b: IPoly, v: usize) -> IPoly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        let r = a.prem(&b, v);
        if r.is_zero() {
            return b.primitive_in(v);
        }
        if r.degree_in(v) == 0 {
            return IPoly::one(a.nvars);
        }
        a = b;
        b = r.primitive_in(v);
    }
}
