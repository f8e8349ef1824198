//! Vector fields, differential forms and maps between charts.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Certainty, Chart, Expr, ExprError, Point, Sym, ZeroTestError, ZeroTester};
use crate::linalg::{self, LinAlgError};

#[derive(Debug, Clone, Error)]
pub enum FormError {
    #[error("chart mismatch: `{0}` vs `{1}`")]
    ChartMismatch(String, String),
    #[error("expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("degree {0} exceeds the chart dimension {1}")]
    DegreeOverflow(usize, usize),
    #[error("interior product of a 0-form")]
    DegreeZero,
    #[error("field is not tangent to the image of the map")]
    NotTangent { residual: Expr, witness: Option<Point> },
    #[error("map is not an immersion (Jacobian rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

fn same_chart(a: &Chart, b: &Chart) -> Result<(), FormError> {
    if a.coords() == b.coords() {
        Ok(())
    } else {
        Err(FormError::ChartMismatch(a.name.clone(), b.name.clone()))
    }
}

/// `Σ X^j ∂/∂x_j` over a chart.
#[derive(Clone, Debug)]
pub struct VectorField {
    chart: Arc<Chart>,
    coeffs: Vec<Expr>,
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.chart.coords() == other.chart.coords() && self.coeffs == other.coeffs
    }
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, coeffs: Vec<Expr>) -> Result<Self, FormError> {
        if coeffs.len() != chart.dim() {
            return Err(FormError::Arity { expected: chart.dim(), got: coeffs.len() });
        }
        Ok(VectorField { chart, coeffs })
    }

    pub fn parse(chart: &Arc<Chart>, comps: &[&str]) -> Result<Self, FormError> {
        let coeffs = comps.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>()?;
        VectorField::new(chart.clone(), coeffs)
    }

    pub fn zero(chart: Arc<Chart>) -> Self {
        let n = chart.dim();
        VectorField { chart, coeffs: vec![Expr::zero(); n] }
    }

    /// `∂/∂x_i`.
    pub fn coordinate(chart: Arc<Chart>, i: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.coeffs[i] = Expr::one();
        v
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `X(F)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let ctx = self.chart.ctx();
        let mut acc = Expr::zero();
        for (c, x) in self.coeffs.iter().zip(self.chart.coords()) {
            if c.is_zero() {
                continue;
            }
            let d = f.diff(x, ctx);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        acc
    }

    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, FormError> {
        same_chart(&self.chart, &other.chart)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| &self.apply(b) - &other.apply(a))
            .collect();
        Ok(VectorField { chart: self.chart.clone(), coeffs })
    }

    pub fn scale(&self, h: &Expr) -> VectorField {
        VectorField { chart: self.chart.clone(), coeffs: self.coeffs.iter().map(|c| h * c).collect() }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, FormError> {
        same_chart(&self.chart, &other.chart)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(VectorField { chart: self.chart.clone(), coeffs })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, FormError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Component-wise zero test.
    pub fn vanishes(&self, t: &ZeroTester) -> Result<Certainty, ZeroTestError> {
        all_zero(self.coeffs.iter(), t)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, x) in self.coeffs.iter().zip(self.chart.coords()) {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "d/d{x}")?;
            } else {
                write!(f, "({c})*d/d{x}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Combined certainty for a family of expressions: the weakest grade wins,
/// and the first refutation is returned as is.
pub fn all_zero<'a>(es: impl IntoIterator<Item = &'a Expr>, t: &ZeroTester) -> Result<Certainty, ZeroTestError> {
    let mut acc = Certainty::ProvedZero;
    for e in es {
        match t.is_zero(e)? {
            Certainty::ProvedZero => {}
            c @ Certainty::ProbablyZero { .. } => {
                if let (Certainty::ProbablyZero { confidence: a, .. }, Certainty::ProbablyZero { confidence: b, .. }) =
                    (&acc, &c)
                {
                    if a <= b {
                        continue;
                    }
                }
                acc = c;
            }
            other => return Ok(other),
        }
    }
    Ok(acc)
}

/// Sign of the permutation sorting `idx`, or `None` on a repeated index.
fn sort_with_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A differential k-form stored by strictly increasing index tuples.
#[derive(Clone, Debug)]
pub struct KForm {
    chart: Arc<Chart>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl PartialEq for KForm {
    fn eq(&self, other: &Self) -> bool {
        self.chart.coords() == other.chart.coords() && self.degree == other.degree && self.terms == other.terms
    }
}

impl KForm {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> Self {
        KForm { chart, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(chart: Arc<Chart>, f: Expr) -> Self {
        let mut k = KForm::zero(chart, 0);
        k.add_term(Vec::new(), f);
        k
    }

    pub fn dx(chart: Arc<Chart>, i: usize) -> Self {
        let mut k = KForm::zero(chart, 1);
        k.add_term(vec![i], Expr::one());
        k
    }

    /// Build from arbitrary index tuples; unsorted tuples are sorted with
    /// the permutation sign and tuples with a repeated index are dropped.
    pub fn from_terms(
        chart: Arc<Chart>,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<Self, FormError> {
        if degree > chart.dim() {
            return Err(FormError::DegreeOverflow(degree, chart.dim()));
        }
        let mut k = KForm::zero(chart, degree);
        for (mut idx, c) in terms {
            if idx.len() != degree || idx.iter().any(|&i| i >= k.chart.dim()) {
                return Err(FormError::Arity { expected: degree, got: idx.len() });
            }
            if let Some(s) = sort_with_sign(&mut idx) {
                k.add_term(idx, if s < 0 { -c } else { c });
            }
        }
        Ok(k)
    }

    /// 1-form `Σ c_i dx_i` from a coefficient vector.
    pub fn one_form(chart: Arc<Chart>, coeffs: Vec<Expr>) -> Result<Self, FormError> {
        if coeffs.len() != chart.dim() {
            return Err(FormError::Arity { expected: chart.dim(), got: coeffs.len() });
        }
        KForm::from_terms(chart, 1, coeffs.into_iter().enumerate().map(|(i, c)| (vec![i], c)))
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Expr) {
        if c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&idx) {
            Some(old) => &old + &c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(idx, v);
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> Expr {
        self.terms.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    /// Dense coefficient vector of a 1-form.
    pub fn coeff_vec(&self) -> Vec<Expr> {
        (0..self.chart.dim()).map(|i| self.coeff(&[i])).collect()
    }

    /// Coefficient of a 0-form.
    pub fn as_scalar(&self) -> Option<Expr> {
        (self.degree == 0).then(|| self.coeff(&[]))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vanishes(&self, t: &ZeroTester) -> Result<Certainty, ZeroTestError> {
        all_zero(self.terms.values(), t)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> KForm {
        let mut k = KForm::zero(self.chart.clone(), self.degree);
        for (i, c) in &self.terms {
            k.add_term(i.clone(), f(c));
        }
        k
    }

    pub fn scale(&self, h: &Expr) -> KForm {
        self.map_coeffs(|c| h * c)
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, FormError> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(FormError::Arity { expected: self.degree, got: other.degree });
        }
        let mut k = self.clone();
        for (i, c) in &other.terms {
            k.add_term(i.clone(), c.clone());
        }
        Ok(k)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm, FormError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormError> {
        same_chart(&self.chart, &other.chart)?;
        let deg = self.degree + other.degree;
        if deg > self.chart.dim() {
            return Err(FormError::DegreeOverflow(deg, self.chart.dim()));
        }
        let mut k = KForm::zero(self.chart.clone(), deg);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx: Vec<usize> = i.iter().chain(j).copied().collect();
                if let Some(s) = sort_with_sign(&mut idx) {
                    let c = a * b;
                    k.add_term(idx, if s < 0 { -c } else { c });
                }
            }
        }
        Ok(k)
    }

    pub fn d(&self) -> Result<KForm, FormError> {
        let n = self.chart.dim();
        if self.degree >= n {
            return Err(FormError::DegreeOverflow(self.degree + 1, n));
        }
        let ctx = self.chart.ctx();
        let mut k = KForm::zero(self.chart.clone(), self.degree + 1);
        for (idx, c) in &self.terms {
            for (j, x) in self.chart.coords().iter().enumerate() {
                if idx.contains(&j) {
                    continue;
                }
                let dc = c.diff(x, ctx);
                if dc.is_zero() {
                    continue;
                }
                let mut t = Vec::with_capacity(idx.len() + 1);
                t.push(j);
                t.extend_from_slice(idx);
                let s = sort_with_sign(&mut t).expect("distinct indices");
                k.add_term(t, if s < 0 { -dc } else { dc });
            }
        }
        Ok(k)
    }

    /// `X⌟a`: insert `X` into the first slot.
    pub fn interior(&self, x: &VectorField) -> Result<KForm, FormError> {
        same_chart(&self.chart, &x.chart)?;
        if self.degree == 0 {
            return Err(FormError::DegreeZero);
        }
        let mut k = KForm::zero(self.chart.clone(), self.degree - 1);
        for (idx, c) in &self.terms {
            for (p, &i) in idx.iter().enumerate() {
                let xi = &x.coeffs[i];
                if xi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(p);
                let v = c * xi;
                k.add_term(rest, if p % 2 == 1 { -v } else { v });
            }
        }
        Ok(k)
    }

    /// `a(X_1, …, X_k)`.
    pub fn eval_on(&self, fields: &[&VectorField]) -> Result<Expr, FormError> {
        if fields.len() != self.degree {
            return Err(FormError::Arity { expected: self.degree, got: fields.len() });
        }
        let mut k = self.clone();
        for x in fields {
            k = k.interior(x)?;
        }
        Ok(k.coeff(&[]))
    }

    /// Cartan formula `d(X⌟a) + X⌟da`; on 0-forms this is `X(a)`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<KForm, FormError> {
        same_chart(&self.chart, &x.chart)?;
        if self.degree == 0 {
            return Ok(KForm::scalar(self.chart.clone(), x.apply(&self.coeff(&[]))));
        }
        let first = self.interior(x)?.d()?;
        if self.degree == self.chart.dim() {
            return Ok(first);
        }
        first.add(&self.d()?.interior(x)?)
    }

    pub fn pullback(&self, map: &SmoothMap) -> Result<KForm, FormError> {
        same_chart(&self.chart, &map.target)?;
        let src = map.source.clone();
        let m = src.dim();
        if self.degree > m {
            // Forms of degree above the source dimension pull back to zero.
            return Ok(KForm::zero(src, self.degree.min(m)));
        }
        let jac = map.jacobian();
        let mut k = KForm::zero(src.clone(), self.degree);
        for (idx, c) in &self.terms {
            let cs = map.apply(c)?;
            if cs.is_zero() {
                continue;
            }
            let mut w = KForm::scalar(src.clone(), cs);
            for &i in idx {
                let row = KForm::one_form(src.clone(), jac[i].clone())?;
                w = w.wedge(&row)?;
                if w.is_zero() {
                    break;
                }
            }
            for (j, v) in w.terms {
                k.add_term(j, v);
            }
        }
        Ok(k)
    }

    /// Key in the scenario basis notation, e.g. `d x1^d x3`.
    pub fn basis_name(chart: &Chart, idx: &[usize]) -> String {
        if idx.is_empty() {
            return "1".to_string();
        }
        idx.iter().map(|&i| format!("d {}", chart.coords()[i])).collect::<Vec<_>>().join("^")
    }

    /// Parse a basis name like `d x1^d x3` into an index tuple (unsorted).
    pub fn parse_basis(chart: &Chart, name: &str) -> Option<Vec<usize>> {
        let name = name.trim();
        if name == "1" {
            return Some(Vec::new());
        }
        name.split('^')
            .map(|part| {
                let p = part.trim();
                let v = p.strip_prefix("d").map(str::trim)?;
                chart.coord_index(&Sym::new(v))
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> = self
            .terms
            .iter()
            .map(|(i, c)| (KForm::basis_name(&self.chart, i), serde_json::Value::String(c.to_string())))
            .collect();
        serde_json::Value::Object(m)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (idx, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if idx.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c}) {}", KForm::basis_name(&self.chart, idx))?;
            }
        }
        Ok(())
    }
}

/// `dx_1∧…∧dx_n`.
pub fn volume_form(chart: Arc<Chart>) -> KForm {
    let n = chart.dim();
    let mut k = KForm::zero(chart, n);
    k.add_term((0..n).collect(), Expr::one());
    k
}

/// `dF` as a 1-form.
pub fn differential(chart: &Arc<Chart>, f: &Expr) -> KForm {
    KForm::scalar(chart.clone(), f.clone()).d().expect("charts have dimension at least one")
}

/// A map from `source` into `target`, given by target-coordinate components
/// written in source coordinates.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    pub source: Arc<Chart>,
    pub target: Arc<Chart>,
    comps: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(source: Arc<Chart>, target: Arc<Chart>, comps: Vec<Expr>) -> Result<Self, FormError> {
        if comps.len() != target.dim() {
            return Err(FormError::Arity { expected: target.dim(), got: comps.len() });
        }
        Ok(SmoothMap { source, target, comps })
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let comps = (0..chart.dim()).map(|i| chart.coord(i)).collect();
        SmoothMap { source: chart.clone(), target: chart, comps }
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn bindings(&self) -> BTreeMap<Sym, Expr> {
        self.target.coords().iter().cloned().zip(self.comps.iter().cloned()).collect()
    }

    /// `F∘ι` for `F` on the target chart.
    pub fn apply(&self, f: &Expr) -> Result<Expr, FormError> {
        Ok(f.substitute(&self.bindings(), self.source.ctx())?)
    }

    /// `∂ι^i/∂y_j`, one row per target coordinate.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        let ctx = self.source.ctx();
        self.comps.iter().map(|c| c.gradient(self.source.coords(), ctx)).collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap, FormError> {
        same_chart(&inner.target, &self.source)?;
        let comps = self.comps.iter().map(|c| inner.apply(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(SmoothMap { source: inner.source.clone(), target: self.target.clone(), comps })
    }

    /// Jacobian rank, with the zero oracle deciding pivots.
    pub fn rank(&self, t: &ZeroTester) -> Result<usize, FormError> {
        Ok(linalg::rank(&self.jacobian(), t)?)
    }

    /// `W` on the source chart with `dι(W) = Z∘ι`.
    pub fn pushforward(&self, z: &VectorField, t: &ZeroTester) -> Result<VectorField, FormError> {
        same_chart(&z.chart, &self.target)?;
        let rhs = z.coeffs.iter().map(|c| self.apply(c)).collect::<Result<Vec<_>, _>>()?;
        match linalg::solve(&self.jacobian(), &rhs, t) {
            Ok(w) => VectorField::new(self.source.clone(), w),
            Err(LinAlgError::Inconsistent { residual, witness }) => Err(FormError::NotTangent { residual, witness }),
            Err(LinAlgError::RankDeficient { rank, cols }) => Err(FormError::RankDeficient { rank, dim: cols }),
            Err(LinAlgError::ZeroTest(e)) => Err(e.into()),
        }
    }
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Context;

    fn chart4() -> Arc<Chart> {
        Arc::new(Chart::new("U", &["x1", "x2", "x3", "x4"], &["C2"], Arc::new(Context::new())).unwrap())
    }

    fn four_dim_fields(c: &Arc<Chart>) -> [VectorField; 4] {
        [
            VectorField::parse(c, &["0", "x2 - x3*x4", "-x3", "x4"]).unwrap(),
            VectorField::parse(c, &["1", "0", "-x3^2", "2*x3*x4 - x2"]).unwrap(),
            VectorField::parse(c, &["0", "x4", "1", "0"]).unwrap(),
            VectorField::parse(c, &["0", "0", "0", "1"]).unwrap(),
        ]
    }

    #[test]
    fn bracket_of_generators() {
        let c = chart4();
        let [z1, z2, ..] = four_dim_fields(&c);
        let br = z1.bracket(&z2).unwrap();
        assert_eq!(br, z1.scale(&c.parse("-x3").unwrap()));
        assert!(z1.bracket(&z1).unwrap().is_zero());
    }

    #[test]
    fn volume_contraction_gives_determinant() {
        let c = chart4();
        let [z1, z2, x1, x2] = four_dim_fields(&c);
        let mut k = volume_form(c.clone());
        for f in [&z1, &z2, &x1, &x2] {
            k = k.interior(f).unwrap();
        }
        assert_eq!(k.as_scalar().unwrap(), c.parse("-x2").unwrap());
        let d1 = volume_form(c.clone()).interior(&VectorField::coordinate(c.clone(), 0)).unwrap();
        assert_eq!(d1.terms().map(|(i, _)| i.clone()).collect::<Vec<_>>(), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn wedge_and_d_basics() {
        let c = chart4();
        let dx = KForm::dx(c.clone(), 0);
        assert!(dx.wedge(&dx).unwrap().is_zero());
        let xdy = KForm::dx(c.clone(), 1).scale(&c.coord(0));
        assert_eq!(xdy.d().unwrap(), KForm::dx(c.clone(), 0).wedge(&KForm::dx(c.clone(), 1)).unwrap());
        let i2 = c.parse("x1 + x4/(x2 - x3*x4)").unwrap();
        let w2 = KForm::one_form(
            c.clone(),
            ["-(x2 - x3*x4)^2", "x4", "-x4^2", "-x2"].iter().map(|s| c.parse(s).unwrap()).collect(),
        )
        .unwrap();
        assert!(differential(&c, &i2).wedge(&w2).unwrap().is_zero());
    }

    #[test]
    fn from_terms_sorts_with_sign() {
        let c = chart4();
        let k = KForm::from_terms(c.clone(), 2, vec![(vec![2, 0], Expr::one()), (vec![1, 1], Expr::one())]).unwrap();
        assert_eq!(k.coeff(&[0, 2]), Expr::int(-1));
        assert_eq!(k.terms().count(), 1);
        assert_eq!(KForm::parse_basis(&c, "d x3^d x1"), Some(vec![2, 0]));
    }

    #[test]
    fn pullback_and_pushforward_along_level_set() {
        let c = chart4();
        let src = Arc::new(Chart::new("N", &["x1", "x2", "x3"], &["C2"], Arc::new(Context::new())).unwrap());
        let comps = ["x1", "x2", "x3", "x2*(C2 - x1)/(1 + x3*(C2 - x1))"].iter().map(|s| src.parse(s).unwrap()).collect();
        let iota = SmoothMap::new(src.clone(), c.clone(), comps).unwrap();
        let w1 = KForm::one_form(
            c.clone(),
            ["x3^2*(x2 - x3*x4)", "x3", "x2 - x3*x4", "0"].iter().map(|s| c.parse(s).unwrap()).collect(),
        )
        .unwrap();
        let pb = w1.pullback(&iota).unwrap();
        let expect = KForm::one_form(
            src.clone(),
            ["x2*x3^2/(1 + x3*(C2 - x1))", "x3", "x2/(1 + x3*(C2 - x1))"].iter().map(|s| src.parse(s).unwrap()).collect(),
        )
        .unwrap();
        assert_eq!(pb, expect);
        let t = ZeroTester::default();
        let [z1, ..] = four_dim_fields(&c);
        let w = iota.pushforward(&z1, &t).unwrap();
        assert!(pb.interior(&w).unwrap().as_scalar().unwrap().is_zero());
        let d4 = VectorField::coordinate(c.clone(), 3);
        assert!(matches!(iota.pushforward(&d4, &t), Err(FormError::NotTangent { .. })));
        let id = SmoothMap::identity(c.clone());
        assert_eq!(id.pushforward(&z1, &t).unwrap(), z1);
    }
}
