//! Numerical primitive of a closed 1-form in two variables.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::expr::{Certainty, Expr, Point, Sym, Var, ZeroTestError, ZeroTester};
use crate::forms::{FormError, KForm};

#[derive(Debug, Clone, Error)]
pub enum QuadratureError {
    #[error("quadrature needs a 1-form on a 2-dimensional chart")]
    Shape,
    #[error("mu*omega is not closed")]
    NotClosed(Option<Point>),
    #[error("base point lacks a value for {0}")]
    Unassigned(String),
    #[error("integrand is singular near {0:?} on the integration path")]
    Singular((f64, f64)),
    #[error("adaptive quadrature did not converge on [{0}, {1}]")]
    NoConvergence(f64, f64),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: u32 = 40;

fn g7k15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64, QuadratureError> {
    let (k, err) = g7k15(f, a, b);
    if !k.is_finite() {
        return Err(QuadratureError::Singular((a, b)));
    }
    if err <= tol.max(1e-15 * k.abs()) {
        return Ok(k);
    }
    if depth == MAX_DEPTH {
        return Err(QuadratureError::NoConvergence(a, b));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, tol / 2.0, depth + 1)? + adaptive(f, m, b, tol / 2.0, depth + 1)?)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    adaptive(f, a, b, tol, 0)
}

/// `F(x, u) = ∫_{x0}^{x} P(t, u) dt + ∫_{u0}^{u} Q(x0, t) dt` for the closed
/// form `P dx + Q du = μω`.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub p: Expr,
    pub q: Expr,
    pub vars: (Sym, Sym),
    pub base: (f64, f64),
    pub closed: Certainty,
    pub tol: f64,
    params: Vec<(Sym, f64)>,
}

impl Primitive {
    fn eval(&self, e: &Expr, x: f64, u: f64) -> f64 {
        e.eval_f64(&|v: &Var| match v {
            Var::Sym(s) if *s == self.vars.0 => Some(x),
            Var::Sym(s) if *s == self.vars.1 => Some(u),
            Var::Sym(s) => self.params.iter().find(|(n, _)| n == s).map(|(_, v)| *v),
            Var::Jet(_) => None,
        })
    }

    pub fn value(&self, x: f64, u: f64) -> Result<f64, QuadratureError> {
        let (x0, u0) = self.base;
        let a = integrate(&mut |t| self.eval(&self.p, t, u), x0, x, self.tol / 2.0)?;
        let b = integrate(&mut |t| self.eval(&self.q, x0, t), u0, u, self.tol / 2.0)?;
        Ok(a + b)
    }

    /// Largest deviation between central differences of `F` and `(P, Q)`.
    pub fn gradient_error(&self, pts: &[(f64, f64)], h: f64) -> Result<f64, QuadratureError> {
        let mut worst: f64 = 0.0;
        for &(x, u) in pts {
            let fx = (self.value(x + h, u)? - self.value(x - h, u)?) / (2.0 * h);
            let fu = (self.value(x, u + h)? - self.value(x, u - h)?) / (2.0 * h);
            worst = worst.max((fx - self.eval(&self.p, x, u)).abs());
            worst = worst.max((fu - self.eval(&self.q, x, u)).abs());
        }
        Ok(worst)
    }
}

/// Primitive of `μω` for a 1-form on a 2-dimensional chart. Constants of the
/// chart take their values from `base`.
pub fn primitive_by_quadrature(
    omega: &KForm,
    mu: &Expr,
    base: &Point,
    t: &ZeroTester,
) -> Result<Primitive, QuadratureError> {
    let chart = omega.chart().clone();
    if chart.dim() != 2 || omega.degree() != 1 {
        return Err(QuadratureError::Shape);
    }
    let form = omega.scale(mu);
    let closed = form.d()?.vanishes(t)?;
    if !closed.holds() {
        return Err(QuadratureError::NotClosed(closed.witness().cloned()));
    }
    let get = |s: &Sym| -> Result<f64, QuadratureError> {
        base.get(&Var::Sym(s.clone()))
            .and_then(|r| r.to_f64())
            .ok_or_else(|| QuadratureError::Unassigned(s.to_string()))
    };
    let (xs, us) = (chart.coords()[0].clone(), chart.coords()[1].clone());
    let base_xy = (get(&xs)?, get(&us)?);
    let params = chart.constants().iter().map(|c| Ok((c.clone(), get(c)?))).collect::<Result<Vec<_>, QuadratureError>>()?;
    let coeffs = form.coeff_vec();
    Ok(Primitive {
        p: coeffs[0].clone(),
        q: coeffs[1].clone(),
        vars: (xs, us),
        base: base_xy,
        closed,
        tol: 1e-10,
        params,
    })
}
