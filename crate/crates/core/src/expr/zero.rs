//! Zero testing: exact on the canonical form, sampled otherwise.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{EvalError, Point, Var};
use super::Expr;

/// Denominator of the sampling grid: coordinates are `k / GRID` in the box.
const GRID: i64 = 997;
/// Redraws per sample index before the index counts as singular.
const ATTEMPTS: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeroTestPolicy {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub eps_sing: f64,
    pub lo: f64,
    pub hi: f64,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl Default for ZeroTestPolicy {
    fn default() -> Self {
        ZeroTestPolicy {
            samples: 20,
            seed: 0,
            tol: 1e-9,
            eps_sing: 1e-3,
            lo: -2.0,
            hi: 2.0,
            mode: ExecMode::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "grade")]
pub enum Certainty {
    ProvedZero,
    ProvedNonzero,
    ProbablyZero { confidence: f64, points: usize },
    Nonzero { witness: Point, value: f64 },
}

impl Certainty {
    /// Zero, proved or sampled.
    pub fn holds(&self) -> bool {
        matches!(self, Certainty::ProvedZero | Certainty::ProbablyZero { .. })
    }

    pub fn is_proved_zero(&self) -> bool {
        matches!(self, Certainty::ProvedZero)
    }

    pub fn witness(&self) -> Option<&Point> {
        match self {
            Certainty::Nonzero { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn grade(&self) -> &'static str {
        match self {
            Certainty::ProvedZero => "ProvedZero",
            Certainty::ProvedNonzero => "ProvedNonzero",
            Certainty::ProbablyZero { .. } => "ProbablyZero",
            Certainty::Nonzero { .. } => "Nonzero",
        }
    }
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certainty::ProvedZero => f.write_str("ProvedZero"),
            Certainty::ProvedNonzero => f.write_str("ProvedNonzero"),
            Certainty::ProbablyZero { confidence, points } => {
                write!(f, "ProbablyZero(confidence {confidence:.6}, {points} points)")
            }
            Certainty::Nonzero { witness, value } => write!(f, "Nonzero(value {value:.6e} at {witness})"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ZeroTestError {
    #[error("all {tried} sample points hit singular denominators; widen the sampling box")]
    AllSingular { tried: usize },
    #[error("variable `{0}` cannot be sampled")]
    Unassigned(String),
}

enum Outcome {
    Zero,
    Witness(Point, f64),
    Singular,
}

#[derive(Clone, Debug, Default)]
pub struct ZeroTester {
    pub policy: ZeroTestPolicy,
}

impl ZeroTester {
    pub fn new(policy: ZeroTestPolicy) -> Self {
        ZeroTester { policy }
    }

    /// Sample point number `index` (retry `attempt`) for the given variables.
    /// Pure function of the seed, so results do not depend on thread timing.
    pub fn sample_point(&self, vars: &[Var], index: u64, attempt: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(self.policy.seed);
        rng.set_stream(index * ATTEMPTS + attempt);
        let lo = (self.policy.lo * GRID as f64).ceil() as i64;
        let hi = (self.policy.hi * GRID as f64).floor() as i64;
        let mut pt = Point::new();
        for v in vars {
            let k = rng.random_range(lo..=hi);
            pt.set(v.clone(), BigRational::new(BigInt::from(k), BigInt::from(GRID)));
        }
        pt
    }

    /// `count` non-singular points for `e` (fewer if the box is mostly singular).
    pub fn regular_points(&self, exprs: &[&Expr], count: usize) -> Vec<Point> {
        let mut vars = std::collections::BTreeSet::new();
        for e in exprs {
            vars.extend(e.free_vars());
        }
        let vars: Vec<Var> = vars.into_iter().collect();
        let mut out = Vec::new();
        for i in 0..count as u64 {
            for a in 0..ATTEMPTS {
                let pt = self.sample_point(&vars, i, a);
                if exprs.iter().all(|e| e.eval_at(&pt, self.policy.eps_sing).is_ok()) {
                    out.push(pt);
                    break;
                }
            }
        }
        out
    }

    fn probe(&self, e: &Expr, vars: &[Var], index: u64) -> Result<Outcome, ZeroTestError> {
        for a in 0..ATTEMPTS {
            let pt = self.sample_point(vars, index, a);
            match e.eval_at(&pt, self.policy.eps_sing) {
                Ok(ev) => {
                    if ev.value.is_zero() {
                        return Ok(Outcome::Zero);
                    }
                    let v = ev.value.to_f64().unwrap_or(f64::INFINITY);
                    if ev.exact {
                        return Ok(Outcome::Witness(pt, v));
                    }
                    let scale = ev.scale.to_f64().unwrap_or(f64::INFINITY);
                    if ev.value.abs().to_f64().unwrap_or(f64::INFINITY) > self.policy.tol * scale.max(1.0) {
                        return Ok(Outcome::Witness(pt, v));
                    }
                    return Ok(Outcome::Zero);
                }
                Err(EvalError::Singular) => continue,
                Err(EvalError::Unassigned(v)) => return Err(ZeroTestError::Unassigned(v.to_string())),
            }
        }
        Ok(Outcome::Singular)
    }

    pub fn is_zero(&self, e: &Expr) -> Result<Certainty, ZeroTestError> {
        if e.is_zero() {
            return Ok(Certainty::ProvedZero);
        }
        let vars: Vec<Var> = e.free_vars().into_iter().collect();
        let n = self.policy.samples.max(1) as u64;
        let outcomes = self.run(e, &vars, n)?;
        let mut good = 0usize;
        for o in outcomes {
            match o {
                Outcome::Witness(pt, v) => return Ok(Certainty::Nonzero { witness: pt, value: v }),
                Outcome::Zero => good += 1,
                Outcome::Singular => {}
            }
        }
        if e.is_rational_function() {
            // A non-zero canonical rational function never vanishes identically.
            return Ok(Certainty::ProvedNonzero);
        }
        if good == 0 {
            return Err(ZeroTestError::AllSingular { tried: n as usize });
        }
        let size = ((self.policy.hi - self.policy.lo) * GRID as f64).floor() + 1.0;
        let deg = e.num().total_degree().max(1) as f64;
        let per = (deg / size).min(1.0);
        let confidence = 1.0 - per.powi(good as i32);
        Ok(Certainty::ProbablyZero { confidence, points: good })
    }

    fn run(&self, e: &Expr, vars: &[Var], n: u64) -> Result<Vec<Outcome>, ZeroTestError> {
        match self.policy.mode {
            #[cfg(feature = "parallel")]
            ExecMode::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(|i| self.probe(e, vars, i)).collect()
            }
            _ => {
                let mut out = Vec::with_capacity(n as usize);
                for i in 0..n {
                    let o = self.probe(e, vars, i)?;
                    let stop = matches!(o, Outcome::Witness(..));
                    out.push(o);
                    if stop {
                        break;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Convenience: `true` when `e` is zero (proved or sampled).
    pub fn vanishes(&self, e: &Expr) -> bool {
        matches!(self.is_zero(e), Ok(c) if c.holds())
    }
}

impl Expr {
    /// No transcendental atoms: symbols and jets only.
    pub fn is_rational_function(&self) -> bool {
        [self.num(), self.den()]
            .iter()
            .all(|p| p.terms().all(|(m, _)| m.factors().iter().all(|(a, _)| matches!(a, super::Atom::Sym(_) | super::Atom::Jet(_)))))
    }
}
