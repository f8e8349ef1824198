//! Fraction-free elimination over the expression field.

use thiserror::Error;

use crate::expr::{Certainty, Expr, Point, ZeroTestError, ZeroTester};

pub type Matrix = Vec<Vec<Expr>>;

#[derive(Debug, Clone, Error)]
pub enum LinAlgError {
    #[error("system is rank deficient (rank {rank} < {cols} unknowns); solution not unique")]
    RankDeficient { rank: usize, cols: usize },
    #[error("system is inconsistent: residual {residual} does not vanish")]
    Inconsistent { residual: Expr, witness: Option<Point> },
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// Pivot oracle: canonical non-zero rational functions are non-zero; other
/// entries go through the sampled test.
pub fn is_nonzero(e: &Expr, t: &ZeroTester) -> Result<bool, ZeroTestError> {
    if e.is_zero() {
        return Ok(false);
    }
    if e.is_rational_function() {
        return Ok(true);
    }
    Ok(!t.is_zero(e)?.holds())
}

/// Row echelon form produced by Bareiss elimination.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Matrix,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
    /// Original index of each row after swaps.
    pub perm: Vec<usize>,
    pub swaps: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Eliminate the first `cols` columns of `m`; any further columns ride along.
pub fn echelon(m: &[Vec<Expr>], cols: usize, t: &ZeroTester) -> Result<Echelon, ZeroTestError> {
    let mut a: Matrix = m.to_vec();
    let nrows = a.len();
    let width = a.first().map_or(0, |r| r.len());
    let mut perm: Vec<usize> = (0..nrows).collect();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut prev = Expr::one();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(r) {
            if is_nonzero(&row[c], t)? {
                let size = row[c].node_count();
                if best.is_none_or(|(_, s)| size < s) {
                    best = Some((i, size));
                }
            }
        }
        let Some((p, _)) = best else { continue };
        if p != r {
            a.swap(p, r);
            perm.swap(p, r);
            swaps += 1;
        }
        let piv = a[r][c].clone();
        for i in r + 1..nrows {
            let factor = a[i][c].clone();
            for j in 0..width {
                if j == c {
                    continue;
                }
                let v = &(&piv * &a[i][j]) - &(&factor * &a[r][j]);
                a[i][j] = v.checked_div(&prev).expect("previous pivot is non-zero");
            }
            a[i][c] = Expr::zero();
        }
        // Rows above keep their scale; only the pivot row feeds later steps.
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    Ok(Echelon { rows: a, pivots, perm, swaps })
}

pub fn rank(m: &[Vec<Expr>], t: &ZeroTester) -> Result<usize, ZeroTestError> {
    let cols = m.first().map_or(0, |r| r.len());
    Ok(echelon(m, cols, t)?.rank())
}

/// Determinant of a square matrix.
pub fn det(m: &[Vec<Expr>], t: &ZeroTester) -> Result<Expr, ZeroTestError> {
    let n = m.len();
    if n == 0 {
        return Ok(Expr::one());
    }
    if n <= 3 {
        return Ok(laplace(m));
    }
    let e = echelon(m, n, t)?;
    if e.rank() < n {
        return Ok(Expr::zero());
    }
    // Bareiss: the last pivot is the determinant up to row swaps.
    let d = e.rows[n - 1][n - 1].clone();
    Ok(if e.swaps % 2 == 1 { -d } else { d })
}

/// Cofactor expansion along the first row.
pub fn laplace(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Matrix = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| e.clone()).collect())
                    .collect();
                let term = &m[0][j] * &laplace(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Submatrix with the given row and column deleted.
pub fn delete(m: &[Vec<Expr>], row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

fn witness_for(e: &Expr, t: &ZeroTester) -> Result<Option<Point>, ZeroTestError> {
    Ok(match t.is_zero(e)? {
        Certainty::Nonzero { witness, .. } => Some(witness),
        _ => None,
    })
}

/// Unique solution of `a x = b`.
pub fn solve(a: &[Vec<Expr>], b: &[Expr], t: &ZeroTester) -> Result<Vec<Expr>, LinAlgError> {
    let cols = a.first().map_or(0, |r| r.len());
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let e = echelon(&aug, cols, t)?;
    let rank = e.rank();
    for row in &e.rows[rank..] {
        let res = &row[cols];
        if is_nonzero(res, t)? {
            return Err(LinAlgError::Inconsistent { residual: res.clone(), witness: witness_for(res, t)? });
        }
    }
    if rank < cols {
        return Err(LinAlgError::RankDeficient { rank, cols });
    }
    let mut x = vec![Expr::zero(); cols];
    for r in (0..rank).rev() {
        let c = e.pivots[r];
        let mut acc = e.rows[r][cols].clone();
        for j in c + 1..cols {
            if !e.rows[r][j].is_zero() {
                acc = &acc - &(&e.rows[r][j] * &x[j]);
            }
        }
        x[c] = acc.checked_div(&e.rows[r][c]).expect("pivot is non-zero");
    }
    Ok(x)
}
