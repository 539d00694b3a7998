//! Dense two-phase simplex over rationals with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{LpError, LpModel, Sense};

/// Largest model (variables) the exact solver accepts.
pub const EXACT_LIMIT: usize = 600;

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    a: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.a[r][c].recip();
        for x in self.a[r].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective row (reduced costs) over columns `< allowed`. Returns false
    /// when unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let m = self.basis.len();
        let rhs = self.cols;
        loop {
            let obj = &self.a[m];
            let Some(c) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(BigRational, usize)> = None;
            for i in 0..m {
                if self.a[i][c].is_positive() {
                    let ratio = &self.a[i][rhs] / &self.a[i][c];
                    let better = match &best {
                        None => true,
                        Some((r, bi)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            let Some((_, r)) = best else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// Solves the model exactly. Returns the optimal point and objective.
pub fn solve_exact(model: &LpModel) -> Result<(Vec<BigRational>, BigRational), LpError> {
    let n = model.num_vars();
    if n > EXACT_LIMIT {
        return Err(LpError::TooLargeForExact(n, EXACT_LIMIT));
    }
    // Rows: model rows, then x_i + u_i = 1 for bounded variables.
    let mut rows: Vec<(Vec<(usize, BigRational)>, Sense, BigRational)> = model
        .rows
        .iter()
        .map(|r| {
            let terms = r.terms.iter().map(|&(v, c)| (v, BigRational::from_integer(c.into()))).collect();
            (terms, r.sense, rational(r.rhs))
        })
        .collect();
    let bounded: Vec<usize> = (0..n).filter(|&i| model.upper(i).is_some()).collect();
    for &i in &bounded {
        rows.push((vec![(i, BigRational::one())], Sense::Eq, BigRational::one()));
    }
    let m = rows.len();
    let surplus: Vec<usize> = (0..m).filter(|&i| rows[i].1 == Sense::Ge).collect();
    // Columns: structural, bound slacks, surplus, artificials.
    let slack0 = n;
    let surplus0 = slack0 + bounded.len();
    let art0 = surplus0 + surplus.len();
    let cols = art0 + m;
    let mut a = vec![vec![BigRational::zero(); cols + 1]; m + 1];
    for (i, (terms, _, rhs)) in rows.iter().enumerate() {
        for (v, c) in terms {
            a[i][*v] += c;
        }
        a[i][cols] = rhs.clone();
    }
    for (k, _) in bounded.iter().enumerate() {
        let i = model.rows.len() + k;
        a[i][slack0 + k] = BigRational::one();
    }
    for (k, &i) in surplus.iter().enumerate() {
        a[i][surplus0 + k] = -BigRational::one();
    }
    for (i, row) in a.iter_mut().enumerate().take(m) {
        if row[cols].is_negative() {
            for x in row.iter_mut() {
                *x = -&*x;
            }
        }
        row[art0 + i] = BigRational::one();
    }
    // Phase one: minimize the sum of artificials.
    for i in 0..m {
        for j in 0..=cols {
            if j < art0 || j == cols {
                let v = a[i][j].clone();
                a[m][j] -= v;
            }
        }
    }
    let mut t = Tableau {
        a,
        basis: (art0..art0 + m).collect(),
        cols,
    };
    t.run(art0);
    if !t.a[m][cols].is_zero() {
        return Err(LpError::Infeasible);
    }
    // Drive remaining artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= art0 {
            if let Some(c) = (0..art0).find(|&j| !t.a[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }
    // Phase two objective, expressed in reduced form.
    let mut obj = vec![BigRational::zero(); cols + 1];
    for (j, &c) in model.objective.iter().enumerate() {
        obj[j] = BigRational::from_integer(BigInt::from(c));
    }
    for r in 0..m {
        let b = t.basis[r];
        if b < cols && !obj[b].is_zero() {
            let f = obj[b].clone();
            for (o, x) in obj.iter_mut().zip(&t.a[r]) {
                *o -= &f * x;
            }
        }
    }
    // Artificial columns stay out.
    t.a[m] = obj;
    if !t.run(art0) {
        return Err(LpError::Unbounded);
    }
    let mut x = vec![BigRational::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.a[r][cols].clone();
        }
    }
    let value = model
        .objective
        .iter()
        .zip(&x)
        .map(|(&c, v)| v * BigRational::from_integer(BigInt::from(c)))
        .fold(BigRational::zero(), |s, v| s + v);
    Ok((x, value))
}
