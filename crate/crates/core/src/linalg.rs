//! Linear algebra over the residue field `k = F_p[Y]/(Y^f - c)`, `f ∈ {1, 2}`.

use crate::error::{Error, Result};
use crate::padic::Modulus;

/// Arithmetic in `F_{p^f}`; elements are pairs `a + bY` (with `b = 0` when `f = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueField {
    pub p: u64,
    pub f: usize,
    pub nonresidue: u64,
}

pub type Fq = [u64; 2];

impl ResidueField {
    pub fn new(p: u64, f: usize, nonresidue: u64) -> Self {
        ResidueField { p, f, nonresidue }
    }

    fn md(&self) -> Modulus {
        Modulus::new(self.p, 1)
    }

    pub fn zero(&self) -> Fq {
        [0, 0]
    }

    pub fn one(&self) -> Fq {
        [1, 0]
    }

    pub fn from_int(&self, v: i64) -> Fq {
        [self.md().reduce_i64(v), 0]
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let md = self.md();
        [md.add(a[0], b[0]), md.add(a[1], b[1])]
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        let md = self.md();
        [md.sub(a[0], b[0]), md.sub(a[1], b[1])]
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        let md = self.md();
        if self.f == 1 {
            return [md.mul(a[0], b[0]), 0];
        }
        [
            md.add(
                md.mul(a[0], b[0]),
                md.mul(self.nonresidue, md.mul(a[1], b[1])),
            ),
            md.add(md.mul(a[0], b[1]), md.mul(a[1], b[0])),
        ]
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        let md = self.md();
        let norm = md.sub(
            md.mul(a[0], a[0]),
            md.mul(self.nonresidue, md.mul(a[1], a[1])),
        );
        let ni = md.inv(norm)?;
        if self.f == 1 {
            return md.inv(a[0]).map(|x| [x, 0]);
        }
        Some([md.mul(a[0], ni), md.mul(md.neg(a[1]), ni)])
    }

    pub fn is_zero(&self, a: Fq) -> bool {
        a[0] % self.p == 0 && a[1] % self.p == 0
    }

    pub fn reduce(&self, a: Fq) -> Fq {
        [a[0] % self.p, a[1] % self.p]
    }
}

/// A dense matrix over `F_{p^f}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Fq>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![[0, 0]; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fq) {
        self.data[i * self.cols + j] = v;
    }

    pub fn from_rows(rows: Vec<Vec<Fq>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn mul_vec(&self, k: &ResidueField, v: &[Fq]) -> Vec<Fq> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(k.zero(), |acc, j| k.add(acc, k.mul(self.get(i, j), v[j])))
            })
            .collect()
    }

    pub fn mul(&self, k: &ResidueField, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if k.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = k.add(out.get(i, j), k.mul(a, other.get(l, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Row-reduces in place, visiting columns in the given order.
    /// Returns the pivot `(row, column)` pairs.
    fn rref_with_order(&mut self, k: &ResidueField, order: &[usize]) -> Vec<(usize, usize)> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for &col in order {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| !k.is_zero(self.get(r, col))) else {
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(pr * self.cols + j, row * self.cols + j);
            }
            let inv = k.inv(self.get(row, col)).expect("nonzero pivot");
            for j in 0..self.cols {
                let v = k.mul(self.get(row, j), inv);
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if k.is_zero(factor) {
                    continue;
                }
                for j in 0..self.cols {
                    let v = k.sub(self.get(r, j), k.mul(factor, self.get(row, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, k: &ResidueField) -> usize {
        let mut m = self.clone();
        let order: Vec<usize> = (0..self.cols).collect();
        m.rref_with_order(k, &order).len()
    }

    pub fn is_invertible(&self, k: &ResidueField) -> bool {
        self.rows == self.cols && self.rank(k) == self.rows
    }

    /// Solves `A x = b`, returning the lexicographically smallest solution
    /// (first coordinate most significant, `0` the smallest field element).
    ///
    /// Pivots are chosen from the last column backwards, so each pivot variable
    /// depends only on free variables of smaller index; setting every free
    /// variable to zero is then lexicographically minimal.
    pub fn solve_lex_min(&self, k: &ResidueField, b: &[Fq]) -> Result<Vec<Fq>> {
        if b.len() != self.rows {
            return Err(Error::Internal(
                "right-hand side has the wrong length".into(),
            ));
        }
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for (i, &bi) in b.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, bi);
        }
        let order: Vec<usize> = (0..self.cols).rev().collect();
        let pivots = aug.rref_with_order(k, &order);
        let rank = pivots.len();
        if (rank..aug.rows).any(|r| !k.is_zero(aug.get(r, self.cols))) {
            return Err(Error::Precondition("linear system is inconsistent".into()));
        }
        let mut x = vec![k.zero(); self.cols];
        for (r, c) in pivots {
            x[c] = aug.get(r, self.cols);
        }
        Ok(x)
    }
}

/// Rank over `F_p` of integer vectors (entries already reduced modulo `p`).
pub fn rank_mod_p(vectors: &[Vec<u64>], p: u64) -> usize {
    let k = ResidueField::new(p, 1, 0);
    let rows: Vec<Vec<Fq>> = vectors
        .iter()
        .map(|v| v.iter().map(|&c| [c % p, 0]).collect())
        .collect();
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(rows).rank(&k)
}
