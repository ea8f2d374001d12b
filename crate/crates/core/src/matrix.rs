//! Dense matrices over the rationals with exact elimination.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::Poly;
use crate::rational::{fmt_q, q, Q};

pub type Vector = Vec<Q>;

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Mat {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    pub fn from_cols(cols: &[Vector]) -> Mat {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Mat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..r {
                m[(i, j)] = col[i].clone();
            }
        }
        m
    }

    pub fn diag(entries: &[Q]) -> Mat {
        let mut m = Mat::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &Q) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn apply(&self, v: &[Q]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (a, x) in self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        s += a * x;
                    }
                }
                s
            })
            .collect()
    }

    pub fn pow(&self, e: usize) -> Mat {
        let mut r = Mat::identity(self.rows);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    pub fn commutator(&self, other: &Mat) -> Mat {
        &(self * other) - &(other * self)
    }

    /// Sub-block with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut m = Mat::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn block_diag(blocks: &[&Mat]) -> Mat {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let k: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Mat::zeros(n, k);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_mut(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(p, r);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in c..self.cols {
                        if !self[(r, j)].is_zero() {
                            let v = &self[(i, j)] - &f * &self[(r, j)];
                            self[(i, j)] = v;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_mut().len()
    }

    /// Basis of the right kernel, as column vectors.
    pub fn nullspace(&self) -> Vec<Vector> {
        let mut m = self.clone();
        let pivots = m.rref_mut();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `self * x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.rref_mut();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Q::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            let inv = piv.recip();
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] * &inv;
                for j in c..n {
                    if !m[(c, j)].is_zero() {
                        let v = &m[(i, j)] - &f * &m[(c, j)];
                        m[(i, j)] = v;
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Q::one();
        }
        let pivots = aug.rref_mut();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Some(aug.select(&rows, &cols))
    }

    /// Characteristic polynomial det(T - X) by Faddeev-LeVerrier.
    pub fn char_poly(&self) -> Poly {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = Mat::zeros(n, n);
        for k in 1..=n {
            let mut next = self * &m;
            for i in 0..n {
                let v = &next[(i, i)] + &coeffs[n - k + 1];
                next[(i, i)] = v;
            }
            m = next;
            let t = (self * &m).trace();
            coeffs[n - k] = -t / q(k as i64);
        }
        Poly::new(coeffs)
    }

    /// exp of a nilpotent matrix, as a finite sum.
    pub fn exp_nilpotent(&self) -> Mat {
        let n = self.rows;
        let mut out = Mat::identity(n);
        let mut term = Mat::identity(n);
        for k in 1..=n {
            term = (&term * self).scale(&Q::new(1.into(), (k as i64).into()));
            if term.is_zero() {
                break;
            }
            out = &out + &term;
        }
        out
    }

    /// Ranks of X^0, X^1, ..., X^n.
    pub fn power_ranks(&self) -> Vec<usize> {
        let mut out = vec![self.rows];
        let mut p = Mat::identity(self.rows);
        for _ in 0..self.rows {
            p = &p * self;
            out.push(p.rank());
        }
        out
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.to_rows()
            .iter()
            .map(|r| r.iter().map(fmt_q).collect())
            .collect()
    }

    pub fn entries(&self) -> &[Q] {
        &self.data
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs.data[k * rhs.cols + j];
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.to_strings() {
            writeln!(f, "[{}]", r.join(", "))?;
        }
        Ok(())
    }
}

/// Serialized as a list of rows of rational strings.
impl Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let parsed: std::result::Result<Vec<Vec<Q>>, _> = rows
            .iter()
            .map(|r| r.iter().map(|s| crate::rational::parse_q(s)).collect())
            .collect();
        let parsed = parsed.map_err(serde::de::Error::custom)?;
        if parsed.iter().any(|r| r.len() != parsed[0].len()) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(Mat::from_rows(parsed))
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vadd(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(a: &[Q], s: &Q) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

/// Flattens a matrix row-major, used to treat matrices as vectors.
pub fn flatten(m: &Mat) -> Vector {
    m.entries().to_vec()
}

pub fn unflatten(v: &[Q], rows: usize, cols: usize) -> Mat {
    assert_eq!(v.len(), rows * cols);
    Mat {
        rows,
        cols,
        data: v.to_vec(),
    }
}

/// Coordinates of `target` in the span of `basis` (all flattened), if it lies there.
pub fn coords_in_span(basis: &[Vector], target: &[Q]) -> Option<Vector> {
    if basis.is_empty() {
        return if target.iter().all(|x| x.is_zero()) {
            Some(vec![])
        } else {
            None
        };
    }
    Mat::from_cols(basis).solve(target)
}
