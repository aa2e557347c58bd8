//! Dense exact matrices and row reduction.
//!
//! Echelon conventions are fixed: pivots are taken on the first nonzero column
//! and scaled to 1, so every basis returned here is reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::poly::UniPoly;

pub type Vector = Vec<Scalar>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn scalar(field: Field, n: usize, c: &Scalar) -> Matrix {
        Matrix::identity(field, n).scale(c)
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        if let Some(bad) = rows.iter().flatten().find(|s| s.field() != field) {
            return Err(Error::FieldMismatch(bad.field(), field));
        }
        Ok(Matrix { field, rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows(field: Field, rows: &[&[i64]]) -> Matrix {
        let rows = rows.iter().map(|r| r.iter().map(|&x| field.from_i64(x)).collect()).collect();
        Matrix::from_rows(field, rows).expect("rectangular input")
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(field: Field, rows: usize, cols: &[Vector]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    /// Single entry 1 at `(i, j)`.
    pub fn unit(field: Field, n: usize, i: usize, j: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        m.set(i, j, field.one());
        m
    }

    pub fn to_field(&self, field: Field) -> Result<Matrix> {
        let rows = self
            .to_rows()
            .into_iter()
            .map(|r| r.iter().map(|c| c.to_field(field)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(field, rows)
    }

    pub fn field(&self) -> Field {
        self.field
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

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j { x.is_one() } else { x.is_zero() }
                })
            })
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shapes");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        self.with_data(data)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shapes");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        self.with_data(data)
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let data = self.data.iter().map(|a| a * c).collect();
        self.with_data(data)
    }

    fn with_data(&self, data: Vec<Scalar>) -> Matrix {
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shapes");
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(self.cols, v.len(), "matrix-vector shapes");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: usize) -> Matrix {
        assert!(self.is_square());
        (0..e).fold(Matrix::identity(self.field, self.rows), |acc, _| acc.mul(self))
    }

    /// `p(self)` by Horner's rule.
    pub fn eval_poly(&self, p: &UniPoly) -> Matrix {
        let n = self.rows;
        let mut acc = Matrix::zeros(self.field, n, n);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add(&Matrix::scalar(self.field, n, c));
        }
        acc
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut ech = Echelon::new(self.field, self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i).to_vec());
        }
        let pivots = ech.pivots();
        let rows = ech.into_rref();
        let mut m = Matrix::zeros(self.field, self.rows, self.cols);
        for (i, r) in rows.into_iter().enumerate() {
            for (j, x) in r.into_iter().enumerate() {
                m.set(i, j, x);
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new(self.field, self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i).to_vec());
        }
        ech.rank()
    }

    /// Basis of the right null space: one vector per free column, with 1 at
    /// that column and the negated reduced entries at the pivots.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let mut ech = Echelon::new(self.field, self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i).to_vec());
        }
        ech.kernel()
    }

    /// Some solution of `self * x = b`, if any.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let mut ech = Echelon::new(self.field, self.cols + 1);
        for i in 0..self.rows {
            let mut r = self.row(i).to_vec();
            r.push(b[i].clone());
            ech.insert(r);
        }
        let pivots = ech.pivots();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let rows = ech.into_rref();
        let mut x = vec![self.field.zero(); self.cols];
        for (r, &p) in rows.iter().zip(&pivots) {
            x[p] = r[self.cols].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut ech = Echelon::new(self.field, 2 * n);
        for i in 0..n {
            let mut r = self.row(i).to_vec();
            r.extend((0..n).map(|j| if i == j { self.field.one() } else { self.field.zero() }));
            ech.insert(r);
        }
        if ech.pivots().into_iter().take(n).ne(0..n) {
            return None;
        }
        let rows = ech.into_rref();
        let mut inv = Matrix::zeros(self.field, n, n);
        for (i, r) in rows.into_iter().enumerate() {
            for (j, x) in r.into_iter().skip(n).enumerate() {
                inv.set(i, j, x);
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Scalar {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return self.field.zero();
            };
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a[c * n + c].clone();
            det *= &piv;
            let inv = piv.inv().unwrap();
            for r in c + 1..n {
                let f = &a[r * n + c] * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let sub = &f * &a[c * n + j];
                    a[r * n + j] -= &sub;
                }
            }
        }
        det
    }

    /// Reduced echelon basis of the column space, as vectors of length `rows`.
    pub fn column_space_basis(&self) -> Vec<Vector> {
        let mut ech = Echelon::new(self.field, self.rows);
        for j in 0..self.cols {
            ech.insert(self.column(j));
        }
        ech.into_rref()
    }

    /// Minimal polynomial via the first linear dependence among powers.
    pub fn minimal_polynomial(&self) -> UniPoly {
        assert!(self.is_square());
        let n = self.rows;
        let mut powers: Vec<Vector> = Vec::new();
        let mut cur = Matrix::identity(self.field, n);
        loop {
            let v = cur.data.clone();
            let basis = Matrix::from_columns(self.field, n * n, &powers);
            if let Some(c) = basis.solve(&v) {
                let mut coeffs: Vec<Scalar> = c.into_iter().map(|x| -x).collect();
                coeffs.push(self.field.one());
                return UniPoly::new(self.field, coeffs);
            }
            powers.push(v);
            cur = cur.mul(self);
        }
    }

    pub fn flat(&self) -> &[Scalar] {
        &self.data
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(ToString::to_string).collect()).collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for (i, row) in cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c:>width$}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Serialized as a list of rows of scalar strings.
impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(transparent)]
pub struct MatrixWire(pub Vec<Vec<String>>);

impl MatrixWire {
    pub fn into_matrix(self, field: Field) -> Result<Matrix> {
        let rows = self
            .0
            .iter()
            .map(|r| r.iter().map(|s| field.parse_scalar(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(field, rows)
    }
}

/// Incrementally built row echelon form.
///
/// Rows are kept reduced against each other's pivots, so after every insertion
/// the stored rows form a reduced echelon basis of the span (up to ordering).
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    width: usize,
    // (pivot column, row with 1 at pivot)
    rows: Vec<(usize, Vector)>,
}

impl Echelon {
    pub fn new(field: Field, width: usize) -> Echelon {
        Echelon { field, width, rows: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the current rows.
    pub fn reduce(&self, v: &mut [Scalar]) {
        for (p, r) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let c = v[*p].clone();
            for (x, y) in v.iter_mut().zip(r) {
                if !y.is_zero() {
                    *x -= &(&c * y);
                }
            }
        }
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(Scalar::is_zero)
    }

    /// Insert a row; returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vector) -> bool {
        assert_eq!(v.len(), self.width, "echelon row width");
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].inv().unwrap();
        for x in v.iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        for (_, r) in self.rows.iter_mut() {
            if r[p].is_zero() {
                continue;
            }
            let c = r[p].clone();
            for (x, y) in r.iter_mut().zip(&v) {
                if !y.is_zero() {
                    *x -= &(&c * y);
                }
            }
        }
        let pos = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(pos, (p, v));
        true
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }

    pub fn basis(&self) -> impl Iterator<Item = &Vector> {
        self.rows.iter().map(|(_, r)| r)
    }

    pub fn into_rref(self) -> Vec<Vector> {
        self.rows.into_iter().map(|(_, r)| r).collect()
    }

    /// Null space of the matrix whose rows span this echelon form.
    pub fn kernel(&self) -> Vec<Vector> {
        let pivots = self.pivots();
        let mut is_pivot = vec![false; self.width];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.width)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![self.field.zero(); self.width];
                v[free] = self.field.one();
                for (p, r) in &self.rows {
                    v[*p] = -&r[free];
                }
                v
            })
            .collect()
    }
}

/// Canonical reduced echelon basis of the span of `vectors`.
pub fn span_rref(field: Field, width: usize, vectors: &[Vector]) -> Vec<Vector> {
    let mut ech = Echelon::new(field, width);
    for v in vectors {
        ech.insert(v.clone());
    }
    ech.into_rref()
}
