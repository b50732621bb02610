//! Dense real linear algebra used throughout the crate.
//!
//! Matrices are small (n ≤ ~50) and stored row-major. Decompositions that
//! need real numerical care (SVD, symmetric eigenproblems, LU) are delegated
//! to `nalgebra`; rank detection uses a column-pivoted Householder QR written
//! here so that the pivot order is by remaining column norm.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute and relative tolerances for numerical comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-10;

    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(abs_eps) || !ok(rel_eps) || (abs_eps == 0.0 && rel_eps == 0.0) {
            return Err(Error::domain(format!(
                "tolerance needs non-negative finite values with one positive, got abs={abs_eps}, rel={rel_eps}"
            )));
        }
        Ok(Self { abs_eps, rel_eps })
    }

    /// `max(abs_eps, rel_eps * scale)`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_eps.max(self.rel_eps * scale.abs())
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.threshold(a.abs().max(b.abs()))
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_eps: Self::DEFAULT_EPS,
            rel_eps: Self::DEFAULT_EPS,
        }
    }
}

/// Real column vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    /// Standard basis vector `e_i` (0-based).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Sub for &DenseVector {
    type Output = DenseVector;
    fn sub(self, rhs: &DenseVector) -> DenseVector {
        assert_eq!(self.dim(), rhs.dim(), "vector length mismatch");
        DenseVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &DenseVector {
    type Output = DenseVector;
    fn add(self, rhs: &DenseVector) -> DenseVector {
        assert_eq!(self.dim(), rhs.dim(), "vector length mismatch");
        DenseVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// Real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape {
                op: "DenseMatrix::new",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::Shape {
                op: "DenseMatrix::from_rows",
                left: (r, c),
                right: (1, bad.len()),
            });
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[DenseVector]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, DenseVector::dim);
        if columns.iter().any(|v| v.dim() != r) {
            return Err(Error::Shape {
                op: "DenseMatrix::from_columns",
                left: (r, c),
                right: (0, 0),
            });
        }
        let m = Self::from_fn(r, c, |i, j| columns[j][i]);
        Self::new(m.rows, m.cols, m.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        DenseVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        if self.cols != v.dim() {
            return Err(Error::Shape {
                op: "mul_vec",
                left: self.shape(),
                right: (v.dim(), 1),
            });
        }
        Ok(DenseVector(
            (0..self.rows).map(|i| dot(self.row(i), v.as_slice())).collect(),
        ))
    }

    /// Row vector times matrix, `p A`.
    pub fn left_mul_vec(&self, p: &DenseVector) -> Result<DenseVector> {
        if self.rows != p.dim() {
            return Err(Error::Shape {
                op: "left_mul_vec",
                left: (1, p.dim()),
                right: self.shape(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += p[i] * a;
            }
        }
        Ok(DenseVector(out))
    }

    pub fn row_sums(&self) -> DenseVector {
        DenseVector((0..self.rows).map(|i| self.row(i).iter().sum()).collect())
    }

    pub fn column_sums(&self) -> DenseVector {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a;
            }
        }
        DenseVector(out)
    }

    /// Sub-block `rows × cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn determinant(&self) -> Result<f64> {
        self.require_square("determinant")?;
        Ok(self.to_nalgebra().lu().determinant())
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square("inverse")?;
        self.to_nalgebra()
            .try_inverse()
            .map(|m| Self::from_nalgebra(&m))
            .ok_or_else(|| Error::domain("matrix is singular"))
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape {
                op,
                left: self.shape(),
                right: (self.cols, self.rows),
            })
        }
    }

    fn assert_same_shape(&self, other: &Self, op: &str) {
        assert_eq!(
            self.shape(),
            other.shape(),
            "{op}: shape mismatch {:?} vs {:?}",
            self.shape(),
            other.shape()
        );
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch, like nalgebra's.
impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&DenseMatrix> for DenseMatrix {
    fn add_assign(&mut self, rhs: &DenseMatrix) {
        self.assert_same_shape(rhs, "add");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&DenseMatrix> for DenseMatrix {
    fn sub_assign(&mut self, rhs: &DenseMatrix) {
        self.assert_same_shape(rhs, "sub");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Mul<f64> for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, s: f64) -> DenseMatrix {
        self.scaled(s)
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        self.scaled(-1.0)
    }
}

impl DenseMatrix {
    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &DenseMatrix) {
        self.assert_same_shape(other, "axpy");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }
}

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DenseMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        DenseMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// The matrix commutator `ab - ba`.
pub fn commutator(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::Shape {
            op: "commutator",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = a.matmul(b)?;
    out -= &b.matmul(a)?;
    Ok(out)
}

/// Dyadic (outer) product `a ⊗ b` with entries `a_i b_j`.
pub fn dyadic(a: &DenseVector, b: &DenseVector) -> Result<DenseMatrix> {
    DenseMatrix::new(
        a.dim(),
        b.dim(),
        a.as_slice()
            .iter()
            .flat_map(|x| b.as_slice().iter().map(move |y| x * y))
            .collect(),
    )
}

/// `⟨a, b⟩ = Tr(a bᵀ) = Σ a_ij b_ij`.
pub fn frobenius_inner(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape {
            op: "frobenius_inner",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(dot(&a.data, &b.data))
}

/// Gram–Schmidt with one reorthogonalization pass.
///
/// Fails with [`Error::Degenerate`] on the first vector whose residual after
/// projection is below `tol.threshold(|v|)`.
pub fn orthonormalize(vectors: &[DenseVector], tol: Tolerance) -> Result<Vec<DenseVector>> {
    let mut span = OrthonormalSpan::new(vectors.first().map_or(0, DenseVector::dim));
    for (index, v) in vectors.iter().enumerate() {
        if v.dim() != span.ambient_dim() {
            return Err(Error::Shape {
                op: "orthonormalize",
                left: (span.ambient_dim(), 1),
                right: (v.dim(), 1),
            });
        }
        let residual = span.residual(v.as_slice());
        if norm(&residual) <= tol.threshold(v.norm()) {
            return Err(Error::Degenerate { index });
        }
        span.push_residual(residual);
    }
    Ok(span.vectors.into_iter().map(DenseVector).collect())
}

/// Numerical dimension of the span of a family of equally shaped matrices.
pub fn span_dimension(mats: &[DenseMatrix], tol: Tolerance) -> Result<usize> {
    let Some(first) = mats.first() else {
        return Ok(0);
    };
    if let Some(bad) = mats.iter().find(|m| m.shape() != first.shape()) {
        return Err(Error::Shape {
            op: "span_dimension",
            left: first.shape(),
            right: bad.shape(),
        });
    }
    let columns: Vec<&[f64]> = mats.iter().map(DenseMatrix::as_slice).collect();
    Ok(numerical_rank(&columns, tol.abs_eps))
}

/// Rank of the matrix whose columns are `columns`, by Householder QR with
/// column pivoting on remaining norm. A pivot counts when
/// `|r_kk| > rel * |r_00|`.
pub fn numerical_rank(columns: &[&[f64]], rel: f64) -> usize {
    let diag = pivoted_qr_diagonal(columns);
    match diag.first() {
        Some(&lead) if lead > 0.0 => diag.iter().take_while(|&&r| r > rel * lead).count(),
        _ => 0,
    }
}

/// Absolute diagonal of R in a column-pivoted QR, non-increasing.
pub fn pivoted_qr_diagonal(columns: &[&[f64]]) -> Vec<f64> {
    let k = columns.len();
    if k == 0 {
        return Vec::new();
    }
    let m = columns[0].len();
    let mut cols: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let steps = m.min(k);
    let mut diag = Vec::with_capacity(steps);
    for step in 0..steps {
        // pivot: remaining column with the largest trailing norm
        let (piv, best) = (step..k)
            .map(|j| (j, norm(&cols[j][step..])))
            .fold((step, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        cols.swap(step, piv);
        diag.push(best);
        if best == 0.0 {
            diag.extend(std::iter::repeat_n(0.0, steps - step - 1));
            break;
        }
        // Householder reflector zeroing cols[step][step+1..]
        let x = &cols[step][step..];
        let alpha = if x[0] >= 0.0 { -best } else { best };
        let mut v: Vec<f64> = x.to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(step) {
            let tail = &mut col[step..];
            let s = 2.0 * dot(&v, tail) / vnorm2;
            for (t, vi) in tail.iter_mut().zip(&v) {
                *t -= s * vi;
            }
        }
    }
    diag
}

/// Orthonormal basis of a growing subspace of ℝᵈ.
#[derive(Debug, Clone)]
pub struct OrthonormalSpan {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl OrthonormalSpan {
    pub fn new(ambient_dim: usize) -> Self {
        Self {
            dim: ambient_dim,
            vectors: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Component of `v` orthogonal to the span (two projection passes).
    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        r
    }

    /// Adds `v` when its orthogonal residual exceeds `rel * |v|` and
    /// `abs`. Returns whether the span grew.
    pub fn try_insert(&mut self, v: &[f64], rel: f64, abs: f64) -> bool {
        self.try_insert_scaled(v, norm(v), rel, abs)
    }

    /// As [`try_insert`](Self::try_insert) with the relative test taken
    /// against `scale` instead of `|v|`.
    pub fn try_insert_scaled(&mut self, v: &[f64], scale: f64, rel: f64, abs: f64) -> bool {
        let n = scale;
        let r = self.residual(v);
        let rn = norm(&r);
        if rn > rel * n && rn > abs {
            self.push_residual(r);
            true
        } else {
            false
        }
    }

    fn push_residual(&mut self, mut r: Vec<f64>) {
        let rn = norm(&r);
        r.iter_mut().for_each(|x| *x /= rn);
        self.vectors.push(r);
    }
}

/// Matrix exponential by scaling and squaring with a diagonal (6,6) Padé
/// approximant; the scaled matrix has ∞-norm at most 1/2.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    a.require_square("expm")?;
    const Q: usize = 6;
    let n = a.rows();
    let inf_norm = (0..n)
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if inf_norm > 0.5 {
        (inf_norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a.scaled(0.5f64.powi(squarings));

    let mut c = 1.0;
    let mut power = DenseMatrix::identity(n);
    let mut num = DenseMatrix::identity(n);
    let mut den = DenseMatrix::identity(n);
    for k in 1..=Q {
        c *= (Q - k + 1) as f64 / (k * (2 * Q - k + 1)) as f64;
        power = &power * &x;
        num.axpy(c, &power);
        den.axpy(if k % 2 == 0 { c } else { -c }, &power);
    }
    let lu = den.to_nalgebra().lu();
    let mut e = lu
        .solve(&num.to_nalgebra())
        .map(|m| DenseMatrix::from_nalgebra(&m))
        .ok_or_else(|| Error::domain("Padé denominator is singular"))?;
    for _ in 0..squarings {
        e = &e * &e;
    }
    DenseMatrix::new(n, n, e.data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn commutator_of_elementary_dyads() {
        let e12 = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e21 = m(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(commutator(&e12, &e21).unwrap(), m(&[&[1.0, 0.0], &[0.0, -1.0]]));
    }

    #[test]
    fn commutator_trivial_cases() {
        let b = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let zero = DenseMatrix::zeros(2, 2);
        assert_eq!(commutator(&DenseMatrix::identity(2), &b).unwrap(), zero);
        assert_eq!(commutator(&b, &b).unwrap(), zero);
        assert!(matches!(
            commutator(&b, &DenseMatrix::identity(3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn dyadic_entries() {
        let e1 = DenseVector::unit(2, 0);
        let e2 = DenseVector::unit(2, 1);
        assert_eq!(dyadic(&e1, &e2).unwrap(), m(&[&[0.0, 1.0], &[0.0, 0.0]]));
        let a = DenseVector::new(vec![1.0, 1.0]).unwrap();
        let b = DenseVector::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(dyadic(&a, &b).unwrap(), m(&[&[1.0, -1.0], &[1.0, -1.0]]));
        let c = DenseVector::new(vec![0.5, 3.0]).unwrap();
        assert!((dyadic(&a, &c).unwrap().trace() - a.dot(&c)).abs() < 1e-15);
    }

    #[test]
    fn frobenius_inner_of_dyads_factorizes() {
        let v: Vec<DenseVector> = [[1.0, 2.0, 0.5], [-1.0, 0.0, 3.0], [2.0, 2.0, -1.0], [0.3, -0.7, 1.1]]
            .iter()
            .map(|x| DenseVector::new(x.to_vec()).unwrap())
            .collect();
        let lhs = frobenius_inner(&dyadic(&v[0], &v[1]).unwrap(), &dyadic(&v[2], &v[3]).unwrap()).unwrap();
        let rhs = v[0].dot(&v[2]) * v[1].dot(&v[3]);
        assert!((lhs - rhs).abs() < 1e-12);
        assert_eq!(frobenius_inner(&DenseMatrix::identity(4), &DenseMatrix::identity(4)).unwrap(), 4.0);
    }

    #[test]
    fn orthonormalize_examples() {
        let tol = Tolerance::default();
        let v = DenseVector::new(vec![1.0, -1.0]).unwrap();
        let out = orthonormalize(&[v.clone()], tol).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((out[0][0] - s).abs() < 1e-15 && (out[0][1] + s).abs() < 1e-15);

        let out = orthonormalize(
            &[DenseVector::new(vec![1.0, 0.0]).unwrap(), DenseVector::new(vec![1.0, 1.0]).unwrap()],
            tol,
        )
        .unwrap();
        assert_eq!(out[0].as_slice(), &[1.0, 0.0]);
        assert!((out[1][0]).abs() < 1e-15 && (out[1][1] - 1.0).abs() < 1e-15);

        assert_eq!(orthonormalize(&[v.clone(), v], tol), Err(Error::Degenerate { index: 1 }));
    }

    #[test]
    fn span_dimension_examples() {
        let tol = Tolerance::default();
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(span_dimension(&[a.clone(), a.scaled(2.0)], tol).unwrap(), 1);
        assert_eq!(span_dimension(&[], tol).unwrap(), 0);
        assert_eq!(span_dimension(&[DenseMatrix::zeros(2, 2)], tol).unwrap(), 0);
        let b = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(span_dimension(&[a.clone(), b.clone(), &a + &b], tol).unwrap(), 2);
    }

    #[test]
    fn tolerance_requires_a_positive_component() {
        assert!(Tolerance::new(0.0, 0.0).is_err());
        assert!(Tolerance::new(-1.0, 1e-3).is_err());
        assert!(Tolerance::new(0.0, 1e-3).is_ok());
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn expm_two_state_generator_closed_form() {
        let a = m(&[&[-1.0, 1.0], &[1.0, -1.0]]);
        for t in [0.0, 0.1, 1.0, 10.0] {
            let e = expm(&a.scaled(t)).unwrap();
            let d = (-2.0 * t).exp();
            let want = m(&[&[(1.0 + d) / 2.0, (1.0 - d) / 2.0], &[(1.0 - d) / 2.0, (1.0 + d) / 2.0]]);
            assert!((&e - &want).max_abs() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn expm_of_nilpotent_and_diagonal() {
        let n = m(&[&[0.0, 3.0], &[0.0, 0.0]]);
        assert!((&expm(&n).unwrap() - &m(&[&[1.0, 3.0], &[0.0, 1.0]])).max_abs() < 1e-14);
        let d = DenseMatrix::diagonal(&[2.0, -30.0]);
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] / 2f64.exp() - 1.0).abs() < 1e-13);
        assert!((e[(1, 1)] / (-30f64).exp() - 1.0).abs() < 1e-10);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn square(n: usize) -> impl Strategy<Value = DenseMatrix> {
            proptest::collection::vec(-3.0f64..3.0, n * n)
                .prop_map(move |d| DenseMatrix::new(n, n, d).unwrap())
        }

        proptest! {
            #[test]
            fn jacobi_identity(a in square(4), b in square(4), c in square(4)) {
                let t1 = commutator(&a, &commutator(&b, &c).unwrap()).unwrap();
                let t2 = commutator(&b, &commutator(&c, &a).unwrap()).unwrap();
                let t3 = commutator(&c, &commutator(&a, &b).unwrap()).unwrap();
                let sum = &(&t1 + &t2) + &t3;
                prop_assert!(sum.max_abs() < 1e-10);
            }

            #[test]
            fn commutator_bilinear_antisymmetric(a in square(3), b in square(3), c in square(3), s in -2.0f64..2.0) {
                let ab = commutator(&a, &b).unwrap();
                let ba = commutator(&b, &a).unwrap();
                prop_assert!((&ab + &ba).max_abs() < 1e-12);
                let lhs = commutator(&(&a + &c.scaled(s)), &b).unwrap();
                let rhs = &ab + &commutator(&c, &b).unwrap().scaled(s);
                prop_assert!((&lhs - &rhs).max_abs() < 1e-10);
            }

            #[test]
            fn frobenius_inner_symmetric_positive(a in square(3), b in square(3)) {
                prop_assert_eq!(frobenius_inner(&a, &b).unwrap(), frobenius_inner(&b, &a).unwrap());
                let aa = frobenius_inner(&a, &a).unwrap();
                prop_assert!(aa >= 0.0);
                if a.max_abs() > 0.0 { prop_assert!(aa > 0.0); }
            }

            #[test]
            fn orthonormalize_gram_is_identity(data in proptest::collection::vec(-1.0f64..1.0, 12)) {
                let vs: Vec<DenseVector> = data.chunks(4).map(|c| DenseVector::new(c.to_vec()).unwrap()).collect();
                if let Ok(q) = orthonormalize(&vs, Tolerance::new(1e-6, 1e-6).unwrap()) {
                    for i in 0..q.len() {
                        for j in 0..q.len() {
                            let want = if i == j { 1.0 } else { 0.0 };
                            prop_assert!((q[i].dot(&q[j]) - want).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }
}
