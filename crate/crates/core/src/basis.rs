//! The orthonormal basis `{Z, R_i, A_ij, H_k}` of 𝔰(n,ℝ).
//!
//! Frames use the Helmert convention: the k-th vector of the sum-zero
//! hyperplane in ℝᵈ has `k` leading entries `1/√(k(k+1))`, then
//! `-k/√(k(k+1))`, then zeros. The same convention fixes the columns of Γ.

use std::fmt;

use serde::Serialize;

use crate::error::{require_n, Error, Result};
use crate::linalg::{dyadic, frobenius_inner, span_dimension, DenseMatrix, DenseVector, Tolerance};

/// Helmert orthonormal basis of `{x ∈ ℝᵈ : Σ x = 0}` (d − 1 vectors).
pub fn helmert_basis(dim: usize) -> Vec<DenseVector> {
    (1..dim)
        .map(|k| {
            let s = ((k * (k + 1)) as f64).sqrt();
            let mut v = vec![0.0; dim];
            v[..k].iter_mut().for_each(|x| *x = 1.0 / s);
            v[k] = -(k as f64) / s;
            DenseVector::from(v)
        })
        .collect()
}

/// `v₀ = 𝟏/√n` together with an orthonormal basis `v₁…v_{n−1}` of Πₙ.
#[derive(Debug, Clone, Serialize)]
pub struct SimplexFrame {
    pub n: usize,
    pub v0: DenseVector,
    pub v: Vec<DenseVector>,
}

pub fn build_frame(n: usize) -> Result<SimplexFrame> {
    require_n(n)?;
    Ok(SimplexFrame {
        n,
        v0: DenseVector::ones(n).scaled(1.0 / (n as f64).sqrt()),
        v: helmert_basis(n),
    })
}

impl SimplexFrame {
    /// `v_i` for `i` in `0..n`, with `vector(0) = v₀`.
    pub fn vector(&self, i: usize) -> &DenseVector {
        if i == 0 {
            &self.v0
        } else {
            &self.v[i - 1]
        }
    }

    /// Largest deviation of the Gram matrix of `(v₀, …, v_{n−1})` from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.vector(i).dot(self.vector(j)) - want).abs());
            }
        }
        worst
    }
}

/// Γ: `(n−1)×(n−2)`, columns `γ¹…γ^{n−2}` orthonormal in Π_{n−1}.
#[derive(Debug, Clone, Serialize)]
pub struct GammaMatrix {
    pub n: usize,
    pub entries: DenseMatrix,
}

pub fn build_gamma_matrix(n: usize) -> Result<GammaMatrix> {
    if n < 3 {
        return Err(Error::domain(format!(
            "Γ needs n ≥ 3 (the Cartan part is empty for n = {n})"
        )));
    }
    Ok(GammaMatrix {
        n,
        entries: DenseMatrix::from_columns(&helmert_basis(n - 1))?,
    })
}

impl GammaMatrix {
    /// `γ^k_i`, both indices 1-based.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[(i - 1, k - 1)]
    }

    /// Row `i` (1-based): `(γ¹_i, …, γ^{n−2}_i)`.
    pub fn row(&self, i: usize) -> &[f64] {
        self.entries.row(i - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ElementKind {
    Z,
    R,
    A,
    H,
}

/// Label of a basis element; indices are 1-based as in the usual notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Z,
    R(usize),
    A(usize, usize),
    H(usize),
}

impl Label {
    pub fn kind(&self) -> ElementKind {
        match self {
            Label::Z => ElementKind::Z,
            Label::R(_) => ElementKind::R,
            Label::A(..) => ElementKind::A,
            Label::H(_) => ElementKind::H,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Label::Z => vec![],
            Label::R(i) | Label::H(i) => vec![i],
            Label::A(i, j) => vec![i, j],
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Z => write!(f, "Z"),
            Label::R(i) => write!(f, "R_{i}"),
            Label::A(i, j) => write!(f, "A_{i},{j}"),
            Label::H(k) => write!(f, "H_{k}"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct BasisElement {
    pub label: Label,
    pub matrix: DenseMatrix,
}

/// Ordered labeled basis: `Z, R_1…R_{n−1}, A_ij (lexicographic), H_1…H_{n−2}`.
#[derive(Debug, Clone)]
pub struct StochasticBasis {
    pub n: usize,
    pub frame: SimplexFrame,
    /// `None` for n = 2.
    pub gamma: Option<GammaMatrix>,
    elements: Vec<BasisElement>,
}

/// Ordered pairs `(i, j)`, `i ≠ j`, `1 ≤ i, j ≤ n−1`, lexicographic.
pub fn off_diagonal_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).flat_map(move |i| (1..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

pub fn build_basis(n: usize) -> Result<StochasticBasis> {
    let frame = build_frame(n)?;
    let gamma = if n >= 3 { Some(build_gamma_matrix(n)?) } else { None };
    let nf = n as f64;

    let mut elements = Vec::with_capacity(n * (n - 1));
    let mut z = DenseMatrix::identity(n);
    z -= &dyadic(&frame.v0, &frame.v0)?;
    elements.push(BasisElement {
        label: Label::Z,
        matrix: z.scaled(1.0 / (nf - 1.0).sqrt()),
    });
    for i in 1..n {
        elements.push(BasisElement {
            label: Label::R(i),
            matrix: dyadic(&frame.v0, frame.vector(i))?,
        });
    }
    for (i, j) in off_diagonal_pairs(n) {
        elements.push(BasisElement {
            label: Label::A(i, j),
            matrix: dyadic(frame.vector(i), frame.vector(j))?,
        });
    }
    if let Some(g) = &gamma {
        let projectors: Vec<DenseMatrix> = (1..n)
            .map(|l| dyadic(frame.vector(l), frame.vector(l)))
            .collect::<Result<_>>()?;
        for k in 1..n - 1 {
            let mut h = DenseMatrix::zeros(n, n);
            for (l, p) in projectors.iter().enumerate() {
                h.axpy(g.get(l + 1, k), p);
            }
            elements.push(BasisElement {
                label: Label::H(k),
                matrix: h,
            });
        }
    }
    Ok(StochasticBasis {
        n,
        frame,
        gamma,
        elements,
    })
}

impl StochasticBasis {
    /// `n(n−1)`.
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// `(n−1)(n−2)`, the number of `A_ij`.
    pub fn a_count(&self) -> usize {
        (self.n - 1) * (self.n - 2)
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn matrices(&self) -> impl Iterator<Item = &DenseMatrix> {
        self.elements.iter().map(|e| &e.matrix)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.elements.iter().map(|e| e.label).collect()
    }

    pub fn index_of(&self, label: Label) -> Option<usize> {
        let n = self.n;
        let ok = |i: usize| (1..n).contains(&i);
        match label {
            Label::Z => Some(0),
            Label::R(i) if ok(i) => Some(i),
            Label::A(i, j) if ok(i) && ok(j) && i != j => {
                let col = if j < i { j - 1 } else { j - 2 };
                Some(n + (i - 1) * (n - 2) + col)
            }
            Label::H(k) if (1..n.saturating_sub(1)).contains(&k) => Some(n + self.a_count() + k - 1),
            _ => None,
        }
    }

    /// Matrix of a labeled element. Panics on an index outside the basis.
    pub fn get(&self, label: Label) -> &DenseMatrix {
        let idx = self
            .index_of(label)
            .unwrap_or_else(|| panic!("{label} is not in the basis for n = {}", self.n));
        &self.elements[idx].matrix
    }

    pub fn z(&self) -> &DenseMatrix {
        self.get(Label::Z)
    }

    pub fn r(&self, i: usize) -> &DenseMatrix {
        self.get(Label::R(i))
    }

    pub fn a(&self, i: usize, j: usize) -> &DenseMatrix {
        self.get(Label::A(i, j))
    }

    pub fn h(&self, k: usize) -> &DenseMatrix {
        self.get(Label::H(k))
    }

    /// `γ^k_i`; zero-sized when n = 2.
    pub fn gamma_entry(&self, i: usize, k: usize) -> f64 {
        self.gamma.as_ref().expect("Γ is empty for n = 2").get(i, k)
    }

    /// Indices of the radical part `{Z, R_i}`.
    pub fn radical_range(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    /// Indices of the Levi part `{A_ij, H_k}`.
    pub fn levi_range(&self) -> std::ops::Range<usize> {
        self.n..self.dim()
    }

    /// Coordinates in the (orthonormal) basis.
    pub fn coords(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| frobenius_inner(x, &e.matrix))
            .collect()
    }

    pub fn from_coords(&self, c: &[f64]) -> DenseMatrix {
        assert_eq!(c.len(), self.dim(), "coordinate vector length");
        let mut out = DenseMatrix::zeros(self.n, self.n);
        for (ci, e) in c.iter().zip(&self.elements) {
            if *ci != 0.0 {
                out.axpy(*ci, &e.matrix);
            }
        }
        out
    }
}

/// `R̂_i = E_i(n) − E_n(n)` for `i < n`, then `Ẑ = I − J_n/n`.
pub fn build_legacy_radical_generators(n: usize) -> Result<Vec<DenseMatrix>> {
    require_n(n)?;
    let column_of_ones = |c: usize| DenseMatrix::from_fn(n, n, |_, j| if j == c { 1.0 } else { 0.0 });
    let mut out: Vec<DenseMatrix> = (0..n - 1)
        .map(|i| &column_of_ones(i) - &column_of_ones(n - 1))
        .collect();
    let mut z_hat = DenseMatrix::identity(n);
    z_hat -= &DenseMatrix::from_fn(n, n, |_, _| 1.0 / n as f64);
    out.push(z_hat);
    Ok(out)
}

/// Numerical audit of a basis.
#[derive(Debug, Clone, Serialize)]
pub struct BasisReport {
    pub n: usize,
    pub dimension: usize,
    pub expected_dimension: usize,
    pub frame_gram_deviation: f64,
    pub gamma_gram_deviation: f64,
    pub gram_max_deviation: f64,
    /// `max ‖E·𝟏‖∞` over the basis.
    pub max_row_sum: f64,
    /// Column sums and traces of the Levi part.
    pub levi_max_column_sum: f64,
    pub levi_max_trace: f64,
    pub span_dimension: usize,
    pub legacy_union_span: usize,
    pub passes: bool,
}

pub fn check_basis(basis: &StochasticBasis, tol: Tolerance) -> Result<BasisReport> {
    let n = basis.n;
    let mats: Vec<&DenseMatrix> = basis.matrices().collect();
    let mut gram_dev: f64 = 0.0;
    for (a, x) in mats.iter().enumerate() {
        for (b, y) in mats.iter().enumerate().skip(a) {
            let want = if a == b { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((frobenius_inner(x, y)? - want).abs());
        }
    }
    let max_row_sum = mats
        .iter()
        .map(|m| m.row_sums().as_slice().iter().fold(0.0f64, |a, x| a.max(x.abs())))
        .fold(0.0, f64::max);
    let levi = &basis.elements[basis.levi_range()];
    let levi_max_column_sum = levi
        .iter()
        .map(|e| e.matrix.column_sums().as_slice().iter().fold(0.0f64, |a, x| a.max(x.abs())))
        .fold(0.0, f64::max);
    let levi_max_trace = levi.iter().map(|e| e.matrix.trace().abs()).fold(0.0, f64::max);

    let gamma_gram_deviation = match &basis.gamma {
        Some(g) => {
            let gtg = &g.entries.transpose() * &g.entries;
            (&gtg - &DenseMatrix::identity(n - 2)).max_abs()
        }
        None => 0.0,
    };

    let owned: Vec<DenseMatrix> = mats.iter().map(|m| (*m).clone()).collect();
    let span = span_dimension(&owned, tol)?;
    let mut union: Vec<DenseMatrix> = build_legacy_radical_generators(n)?;
    union.extend(basis.elements[basis.radical_range()].iter().map(|e| e.matrix.clone()));
    let legacy_union_span = span_dimension(&union, tol)?;

    let frame_gram_deviation = basis.frame.gram_deviation();
    let small = |x: f64| x < tol.abs_eps;
    let passes = basis.dim() == n * (n - 1)
        && small(frame_gram_deviation)
        && small(gamma_gram_deviation)
        && small(gram_dev)
        && small(max_row_sum)
        && small(levi_max_column_sum)
        && small(levi_max_trace)
        && span == n * (n - 1)
        && legacy_union_span == n;
    Ok(BasisReport {
        n,
        dimension: basis.dim(),
        expected_dimension: n * (n - 1),
        frame_gram_deviation,
        gamma_gram_deviation,
        gram_max_deviation: gram_dev,
        max_row_sum,
        levi_max_column_sum,
        levi_max_trace,
        span_dimension: span,
        legacy_union_span,
        passes,
    })
}

#[derive(Serialize)]
struct ElementJson<'a> {
    label: String,
    kind: ElementKind,
    indices: Vec<usize>,
    matrix: &'a DenseMatrix,
}

impl Serialize for StochasticBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let elements: Vec<ElementJson<'_>> = self
            .elements
            .iter()
            .map(|e| ElementJson {
                label: e.label.to_string(),
                kind: e.label.kind(),
                indices: e.label.indices(),
                matrix: &e.matrix,
            })
            .collect();
        let mut st = s.serialize_struct("StochasticBasis", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("frame", &self.frame)?;
        st.serialize_field("gamma", &self.gamma.as_ref().map(|g| &g.entries))?;
        st.serialize_field("elements", &elements)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn frame_for_two_states() {
        let f = build_frame(2).unwrap();
        assert!((f.v0[0] - S2).abs() < 1e-15 && (f.v0[1] - S2).abs() < 1e-15);
        assert!((f.v[0][0] - S2).abs() < 1e-15 && (f.v[0][1] + S2).abs() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal_and_sum_free() {
        for n in 2..=12 {
            let f = build_frame(n).unwrap();
            assert!(f.gram_deviation() < 1e-12, "n = {n}");
            for v in &f.v {
                assert!(v.sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_rejects_small_n() {
        assert!(build_frame(1).is_err());
        assert!(build_frame(0).is_err());
        assert!(build_gamma_matrix(2).is_err());
    }

    #[test]
    fn gamma_for_three_states() {
        let g = build_gamma_matrix(3).unwrap();
        assert_eq!(g.entries.shape(), (2, 1));
        assert!((g.get(1, 1) - S2).abs() < 1e-15 && (g.get(2, 1) + S2).abs() < 1e-15);
    }

    #[test]
    fn gamma_projector_is_centering_matrix() {
        for n in 3..=10 {
            let g = build_gamma_matrix(n).unwrap().entries;
            let m = (n - 1) as f64;
            let centering = DenseMatrix::from_fn(n - 1, n - 1, |i, j| {
                if i == j { 1.0 - 1.0 / m } else { -1.0 / m }
            });
            assert!((&(&g * &g.transpose()) - &centering).max_abs() < 1e-12, "n = {n}");
            assert!((&(&g.transpose() * &g) - &DenseMatrix::identity(n - 2)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_counts() {
        let b2 = build_basis(2).unwrap();
        assert_eq!(b2.labels(), vec![Label::Z, Label::R(1)]);
        let b3 = build_basis(3).unwrap();
        assert_eq!(b3.dim(), 6);
        for n in 2..=9 {
            let b = build_basis(n).unwrap();
            assert_eq!(b.dim(), 1 + (n - 1) + (n - 1) * (n - 2) + (n - 2).max(0));
        }
    }

    #[test]
    fn z_for_two_states() {
        let b = build_basis(2).unwrap();
        let want = DenseMatrix::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap();
        assert!((b.z() - &want).max_abs() < 1e-15);
    }

    #[test]
    fn index_of_matches_order() {
        for n in 2..=7 {
            let b = build_basis(n).unwrap();
            for (idx, e) in b.elements().iter().enumerate() {
                assert_eq!(b.index_of(e.label), Some(idx));
            }
            assert_eq!(b.index_of(Label::R(n)), None);
            assert_eq!(b.index_of(Label::A(1, 1)), None);
            assert_eq!(b.index_of(Label::H(n - 1)), None);
        }
    }

    #[test]
    fn basis_invariants_for_small_n() {
        let tol = Tolerance::default();
        for n in 2..=12 {
            let b = build_basis(n).unwrap();
            let rep = check_basis(&b, Tolerance { abs_eps: 1e-9, ..tol }).unwrap();
            assert!(rep.passes, "{rep:?}");
            assert!(rep.max_row_sum < 1e-10);
            assert!(rep.gram_max_deviation < 1e-9);
            assert_eq!(rep.legacy_union_span, n);
        }
    }

    #[test]
    fn levi_elements_kill_v0_on_both_sides() {
        for n in 3..=12 {
            let b = build_basis(n).unwrap();
            for e in &b.elements()[b.levi_range()] {
                let right = e.matrix.mul_vec(&b.frame.v0).unwrap();
                let left = e.matrix.left_mul_vec(&b.frame.v0).unwrap();
                assert!(right.norm() < 1e-12 && left.norm() < 1e-12, "{} n = {n}", e.label);
            }
        }
    }

    #[test]
    fn legacy_generators_for_two_states() {
        let g = build_legacy_radical_generators(2).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0], DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap());
        assert_eq!(g[1], DenseMatrix::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap());
    }

    #[test]
    fn coords_round_trip() {
        let b = build_basis(5).unwrap();
        let c: Vec<f64> = (0..b.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = b.coords(&b.from_coords(&c)).unwrap();
        for (x, y) in c.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn json_shape() {
        let b = build_basis(3).unwrap();
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["elements"].as_array().unwrap().len(), 6);
        assert_eq!(v["elements"][3]["label"], "A_1,2");
        assert_eq!(v["elements"][3]["kind"], "A");
        assert_eq!(v["elements"][5]["indices"], serde_json::json!([1]));
        assert!(serde_json::to_value(build_basis(2).unwrap()).unwrap()["gamma"].is_null());
    }
}
