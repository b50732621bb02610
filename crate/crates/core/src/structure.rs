//! Bracket table, structure constants, adjoint matrices and the Killing
//! form of the Levi factor 𝔩 = 𝒜 ⊕ ℋ.

use std::ops::Range;

use serde::Serialize;

use crate::basis::{off_diagonal_pairs, Label, StochasticBasis};
use crate::error::{Error, Result};
use crate::linalg::{commutator, dyadic, DenseMatrix, Tolerance};

/// Eigenvalue of `ad Z` on every `R_i`: `[Z, R_i] = -(1/√(n−1)) R_i`.
///
/// `R_i Z = R_i/√(n−1)` and `Z R_i = 0` for the unit-norm `Z`, so the
/// coefficient is `-1/√(n−1)`; it coincides with `-1/(n−1)` only at n = 2.
pub fn z_r_eigenvalue(n: usize) -> f64 {
    -1.0 / ((n - 1) as f64).sqrt()
}

/// Closed-form value of the Levi Killing form on dual pairs: `2(n−1)`.
pub fn killing_scale(n: usize) -> f64 {
    2.0 * (n as f64 - 1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub checked: usize,
    pub max_residual: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub n: usize,
    /// Coefficient asserted for `[Z, R_i] = c R_i`.
    pub z_r_coefficient: f64,
    pub families: Vec<IdentityCheck>,
    pub max_residual: f64,
    pub passes: bool,
}

impl TableReport {
    pub fn family(&self, prefix: &str) -> Option<&IdentityCheck> {
        self.families.iter().find(|f| f.identity.starts_with(prefix))
    }
}

struct Family {
    identity: String,
    checked: usize,
    worst: f64,
}

impl Family {
    fn new(identity: impl Into<String>) -> Self {
        Self {
            identity: identity.into(),
            checked: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, lhs: &DenseMatrix, rhs: &DenseMatrix) {
        self.checked += 1;
        self.worst = self.worst.max((lhs - rhs).frobenius_norm());
    }
}

/// Checks every line of the bracket table with `[Z, R_i]` at its true
/// coefficient [`z_r_eigenvalue`].
pub fn verify_multiplication_table(basis: &StochasticBasis, tol: Tolerance) -> Result<TableReport> {
    verify_multiplication_table_with(basis, tol, z_r_eigenvalue(basis.n))
}

/// Same as [`verify_multiplication_table`] but asserting
/// `[Z, R_i] = z_r_coefficient · R_i`.
pub fn verify_multiplication_table_with(
    basis: &StochasticBasis,
    tol: Tolerance,
    z_r_coefficient: f64,
) -> Result<TableReport> {
    let n = basis.n;
    let zero = DenseMatrix::zeros(n, n);
    let br = commutator;
    let pairs: Vec<(usize, usize)> = off_diagonal_pairs(n).collect();
    let hs = 1..n.saturating_sub(1);

    let mut zr = Family::new(format!("[Z,R_i] = {z_r_coefficient:.12} R_i"));
    let mut za = Family::new("[Z,A_ij] = 0");
    let mut zh = Family::new("[Z,H_i] = 0");
    let mut rr = Family::new("[R_i,R_j] = 0");
    let mut ra = Family::new("[R_i,A_jk] = δ_ij R_k");
    let mut rh = Family::new("[R_i,H_j] = γ_i^j R_i");
    let mut aa = Family::new("[A_ij,A_kl] four-case rule");
    let mut hdiff = Family::new("v_i⊗v_i − v_j⊗v_j = Σ_r (γ_i^r − γ_j^r) H_r");
    let mut ah = Family::new("[A_ij,H_k] = (γ_j^k − γ_i^k) A_ij");
    let mut hh = Family::new("[H_i,H_j] = 0");

    for i in 1..n {
        zr.record(&br(basis.z(), basis.r(i))?, &basis.r(i).scaled(z_r_coefficient));
        for j in 1..n {
            rr.record(&br(basis.r(i), basis.r(j))?, &zero);
        }
        for &(j, k) in &pairs {
            let want = if i == j { basis.r(k).clone() } else { zero.clone() };
            ra.record(&br(basis.r(i), basis.a(j, k))?, &want);
        }
        for k in hs.clone() {
            rh.record(&br(basis.r(i), basis.h(k))?, &basis.r(i).scaled(basis.gamma_entry(i, k)));
        }
    }
    for &(i, j) in &pairs {
        za.record(&br(basis.z(), basis.a(i, j))?, &zero);
        for &(k, l) in &pairs {
            let want = match (i == l, j == k) {
                (true, true) => {
                    let mut h = zero.clone();
                    for r in hs.clone() {
                        h.axpy(basis.gamma_entry(i, r) - basis.gamma_entry(j, r), basis.h(r));
                    }
                    h
                }
                (false, true) => basis.a(i, l).clone(),
                (true, false) => -basis.a(k, j),
                (false, false) => zero.clone(),
            };
            aa.record(&br(basis.a(i, j), basis.a(k, l))?, &want);
        }
        let vi = basis.frame.vector(i);
        let vj = basis.frame.vector(j);
        let lhs = &dyadic(vi, vi)? - &dyadic(vj, vj)?;
        let mut rhs = zero.clone();
        for r in hs.clone() {
            rhs.axpy(basis.gamma_entry(i, r) - basis.gamma_entry(j, r), basis.h(r));
        }
        hdiff.record(&lhs, &rhs);
        for k in hs.clone() {
            let c = basis.gamma_entry(j, k) - basis.gamma_entry(i, k);
            ah.record(&br(basis.a(i, j), basis.h(k))?, &basis.a(i, j).scaled(c));
        }
    }
    for k in hs.clone() {
        zh.record(&br(basis.z(), basis.h(k))?, &zero);
        for l in hs.clone() {
            hh.record(&br(basis.h(k), basis.h(l))?, &zero);
        }
    }

    let families: Vec<IdentityCheck> = [zr, za, zh, rr, ra, rh, aa, hdiff, ah, hh]
        .into_iter()
        .map(|f| IdentityCheck {
            passes: f.worst < tol.abs_eps,
            identity: f.identity,
            checked: f.checked,
            max_residual: f.worst,
        })
        .collect();
    let max_residual = families.iter().map(|f| f.max_residual).fold(0.0, f64::max);
    Ok(TableReport {
        n,
        z_r_coefficient,
        passes: families.iter().all(|f| f.passes),
        families,
        max_residual,
    })
}

/// `[x_a, x_b] = Σ_c c[a][b][c] x_c` in the labeled basis.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    pub n: usize,
    pub labels: Vec<Label>,
    dim: usize,
    c: Vec<f64>,
    /// Largest `‖[x_a,x_b] − Σ c x_c‖_F` seen while building.
    pub closure_residual: f64,
}

/// Residual bound for the closure of the algebra under brackets.
pub const CLOSURE_RESIDUAL_LIMIT: f64 = 1e-9;

pub fn structure_constants(basis: &StochasticBasis) -> Result<StructureConstants> {
    let dim = basis.dim();
    let mats: Vec<&DenseMatrix> = basis.matrices().collect();
    let mut c = vec![0.0; dim * dim * dim];
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        for b in a + 1..dim {
            let bracket = commutator(mats[a], mats[b])?;
            let coords = basis.coords(&bracket)?;
            let mut rebuilt = basis.from_coords(&coords);
            rebuilt -= &bracket;
            worst = worst.max(rebuilt.frobenius_norm());
            for (k, v) in coords.into_iter().enumerate() {
                c[(a * dim + b) * dim + k] = v;
                c[(b * dim + a) * dim + k] = -v;
            }
        }
    }
    if worst >= CLOSURE_RESIDUAL_LIMIT {
        return Err(Error::Consistency(format!(
            "bracket leaves the span of the basis by {worst:e}"
        )));
    }
    Ok(StructureConstants {
        n: basis.n,
        labels: basis.labels(),
        dim,
        c,
        closure_residual: worst,
    })
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.c[(a * self.dim + b) * self.dim + c]
    }

    /// Coordinates of `[x, y]` from coordinates of `x` and `y`.
    pub fn bracket_coords(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for (a, xa) in x.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            for (b, yb) in y.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                let s = xa * yb;
                let row = &self.c[(a * d + b) * d..(a * d + b + 1) * d];
                for (o, v) in out.iter_mut().zip(row) {
                    *o += s * v;
                }
            }
        }
        out
    }

    /// `ad x` in coordinates: `(ad x)[c][b] = Σ_a x_a c[a][b][c]`.
    pub fn ad_matrix(&self, x: &[f64]) -> DenseMatrix {
        let d = self.dim;
        let mut m = DenseMatrix::zeros(d, d);
        for (a, xa) in x.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            for b in 0..d {
                for c in 0..d {
                    m[(c, b)] += xa * self.c[(a * d + b) * d + c];
                }
            }
        }
        m
    }

    /// `ad x_a` for a single basis element.
    pub fn ad_basis(&self, a: usize) -> DenseMatrix {
        let mut e = vec![0.0; self.dim];
        e[a] = 1.0;
        self.ad_matrix(&e)
    }

    /// Trace of `ad x_a · ad x_b` compressed to the coordinate block `rows`
    /// (the operator is applied on all coordinates, the trace runs over `rows`).
    pub fn compressed_trace(&self, a: usize, b: usize, rows: Range<usize>) -> f64 {
        let d = self.dim;
        let mut t = 0.0;
        for c in rows {
            // (ad a · ad b)[c][c] = Σ_e (ad a)[c][e] (ad b)[e][c]
            for e in 0..d {
                let ad_a_ce = self.c[(a * d + e) * d + c];
                if ad_a_ce != 0.0 {
                    t += ad_a_ce * self.c[(b * d + c) * d + e];
                }
            }
        }
        t
    }

    /// Trace form `Tr(ad x_a · ad x_b)` with `ad` restricted to the
    /// invariant coordinate block `block`, for all `a, b` in `block`.
    pub fn trace_form(&self, block: Range<usize>) -> Option<DenseMatrix> {
        let k = block.len();
        if k == 0 {
            return None;
        }
        let d = self.dim;
        let idx: Vec<usize> = block.collect();
        // ad restricted: L_a[c][e] for c, e in block
        let restricted: Vec<Vec<f64>> = idx
            .iter()
            .map(|&a| {
                let mut m = vec![0.0; k * k];
                for (ci, &c) in idx.iter().enumerate() {
                    for (ei, &e) in idx.iter().enumerate() {
                        m[ci * k + ei] = self.c[(a * d + e) * d + c];
                    }
                }
                m
            })
            .collect();
        Some(DenseMatrix::from_fn(k, k, |p, q| {
            let (la, lb) = (&restricted[p], &restricted[q]);
            let mut t = 0.0;
            for c in 0..k {
                for e in 0..k {
                    t += la[c * k + e] * lb[e * k + c];
                }
            }
            t
        }))
    }

    /// Nonzero constants above `threshold` as `(a, b, c, value)`.
    pub fn nonzeros(&self, threshold: f64) -> Vec<(usize, usize, usize, f64)> {
        let d = self.dim;
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let v = self.get(a, b, c);
                    if v.abs() > threshold {
                        out.push((a, b, c, v));
                    }
                }
            }
        }
        out
    }
}

#[derive(Serialize)]
struct NonzeroJson {
    a: String,
    b: String,
    c: String,
    value: f64,
}

impl Serialize for StructureConstants {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let nonzeros: Vec<NonzeroJson> = self
            .nonzeros(1e-12)
            .into_iter()
            .map(|(a, b, c, value)| NonzeroJson {
                a: self.labels[a].to_string(),
                b: self.labels[b].to_string(),
                c: self.labels[c].to_string(),
                value,
            })
            .collect();
        let labels: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        let mut st = s.serialize_struct("StructureConstants", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("labels", &labels)?;
        st.serialize_field("nonzeros", &nonzeros)?;
        st.end()
    }
}

/// Matrix of `ad x` in the labeled basis.
#[derive(Debug, Clone, Serialize)]
pub struct AdjointMatrix {
    pub element_label: Option<String>,
    pub matrix: DenseMatrix,
}

/// Builds `ad x` column by column from explicit commutators.
pub fn adjoint(basis: &StochasticBasis, x: &DenseMatrix) -> Result<AdjointMatrix> {
    let n = basis.n;
    if x.shape() != (n, n) {
        return Err(Error::Shape {
            op: "adjoint",
            left: (n, n),
            right: x.shape(),
        });
    }
    let leak = x.row_sums().norm();
    if leak > 1e-10 * x.frobenius_norm().max(1.0) {
        return Err(Error::domain(format!(
            "element is not in 𝔰(n): ‖x·𝟏‖ = {leak:e}"
        )));
    }
    let d = basis.dim();
    let mut m = DenseMatrix::zeros(d, d);
    for (b, e) in basis.elements().iter().enumerate() {
        let col = basis.coords(&commutator(x, &e.matrix)?)?;
        for (c, v) in col.into_iter().enumerate() {
            m[(c, b)] = v;
        }
    }
    let element_label = basis
        .elements()
        .iter()
        .find(|e| (&e.matrix - x).max_abs() == 0.0)
        .map(|e| e.label.to_string());
    Ok(AdjointMatrix {
        element_label,
        matrix: m,
    })
}

/// Gram matrix of the Killing form of 𝔩 on `{A_ij} ∪ {H_k}`.
#[derive(Debug, Clone)]
pub struct KillingGram {
    pub n: usize,
    pub labels: Vec<Label>,
    /// `None` when 𝔩 = 0 (n = 2).
    pub gram: Option<DenseMatrix>,
    pub predicted: Option<DenseMatrix>,
    pub max_deviation: f64,
}

impl KillingGram {
    pub fn is_trivial(&self) -> bool {
        self.gram.is_none()
    }

    pub fn value(&self, a: Label, b: Label) -> Option<f64> {
        let ia = self.labels.iter().position(|l| *l == a)?;
        let ib = self.labels.iter().position(|l| *l == b)?;
        self.gram.as_ref().map(|g| g[(ia, ib)])
    }
}

/// Closed-form Killing Gram of 𝔩 in the labeled basis.
pub fn predicted_killing_gram(labels: &[Label], n: usize) -> DenseMatrix {
    let s = killing_scale(n);
    let k = labels.len();
    DenseMatrix::from_fn(k, k, |p, q| match (labels[p], labels[q]) {
        (Label::A(i, j), Label::A(k, l)) if (i, j) == (l, k) => s,
        (Label::H(a), Label::H(b)) if a == b => s,
        _ => 0.0,
    })
}

pub fn killing_form_levi(basis: &StochasticBasis) -> Result<KillingGram> {
    killing_form_levi_from(basis, &structure_constants(basis)?)
}

pub fn killing_form_levi_from(basis: &StochasticBasis, sc: &StructureConstants) -> Result<KillingGram> {
    let labels: Vec<Label> = basis.labels()[basis.levi_range()].to_vec();
    let gram = sc.trace_form(basis.levi_range());
    let predicted = gram.as_ref().map(|_| predicted_killing_gram(&labels, basis.n));
    let max_deviation = match (&gram, &predicted) {
        (Some(g), Some(p)) => (g - p).max_abs(),
        _ => 0.0,
    };
    Ok(KillingGram {
        n: basis.n,
        labels,
        gram,
        predicted,
        max_deviation,
    })
}

/// Trace form over all of 𝔰(n,ℝ); degenerate along the radical.
pub fn killing_form_full(sc: &StructureConstants) -> DenseMatrix {
    sc.trace_form(0..sc.dim())
        .expect("𝔰(n) is never zero-dimensional")
}

#[derive(Serialize)]
struct KillingEntryJson {
    a: String,
    b: String,
    computed: f64,
    predicted: f64,
}

impl Serialize for KillingGram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut entries = Vec::new();
        if let (Some(g), Some(p)) = (&self.gram, &self.predicted) {
            for a in 0..self.labels.len() {
                for b in 0..self.labels.len() {
                    if p[(a, b)] != 0.0 || g[(a, b)].abs() > 1e-9 {
                        entries.push(KillingEntryJson {
                            a: self.labels[a].to_string(),
                            b: self.labels[b].to_string(),
                            computed: g[(a, b)],
                            predicted: p[(a, b)],
                        });
                    }
                }
            }
        }
        let labels: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        let mut st = s.serialize_struct("KillingGram", 5)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("trivial", &self.is_trivial())?;
        st.serialize_field("labels", &labels)?;
        st.serialize_field("max_deviation", &self.max_deviation)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

/// Nondegeneracy threshold: `σ_min > NONDEGENERACY_RATIO · σ_max`.
pub const NONDEGENERACY_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SemisimplicityCertificate {
    pub n: usize,
    pub dim_levi: usize,
    /// 𝔩 = 0: semisimple for want of anything to check.
    pub vacuous: bool,
    pub semisimple: bool,
    pub determinant: f64,
    /// `(−1)^{(n−1)(n−2)/2} (2(n−1))^{dim 𝔩}`.
    pub predicted_determinant: f64,
    pub min_singular_value: f64,
    pub max_singular_value: f64,
    pub predicted_singular_value: f64,
}

pub fn verify_semisimplicity(gram: &KillingGram, tol: Tolerance) -> Result<SemisimplicityCertificate> {
    let n = gram.n;
    let Some(g) = &gram.gram else {
        return Ok(SemisimplicityCertificate {
            n,
            dim_levi: 0,
            vacuous: true,
            semisimple: true,
            determinant: 1.0,
            predicted_determinant: 1.0,
            min_singular_value: 0.0,
            max_singular_value: 0.0,
            predicted_singular_value: killing_scale(n),
        });
    };
    let sv = g.singular_values();
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    let dim = g.rows();
    let transpositions = (n - 1) * (n - 2) / 2;
    let sign = if transpositions % 2 == 0 { 1.0 } else { -1.0 };
    Ok(SemisimplicityCertificate {
        n,
        dim_levi: dim,
        vacuous: false,
        semisimple: min > NONDEGENERACY_RATIO * max && min > tol.abs_eps,
        determinant: g.determinant()?,
        predicted_determinant: sign * killing_scale(n).powi(dim as i32),
        min_singular_value: min,
        max_singular_value: max,
        predicted_singular_value: killing_scale(n),
    })
}
