//! Root decomposition of 𝔩 with respect to the Cartan subalgebra ℋ,
//! Cartan matrix, Dynkin type, and the representation `φ₁(y) = M₁ᵀ y M₁`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::basis::{off_diagonal_pairs, Label, SimplexFrame, StochasticBasis};
use crate::error::{Error, Result};
use crate::linalg::{commutator, dot, DenseMatrix, DenseVector, Tolerance};

/// Integer rounding tolerance for Cartan entries.
pub const CARTAN_ROUNDING: f64 = 1e-6;

/// `α_ij` evaluated on `H_1…H_{n−2}`: `α_ij(H_k) = γ_i^k − γ_j^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Root {
    pub i: usize,
    pub j: usize,
    pub values: Vec<f64>,
}

impl Root {
    pub fn inner(&self, other: &Root) -> f64 {
        dot(&self.values, &other.values)
    }

    pub fn label(&self) -> String {
        if self.i < 10 && self.j < 10 {
            format!("α{}{}", self.i, self.j)
        } else {
            format!("α{},{}", self.i, self.j)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootSystem {
    pub n: usize,
    pub roots: Vec<Root>,
    /// `α_12, α_23, …, α_{(n−2)(n−1)}`.
    pub simple: Vec<Root>,
    pub cartan_matrix: Vec<Vec<i64>>,
}

pub fn compute_roots(basis: &StochasticBasis) -> Result<RootSystem> {
    let n = basis.n;
    let gamma = basis.gamma.as_ref().ok_or(Error::TrivialLevi(n))?;
    let root = |i: usize, j: usize| Root {
        i,
        j,
        values: gamma.row(i).iter().zip(gamma.row(j)).map(|(a, b)| a - b).collect(),
    };
    let roots: Vec<Root> = off_diagonal_pairs(n).map(|(i, j)| root(i, j)).collect();
    let simple: Vec<Root> = (1..n - 1).map(|i| root(i, i + 1)).collect();
    let cartan_matrix = cartan_matrix(&simple)?;
    Ok(RootSystem {
        n,
        roots,
        simple,
        cartan_matrix,
    })
}

/// `C[p][q] = 2⟨α_p, α_q⟩ / ⟨α_p, α_p⟩`, rounded to integers.
pub fn cartan_matrix(simple: &[Root]) -> Result<Vec<Vec<i64>>> {
    simple
        .iter()
        .map(|a| {
            let aa = a.inner(a);
            simple
                .iter()
                .map(|b| {
                    let x = 2.0 * a.inner(b) / aa;
                    let r = x.round();
                    if (x - r).abs() > CARTAN_ROUNDING {
                        Err(Error::Consistency(format!(
                            "Cartan entry ({}, {}) = {x} is not an integer",
                            a.label(),
                            b.label()
                        )))
                    } else {
                        Ok(r as i64)
                    }
                })
                .collect()
        })
        .collect()
}

/// Standard Cartan matrix of `A_k`.
pub fn type_a_cartan(k: usize) -> Vec<Vec<i64>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| match i.abs_diff(j) {
                    0 => 2,
                    1 => -1,
                    _ => 0,
                })
                .collect()
        })
        .collect()
}

impl RootSystem {
    pub fn root(&self, i: usize, j: usize) -> Option<&Root> {
        self.roots.iter().find(|r| r.i == i && r.j == j)
    }

    /// Coefficients of `root` in the simple roots, if they are integers.
    pub fn simple_expansion(&self, root: &Root) -> Option<Vec<i64>> {
        expansion_in(&self.simple, root)
    }

    /// Largest `|⟨α_ij, α_lm⟩ − (e_i − e_j)·(e_l − e_m)|` over all root pairs.
    pub fn inner_product_deviation(&self) -> f64 {
        let e = |i: usize, j: usize, l: usize, m: usize| {
            let d = |a: usize, b: usize| f64::from(u8::from(a == b));
            d(i, l) - d(i, m) - d(j, l) + d(j, m)
        };
        let mut worst: f64 = 0.0;
        for a in &self.roots {
            for b in &self.roots {
                worst = worst.max((a.inner(b) - e(a.i, a.j, b.i, b.j)).abs());
            }
        }
        worst
    }
}

fn expansion_in(simple: &[Root], root: &Root) -> Option<Vec<i64>> {
    let k = simple.len();
    let g = DenseMatrix::from_fn(k, k, |p, q| simple[p].inner(&simple[q]));
    let rhs = DenseVector::from(simple.iter().map(|s| s.inner(root)).collect::<Vec<_>>());
    let coeffs = g.inverse().ok()?.mul_vec(&rhs).ok()?;
    let rounded: Vec<i64> = coeffs.as_slice().iter().map(|c| c.round() as i64).collect();
    let integral = coeffs
        .as_slice()
        .iter()
        .zip(&rounded)
        .all(|(c, r)| (c - *r as f64).abs() < CARTAN_ROUNDING);
    integral.then_some(rounded)
}

/// Simple roots of the positive system `{α : f(α) > 0}` for
/// `f(α) = Σ_k w_k α(H_k)`.
pub fn simple_roots_from_functional(rs: &RootSystem, weights: &[f64]) -> Result<Vec<Root>> {
    let f = |r: &Root| dot(&r.values, weights);
    if let Some(r) = rs.roots.iter().find(|r| f(r).abs() < 1e-8) {
        return Err(Error::domain(format!("functional is not regular: vanishes on {}", r.label())));
    }
    let positive: Vec<&Root> = rs.roots.iter().filter(|r| f(r) > 0.0).collect();
    let decomposable = |r: &Root| {
        positive.iter().any(|a| {
            positive.iter().any(|b| {
                r.values
                    .iter()
                    .zip(a.values.iter().zip(&b.values))
                    .all(|(x, (y, z))| (x - y - z).abs() < 1e-9)
            })
        })
    };
    Ok(positive
        .iter()
        .filter(|r| !decomposable(r))
        .map(|r| (*r).clone())
        .collect())
}

/// A regular functional with no special alignment to the Helmert frame.
pub fn generic_weights(n: usize) -> Vec<f64> {
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    (0..n.saturating_sub(2))
        .map(|k| {
            let p = PRIMES[k % PRIMES.len()] + (k / PRIMES.len()) as f64 * 41.0;
            if k % 2 == 0 { p.sqrt() } else { -p.sqrt() }
        })
        .collect()
}

/// Whether `b = P a Pᵀ` for some permutation `P`.
pub fn cartan_equivalent(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    fn extend(a: &[Vec<i64>], b: &[Vec<i64>], perm: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let k = perm.len();
        if k == a.len() {
            return true;
        }
        for cand in 0..a.len() {
            if used[cand] {
                continue;
            }
            let fits = (0..k).all(|p| a[k][p] == b[cand][perm[p]] && a[p][k] == b[perm[p]][cand])
                && a[k][k] == b[cand][cand];
            if fits {
                used[cand] = true;
                perm.push(cand);
                if extend(a, b, perm, used) {
                    return true;
                }
                perm.pop();
                used[cand] = false;
            }
        }
        false
    }
    a.len() == b.len() && extend(a, b, &mut Vec::new(), &mut vec![false; a.len()])
}

#[derive(Debug, Clone, Serialize)]
pub struct DynkinEdge {
    pub a: usize,
    pub b: usize,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynkinDiagram {
    pub node_count: usize,
    pub node_labels: Vec<String>,
    pub edges: Vec<DynkinEdge>,
    pub detected_type: String,
    pub cartan_matrix: Vec<Vec<i64>>,
    /// Node order along the path when the type is A.
    pub path: Option<Vec<usize>>,
}

pub fn detect_dynkin(rs: &RootSystem) -> DynkinDiagram {
    let labels = rs.simple.iter().map(Root::label).collect();
    dynkin_from_cartan(&rs.cartan_matrix, labels)
}

/// Builds the diagram from a Cartan matrix; only simple paths (type A) are
/// recognized.
pub fn dynkin_from_cartan(cartan: &[Vec<i64>], node_labels: Vec<String>) -> DynkinDiagram {
    let k = cartan.len();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let m = cartan[a][b] * cartan[b][a];
            if m != 0 {
                edges.push(DynkinEdge { a, b, multiplicity: m });
            }
        }
    }
    let path = type_a_path(cartan, &edges);
    let detected_type = match &path {
        Some(_) => format!("A_{k}"),
        None => "unrecognized".to_string(),
    };
    DynkinDiagram {
        node_count: k,
        node_labels,
        edges,
        detected_type,
        cartan_matrix: cartan.to_vec(),
        path,
    }
}

fn type_a_path(cartan: &[Vec<i64>], edges: &[DynkinEdge]) -> Option<Vec<usize>> {
    let k = cartan.len();
    if k == 0 || (0..k).any(|i| cartan[i][i] != 2) {
        return None;
    }
    let simply_laced = edges
        .iter()
        .all(|e| e.multiplicity == 1 && cartan[e.a][e.b] == -1 && cartan[e.b][e.a] == -1);
    if !simply_laced || edges.len() != k - 1 {
        return None;
    }
    let mut adj = vec![Vec::new(); k];
    for e in edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    if adj.iter().any(|a| a.len() > 2) {
        return None;
    }
    let start = (0..k).find(|&i| adj[i].len() <= 1)?;
    let mut path = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&next) = adj[cur].iter().find(|&&x| x != prev) {
        path.push(next);
        prev = cur;
        cur = next;
    }
    (path.len() == k).then_some(path)
}

impl DynkinDiagram {
    /// Two-line ASCII picture: `o` nodes joined by `—`, labels underneath.
    pub fn ascii(&self) -> String {
        let order: Vec<usize> = self.path.clone().unwrap_or_else(|| (0..self.node_count).collect());
        let width = self
            .node_labels
            .iter()
            .map(|l| l.chars().count())
            .max()
            .unwrap_or(1)
            + 2;
        let mut nodes = String::new();
        let mut labels = String::new();
        for (pos, &i) in order.iter().enumerate() {
            let last = pos + 1 == order.len();
            let joined = !last && self.path.is_some();
            nodes.push('o');
            let fill = if joined { '—' } else { ' ' };
            if !last {
                nodes.extend(std::iter::repeat_n(fill, width - 1));
            }
            let label = &self.node_labels[i];
            let _ = write!(labels, "{label:<width$}");
        }
        let mut out = format!("{}\n{}", nodes, labels.trim_end());
        if self.path.is_none() {
            for e in &self.edges {
                let _ = write!(
                    out,
                    "\n{} —({})— {}",
                    self.node_labels[e.a], e.multiplicity, self.node_labels[e.b]
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootSpaceReport {
    pub n: usize,
    pub checked: usize,
    /// `max ‖[H_k, A_ij] − α_ij(H_k) A_ij‖_F`.
    pub max_eigen_residual: f64,
    /// `max ‖[H_k, H_l]‖_F`.
    pub max_cartan_commutator: f64,
    pub passes: bool,
}

/// Checks `ad H_k A_ij = α_ij(H_k) A_ij` and that ℋ is abelian.
pub fn root_space_check(basis: &StochasticBasis, tol: Tolerance) -> Result<RootSpaceReport> {
    let n = basis.n;
    let rs = compute_roots(basis)?;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for root in &rs.roots {
        let a = basis.a(root.i, root.j);
        for (k, alpha) in root.values.iter().enumerate() {
            let lhs = commutator(basis.h(k + 1), a)?;
            worst = worst.max((&lhs - &a.scaled(*alpha)).frobenius_norm());
            checked += 1;
        }
    }
    let mut cart: f64 = 0.0;
    for k in 1..n - 1 {
        for l in 1..n - 1 {
            cart = cart.max(commutator(basis.h(k), basis.h(l))?.frobenius_norm());
        }
    }
    Ok(RootSpaceReport {
        n,
        checked,
        max_eigen_residual: worst,
        max_cartan_commutator: cart,
        passes: worst < tol.abs_eps && cart < tol.abs_eps,
    })
}

/// `M = (v₀ | v₁ | … | v_{n−1})` and `M₁ = (v₁ | … | v_{n−1})`.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentationMaps {
    pub n: usize,
    pub m: DenseMatrix,
    pub m1: DenseMatrix,
}

impl RepresentationMaps {
    pub fn new(frame: &SimplexFrame) -> Result<Self> {
        let mut cols = vec![frame.v0.clone()];
        cols.extend(frame.v.iter().cloned());
        Ok(Self {
            n: frame.n,
            m: DenseMatrix::from_columns(&cols)?,
            m1: DenseMatrix::from_columns(&frame.v)?,
        })
    }

    /// `v₀`, the first column of `M`.
    pub fn v0(&self) -> DenseVector {
        self.m.column(0)
    }
}

/// Rejects matrices outside 𝔩 (nonzero row sums, column sums or trace).
fn require_levi(maps: &RepresentationMaps, x: &DenseMatrix) -> Result<()> {
    let n = maps.n;
    if x.shape() != (n, n) {
        return Err(Error::Shape {
            op: "phi1",
            left: (n, n),
            right: x.shape(),
        });
    }
    let v0 = maps.v0();
    let scale = x.frobenius_norm().max(1.0);
    let right = x.mul_vec(&v0)?.norm();
    let left = x.left_mul_vec(&v0)?.norm();
    let tr = x.trace().abs();
    if right.max(left).max(tr) > 1e-9 * scale {
        return Err(Error::domain(format!(
            "element is not in the Levi factor: ‖x v₀‖ = {right:e}, ‖v₀ᵀx‖ = {left:e}, |tr x| = {tr:e}"
        )));
    }
    Ok(())
}

/// `φ₁(x) = M₁ᵀ x M₁` for `x ∈ 𝔩`.
pub fn phi1(maps: &RepresentationMaps, x: &DenseMatrix) -> Result<DenseMatrix> {
    require_levi(maps, x)?;
    Ok(&(&maps.m1.transpose() * x) * &maps.m1)
}

/// `Mᵀ x M` for `x ∈ 𝔩`; first row and column vanish.
pub fn full_conjugation(maps: &RepresentationMaps, x: &DenseMatrix) -> Result<DenseMatrix> {
    require_levi(maps, x)?;
    Ok(&(&maps.m.transpose() * x) * &maps.m)
}

/// Ranks of `φ₁(ℋ)`, `φ₁(𝒜)` and of `φ₁` on all of 𝔩.
#[derive(Debug, Clone, Serialize)]
pub struct Phi1ImageRanks {
    pub cartan_rank: usize,
    pub cartan_images_diagonal: bool,
    pub root_rank: usize,
    pub root_images_offdiagonal: bool,
    pub total_rank: usize,
    pub dim_levi: usize,
}

pub fn phi1_image_ranks(basis: &StochasticBasis, maps: &RepresentationMaps, tol: Tolerance) -> Result<Phi1ImageRanks> {
    let hs: Vec<DenseMatrix> = (1..basis.n - 1).map(|k| phi1(maps, basis.h(k))).collect::<Result<_>>()?;
    let as_: Vec<DenseMatrix> = off_diagonal_pairs(basis.n)
        .map(|(i, j)| phi1(maps, basis.a(i, j)))
        .collect::<Result<_>>()?;
    let off_diag_max = |m: &DenseMatrix| {
        let mut w: f64 = 0.0;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if i != j {
                    w = w.max(m[(i, j)].abs());
                }
            }
        }
        w
    };
    let diag_max = |m: &DenseMatrix| (0..m.rows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let cartan_images_diagonal = hs.iter().all(|m| off_diag_max(m) < tol.abs_eps && m.trace().abs() < tol.abs_eps);
    let root_images_offdiagonal = as_.iter().all(|m| diag_max(m) < tol.abs_eps);
    let all: Vec<DenseMatrix> = as_.iter().chain(&hs).cloned().collect();
    Ok(Phi1ImageRanks {
        cartan_rank: crate::linalg::span_dimension(&hs, tol)?,
        cartan_images_diagonal,
        root_rank: crate::linalg::span_dimension(&as_, tol)?,
        root_images_offdiagonal,
        total_rank: crate::linalg::span_dimension(&all, tol)?,
        dim_levi: basis.levi_range().len(),
    })
}

/// Labels of the Levi part in basis order.
pub fn levi_labels(basis: &StochasticBasis) -> Vec<Label> {
    basis.labels()[basis.levi_range()].to_vec()
}
