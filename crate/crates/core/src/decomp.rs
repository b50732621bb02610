//! Levi decomposition `𝔰 = 𝔩 ⊕ 𝔯` and the affine block picture `MᵀSM`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::basis::{Label, StochasticBasis};
use crate::classify::RepresentationMaps;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, span_dimension, DenseMatrix, DenseVector, OrthonormalSpan, Tolerance};
use crate::structure::{
    killing_form_full, killing_form_levi_from, structure_constants, verify_semisimplicity, SemisimplicityCertificate,
    StructureConstants,
};

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub passes: bool,
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeviCertificate {
    pub n: usize,
    pub radical_labels: Vec<Label>,
    pub levi_labels: Vec<Label>,
    /// Largest 𝔩-component of `[x, r]`, `x ∈ 𝔰`, `r ∈ 𝔯`.
    pub ideal_residual: f64,
    /// `dim 𝔯, dim [𝔯,𝔯], …` down to 0.
    pub derived_series_lengths: Vec<usize>,
    pub direct_sum_rank: usize,
    /// Largest `|⟨l, r⟩_F|` between basis elements of 𝔩 and 𝔯.
    pub orthogonality_residual: f64,
    /// Largest 𝔯-component of `[l, l']`.
    pub levi_closure_residual: f64,
    pub killing_radical_dim: Option<usize>,
    pub semisimplicity: SemisimplicityCertificate,
    pub clauses: Vec<Clause>,
    pub passes: bool,
}

fn norm_of(coords: &[f64], idx: std::ops::Range<usize>) -> f64 {
    coords[idx].iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn coordinate_units(dim: usize, idx: std::ops::Range<usize>) -> Vec<Vec<f64>> {
    idx.map(|i| {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        e
    })
    .collect()
}

/// Dimensions of `V, [V,V], [[V,V],[V,V]], …` until the zero space or a
/// repeated dimension.
pub fn derived_series(sc: &StructureConstants, generators: &[Vec<f64>], tol: Tolerance) -> Vec<usize> {
    let mut current = span_of(sc.dim(), generators, tol);
    let mut dims = vec![current.len()];
    while !current.is_empty() {
        let vs = current.vectors();
        let brackets: Vec<Vec<f64>> = vs
            .iter()
            .enumerate()
            .flat_map(|(p, x)| vs[p + 1..].iter().map(move |y| sc.bracket_coords(x, y)))
            .collect();
        let next = span_of(sc.dim(), &brackets, tol);
        let stalled = next.len() == current.len();
        dims.push(next.len());
        current = next;
        if stalled {
            break;
        }
    }
    dims
}

fn span_of(dim: usize, vectors: &[Vec<f64>], tol: Tolerance) -> OrthonormalSpan {
    let mut span = OrthonormalSpan::new(dim);
    for v in vectors {
        span.try_insert(v, tol.rel_eps.max(1e-8), tol.abs_eps);
    }
    span
}

pub fn certify_levi(basis: &StochasticBasis, tol: Tolerance) -> Result<LeviCertificate> {
    let n = basis.n;
    let dim = basis.dim();
    let sc = structure_constants(basis)?;
    let rad = basis.radical_range();
    let levi = basis.levi_range();
    let labels = basis.labels();

    let mut ideal_residual: f64 = 0.0;
    for a in 0..dim {
        for r in rad.clone() {
            let coords: Vec<f64> = (0..dim).map(|c| sc.get(a, r, c)).collect();
            ideal_residual = ideal_residual.max(norm_of(&coords, levi.clone()));
        }
    }
    let mut levi_closure_residual: f64 = 0.0;
    for a in levi.clone() {
        for b in levi.clone() {
            let coords: Vec<f64> = (0..dim).map(|c| sc.get(a, b, c)).collect();
            levi_closure_residual = levi_closure_residual.max(norm_of(&coords, rad.clone()));
        }
    }
    let derived = derived_series(&sc, &coordinate_units(dim, rad.clone()), tol);
    let solvable = derived.last() == Some(&0) && derived.windows(2).all(|w| w[1] < w[0]);

    let mats: Vec<DenseMatrix> = basis.matrices().cloned().collect();
    let direct_sum_rank = span_dimension(&mats, tol)?;
    let mut orthogonality_residual: f64 = 0.0;
    for l in levi.clone() {
        for r in rad.clone() {
            orthogonality_residual = orthogonality_residual.max(frobenius_inner(&mats[l], &mats[r])?.abs());
        }
    }

    let (killing_radical_dim, killing_clause) = match radical_from_killing_with(basis, &sc, tol) {
        Ok(vs) => {
            let mut joined: Vec<Vec<f64>> = vs.iter().map(|v| v.as_slice().to_vec()).collect();
            joined.extend(coordinate_units(dim, rad.clone()));
            let union = span_of(dim, &joined, tol).len();
            let ok = vs.len() == n && union == n;
            (
                Some(vs.len()),
                Clause {
                    name: "killing_oracle",
                    passes: ok,
                    residual: None,
                    detail: format!("oracle dim {}, union with radical basis has rank {union}", vs.len()),
                },
            )
        }
        Err(e) => (
            None,
            Clause {
                name: "killing_oracle",
                passes: false,
                residual: None,
                detail: e.to_string(),
            },
        ),
    };

    let semisimplicity = verify_semisimplicity(&killing_form_levi_from(basis, &sc)?, tol)?;

    let clauses = vec![
        Clause {
            name: "ideal",
            passes: ideal_residual < tol.abs_eps,
            residual: Some(ideal_residual),
            detail: "[𝔰, 𝔯] ⊆ 𝔯".into(),
        },
        Clause {
            name: "solvable",
            passes: solvable,
            residual: None,
            detail: format!("derived series {derived:?}"),
        },
        Clause {
            name: "levi_subalgebra",
            passes: levi_closure_residual < tol.abs_eps,
            residual: Some(levi_closure_residual),
            detail: "[𝔩, 𝔩] ⊆ 𝔩".into(),
        },
        Clause {
            name: "direct_sum",
            passes: direct_sum_rank == n * (n - 1) && orthogonality_residual < tol.abs_eps,
            residual: Some(orthogonality_residual),
            detail: format!("rank {direct_sum_rank} of {}", n * (n - 1)),
        },
        killing_clause,
        Clause {
            name: "levi_semisimple",
            passes: semisimplicity.semisimple,
            residual: None,
            detail: if semisimplicity.vacuous {
                "𝔩 = 0".into()
            } else {
                format!(
                    "σ_min {:.6e}, σ_max {:.6e}",
                    semisimplicity.min_singular_value, semisimplicity.max_singular_value
                )
            },
        },
    ];
    Ok(LeviCertificate {
        n,
        radical_labels: labels[rad].to_vec(),
        levi_labels: labels[levi].to_vec(),
        ideal_residual,
        derived_series_lengths: derived,
        direct_sum_rank,
        orthogonality_residual,
        levi_closure_residual,
        killing_radical_dim,
        passes: clauses.iter().all(|c| c.passes),
        semisimplicity,
        clauses,
    })
}

/// Orthonormal coordinate basis of `{x : Tr(ad x ad y) = 0 for all y ∈ [𝔰,𝔰]}`.
pub fn radical_from_killing(basis: &StochasticBasis, tol: Tolerance) -> Result<Vec<DenseVector>> {
    radical_from_killing_with(basis, &structure_constants(basis)?, tol)
}

fn radical_from_killing_with(
    basis: &StochasticBasis,
    sc: &StructureConstants,
    tol: Tolerance,
) -> Result<Vec<DenseVector>> {
    let dim = basis.dim();
    let k = killing_form_full(sc);
    let brackets: Vec<Vec<f64>> = (0..dim)
        .flat_map(|a| (a + 1..dim).map(move |b| (a, b)))
        .map(|(a, b)| (0..dim).map(|c| sc.get(a, b, c)).collect())
        .collect();
    let derived = span_of(dim, &brackets, tol);
    // rows dᵀK for an orthonormal basis d of [𝔰,𝔰], padded to a square
    let mut b = DMatrix::<f64>::zeros(dim, dim);
    for (r, d) in derived.vectors().iter().enumerate() {
        let row = k.left_mul_vec(&DenseVector::from(d.clone()))?;
        for (c, v) in row.as_slice().iter().enumerate() {
            b[(r, c)] = *v;
        }
    }
    let svd = b.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Consistency("SVD did not return V".into()))?;
    let sigma_max = svd.singular_values.max();
    let thr = tol.threshold(sigma_max);
    if let Some(s) = svd.singular_values.iter().find(|&&s| s >= 0.1 * thr && s <= 10.0 * thr) {
        return Err(Error::Indeterminate(format!(
            "singular value {s:e} too close to the rank threshold {thr:e}"
        )));
    }
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < thr)
        .map(|(i, _)| DenseVector::from(v_t.row(i).iter().copied().collect::<Vec<_>>()))
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AffineBlockForm {
    pub n: usize,
    /// Coefficient of the normalized `Z`.
    pub beta0: f64,
    /// `β₀/√(n−1)`, the multiple of the identity in the lower block.
    pub beta0_unnormalized: f64,
    pub beta: DenseVector,
    /// `M₁ᵀ A M₁`, traceless.
    pub levi_block: DenseMatrix,
    pub conjugated: DenseMatrix,
    pub reassembly_residual: f64,
}

/// Splits `S ∈ 𝔰` as `β₀Z + Σβ_iR_i + A` via `MᵀSM = [[0, βᵀ], [0, M₁ᵀAM₁ + (β₀/√(n−1))I]]`.
pub fn affine_block_form(maps: &RepresentationMaps, s: &DenseMatrix) -> Result<AffineBlockForm> {
    let n = maps.n;
    if s.shape() != (n, n) {
        return Err(Error::Shape {
            op: "affine_block_form",
            left: (n, n),
            right: s.shape(),
        });
    }
    let leak = s.row_sums().norm();
    if leak > 1e-9 * s.frobenius_norm().max(1.0) {
        return Err(Error::domain(format!("matrix rows do not sum to zero (‖S𝟏‖ = {leak:e})")));
    }
    let c = &(&maps.m.transpose() * s) * &maps.m;
    let lower = c.block(1, 1, n - 1, n - 1);
    let shift = lower.trace() / (n - 1) as f64;
    let mut levi_block = lower;
    levi_block -= &DenseMatrix::identity(n - 1).scaled(shift);
    let beta = DenseVector::from(c.row(0)[1..].to_vec());

    let rebuilt = DenseMatrix::from_fn(n, n, |i, j| match (i, j) {
        (_, 0) => 0.0,
        (0, j) => beta[j - 1],
        (i, j) => levi_block[(i - 1, j - 1)] + if i == j { shift } else { 0.0 },
    });
    Ok(AffineBlockForm {
        n,
        beta0: shift * ((n - 1) as f64).sqrt(),
        beta0_unnormalized: shift,
        beta,
        reassembly_residual: (&rebuilt - &c).max_abs(),
        levi_block,
        conjugated: c,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupLevelReport {
    pub n: usize,
    pub elements: usize,
    pub pairs: usize,
    /// Largest `‖MᵀPM e₀ − e₀‖` relative to `max(1, ‖P‖_F)`.
    pub max_first_column_deviation: f64,
    /// Largest `‖Mᵀ(PQ)M − (MᵀPM)(MᵀQM)‖_F / (‖P‖_F‖Q‖_F)`.
    pub max_multiplicativity_residual: f64,
    pub passes: bool,
}

/// Checks that `P ↦ MᵀPM` lands in the affine group and is multiplicative on all pairs.
pub fn group_level_check(maps: &RepresentationMaps, elements: &[DenseMatrix], tol: Tolerance) -> Result<GroupLevelReport> {
    let n = maps.n;
    let mt = maps.m.transpose();
    let ones = DenseVector::ones(n);
    let mut conj = Vec::with_capacity(elements.len());
    let mut first_col: f64 = 0.0;
    for (idx, p) in elements.iter().enumerate() {
        if p.shape() != (n, n) {
            return Err(Error::Shape {
                op: "group_level_check",
                left: (n, n),
                right: p.shape(),
            });
        }
        let scale = p.frobenius_norm().max(1.0);
        let drift = (&p.mul_vec(&ones)? - &ones).norm();
        if drift > 1e-9 * scale {
            return Err(Error::domain(format!("element {idx} does not fix 𝟏 (‖P𝟏 − 𝟏‖ = {drift:e})")));
        }
        let sv = p.singular_values();
        if sv.last().copied().unwrap_or(0.0) <= 1e-12 * sv[0] {
            return Err(Error::domain(format!("element {idx} is singular")));
        }
        let c = &(&mt * p) * &maps.m;
        let mut dev = c.column(0);
        dev = &dev - &DenseVector::unit(n, 0);
        first_col = first_col.max(dev.norm() / scale);
        conj.push(c);
    }
    let mut mult: f64 = 0.0;
    let mut pairs = 0;
    for (p, cp) in elements.iter().zip(&conj) {
        for (q, cq) in elements.iter().zip(&conj) {
            let lhs = &(&mt * &(p * q)) * &maps.m;
            let r = (&lhs - &(cp * cq)).frobenius_norm() / (p.frobenius_norm() * q.frobenius_norm());
            mult = mult.max(r);
            pairs += 1;
        }
    }
    Ok(GroupLevelReport {
        n,
        elements: elements.len(),
        pairs,
        max_first_column_deviation: first_col,
        max_multiplicativity_residual: mult,
        passes: first_col < tol.threshold(1.0) && mult < tol.threshold(1.0),
    })
}

/// `Σ c_a x_a` with independent standard normal coefficients times `scale`.
pub fn random_algebra_element<R: Rng + ?Sized>(basis: &StochasticBasis, rng: &mut R, scale: f64) -> DenseMatrix {
    let c: Vec<f64> = (0..basis.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    basis.from_coords(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::linalg::expm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn maps(n: usize) -> (StochasticBasis, RepresentationMaps) {
        let b = build_basis(n).unwrap();
        let m = RepresentationMaps::new(&b.frame).unwrap();
        (b, m)
    }

    #[test]
    fn levi_certificate_passes() {
        for n in 2..=7 {
            let cert = certify_levi(&build_basis(n).unwrap(), Tolerance::default()).unwrap();
            assert!(cert.passes, "n = {n}: {:?}", cert.clauses);
            assert_eq!(cert.derived_series_lengths, vec![n, n - 1, 0]);
            assert_eq!(cert.direct_sum_rank, n * (n - 1));
            assert!(cert.ideal_residual < 1e-10);
        }
        let c5 = certify_levi(&build_basis(5).unwrap(), Tolerance::default()).unwrap();
        assert_eq!(c5.direct_sum_rank, 20);
        assert_eq!(c5.radical_labels.len(), 5);
        assert_eq!(c5.levi_labels.len(), 15);
    }

    #[test]
    fn killing_oracle_recovers_radical() {
        for n in 2..=6 {
            let vs = radical_from_killing(&build_basis(n).unwrap(), Tolerance::default()).unwrap();
            assert_eq!(vs.len(), n);
            for v in &vs {
                let levi_part: f64 = v.as_slice()[n..].iter().map(|x| x * x).sum();
                assert!(levi_part.sqrt() < 1e-9);
            }
        }
    }

    #[test]
    fn affine_block_examples() {
        let (b, m) = maps(4);
        let z = affine_block_form(&m, b.z()).unwrap();
        assert!((z.beta0 - 1.0).abs() < 1e-12);
        assert!((z.beta0_unnormalized - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(z.beta.norm() < 1e-12 && z.levi_block.max_abs() < 1e-12);

        let r1 = affine_block_form(&m, b.r(1)).unwrap();
        assert!((&r1.beta - &DenseVector::unit(3, 0)).norm() < 1e-12);
        assert!(r1.beta0.abs() < 1e-12 && r1.levi_block.max_abs() < 1e-12);

        let a12 = affine_block_form(&m, b.a(1, 2)).unwrap();
        let want = DenseMatrix::from_fn(3, 3, |i, j| if (i, j) == (0, 1) { 1.0 } else { 0.0 });
        assert!((&a12.levi_block - &want).max_abs() < 1e-12);
        assert!(a12.beta0.abs() < 1e-12 && a12.beta.norm() < 1e-12);

        assert!(affine_block_form(&m, &DenseMatrix::identity(4)).is_err());
    }

    #[test]
    fn radical_images_have_scalar_blocks() {
        let (b, m) = maps(5);
        let mut s = b.z().scaled(2.5);
        for i in 1..5 {
            s.axpy(i as f64 - 2.0, b.r(i));
        }
        let f = affine_block_form(&m, &s).unwrap();
        assert!(f.levi_block.max_abs() < 1e-12);
        assert!((f.beta0 - 2.5).abs() < 1e-12);
        assert!((f.beta0_unnormalized - 2.5 / 2.0).abs() < 1e-12);
        assert!(f.reassembly_residual < 1e-12);
    }

    #[test]
    fn reassembly_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=7 {
            let (b, m) = maps(n);
            for _ in 0..10 {
                let s = random_algebra_element(&b, &mut rng, 1.0);
                let f = affine_block_form(&m, &s).unwrap();
                assert!(f.reassembly_residual < 1e-12);
                assert!(f.levi_block.trace().abs() < 1e-12);
                assert!(f.conjugated.column(0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn group_level_examples() {
        let (b, m) = maps(3);
        let id = DenseMatrix::identity(3);
        let cycle = DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = expm(&random_algebra_element(&b, &mut rng, 0.5)).unwrap();
        let rep = group_level_check(&m, &[id.clone(), cycle, e], Tolerance::default()).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert_eq!(rep.pairs, 9);
        let c = &(&m.m.transpose() * &id) * &m.m;
        assert!((&c - &id).max_abs() < 1e-12);

        assert!(group_level_check(&m, &[id.scaled(2.0)], Tolerance::default()).is_err());
        let singular = DenseMatrix::from_fn(3, 3, |_, j| if j == 0 { 1.0 } else { 0.0 });
        assert!(group_level_check(&m, &[singular], Tolerance::default()).is_err());
    }
}
