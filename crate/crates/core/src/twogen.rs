//! Two generators `X = Z + Σ β_k H_k`, `Y = R₁ + Σ A_ij` of 𝔰(n,ℝ) and the
//! bracket-closure machinery that certifies they generate.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{build_basis, off_diagonal_pairs, Label, StochasticBasis};
use crate::decomp::random_algebra_element;
use crate::error::{require_n, Error, Result};
use crate::linalg::{commutator, DenseMatrix, DenseVector, OrthonormalSpan, Tolerance};
use crate::rational::{exact_rank, ExactEchelon, Rational, RationalMatrix};

/// A bracket `[g, q]` adds a direction when its residual exceeds this
/// fraction of `‖g‖_F ‖q‖_F`.
pub const ACCEPT_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaVector {
    pub m: usize,
    pub entries: Vec<Rational>,
    /// ε picked at each growth step of the construction.
    pub epsilon_choices: Vec<Rational>,
}

/// Outcome of the four exact conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GammaConditions {
    pub sum_zero: bool,
    pub nonzero: bool,
    pub distinct: bool,
    pub distinct_differences: bool,
}

impl GammaConditions {
    pub fn all(&self) -> bool {
        self.sum_zero && self.nonzero && self.distinct && self.distinct_differences
    }
}

/// (a) `Σγ = 0`, (b) `γ_i ≠ 0`, (c) `γ_i ≠ γ_j`, (d) `γ_i − γ_j ≠ γ_k − γ_ℓ` for `(i,j) ≠ (k,ℓ)`.
pub fn check_conditions(g: &[Rational]) -> GammaConditions {
    let mut values = HashSet::new();
    let mut diffs = HashSet::new();
    let distinct = g.iter().all(|x| values.insert(x.clone()));
    let mut distinct_differences = true;
    for (i, a) in g.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            if i != j && !diffs.insert(a - b) {
                distinct_differences = false;
            }
        }
    }
    GammaConditions {
        sum_zero: g.iter().cloned().sum::<Rational>().is_zero(),
        nonzero: g.iter().all(|x| !x.is_zero()),
        distinct,
        distinct_differences,
    }
}

impl GammaVector {
    pub fn conditions(&self) -> GammaConditions {
        check_conditions(&self.entries)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Rational::to_f64).collect()
    }
}

/// Builds γ ∈ ℚᵐ from `(1, −1)` by splitting the last entry into
/// `(γ_last − ε, ε)` with the first ε in `1/3, 1/5, 1/7, …` that keeps
/// (a)–(d).
pub fn construct_gamma(m: usize) -> Result<GammaVector> {
    if m < 2 {
        return Err(Error::domain(format!("γ needs at least two entries, got m = {m}")));
    }
    let mut g = vec![Rational::one(), -Rational::one()];
    let mut choices = Vec::new();
    while g.len() < m {
        let last = g.last().cloned().expect("nonempty");
        let (next, eps) = (1i64..)
            .map(|k| Rational::new(1, 2 * k + 1))
            .find_map(|eps| {
                let mut cand = g[..g.len() - 1].to_vec();
                cand.push(&last - &eps);
                cand.push(eps.clone());
                check_conditions(&cand).all().then_some((cand, eps))
            })
            .expect("only finitely many ε fail");
        g = next;
        choices.push(eps);
    }
    Ok(GammaVector {
        m,
        entries: g,
        epsilon_choices: choices,
    })
}

/// `λγ` with `λ = −1/((n−1)γ₁)`, so that `γ₁ = −1/(n−1)`.
pub fn scale_gamma(g: &GammaVector, n: usize) -> Result<GammaVector> {
    if g.m + 1 != n {
        return Err(Error::domain(format!("γ has {} entries, expected n − 1 = {}", g.m, n - 1)));
    }
    let first = g.entries.first().filter(|x| !x.is_zero()).ok_or_else(|| Error::domain("γ₁ = 0"))?;
    let lambda = (first * &Rational::from_integer((n - 1) as i64)).recip();
    let lambda = -lambda;
    Ok(GammaVector {
        m: g.m,
        entries: g.entries.iter().map(|x| x * &lambda).collect(),
        epsilon_choices: g.epsilon_choices.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorPair {
    pub n: usize,
    /// Exact γ with `γ₁ = −1/(n−1)`; `None` for n = 2.
    pub gamma: Option<GammaVector>,
    /// `√(n−1)·γ`, the multiple for which `[X, R₁] = 0`.
    pub gamma_real: Vec<f64>,
    /// `β = γᵀΓ` computed from `gamma_real`.
    pub beta: DenseVector,
    pub x: DenseMatrix,
    pub y: DenseMatrix,
}

pub fn build_generators(basis: &StochasticBasis, gamma: Option<&GammaVector>) -> Result<GeneratorPair> {
    let n = basis.n;
    let mut x = basis.z().clone();
    let mut y = basis.r(1).clone();
    let (gamma_real, beta) = match (n, gamma, &basis.gamma) {
        (2, None, _) => (Vec::new(), DenseVector::zeros(0)),
        (_, Some(g), Some(big_gamma)) if g.m + 1 == n => {
            if g.entries[0] != Rational::new(-1, (n - 1) as i64) {
                return Err(Error::domain("γ is not scaled to γ₁ = −1/(n−1)"));
            }
            let root = ((n - 1) as f64).sqrt();
            let gr: Vec<f64> = g.to_f64().into_iter().map(|v| v * root).collect();
            let beta = big_gamma.entries.left_mul_vec(&DenseVector::from(gr.clone()))?;
            for (k, b) in beta.as_slice().iter().enumerate() {
                x.axpy(*b, basis.h(k + 1));
            }
            for (i, j) in off_diagonal_pairs(n) {
                y += basis.a(i, j);
            }
            (gr, beta)
        }
        _ => {
            return Err(Error::domain(format!(
                "γ does not match n = {n} (expected {} entries)",
                n - 1
            )))
        }
    };
    Ok(GeneratorPair {
        n,
        gamma: gamma.cloned(),
        gamma_real,
        beta,
        x,
        y,
    })
}

/// Relative residuals `‖ad^k X Y − Σ (γ_i − γ_j)^k A_ij‖_F / max(1, ‖Σ…‖_F)` for `k = 1..=kmax`.
pub fn ad_power_residuals(basis: &StochasticBasis, pair: &GeneratorPair, kmax: usize) -> Result<Vec<f64>> {
    let g = &pair.gamma_real;
    let mut cur = pair.y.clone();
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        cur = commutator(&pair.x, &cur)?;
        let mut want = DenseMatrix::zeros(basis.n, basis.n);
        for (i, j) in off_diagonal_pairs(basis.n) {
            want.axpy((g[i - 1] - g[j - 1]).powi(k as i32), basis.a(i, j));
        }
        out.push((&cur - &want).frobenius_norm() / want.frobenius_norm().max(1.0));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureTrace {
    /// Span dimension after seeding and after each round.
    pub dims: Vec<usize>,
    pub final_dim: usize,
    pub bracket_count: usize,
}

fn require_square_family(generators: &[DenseMatrix]) -> Result<usize> {
    let Some(first) = generators.first() else {
        return Ok(0);
    };
    let n = first.rows();
    for g in generators {
        if !g.is_square() || g.rows() != n {
            return Err(Error::Shape {
                op: "bracket_closure",
                left: (n, n),
                right: g.shape(),
            });
        }
    }
    Ok(n)
}

/// Smallest subspace containing `generators` and closed under their `ad`.
/// Each round brackets every spanning vector against every generator.
pub fn bracket_closure(generators: &[DenseMatrix], ambient_dim: usize, tol: Tolerance) -> Result<ClosureTrace> {
    closure_impl(generators, ambient_dim, tol, false)
}

/// As [`bracket_closure`] but brackets all pairs of the current span.
pub fn bracket_closure_full(generators: &[DenseMatrix], ambient_dim: usize, tol: Tolerance) -> Result<ClosureTrace> {
    closure_impl(generators, ambient_dim, tol, true)
}

fn closure_impl(generators: &[DenseMatrix], ambient_dim: usize, tol: Tolerance, all_pairs: bool) -> Result<ClosureTrace> {
    let n = require_square_family(generators)?;
    let mut span = OrthonormalSpan::new(n * n);
    for g in generators {
        span.try_insert(g.as_slice(), ACCEPT_RATIO, tol.abs_eps);
    }
    let mut dims = vec![span.len()];
    let mut bracket_count = 0;
    while span.len() < ambient_dim {
        let snapshot: Vec<DenseMatrix> = span
            .vectors()
            .iter()
            .map(|v| DenseMatrix::new(n, n, v.clone()))
            .collect::<Result<_>>()?;
        let partners: &[DenseMatrix] = if all_pairs { &snapshot } else { generators };
        let before = span.len();
        for q in &snapshot {
            for g in partners {
                let b = commutator(g, q)?;
                bracket_count += 1;
                let scale = g.frobenius_norm() * q.frobenius_norm();
                span.try_insert_scaled(b.as_slice(), scale, ACCEPT_RATIO, tol.abs_eps);
            }
        }
        if span.len() == before {
            break;
        }
        dims.push(span.len());
    }
    Ok(ClosureTrace {
        final_dim: span.len(),
        dims,
        bracket_count,
    })
}

/// Exact analogue of [`bracket_closure`] over ℚ.
pub fn exact_bracket_closure(generators: &[RationalMatrix], ambient_dim: usize) -> ClosureTrace {
    let Some(first) = generators.first() else {
        return ClosureTrace {
            dims: vec![0],
            final_dim: 0,
            bracket_count: 0,
        };
    };
    let n = first.size();
    let mut echelon = ExactEchelon::new(n * n);
    let mut members: Vec<RationalMatrix> = Vec::new();
    for g in generators {
        if echelon.insert(g.entries()) {
            members.push(g.clone());
        }
    }
    let mut dims = vec![members.len()];
    let mut bracket_count = 0;
    while members.len() < ambient_dim {
        let before = members.len();
        for q in members.clone() {
            for g in generators {
                let b = g.commutator(&q);
                bracket_count += 1;
                if echelon.insert(b.entries()) {
                    members.push(b);
                }
            }
        }
        if members.len() == before {
            break;
        }
        dims.push(members.len());
    }
    ClosureTrace {
        final_dim: members.len(),
        dims,
        bracket_count,
    }
}

/// A rational multiple of `MᵀxM` for a labeled basis element `x`:
/// `R_i ↦ E_{0i}`, `A_ij ↦ E_ij`, `Z ↦ diag(0,1,…,1)`, `H_k ↦ diag(0, 1,…,1, −k, 0,…)`.
pub fn exact_affine_image(n: usize, label: Label) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(n);
    match label {
        Label::Z => (1..n).for_each(|i| m.set(i, i, Rational::one())),
        Label::R(i) => m.set(0, i, Rational::one()),
        Label::A(i, j) => m.set(i, j, Rational::one()),
        Label::H(k) => {
            (1..=k).for_each(|i| m.set(i, i, Rational::one()));
            m.set(k + 1, k + 1, Rational::from_integer(-(k as i64)));
        }
    }
    m
}

/// `√(n−1)·MᵀXM = diag(0, 1 + (n−1)γ)` and `MᵀYM = [[0, e₁ᵀ], [0, J − I]]`.
pub fn exact_affine_generators(n: usize, gamma: Option<&GammaVector>) -> (RationalMatrix, RationalMatrix) {
    let mut x = RationalMatrix::zeros(n);
    let mut y = RationalMatrix::unit(n, 0, 1);
    let nm1 = Rational::from_integer((n - 1) as i64);
    for i in 1..n {
        let shift = gamma.map_or_else(Rational::zero, |g| &nm1 * &g.entries[i - 1]);
        x.set(i, i, &Rational::one() + &shift);
    }
    if gamma.is_some() {
        for (i, j) in off_diagonal_pairs(n) {
            y.set(i, j, Rational::one());
        }
    }
    (x, y)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageCheck {
    pub expected_rank: usize,
    pub rank: usize,
    pub passes: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageChecks {
    /// `((γ_i − γ_j)^k)_{i≠j}`, `k = 0..m`, has rank `m`.
    pub vandermonde: StageCheck,
    /// `Y, ad X Y, …, ad^m X Y` span exactly `{R₁} ∪ {A_ij}`.
    pub root_vectors: StageCheck,
    /// `[R₁, A_1i] = R_i` recovers every `R_i`.
    pub radical: StageCheck,
    /// `[A_1j, A_j1]` gives `n − 2` independent Cartan elements.
    pub cartan: StageCheck,
}

impl StageChecks {
    pub fn named(&self) -> [(&'static str, &StageCheck); 4] {
        [
            ("vandermonde", &self.vandermonde),
            ("root_vectors", &self.root_vectors),
            ("radical", &self.radical),
            ("cartan", &self.cartan),
        ]
    }
}

fn stage(expected_rank: usize, rank: usize, extra_ok: bool, detail: String) -> StageCheck {
    StageCheck {
        expected_rank,
        rank,
        passes: rank == expected_rank && extra_ok,
        detail,
    }
}

fn staged_checks(n: usize, gamma: Option<&GammaVector>) -> StageChecks {
    let m = (n - 1) * (n - 2);
    let flat = |x: &RationalMatrix| x.entries().to_vec();

    let diffs: Vec<Rational> = match gamma {
        Some(g) => off_diagonal_pairs(n).map(|(i, j)| &g.entries[i - 1] - &g.entries[j - 1]).collect(),
        None => Vec::new(),
    };
    let vander_rank = if m == 0 {
        0
    } else {
        exact_rank(&(0..=m as i32).map(|k| diffs.iter().map(|d| d.pow(k)).collect()).collect::<Vec<_>>())
    };
    let vandermonde = stage(m, vander_rank, true, format!("{} powers of {m} differences", m + 1));

    let (x, y) = exact_affine_generators(n, gamma);
    let mut powers = vec![y.clone()];
    for _ in 0..m {
        let next = x.commutator(powers.last().expect("nonempty"));
        powers.push(next);
    }
    let mut targets = vec![exact_affine_image(n, Label::R(1))];
    targets.extend(off_diagonal_pairs(n).map(|(i, j)| exact_affine_image(n, Label::A(i, j))));
    let power_rows: Vec<Vec<Rational>> = powers.iter().map(flat).collect();
    let mut joint = power_rows.clone();
    joint.extend(targets.iter().map(flat));
    let power_rank = exact_rank(&power_rows);
    let joint_rank = exact_rank(&joint);
    let root_vectors = stage(
        m + 1,
        power_rank,
        joint_rank == m + 1,
        format!("rank with R_1 and all A_ij adjoined: {joint_rank}"),
    );

    let r1 = exact_affine_image(n, Label::R(1));
    let mut radical_rows = vec![flat(&r1)];
    let mut identities = true;
    for i in 2..n {
        let b = r1.commutator(&exact_affine_image(n, Label::A(1, i)));
        identities &= b == exact_affine_image(n, Label::R(i));
        radical_rows.push(flat(&b));
    }
    let radical = stage(
        n - 1,
        exact_rank(&radical_rows),
        identities,
        format!("[R_1, A_1i] = R_i for all i: {identities}"),
    );

    let cartan_rows: Vec<Vec<Rational>> = (2..n)
        .map(|j| {
            let b = exact_affine_image(n, Label::A(1, j)).commutator(&exact_affine_image(n, Label::A(j, 1)));
            flat(&b)
        })
        .collect();
    let diagonal = cartan_rows.iter().all(|r| {
        r.iter()
            .enumerate()
            .all(|(p, v)| v.is_zero() || (p / n == p % n && p / n != 0))
    });
    let cartan = stage(
        n - 2,
        exact_rank(&cartan_rows),
        diagonal,
        format!("images are traceless diagonal: {diagonal}"),
    );

    StageChecks {
        vandermonde,
        root_vectors,
        radical,
        cartan,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoGenerationReport {
    pub n: usize,
    pub gamma: Option<Vec<Rational>>,
    pub gamma_conditions: Option<GammaConditions>,
    pub epsilon_choices: Vec<Rational>,
    pub gamma_real: Vec<f64>,
    pub beta: DenseVector,
    pub dims_per_round: Vec<usize>,
    pub final_dim: usize,
    pub target_dim: usize,
    pub bracket_count: usize,
    pub stage_checks: StageChecks,
    pub passes: bool,
}

impl TwoGenerationReport {
    /// First failing stage as a certification error.
    pub fn require_pass(&self) -> Result<()> {
        if let Some(c) = self.gamma_conditions.filter(|c| !c.all()) {
            return Err(Error::Certification {
                stage: "gamma".into(),
                detail: format!("{c:?}"),
            });
        }
        for (name, s) in self.stage_checks.named() {
            if !s.passes {
                return Err(Error::Certification {
                    stage: name.into(),
                    detail: format!("rank {} (expected {}); {}", s.rank, s.expected_rank, s.detail),
                });
            }
        }
        if self.final_dim != self.target_dim {
            return Err(Error::Certification {
                stage: "closure".into(),
                detail: format!("closure reached {} of {}", self.final_dim, self.target_dim),
            });
        }
        Ok(())
    }
}

pub fn certify_two_generation(n: usize, tol: Tolerance) -> Result<TwoGenerationReport> {
    require_n(n)?;
    let basis = build_basis(n)?;
    let gamma = if n >= 3 {
        Some(scale_gamma(&construct_gamma(n - 1)?, n)?)
    } else {
        None
    };
    let pair = build_generators(&basis, gamma.as_ref())?;
    let target_dim = n * (n - 1);
    let trace = bracket_closure(&[pair.x.clone(), pair.y.clone()], target_dim, tol)?;
    let stage_checks = staged_checks(n, gamma.as_ref());
    let gamma_conditions = gamma.as_ref().map(GammaVector::conditions);
    let mut report = TwoGenerationReport {
        n,
        gamma: gamma.as_ref().map(|g| g.entries.clone()),
        gamma_conditions,
        epsilon_choices: gamma.map(|g| g.epsilon_choices).unwrap_or_default(),
        gamma_real: pair.gamma_real,
        beta: pair.beta,
        dims_per_round: trace.dims,
        final_dim: trace.final_dim,
        target_dim,
        bracket_count: trace.bracket_count,
        stage_checks,
        passes: false,
    };
    report.passes = report.require_pass().is_ok();
    Ok(report)
}

/// Closure of random pairs with standard normal coordinates. Evidence only.
#[derive(Debug, Clone, Serialize)]
pub struct GenericityReport {
    pub n: usize,
    pub seed: u64,
    pub final_dims: Vec<usize>,
    pub reached_full: usize,
}

pub fn random_pair_study(n: usize, pairs: usize, seed: u64, tol: Tolerance) -> Result<GenericityReport> {
    let basis = build_basis(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = basis.dim();
    let mut final_dims = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let x = random_algebra_element(&basis, &mut rng, 1.0);
        let y = random_algebra_element(&basis, &mut rng, 1.0);
        final_dims.push(bracket_closure(&[x, y], target, tol)?.final_dim);
    }
    Ok(GenericityReport {
        n,
        seed,
        reached_full: final_dims.iter().filter(|&&d| d == target).count(),
        final_dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{full_conjugation, RepresentationMaps};

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    /// Exhaustive O(m⁴) pass over index tuples.
    fn brute_force_ok(g: &[Rational]) -> bool {
        let m = g.len();
        let sum_zero = g.iter().cloned().sum::<Rational>().is_zero();
        let mut ok = sum_zero && g.iter().all(|x| !x.is_zero());
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                ok &= g[i] != g[j];
                for k in 0..m {
                    for l in 0..m {
                        if k != l && (i, j) != (k, l) {
                            ok &= &g[i] - &g[j] != &g[k] - &g[l];
                        }
                    }
                }
            }
        }
        ok
    }

    #[test]
    fn gamma_small_cases() {
        let g2 = construct_gamma(2).unwrap();
        assert_eq!(g2.entries, vec![r(1, 1), r(-1, 1)]);
        let g3 = construct_gamma(3).unwrap();
        assert_eq!(g3.entries, vec![r(1, 1), r(-4, 3), r(1, 3)]);
        assert_eq!(g3.epsilon_choices, vec![r(1, 3)]);
        assert!(construct_gamma(1).is_err());
    }

    #[test]
    fn gamma_conditions_hold_exhaustively() {
        for m in 2..=9 {
            let g = construct_gamma(m).unwrap();
            assert_eq!(g.entries.len(), m);
            assert!(g.conditions().all());
            assert!(brute_force_ok(&g.entries), "m = {m}");
        }
    }

    #[test]
    fn condition_checker_rejects_faults() {
        // 1 − 0 = 0 − (−1)
        assert!(!check_conditions(&[r(1, 1), r(0, 1), r(-1, 1)]).nonzero);
        assert!(!check_conditions(&[r(1, 1), r(0, 1), r(-1, 1)]).distinct_differences);
        assert!(!check_conditions(&[r(1, 1), r(1, 1), r(-2, 1)]).distinct);
        assert!(!check_conditions(&[r(1, 1), r(1, 1)]).sum_zero);
        let g = [r(3, 1), r(1, 1), r(-4, 1), r(0, 1)];
        assert_eq!(check_conditions(&g).all(), brute_force_ok(&g));
    }

    #[test]
    fn scaling() {
        let g = construct_gamma(2).unwrap();
        let s = scale_gamma(&g, 3).unwrap();
        assert_eq!(s.entries, vec![r(-1, 2), r(1, 2)]);
        assert_eq!(scale_gamma(&s, 3).unwrap(), s);
        for n in 3..=8 {
            let s = scale_gamma(&construct_gamma(n - 1).unwrap(), n).unwrap();
            assert_eq!(s.entries[0], r(-1, (n - 1) as i64));
            assert!(s.conditions().all());
        }
        assert!(scale_gamma(&g, 5).is_err());
    }

    fn pair(n: usize) -> (StochasticBasis, GeneratorPair) {
        let basis = build_basis(n).unwrap();
        let g = (n >= 3).then(|| scale_gamma(&construct_gamma(n - 1).unwrap(), n).unwrap());
        let p = build_generators(&basis, g.as_ref()).unwrap();
        (basis, p)
    }

    #[test]
    fn generators_cancel_r1() {
        for n in 3..=6 {
            let (b, p) = pair(n);
            assert!(commutator(&p.x, b.r(1)).unwrap().frobenius_norm() < 1e-12);
            let res = ad_power_residuals(&b, &p, 6.min(b.a_count())).unwrap();
            assert!(res.iter().all(|&e| e < 1e-8), "n = {n}: {res:?}");
        }
    }

    #[test]
    fn two_state_generators() {
        let (b, p) = pair(2);
        assert_eq!(&p.x, b.z());
        assert_eq!(&p.y, b.r(1));
        assert!(build_generators(&b, Some(&construct_gamma(2).unwrap())).is_err());
    }

    #[test]
    fn unscaled_gamma_is_rejected() {
        let b = build_basis(4).unwrap();
        assert!(build_generators(&b, Some(&construct_gamma(3).unwrap())).is_err());
        assert!(build_generators(&b, None).is_err());
    }

    #[test]
    fn closure_examples() {
        let tol = Tolerance::default();
        let b = build_basis(4).unwrap();
        assert_eq!(bracket_closure(&[b.z().clone()], 12, tol).unwrap().final_dim, 1);
        let sl2 = bracket_closure(&[b.a(1, 2).clone(), b.a(2, 1).clone()], 12, tol).unwrap();
        assert_eq!(sl2.final_dim, 3);
        let (_, p3) = pair(3);
        assert_eq!(bracket_closure(&[p3.x, p3.y], 6, tol).unwrap().final_dim, 6);
        let bad = DenseMatrix::zeros(2, 3);
        assert!(bracket_closure(&[b.z().clone(), bad], 12, tol).is_err());
    }

    #[test]
    fn closure_dims_increase() {
        for n in 2..=6 {
            let (_, p) = pair(n);
            let t = bracket_closure(&[p.x, p.y], n * (n - 1), Tolerance::default()).unwrap();
            assert!(t.dims.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(t.final_dim, n * (n - 1));
        }
    }

    #[test]
    fn full_pairs_closure_agrees() {
        for n in 2..=4 {
            let (_, p) = pair(n);
            let gens = [p.x, p.y];
            let a = bracket_closure(&gens, n * (n - 1), Tolerance::default()).unwrap();
            let b = bracket_closure_full(&gens, n * (n - 1), Tolerance::default()).unwrap();
            assert_eq!(a.final_dim, b.final_dim);
        }
    }

    #[test]
    fn exact_images_match_conjugation() {
        for n in 3..=6 {
            let b = build_basis(n).unwrap();
            let maps = RepresentationMaps::new(&b.frame).unwrap();
            for e in b.elements() {
                let img = exact_affine_image(n, e.label);
                let numeric = if matches!(e.label, Label::Z | Label::R(_)) {
                    &(&maps.m.transpose() * &e.matrix) * &maps.m
                } else {
                    full_conjugation(&maps, &e.matrix).unwrap()
                };
                // proportional with a positive factor
                let want = DenseMatrix::new(n, n, img.to_f64()).unwrap();
                let s = numeric.frobenius_norm() / want.frobenius_norm();
                assert!((&numeric - &want.scaled(s)).max_abs() < 1e-12, "{}", e.label);
            }
        }
    }

    #[test]
    fn exact_generators_match_numeric() {
        for n in 2..=6 {
            let (b, p) = pair(n);
            let maps = RepresentationMaps::new(&b.frame).unwrap();
            let (x, y) = exact_affine_generators(n, p.gamma.as_ref());
            let cx = (&(&maps.m.transpose() * &p.x) * &maps.m).scaled(((n - 1) as f64).sqrt());
            let cy = &(&maps.m.transpose() * &p.y) * &maps.m;
            assert!((&cx - &DenseMatrix::new(n, n, x.to_f64()).unwrap()).max_abs() < 1e-12);
            assert!((&cy - &DenseMatrix::new(n, n, y.to_f64()).unwrap()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_closure_matches_exact_oracle_on_basis_pairs() {
        let n = 3;
        let b = build_basis(n).unwrap();
        let labels = b.labels();
        for (p, &la) in labels.iter().enumerate() {
            for &lb in &labels[p + 1..] {
                let numeric = bracket_closure(&[b.get(la).clone(), b.get(lb).clone()], 6, Tolerance::default()).unwrap();
                let exact = exact_bracket_closure(&[exact_affine_image(n, la), exact_affine_image(n, lb)], 6);
                assert_eq!(numeric.dims, exact.dims, "{la}, {lb}");
            }
        }
    }

    #[test]
    fn certification_small_n() {
        for n in 2..=5 {
            let rep = certify_two_generation(n, Tolerance::default()).unwrap();
            assert!(rep.passes, "n = {n}: {:?}", rep.require_pass());
            assert_eq!(rep.final_dim, n * (n - 1));
        }
    }

    #[test]
    fn report_json_shape() {
        let rep = certify_two_generation(3, Tolerance::default()).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["gamma"][0], "-1/2");
        for key in ["epsilon_choices", "dims_per_round", "final_dim", "stage_checks"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["stage_checks"]["vandermonde"]["passes"].as_bool().unwrap());
    }
}
