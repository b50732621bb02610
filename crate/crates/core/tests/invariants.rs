use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochastic_lie::basis::build_basis;
use stochastic_lie::classify::{phi1, RepresentationMaps};
use stochastic_lie::decomp::{affine_block_form, group_level_check, random_algebra_element};
use stochastic_lie::linalg::{commutator, expm};
use stochastic_lie::markov::{check_matrix, MatrixClass, ValidationTolerance};
use stochastic_lie::structure::structure_constants;
use stochastic_lie::twogen::{bracket_closure, build_generators, construct_gamma, scale_gamma};
use stochastic_lie::{DenseMatrix, Tolerance};

fn tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-10).unwrap()
}

fn stochastic(n: usize, weights: &[f64]) -> DenseMatrix {
    let mut m = DenseMatrix::from_fn(n, n, |i, j| weights[i * n + j] + 1e-3);
    for i in 0..n {
        let s: f64 = m.row(i).iter().sum();
        for j in 0..n {
            m[(i, j)] /= s;
        }
    }
    m
}

#[test]
fn group_closure_over_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for n in 2..=6 {
        let basis = build_basis(n).unwrap();
        let maps = RepresentationMaps::new(&basis.frame).unwrap();
        let elements: Vec<DenseMatrix> = (0..50)
            .map(|_| expm(&random_algebra_element(&basis, &mut rng, 0.4)).unwrap())
            .collect();
        for pair in elements.chunks(2) {
            let prod = &pair[0] * &pair[1];
            let check = check_matrix(&prod, ValidationTolerance::default()).unwrap();
            assert_ne!(check.class, MatrixClass::None, "n={n}");
            assert!(check.max_row_sum_deviation < 1e-9);
        }
        let rep = group_level_check(&maps, &elements, tol()).unwrap();
        assert!(rep.passes, "n={n}: {rep:?}");
    }
}

#[test]
fn affine_form_reassembles_algebra_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = build_basis(5).unwrap();
    let maps = RepresentationMaps::new(&basis.frame).unwrap();
    for _ in 0..10 {
        let s = random_algebra_element(&basis, &mut rng, 0.3);
        let form = affine_block_form(&maps, &s).unwrap();
        assert!(form.reassembly_residual < 1e-10);
    }
}

#[test]
fn structure_constants_close_for_generated_pair() {
    for n in 3..=5 {
        let basis = build_basis(n).unwrap();
        let gamma = scale_gamma(&construct_gamma(n - 1).unwrap(), n).unwrap();
        let pair = build_generators(&basis, Some(&gamma)).unwrap();
        let trace = bracket_closure(&[pair.x.clone(), pair.y.clone()], basis.dim(), tol()).unwrap();
        assert_eq!(trace.final_dim, n * (n - 1));
        assert!(trace.dims.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi1_is_a_homomorphism(n in 3usize..7, coeffs in prop::collection::vec(-2.0f64..2.0, 60)) {
        let basis = build_basis(n).unwrap();
        let maps = RepresentationMaps::new(&basis.frame).unwrap();
        let levi = basis.levi_range();
        let mut cx = vec![0.0; basis.dim()];
        let mut cy = vec![0.0; basis.dim()];
        for (k, i) in levi.enumerate() {
            cx[i] = coeffs[k % 30];
            cy[i] = coeffs[30 + k % 30];
        }
        let (x, y) = (basis.from_coords(&cx), basis.from_coords(&cy));
        let (px, py) = (phi1(&maps, &x).unwrap(), phi1(&maps, &y).unwrap());
        let lhs = phi1(&maps, &commutator(&x, &y).unwrap()).unwrap();
        let rhs = commutator(&px, &py).unwrap();
        let scale = (px.frobenius_norm() * py.frobenius_norm()).max(1.0);
        prop_assert!((&lhs - &rhs).frobenius_norm() < 1e-10 * scale);
    }

    #[test]
    fn brackets_stay_in_the_algebra(n in 2usize..7, cx in prop::collection::vec(-1.0f64..1.0, 42), cy in prop::collection::vec(-1.0f64..1.0, 42)) {
        let basis = build_basis(n).unwrap();
        let d = basis.dim();
        let (x, y) = (basis.from_coords(&cx[..d]), basis.from_coords(&cy[..d]));
        let b = commutator(&x, &y).unwrap();
        prop_assert!(b.row_sums().as_slice().iter().all(|s| s.abs() < 1e-12));
        let sc = structure_constants(&basis).unwrap();
        let via_table = basis.from_coords(&sc.bracket_coords(&cx[..d], &cy[..d]));
        prop_assert!((&via_table - &b).frobenius_norm() < 1e-10);
    }

    #[test]
    fn transition_products_stay_transition(n in 2usize..6, w in prop::collection::vec(0.0f64..1.0, 50)) {
        let p = stochastic(n, &w[..n * n]);
        let q = stochastic(n, &w[25..25 + n * n]);
        let class = check_matrix(&(&p * &q), ValidationTolerance::default()).unwrap().class;
        prop_assert!(matches!(class, MatrixClass::SPlus | MatrixClass::S0Plus));
    }
}
