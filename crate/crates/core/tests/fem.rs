use fichera::eigen::{solve, EigenConfig};
use fichera::fem::eval::FeFunction;
use fichera::fem::{assemble, Assembler, BasisSpec, Space};
use fichera::geometry::{BcKind, BcMap, Geometry2D, GradingSpec, Truncation};
use fichera::mesh::guide::build_guide_mesh;
use fichera::mesh::simple::{rectangle, uniform_breaks, TAG_BOTTOM, TAG_LEFT, TAG_RIGHT, TAG_TOP};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_neumann() -> BcMap {
    [TAG_LEFT, TAG_RIGHT, TAG_BOTTOM, TAG_TOP]
        .iter()
        .map(|t| (t.to_string(), BcKind::Neumann))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_functions_are_reproduced_and_have_no_energy_against_constants(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        c in -3.0f64..3.0,
        p in 1usize..6,
    ) {
        let g = Geometry2D::rounded(1.5, Truncation::Mix);
        let mesh = build_guide_mesh(&g, &GradingSpec::new(2, 0.2), 1).unwrap();
        let space = Space::new(&mesh, p).unwrap();
        let f = |x: [f64; 3]| a + b * x[0] + c * x[1];
        let u: Vec<f64> = space.coords.iter().map(|&x| f(x)).collect();
        let fe = FeFunction::new(&mesh, &space, &u).unwrap();
        for x in [[-0.5, -0.5, 0.0], [1.2, -0.3, 0.0], [-0.9, 0.7, 0.0]] {
            prop_assert!((fe.at(x).unwrap().value - f(x)).abs() < 1e-10);
        }
        let full = Assembler::new(&mesh, &space, BasisSpec::new(p)).unwrap()
            .components(None).unwrap().combine(None).unwrap();
        let ones = vec![1.0; u.len()];
        let ku = full.k.apply(&u);
        let e: f64 = ku.iter().zip(&ones).map(|(x, y)| x * y).sum();
        prop_assert!(e.abs() < 1e-10);
    }

    #[test]
    fn mass_matrix_is_positive_on_random_vectors(seed in 0u64..1000, p in 1usize..5) {
        let b = uniform_breaks(0.0, 1.0, 3);
        let mesh = rectangle(&b, &b, all_neumann()).unwrap();
        let (_, sys) = assemble(&mesh, BasisSpec::new(p), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..sys.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        prop_assert!(sys.m.quad_form(&v) > 0.0);
        prop_assert!(sys.k.quad_form(&v) >= -1e-12);
    }

    #[test]
    fn shifting_the_pencil_shifts_the_spectrum(c in 0.0f64..50.0) {
        let b = uniform_breaks(-1.0, 0.0, 2);
        let mut bc = all_neumann();
        bc.insert(TAG_LEFT.into(), BcKind::Dirichlet);
        bc.insert(TAG_BOTTOM.into(), BcKind::Dirichlet);
        let mesh = rectangle(&b, &b, bc).unwrap();
        let (_, sys) = assemble(&mesh, BasisSpec::new(6), None).unwrap();
        let cfg = EigenConfig::with_count(3);
        let base = solve(&sys, &cfg).unwrap().values;
        let shifted = solve(&sys.shifted(c), &cfg).unwrap().values;
        for (x, y) in base.iter().zip(&shifted) {
            prop_assert!((y - x - c).abs() < 1e-8 * y);
        }
    }
}
