mod common;

use common::*;
use nalgebra::DMatrix;
use ncconvex::calculus::partial_hessian_x;
use ncconvex::convexity::gram::{gram_expand, solve_gram};
use ncconvex::convexity::{decompose_convex_in_x, signature_at};
use ncconvex::freealg::rat;
use ncconvex::middlematrix::{congruence, middle_matrix_of, BorderMode};
use ncconvex::numeval::{direct_sum, eval_hessian, eval_matrixpoly, eval_poly, tensor_identity, DomainKind, DomainSpec, EvalPoint, MatrixTuple};
use ncconvex::text::parse;
use ncconvex::{Letter, LetterClass, VarCounts, Word};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const V11: VarCounts = VarCounts { ga: 1, gx: 1, gh: 1 };
const V22: VarCounts = VarCounts { ga: 2, gx: 2, gh: 2 };

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn involution_reverses_products(p in arb_poly(V22, 4, 4), q in arb_poly(V22, 4, 4)) {
        prop_assert_eq!(p.transpose().transpose(), p.clone());
        prop_assert_eq!((&p * &q).transpose(), &q.transpose() * &p.transpose());
    }

    #[test]
    fn ring_laws(p in arb_poly(V22, 3, 3), q in arb_poly(V22, 3, 3), r in arb_poly(V22, 3, 3)) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn bidegree_adds_under_products(p in arb_poly(V22, 3, 4), q in arb_poly(V22, 3, 4)) {
        prop_assume!(!p.is_zero() && !q.is_zero());
        let pq = &p * &q;
        for class in [LetterClass::A, LetterClass::X] {
            prop_assert_eq!(pq.degree(class), p.degree(class) + q.degree(class));
        }
    }

    #[test]
    fn terms_are_canonical(p in arb_poly(V22, 6, 4)) {
        let words: Vec<&Word> = p.terms().map(|(w, _)| w).collect();
        prop_assert!(words.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(p.terms().all(|(_, c)| *c != rat(0, 1)));
    }

    #[test]
    fn hessian_is_linear_and_quadratic_in_h(p in arb_poly(V22, 4, 5), q in arb_poly(V22, 4, 5)) {
        let (a, b) = (rat(3, 2), rat(-2, 1));
        let lhs = partial_hessian_x(&(&p.scale(&a) + &q.scale(&b))).unwrap();
        let hp = partial_hessian_x(&p).unwrap();
        let hq = partial_hessian_x(&q).unwrap();
        prop_assert_eq!(lhs.poly(), &(&hp.poly().scale(&a) + &hq.poly().scale(&b)));
        prop_assert!(hp.poly().terms().all(|(w, _)| w.degree(LetterClass::H) == 2));
    }

    #[test]
    fn hessian_of_symmetric_is_symmetric(p in arb_bounded_symmetric(V22, 4, 2, 3)) {
        prop_assert!(partial_hessian_x(&p).unwrap().poly().is_symmetric());
    }
}

proptest! {
    #![proptest_config(cfg(1000))]

    #[test]
    fn print_parse_round_trip(p in arb_poly(V22, 6, 5)) {
        let text = p.to_string();
        prop_assert_eq!(parse(&text, V22).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn middle_matrix_reconstructs_and_respects_block_degrees(p in arb_bounded_symmetric(V22, 4, 2, 4)) {
        prop_assume!(p.degree(LetterClass::X) >= 2);
        let q = partial_hessian_x(&p).unwrap();
        let dx = p.degree(LetterClass::X);
        for mode in [BorderMode::Reduced, BorderMode::Full] {
            let m = middle_matrix_of(&q, mode).unwrap();
            prop_assert_eq!(&m.reconstruct(), q.poly());
            prop_assert!(m.is_symmetric());
            for i in 0..m.num_blocks() {
                for j in 0..m.num_blocks() {
                    for e in m.block(i, j).entries() {
                        prop_assert!(e.is_zero() || e.degree(LetterClass::X) + i + j + 2 <= dx);
                    }
                }
            }
        }
    }

    #[test]
    fn congruence_is_exact_and_nilpotent(p in arb_bounded_symmetric(V11, 4, 2, 4), seed in any::<u64>()) {
        prop_assume!(p.degree(LetterClass::X) >= 2);
        let m = middle_matrix_of(&partial_hessian_x(&p).unwrap(), BorderMode::Reduced).unwrap();
        let data = congruence(&m).unwrap();
        prop_assert!(data.verify(&m).unwrap().all());
        prop_assert!(data.nilpotency_index() <= m.num_blocks());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = random_point(&mut rng, V11, 3, false);
        let b = eval_matrixpoly(&data.b, &pt).unwrap();
        let z = eval_matrixpoly(m.z(), &pt).unwrap();
        let d = eval_matrixpoly(m.derived().z(), &pt).unwrap();
        prop_assert!(rel_err(&(b.transpose() * z * b), &d) < 1e-8);
    }

    #[test]
    fn hessian_matches_second_difference(p in arb_bounded_symmetric(V11, 5, 2, 3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = random_point(&mut rng, V11, 3, true);
        let h = pt.h.clone().unwrap();
        let shifted = |t: f64| {
            let x = MatrixTuple::new(3, pt.x.mats().iter().zip(h.mats()).map(|(x0, hh)| x0 + hh * t).collect()).unwrap();
            eval_poly(&p, &EvalPoint::new(pt.a.clone(), x).unwrap()).unwrap()
        };
        // exact for cubic dependence on t
        let oracle = shifted(1.0) + shifted(-1.0) - shifted(0.0) * 2.0;
        let q = partial_hessian_x(&p).unwrap();
        prop_assert!(rel_err(&eval_hessian(&q, &pt).unwrap(), &oracle) < 1e-10);
    }

    #[test]
    fn evaluation_is_a_morphism(p in arb_poly(V22, 4, 4), q in arb_poly(V22, 4, 4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = random_point(&mut rng, V22, 3, false);
        let ep = eval_poly(&p, &pt).unwrap();
        let eq = eval_poly(&q, &pt).unwrap();
        prop_assert!(rel_err(&eval_poly(&(&p * &q), &pt).unwrap(), &(&ep * &eq)) < 1e-10);
        prop_assert!(rel_err(&eval_poly(&(&p + &q), &pt).unwrap(), &(&ep + &eq)) < 1e-12);
        prop_assert!(rel_err(&eval_poly(&p.transpose(), &pt).unwrap(), &ep.transpose()) < 1e-12);
    }

    #[test]
    fn direct_sums_and_tensors(p in arb_poly(V22, 4, 4), seed in any::<u64>(), l in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1 = random_point(&mut rng, V22, 2, false);
        let p2 = random_point(&mut rng, V22, 3, false);
        let (e1, e2) = (eval_poly(&p, &p1).unwrap(), eval_poly(&p, &p2).unwrap());
        let mut expect = DMatrix::zeros(5, 5);
        expect.view_mut((0, 0), (2, 2)).copy_from(&e1);
        expect.view_mut((2, 2), (3, 3)).copy_from(&e2);
        prop_assert!(rel_err(&eval_poly(&p, &direct_sum(&p1, &p2).unwrap()).unwrap(), &expect) < 1e-12);
        let t = eval_poly(&p, &tensor_identity(&p1, l).unwrap()).unwrap();
        prop_assert!(rel_err(&t, &e1.kronecker(&DMatrix::identity(l, l))) < 1e-12);
    }

    #[test]
    fn ball_samples_lie_inside(r in 0.1f64..5.0, n in 1usize..5, seed in any::<u64>()) {
        let dom = DomainSpec { a: DomainKind::NormBall { radius: r }, x: DomainKind::NormBall { radius: r } };
        let pt = dom.sample(2, 2, n, seed);
        prop_assert!(dom.contains(&pt));
    }

    #[test]
    fn x_convex_decomposition_recomposes(p in arb_bounded_symmetric(V22, 5, 2, 2)) {
        let d = decompose_convex_in_x(&p, &DomainSpec::ALL, 4, 0).unwrap();
        prop_assert!(d.residual_zero);
        prop_assert_eq!(d.recompose(), p);
        prop_assert!(d.l.degree(LetterClass::X) <= 1);
    }

    #[test]
    fn signature_counts_fill_the_matrix(p in arb_bounded_symmetric(V11, 4, 2, 3), seed in any::<u64>(), n in 1usize..4) {
        prop_assume!(p.degree(LetterClass::X) >= 2);
        let m = middle_matrix_of(&partial_hessian_x(&p).unwrap(), BorderMode::Reduced).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = random_point(&mut rng, V11, n, false);
        let c = signature_at(&p, &pt).unwrap();
        prop_assert_eq!(c.plus + c.minus + c.zero, m.len() * n);
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn gram_solutions_reproduce_sums_of_squares(
        rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..3)
    ) {
        let basis = [
            Word::new(vec![Letter::x(1)]),
            Word::new(vec![Letter::a(1)]),
            Word::new(vec![Letter::x(1), Letter::a(1)]),
            Word::new(vec![Letter::a(1), Letter::x(1)]),
        ];
        let mut target = ncconvex::NCPolynomial::zero(V11);
        for r in &rows {
            let v = ncconvex::NCPolynomial::from_terms(
                V11,
                basis.iter().cloned().zip(r.iter().map(|&c| rat(c, 1))).collect::<Vec<_>>(),
            ).unwrap();
            target = &target + &(&v.transpose() * &v);
        }
        let sol = solve_gram(&basis, &target, 1e-9).unwrap();
        prop_assert_eq!(gram_expand(&basis, &sol.matrix, V11), target);
        prop_assert!(sol.min_eig > -1e-9);
    }
}
