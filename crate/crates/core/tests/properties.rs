//! Algebraic and Hodge-theoretic invariants as property tests.

use bchodge::classify::classify_metric;
use bchodge::cohomology::{cohomology, duality_matrix, hyperplane_well_definedness, Lefschetz, Theory};
use bchodge::linalg::rank;
use bchodge::{fixtures, Bidegree, Complex, Form, FormSpace, HermitianMetric, Hodge, LieModel, OperatorKind};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, b: Bidegree) -> Form {
    let v: Vec<Complex> = (0..b.dim(n)).map(|_| gaussian(rng)).collect();
    Form::from_vector(n, b, &v)
}

fn model(i: usize) -> LieModel {
    fixtures::all().swap_remove(i % fixtures::NAMES.len())
}

fn unimodular(i: usize) -> LieModel {
    let mut all = fixtures::unimodular();
    let k = i % all.len();
    all.swap_remove(k)
}

fn bidegree(n: usize, p: usize, q: usize) -> Bidegree {
    Bidegree::new(p % (n + 1), q % (n + 1))
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn wedge_is_associative_and_graded_commutative(seed: u64, b in prop::array::uniform6(0usize..2)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let x = random_form(&mut rng, n, Bidegree::new(b[0], b[1]));
        let y = random_form(&mut rng, n, Bidegree::new(b[2], b[3]));
        let z = random_form(&mut rng, n, Bidegree::new(b[4], b[5]));
        let lhs = x.wedge(&y).wedge(&z);
        let rhs = x.wedge(&y.wedge(&z));
        prop_assert!(lhs.sub(&rhs).coeff_norm() < 1e-10 * lhs.coeff_norm().max(1.0));
        let sign = if (x.bidegree().degree() * y.bidegree().degree()).is_multiple_of(2) { 1.0 } else { -1.0 };
        let swapped = y.wedge(&x).scale_real(sign);
        prop_assert!(x.wedge(&y).sub(&swapped).coeff_norm() < 1e-10 * swapped.coeff_norm().max(1.0));
    }

    #[test]
    fn conjugation_exchanges_del_and_delbar(seed: u64, i in 0usize..6, p in 0usize..4, q in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = model(i);
        let b = bidegree(m.n(), p, q);
        let u = random_form(&mut rng, m.n(), b);
        let lhs = m.del(&u).conjugate();
        let rhs = m.delbar(&u.conjugate());
        prop_assert!(lhs.sub(&rhs).coeff_norm() < 1e-10 * lhs.coeff_norm().max(1.0));
    }

    #[test]
    fn star_squares_to_sign(seed: u64, n in 1usize..4, p in 0usize..4, q in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = HermitianMetric::random(n, &mut rng);
        let b = bidegree(n, p, q);
        let u = random_form(&mut rng, n, b);
        let twice = g.star_form(&g.star_form(&u));
        let sign = if b.degree().is_multiple_of(2) { 1.0 } else { -1.0 };
        prop_assert!(twice.sub(&u.scale_real(sign)).coeff_norm() < 1e-9 * u.coeff_norm());
    }

    #[test]
    fn gram_adjoint_is_an_adjoint(seed: u64, i in 0usize..6, p in 0usize..4, q in 0usize..4, kind in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = model(i);
        let n = m.n();
        let g = HermitianMetric::random(n, &mut rng);
        let b = bidegree(n, p, q);
        let kind = [OperatorKind::Del, OperatorKind::Delbar, OperatorKind::DelDelbar][kind];
        let op = m.operator(kind, &FormSpace::single(n, b));
        prop_assume!(op.codomain.dim() > 0);
        let u = random_form(&mut rng, n, b);
        let v = op.codomain.form(&DVector::from_fn(op.codomain.dim(), |_, _| gaussian(&mut rng)));
        let au = op.apply_single(&u).unwrap();
        let star = g.adjoint(&op);
        let astar_v = star.apply_single(&v).unwrap();
        let lhs = g.inner(&au, &v);
        let rhs = g.inner(&u, &astar_v);
        prop_assert!((lhs - rhs).norm() < 1e-9 * (g.norm(&u) * g.norm(&v)).max(1.0) * op.norm().max(1.0));
    }

    #[test]
    fn laplacians_are_self_adjoint_and_nonnegative(seed: u64, i in 0usize..6, p in 0usize..4, q in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = model(i);
        let g = HermitianMetric::random(m.n(), &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let b = bidegree(m.n(), p, q);
        for lap in [h.laplacian_bc(b), h.laplacian_a(b)] {
            let w = g.whitened(&lap);
            let scale = w.norm().max(1.0);
            prop_assert!((&w - w.adjoint()).norm() < 1e-9 * scale);
            let herm = (&w + w.adjoint()) * Complex::new(0.5, 0.0);
            prop_assert!(bchodge::linalg::min_eigenvalue(&herm) > -1e-9 * scale);
        }
    }

    #[test]
    fn del_adjoint_is_minus_star_delbar_star(seed: u64, i in 0usize..4, p in 0usize..4, q in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = unimodular(i);
        let n = m.n();
        let g = HermitianMetric::random(n, &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let b = bidegree(n, p, q);
        prop_assume!(b.p < n);
        let src = FormSpace::single(n, Bidegree::new(b.p + 1, b.q));
        let via_star = g.star(&src)
            .then(&m.operator(OperatorKind::Delbar, &FormSpace::single(n, Bidegree::new(n - b.q, n - b.p - 1))))
            .then(&g.star(&FormSpace::single(n, Bidegree::new(n - b.q, n - b.p))))
            .scale(Complex::new(-1.0, 0.0));
        let direct = h.del_star(b.p as isize + 1, b.q as isize);
        let scale = direct.norm().max(1.0);
        prop_assert!((via_star.matrix - direct.matrix).norm() < 1e-9 * scale);
    }

    #[test]
    fn star_carries_bott_chern_harmonics_to_aeppli(seed: u64, i in 0usize..4, p in 0usize..4, q in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = unimodular(i);
        let n = m.n();
        let g = HermitianMetric::random(n, &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let b = bidegree(n, p, q);
        let bc = cohomology(&h, Theory::BottChern, b).unwrap();
        let target = Bidegree::new(n - b.q, n - b.p);
        let a = cohomology(&h, Theory::Aeppli, target).unwrap();
        prop_assert_eq!(bc.dim(), a.dim());
        let lap = h.laplacian_a(target);
        for u in bc.harmonic.forms() {
            let image = lap.apply_single(&g.star_form(&u)).unwrap();
            prop_assert!(image.coeff_norm() < 1e-8 * lap.norm().max(1.0) * u.coeff_norm().max(1.0));
        }
    }

    #[test]
    fn duality_pairing_is_nondegenerate(seed: u64, i in 0usize..4, p in 0usize..4, q in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = unimodular(i);
        let n = m.n();
        let g = HermitianMetric::random(n, &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let b = bidegree(n, p, q);
        let bc = cohomology(&h, Theory::BottChern, b).unwrap();
        let a = cohomology(&h, Theory::Aeppli, Bidegree::new(n - b.p, n - b.q)).unwrap();
        prop_assert_eq!(bc.dim(), a.dim());
        let d = duality_matrix(&h, &bc, &a).unwrap();
        prop_assert_eq!(rank(&d, Some(1e-8)), bc.dim());
    }

    #[test]
    fn lambda_is_linear_and_vanishes_on_primitive_part(seed: u64, which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = [fixtures::torus(2), fixtures::torus(3), fixtures::kodaira_thurston()][which].clone();
        let g = HermitianMetric::random(m.n(), &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let lf = Lefschetz::new(&h).unwrap();
        let dim = lf.space().dim();
        let x = DVector::from_fn(dim, |_, _| gaussian(&mut rng));
        let y = DVector::from_fn(dim, |_, _| gaussian(&mut rng));
        let (s, t) = (gaussian(&mut rng), gaussian(&mut rng));
        let lam = |v: DVector<Complex>| lf.decompose(&lf.space().class_from_coords(v)).unwrap();
        let combined = lam(&x * s + &y * t).lambda_formula;
        let expected = lam(x.clone()).lambda_formula * s + lam(y).lambda_formula * t;
        prop_assert!((combined - expected).norm() < 1e-9 * expected.norm().max(1.0));
        let d = lam(x);
        let prim = lf.space().class_from_coords(d.primitive.clone());
        prop_assert!(lf.decompose(&prim).unwrap().lambda_formula.norm() < 1e-9 * d.lambda_formula.norm().max(1.0));
    }

    #[test]
    fn classification_is_scale_invariant(seed: u64, i in 0usize..6, c in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = model(i);
        let g = HermitianMetric::random(m.n(), &mut rng);
        let scaled = HermitianMetric::new("scaled", g.h() * Complex::new(c, 0.0)).unwrap();
        let a = classify_metric(&Hodge::new(&m, &g).unwrap(), false);
        let b = classify_metric(&Hodge::new(&m, &scaled).unwrap(), false);
        prop_assert_eq!(
            [a.kahler, a.balanced, a.gauduchon, a.strongly_gauduchon, a.skt, a.hermitian_symplectic],
            [b.kahler, b.balanced, b.gauduchon, b.strongly_gauduchon, b.skt, b.hermitian_symplectic]
        );
    }

    #[test]
    fn hyperplane_map_ignores_representative(seed: u64, which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = [fixtures::torus(2), fixtures::torus(3), fixtures::kodaira_thurston()][which].clone();
        let n = m.n();
        let g = HermitianMetric::random(n, &mut rng);
        let h = Hodge::new(&m, &g).unwrap();
        let phi = random_form(&mut rng, n, Bidegree::new(n - 2, n - 2));
        prop_assert!(hyperplane_well_definedness(&h, &phi).unwrap() < 1e-9);
        // ∫Γ∧ω only sees the Aeppli class of ω.
        let alpha = random_form(&mut rng, n, Bidegree::new(1, 0));
        let shifted = g.omega().add(&m.del(&alpha.conjugate()).add(&m.delbar(&alpha)));
        let lf = Lefschetz::new(&h).unwrap();
        for class in lf.space().harmonic.forms() {
            let a = class.wedge(g.omega()).integral();
            let b = class.wedge(&shifted).integral();
            prop_assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        }
    }
}

