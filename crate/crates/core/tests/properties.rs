use std::collections::BTreeMap;

use harmonic_groups_core::group::enumerate_ball;
use harmonic_groups_core::harmonic::{
    lipschitz_seminorm, liouville_growth, theta_gradient, translate_defect, verify_harmonic, AffineHarmonic,
    TestFunction,
};
use harmonic_groups_core::linalg::Matrix;
use harmonic_groups_core::measure::{convolve, drift_abelian};
use harmonic_groups_core::straighten::{
    abelian_defect, defect_at, doubling_sequence, extract_linearization, CoarseMap, DefectOptions,
    HarmonicCoordinates, LinearizeOptions, QiMapExpr, QiPrimitive, ShearKind,
};
use harmonic_groups_core::walk::{hitting_measure, induce_harmonic, WalkConfig};
use harmonic_groups_core::{ratio, Element, FiniteMeasure, GroupDescriptor, MarkedSubgroup, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn groups() -> impl Strategy<Value = GroupDescriptor> {
    prop_oneof![
        (1usize..=3).prop_map(GroupDescriptor::free_abelian),
        Just(GroupDescriptor::Heisenberg3),
        Just(GroupDescriptor::DihedralInfinite),
        Just(GroupDescriptor::product(vec![
            GroupDescriptor::DihedralInfinite,
            GroupDescriptor::free_abelian(1)
        ])),
    ]
}

fn element_of(g: &GroupDescriptor) -> BoxedStrategy<Element> {
    let c = -50i64..=50;
    match g {
        GroupDescriptor::FreeAbelian { d } => proptest::collection::vec(c, *d)
            .prop_map(|v| Element::free(&v))
            .boxed(),
        GroupDescriptor::Heisenberg3 => (c.clone(), c.clone(), c)
            .prop_map(|(x, y, z)| Element::heisenberg(x, y, z))
            .boxed(),
        GroupDescriptor::DihedralInfinite => (c, any::<bool>())
            .prop_map(|(n, f)| Element::dihedral(n, f))
            .boxed(),
        GroupDescriptor::DirectProduct { factors } => factors
            .iter()
            .map(element_of)
            .collect::<Vec<_>>()
            .prop_map(Element::Product)
            .boxed(),
    }
}

fn group_with_elements(n: usize) -> impl Strategy<Value = (GroupDescriptor, Vec<Element>)> {
    groups().prop_flat_map(move |g| {
        let e = proptest::collection::vec(element_of(&g), n);
        (Just(g), e)
    })
}

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=7).prop_map(|(n, d)| ratio(n, d))
}

fn nilpotent() -> impl Strategy<Value = GroupDescriptor> {
    prop_oneof![
        (1usize..=3).prop_map(GroupDescriptor::free_abelian),
        Just(GroupDescriptor::Heisenberg3),
    ]
}

fn affine_on(g: GroupDescriptor) -> impl Strategy<Value = AffineHarmonic<Rational>> {
    let r = g.rank();
    (rational(), proptest::collection::vec(rational(), r))
        .prop_map(move |(c, phi)| AffineHarmonic::scalar(g.clone(), c, phi).unwrap())
}

fn srw(g: &GroupDescriptor) -> FiniteMeasure {
    FiniteMeasure::simple_random_walk(g.clone(), &g.default_generators()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms((g, xs) in group_with_elements(3)) {
        let (a, b, c) = (&xs[0], &xs[1], &xs[2]);
        let ab_c = g.mul(&g.mul(a, b).unwrap(), c).unwrap();
        let a_bc = g.mul(a, &g.mul(b, c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let e = g.identity();
        prop_assert_eq!(g.mul(a, &e).unwrap(), a.clone());
        prop_assert_eq!(g.mul(&g.inverse(a).unwrap(), a).unwrap(), e);
    }

    #[test]
    fn abelianization_is_a_homomorphism((g, xs) in group_with_elements(2)) {
        let lhs = g.abelianize(&g.mul(&xs[0], &xs[1]).unwrap()).unwrap();
        let a = g.abelianize(&xs[0]).unwrap();
        let b = g.abelianize(&xs[1]).unwrap();
        let rhs: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn powers_agree_with_repeated_products((g, xs) in group_with_elements(1), n in -12i64..=12) {
        let mut acc = g.identity();
        let step = if n >= 0 { xs[0].clone() } else { g.inverse(&xs[0]).unwrap() };
        for _ in 0..n.abs() {
            acc = g.mul(&acc, &step).unwrap();
        }
        prop_assert_eq!(g.pow(&xs[0], n).unwrap(), acc);
    }

    #[test]
    fn coset_labels_are_homomorphic(v in proptest::collection::vec(-40i64..=40, 4), m in 2i64..=5) {
        let subs = [
            MarkedSubgroup::scaled(2, 1, m).unwrap(),
            MarkedSubgroup::even_sum(2).unwrap(),
        ];
        for h in &subs {
            let g = h.parent();
            let x = Element::free(&v[..2]);
            let y = Element::free(&v[2..]);
            let xy = g.mul(&x, &y).unwrap();
            let (n, t) = h.coset_decompose(&xy).unwrap();
            prop_assert_eq!(g.mul(&h.from_model(&n).unwrap(), &h.transversal()[t]).unwrap(), xy.clone());
            // Hx = Hx' forces H(xy) = H(x'y)
            let n2 = h.from_model(&Element::free(&[v[3], v[0]])).unwrap();
            let x2 = g.mul(&n2, &x).unwrap();
            prop_assert_eq!(h.label(&x2).unwrap(), h.label(&x).unwrap());
            prop_assert_eq!(h.label(&g.mul(&x2, &y).unwrap()).unwrap(), h.label(&xy).unwrap());
        }
    }

    #[test]
    fn convolution_keeps_mass_and_adds_drift(w in 1i64..=9, u in 1i64..=9) {
        let z = GroupDescriptor::free_abelian(2);
        let mu = FiniteMeasure::new(z.clone(), vec![
            (Element::free(&[1, 0]), ratio(w, 10)),
            (Element::free(&[0, -1]), ratio(10 - w, 10)),
        ]).unwrap();
        let nu = FiniteMeasure::new(z.clone(), vec![
            (Element::free(&[2, 1]), ratio(u, 10)),
            (Element::free(&[-1, 0]), ratio(10 - u, 10)),
        ]).unwrap();
        let conv = convolve(&mu, &nu).unwrap();
        let total: Rational = conv.support().iter().map(|(_, w)| w.clone()).sum();
        prop_assert_eq!(total, ratio(1, 1));
        let d = drift_abelian(&conv).unwrap().0;
        let (a, b) = (drift_abelian(&mu).unwrap().0, drift_abelian(&nu).unwrap().0);
        let sum: Vec<Rational> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(d, sum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_is_the_drift_pairing(
        f in nilpotent().prop_flat_map(affine_on),
        bias in 1i64..=5,
        pts in proptest::collection::vec(-30i64..=30, 6),
    ) {
        let g = f.group().clone();
        let lifts = g.abelian_basis_lifts();
        let mut entries = Vec::new();
        for (i, l) in lifts.iter().enumerate() {
            let w = if i == 0 { ratio(bias, 6 * lifts.len() as i64) } else { ratio(1, 2 * lifts.len() as i64) };
            entries.push((l.clone(), w.clone()));
            entries.push((g.inverse(l).unwrap(), ratio(1, lifts.len() as i64) - w));
        }
        let mu = FiniteMeasure::new(g.clone(), entries).unwrap();
        let expected = f.drift_pairing(&mu).unwrap();
        let r = g.coord_len();
        let points: Vec<Element> = pts.chunks(r).filter(|c| c.len() == r).map(|c| g.element(c).unwrap()).collect();
        let rep = verify_harmonic(&f, &mu, &points).unwrap();
        for (_, res) in rep.residuals {
            prop_assert_eq!(&res, &expected);
        }
    }

    #[test]
    fn seminorm_empirical_equals_exact(f in nilpotent().prop_flat_map(affine_on)) {
        let s = f.group().default_generators();
        let rep = lipschitz_seminorm(&f, &s, 3).unwrap();
        for v in &rep.per_radius[1..] {
            prop_assert_eq!(v, &rep.exact);
        }
    }

    #[test]
    fn gradient_recovers_phi(f in nilpotent().prop_flat_map(affine_on)) {
        let g = f.group().clone();
        let s = g.default_generators();
        let mut values = BTreeMap::new();
        values.insert(g.identity(), f.evaluate(&g.identity()).unwrap());
        for x in s.elements() {
            values.insert(x.clone(), f.evaluate(x).unwrap());
        }
        prop_assert_eq!(&theta_gradient(&values, &g, &s).unwrap(), f.phi());
    }

    #[test]
    fn affine_functions_have_no_translation_defect(
        (f, h) in nilpotent().prop_flat_map(|g| (affine_on(g.clone()), element_of(&g)))
    ) {
        let d = translate_defect(&TestFunction::Affine(f), &h, 2).unwrap();
        prop_assert!(d.is_zero());
    }

    #[test]
    fn liouville_dichotomy(f in nilpotent().prop_flat_map(affine_on)) {
        let g = f.group().clone();
        let mut any_linear = false;
        for s in g.default_generators().elements() {
            let seq = liouville_growth(&f, s, 6).unwrap();
            let linear = seq.iter().enumerate().all(|(i, v)| *v == &seq[0] * Rational::from_integer((i as i64 + 1).into()));
            prop_assert!(linear);
            any_linear |= !seq[0].is_zero();
        }
        prop_assert_eq!(any_linear, !f.is_constant());
    }

    #[test]
    fn lattice_maps_have_zero_defect(m in proptest::collection::vec(-3i64..=3, 4), t in proptest::collection::vec(-5i64..=5, 2)) {
        let psi = QiMapExpr::new(GroupDescriptor::free_abelian(2), vec![
            QiPrimitive::Translate { by: t },
            QiPrimitive::LatticeLinear { matrix: vec![m[..2].to_vec(), m[2..].to_vec()] },
        ]).unwrap();
        prop_assert!(psi.is_lattice_linear());
        prop_assert_eq!(psi.eval(&psi.source().identity()).unwrap(), psi.target().identity());
        prop_assert_eq!(abelian_defect(&psi, &DefectOptions::ball(3)).unwrap().max_defect, 0);
    }

    #[test]
    fn defect_witness_reevaluates(kind in prop_oneof![Just(ShearKind::Mod2), Just(ShearKind::SqrtFloor)], r in 2u32..=6) {
        let psi = QiMapExpr::new(GroupDescriptor::free_abelian(2), vec![QiPrimitive::Shear { axis: 1, of: 0, kind }]).unwrap();
        let rep = abelian_defect(&psi, &DefectOptions::ball(r)).unwrap();
        prop_assert!(rep.growth_curve.windows(2).all(|w| w[0].1 <= w[1].1));
        let w = rep.witness.unwrap();
        let delta = defect_at(&psi, &w.x, &w.y).unwrap();
        prop_assert_eq!(delta.iter().map(|v| v.abs()).max().unwrap(), rep.max_defect);
        prop_assert_eq!(delta, w.delta);
    }

    #[test]
    fn homogenization_cauchy_bound(x in prop_oneof![-9i64..=-1, 1i64..=9]) {
        let g = GroupDescriptor::free_abelian(1);
        let a = |y: &Element| { let n = y.coords()[0]; Ok(Rational::from_integer((n + n.rem_euclid(2)).into())) };
        let seq = doubling_sequence(a, &g, &Element::free(&[x]), 30).unwrap();
        for (k, w) in seq.windows(2).enumerate() {
            let bound = ratio(2, 1) / Rational::from_integer((1i64 << (k + 1)).into());
            prop_assert!((&w[1] - &w[0]).abs() <= bound);
        }
    }

    #[test]
    fn transported_basis_satisfies_p_l_equals_q(q in proptest::collection::vec(-4i64..=4, 4)) {
        let q = MatrixQ::from_i64_rows(&[q[..2].to_vec(), q[2..].to_vec()], 2);
        prop_assume!(q.inverse().is_some());
        let psi = QiMapExpr::new(GroupDescriptor::free_abelian(2), vec![
            QiPrimitive::LatticeLinear { matrix: vec![vec![1, 2], vec![0, 1]] },
            QiPrimitive::Shear { axis: 1, of: 0, kind: ShearKind::Mod2 },
        ]).unwrap();
        let lin = extract_linearization::<Rational, _>(&psi, &LinearizeOptions::default()).unwrap();
        let f = HarmonicCoordinates::core(GroupDescriptor::free_abelian(2), q.clone()).unwrap();
        let p = f.transported(&lin, None).unwrap();
        prop_assert_eq!(p.basis().mul(&lin.l_ab), q);
    }
}

type MatrixQ = Matrix<Rational>;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hitting_counts_account_for_every_run(seed in any::<u64>(), m in 2i64..=4) {
        let z = GroupDescriptor::free_abelian(1);
        let mut cfg = WalkConfig::new(srw(&z), seed, 500);
        cfg.max_steps = 3;
        let emp = hitting_measure(&MarkedSubgroup::scaled(1, 0, m).unwrap(), &cfg).unwrap();
        prop_assert_eq!(emp.counts.values().sum::<u64>() + emp.censored, emp.total);
    }

    #[test]
    fn symmetric_hitting_drift_is_centered(seed in any::<u64>()) {
        let g = GroupDescriptor::product(vec![GroupDescriptor::DihedralInfinite, GroupDescriptor::free_abelian(1)]);
        let cfg = WalkConfig::new(srw(&g), seed, 4_000);
        let core = g.nilpotent_core();
        let emp = hitting_measure(&core, &cfg).unwrap();
        let (mean, se) = emp.drift(core.model()).unwrap();
        for (m, s) in mean.iter().zip(&se) {
            // 4σ here: a 3σ miss on one of many random seeds is expected
            prop_assert!(m.abs() <= 4.0 * s + 1e-12, "{m} vs {s}");
        }
    }

    #[test]
    fn induction_commutes_with_subgroup_translation(
        seed in any::<u64>(),
        k in -6i64..=6,
        x in (-8i64..=8, any::<bool>()),
        c in rational(),
        phi in rational(),
    ) {
        let g = GroupDescriptor::DihedralInfinite;
        let mu = FiniteMeasure::new(g.clone(), vec![
            (Element::dihedral(1, false), ratio(1, 2)),
            (Element::dihedral(-1, false), ratio(1, 4)),
            (Element::dihedral(0, true), ratio(1, 4)),
        ]).unwrap();
        let sub = g.nilpotent_core();
        let cfg = WalkConfig::new(mu, seed, 2_000);
        let f = AffineHarmonic::scalar(sub.model().clone(), c, vec![phi]).unwrap();
        let h = Element::free(&[k]);
        let x = Element::dihedral(x.0, x.1);
        let shifted = g.mul(&g.inverse(&sub.from_model(&h).unwrap()).unwrap(), &x).unwrap();
        let (a, sa) = induce_harmonic(&f.translate(&h).unwrap(), &x, &sub, &cfg).unwrap().scalar();
        let (b, sb) = induce_harmonic(&f, &shifted, &sub, &cfg).unwrap().scalar();
        prop_assert!((a - b).abs() <= 3.0 * sa.hypot(sb) + 1e-9, "{a} vs {b}");
    }
}

#[test]
fn ball_prefixes_are_balls() {
    let g = GroupDescriptor::Heisenberg3;
    let s = g.default_generators();
    let big = enumerate_ball(&g, &s, 5).unwrap();
    for r in 1..5 {
        assert_eq!(big.within(r).len(), enumerate_ball(&g, &s, r).unwrap().len());
    }
}
