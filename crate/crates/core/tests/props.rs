use proptest::prelude::*;

use qacm_core::descriptor::{parse, CiSpec, GluingSpec, HSpec, SheafSpec};
use qacm_core::exec::Execution;
use qacm_core::linalg::{rat, rat_frac, RatMatrix, Rational};
use qacm_core::monomial::{basis, cohomology_dim, poly_multiplication_matrix, Space};
use qacm_core::plane::{make_extension_bundle, CISubscheme};
use qacm_core::poly::{exponents_of_degree, Poly, Side, VarSet};
use qacm_core::quadric::{make_kernel_sheaf, GluingData};
use qacm_core::scan::points_on_line;

fn small_matrix() -> impl Strategy<Value = RatMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3i64..=3, r * c).prop_map(move |v| {
            let rows = v.chunks(c).map(|row| row.iter().map(|&x| rat(x)).collect()).collect();
            RatMatrix::from_rows(rows, c).unwrap()
        })
    })
}

fn plane_form(deg: u32) -> impl Strategy<Value = Poly> {
    let monos = exponents_of_degree(3, deg);
    prop::collection::vec(-3i64..=3, monos.len()).prop_map(move |cs| {
        Poly::from_terms(VarSet::Plane, monos.iter().cloned().zip(cs.into_iter().map(rat)))
    })
}

fn any_form(vars: VarSet) -> impl Strategy<Value = Poly> {
    (0u32..3).prop_flat_map(move |d| {
        let monos = exponents_of_degree(vars.len(), d);
        prop::collection::vec(-3i64..=3, monos.len())
            .prop_map(move |cs| Poly::from_terms(vars, monos.iter().cloned().zip(cs.into_iter().map(rat))))
    })
}

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=7).prop_map(|(n, d)| rat_frac(n, d))
}

fn ci() -> impl Strategy<Value = CiSpec> {
    prop_oneof![
        (any_form(VarSet::Plane), any_form(VarSet::Plane)).prop_map(|(a, b)| CiSpec::Forms(a, b)),
        prop::collection::vec([rational(), rational(), rational()], 1..4).prop_map(CiSpec::Points),
    ]
}

fn plane() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::H1), Just(Side::H2)]
}

fn plane_spec_on(side: Side) -> impl Strategy<Value = SheafSpec> {
    prop_oneof![
        prop::collection::vec(-9i64..=9, 1..4).prop_map(move |twists| SheafSpec::LbSum { twists, plane: side }),
        (ci(), -5i64..=5).prop_map(move |(ci, m)| SheafSpec::Ideal { ci, m, plane: side }),
        (0i64..6, 0i64..4, ci(), prop::option::of(any_form(VarSet::Plane))).prop_map(move |(c, k, z, h)| {
            SheafSpec::Ext { c, k, z, h: h.map_or(HSpec::Auto, HSpec::Form), plane: side }
        }),
    ]
}

fn gluing() -> impl Strategy<Value = GluingSpec> {
    prop_oneof![
        Just(GluingSpec::Identity),
        (rational(), rational()).prop_map(|(a, d)| GluingSpec::Diagonal(a, d)),
        (rational(), rational(), any_form(VarSet::Line)).prop_map(|(a, d, b)| GluingSpec::Upper(a, d, b)),
    ]
}

fn sheaf_spec() -> impl Strategy<Value = SheafSpec> {
    prop_oneof![
        plane().prop_flat_map(plane_spec_on),
        (plane(), -9i64..=9, -9i64..=9).prop_map(|(side, a, b)| SheafSpec::RankOne { side, a, b }),
        (plane(), gluing()).prop_flat_map(|(s, e)| (plane_spec_on(s), plane_spec_on(s.other()), Just(e))).prop_map(
            |(f1, f2, e)| SheafSpec::Kernel { f1: Box::new(f1), f2: Box::new(f2), e }
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity(m in small_matrix()) {
        prop_assert_eq!(m.rank() + m.kernel_basis().dim(), m.cols());
        prop_assert_eq!(m.rank(), m.transpose().rank());
        let k = m.kernel_basis();
        prop_assert!(k.dim() == 0 || m.mul(k.basis()).unwrap().is_zero());
    }

    #[test]
    fn serre_duality_on_projective_spaces(d in -12i64..12) {
        prop_assert_eq!(cohomology_dim(Space::P2, 0, d).unwrap(), cohomology_dim(Space::P2, 2, -d - 3).unwrap());
        prop_assert_eq!(cohomology_dim(Space::P1, 0, d).unwrap(), cohomology_dim(Space::P1, 1, -d - 2).unwrap());
        prop_assert_eq!(cohomology_dim(Space::P2, 1, d).unwrap(), 0);
    }

    #[test]
    fn multiplication_composes(f in plane_form(1), g in plane_form(2), t in -7i64..4, i in prop_oneof![Just(0usize), Just(2)]) {
        let src = basis(Space::P2, i, t).unwrap();
        let mf = poly_multiplication_matrix(&f, 1, &src).unwrap();
        let mid = basis(Space::P2, i, t + 1).unwrap();
        let mg = poly_multiplication_matrix(&g, 2, &mid).unwrap();
        let mfg = poly_multiplication_matrix(&f.mul(&g), 3, &src).unwrap();
        prop_assert_eq!(mg.mul(&mf).unwrap(), mfg);
    }

    #[test]
    fn parser_is_total(s in "[A-Za-z0-9()\\[\\],=@+*^:;/ .-]{0,48}") {
        if let Err(e) = parse(&s) {
            prop_assert!(e.offset <= s.len());
            prop_assert!(e.line >= 1 && e.column >= 1);
        }
    }

    #[test]
    fn parser_is_total_on_unicode(s in "\\PC{0,24}") {
        if let Err(e) = parse(&s) {
            prop_assert!(e.offset <= s.len());
        }
    }

    #[test]
    fn descriptors_round_trip(spec in sheaf_spec()) {
        let text = spec.to_string();
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back.sheaf, spec);
    }
}

fn values(seed: u64, z: usize) -> Vec<i64> {
    qacm_core::scan::seeded_values(seed, 0, 0)[..z].to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn extension_bundles_satisfy_serre_duality(k in 0i64..3, dz in 1i64..4, seed in 0u64..1000) {
        let c = k + dz;
        prop_assume!(c <= 2 * k + 2);
        let z = CISubscheme::from_points(&points_on_line(&values(seed, dz as usize))).unwrap();
        let g = make_extension_bundle(c, k, z, None).unwrap();
        for t in -c - 4..=2 {
            prop_assert_eq!(g.cohomology(1, t).unwrap(), g.cohomology(1, -c - 3 - t).unwrap(), "t = {}", t);
            let row = g.coh_row(t).unwrap();
            prop_assert_eq!(row.chi, g.presentation().chi(t));
        }
    }

    #[test]
    fn kernel_chi_is_additive(k in 0i64..3, dz in 1i64..4, seed in 0u64..1000, s in -2i64..=2) {
        let c = k + dz;
        prop_assume!(c <= 2 * k + 2);
        let z = CISubscheme::from_points(&points_on_line(&values(seed, dz as usize))).unwrap();
        let g = make_extension_bundle(c, k, z, None).unwrap();
        let split = qacm_core::plane::make_split(vec![c, 0]).unwrap();
        let kernel = make_kernel_sheaf(split.clone(), Side::H1, g.clone(), GluingData::Identity).unwrap().twisted(s);
        let table = kernel.coh_table((-c - 6, 3), Execution::Sequential).unwrap();
        for row in &table.rows {
            let t = row.t + s;
            let chi_q = (c + t + 1) + (t + 1);
            prop_assert_eq!(row.chi, split.presentation().chi(t) + g.presentation().chi(t) - chi_q);
            prop_assert_eq!(row.h1, 0);
        }
        let par = kernel.coh_table((-c - 6, 3), Execution::Parallel).unwrap();
        prop_assert_eq!(par, table);
    }
}
