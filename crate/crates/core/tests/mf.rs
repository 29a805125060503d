use qacm_core::build::{build_spec, Sheaf};
use qacm_core::mf::*;
use qacm_core::scan::aa1_specs;

#[test]
fn matrix_presentation_agrees_with_kernel_sheaf() {
    let q = default_q();
    for (component, spec) in [(1u8, &aa1_specs()[0]), (2, &aa1_specs()[1])] {
        let n = example_aa1_matrix(component).unwrap();
        let Sheaf::Kernel(k) = build_spec(spec).unwrap() else { panic!("kernel") };
        for t in -2..=4 {
            assert_eq!(cokernel_hilbert(&n, t).unwrap(), k.cohomology(0, t).unwrap(), "component {component}, t = {t}");
        }
        let b = partner_from_adjugate(&n, &q).unwrap();
        let pair = MFPair { a: n.clone(), b: b.clone(), q: q.clone() };
        assert!(verify_mf(&pair));
        // det A det B = q^n.
        assert_eq!(det(&n).unwrap().mul(&det(&b).unwrap()), q.pow(4));
        assert_eq!(mat_mul(&n, &b).unwrap(), mat_mul(&b, &n).unwrap());
        // Both cokernels are Ulrich of rank two on X: equal Hilbert functions
        // from t = -1 on.
        for t in -1..=5 {
            assert_eq!(cokernel_hilbert(&n, t).unwrap(), cokernel_hilbert(&b, t).unwrap(), "t = {t}");
        }
    }
}

#[test]
fn ranks_on_and_off_x() {
    let n = example_aa1_matrix(1).unwrap();
    for p in sample_points() {
        let expected = if p.locus == "off" { 4 } else { 2 };
        assert_eq!(rank_at_point(&n, &p.point).unwrap(), expected, "{:?}", p.coords);
    }
}

#[test]
fn report_fields() {
    let n = example_aa1_matrix(2).unwrap();
    let r = mf_report(&n, &default_q(), (-1, 1)).unwrap();
    assert_eq!(r.det, "x^2*y^2");
    assert!(r.partner_linear && r.verified && r.ulrich_linear);
    assert_eq!(r.hilbert, vec![(-1, 0), (0, 4), (1, 12)]);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["ranks_at_samples"].as_array().unwrap().len(), 12);
}
