use mcert_core::certify::{cmd_rigidity, FamilyKind, RigidityConfig, SymbolFamily};
use mcert_core::report::Classification;
use mcert_core::schur_numerics::{
    embed_leading, nested_lower_bounds, schatten_norm, schur_infty_upper_bound, schur_norm_exact_p2,
    schur_norm_lower_bound, CMatrix, CubeGrid, CubeSymbol, TruncatedSchurMultiplier,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_matrix(r: usize, c: usize, re: &[f64], im: &[f64]) -> CMatrix {
    CMatrix::from_fn(r, c, |i, j| Complex64::new(re[i * c + j], im[i * c + j]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schatten_norm_ignores_zero_padding(
        re in proptest::collection::vec(-1.0f64..1.0, 12),
        im in proptest::collection::vec(-1.0f64..1.0, 12),
        p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(4.0), Just(f64::INFINITY)],
    ) {
        let a = complex_matrix(3, 4, &re, &im);
        let padded = embed_leading(&a, 6, 7);
        let (x, y) = (schatten_norm(&a, p).unwrap(), schatten_norm(&padded, p).unwrap());
        prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }

    #[test]
    fn lower_bound_dominates_entries(
        entries in proptest::collection::vec(-2.0f64..2.0, 16),
        p in prop_oneof![Just(1.0), Just(3.0), Just(f64::INFINITY)],
    ) {
        let m = TruncatedSchurMultiplier::from_real(&DMatrix::from_row_slice(4, 4, &entries)).unwrap();
        let lb = schur_norm_lower_bound(&m, p, 10, 1).unwrap();
        prop_assert!(lb >= m.sup_abs() * (1.0 - 1e-12));
        let lb2 = schur_norm_lower_bound(&m, 2.0, 10, 1).unwrap();
        prop_assert!((lb2 - schur_norm_exact_p2(&m)).abs() <= 1e-12 * lb2.max(1.0));
    }

    #[test]
    fn rank_one_symbols_have_norm_of_sup(
        u in proptest::collection::vec(-1.0f64..1.0, 5),
        v in proptest::collection::vec(-1.0f64..1.0, 5),
    ) {
        // (u_i v_j) ∘ A = diag(u) A diag(v), whose norm on every S_p is max|u| max|v|
        let m = TruncatedSchurMultiplier::from_real(&DMatrix::from_fn(5, 5, |i, j| u[i] * v[j])).unwrap();
        let exact = m.sup_abs();
        for p in [1.0, 4.0, f64::INFINITY] {
            let lb = schur_norm_lower_bound(&m, p, 10, 2).unwrap();
            prop_assert!((lb - exact).abs() <= 1e-9 * exact.max(1e-12));
        }
    }
}

#[test]
fn cube_sections_stay_below_the_sobolev_bound() {
    let s = CubeSymbol::new(1, 1, |x, y| Complex64::from_polar(1.0, 3.0 * x[0] * y[0]));
    let upper = schur_infty_upper_bound(&s, &CubeGrid::unit(1, 1, 24)).unwrap().certified();
    let pts: Vec<Vec<f64>> = (0..32).map(|i| vec![(i as f64 + 0.5) / 32.0]).collect();
    let m = s.section(&pts, &pts);
    let bounds = nested_lower_bounds(&m, &[4, 8, 16, 32], f64::INFINITY, 20, 3).unwrap();
    println!("sections {bounds:?}, certified upper {upper:.4}");
    assert!(bounds.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(*bounds.last().unwrap() <= upper);
}

#[test]
fn step_profile_is_flagged_with_sections() {
    let family = SymbolFamily::new(FamilyKind::Step).param("at", 2.0);
    let mut cfg = RigidityConfig::new(5, 10.0);
    cfg.sizes = vec![4, 8, 16, 32];
    let report = cmd_rigidity(&family, &cfg).unwrap();
    assert_eq!(report.classification, Some(Classification::Violated));
    assert_eq!(report.exit_code(), 1);
    let bounds: Vec<f64> = cfg
        .sizes
        .iter()
        .map(|k| {
            let name = format!("schur-lower-bound-N{k}");
            report.records.iter().find(|r| r.name == name).unwrap().measured
        })
        .collect();
    println!("step witness sections: {bounds:?}");
    assert!(bounds.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(bounds[0] >= 1.0 - 1e-12);
}

#[test]
fn reports_are_reproducible() {
    let family = SymbolFamily::new(FamilyKind::HmBump);
    let mut cfg = RigidityConfig::new(4, 10.0);
    cfg.sizes = vec![4, 8];
    let mut a = serde_json::to_value(cmd_rigidity(&family, &cfg).unwrap()).unwrap();
    let mut b = serde_json::to_value(cmd_rigidity(&family, &cfg).unwrap()).unwrap();
    a.as_object_mut().unwrap().remove("header");
    b.as_object_mut().unwrap().remove("header");
    assert_eq!(a, b);
}
