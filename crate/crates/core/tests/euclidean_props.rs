use std::f64::consts::PI;

use mcert_core::euclidean_analysis::{
    local_inversion, lp_partition_value, mikhlin_constant, sobolev_norm_H, sobolev_norm_W, twisted_homogeneous_mikhlin,
    DyadicPartition, EuclideanSymbol, GridSpec,
};
use mcert_core::group_geometry::GroupElement;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn annulus_bump(d: usize) -> EuclideanSymbol {
    let p = DyadicPartition::default();
    EuclideanSymbol::real(d, move |x| lp_partition_value(&p, 0, x)).with_support(Some(0.5), Some(2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partition_of_unity(r in -8.0f64..8.0, t in 0.0f64..(2.0 * PI), z in -1.0f64..1.0) {
        let p = DyadicPartition::default();
        let rad = 10f64.powf(r);
        let xi = [rad * t.cos() * (1.0 - z * z).sqrt(), rad * t.sin() * (1.0 - z * z).sqrt(), rad * z];
        prop_assert!((p.sum_of_squares(&xi) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn local_inversion_is_an_involution(entries in proptest::collection::vec(-0.4f64..0.4, 9)) {
        let a = DMatrix::from_row_slice(3, 3, &entries);
        let ia = local_inversion(&a, 1e-12).unwrap();
        let shifted = &a + DMatrix::identity(3, 3);
        let residual = (&shifted * (&ia + DMatrix::identity(3, 3)) - DMatrix::identity(3, 3)).amax();
        let sv = shifted.svd(false, false).singular_values;
        prop_assert!(residual <= 1e-12 * sv.max() / sv.min());
        let back = local_inversion(&ia, 1e-12).unwrap();
        prop_assert!((back - a).amax() <= 1e-12);
    }
}

#[test]
fn riesz_symbol_against_closed_form() {
    // sup over angles of r^{|γ|}|∂^γ (ξ_1/|ξ|)| for |γ| <= 2 is 2/√3, reached by ∂_1²
    let riesz = EuclideanSymbol::real(2, |x| x[0] / x[0].hypot(x[1]));
    let grid = GridSpec::mikhlin(2, 9, 256, 5);
    let est = mikhlin_constant(&riesz, 2, &grid).unwrap();
    let exact = 2.0 / 3f64.sqrt();
    assert!((est.value / exact - 1.0).abs() <= 0.05, "{} vs {exact}", est.value);
    assert!(!est.unbounded);
}

#[test]
fn mikhlin_is_subadditive() {
    let grid = GridSpec::mikhlin(2, 9, 64, 2);
    let a = EuclideanSymbol::real(2, |x| x[0] / x[0].hypot(x[1]));
    let b = EuclideanSymbol::real(2, |x| (x[0] * x[1]) / (x[0] * x[0] + x[1] * x[1]));
    let ca = mikhlin_constant(&a, 2, &grid).unwrap().value;
    let cb = mikhlin_constant(&b, 2, &grid).unwrap().value;
    let cab = mikhlin_constant(&a.sum(&b), 2, &grid).unwrap().value;
    assert!(cab <= ca + cb + 1e-9);
}

#[test]
fn h_norm_of_gaussian_matches_laplacian_quadrature() {
    // (1 + |k|²) f̂ is the transform of f - f''/(4π²); integrate that directly
    let f = EuclideanSymbol::real(1, |x| (-x[0] * x[0]).exp());
    let grid = GridSpec::transform(1, 8.0, 512);
    let h2 = sobolev_norm_H(&f, 2.0, &grid).unwrap();
    let steps = 200_000;
    let (lo, hi) = (-10.0, 10.0);
    let dx = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for i in 0..steps {
        let x: f64 = lo + (i as f64 + 0.5) * dx;
        let g = (-x * x).exp();
        let v = g - (4.0 * x * x - 2.0) * g / (4.0 * PI * PI);
        acc += v * v * dx;
    }
    assert!((h2 / acc.sqrt() - 1.0).abs() < 1e-6, "{h2} vs {}", acc.sqrt());
}

#[test]
fn w_norm_is_dilation_invariant_but_h_norm_is_not() {
    let eps = 0.5;
    let grid = GridSpec::transform(2, 12.0, 512);
    let base_w = sobolev_norm_W(&annulus_bump(2), 2, eps, &grid).unwrap();
    let base_h = sobolev_norm_H(&annulus_bump(2), 1.0 + eps, &grid).unwrap();
    for lambda in [0.25, 0.5, 2.0, 4.0] {
        let m = annulus_bump(2).dilate(lambda);
        let w = sobolev_norm_W(&m, 2, eps, &grid).unwrap();
        assert!((w / base_w - 1.0).abs() <= 0.02, "λ = {lambda}: {}", w / base_w);
        let h = sobolev_norm_H(&m, 1.0 + eps, &grid).unwrap();
        assert!((h / base_h - 1.0).abs() > 0.05, "λ = {lambda}: H ratio {}", h / base_h);
    }
    // ‖φ_0² M‖_W <= C ‖φ_0² M‖_{H_{d/2+ε}} on the annulus
    let c = base_w / base_h;
    println!("annular comparison constant C = {c:.4}");
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn w_norm_rejects_support_at_origin() {
    let m = EuclideanSymbol::real(2, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).with_support(Some(0.0), Some(5.0));
    assert!(sobolev_norm_W(&m, 2, 0.5, &GridSpec::transform(2, 8.0, 64)).is_err());
}

#[test]
fn twisted_symbol_constant_grows_with_sigma() {
    let grid = GridSpec::mikhlin(4, 5, 8, 3);
    let small: Vec<GroupElement> = [0.2, -0.3].iter().map(|&s| GroupElement::diag_exp(&[s, -s])).collect();
    let mut large = small.clone();
    large.push(GroupElement::diag_exp(&[0.69, -0.69]));
    let a = twisted_homogeneous_mikhlin(&small, 0.5, 2, &grid).unwrap();
    let b = twisted_homogeneous_mikhlin(&large, 0.5, 2, &grid).unwrap();
    assert!(a.is_finite() && b >= a);
}
