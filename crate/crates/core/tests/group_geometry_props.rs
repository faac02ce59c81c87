use mcert_core::group_geometry::{
    bracevert, distortion_constant, harish_chandra_xi, haar_orthogonal, kak_decompose, length_L, lie_derivative,
    normalize_for_distortion, weyl_ball_volume, GroupElement, LieBasis, MultiIndex, SymbolHandle,
};
use mcert_core::numerics::seeded_rng;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn element(n: usize, spread: f64, seed: u64) -> GroupElement {
    let mut rng = seeded_rng(seed, 17);
    let k1 = haar_orthogonal(n, &mut rng);
    let k2 = haar_orthogonal(n, &mut rng);
    let mut z: Vec<f64> = (0..n).map(|i| spread * ((i as f64 * 1.7 + seed as f64 * 0.31).sin())).collect();
    let mean = z.iter().sum::<f64>() / n as f64;
    z.iter_mut().for_each(|v| *v -= mean);
    GroupElement::new(&k1 * GroupElement::diag_exp(&z).matrix() * &k2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn length_is_inverse_and_k_biinvariant(n in 2usize..6, spread in 0.0f64..4.0, seed in 0u64..1000) {
        let g = element(n, spread, seed);
        let l = length_L(&g).unwrap();
        prop_assert!((length_L(&g.inverse()).unwrap() - l).abs() <= 1e-10 * l);
        let mut rng = seeded_rng(seed, 99);
        let k1 = haar_orthogonal(n, &mut rng);
        let k2 = haar_orthogonal(n, &mut rng);
        let kgk = GroupElement::new(&k1 * g.matrix() * &k2).unwrap();
        prop_assert!((length_L(&kgk).unwrap() - l).abs() <= 1e-10 * l);
    }

    #[test]
    fn kak_reconstructs(n in 2usize..7, spread in 0.0f64..6.0, seed in 0u64..1000) {
        let g = element(n, spread, seed);
        let kak = kak_decompose(&g).unwrap();
        let rel = (kak.reconstruct() - g.matrix()).norm() / g.matrix().norm();
        prop_assert!(rel <= 1e-10);
        let eye = DMatrix::<f64>::identity(n, n);
        prop_assert!((kak.k1.transpose() * &kak.k1 - &eye).amax() <= 1e-12);
        prop_assert!((kak.k2.transpose() * &kak.k2 - &eye).amax() <= 1e-12);
        prop_assert!(kak.exponents.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(kak.exponents.iter().sum::<f64>().abs() <= 1e-10);
    }

    #[test]
    fn lie_derivative_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, j in 0usize..8, seed in 0u64..100) {
        let m1 = SymbolHandle::real("tr", |g: &DMatrix<f64>| g.trace());
        let m2 = SymbolHandle::real("hs", |g: &DMatrix<f64>| (-g.norm_squared() / 6.0).exp());
        let combo = SymbolHandle::linear_combination(a, &m1, b, &m2);
        let basis = LieBasis::new(3);
        let g = element(3, 0.8, seed);
        let gamma = MultiIndex::new(vec![j, (j + 3) % 8]);
        let lhs = lie_derivative(&combo, &g, &gamma, &basis, 1e-4).unwrap();
        let rhs = lie_derivative(&m1, &g, &gamma, &basis, 1e-4).unwrap() * a
            + lie_derivative(&m2, &g, &gamma, &basis, 1e-4).unwrap() * b;
        prop_assert!((lhs - rhs).norm() <= 1e-6 * (1.0 + rhs.norm()));
    }
}

#[test]
fn bracevert_vanishes_only_at_identity_and_is_comparable_locally() {
    assert_eq!(bracevert(&GroupElement::identity(3)).unwrap(), 0.0);
    for n in 2..=4 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for seed in 0..200 {
            let mut rng = seeded_rng(seed, n as u64);
            let x = DMatrix::from_fn(n, n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let x = &x - DMatrix::identity(n, n) * (x.trace() / n as f64);
            let scale = 0.1 * (seed as f64 + 1.0) / 200.0 / x.norm();
            let g = GroupElement::exp_algebra(&(x * scale)).unwrap();
            let dist = (g.matrix() - DMatrix::identity(n, n)).norm();
            if dist > 0.1 {
                continue;
            }
            let ratio = bracevert(&g).unwrap() / dist;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let c_n = hi.max(1.0 / lo);
        println!("n = {n}: C_n = {c_n:.4}");
        assert!(c_n.is_finite() && c_n < 10.0);
    }
}

#[test]
fn weyl_volume_is_increasing() {
    for n in [2, 3] {
        let vols: Vec<f64> = [0.5, 1.0, 2.0, 3.0, 4.0].iter().map(|&r| weyl_ball_volume(n, r).unwrap()).collect();
        assert!(vols.windows(2).all(|w| w[1] > w[0]), "n = {n}: {vols:?}");
    }
}

#[test]
fn xi_decreases_along_rays() {
    let mut prev = harish_chandra_xi(&GroupElement::identity(3), 4000, 2).unwrap();
    assert!((prev.value - 1.0).abs() < 1e-12);
    for s in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let est = harish_chandra_xi(&GroupElement::diag_exp(&[s, 0.0, -s]), 4000, 2).unwrap();
        assert!(est.value <= 1.0 + 3.0 * est.std_error);
        assert!(est.value <= prev.value + 3.0 * (est.std_error + prev.std_error), "s = {s}");
        prev = est;
    }
}

#[test]
fn xi_is_right_k_invariant_within_error() {
    let g = element(3, 1.5, 4);
    let mut rng = seeded_rng(8, 8);
    let k = haar_orthogonal(3, &mut rng);
    let gk = GroupElement::new(g.matrix() * &k).unwrap();
    let a = harish_chandra_xi(&g, 20_000, 1).unwrap();
    let b = harish_chandra_xi(&gk, 20_000, 1).unwrap();
    assert!((a.value - b.value).abs() <= 4.0 * (a.std_error + b.std_error));
}

#[test]
fn distortion_grows_with_omega() {
    let bump = SymbolHandle::real("bump", |m: &DMatrix<f64>| {
        let t = (m.norm_squared() / 2.0).ln().max(0.0);
        (-t * t).exp()
    })
    .with_support_radius(3.0);
    let far = GroupElement::diag_exp(&[0.6, -0.6]);
    let near = GroupElement::diag_exp(&[0.2, -0.2]);
    let small = vec![far.clone()];
    let large = vec![far, near];
    let phi = normalize_for_distortion(&bump, &small, 4000, 3).unwrap();
    let a = distortion_constant(&phi, &small, 4000, 3).unwrap();
    let b = distortion_constant(&phi, &large, 4000, 3).unwrap();
    assert!(a > 0.0 && b >= a);
}
