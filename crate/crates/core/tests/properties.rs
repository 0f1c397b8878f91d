use holodeconv::forward::{
    autocorrelation_direct, autocorrelation_from_data, diffract, make_composite, DiffractionData, ReferenceKind,
    SpecimenImage,
};
use holodeconv::linalg::{apply_kron_pair, kron, ones_lower, triangular_svd, unvec_col, vec_col};
use holodeconv::recovery::recover;
use holodeconv::Complex64;
use ndarray::Array2;
use proptest::prelude::*;

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn specimen(n: usize, vals: &[(f64, f64)]) -> SpecimenImage {
    SpecimenImage::new(Array2::from_shape_fn((n, n), |(i, j)| {
        let (r, t) = vals[(i * n + j) % vals.len()];
        Complex64::from_polar(r, t)
    }))
    .unwrap()
}

fn matrix(rows: usize, cols: usize, vals: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| vals[(i * cols + j) % vals.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_factors_are_orthogonal_and_reconstruct(n in 1usize..80) {
        let svd = triangular_svd(n).unwrap();
        let eye = Array2::<f64>::eye(n);
        prop_assert!(max_abs(&(svd.u.t().dot(&svd.u) - &eye)) < 1e-11);
        prop_assert!(max_abs(&(svd.v.t().dot(&svd.v) - &eye)) < 1e-11);
        prop_assert!(max_abs(&(svd.reconstruct() - ones_lower(n).unwrap())) < 1e-10 * n as f64);
        prop_assert!(svd.sigmas.windows(2).into_iter().all(|w| w[0] > w[1]));
    }

    #[test]
    fn kron_pair_matches_explicit_kronecker(
        p in 1usize..5, q in 1usize..5, r in 1usize..5, s in 1usize..5,
        vals in prop::collection::vec(-2.0f64..2.0, 1..40),
    ) {
        let b = matrix(p, q, &vals);
        let c = matrix(q, r, &vals[vals.len() / 2..]);
        let a = matrix(r, s, &vals.iter().rev().copied().collect::<Vec<_>>());
        let fast = apply_kron_pair(&b, &a, &c).unwrap();
        let explicit = unvec_col(&kron(&a.t().to_owned(), &b).dot(&vec_col(&c)), p, s).unwrap();
        prop_assert!(max_abs(&(fast - explicit)) < 1e-12);
    }

    #[test]
    fn autocorrelation_round_trip(
        n in 1usize..5,
        extra in 0usize..6,
        vals in prop::collection::vec((0.0f64..1.0, 0.0f64..6.3), 1..30),
    ) {
        let comp = make_composite(&specimen(n, &vals), ReferenceKind::Dual);
        let fast = autocorrelation_from_data(&diffract(&comp, 4 * n - 1 + extra).unwrap(), n).unwrap();
        let direct = autocorrelation_direct(&comp);
        let err = fast.lags.iter().zip(direct.lags.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn recovery_is_linear_in_the_data(
        n in 1usize..6,
        kind_idx in 0usize..3,
        alpha in -3.0f64..3.0,
        vals in prop::collection::vec(0.0f64..5.0, 1..60),
    ) {
        let kind = [ReferenceKind::Dual, ReferenceKind::Block, ReferenceKind::Pinhole][kind_idx];
        let m = 4 * n;
        let y1 = matrix(m, m, &vals);
        let y2 = matrix(m, m, &vals.iter().map(|v| (v * 1.7).sin().abs()).collect::<Vec<_>>());
        let rec = |y: Array2<f64>| recover(&DiffractionData::new(y).unwrap(), n, kind).unwrap().x_hat;
        let combined = rec(&y1 * alpha + &y2);
        let separate = rec(y1).mapv(|z| z * alpha) + rec(y2);
        let scale = separate.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let err = combined.iter().zip(separate.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err / scale < 1e-10);
    }

    #[test]
    fn noiseless_recovery_is_exact_for_any_specimen(
        n in 1usize..9,
        kind_idx in 0usize..3,
        extra in 0usize..8,
        vals in prop::collection::vec((0.0f64..1.0, 0.0f64..6.3), 1..80),
    ) {
        let kind = [ReferenceKind::Dual, ReferenceKind::Block, ReferenceKind::Pinhole][kind_idx];
        let x = specimen(n, &vals);
        let y = diffract(&make_composite(&x, kind), 4 * n - 1 + extra).unwrap();
        let r = recover(&y, n, kind).unwrap();
        let err = r.x_hat.iter().zip(x.values().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9);
    }
}
