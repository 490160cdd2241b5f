use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use spar::covariance::{
    cov_binrep, cov_closed, cov_f4, cov_series_oracle, margin_for_tolerance, sigma_sq, CovKernel,
    CovMethod,
};
use spar::linalg::chol_spd;
use spar::model::{hull_indices, ModelParams, TriangleWindow};

/// Moving-average weights `c(i, j)` of `X(0,0) = sum c(i,j) e(-i,-j)`, filled by
/// `c(i,j) = a c(i-1,j) + b c(i,j-1)`; then `R(k,l) = sum c(i,j) c(i+k, j+l)`.
fn ma_oracle(p: ModelParams, k: i64, l: i64, depth: usize) -> f64 {
    let n = depth + (k.abs() + l.abs()) as usize + 1;
    let mut c = vec![vec![0.0; n]; n];
    c[0][0] = 1.0;
    for i in 0..n {
        for j in 0..n - i {
            if i + j > 0 {
                let up = if i > 0 { c[i - 1][j] } else { 0.0 };
                let left = if j > 0 { c[i][j - 1] } else { 0.0 };
                c[i][j] = p.alpha * up + p.beta * left;
            }
        }
    }
    let mut total = 0.0;
    for i in 0..=depth {
        for j in 0..=depth - i {
            let (i2, j2) = (i as i64 + k, j as i64 + l);
            if i2 >= 0 && j2 >= 0 && ((i2 + j2) as usize) < n {
                total += c[i][j] * c[i2 as usize][j2 as usize];
            }
        }
    }
    total
}

fn params() -> impl Strategy<Value = ModelParams> {
    (-0.6f64..0.6, -0.6f64..0.6)
        .prop_filter("stable with margin", |(a, b)| a.abs() + b.abs() < 0.85)
        .prop_map(|(a, b)| ModelParams::new(a, b))
}

fn nonzero_params() -> impl Strategy<Value = ModelParams> {
    params().prop_filter("a b != 0", |p| p.alpha.abs() > 1e-3 && p.beta.abs() > 1e-3)
}

#[test]
fn moving_average_oracle_matches_spot_values() {
    let p = ModelParams::new(0.5, 0.3);
    assert_abs_diff_eq!(ma_oracle(p, 0, 0, 200), sigma_sq(p).unwrap(), epsilon = 1e-12);
    for (k, l) in [(1, 0), (0, 1), (2, -1), (-3, 2), (2, 3), (-2, -4)] {
        assert_abs_diff_eq!(ma_oracle(p, k, l, 200), cov_closed(p, k, l).unwrap(), epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routes_agree_with_the_moving_average_oracle(p in nonzero_params(), k in -5i64..=5, l in -5i64..=5) {
        let oracle = ma_oracle(p, k, l, 260);
        let margin = margin_for_tolerance(p.q(), 1e-13).unwrap();
        prop_assert!((cov_closed(p, k, l).unwrap() - oracle).abs() < 1e-10);
        prop_assert!((cov_f4(p, k, l, 1e-13).unwrap() - oracle).abs() < 1e-10);
        prop_assert!((cov_series_oracle(p, k, l, margin).unwrap() - oracle).abs() < 1e-10);
        if k * l >= 0 {
            prop_assert!((cov_binrep(p, k, l, 1e-13).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn covariance_is_even(p in params(), k in -8i64..=8, l in -8i64..=8) {
        let r = cov_closed(p, k, l).unwrap();
        prop_assert!((r - cov_closed(p, -k, -l).unwrap()).abs() <= 1e-14 * r.abs().max(1.0));
    }

    #[test]
    fn yule_walker_and_origin(p in params(), k in -10i64..=10, l in -10i64..=10) {
        let kern = CovKernel::closed(p).unwrap();
        let resid = kern.get(k, l).unwrap() - p.alpha * kern.get(k - 1, l).unwrap() - p.beta * kern.get(k, l - 1).unwrap();
        let expect = if k == 0 && l == 0 { 1.0 } else if k >= 1 || l >= 1 { 0.0 } else { resid };
        prop_assert!((resid - expect).abs() < 1e-12, "resid {resid} at ({k},{l})");
    }

    #[test]
    fn dominated_by_absolute_coefficients(p in params(), k in -8i64..=8, l in -8i64..=8) {
        let abs = ModelParams::new(p.alpha.abs(), p.beta.abs());
        let r = cov_closed(p, k, l).unwrap();
        let r_abs = cov_closed(abs, k, l).unwrap();
        prop_assert!(r_abs >= -1e-15);
        prop_assert!(r.abs() <= r_abs + 1e-13);
    }

    #[test]
    fn hull_covariance_is_positive_definite(p in params(), s in 2i64..10) {
        let pts = hull_indices(TriangleWindow::balanced(s));
        let m = CovKernel::closed(p).unwrap().matrix(&pts).unwrap();
        let f = chol_spd(&m).unwrap();
        prop_assert_eq!(f.jitter, 0.0);
    }
}

#[test]
fn kernel_methods_share_values() {
    let p = ModelParams::new(-0.25, 0.45);
    let closed = CovKernel::closed(p).unwrap();
    for method in [CovMethod::AppellF4, CovMethod::SeriesOracle] {
        let kern = CovKernel::new(p, method, 1e-12).unwrap();
        for (k, l) in [(0, 0), (3, -2), (-1, 4), (5, 5)] {
            assert_abs_diff_eq!(kern.get(k, l).unwrap(), closed.get(k, l).unwrap(), epsilon = 1e-10);
        }
    }
}
