use proptest::prelude::*;
use spar::estimate::{lse, normal_equations, score_vector};
use spar::model::{triangle_indices, Field, ModelParams, TriangleWindow};
use spar::rng::{InnovationDist, RngStream};
use spar::simulate::{simulate, SimMethod};

fn params() -> impl Strategy<Value = ModelParams> {
    (-0.6f64..0.6, -0.6f64..0.6)
        .prop_filter("stable", |(a, b)| a.abs() + b.abs() < 0.95)
        .prop_map(|(a, b)| ModelParams::new(a, b))
}

fn draw(p: ModelParams, w: TriangleWindow, seed: u64) -> Field {
    simulate(p, w, SimMethod::BoundaryCholesky, InnovationDist::Gaussian, &mut RngStream::new(seed, 0)).unwrap()
}

/// Normal equations summed point by point from coordinate lookups.
fn brute_normal(f: &Field, w: TriangleWindow) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut b = [[0.0; 2]; 2];
    let mut c = [0.0; 2];
    for (i, j) in triangle_indices(w) {
        let x = [f.value(i - 1, j).unwrap(), f.value(i, j - 1).unwrap()];
        let y = f.value(i, j).unwrap();
        for r in 0..2 {
            c[r] += x[r] * y;
            for s in 0..2 {
                b[r][s] += x[r] * x[s];
            }
        }
    }
    (b, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_equations_match_pointwise_sums(p in params(), k in 1i64..8, l in 1i64..8, seed in any::<u64>()) {
        let w = TriangleWindow::new(k, l);
        let f = draw(p, w, seed);
        let (b, c) = normal_equations(&f, w).unwrap();
        let (bb, cc) = brute_normal(&f, w);
        let scale = bb[0][0].max(bb[1][1]);
        prop_assert!((b.a11 - bb[0][0]).abs() <= 1e-12 * scale);
        prop_assert!((b.a12 - bb[0][1]).abs() <= 1e-12 * scale);
        prop_assert!((b.a22 - bb[1][1]).abs() <= 1e-12 * scale);
        prop_assert!((c[0] - cc[0]).abs() <= 1e-12 * scale);
        prop_assert!((c[1] - cc[1]).abs() <= 1e-12 * scale);
    }

    #[test]
    fn noiseless_fields_are_fit_exactly(p in params(), boundary in prop::collection::vec(-3.0f64..3.0, 11)) {
        let w = TriangleWindow::balanced(10);
        let f = Field::from_recursion(p, w, &boundary, None).unwrap();
        let est = lse(&f, w).unwrap();
        prop_assert!((est.alpha_hat - p.alpha).abs() < 1e-8, "{est:?}");
        prop_assert!((est.beta_hat - p.beta).abs() < 1e-8, "{est:?}");
    }

    #[test]
    fn estimates_are_scale_invariant(p in params(), c in 0.01f64..100.0, seed in any::<u64>()) {
        let w = TriangleWindow::balanced(12);
        let f = draw(p, w, seed);
        let a = lse(&f, w).unwrap();
        let b = lse(&f.scaled(c), w).unwrap();
        prop_assert!((a.alpha_hat - b.alpha_hat).abs() < 1e-10);
        prop_assert!((a.beta_hat - b.beta_hat).abs() < 1e-10);
    }

    #[test]
    fn residuals_are_orthogonal_and_score_decomposes(p in params(), seed in any::<u64>()) {
        let w = TriangleWindow::balanced(9);
        let f = draw(p, w, seed);
        let est = lse(&f, w).unwrap();
        let th = est.theta_hat();
        let r = [
            est.c[0] - est.b.a11 * th[0] - est.b.a12 * th[1],
            est.c[1] - est.b.a21 * th[0] - est.b.a22 * th[1],
        ];
        let scale = est.b.a11.max(est.b.a22);
        prop_assert!(r[0].abs() <= 1e-10 * scale && r[1].abs() <= 1e-10 * scale);
        // A = C - B theta when the field was driven by its innovations
        let a = score_vector(&f, w).unwrap();
        let c_minus = [
            est.c[0] - est.b.a11 * p.alpha - est.b.a12 * p.beta,
            est.c[1] - est.b.a21 * p.alpha - est.b.a22 * p.beta,
        ];
        prop_assert!((a[0] - c_minus[0]).abs() <= 1e-9 * scale);
        prop_assert!((a[1] - c_minus[1]).abs() <= 1e-9 * scale);
        prop_assert_eq!(est.a, Some(a));
    }
}
