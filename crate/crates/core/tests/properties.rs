//! Cross-module property checks: metric axioms at scale, separation-count
//! sandwich bounds on random pools, exact-vs-symbolic growth agreement, and
//! invariance properties of the classifiers and estimators.

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::Rng;

use polent::catalog::builtin_suite;
use polent::cohomology::power_growth_exponent;
use polent::intmat::{symbolic_power_growth, ExactIntMatrix};
use polent::lab::{
    bowen_distance, bowen_distance_matrix, estimate_hpol, greedy_separated_on_matrix,
    max_separated_exact, min_cover_exact, BowenParams,
};
use polent::pgl::{classify_pgl2, random_conjugate, Pgl2Class, DEFAULT_TOLERANCE};
use polent::seed::cell_rng;
use polent::zoo::{CMat, DynSystem, ProjectiveMap, SkewProduct, TorusAffineMap};

fn spaces() -> Vec<(&'static str, DynSystem)> {
    let torus = DynSystem::Torus(
        TorusAffineMap::new(2, vec![1, 1, 0, 1], vec![0.1, 0.2]).unwrap(),
    );
    let p1 = DynSystem::Projective(
        ProjectiveMap::new(
            1,
            CMat::new(
                2,
                vec![
                    Complex64::new(2.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                ],
            ),
        )
        .unwrap(),
    );
    let p2 = DynSystem::Projective(
        ProjectiveMap::new(
            2,
            CMat::new(
                3,
                vec![
                    Complex64::new(2.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(2.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                ],
            ),
        )
        .unwrap(),
    );
    let skew = DynSystem::Skew(
        SkewProduct::new(
            0.41421356237309515,
            vec![(1, Complex64::new(0.3, 0.1)), (3, Complex64::new(0.0, 0.2))],
        )
        .unwrap(),
    );
    vec![("torus", torus), ("p1", p1), ("p2", p2), ("skew", skew)]
}

#[test]
fn metric_axioms_on_ten_thousand_triples() {
    for (name, sys) in spaces() {
        let mut rng = cell_rng(11, &format!("axioms/{name}"));
        for i in 0..10_000 {
            let p = sys.sample_point(&mut rng);
            let q = sys.sample_point(&mut rng);
            let r = sys.sample_point(&mut rng);
            let dpq = sys.distance(&p, &q);
            let dqp = sys.distance(&q, &p);
            let dpr = sys.distance(&p, &r);
            let dqr = sys.distance(&q, &r);
            assert!(dpq.is_finite() && dpq >= 0.0, "{name}: negative distance");
            assert!(
                (dpq - dqp).abs() <= 1e-12,
                "{name} triple {i}: asymmetric ({dpq} vs {dqp})"
            );
            assert!(
                sys.distance(&p, &p) <= 1e-12,
                "{name} triple {i}: d(p,p) != 0"
            );
            assert!(
                dpr <= dpq + dqr + 1e-10,
                "{name} triple {i}: triangle violated ({dpr} > {dpq} + {dqr})"
            );
            // the Bowen metric is a max of metrics, hence a metric itself
            let bpq = bowen_distance(&sys, &p, &q, 8);
            let bqr = bowen_distance(&sys, &q, &r, 8);
            let bpr = bowen_distance(&sys, &p, &r, 8);
            assert!(
                bpr <= bpq + bqr + 1e-10,
                "{name} triple {i}: Bowen triangle violated"
            );
        }
    }
}

#[test]
fn bowen_distance_monotone_in_n_and_dominates_base() {
    for (name, sys) in spaces() {
        let mut rng = cell_rng(12, &format!("monotone/{name}"));
        for _ in 0..200 {
            let p = sys.sample_point(&mut rng);
            let q = sys.sample_point(&mut rng);
            let mut prev = 0.0;
            for n in [1u64, 2, 4, 8, 16, 32] {
                let d = bowen_distance(&sys, &p, &q, n);
                assert!(
                    d >= prev - 1e-12,
                    "{name}: d_n decreased ({prev} -> {d} at n={n})"
                );
                prev = d;
            }
            assert!(prev >= sys.distance(&p, &q) - 1e-12, "{name}: d_n < d_1");
        }
    }
}

/// On every finite pool: minCov(eps) <= greedy(eps) <= maxSep(eps), and the
/// two-scale sandwich maxSep(2 eps) <= minCov(eps) <= maxSep(eps).
#[test]
fn separation_sandwich_on_hundred_random_pools() {
    let all = spaces();
    for trial in 0..100 {
        let (name, sys) = &all[trial % all.len()];
        let mut rng = cell_rng(13, &format!("sandwich/{trial}"));
        let pool: Vec<_> = (0..12).map(|_| sys.sample_point(&mut rng)).collect();
        let n = [1u64, 4, 16][trial % 3];
        let dm = bowen_distance_matrix(sys, &pool, n);
        for eps in [0.05, 0.1, 0.3] {
            let sep = max_separated_exact(&dm, eps);
            let sep2 = max_separated_exact(&dm, 2.0 * eps);
            let cov = min_cover_exact(&dm, eps);
            let greedy = greedy_separated_on_matrix(&dm, eps);
            assert!(
                cov <= sep,
                "{name} trial {trial} eps {eps}: cover {cov} > separated {sep}"
            );
            assert!(
                sep2 <= cov,
                "{name} trial {trial} eps {eps}: sep(2e) {sep2} > cover {cov}"
            );
            assert!(
                greedy <= sep && greedy >= cov.min(sep),
                "{name} trial {trial} eps {eps}: greedy {greedy} outside [{cov}, {sep}]"
            );
        }
    }
}

/// Random unipotent integer matrices: the symbolic binomial expansion of M^n
/// and the Jordan-structure growth exponent must agree on the degree.
#[test]
fn symbolic_growth_matches_jordan_growth_on_random_unipotents() {
    let mut rng = cell_rng(14, "unipotent-degree");
    for trial in 0..200 {
        let dim = rng.gen_range(2..=5usize);
        // random strictly-upper-triangular part on a unit diagonal
        let mut rows = vec![vec![0i64; dim]; dim];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
            for j in (i + 1)..dim {
                row[j] = rng.gen_range(-2..=2);
            }
        }
        let mut m = ExactIntMatrix::from_rows(&rows).unwrap();
        // conjugate by a few elementary unimodular shears to hide the
        // triangular shape
        for _ in 0..6 {
            let a = rng.gen_range(0..dim);
            let b = rng.gen_range(0..dim);
            if a == b {
                continue;
            }
            let c: i64 = rng.gen_range(-2..=2i64);
            let mut e = vec![vec![0i64; dim]; dim];
            let mut e_inv = vec![vec![0i64; dim]; dim];
            for i in 0..dim {
                e[i][i] = 1;
                e_inv[i][i] = 1;
            }
            e[a][b] = c;
            e_inv[a][b] = -c;
            let em = ExactIntMatrix::from_rows(&e).unwrap();
            let em_inv = ExactIntMatrix::from_rows(&e_inv).unwrap();
            m = em.mul(&m).mul(&em_inv);
        }
        let symbolic = symbolic_power_growth(&m).unwrap();
        let jordan = power_growth_exponent(&m).unwrap();
        assert_eq!(
            symbolic, jordan,
            "trial {trial}: symbolic degree {symbolic} != jordan growth {jordan} for {m:?}"
        );
        // exact nilpotency witness: (M - I)^dim = 0 for unipotent M
        let diff = m.sub(&ExactIntMatrix::identity(m.dim()));
        assert!(diff.pow(m.dim() as u64).is_zero(), "trial {trial}");
    }
}

#[test]
fn pgl2_class_is_conjugation_and_scaling_invariant() {
    let h_lox = CMat::new(
        2,
        vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    );
    let h_ell = CMat::new(
        2,
        vec![
            Complex64::new(0.8, 0.6),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    );
    let h_par = CMat::new(
        2,
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    );
    let cases = [
        (h_lox, Pgl2Class::Loxodromic),
        (h_ell, Pgl2Class::Elliptic),
        (h_par, Pgl2Class::Parabolic),
    ];
    let mut rng = cell_rng(15, "pgl2-invariance");
    for (h, expected) in &cases {
        for trial in 0..3000 {
            let g = random_conjugate(h, &mut rng);
            let scale = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
            let got = classify_pgl2(&g.scale(scale), DEFAULT_TOLERANCE);
            assert_eq!(got, *expected, "trial {trial}: {g:?}");
        }
    }
}

/// The estimator must assign the same exponent (within tolerance) to f and
/// f^2: h_pol is invariant under taking powers.
#[test]
fn estimate_invariant_under_squaring_the_shear() {
    let f = DynSystem::Torus(TorusAffineMap::linear(2, vec![1, 1, 0, 1]).unwrap());
    let f2 = DynSystem::Torus(TorusAffineMap::linear(2, vec![1, 2, 0, 1]).unwrap());
    let params = BowenParams::new(
        vec![0.05],
        vec![2, 4, 8, 16, 32, 64, 128],
        100_000,
        5,
    )
    .unwrap();
    let a = estimate_hpol(&f, &params, "power/f").unwrap();
    let b = estimate_hpol(&f2, &params, "power/f2").unwrap();
    assert!(
        (a.slope - b.slope).abs() <= 0.3,
        "f: {:.3}, f^2: {:.3}",
        a.slope,
        b.slope
    );
}

/// Derivative-norm growth of the shear is linear in n (exponent s = 1); the
/// fitted log-log slope of ||Df^n|| must sit near 1.
#[test]
fn shear_derivative_norm_slope_matches_jordan_exponent() {
    let f = DynSystem::Torus(TorusAffineMap::linear(2, vec![1, 1, 0, 1]).unwrap());
    let mut rng = cell_rng(16, "norm-slope");
    let samples: Vec<_> = (0..32).map(|_| f.sample_point(&mut rng)).collect();
    let sup = f.max_derivative_norm(256, &samples);
    let ns: Vec<f64> = (1..=256).map(|n| n as f64).collect();
    let fit = polent::fit::log_log_fit(&ns[31..], &sup[31..]).unwrap();
    assert!(
        (fit.slope - 1.0).abs() <= 0.15,
        "slope {:.3} not near 1",
        fit.slope
    );
}

/// Catalog estimator hints must all be valid Bowen parameters, and systems
/// with cohomology data must yield bounds (the suite relies on both).
#[test]
fn builtin_catalog_hints_and_bounds_are_well_formed() {
    let cat = builtin_suite();
    assert!(!cat.systems.is_empty());
    for entry in &cat.systems {
        entry.build().unwrap();
        if let Some(h) = &entry.estimate {
            BowenParams::new(h.eps.clone(), h.n_schedule.clone(), h.pool, 2).unwrap();
        }
        if entry.cohomology.is_some() {
            let bounds = entry.upper_bounds().unwrap();
            if let Some(pred) = entry.predicted_hpol {
                assert!(
                    pred <= bounds.minimum() as f64 + 1e-12,
                    "{}: prediction {pred} above bound {}",
                    entry.name,
                    bounds.minimum()
                );
            }
        }
    }
}

/// Unipotency is preserved by powers, and the unipotency order divides out:
/// surface classification must agree between M and M^p for elliptic/parabolic
/// examples.
#[test]
fn surface_class_stable_under_powers() {
    use polent::cohomology::{surface_class, SurfaceClass};
    let parabolic = ExactIntMatrix::from_rows(&[
        vec![1, 1, 0],
        vec![0, 1, 1],
        vec![0, 0, 1],
    ])
    .unwrap();
    for p in 1..=4u64 {
        assert_eq!(
            surface_class(&parabolic.pow(p)).unwrap(),
            SurfaceClass::Parabolic,
            "power {p}"
        );
    }
    let elliptic = ExactIntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
    assert_eq!(surface_class(&elliptic).unwrap(), SurfaceClass::Elliptic);
    // a power of an elliptic map can become the identity but stays elliptic
    assert_eq!(
        surface_class(&elliptic.pow(2)).unwrap(),
        SurfaceClass::Elliptic
    );
}

#[test]
fn torus_iterates_invert_exactly() {
    let f = TorusAffineMap::new(3, vec![1, 1, 0, 0, 1, 1, 0, 0, 1], vec![0.3, 0.1, 0.7]).unwrap();
    let sys = DynSystem::Torus(f);
    let mut rng = cell_rng(17, "roundtrip");
    for _ in 0..500 {
        let p = sys.sample_point(&mut rng);
        for n in [1i64, 3, 17] {
            let q = sys.iterate(&sys.iterate(&p, n), -n);
            assert!(sys.distance(&p, &q) <= 1e-9);
        }
    }
}

/// BigInt sanity on the exact layer: determinant of a unimodular product
/// stays +/-1 no matter how the entries blow up.
#[test]
fn unimodular_products_stay_unimodular() {
    let a = ExactIntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
    let b = ExactIntMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).unwrap();
    let mut m = ExactIntMatrix::identity(2);
    for _ in 0..40 {
        m = m.mul(&a).mul(&b);
    }
    let det = m.det();
    assert!(det == BigInt::from(1) || det == BigInt::from(-1));
    m.require_unimodular().unwrap();
}
