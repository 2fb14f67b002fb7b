//! Acceptance gate: ten numbered criteria covering the exact oracles, the
//! statistical exponent estimator, the classifiers, the slow-growth
//! construction, the explicit cover, and the recurrence profiles. Each
//! criterion prints a single PASS/FAIL line; the test fails if any criterion
//! fails. Run with `--nocapture` to see the lines on success.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

use polent::catalog::{builtin_suite, Catalog, CohomologySpec, FamilySpec, SystemEntry};
use polent::cover::{northsouth_cover, NsParams};
use polent::intmat::ExactIntMatrix;
use polent::intpoly::{unit_circle_test, IntPoly, UnitCircleVerdict};
use polent::lab::{
    bowen_distance, bowen_distance_matrix, cover_count_degree, estimate_hpol,
    greedy_separated_on_matrix, max_separated_exact, min_cover_exact, recurrence_profile,
    restricted_estimate, sample_pool, BowenParams, RegionPredicate,
};
use polent::pgl::{classify_pgl3, random_conjugate, Pgl3Class, DEFAULT_TOLERANCE};
use polent::seed::cell_rng;
use polent::slow::{
    birkhoff_closed, birkhoff_direct, coboundary_coefficients, derivative_growth_report,
    equicontinuity_probe, GapSchedule, Observable, SlowSkew,
};
use polent::zoo::{chordal_dist, CMat, DynSystem, Point, ProjectiveMap, TorusAffineMap};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn record(&mut self, idx: u32, name: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("criterion {idx} ({name}): {tag} — {detail}");
        if !pass {
            self.failures.push(format!("criterion {idx} ({name}): {detail}"));
        }
    }
}

fn estimate_named(cat: &Catalog, name: &str) -> (Result<f64, String>, f64) {
    let t = Instant::now();
    let entry = cat.get(name).unwrap();
    let sys = entry.build().unwrap();
    let h = entry.estimate.as_ref().unwrap();
    let params = BowenParams::new(h.eps.clone(), h.n_schedule.clone(), h.pool, 2).unwrap();
    let r = estimate_hpol(&sys, &params, name)
        .map(|f| f.slope)
        .map_err(|e| e.to_string());
    (r, t.elapsed().as_secs_f64())
}

fn tenth() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(10))
}

fn jordan_block(k: usize) -> ExactIntMatrix {
    let mut rows = vec![vec![0i64; k]; k];
    for i in 0..k {
        rows[i][i] = 1;
        if i + 1 < k {
            rows[i][i + 1] = 1;
        }
    }
    ExactIntMatrix::from_rows(&rows).unwrap()
}

#[test]
fn acceptance_criteria() {
    let cat = builtin_suite();
    let mut gate = Gate { failures: Vec::new() };

    // ------------------------------------------------------------------ 1
    {
        let (est2, t2) = estimate_named(&cat, "shear-t2");
        let e2 = est2.clone().unwrap_or(f64::NAN);
        let t3_start = Instant::now();
        let shear3 = DynSystem::Torus(
            TorusAffineMap::linear(3, vec![1, 1, 0, 0, 1, 1, 0, 0, 1]).unwrap(),
        );
        let params3 =
            BowenParams::new(vec![0.4], vec![6, 8, 12, 16, 24, 32], 400_000, 2).unwrap();
        let e3 = estimate_hpol(&shear3, &params3, "shear-t3")
            .map(|f| f.slope)
            .unwrap_or(f64::NAN);
        let t3 = t3_start.elapsed().as_secs_f64();
        let exact_start = Instant::now();
        let degrees_ok = (2..=6).all(|k| {
            cover_count_degree(&jordan_block(k)).unwrap() == k * (k - 1) / 2
        });
        let t_exact = exact_start.elapsed().as_secs_f64();
        let pass = (0.8..=1.2).contains(&e2)
            && t2 < 120.0
            && (2.5..=3.5).contains(&e3)
            && t3 < 600.0
            && degrees_ok
            && t_exact < 1.0;
        gate.record(
            1,
            "unipotent torus exponents",
            pass,
            format!(
                "k=2 est {e2:.3} in [0.8,1.2] ({t2:.0}s), k=3 est {e3:.3} in [2.5,3.5] \
                 ({t3:.0}s), |S_n| degree = k(k-1)/2 for k=2..6: {degrees_ok} ({t_exact:.2}s)"
            ),
        );
    }

    // ------------------------------------------------------------------ 2
    {
        let (est, _t) = estimate_named(&cat, "product-shear-t4");
        let e = est.unwrap_or(f64::NAN);
        let product = ExactIntMatrix::from_rows(&[
            vec![1, 1, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 1],
            vec![0, 0, 0, 1],
        ])
        .unwrap();
        let exact = cover_count_degree(&product).unwrap();
        let pass = (1.6..=2.4).contains(&e) && exact == 2;
        gate.record(
            2,
            "product shear",
            pass,
            format!("est {e:.3} in [1.6,2.4], exact block degree {exact} == 2"),
        );
    }

    // ------------------------------------------------------------------ 3
    {
        let reps = [
            ("p2-isometry", Pgl3Class::Isometry, 0.0),
            ("p2-saddle-diagonal", Pgl3Class::SaddleDiagonal, 2.0),
            ("p2-saddle-jordan", Pgl3Class::SaddleJordan, 2.0),
            ("p2-mixed-diagonal", Pgl3Class::MixedDiagonal, 1.0),
            ("p2-parabolic-rotation", Pgl3Class::ParabolicRotation, 1.0),
            ("p2-full-jordan", Pgl3Class::FullJordan, 1.0),
        ];
        let mut misclassified = 0usize;
        let mut concordant = true;
        let mut slow = Vec::new();
        let mut details = Vec::new();
        let mut rng = cell_rng(3, "pgl3-conjugations");
        for (name, class, predicted) in reps {
            let entry = cat.get(name).unwrap();
            let DynSystem::Projective(map) = entry.build().unwrap() else {
                unreachable!()
            };
            for _ in 0..500 {
                let g = random_conjugate(&map.h, &mut rng);
                let scale = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
                if classify_pgl3(&g.scale(scale), DEFAULT_TOLERANCE) != class {
                    misclassified += 1;
                }
            }
            let (est, t) = estimate_named(&cat, name);
            let e = est.unwrap_or(f64::NAN);
            if (e - predicted).abs() > 0.35 {
                concordant = false;
            }
            if t >= 180.0 {
                slow.push(format!("{name} {t:.0}s"));
            }
            details.push(format!("{name} {e:.2}/{predicted}"));
        }
        let pass = misclassified == 0 && concordant && slow.is_empty();
        gate.record(
            3,
            "PGL3 classifier and estimator",
            pass,
            format!(
                "misclassified {misclassified}/3000, concordance +-0.35: {} [{}]{}",
                concordant,
                details.join(", "),
                if slow.is_empty() {
                    String::new()
                } else {
                    format!(", over budget: {}", slow.join(", "))
                }
            ),
        );
    }

    // ------------------------------------------------------------------ 4
    {
        let (full, _t) = estimate_named(&cat, "p1-northsouth");
        let full = full.unwrap_or(f64::NAN);
        let entry = cat.get("p1-northsouth").unwrap();
        let sys = entry.build().unwrap();
        let h = entry.estimate.as_ref().unwrap();
        let params = BowenParams::new(h.eps.clone(), h.n_schedule.clone(), h.pool, 2).unwrap();
        let poles: Vec<Vec<Complex64>> = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let away: RegionPredicate = std::sync::Arc::new(move |p: &Point| match p {
            Point::Projective(v) => poles.iter().all(|a| chordal_dist(v, a) > 0.1),
            _ => true,
        });
        let restricted = restricted_estimate(&sys, &params, away, "p1-northsouth/away")
            .map(|f| f.slope)
            .unwrap_or(f64::NAN);
        let pass = (0.8..=1.2).contains(&full) && restricted <= 0.15;
        gate.record(
            4,
            "restricted north-south entropy",
            pass,
            format!("full {full:.3} in [0.8,1.2], away from fixed points {restricted:.3} <= 0.15"),
        );
    }

    // ------------------------------------------------------------------ 5
    {
        let mut violations = Vec::new();
        for entry in &cat.systems {
            if entry.cohomology.is_none() || entry.estimate.is_none() {
                continue;
            }
            let bound = entry.upper_bounds().unwrap().minimum();
            let (est, _t) = estimate_named(&cat, &entry.name);
            let e = est.unwrap_or(f64::NAN);
            if !(e <= bound as f64 + 0.2) {
                violations.push(format!("{} est {e:.2} > bound {bound}+0.2", entry.name));
            }
        }
        let threefold = SystemEntry {
            name: "threefold".into(),
            family: FamilySpec::Torus {
                a: vec![vec![1]],
                b: vec![],
            },
            predicted_hpol: None,
            cohomology: Some(CohomologySpec::Rates {
                k: 3,
                s_rates: vec![4, 4],
                b2: 15,
            }),
            estimate: None,
        };
        let bounds = threefold.upper_bounds().unwrap();
        let exact_ok = bounds.gromov_sum == 11 && bounds.small_dim == Some(9);
        let pass = violations.is_empty() && exact_ok;
        gate.record(
            5,
            "upper-bound consistency",
            pass,
            format!(
                "estimates below cohomology bounds: {}, threefold bounds (11, 9): {exact_ok}",
                if violations.is_empty() {
                    "yes".into()
                } else {
                    violations.join("; ")
                }
            ),
        );
    }

    // ------------------------------------------------------------------ 6
    {
        let mut rng = cell_rng(6, "kronecker");
        let mut errors = 0usize;
        let mut nilpotency_failures = 0usize;
        for trial in 0..1000usize {
            if trial % 2 == 0 {
                // block diagonal of finite-order and unipotent blocks,
                // conjugated by unimodular shears
                let m = random_virtually_unipotent(&mut rng);
                let p = m.char_poly();
                match unit_circle_test(&p).unwrap() {
                    UnitCircleVerdict::AllRootsOfUnity { orders } => {
                        if oracle_max_root_modulus(&p) > 1.0 + 1e-3 {
                            errors += 1;
                        }
                        let mut order = 1u64;
                        for (d, _) in orders {
                            order = lcm(order, d as u64);
                        }
                        let diff = m.pow(order).sub(&ExactIntMatrix::identity(m.dim()));
                        if !diff.pow(m.dim() as u64).is_zero() {
                            nilpotency_failures += 1;
                        }
                    }
                    UnitCircleVerdict::HasModulusGreaterOne => errors += 1,
                }
            } else {
                // companion matrix of (x - 2) * random monic integer q(x)
                let p = times_x_minus_two(&mut rng);
                match unit_circle_test(&p).unwrap() {
                    UnitCircleVerdict::HasModulusGreaterOne => {
                        if oracle_max_root_modulus(&p) < 1.0 + 1e-3 {
                            errors += 1;
                        }
                    }
                    UnitCircleVerdict::AllRootsOfUnity { .. } => errors += 1,
                }
            }
        }
        let pass = errors == 0 && nilpotency_failures == 0;
        gate.record(
            6,
            "Kronecker exactness",
            pass,
            format!(
                "oracle disagreements {errors}/1000, (M^m - I)^dim != 0 cases: \
                 {nilpotency_failures}"
            ),
        );
    }

    // ------------------------------------------------------------------ 7
    {
        let t = Instant::now();
        let strict = SlowSkew::new(GapSchedule::new(vec![1, 3, 104], tenth()).unwrap(), 8).unwrap();
        let gap_ok = strict.schedule.check_gap_condition().holds;
        // dense multiplicative schedule avoids aliasing against the
        // resonance period; the running sup is the bounded quantity
        let mut ns = Vec::new();
        let mut n = 50u64;
        while n <= 100_000 {
            ns.push(n);
            n = ((n as f64 * 1.15).ceil() as u64).max(n + 1);
        }
        let report = derivative_growth_report(&strict, &ns, 64, 0.25);
        let mut running = 0.0f64;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &(n, dn) in &report.rows {
            running = running.max(dn);
            if n >= 1000 {
                xs.push((n as f64).ln());
                ys.push(running.max(1e-300).ln());
            }
        }
        let slope = polent::fit::least_squares(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
        let cob = coboundary_coefficients(&strict.modes).unwrap();
        let demo = SlowSkew::new(
            GapSchedule::new(vec![1, 2, 4, 8, 16], tenth()).unwrap(),
            8,
        )
        .unwrap();
        let probe = equicontinuity_probe(&demo, 30_000, 64);
        let elapsed = t.elapsed().as_secs_f64();
        let pass = gap_ok
            && slope <= 0.25
            && cob.min_modulus >= 0.05
            && probe.unbounded_evidence
            && elapsed < 180.0;
        gate.record(
            7,
            "slow-growth construction",
            pass,
            format!(
                "gap condition {gap_ok}, sup|D_n| slope {slope:.3} <= 0.25, min |b_k| \
                 {:.3} >= 0.05, demo staircase jumps {} at scales {:?} (unbounded: {}), \
                 {elapsed:.0}s",
                cob.min_modulus, probe.jumps, probe.resonance_scales, probe.unbounded_evidence
            ),
        );
    }

    // ------------------------------------------------------------------ 8
    {
        let spaces = sandwich_spaces();
        let mut sandwich_ok = true;
        let mut monotone_ok = true;
        for trial in 0..100usize {
            let (_, sys) = &spaces[trial % spaces.len()];
            let mut rng = cell_rng(8, &format!("sandwich/{trial}"));
            let pool: Vec<_> = (0..12).map(|_| sys.sample_point(&mut rng)).collect();
            let n = [1u64, 4, 16][trial % 3];
            let dm = bowen_distance_matrix(sys, &pool, n);
            for eps in [0.05, 0.1, 0.3] {
                let sep = max_separated_exact(&dm, eps);
                let sep2 = max_separated_exact(&dm, 2.0 * eps);
                let cov = min_cover_exact(&dm, eps);
                let greedy = greedy_separated_on_matrix(&dm, eps);
                if !(sep2 <= cov && cov <= sep && greedy <= sep) {
                    sandwich_ok = false;
                }
            }
            let p = sys.sample_point(&mut rng);
            let q = sys.sample_point(&mut rng);
            let mut prev = 0.0;
            for n in [1u64, 2, 4, 8, 16, 32] {
                let d = bowen_distance(sys, &p, &q, n);
                if d < prev - 1e-12 {
                    monotone_ok = false;
                }
                prev = d;
            }
        }
        let mut axioms_ok = true;
        for (name, sys) in &spaces {
            let mut rng = cell_rng(8, &format!("axioms/{name}"));
            for _ in 0..10_000 {
                let p = sys.sample_point(&mut rng);
                let q = sys.sample_point(&mut rng);
                let r = sys.sample_point(&mut rng);
                let dpq = sys.distance(&p, &q);
                if !(dpq >= 0.0
                    && (dpq - sys.distance(&q, &p)).abs() <= 1e-12
                    && sys.distance(&p, &p) <= 1e-12
                    && sys.distance(&p, &r) <= dpq + sys.distance(&q, &r) + 1e-10)
                {
                    axioms_ok = false;
                }
            }
        }
        let strict = SlowSkew::new(GapSchedule::new(vec![1, 3, 104], tenth()).unwrap(), 8).unwrap();
        let mut birkhoff_max = 0.0f64;
        for x in [0.0, 0.21, 0.73] {
            for n in [10u64, 100, 1000] {
                for obs in [Observable::G, Observable::GPrime] {
                    let a = birkhoff_closed(&strict.modes, x, n, obs);
                    let b = birkhoff_direct(&strict.modes, &strict.alpha.alpha, x, n, obs);
                    birkhoff_max = birkhoff_max.max((a - b).abs());
                }
            }
        }
        let pass = sandwich_ok && monotone_ok && axioms_ok && birkhoff_max <= 1e-9;
        gate.record(
            8,
            "Bowen metric property suite",
            pass,
            format!(
                "sandwich on 100 pools: {sandwich_ok}, d_n monotone: {monotone_ok}, metric \
                 axioms 10^4 triples/space: {axioms_ok}, Birkhoff closed-vs-direct max \
                 discrepancy {birkhoff_max:.2e} <= 1e-9"
            ),
        );
    }

    // ------------------------------------------------------------------ 9
    {
        let mut sizes = Vec::new();
        let mut verified = true;
        for n in [250u64, 500, 1000, 2000] {
            let report = northsouth_cover(&NsParams::standard(0.1, n)).unwrap();
            verified &= report.verified && report.transit_ok;
            sizes.push(report.size);
        }
        let ratio_ok = sizes.windows(2).all(|w| w[1] as f64 / w[0] as f64 <= 2.2);
        let pass = verified && ratio_ok;
        gate.record(
            9,
            "explicit linear cover",
            pass,
            format!("verified on 10^4 points: {verified}, sizes {sizes:?}, size(2n)/size(n) <= 2.2: {ratio_ok}"),
        );
    }

    // ------------------------------------------------------------------ 10
    {
        let mut iso_ok = true;
        let mut iso_detail = Vec::new();
        for name in ["rotation-t2", "p1-rotation", "p2-isometry"] {
            let sys = cat.get(name).unwrap().build().unwrap();
            let params = BowenParams::new(vec![0.1], vec![2], 2000, 2).unwrap();
            let pool = sample_pool(&sys, &params, &format!("recurrence/{name}")).unwrap();
            let short = recurrence_profile(&sys, &pool, 0.1, 1000);
            let long = recurrence_profile(&sys, &pool, 0.1, 2000);
            let stable = short.max_first_return == long.max_first_return;
            if short.fraction_nonreturning != 0.0 || !stable {
                iso_ok = false;
            }
            iso_detail.push(format!(
                "{name} nonret {:.3} max_ret {:?} stable {stable}",
                short.fraction_nonreturning, short.max_first_return
            ));
        }
        let ns = DynSystem::Projective(
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
        let params = BowenParams::new(vec![0.1], vec![2], 2000, 2).unwrap();
        let pool = sample_pool(&ns, &params, "recurrence/northsouth").unwrap();
        let profile = recurrence_profile(&ns, &pool, 0.1, 1000);
        let wandering = profile.fraction_nonreturning > 0.0;
        let pass = iso_ok && wandering;
        gate.record(
            10,
            "recurrence dichotomy",
            pass,
            format!(
                "isometries return: {iso_ok} [{}]; north-south nonreturning {:.3} > 0 \
                 (wandering certificate h_pol >= 1: {wandering})",
                iso_detail.join(", "),
                profile.fraction_nonreturning
            ),
        );
    }

    assert!(
        gate.failures.is_empty(),
        "failed criteria:\n{}",
        gate.failures.join("\n")
    );
}

#[test]
fn oracle_handles_multiple_roots() {
    // (x - 1)^6: without square-free reduction the attainable accuracy is
    // ~eps^(1/6) ~ 3e-3, outside the margin
    let p = IntPoly::from_i64(&[1, -6, 15, -20, 15, -6, 1]);
    assert!((oracle_max_root_modulus(&p) - 1.0).abs() < 1e-6);
    // (x - 2)(x - 1)^5
    let mut q = IntPoly::from_i64(&[-1, 5, -10, 10, -5, 1]);
    q = q.mul(&IntPoly::from_i64(&[-2, 1]));
    assert!((oracle_max_root_modulus(&q) - 2.0).abs() < 1e-6);
    // Phi_4^2 * Phi_3 = (x^2+1)^2 (x^2+x+1)
    let r = IntPoly::from_i64(&[1, 0, 2, 0, 1]).mul(&IntPoly::from_i64(&[1, 1, 1]));
    assert!((oracle_max_root_modulus(&r) - 1.0).abs() < 1e-6);
}

fn sandwich_spaces() -> Vec<(&'static str, DynSystem)> {
    use polent::zoo::SkewProduct;
    vec![
        (
            "torus",
            DynSystem::Torus(TorusAffineMap::new(2, vec![1, 1, 0, 1], vec![0.1, 0.2]).unwrap()),
        ),
        (
            "p1",
            DynSystem::Projective(
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
            ),
        ),
        (
            "p2",
            DynSystem::Projective(
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
            ),
        ),
        (
            "skew",
            DynSystem::Skew(
                SkewProduct::new(
                    0.41421356237309515,
                    vec![(1, Complex64::new(0.3, 0.1))],
                )
                .unwrap(),
            ),
        ),
    ]
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Block diagonal of finite-order and unipotent integer blocks (dim <= 6),
/// conjugated by random elementary unimodular shears.
fn random_virtually_unipotent<R: Rng>(rng: &mut R) -> ExactIntMatrix {
    let finite_order: [&[&[i64]]; 4] = [
        &[&[1]],
        &[&[-1]],
        &[&[0, -1], &[1, 0]],   // order 4
        &[&[0, -1], &[1, -1]],  // order 3
    ];
    let mut blocks: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut dim = 0usize;
    while dim < 2 || (dim < 6 && rng.gen::<bool>()) {
        if rng.gen::<bool>() {
            let b = finite_order[rng.gen_range(0..finite_order.len())];
            if dim + b.len() > 6 {
                break;
            }
            dim += b.len();
            blocks.push(b.iter().map(|r| r.to_vec()).collect());
        } else {
            let k = rng.gen_range(1..=3.min(6 - dim));
            let mut b = vec![vec![0i64; k]; k];
            for i in 0..k {
                b[i][i] = 1;
                for j in (i + 1)..k {
                    b[i][j] = rng.gen_range(-2..=2);
                }
            }
            dim += k;
            blocks.push(b);
        }
    }
    let mut rows = vec![vec![0i64; dim]; dim];
    let mut at = 0usize;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                rows[at + i][at + j] = v;
            }
        }
        at += b.len();
    }
    let mut m = ExactIntMatrix::from_rows(&rows).unwrap();
    for _ in 0..6 {
        let a = rng.gen_range(0..dim);
        let b = rng.gen_range(0..dim);
        if a == b {
            continue;
        }
        let c: i64 = rng.gen_range(-2..=2);
        let mut e = vec![vec![0i64; dim]; dim];
        let mut e_inv = vec![vec![0i64; dim]; dim];
        for i in 0..dim {
            e[i][i] = 1;
            e_inv[i][i] = 1;
        }
        e[a][b] = c;
        e_inv[a][b] = -c;
        m = ExactIntMatrix::from_rows(&e)
            .unwrap()
            .mul(&m)
            .mul(&ExactIntMatrix::from_rows(&e_inv).unwrap());
    }
    m
}

/// (x - 2) * random monic integer polynomial of degree <= 5: guaranteed root
/// at 2, outside the unit circle.
fn times_x_minus_two<R: Rng>(rng: &mut R) -> IntPoly {
    let deg = rng.gen_range(1..=5usize);
    let mut q = vec![0i64; deg + 1];
    q[deg] = 1;
    for c in q.iter_mut().take(deg) {
        *c = rng.gen_range(-3..=3);
    }
    // avoid a zero constant term in the product (companion matrices of
    // interest are invertible)
    if q[0] == 0 {
        q[0] = 1;
    }
    let q = IntPoly::from_i64(&q);
    let factor = IntPoly::from_i64(&[-2, 1]);
    q.mul(&factor)
}

// -- exact square-free reduction (rational Euclid), so the numerical root
// finder never sees a multiple root: near a root of multiplicity m the
// attainable accuracy degrades to eps^(1/m), which would swamp the margin.

fn rp_trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    use num_traits::Zero as _;
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn rp_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    use num_traits::Zero;
    let mut r = rp_trim(a.to_vec());
    let db = b.len() - 1;
    let lead = b.last().unwrap();
    while r.len() - 1 >= db && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - 1 - db;
        let q = r.last().unwrap() / lead;
        for i in 0..=db {
            let t = &b[i] * &q;
            r[shift + i] = &r[shift + i] - &t;
        }
        r = rp_trim(r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() - 1 < db {
            break;
        }
    }
    r
}

fn rp_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    use num_traits::Zero;
    let mut x = rp_trim(a.to_vec());
    let mut y = rp_trim(b.to_vec());
    while !(y.len() == 1 && y[0].is_zero()) {
        let r = rp_rem(&x, &y);
        x = y;
        y = r;
    }
    // normalize monic
    let lead = x.last().unwrap().clone();
    if !lead.is_zero() {
        for c in &mut x {
            *c = &*c / &lead;
        }
    }
    x
}

fn rp_div_exact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    use num_traits::Zero;
    let mut r = rp_trim(a.to_vec());
    let db = b.len() - 1;
    let lead = b.last().unwrap();
    let mut q = vec![BigRational::zero(); r.len().saturating_sub(db).max(1)];
    while r.len() - 1 >= db && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / lead;
        q[shift] = c.clone();
        for i in 0..=db {
            let t = &b[i] * &c;
            r[shift + i] = &r[shift + i] - &t;
        }
        r = rp_trim(r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() - 1 < db {
            break;
        }
    }
    q
}

/// Durand-Kerner root finder on the square-free part of a monic integer
/// polynomial; the acceptance margin (1e-3) is far above its accuracy once
/// every root is simple.
fn oracle_max_root_modulus(p: &IntPoly) -> f64 {
    use num_traits::ToPrimitive;
    let rat: Vec<BigRational> = p
        .coeffs()
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let deriv: Vec<BigRational> = rat
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    let g = rp_gcd(&rat, &deriv);
    let sf = if g.len() > 1 { rp_div_exact(&rat, &g) } else { rat };
    let coeffs: Vec<f64> = sf.iter().map(|c| c.to_f64().unwrap()).collect();
    let deg = coeffs.len() - 1;
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z + Complex64::new(c, 0.0);
        }
        acc
    };
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|i| Complex64::from_polar(1.3, 0.7 + 2.1 * i as f64))
        .collect();
    for _ in 0..200 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-12 {
            break;
        }
    }
    roots.iter().map(|r| r.norm()).fold(0.0, f64::max)
}
