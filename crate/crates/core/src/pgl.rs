//! Conjugacy-invariant classification of homographies of P^1 and P^2 with
//! their predicted polynomial entropy.
//!
//! For P^1 the single invariant C = tr^2/det decides everything. For P^2 the
//! class is determined by the grouping of eigenvalue moduli together with
//! defectiveness (Jordan structure) of repeated eigenvalues; entropy is 2
//! exactly for the wandering-saddle configurations, 1 for the mixed and
//! parabolic ones, 0 for isometries.

use num_complex::Complex64;
use rand::Rng;

use crate::zoo::CMat;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Measurements between `tol` and `AMBIGUITY_FACTOR * tol` of a decision
/// boundary are reported as ambiguous instead of silently rounded.
pub const AMBIGUITY_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pgl2Class {
    Identity,
    /// Conjugate to a rotation; C = tr^2/det real in [0, 4).
    Elliptic,
    /// C = 4 but not the identity.
    Parabolic,
    /// Everything else: attracting/repelling fixed-point pair.
    Loxodromic,
    /// Too close to a decision boundary for the requested tolerance.
    Ambiguous,
}

impl Pgl2Class {
    pub fn predicted_hpol(self) -> Option<u32> {
        match self {
            Pgl2Class::Identity | Pgl2Class::Elliptic => Some(0),
            Pgl2Class::Parabolic | Pgl2Class::Loxodromic => Some(1),
            Pgl2Class::Ambiguous => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pgl3Class {
    /// All eigenvalue moduli equal, diagonalizable.
    Isometry,
    /// Three distinct moduli: diag(lambda, mu, 1), |lambda| > 1 > |mu|.
    SaddleDiagonal,
    /// Defective pair off the unit modulus: (1 1; 0 1) + nu, |nu| != 1.
    SaddleJordan,
    /// Two moduli, semisimple: diag(1, alpha, nu), |alpha| = 1 != |nu|.
    MixedDiagonal,
    /// Defective pair with all moduli equal: (beta 1; 0 beta) + 1.
    ParabolicRotation,
    /// Single Jordan block of size 3.
    FullJordan,
    Ambiguous,
}

impl Pgl3Class {
    pub fn predicted_hpol(self) -> Option<u32> {
        match self {
            Pgl3Class::Isometry => Some(0),
            Pgl3Class::MixedDiagonal | Pgl3Class::ParabolicRotation | Pgl3Class::FullJordan => {
                Some(1)
            }
            Pgl3Class::SaddleDiagonal | Pgl3Class::SaddleJordan => Some(2),
            Pgl3Class::Ambiguous => None,
        }
    }
}

/// tr(H)^2 / det(H): the conjugation- and scaling-invariant of a 2x2 matrix.
pub fn moebius_invariant(h: &CMat) -> Complex64 {
    assert_eq!(h.dim, 2);
    let t = h.trace();
    t * t / h.det()
}

pub fn classify_pgl2(h: &CMat, tol: f64) -> Pgl2Class {
    let c = moebius_invariant(h);
    // distance from C to the real segment [0, 4]
    let re_clamped = c.re.clamp(0.0, 4.0);
    let seg_dist = (c - Complex64::new(re_clamped, 0.0)).norm();
    if seg_dist > AMBIGUITY_FACTOR * tol {
        return Pgl2Class::Loxodromic;
    }
    if seg_dist > tol {
        return Pgl2Class::Ambiguous;
    }
    // on the segment: is it the parabolic endpoint?
    let end_dist = (c - Complex64::new(4.0, 0.0)).norm();
    if end_dist <= tol {
        if is_scalar(h, tol) {
            Pgl2Class::Identity
        } else {
            Pgl2Class::Parabolic
        }
    } else if end_dist <= AMBIGUITY_FACTOR * tol {
        Pgl2Class::Ambiguous
    } else {
        Pgl2Class::Elliptic
    }
}

fn is_scalar(h: &CMat, tol: f64) -> bool {
    let scale = h.frobenius_norm();
    let n = h.dim;
    let diag = h.get(0, 0);
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { diag } else { Complex64::new(0.0, 0.0) };
            if (h.get(i, j) - expect).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Roots of z^2 + b z + c, numerically stable (larger root first).
pub fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    // pick the sign that avoids cancellation
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -(b + disc) / 2.0
    } else {
        -(b - disc) / 2.0
    };
    if q.norm() == 0.0 {
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [q, c / q]
    }
}

/// Roots of z^3 + a z^2 + b z + c over C (Cardano).
pub fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    let third = 1.0 / 3.0;
    let shift = a * third;
    let p = b - a * a * third;
    let q = 2.0 * a * a * a / 27.0 - a * b * third + c;
    let half_q = q / 2.0;
    let disc = (half_q * half_q + p * p * p / 27.0).sqrt();
    // choose the branch with the larger |u| for stability
    let u3a = -half_q + disc;
    let u3b = -half_q - disc;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
    let omega = Complex64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    if u3.norm() == 0.0 {
        // p == q == 0: triple root
        for r in roots.iter_mut() {
            *r = -shift;
        }
        return roots;
    }
    let u = u3.powf(third);
    for (k, r) in roots.iter_mut().enumerate() {
        let uk = u * omega.powu(k as u32);
        *r = uk - p / (3.0 * uk) - shift;
    }
    roots
}

/// Eigenvalues of a 2x2 or 3x3 complex matrix via closed forms.
pub fn eigenvalues(h: &CMat) -> Vec<Complex64> {
    match h.dim {
        2 => quadratic_roots(-h.trace(), h.det()).to_vec(),
        3 => {
            let tr = h.trace();
            // sum of principal 2x2 minors
            let m = |i: usize, j: usize| h.get(i, j);
            let sum2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)
                + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)
                + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
            cubic_roots(-tr, sum2, -h.det()).to_vec()
        }
        _ => unimplemented!("eigenvalues only needed for dim <= 3"),
    }
}

/// Numerical rank of a small complex matrix at pivot threshold `thresh`.
fn numeric_rank(m: &CMat, thresh: f64) -> usize {
    let n = m.dim;
    let mut a = m.entries.clone();
    let mut rank = 0;
    for col in 0..n {
        // find best pivot in remaining rows
        let (pr, pv) = (rank..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((rank, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pv <= thresh {
            continue;
        }
        for c in 0..n {
            a.swap(rank * n + c, pr * n + c);
        }
        let pivot = a[rank * n + col];
        for r in (rank + 1)..n {
            let f = a[r * n + col] / pivot;
            for c in 0..n {
                let sub = f * a[rank * n + c];
                a[r * n + c] -= sub;
            }
        }
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

fn shifted(h: &CMat, lambda: Complex64) -> CMat {
    let mut e = h.entries.clone();
    for i in 0..h.dim {
        e[i * h.dim + i] -= lambda;
    }
    CMat::new(h.dim, e)
}

/// Multiple roots of the characteristic cubic are intrinsically
/// ill-conditioned in floating point: a triple root computed from a
/// perturbed matrix splits by ~eps^(1/3), a double root by ~eps^(1/2).
/// Roots closer than these radii are therefore collapsed onto their exact
/// cluster mean (recovered from the trace, which is accurate), so the
/// subsequent modulus comparisons at `tol` see clean values.
const TRIPLE_CLUSTER_RADIUS: f64 = 5e-4;
const DOUBLE_CLUSTER_RADIUS: f64 = 1e-6;

fn cluster_correct(eig: &mut [Complex64; 3], trace: Complex64) {
    let scale = eig.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let d = |i: usize, j: usize| (eig[i] - eig[j]).norm();
    if d(0, 1) <= TRIPLE_CLUSTER_RADIUS * scale
        && d(1, 2) <= TRIPLE_CLUSTER_RADIUS * scale
        && d(0, 2) <= TRIPLE_CLUSTER_RADIUS * scale
    {
        let mean = trace / 3.0;
        *eig = [mean, mean, mean];
        return;
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            if d(i, j) <= DOUBLE_CLUSTER_RADIUS * scale {
                let other = 3 - i - j;
                // the remaining root is simple, hence accurate; the pair
                // mean recovered from the trace is accurate too
                let mean = (trace - eig[other]) / 2.0;
                eig[i] = mean;
                eig[j] = mean;
                return;
            }
        }
    }
}

pub fn classify_pgl3(h: &CMat, tol: f64) -> Pgl3Class {
    assert_eq!(h.dim, 3);
    let h = h.normalized();
    let mut eig3: [Complex64; 3] = eigenvalues(&h).try_into().unwrap();
    cluster_correct(&mut eig3, h.trace());
    let mut eig = eig3.to_vec();
    eig.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();

    // relative modulus comparisons, with an ambiguity band
    let rel = |a: f64, b: f64| (a - b).abs() / a.max(b).max(f64::MIN_POSITIVE);
    let mut ambiguous = false;
    let mut close = [false; 2]; // moduli[0]~moduli[1], moduli[1]~moduli[2]
    for i in 0..2 {
        let r = rel(moduli[i], moduli[i + 1]);
        if r <= tol {
            close[i] = true;
        } else if r <= AMBIGUITY_FACTOR * tol {
            ambiguous = true;
        }
    }
    if ambiguous {
        return Pgl3Class::Ambiguous;
    }

    let scale = h.frobenius_norm();
    let rank_at = |lambda: Complex64| numeric_rank(&shifted(&h, lambda), tol.sqrt() * scale);
    // eigenvalue equality (not just modulus) at the same relative tolerance
    let eq = |a: Complex64, b: Complex64| (a - b).norm() <= tol.sqrt() * moduli[0];

    match (close[0], close[1]) {
        (false, false) => Pgl3Class::SaddleDiagonal,
        (true, true) => {
            // all moduli equal
            if eq(eig[0], eig[1]) && eq(eig[1], eig[2]) {
                let mean = (eig[0] + eig[1] + eig[2]) / 3.0;
                match rank_at(mean) {
                    0 => Pgl3Class::Isometry, // scalar = identity in PGL
                    1 => Pgl3Class::ParabolicRotation,
                    _ => Pgl3Class::FullJordan,
                }
            } else {
                // at most a double eigenvalue among equal moduli
                let pair = pair_mean(&eig, eq);
                match pair {
                    Some(lambda) if rank_at(lambda) == 2 => Pgl3Class::ParabolicRotation,
                    _ => Pgl3Class::Isometry,
                }
            }
        }
        (one_two, _) => {
            // exactly two modulus groups; the repeated-modulus pair is
            // eig[0],eig[1] or eig[1],eig[2]
            let (a, b) = if one_two {
                (eig[0], eig[1])
            } else {
                (eig[1], eig[2])
            };
            if eq(a, b) && rank_at((a + b) / 2.0) == 2 {
                Pgl3Class::SaddleJordan
            } else {
                Pgl3Class::MixedDiagonal
            }
        }
    }
}

fn pair_mean(eig: &[Complex64], eq: impl Fn(Complex64, Complex64) -> bool) -> Option<Complex64> {
    for i in 0..eig.len() {
        for j in (i + 1)..eig.len() {
            if eq(eig[i], eig[j]) {
                return Some((eig[i] + eig[j]) / 2.0);
            }
        }
    }
    None
}

/// P H P^{-1} for a random well-conditioned P (resampled until
/// ||P||_F ||P^{-1}||_F <= 20), for conjugation-invariance checks.
pub fn random_conjugate<R: Rng>(h: &CMat, rng: &mut R) -> CMat {
    let n = h.dim;
    loop {
        let entries: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
            .collect();
        let p = CMat::new(n, entries);
        if let Some(p_inv) = p.inverse() {
            if p.frobenius_norm() * p_inv.frobenius_norm() <= 20.0 {
                return p.mul(h).mul(&p_inv);
            }
        }
    }
}
