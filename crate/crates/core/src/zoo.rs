//! Concrete dynamical systems with exact evaluation and compact-metric-space
//! structure: affine torus maps, projective linear maps on P^1 and P^2, and
//! circle-rotation skew products on T^2.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::intmat::ExactIntMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ZooError {
    #[error("torus matrix must be unimodular (|det| = 1), got det = {det}")]
    NotUnimodular { det: i64 },
    #[error("projective matrix is singular")]
    SingularProjective,
    #[error("projective dimension must be 1 or 2, got {0}")]
    BadProjectiveDim(usize),
    #[error("skew product modes must have k >= 1")]
    ZeroMode,
    #[error("dimension mismatch between system and point")]
    DimensionMismatch,
}

// ---------------------------------------------------------------------------
// small complex matrices
// ---------------------------------------------------------------------------

/// Dense complex matrix, row-major; sized for projective maps (2x2, 3x3).
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl CMat {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        CMat { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            e[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        CMat { dim, entries: e }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        let n = self.dim;
        let mut e = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                for j in 0..n {
                    e[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        CMat { dim: n, entries: e }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn scale(&self, c: Complex64) -> CMat {
        CMat {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn det(&self) -> Complex64 {
        match self.dim {
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                self.get(0, 0) * (self.get(1, 1) * self.get(2, 2) - self.get(1, 2) * self.get(2, 1))
                    - self.get(0, 1)
                        * (self.get(1, 0) * self.get(2, 2) - self.get(1, 2) * self.get(2, 0))
                    + self.get(0, 2)
                        * (self.get(1, 0) * self.get(2, 1) - self.get(1, 1) * self.get(2, 0))
            }
            _ => unimplemented!("det only needed for dim <= 3"),
        }
    }

    pub fn inverse(&self) -> Option<CMat> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let inv_d = Complex64::new(1.0, 0.0) / d;
        match self.dim {
            1 => Some(CMat::new(1, vec![inv_d])),
            2 => Some(CMat::new(
                2,
                vec![
                    self.get(1, 1) * inv_d,
                    -self.get(0, 1) * inv_d,
                    -self.get(1, 0) * inv_d,
                    self.get(0, 0) * inv_d,
                ],
            )),
            3 => {
                let m = |i: usize, j: usize| self.get(i, j);
                let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
                    m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)
                };
                // adjugate transpose
                let e = vec![
                    cof(1, 2, 1, 2) * inv_d,
                    -cof(0, 2, 1, 2) * inv_d,
                    cof(0, 1, 1, 2) * inv_d,
                    -cof(1, 2, 0, 2) * inv_d,
                    cof(0, 2, 0, 2) * inv_d,
                    -cof(0, 1, 0, 2) * inv_d,
                    cof(1, 2, 0, 1) * inv_d,
                    -cof(0, 2, 0, 1) * inv_d,
                    cof(0, 1, 0, 1) * inv_d,
                ];
                Some(CMat::new(3, e))
            }
            _ => unimplemented!("inverse only needed for dim <= 3"),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scale to unit Frobenius norm; projective maps are scale-invariant so
    /// this keeps long power products inside floating-point range.
    pub fn normalized(&self) -> CMat {
        let n = self.frobenius_norm();
        self.scale(Complex64::new(1.0 / n, 0.0))
    }
}

// ---------------------------------------------------------------------------
// systems
// ---------------------------------------------------------------------------

/// Affine map x -> Ax + b on the torus R^d/Z^d, with integer unimodular A.
#[derive(Debug, Clone)]
pub struct TorusAffineMap {
    pub dim: usize,
    /// Row-major integer matrix.
    pub a: Vec<i64>,
    pub b: Vec<f64>,
    a_inv: Vec<i64>,
}

impl TorusAffineMap {
    pub fn new(dim: usize, a: Vec<i64>, b: Vec<f64>) -> Result<Self, ZooError> {
        assert_eq!(a.len(), dim * dim);
        assert_eq!(b.len(), dim);
        let m = int_matrix(dim, &a);
        let det = m.det();
        if det.abs() != BigInt::one() {
            return Err(ZooError::NotUnimodular {
                det: det.to_i64().unwrap_or(i64::MAX),
            });
        }
        let a_inv = integer_inverse(dim, &a);
        Ok(TorusAffineMap { dim, a, b, a_inv })
    }

    pub fn linear(dim: usize, a: Vec<i64>) -> Result<Self, ZooError> {
        let b = vec![0.0; dim];
        Self::new(dim, a, b)
    }

    pub fn matrix(&self) -> ExactIntMatrix {
        int_matrix(self.dim, &self.a)
    }

    pub fn inverse_matrix_rows(&self) -> &[i64] {
        &self.a_inv
    }
}

fn int_matrix(dim: usize, a: &[i64]) -> ExactIntMatrix {
    ExactIntMatrix::new(dim, a.iter().map(|&x| BigInt::from(x)).collect()).expect("square")
}

/// Inverse of a unimodular integer matrix, still integral.
fn integer_inverse(dim: usize, a: &[i64]) -> Vec<i64> {
    // rational Gauss-Jordan; dims are small
    let mut m: Vec<BigRational> = a
        .iter()
        .map(|&x| BigRational::from_integer(BigInt::from(x)))
        .collect();
    let mut inv: Vec<BigRational> = (0..dim * dim)
        .map(|idx| {
            if idx / dim == idx % dim {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    for col in 0..dim {
        let pivot = (col..dim)
            .find(|&r| !m[r * dim + col].is_zero())
            .expect("unimodular matrix is invertible");
        for c in 0..dim {
            m.swap(col * dim + c, pivot * dim + c);
            inv.swap(col * dim + c, pivot * dim + c);
        }
        let p = m[col * dim + col].clone();
        for c in 0..dim {
            m[col * dim + c] /= &p;
            inv[col * dim + c] /= &p;
        }
        for r in 0..dim {
            if r == col || m[r * dim + col].is_zero() {
                continue;
            }
            let factor = m[r * dim + col].clone();
            for c in 0..dim {
                let mv = &m[col * dim + c] * &factor;
                m[r * dim + c] -= mv;
                let iv = &inv[col * dim + c] * &factor;
                inv[r * dim + c] -= iv;
            }
        }
    }
    inv.into_iter()
        .map(|x| {
            assert!(x.is_integer(), "inverse of unimodular matrix is integral");
            x.to_integer().to_i64().expect("inverse entry fits i64")
        })
        .collect()
}

/// Linear projective map on P^1 or P^2 given by a nonsingular complex matrix.
#[derive(Debug, Clone)]
pub struct ProjectiveMap {
    /// Projective dimension, 1 or 2.
    pub dim: usize,
    pub h: CMat,
    h_inv: CMat,
}

impl ProjectiveMap {
    pub fn new(dim: usize, h: CMat) -> Result<Self, ZooError> {
        if dim != 1 && dim != 2 {
            return Err(ZooError::BadProjectiveDim(dim));
        }
        assert_eq!(h.dim, dim + 1);
        let h = h.normalized();
        let h_inv = h.inverse().ok_or(ZooError::SingularProjective)?.normalized();
        Ok(ProjectiveMap { dim, h, h_inv })
    }
}

/// Skew product f(x, y) = (x + alpha, y + g(x)) on T^2 with
/// g(x) = sum_k 2 Re(a_k e^{2 pi i k x}) (mean zero, real by construction).
#[derive(Debug, Clone)]
pub struct SkewProduct {
    pub alpha: f64,
    /// (frequency k >= 1, coefficient a_k).
    pub modes: Vec<(u64, Complex64)>,
}

impl SkewProduct {
    pub fn new(alpha: f64, modes: Vec<(u64, Complex64)>) -> Result<Self, ZooError> {
        if modes.iter().any(|&(k, _)| k == 0) {
            return Err(ZooError::ZeroMode);
        }
        Ok(SkewProduct {
            alpha: alpha.rem_euclid(1.0),
            modes,
        })
    }

    pub fn g(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(k, a)| {
                let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * (k as f64) * x);
                2.0 * (a * phase).re
            })
            .sum()
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(k, a)| {
                let w = std::f64::consts::TAU * (k as f64);
                let phase = Complex64::from_polar(1.0, w * x);
                2.0 * (Complex64::new(0.0, w) * a * phase).re
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub enum DynSystem {
    Torus(TorusAffineMap),
    Projective(ProjectiveMap),
    Skew(SkewProduct),
}

/// A point in the system's natural chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    /// Torus point in [0,1)^d (skew products live on the 2-torus).
    Torus(Vec<f64>),
    /// Canonically normalized homogeneous coordinates: unit norm, first
    /// coordinate of significant modulus made real-positive.
    Projective(Vec<Complex64>),
}

const PHASE_PIVOT_TOL: f64 = 1e-9;

/// Canonical representative of a homogeneous coordinate vector.
pub fn normalize_projective(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut u: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
    let pivot = u
        .iter()
        .find(|z| z.norm() > PHASE_PIVOT_TOL)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    for z in u.iter_mut() {
        *z *= phase;
    }
    u
}

fn frac(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    // rem_euclid can return 1.0 for tiny negative inputs
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Torus l-infinity quotient distance between coordinates.
pub fn torus_dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = (a - b).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}

/// Chordal (Fubini-Study) distance between canonical projective points,
/// sqrt(1 - |<p,q>|^2 / (|p|^2 |q|^2)), in [0, 1].
pub fn chordal_dist(p: &[Complex64], q: &[Complex64]) -> f64 {
    let mut inner = Complex64::new(0.0, 0.0);
    let mut np = 0.0;
    let mut nq = 0.0;
    for (a, b) in p.iter().zip(q) {
        inner += a.conj() * b;
        np += a.norm_sqr();
        nq += b.norm_sqr();
    }
    (1.0 - inner.norm_sqr() / (np * nq)).max(0.0).sqrt()
}

impl DynSystem {
    /// Real dimension of the chart used for grids.
    pub fn chart_dim(&self) -> usize {
        match self {
            DynSystem::Torus(t) => t.dim,
            DynSystem::Projective(p) => 2 * p.dim,
            DynSystem::Skew(_) => 2,
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match (p, q) {
            (Point::Torus(a), Point::Torus(b)) => torus_dist(a, b),
            (Point::Projective(a), Point::Projective(b)) => chordal_dist(a, b),
            _ => panic!("points from different spaces"),
        }
    }

    pub fn evaluate(&self, p: &Point) -> Point {
        match (self, p) {
            (DynSystem::Torus(t), Point::Torus(x)) => {
                let mut y = vec![0.0; t.dim];
                for i in 0..t.dim {
                    let mut acc = t.b[i];
                    for j in 0..t.dim {
                        acc += t.a[i * t.dim + j] as f64 * x[j];
                    }
                    y[i] = frac(acc);
                }
                Point::Torus(y)
            }
            (DynSystem::Projective(m), Point::Projective(v)) => {
                Point::Projective(normalize_projective(&m.h.apply(v)))
            }
            (DynSystem::Skew(s), Point::Torus(xy)) => {
                Point::Torus(vec![frac(xy[0] + s.alpha), frac(xy[1] + s.g(xy[0]))])
            }
            _ => panic!("point does not belong to this system's space"),
        }
    }

    pub fn evaluate_inverse(&self, p: &Point) -> Point {
        match (self, p) {
            (DynSystem::Torus(t), Point::Torus(x)) => {
                let mut y = vec![0.0; t.dim];
                for i in 0..t.dim {
                    let mut acc = 0.0;
                    for j in 0..t.dim {
                        acc += t.a_inv[i * t.dim + j] as f64 * (x[j] - t.b[j]);
                    }
                    y[i] = frac(acc);
                }
                Point::Torus(y)
            }
            (DynSystem::Projective(m), Point::Projective(v)) => {
                Point::Projective(normalize_projective(&m.h_inv.apply(v)))
            }
            (DynSystem::Skew(s), Point::Torus(xy)) => {
                let x_prev = frac(xy[0] - s.alpha);
                Point::Torus(vec![x_prev, frac(xy[1] - s.g(x_prev))])
            }
            _ => panic!("point does not belong to this system's space"),
        }
    }

    /// f^n(p), n possibly negative. Torus maps take an exact symbolic path
    /// (A^n over the integers, translation sum over the rationals) so long
    /// orbits do not drift.
    pub fn iterate(&self, p: &Point, n: i64) -> Point {
        if n == 0 {
            return p.clone();
        }
        match self {
            DynSystem::Torus(t) => torus_iterate_exact(t, p, n),
            DynSystem::Projective(m) => {
                let Point::Projective(v) = p else {
                    panic!("point does not belong to this system's space")
                };
                let base = if n > 0 { m.h.clone() } else { m.h_inv.clone() };
                let mut e = n.unsigned_abs();
                let mut acc = CMat::identity(m.dim + 1);
                let mut b = base;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc.mul(&b).normalized();
                    }
                    e >>= 1;
                    if e > 0 {
                        b = b.mul(&b).normalized();
                    }
                }
                Point::Projective(normalize_projective(&acc.apply(v)))
            }
            DynSystem::Skew(_) => {
                let mut q = p.clone();
                if n > 0 {
                    for _ in 0..n {
                        q = self.evaluate(&q);
                    }
                } else {
                    for _ in 0..-n {
                        q = self.evaluate_inverse(&q);
                    }
                }
                q
            }
        }
    }

    /// The forward orbit p, f(p), ..., f^{n-1}(p).
    pub fn orbit(&self, p: &Point, n: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n);
        let mut q = p.clone();
        for _ in 0..n {
            out.push(q.clone());
            q = self.evaluate(&q);
        }
        out
    }

    /// Reproducible uniform samples: per-coordinate uniform on the torus,
    /// normalized complex Gaussians (Fubini-Study uniform) on P^n.
    pub fn sample_points<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<Point> {
        (0..count).map(|_| self.sample_point(rng)).collect()
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            DynSystem::Torus(t) => {
                Point::Torus((0..t.dim).map(|_| rng.gen::<f64>()).collect())
            }
            DynSystem::Skew(_) => Point::Torus(vec![rng.gen::<f64>(), rng.gen::<f64>()]),
            DynSystem::Projective(m) => {
                let v: Vec<Complex64> = (0..m.dim + 1)
                    .map(|_| Complex64::new(gauss(rng), gauss(rng)))
                    .collect();
                Point::Projective(normalize_projective(&v))
            }
        }
    }

    /// Deterministic lattice of points; resolution^chart_dim points.
    pub fn grid_points(&self, resolution: usize) -> Vec<Point> {
        match self {
            DynSystem::Torus(t) => torus_grid(t.dim, resolution),
            DynSystem::Skew(_) => torus_grid(2, resolution),
            DynSystem::Projective(m) => projective_grid(m.dim, resolution),
        }
    }

    /// Operator norm of the differential at p (chart metric). Torus maps are
    /// constant, skew products have the closed-form lower-triangular
    /// differential, projective maps fall back to finite differences.
    pub fn derivative_norm(&self, p: &Point) -> f64 {
        match (self, p) {
            (DynSystem::Torus(t), _) => linf_operator_norm(t.dim, &t.a),
            (DynSystem::Skew(s), Point::Torus(xy)) => shear_norm(s.g_prime(xy[0])),
            (DynSystem::Projective(_), Point::Projective(_)) => {
                self.finite_difference_norm(p, 1)
            }
            _ => panic!("point does not belong to this system's space"),
        }
    }

    /// Finite-difference estimate of the operator norm of D(f^n) at p,
    /// step 1e-6 in the ambient chart.
    pub fn finite_difference_norm(&self, p: &Point, n: i64) -> f64 {
        const STEP: f64 = 1e-6;
        let image = self.iterate(p, n);
        let mut best: f64 = 0.0;
        match p {
            Point::Torus(x) => {
                for i in 0..x.len() {
                    let mut q = x.clone();
                    q[i] = frac(q[i] + STEP);
                    let qi = self.iterate(&Point::Torus(q), n);
                    best = best.max(self.distance(&image, &qi) / STEP);
                }
            }
            Point::Projective(v) => {
                let d = v.len();
                for i in 0..d {
                    for &dir in &[Complex64::new(STEP, 0.0), Complex64::new(0.0, STEP)] {
                        let mut q = v.clone();
                        q[i] += dir;
                        let q = normalize_projective(&q);
                        let base_d = chordal_dist(v, &q);
                        if base_d < STEP * 1e-3 {
                            continue;
                        }
                        let qi = self.iterate(&Point::Projective(q), n);
                        best = best.max(self.distance(&image, &qi) / base_d);
                    }
                }
            }
        }
        best
    }

    /// max over sampled points of ||Df^j|| for j = 1..=n, as a growth
    /// sequence. Exact for torus (||A^j||_inf) and skew (closed-form D_j).
    pub fn max_derivative_norm(&self, n: usize, samples: &[Point]) -> Vec<f64> {
        match self {
            DynSystem::Torus(t) => {
                let m = t.matrix();
                let mut acc = ExactIntMatrix::identity(t.dim);
                (1..=n)
                    .map(|_| {
                        acc = acc.mul(&m);
                        exact_linf_norm(&acc)
                    })
                    .collect()
            }
            DynSystem::Skew(s) => {
                // D_j(x) accumulated per sample
                let mut sums: Vec<f64> = samples
                    .iter()
                    .map(|p| match p {
                        Point::Torus(xy) => xy[0],
                        _ => panic!("skew product points live on the torus"),
                    })
                    .collect();
                let mut d: Vec<f64> = vec![0.0; sums.len()];
                let mut out = Vec::with_capacity(n);
                for _ in 1..=n {
                    for (x, dj) in sums.iter_mut().zip(d.iter_mut()) {
                        *dj += s.g_prime(*x);
                        *x = frac(*x + s.alpha);
                    }
                    let max_d = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                    out.push(shear_norm(max_d));
                }
                out
            }
            DynSystem::Projective(_) => (1..=n)
                .map(|j| {
                    samples
                        .iter()
                        .map(|p| self.finite_difference_norm(p, j as i64))
                        .fold(0.0, f64::max)
                })
                .collect(),
        }
    }
}

/// Largest singular value of [[1,0],[c,1]].
pub fn shear_norm(c: f64) -> f64 {
    let c = c.abs();
    (c + (c * c + 4.0).sqrt()) / 2.0
}

fn linf_operator_norm(dim: usize, a: &[i64]) -> f64 {
    (0..dim)
        .map(|i| (0..dim).map(|j| a[i * dim + j].unsigned_abs()).sum::<u64>() as f64)
        .fold(0.0, f64::max)
}

fn exact_linf_norm(m: &ExactIntMatrix) -> f64 {
    let n = m.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m.get(i, j).abs().to_f64().unwrap_or(f64::INFINITY))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn torus_iterate_exact(t: &TorusAffineMap, p: &Point, n: i64) -> Point {
    let Point::Torus(x) = p else {
        panic!("point does not belong to this system's space")
    };
    let d = t.dim;
    let (mat, b) = if n > 0 {
        (int_matrix(d, &t.a), t.b.clone())
    } else {
        // f^{-1}(x) = A^{-1} x - A^{-1} b; fold the translation in
        let inv = int_matrix(d, &t.a_inv);
        let mut nb = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                nb[i] -= t.a_inv[i * d + j] as f64 * t.b[j];
            }
        }
        (inv, nb)
    };
    let steps = n.unsigned_abs();
    let an = mat.pow(steps);
    let sum = geometric_matrix_sum(&mat, steps);
    // exact rational arithmetic on the f64 inputs (each f64 is a rational)
    let xr: Vec<BigRational> = x
        .iter()
        .map(|&v| BigRational::from_f64(v).expect("finite coordinate"))
        .collect();
    let br: Vec<BigRational> = b
        .iter()
        .map(|&v| BigRational::from_f64(v).expect("finite translation"))
        .collect();
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut acc = BigRational::zero();
        for j in 0..d {
            acc += BigRational::from_integer(an.get(i, j).clone()) * &xr[j];
            acc += BigRational::from_integer(sum.get(i, j).clone()) * &br[j];
        }
        let fr = &acc - acc.floor();
        y[i] = frac(fr.to_f64().unwrap_or(0.0));
    }
    Point::Torus(y)
}

/// I + A + ... + A^{n-1}, by doubling: S(2m) = S(m) + A^m S(m).
fn geometric_matrix_sum(a: &ExactIntMatrix, n: u64) -> ExactIntMatrix {
    fn go(a: &ExactIntMatrix, n: u64) -> (ExactIntMatrix, ExactIntMatrix) {
        // returns (S(n), A^n)
        if n == 0 {
            let d = a.dim();
            return (
                ExactIntMatrix::new(d, vec![BigInt::zero(); d * d]).unwrap(),
                ExactIntMatrix::identity(d),
            );
        }
        if n == 1 {
            return (ExactIntMatrix::identity(a.dim()), a.clone());
        }
        let (s_half, a_half) = go(a, n / 2);
        let mut s = add(&s_half, &a_half.mul(&s_half));
        let mut an = a_half.mul(&a_half);
        if n % 2 == 1 {
            s = add(&s, &an);
            an = an.mul(a);
        }
        (s, an)
    }
    fn add(x: &ExactIntMatrix, y: &ExactIntMatrix) -> ExactIntMatrix {
        let d = x.dim();
        ExactIntMatrix::new(
            d,
            x.entries()
                .iter()
                .zip(y.entries())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap()
    }
    go(a, n).0
}

fn torus_grid(dim: usize, resolution: usize) -> Vec<Point> {
    let total = resolution.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut coords = vec![0.0; dim];
            for c in coords.iter_mut() {
                *c = (idx % resolution) as f64 / resolution as f64;
                idx /= resolution;
            }
            Point::Torus(coords)
        })
        .collect()
}

fn projective_grid(dim: usize, resolution: usize) -> Vec<Point> {
    // lattice in angle coordinates of the unit sphere of C^{dim+1}
    let r = resolution;
    let mut out = Vec::new();
    match dim {
        1 => {
            // (w, theta): height and longitude of the round sphere
            for i in 0..r {
                for j in 0..r {
                    let w = (i as f64 + 0.5) / r as f64;
                    let theta = std::f64::consts::TAU * j as f64 / r as f64;
                    // |z1|^2 = w, |z0|^2 = 1 - w
                    let v = vec![
                        Complex64::new((1.0 - w).sqrt(), 0.0),
                        Complex64::from_polar(w.sqrt(), theta),
                    ];
                    out.push(Point::Projective(normalize_projective(&v)));
                }
            }
        }
        2 => {
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        for l in 0..r {
                            let u = (i as f64 + 0.5) / r as f64;
                            let v = (j as f64 + 0.5) / r as f64;
                            // split the unit of squared modulus as (1-u, u(1-v), uv)
                            let m0 = (1.0 - u).sqrt();
                            let m1 = (u * (1.0 - v)).sqrt();
                            let m2 = (u * v).sqrt();
                            let t1 = std::f64::consts::TAU * k as f64 / r as f64;
                            let t2 = std::f64::consts::TAU * l as f64 / r as f64;
                            let vec = vec![
                                Complex64::new(m0, 0.0),
                                Complex64::from_polar(m1, t1),
                                Complex64::from_polar(m2, t2),
                            ];
                            out.push(Point::Projective(normalize_projective(&vec)));
                        }
                    }
                }
            }
        }
        _ => unreachable!("projective dim is 1 or 2"),
    }
    out
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

// ---------------------------------------------------------------------------
// sphere model of P^1 (appendix cover construction uses it)
// ---------------------------------------------------------------------------

/// The interval map h_rho(w) = rho^2 w / ((rho^2 - 1) w + 1) on [0,1]:
/// the height component of the homography y -> rho*y in sphere coordinates.
pub fn h_rho(rho: f64, w: f64) -> f64 {
    let r2 = rho * rho;
    r2 * w / ((r2 - 1.0) * w + 1.0)
}

/// (height, longitude) sphere coordinates of a canonical P^1 point for the
/// round metric: w = |z1|^2 / (|z0|^2 + |z1|^2), theta = arg(z1/z0) / tau.
pub fn p1_to_sphere(v: &[Complex64]) -> (f64, f64) {
    let n0 = v[0].norm_sqr();
    let n1 = v[1].norm_sqr();
    let w = n1 / (n0 + n1);
    let theta = if n0 == 0.0 || n1 == 0.0 {
        0.0
    } else {
        frac((v[1] / v[0]).arg() / std::f64::consts::TAU)
    };
    (w, theta)
}

pub fn sphere_to_p1(w: f64, theta: f64) -> Vec<Complex64> {
    let v = vec![
        Complex64::new((1.0 - w).sqrt(), 0.0),
        Complex64::from_polar(w.sqrt(), std::f64::consts::TAU * theta),
    ];
    normalize_projective(&v)
}
