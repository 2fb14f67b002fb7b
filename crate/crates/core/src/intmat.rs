//! Arbitrary-precision integer matrices with exact linear algebra.
//!
//! Rank is computed by fraction-free Gaussian elimination and characteristic
//! polynomials by Faddeev-LeVerrier over the rationals, so Jordan structure
//! downstream is never at the mercy of floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::intpoly::IntPoly;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("matrix is not invertible over the integers (det = {det})")]
    NotUnimodular { det: String },
}

/// Square integer matrix with arbitrary-precision entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactIntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl ExactIntMatrix {
    pub fn new(dim: usize, entries: Vec<BigInt>) -> Result<Self, MatError> {
        if entries.len() != dim * dim {
            return Err(MatError::NotSquare {
                rows: entries.len() / dim.max(1),
                cols: dim,
            });
        }
        Ok(ExactIntMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, MatError> {
        let dim = rows.len();
        for r in rows {
            if r.len() != dim {
                return Err(MatError::NotSquare {
                    rows: dim,
                    cols: r.len(),
                });
            }
        }
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| BigInt::from(x)))
            .collect();
        Ok(ExactIntMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        ExactIntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.entries[k * n + j];
                    if !b.is_zero() {
                        entries[i * n + j] += a * b;
                    }
                }
            }
        }
        ExactIntMatrix { dim: n, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ExactIntMatrix {
            dim: self.dim,
            entries,
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn det(&self) -> BigInt {
        let n = self.dim;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.entries.clone();
        let mut prev = BigInt::one();
        let mut sign = 1i32;
        for k in 0..n - 1 {
            if m[k * n + k].is_zero() {
                // pivot search
                let mut found = false;
                for r in k + 1..n {
                    if !m[r * n + k].is_zero() {
                        for c in 0..n {
                            m.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                        found = true;
                        break;
                    }
                }
                if !found {
                    return BigInt::zero();
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                    m[i * n + j] = &num / &prev;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = m[k * n + k].clone();
        }
        let d = m[(n - 1) * n + (n - 1)].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Checks |det| = 1, the condition for the matrix to act invertibly on the
    /// integer lattice.
    pub fn require_unimodular(&self) -> Result<(), MatError> {
        let d = self.det();
        if d.abs() == BigInt::one() {
            Ok(())
        } else {
            Err(MatError::NotUnimodular { det: d.to_string() })
        }
    }

    /// Rank over the rationals, fraction-free.
    pub fn rank(&self) -> usize {
        let n = self.dim;
        let mut m = self.entries.clone();
        let mut rank = 0usize;
        let mut row = 0usize;
        for col in 0..n {
            // find pivot
            let mut pivot = None;
            for r in row..n {
                if !m[r * n + col].is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            if p != row {
                for c in 0..n {
                    m.swap(row * n + c, p * n + c);
                }
            }
            for r in row + 1..n {
                if m[r * n + col].is_zero() {
                    continue;
                }
                let a = m[row * n + col].clone();
                let b = m[r * n + col].clone();
                for c in col..n {
                    let v = &m[r * n + c] * &a - &m[row * n + c] * &b;
                    m[r * n + c] = v;
                }
            }
            rank += 1;
            row += 1;
            if row == n {
                break;
            }
        }
        rank
    }

    /// Exact monic characteristic polynomial det(tI - M), via
    /// Faddeev-LeVerrier over the rationals.
    pub fn char_poly(&self) -> IntPoly {
        let n = self.dim;
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut m = RationalMatrix::from_int(self);
        let mut aux = m.clone();
        for k in 1..=n {
            if k > 1 {
                // aux = M * (aux + c_{n-k+1} I)
                aux.add_diag(&coeffs[n - k + 1]);
                aux = m.mul(&aux);
            } else {
                aux = m.clone();
            }
            let c = -aux.trace() / BigRational::from_integer(BigInt::from(k as i64));
            coeffs[n - k] = c;
        }
        // keep the borrow checker quiet about `m`
        m.add_diag(&BigRational::zero());
        let int_coeffs = coeffs
            .into_iter()
            .map(|c| {
                assert!(c.is_integer(), "characteristic polynomial must be integral");
                c.to_integer()
            })
            .collect();
        IntPoly::new(int_coeffs)
    }
}

#[derive(Debug, Clone)]
struct RationalMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    fn from_int(m: &ExactIntMatrix) -> Self {
        RationalMatrix {
            dim: m.dim,
            entries: m
                .entries
                .iter()
                .map(|e| BigRational::from_integer(e.clone()))
                .collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.entries[k * n + j];
                    if !b.is_zero() {
                        entries[i * n + j] += a * b;
                    }
                }
            }
        }
        RationalMatrix { dim: n, entries }
    }

    fn add_diag(&mut self, c: &BigRational) {
        for i in 0..self.dim {
            self.entries[i * self.dim + i] += c;
        }
    }

    fn trace(&self) -> BigRational {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim + i].clone())
            .sum()
    }
}

/// Polynomial in one variable over the rationals; used for symbolic entries
/// of M^n when M is unipotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn add_assign_scaled(&mut self, other: &RatPoly, scale: &BigRational) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), BigRational::zero());
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            self.coeffs[i] += c * scale;
        }
        *self = RatPoly::new(std::mem::take(&mut self.coeffs));
    }

    /// Exact evaluation at an integer point.
    pub fn eval_int(&self, n: &BigInt) -> BigRational {
        let x = BigRational::from_integer(n.clone());
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }
}

/// The polynomial C(n, k) = n(n-1)...(n-k+1)/k! as a polynomial in n.
pub fn binomial_poly(k: usize) -> RatPoly {
    let mut coeffs = vec![BigRational::one()];
    for i in 0..k {
        // multiply by (n - i)
        let mut next = vec![BigRational::zero(); coeffs.len() + 1];
        let shift = BigRational::from_integer(BigInt::from(i as i64));
        for (d, c) in coeffs.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * &shift;
        }
        coeffs = next;
    }
    let mut kfact = BigRational::one();
    for i in 1..=k {
        kfact *= BigRational::from_integer(BigInt::from(i as i64));
    }
    RatPoly::new(coeffs.into_iter().map(|c| c / &kfact).collect())
}

/// Entries of M^n as polynomials in n, for unipotent M, via
/// M^n = sum_k C(n,k) N^k with N = M - I (N is nilpotent).
pub fn symbolic_unipotent_power(m: &ExactIntMatrix) -> Result<Vec<Vec<RatPoly>>, MatError> {
    let n = m.dim();
    let nil = m.sub(&ExactIntMatrix::identity(n));
    if !nil.pow(n as u64).is_zero() {
        return Err(MatError::NotUnipotent);
    }
    let mut out = vec![vec![RatPoly::zero(); n]; n];
    let mut power = ExactIntMatrix::identity(n);
    for k in 0..n {
        if k > 0 {
            power = power.mul(&nil);
            if power.is_zero() {
                break;
            }
        }
        let cnk = binomial_poly(k);
        for i in 0..n {
            for j in 0..n {
                let e = power.get(i, j);
                if !e.is_zero() {
                    out[i][j]
                        .add_assign_scaled(&cnk, &BigRational::from_integer(e.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// Exact degree in n of the entrywise-maximal polynomial entry of M^n;
/// equals (largest Jordan block of M) - 1 for unipotent M.
pub fn symbolic_power_growth(m: &ExactIntMatrix) -> Result<usize, MatError> {
    let entries = symbolic_unipotent_power(m)?;
    Ok(entries
        .iter()
        .flatten()
        .filter(|p| !p.is_zero())
        .map(|p| p.degree())
        .max()
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear() -> ExactIntMatrix {
        ExactIntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap()
    }

    #[test]
    fn char_poly_examples() {
        let id = ExactIntMatrix::identity(2);
        assert_eq!(id.char_poly(), IntPoly::from_i64(&[1, -2, 1]));

        let rot = ExactIntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        assert_eq!(rot.char_poly(), IntPoly::from_i64(&[1, 0, 1]));

        // det(tI - M) for [[2,1],[1,1]] expands to t^2 - 3t + 1
        let arnold = ExactIntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(arnold.char_poly(), IntPoly::from_i64(&[1, -3, 1]));
    }

    #[test]
    fn det_and_rank() {
        let rot = ExactIntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        assert_eq!(rot.det(), BigInt::one());
        assert_eq!(rot.rank(), 2);
        let singular = ExactIntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(singular.det(), BigInt::zero());
        assert_eq!(singular.rank(), 1);
        assert!(singular.require_unimodular().is_err());
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let m = shear();
        let mut acc = ExactIntMatrix::identity(2);
        for e in 0..6u64 {
            assert_eq!(m.pow(e), acc);
            acc = acc.mul(&m);
        }
    }

    #[test]
    fn symbolic_growth_examples() {
        assert_eq!(symbolic_power_growth(&ExactIntMatrix::identity(3)).unwrap(), 0);
        // single 4x4 Jordan block: degree 3
        let j4 = ExactIntMatrix::from_rows(&[
            vec![1, 1, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 1],
            vec![0, 0, 0, 1],
        ])
        .unwrap();
        assert_eq!(symbolic_power_growth(&j4).unwrap(), 3);
        // {2,1} block structure: N^2 = 0
        let b = ExactIntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(symbolic_power_growth(&b).unwrap(), 1);
        // non-unipotent rejected
        let rot = ExactIntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        assert_eq!(symbolic_power_growth(&rot), Err(MatError::NotUnipotent));
    }

    #[test]
    fn symbolic_power_matches_exact_power() {
        let j3 = ExactIntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]).unwrap();
        let entries = symbolic_unipotent_power(&j3).unwrap();
        for n in 0..20u64 {
            let exact = j3.pow(n);
            for i in 0..3 {
                for j in 0..3 {
                    let v = entries[i][j].eval_int(&BigInt::from(n));
                    assert!(v.is_integer());
                    assert_eq!(v.to_integer(), *exact.get(i, j), "entry ({i},{j}) at n={n}");
                }
            }
        }
    }

    #[test]
    fn binomial_poly_values() {
        let c3 = binomial_poly(3);
        for n in 0..10i64 {
            let expect = if n >= 3 { n * (n - 1) * (n - 2) / 6 } else { 0 };
            assert_eq!(c3.eval_int(&BigInt::from(n)).to_integer(), BigInt::from(expect));
        }
    }
}
