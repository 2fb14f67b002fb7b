//! Monic integer polynomials and cyclotomic factorization.
//!
//! Everything here is exact: coefficients are `BigInt`, division is checked,
//! and the root-of-unity test works by stripping cyclotomic factors rather
//! than by floating-point root finding.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("polynomial has a zero root (zero constant term), not an invertible action")]
    ZeroRoot,
    #[error("empty coefficient list")]
    Empty,
}

/// Integer polynomial, coefficients ordered by ascending degree.
/// Trailing zero coefficients are stripped on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![BigInt::zero()])
    }

    pub fn one() -> Self {
        Self::new(vec![BigInt::one()])
    }

    /// x^n - 1
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = -BigInt::one();
        c[n] = BigInt::one();
        Self::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().map_or(false, One::is_one)
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Exact division by a monic divisor. Returns `None` when the remainder
    /// is nonzero.
    pub fn div_exact(&self, divisor: &IntPoly) -> Option<IntPoly> {
        assert!(divisor.is_monic(), "divisor must be monic");
        if self.degree() < divisor.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let qd = self.degree() - dd;
        let mut quot = vec![BigInt::zero(); qd + 1];
        for k in (0..=qd).rev() {
            let c = rem[k + dd].clone();
            if !c.is_zero() {
                for (j, b) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * b;
                }
            }
            quot[k] = c;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(IntPoly::new(quot))
        } else {
            None
        }
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// The n-th cyclotomic polynomial, by recursive division of x^n - 1 by the
/// cyclotomic polynomials of the proper divisors of n.
pub fn cyclotomic(n: usize) -> IntPoly {
    assert!(n > 0);
    if n == 1 {
        return IntPoly::from_i64(&[-1, 1]);
    }
    let mut p = IntPoly::x_pow_minus_one(n);
    for d in 1..n {
        if n % d == 0 {
            p = p
                .div_exact(&cyclotomic(d))
                .expect("x^n - 1 divisible by cyclotomic factors");
        }
    }
    p
}

/// Euler's totient.
pub fn euler_phi(n: usize) -> usize {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// All d with phi(d) <= bound, ascending. phi(d) >= sqrt(d/2) so d <= 2*bound^2.
pub fn orders_with_phi_at_most(bound: usize) -> Vec<usize> {
    (1..=2 * bound * bound + 1)
        .filter(|&d| euler_phi(d) <= bound)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitCircleVerdict {
    /// Every root is a root of unity; carries the multiset of cyclotomic
    /// orders (order, multiplicity) found.
    AllRootsOfUnity { orders: Vec<(usize, usize)> },
    /// At least one root has modulus > 1.
    HasModulusGreaterOne,
}

/// Decide whether every complex root of a monic integer polynomial is a root
/// of unity, by stripping all cyclotomic factors Phi_d with phi(d) <= deg(p).
///
/// A monic integer polynomial whose roots all lie in the closed unit disk is
/// a product of cyclotomic polynomials and a power of t; zero roots are
/// rejected because the polynomial is meant to come from an invertible
/// integer matrix. If a non-constant factor remains after stripping, some
/// root has modulus > 1.
pub fn unit_circle_test(p: &IntPoly) -> Result<UnitCircleVerdict, PolyError> {
    if !p.is_monic() {
        return Err(PolyError::NotMonic);
    }
    if p.constant_term().is_zero() {
        return Err(PolyError::ZeroRoot);
    }
    // Quick exactness filter: all roots on the unit circle forces |p(0)| = 1.
    if p.constant_term().abs() != BigInt::one() {
        return Ok(UnitCircleVerdict::HasModulusGreaterOne);
    }
    let n = p.degree();
    let mut rem = p.clone();
    let mut orders = Vec::new();
    for d in orders_with_phi_at_most(n) {
        if euler_phi(d) > rem.degree() {
            continue;
        }
        let phi_d = cyclotomic(d);
        let mut mult = 0usize;
        while let Some(q) = rem.div_exact(&phi_d) {
            rem = q;
            mult += 1;
            if rem.degree() < phi_d.degree() {
                break;
            }
        }
        if mult > 0 {
            orders.push((d, mult));
        }
        if rem.is_one() {
            break;
        }
    }
    if rem.is_one() {
        Ok(UnitCircleVerdict::AllRootsOfUnity { orders })
    } else {
        Ok(UnitCircleVerdict::HasModulusGreaterOne)
    }
}
