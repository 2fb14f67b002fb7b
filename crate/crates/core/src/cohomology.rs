//! Exact analysis of the linear action of an automorphism on cohomology:
//! spectral classification, unipotency, Jordan growth rates, and the
//! polynomial-entropy upper bounds they imply.

use num_integer::Integer;
use num_traits::Signed;
use thiserror::Error;

use crate::intmat::{symbolic_power_growth, ExactIntMatrix, MatError};
use crate::intpoly::{unit_circle_test, IntPoly, PolyError, UnitCircleVerdict};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CohomologyError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("matrix has an eigenvalue off the unit circle; no unipotency order exists")]
    SpectralRadiusExceedsOne,
    #[error("degree-{degree} action: {source}")]
    Degree {
        degree: usize,
        source: Box<CohomologyError>,
    },
    #[error("degree-{degree} action must be 1x1 with entry +/-1")]
    BadBoundaryDegree { degree: usize },
    #[error("betti number b_{two_j} = {betti} smaller than action dimension {dim} at degree {j}")]
    BettiTooSmall {
        j: usize,
        two_j: usize,
        betti: usize,
        dim: usize,
    },
    #[error("bounds are infinite when topological entropy is positive")]
    PositiveEntropy,
    #[error("expected {expected} action matrices for dimension k={k}, got {got}")]
    WrongDegreeCount { k: usize, expected: usize, got: usize },
    #[error("unipotent power has a Jordan block of size {size} > 3; not an H^{{1,1}} isometry")]
    NotAnIsometryStructure { size: usize },
}

pub fn characteristic_polynomial(m: &ExactIntMatrix) -> IntPoly {
    m.char_poly()
}

/// Smallest m >= 1 such that M^m is unipotent, i.e. (M^m - I)^dim = 0 exactly.
///
/// m is the lcm of the orders of the roots of unity among the eigenvalues;
/// those orders come straight out of the cyclotomic factorization.
pub fn unipotency_order(m: &ExactIntMatrix) -> Result<u64, CohomologyError> {
    let p = m.char_poly();
    match unit_circle_test(&p)? {
        UnitCircleVerdict::AllRootsOfUnity { orders } => {
            let mut lcm = 1u64;
            for (d, _) in orders {
                lcm = lcm.lcm(&(d as u64));
            }
            debug_assert!(m
                .pow(lcm)
                .sub(&ExactIntMatrix::identity(m.dim()))
                .pow(m.dim() as u64)
                .is_zero());
            Ok(lcm)
        }
        UnitCircleVerdict::HasModulusGreaterOne => {
            Err(CohomologyError::SpectralRadiusExceedsOne)
        }
    }
}

/// Jordan block sizes of M^m, from the exact rank sequence of (M^m - I)^k.
///
/// The number of blocks of size >= k is rank((M^m-I)^{k-1}) - rank((M^m-I)^k).
/// Returned sorted descending.
pub fn jordan_block_sizes(m: &ExactIntMatrix, power: u64) -> Result<Vec<usize>, CohomologyError> {
    let n = m.dim();
    let mp = m.pow(power);
    let nilpotent = mp.sub(&ExactIntMatrix::identity(n));
    if !nilpotent.pow(n as u64).is_zero() {
        return Err(CohomologyError::Mat(MatError::NotUnipotent));
    }
    let mut ranks = Vec::with_capacity(n + 2);
    let mut acc = ExactIntMatrix::identity(n);
    ranks.push(n); // rank of (M^m - I)^0
    for _ in 1..=n + 1 {
        acc = acc.mul(&nilpotent);
        let r = acc.rank();
        ranks.push(r);
        if r == 0 {
            break;
        }
    }
    while ranks.len() < n + 2 {
        ranks.push(0);
    }
    let mut sizes = Vec::new();
    for k in 1..=n {
        // blocks of size exactly k
        let ge_k = ranks[k - 1] - ranks[k];
        let ge_k1 = ranks[k] - ranks[k + 1];
        for _ in 0..ge_k.saturating_sub(ge_k1) {
            sizes.push(k);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    debug_assert_eq!(sizes.iter().sum::<usize>(), n);
    Ok(sizes)
}

/// Spectral trichotomy of an action on H^{1,1}, plus the max-block-2 case
/// that cannot occur for surface automorphisms but can for arbitrary input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceClass {
    Elliptic,
    Parabolic,
    Loxodromic,
    /// Unipotent power with maximal Jordan block of size 2 (linear norm
    /// growth). Flagged rather than silently folded into a surface class.
    LinearGrowthAnomaly,
}

pub fn surface_class(m: &ExactIntMatrix) -> Result<SurfaceClass, CohomologyError> {
    m.require_unimodular()?;
    match unipotency_order(m) {
        Err(CohomologyError::SpectralRadiusExceedsOne) => Ok(SurfaceClass::Loxodromic),
        Err(e) => Err(e),
        Ok(order) => {
            let blocks = jordan_block_sizes(m, order)?;
            match blocks.first().copied().unwrap_or(1) {
                1 => Ok(SurfaceClass::Elliptic),
                2 => Ok(SurfaceClass::LinearGrowthAnomaly),
                3 => Ok(SurfaceClass::Parabolic),
                size => Err(CohomologyError::NotAnIsometryStructure { size }),
            }
        }
    }
}

/// Per-degree action of f* on H^{j,j}, j = 0..k.
#[derive(Debug, Clone)]
pub struct CohomologyAction {
    /// Complex dimension of the ambient manifold.
    pub k: usize,
    /// Action matrices indexed by degree j = 0..=k.
    pub actions: Vec<ExactIntMatrix>,
    /// Even Betti numbers b_{2j}, j = 0..=k.
    pub betti: Vec<usize>,
}

impl CohomologyAction {
    pub fn new(
        k: usize,
        actions: Vec<ExactIntMatrix>,
        betti: Vec<usize>,
    ) -> Result<Self, CohomologyError> {
        if actions.len() != k + 1 || betti.len() != k + 1 {
            return Err(CohomologyError::WrongDegreeCount {
                k,
                expected: k + 1,
                got: actions.len(),
            });
        }
        for (j, m) in actions.iter().enumerate() {
            if betti[j] < m.dim() {
                return Err(CohomologyError::BettiTooSmall {
                    j,
                    two_j: 2 * j,
                    betti: betti[j],
                    dim: m.dim(),
                });
            }
        }
        for &degree in &[0usize, k] {
            let m = &actions[degree];
            let pm_one = m.dim() == 1 && m.get(0, 0).abs() == num_bigint::BigInt::from(1);
            if !pm_one {
                return Err(CohomologyError::BadBoundaryDegree { degree });
            }
        }
        Ok(CohomologyAction { k, actions, betti })
    }
}

/// Upper bounds on polynomial entropy from the cohomological growth data:
/// k + s(f), k(s_1 + 1), k*b_2, and k^2 when k <= 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpolBounds {
    pub gromov_sum: u64,
    pub gromov_s1: u64,
    pub gromov_b2: u64,
    pub small_dim: Option<u64>,
}

impl HpolBounds {
    pub fn minimum(&self) -> u64 {
        let mut m = self.gromov_sum.min(self.gromov_s1).min(self.gromov_b2);
        if let Some(s) = self.small_dim {
            m = m.min(s);
        }
        m
    }
}

/// Growth profile of a virtually unipotent cohomology action.
#[derive(Debug, Clone)]
pub struct GrowthProfile {
    /// True iff every eigenvalue of every degree action is a root of unity.
    pub entropy_zero: bool,
    /// Smallest m with all (f*_j)^m unipotent; 0 is never used.
    pub unipotency_order: u64,
    /// Jordan block sizes of the unipotent power, per degree, descending.
    pub jordan_blocks: Vec<Vec<usize>>,
    /// Per-degree growth rates s_j = max block - 1.
    pub per_degree: Vec<usize>,
    /// s(f) = sum_{j=1}^{k-1} s_j.
    pub s: usize,
    /// Entropy upper bounds; `None` when entropy_zero is false.
    pub bounds: Option<HpolBounds>,
}

pub fn hpol_bounds(
    entropy_zero: bool,
    k: usize,
    s: usize,
    s1: usize,
    b2: usize,
) -> Result<HpolBounds, CohomologyError> {
    if !entropy_zero {
        return Err(CohomologyError::PositiveEntropy);
    }
    Ok(HpolBounds {
        gromov_sum: (k + s) as u64,
        gromov_s1: (k * (s1 + 1)) as u64,
        gromov_b2: (k * b2) as u64,
        small_dim: if k <= 3 { Some((k * k) as u64) } else { None },
    })
}

/// Full growth profile of a cohomology action: per-degree Jordan structure,
/// s_j rates, s(f) and the entropy upper bounds.
///
/// If any degree has an eigenvalue of modulus > 1 the profile reports
/// entropy_zero = false and carries no rates.
pub fn growth_profile(action: &CohomologyAction) -> Result<GrowthProfile, CohomologyError> {
    let k = action.k;
    let mut order = 1u64;
    for (j, m) in action.actions.iter().enumerate() {
        match unipotency_order(m) {
            Ok(o) => order = order.lcm(&o),
            Err(CohomologyError::SpectralRadiusExceedsOne) => {
                return Ok(GrowthProfile {
                    entropy_zero: false,
                    unipotency_order: 0,
                    jordan_blocks: Vec::new(),
                    per_degree: Vec::new(),
                    s: 0,
                    bounds: None,
                });
            }
            Err(e) => {
                return Err(CohomologyError::Degree {
                    degree: j,
                    source: Box::new(e),
                })
            }
        }
    }
    let mut jordan_blocks = Vec::with_capacity(k + 1);
    let mut per_degree = Vec::with_capacity(k + 1);
    for (j, m) in action.actions.iter().enumerate() {
        let blocks = jordan_block_sizes(m, order).map_err(|e| CohomologyError::Degree {
            degree: j,
            source: Box::new(e),
        })?;
        let s_j = blocks.first().copied().unwrap_or(1) - 1;
        if s_j + 1 > action.betti[j] {
            return Err(CohomologyError::BettiTooSmall {
                j,
                two_j: 2 * j,
                betti: action.betti[j],
                dim: m.dim(),
            });
        }
        jordan_blocks.push(blocks);
        per_degree.push(s_j);
    }
    debug_assert_eq!(per_degree[0], 0);
    debug_assert_eq!(per_degree[k], 0);
    let s: usize = per_degree[1..k].iter().sum();
    let s1 = if k >= 1 { per_degree[1.min(k)] } else { 0 };
    let bounds = hpol_bounds(true, k, s, s1, action.betti[1.min(k)])?;
    Ok(GrowthProfile {
        entropy_zero: true,
        unipotency_order: order,
        jordan_blocks,
        per_degree,
        s,
        bounds: Some(bounds),
    })
}

/// Re-exported here because it is the cohomological cross-check for s_j.
pub use crate::intmat::symbolic_unipotent_power;

/// Degree in n of the entrywise-maximal entry of M^n (unipotent M).
pub fn power_growth_exponent(m: &ExactIntMatrix) -> Result<usize, CohomologyError> {
    Ok(symbolic_power_growth(m)?)
}
