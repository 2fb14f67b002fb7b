//! Liouville-rotation skew products with gap-scheduled Fourier data:
//! exact rotation numbers alpha = sum 10^{-q_i}, coboundary analysis of the
//! cohomological equation h(x+alpha) - h(x) = g(x), and derivative-growth /
//! Birkhoff-sum reports.
//!
//! All residues {k alpha} are computed in exact rational arithmetic (the
//! denominators are powers of ten, so this is digit-shift arithmetic) and
//! only converted to floats at the last moment.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::fit::{least_squares, LineFit};
use crate::zoo::SkewProduct;

const TAU: f64 = std::f64::consts::TAU;
/// Largest q_last we will expand to a decimal string (2*q_last + extra digits).
const MAX_Q_LAST: u64 = 100_000;
/// Largest exponent for which 10^q fits the u64 mode index.
const MAX_MODE_EXPONENT: u64 = 18;

#[derive(Debug, Error, PartialEq)]
pub enum SlowError {
    #[error("gap schedule must be nonempty")]
    EmptySchedule,
    #[error("gap schedule must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("requested precision {needed} digits exceeds the supported budget {cap}")]
    PrecisionShortfall { needed: u64, cap: u64 },
    #[error("mode k = 10^{q} does not fit a 64-bit frequency index")]
    ModeTooLarge { q: u64 },
    #[error("exact resonance: k*alpha is an integer for k = {k}")]
    ExactResonance { k: u64 },
}

/// Exponent schedule q_1 < q_2 < ... together with the analyticity
/// parameter as log10(r) (kept rational so the gap condition is exact).
#[derive(Debug, Clone, PartialEq)]
pub struct GapSchedule {
    pub q: Vec<u64>,
    pub log10_r: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCheck {
    pub holds: bool,
    pub first_violation: Option<usize>,
}

impl GapSchedule {
    pub fn new(q: Vec<u64>, log10_r: BigRational) -> Result<Self, SlowError> {
        if q.is_empty() {
            return Err(SlowError::EmptySchedule);
        }
        for i in 1..q.len() {
            if q[i] <= q[i - 1] {
                return Err(SlowError::NotIncreasing(i));
            }
        }
        Ok(GapSchedule { q, log10_r })
    }

    /// Exact check of q_{n+1} - q_n > log10(r) * 10^{q_n} for every
    /// consecutive pair; reports the first violating index.
    pub fn check_gap_condition(&self) -> GapCheck {
        for i in 0..self.q.len().saturating_sub(1) {
            let gap = BigRational::from_integer(BigInt::from(self.q[i + 1] - self.q[i]));
            let threshold = &self.log10_r * BigRational::from_integer(pow10(self.q[i]));
            if gap <= threshold {
                return GapCheck {
                    holds: false,
                    first_violation: Some(i + 1),
                };
            }
        }
        GapCheck {
            holds: true,
            first_violation: None,
        }
    }

    pub fn is_strict(&self) -> bool {
        self.check_gap_condition().holds
    }
}

fn pow10(e: u64) -> BigInt {
    BigInt::from(10u32).pow(e as u32)
}

fn frac_rational(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// alpha = sum_i 10^{-q_i} with its decimal expansion and the exact
/// residues {10^{q_n} alpha}.
#[derive(Debug, Clone)]
pub struct AlphaExpansion {
    pub alpha: BigRational,
    /// "0.<digits>" with 2*q_last + extra_digits fractional digits.
    pub decimal: String,
    pub digits: u64,
    /// residues[n] = {10^{q_n} alpha}; the paper's key estimate is
    /// residues[n] ~= 10^{-(q_{n+1} - q_n)}.
    pub residues: Vec<BigRational>,
}

pub fn build_alpha(schedule: &GapSchedule, extra_digits: u64) -> Result<AlphaExpansion, SlowError> {
    let q_last = *schedule.q.last().unwrap();
    let digits = 2 * q_last + extra_digits;
    if digits > 2 * MAX_Q_LAST {
        return Err(SlowError::PrecisionShortfall {
            needed: digits,
            cap: 2 * MAX_Q_LAST,
        });
    }
    let mut alpha = BigRational::zero();
    for &qi in &schedule.q {
        alpha += BigRational::new(BigInt::one(), pow10(qi));
    }
    let scaled = (&alpha * BigRational::from_integer(pow10(digits))).floor();
    let mut frac_digits = scaled.to_integer().to_str_radix(10);
    while (frac_digits.len() as u64) < digits {
        frac_digits.insert(0, '0');
    }
    let decimal = format!("0.{frac_digits}");
    let residues = schedule
        .q
        .iter()
        .map(|&qn| frac_rational(&(&alpha * BigRational::from_integer(pow10(qn)))))
        .collect();
    Ok(AlphaExpansion {
        alpha,
        decimal,
        digits,
        residues,
    })
}

/// One Fourier mode of g with its exact rotation residue {k alpha}.
#[derive(Debug, Clone)]
pub struct Mode {
    pub k: u64,
    /// coefficient a_k; g is Hermitian-symmetrized, so the mode contributes
    /// 2 Re(a_k e^{2 pi i k x}).
    pub a: Complex64,
    /// exact {k alpha} in [0, 1).
    pub delta: BigRational,
}

impl Mode {
    pub fn delta_f64(&self) -> f64 {
        self.delta.to_f64().unwrap_or(0.0)
    }
}

/// The gap-scheduled skew product: alpha from the schedule and one mode per
/// gap, k_n = 10^{q_n}, a_{k_n} = 10^{-(q_{n+1} - q_n)}.
#[derive(Debug, Clone)]
pub struct SlowSkew {
    pub schedule: GapSchedule,
    pub alpha: AlphaExpansion,
    pub alpha_f64: f64,
    pub modes: Vec<Mode>,
}

impl SlowSkew {
    pub fn new(schedule: GapSchedule, extra_digits: u64) -> Result<Self, SlowError> {
        let alpha = build_alpha(&schedule, extra_digits)?;
        let mut modes = Vec::new();
        for n in 0..schedule.q.len().saturating_sub(1) {
            let qn = schedule.q[n];
            if qn > MAX_MODE_EXPONENT {
                return Err(SlowError::ModeTooLarge { q: qn });
            }
            let gap = schedule.q[n + 1] - qn;
            let a = Complex64::new(10f64.powi(-(gap as i32)), 0.0);
            modes.push(Mode {
                k: 10u64.pow(qn as u32),
                a,
                delta: alpha.residues[n].clone(),
            });
        }
        let alpha_f64 = alpha.alpha.to_f64().unwrap();
        Ok(SlowSkew {
            schedule,
            alpha,
            alpha_f64,
            modes,
        })
    }

    /// Exact analyticity check |a_k| <= r^{-k}, i.e. gap >= 10^{q_n} log10(r).
    pub fn analyticity_holds(&self) -> bool {
        let q = &self.schedule.q;
        (0..q.len().saturating_sub(1)).all(|n| {
            let gap = BigRational::from_integer(BigInt::from(q[n + 1] - q[n]));
            gap >= &self.schedule.log10_r * BigRational::from_integer(pow10(q[n]))
        })
    }

    /// The floating-point dynamical system with these modes.
    pub fn to_skew_product(&self) -> SkewProduct {
        SkewProduct::new(self.alpha_f64, self.modes.iter().map(|m| (m.k, m.a)).collect())
            .expect("modes have k >= 1")
    }
}

// ---------------------------------------------------------------------------
// coboundary analysis
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CoboundaryReport {
    /// (k, b_k) with b_k = a_k / (e^{2 pi i k alpha} - 1).
    pub coefficients: Vec<(u64, Complex64)>,
    pub min_modulus: f64,
    /// true when min |b_k| >= 0.05: the transfer-function coefficients do
    /// not decay, so the cohomological equation has no continuous solution.
    pub no_decaying_solution: bool,
}

/// e^{2 pi i t} - 1 without cancellation: (-2 sin^2(pi t), sin(2 pi t)).
pub fn e2pii_minus_one(t: f64) -> Complex64 {
    let s = (std::f64::consts::PI * t).sin();
    Complex64::new(-2.0 * s * s, (TAU * t).sin())
}

pub fn coboundary_coefficients(modes: &[Mode]) -> Result<CoboundaryReport, SlowError> {
    let mut coefficients = Vec::with_capacity(modes.len());
    let mut min_modulus = f64::INFINITY;
    for m in modes {
        if m.delta.is_zero() {
            return Err(SlowError::ExactResonance { k: m.k });
        }
        let den = e2pii_minus_one(m.delta_f64());
        let b = m.a / den;
        min_modulus = min_modulus.min(b.norm());
        coefficients.push((m.k, b));
    }
    if coefficients.is_empty() {
        min_modulus = 0.0;
    }
    Ok(CoboundaryReport {
        coefficients,
        min_modulus,
        no_decaying_solution: min_modulus >= 0.05,
    })
}

/// Modes reverse-engineered from transfer coefficients: a_k = b_k
/// (e^{2 pi i k alpha} - 1), so g is the coboundary of
/// h(x) = sum 2 Re(b_k e^{2 pi i k x}).
pub fn modes_from_coboundary(
    alpha: &BigRational,
    bs: &[(u64, Complex64)],
) -> Result<Vec<Mode>, SlowError> {
    bs.iter()
        .map(|&(k, b)| {
            let delta = frac_rational(&(alpha * BigRational::from_integer(BigInt::from(k))));
            if delta.is_zero() {
                return Err(SlowError::ExactResonance { k });
            }
            let a = b * e2pii_minus_one(delta.to_f64().unwrap());
            Ok(Mode { k, a, delta })
        })
        .collect()
}

/// sum_k 2 Re(c_k e^{2 pi i k x}).
pub fn fourier_eval(modes: &[(u64, Complex64)], x: f64) -> f64 {
    modes
        .iter()
        .map(|&(k, c)| {
            let phase = Complex64::from_polar(1.0, TAU * ((k as f64 * x).rem_euclid(1.0)));
            2.0 * (c * phase).re
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Birkhoff sums
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// the cocycle g itself
    G,
    /// g', whose Birkhoff sum is the derivative entry D_n
    GPrime,
}

fn weighted(a: Complex64, k: u64, obs: Observable) -> Complex64 {
    match obs {
        Observable::G => a,
        Observable::GPrime => a * Complex64::new(0.0, TAU * k as f64),
    }
}

/// sum_{j<n} (e^{2 pi i k alpha})^j, with {j k alpha} evaluated through the
/// exact residue so huge n stays accurate. |result| <= n always.
pub fn geometric_factor(m: &Mode, n: u64) -> Complex64 {
    if m.delta.is_zero() {
        return Complex64::new(n as f64, 0.0);
    }
    let n_delta = frac_rational(&(&m.delta * BigRational::from_integer(BigInt::from(n))))
        .to_f64()
        .unwrap_or(0.0);
    let num = e2pii_minus_one(n_delta);
    let den = e2pii_minus_one(m.delta_f64());
    num / den
}

/// Closed-form Birkhoff sum sum_{j=0}^{n-1} w(x + j alpha) with w = g or g',
/// O(#modes) independent of n.
pub fn birkhoff_closed(modes: &[Mode], x: f64, n: u64, obs: Observable) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let x_rat = frac_rational(&BigRational::from_float(x).unwrap_or_else(BigRational::zero));
    modes
        .iter()
        .map(|m| {
            let coeff = weighted(m.a, m.k, obs);
            // exact residue {k x}: k reaches 10^{q} and would amplify the
            // float representation error of x into the phase
            let ph = frac_rational(&(&x_rat * BigRational::from_integer(BigInt::from(m.k))))
                .to_f64()
                .unwrap_or(0.0);
            let phase = Complex64::from_polar(1.0, TAU * ph);
            2.0 * (coeff * phase * geometric_factor(m, n)).re
        })
        .sum()
}

/// Direct summation cross-check with compensated (Kahan) accumulation.
/// The rotation is stepped in exact rational arithmetic and each phase
/// residue {k x_j} is reduced before conversion to f64, because the mode
/// frequencies reach 10^{q} and would amplify float drift in x_j.
pub fn birkhoff_direct(modes: &[Mode], alpha: &BigRational, x: f64, n: u64, obs: Observable) -> f64 {
    let coeffs: Vec<(u64, Complex64)> = modes
        .iter()
        .map(|m| (m.k, weighted(m.a, m.k, obs)))
        .collect();
    let mut xj = frac_rational(&BigRational::from_float(x).unwrap_or_else(BigRational::zero));
    let mut sum = 0.0;
    let mut comp = 0.0;
    for _ in 0..n {
        let mut val = 0.0;
        for &(k, c) in &coeffs {
            let ph = frac_rational(&(&xj * BigRational::from_integer(BigInt::from(k))))
                .to_f64()
                .unwrap_or(0.0);
            val += 2.0 * (c * Complex64::from_polar(1.0, TAU * ph)).re;
        }
        let y = val - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        xj = frac_rational(&(xj + alpha));
    }
    sum
}

// ---------------------------------------------------------------------------
// growth reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DerivativeGrowthReport {
    /// (n, max over the grid of |D_n|)
    pub rows: Vec<(u64, f64)>,
    pub fit: Option<LineFit>,
    pub eps_target: f64,
    /// fitted slope <= eps_target
    pub pass: bool,
    /// max over rows of |D_n| / n^{2 tau}, tau = eps_target / 4
    pub bound_ratio_max: f64,
    pub tau: f64,
    pub grid_size: usize,
    /// whether the schedule satisfies the exact gap condition; finite strict
    /// schedules are truncations of the ideal Liouville construction
    pub strict_schedule: bool,
}

pub fn derivative_growth_report(
    s: &SlowSkew,
    n_schedule: &[u64],
    grid_size: usize,
    eps_target: f64,
) -> DerivativeGrowthReport {
    assert!(eps_target > 0.0 && eps_target < 1.0);
    let tau = eps_target / 4.0;
    let mut rows = Vec::with_capacity(n_schedule.len());
    let mut bound_ratio_max = 0.0f64;
    for &n in n_schedule {
        let max_dn = (0..grid_size)
            .map(|i| {
                let x = i as f64 / grid_size as f64;
                birkhoff_closed(&s.modes, x, n, Observable::GPrime).abs()
            })
            .fold(0.0, f64::max);
        bound_ratio_max = bound_ratio_max.max(max_dn / (n as f64).powf(2.0 * tau));
        rows.push((n, max_dn));
    }
    let xs: Vec<f64> = rows.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|&(_, d)| d.max(1e-12).ln()).collect();
    let fit = least_squares(&xs, &ys);
    let pass = fit.map(|f| f.slope <= eps_target).unwrap_or(false);
    DerivativeGrowthReport {
        rows,
        fit,
        eps_target,
        pass,
        bound_ratio_max,
        tau,
        grid_size,
        strict_schedule: s.schedule.is_strict(),
    }
}

#[derive(Debug, Clone)]
pub struct EquicontinuityProbe {
    /// (n, running max of max_x |sum_{j<n} g(x + j alpha)|), recorded at
    /// every increase of the running max.
    pub staircase: Vec<(u64, f64)>,
    /// predicted resonance scales 10^{q_{i+1} - q_i} that fit below N
    pub resonance_scales: Vec<u64>,
    /// scales across which the running max grew by >= 50%
    pub jumps: usize,
    pub unbounded_evidence: bool,
}

/// Running max over n <= big_n of the sup over the grid of the Birkhoff sum
/// of g. A staircase that keeps jumping at the resonance scales is evidence
/// against the bounded-Birkhoff condition required for equicontinuity.
pub fn equicontinuity_probe(s: &SlowSkew, big_n: u64, grid_size: usize) -> EquicontinuityProbe {
    assert!(big_n >= 1_000, "probe needs N >= 10^3 to see any scale");
    let coeffs: Vec<(u64, Complex64)> = s.modes.iter().map(|m| (m.k, m.a)).collect();
    let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 / grid_size as f64).collect();
    let mut sums = vec![0.0f64; grid_size];
    let mut comps = vec![0.0f64; grid_size];
    let mut running = vec![0.0f64; big_n as usize + 1];
    let mut staircase = Vec::new();
    let mut current = 0.0f64;
    for n in 1..=big_n {
        let mut level = 0.0f64;
        for (i, &x0) in grid.iter().enumerate() {
            let xj = (x0 + (n - 1) as f64 * s.alpha_f64).rem_euclid(1.0);
            let y = fourier_eval(&coeffs, xj) - comps[i];
            let t = sums[i] + y;
            comps[i] = (t - sums[i]) - y;
            sums[i] = t;
            level = level.max(sums[i].abs());
        }
        if level > current {
            current = level;
            staircase.push((n, current));
        }
        running[n as usize] = current;
    }

    // Each gap q_{i+1} - q_i resonates at scale 10^{gap}: the mode k = 10^{q_i}
    // has {k alpha} ~ 10^{-gap}, so its Birkhoff sum grows linearly until
    // n ~ 10^{gap} and saturates near 4|b_i| with b_i = a_i/(e^{2 pi i d}-1).
    // A jump at that scale means the running sup gained a definite fraction
    // of that saturation amount across the window [scale/3, 3*scale].
    let q = &s.schedule.q;
    let mut resonance_scales = Vec::new();
    let mut jumps = 0;
    for (i, m) in s.modes.iter().enumerate() {
        let gap = q[i + 1] - q[i];
        if gap > 18 {
            continue;
        }
        let scale = 10u64.pow(gap as u32);
        if scale > big_n {
            continue;
        }
        resonance_scales.push(scale);
        let before = running[(scale / 3).max(1) as usize];
        let after = running[(scale.saturating_mul(3)).min(big_n) as usize];
        let den = e2pii_minus_one(m.delta_f64());
        let saturation = if den.norm() > 0.0 {
            4.0 * m.a.norm() / den.norm()
        } else {
            f64::INFINITY // exact resonance: unbounded linear growth
        };
        let gained = after - before;
        if (before == 0.0 && after > 0.0)
            || (saturation.is_infinite() && gained > 0.0)
            || gained >= 0.25 * saturation
        {
            jumps += 1;
        }
    }
    EquicontinuityProbe {
        staircase,
        resonance_scales,
        jumps,
        unbounded_evidence: jumps >= 2,
    }
}

/// Polynomial-entropy upper bound from polynomially growing Lipschitz
/// constants: Lip(f^n) <= C n^tau on a d-dimensional space gives
/// h_pol <= tau * d.
pub fn lipschitz_hpol_bound(tau: f64, dim: usize) -> f64 {
    tau * dim as f64
}

// ---------------------------------------------------------------------------
