//! Explicit linear-size Bowen covers for the north-south model
//! G(rho, alpha, w, theta) = (rho, alpha, g(w), theta + alpha) on
//! (annulus) x (sphere), with g = h_2 the height map of the homography
//! y -> 2y. The construction follows the transit-time argument: an orbit
//! spends at most N(eps) iterates in the equatorial band, so covering data
//! is only needed around the band-passage window, and the total cover size
//! is affine in n.
//!
//! The sphere carries the round (chordal) metric via the embedding
//! (w, theta) -> (w, c cos 2 pi theta, c sin 2 pi theta), c = sqrt(w - w^2);
//! the cap thresholds and angular tolerances are calibrated to it.

use rand::Rng;

use crate::lab::LabError;
use crate::seed::cell_rng;

const TAU: f64 = std::f64::consts::TAU;

/// g(w) = h_2(w) = 4w / (3w + 1); g^j(w) = h_{2^j}(w), computed in the
/// underflow-safe form w / (w + 4^{-j} (1 - w)).
pub fn g_iter(w: f64, j: u64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    let decay = 0.25f64.powi(j.min(2_000) as i32); // underflows to 0 harmlessly
    w / (w + decay * (1.0 - w))
}

/// g^{-l}(c) = c / (c + 4^l (1 - c)).
pub fn g_inv_iter(c: f64, l: u64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if c >= 1.0 {
        return 1.0;
    }
    let grow = 4.0f64.powi(l.min(2_000) as i32); // overflows to inf harmlessly
    c / (c + grow * (1.0 - c))
}

/// Smallest j >= 0 with g^j(w) >= level; None when w <= 0 (the pole never
/// leaves) or the answer exceeds the cap.
pub fn first_passage(w: f64, level: f64, cap: u64) -> Option<u64> {
    if w <= 0.0 {
        return None;
    }
    if w >= level {
        return Some(0);
    }
    // 4^j >= level (1 - w) / ((1 - level) w)
    let rhs = (level * (1.0 - w)) / ((1.0 - level) * w);
    let mut j = (rhs.ln() / 4.0f64.ln()).ceil().max(0.0) as u64;
    while j > 0 && g_iter(w, j - 1) >= level {
        j -= 1;
    }
    while g_iter(w, j) < level {
        j += 1;
        if j > cap {
            return None;
        }
    }
    Some(j)
}

/// Point of the model in (rho, alpha, w, theta) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsPoint {
    pub rho: f64,
    pub alpha: f64,
    pub w: f64,
    pub theta: f64,
}

fn sphere_coords(w: f64, theta: f64) -> [f64; 3] {
    let c = (w - w * w).max(0.0).sqrt();
    let (s, co) = (TAU * theta).sin_cos();
    [w, c * co, c * s]
}

pub fn sphere_dist(w1: f64, t1: f64, w2: f64, t2: f64) -> f64 {
    let a = sphere_coords(w1, t1);
    let b = sphere_coords(w2, t2);
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Bowen distance of the model over n iterates: base coordinates are inert,
/// w advances through g, theta through the alpha-rotation.
pub fn ns_bowen_dist(a: &NsPoint, b: &NsPoint, n: u64) -> f64 {
    let mut d = (a.rho - b.rho).abs().max((a.alpha - b.alpha).abs());
    for j in 0..n {
        let s = sphere_dist(
            g_iter(a.w, j),
            (a.theta + j as f64 * a.alpha).rem_euclid(1.0),
            g_iter(b.w, j),
            (b.theta + j as f64 * b.alpha).rem_euclid(1.0),
        );
        d = d.max(s);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsParams {
    pub eps: f64,
    pub n: u64,
    /// J1, the radial extent of the annulus (inside |x| > 1)
    pub rho_interval: (f64, f64),
    /// J2, the argument extent
    pub alpha_interval: (f64, f64),
    pub samples: usize,
    pub seed: u64,
}

impl NsParams {
    pub fn standard(eps: f64, n: u64) -> Self {
        NsParams {
            eps,
            n,
            rho_interval: (1.5, 2.0),
            alpha_interval: (0.2, 0.3),
            samples: 10_000,
            seed: 2,
        }
    }
}

/// The constructed cover S(n; eps), stored through its component grids: the
/// product families are only counted, never materialized, and membership is
/// resolved through a designated-candidate lookup.
#[derive(Debug, Clone)]
pub struct NsCover {
    pub eps: f64,
    pub n: u64,
    rho_interval: (f64, f64),
    alpha_interval: (f64, f64),
    /// cap threshold: caps {w <= beta}, {w >= 1 - beta} have round diameter
    /// below eps
    pub beta: f64,
    /// band transit bound N(eps): max iterates with g^j(w) inside the band
    pub n_transit: u64,
    /// alignment window N + margin
    n_pad: u64,
    /// band-entry levels l <= t0 use the direct (unperturbed) angle grids
    t0: u64,
    /// Lipschitz bound of g^k on [beta, 1] over the window
    pub lips: f64,
    /// number of band intervals
    m_band: u64,
    band_step: f64,
    /// angle grids
    m_theta: u64,
    s_alpha: f64,
    m_alpha: u64,
    s_alpha0: f64,
    m_alpha0: u64,
    s_alpha_pole: f64,
    m_alpha_pole: u64,
    s_rho: f64,
    m_rho: u64,
}

impl NsCover {
    pub fn build(params: &NsParams) -> Result<Self, LabError> {
        let eps = params.eps;
        if !(eps > 0.0 && eps < 0.25) {
            return Err(LabError::BadEpsilon { eps });
        }
        let (r_lo, r_hi) = params.rho_interval;
        let (a_lo, a_hi) = params.alpha_interval;
        if !(r_lo < r_hi && r_lo > 1.0) || !(a_lo < a_hi && a_lo >= 0.0 && a_hi < 1.0) {
            return Err(LabError::InvalidParams(
                "annulus intervals must satisfy 1 < rho_lo < rho_hi, 0 <= alpha_lo < alpha_hi < 1"
                    .into(),
            ));
        }
        let beta = eps * eps / 5.0;
        // transit bound through the band [beta, 1 - beta]
        let mut n_transit = 0u64;
        let mut w = beta;
        while w <= 1.0 - beta {
            w = g_iter(w, 1);
            n_transit += 1;
        }
        let n_pad = n_transit + 4;
        // worst Lipschitz constant of g^k on [beta, 1] for k in the window
        let lips = (1..=n_pad)
            .map(|k| {
                let p = 4.0f64.powi(k as i32);
                p / ((p - 1.0) * beta + 1.0).powi(2)
            })
            .fold(1.0f64, f64::max);
        // w-interval length: forward images stay within eps/4 in height and
        // the c = sqrt(w - w^2) coordinate moves by at most sqrt(eta * lips)
        let eta = eps * eps / (16.0 * lips);
        let m_band = ((1.0 - 2.0 * beta) / eta).ceil() as u64;
        let band_step = (1.0 - 2.0 * beta) / m_band as f64;
        // angular budgets (equatorial chord factor 2 pi c <= pi)
        let s_theta = eps / (4.0 * std::f64::consts::PI);
        let m_theta = (1.0 / s_theta).ceil() as u64;
        let t0 = (4.0 * std::f64::consts::PI / eps).ceil() as u64;
        let s_alpha = eps / (4.0 * std::f64::consts::PI * n_pad as f64);
        let m_alpha = ((a_hi - a_lo) / s_alpha).ceil() as u64 + 1;
        let s_alpha0 = eps / (4.0 * std::f64::consts::PI * (t0 + n_pad) as f64);
        let m_alpha0 = ((a_hi - a_lo) / s_alpha0).ceil() as u64 + 1;
        let s_alpha_pole = eps / 2.0;
        let m_alpha_pole = ((a_hi - a_lo) / s_alpha_pole).ceil() as u64 + 1;
        let s_rho = eps;
        let m_rho = ((r_hi - r_lo) / s_rho).ceil() as u64 + 1;
        Ok(NsCover {
            eps,
            n: params.n,
            rho_interval: params.rho_interval,
            alpha_interval: params.alpha_interval,
            beta,
            n_transit,
            n_pad,
            t0,
            lips,
            m_band,
            band_step,
            m_theta,
            s_alpha,
            m_alpha,
            s_alpha0,
            m_alpha0,
            s_alpha_pole,
            m_alpha_pole,
            s_rho,
            m_rho,
        })
    }

    /// Total number of cover points: two polar families, the direct family
    /// for band-entry levels l <= min(t0, n), and the perturbed-angle family
    /// for t0 < l <= n. Affine in n.
    pub fn size(&self) -> u128 {
        let poles = 2u128 * self.m_rho as u128 * self.m_alpha_pole as u128;
        let l_direct = self.t0.min(self.n) + 1;
        let direct = self.m_rho as u128
            * self.m_alpha0 as u128
            * self.m_theta as u128
            * (self.m_band as u128 * l_direct as u128 + 1);
        let l_pert = self.n.saturating_sub(self.t0) as u128;
        let perturbed = self.m_rho as u128
            * self.m_alpha as u128
            * self.m_theta as u128
            * self.m_band as u128
            * l_pert;
        poles + direct + perturbed
    }

    fn nearest(lo: f64, step: f64, count: u64, x: f64) -> f64 {
        let idx = ((x - lo) / step).round().clamp(0.0, (count - 1) as f64);
        lo + idx * step
    }

    fn nearest_theta(&self, x: f64) -> f64 {
        let step = 1.0 / self.m_theta as f64;
        let idx = (x.rem_euclid(1.0) / step).round().rem_euclid(self.m_theta as f64);
        idx * step
    }

    fn band_center(&self, w_band: f64) -> f64 {
        let i = ((w_band - self.beta) / self.band_step)
            .floor()
            .clamp(0.0, (self.m_band - 1) as f64);
        self.beta + (i + 0.5) * self.band_step
    }

    /// The cover point designated to serve a given point: O(1) lookup, used
    /// both to verify the covering property and to resolve membership.
    pub fn designated(&self, p: &NsPoint) -> NsPoint {
        let (r_lo, _) = self.rho_interval;
        let (a_lo, _) = self.alpha_interval;
        let rho_c = Self::nearest(r_lo, self.s_rho, self.m_rho, p.rho);
        let entry = first_passage(p.w, self.beta, self.n);
        match entry {
            // never leaves the south cap within the horizon
            None => NsPoint {
                rho: rho_c,
                alpha: Self::nearest(a_lo, self.s_alpha_pole, self.m_alpha_pole, p.alpha),
                w: 0.0,
                theta: 0.0,
            },
            Some(l) if l > self.n => NsPoint {
                rho: rho_c,
                alpha: Self::nearest(a_lo, self.s_alpha_pole, self.m_alpha_pole, p.alpha),
                w: 0.0,
                theta: 0.0,
            },
            // starts inside the north cap
            Some(0) if p.w >= 1.0 - self.beta => NsPoint {
                rho: rho_c,
                alpha: Self::nearest(a_lo, self.s_alpha_pole, self.m_alpha_pole, p.alpha),
                w: 1.0,
                theta: 0.0,
            },
            // direct family: band entry early enough that an unperturbed
            // fine alpha grid keeps angles aligned through the whole window
            Some(l) if l <= self.t0 => {
                let c = self.band_center(g_iter(p.w, l));
                NsPoint {
                    rho: rho_c,
                    alpha: Self::nearest(a_lo, self.s_alpha0, self.m_alpha0, p.alpha),
                    w: g_inv_iter(c, l),
                    theta: self.nearest_theta(p.theta),
                }
            }
            // perturbed family: integerize m* alpha_c at the equator
            // crossing m* so the theta alignment survives the long approach
            Some(l) => {
                let c = self.band_center(g_iter(p.w, l));
                let w_c = g_inv_iter(c, l);
                let m_star = first_passage(w_c, 0.5, self.n + self.n_pad).unwrap_or(l) as f64;
                let a_prime = Self::nearest(a_lo, self.s_alpha, self.m_alpha, p.alpha);
                let alpha_c = a_prime - (m_star * a_prime).fract() / m_star;
                NsPoint {
                    rho: rho_c,
                    alpha: alpha_c,
                    w: w_c,
                    theta: self.nearest_theta((p.theta + m_star * p.alpha).rem_euclid(1.0)),
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NsCoverReport {
    pub eps: f64,
    pub n: u64,
    pub size: u128,
    pub n_transit: u64,
    /// every sampled point was within eps of its designated cover point in
    /// the Bowen metric d_n
    pub verified: bool,
    pub witness: Option<NsPoint>,
    /// worst observed d_n(point, designated) / eps
    pub max_defect: f64,
    /// at most n_transit_wide iterates of every sample satisfied
    /// sqrt(eps)/3 < g^j(w) < 1 - sqrt(eps)/3
    pub transit_ok: bool,
    pub n_transit_wide: u64,
    pub samples: usize,
    pub cover: NsCover,
}

/// Builds S(n; eps) and verifies, on random points, both the eps-covering
/// property in d_n and the band transit bound.
pub fn northsouth_cover(params: &NsParams) -> Result<NsCoverReport, LabError> {
    let cover = NsCover::build(params)?;
    let mut rng = cell_rng(params.seed, &format!("ns-cover/eps={}/n={}", params.eps, params.n));
    let (r_lo, r_hi) = params.rho_interval;
    let (a_lo, a_hi) = params.alpha_interval;

    // transit bound at the wide band used by the interval analysis
    let wide = params.eps.sqrt() / 3.0;
    let mut n_wide = 0u64;
    let mut w = wide;
    while w <= 1.0 - wide {
        w = g_iter(w, 1);
        n_wide += 1;
    }

    let mut verified = true;
    let mut witness = None;
    let mut max_defect = 0.0f64;
    let mut transit_ok = true;
    for _ in 0..params.samples {
        let p = NsPoint {
            rho: r_lo + rng.gen::<f64>() * (r_hi - r_lo),
            alpha: a_lo + rng.gen::<f64>() * (a_hi - a_lo),
            // height is uniform on the round sphere
            w: rng.gen::<f64>(),
            theta: rng.gen::<f64>(),
        };
        let q = cover.designated(&p);
        let d = ns_bowen_dist(&p, &q, params.n);
        if d / params.eps > max_defect {
            max_defect = d / params.eps;
        }
        if d > params.eps && verified {
            verified = false;
            witness = Some(p);
        }
        let in_band = (0..params.n)
            .filter(|&j| {
                let wj = g_iter(p.w, j);
                wj > wide && wj < 1.0 - wide
            })
            .count() as u64;
        if in_band > n_wide {
            transit_ok = false;
        }
    }
    Ok(NsCoverReport {
        eps: params.eps,
        n: params.n,
        size: cover.size(),
        n_transit: cover.n_transit,
        verified,
        witness,
        max_defect,
        transit_ok,
        n_transit_wide: n_wide,
        samples: params.samples,
        cover,
    })
}
