//! The action `(U, V, G)` built from a lift `F` and a matrix `L` in SL(3,Z),
//! with the two checks that come with it:
//!
//! * a quantitative proper-discontinuity certificate for the `Z^2` action
//!   generated by `U` and `V` (so the quotient of the plane is a torus);
//! * the comparison of the rotation set of `G` relative to `U, V` with the
//!   projective image of the rotation set of `F`.
//!
//! With the rows of `L^{-1}` written `(a1 a2 a3), (b1 b2 b3), (c1 c2 c3)`:
//! `U = S^{a1} T^{b1} F^{-c1}`, `V = S^{a2} T^{b2} F^{-c2}`,
//! `G = S^{-a3} T^{-b3} F^{c3}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{word_product, ActionWord, DynamicsError, OrbitCache, Retention, TorusLift};
use crate::geometry::{apply_hat_region, hausdorff, hull, inflate, line_region_distance, ConvexRegion, GeometryError, Rect};
use crate::projective::Vector2;
use crate::par;
use crate::projective::{pullback_infinity_line, InfinityPullback, IntMatrix3, IntTriple, ProjectiveError};
use crate::rotation::{
    classical_rotation_set, default_window, zaction_rotation_set, EstimatorParams, RotationError,
    RotationSetEstimate, ZActionEstimate, ZActionProblem,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PushforwardError {
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error("rotation set estimate meets the pulled-back line at infinity (clearance {0})")]
    HypothesisFails(f64),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
    #[error("word identity broken for {triple:?}: {lhs:?} != {rhs:?}")]
    CorrespondenceMismatch { triple: IntTriple, lhs: ActionWord, rhs: ActionWord },
}

/// `F`, `L` and the three words built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardSystem {
    pub l: IntMatrix3,
    pub l_inv: IntMatrix3,
    pub u: ActionWord,
    pub v: ActionWord,
    pub g: ActionWord,
    pub lift: TorusLift,
}

/// Builds `U, V, G` from the columns of `L^{-1}`.
pub fn build_pushforward(lift: &TorusLift, l: &IntMatrix3) -> Result<PushforwardSystem, PushforwardError> {
    let l_inv = l.inverse()?;
    let [a1, b1, c1] = l_inv.column(0);
    let [a2, b2, c2] = l_inv.column(1);
    let [a3, b3, c3] = l_inv.column(2);
    let neg = |x: i64| x.checked_neg().ok_or(ProjectiveError::Overflow("build_pushforward"));
    Ok(PushforwardSystem {
        l: *l,
        l_inv,
        u: ActionWord::new(a1, b1, neg(c1)?),
        v: ActionWord::new(a2, b2, neg(c2)?),
        g: ActionWord::new(neg(a3)?, neg(b3)?, c3),
        lift: lift.clone(),
    })
}

impl PushforwardSystem {
    /// Columns are the exponent triples of `U`, `V`, `G`: `D L^{-1} D` with `D = diag(1, 1, -1)`.
    pub fn exponent_matrix(&self) -> IntMatrix3 {
        let (u, v, g) = (self.u, self.v, self.g);
        IntMatrix3::new([[u.s, v.s, g.s], [u.t, v.t, g.t], [u.f, v.f, g.f]])
    }

    /// Rewrites a word in the letters `(U, V, G)` as a word in `(S, T, F)`.
    pub fn rebase(&self, word: &ActionWord) -> Result<ActionWord, PushforwardError> {
        Ok(ActionWord::from_exponents(self.exponent_matrix().apply(word.exponents())?))
    }

    /// Canonical forms of `S^{-m} T^{-n} F^{p}` and `U^{-mu} V^{-nu} G^{pi}`
    /// with `(mu, nu, pi) = L (m, n, p)`. They agree exactly, or an error is returned.
    pub fn word_correspondence(&self, t: IntTriple) -> Result<(ActionWord, ActionWord), PushforwardError> {
        let [m, n, p] = t;
        let [mu, nu, pi] = self.l.apply(t)?;
        let neg = |x: i64| x.checked_neg().ok_or(DynamicsError::Overflow);
        let lhs = word_product(&[(ActionWord::S, neg(m)?), (ActionWord::T, neg(n)?), (ActionWord::F, p)])?;
        let rhs = word_product(&[(self.u, neg(mu)?), (self.v, neg(nu)?), (self.g, pi)])?;
        if lhs != rhs {
            return Err(PushforwardError::CorrespondenceMismatch { triple: t, lhs, rhs });
        }
        Ok((lhs, rhs))
    }

    pub fn infinity_pullback(&self) -> InfinityPullback {
        pullback_infinity_line(&self.l)
    }

    /// Distance from the rotation-set estimate to the pulled-back line
    /// (`+inf` when the line lies at infinity).
    pub fn check_hypothesis(&self, rho: &RotationSetEstimate) -> f64 {
        match self.infinity_pullback() {
            InfinityPullback::EmptyInPlane => f64::INFINITY,
            InfinityPullback::Line(line) => line_region_distance(&line, &rho.outer),
        }
    }

    /// Smallest singular value of the 3x2 matrix with columns `(a1, b1, c1)`, `(a2, b2, c2)`.
    pub fn lattice_sigma_min(&self) -> f64 {
        let c0 = self.l_inv.column(0).map(|x| x as f64);
        let c1 = self.l_inv.column(1).map(|x| x as f64);
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let (g00, g01, g11) = (dot(c0, c0), dot(c0, c1), dot(c1, c1));
        let det = g00 * g11 - g01 * g01;
        let tr = g00 + g11;
        let lambda_min = 2.0 * det / (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
        lambda_min.sqrt()
    }
}

pub fn check_hypothesis(sys: &PushforwardSystem, rho: &RotationSetEstimate) -> f64 {
    sys.check_hypothesis(rho)
}

pub fn word_correspondence(sys: &PushforwardSystem, t: IntTriple) -> Result<(ActionWord, ActionWord), PushforwardError> {
    sys.word_correspondence(t)
}

/// Settings of the proper-discontinuity certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateParams {
    /// Radius `R` of the test ball `B(0, R)`.
    pub radius: f64,
    /// Largest `|k|` at which displacement hulls are sampled.
    pub k_scan: i64,
    /// Grid resolution for the displacement samples.
    pub grid_n: usize,
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self { radius: 1.0, k_scan: 128, grid_n: 64 }
    }
}

/// The constants of the proper-discontinuity argument, all from sampled data.
///
/// For `|(m, n)| > mn_bound`, `U^m V^n(B(0, R))` misses `B(0, R)` provided the
/// sampled containments `D(F^k) ⊆ B(0, R') + k O` hold for every `k` (only
/// `|k| <= k_scan` is checked).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuityCertificate {
    pub radius: f64,
    /// Clearance between the pulled-back line and the outer rotation-set estimate.
    pub clearance: f64,
    pub epsilon: f64,
    /// The compact neighbourhood `O` of the rotation set.
    pub neighbourhood: ConvexRegion,
    pub k0: i64,
    pub r_prime: f64,
    pub r_double_prime: f64,
    /// `(2R + R') / epsilon`: above this `|m c1 + n c2|` the first case applies.
    pub j_bound: f64,
    pub sigma_min: f64,
    pub mn_bound: f64,
    pub k_scan: i64,
    pub grid_n: usize,
    /// Largest outward defect of `hull D(F^k)` from `k O` over `k0 <= |k| <= k_scan`.
    pub tail_defect: f64,
}

/// Relative tolerance of the sampled containment `hull D(F^k) ⊆ k O`.
const CONTAINMENT_TOLERANCE: f64 = 1e-9;

pub fn discontinuity_certificate(
    sys: &PushforwardSystem,
    rho: &RotationSetEstimate,
    params: &CertificateParams,
) -> Result<DiscontinuityCertificate, PushforwardError> {
    let clearance = sys.check_hypothesis(rho);
    if !(clearance > 0.0) {
        return Err(PushforwardError::CertificateFailed(format!(
            "hypothesis fails: rotation set meets the pulled-back line (clearance {clearance})"
        )));
    }
    if !(params.radius > 0.0) || params.k_scan < 1 {
        return Err(PushforwardError::CertificateFailed("need R > 0 and k_scan >= 1".into()));
    }

    // O takes half the clearance, epsilon is what is left once O is built
    let (neighbourhood, epsilon) = match sys.infinity_pullback() {
        InfinityPullback::Line(line) => {
            let o = inflate(&rho.outer, clearance / 2.0);
            let eps = line_region_distance(&line, &o);
            (o, eps)
        }
        InfinityPullback::EmptyInPlane => (inflate(&rho.outer, 0.5), f64::INFINITY),
    };
    if !(epsilon > 0.0) {
        return Err(PushforwardError::CertificateFailed("neighbourhood touches the pulled-back line".into()));
    }

    let defects = scan_defects(&sys.lift, &neighbourhood, params)?;
    let tol = |k: i64| CONTAINMENT_TOLERANCE * (k as f64 * neighbourhood.max_norm()).max(1.0);
    // defects[k - 1] covers both +k and -k
    let last_bad = (1..=params.k_scan).rev().find(|&k| defects[(k - 1) as usize] > tol(k));
    let k0 = match last_bad {
        None => 1,
        Some(k) if k == params.k_scan => {
            return Err(PushforwardError::CertificateFailed(format!(
                "hull D(F^k) leaves k*O at |k| = k_scan = {} (defect {:.3e})",
                params.k_scan,
                defects[(k - 1) as usize]
            )))
        }
        Some(k) => k + 1,
    };
    let r_prime = defects[..(k0 - 1) as usize].iter().copied().fold(0.0, f64::max);
    let tail_defect = defects[(k0 - 1) as usize..].iter().copied().fold(0.0, f64::max);

    let two_r = 2.0 * params.radius;
    let j_bound = if epsilon.is_finite() { (two_r + r_prime) / epsilon } else { 0.0 };
    let r_double_prime = j_bound.floor() * neighbourhood.max_norm();
    let a_bound = two_r + r_prime + r_double_prime;
    let sigma_min = sys.lattice_sigma_min();
    let mn_bound = a_bound.hypot(j_bound) / sigma_min;
    if !mn_bound.is_finite() {
        return Err(PushforwardError::CertificateFailed("non-finite (m, n) bound".into()));
    }

    Ok(DiscontinuityCertificate {
        radius: params.radius,
        clearance,
        epsilon,
        neighbourhood,
        k0,
        r_prime,
        r_double_prime,
        j_bound,
        sigma_min,
        mn_bound,
        k_scan: params.k_scan,
        grid_n: params.grid_n,
        tail_defect,
    })
}

/// For `k = 1..=k_scan`: max over `±k` of the outward defect of the sampled
/// `hull D(F^{±k})` from `±k O`.
fn scan_defects(lift: &TorusLift, o: &ConvexRegion, params: &CertificateParams) -> Result<Vec<f64>, PushforwardError> {
    let scan = |sign: i64| -> Result<Vec<f64>, PushforwardError> {
        let mut cache = OrbitCache::unit_grid(lift.clone(), params.grid_n, Retention::FrontierOnly)?;
        (1..=params.k_scan)
            .map(|k| {
                let h = hull(cache.displacements(sign * k)?)?;
                Ok(o.scale((sign * k) as f64).outward_defect(&h))
            })
            .collect()
    };
    let both = par::try_map_slice(&[1i64, -1], |s| scan(*s))?;
    Ok(both[0].iter().zip(&both[1]).map(|(a, b)| a.max(*b)).collect())
}

/// Outcome of probing `U^m V^n(B(0,R)) ∩ B(0,R)` beyond the certified bound.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    pub trials: usize,
    /// Sampled `(m, n)` whose ball test reported an intersection.
    pub violations: Vec<(i64, i64)>,
    pub min_norm: f64,
    pub max_norm: f64,
}

/// Images under `F^f` of points on the circle of radius `R`, with the
/// sampling slack of the image curve.
struct CircleImage {
    points: Vec<Vector2>,
    /// Half the largest gap between consecutive image points plus twice the
    /// largest deviation of an image midpoint from its chord.
    slack: f64,
}

fn circle_images(cache: &mut OrbitCache, f: i64) -> Result<CircleImage, PushforwardError> {
    let all = cache.images(f)?;
    let n = all.len() / 2;
    let points: Vec<Vector2> = (0..n).map(|j| all[2 * j]).collect();
    let mut slack: f64 = 0.0;
    for j in 0..n {
        let (a, mid, b) = (all[2 * j], all[2 * j + 1], all[(2 * j + 2) % all.len()]);
        let chord_mid = (a + b).scale(0.5);
        slack = slack.max(0.5 * a.dist(b) + 2.0 * mid.dist(chord_mid));
    }
    Ok(CircleImage { points, slack })
}

/// Samples `(m, n)` with `mn_bound < |(m, n)| <= 2 mn_bound` and tests whether
/// `W = U^m V^n` moves the closed ball `B = B(0, R)` off itself.
///
/// By the Jordan curve theorem `W(B)` meets `B` iff the image of the circle
/// meets `B` or `W(B)` contains the centre. The first is tested on
/// `circle_samples` boundary points (with their sampling slack), the second
/// exactly via `W^{-1}(0)`.
pub fn discontinuity_empirical_check(
    sys: &PushforwardSystem,
    cert: &DiscontinuityCertificate,
    trials: usize,
    seed: u64,
    circle_samples: usize,
) -> Result<EmpiricalReport, PushforwardError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = cert.mn_bound;
    let hi = (2.0 * cert.mn_bound).max(lo + 2.0);
    let reach = hi.floor() as i64;
    let mut samples = Vec::with_capacity(trials);
    while samples.len() < trials {
        let m = rng.gen_range(-reach..=reach);
        let n = rng.gen_range(-reach..=reach);
        let r = (m as f64).hypot(n as f64);
        if r > lo && r <= hi {
            samples.push((m, n));
        }
    }
    let words: Vec<ActionWord> = samples
        .iter()
        .map(|&(m, n)| word_product(&[(sys.u, m), (sys.v, n)]))
        .collect::<Result<_, _>>()?;

    // boundary points interleaved with the midpoints of their arcs
    let count = 2 * circle_samples.max(8);
    let seeds: Vec<Vector2> = (0..count)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / count as f64;
            Vector2::new(cert.radius * t.cos(), cert.radius * t.sin())
        })
        .collect();
    let mut cache = OrbitCache::new(sys.lift.clone(), seeds, Retention::FrontierOnly);
    let mut exps: Vec<i64> = words.iter().map(|w| w.f).collect();
    exps.sort_unstable();
    exps.dedup();
    // stream outward from 0 in each direction so the cache never restarts
    let order = exps.iter().filter(|f| **f >= 0).chain(exps.iter().rev().filter(|f| **f < 0));
    let mut images = std::collections::BTreeMap::new();
    for &f in order {
        images.insert(f, circle_images(&mut cache, f)?);
    }

    let r = cert.radius;
    let hits = par::try_map_slice(&words, |w| -> Result<bool, PushforwardError> {
        let img = &images[&w.f];
        let shift = w.shift();
        if img.points.iter().any(|p| (*p + shift).norm() <= r + img.slack) {
            return Ok(true);
        }
        let centre_preimage = sys.lift.iterate(Vector2::ZERO - shift, -w.f)?;
        Ok(centre_preimage.norm() <= r)
    })?;
    let violations = samples.iter().zip(hits).filter(|(_, hit)| *hit).map(|(mn, _)| *mn).collect();
    let norms = samples.iter().map(|&(m, n)| (m as f64).hypot(n as f64));
    Ok(EmpiricalReport {
        trials,
        violations,
        min_norm: norms.clone().fold(f64::INFINITY, f64::min),
        max_norm: norms.fold(0.0, f64::max),
    })
}

/// Comparison of `L^(classical estimate)` with the Z^3-action estimate for `(U, V, G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub classical: RotationSetEstimate,
    pub clearance: f64,
    pub image_inner: ConvexRegion,
    pub image_outer: ConvexRegion,
    pub zaction: ZActionEstimate,
    pub slope_window: Rect,
    /// Hausdorff distance between the two inner estimates.
    pub distance: f64,
    /// Declared error bar: transported classical margin plus the Z^3-action margin.
    pub bar: f64,
    pub pass: bool,
}

pub fn verify_theorem(sys: &PushforwardSystem, params: &EstimatorParams) -> Result<TheoremReport, PushforwardError> {
    let classical = classical_rotation_set(&sys.lift, &params.ladder, params.grid_n)?;
    verify_theorem_with(sys, classical, params)
}

/// [`verify_theorem`] on an already computed classical estimate.
pub fn verify_theorem_with(
    sys: &PushforwardSystem,
    classical: RotationSetEstimate,
    params: &EstimatorParams,
) -> Result<TheoremReport, PushforwardError> {
    let clearance = sys.check_hypothesis(&classical);
    if !(clearance > 0.0) {
        return Err(PushforwardError::HypothesisFails(clearance));
    }
    let image_inner = apply_hat_region(&sys.l, &classical.inner)?;
    let image_outer = apply_hat_region(&sys.l, &classical.outer)?;
    let slope_window = params.slope_window.unwrap_or_else(|| default_window(&image_outer));
    let prob = ZActionProblem {
        u: sys.u,
        v: sys.v,
        g: sys.g,
        lift: sys.lift.clone(),
        k_box: params.k_box,
        k_grid: params.k_grid,
        p_min: 1,
        p_max: params.p_max,
        slope_window,
    };
    let zaction = zaction_rotation_set(&prob)?;
    let distance = hausdorff(&image_inner, &zaction.estimate.inner);
    let bar = hausdorff(&image_inner, &image_outer) + zaction.estimate.margin;
    Ok(TheoremReport {
        pass: distance <= bar,
        classical,
        clearance,
        image_inner,
        image_outer,
        zaction,
        slope_window,
        distance,
        bar,
    })
}
