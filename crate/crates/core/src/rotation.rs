//! Rotation-set estimators.
//!
//! * [`classical_rotation_set`]: hulls of the sampled displacement sets
//!   `D(F^n)/n` along a ladder of iterates.
//! * [`zaction_rotation_set`]: limit slopes `(m/p, n/p)` of integer triples for
//!   which `U^{-m} V^{-n} G^{p}(K)` returns to the compact box `K`.
//!
//! Both report an inner estimate and an outer one grown by a heuristic error
//! bar. The bars are diagnostics, not rigorous enclosures.

use thiserror::Error;

use crate::dynamics::{ActionWord, DynamicsError, OrbitCache, Retention, TorusLift};
use crate::geometry::{hausdorff, hull, inflate, ConvexRegion, GeometryError, Rect};
use crate::par;
use crate::projective::Vector2;

/// Largest `|f|` exponent the hit enumeration will iterate to.
pub const MAX_WORD_ITERATES: i64 = 200_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotationError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("iterate ladder must be non-empty, strictly increasing and >= 1")]
    InvalidLadder,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("no triple (m, n, p) returned K to itself inside the slope window")]
    EmptyHitSet,
}

/// Inner/outer estimate of a rotation set with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSetEstimate {
    pub inner: ConvexRegion,
    pub outer: ConvexRegion,
    /// Iterates (classical) or the lower ends of the `p` bands (Z^3 action).
    pub iterate_ladder: Vec<i64>,
    pub grid_n: usize,
    /// Hausdorff distances between successive ladder hulls.
    pub hausdorff_trace: Vec<f64>,
    /// Radius by which `inner` was inflated to give `outer`.
    pub margin: f64,
}

impl RotationSetEstimate {
    pub fn inner_in_outer(&self) -> bool {
        self.outer.contains_region(&self.inner, 1e-12 * self.outer.max_norm().max(1.0))
    }
}

/// Doubling ladder `1, 2, 4, ...` capped by `last`, which is always included.
pub fn doubling_ladder(last: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut k = 1;
    while k < last {
        out.push(k);
        k *= 2;
    }
    out.push(last.max(1));
    out
}

fn check_ladder(ladder: &[i64]) -> Result<(), RotationError> {
    if ladder.is_empty() || ladder[0] < 1 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RotationError::InvalidLadder);
    }
    Ok(())
}

/// Classical rotation-set estimate of the lift `lift`.
///
/// For each `n` in the ladder the hull of `{F^n(z) - z}` over the
/// `grid_n x grid_n` cell-center grid is scaled by `1/n`. The last hull is the
/// inner estimate; the outer estimate adds the last trace value plus
/// `diam(D(F))/n_last`.
pub fn classical_rotation_set(
    lift: &TorusLift,
    ladder: &[i64],
    grid_n: usize,
) -> Result<RotationSetEstimate, RotationError> {
    check_ladder(ladder)?;
    let mut cache = OrbitCache::unit_grid(lift.clone(), grid_n, Retention::FrontierOnly)?;
    let one_step = hull(cache.displacements(1)?)?.diameter();

    let mut hulls = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let nf = n as f64;
        let averaged: Vec<Vector2> = cache.displacements(n)?.iter().map(|d| Vector2::new(d.x / nf, d.y / nf)).collect();
        hulls.push(hull(&averaged)?);
    }
    let hausdorff_trace: Vec<f64> = hulls.windows(2).map(|w| hausdorff(&w[0], &w[1])).collect();
    let n_last = *ladder.last().expect("checked non-empty") as f64;
    let margin = hausdorff_trace.last().copied().unwrap_or(0.0) + one_step / n_last;
    let inner = hulls.pop().expect("checked non-empty");
    let outer = inflate(&inner, margin);
    Ok(RotationSetEstimate {
        inner,
        outer,
        iterate_ladder: ladder.to_vec(),
        grid_n,
        hausdorff_trace,
        margin,
    })
}

/// Sample lattice of a box: `(res + 1)^2` points including the boundary.
pub fn box_lattice(k: &Rect, res: usize) -> Vec<Vector2> {
    let (hx, hy) = (k.width() / res as f64, k.height() / res as f64);
    (0..=res)
        .flat_map(|j| (0..=res).map(move |i| Vector2::new(k.x0 + i as f64 * hx, k.y0 + j as f64 * hy)))
        .collect()
}

/// Hull of the images of a box lattice under `F^f`, with the padding that
/// accounts for the unsampled part of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSummary {
    pub f: i64,
    pub hull: ConvexRegion,
    pub bbox: Rect,
    /// Twice the largest deviation of a cell's midpoint images from the
    /// average of the corresponding corner images.
    pub padding: f64,
}

impl ImageSummary {
    fn from_images(f: i64, images: &[Vector2], res: usize) -> Result<Self, GeometryError> {
        let side = res + 1;
        let at = |i: usize, j: usize| images[j * side + i];
        let mut dev = 0.0f64;
        for j in (0..res).step_by(2) {
            for i in (0..res).step_by(2) {
                let (c00, c20, c02, c22) = (at(i, j), at(i + 2, j), at(i, j + 2), at(i + 2, j + 2));
                let avg = (c00 + c20 + c02 + c22).scale(0.25);
                dev = dev.max(at(i + 1, j + 1).dist(avg));
                dev = dev.max(at(i + 1, j).dist((c00 + c20).scale(0.5)));
                dev = dev.max(at(i, j + 1).dist((c00 + c02).scale(0.5)));
                dev = dev.max(at(i + 2, j + 1).dist((c20 + c22).scale(0.5)));
                dev = dev.max(at(i + 1, j + 2).dist((c02 + c22).scale(0.5)));
            }
        }
        let hull = hull(images)?;
        Ok(Self { f, bbox: hull.bounding_box(), hull, padding: 2.0 * dev })
    }

    /// Conservative test that `F^f(K) + shift` meets `k`.
    pub fn meets(&self, shift: Vector2, k: &Rect, k_region: &ConvexRegion) -> bool {
        if !self.bbox.translate(shift).meets_padded(k, self.padding) {
            return false;
        }
        self.hull.translate(shift).distance_to_region(k_region) <= self.padding
    }
}

/// Tests `word(K) ∩ K ≠ ∅` for words over one lift and one box.
///
/// The test is one-sided relative to the sampled padding: it never answers
/// `false` when the sampled hull (grown by the padding) meets `K`, and may
/// answer `true` spuriously by at most the padding.
#[derive(Debug, Clone)]
pub struct ImageTester {
    k_box: Rect,
    k_region: ConvexRegion,
    res: usize,
    cache: OrbitCache,
    summaries: std::collections::BTreeMap<i64, ImageSummary>,
}

impl ImageTester {
    /// `res` is the lattice resolution of `k_box`; it is rounded up to an even number >= 2.
    pub fn new(lift: TorusLift, k_box: Rect, res: usize) -> Result<Self, RotationError> {
        if k_box.is_empty() || k_box.area() <= 0.0 {
            return Err(RotationError::InvalidProblem("K must have positive area".into()));
        }
        let res = (res.max(2) + 1) / 2 * 2;
        let seeds = box_lattice(&k_box, res);
        Ok(Self {
            k_box,
            k_region: k_box.to_region(),
            res,
            cache: OrbitCache::new(lift, seeds, Retention::FrontierOnly),
            summaries: Default::default(),
        })
    }

    pub fn k_box(&self) -> &Rect {
        &self.k_box
    }

    pub fn resolution(&self) -> usize {
        self.res
    }

    pub fn summary(&mut self, f: i64) -> Result<&ImageSummary, RotationError> {
        if !self.summaries.contains_key(&f) {
            let images = self.cache.images(f)?;
            let s = ImageSummary::from_images(f, &images, self.res)?;
            self.summaries.insert(f, s);
        }
        Ok(&self.summaries[&f])
    }

    /// Summaries for every `f` in `lo..=hi`, computed in streaming order.
    pub fn precompute(&mut self, lo: i64, hi: i64) -> Result<(), RotationError> {
        if hi >= 0 {
            for f in lo.max(0)..=hi {
                self.summary(f)?;
            }
        }
        if lo < 0 {
            for f in (lo..=hi.min(-1)).rev() {
                self.summary(f)?;
            }
        }
        Ok(())
    }

    pub fn cached(&self, f: i64) -> Option<&ImageSummary> {
        self.summaries.get(&f)
    }

    pub fn intersects(&mut self, word: &ActionWord) -> Result<bool, RotationError> {
        let shift = word.shift();
        let k_box = self.k_box;
        let k_region = self.k_region.clone();
        Ok(self.summary(word.f)?.meets(shift, &k_box, &k_region))
    }

    /// Read-only form of [`ImageTester::intersects`]; panics unless the
    /// summary for `word.f` has been computed.
    pub fn meets_cached(&self, word: &ActionWord) -> bool {
        self.summaries[&word.f].meets(word.shift(), &self.k_box, &self.k_region)
    }
}

/// Single-shot form of [`ImageTester::intersects`].
pub fn image_intersects(word: &ActionWord, lift: &TorusLift, k_box: Rect, res: usize) -> Result<bool, RotationError> {
    ImageTester::new(lift.clone(), k_box, res)?.intersects(word)
}

/// The rotation set of `G` relative to `U, V`, probed on the box `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZActionProblem {
    pub u: ActionWord,
    pub v: ActionWord,
    pub g: ActionWord,
    pub lift: TorusLift,
    pub k_box: Rect,
    /// Lattice resolution of `K` for the image test.
    pub k_grid: usize,
    pub p_min: i64,
    pub p_max: i64,
    /// Admissible `(m/p, n/p)`.
    pub slope_window: Rect,
}

impl ZActionProblem {
    /// `U = S`, `V = T`, `G = F`, `K = [0,1]^2`.
    pub fn standard(lift: TorusLift, p_max: i64, slope_window: Rect) -> Self {
        Self {
            u: ActionWord::S,
            v: ActionWord::T,
            g: ActionWord::F,
            lift,
            k_box: Rect::UNIT,
            k_grid: 64,
            p_min: 1,
            p_max,
            slope_window,
        }
    }

    /// `U^{-m} V^{-n} G^{p}` in canonical form.
    pub fn word(&self, m: i64, n: i64, p: i64) -> ActionWord {
        let e = |u: i64, v: i64, g: i64| -m * u - n * v + p * g;
        ActionWord::new(
            e(self.u.s, self.v.s, self.g.s),
            e(self.u.t, self.v.t, self.g.t),
            e(self.u.f, self.v.f, self.g.f),
        )
    }

    /// Deep-hit threshold `ceil(p_max / 2)`.
    pub fn deep_threshold(&self) -> i64 {
        ((self.p_max + 1) / 2).max(self.p_min)
    }

    fn validate(&self) -> Result<(), RotationError> {
        if self.p_max < 1 || self.p_min < 1 || self.p_min > self.p_max {
            return Err(RotationError::InvalidProblem(format!(
                "need 1 <= p_min <= p_max, got {}..{}",
                self.p_min, self.p_max
            )));
        }
        if self.k_box.is_empty() || self.k_box.area() <= 0.0 {
            return Err(RotationError::InvalidProblem("K must have positive area".into()));
        }
        let w = &self.slope_window;
        let bound = 1e6;
        if ![w.x0, w.x1, w.y0, w.y1].iter().all(|c| c.is_finite() && c.abs() < bound) {
            return Err(RotationError::InvalidProblem("slope window must be finite".into()));
        }
        Ok(())
    }

    fn m_range(&self, p: i64) -> (i64, i64) {
        slope_range(self.slope_window.x0, self.slope_window.x1, p)
    }

    fn n_range(&self, p: i64) -> (i64, i64) {
        slope_range(self.slope_window.y0, self.slope_window.y1, p)
    }
}

fn slope_range(lo: f64, hi: f64, p: i64) -> (i64, i64) {
    ((lo * p as f64).ceil() as i64, (hi * p as f64).floor() as i64)
}

/// A triple for which the image test succeeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleHit {
    pub m: i64,
    pub n: i64,
    pub p: i64,
    pub quotient: Vector2,
}

impl TripleHit {
    pub fn new(m: i64, n: i64, p: i64) -> Self {
        Self { m, n, p, quotient: Vector2::new(m as f64 / p as f64, n as f64 / p as f64) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZActionEstimate {
    pub hits: Vec<TripleHit>,
    pub estimate: RotationSetEstimate,
    /// Largest image padding among the deep hits.
    pub max_padding: f64,
    /// Deep hits whose quotient is within `1/p` of the slope-window boundary;
    /// a nonzero count means the window may be clipping the set.
    pub boundary_hits: usize,
}

/// Enumerates `p_min <= p <= p_max` and every `(m, n)` with `(m/p, n/p)` in the
/// slope window, keeping the triples whose word returns `K` to itself.
///
/// `inner` is the hull of the quotients with `p >= ceil(p_max/2)`; `outer`
/// inflates it by `(2 diam K + padding) / ceil(p_max/2)`.
pub fn zaction_rotation_set(prob: &ZActionProblem) -> Result<ZActionEstimate, RotationError> {
    prob.validate()?;
    let mut tester = ImageTester::new(prob.lift.clone(), prob.k_box, prob.k_grid)?;
    zaction_with_tester(prob, &mut tester)
}

fn zaction_with_tester(prob: &ZActionProblem, tester: &mut ImageTester) -> Result<ZActionEstimate, RotationError> {
    let ps: Vec<i64> = (prob.p_min..=prob.p_max)
        .filter(|&p| {
            let (m0, m1) = prob.m_range(p);
            let (n0, n1) = prob.n_range(p);
            m0 <= m1 && n0 <= n1
        })
        .collect();
    if ps.is_empty() {
        return Err(RotationError::EmptyHitSet);
    }

    // f is affine in (m, n) for fixed p, so its extremes sit at range corners
    let (mut f_lo, mut f_hi) = (i64::MAX, i64::MIN);
    for &p in &ps {
        let (m0, m1) = prob.m_range(p);
        let (n0, n1) = prob.n_range(p);
        for (m, n) in [(m0, n0), (m0, n1), (m1, n0), (m1, n1)] {
            let f = prob.word(m, n, p).f;
            f_lo = f_lo.min(f);
            f_hi = f_hi.max(f);
        }
    }
    if f_lo < -MAX_WORD_ITERATES || f_hi > MAX_WORD_ITERATES {
        return Err(RotationError::InvalidProblem(format!(
            "enumeration needs F-iterates in {f_lo}..={f_hi}, beyond the limit {MAX_WORD_ITERATES}"
        )));
    }
    tester.precompute(f_lo, f_hi)?;

    let tester_ref: &ImageTester = tester;
    let per_p: Vec<Vec<TripleHit>> = par::map_slice(&ps, |&p| {
        let (m0, m1) = prob.m_range(p);
        let (n0, n1) = prob.n_range(p);
        let mut out = Vec::new();
        for m in m0..=m1 {
            for n in n0..=n1 {
                if tester_ref.meets_cached(&prob.word(m, n, p)) {
                    out.push(TripleHit::new(m, n, p));
                }
            }
        }
        out
    });
    let hits: Vec<TripleHit> = per_p.into_iter().flatten().collect();
    if hits.is_empty() {
        return Err(RotationError::EmptyHitSet);
    }

    let deep_p = prob.deep_threshold();
    let deep: Vec<&TripleHit> = hits.iter().filter(|h| h.p >= deep_p).collect();
    if deep.is_empty() {
        return Err(RotationError::EmptyHitSet);
    }
    let inner = hull(&deep.iter().map(|h| h.quotient).collect::<Vec<_>>())?;
    let max_padding = deep
        .iter()
        .map(|h| tester.cached(prob.word(h.m, h.n, h.p).f).map_or(0.0, |s| s.padding))
        .fold(0.0, f64::max);
    let w = &prob.slope_window;
    let boundary_hits = deep
        .iter()
        .filter(|h| {
            let tol = 1.0 / h.p as f64;
            let q = h.quotient;
            q.x - w.x0 < tol || w.x1 - q.x < tol || q.y - w.y0 < tol || w.y1 - q.y < tol
        })
        .count();

    // convergence trace over dyadic p bands ending at p_max
    let mut bands = Vec::new();
    let mut lo = deep_p;
    while lo >= prob.p_min && lo >= 1 && bands.len() < 4 {
        bands.push(lo);
        if lo == 1 {
            break;
        }
        lo = (lo + 1) / 2;
    }
    bands.reverse();
    let band_hulls: Vec<ConvexRegion> = bands
        .iter()
        .enumerate()
        .filter_map(|(i, &b_lo)| {
            let b_hi = bands.get(i + 1).copied().unwrap_or(prob.p_max + 1);
            let q: Vec<Vector2> = hits.iter().filter(|h| h.p >= b_lo && h.p < b_hi).map(|h| h.quotient).collect();
            hull(&q).ok()
        })
        .collect();
    let hausdorff_trace = band_hulls.windows(2).map(|w| hausdorff(&w[0], &w[1])).collect();

    let margin = (2.0 * prob.k_box.diameter() + max_padding) / deep_p as f64;
    let outer = inflate(&inner, margin);
    Ok(ZActionEstimate {
        estimate: RotationSetEstimate {
            inner,
            outer,
            iterate_ladder: bands,
            grid_n: tester.resolution(),
            hausdorff_trace,
            margin,
        },
        hits,
        max_padding,
        boundary_hits,
    })
}

/// Estimator settings shared by the equivalence and theorem checks.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub ladder: Vec<i64>,
    pub grid_n: usize,
    pub p_max: i64,
    pub k_box: Rect,
    pub k_grid: usize,
    /// `None` derives the window from the classical outer estimate (see [`default_window`]).
    pub slope_window: Option<Rect>,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            ladder: doubling_ladder(200),
            grid_n: 256,
            p_max: 96,
            k_box: Rect::UNIT,
            k_grid: 64,
            slope_window: None,
        }
    }
}

/// Bounding box of `region` grown by `max(0.5, diam/2)` on every side.
pub fn default_window(region: &ConvexRegion) -> Rect {
    let b = region.bounding_box();
    let pad = 0.5f64.max(0.5 * region.diameter());
    Rect::new(b.x0 - pad, b.x1 + pad, b.y0 - pad, b.y1 + pad)
}

/// Both estimators run on the same lift with `U = S, V = T, G = F`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub classical: RotationSetEstimate,
    pub zaction: ZActionEstimate,
    pub slope_window: Rect,
    /// Hausdorff distance between the two inner estimates.
    pub distance: f64,
    /// Sum of the two declared margins.
    pub bound: f64,
    pub within_bound: bool,
}

/// Runs both estimators with the standard generators and compares them.
pub fn remark1_equivalence_check(lift: &TorusLift, params: &EstimatorParams) -> Result<EquivalenceReport, RotationError> {
    let classical = classical_rotation_set(lift, &params.ladder, params.grid_n)?;
    let slope_window = params.slope_window.unwrap_or_else(|| default_window(&classical.outer));
    let prob = ZActionProblem {
        k_box: params.k_box,
        k_grid: params.k_grid,
        ..ZActionProblem::standard(lift.clone(), params.p_max, slope_window)
    };
    let zaction = zaction_rotation_set(&prob)?;
    let distance = hausdorff(&classical.inner, &zaction.estimate.inner);
    let bound = classical.margin + zaction.estimate.margin;
    Ok(EquivalenceReport {
        distance,
        bound,
        within_bound: distance <= bound,
        classical,
        zaction,
        slope_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{displacement_samples, ShearAxis};

    fn bump() -> TorusLift {
        TorusLift::skew_shear(ShearAxis::Vertical, 0.0, vec![0.5, -0.5]).unwrap()
    }

    fn segment(a: Vector2, b: Vector2) -> ConvexRegion {
        hull(&[a, b]).unwrap()
    }

    #[test]
    fn ladder_validation() {
        assert_eq!(doubling_ladder(200), vec![1, 2, 4, 8, 16, 32, 64, 128, 200]);
        assert_eq!(doubling_ladder(1), vec![1]);
        let f = bump();
        for bad in [vec![], vec![0, 1], vec![3, 3], vec![4, 2]] {
            assert_eq!(classical_rotation_set(&f, &bad, 8).unwrap_err(), RotationError::InvalidLadder);
        }
    }

    #[test]
    fn classical_translation_is_exact() {
        let f = TorusLift::translation(0.25, 0.5).unwrap();
        let est = classical_rotation_set(&f, &[1, 2, 4, 8, 16], 8).unwrap();
        assert_eq!(est.inner, ConvexRegion::point(Vector2::new(0.25, 0.5)));
        assert_eq!(est.outer, est.inner);
        assert!(est.hausdorff_trace.iter().all(|d| *d == 0.0));
        assert_eq!(est.margin, 0.0);
    }

    #[test]
    fn classical_segment_oracle() {
        let est = classical_rotation_set(&bump(), &doubling_ladder(200), 256).unwrap();
        let truth = segment(Vector2::new(0.0, 0.0), Vector2::new(0.0, 1.0));
        assert!(hausdorff(&est.inner, &truth) < 0.02);
        assert!(est.inner_in_outer());
        assert!(est.outer.contains_region(&truth, 1e-12));
    }

    #[test]
    fn classical_two_wave_contains_fixed_point() {
        // (0, 0) is fixed: sin(0) = 0 in both coordinates
        let f = TorusLift::two_wave(0.0, 0.0, 0.05, 0.05).unwrap();
        assert!(f.evaluate(Vector2::ZERO).norm() < 1e-15);
        let est = classical_rotation_set(&f, &doubling_ladder(64), 64).unwrap();
        assert!(est.outer.contains_point(Vector2::ZERO, 0.0));
    }

    #[test]
    fn refinement_never_shrinks_hull() {
        // cell-center grids nest under tripling: (i + 1/2)/n = (3i + 1 + 1/2)/(3n)
        for f in [bump(), TorusLift::two_wave(0.2, 0.1, 0.06, 0.04).unwrap()] {
            for k in [1, 5, 20] {
                let coarse = hull(&displacement_samples(&f, k, 8).unwrap()).unwrap();
                let fine = hull(&displacement_samples(&f, k, 24).unwrap()).unwrap();
                assert!(fine.contains_region(&coarse, 1e-9), "k = {k}");
            }
        }
    }

    #[test]
    fn image_intersects_examples() {
        let f = TorusLift::translation(0.25, 0.5).unwrap();
        assert!(image_intersects(&ActionWord::IDENTITY, &bump(), Rect::UNIT, 16).unwrap());
        assert!(!image_intersects(&ActionWord::new(10, 0, 0), &bump(), Rect::UNIT, 16).unwrap());
        assert!(!image_intersects(&ActionWord::new(0, 0, 4), &f, Rect::UNIT, 16).unwrap());
        // touching closed boxes count as meeting
        assert!(image_intersects(&ActionWord::new(0, -1, 4), &f, Rect::UNIT, 16).unwrap());
    }

    #[test]
    fn image_padding_vanishes_for_affine_images() {
        let f = TorusLift::translation(0.3, -0.7).unwrap();
        let mut t = ImageTester::new(f, Rect::UNIT, 8).unwrap();
        assert!(t.summary(17).unwrap().padding < 1e-12);
        let mut t = ImageTester::new(bump(), Rect::UNIT, 8).unwrap();
        assert!(t.summary(3).unwrap().padding > 0.0);
    }

    #[test]
    fn image_test_has_no_false_negatives_on_dense_samples() {
        // whenever a densely sampled image point lands in K, the test must say true
        let f = TorusLift::two_wave(0.3, 0.1, 0.05, 0.08).unwrap();
        let mut tester = ImageTester::new(f.clone(), Rect::UNIT, 16).unwrap();
        let dense = box_lattice(&Rect::UNIT, 64);
        for fe in [1i64, 3, 7] {
            for s in -4..=4 {
                for t in -4..=4 {
                    let w = ActionWord::new(s, t, fe);
                    let truly = dense.iter().any(|z| Rect::UNIT.contains(w.evaluate(&f, *z).unwrap()));
                    if truly {
                        assert!(tester.intersects(&w).unwrap(), "{w:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn zaction_translation_converges() {
        let f = TorusLift::translation(0.25, 0.5).unwrap();
        let prob = ZActionProblem::standard(f, 64, Rect::new(-1.0, 1.5, -1.0, 1.5));
        let est = zaction_rotation_set(&prob).unwrap();
        let target = ConvexRegion::point(Vector2::new(0.25, 0.5));
        assert!(hausdorff(&est.estimate.inner, &target) <= 2.0 * 2f64.sqrt() / 32.0);
        // hit condition is |p (1/4, 1/2) - (m, n)|_inf <= 1, solvable by hand
        for h in &est.hits {
            let d = Vector2::new(h.p as f64 * 0.25 - h.m as f64, h.p as f64 * 0.5 - h.n as f64);
            assert!(d.norm_inf() <= 1.0 + 1e-12, "{h:?}");
        }
        let expected = (1..=64i64)
            .map(|p| {
                let c = |x: f64| ((x - 1.0).ceil() as i64..=(x + 1.0).floor() as i64).count();
                c(p as f64 * 0.25) * c(p as f64 * 0.5)
            })
            .sum::<usize>();
        assert_eq!(est.hits.len(), expected);
        assert_eq!(est.boundary_hits, 0);
    }

    #[test]
    fn zaction_pushed_translation() {
        // U = S F^{-1}, V = T, G = F on F = translation(1/2, 1/3): slopes tend to (1, 2/3)
        let f = TorusLift::translation(0.5, 1.0 / 3.0).unwrap();
        let prob = ZActionProblem {
            u: ActionWord::new(1, 0, -1),
            ..ZActionProblem::standard(f, 96, Rect::new(0.0, 2.0, 0.0, 1.5))
        };
        let est = zaction_rotation_set(&prob).unwrap();
        let target = ConvexRegion::point(Vector2::new(1.0, 2.0 / 3.0));
        assert!(hausdorff(&est.estimate.inner, &target) < 0.1);
        assert!(est.estimate.inner_in_outer());
    }

    #[test]
    fn zaction_empty_window() {
        let f = TorusLift::translation(0.25, 0.5).unwrap();
        let empty = ZActionProblem::standard(f.clone(), 16, Rect::new(1.0, 0.0, 0.0, 1.0));
        assert_eq!(zaction_rotation_set(&empty).unwrap_err(), RotationError::EmptyHitSet);
        let far = ZActionProblem::standard(f, 16, Rect::new(5.0, 6.0, 5.0, 6.0));
        assert_eq!(zaction_rotation_set(&far).unwrap_err(), RotationError::EmptyHitSet);
    }

    #[test]
    fn zaction_relabeling_mirrors_hits() {
        let f = TorusLift::two_wave(0.3, 0.1, 0.05, 0.08).unwrap();
        let prob = ZActionProblem {
            k_grid: 16,
            ..ZActionProblem::standard(f, 24, Rect::new(-0.5, 1.0, -0.6, 0.9))
        };
        let swapped = ZActionProblem {
            u: prob.v,
            v: prob.u,
            slope_window: Rect::new(-0.6, 0.9, -0.5, 1.0),
            ..prob.clone()
        };
        let a = zaction_rotation_set(&prob).unwrap();
        let b = zaction_rotation_set(&swapped).unwrap();
        let mut mirrored: Vec<(i64, i64, i64)> = b.hits.iter().map(|h| (h.n, h.m, h.p)).collect();
        let mut orig: Vec<(i64, i64, i64)> = a.hits.iter().map(|h| (h.m, h.n, h.p)).collect();
        mirrored.sort();
        orig.sort();
        assert_eq!(orig, mirrored);
    }

    #[test]
    fn deep_hits_lie_in_outer() {
        let prob = ZActionProblem {
            k_grid: 32,
            ..ZActionProblem::standard(bump(), 48, Rect::new(-0.5, 0.5, -0.5, 1.5))
        };
        let est = zaction_rotation_set(&prob).unwrap();
        let deep = prob.deep_threshold();
        for h in est.hits.iter().filter(|h| h.p >= deep) {
            assert!(est.estimate.outer.contains_point(h.quotient, 1e-12));
        }
    }

    #[test]
    fn equivalence_translation() {
        let f = TorusLift::translation(0.25, 0.5).unwrap();
        let params = EstimatorParams { ladder: doubling_ladder(64), grid_n: 16, p_max: 64, ..Default::default() };
        let rep = remark1_equivalence_check(&f, &params).unwrap();
        assert!(rep.distance <= 0.05, "{}", rep.distance);
        assert!(rep.within_bound);
        let again = remark1_equivalence_check(&f, &params).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn equivalence_segment() {
        let params = EstimatorParams { ladder: doubling_ladder(128), grid_n: 128, p_max: 96, ..Default::default() };
        let rep = remark1_equivalence_check(&bump(), &params).unwrap();
        assert!(rep.distance <= 0.1, "{}", rep.distance);
        assert!(rep.within_bound, "{} > {}", rep.distance, rep.bound);
    }

    #[test]
    fn subadditivity_of_displacement_hulls() {
        for f in [
            TorusLift::translation(0.25, 0.5).unwrap(),
            bump(),
            TorusLift::two_wave(0.3, 0.1, 0.05, 0.08).unwrap(),
        ] {
            for n in [8i64, 16, 32] {
                let h_n = hull(&displacement_samples(&f, n, 32).unwrap()).unwrap();
                let h_2n = hull(&displacement_samples(&f, 2 * n, 32).unwrap()).unwrap();
                let eps = h_n.diameter() / n as f64;
                let big = inflate(&h_n.scale(1.0 / n as f64), eps);
                assert!(big.contains_region(&h_2n.scale(0.5 / n as f64), 1e-12), "{} n={n}", f.family_name());
            }
        }
    }
}
