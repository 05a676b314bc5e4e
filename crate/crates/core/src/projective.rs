//! Exact integer projective algebra over SL(3,Z).
//!
//! Matrices carry `i64` entries and every product is overflow-checked; the
//! real-valued side (homogeneous points, the affine chart and the planar
//! restriction of a matrix) is plain `f64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// A point is at infinity when `|z| < CHART_TOLERANCE * max(|x|, |y|, |z|)`.
pub const CHART_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectiveError {
    #[error("point [{0}:{1}:{2}] lies on the line at infinity")]
    AtInfinity(f64, f64, f64),
    #[error("homogeneous point has all coordinates zero")]
    ZeroPoint,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(i64),
    #[error("matrix parse error: {0}")]
    Parse(String),
    #[error("degenerate line: both linear coefficients are zero")]
    DegenerateLine,
}

/// A planar vector in rotation-vector units (cells per iterate).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector2 {
    pub x: f64,
    pub y: f64,
}

impl Vector2 {
    pub const ZERO: Vector2 = Vector2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vector2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, other: Vector2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist(self, other: Vector2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, s: f64) -> Vector2 {
        Vector2::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vector2 {
    type Output = Vector2;
    fn add(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vector2 {
    type Output = Vector2;
    fn sub(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vector2 {
    type Output = Vector2;
    fn neg(self) -> Vector2 {
        Vector2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vector2 {
    type Output = Vector2;
    fn mul(self, s: f64) -> Vector2 {
        self.scale(s)
    }
}

impl From<(f64, f64)> for Vector2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vector2::new(x, y)
    }
}

/// Integer triple, used both for lattice vectors `(m, n, p)` and word exponents.
pub type IntTriple = [i64; 3];

/// A 3x3 integer matrix, row-major. Elements of SL(3,Z) are built through
/// [`IntMatrix3::unimodular`], which checks the determinant exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntMatrix3 {
    rows: [[i64; 3]; 3],
}

impl IntMatrix3 {
    pub const IDENTITY: IntMatrix3 = IntMatrix3 {
        rows: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    };

    /// Any integer matrix; no determinant check.
    pub const fn new(rows: [[i64; 3]; 3]) -> Self {
        Self { rows }
    }

    /// An element of SL(3,Z).
    pub fn unimodular(rows: [[i64; 3]; 3]) -> Result<Self, ProjectiveError> {
        let m = Self { rows };
        match m.det()? {
            1 => Ok(m),
            d => Err(ProjectiveError::NotUnimodular(d)),
        }
    }

    pub fn rows(&self) -> &[[i64; 3]; 3] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> IntTriple {
        self.rows[i]
    }

    pub fn column(&self, j: usize) -> IntTriple {
        [self.rows[0][j], self.rows[1][j], self.rows[2][j]]
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::new([
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ])
    }

    /// Exact determinant.
    pub fn det(&self) -> Result<i64, ProjectiveError> {
        let adj = self.adjugate()?;
        // det = row 0 of M dotted with column 0 of adj(M)
        dot3(self.rows[0], adj.column(0), "determinant")
    }

    /// Transpose of the cofactor matrix, so that `M * adj(M) = det(M) * I`.
    pub fn adjugate(&self) -> Result<Self, ProjectiveError> {
        let r = &self.rows;
        let mut out = [[0i64; 3]; 3];
        for (i, out_row) in out.iter_mut().enumerate() {
            for (j, cell) in out_row.iter_mut().enumerate() {
                // cofactor C_{ji} goes to adj[i][j]
                let (r0, r1) = others(j);
                let (c0, c1) = others(i);
                let minor = checked_mul(r[r0][c0], r[r1][c1], "adjugate")?
                    .checked_sub(checked_mul(r[r0][c1], r[r1][c0], "adjugate")?)
                    .ok_or(ProjectiveError::Overflow("adjugate"))?;
                *cell = if (i + j) % 2 == 0 { minor } else { -minor };
            }
        }
        Ok(Self::new(out))
    }

    /// Exact inverse through the adjugate; only defined on SL(3,Z).
    pub fn inverse(&self) -> Result<Self, ProjectiveError> {
        match self.det()? {
            1 => self.adjugate(),
            d => Err(ProjectiveError::NotUnimodular(d)),
        }
    }

    pub fn checked_mul(&self, other: &IntMatrix3) -> Result<Self, ProjectiveError> {
        let mut out = [[0i64; 3]; 3];
        for (i, out_row) in out.iter_mut().enumerate() {
            for (j, cell) in out_row.iter_mut().enumerate() {
                *cell = dot3(self.rows[i], other.column(j), "matrix product")?;
            }
        }
        Ok(Self::new(out))
    }

    /// Exact matrix-vector product on integer triples.
    pub fn apply(&self, t: IntTriple) -> Result<IntTriple, ProjectiveError> {
        Ok([
            dot3(self.rows[0], t, "matrix_apply")?,
            dot3(self.rows[1], t, "matrix_apply")?,
            dot3(self.rows[2], t, "matrix_apply")?,
        ])
    }

    /// Real product on a homogeneous point.
    pub fn apply_point(&self, p: ProjPoint) -> ProjPoint {
        let c = p.coords();
        let r = &self.rows;
        let row = |i: usize| r[i][0] as f64 * c[0] + r[i][1] as f64 * c[1] + r[i][2] as f64 * c[2];
        ProjPoint { coords: [row(0), row(1), row(2)] }
    }

    /// Affine matrices keep the line at infinity in place: third row `(0, 0, 1)`.
    pub fn is_affine(&self) -> bool {
        self.rows[2] == [0, 0, 1]
    }

    pub fn max_abs_entry(&self) -> i64 {
        self.rows.iter().flatten().map(|e| e.abs()).max().unwrap_or(0)
    }

    /// Elementary transvection `I + sign * E_{ij}` (`i != j`).
    pub fn elementary(i: usize, j: usize, sign: i64) -> Self {
        assert!(i != j && i < 3 && j < 3);
        let mut m = Self::IDENTITY;
        m.rows[i][j] = sign;
        m
    }

    /// Random element of SL(3,Z) drawn as a product of `steps` elementary
    /// transvections, rejecting any factor that would push an entry past
    /// `max_entry` in absolute value.
    pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R, steps: usize, max_entry: i64) -> Self {
        let mut m = Self::IDENTITY;
        let mut done = 0;
        let mut attempts = 0;
        while done < steps && attempts < steps * 50 {
            attempts += 1;
            let i = rng.gen_range(0..3);
            let j = (i + rng.gen_range(1..3)) % 3;
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            let candidate = Self::elementary(i, j, sign)
                .checked_mul(&m)
                .expect("bounded entries cannot overflow");
            if candidate.max_abs_entry() <= max_entry {
                m = candidate;
                done += 1;
            }
        }
        m
    }
}

impl fmt::Display for IntMatrix3 {
    /// Nine whitespace-separated integers, row-major.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: Vec<String> = self.rows.iter().flatten().map(|e| e.to_string()).collect();
        f.write_str(&flat.join(" "))
    }
}

impl FromStr for IntMatrix3 {
    type Err = ProjectiveError;

    /// Parses nine whitespace-separated integers, row-major. The determinant
    /// is not checked here; see [`IntMatrix3::unimodular`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let vals = s
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|e| ProjectiveError::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != 9 {
            return Err(ProjectiveError::Parse(format!("expected 9 integers, found {}", vals.len())));
        }
        Ok(Self::new([
            [vals[0], vals[1], vals[2]],
            [vals[3], vals[4], vals[5]],
            [vals[6], vals[7], vals[8]],
        ]))
    }
}

fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn checked_mul(a: i64, b: i64, what: &'static str) -> Result<i64, ProjectiveError> {
    a.checked_mul(b).ok_or(ProjectiveError::Overflow(what))
}

fn dot3(a: IntTriple, b: IntTriple, what: &'static str) -> Result<i64, ProjectiveError> {
    let mut acc = 0i64;
    for k in 0..3 {
        acc = acc
            .checked_add(checked_mul(a[k], b[k], what)?)
            .ok_or(ProjectiveError::Overflow(what))?;
    }
    Ok(acc)
}

/// A point of the real projective plane in homogeneous coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ProjPoint {
    coords: [f64; 3],
}

impl ProjPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, ProjectiveError> {
        if x == 0.0 && y == 0.0 && z == 0.0 {
            return Err(ProjectiveError::ZeroPoint);
        }
        Ok(Self { coords: [x, y, z] })
    }

    /// `[v.x : v.y : 1]`
    pub fn embed(v: Vector2) -> Self {
        Self { coords: [v.x, v.y, 1.0] }
    }

    pub fn coords(&self) -> [f64; 3] {
        self.coords
    }

    pub fn is_at_infinity(&self) -> bool {
        let [x, y, z] = self.coords;
        let scale = x.abs().max(y.abs()).max(z.abs());
        z.abs() < CHART_TOLERANCE * scale
    }

    /// The affine chart `[x:y:z] -> (x/z, y/z)`.
    pub fn chart(&self) -> Result<Vector2, ProjectiveError> {
        let [x, y, z] = self.coords;
        if self.is_at_infinity() {
            return Err(ProjectiveError::AtInfinity(x, y, z));
        }
        Ok(Vector2::new(x / z, y / z))
    }
}

impl PartialEq for ProjPoint {
    /// Equality up to nonzero scaling: all 2x2 minors vanish (relative to scale).
    fn eq(&self, other: &Self) -> bool {
        let a = self.coords;
        let b = other.coords;
        let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale * scale;
        (a[0] * b[1] - a[1] * b[0]).abs() <= tol
            && (a[0] * b[2] - a[2] * b[0]).abs() <= tol
            && (a[1] * b[2] - a[2] * b[1]).abs() <= tol
    }
}

pub fn chart(p: ProjPoint) -> Result<Vector2, ProjectiveError> {
    p.chart()
}

/// The planar restriction of `l`: `chart(L [v.x : v.y : 1])`.
pub fn apply_hat(l: &IntMatrix3, v: Vector2) -> Result<Vector2, ProjectiveError> {
    l.apply_point(ProjPoint::embed(v)).chart()
}

/// The line `{(x, y) : u x + v y + w = 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarLine {
    u: f64,
    v: f64,
    w: f64,
}

impl PlanarLine {
    pub fn new(u: f64, v: f64, w: f64) -> Result<Self, ProjectiveError> {
        if u == 0.0 && v == 0.0 {
            return Err(ProjectiveError::DegenerateLine);
        }
        Ok(Self { u, v, w })
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    /// Signed Euclidean distance, positive on the side the normal `(u, v)` points to.
    pub fn signed_distance(&self, p: Vector2) -> f64 {
        (self.u * p.x + self.v * p.y + self.w) / self.u.hypot(self.v)
    }

    pub fn normal(&self) -> Vector2 {
        let n = self.u.hypot(self.v);
        Vector2::new(self.u / n, self.v / n)
    }

    /// Unit direction along the line.
    pub fn direction(&self) -> Vector2 {
        let n = self.normal();
        Vector2::new(-n.y, n.x)
    }

    /// Foot of the perpendicular from the origin.
    pub fn base_point(&self) -> Vector2 {
        let n2 = self.u * self.u + self.v * self.v;
        Vector2::new(-self.w * self.u / n2, -self.w * self.v / n2)
    }
}

/// Where the preimage of the line at infinity meets the affine plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfinityPullback {
    Line(PlanarLine),
    /// The preimage is the line at infinity itself (affine matrices).
    EmptyInPlane,
}

impl InfinityPullback {
    pub fn line(&self) -> Option<&PlanarLine> {
        match self {
            InfinityPullback::Line(l) => Some(l),
            InfinityPullback::EmptyInPlane => None,
        }
    }
}

/// Planar points sent into the line at infinity by `l`: zero set of the third row.
pub fn pullback_infinity_line(l: &IntMatrix3) -> InfinityPullback {
    let [u, v, w] = l.row(2);
    if u == 0 && v == 0 {
        InfinityPullback::EmptyInPlane
    } else {
        InfinityPullback::Line(PlanarLine { u: u as f64, v: v as f64, w: w as f64 })
    }
}

pub fn matrix_apply(l: &IntMatrix3, t: IntTriple) -> Result<IntTriple, ProjectiveError> {
    l.apply(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn worked() -> IntMatrix3 {
        IntMatrix3::unimodular([[1, 0, 0], [0, 1, 0], [-1, 0, 1]]).unwrap()
    }

    #[test]
    fn chart_examples() {
        assert_eq!(ProjPoint::new(2.0, 3.0, 1.0).unwrap().chart().unwrap(), Vector2::new(2.0, 3.0));
        assert_eq!(ProjPoint::new(1.0, 2.0, 2.0).unwrap().chart().unwrap(), Vector2::new(0.5, 1.0));
        assert!(matches!(
            ProjPoint::new(1.0, 0.0, 0.0).unwrap().chart(),
            Err(ProjectiveError::AtInfinity(..))
        ));
        assert_eq!(ProjPoint::new(0.0, 0.0, 0.0).unwrap_err(), ProjectiveError::ZeroPoint);
    }

    #[test]
    fn chart_tolerance_is_relative() {
        assert!(ProjPoint::new(1e6, 0.0, 1e-4).unwrap().is_at_infinity());
        assert!(!ProjPoint::new(1e-6, 0.0, 1e-8).unwrap().is_at_infinity());
    }

    #[test]
    fn projective_equality_is_up_to_scale() {
        let a = ProjPoint::new(1.0, 2.0, 3.0).unwrap();
        assert_eq!(a, ProjPoint::new(-2.0, -4.0, -6.0).unwrap());
        assert_ne!(a, ProjPoint::new(1.0, 2.0, 4.0).unwrap());
    }

    #[test]
    fn apply_hat_examples() {
        let v = Vector2::new(0.7, -0.2);
        assert_eq!(apply_hat(&IntMatrix3::IDENTITY, v).unwrap(), v);

        let w = apply_hat(&worked(), Vector2::new(0.5, 1.0 / 3.0)).unwrap();
        assert!((w.x - 1.0).abs() < 1e-15 && (w.y - 2.0 / 3.0).abs() < 1e-15);

        let shear = IntMatrix3::unimodular([[1, 1, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        let s = apply_hat(&shear, Vector2::new(0.2, 0.3)).unwrap();
        assert!((s.x - 0.5).abs() < 1e-15 && (s.y - 0.3).abs() < 1e-15);

        assert!(apply_hat(&worked(), Vector2::new(1.0, 5.0)).is_err());
    }

    #[test]
    fn pullback_examples() {
        assert_eq!(pullback_infinity_line(&IntMatrix3::IDENTITY), InfinityPullback::EmptyInPlane);

        let line = *pullback_infinity_line(&worked()).line().unwrap();
        assert_eq!(line.coefficients(), [-1.0, 0.0, 1.0]);
        assert_eq!(line.signed_distance(Vector2::new(1.0, 7.0)), 0.0);

        let cyc = IntMatrix3::unimodular([[0, 0, 1], [1, 0, 0], [0, 1, 0]]).unwrap();
        let line = *pullback_infinity_line(&cyc).line().unwrap();
        assert_eq!(line.coefficients(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn pullback_agrees_with_transported_infinity_points() {
        // L^{-1} [x:y:0] for two points of the line at infinity must chart onto the line
        let l = worked();
        let inv = l.inverse().unwrap();
        let line = *pullback_infinity_line(&l).line().unwrap();
        for (x, y) in [(1.0, 0.0), (1.0, 1.0), (1.0, -3.0)] {
            let p = inv.apply_point(ProjPoint::new(x, y, 0.0).unwrap()).chart().unwrap();
            assert!(line.signed_distance(p).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_apply_examples() {
        assert_eq!(matrix_apply(&IntMatrix3::IDENTITY, [5, -2, 7]).unwrap(), [5, -2, 7]);
        assert_eq!(matrix_apply(&worked(), [1, 2, 3]).unwrap(), [1, 2, 2]);
        let inv = worked().inverse().unwrap();
        let t = [4, -9, 13];
        assert_eq!(inv.apply(worked().apply(t).unwrap()).unwrap(), t);
    }

    #[test]
    fn overflow_is_reported() {
        let big = IntMatrix3::new([[i64::MAX, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(big.apply([2, 0, 0]), Err(ProjectiveError::Overflow("matrix_apply")));
        assert!(big.checked_mul(&big).is_err());
    }

    #[test]
    fn non_unimodular_rejected() {
        assert_eq!(
            IntMatrix3::unimodular([[2, 0, 0], [0, 1, 0], [0, 0, 1]]),
            Err(ProjectiveError::NotUnimodular(2))
        );
        assert_eq!(
            IntMatrix3::new([[0, 1, 0], [1, 0, 0], [0, 0, 1]]).inverse(),
            Err(ProjectiveError::NotUnimodular(-1))
        );
    }

    #[test]
    fn parse_and_display() {
        let m: IntMatrix3 = "1 0 0\n0 1 0\n-1 0 1".parse().unwrap();
        assert_eq!(m, worked());
        assert_eq!(m.to_string(), "1 0 0 0 1 0 -1 0 1");
        assert!("1 2 3".parse::<IntMatrix3>().is_err());
        assert!("1 0 0 0 1 0 0 0 x".parse::<IntMatrix3>().is_err());
    }

    #[test]
    fn pullback_line_maps_to_infinity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = IntMatrix3::random_unimodular(&mut rng, 12, 5);
            let Some(line) = pullback_infinity_line(&l).line().copied() else { continue };
            let r = l.row(2);
            let scale = (r[0].abs() + r[1].abs() + r[2].abs()) as f64;
            for k in 0..100 {
                let t = (k as f64 - 50.0) * 0.37;
                let v = line.base_point() + line.direction() * t;
                let z = l.apply_point(ProjPoint::embed(v)).coords()[2];
                assert!(z.abs() <= 1e-12 * scale * (1.0 + v.norm_inf()), "z = {z}");
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_is_exact(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = IntMatrix3::random_unimodular(&mut rng, 20, 5);
            prop_assert_eq!(l.det().unwrap(), 1);
            let inv = l.inverse().unwrap();
            prop_assert_eq!(l.checked_mul(&inv).unwrap(), IntMatrix3::IDENTITY);
            prop_assert_eq!(inv.checked_mul(&l).unwrap(), IntMatrix3::IDENTITY);
        }

        #[test]
        fn chart_of_embed_is_identity(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let v = Vector2::new(x, y);
            prop_assert_eq!(ProjPoint::embed(v).chart().unwrap(), v);
        }

        #[test]
        fn apply_hat_composes(seed in any::<u64>(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l1 = IntMatrix3::random_unimodular(&mut rng, 6, 4);
            let l2 = IntMatrix3::random_unimodular(&mut rng, 6, 4);
            let v = Vector2::new(x, y);
            let prod = l2.checked_mul(&l1).unwrap();
            let h1 = l1.apply_point(ProjPoint::embed(v));
            // stay well away from the singular lines so the comparison is meaningful
            prop_assume!(h1.coords()[2].abs() > 1e-2 * h1.coords().iter().fold(0.0f64, |m, c| m.max(c.abs())));
            let step = h1.chart().unwrap();
            let h2 = l2.apply_point(ProjPoint::embed(step));
            prop_assume!(h2.coords()[2].abs() > 1e-2 * h2.coords().iter().fold(0.0f64, |m, c| m.max(c.abs())));
            let twice = h2.chart().unwrap();
            let once = apply_hat(&prod, v).unwrap();
            let scale = twice.norm_inf().max(1.0);
            prop_assert!((twice - once).norm_inf() <= 1e-12 * scale,
                "twice {:?} once {:?}", twice, once);
        }
    }
}
