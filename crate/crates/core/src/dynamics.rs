//! Torus lifts and the commuting group generated by `S`, `T` and `F`.
//!
//! `S` and `T` are the unit translations; `F` is a lift whose displacement
//! `F(z) - z` is Z^2-periodic. Since the three maps commute, every composite
//! is an [`ActionWord`] `S^s T^t F^f`, evaluated as `F^f(z) + (s, t)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use thiserror::Error;

use crate::par;
use crate::projective::{IntTriple, Vector2};

/// Stopping tolerance of the fixed-point solve for `F^{-1}`.
pub const INVERSE_TOLERANCE: f64 = 1e-12;
/// Iteration cap of the fixed-point solve for `F^{-1}`.
pub const INVERSE_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("inverse iteration did not converge at ({x}, {y}) after {iterations} steps")]
    InverseNotConverged { x: f64, y: f64, iterations: usize },
    #[error("invalid map parameters: {0}")]
    InvalidParameters(String),
    #[error("integer overflow in word arithmetic")]
    Overflow,
    #[error("grid resolution must be at least 2, got {0}")]
    GridTooCoarse(usize),
}

/// Which coordinate the shear displacement `psi` depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShearAxis {
    /// `F(x, y) = (x + omega, y + psi(x))`: vertical lines are sheared.
    Vertical,
    /// `F(x, y) = (x + psi(y), y + omega)`.
    Horizontal,
}

/// Built-in families of lifts of torus homeomorphisms isotopic to the identity.
#[derive(Debug, Clone, PartialEq)]
pub enum TorusLift {
    /// `F(z) = z + (alpha, beta)`.
    Translation { alpha: f64, beta: f64 },
    /// Shear along `axis` with drift `omega` and profile
    /// `psi(t) = sum_k cosines[k] * cos(2 pi k t)`.
    SkewShear { axis: ShearAxis, omega: f64, cosines: Vec<f64> },
    /// `F(x, y) = (x + p1 + q1 sin 2 pi y, y + p2 + q2 sin 2 pi x)`.
    TwoWave { p1: f64, p2: f64, q1: f64, q2: f64 },
}

impl TorusLift {
    pub fn translation(alpha: f64, beta: f64) -> Result<Self, DynamicsError> {
        check_finite(&[alpha, beta])?;
        Ok(TorusLift::Translation { alpha, beta })
    }

    pub fn skew_shear(axis: ShearAxis, omega: f64, cosines: Vec<f64>) -> Result<Self, DynamicsError> {
        check_finite(&[omega])?;
        check_finite(&cosines)?;
        Ok(TorusLift::SkewShear { axis, omega, cosines })
    }

    /// The wave amplitudes must satisfy `2 pi max(|q1|, |q2|) < 1`, which makes
    /// the displacement a sup-norm contraction: `F` is then a homeomorphism and
    /// the fixed-point inverse converges.
    pub fn two_wave(p1: f64, p2: f64, q1: f64, q2: f64) -> Result<Self, DynamicsError> {
        check_finite(&[p1, p2, q1, q2])?;
        let lip = TAU * q1.abs().max(q2.abs());
        if lip >= 1.0 {
            return Err(DynamicsError::InvalidParameters(format!(
                "two_wave needs 2*pi*max(|q1|,|q2|) < 1, got {lip}"
            )));
        }
        Ok(TorusLift::TwoWave { p1, p2, q1, q2 })
    }

    /// The Z^2-periodic displacement `delta(z) = F(z) - z`.
    pub fn displacement(&self, z: Vector2) -> Vector2 {
        match self {
            TorusLift::Translation { alpha, beta } => Vector2::new(*alpha, *beta),
            TorusLift::SkewShear { axis, omega, cosines } => match axis {
                ShearAxis::Vertical => Vector2::new(*omega, cosine_series(cosines, z.x)),
                ShearAxis::Horizontal => Vector2::new(cosine_series(cosines, z.y), *omega),
            },
            TorusLift::TwoWave { p1, p2, q1, q2 } => Vector2::new(
                p1 + q1 * (TAU * z.y.rem_euclid(1.0)).sin(),
                p2 + q2 * (TAU * z.x.rem_euclid(1.0)).sin(),
            ),
        }
    }

    pub fn evaluate(&self, z: Vector2) -> Vector2 {
        z + self.displacement(z)
    }

    /// `F^{-1}(z)`: solves `w + delta(w) = z` starting from `z - delta(z)`.
    ///
    /// Shears converge under the fixed-point iteration `w <- z - delta(w)` in
    /// two steps. Two-wave maps take Newton steps with the analytic Jacobian,
    /// falling back to a fixed-point step whenever Newton fails to reduce the
    /// residual (the fixed-point step contracts it by `2 pi max|q| < 1`).
    pub fn evaluate_inverse(&self, z: Vector2) -> Result<Vector2, DynamicsError> {
        if let TorusLift::Translation { alpha, beta } = self {
            return Ok(Vector2::new(z.x - alpha, z.y - beta));
        }
        let tol = INVERSE_TOLERANCE * z.norm_inf().max(1.0);
        let residual = |w: Vector2| w + self.displacement(w) - z;
        let mut w = z - self.displacement(z);
        for _ in 0..INVERSE_MAX_ITERATIONS {
            let fixed_point = z - self.displacement(w);
            let next = match self {
                TorusLift::TwoWave { q1, q2, .. } => {
                    let r = residual(w);
                    let a = TAU * q1 * (TAU * w.y.rem_euclid(1.0)).cos();
                    let b = TAU * q2 * (TAU * w.x.rem_euclid(1.0)).cos();
                    let det = 1.0 - a * b;
                    let newton = w - Vector2::new((r.x - a * r.y) / det, (r.y - b * r.x) / det);
                    if residual(newton).norm_inf() <= residual(fixed_point).norm_inf() {
                        newton
                    } else {
                        fixed_point
                    }
                }
                _ => fixed_point,
            };
            let step = (next - w).norm_inf();
            w = next;
            if step <= tol {
                return Ok(w);
            }
        }
        Err(DynamicsError::InverseNotConverged { x: z.x, y: z.y, iterations: INVERSE_MAX_ITERATIONS })
    }

    /// `F^k(z)` for any integer `k`.
    pub fn iterate(&self, z: Vector2, k: i64) -> Result<Vector2, DynamicsError> {
        let mut w = z;
        if k >= 0 {
            for _ in 0..k {
                w = self.evaluate(w);
            }
        } else {
            for _ in 0..k.unsigned_abs() {
                w = self.evaluate_inverse(w)?;
            }
        }
        Ok(w)
    }

    /// Upper bound on `|delta|` in the sup norm, from the parameters.
    pub fn displacement_bound(&self) -> f64 {
        match self {
            TorusLift::Translation { alpha, beta } => alpha.abs().max(beta.abs()),
            TorusLift::SkewShear { omega, cosines, .. } => {
                omega.abs().max(cosines.iter().map(|c| c.abs()).sum())
            }
            TorusLift::TwoWave { p1, p2, q1, q2 } => (p1.abs() + q1.abs()).max(p2.abs() + q2.abs()),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            TorusLift::Translation { .. } => "translation",
            TorusLift::SkewShear { .. } => "skew_shear",
            TorusLift::TwoWave { .. } => "two_wave",
        }
    }
}

fn cosine_series(coeffs: &[f64], t: f64) -> f64 {
    let t = t.rem_euclid(1.0);
    coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| if k == 0 { *a } else { a * (TAU * k as f64 * t).cos() })
        .sum()
}

fn check_finite(vals: &[f64]) -> Result<(), DynamicsError> {
    match vals.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(DynamicsError::InvalidParameters(format!("non-finite parameter {v}"))),
        None => Ok(()),
    }
}

/// The composite `S^s T^t F^f` in canonical (commutative) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ActionWord {
    pub s: i64,
    pub t: i64,
    pub f: i64,
}

impl ActionWord {
    pub const IDENTITY: ActionWord = ActionWord { s: 0, t: 0, f: 0 };
    pub const S: ActionWord = ActionWord { s: 1, t: 0, f: 0 };
    pub const T: ActionWord = ActionWord { s: 0, t: 1, f: 0 };
    pub const F: ActionWord = ActionWord { s: 0, t: 0, f: 1 };

    pub const fn new(s: i64, t: i64, f: i64) -> Self {
        Self { s, t, f }
    }

    pub fn exponents(&self) -> IntTriple {
        [self.s, self.t, self.f]
    }

    pub fn from_exponents(e: IntTriple) -> Self {
        Self::new(e[0], e[1], e[2])
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ActionWord) -> Result<Self, DynamicsError> {
        Ok(Self::new(
            self.s.checked_add(other.s).ok_or(DynamicsError::Overflow)?,
            self.t.checked_add(other.t).ok_or(DynamicsError::Overflow)?,
            self.f.checked_add(other.f).ok_or(DynamicsError::Overflow)?,
        ))
    }

    pub fn inverse(&self) -> Result<Self, DynamicsError> {
        self.pow(-1)
    }

    pub fn pow(&self, k: i64) -> Result<Self, DynamicsError> {
        let mul = |a: i64| a.checked_mul(k).ok_or(DynamicsError::Overflow);
        Ok(Self::new(mul(self.s)?, mul(self.t)?, mul(self.f)?))
    }

    /// `F^f(z) + (s, t)`.
    pub fn evaluate(&self, lift: &TorusLift, z: Vector2) -> Result<Vector2, DynamicsError> {
        Ok(lift.iterate(z, self.f)? + self.shift())
    }

    /// The pure-translation part `(s, t)`.
    pub fn shift(&self) -> Vector2 {
        Vector2::new(self.s as f64, self.t as f64)
    }
}

/// Product of powers `w_1^{e_1} w_2^{e_2} ...` in canonical form.
pub fn word_product(factors: &[(ActionWord, i64)]) -> Result<ActionWord, DynamicsError> {
    factors
        .iter()
        .try_fold(ActionWord::IDENTITY, |acc, (w, e)| acc.compose(&w.pow(*e)?))
}

pub fn word_compose(a: &ActionWord, b: &ActionWord) -> Result<ActionWord, DynamicsError> {
    a.compose(b)
}

/// Cell centers `((i + 1/2)/n, (j + 1/2)/n)` of the uniform `n x n` grid on
/// `[0,1)^2`, row-major in `j`.
pub fn unit_grid(n: usize) -> Vec<Vector2> {
    let h = 1.0 / n as f64;
    (0..n)
        .flat_map(|j| (0..n).map(move |i| Vector2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)))
        .collect()
}

/// Whether tables for intermediate iterates are kept after they are passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    All,
    FrontierOnly,
}

#[derive(Debug, Clone)]
struct Frontier {
    k: i64,
    disp: Vec<Vector2>,
    /// Running sum and its compensation term (forward direction only).
    sum: Vec<Vector2>,
    comp: Vec<Vector2>,
}

impl Frontier {
    fn start(n: usize) -> Self {
        let zeros = vec![Vector2::ZERO; n];
        Self { k: 0, disp: zeros.clone(), sum: zeros.clone(), comp: zeros }
    }
}

/// Neumaier step: adds `x` to the running sum `s` with compensation `c`.
fn compensated_add(s: &mut f64, c: &mut f64, x: f64) {
    let t = *s + x;
    *c += if s.abs() >= x.abs() { (*s - t) + x } else { (x - t) + *s };
    *s = t;
}

/// Displacement tables `Delta_k(z) = F^k(z) - z` over a fixed seed list.
///
/// Tables are extended one iterate at a time through the cocycle relation
/// `Delta_{k+1}(z) = Delta_k(z) + delta(z + Delta_k(z))` (and the inverse
/// map for negative `k`), in parallel over seeds. Forward sums are
/// compensated, so a constant displacement accumulates to `k * delta`
/// correctly rounded.
#[derive(Debug, Clone)]
pub struct OrbitCache {
    lift: TorusLift,
    seeds: Vec<Vector2>,
    retention: Retention,
    forward: Frontier,
    backward: Frontier,
    stored: BTreeMap<i64, Vec<Vector2>>,
}

impl OrbitCache {
    pub fn new(lift: TorusLift, seeds: Vec<Vector2>, retention: Retention) -> Self {
        let n = seeds.len();
        Self {
            lift,
            seeds,
            retention,
            forward: Frontier::start(n),
            backward: Frontier::start(n),
            stored: BTreeMap::new(),
        }
    }

    /// Cache over the cell-center grid of the unit square.
    pub fn unit_grid(lift: TorusLift, grid_n: usize, retention: Retention) -> Result<Self, DynamicsError> {
        if grid_n < 2 {
            return Err(DynamicsError::GridTooCoarse(grid_n));
        }
        Ok(Self::new(lift, unit_grid(grid_n), retention))
    }

    pub fn lift(&self) -> &TorusLift {
        &self.lift
    }

    pub fn seeds(&self) -> &[Vector2] {
        &self.seeds
    }

    /// Iterates already reachable without recomputation.
    pub fn computed_range(&self) -> (i64, i64) {
        (self.backward.k, self.forward.k)
    }

    /// `Delta_k` over all seeds, extending the tables as needed.
    pub fn displacements(&mut self, k: i64) -> Result<&[Vector2], DynamicsError> {
        if self.stored.contains_key(&k) {
            return Ok(&self.stored[&k]);
        }
        if k >= 0 {
            if k < self.forward.k {
                self.forward = Frontier::start(self.seeds.len());
            }
            while self.forward.k < k {
                self.step_forward();
            }
            Ok(&self.forward.disp)
        } else {
            if k > self.backward.k {
                self.backward = Frontier::start(self.seeds.len());
            }
            while self.backward.k > k {
                self.step_backward()?;
            }
            Ok(&self.backward.disp)
        }
    }

    /// `F^k` applied to every seed.
    pub fn images(&mut self, k: i64) -> Result<Vec<Vector2>, DynamicsError> {
        let disp = self.displacements(k)?.to_vec();
        Ok(self.seeds.iter().zip(disp).map(|(z, d)| *z + d).collect())
    }

    /// `word` applied to every seed: `F^f(z) + (s, t)`.
    pub fn word_images(&mut self, word: &ActionWord) -> Result<Vec<Vector2>, DynamicsError> {
        let shift = word.shift();
        Ok(self.images(word.f)?.into_iter().map(|p| p + shift).collect())
    }

    fn step_forward(&mut self) {
        let lift = &self.lift;
        let f = &mut self.forward;
        let mut state: Vec<(Vector2, Vector2, Vector2, Vector2)> = self
            .seeds
            .iter()
            .zip(&f.disp)
            .zip(f.sum.iter().zip(&f.comp))
            .map(|((z, d), (s, c))| (*z, *d, *s, *c))
            .collect();
        par::for_each_mut(&mut state, |(z, d, s, c)| {
            let step = lift.displacement(*z + *d);
            compensated_add(&mut s.x, &mut c.x, step.x);
            compensated_add(&mut s.y, &mut c.y, step.y);
            *d = *s + *c;
        });
        for (i, (_, d, s, c)) in state.into_iter().enumerate() {
            f.disp[i] = d;
            f.sum[i] = s;
            f.comp[i] = c;
        }
        f.k += 1;
        if self.retention == Retention::All {
            self.stored.insert(f.k, f.disp.clone());
        }
    }

    fn step_backward(&mut self) -> Result<(), DynamicsError> {
        let lift = &self.lift;
        let pairs: Vec<(Vector2, Vector2)> =
            self.seeds.iter().copied().zip(self.backward.disp.iter().copied()).collect();
        let next = par::try_map_slice(&pairs, |(z, d)| Ok(lift.evaluate_inverse(*z + *d)? - *z))?;
        self.backward.k -= 1;
        self.backward.disp = next;
        if self.retention == Retention::All {
            self.stored.insert(self.backward.k, self.backward.disp.clone());
        }
        Ok(())
    }
}

/// `{F^k(z) - z}` over the cell-center `grid_n x grid_n` grid of `[0,1)^2`.
/// Periodicity of the displacement makes one fundamental domain enough.
pub fn displacement_samples(lift: &TorusLift, k: i64, grid_n: usize) -> Result<Vec<Vector2>, DynamicsError> {
    let mut cache = OrbitCache::unit_grid(lift.clone(), grid_n, Retention::FrontierOnly)?;
    Ok(cache.displacements(k)?.to_vec())
}
