//! Line-oriented report format.
//!
//! Each line is `key.path = value`; lines starting with `#` are comments.
//! Values are decimal numerals (shortest representation that parses back to
//! the same `f64`, with `inf`/`-inf`), `true`/`false`, bare words, or
//! space-separated lists of numerals. Polygons are flat `x y x y ...` lists in
//! counter-clockwise order. Keys appear in insertion order and are unique.
//!
//! Schema (keys present depend on `kind`):
//!
//! | key | value |
//! |-----|-------|
//! | `kind` | `estimate` or `pushforward` |
//! | `status` | `ok`, `hypothesis_failed`, `certificate_failed`, `empirical_violation`, `theorem_failed` |
//! | `map.family`, `map.<param>` | lift family and its parameters |
//! | `classical.ladder`, `classical.grid_n` | iterate ladder and grid |
//! | `classical.inner`, `classical.outer` | polygons |
//! | `classical.hausdorff_trace`, `classical.margin` | successive-rung distances, heuristic margin |
//! | `matrix.l`, `matrix.l_inv` | nine integers, row-major |
//! | `words.u`, `words.v`, `words.g` | exponent triples `s t f` |
//! | `hypothesis.line` | `u v w` of `u x + v y + w = 0`, or `none` |
//! | `hypothesis.clearance`, `hypothesis.holds` | distance to the line, gate outcome |
//! | `certificate.*` | constants of the proper-discontinuity certificate |
//! | `empirical.*` | sampled `(m, n)` check beyond `certificate.mn_bound` |
//! | `image.inner`, `image.outer` | projective image of the classical polygons |
//! | `zaction.*` | window, parameters, hit counts, polygons, margin |
//! | `theorem.distance`, `theorem.bar`, `theorem.pass` | comparison of `image.inner` and `zaction.inner` |

use std::fmt::Write as _;
use std::str::FromStr;

use rotset::{ConvexRegion, Rect, Vector2};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("report line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("report line {0}: duplicate key `{1}`")]
    Duplicate(usize, String),
    #[error("report has no key `{0}`")]
    Missing(String),
    #[error("report key `{0}`: cannot parse `{1}`")]
    Value(String, String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        x.to_string()
    }
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set_raw(&mut self, key: &str, value: String) {
        debug_assert!(!value.contains('\n'));
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn set_str(&mut self, key: &str, v: &str) {
        self.set_raw(key, v.to_string());
    }

    pub fn set_f64(&mut self, key: &str, v: f64) {
        self.set_raw(key, num(v));
    }

    pub fn set_i64(&mut self, key: &str, v: i64) {
        self.set_raw(key, v.to_string());
    }

    pub fn set_bool(&mut self, key: &str, v: bool) {
        self.set_raw(key, v.to_string());
    }

    pub fn set_f64s(&mut self, key: &str, v: &[f64]) {
        self.set_raw(key, v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "));
    }

    pub fn set_i64s(&mut self, key: &str, v: &[i64]) {
        self.set_raw(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    }

    pub fn set_polygon(&mut self, key: &str, r: &ConvexRegion) {
        let flat: Vec<f64> = r.vertices().iter().flat_map(|p| [p.x, p.y]).collect();
        self.set_f64s(key, &flat);
    }

    pub fn set_rect(&mut self, key: &str, r: &Rect) {
        self.set_f64s(key, &[r.x0, r.x1, r.y0, r.y1]);
    }

    pub fn get_str(&self, key: &str) -> Result<&str, ReportError> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| ReportError::Missing(key.to_string()))
    }

    fn get_parsed<T: FromStr>(&self, key: &str) -> Result<T, ReportError> {
        let v = self.get_str(key)?;
        v.parse().map_err(|_| ReportError::Value(key.to_string(), v.to_string()))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, ReportError> {
        self.get_parsed(key)
    }

    pub fn get_i64(&self, key: &str) -> Result<i64, ReportError> {
        self.get_parsed(key)
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, ReportError> {
        self.get_parsed(key)
    }

    fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ReportError> {
        let v = self.get_str(key)?;
        v.split_whitespace()
            .map(|t| t.parse().map_err(|_| ReportError::Value(key.to_string(), t.to_string())))
            .collect()
    }

    pub fn get_f64s(&self, key: &str) -> Result<Vec<f64>, ReportError> {
        self.get_list(key)
    }

    pub fn get_i64s(&self, key: &str) -> Result<Vec<i64>, ReportError> {
        self.get_list(key)
    }

    /// Vertices of a stored polygon (not re-hulled).
    pub fn get_points(&self, key: &str) -> Result<Vec<Vector2>, ReportError> {
        let flat = self.get_f64s(key)?;
        if flat.is_empty() || flat.len() % 2 != 0 {
            return Err(ReportError::Value(key.to_string(), format!("{} numbers", flat.len())));
        }
        Ok(flat.chunks(2).map(|c| Vector2::new(c[0], c[1])).collect())
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut out = String::from("# rotset report v1\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        f.write_str(&out)
    }
}

impl FromStr for Report {
    type Err = ReportError;

    fn from_str(text: &str) -> Result<Self, ReportError> {
        let mut r = Report::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ReportError::Syntax(i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if r.contains(k) {
                return Err(ReportError::Duplicate(i + 1, k.to_string()));
            }
            r.entries.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }
}
