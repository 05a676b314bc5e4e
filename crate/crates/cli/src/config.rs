//! Run configuration: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [map]
//! family = skew_shear        # translation | skew_shear | two_wave
//! axis = vertical            # skew_shear: vertical | horizontal
//! omega = 0
//! cosines = 0.5 -0.5         # psi(t) = sum_k c_k cos(2 pi k t)
//!
//! [matrix]
//! entries = 1 1 0  0 1 0  0 0 1
//!
//! [estimate]
//! ladder_max = 200           # or: ladder = 1 2 4 8
//! grid_n = 256
//!
//! [zaction]
//! p_max = 96
//! k_box = 0 1 0 1            # x0 x1 y0 y1
//! k_grid = 64
//! window = -1 2 -1 2         # optional slope window
//!
//! [certificate]
//! radius = 1
//! k_scan = 128
//! grid_n = 64
//! trials = 500
//! circle_samples = 256      # boundary points of B(0, R) in the empirical check
//!
//! [run]
//! seed = 7
//! report = out/report.txt
//! ```
//!
//! Unknown sections, unknown keys, duplicates and missing required keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use rotset::dynamics::ShearAxis;
use rotset::pushforward::CertificateParams;
use rotset::rotation::{doubling_ladder, EstimatorParams};
use rotset::{IntMatrix3, Rect, TorusLift};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing key `{key}` in [{section}]")]
    Missing { section: &'static str, key: &'static str },
    #[error("[{0}] section is required")]
    MissingSection(&'static str),
}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line { line, message: message.into() }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("map", &["family", "alpha", "beta", "axis", "omega", "cosines", "p1", "p2", "q1", "q2"]),
    ("matrix", &["entries"]),
    ("estimate", &["ladder", "ladder_max", "grid_n"]),
    ("zaction", &["p_max", "k_box", "k_grid", "window"]),
    ("certificate", &["radius", "k_scan", "grid_n", "trials", "circle_samples"]),
    ("run", &["seed", "report"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lift: TorusLift,
    pub matrix: Option<IntMatrix3>,
    pub params: EstimatorParams,
    pub certificate: CertificateParams,
    pub trials: usize,
    pub circle_samples: usize,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

/// Parsed `(section, key) -> (line, raw value)`.
struct Table {
    entries: BTreeMap<(String, String), (usize, String)>,
    sections: BTreeMap<String, usize>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at(line, format!("malformed section header `{content}`")))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(at(line, format!("unknown section [{name}]")));
                }
                if sections.insert(name.to_string(), line).is_some() {
                    return Err(at(line, format!("duplicate section [{name}]")));
                }
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| at(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current.as_deref().ok_or_else(|| at(line, format!("key `{key}` outside any section")))?;
            let known = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !known.contains(&key) {
                return Err(at(line, format!("unknown key `{key}` in [{section}]")));
            }
            if value.is_empty() {
                return Err(at(line, format!("empty value for `{key}`")));
            }
            if entries.insert((section.to_string(), key.to_string()), (line, value.to_string())).is_some() {
                return Err(at(line, format!("duplicate key `{key}` in [{section}]")));
            }
        }
        Ok(Self { entries, sections })
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| at(*line, format!("cannot parse `{key}` value `{v}`"))),
        }
    }

    fn require<T: FromStr>(&self, section: &'static str, key: &'static str) -> Result<T, ConfigError> {
        self.get(section, key)?.ok_or(ConfigError::Missing { section, key })
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<(usize, Vec<T>)>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| at(*line, format!("cannot parse `{t}` in `{key}`"))))
                .collect::<Result<Vec<T>, _>>()
                .map(|xs| Some((*line, xs))),
        }
    }

    fn rect(&self, section: &str, key: &str) -> Result<Option<Rect>, ConfigError> {
        match self.list::<f64>(section, key)? {
            None => Ok(None),
            Some((line, xs)) => {
                let [x0, x1, y0, y1] = xs[..] else {
                    return Err(at(line, format!("`{key}` needs four numbers x0 x1 y0 y1")));
                };
                let r = Rect::new(x0, x1, y0, y1);
                if !(x0 < x1 && y0 < y1) {
                    return Err(at(line, format!("`{key}` must have x0 < x1 and y0 < y1")));
                }
                Ok(Some(r))
            }
        }
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).map(|(l, _)| *l).or_else(|| self.sections.get(section).copied()).unwrap_or(0)
    }
}

fn positive<T: PartialOrd + Default + Copy>(v: T, line: usize, key: &str) -> Result<T, ConfigError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(at(line, format!("`{key}` must be positive")))
    }
}

fn parse_lift(t: &Table) -> Result<TorusLift, ConfigError> {
    if !t.sections.contains_key("map") {
        return Err(ConfigError::MissingSection("map"));
    }
    let family: String = t.require("map", "family")?;
    let fam_line = t.line_of("map", "family");
    let allowed: &[&str] = match family.as_str() {
        "translation" => &["family", "alpha", "beta"],
        "skew_shear" => &["family", "axis", "omega", "cosines"],
        "two_wave" => &["family", "p1", "p2", "q1", "q2"],
        other => return Err(at(fam_line, format!("unknown family `{other}`"))),
    };
    for ((section, key), (line, _)) in &t.entries {
        if section == "map" && !allowed.contains(&key.as_str()) {
            return Err(at(*line, format!("key `{key}` does not apply to family {family}")));
        }
    }
    let lift = match family.as_str() {
        "translation" => TorusLift::translation(t.require("map", "alpha")?, t.require("map", "beta")?),
        "skew_shear" => {
            let axis = match t.require::<String>("map", "axis")?.as_str() {
                "vertical" => ShearAxis::Vertical,
                "horizontal" => ShearAxis::Horizontal,
                other => return Err(at(t.line_of("map", "axis"), format!("unknown axis `{other}`"))),
            };
            let cosines = t.list("map", "cosines")?.ok_or(ConfigError::Missing { section: "map", key: "cosines" })?.1;
            TorusLift::skew_shear(axis, t.require("map", "omega")?, cosines)
        }
        _ => TorusLift::two_wave(
            t.require("map", "p1")?,
            t.require("map", "p2")?,
            t.require("map", "q1")?,
            t.require("map", "q2")?,
        ),
    };
    lift.map_err(|e| at(fam_line, e.to_string()))
}

fn parse_matrix(t: &Table) -> Result<Option<IntMatrix3>, ConfigError> {
    if !t.sections.contains_key("matrix") {
        return Ok(None);
    }
    let line = t.line_of("matrix", "entries");
    let (_, raw) = t.raw("matrix", "entries").ok_or(ConfigError::Missing { section: "matrix", key: "entries" })?;
    let m: IntMatrix3 = raw.parse().map_err(|e: rotset::projective::ProjectiveError| at(line, e.to_string()))?;
    let m = IntMatrix3::unimodular(*m.rows()).map_err(|e| at(line, e.to_string()))?;
    Ok(Some(m))
}

fn parse_params(t: &Table) -> Result<EstimatorParams, ConfigError> {
    let mut p = EstimatorParams::default();
    match (t.list::<i64>("estimate", "ladder")?, t.get::<i64>("estimate", "ladder_max")?) {
        (Some((line, _)), Some(_)) => return Err(at(line, "give either `ladder` or `ladder_max`, not both")),
        (Some((line, ladder)), None) => {
            if ladder.is_empty() || ladder[0] < 1 || ladder.windows(2).any(|w| w[0] >= w[1]) {
                return Err(at(line, "`ladder` must be strictly increasing positive integers"));
            }
            p.ladder = ladder;
        }
        (None, Some(n)) => p.ladder = doubling_ladder(positive(n, t.line_of("estimate", "ladder_max"), "ladder_max")?),
        (None, None) => {}
    }
    if let Some(n) = t.get::<usize>("estimate", "grid_n")? {
        p.grid_n = positive(n, t.line_of("estimate", "grid_n"), "grid_n")?;
    }
    if let Some(n) = t.get::<i64>("zaction", "p_max")? {
        p.p_max = positive(n, t.line_of("zaction", "p_max"), "p_max")?;
    }
    if let Some(n) = t.get::<usize>("zaction", "k_grid")? {
        p.k_grid = positive(n, t.line_of("zaction", "k_grid"), "k_grid")?;
    }
    if let Some(r) = t.rect("zaction", "k_box")? {
        p.k_box = r;
    }
    p.slope_window = t.rect("zaction", "window")?;
    Ok(p)
}

fn parse_certificate(t: &Table) -> Result<(CertificateParams, usize, usize), ConfigError> {
    let mut c = CertificateParams::default();
    if let Some(r) = t.get::<f64>("certificate", "radius")? {
        let line = t.line_of("certificate", "radius");
        if !r.is_finite() {
            return Err(at(line, "`radius` must be finite"));
        }
        c.radius = positive(r, line, "radius")?;
    }
    if let Some(k) = t.get::<i64>("certificate", "k_scan")? {
        c.k_scan = positive(k, t.line_of("certificate", "k_scan"), "k_scan")?;
    }
    if let Some(n) = t.get::<usize>("certificate", "grid_n")? {
        let line = t.line_of("certificate", "grid_n");
        if n < 2 {
            return Err(at(line, "`grid_n` must be at least 2"));
        }
        c.grid_n = n;
    }
    let trials = match t.get::<usize>("certificate", "trials")? {
        Some(n) => positive(n, t.line_of("certificate", "trials"), "trials")?,
        None => 500,
    };
    let circle = match t.get::<usize>("certificate", "circle_samples")? {
        Some(n) if n >= 8 => n,
        Some(_) => return Err(at(t.line_of("certificate", "circle_samples"), "`circle_samples` must be at least 8")),
        None => 256,
    };
    Ok((c, trials, circle))
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let t = Table::parse(text)?;
        let (certificate, trials, circle_samples) = parse_certificate(&t)?;
        Ok(RunConfig {
            lift: parse_lift(&t)?,
            matrix: parse_matrix(&t)?,
            params: parse_params(&t)?,
            certificate,
            trials,
            circle_samples,
            seed: t.get("run", "seed")?.unwrap_or(0),
            report: t.get::<String>("run", "report")?.map(PathBuf::from),
        })
    }
}
