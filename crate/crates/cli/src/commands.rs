//! Subcommand drivers. Each returns the process exit code or a [`CmdError`]
//! carrying one.

use std::path::Path;

use anyhow::{anyhow, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotset::dynamics::ShearAxis;
use rotset::projective::InfinityPullback;
use rotset::pushforward::{
    build_pushforward, discontinuity_certificate, discontinuity_empirical_check, verify_theorem_with, PushforwardError,
    PushforwardSystem,
};
use rotset::rotation::{classical_rotation_set, remark1_equivalence_check, EstimatorParams, RotationSetEstimate};
use rotset::{hausdorff, hull, ActionWord, ConvexRegion, IntMatrix3, Rect, TorusLift, Vector2};

use crate::config::RunConfig;
use crate::report::Report;
use crate::svg;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ESTIMATOR: u8 = 3;
pub const EXIT_HYPOTHESIS: u8 = 4;
pub const EXIT_CERTIFICATE: u8 = 5;

#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CmdError {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_CONFIG, error: error.into() }
    }

    pub fn estimator(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_ESTIMATOR, error: error.into() }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CmdError> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .map_err(CmdError::config)?;
    text.parse::<RunConfig>()
        .with_context(|| format!("invalid config {}", path.display()))
        .map_err(CmdError::config)
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CmdError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(CmdError::config),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_map(r: &mut Report, lift: &TorusLift) {
    r.set_str("map.family", lift.family_name());
    match lift {
        TorusLift::Translation { alpha, beta } => {
            r.set_f64("map.alpha", *alpha);
            r.set_f64("map.beta", *beta);
        }
        TorusLift::SkewShear { axis, omega, cosines } => {
            r.set_str("map.axis", if *axis == ShearAxis::Vertical { "vertical" } else { "horizontal" });
            r.set_f64("map.omega", *omega);
            r.set_f64s("map.cosines", cosines);
        }
        TorusLift::TwoWave { p1, p2, q1, q2 } => {
            for (k, v) in [("map.p1", p1), ("map.p2", p2), ("map.q1", q1), ("map.q2", q2)] {
                r.set_f64(k, *v);
            }
        }
    }
}

fn write_classical(r: &mut Report, est: &RotationSetEstimate) {
    r.set_i64s("classical.ladder", &est.iterate_ladder);
    r.set_i64("classical.grid_n", est.grid_n as i64);
    r.set_polygon("classical.inner", &est.inner);
    r.set_polygon("classical.outer", &est.outer);
    r.set_f64s("classical.hausdorff_trace", &est.hausdorff_trace);
    r.set_f64("classical.margin", est.margin);
    r.set_str("classical.margin_kind", "heuristic");
}

fn word(w: &ActionWord) -> [i64; 3] {
    w.exponents()
}

fn flat(m: &IntMatrix3) -> Vec<i64> {
    m.rows().iter().flatten().copied().collect()
}

/// Classical estimate only.
pub fn estimate_report(cfg: &RunConfig) -> Result<Report, CmdError> {
    let est = classical_rotation_set(&cfg.lift, &cfg.params.ladder, cfg.params.grid_n).map_err(CmdError::estimator)?;
    let mut r = Report::new();
    r.set_str("kind", "estimate");
    r.set_str("status", "ok");
    write_map(&mut r, &cfg.lift);
    write_classical(&mut r, &est);
    Ok(r)
}

pub fn cmd_estimate(cfg: &RunConfig, out: Option<&Path>) -> Result<u8, CmdError> {
    let r = estimate_report(cfg)?;
    emit(&r.to_string(), out.or(cfg.report.as_deref()))?;
    Ok(EXIT_OK)
}

/// Gate, certificate, empirical check and theorem comparison, in that order.
/// Returns the report and the exit code it implies.
pub fn pushforward_report(cfg: &RunConfig, seed: u64) -> Result<(Report, u8), CmdError> {
    let l = cfg
        .matrix
        .ok_or_else(|| CmdError::config(anyhow!("pushforward needs a [matrix] section")))?;
    let sys = build_pushforward(&cfg.lift, &l).map_err(CmdError::config)?;
    let classical = classical_rotation_set(&cfg.lift, &cfg.params.ladder, cfg.params.grid_n).map_err(CmdError::estimator)?;

    let mut r = Report::new();
    r.set_str("kind", "pushforward");
    r.set_str("status", "ok");
    write_map(&mut r, &cfg.lift);
    r.set_i64s("matrix.l", &flat(&sys.l));
    r.set_i64s("matrix.l_inv", &flat(&sys.l_inv));
    r.set_i64s("words.u", &word(&sys.u));
    r.set_i64s("words.v", &word(&sys.v));
    r.set_i64s("words.g", &word(&sys.g));
    write_classical(&mut r, &classical);

    let clearance = sys.check_hypothesis(&classical);
    match sys.infinity_pullback() {
        InfinityPullback::Line(line) => r.set_f64s("hypothesis.line", &line.coefficients()),
        InfinityPullback::EmptyInPlane => r.set_str("hypothesis.line", "none"),
    }
    r.set_f64("hypothesis.clearance", clearance);
    r.set_bool("hypothesis.holds", clearance > 0.0);
    if !(clearance > 0.0) {
        r.set_str("status", "hypothesis_failed");
        return Ok((r, EXIT_HYPOTHESIS));
    }

    let mut code = EXIT_OK;
    match discontinuity_certificate(&sys, &classical, &cfg.certificate) {
        Ok(cert) => {
            r.set_str("certificate.status", "valid");
            r.set_str("certificate.scope", "sampled containments for |k| <= k_scan; empirical, not a proof");
            r.set_f64("certificate.radius", cert.radius);
            r.set_f64("certificate.clearance", cert.clearance);
            r.set_f64("certificate.epsilon", cert.epsilon);
            r.set_polygon("certificate.neighbourhood", &cert.neighbourhood);
            r.set_i64("certificate.k0", cert.k0);
            r.set_f64("certificate.r_prime", cert.r_prime);
            r.set_f64("certificate.r_double_prime", cert.r_double_prime);
            r.set_f64("certificate.j_bound", cert.j_bound);
            r.set_f64("certificate.sigma_min", cert.sigma_min);
            r.set_f64("certificate.mn_bound", cert.mn_bound);
            r.set_i64("certificate.k_scan", cert.k_scan);
            r.set_i64("certificate.grid_n", cert.grid_n as i64);
            r.set_f64("certificate.tail_defect", cert.tail_defect);

            let emp = discontinuity_empirical_check(&sys, &cert, cfg.trials, seed, cfg.circle_samples)
                .map_err(CmdError::estimator)?;
            r.set_i64("empirical.trials", emp.trials as i64);
            r.set_i64("empirical.circle_samples", cfg.circle_samples as i64);
            r.set_raw("empirical.seed", seed.to_string());
            r.set_f64("empirical.min_norm", emp.min_norm);
            r.set_f64("empirical.max_norm", emp.max_norm);
            r.set_i64("empirical.violation_count", emp.violations.len() as i64);
            let v: Vec<i64> = emp.violations.iter().flat_map(|(m, n)| [*m, *n]).collect();
            r.set_i64s("empirical.violations", &v);
            if !emp.violations.is_empty() {
                r.set_str("status", "empirical_violation");
                code = EXIT_CERTIFICATE;
            }
        }
        Err(PushforwardError::CertificateFailed(msg)) => {
            r.set_str("certificate.status", "failed");
            r.set_str("certificate.error", &msg);
            r.set_str("status", "certificate_failed");
            return Ok((r, EXIT_CERTIFICATE));
        }
        Err(e) => return Err(CmdError::estimator(e)),
    }

    let thm = verify_theorem_with(&sys, classical, &cfg.params).map_err(CmdError::estimator)?;
    write_theorem(&mut r, &sys, &thm, &cfg.params);
    if !thm.pass && code == EXIT_OK {
        r.set_str("status", "theorem_failed");
        code = EXIT_ESTIMATOR;
    }
    Ok((r, code))
}

fn write_theorem(r: &mut Report, sys: &PushforwardSystem, thm: &rotset::pushforward::TheoremReport, params: &EstimatorParams) {
    r.set_polygon("image.inner", &thm.image_inner);
    r.set_polygon("image.outer", &thm.image_outer);
    r.set_rect("zaction.window", &thm.slope_window);
    r.set_i64("zaction.p_max", params.p_max);
    r.set_rect("zaction.k_box", &params.k_box);
    r.set_i64("zaction.k_grid", params.k_grid as i64);
    r.set_i64("zaction.hits", thm.zaction.hits.len() as i64);
    r.set_i64("zaction.boundary_hits", thm.zaction.boundary_hits as i64);
    r.set_f64("zaction.max_padding", thm.zaction.max_padding);
    r.set_polygon("zaction.inner", &thm.zaction.estimate.inner);
    r.set_polygon("zaction.outer", &thm.zaction.estimate.outer);
    r.set_f64("zaction.margin", thm.zaction.estimate.margin);
    r.set_f64("theorem.distance", thm.distance);
    r.set_f64("theorem.bar", thm.bar);
    r.set_bool("theorem.pass", thm.pass);
    r.set_bool("theorem.identity_matrix", sys.l == IntMatrix3::IDENTITY);
}

pub fn cmd_pushforward(cfg: &RunConfig, seed: u64, out: Option<&Path>) -> Result<u8, CmdError> {
    let (r, code) = pushforward_report(cfg, seed)?;
    emit(&r.to_string(), out.or(cfg.report.as_deref()))?;
    Ok(code)
}

pub fn cmd_render(report: &Path, out: Option<&Path>) -> Result<u8, CmdError> {
    let text = std::fs::read_to_string(report)
        .with_context(|| format!("cannot read report {}", report.display()))
        .map_err(CmdError::config)?;
    let parsed: Report = text
        .parse()
        .with_context(|| format!("malformed report {}", report.display()))
        .map_err(CmdError::config)?;
    let figure = svg::render(&parsed)
        .with_context(|| format!("cannot render {}", report.display()))
        .map_err(CmdError::config)?;
    emit(&figure, out)?;
    Ok(EXIT_OK)
}

/// One line of the quick self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> anyhow::Result<(bool, String)>) -> Check {
    match run() {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check { name, pass: false, detail: format!("error: {e:#}") },
    }
}

/// Small-scale versions of the main guarantees, for smoke testing an install.
pub fn selftest(seed: u64) -> Vec<Check> {
    let worked = IntMatrix3::new([[1, 0, 0], [0, 1, 0], [-1, 0, 1]]);
    let third = TorusLift::Translation { alpha: 0.5, beta: 1.0 / 3.0 };
    let quick = EstimatorParams { ladder: vec![1, 2, 4, 8], grid_n: 8, p_max: 96, k_grid: 16, ..Default::default() };
    vec![
        check("word identity on random matrices", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..200i64 {
                let l = IntMatrix3::random_unimodular(&mut rng, 10, 5);
                let sys = build_pushforward(&third, &l)?;
                let t = [i - 100, 3 * i - 250, 7 - 2 * i];
                let (a, b) = sys.word_correspondence(t)?;
                if a != b {
                    return Ok((false, format!("{t:?} under {l}")));
                }
            }
            Ok((true, "200 matrices".into()))
        }),
        check("identity matrix reduces to the equivalence check", || {
            let sys = build_pushforward(&third, &IntMatrix3::IDENTITY)?;
            let classical = classical_rotation_set(&third, &quick.ladder, quick.grid_n)?;
            let thm = verify_theorem_with(&sys, classical, &quick)?;
            let eq = remark1_equivalence_check(&third, &quick)?;
            let same = (sys.u, sys.v, sys.g) == (ActionWord::S, ActionWord::T, ActionWord::F);
            Ok((same && thm.distance.to_bits() == eq.distance.to_bits(), format!("distance {}", thm.distance)))
        }),
        check("translation pushforward", || {
            let sys = build_pushforward(&third, &worked)?;
            let classical = classical_rotation_set(&third, &quick.ladder, quick.grid_n)?;
            let thm = verify_theorem_with(&sys, classical, &quick)?;
            let target = ConvexRegion::point(Vector2::new(1.0, 2.0 / 3.0));
            let d = hausdorff(&thm.zaction.estimate.inner, &target);
            Ok((d <= 0.1 && thm.pass, format!("distance to (1, 2/3): {d}")))
        }),
        check("discontinuity certificate", || {
            let sys = build_pushforward(&third, &worked)?;
            let classical = classical_rotation_set(&third, &quick.ladder, quick.grid_n)?;
            let params = rotset::pushforward::CertificateParams { k_scan: 16, grid_n: 8, ..Default::default() };
            let cert = discontinuity_certificate(&sys, &classical, &params)?;
            let emp = discontinuity_empirical_check(&sys, &cert, 100, seed, 64)?;
            let ok = cert.k0 == 1 && cert.r_prime == 0.0 && emp.violations.is_empty();
            Ok((ok, format!("k0 {} mn_bound {}", cert.k0, cert.mn_bound)))
        }),
        check("hypothesis gate", || {
            let f = TorusLift::Translation { alpha: 1.0, beta: 0.0 };
            let sys = build_pushforward(&f, &worked)?;
            let classical = classical_rotation_set(&f, &[1, 2], 4)?;
            let refused = matches!(verify_theorem_with(&sys, classical, &quick), Err(PushforwardError::HypothesisFails(_)));
            Ok((refused, "translation (1, 0) against the line x = 1".into()))
        }),
        check("geometry kernel", || {
            let pts = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0), Vector2::new(0.2, 0.2)];
            let h = hull(&pts)?;
            let again = hull(h.vertices())?;
            let square = Rect::UNIT.to_region();
            let d = hausdorff(&h, &square);
            Ok((again == h && (d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, format!("{} vertices", h.vertices().len())))
        }),
    ]
}
