//! The batch pipeline: enumerate, analyse geometry, decide membership, then
//! fit or trace the degeneracy ray.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cache::{cache_dir, load_or_build, CacheStatus};
use super::config::{Mode, RunConfig};
use crate::degeneracy::{degeneracy, DegeneracyReport};
use crate::error::{Error, Result};
use crate::geometry::{affine_geometry, rint_membership, RintCertificate, Verdict};
use crate::graphspace::RealizableSet;
use crate::likelihood::{concavity_probe, fit_mle, perp_invariance_check, FitResult, Theta};
use crate::rational::RationalVector;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for `|measured − predicted|` in the invariance battery.
pub const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRow {
    pub point: RationalVector,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizableSummary {
    pub k: usize,
    pub graph_count: u64,
    pub distinct_points: usize,
    pub labels: Vec<String>,
    pub points: Vec<PointRow>,
}

impl RealizableSummary {
    fn of(set: &RealizableSet) -> Self {
        RealizableSummary {
            k: set.k,
            graph_count: set.total,
            distinct_points: set.len(),
            labels: set.labels(),
            points: set
                .points
                .iter()
                .zip(&set.multiplicities)
                .map(|(p, &m)| PointRow {
                    point: p.clone(),
                    multiplicity: m,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub dim: usize,
    pub v_basis: Vec<RationalVector>,
    pub vperp_basis: Vec<RationalVector>,
    pub vertex_indices: Vec<usize>,
    pub vertices: Vec<RationalVector>,
    pub uniform_mean: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoMleReport {
    pub verdict: Verdict,
    pub explanation: String,
    pub suggestion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavitySummary {
    pub samples: usize,
    pub inequality_holds: usize,
    pub strict_predicted: usize,
    pub strict_observed: usize,
    pub consistent: usize,
    /// Largest `rhs − lhs` seen; negative when every sample is strict.
    pub worst_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceSummary {
    pub directions: Vec<RationalVector>,
    pub checks: usize,
    pub target_in_affine_hull: bool,
    pub max_abs_discrepancy: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub concavity: ConcavitySummary,
    pub invariance: InvarianceSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl Failure {
    fn of(kind: &str, err: &Error) -> Self {
        Failure {
            kind: kind.to_string(),
            message: err.to_string(),
            exit_code: err.exit_code(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Geometry,
    Certificate,
    Mle,
    NoMle,
    Degeneracy,
    Probe,
    Failed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub cache: Option<CacheStatus>,
    pub realizable_ms: f64,
    pub geometry_ms: f64,
    pub membership_ms: f64,
    pub fit_ms: f64,
    pub degeneracy_ms: f64,
    pub probe_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub realizable: RealizableSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<RintCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_mle: Option<NoMleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<DegeneracyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
    /// Wall-clock data; the only part of a report that varies between runs.
    pub timings: Timings,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, |f| f.exit_code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report without its timing block.
    pub fn deterministic_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("reports serialize");
        if let Some(map) = value.as_object_mut() {
            map.remove("timings");
        }
        serde_json::to_string_pretty(&value).expect("reports serialize")
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn no_mle_report(certificate: &RintCertificate) -> NoMleReport {
    let suggestion = if certificate.verdict.is_outside() {
        "the likelihood is unbounded along the separating direction; run the degeneracy mode to trace it"
    } else {
        "the likelihood increases toward the face containing the target but has no maximizer"
    };
    NoMleReport {
        verdict: certificate.verdict,
        explanation: format!("target is {}", certificate.verdict.describe()),
        suggestion: suggestion.to_string(),
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Random concavity and `V⊥`-invariance batteries.
pub fn probe_battery(
    t: &RationalVector,
    set: &RealizableSet,
    vperp: &[RationalVector],
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = set.dim();
    let perp: Vec<Vec<f64>> = vperp.iter().map(RationalVector::to_f64).collect();

    let mut concavity = ConcavitySummary {
        samples,
        inequality_holds: 0,
        strict_predicted: 0,
        strict_observed: 0,
        consistent: 0,
        worst_violation: f64::NEG_INFINITY,
    };
    for i in 0..samples {
        let theta1 = uniform_in(&mut rng, n, -1.0, 1.0);
        let theta2 = if !perp.is_empty() && i % 2 == 1 {
            // Move along V⊥ only: the likelihood is affine on this segment.
            let u = &perp[rng.gen_range(0..perp.len())];
            let s = rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            theta1.iter().zip(u).map(|(a, b)| a + s * b).collect()
        } else {
            uniform_in(&mut rng, n, -1.0, 1.0)
        };
        let tau = rng.gen_range(0.05..0.95);
        let rep = concavity_probe(&Theta(theta1), &Theta(theta2), tau, t, set)?;
        concavity.inequality_holds +=
            usize::from(rep.lhs >= rep.rhs - crate::likelihood::CONCAVITY_TOL);
        concavity.strict_predicted += usize::from(rep.strict_predicted);
        concavity.strict_observed += usize::from(rep.strict_observed);
        concavity.consistent += usize::from(rep.consistent);
        concavity.worst_violation = concavity.worst_violation.max(rep.rhs - rep.lhs);
    }

    let mut invariance = InvarianceSummary {
        directions: vperp.to_vec(),
        checks: 0,
        target_in_affine_hull: true,
        max_abs_discrepancy: 0.0,
        within_tolerance: true,
    };
    for u in &perp {
        for _ in 0..20 {
            let theta = Theta(uniform_in(&mut rng, n, -1.0, 1.0));
            for s in [-10.0, -1.0, 1.0, 10.0] {
                let shift: Vec<f64> = u.iter().map(|x| s * x).collect();
                let rep = perp_invariance_check(&theta, t, set, &shift)?;
                let discrepancy = (rep.measured - rep.predicted).abs();
                invariance.checks += 1;
                invariance.target_in_affine_hull &= rep.target_in_affine_hull;
                invariance.max_abs_discrepancy = invariance.max_abs_discrepancy.max(discrepancy);
                invariance.within_tolerance &=
                    discrepancy <= INVARIANCE_TOL * rep.predicted.abs().max(1.0);
            }
        }
    }

    Ok(ProbeReport {
        seed,
        concavity,
        invariance,
    })
}

/// Runs the pipeline for `config`.
///
/// Errors that prevent any analysis (capacity, I/O) are returned as `Err`.
/// Outcomes the analysis can explain (no MLE, non-convergence, a target
/// inside the hull in degeneracy mode) produce a report with a `failure`
/// entry and the matching exit code.
pub fn run(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let mut timings = Timings::default();

    let clock = Instant::now();
    let dir = cache_dir(config.cache_path.as_deref());
    let (set, cache_status) = load_or_build(config.k, &config.statistics, dir.as_deref())?;
    timings.cache = Some(cache_status);
    timings.realizable_ms = ms(clock);

    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        outcome: Outcome::Geometry,
        failure: None,
        realizable: RealizableSummary::of(&set),
        geometry: None,
        certificate: None,
        fit: None,
        no_mle: None,
        degeneracy: None,
        probe: None,
        timings: Timings::default(),
    };

    let mode = config.mode;
    let mut vperp = Vec::new();
    if matches!(mode, Mode::Hull | Mode::Probe | Mode::All) {
        let clock = Instant::now();
        let geometry = affine_geometry(&set)?;
        vperp = geometry.vperp_basis.clone();
        report.geometry = Some(GeometrySummary {
            dim: geometry.dim,
            vertices: geometry
                .vertex_indices
                .iter()
                .map(|&i| set.points[i].clone())
                .collect(),
            v_basis: geometry.v_basis,
            vperp_basis: geometry.vperp_basis,
            vertex_indices: geometry.vertex_indices,
            uniform_mean: set.uniform_mean(),
        });
        timings.geometry_ms = ms(clock);
    }

    if mode != Mode::Hull {
        let t = config
            .target
            .as_ref()
            .ok_or_else(|| Error::config("target", format!("required by mode {mode}")))?;

        let clock = Instant::now();
        let certificate = rint_membership(t, &set)?;
        timings.membership_ms = ms(clock);
        report.certificate = Some(certificate.clone());
        report.outcome = Outcome::Certificate;

        let interior = certificate.verdict == Verdict::RelativeInterior;
        let want_fit = mode == Mode::Fit || (mode == Mode::All && interior);
        let want_degeneracy =
            mode == Mode::Degeneracy || (mode == Mode::All && certificate.verdict.is_outside());

        if want_fit {
            let clock = Instant::now();
            match fit_mle(t, &set, &config.fit) {
                Ok(fit) => {
                    report.fit = Some(fit);
                    report.outcome = Outcome::Mle;
                }
                Err(err @ Error::NoMle { .. }) => {
                    report.no_mle = Some(no_mle_report(&certificate));
                    report.outcome = Outcome::NoMle;
                    report.failure = Some(Failure::of("no_mle", &err));
                }
                Err(Error::NonConvergence { best }) => {
                    let err = Error::NonConvergence { best: best.clone() };
                    report.failure = Some(Failure::of("non_convergence", &err));
                    report.fit = Some(*best);
                    report.outcome = Outcome::Failed;
                }
                Err(err) => return Err(err),
            }
            timings.fit_ms = ms(clock);
        } else if mode == Mode::All {
            report.no_mle = Some(no_mle_report(&certificate));
            report.outcome = Outcome::NoMle;
        }

        if want_degeneracy {
            let clock = Instant::now();
            match degeneracy(t, &set, config.r_schedule.as_deref()) {
                Ok(deg) => {
                    report.degeneracy = Some(deg);
                    report.outcome = Outcome::Degeneracy;
                }
                Err(err @ Error::NotSeparable { .. }) => {
                    report.failure = Some(Failure::of("not_separable", &err));
                    report.outcome = Outcome::Failed;
                }
                Err(err @ Error::ViolatedBound { .. }) => {
                    report.failure = Some(Failure::of("violated_bound", &err));
                    report.outcome = Outcome::Failed;
                }
                Err(err) => return Err(err),
            }
            timings.degeneracy_ms = ms(clock);
        }

        if mode == Mode::Probe {
            let clock = Instant::now();
            let probe = probe_battery(t, &set, &vperp, config.probe_samples, config.seed)?;
            if probe.concavity.consistent != probe.concavity.samples
                || !probe.invariance.within_tolerance
            {
                report.failure = Some(Failure {
                    kind: "probe_inconsistent".into(),
                    message: "a concavity or invariance probe disagreed with theory".into(),
                    exit_code: Error::Certificate(String::new()).exit_code(),
                });
            }
            report.probe = Some(probe);
            report.outcome = Outcome::Probe;
            timings.probe_ms = ms(clock);
        }
    }

    timings.total_ms = ms(start);
    report.timings = timings;
    Ok(report)
}
