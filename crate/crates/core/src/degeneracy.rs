//! Behaviour of the likelihood along a ray `rθ` when the target lies
//! outside the hull of realizable points.
//!
//! For `θ` with `θ·p ≤ θ·t − ε` at every realizable `p`,
//! `ℓ(rθ) ≥ r·ε − ln|G_k|`, and the distribution at `rθ` concentrates on the
//! face of points maximizing `θ·p`.

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{rint_membership, rint_membership_of, Verdict};
use crate::graphspace::{edge_slots, RealizableSet};
use crate::likelihood::ExpFamily;
use crate::rational::{serde_rational, to_f64, Rational, RationalVector};

/// Relative tolerance for the per-row lower-bound check.
pub const BOUND_TOL: f64 = 1e-9;

/// The default schedule stops once this much mass sits on the face.
pub const SATURATION: f64 = 1.0 - 1e-12;

pub const DEFAULT_MAX_DOUBLINGS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub theta: RationalVector,
    /// `θ·t − max θ·p`.
    #[serde(serialize_with = "serde_rational::serialize")]
    pub eps: Rational,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub r: f64,
    pub ell: f64,
    pub mass_on_face: f64,
    pub lower_bound: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub direction: RationalVector,
    #[serde(serialize_with = "serde_rational::serialize")]
    pub margin: Rational,
    pub face_indices: Vec<usize>,
    /// `max θ·p` minus the next-highest value; absent when `θ·p` is constant.
    #[serde(serialize_with = "serde_rational::option::serialize")]
    pub second_best_gap: Option<Rational>,
    /// 1 when `θ·t > 0`, else 2.
    pub case: u8,
    pub ell_at_zero: f64,
    pub rows: Vec<TrajectoryRow>,
}

/// Integer-normalized separator from the membership certificate, with its
/// maximal margin.
pub fn separating_direction(t: &RationalVector, set: &RealizableSet) -> Result<Separation> {
    let certificate = rint_membership(t, set)?;
    let Some(theta) = certificate
        .separator
        .clone()
        .filter(|_| certificate.verdict.is_outside())
    else {
        return Err(Error::NotSeparable {
            certificate: Box::new(certificate),
        });
    };
    let eps = theta.dot(t) - max_projection(&theta, set);
    Ok(Separation {
        theta,
        eps,
        verdict: certificate.verdict,
    })
}

fn projections(theta: &RationalVector, set: &RealizableSet) -> Vec<Rational> {
    set.points.iter().map(|p| theta.dot(p)).collect()
}

fn max_projection(theta: &RationalVector, set: &RealizableSet) -> Rational {
    projections(theta, set)
        .into_iter()
        .max()
        .expect("realizable sets are nonempty")
}

fn check_direction(theta: &RationalVector, set: &RealizableSet) -> Result<()> {
    if theta.len() != set.dim() {
        return Err(Error::InvalidInput(format!(
            "direction has {} coordinates, statistics have {}",
            theta.len(),
            set.dim()
        )));
    }
    if theta.is_zero() {
        return Err(Error::InvalidInput("direction is zero".into()));
    }
    Ok(())
}

/// Indices of the points attaining `max θ·p`, ascending.
pub fn argmax_face(theta: &RationalVector, set: &RealizableSet) -> Result<Vec<usize>> {
    check_direction(theta, set)?;
    let values = projections(theta, set);
    let max = values.iter().max().expect("realizable sets are nonempty");
    Ok((0..values.len()).filter(|&i| &values[i] == max).collect())
}

/// `1, 2, 4, …, 2^20`.
pub fn default_schedule() -> Vec<f64> {
    (0..=DEFAULT_MAX_DOUBLINGS)
        .map(|i| f64::from(1u32 << i))
        .collect()
}

fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("r schedule is empty".into()));
    }
    if schedule.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidInput(
            "r schedule entries must be finite and nonnegative".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "r schedule must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evaluates `ℓ(rθ)`, the face mass and the lower bound along `schedule`, or
/// along the default schedule (cut after the first saturated row) when
/// `schedule` is `None`.
pub fn degeneracy_trajectory(
    t: &RationalVector,
    set: &RealizableSet,
    theta: &RationalVector,
    eps: &Rational,
    schedule: Option<&[f64]>,
) -> Result<DegeneracyReport> {
    check_direction(theta, set)?;
    if t.len() != set.dim() {
        return Err(Error::InvalidInput(
            "target length differs from statistics".into(),
        ));
    }
    let values = projections(theta, set);
    let max = values
        .iter()
        .max()
        .expect("realizable sets are nonempty")
        .clone();
    let theta_t = theta.dot(t);
    if !eps.is_positive() || &theta_t - &max < *eps {
        return Err(Error::InvalidInput(
            "direction does not separate the target by the given margin".into(),
        ));
    }
    let face_indices: Vec<usize> = (0..values.len()).filter(|&i| values[i] == max).collect();
    let second_best_gap = values.iter().filter(|v| **v < max).max().map(|v| &max - v);

    // Offsets θ·p − max θ·p are exact before conversion, so face terms do not
    // depend on r and the off-face total shrinks monotonically in floats too.
    let gaps: Vec<f64> = values.iter().map(|v| to_f64(&(v - &max))).collect();
    let log_mults: Vec<f64> = set
        .multiplicities
        .iter()
        .map(|&m| (m as f64).ln())
        .collect();
    let face_weight: f64 = face_indices
        .iter()
        .map(|&i| set.multiplicities[i] as f64)
        .sum();
    let mass_at = |r: f64| {
        let off: f64 = gaps
            .iter()
            .zip(&log_mults)
            .filter(|(g, _)| **g < 0.0)
            .map(|(g, lm)| (r * g + lm).exp())
            .sum();
        1.0 / (1.0 + off / face_weight)
    };

    let family = ExpFamily::new(set);
    let theta_f = theta.to_f64();
    let t_f = t.to_f64();
    let eps_f = to_f64(eps);
    let log_graphs = edge_slots(set.k) as f64 * std::f64::consts::LN_2;
    let row = |r: f64| {
        let ell = family.log_likelihood(&scaled(&theta_f, r), &t_f);
        let lower_bound = r * eps_f - log_graphs;
        TrajectoryRow {
            r,
            ell,
            mass_on_face: mass_at(r),
            lower_bound,
            bound_holds: ell >= lower_bound - BOUND_TOL * lower_bound.abs().max(1.0),
        }
    };

    let rows: Vec<TrajectoryRow> = match schedule {
        Some(s) => {
            validate_schedule(s)?;
            s.par_iter().map(|&r| row(r)).collect()
        }
        None => {
            let mut rows = Vec::new();
            for r in default_schedule() {
                let next = row(r);
                let saturated = next.mass_on_face > SATURATION;
                rows.push(next);
                if saturated {
                    break;
                }
            }
            rows
        }
    };

    if let Some(bad) = rows.iter().find(|row| !row.bound_holds) {
        return Err(Error::ViolatedBound {
            r: bad.r,
            detail: format!("ell = {} below bound {}", bad.ell, bad.lower_bound),
        });
    }
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[1].mass_on_face < w[0].mass_on_face)
    {
        return Err(Error::ViolatedBound {
            r: w[1].r,
            detail: format!(
                "face mass decreased from {} to {}",
                w[0].mass_on_face, w[1].mass_on_face
            ),
        });
    }

    Ok(DegeneracyReport {
        direction: theta.clone(),
        margin: eps.clone(),
        face_indices,
        second_best_gap,
        case: if theta_t.is_positive() { 1 } else { 2 },
        ell_at_zero: family.log_likelihood(&vec![0.0; set.dim()], &t_f),
        rows,
    })
}

fn scaled(v: &[f64], r: f64) -> Vec<f64> {
    v.iter().map(|x| r * x).collect()
}

/// Separator plus trajectory in one call.
pub fn degeneracy(
    t: &RationalVector,
    set: &RealizableSet,
    schedule: Option<&[f64]>,
) -> Result<DegeneracyReport> {
    let sep = separating_direction(t, set)?;
    degeneracy_trajectory(t, set, &sep.theta, &sep.eps, schedule)
}

/// True when every face point lies on the relative boundary of the hull.
/// A face covering every point is the whole hull and is rejected.
pub fn boundary_witness(face_indices: &[usize], set: &RealizableSet) -> Result<bool> {
    if face_indices.is_empty() {
        return Err(Error::InvalidInput("face is empty".into()));
    }
    if let Some(&i) = face_indices.iter().find(|&&i| i >= set.len()) {
        return Err(Error::InvalidInput(format!("face index {i} out of range")));
    }
    let mut distinct = face_indices.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() == set.len() {
        return Err(Error::InvalidInput(
            "face covers every point; the direction lies in V-perp".into(),
        ));
    }
    for &i in &distinct {
        if rint_membership_of(&set.points[i], &set.points)?.verdict != Verdict::RelativeBoundary {
            return Ok(false);
        }
    }
    Ok(true)
}
