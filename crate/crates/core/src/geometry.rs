//! Exact convex geometry of a realizable point set.
//!
//! `V` is the span of all pairwise differences of realizable points and
//! `V⊥` its orthogonal complement. Membership of a target in the relative
//! interior of the hull `C` is decided in two stages: first against the
//! affine hull (exact projection onto `V⊥`), then with the linear program
//!
//! ```text
//! maximize ε  s.t.  Σ λᵢ pᵢ = t,  Σ λᵢ = 1,  λᵢ ≥ ε ≥ 0
//! ```
//!
//! over all realizable points. A positive optimum means `t` is a strictly
//! positive convex combination, i.e. lies in `rint(C)`; a zero optimum puts
//! it on the relative boundary; infeasibility yields a separating
//! hyperplane from the Farkas multipliers.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphspace::{RealizableSet, N_MAX};
use crate::linalg;
use crate::lp::{lp_solve, LinearProgram, LpOutcome};
use crate::rational::{int, serde_rational, Rational, RationalVector};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineGeometry {
    pub dim: usize,
    pub v_basis: Vec<RationalVector>,
    pub vperp_basis: Vec<RationalVector>,
    pub vertex_indices: Vec<usize>,
}

impl AffineGeometry {
    /// Orthonormal float basis of `V`, computed exactly and converted once.
    pub fn orthonormal_v_basis(&self) -> Vec<Vec<f64>> {
        orthonormal_basis(&self.v_basis)
    }
}

/// Orthonormal float basis of the span of `vectors`.
pub fn orthonormal_basis(vectors: &[RationalVector]) -> Vec<Vec<f64>> {
    linalg::orthogonalize(vectors)
        .iter()
        .map(|q| {
            let v = q.to_f64();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    RelativeInterior,
    RelativeBoundary,
    OutsideHull,
    OutsideAffineHull,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::RelativeInterior => "in the relative interior of the hull",
            Verdict::RelativeBoundary => "on the relative boundary of the hull",
            Verdict::OutsideHull => "outside the hull",
            Verdict::OutsideAffineHull => "outside the affine hull",
        }
    }

    pub fn is_outside(self) -> bool {
        matches!(self, Verdict::OutsideHull | Verdict::OutsideAffineHull)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RintCertificate {
    pub verdict: Verdict,
    /// Convex weights, one per realizable point, reproducing the target.
    #[serde(serialize_with = "serde_rational::vec::serialize")]
    pub weights: Option<Vec<Rational>>,
    /// Optimum of the max-min-weight program.
    #[serde(serialize_with = "serde_rational::option::serialize")]
    pub min_weight: Option<Rational>,
    /// Integer normal `θ` with `θ·t ≥ θ·p + margin` for every point `p`.
    pub separator: Option<RationalVector>,
    #[serde(serialize_with = "serde_rational::option::serialize")]
    pub margin: Option<Rational>,
    /// Component of `t − p₀` in `V⊥`.
    pub affine_residual: Option<RationalVector>,
    /// Index of the hull vertex equal to the target, when there is one.
    pub face_witness: Option<usize>,
}

impl RintCertificate {
    fn empty(verdict: Verdict) -> Self {
        RintCertificate {
            verdict,
            weights: None,
            min_weight: None,
            separator: None,
            margin: None,
            affine_residual: None,
            face_witness: None,
        }
    }

    /// Re-checks every claim of the certificate in exact arithmetic.
    pub fn verify(&self, t: &RationalVector, points: &[RationalVector]) -> Result<()> {
        let fail = |what: &str| Err(Error::Certificate(what.to_string()));
        match self.verdict {
            Verdict::RelativeInterior | Verdict::RelativeBoundary => {
                let (Some(weights), Some(eps)) = (&self.weights, &self.min_weight) else {
                    return fail("membership verdict without weights");
                };
                if weights.len() != points.len() {
                    return fail("weight count differs from point count");
                }
                if weights.iter().any(|w| w < eps) || eps.is_negative() {
                    return fail("weight below the reported minimum");
                }
                if weights.iter().fold(Rational::zero(), |a, w| a + w) != Rational::one() {
                    return fail("weights do not sum to one");
                }
                let mut combo = RationalVector::zeros(t.len());
                for (w, p) in weights.iter().zip(points) {
                    for (acc, c) in combo.0.iter_mut().zip(p.iter()) {
                        *acc += w * c;
                    }
                }
                if &combo != t {
                    return fail("weights do not reproduce the target");
                }
                let positive = eps.is_positive();
                if positive != (self.verdict == Verdict::RelativeInterior) {
                    return fail("verdict disagrees with the minimum weight");
                }
            }
            Verdict::OutsideHull | Verdict::OutsideAffineHull => {
                let (Some(theta), Some(margin)) = (&self.separator, &self.margin) else {
                    return fail("exclusion verdict without a separator");
                };
                if !margin.is_positive() {
                    return fail("non-positive separation margin");
                }
                let top = theta.dot(t) - margin;
                if points.iter().any(|p| theta.dot(p) > top) {
                    return fail("separator does not clear every point");
                }
            }
        }
        Ok(())
    }

    /// `1/ε*`: grows without bound as the target approaches the boundary.
    pub fn boundary_proximity(&self) -> Option<Rational> {
        match (&self.verdict, &self.min_weight) {
            (Verdict::RelativeInterior, Some(eps)) => Some(Rational::one() / eps),
            _ => None,
        }
    }
}

fn check_points(points: &[RationalVector]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("empty point set".into()));
    };
    let n = first.len();
    if n > N_MAX {
        return Err(Error::CapacityExceeded {
            what: "statistic count",
            value: n,
            limit: N_MAX,
        });
    }
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    Ok(n)
}

fn differences(points: &[RationalVector]) -> Vec<RationalVector> {
    points[1..].iter().map(|p| p - &points[0]).collect()
}

/// `(dim, basis of V, basis of V⊥)`; both bases primitive-integer.
pub fn affine_hull_of(
    points: &[RationalVector],
) -> Result<(usize, Vec<RationalVector>, Vec<RationalVector>)> {
    let n = check_points(points)?;
    let diffs = differences(points);
    let (reduced, _) = linalg::rref(&diffs, n);
    let perp = linalg::null_space(&diffs, n);
    Ok((
        reduced.len(),
        reduced
            .iter()
            .map(RationalVector::primitive_integer)
            .collect(),
        perp.iter().map(RationalVector::primitive_integer).collect(),
    ))
}

pub fn affine_geometry_of(points: &[RationalVector]) -> Result<AffineGeometry> {
    let (dim, v_basis, vperp_basis) = affine_hull_of(points)?;
    Ok(AffineGeometry {
        dim,
        v_basis,
        vperp_basis,
        vertex_indices: hull_vertices_of(points)?,
    })
}

pub fn affine_geometry(set: &RealizableSet) -> Result<AffineGeometry> {
    affine_geometry_of(&set.points)
}

/// Whether `points[i]` is a convex combination of `pool` (which excludes it).
fn in_hull_of(point: &RationalVector, pool: &[&RationalVector]) -> Result<bool> {
    if pool.is_empty() {
        return Ok(false);
    }
    let n = point.len();
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|c| pool.iter().map(|p| p[c].clone()).collect())
        .collect();
    rows.push(vec![Rational::one(); pool.len()]);
    let mut rhs = point.0.clone();
    rhs.push(Rational::one());
    let lp = LinearProgram {
        objective: vec![Rational::zero(); pool.len()],
        rows,
        rhs,
        lower: vec![Rational::zero(); pool.len()],
    };
    Ok(!matches!(lp_solve(&lp)?, LpOutcome::Infeasible(_)))
}

fn others(points: &[RationalVector], i: usize) -> Vec<&RationalVector> {
    points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| p)
        .collect()
}

/// Points that are the midpoint of two other points; never vertices.
fn midpoints(points: &[RationalVector]) -> Vec<bool> {
    let index: HashSet<&RationalVector> = points.iter().collect();
    let two = int(2);
    points
        .par_iter()
        .map(|p| {
            let doubled = p.scale(&two);
            points
                .iter()
                .any(|q| q != p && index.contains(&(&doubled - q)))
        })
        .collect()
}

/// Indices of the extreme points.
///
/// Midpoints of realizable pairs are discarded first; every remaining point
/// is then tested by an exact LP against the other survivors. Discarding
/// non-vertices leaves the hull unchanged, so the answer is exact.
pub fn hull_vertices_of(points: &[RationalVector]) -> Result<Vec<usize>> {
    check_points(points)?;
    let inner = midpoints(points);
    let survivors: Vec<usize> = (0..points.len()).filter(|&i| !inner[i]).collect();
    let flags: Vec<bool> = survivors
        .par_iter()
        .map(|&i| {
            let pool: Vec<&RationalVector> = survivors
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| &points[j])
                .collect();
            in_hull_of(&points[i], &pool).map(|inside| !inside)
        })
        .collect::<Result<_>>()?;
    Ok(survivors
        .into_iter()
        .zip(flags)
        .filter_map(|(i, vertex)| vertex.then_some(i))
        .collect())
}

pub fn hull_vertices(set: &RealizableSet) -> Result<Vec<usize>> {
    hull_vertices_of(&set.points)
}

fn separator_certificate(
    verdict: Verdict,
    direction: &RationalVector,
    t: &RationalVector,
    points: &[RationalVector],
) -> RintCertificate {
    let theta = direction.integer_multiple();
    let best = points
        .iter()
        .map(|p| theta.dot(p))
        .max()
        .expect("nonempty point set");
    RintCertificate {
        margin: Some(theta.dot(t) - best),
        separator: Some(theta),
        ..RintCertificate::empty(verdict)
    }
}

pub fn rint_membership_of(
    t: &RationalVector,
    points: &[RationalVector],
) -> Result<RintCertificate> {
    let n = check_points(points)?;
    if t.len() != n {
        return Err(Error::InvalidInput(format!(
            "target has {} coordinates, statistics have {n}",
            t.len()
        )));
    }

    let diffs = differences(points);
    let perp = linalg::orthogonalize(&linalg::null_space(&diffs, n));
    let residual = linalg::project(&(t - &points[0]), &perp);
    if !residual.is_zero() {
        let mut cert = separator_certificate(Verdict::OutsideAffineHull, &residual, t, points);
        cert.affine_residual = Some(residual);
        cert.verify(t, points)?;
        return Ok(cert);
    }

    // Variables: μ₁..μₘ (λᵢ = μᵢ + ε) followed by ε.
    let m = points.len();
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|c| {
            let mut row: Vec<Rational> = points.iter().map(|p| p[c].clone()).collect();
            row.push(points.iter().fold(Rational::zero(), |a, p| a + &p[c]));
            row
        })
        .collect();
    let mut ones = vec![Rational::one(); m];
    ones.push(int(m as i64));
    rows.push(ones);
    let mut rhs = t.0.clone();
    rhs.push(Rational::one());
    let mut objective = vec![Rational::zero(); m];
    objective.push(Rational::one());
    let lp = LinearProgram {
        objective,
        rows,
        rhs,
        lower: vec![Rational::zero(); m + 1],
    };

    let cert = match lp_solve(&lp)? {
        LpOutcome::Optimal(sol) => {
            let eps = sol.x[m].clone();
            let weights: Vec<Rational> = sol.x[..m].iter().map(|mu| mu + &eps).collect();
            let verdict = if eps.is_positive() {
                Verdict::RelativeInterior
            } else {
                Verdict::RelativeBoundary
            };
            let face_witness = match verdict {
                Verdict::RelativeBoundary => match points.iter().position(|p| p == t) {
                    Some(j) if !in_hull_of(&points[j], &others(points, j))? => Some(j),
                    _ => None,
                },
                _ => None,
            };
            RintCertificate {
                weights: Some(weights),
                min_weight: Some(eps),
                face_witness,
                ..RintCertificate::empty(verdict)
            }
        }
        LpOutcome::Infeasible(farkas) => {
            let theta = RationalVector(farkas.multipliers[..n].to_vec());
            separator_certificate(Verdict::OutsideHull, &theta, t, points)
        }
        LpOutcome::Unbounded(_) => {
            return Err(Error::Certificate(
                "membership program reported unbounded".into(),
            ))
        }
    };
    cert.verify(t, points)?;
    Ok(cert)
}

pub fn rint_membership(t: &RationalVector, set: &RealizableSet) -> Result<RintCertificate> {
    rint_membership_of(t, &set.points)
}
