//! Log-likelihood of a target statistic and its maximization.
//!
//! With distinct realizable points `pᵢ` of multiplicity `mᵢ`,
//!
//! ```text
//! κ(θ) = ln Σᵢ mᵢ exp(θ·pᵢ)        ℓ(θ) = θ·t − κ(θ)
//! ∇ℓ(θ) = t − E_θ[z]               ∇²ℓ(θ) = −Cov_θ[z]
//! ```
//!
//! All sums are shifted by the largest logit, so any finite `θ` is safe.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    affine_hull_of, orthonormal_basis, rint_membership, RintCertificate, Verdict,
};
use crate::graphspace::RealizableSet;
use crate::rational::RationalVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta(pub Vec<f64>);

impl Theta {
    pub fn zeros(n: usize) -> Self {
        Theta(vec![0.0; n])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, r: f64) -> Theta {
        Theta(self.0.iter().map(|x| r * x).collect())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for Theta {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Theta {
    fn from(v: Vec<f64>) -> Self {
        Theta(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Sup-norm of the gradient restricted to `V` at which Newton stops.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Sufficient-increase constant of the Armijo test.
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Starting point; `None` is the zero vector (uniform distribution).
    pub init: Option<Theta>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            grad_tol: 1e-10,
            max_iters: 200,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            init: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(Error::InvalidInput("grad_tol must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidInput(
                "backtrack_factor must lie strictly between 0 and 1".into(),
            ));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidInput(
                "armijo_c must lie strictly between 0 and 1".into(),
            ));
        }
        if let Some(init) = &self.init {
            if !init.is_finite() {
                return Err(Error::InvalidInput("init has non-finite entries".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathStep {
    pub theta: Theta,
    pub ell: f64,
    /// `ℓ` increase over the previous iterate, evaluated without cancellation.
    pub gain: f64,
    pub step_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub theta_hat: Theta,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub rint_certificate: RintCertificate,
    pub ell_at_opt: f64,
    pub hessian_at_opt: Vec<Vec<f64>>,
    pub path: Vec<PathStep>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Float view of a realizable set for repeated likelihood evaluation.
#[derive(Clone, Debug)]
pub struct ExpFamily {
    points: Vec<Vec<f64>>,
    log_mults: Vec<f64>,
    dim: usize,
}

impl ExpFamily {
    pub fn new(set: &RealizableSet) -> Self {
        ExpFamily {
            points: set.points.iter().map(RationalVector::to_f64).collect(),
            log_mults: set
                .multiplicities
                .iter()
                .map(|&m| (m as f64).ln())
                .collect(),
            dim: set.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    fn check(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "{what} has {} coordinates, statistics have {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{what} has non-finite entries"
            )));
        }
        Ok(())
    }

    fn logits(&self, theta: &[f64]) -> (Vec<f64>, f64) {
        let logits: Vec<f64> = self
            .points
            .iter()
            .zip(&self.log_mults)
            .map(|(p, lm)| dot(theta, p) + lm)
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (logits, max)
    }

    pub fn log_normalizer(&self, theta: &[f64]) -> f64 {
        let (logits, max) = self.logits(theta);
        max + logits.iter().map(|a| (a - max).exp()).sum::<f64>().ln()
    }

    /// Probability of each distinct point under `Pr_θ`.
    pub fn weights(&self, theta: &[f64]) -> Vec<f64> {
        let (logits, max) = self.logits(theta);
        let raw: Vec<f64> = logits.iter().map(|a| (a - max).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn mean_from_weights(&self, w: &[f64]) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for (p, wi) in self.points.iter().zip(w) {
            for (m, c) in mean.iter_mut().zip(p) {
                *m += wi * c;
            }
        }
        mean
    }

    pub fn mean(&self, theta: &[f64]) -> Vec<f64> {
        self.mean_from_weights(&self.weights(theta))
    }

    pub fn log_likelihood(&self, theta: &[f64], t: &[f64]) -> f64 {
        dot(theta, t) - self.log_normalizer(theta)
    }

    pub fn gradient(&self, theta: &[f64], t: &[f64]) -> Vec<f64> {
        t.iter().zip(self.mean(theta)).map(|(a, b)| a - b).collect()
    }

    /// `−Cov_θ[z]`, accumulated around the mean.
    pub fn hessian(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        let w = self.weights(theta);
        let mean = self.mean_from_weights(&w);
        let mut h = vec![vec![0.0; self.dim]; self.dim];
        for (p, wi) in self.points.iter().zip(&w) {
            let c: Vec<f64> = p.iter().zip(&mean).map(|(a, b)| a - b).collect();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    h[i][j] -= wi * c[i] * c[j];
                }
            }
        }
        h
    }

    /// `ℓ(θ + d) − ℓ(θ)` as `−ln E_θ[exp(d·(z − t))]`, evaluated through
    /// `expm1`/`ln_1p` so tiny increases near the optimum keep their sign.
    pub fn ell_increase(&self, theta: &[f64], d: &[f64], t: &[f64]) -> f64 {
        let w = self.weights(theta);
        let total: f64 = w.iter().sum();
        let shift = dot(d, t);
        let excess: f64 = self
            .points
            .iter()
            .zip(&w)
            .map(|(p, wi)| wi * (dot(d, p) - shift).exp_m1())
            .sum();
        -(excess / total).ln_1p()
    }
}

pub fn log_normalizer(theta: &Theta, set: &RealizableSet) -> Result<f64> {
    let fam = ExpFamily::new(set);
    fam.check(theta, "theta")?;
    Ok(fam.log_normalizer(theta))
}

pub fn log_likelihood(theta: &Theta, t: &RationalVector, set: &RealizableSet) -> Result<f64> {
    let fam = ExpFamily::new(set);
    let tf = t.to_f64();
    fam.check(theta, "theta")?;
    fam.check(&tf, "target")?;
    Ok(fam.log_likelihood(theta, &tf))
}

pub fn mean_statistic(theta: &Theta, set: &RealizableSet) -> Result<Vec<f64>> {
    let fam = ExpFamily::new(set);
    fam.check(theta, "theta")?;
    Ok(fam.mean(theta))
}

pub fn gradient(theta: &Theta, t: &RationalVector, set: &RealizableSet) -> Result<Vec<f64>> {
    let fam = ExpFamily::new(set);
    let tf = t.to_f64();
    fam.check(theta, "theta")?;
    fam.check(&tf, "target")?;
    Ok(fam.gradient(theta, &tf))
}

pub fn hessian(theta: &Theta, set: &RealizableSet) -> Result<Vec<Vec<f64>>> {
    let fam = ExpFamily::new(set);
    fam.check(theta, "theta")?;
    Ok(fam.hessian(theta))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(h: &[Vec<f64>]) -> f64 {
    let n = h.len();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| h[i][j]);
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn to_ambient(basis: &[Vec<f64>], eta: &[f64], n: usize) -> Vec<f64> {
    let mut theta = vec![0.0; n];
    for (q, e) in basis.iter().zip(eta) {
        for (x, qi) in theta.iter_mut().zip(q) {
            *x += e * qi;
        }
    }
    theta
}

fn restrict(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    basis.iter().map(|q| dot(q, v)).collect()
}

/// Newton direction `(−H_V)⁻¹ g_V`, or the gradient itself when the
/// restricted Hessian is not numerically negative definite.
fn ascent_direction(basis: &[Vec<f64>], h: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let d = basis.len();
    let neg = DMatrix::from_fn(d, d, |a, b| {
        let hq: Vec<f64> = h.iter().map(|row| dot(row, &basis[b])).collect();
        -dot(&basis[a], &hq)
    });
    let rhs = DVector::from_column_slice(g);
    match neg.cholesky() {
        Some(chol) => {
            let dir: Vec<f64> = chol.solve(&rhs).iter().copied().collect();
            if dir.iter().all(|x| x.is_finite()) && dot(&dir, g) > 0.0 {
                dir
            } else {
                g.to_vec()
            }
        }
        None => g.to_vec(),
    }
}

/// Maximum likelihood estimate in `V`, or the certificate explaining why
/// none exists.
pub fn fit_mle(t: &RationalVector, set: &RealizableSet, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let certificate = rint_membership(t, set)?;
    if certificate.verdict != Verdict::RelativeInterior {
        return Err(Error::NoMle {
            certificate: Box::new(certificate),
        });
    }
    let (_, v_basis, _) = affine_hull_of(&set.points)?;
    let basis = orthonormal_basis(&v_basis);

    let fam = ExpFamily::new(set);
    let n = fam.dim();
    let tf = t.to_f64();
    let init = cfg.init.clone().unwrap_or_else(|| Theta::zeros(n));
    fam.check(&init, "init")?;

    let mut eta = restrict(&basis, &init);
    let mut theta = to_ambient(&basis, &eta, n);
    let mut ell = fam.log_likelihood(&theta, &tf);
    let mut path = vec![PathStep {
        theta: Theta(theta.clone()),
        ell,
        gain: 0.0,
        step_length: 0.0,
    }];
    let mut iterations = 0;

    loop {
        let grad = restrict(&basis, &fam.gradient(&theta, &tf));
        let grad_norm = sup_norm(&grad);
        let result = |iterations, path: Vec<PathStep>| FitResult {
            theta_hat: Theta(theta.clone()),
            iterations,
            final_grad_norm: grad_norm,
            rint_certificate: certificate.clone(),
            ell_at_opt: ell,
            hessian_at_opt: fam.hessian(&theta),
            path,
        };
        if grad_norm <= cfg.grad_tol {
            return Ok(result(iterations, path));
        }
        if iterations >= cfg.max_iters {
            return Err(Error::NonConvergence {
                best: Box::new(result(iterations, path)),
            });
        }

        let dir = ascent_direction(&basis, &fam.hessian(&theta), &grad);
        let slope = dot(&grad, &dir);
        let mut alpha = 1.0;
        let accepted = loop {
            let step: Vec<f64> = dir.iter().map(|x| alpha * x).collect();
            let ambient_step = to_ambient(&basis, &step, n);
            let gain = fam.ell_increase(&theta, &ambient_step, &tf);
            if gain > 0.0 && gain >= cfg.armijo_c * alpha * slope {
                break Some((step, gain));
            }
            alpha *= cfg.backtrack_factor;
            if alpha < 1e-30 {
                break None;
            }
        };
        let Some((step, gain)) = accepted else {
            return Err(Error::NonConvergence {
                best: Box::new(result(iterations, path)),
            });
        };
        for (e, s) in eta.iter_mut().zip(&step) {
            *e += s;
        }
        theta = to_ambient(&basis, &eta, n);
        ell = fam.log_likelihood(&theta, &tf);
        iterations += 1;
        path.push(PathStep {
            theta: Theta(theta.clone()),
            ell,
            gain,
            step_length: alpha,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerpInvarianceReport {
    /// `ℓ(θ + u) − ℓ(θ)`.
    pub measured: f64,
    /// `u·(t − p₀)`, zero whenever `t` is in the affine hull.
    pub predicted: f64,
    pub target_in_affine_hull: bool,
}

/// Shifts `θ` by `u ∈ V⊥` and compares the change in `ℓ` with `u·(t − p₀)`.
pub fn perp_invariance_check(
    theta: &Theta,
    t: &RationalVector,
    set: &RealizableSet,
    u: &[f64],
) -> Result<PerpInvarianceReport> {
    let fam = ExpFamily::new(set);
    let tf = t.to_f64();
    fam.check(theta, "theta")?;
    fam.check(&tf, "target")?;
    fam.check(u, "shift")?;
    let (_, v_basis, vperp) = affine_hull_of(&set.points)?;
    for v in &v_basis {
        let vf = v.to_f64();
        if dot(&vf, u).abs() > 1e-12 * norm(&vf) * norm(u).max(1.0) {
            return Err(Error::InvalidInput(
                "shift has a nonzero component in V".into(),
            ));
        }
    }
    let offset = t - &set.points[0];
    let in_hull = vperp
        .iter()
        .all(|w| w.dot(&offset) == num_traits::Zero::zero());
    let shifted: Vec<f64> = theta.iter().zip(u).map(|(a, b)| a + b).collect();
    Ok(PerpInvarianceReport {
        measured: fam.log_likelihood(&shifted, &tf) - fam.log_likelihood(theta, &tf),
        predicted: dot(u, &offset.to_f64()),
        target_in_affine_hull: in_hull,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityReport {
    /// `ℓ(τθ₁ + (1−τ)θ₂)`.
    pub lhs: f64,
    /// `τℓ(θ₁) + (1−τ)ℓ(θ₂)`.
    pub rhs: f64,
    /// Whether `θ₁ − θ₂` has a component in `V`.
    pub strict_predicted: bool,
    pub strict_observed: bool,
    /// `‖θ₁ − θ₂‖`.
    pub separation: f64,
    /// Norm of the component of `θ₁ − θ₂` in `V`.
    pub v_separation: f64,
    /// The inequality holds, and strictness is observed whenever predicted
    /// with a `V` separation of at least 0.1; equality holds when not predicted.
    pub consistent: bool,
}

pub const CONCAVITY_TOL: f64 = 1e-12;
pub const STRICTNESS_GAP: f64 = 1e-9;
pub const STRICTNESS_MIN_SEPARATION: f64 = 0.1;

pub fn concavity_probe(
    theta1: &Theta,
    theta2: &Theta,
    tau: f64,
    t: &RationalVector,
    set: &RealizableSet,
) -> Result<ConcavityReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau = {tau} is not in (0, 1)")));
    }
    if theta1 == theta2 {
        return Err(Error::InvalidInput("theta1 and theta2 coincide".into()));
    }
    let fam = ExpFamily::new(set);
    let tf = t.to_f64();
    fam.check(theta1, "theta1")?;
    fam.check(theta2, "theta2")?;
    fam.check(&tf, "target")?;

    let (_, v_basis, _) = affine_hull_of(&set.points)?;
    let basis = orthonormal_basis(&v_basis);
    let diff: Vec<f64> = theta1
        .iter()
        .zip(theta2.iter())
        .map(|(a, b)| a - b)
        .collect();
    let separation = norm(&diff);
    let v_separation = norm(&restrict(&basis, &diff));
    let strict_predicted = v_separation > 1e-9 * separation;

    let mid: Vec<f64> = theta1
        .iter()
        .zip(theta2.iter())
        .map(|(a, b)| tau * a + (1.0 - tau) * b)
        .collect();
    let lhs = fam.log_likelihood(&mid, &tf);
    let rhs = tau * fam.log_likelihood(theta1, &tf) + (1.0 - tau) * fam.log_likelihood(theta2, &tf);
    let holds = lhs >= rhs - CONCAVITY_TOL;
    let strict_observed = lhs > rhs + STRICTNESS_GAP;
    let consistent = holds
        && if strict_predicted {
            v_separation < STRICTNESS_MIN_SEPARATION || strict_observed
        } else {
            (lhs - rhs).abs() <= CONCAVITY_TOL
        };
    Ok(ConcavityReport {
        lhs,
        rhs,
        strict_predicted,
        strict_observed,
        separation,
        v_separation,
        consistent,
    })
}
