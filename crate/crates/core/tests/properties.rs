use ergm_exact::degeneracy::{argmax_face, degeneracy, degeneracy_trajectory};
use ergm_exact::geometry::{affine_geometry, rint_membership, Verdict};
use ergm_exact::graphspace::{realizable_set, RealizableSet, StatisticKind, StatisticSpec};
use ergm_exact::likelihood::{
    fit_mle, gradient, hessian, log_likelihood, max_eigenvalue, FitConfig, Theta,
};
use ergm_exact::rational::{int, ratio, Rational, RationalVector};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = RealizableSet> {
    (
        3usize..=5,
        proptest::sample::subsequence(StatisticKind::ALL.to_vec(), 1..=3),
    )
        .prop_map(|(k, kinds)| realizable_set(k, &StatisticSpec::list(&kinds)).unwrap())
}

/// Strictly positive rational convex combination of every realizable point:
/// always in the relative interior.
fn interior_target(set: &RealizableSet, raw: &[u8]) -> RationalVector {
    let weights: Vec<i64> = (0..set.len())
        .map(|i| 1 + raw[i % raw.len()] as i64)
        .collect();
    let total: i64 = weights.iter().sum();
    let mut t = RationalVector::zeros(set.dim());
    for (p, w) in set.points.iter().zip(&weights) {
        for (acc, c) in t.0.iter_mut().zip(p.iter()) {
            *acc += c * ratio(*w, total);
        }
    }
    t
}

fn theta(raw: &[f64], n: usize) -> Theta {
    Theta(raw.iter().cycle().take(n).copied().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_matches_moments_and_ascends(
        set in model(),
        raw in proptest::collection::vec(0u8..8, 1..12),
    ) {
        let t = interior_target(&set, &raw);
        let fit = fit_mle(&t, &set, &FitConfig::default()).unwrap();
        prop_assert_eq!(fit.rint_certificate.verdict, Verdict::RelativeInterior);
        prop_assert!(fit.final_grad_norm <= 1e-10);
        for w in fit.path.windows(2) {
            prop_assert!(w[1].gain > 0.0);
        }
        let g = gradient(&fit.theta_hat, &t, &set).unwrap();
        let scale = t.to_f64().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        // The gradient is zero in V; its V⊥ part vanishes because t is in the affine hull.
        prop_assert!(g.iter().all(|x| x.abs() <= 1e-8 * scale), "{:?}", g);
    }

    #[test]
    fn fit_is_unique_across_starts(
        set in model(),
        raw in proptest::collection::vec(0u8..8, 1..12),
        init in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let t = interior_target(&set, &raw);
        let from_zero = fit_mle(&t, &set, &FitConfig::default()).unwrap();
        let cfg = FitConfig { init: Some(theta(&init, set.dim())), ..FitConfig::default() };
        let from_random = fit_mle(&t, &set, &cfg).unwrap();
        for (a, b) in from_zero.theta_hat.iter().zip(from_random.theta_hat.iter()) {
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn gradient_agrees_with_central_differences(
        set in model(),
        raw in proptest::collection::vec(0u8..8, 1..12),
        th in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let t = interior_target(&set, &raw);
        let th = theta(&th, set.dim());
        let g = gradient(&th, &t, &set).unwrap();
        let h = 1e-5;
        for i in 0..set.dim() {
            let mut plus = th.clone();
            let mut minus = th.clone();
            plus.0[i] += h;
            minus.0[i] -= h;
            let fd = (log_likelihood(&plus, &t, &set).unwrap()
                - log_likelihood(&minus, &t, &set).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{} vs {}", fd, g[i]);
        }
    }

    #[test]
    fn hessian_is_negative_semidefinite_with_vperp_kernel(
        set in model(),
        th in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let h = hessian(&theta(&th, set.dim()), &set).unwrap();
        let norm = h.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(max_eigenvalue(&h) <= 1e-12 * norm.max(1.0));
        for u in affine_geometry(&set).unwrap().vperp_basis {
            let u = u.to_f64();
            let hu: Vec<f64> = h.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect();
            let hu_norm = hu.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u_norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(hu_norm <= 1e-10 * norm * u_norm);
        }
    }

    #[test]
    fn likelihood_of_a_realizable_point_is_a_log_probability(
        set in model(),
        index in 0usize..64,
        th in proptest::collection::vec(-3.0f64..3.0, 3),
    ) {
        let i = index % set.len();
        let ell = log_likelihood(&theta(&th, set.dim()), &set.points[i], &set).unwrap();
        let bound = -(set.multiplicities[i] as f64).ln();
        prop_assert!(ell <= bound + 1e-12 * bound.abs().max(1.0));
    }

    #[test]
    fn shifted_point_outside_hull_degenerates(
        set in model(),
        index in 0usize..64,
        dir in proptest::collection::vec(-3i64..=3, 3),
        step in 1i64..4,
    ) {
        let dir: Vec<i64> = dir.iter().cycle().take(set.dim()).copied().collect();
        prop_assume!(dir.iter().any(|&d| d != 0));
        let direction = RationalVector::from_integers(&dir);
        // Move from the face maximizing `direction` further along it.
        let face = argmax_face(&direction, &set).unwrap();
        let base = &set.points[face[index % face.len()]];
        let t = RationalVector(
            base.iter().zip(&dir).map(|(b, d)| b + int(d * step) * ratio(1, 2)).collect(),
        );
        let cert = rint_membership(&t, &set).unwrap();
        prop_assert!(cert.verdict.is_outside());

        let rep = degeneracy(&t, &set, Some(&[0.0])).unwrap();
        let gap = rep.second_best_gap.clone().unwrap_or_else(|| int(1));
        let eps = rep.margin.clone();
        prop_assert!(eps.is_positive());
        // Off-face multiplicity can outweigh the face by up to |G_k|, so the
        // gap must overcome ln|G_k| before the face mass saturates.
        let ln_total = (set.total as f64).ln();
        let r_max = ((10.0 + ln_total) / to_f64(&gap)).max(21.0 / to_f64(&eps)).max(1.0);
        let schedule: Vec<f64> = (0..=8).map(|i| r_max * i as f64 / 8.0).collect();
        let rep = degeneracy_trajectory(&t, &set, &rep.direction, &eps, Some(&schedule)).unwrap();
        let rows = &rep.rows;
        for w in rows.windows(2) {
            prop_assert!(w[1].mass_on_face >= w[0].mass_on_face);
        }
        let last = rows.last().unwrap();
        prop_assert!(last.mass_on_face > 0.999);
        prop_assert!(last.ell > rows[0].ell + 20.0);
        prop_assert!(rows.iter().all(|r| r.bound_holds && r.mass_on_face > 0.0 && r.mass_on_face <= 1.0));
        for &i in &rep.face_indices {
            let value = rep.direction.dot(&set.points[i]);
            prop_assert!(set.points.iter().all(|p| rep.direction.dot(p) <= value));
        }
    }

    #[test]
    fn membership_certificates_are_sound(
        set in model(),
        coords in proptest::collection::vec((-4i64..=40, 1i64..=4), 3),
    ) {
        let t = RationalVector(coords.iter().cycle().take(set.dim()).map(|&(n, d)| ratio(n, d)).collect());
        let cert = rint_membership(&t, &set).unwrap();
        cert.verify(&t, &set.points).unwrap();
        match cert.verdict {
            Verdict::RelativeInterior => prop_assert!(cert.min_weight.unwrap().is_positive()),
            Verdict::RelativeBoundary => prop_assert!(cert.min_weight.unwrap().is_zero()),
            _ => prop_assert!(cert.margin.unwrap().is_positive()),
        }
    }
}

fn to_f64(r: &Rational) -> f64 {
    ergm_exact::rational::to_f64(r)
}
