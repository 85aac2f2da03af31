use std::f64::consts::PI;

use hybridsim::algorithms::{build_rwpe, RwpeConstants, RwpeParams};
use hybridsim::bayes::{
    log_likelihood, mmse_estimate, posterior, refit, Datum, EvidenceRecord, PosteriorGrid, RefitConfig,
};
use hybridsim::sim::{ClassicalMode, ExecConfig, Executor};
use proptest::prelude::*;

fn datum() -> impl Strategy<Value = Datum> {
    (0.05f64..20.0, -PI..PI, any::<bool>()).prop_map(|(t, phi_inv, d)| Datum { t, phi_inv, d })
}

fn evidence(len: std::ops::Range<usize>) -> impl Strategy<Value = EvidenceRecord> {
    prop::collection::vec(datum(), len).prop_map(|v| EvidenceRecord::new(v).unwrap())
}

/// Direct product of the per-datum factors, normalized without logs.
fn brute_posterior(ev: &EvidenceRecord, nodes: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = nodes
        .iter()
        .map(|x| {
            ev.entries()
                .iter()
                .map(|e| {
                    let arg = (x * PI - e.phi_inv) * e.t / 2.0;
                    if e.d {
                        arg.sin() * arg.sin()
                    } else {
                        arg.cos() * arg.cos()
                    }
                })
                .product()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn posterior_matches_direct_product(ev in evidence(5..6)) {
        let prior = PosteriorGrid::uniform(101, -1.0, 1.0).unwrap();
        let post = posterior(&ev, &prior).unwrap();
        let expected = brute_posterior(&ev, prior.nodes());
        for (a, b) in post.weights().iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn posterior_is_a_distribution(ev in evidence(0..40), n in 2usize..400) {
        let post = posterior(&ev, &PosteriorGrid::uniform(n, -1.0, 1.0).unwrap());
        // long evidence can be contradictory everywhere on a coarse grid
        if let Ok(post) = post {
            prop_assert!(post.weights().iter().all(|w| *w >= 0.0));
            prop_assert!((post.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sequential_updates_match_batch(a in evidence(0..12), b in evidence(0..12)) {
        let prior = PosteriorGrid::uniform(501, -1.0, 1.0).unwrap();
        let batch = posterior(&a.concat(&b), &prior).unwrap();
        let seq = posterior(&b, &posterior(&a, &prior).unwrap()).unwrap();
        for (x, y) in batch.weights().iter().zip(seq.weights()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn likelihood_is_shift_covariant(ev in evidence(0..20), phi in -PI..PI, delta in -3.0f64..3.0) {
        let shifted = EvidenceRecord::new(
            ev.entries().iter().map(|e| Datum { phi_inv: e.phi_inv + delta, ..*e }).collect(),
        ).unwrap();
        let (a, b) = (log_likelihood(&ev, phi), log_likelihood(&shifted, phi + delta));
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn mmse_matches_weighted_sum(weights in prop::collection::vec(0.0f64..1.0, 2..300), lo in -2.0f64..0.0, width in 0.1f64..3.0) {
        prop_assume!(weights.iter().sum::<f64>() > 0.0);
        let grid = PosteriorGrid::uniform(weights.len(), lo, lo + width).unwrap().with_weights(weights.clone()).unwrap();
        let total: f64 = weights.iter().sum();
        let step = width / (weights.len() - 1) as f64;
        let expected: f64 = weights.iter().enumerate().map(|(i, w)| (lo + step * i as f64) * w / total).sum();
        prop_assert!((mmse_estimate(&grid) - expected).abs() <= 1e-12);
    }
}

#[test]
fn contradictory_evidence_stays_finite() {
    let d = |d| Datum { t: 1.0, phi_inv: 0.3, d };
    let ev = EvidenceRecord::new(vec![d(false), d(true), d(false), d(true)]).unwrap();
    let post = posterior(&ev, &PosteriorGrid::uniform(2001, -1.0, 1.0).unwrap()).unwrap();
    assert!(post.weights().iter().all(|w| w.is_finite()));
}

fn ideal_shots(shots: u64, seed: u64) -> Vec<hybridsim::sim::ShotRecord> {
    let p = build_rwpe(&RwpeParams::default()).unwrap();
    Executor::new(&p, &ExecConfig::new(ClassicalMode::ExactReal, seed, shots)).unwrap().run_shots().unwrap()
}

#[test]
fn pooled_noiseless_evidence_concentrates_on_true_phase() {
    let shots = ideal_shots(20, 12);
    let pooled = shots.iter().map(|s| EvidenceRecord::from_shot(s).unwrap()).reduce(|a, b| a.concat(&b)).unwrap();
    let post = posterior(&pooled, &PosteriorGrid::uniform(2001, -1.0, 1.0).unwrap()).unwrap();
    let phi = RwpeParams::default().eigenphase();
    assert!(post.mass_within(phi, 0.02) > 0.95, "{}", post.mass_within(phi, 0.02));
}

/// Walk in which every outcome is the more likely one for `phi`, in f64.
/// Returns the evidence and the final mean, both in units of pi.
fn perfect_walk(phi: f64, params: &RwpeParams) -> (EvidenceRecord, f64) {
    let k = RwpeConstants::default();
    let (mut mu, mut sigma) = (params.mu0, params.sigma0);
    let mut entries = Vec::new();
    for _ in 0..params.n_iter {
        let (phi_inv, t) = (mu - 0.5 * sigma, 1.0 / sigma);
        let pr0 = ((phi - phi_inv) * PI * t / 2.0).cos().powi(2);
        let d = pr0 < 0.5;
        entries.push(Datum { t, phi_inv: phi_inv * PI, d });
        mu += if d { -sigma * k.c_shift } else { sigma * k.c_shift };
        sigma *= k.c_shrink;
    }
    (EvidenceRecord::new(entries).unwrap(), mu)
}

#[test]
fn perfect_convergence_refit_matches_runtime_estimate() {
    let params = RwpeParams::default();
    let prior = PosteriorGrid::uniform(2001, -1.0, 1.0).unwrap();
    let mut converged = 0;
    for i in -18..=18 {
        let phi = i as f64 * 0.05;
        let (ev, mu) = perfect_walk(phi, &params);
        if (mu - phi).abs() > 0.005 {
            continue;
        }
        converged += 1;
        let post = posterior(&ev, &prior).unwrap();
        let est = mmse_estimate(&post);
        // a small alias mass far away pulls the mean, so bound it loosely
        assert!(post.mass_within(mu, 0.02) > 0.95, "mass {} near {mu}", post.mass_within(mu, 0.02));
        assert!((est - mu).abs() <= 0.02, "refit {est} vs walk {mu}");
    }
    assert!(converged >= 10, "{converged} converged walks");
}

#[test]
fn refit_beats_runtime_estimates_on_ideal_shots() {
    let shots = ideal_shots(300, 13);
    let config = RefitConfig { true_phi: Some(0.25), ..RefitConfig::default() };
    let summary = refit(&shots, &config).unwrap();
    assert!(summary.mse_refit.unwrap() <= summary.mse_raw.unwrap());
    assert!(summary.mse_pooled.unwrap() <= summary.mse_refit.unwrap());
}
