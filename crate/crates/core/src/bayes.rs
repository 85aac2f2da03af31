//! Offline Bayesian refitting of phase-estimation evidence on a fixed grid.
//!
//! Each recorded datum `(t, phi_inv, d)` contributes the factor
//! `cos^2((phi - phi_inv) t / 2)` for `d = 0` and `sin^2(...)` for `d = 1`.
//! Evidence is held in radians; grid nodes are in units of pi.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{Scalar, ShotRecord};

/// Per-factor floor on the log-likelihood, close to the smallest positive double's log.
pub const LOG_FLOOR: f64 = -745.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("evolution time {t} of datum {index} is not positive")]
    NonPositiveTime { index: usize, t: f64 },
    #[error("datum {index} holds its evolution time in a wrapping Q2.16 register; refit needs exact-real evidence")]
    WrappedTime { index: usize },
    #[error("shot {0} carries no evidence")]
    EmptyEvidence(u64),
    #[error("posterior underflowed to zero everywhere")]
    DegeneratePosterior,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("no shots to refit")]
    NoShots,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Datum {
    pub t: f64,
    /// Radians.
    pub phi_inv: f64,
    pub d: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvidenceRecord {
    entries: Vec<Datum>,
}

impl EvidenceRecord {
    pub fn new(entries: Vec<Datum>) -> Result<Self, BayesError> {
        if let Some((index, e)) = entries.iter().enumerate().find(|(_, e)| e.t.is_nan() || e.t <= 0.0) {
            return Err(BayesError::NonPositiveTime { index, t: e.t });
        }
        Ok(EvidenceRecord { entries })
    }

    /// Reads a shot's evidence, converting `phi_inv` from units of pi to radians.
    /// Fixed-point times are rejected: the register keeps `t` only modulo 4.
    pub fn from_shot(shot: &ShotRecord) -> Result<Self, BayesError> {
        if let Some(index) = shot.evidence.iter().position(|e| matches!(e.t, Scalar::Fixed { .. })) {
            return Err(BayesError::WrappedTime { index });
        }
        EvidenceRecord::new(
            shot.evidence
                .iter()
                .map(|e| Datum { t: e.t.as_f64(), phi_inv: e.phi_inv.as_f64() * PI, d: e.d != 0 })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Datum] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn concat(&self, other: &EvidenceRecord) -> EvidenceRecord {
        EvidenceRecord { entries: self.entries.iter().chain(&other.entries).copied().collect() }
    }
}

/// Log-likelihood of `phi` (radians), floored per factor.
pub fn log_likelihood(ev: &EvidenceRecord, phi: f64) -> f64 {
    ev.entries
        .iter()
        .map(|e| {
            let x = (phi - e.phi_inv) * e.t / 2.0;
            let f = if e.d { x.sin().powi(2) } else { x.cos().powi(2) };
            f.ln().max(LOG_FLOOR)
        })
        .sum()
}

/// Discrete distribution over equally spaced nodes (units of pi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PosteriorGrid {
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self, BayesError> {
        if n < 2 {
            return Err(BayesError::BadGrid(format!("{n} nodes; need at least 2")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(BayesError::BadGrid(format!("interval [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let nodes = (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect();
        Ok(PosteriorGrid { nodes, weights: vec![1.0 / n as f64; n] })
    }

    /// Same nodes, new weights normalized to sum to 1.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self, BayesError> {
        if weights.len() != self.nodes.len() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(BayesError::BadGrid("weights must be finite, nonnegative and match the nodes".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(BayesError::DegeneratePosterior);
        }
        Ok(PosteriorGrid { nodes: self.nodes.clone(), weights: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mass on nodes within `radius` of `center`.
    pub fn mass_within(&self, center: f64, radius: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).filter(|(x, _)| (*x - center).abs() <= radius).map(|(_, w)| w).sum()
    }
}

/// Bayes update of `prior` by `ev`, evaluated in log space.
pub fn posterior(ev: &EvidenceRecord, prior: &PosteriorGrid) -> Result<PosteriorGrid, BayesError> {
    let log_w: Vec<f64> = log_likelihoods(ev, prior).iter().zip(&prior.weights).map(|(l, w)| l + w.ln()).collect();
    normalize_log(prior, &log_w)
}

/// Posterior mean, units of pi.
pub fn mmse_estimate(post: &PosteriorGrid) -> f64 {
    post.nodes.iter().zip(&post.weights).map(|(x, w)| x * w).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefitConfig {
    pub grid_size: usize,
    /// Prior support, units of pi.
    pub interval: (f64, f64),
    /// Known eigenphase (units of pi) for error statistics.
    pub true_phi: Option<f64>,
}

impl Default for RefitConfig {
    fn default() -> Self {
        RefitConfig { grid_size: 2001, interval: (-1.0, 1.0), true_phi: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub shot: u64,
    /// Run-time estimate `mu`, when the shot output one.
    pub raw: Option<f64>,
    pub refit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitSummary {
    pub config: RefitConfig,
    pub shots: Vec<ShotEstimate>,
    /// MMSE estimate from all shots' evidence combined.
    pub pooled: f64,
    pub mean_refit: f64,
    pub mean_raw: Option<f64>,
    pub mse_refit: Option<f64>,
    pub mse_raw: Option<f64>,
    pub mse_pooled: Option<f64>,
}

impl RefitSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("shot,raw,refit\n");
        for s in &self.shots {
            let raw = s.raw.map(|r| r.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", s.shot, raw, s.refit));
        }
        out
    }
}

/// Log-likelihood at every grid node (units of pi).
fn log_likelihoods(ev: &EvidenceRecord, grid: &PosteriorGrid) -> Vec<f64> {
    grid.nodes.iter().map(|x| log_likelihood(ev, x * PI)).collect()
}

fn normalize_log(grid: &PosteriorGrid, log_w: &[f64]) -> Result<PosteriorGrid, BayesError> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(BayesError::DegeneratePosterior);
    }
    grid.with_weights(log_w.iter().map(|l| (l - max).exp()).collect())
}

fn refit_one(shot: &ShotRecord, prior: &PosteriorGrid) -> Result<(ShotEstimate, Vec<f64>), BayesError> {
    if shot.evidence.is_empty() {
        return Err(BayesError::EmptyEvidence(shot.shot));
    }
    let ll = log_likelihoods(&EvidenceRecord::from_shot(shot)?, prior);
    let log_w: Vec<f64> = ll.iter().zip(&prior.weights).map(|(l, w)| l + w.ln()).collect();
    let post = normalize_log(prior, &log_w)?;
    let estimate =
        ShotEstimate { shot: shot.shot, raw: shot.output("mu").map(|v| v.as_f64()), refit: mmse_estimate(&post) };
    Ok((estimate, ll))
}

/// Per-shot MMSE refits plus a pooled estimate from all shots' evidence combined.
pub fn refit(shots: &[ShotRecord], config: &RefitConfig) -> Result<RefitSummary, BayesError> {
    if shots.is_empty() {
        return Err(BayesError::NoShots);
    }
    let prior = PosteriorGrid::uniform(config.grid_size, config.interval.0, config.interval.1)?;
    let fits = map_shots(shots, |s| refit_one(s, &prior));
    let mut estimates = Vec::with_capacity(shots.len());
    let mut pooled_log: Vec<f64> = prior.weights.iter().map(|w| w.ln()).collect();
    for fit in fits {
        let (estimate, ll) = fit?;
        estimates.push(estimate);
        for (acc, l) in pooled_log.iter_mut().zip(&ll) {
            *acc += l;
        }
    }
    let pooled = mmse_estimate(&normalize_log(&prior, &pooled_log)?);

    let n = estimates.len() as f64;
    let mean_refit = estimates.iter().map(|e| e.refit).sum::<f64>() / n;
    let raws: Option<Vec<f64>> = estimates.iter().map(|e| e.raw).collect();
    let mean_raw = raws.as_ref().map(|r| r.iter().sum::<f64>() / n);
    let mse = |xs: &mut dyn Iterator<Item = f64>, phi: f64| xs.map(|x| (x - phi).powi(2)).sum::<f64>() / n;
    let (mse_refit, mse_raw, mse_pooled) = match config.true_phi {
        Some(phi) => (
            Some(mse(&mut estimates.iter().map(|e| e.refit), phi)),
            raws.as_ref().map(|r| mse(&mut r.iter().copied(), phi)),
            Some((pooled - phi).powi(2)),
        ),
        None => (None, None, None),
    };
    Ok(RefitSummary { config: *config, shots: estimates, pooled, mean_refit, mean_raw, mse_refit, mse_raw, mse_pooled })
}

fn map_shots<T: Send>(shots: &[ShotRecord], f: impl Fn(&ShotRecord) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        shots.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        shots.iter().map(f).collect()
    }
}
