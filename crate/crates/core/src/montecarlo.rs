//! Replication harness: simulate, derive the observed view, evaluate.
//!
//! Replication `r` of a scenario with seed `s` runs the DGP with seed
//! `split_seed(s, r)`. Replications run on the rayon pool and come back in
//! index order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::dgp::{simulate_population, split_seed, ScenarioConfig};
use crate::error::Result;
use crate::potential_outcomes::{derive_all, ObservedRecord, PotentialParticipant};
use crate::scalar::Real;

/// Scenario of replication `rep`.
pub fn replication_config(cfg: &ScenarioConfig, rep: u64) -> ScenarioConfig {
    cfg.with_seed(split_seed(cfg.seed, rep))
}

/// Runs `f` on `reps` independent replications of `cfg`.
pub fn replicate<T, R, F>(cfg: &ScenarioConfig, reps: usize, f: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(u64, &[PotentialParticipant<T>], &[ObservedRecord<T>]) -> R + Sync,
{
    cfg.validate()?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let pop = simulate_population::<T>(&replication_config(cfg, rep))?;
            let records = derive_all(&pop);
            Ok(f(rep, &pop, &records))
        })
        .collect()
}

/// Estimator-versus-oracle summary across replications.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSummary {
    pub reps: usize,
    /// Replications without an estimate.
    pub failures: usize,
    pub mean: f64,
    /// Standard error of `mean`: replication standard deviation over `sqrt(reps)`.
    pub mc_se: f64,
    /// Mean oracle value over the replications used.
    pub oracle: f64,
    pub gap: f64,
    /// Standard error of `gap`, from the paired estimate-minus-oracle differences.
    pub gap_se: f64,
}

impl GapSummary {
    /// Summarizes `(estimate, oracle)` pairs; `None` marks a failed replication.
    pub fn from_pairs(pairs: &[Option<(f64, f64)>]) -> Self {
        let ok: Vec<(f64, f64)> = pairs.iter().flatten().copied().collect();
        let m = ok.len();
        let sd_mean = |xs: &[f64]| -> (f64, f64) {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            if xs.len() < 2 {
                return (mean, 0.0);
            }
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            (mean, (var / xs.len() as f64).sqrt())
        };
        if m == 0 {
            return GapSummary {
                reps: pairs.len(),
                failures: pairs.len(),
                mean: f64::NAN,
                mc_se: f64::NAN,
                oracle: f64::NAN,
                gap: f64::NAN,
                gap_se: f64::NAN,
            };
        }
        let points: Vec<f64> = ok.iter().map(|p| p.0).collect();
        let oracles: Vec<f64> = ok.iter().map(|p| p.1).collect();
        let gaps: Vec<f64> = ok.iter().map(|p| p.0 - p.1).collect();
        let (mean, mc_se) = sd_mean(&points);
        let (gap, gap_se) = sd_mean(&gaps);
        GapSummary {
            reps: pairs.len(),
            failures: pairs.len() - m,
            mean,
            mc_se,
            oracle: sd_mean(&oracles).0,
            gap,
            gap_se,
        }
    }

    /// `|gap| <= 3 gap_se`.
    pub fn within_3se(&self) -> bool {
        self.gap.abs() <= 3.0 * self.gap_se
    }

    pub fn failure_rate(&self) -> f64 {
        if self.reps == 0 {
            0.0
        } else {
            self.failures as f64 / self.reps as f64
        }
    }
}
