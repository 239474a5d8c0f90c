//! Seed-driven data-generating processes for the latent potential-outcome
//! table.
//!
//! Endpoints follow a linear structural model
//!
//! ```text
//! y_t(x) = alpha_t + tau_t * x + gamma . c + w * V + eps_t + x * eta  [+ delta_m * M(x) at t2]
//! ```
//!
//! clamped to the 0-10 disability scale. `eps_1`, `eps_2` are jointly normal
//! with standard deviation `sigma` and correlation `rho`, `eta` is individual
//! effect heterogeneity and `V` an unobserved trait that only matters when
//! `tol_unobserved = w` is non-zero. Intercurrent events come from logistic
//! links on `(1, x, c)`.

mod config;
mod seed;

pub use config::{Design, ScenarioConfig};
pub use seed::{split_seed, stream_rng, Stream, BOOTSTRAP_STREAM, IMPUTATION_STREAM};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::potential_outcomes::{DeathTime, PotentialParticipant};
use crate::scalar::{lit, logistic, Real};

/// Lower and upper bound of the endpoint scale.
pub const ENDPOINT_SCALE: (f64, f64) = (0.0, 10.0);

fn clamp_scale(y: f64) -> f64 {
    y.clamp(ENDPOINT_SCALE.0, ENDPOINT_SCALE.1)
}

/// `beta . (1, x, c)` for a coefficient vector laid out as `[intercept, arm, c..]`.
fn linear_predictor(beta: &[f64], x: bool, c: &[f64]) -> f64 {
    let arm = if x { beta[1] } else { 0.0 };
    beta[0] + arm + beta[2..].iter().zip(c).map(|(b, v)| b * v).sum::<f64>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

struct Streams {
    confounders: ChaCha8Rng,
    assignment: ChaCha8Rng,
    residuals: ChaCha8Rng,
    therapy: ChaCha8Rng,
    death: ChaCha8Rng,
    tolerability: ChaCha8Rng,
    withdrawal: ChaCha8Rng,
    deviation: ChaCha8Rng,
    dosing: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Streams {
            confounders: Stream::Confounders.rng(seed),
            assignment: Stream::Assignment.rng(seed),
            residuals: Stream::Residuals.rng(seed),
            therapy: Stream::Therapy.rng(seed),
            death: Stream::Death.rng(seed),
            tolerability: Stream::Tolerability.rng(seed),
            withdrawal: Stream::Withdrawal.rng(seed),
            deviation: Stream::Deviation.rng(seed),
            dosing: Stream::Dosing.rng(seed),
        }
    }
}

/// Generates `cfg.n` participants.
///
/// Every stream consumes the same number of draws per participant whatever
/// the parameter values, so two configs that differ only in, say, the death
/// mechanism share every other draw (common random numbers).
pub fn simulate_population<T: Real>(cfg: &ScenarioConfig) -> Result<Vec<PotentialParticipant<T>>> {
    cfg.validate()?;
    let mut st = Streams::new(cfg.seed);
    let w = cfg.tol_unobserved;
    let rho_c = (1.0 - cfg.rho * cfg.rho).max(0.0).sqrt();
    let mut pop = Vec::with_capacity(cfg.n);

    for i in 0..cfg.n {
        let c: Vec<f64> = (0..cfg.k).map(|_| normal(&mut st.confounders)).collect();

        let u_assign: f64 = st.assignment.random();
        let p_assign = match cfg.design {
            Design::Randomized => 0.5,
            Design::Observational => logistic(dot(&cfg.lambda, &c)),
        };
        let r = u_assign < p_assign;

        let (e1, e2, e_eta, v) = (
            normal(&mut st.residuals),
            normal(&mut st.residuals),
            normal(&mut st.residuals),
            normal(&mut st.residuals),
        );
        let eps1 = cfg.sigma * e1;
        let eps2 = cfg.sigma * (cfg.rho * e1 + rho_c * e2);
        let eta = cfg.sigma_effect * e_eta;
        let shared = dot(&cfg.gamma, &c) + w * v;
        let raw = |alpha: f64, tau: f64, eps: f64, x: bool| {
            let xf = if x { 1.0 } else { 0.0 };
            alpha + tau * xf + shared + eps + xf * eta
        };

        let u_m: f64 = st.therapy.random();
        let m_under = [false, true].map(|x| {
            cfg.m_logit
                .as_deref()
                .is_some_and(|b| u_m < logistic(linear_predictor(b, x, &c)))
        });

        let (u_die, u_early): (f64, f64) = (st.death.random(), st.death.random());
        let death_under = [false, true].map(|x| match cfg.death_logit.as_deref() {
            Some(b) if u_die < logistic(linear_predictor(b, x, &c)) => {
                if u_early < cfg.death_early_prob {
                    DeathTime::ByT2BeforeT1
                } else {
                    DeathTime::BetweenT1T2
                }
            }
            _ => DeathTime::None,
        });

        let (u_t0, u_t1): (f64, f64) = (st.tolerability.random(), st.tolerability.random());
        let t_under = match cfg.tol_logit.as_deref() {
            None => [true, true],
            Some(b) => {
                let p = [false, true].map(|x| logistic(linear_predictor(b, x, &c) + w * v));
                if cfg.monotone_tolerability {
                    // One latent draw; tolerating the experimental treatment
                    // implies tolerating control.
                    [u_t0 < p[0].max(p[1]), u_t0 < p[1]]
                } else {
                    [u_t0 < p[0], u_t1 < p[1]]
                }
            }
        };

        let u_w: f64 = st.withdrawal.random();
        let withdraw_under = t_under.map(|t| !t && u_w < cfg.withdraw_prob);

        let u_dev: f64 = st.deviation.random();
        let deviation_under = [false, true].map(|x| {
            cfg.deviation_mechanism.as_deref().is_some_and(|b| {
                let m = if m_under[usize::from(x)] { b[b.len() - 1] } else { 0.0 };
                u_dev < logistic(linear_predictor(&b[..b.len() - 1], x, &c) + m)
            })
        });

        let u_dose: f64 = st.dosing.random();
        let dosed = u_dose >= cfg.undosed_prob;

        let y1 = [false, true].map(|x| clamp_scale(raw(cfg.alpha1, cfg.tau1, eps1, x)));
        let y2_raw = [false, true].map(|x| raw(cfg.alpha2, cfg.tau2, eps2, x));
        let y2_free = y2_raw.map(clamp_scale);
        let y2_under = [0, 1].map(|j| {
            if m_under[j] {
                clamp_scale(y2_raw[j] + cfg.delta_m)
            } else {
                y2_free[j]
            }
        });

        pop.push(PotentialParticipant {
            id: i + 1,
            c: c.into_iter().map(lit).collect(),
            s: true,
            r,
            x_under: [false, true],
            y1_under: y1.map(lit),
            y2_under: y2_under.map(lit),
            y2_free: y2_free.map(lit),
            m_under,
            death_under,
            t_under,
            withdraw_under,
            deviation_under,
            dosed,
        });
    }
    Ok(pop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential_outcomes::{derive_observed, individual_effect, stratum_of, Assessment, PrincipalStratum};

    fn base(n: usize) -> ScenarioConfig {
        ScenarioConfig { n, ..ScenarioConfig::default() }
    }

    #[test]
    fn null_model_has_zero_effects() {
        let cfg = ScenarioConfig { tau2: 0.0, sigma: 0.0, gamma: vec![0.0, 0.0], ..base(200) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        assert!(pop.iter().all(|p| individual_effect(p, Assessment::T2) == 0.0));
    }

    #[test]
    fn deterministic_effect_without_noise() {
        let cfg = ScenarioConfig { tau2: 2.0, sigma: 0.0, gamma: vec![0.0, 0.0], ..base(200) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        assert!(pop.iter().all(|p| individual_effect(p, Assessment::T2) == 2.0));
    }

    #[test]
    fn same_config_reproduces_bit_identical_output() {
        let mut cfg = base(300);
        cfg.m_logit = Some(vec![-1.0, 0.5, 0.2, 0.2]);
        cfg.tol_logit = Some(vec![1.0, -0.5, 0.3, 0.0]);
        cfg.withdraw_prob = 0.7;
        let a = simulate_population::<f64>(&cfg).unwrap();
        let b = simulate_population::<f64>(&cfg).unwrap();
        assert_eq!(a, b);
        let other = simulate_population::<f64>(&cfg.with_seed(43)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn f32_and_f64_share_streams() {
        let cfg = base(50);
        let a = simulate_population::<f64>(&cfg).unwrap();
        let b = simulate_population::<f32>(&cfg).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.r, q.r);
            assert_eq!(p.y2_under[1] as f32, q.y2_under[1]);
        }
    }

    #[test]
    fn endpoints_stay_on_scale() {
        let cfg = ScenarioConfig { sigma: 4.0, delta_m: 6.0, m_logit: Some(vec![0.0; 4]), ..base(2000) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        for p in &pop {
            for y in p.y1_under.iter().chain(&p.y2_under).chain(&p.y2_free) {
                assert!((0.0..=10.0).contains(y));
            }
        }
    }

    #[test]
    fn monotone_tolerability_leaves_p4_empty() {
        let mut cfg = base(5000);
        cfg.tol_logit = Some(vec![0.0, 1.5, 0.5, -0.5]);
        let pop = simulate_population::<f64>(&cfg).unwrap();
        assert_eq!(pop.iter().filter(|p| stratum_of(*p) == PrincipalStratum::P4).count(), 0);
        assert!(pop.iter().any(|p| stratum_of(p) == PrincipalStratum::P1));

        cfg.monotone_tolerability = false;
        let pop = simulate_population::<f64>(&cfg).unwrap();
        assert!(pop.iter().any(|p| stratum_of(p) == PrincipalStratum::P4));
    }

    #[test]
    fn withdrawal_only_for_intolerance() {
        let mut cfg = base(2000);
        cfg.tol_logit = Some(vec![0.0, -1.0, 0.0, 0.0]);
        cfg.withdraw_prob = 1.0;
        for p in simulate_population::<f64>(&cfg).unwrap() {
            assert_eq!(p.withdraw_under, [!p.t_under[0], !p.t_under[1]]);
        }
    }

    #[test]
    fn exclusion_restriction() {
        // Flip assignment but keep the treatment taken; the observed endpoint
        // must not move because assignment reaches it only through treatment.
        let pop = simulate_population::<f64>(&base(100)).unwrap();
        for p in pop {
            let mut q = p.clone();
            q.r = !p.r;
            let x = p.x_taken();
            q.x_under = [x, x];
            let (a, b) = (derive_observed(&p), derive_observed(&q));
            assert_eq!(a.x_obs, b.x_obs);
            assert_eq!(a.y1_obs, b.y1_obs);
            assert_eq!(a.y2_obs, b.y2_obs);
        }
    }

    #[test]
    fn ice_mechanisms_share_structural_draws() {
        let plain = base(500);
        let mut busy = plain.clone();
        busy.m_logit = Some(vec![0.0, 1.0, 0.0, 0.0]);
        busy.death_logit = Some(vec![-1.0, 0.5, 0.0, 0.0]);
        busy.delta_m = 2.0;
        let a = simulate_population::<f64>(&plain).unwrap();
        let b = simulate_population::<f64>(&busy).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.c, q.c);
            assert_eq!(p.r, q.r);
            assert_eq!(p.y2_free, q.y2_free);
            assert_eq!(p.y1_under, q.y1_under);
        }
    }

    #[test]
    fn effect_mean_within_monte_carlo_error() {
        let cfg = ScenarioConfig { n: 100_000, tau2: 1.0, sigma: 1.0, sigma_effect: 1.0, ..base(1) };
        let pop = simulate_population::<f64>(&cfg).unwrap();
        let effects: Vec<f64> = pop.iter().map(|p| individual_effect(p, Assessment::T2)).collect();
        let m = crate::scalar::mean(&effects).unwrap();
        let se = (crate::scalar::sample_variance(&effects) / effects.len() as f64).sqrt();
        assert!((m - 1.0).abs() <= 3.0 * se, "mean {m}, se {se}");
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = ScenarioConfig { tau1: f64::NAN, ..base(10) };
        assert!(simulate_population::<f64>(&cfg).is_err());
    }
}
