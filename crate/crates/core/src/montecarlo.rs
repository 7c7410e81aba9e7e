//! Monte Carlo play of the signaling game with type drift.
//!
//! Each trial draws State A's type from the prior, plays the given profile's
//! signal and fight rule, and, if B waits, lets a restrained type drift to
//! aggressive with probability `p` before the t2 choice.
//!
//! Every trial owns a ChaCha stream selected by its index, so results do not
//! depend on thread count or scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::TOL;
use crate::error::{Error, Result};
use crate::game::{
    payoff_unchecked, validate_signal, MechanismSpec, ModelParams, Outcome, TypeLabel,
};
use crate::numeric::pairwise_sum;
use crate::oracle::{StrategyProfile, T2Action};

/// How the t2 action is chosen once drift has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftMode {
    /// Aggressive types (native or drifted) exploit, restrained types
    /// restrain. Reproduces the `-p·V_B` expectation directly.
    #[default]
    #[serde(rename = "literal")]
    Literal,
    /// Plays like `Literal` and also reports statistics conditioned
    /// on B's pre-drift posterior after the no-fight signals.
    PriorWeighted,
    /// The realised type plays its payoff-maximising t2 action at the signal
    /// it sent; ties go to restraint.
    BestResponse,
}

impl DriftMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftMode::Literal => "literal",
            DriftMode::PriorWeighted => "prior-weighted",
            DriftMode::BestResponse => "best-response",
        }
    }
}

impl std::str::FromStr for DriftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(DriftMode::Literal),
            "prior-weighted" => Ok(DriftMode::PriorWeighted),
            "best-response" => Ok(DriftMode::BestResponse),
            _ => Err(Error::validation(
                "drift mode in {literal, prior-weighted, best-response}",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: MechanismSpec,
    pub params: ModelParams,
    pub m: f64,
    /// Profile over the grid `{0, m}` (just `{0}` when `m = 0`).
    pub profile: StrategyProfile,
    #[serde(default)]
    pub drift_mode: DriftMode,
    pub n_trials: u64,
    pub seed: u64,
    /// Accept a prior of exactly 0 or 1. Test-only escape hatch.
    #[serde(default)]
    pub allow_degenerate_prior: bool,
}

impl SimConfig {
    /// Pooling on restraint at `m`, literal drift mode.
    pub fn pooling(
        spec: MechanismSpec,
        params: ModelParams,
        m: f64,
        n_trials: u64,
        seed: u64,
    ) -> Self {
        let n_messages = if m == 0.0 { 1 } else { 2 };
        SimConfig {
            spec,
            params,
            m,
            profile: StrategyProfile::pooling_on_restraint(n_messages, n_messages - 1),
            drift_mode: DriftMode::default(),
            n_trials,
            seed,
            allow_degenerate_prior: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.allow_degenerate_prior {
            self.params.validate_allowing_degenerate_prior()?;
        } else {
            self.params.validate()?;
        }
        validate_signal(self.m)?;
        if self.n_trials < 1 {
            return Err(Error::validation("n_trials >= 1"));
        }
        self.profile.validate_for(self.messages().len())
    }

    fn messages(&self) -> Vec<f64> {
        if self.m == 0.0 {
            vec![0.0]
        } else {
            vec![0.0, self.m]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub preventive_conflict: u64,
    pub exploit: u64,
    pub restraint: u64,
}

impl OutcomeCounts {
    pub fn get(&self, outcome: Outcome) -> u64 {
        match outcome {
            Outcome::PreventiveConflict => self.preventive_conflict,
            Outcome::Exploit => self.exploit,
            Outcome::Restraint => self.restraint,
        }
    }

    fn bump(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::PreventiveConflict => self.preventive_conflict += 1,
            Outcome::Exploit => self.exploit += 1,
            Outcome::Restraint => self.restraint += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.preventive_conflict + self.exploit + self.restraint
    }
}

/// Extra statistics reported in [`DriftMode::PriorWeighted`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorWeightedStats {
    /// B's Bayes posterior that A is restrained, given that A sent a signal
    /// after which B waits, before drift.
    pub no_fight_posterior: f64,
    /// `(1 - q) + q·p`: exploitation probability once B waits.
    pub predicted_exploit_rate: f64,
    /// `-V_B` times the predicted exploit rate.
    pub predicted_u_b_given_no_fight: f64,
    /// Whether waiting beats fighting under that prediction.
    pub b_refrains: bool,
    pub no_fight_trials: u64,
    pub empirical_exploit_rate_given_no_fight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub drift_mode: DriftMode,
    pub n_trials: u64,
    pub outcome_counts: OutcomeCounts,
    pub mean_u_a: f64,
    pub mean_u_b: f64,
    /// Sample standard deviation of `u_B` over `sqrt(n_trials)`.
    pub standard_error_u_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_weighted: Option<PriorWeightedStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub theta_initial: TypeLabel,
    pub theta_final: TypeLabel,
    pub message: f64,
    pub fought: bool,
    pub outcome: Outcome,
    #[serde(rename = "u_A")]
    pub u_a: f64,
    #[serde(rename = "u_B")]
    pub u_b: f64,
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    simulate_with_trials(config).map(|(result, _)| result)
}

/// Runs the simulation and also returns every trial, in trial order.
pub fn simulate_with_trials(config: &SimConfig) -> Result<(SimResult, Vec<TrialRecord>)> {
    config.validate()?;
    let messages = config.messages();
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let trials: Vec<TrialRecord> = (0..config.n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = base.clone();
            rng.set_stream(trial);
            play(config, &messages, trial, &mut rng)
        })
        .collect();

    let mut outcome_counts = OutcomeCounts::default();
    for t in &trials {
        outcome_counts.bump(t.outcome);
    }
    let n = trials.len() as f64;
    let u_a: Vec<f64> = trials.iter().map(|t| t.u_a).collect();
    let u_b: Vec<f64> = trials.iter().map(|t| t.u_b).collect();
    let mean_u_a = pairwise_sum(&u_a) / n;
    let mean_u_b = pairwise_sum(&u_b) / n;
    let standard_error_u_b = if trials.len() > 1 {
        let squares: Vec<f64> = u_b.iter().map(|x| (x - mean_u_b).powi(2)).collect();
        (pairwise_sum(&squares) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    let prior_weighted = match config.drift_mode {
        DriftMode::PriorWeighted => prior_weighted_stats(config, &trials),
        _ => None,
    };
    let result = SimResult {
        drift_mode: config.drift_mode,
        n_trials: config.n_trials,
        outcome_counts,
        mean_u_a,
        mean_u_b,
        standard_error_u_b,
        prior_weighted,
    };
    Ok((result, trials))
}

fn play(config: &SimConfig, messages: &[f64], trial: u64, rng: &mut ChaCha8Rng) -> TrialRecord {
    let u_type: f64 = rng.random();
    let u_drift: f64 = rng.random();
    let params = &config.params;
    let theta_initial = if u_type < params.prior {
        TypeLabel::Restrained
    } else {
        TypeLabel::Aggressive
    };
    let sent = config.profile.signal_of[theta_initial];
    let m = messages[sent];
    let fought = config.profile.fight_after[sent];

    let (theta_final, outcome) = if fought {
        (theta_initial, Outcome::PreventiveConflict)
    } else {
        let theta_final = if theta_initial == TypeLabel::Restrained && u_drift < params.p {
            TypeLabel::Aggressive
        } else {
            theta_initial
        };
        let action = match config.drift_mode {
            DriftMode::Literal | DriftMode::PriorWeighted => match theta_final {
                TypeLabel::Aggressive => T2Action::Exploit,
                TypeLabel::Restrained => T2Action::Restraint,
            },
            DriftMode::BestResponse => {
                let exploit =
                    payoff_unchecked(config.spec, params, theta_final, Outcome::Exploit, m);
                let restrain =
                    payoff_unchecked(config.spec, params, theta_final, Outcome::Restraint, m);
                if exploit.u_a > restrain.u_a + TOL {
                    T2Action::Exploit
                } else {
                    T2Action::Restraint
                }
            }
        };
        (theta_final, action.outcome())
    };
    let pay = payoff_unchecked(config.spec, params, theta_final, outcome, m);
    TrialRecord {
        trial,
        theta_initial,
        theta_final,
        message: m,
        fought,
        outcome,
        u_a: pay.u_a,
        u_b: pay.u_b,
    }
}

fn prior_weighted_stats(config: &SimConfig, trials: &[TrialRecord]) -> Option<PriorWeightedStats> {
    let profile = &config.profile;
    let waits = |theta: TypeLabel| !profile.fight_after[profile.signal_of[theta]];
    let prior = config.params.prior;
    let mass_r = if waits(TypeLabel::Restrained) {
        prior
    } else {
        0.0
    };
    let mass_a = if waits(TypeLabel::Aggressive) {
        1.0 - prior
    } else {
        0.0
    };
    if mass_r + mass_a == 0.0 {
        return None;
    }
    let q = mass_r / (mass_r + mass_a);
    let predicted_exploit_rate = (1.0 - q) + q * config.params.p;
    let predicted_u_b_given_no_fight = -config.params.v_b * predicted_exploit_rate;

    let no_fight: Vec<&TrialRecord> = trials.iter().filter(|t| !t.fought).collect();
    let exploited = no_fight
        .iter()
        .filter(|t| t.outcome == Outcome::Exploit)
        .count();
    Some(PriorWeightedStats {
        no_fight_posterior: q,
        predicted_exploit_rate,
        predicted_u_b_given_no_fight,
        b_refrains: predicted_u_b_given_no_fight >= -config.params.c - TOL,
        no_fight_trials: no_fight.len() as u64,
        empirical_exploit_rate_given_no_fight: if no_fight.is_empty() {
            0.0
        } else {
            exploited as f64 / no_fight.len() as f64
        },
    })
}

/// Per-trial CSV: `trial,theta_initial,theta_final,message,fought,outcome,u_A,u_B`.
pub fn write_trials_csv<W: Write>(trials: &[TrialRecord], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for t in trials {
        writer.serialize(t)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Mechanism, Variant};

    fn th_base() -> MechanismSpec {
        MechanismSpec::new(Mechanism::TyingHands, Variant::Base)
    }

    #[test]
    fn no_drift_means_no_exploit() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_prior(0.3);
        for mode in [
            DriftMode::Literal,
            DriftMode::PriorWeighted,
            DriftMode::BestResponse,
        ] {
            let mut config = SimConfig::pooling(th_base(), params, 2.0, 5_000, 11);
            config.drift_mode = mode;
            if mode != DriftMode::BestResponse {
                // Literal play makes native aggressive types exploit, so run
                // it on an all-restrained population.
                config.params = config.params.with_prior(1.0);
                config.allow_degenerate_prior = true;
            }
            let result = simulate(&config).unwrap();
            assert_eq!(result.outcome_counts.restraint, 5_000, "{mode:?}");
            assert_eq!(result.mean_u_b, 0.0);
            assert_eq!(result.standard_error_u_b, 0.0);
        }
    }

    #[test]
    fn best_response_never_exploits_above_gain() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_p(0.5);
        let mut config = SimConfig::pooling(th_base(), params, 2.0, 20_000, 5);
        config.drift_mode = DriftMode::BestResponse;
        let result = simulate(&config).unwrap();
        assert_eq!(result.outcome_counts.exploit, 0);
        assert_eq!(result.outcome_counts.total(), 20_000);
    }

    #[test]
    fn degenerate_prior_needs_override() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_prior(1.0).with_p(0.25);
        let mut config = SimConfig::pooling(th_base(), params, 2.0, 10, 1);
        assert!(simulate(&config).is_err());
        config.allow_degenerate_prior = true;
        assert!(simulate(&config).is_ok());
    }

    #[test]
    fn rejects_zero_trials_and_bad_profile() {
        let params = ModelParams::new(0.5, 1.0, 2.0);
        let mut config = SimConfig::pooling(th_base(), params, 2.0, 0, 1);
        assert!(simulate(&config).is_err());
        config.n_trials = 1;
        config.profile = StrategyProfile::pooling_on_restraint(3, 2);
        assert!(simulate(&config).is_err());
    }

    #[test]
    fn reproducible_and_thread_count_independent() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_p(0.3);
        let config = SimConfig::pooling(th_base(), params, 2.0, 50_000, 99);
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| simulate(&config)).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.mean_u_b.to_bits(), c.mean_u_b.to_bits());
    }

    #[test]
    fn prior_weighted_reports_conditional_rates() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_p(0.2).with_prior(0.8);
        let mut config = SimConfig::pooling(th_base(), params, 2.0, 200_000, 3);
        config.drift_mode = DriftMode::PriorWeighted;
        let result = simulate(&config).unwrap();
        let stats = result.prior_weighted.unwrap();
        assert_eq!(stats.no_fight_posterior, 0.8);
        let expected = 0.2 + 0.8 * 0.2;
        assert!((stats.predicted_exploit_rate - expected).abs() < 1e-12);
        assert!(!stats.b_refrains);
        let n = stats.no_fight_trials as f64;
        let se = (expected * (1.0 - expected) / n).sqrt();
        assert!((stats.empirical_exploit_rate_given_no_fight - expected).abs() < 4.0 * se);
    }

    #[test]
    fn trials_csv_columns() {
        let params = ModelParams::new(0.5, 1.0, 2.0);
        let config = SimConfig::pooling(th_base(), params, 2.0, 3, 1);
        let (_, trials) = simulate_with_trials(&config).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&trials, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "trial,theta_initial,theta_final,message,fought,outcome,u_A,u_B"
        );
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn drift_mode_names() {
        for mode in [
            DriftMode::Literal,
            DriftMode::PriorWeighted,
            DriftMode::BestResponse,
        ] {
            assert_eq!(mode.as_str().parse::<DriftMode>().unwrap(), mode);
            assert_eq!(
                serde_json::to_string(&mode).unwrap(),
                format!("\"{}\"", mode.as_str())
            );
        }
    }
}
