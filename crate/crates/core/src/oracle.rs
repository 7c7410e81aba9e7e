//! Brute-force weak perfect Bayesian equilibrium search on a finite signal
//! grid.
//!
//! A profile is a weak PBE when some belief assignment makes every choice
//! optimal: beliefs follow Bayes' rule on the equilibrium path and are free
//! off it, B best-responds to its belief after every signal, and each type of
//! A best-responds at t2 (in every cell, on or off path) and at t0. Ties admit
//! either action.
//!
//! B's expected payoff from waiting is affine in its belief, so the set of
//! beliefs supporting a given action after a signal is an interval. The
//! oracle computes it exactly instead of gridding beliefs.

use std::ops::{Index, IndexMut};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{pooling_exists, separating_exists, TOL};
use crate::error::{Error, Result};
use crate::game::{
    payoff_unchecked, validate_signal, MechanismSpec, ModelParams, Outcome, TypeLabel,
};

/// Default cap on the number of profiles `find_all_pbe` will enumerate.
pub const DEFAULT_PROFILE_BUDGET: u128 = 100_000_000;

/// One value per type of State A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PerType<T> {
    pub restrained: T,
    pub aggressive: T,
}

impl<T> PerType<T> {
    pub fn new(restrained: T, aggressive: T) -> Self {
        PerType {
            restrained,
            aggressive,
        }
    }

    pub fn splat(value: T) -> Self
    where
        T: Clone,
    {
        PerType::new(value.clone(), value)
    }
}

impl<T> Index<TypeLabel> for PerType<T> {
    type Output = T;

    fn index(&self, theta: TypeLabel) -> &T {
        match theta {
            TypeLabel::Restrained => &self.restrained,
            TypeLabel::Aggressive => &self.aggressive,
        }
    }
}

impl<T> IndexMut<TypeLabel> for PerType<T> {
    fn index_mut(&mut self, theta: TypeLabel) -> &mut T {
        match theta {
            TypeLabel::Restrained => &mut self.restrained,
            TypeLabel::Aggressive => &mut self.aggressive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T2Action {
    Exploit,
    Restraint,
}

impl T2Action {
    pub fn outcome(self) -> Outcome {
        match self {
            T2Action::Exploit => Outcome::Exploit,
            T2Action::Restraint => Outcome::Restraint,
        }
    }
}

/// A game with the signal restricted to a finite grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteGame {
    pub spec: MechanismSpec,
    pub params: ModelParams,
    /// Ascending, distinct, nonnegative, and containing `0`.
    pub messages: Vec<f64>,
}

impl DiscreteGame {
    pub fn new(spec: MechanismSpec, params: ModelParams, messages: Vec<f64>) -> Result<Self> {
        let game = DiscreteGame {
            spec,
            params,
            messages,
        };
        game.validate()?;
        Ok(game)
    }

    /// The two-signal game `{0, m}` used to check a closed-form verdict at
    /// `m`. Collapses to `{0}` when `m = 0`.
    pub fn two_point(spec: MechanismSpec, params: ModelParams, m: f64) -> Result<Self> {
        validate_signal(m)?;
        let messages = if m == 0.0 { vec![0.0] } else { vec![0.0, m] };
        DiscreteGame::new(spec, params, messages)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.messages.is_empty() {
            return Err(Error::validation("messages nonempty"));
        }
        for &m in &self.messages {
            validate_signal(m)?;
        }
        if self.messages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("messages ascending and distinct"));
        }
        if self.messages[0] != 0.0 {
            return Err(Error::validation("messages contain 0"));
        }
        Ok(())
    }

    pub fn index_of(&self, m: f64) -> Option<usize> {
        self.messages.iter().position(|&x| x == m)
    }

    /// `|M|² · 2^|M| · 4^|M|`: signal pairs × fight rules × t2 rules.
    pub fn profile_count(&self) -> u128 {
        let n = self.messages.len() as u32;
        let n2 = u128::from(n) * u128::from(n);
        // 2^n * 4^n = 8^n; saturate instead of overflowing on absurd grids.
        8u128
            .checked_pow(n)
            .and_then(|x| x.checked_mul(n2))
            .unwrap_or(u128::MAX)
    }
}

/// Pure strategies at every decision point. Signals are indices into the
/// game's message grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub signal_of: PerType<usize>,
    pub fight_after: Vec<bool>,
    pub t2_action: Vec<PerType<T2Action>>,
}

impl StrategyProfile {
    /// Both types send message `at`; B fights after every other message; both
    /// types restrain after `at` and, elsewhere, the restrained type restrains
    /// while the aggressive type exploits.
    pub fn pooling_on_restraint(n_messages: usize, at: usize) -> Self {
        StrategyProfile {
            signal_of: PerType::splat(at),
            fight_after: (0..n_messages).map(|j| j != at).collect(),
            t2_action: (0..n_messages)
                .map(|j| {
                    if j == at {
                        PerType::splat(T2Action::Restraint)
                    } else {
                        PerType::new(T2Action::Restraint, T2Action::Exploit)
                    }
                })
                .collect(),
        }
    }

    pub fn validate_for(&self, n_messages: usize) -> Result<()> {
        if self.fight_after.len() != n_messages || self.t2_action.len() != n_messages {
            return Err(Error::validation("profile total over the message grid"));
        }
        if self.signal_of.restrained >= n_messages || self.signal_of.aggressive >= n_messages {
            return Err(Error::validation("profile signals index the message grid"));
        }
        Ok(())
    }

    fn is_on_path(&self, j: usize) -> bool {
        self.signal_of.restrained == j || self.signal_of.aggressive == j
    }
}

/// B's posterior that A is restrained after each message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefAssignment {
    pub posterior: Vec<f64>,
    pub on_path: Vec<bool>,
    /// Closed interval of posteriors under which B's prescribed action is
    /// optimal. On-path posteriors lie inside it.
    pub support: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbeClass {
    /// Both types send one signal, B waits, and both restrain.
    PoolingOnRestraint,
    /// Both types send one signal, but B fights or someone exploits.
    PoolingOther,
    /// Distinct signals that screen: B waits after the restrained type's
    /// signal and fights after the aggressive type's.
    Separating,
    /// Distinct signals without that screening pattern (for instance B
    /// fights after both).
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbeCertificate {
    pub profile: StrategyProfile,
    pub beliefs: BeliefAssignment,
    pub class: PbeClass,
}

/// Payoffs per message, type and outcome, computed once per game.
struct PayoffTable {
    /// `[message][type][outcome]` where outcome is conflict, exploit, restraint.
    u_a: Vec<[[f64; 3]; 2]>,
    u_b: [f64; 3],
}

fn outcome_slot(outcome: Outcome) -> usize {
    match outcome {
        Outcome::PreventiveConflict => 0,
        Outcome::Exploit => 1,
        Outcome::Restraint => 2,
    }
}

impl PayoffTable {
    fn new(game: &DiscreteGame) -> Self {
        let u_a = game
            .messages
            .iter()
            .map(|&m| {
                TypeLabel::ALL.map(|theta| {
                    Outcome::ALL.map(|o| payoff_unchecked(game.spec, &game.params, theta, o, m).u_a)
                })
            })
            .collect();
        // B's payoff depends on neither type nor signal.
        let u_b = Outcome::ALL
            .map(|o| payoff_unchecked(game.spec, &game.params, TypeLabel::Aggressive, o, 0.0).u_b);
        PayoffTable { u_a, u_b }
    }

    fn a(&self, j: usize, theta: TypeLabel, outcome: Outcome) -> f64 {
        self.u_a[j][theta.index()][outcome_slot(outcome)]
    }

    fn b(&self, outcome: Outcome) -> f64 {
        self.u_b[outcome_slot(outcome)]
    }

    fn t2_admissible(&self, j: usize, theta: TypeLabel, action: T2Action) -> bool {
        let chosen = self.a(j, theta, action.outcome());
        let other = match action {
            T2Action::Exploit => self.a(j, theta, Outcome::Restraint),
            T2Action::Restraint => self.a(j, theta, Outcome::Exploit),
        };
        chosen >= other - TOL
    }

    /// A's value from sending message `j` given B's and A's own later play.
    fn continuation(&self, profile: &StrategyProfile, j: usize, theta: TypeLabel) -> f64 {
        if profile.fight_after[j] {
            self.a(j, theta, Outcome::PreventiveConflict)
        } else {
            self.a(j, theta, profile.t2_action[j][theta].outcome())
        }
    }
}

/// Beliefs `q ∈ [0, 1]` with `intercept + slope·q <= bound`.
fn affine_le_interval(intercept: f64, slope: f64, bound: f64) -> Option<(f64, f64)> {
    if slope == 0.0 {
        return (intercept <= bound).then_some((0.0, 1.0));
    }
    let root = (bound - intercept) / slope;
    let (lo, hi) = if slope > 0.0 {
        (0.0, root.min(1.0))
    } else {
        (root.max(0.0), 1.0)
    };
    (lo <= hi).then_some((lo, hi))
}

/// Checks one profile. Returns a certificate with a supporting belief
/// assignment when the profile is a weak PBE, `None` otherwise.
pub fn is_weak_pbe(
    game: &DiscreteGame,
    profile: &StrategyProfile,
) -> Result<Option<PbeCertificate>> {
    game.validate()?;
    profile.validate_for(game.messages.len())?;
    let table = PayoffTable::new(game);
    let t2_ok = (0..game.messages.len()).all(|j| {
        TypeLabel::ALL
            .into_iter()
            .all(|theta| table.t2_admissible(j, theta, profile.t2_action[j][theta]))
    });
    if !t2_ok {
        return Ok(None);
    }
    Ok(check_after_t2(game, &table, profile))
}

/// Belief and t0 checks for a profile whose t2 actions are already known to
/// be sequentially rational.
fn check_after_t2(
    game: &DiscreteGame,
    table: &PayoffTable,
    profile: &StrategyProfile,
) -> Option<PbeCertificate> {
    let n = game.messages.len();

    // t0: each type's signal maximises its continuation value.
    for theta in TypeLabel::ALL {
        let sent = table.continuation(profile, profile.signal_of[theta], theta);
        if (0..n).any(|j| table.continuation(profile, j, theta) > sent + TOL) {
            return None;
        }
    }

    // t1: B's action is optimal under some admissible posterior.
    let fight_value = table.b(Outcome::PreventiveConflict);
    let mut posterior = Vec::with_capacity(n);
    let mut on_path = Vec::with_capacity(n);
    let mut support = Vec::with_capacity(n);
    for j in 0..n {
        let u_if_aggressive = table.b(profile.t2_action[j].aggressive.outcome());
        let u_if_restrained = table.b(profile.t2_action[j].restrained.outcome());
        let slope = u_if_restrained - u_if_aggressive;
        // Waiting is worth `u_if_aggressive + slope·q`.
        let interval = if profile.fight_after[j] {
            affine_le_interval(u_if_aggressive, slope, fight_value + TOL)
        } else {
            affine_le_interval(-u_if_aggressive, -slope, -fight_value + TOL)
        }?;
        let pinned = bayes_posterior(profile, j, game.params.prior);
        let q = match pinned {
            Some(q) => {
                let wait = u_if_aggressive + slope * q;
                let optimal = if profile.fight_after[j] {
                    fight_value >= wait - TOL
                } else {
                    wait >= fight_value - TOL
                };
                if !optimal {
                    return None;
                }
                q
            }
            // The supporting set of an affine payoff always reaches 0 or 1;
            // report that end rather than a tolerance-widened interior edge.
            None if interval.0 <= 0.0 => 0.0,
            None => 1.0,
        };
        posterior.push(q);
        on_path.push(profile.is_on_path(j));
        support.push(interval);
    }

    Some(PbeCertificate {
        class: classify_profile(profile),
        profile: profile.clone(),
        beliefs: BeliefAssignment {
            posterior,
            on_path,
            support,
        },
    })
}

/// Bayes' rule from the prior; `None` off path.
fn bayes_posterior(profile: &StrategyProfile, j: usize, prior: f64) -> Option<f64> {
    let from_restrained = profile.signal_of.restrained == j;
    let from_aggressive = profile.signal_of.aggressive == j;
    match (from_restrained, from_aggressive) {
        (true, true) => Some(prior),
        (true, false) => Some(1.0),
        (false, true) => Some(0.0),
        (false, false) => None,
    }
}

fn classify_profile(profile: &StrategyProfile) -> PbeClass {
    let sr = profile.signal_of.restrained;
    let sa = profile.signal_of.aggressive;
    if sr == sa {
        let calm = !profile.fight_after[sr]
            && profile.t2_action[sr].restrained == T2Action::Restraint
            && profile.t2_action[sr].aggressive == T2Action::Restraint;
        if calm {
            PbeClass::PoolingOnRestraint
        } else {
            PbeClass::PoolingOther
        }
    } else if !profile.fight_after[sr] && profile.fight_after[sa] {
        PbeClass::Separating
    } else {
        PbeClass::Hybrid
    }
}

/// Every weak PBE of the game, with the default profile budget.
pub fn find_all_pbe(game: &DiscreteGame) -> Result<Vec<PbeCertificate>> {
    find_all_pbe_with_budget(game, DEFAULT_PROFILE_BUDGET)
}

/// Every weak PBE of the game, in lexicographic order of
/// `(signal_R, signal_A, fight mask, t2 mask)`. Bit `j` of the fight mask is
/// B's choice after message `j`; bits `2j` and `2j + 1` of the t2 mask are
/// the restrained and aggressive actions after `j` (set = exploit).
pub fn find_all_pbe_with_budget(game: &DiscreteGame, budget: u128) -> Result<Vec<PbeCertificate>> {
    game.validate()?;
    let profiles = game.profile_count();
    if profiles > budget {
        return Err(Error::SizeGuard { profiles, budget });
    }
    let n = game.messages.len();
    let table = PayoffTable::new(game);

    // t2 rationality is cell-local, so enumerate only the admissible t2
    // masks. Filtering preserves their ascending order.
    let t2_rules: Vec<Vec<PerType<T2Action>>> = (0u64..(1u64 << (2 * n)))
        .map(|mask| decode_t2(mask, n))
        .filter(|rule| {
            rule.iter().enumerate().all(|(j, cell)| {
                TypeLabel::ALL
                    .into_iter()
                    .all(|theta| table.t2_admissible(j, theta, cell[theta]))
            })
        })
        .collect();

    let signal_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|sr| (0..n).map(move |sa| (sr, sa)))
        .collect();
    let found = signal_pairs
        .into_par_iter()
        .flat_map_iter(|(sr, sa)| {
            let table = &table;
            let t2_rules = &t2_rules;
            (0u64..(1u64 << n)).flat_map(move |fight_mask| {
                let fight_after: Vec<bool> = (0..n).map(|j| fight_mask >> j & 1 == 1).collect();
                t2_rules.iter().filter_map(move |rule| {
                    let profile = StrategyProfile {
                        signal_of: PerType::new(sr, sa),
                        fight_after: fight_after.clone(),
                        t2_action: rule.clone(),
                    };
                    check_after_t2(game, table, &profile)
                })
            })
        })
        .collect();
    Ok(found)
}

fn decode_t2(mask: u64, n: usize) -> Vec<PerType<T2Action>> {
    let action = |bit: u64| {
        if mask >> bit & 1 == 1 {
            T2Action::Exploit
        } else {
            T2Action::Restraint
        }
    };
    (0..n as u64)
        .map(|j| PerType::new(action(2 * j), action(2 * j + 1)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pooling: bool,
    pub separating: bool,
}

/// One point where the oracle and the closed form disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub params: ModelParams,
    pub m: f64,
    pub closed_form_verdict: Verdict,
    pub oracle_verdict: Verdict,
    /// Every certificate the oracle found on `{0, m}`.
    pub certificates: Vec<PbeCertificate>,
}

/// What the oracle says about signal `m` in the game `{0, m}`: is there a
/// pooling-on-restraint certificate at `m`, and a separating one with the
/// restrained type at `m`?
pub fn oracle_verdict(
    spec: MechanismSpec,
    params: &ModelParams,
    m: f64,
) -> Result<(Verdict, Vec<PbeCertificate>)> {
    let game = DiscreteGame::two_point(spec, *params, m)?;
    let at = game.index_of(m).expect("m is on its own grid");
    let certificates = find_all_pbe(&game)?;
    let verdict = Verdict {
        pooling: certificates.iter().any(|c| {
            c.class == PbeClass::PoolingOnRestraint && c.profile.signal_of.restrained == at
        }),
        separating: certificates
            .iter()
            .any(|c| c.class == PbeClass::Separating && c.profile.signal_of.restrained == at),
    };
    Ok((verdict, certificates))
}

/// Compares the closed-form pooling and separating verdicts with the oracle
/// at every `(params, m)` point. An empty result means full agreement.
pub fn verify_against_closed_form(
    spec: MechanismSpec,
    grid: &[(ModelParams, f64)],
) -> Result<Vec<Discrepancy>> {
    let checked: Vec<Option<Discrepancy>> = grid
        .par_iter()
        .map(|(params, m)| {
            let closed = Verdict {
                pooling: pooling_exists(spec, params, *m)?.holds,
                separating: separating_exists(spec, params, *m)?.holds,
            };
            let (oracle, certificates) = oracle_verdict(spec, params, *m)?;
            Ok((closed != oracle).then_some(Discrepancy {
                params: *params,
                m: *m,
                closed_form_verdict: closed,
                oracle_verdict: oracle,
                certificates,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(checked.into_iter().flatten().collect())
}
