//! Reference weak-PBE checker built only on the public payoff function.
//!
//! It shares no code with the crate's oracle: it walks every pure profile
//! itself and searches B's beliefs on a fine grid instead of solving for
//! the supporting interval.

#![allow(dead_code)]

use restraint_core::{
    payoff, DiscreteGame, Outcome, PerType, StrategyProfile, T2Action, TypeLabel, TOL,
};

pub fn u_a(game: &DiscreteGame, theta: TypeLabel, outcome: Outcome, j: usize) -> f64 {
    payoff(game.spec, &game.params, theta, outcome, game.messages[j])
        .unwrap()
        .u_a
}

pub fn u_b(game: &DiscreteGame, outcome: Outcome, j: usize) -> f64 {
    payoff(
        game.spec,
        &game.params,
        TypeLabel::Restrained,
        outcome,
        game.messages[j],
    )
    .unwrap()
    .u_b
}

fn t2_outcome(action: T2Action) -> Outcome {
    match action {
        T2Action::Exploit => Outcome::Exploit,
        T2Action::Restraint => Outcome::Restraint,
    }
}

fn value(game: &DiscreteGame, p: &StrategyProfile, theta: TypeLabel, j: usize) -> f64 {
    if p.fight_after[j] {
        u_a(game, theta, Outcome::PreventiveConflict, j)
    } else {
        u_a(game, theta, t2_outcome(p.t2_action[j][theta]), j)
    }
}

/// B's payoff gain from its prescribed action over the alternative at
/// posterior `q`.
fn b_margin(game: &DiscreteGame, p: &StrategyProfile, j: usize, q: f64) -> f64 {
    let wait = q * u_b(game, t2_outcome(p.t2_action[j].restrained), j)
        + (1.0 - q) * u_b(game, t2_outcome(p.t2_action[j].aggressive), j);
    let fight = u_b(game, Outcome::PreventiveConflict, j);
    if p.fight_after[j] {
        fight - wait
    } else {
        wait - fight
    }
}

pub fn bayes(p: &StrategyProfile, j: usize, prior: f64) -> Option<f64> {
    match (p.signal_of.restrained == j, p.signal_of.aggressive == j) {
        (true, true) => Some(prior),
        (true, false) => Some(1.0),
        (false, true) => Some(0.0),
        (false, false) => None,
    }
}

/// Naive weak-PBE test with beliefs searched on a 1/1000 grid.
pub fn naive_is_pbe(game: &DiscreteGame, p: &StrategyProfile) -> bool {
    let n = game.messages.len();
    for j in 0..n {
        for theta in TypeLabel::ALL {
            let chosen = u_a(game, theta, t2_outcome(p.t2_action[j][theta]), j);
            let best =
                u_a(game, theta, Outcome::Exploit, j).max(u_a(game, theta, Outcome::Restraint, j));
            if chosen < best - TOL {
                return false;
            }
        }
    }
    for theta in TypeLabel::ALL {
        let sent = value(game, p, theta, p.signal_of[theta]);
        let best = (0..n)
            .map(|j| value(game, p, theta, j))
            .fold(f64::MIN, f64::max);
        if sent < best - TOL {
            return false;
        }
    }
    for j in 0..n {
        let ok = match bayes(p, j, game.params.prior) {
            Some(q) => b_margin(game, p, j, q) >= -TOL,
            None => (0..=1000).any(|k| b_margin(game, p, j, k as f64 / 1000.0) >= -TOL),
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Re-checks a certificate's own belief assignment by direct comparison.
pub fn recheck_certificate(game: &DiscreteGame, p: &StrategyProfile, posterior: &[f64]) -> bool {
    if !naive_is_pbe(game, p) {
        return false;
    }
    (0..game.messages.len()).all(|j| {
        let q = posterior[j];
        let bayes_ok = bayes(p, j, game.params.prior).is_none_or(|b| b == q);
        (0.0..=1.0).contains(&q) && bayes_ok && b_margin(game, p, j, q) >= -TOL
    })
}

/// Every pure profile on an `n`-message grid.
pub fn all_profiles(n: usize) -> Vec<StrategyProfile> {
    let mut out = Vec::new();
    let act = |bit: bool| {
        if bit {
            T2Action::Exploit
        } else {
            T2Action::Restraint
        }
    };
    for sr in 0..n {
        for sa in 0..n {
            for fight in 0..(1u32 << n) {
                for t2 in 0..(1u32 << (2 * n)) {
                    out.push(StrategyProfile {
                        signal_of: PerType::new(sr, sa),
                        fight_after: (0..n).map(|j| fight >> j & 1 == 1).collect(),
                        t2_action: (0..n)
                            .map(|j| {
                                PerType::new(
                                    act(t2 >> (2 * j) & 1 == 1),
                                    act(t2 >> (2 * j + 1) & 1 == 1),
                                )
                            })
                            .collect(),
                    });
                }
            }
        }
    }
    out
}
