//! Parameter space, cost mechanisms and payoffs.
//!
//! Timing: nature draws State A's type, A sends a signal `m ≥ 0`, B observes
//! `m` and either fights a preventive conflict (the game ends) or waits. If B
//! waits, A holds a decisive strategic advantage and either exploits it or
//! exercises restraint. Restraint is the zero point for both sides.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters shared by every game variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cost of preventive conflict to each side.
    pub c: f64,
    /// Aggressive type's gain from exploiting the advantage.
    #[serde(rename = "V_D")]
    pub v_d: f64,
    /// State B's loss when exploited.
    #[serde(rename = "V_B")]
    pub v_b: f64,
    /// Aggressive type's risk cost from leaving the advantage unexploited.
    /// Only read by the risk variant.
    #[serde(default)]
    pub r: f64,
    /// Probability that a restrained type drifts to aggressive before it
    /// holds the advantage.
    #[serde(default)]
    pub p: f64,
    /// Common prior probability that State A is restrained.
    #[serde(default = "default_prior")]
    pub prior: f64,
}

fn default_prior() -> f64 {
    0.5
}

impl ModelParams {
    pub fn new(c: f64, v_d: f64, v_b: f64) -> Self {
        ModelParams {
            c,
            v_d,
            v_b,
            r: 0.0,
            p: 0.0,
            prior: default_prior(),
        }
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_prior(mut self, prior: f64) -> Self {
        self.prior = prior;
        self
    }

    /// Checks every parameter invariant, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        self.validate_inner(false)
    }

    /// Like [`validate`](Self::validate) but accepts a degenerate prior of
    /// exactly 0 or 1. Only the simulator exposes this, behind an explicit
    /// override.
    pub fn validate_allowing_degenerate_prior(&self) -> Result<()> {
        self.validate_inner(true)
    }

    fn validate_inner(&self, degenerate_prior: bool) -> Result<()> {
        let named = [
            ("c", self.c),
            ("V_D", self.v_d),
            ("V_B", self.v_b),
            ("r", self.r),
            ("p", self.p),
            ("prior", self.prior),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(Error::validation(format!("{name} is finite")));
            }
        }
        if self.c <= 0.0 {
            return Err(Error::validation("c > 0"));
        }
        if self.v_d <= 0.0 {
            return Err(Error::validation("V_D > 0"));
        }
        if self.v_b <= self.c {
            return Err(Error::validation("V_B > c"));
        }
        if self.r < 0.0 {
            return Err(Error::validation("r >= 0"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::validation("0 <= p <= 1"));
        }
        if degenerate_prior {
            if !(0.0..=1.0).contains(&self.prior) {
                return Err(Error::validation("0 <= prior <= 1"));
            }
        } else if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::validation("0 < prior < 1"));
        }
        Ok(())
    }

    /// Multiplies every payoff-scale quantity (c, V_D, V_B, r) by `lambda`.
    /// Probabilities are left alone.
    pub fn scaled(&self, lambda: f64) -> Self {
        ModelParams {
            c: self.c * lambda,
            v_d: self.v_d * lambda,
            v_b: self.v_b * lambda,
            r: self.r * lambda,
            ..*self
        }
    }
}

pub(crate) fn validate_signal(m: f64) -> Result<()> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::validation("m >= 0"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeLabel {
    Restrained,
    Aggressive,
}

impl TypeLabel {
    pub const ALL: [TypeLabel; 2] = [TypeLabel::Restrained, TypeLabel::Aggressive];

    /// θ: 0 for restrained, 1 for aggressive.
    pub fn theta(self) -> f64 {
        match self {
            TypeLabel::Restrained => 0.0,
            TypeLabel::Aggressive => 1.0,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            TypeLabel::Restrained => 0,
            TypeLabel::Aggressive => 1,
        }
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeLabel::Restrained => "restrained",
            TypeLabel::Aggressive => "aggressive",
        })
    }
}

/// How the signal `m` enters State A's payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    /// Paid only if the commitment is broken (subtracted from Exploit).
    #[serde(rename = "tying-hands")]
    TyingHands,
    /// Paid immediately, whatever happens later.
    #[serde(rename = "sunk")]
    SunkCosts,
    /// Paid after t1 whatever A does, so absent from the conflict cell.
    #[serde(rename = "installment")]
    InstallmentCosts,
    /// Paid up front and recouped if the commitment is honoured.
    #[serde(rename = "reducible")]
    ReducibleCosts,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::TyingHands,
        Mechanism::SunkCosts,
        Mechanism::InstallmentCosts,
        Mechanism::ReducibleCosts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::TyingHands => "tying-hands",
            Mechanism::SunkCosts => "sunk",
            Mechanism::InstallmentCosts => "installment",
            Mechanism::ReducibleCosts => "reducible",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tying-hands" | "tying_hands" => Ok(Mechanism::TyingHands),
            "sunk" => Ok(Mechanism::SunkCosts),
            "installment" => Ok(Mechanism::InstallmentCosts),
            "reducible" => Ok(Mechanism::ReducibleCosts),
            _ => Err(Error::validation(
                "mechanism in {tying-hands, sunk, installment, reducible}",
            )),
        }
    }
}

/// `Risk` charges the aggressive type `r` for leaving the advantage
/// unexploited. `Base` is `Risk` with `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Base,
    Risk,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Risk => "risk",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Variant::Base),
            "risk" => Ok(Variant::Risk),
            _ => Err(Error::validation("variant in {base, risk}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub mechanism: Mechanism,
    #[serde(default)]
    pub variant: Variant,
}

impl MechanismSpec {
    pub fn new(mechanism: Mechanism, variant: Variant) -> Self {
        MechanismSpec { mechanism, variant }
    }

    /// All eight (mechanism, variant) combinations.
    pub fn all() -> impl Iterator<Item = MechanismSpec> {
        Mechanism::ALL.into_iter().flat_map(|mechanism| {
            [Variant::Base, Variant::Risk]
                .into_iter()
                .map(move |variant| MechanismSpec { mechanism, variant })
        })
    }

    /// The risk cost actually charged: `r` under `Risk`, zero under `Base`.
    pub fn effective_risk(&self, params: &ModelParams) -> f64 {
        match self.variant {
            Variant::Base => 0.0,
            Variant::Risk => params.r,
        }
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.mechanism, self.variant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// B fights at t1; the game ends there.
    PreventiveConflict,
    /// B waits and A exploits at t2.
    Exploit,
    /// B waits and A exercises restraint at t2.
    Restraint,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [
        Outcome::PreventiveConflict,
        Outcome::Exploit,
        Outcome::Restraint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::PreventiveConflict => "preventive_conflict",
            Outcome::Exploit => "exploit",
            Outcome::Restraint => "restraint",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffPair {
    pub u_a: f64,
    pub u_b: f64,
}

impl PayoffPair {
    pub fn new(u_a: f64, u_b: f64) -> Self {
        PayoffPair { u_a, u_b }
    }
}

/// Payoff vector for one terminal outcome.
///
/// | mechanism   | conflict     | exploit        | restraint        |
/// |-------------|--------------|----------------|------------------|
/// | tying hands | (−c, −c)     | (θV_D − m, −V_B) | (−θr, 0)       |
/// | sunk        | (−c − m, −c) | (θV_D − m, −V_B) | (−θr − m, 0)   |
/// | installment | (−c, −c)     | (θV_D − m, −V_B) | (−θr − m, 0)   |
/// | reducible   | (−c − m, −c) | (θV_D − m, −V_B) | (−θr, 0)       |
///
/// `r` is zero under the base variant. Conflict never involves θ or `r`.
pub fn payoff(
    spec: MechanismSpec,
    params: &ModelParams,
    theta: TypeLabel,
    outcome: Outcome,
    m: f64,
) -> Result<PayoffPair> {
    params.validate()?;
    validate_signal(m)?;
    Ok(payoff_unchecked(spec, params, theta, outcome, m))
}

/// [`payoff`] without input validation, for hot loops over inputs that were
/// validated once up front.
pub(crate) fn payoff_unchecked(
    spec: MechanismSpec,
    params: &ModelParams,
    theta: TypeLabel,
    outcome: Outcome,
    m: f64,
) -> PayoffPair {
    let t = theta.theta();
    let r = spec.effective_risk(params);
    let signal_in_conflict = matches!(
        spec.mechanism,
        Mechanism::SunkCosts | Mechanism::ReducibleCosts
    );
    let signal_in_restraint = matches!(
        spec.mechanism,
        Mechanism::SunkCosts | Mechanism::InstallmentCosts
    );
    match outcome {
        Outcome::PreventiveConflict => {
            let u_a = if signal_in_conflict {
                -params.c - m
            } else {
                -params.c
            };
            PayoffPair::new(u_a, -params.c)
        }
        Outcome::Exploit => PayoffPair::new(t * params.v_d - m, -params.v_b),
        Outcome::Restraint => {
            let u_a = if signal_in_restraint {
                -t * r - m
            } else {
                -t * r
            };
            PayoffPair::new(u_a, 0.0)
        }
    }
}
