//! Analytic existence conditions for pure-strategy equilibria.
//!
//! Each checker returns a [`ConditionReport`]: a list of weak inequalities
//! written as `lhs <= rhs`, each with its slack `rhs - lhs`. A report holds
//! iff every slack is at least `-TOL`, so boundary points count as satisfied.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{validate_signal, Mechanism, MechanismSpec, ModelParams, Variant};

/// Absolute tolerance for every weak inequality in the crate.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub expression: String,
    /// Positive: strictly satisfied. Zero: on the boundary. Negative: violated.
    pub slack: f64,
}

impl Clause {
    fn new(name: &str, expression: &str, slack: f64) -> Self {
        Clause {
            name: name.to_owned(),
            expression: expression.to_owned(),
            slack,
        }
    }

    pub fn holds(&self) -> bool {
        self.slack >= -TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub clauses: Vec<Clause>,
    /// Why the condition has the shape it has, for the constant-false cases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionReport {
    fn from_clauses(clauses: Vec<Clause>, note: Option<&str>) -> Self {
        ConditionReport {
            holds: clauses.iter().all(Clause::holds),
            clauses,
            note: note.map(str::to_owned),
        }
    }

    /// Smallest clause slack; the binding constraint.
    pub fn min_slack(&self) -> f64 {
        self.clauses
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    }
}

/// The drift threshold check plus State B's two expected payoffs at t1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeShiftReport {
    pub condition: ConditionReport,
    /// `-p·V_B`: B's expected payoff from not fighting after the restraint
    /// signal when only the drifted share exploits.
    pub expected_not_fight_u_b: f64,
    /// `-c`.
    pub fight_u_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub mechanism: MechanismSpec,
    pub m: f64,
    pub pooling_on_restraint: ConditionReport,
    pub separating: ConditionReport,
    /// Present only when `p > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_shift_refrain: Option<TypeShiftReport>,
}

/// Pooling on restraint at signal `m`: both types send `m`, B waits after
/// `m` and fights after `0`, and neither type exploits.
///
/// Tying hands and reducible costs need the aggressive type to prefer
/// restraint at t2 (`V_D + r ≤ m`). Under the risk variant the aggressive
/// type's on-path payoff is `-r`, so it must also not prefer the conflict it
/// would get by deviating to `0` (`r ≤ c`). In the base variant this reduces
/// to the single clause `V_D ≤ m`.
///
/// Sunk and installment costs hit exploit and restraint alike, so the
/// aggressive type always exploits and pooling on restraint never exists.
pub fn pooling_exists(
    spec: MechanismSpec,
    params: &ModelParams,
    m: f64,
) -> Result<ConditionReport> {
    params.validate()?;
    validate_signal(m)?;
    Ok(pooling_unchecked(spec, params, m))
}

fn pooling_unchecked(spec: MechanismSpec, params: &ModelParams, m: f64) -> ConditionReport {
    let r = spec.effective_risk(params);
    match (spec.mechanism, spec.variant) {
        (Mechanism::TyingHands | Mechanism::ReducibleCosts, Variant::Base) => {
            ConditionReport::from_clauses(
                vec![Clause::new(
                    "aggressive_restrains",
                    "V_D <= m",
                    m - params.v_d,
                )],
                None,
            )
        }
        (Mechanism::TyingHands | Mechanism::ReducibleCosts, Variant::Risk) => {
            ConditionReport::from_clauses(
                vec![
                    Clause::new("aggressive_restrains", "V_D + r <= m", m - params.v_d - r),
                    Clause::new("aggressive_prefers_pooling", "r <= c", params.c - r),
                ],
                None,
            )
        }
        (Mechanism::SunkCosts | Mechanism::InstallmentCosts, variant) => {
            let expression = match variant {
                Variant::Base => "0 >= V_D",
                Variant::Risk => "0 >= V_D + r",
            };
            ConditionReport::from_clauses(
                vec![Clause::new(
                    "aggressive_exploit_dominated",
                    expression,
                    -(params.v_d + r),
                )],
                Some("signal cost is charged on exploit and restraint alike, so the aggressive type always exploits"),
            )
        }
    }
}

/// Separating at `m_star`: the restrained type sends `m_star` and B waits,
/// the aggressive type sends `0` and B fights.
///
/// Tying hands and reducible costs: the aggressive type must not gain from
/// mimicking, `-c ≥ V_D - m*` and `-c ≥ -r`. With `r = 0` (base variant) the
/// second clause fails because `c > 0`.
///
/// Sunk and installment costs: deterring the aggressive type needs
/// `m* ≥ V_D + c`, keeping the restrained type needs `m* ≤ c`. Both together
/// require `V_D ≤ 0`, so the report is false for every valid parameter set.
pub fn separating_exists(
    spec: MechanismSpec,
    params: &ModelParams,
    m_star: f64,
) -> Result<ConditionReport> {
    params.validate()?;
    validate_signal(m_star)?;
    Ok(separating_unchecked(spec, params, m_star))
}

fn separating_unchecked(spec: MechanismSpec, params: &ModelParams, m_star: f64) -> ConditionReport {
    let r = spec.effective_risk(params);
    match spec.mechanism {
        Mechanism::TyingHands | Mechanism::ReducibleCosts => {
            let note = match spec.variant {
                Variant::Base => Some("no separating equilibrium without risk cost: the aggressive type always prefers mimicking to conflict"),
                Variant::Risk => None,
            };
            ConditionReport::from_clauses(
                vec![
                    Clause::new(
                        "aggressive_no_mimic_exploit",
                        "V_D <= m* - c",
                        m_star - params.c - params.v_d,
                    ),
                    Clause::new("aggressive_no_mimic_restrain", "c <= r", r - params.c),
                ],
                note,
            )
        }
        Mechanism::SunkCosts | Mechanism::InstallmentCosts => ConditionReport::from_clauses(
            vec![
                Clause::new(
                    "aggressive_deterred",
                    "V_D + c <= m*",
                    m_star - params.v_d - params.c,
                ),
                Clause::new("restrained_willing", "m* <= c", params.c - m_star),
            ],
            Some("no separating equilibrium: any signal that deters the aggressive type also deters the restrained type"),
        ),
    }
}

/// B's refrain condition when a restrained type drifts to aggression with
/// probability `p`: waiting yields `-p·V_B`, fighting yields `-c`.
pub fn type_shift_refrain(params: &ModelParams) -> Result<TypeShiftReport> {
    params.validate()?;
    Ok(type_shift_unchecked(params))
}

fn type_shift_unchecked(params: &ModelParams) -> TypeShiftReport {
    TypeShiftReport {
        condition: ConditionReport::from_clauses(
            vec![Clause::new(
                "b_refrains",
                "p <= c/V_B",
                params.c / params.v_b - params.p,
            )],
            None,
        ),
        expected_not_fight_u_b: -params.p * params.v_b,
        fight_u_b: -params.c,
    }
}

/// Runs all three checkers at one parameter point. `m` serves as the pooling
/// signal and as the separating `m*`.
pub fn classify(spec: MechanismSpec, params: &ModelParams, m: f64) -> Result<EquilibriumReport> {
    params.validate()?;
    validate_signal(m)?;
    Ok(EquilibriumReport {
        mechanism: spec,
        m,
        pooling_on_restraint: pooling_unchecked(spec, params, m),
        separating: separating_unchecked(spec, params, m),
        type_shift_refrain: (params.p > 0.0).then(|| type_shift_unchecked(params)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn spec(mechanism: Mechanism, variant: Variant) -> MechanismSpec {
        MechanismSpec::new(mechanism, variant)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn tying_hands_pooling_strict_and_boundary() {
        let th = spec(Mechanism::TyingHands, Variant::Base);
        let params = ModelParams::new(0.5, 1.0, 2.0);
        let strict = pooling_exists(th, &params, 2.0).unwrap();
        assert!(strict.holds);
        assert_eq!(strict.clauses.len(), 1);
        assert!(close(strict.clauses[0].slack, 1.0));

        let boundary = pooling_exists(th, &params, 1.0).unwrap();
        assert!(boundary.holds);
        assert_eq!(boundary.clauses[0].slack, 0.0);
    }

    #[test]
    fn sunk_pooling_is_constant_false() {
        let params = ModelParams::new(0.5, 0.3, 2.0);
        let report =
            pooling_exists(spec(Mechanism::SunkCosts, Variant::Base), &params, 10.0).unwrap();
        assert!(!report.holds);
        assert!(close(report.clauses[0].slack, -0.3));
        assert_eq!(report.clauses[0].expression, "0 >= V_D");
    }

    #[test]
    fn reducible_pooling_violated() {
        let params = ModelParams::new(0.5, 2.0, 3.0);
        let report =
            pooling_exists(spec(Mechanism::ReducibleCosts, Variant::Base), &params, 1.5).unwrap();
        assert!(!report.holds);
        assert!(close(report.clauses[0].slack, -0.5));
    }

    #[test]
    fn risk_pooling_needs_risk_below_conflict_cost() {
        let th = spec(Mechanism::TyingHands, Variant::Risk);
        let params = ModelParams::new(0.5, 1.0, 2.0).with_r(0.3);
        assert!(pooling_exists(th, &params, 1.3).unwrap().holds);
        assert!(!pooling_exists(th, &params, 1.2).unwrap().holds);
        let risky = params.with_r(0.6);
        let report = pooling_exists(th, &risky, 5.0).unwrap();
        assert!(!report.holds);
        assert!(close(report.clauses[1].slack, -0.1));
    }

    #[test]
    fn tying_hands_base_never_separates() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_r(5.0);
        let report =
            separating_exists(spec(Mechanism::TyingHands, Variant::Base), &params, 5.0).unwrap();
        assert!(!report.holds);
        assert!(report.note.is_some());
    }

    #[test]
    fn tying_hands_risk_separates() {
        let th = spec(Mechanism::TyingHands, Variant::Risk);
        let params = ModelParams::new(0.5, 1.0, 2.0).with_r(0.6);
        let report = separating_exists(th, &params, 1.5).unwrap();
        assert!(report.holds);
        assert!(close(report.clauses[0].slack, 0.0));
        assert!(close(report.clauses[1].slack, 0.1));

        let low_risk = params.with_r(0.4);
        let report = separating_exists(th, &low_risk, 3.0).unwrap();
        assert!(!report.holds);
        assert!(report.clauses[0].holds());
        assert!(close(report.clauses[1].slack, -0.1));
    }

    #[test]
    fn reducible_risk_separates() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_r(0.6);
        let report =
            separating_exists(spec(Mechanism::ReducibleCosts, Variant::Risk), &params, 1.5)
                .unwrap();
        assert!(report.holds);
    }

    #[test]
    fn sunk_and_installment_never_separate() {
        let params = ModelParams::new(0.5, 1.0, 2.0).with_r(10.0);
        for mechanism in [Mechanism::SunkCosts, Mechanism::InstallmentCosts] {
            for variant in [Variant::Base, Variant::Risk] {
                for m in [0.0, 0.5, 1.5, 3.0, 100.0] {
                    let report = separating_exists(spec(mechanism, variant), &params, m).unwrap();
                    assert!(!report.holds, "{mechanism}/{variant} m={m}");
                }
            }
        }
    }

    #[test]
    fn type_shift_threshold() {
        let base = ModelParams::new(0.5, 1.0, 2.0);

        let report = type_shift_refrain(&base.with_p(0.2)).unwrap();
        assert!(report.condition.holds);
        assert!(close(report.condition.clauses[0].slack, 0.05));
        assert!(close(report.expected_not_fight_u_b, -0.4));

        let report = type_shift_refrain(&base.with_p(0.25)).unwrap();
        assert!(report.condition.holds);
        assert_eq!(report.condition.clauses[0].slack, 0.0);
        assert_eq!(report.expected_not_fight_u_b, -0.5);

        let report = type_shift_refrain(&base.with_p(0.6)).unwrap();
        assert!(!report.condition.holds);
        assert!(close(report.condition.clauses[0].slack, -0.35));
    }

    #[test]
    fn classify_bundles_reports() {
        let th = spec(Mechanism::TyingHands, Variant::Base);
        let params = ModelParams::new(0.5, 1.0, 2.0);

        let report = classify(th, &params, 2.0).unwrap();
        assert!(report.pooling_on_restraint.holds);
        assert!(!report.separating.holds);
        assert!(report.type_shift_refrain.is_none());

        let report = classify(th, &params.with_p(0.3), 2.0).unwrap();
        assert!(report.pooling_on_restraint.holds);
        assert!(!report.type_shift_refrain.unwrap().condition.holds);

        let inst = spec(Mechanism::InstallmentCosts, Variant::Risk);
        let report = classify(inst, &params.with_r(0.7), 4.0).unwrap();
        assert!(!report.pooling_on_restraint.holds);
        assert!(!report.separating.holds);
    }

    #[test]
    fn base_equals_risk_without_risk() {
        let params = ModelParams::new(0.5, 1.0, 2.0);
        let risk =
            separating_exists(spec(Mechanism::TyingHands, Variant::Risk), &params, 3.0).unwrap();
        assert!(!risk.holds);
        assert!(close(risk.clauses[1].slack, -0.5));
    }

    #[test]
    fn classify_validates_inputs() {
        let th = spec(Mechanism::TyingHands, Variant::Base);
        let bad = ModelParams::new(0.5, 1.0, 0.4);
        assert!(matches!(
            classify(th, &bad, 1.0),
            Err(Error::Validation { ref constraint }) if constraint == "V_B > c"
        ));
        assert!(classify(th, &ModelParams::new(0.5, 1.0, 2.0), -1.0).is_err());
    }
}
