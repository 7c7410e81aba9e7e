mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use restraint_core::{
    find_all_pbe, is_weak_pbe, separating_exists, verify_against_closed_form, DiscreteGame,
    Mechanism, MechanismSpec, ModelParams, PbeClass, PerType, StrategyProfile, T2Action, Variant,
};

use common::{all_profiles, naive_is_pbe, recheck_certificate};

fn spec(mechanism: Mechanism, variant: Variant) -> MechanismSpec {
    MechanismSpec::new(mechanism, variant)
}

fn arb_spec() -> impl Strategy<Value = MechanismSpec> {
    (0usize..4, any::<bool>()).prop_map(|(i, risk)| {
        let variant = if risk { Variant::Risk } else { Variant::Base };
        MechanismSpec::new(Mechanism::ALL[i], variant)
    })
}

/// Parameters drawn from a coarse lattice so ties and boundaries show up.
fn arb_params() -> impl Strategy<Value = ModelParams> {
    (1u32..=4, 1u32..=8, 1u32..=6, 0u32..=6, 1u32..=3).prop_map(|(c, vd, extra, r, prior)| {
        let c = f64::from(c) * 0.25;
        ModelParams::new(c, f64::from(vd) * 0.25, c + f64::from(extra) * 0.25)
            .with_r(f64::from(r) * 0.25)
            .with_prior(f64::from(prior) * 0.25)
    })
}

fn arb_grid() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..=12, 1..=2).prop_map(|set| {
        std::iter::once(0.0)
            .chain(set.into_iter().map(|k| f64::from(k) * 0.25))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_naive_reference(spec in arb_spec(), params in arb_params(), grid in arb_grid()) {
        let game = DiscreteGame::new(spec, params, grid.clone()).unwrap();
        let found: HashSet<StrategyProfile> =
            find_all_pbe(&game).unwrap().into_iter().map(|c| c.profile).collect();
        let expected: HashSet<StrategyProfile> = all_profiles(grid.len())
            .into_iter()
            .filter(|p| naive_is_pbe(&game, p))
            .collect();
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn certificates_are_sound(spec in arb_spec(), params in arb_params(), grid in arb_grid()) {
        let game = DiscreteGame::new(spec, params, grid).unwrap();
        for cert in find_all_pbe(&game).unwrap() {
            prop_assert!(recheck_certificate(&game, &cert.profile, &cert.beliefs.posterior), "{:?}", cert);
            let same = cert.profile.signal_of.restrained == cert.profile.signal_of.aggressive;
            prop_assert_eq!(
                same,
                matches!(cert.class, PbeClass::PoolingOnRestraint | PbeClass::PoolingOther)
            );
            for (j, &(lo, hi)) in cert.beliefs.support.iter().enumerate() {
                let q = cert.beliefs.posterior[j];
                prop_assert!(lo <= q + 1e-12 && q <= hi + 1e-12 || cert.beliefs.on_path[j]);
            }
        }
    }

    #[test]
    fn no_screening_without_risk_or_with_noncontingent_costs(
        params in arb_params(),
        grid in arb_grid(),
        which in 0usize..6,
    ) {
        let specs = [
            spec(Mechanism::TyingHands, Variant::Base),
            spec(Mechanism::SunkCosts, Variant::Base),
            spec(Mechanism::SunkCosts, Variant::Risk),
            spec(Mechanism::InstallmentCosts, Variant::Base),
            spec(Mechanism::InstallmentCosts, Variant::Risk),
            spec(Mechanism::ReducibleCosts, Variant::Base),
        ];
        let game = DiscreteGame::new(specs[which], params, grid).unwrap();
        let certs = find_all_pbe(&game).unwrap();
        prop_assert!(certs.iter().all(|c| c.class != PbeClass::Separating));
    }

    #[test]
    fn aggressive_exploits_under_noncontingent_costs(params in arb_params(), grid in arb_grid(), risk in any::<bool>(), sunk in any::<bool>()) {
        let mechanism = if sunk { Mechanism::SunkCosts } else { Mechanism::InstallmentCosts };
        let variant = if risk { Variant::Risk } else { Variant::Base };
        let game = DiscreteGame::new(spec(mechanism, variant), params, grid).unwrap();
        for cert in find_all_pbe(&game).unwrap() {
            let p = &cert.profile;
            for j in [p.signal_of.restrained, p.signal_of.aggressive] {
                if !p.fight_after[j] {
                    prop_assert_eq!(p.t2_action[j].aggressive, T2Action::Exploit);
                }
            }
        }
    }

    /// Dropping signals that nobody sends keeps an equilibrium an equilibrium.
    #[test]
    fn restriction_to_coarser_grid_preserves_certificates(spec in arb_spec(), params in arb_params(), extra in 1u32..=12) {
        let coarse_grid = vec![0.0, 1.0];
        let added = f64::from(extra) * 0.25 + 0.125;
        let mut fine_grid = vec![0.0, 1.0, added];
        fine_grid.sort_by(f64::total_cmp);
        let fine = DiscreteGame::new(spec, params, fine_grid.clone()).unwrap();
        let coarse = DiscreteGame::new(spec, params, coarse_grid.clone()).unwrap();
        let keep: Vec<usize> = coarse_grid
            .iter()
            .map(|m| fine_grid.iter().position(|x| x == m).unwrap())
            .collect();
        let new_index = fine_grid.iter().position(|&x| x == added).unwrap();
        for cert in find_all_pbe(&fine).unwrap() {
            let p = &cert.profile;
            if p.signal_of.restrained == new_index || p.signal_of.aggressive == new_index {
                continue;
            }
            let to_coarse = |j: usize| keep.iter().position(|&k| k == j).unwrap();
            let restricted = StrategyProfile {
                signal_of: PerType::new(to_coarse(p.signal_of.restrained), to_coarse(p.signal_of.aggressive)),
                fight_after: keep.iter().map(|&k| p.fight_after[k]).collect(),
                t2_action: keep.iter().map(|&k| p.t2_action[k]).collect(),
            };
            prop_assert!(is_weak_pbe(&coarse, &restricted).unwrap().is_some());
        }
    }
}

#[test]
fn tying_hands_pooling_found_without_separation() {
    let game = DiscreteGame::new(
        spec(Mechanism::TyingHands, Variant::Base),
        ModelParams::new(0.5, 1.0, 2.0),
        vec![0.0, 2.0],
    )
    .unwrap();
    let certs = find_all_pbe(&game).unwrap();
    assert!(certs
        .iter()
        .any(|c| c.class == PbeClass::PoolingOnRestraint && c.profile.signal_of.restrained == 1));
    assert_eq!(
        certs
            .iter()
            .filter(|c| c.class == PbeClass::Separating)
            .count(),
        0
    );
}

#[test]
fn sunk_risk_has_no_separation() {
    let game = DiscreteGame::new(
        spec(Mechanism::SunkCosts, Variant::Risk),
        ModelParams::new(0.5, 1.0, 2.0).with_r(0.8),
        vec![0.0, 2.0],
    )
    .unwrap();
    let certs = find_all_pbe(&game).unwrap();
    assert_eq!(
        certs
            .iter()
            .filter(|c| c.class == PbeClass::Separating)
            .count(),
        0
    );
}

#[test]
fn risk_variants_separate_at_the_closed_form_point() {
    for mechanism in [Mechanism::TyingHands, Mechanism::ReducibleCosts] {
        let s = spec(mechanism, Variant::Risk);
        let params = ModelParams::new(0.5, 1.0, 2.0).with_r(0.6);
        let game = DiscreteGame::new(s, params, vec![0.0, 1.5]).unwrap();
        let certs = find_all_pbe(&game).unwrap();
        let separating: Vec<_> = certs
            .iter()
            .filter(|c| c.class == PbeClass::Separating)
            .collect();
        assert!(!separating.is_empty(), "{mechanism}");
        for cert in separating {
            assert_eq!(cert.profile.signal_of, PerType::new(1, 0));
            assert!(!cert.profile.fight_after[1]);
            assert!(cert.profile.fight_after[0]);
            assert_eq!(cert.beliefs.posterior, vec![0.0, 1.0]);
        }
        assert!(separating_exists(s, &params, 1.5).unwrap().holds);
    }
}

#[test]
fn universal_fighting_matches_reference() {
    let params = ModelParams::new(0.5, 1.0, 2.0);
    for mechanism in Mechanism::ALL {
        let game =
            DiscreteGame::new(spec(mechanism, Variant::Base), params, vec![0.0, 0.5, 2.0]).unwrap();
        for p in all_profiles(3)
            .into_iter()
            .filter(|p| p.fight_after.iter().all(|&f| f))
        {
            let got = is_weak_pbe(&game, &p).unwrap().is_some();
            assert_eq!(got, naive_is_pbe(&game, &p), "{mechanism} {p:?}");
        }
    }
}

#[test]
fn tying_hands_grid_agrees_with_closed_form() {
    let s = spec(Mechanism::TyingHands, Variant::Base);
    let grid: Vec<(ModelParams, f64)> = [0.5, 1.0, 2.0]
        .into_iter()
        .flat_map(|vd| {
            [0.5, 1.0, 2.0]
                .into_iter()
                .map(move |m| (ModelParams::new(0.5, vd, 2.0), m))
        })
        .collect();
    assert!(verify_against_closed_form(s, &grid).unwrap().is_empty());
}

#[test]
fn installment_grid_agrees_and_is_empty() {
    let s = spec(Mechanism::InstallmentCosts, Variant::Base);
    for vd in [0.5, 1.0, 2.0] {
        for m in [0.5, 1.0, 2.0] {
            let params = ModelParams::new(0.5, vd, 2.0);
            assert!(verify_against_closed_form(s, &[(params, m)])
                .unwrap()
                .is_empty());
            let (verdict, _) = restraint_core::oracle_verdict(s, &params, m).unwrap();
            assert!(!verdict.pooling && !verdict.separating);
        }
    }
}

#[test]
fn boundary_point_pools_on_both_sides() {
    let s = spec(Mechanism::TyingHands, Variant::Base);
    let params = ModelParams::new(0.5, 1.0, 2.0);
    let (verdict, _) = restraint_core::oracle_verdict(s, &params, 1.0).unwrap();
    assert!(verdict.pooling);
    assert!(
        restraint_core::pooling_exists(s, &params, 1.0)
            .unwrap()
            .holds
    );
}

#[test]
fn discrepancy_report_schema() {
    // The two verdicts agree everywhere reachable, so build a record by hand.
    let s = spec(Mechanism::TyingHands, Variant::Base);
    let params = ModelParams::new(0.5, 1.0, 2.0);
    let (verdict, certificates) = restraint_core::oracle_verdict(s, &params, 2.0).unwrap();
    let record = restraint_core::Discrepancy {
        params,
        m: 2.0,
        closed_form_verdict: restraint_core::Verdict {
            pooling: false,
            separating: false,
        },
        oracle_verdict: verdict,
        certificates,
    };
    let json = serde_json::to_value(vec![record]).unwrap();
    let keys: Vec<&str> = json[0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    for key in [
        "params",
        "m",
        "closed_form_verdict",
        "oracle_verdict",
        "certificates",
    ] {
        assert!(keys.contains(&key), "{key} missing from {keys:?}");
    }
}
