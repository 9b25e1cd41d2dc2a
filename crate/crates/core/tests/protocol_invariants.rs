use proptest::prelude::*;
use sqkd_core::adversary::{build_attack, AttackModel, AttackSpec, BasisPolicy};
use sqkd_core::mock::run_mock_protocol;
use sqkd_core::protocol::{run_protocol, AbortReason, BobAction, Classification, ProtocolConfig};
use sqkd_core::quantum::Basis;

fn attack_strategy() -> impl Strategy<Value = AttackSpec> {
    prop_oneof![
        Just(AttackSpec::NoAttack),
        Just(AttackSpec::MeasureResend(BasisPolicy::AlwaysZ)),
        Just(AttackSpec::MeasureResend(BasisPolicy::AlwaysX)),
        Just(AttackSpec::MeasureResend(BasisPolicy::UniformRandom)),
        any::<bool>().prop_map(|measure_mid| AttackSpec::CnotProbe { measure_mid }),
        (0.0..=std::f64::consts::FRAC_PI_2).prop_map(|theta| AttackSpec::RotationProbe { theta }),
    ]
}

fn config(n: usize, seed: u64, threshold: f64) -> ProtocolConfig {
    ProtocolConfig {
        n,
        delta: 0.5,
        p_ctrl: threshold,
        p_test: threshold,
        seed,
        ..ProtocolConfig::default()
    }
}

fn model(spec: &AttackSpec) -> AttackModel {
    build_attack(spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn records_are_well_formed(spec in attack_strategy(), seed in any::<u64>(), n in 1usize..24) {
        let m = model(&spec);
        let report = run_protocol(&config(n, seed, 1.0), &m).unwrap();
        prop_assert_eq!(report.records.len(), report.num_rounds);
        for (i, r) in report.records.iter().enumerate() {
            prop_assert_eq!(r.index, i);
            let expected = match (r.alice_basis, r.bob_action) {
                (Basis::Z, BobAction::Sift) => Classification::Sift,
                (Basis::Z, BobAction::Ctrl) => Classification::ZCtrl,
                (Basis::X, BobAction::Ctrl) => Classification::XCtrl,
                (Basis::X, BobAction::Sift) => Classification::Discard,
            };
            prop_assert_eq!(r.classification, expected);
            prop_assert_eq!(r.bob_bit.is_some(), r.bob_action == BobAction::Sift);
            prop_assert!(r.alice_return_bit.is_some());
        }
        let c = report.counts;
        prop_assert_eq!(c.sift + c.z_ctrl + c.x_ctrl + c.discard, report.num_rounds);
    }

    #[test]
    fn selected_indices_partition_sift(spec in attack_strategy(), seed in any::<u64>(), n in 1usize..24) {
        let report = run_protocol(&config(n, seed, 1.0), &model(&spec)).unwrap();
        if !report.aborted {
            prop_assert_eq!(report.info_indices.len(), n);
            prop_assert_eq!(report.test_indices.len(), n);
            for i in &report.info_indices {
                prop_assert!(!report.test_indices.contains(i));
                prop_assert_eq!(report.records[*i].classification, Classification::Sift);
            }
            for i in &report.test_indices {
                prop_assert_eq!(report.records[*i].classification, Classification::Sift);
            }
            let tally = &report.rates.test;
            prop_assert_eq!(tally.count, n);
            prop_assert_eq!(tally.rate, Some(tally.mismatches as f64 / n as f64));
        } else {
            prop_assert_eq!(report.abort_reason, AbortReason::InsufficientBits);
        }
    }

    #[test]
    fn attack_free_rounds_are_exact(seed in any::<u64>(), n in 1usize..32) {
        let report = run_protocol(&config(n, seed, 0.0), &model(&AttackSpec::NoAttack)).unwrap();
        for r in &report.records {
            match r.classification {
                Classification::ZCtrl | Classification::XCtrl => {
                    prop_assert_eq!(r.alice_return_bit, Some(r.alice_bit));
                }
                Classification::Sift => prop_assert_eq!(r.bob_bit, Some(r.alice_bit)),
                Classification::Discard => {}
            }
        }
        if !report.aborted {
            prop_assert!(report.keys_match());
        }
    }

    #[test]
    fn runs_are_reproducible(spec in attack_strategy(), seed in any::<u64>()) {
        let c = config(8, seed, 0.3);
        let m = model(&spec);
        let a = run_protocol(&c, &m).unwrap();
        let b = run_protocol(&c, &m).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lowering_thresholds_keeps_aborts(spec in attack_strategy(), seed in any::<u64>(), hi in 0.0f64..=1.0, frac in 0.0f64..=1.0) {
        let m = model(&spec);
        let lo = hi * frac;
        let high = run_protocol(&config(12, seed, hi), &m).unwrap();
        let low = run_protocol(&config(12, seed, lo), &m).unwrap();
        prop_assert!(!high.aborted || low.aborted);
    }

    #[test]
    fn measure_resend_z_leaves_z_rounds_alone(seed in any::<u64>()) {
        let report = run_protocol(&config(16, seed, 1.0), &model(&AttackSpec::MeasureResend(BasisPolicy::AlwaysZ))).unwrap();
        prop_assert_eq!(report.rates.z_ctrl.mismatches, 0);
        prop_assert_eq!(report.rates.test.mismatches, 0);
        prop_assert_eq!(report.eve_sift_accuracy, Some(1.0));
    }

    #[test]
    fn mock_cnot_attack_is_invisible(seed in any::<u64>()) {
        let m = model(&AttackSpec::CnotProbe { measure_mid: false });
        let report = run_mock_protocol(&config(16, seed, 0.0), &m).unwrap();
        for r in &report.records {
            prop_assert_eq!(r.alice_return_bit.is_some(), r.bob_action == BobAction::Ctrl);
            if let Some(bit) = r.alice_return_bit {
                prop_assert_eq!(bit, r.alice_bit);
            }
        }
        prop_assert_eq!(report.eve_sift_accuracy, Some(1.0));
        if !report.aborted {
            prop_assert_eq!(report.eve_accuracy, Some(1.0));
        }
    }
}

#[test]
fn measure_resend_z_aborts_under_a_loose_ctrl_threshold() {
    let m = model(&AttackSpec::MeasureResend(BasisPolicy::AlwaysZ));
    for seed in 0..10 {
        let c = ProtocolConfig {
            p_ctrl: 0.1,
            seed,
            ..ProtocolConfig::default()
        };
        let report = run_protocol(&c, &m).unwrap();
        assert_eq!(report.abort_reason, AbortReason::CtrlErrorHigh, "seed {seed}");
    }
}

#[test]
fn held_cnot_probe_gives_coin_accuracy() {
    let m = model(&AttackSpec::CnotProbe { measure_mid: false });
    let (mut correct, mut total) = (0usize, 0usize);
    for seed in 0..20 {
        let report = run_protocol(&config(64, seed, 0.05), &m).unwrap();
        assert!(!report.aborted, "seed {seed}: {:?}", report.abort_reason);
        let guesses = report.eve_guesses.as_ref().unwrap();
        correct += guesses.iter().zip(&report.alice_info).filter(|(g, a)| g == a).count();
        total += guesses.len();
    }
    let acc = correct as f64 / total as f64;
    // 1280 bits: 3 sigma is about 0.042
    assert!((acc - 0.5).abs() < 0.042, "{acc}");
}
