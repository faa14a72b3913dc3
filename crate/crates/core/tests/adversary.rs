use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use rcm_core::adversary::{
    crack_probability, crack_probability_exact, forge_auth_request, internal_forge_response,
    replay_attack, run_attack_suite, unlinkability_experiment, write_summary_csv, AdversaryContext,
    AdversaryError, NonceSource, SuiteConfig, Testbed,
};
use rcm_core::crypto::{Bls12Dual, ToyGroup, ToyScalar};
use rcm_core::protocol::{
    auth_request_with_nonce, auth_respond, Identity, MessageKind, RegistrationKey, RoadCondition,
    RoadConditionInfo, Timestamp, VehicleCredential,
};

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn forged_requests_fail_and_control_succeeds() {
    let tb = Testbed::new(Bls12Dual, 2, 300, 1).unwrap();
    let rsu = tb.rsu("rsu");
    let genuine = tb.vehicle("car");
    let intruder = Identity::from_label("intruder").unwrap();
    let mut g = rng(2);
    let adv = tb.adversary(&mut g);
    for k in 0..200 {
        let now = Timestamp(k);
        let o = forge_auth_request(&tb, &adv, intruder, None, &rsu, &mut g, now);
        assert!(!o.succeeded);
        assert_eq!(
            o.rejection.unwrap().to_string(),
            "auth_respond:auth_request_invalid"
        );
        let c = forge_auth_request(&tb, &adv, genuine.id, Some(genuine.key), &rsu, &mut g, now);
        assert!(c.succeeded);
    }
}

#[test]
fn forged_request_fails_for_every_toy_nonce() {
    let tb = Testbed::new(ToyGroup::default(), 2, 300, 3).unwrap();
    let rsu = tb.rsu("rsu");
    let fake = VehicleCredential {
        id: Identity::from_label("intruder").unwrap(),
        key: RegistrationKey([7; 20]),
    };
    let mut g = rng(4);
    let accepted = (1..ToyGroup::DEFAULT_MODULUS)
        .filter(|&r| {
            let (m1, _) = auth_request_with_nonce(
                &tb.ctx,
                &tb.params,
                &fake,
                &rsu.id,
                ToyScalar(r),
                Timestamp(0),
            );
            auth_respond(&tb.ctx, &tb.params, &rsu, &m1, &mut g, Timestamp(0)).is_ok()
        })
        .count();
    assert_eq!(accepted, 0);
}

#[test]
fn internal_forgery_fails_and_hides_identity() {
    let tb = Testbed::new(Bls12Dual, 2, 300, 5).unwrap();
    let v = tb.vehicle("car");
    let rsu = tb.rsu("rsu");
    let mut g = rng(6);
    for k in 0..200 {
        let mut adv = AdversaryContext::internal(tb.params.clone(), rsu.id, &mut g);
        let out = internal_forge_response(&tb, &mut adv, &v, rsu.id, &mut g, Timestamp(k));
        assert!(!out.outcome.succeeded);
        assert!(!out.identity_recovered);
        assert_ne!(out.extracted, v.id);
        assert_eq!(adv.captured.len(), 2);
    }
    let mut control = tb.adversary(&mut g).with_guess(tb.ta.master_key().clone());
    let out = internal_forge_response(&tb, &mut control, &v, rsu.id, &mut g, Timestamp(0));
    assert!(out.outcome.succeeded);
    assert!(out.identity_recovered);
}

#[test]
fn replays_outside_window_fail() {
    let tb = Testbed::new(Bls12Dual, 2, 300, 7).unwrap();
    let v = tb.vehicle("car");
    let rsu = tb.rsu("rsu");
    let info = RoadConditionInfo::at_position(RoadCondition::Pothole, 1.0, 1.0);
    let mut g = rng(8);
    let run = tb
        .honest_run(&v, &rsu, &info, &mut g, Timestamp(10_000))
        .unwrap();
    for kind in MessageKind::ALL {
        let r = replay_attack(&tb, &run, kind, 301, &mut g);
        assert!(!r.outcome.succeeded, "{kind}");
        assert!(!r.accepted_by_target, "{kind}");
        assert_eq!(r.outcome.rejection.unwrap().kind, "freshness", "{kind}");
    }
    // Inside the window the RSU answers M1, but the replayer has no r_i.
    let r1 = replay_attack(&tb, &run, MessageKind::AuthRequest, 299, &mut g);
    assert!(r1.accepted_by_target && !r1.outcome.succeeded);
    // M3 inside the window is processed again: a duplicate report.
    let r3 = replay_attack(&tb, &run, MessageKind::InitialReport, 299, &mut g);
    assert!(r3.accepted_by_target && r3.outcome.succeeded);
}

#[test]
fn crack_probability_values() {
    let p = crack_probability(64).unwrap();
    assert_eq!(p, 100.0 / 18_446_744_073_709_551_616.0);
    assert_eq!(crack_probability(1).unwrap(), 50.0);
    assert_eq!(crack_probability(8).unwrap(), 0.390625);
    assert_eq!(crack_probability(0), Err(AdversaryError::ZeroBits));
    for n in 1..=128u32 {
        let exact = crack_probability_exact(n).unwrap();
        let scaled = exact * BigRational::from_integer(BigInt::from(2).pow(n));
        assert_eq!(scaled, BigRational::from_integer(BigInt::from(100)));
    }
}

#[test]
fn linking_game() {
    let tb = Testbed::new(Bls12Dual, 2, 300, 9).unwrap();
    let fresh = unlinkability_experiment(&tb, 1000, 1, NonceSource::Fresh).unwrap();
    assert!(fresh.advantage < 0.1, "{fresh:?}");
    let broken = unlinkability_experiment(&tb, 200, 1, NonceSource::ReusedPerVehicle).unwrap();
    assert_eq!(broken.advantage, 1.0);
    assert_eq!(
        unlinkability_experiment(&tb, 10, 1, NonceSource::Fresh),
        Err(AdversaryError::TooFewTrials { min: 100, got: 10 })
    );
    // Same seed, same result regardless of thread scheduling.
    assert_eq!(
        fresh,
        unlinkability_experiment(&tb, 1000, 1, NonceSource::Fresh).unwrap()
    );
}

#[test]
fn one_rsu_answers_two_vehicles_with_unrelated_tokens() {
    let tb = Testbed::new(Bls12Dual, 2, 300, 10).unwrap();
    let rsu = tb.rsu("rsu");
    let info = RoadConditionInfo::at_position(RoadCondition::Ice, 0.0, 0.0);
    let mut g = rng(11);
    let a = tb
        .honest_run(&tb.vehicle("car-a"), &rsu, &info, &mut g, Timestamp(100))
        .unwrap();
    let b = tb
        .honest_run(&tb.vehicle("car-b"), &rsu, &info, &mut g, Timestamp(200))
        .unwrap();
    assert_ne!(a.m2.y1, b.m2.y1);
    assert_ne!(a.m2.cj, b.m2.cj);
    assert_ne!(a.m2.t_rj, b.m2.t_rj);
}

#[test]
fn small_suite_meets_expectations() {
    let tb = Testbed::new(ToyGroup::default(), 2, 300, 12).unwrap();
    let config = SuiteConfig {
        trials: 30,
        seed: 3,
        tamper: false,
        unlinkability_trials: 0,
    };
    let rows = run_attack_suite(&tb, config).unwrap();
    assert_eq!(rows.len(), 11);
    for row in &rows {
        assert!(row.as_expected(), "{row:?}");
        assert_eq!(row.trials, 30);
    }
    assert_eq!(rows, run_attack_suite(&tb, config).unwrap());
    let mut out = Vec::new();
    write_summary_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("attack,expected,trials,successes,rejection_point,note\n"));
    assert_eq!(text.lines().count(), 12);
}
