use proptest::prelude::*;
use qor_core::attacks::{
    classical_trace, endpoint_correlation, expected_support, intercept_measure, InterceptMode, InterceptPlan,
};
use qor_core::protocol::{route, Procedure, RunConfig, RunContext};

fn demo(shots: usize, seed: u64) -> RunContext {
    RunContext::new(RunConfig::demo5(shots, seed)).unwrap()
}

#[test]
fn first_hop_support_is_the_receivers_shifted_branches() {
    let ctx = demo(1, 0);
    assert_eq!(expected_support(&ctx, 0), [116, 193, 213, 248, 307]);
}

#[test]
fn last_hop_support_is_sender_shift_of_first() {
    let ctx = demo(1, 0);
    let sender = ctx.chain().sender();
    let mut shifted: Vec<u64> = expected_support(&ctx, 0).into_iter().map(|j| sender.shift(j)).collect();
    shifted.sort_unstable();
    assert_eq!(expected_support(&ctx, 7), shifted);
}

#[test]
fn attack_on_every_hop_leaves_key_unchanged() {
    let ctx = demo(300, 17);
    for hop in 0..route(ctx.chain()).len() {
        let plan = InterceptPlan::new(&[hop], InterceptMode::MeasureAndResend, 40 + hop as u64);
        let report = intercept_measure(&ctx, &plan).unwrap();
        assert!(report.key_unchanged(), "hop {hop}: {:?}", report.recovered_keys);
        let h = report.hop(hop).unwrap();
        assert_eq!(h.outside_support, 0, "hop {hop}");
        assert_eq!(h.histogram.keys().copied().collect::<Vec<_>>(), h.support, "hop {hop}");
        assert!(h.uniformity.as_ref().unwrap().p_value > 0.001, "hop {hop}");
    }
}

#[test]
fn attack_on_all_hops_at_once() {
    let ctx = demo(200, 2);
    let plan = InterceptPlan::new(&[0, 1, 2, 3, 4, 5, 6, 7], InterceptMode::MeasureAndResend, 1);
    let report = intercept_measure(&ctx, &plan).unwrap();
    assert!(report.key_unchanged());
    assert!(report.hops.iter().all(|h| h.outside_support == 0));
    report.transcript.validate().unwrap();
}

#[test]
fn full_cycle_first_hop_sees_whole_orbit() {
    let config = RunConfig { procedure: Procedure::FullCycle, ..RunConfig::demo5(500, 8) };
    let ctx = RunContext::new(config).unwrap();
    let report = intercept_measure(&ctx, &InterceptPlan::new(&[0], InterceptMode::MeasureAndResend, 3)).unwrap();
    assert!(report.key_unchanged());
    let hop = report.hop(0).unwrap();
    assert_eq!(hop.support.len(), 11);
    assert_eq!(hop.outside_support, 0);
}

#[test]
fn index_stays_hidden_without_transmission() {
    let ctx = demo(50, 0);
    let plan = InterceptPlan::new(&[0, 7], InterceptMode::MeasureAndResend, 0);
    let report = intercept_measure(&ctx, &plan).unwrap();
    assert!(report.key_unchanged());
    assert!(endpoint_correlation(&ctx, 0, 0).is_err());
}

#[test]
fn transmitted_index_links_endpoints() {
    let config = RunConfig { transmit_index: true, ..RunConfig::demo5(1, 21) };
    let ctx = RunContext::new(config).unwrap();
    let sender = ctx.chain().sender();
    let mut indices = [0u64; 5];
    for shot in 0..500 {
        let c = endpoint_correlation(&ctx, 77, shot).unwrap();
        assert!(c.same_index());
        assert_eq!(c.last.1, sender.shift(c.first.1));
        indices[c.first.0 as usize] += 1;
    }
    assert!(indices.iter().all(|&n| n > 50), "{indices:?}");
}

#[test]
fn identity_sender_makes_endpoints_equal() {
    let mut config = RunConfig { transmit_index: true, ..RunConfig::demo5(1, 0) };
    config.chain[0] = serde_json::from_str(r#"{"name":"a","cycle":"a","power":0}"#).unwrap();
    let ctx = RunContext::new(config).unwrap();
    for shot in 0..20 {
        let c = endpoint_correlation(&ctx, 5, shot).unwrap();
        assert_eq!(c.first, c.last);
    }
}

#[test]
fn classical_run_can_be_observed() {
    let config = RunConfig { procedure: Procedure::Classical, ..RunConfig::new(&["a", "b", "e"]) };
    let ctx = RunContext::new(config).unwrap();
    let report = intercept_measure(&ctx, &InterceptPlan::new(&[0, 3], InterceptMode::ObserveClassical, 0)).unwrap();
    assert_eq!(report.hop(0).unwrap().histogram.keys().copied().collect::<Vec<_>>(), [209]);
    assert_eq!(report.hop(3).unwrap().histogram.keys().copied().collect::<Vec<_>>(), [248]);
    assert!(report.key_unchanged());
}

#[test]
fn plans_are_validated() {
    let ctx = demo(1, 0);
    for (hops, mode) in [
        (vec![], InterceptMode::MeasureAndResend),
        (vec![8], InterceptMode::MeasureAndResend),
        (vec![1, 1], InterceptMode::MeasureAndResend),
        (vec![0], InterceptMode::ObserveClassical),
    ] {
        assert!(intercept_measure(&ctx, &InterceptPlan::new(&hops, mode, 0)).is_err(), "{hops:?} {mode:?}");
    }
}

#[test]
fn plan_reads_json() {
    let plan = InterceptPlan::from_json_str(r#"{"hops":[0,3],"seed":4}"#).unwrap();
    assert_eq!(plan, InterceptPlan::new(&[0, 3], InterceptMode::MeasureAndResend, 4));
    assert!(InterceptPlan::from_json_str(r#"{"hops":[0],"bogus":1}"#).is_err());
}

#[test]
fn attack_reports_are_deterministic() {
    let ctx = demo(100, 6);
    let plan = InterceptPlan::new(&[0, 5], InterceptMode::MeasureAndResend, 9);
    let first = serde_json::to_string(&intercept_measure(&ctx, &plan).unwrap()).unwrap();
    let second = serde_json::to_string(&intercept_measure(&ctx, &plan).unwrap()).unwrap();
    assert_eq!(first, second);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn measured_values_stay_on_classical_traces(
        order in Just(vec!["a", "b", "c", "d", "e"]).prop_shuffle(),
        len in 3usize..=5,
        offset in 0usize..11,
        span_seed in any::<usize>(),
        hop_seed in any::<usize>(),
        seed in any::<u64>(),
    ) {
        let span = 1 + span_seed % (11 - offset);
        let config = RunConfig { offset, span, seed, shots: 12, ..RunConfig::new(&order[..len]) };
        let ctx = RunContext::new(config).unwrap();
        let hop = hop_seed % (2 * (len - 1));
        let report = intercept_measure(&ctx, &InterceptPlan::new(&[hop], InterceptMode::MeasureAndResend, seed)).unwrap();
        prop_assert!(report.key_unchanged());
        prop_assert_eq!(report.hop(hop).unwrap().outside_support, 0);
        let trace = classical_trace(ctx.chain(), ctx.table().j0());
        prop_assert_eq!(trace.len(), 2 * (len - 1));
    }
}
