use num_bigint::BigInt;

use fibtrib::mpreal::{AlgebraicConstants, CReal, PrecisionPolicy};
use fibtrib::reduction::{
    run_campaign, run_stage0, run_stage1, run_stage2, run_stage3, CampaignConfig, CampaignError, CampaignOptions, Gap,
    ReductionError, ReductionInstance, Sign,
};

fn eight_e51() -> BigInt {
    BigInt::from(8) * BigInt::from(10).pow(51u32)
}

fn opts(modulus: Option<&str>) -> CampaignOptions {
    CampaignOptions {
        modulus: modulus.map(String::from),
        required_modulus: Some(eight_e51()),
        ..CampaignOptions::default()
    }
}

#[test]
fn shipped_campaign_completes() {
    let r = run_campaign(&CampaignConfig::shipped(), &opts(None)).unwrap();
    assert!(r.proof_complete, "{r}");
    assert!(r.hypothesis_satisfied && r.contradiction && r.mu_well_defined);
    let f = r.final_bounds.as_ref().unwrap();
    assert_eq!((f.fib_gap, f.trib_gap, f.n), (279, 219, 291));
}

#[test]
fn smaller_modulus_gives_smaller_bounds_but_no_proof() {
    let cfg = CampaignConfig::shipped();
    let full = run_campaign(&cfg, &opts(None)).unwrap();
    let toy = run_campaign(&cfg, &opts(Some("1000"))).unwrap();
    assert!(!toy.hypothesis_satisfied);
    assert!(!toy.proof_complete);
    for (a, b) in full.stages.iter().zip(&toy.stages) {
        for g in [Gap::FibGap, Gap::TribGap, Gap::N] {
            if let (Some(x), Some(y)) = (a.bound(g), b.bound(g)) {
                assert!(y <= x, "stage {} {g:?}: {y} > {x}", a.id);
            }
        }
    }
}

#[test]
fn modulus_below_requirement_is_flagged() {
    let r = run_campaign(&CampaignConfig::shipped(), &opts(Some("1e10"))).unwrap();
    assert!(!r.hypothesis_satisfied);
    assert!(!r.proof_complete);
}

#[test]
fn precision_cap_is_reported() {
    let o = CampaignOptions { policy: PrecisionPolicy { initial: 64, max: 64, factor: 2 }, ..opts(None) };
    match run_campaign(&CampaignConfig::shipped(), &o) {
        Err(CampaignError::PrecisionExhausted { bits, .. }) => assert_eq!(bits, 64),
        other => panic!("expected precision exhaustion, got {other:?}"),
    }
}

#[test]
fn without_escalation_stage_two_fails_at_k90() {
    let mut cfg = CampaignConfig::shipped();
    cfg.max_escalations = 0;
    let r = run_campaign(&cfg, &opts(None)).unwrap();
    assert!(!r.proof_complete);
    assert!(r.failures.iter().any(|f| f.contains("stage 2") && f.contains("k=90")), "{:?}", r.failures);
}

#[test]
fn stages_thread_their_bounds() {
    let cfg = CampaignConfig::shipped();
    let c = AlgebraicConstants::new(1024).unwrap();
    let m = eight_e51();
    let s0 = run_stage0(&cfg, &c, &m).unwrap();
    assert_eq!((s0.bound(Gap::FibGap), s0.bound(Gap::TribGap)), (Some(271), Some(212)));
    let s1 = run_stage1(&cfg, &c, &m, 271).unwrap();
    assert_eq!(s1.bound(Gap::TribGap), Some(219));
    let s2 = run_stage2(&cfg, &c, &m, 212).unwrap();
    assert_eq!(s2.bound(Gap::FibGap), Some(279));
    let rescued: Vec<String> = s2.sweep(Sign::Positive).rescued.iter().map(|k| k.to_string()).collect();
    assert_eq!(rescued, ["k=90"]);
    let s3 = run_stage3(&cfg, &c, &m, 279, 219).unwrap();
    assert_eq!(s3.bound(Gap::N), Some(291));
    assert!(s3.sweeps.iter().all(|s| s.ok()));
}

#[test]
fn lemma_hypotheses_are_enforced() {
    let p = 128;
    let x = CReal::from_ratio(1, 3, p);
    let m = BigInt::from(10);
    let bad_a =
        ReductionInstance::new(x.clone(), x.clone(), CReal::zero(p), CReal::from_integer(2, p), m.clone(), 100.into());
    assert!(matches!(bad_a, Err(ReductionError::HypothesisViolated(_))));
    let bad_b = ReductionInstance::new(x.clone(), x.clone(), CReal::one(p), CReal::one(p), m.clone(), 100.into());
    assert!(matches!(bad_b, Err(ReductionError::HypothesisViolated(_))));
    let bad_q = ReductionInstance::new(x.clone(), x.clone(), CReal::one(p), CReal::from_integer(2, p), m, 60.into());
    assert!(matches!(bad_q, Err(ReductionError::HypothesisViolated(_))));
}
