use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regolith::campaign::{presets, Clock, Session, SessionSpec};
use regolith::intrusion::{synthesize, IntruderSpec, IntrusionProtocol, SynthesisConfig};
use regolith::leg::GaitKind;
use regolith::sampler::{
    explore_reward, fit_template, hypothesis_confidence, objective_weight, update_belief, verify_rewards,
    AutonomyState, DecisionRecord, Feedback, Hypothesis, HypothesisShape, Measurement, Outcome, SamplerConfig,
    SamplingGeometry, Suggestion,
};
use regolith::terrain::{k_of_phi, make_patchy, EnvironmentConfig, MaterialColumn, MaterialPreset, Patch, PatchSpec};

fn m(id: u64, location: f64, strength: f64) -> Measurement {
    Measurement {
        id,
        location,
        strength,
        gait: GaitKind::CrawlNSense,
        timestamp_ms: 0,
        valid: true,
        summary: None,
        cost_s: 0.0,
        seed: 0,
    }
}

fn hypothesis() -> impl Strategy<Value = Hypothesis> {
    prop_oneof![
        Just(HypothesisShape::MonotoneIncreasing),
        Just(HypothesisShape::MonotoneDecreasing),
        (0.05..0.95f64).prop_map(|peak| HypothesisShape::Unimodal { peak }),
    ]
    .prop_map(|s| Hypothesis::new(s, ""))
}

fn measurements(max: usize) -> impl Strategy<Value = Vec<Measurement>> {
    prop::collection::vec((0.0..=1.0f64, 0.0..300.0f64), 0..max)
        .prop_map(|v| v.into_iter().enumerate().map(|(i, (x, y))| m(i as u64, x, y)).collect())
}

fn sand(phi: f64) -> MaterialColumn {
    MaterialColumn::cohesionless(phi, 2650.0, 2.5e-4, 0.55, 10.0)
}

proptest! {
    #[test]
    fn k_of_phi_is_increasing(a in 0.55..0.64f64, b in 0.55..0.64f64) {
        prop_assume!(a < b);
        let p = MaterialPreset::QUARTZ_SAND;
        prop_assert!(k_of_phi(a, &p).unwrap() < k_of_phi(b, &p).unwrap());
    }

    #[test]
    fn rewards_stay_in_unit_interval(ms in measurements(12), h in hypothesis(), n in 3usize..80) {
        let g = SamplingGeometry::uniform(10.0, n);
        let cfg = SamplerConfig::default();
        for &x in &g.candidates {
            let e = explore_reward(x, &ms, &g, &cfg);
            prop_assert!((0.0..=1.0).contains(&e), "explore {e}");
        }
        if let Ok(belief) = update_belief(&ms, &g, &cfg) {
            for v in verify_rewards(&belief, &h, &ms).values {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v), "verify {v}");
            }
        }
        let w = objective_weight(&ms, &cfg);
        prop_assert!((0.0..=1.0).contains(&w));
    }

    #[test]
    fn weight_never_rises_with_more_measurements(ms in measurements(12), x in 0.0..=1.0f64) {
        let cfg = SamplerConfig::default();
        let before = objective_weight(&ms, &cfg);
        let mut more = ms.clone();
        more.push(m(99, x, 1.0));
        prop_assert!(objective_weight(&more, &cfg) <= before + 1e-15);
    }

    #[test]
    fn on_curve_point_never_lowers_confidence(ms in measurements(10), h in hypothesis(), x in 0.0..=1.0f64) {
        let points: Vec<(f64, f64)> = ms.iter().map(|m| (m.location, m.strength)).collect();
        prop_assume!(points.len() >= 2);
        let (Ok(before), Some(fit)) = (hypothesis_confidence(&h, &ms), fit_template(&h, &points)) else {
            return Ok(());
        };
        prop_assume!(!before.degenerate);
        let mut more = ms.clone();
        more.push(m(99, x, fit.predict(&h, x)));
        let after = hypothesis_confidence(&h, &more).unwrap();
        prop_assert!(after.value >= before.value - 1e-9, "{} -> {}", before.value, after.value);
    }

    #[test]
    fn only_accepts_and_alternatives_are_enqueued(
        choices in prop::collection::vec((0usize..3, 0usize..21), 1..12),
    ) {
        let g = SamplingGeometry::uniform(1.0, 21);
        let mut s = AutonomyState::default();
        let mut expect = Vec::new();
        for (kind, alt) in choices {
            let suggestion = Suggestion {
                location: 0.5,
                explore_reward: 1.0,
                verify_reward: 0.0,
                weight: 1.0,
                combined: 1.0,
                explanation: String::new(),
            };
            let round = s.issue_round(1.0, vec![suggestion.clone()]);
            let outcome = match kind {
                0 => { expect.push(0.5); Outcome::Accepted }
                1 => {
                    let location = g.candidates[alt];
                    expect.push(location);
                    Outcome::RejectedWithAlternative { location }
                }
                _ => Outcome::RejectedNoAlternative,
            };
            s.record_decision(DecisionRecord { round, suggestion, outcome, feedback: Feedback::None }, &g).unwrap();
        }
        prop_assert_eq!(s.queue.into_iter().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn synthesis_is_deterministic(seed in any::<u64>(), phi in 0.55..0.64f64) {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            synthesize(&sand(phi), &IntruderSpec::LAB_CYLINDER, &IntrusionProtocol::default(),
                &EnvironmentConfig::default(), &SynthesisConfig::default(), &mut rng).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn patch_rim_matches_brute_force(
        cx in 0.0..5.0f64, cy in 0.0..3.0f64, r in 0.1..2.5f64, cell in 0.1..0.5f64,
    ) {
        let spec = PatchSpec {
            width: 5.0,
            height: 3.0,
            cell,
            background: sand(0.58),
            patches: vec![Patch { center: [cx, cy], radius: r, column: sand(0.62) }],
            phi_jitter: 0.0,
        };
        let field = make_patchy(&spec, &EnvironmentConfig::default()).unwrap();
        let (nx, ny) = field.grid_size().unwrap();
        let mut brute = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = ((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);
                let d = (x - cx).hypot(y - cy);
                if d > r - cell && d <= r {
                    brute.push((i, j));
                }
                prop_assert_eq!(field.cell_owner(i, j).is_some(), d <= r);
            }
        }
        let mut got = field.patch_boundary_cells(0);
        got.sort_by_key(|&(i, j)| (j, i));
        prop_assert_eq!(got, brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sessions_are_deterministic(seed in any::<u64>(), plan in prop::collection::vec(0.0..=1.0f64, 1..4)) {
        let site = presets::white_sands().unwrap();
        let run = || {
            let spec = SessionSpec::new(&site, seed).unwrap().with_id("d");
            let mut s = Session::create(spec, Clock::Fixed(0)).unwrap();
            s.run_initial_plan(&plan, None).unwrap();
            let round = s.suggestions(2).unwrap();
            s.decide_rank(round.round, 0, Outcome::Accepted, Feedback::None).unwrap();
            s.measure_pending(None).unwrap();
            s.events_jsonl(0)
        };
        prop_assert_eq!(run(), run());
    }
}
