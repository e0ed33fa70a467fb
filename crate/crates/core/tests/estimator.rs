use fiberloom::resources::{estimate_resources, heralding_probability, EstimateConfig, LossModel, Strategy};

/// Exact expected seed count by solving the chain-length Markov chain with
/// value iteration.
fn oracle(n: usize, p: f64, strategy: Strategy) -> f64 {
    let mut e = vec![0.0f64; n + 1];
    loop {
        let mut next = e.clone();
        next[0] = 1.0 + e[2.min(n)];
        for l in 1..n {
            let fail = if strategy == Strategy::Type1Greedy { e[l - 1] } else { e[l] };
            next[l] = 1.0 + p * e[l + 1] + (1.0 - p) * fail;
        }
        let delta = next.iter().zip(&e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        e = next;
        if delta < 1e-12 {
            return 1.0 + e[2.min(n)];
        }
    }
}

fn cfg(target: usize, strategy: Strategy, p: f64, seed: u64) -> EstimateConfig {
    EstimateConfig {
        target,
        strategy,
        loss: LossModel::lossless(),
        trials: 40_000,
        seed,
        success_override: Some(p),
    }
}

#[test]
fn oracle_closed_forms() {
    assert!((oracle(3, 0.5, Strategy::Type1Greedy) - 4.5).abs() < 1e-9);
    // type-II needs a geometric number of attempts per added vertex
    for n in 2..8 {
        assert!((oracle(n, 0.25, Strategy::Type2Redundant) - (1.0 + (n as f64 - 2.0) * 4.0)).abs() < 1e-9);
    }
}

#[test]
fn estimates_agree_with_markov_oracle() {
    for (i, (n, p, strategy)) in [
        (3, 0.5, Strategy::Type1Greedy),
        (4, 0.5, Strategy::Type1Greedy),
        (5, 0.7, Strategy::Type1Greedy),
        (4, 0.5, Strategy::Type2Redundant),
        (6, 0.3, Strategy::Type2Redundant),
    ]
    .into_iter()
    .enumerate()
    {
        let r = estimate_resources(&cfg(n, strategy, p, 100 + i as u64)).unwrap();
        let want = oracle(n, p, strategy);
        assert_eq!(r.censored, 0);
        assert!(
            (r.expected_seeds - want).abs() < 4.0 * r.std_error,
            "n={n} p={p} {strategy:?}: {} vs {want}",
            r.expected_seeds
        );
        assert!(r.p50 <= r.p90 && r.p90 <= r.p99 && r.p99 <= r.max);
    }
}

#[test]
fn heralding_is_monotone_in_loss() {
    for strategy in [Strategy::Type1Greedy, Strategy::Type2Redundant] {
        let h: Vec<f64> = (0..=12)
            .map(|k| heralding_probability(strategy, &LossModel::active(k as f64 * 0.05)))
            .collect();
        assert_eq!(h[0], 0.5);
        assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
    }
}

#[test]
fn passive_loss_is_ignored_by_active_profile() {
    let m = LossModel::active(0.4);
    assert!(!m.per_kind.contains_key("coupler"));
    assert!(m.per_kind.contains_key("switch") && m.per_kind.contains_key("phase_mod"));
}

#[test]
fn thread_count_does_not_change_results() {
    let c = cfg(5, Strategy::Type1Greedy, 0.5, 9);
    let par = estimate_resources(&c).unwrap();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| estimate_resources(&c).unwrap());
    assert_eq!(par, serial);
}
