use fiberloom::scenario::{parse_scenario, run_scenario, sample_counts};

fn scenario(kind: &str, tables: &str) -> String {
    format!("fiberloom/1\n[scenario]\nname = \"stats\"\nkind = \"{kind}\"\ntrials = 100000\nseed = 31\n\n{tables}")
}

#[test]
fn frequencies_within_five_sigma() {
    let cases = [
        scenario("fusion", "[fusion]\ngate = \"fusion2_pol\"\ninputs = \"reference\"\n"),
        scenario("fusion", "[fusion]\ngate = \"fusion1_tb\"\n"),
        scenario("circuit", "[circuit]\nname = \"measure_pol\"\ntheta = 1.1\nsign = 1\n"),
    ];
    for text in cases {
        let s = parse_scenario(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        let out = run_scenario(&s).unwrap();
        let total: f64 = out.summary.outcomes.iter().map(|o| o.exact).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for o in &out.summary.outcomes {
            let sigma = (o.exact * (1.0 - o.exact) / 1e5).sqrt();
            assert!(
                (o.empirical - o.exact).abs() <= 5.0 * sigma + 1e-12,
                "{}: {} vs {}",
                o.label,
                o.empirical,
                o.exact
            );
        }
    }
}

#[test]
fn sampler_is_exact_on_degenerate_distributions() {
    assert_eq!(sample_counts(&[0.0, 1.0, 0.0], 1000, 4), vec![0, 1000, 0]);
    let c = sample_counts(&[0.25, 0.75], 10, 4);
    assert_eq!(c.iter().sum::<u64>(), 10);
}
