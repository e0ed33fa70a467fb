use fiberloom::graphstate::GraphState;
use fiberloom::logical::{LogicalState, Mat2};
use fiberloom::mbqc::{exact_distribution, expected_map, fused_chain3, run, total_variation, Backend, Initial, MeasurementPattern};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn plus_through(m: &Mat2, q: u32) -> LogicalState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = m.apply([Complex64::new(h, 0.0), Complex64::new(h, 0.0)]);
    LogicalState::new(vec![q], v.to_vec()).unwrap()
}

#[test]
fn zero_angle_chains_are_deterministic() {
    for n in 2..=5u32 {
        let chain: Vec<u32> = (0..n).collect();
        let p = MeasurementPattern::linear_chain(&chain, &vec![0.0; n as usize - 1]).unwrap();
        let runs = exact_distribution(&p, &Initial::Graph(GraphState::chain(&chain)), Backend::Graph).unwrap();
        assert_eq!(runs.len(), 1 << (n - 1));
        let want = plus_through(&expected_map(&p).unwrap(), n - 1);
        for r in &runs {
            assert!((r.probability - 0.5f64.powi(n as i32 - 1)).abs() < TOL);
            assert!(r.final_state.fidelity(&want).unwrap() > 1.0 - TOL, "n={n} history {:?}", r.outcomes);
        }
    }
}

#[test]
fn random_angle_chains_up_to_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=5u32 {
        for _ in 0..5 {
            let chain: Vec<u32> = (0..n).collect();
            let thetas: Vec<f64> = (1..n).map(|_| rng.gen_range(-3.2..3.2)).collect();
            let p = MeasurementPattern::linear_chain(&chain, &thetas).unwrap();
            let want = plus_through(&expected_map(&p).unwrap(), n - 1);
            let runs = exact_distribution(&p, &Initial::Graph(GraphState::chain(&chain)), Backend::Graph).unwrap();
            let total: f64 = runs.iter().map(|r| r.probability).sum();
            assert!((total - 1.0).abs() < TOL);
            for r in &runs {
                assert!(r.final_state.fidelity(&want).unwrap() > 1.0 - TOL);
            }
        }
    }
}

#[test]
fn three_chain_backends_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (fused, frame) = fused_chain3().unwrap();
    for _ in 0..5 {
        let thetas = [rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3)];
        let p = MeasurementPattern::linear_chain(&[0, 1, 2], &thetas).unwrap();
        let want = plus_through(&expected_map(&p).unwrap(), 2);
        let graph = exact_distribution(&p, &Initial::Graph(GraphState::chain(&[0, 1, 2])), Backend::Graph).unwrap();
        for initial in [
            Initial::Graph(GraphState::chain(&[0, 1, 2])),
            Initial::Photonic(fused.clone(), frame.clone()),
        ] {
            let circ = exact_distribution(&p, &initial, Backend::Circuit).unwrap();
            assert!(total_variation(&graph, &circ) < 1e-9);
            for r in &circ {
                assert!(r.final_state.fidelity(&want).unwrap() > 1.0 - TOL);
            }
        }
    }
}

#[test]
fn theta_pi_statistics_follow_born_rule() {
    let p = MeasurementPattern::linear_chain(&[0, 1], &[std::f64::consts::PI]).unwrap();
    let g = Initial::Graph(GraphState::chain(&[0, 1]));
    let want = plus_through(&expected_map(&p).unwrap(), 1);
    let mut zeros = 0;
    let trials = 2000;
    for seed in 0..trials {
        let r = run(&p, &g, Backend::Graph, seed).unwrap();
        assert!(r.final_state.fidelity(&want).unwrap() > 1.0 - TOL);
        zeros += usize::from(r.outcomes[0] == 0);
    }
    let f = zeros as f64 / trials as f64;
    assert!((f - 0.5).abs() < 5.0 * (0.25 / trials as f64).sqrt());
}

#[test]
fn signs_depend_only_on_earlier_outcomes() {
    let p = MeasurementPattern::linear_chain(&[0, 1, 2, 3, 4], &[0.1, 0.2, 0.3, 0.4]).unwrap();
    for k in 0..p.steps.len() {
        for h in 0..16usize {
            let mut hist: Vec<u8> = (0..4).map(|i| ((h >> i) & 1) as u8).collect();
            let s = p.sign(k, &hist);
            for later in hist.iter_mut().skip(k) {
                *later ^= 1;
            }
            assert_eq!(p.sign(k, &hist), s);
        }
    }
}
