//! Quick oracle checks run by `fiberloom selftest`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::circuits::{
    bit_flip_circuit, build_rt45, derive_all_byproducts, fuse, gate_matrix, graph_frame, make_seed_cluster, make_seed_cluster_on,
    measure_circuit_pol, measure_circuit_timebin, oracle_fusion, phase_flip_circuit, ptc, reference_inputs, success_probability, tpc,
    Frame, FusionKind, QubitSlot, VertexPair, FROZEN_BYPRODUCTS,
};
use crate::graphstate::{Basis, GraphState, Measured};
use crate::logical::{LogicalState, Mat2};
use crate::mbqc::{exact_distribution, expected_map, Backend, Initial, MeasurementPattern};
use crate::Pol;

const TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("rt45 and Hadamard gate matrices", || {
            let r = gate_matrix(&build_rt45(PI, PI), 0)
                .map_err(|e| e.to_string())?
                .distance_up_to_phase(&Mat2::rot45());
            let h = gate_matrix(&build_rt45(0.0, PI), 0)
                .map_err(|e| e.to_string())?
                .distance_up_to_phase(&Mat2::hadamard());
            Ok((r < TOL && h < TOL, format!("errors {r:.1e}, {h:.1e}")))
        }),
        check("seed cluster", || {
            let (s, f) = make_seed_cluster();
            let got = f.decode(&s).map_err(|e| e.to_string())?;
            let want = LogicalState::new(vec![0, 1], vec![c(0.5), c(0.5), c(0.5), c(-0.5)]).map_err(|e| e.to_string())?;
            let fid = got.fidelity(&want).map_err(|e| e.to_string())?;
            Ok((fid > 1.0 - TOL, format!("fidelity {fid:.12}")))
        }),
        check("fusion success probabilities", || {
            let mut ps = Vec::new();
            for kind in FusionKind::ALL {
                let carrier = if kind.is_polarization() { Pol::H } else { Pol::None };
                let (s1, f1) = make_seed_cluster_on(0, 1, carrier).map_err(|e| e.to_string())?;
                let (s2, f2) = make_seed_cluster_on(2, 3, carrier).map_err(|e| e.to_string())?;
                let joint = s1.tensor(&s2).map_err(|e| e.to_string())?;
                ps.push(success_probability(
                    &fuse(kind, &joint, &f1.merged(&f2), 1, 2).map_err(|e| e.to_string())?,
                ));
            }
            Ok((ps.iter().all(|p| (p - 0.5).abs() < TOL), format!("{ps:?}")))
        }),
        check("fusion branches against graph oracle", || {
            let mut worst: f64 = 1.0;
            for kind in FusionKind::ALL {
                let (g1, VertexPair(v1, v2), g2) = reference_inputs(kind);
                let g = g1.union(&g2).map_err(|e| e.to_string())?;
                let frame = graph_frame(&g, kind.is_polarization());
                let joint = frame
                    .encode(&g.to_statevector().map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                for br in fuse(kind, &joint, &frame, v1, v2).map_err(|e| e.to_string())? {
                    let sim = br.frame.decode(&br.post).map_err(|e| e.to_string())?;
                    let want = oracle_fusion(kind, &g1, v1, &g2, v2, br.outcome).map_err(|e| e.to_string())?;
                    let f = sim
                        .fidelity(&want.to_statevector().map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?;
                    worst = worst.min(f);
                }
            }
            Ok((worst > 1.0 - TOL, format!("worst fidelity {worst:.12}")))
        }),
        check("frozen byproduct table", || {
            let derived = derive_all_byproducts().map_err(|e| e.to_string())?;
            Ok((derived == FROZEN_BYPRODUCTS, "derived table equals checked-in table".into()))
        }),
        check("measurement circuits", || {
            let frame_t = Frame::new([(0, QubitSlot::time_bin(0, 0))]);
            let frame_p = Frame::new([(0, QubitSlot::time_bin_h(0, 0))]);
            let mut worst: f64 = 0.0;
            for (theta, sign) in [(0.0, 1), (PI, 1), (PI / 2.0, -1), (0.7, -1)] {
                let psi = LogicalState::new(vec![0], vec![c(0.6), Complex64::new(0.0, 0.8)]).map_err(|e| e.to_string())?;
                let basis = Mat2::hadamard().mul(&Mat2::rz(f64::from(sign) * theta));
                for (circ, frame) in [
                    (measure_circuit_timebin(&frame_t, 0, theta, sign), &frame_t),
                    (measure_circuit_pol(&frame_p, 0, theta, sign), &frame_p),
                ] {
                    let circ = circ.map_err(|e| e.to_string())?;
                    let branches = circ
                        .run(&frame.encode(&psi).map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?;
                    for m in 0..2u8 {
                        let p: f64 = branches
                            .iter()
                            .filter(|b| crate::circuits::measurement_bit(&b.readout) == Some(m))
                            .map(|b| b.probability)
                            .sum();
                        let (want, _) = psi.measure_after(0, &basis, m).map_err(|e| e.to_string())?;
                        worst = worst.max((p - want).abs());
                    }
                }
            }
            Ok((worst < TOL, format!("max probability error {worst:.1e}")))
        }),
        check("converters and corrections", || {
            let f = Frame::new([(0, QubitSlot::time_bin_h(0, 0))]);
            let t = tpc(&f, 0).map_err(|e| e.to_string())?;
            let round = t.then(&ptc(&t.output, 0).map_err(|e| e.to_string())?);
            let id = gate_matrix(&round, 0)
                .map_err(|e| e.to_string())?
                .distance_up_to_phase(&Mat2::identity());
            let tb = Frame::new([(0, QubitSlot::time_bin(0, 0))]);
            let x = gate_matrix(&bit_flip_circuit(&tb, 0).map_err(|e| e.to_string())?, 0)
                .map_err(|e| e.to_string())?
                .distance_up_to_phase(&Mat2::x());
            let z = gate_matrix(&phase_flip_circuit(&tb, 0).map_err(|e| e.to_string())?, 0)
                .map_err(|e| e.to_string())?
                .distance_up_to_phase(&Mat2::z());
            Ok((id < TOL && x < TOL && z < TOL, format!("errors {id:.1e}, {x:.1e}, {z:.1e}")))
        }),
        check("3-chain feedforward, both backends", || {
            let p = MeasurementPattern::linear_chain(&[0, 1, 2], &[0.3, 1.1]).map_err(|e| e.to_string())?;
            let m = expected_map(&p).map_err(|e| e.to_string())?;
            let v = m.apply([c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]);
            let want = LogicalState::new(vec![2], v.to_vec()).map_err(|e| e.to_string())?;
            let mut worst: f64 = 1.0;
            for backend in [Backend::Graph, Backend::Circuit] {
                for r in exact_distribution(&p, &Initial::Graph(GraphState::chain(&[0, 1, 2])), backend).map_err(|e| e.to_string())? {
                    worst = worst.min(r.final_state.fidelity(&want).map_err(|e| e.to_string())?);
                }
            }
            Ok((worst > 1.0 - TOL, format!("worst fidelity {worst:.12}")))
        }),
        check("X and Z graph rules", || {
            let g = GraphState::from_edges(0..4, [(0, 1), (1, 2), (1, 3), (2, 3)]).map_err(|e| e.to_string())?;
            let sv = g.to_statevector().map_err(|e| e.to_string())?;
            let mut worst: f64 = 1.0;
            for v in 0..4 {
                for (basis, bras) in [(Basis::Z, Mat2::identity()), (Basis::X, Mat2::hadamard())] {
                    for m in 0..2u8 {
                        let (p, want) = sv.measure_after(v, &bras, m).map_err(|e| e.to_string())?;
                        if p < 1e-12 {
                            continue;
                        }
                        let Measured::Graph(r) = g.measure_vertex(v, basis, m).map_err(|e| e.to_string())? else {
                            return Err("graph rule returned a state vector".into());
                        };
                        worst = worst.min(
                            r.to_statevector()
                                .map_err(|e| e.to_string())?
                                .fidelity(&want)
                                .map_err(|e| e.to_string())?,
                        );
                    }
                }
            }
            Ok((worst > 1.0 - TOL, format!("worst fidelity {worst:.12}")))
        }),
    ]
}
