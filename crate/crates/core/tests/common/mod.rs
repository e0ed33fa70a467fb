//! Independent oracles and generators shared by the property and acceptance
//! suites. Nothing here goes through the library's state expansion.

#![allow(dead_code)]

use std::f64::consts::PI;

use fiberloom::circuits::{
    gate_matrix, hadamard_pol, hadamard_t, measure_circuit_pol, measure_circuit_timebin, measurement_bit, ptc, rt45_circuit, rt45_pol, tpc,
    Frame, QubitSlot,
};
use fiberloom::fock::{DetectorModel, Mode, ModeSelector, ModeUnitary, Occupation, PhotonicState};
use fiberloom::graphstate::{Basis, GraphState, Measured};
use fiberloom::logical::{LogicalState, Mat2, Pauli};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const TOL: f64 = 1e-10;
pub const MODES: usize = 4;

pub fn mode(i: usize) -> Mode {
    Mode::tb(i as u32, 0)
}

/// A two-mode optical operation on modes `a`, `b` of a four-mode network.
#[derive(Clone, Debug)]
pub enum Op {
    Coupler { a: usize, b: usize, ratio: f64, phase: f64 },
    Rotation { a: usize, b: usize, angle: f64 },
    Phase { a: usize, phase: f64 },
}

impl Op {
    pub fn unitary(&self) -> ModeUnitary {
        match *self {
            Op::Coupler { a, b, ratio, phase } => ModeUnitary::coupler(mode(a), mode(b), ratio, phase).unwrap(),
            Op::Rotation { a, b, angle } => ModeUnitary::rotation(mode(a), mode(b), angle).unwrap(),
            Op::Phase { a, phase } => ModeUnitary::phase(mode(a), phase),
        }
    }

    /// The same operation as a dense `MODES x MODES` matrix, `m[row][col]`.
    pub fn dense(&self) -> Vec<Vec<Complex64>> {
        let u = self.unitary();
        let idx: Vec<usize> = u.modes().iter().map(|m| m.rail as usize).collect();
        let mut d = identity(MODES);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                d[i][j] = u.entry(r, c);
            }
        }
        d
    }
}

pub fn identity(n: usize) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

pub fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Dense matrix of a whole network (first op applied first).
pub fn network_matrix(ops: &[Op]) -> Vec<Vec<Complex64>> {
    ops.iter().fold(identity(MODES), |acc, op| matmul(&op.dense(), &acc))
}

pub fn apply_network(ops: &[Op], s: &PhotonicState) -> PhotonicState {
    ops.iter().fold(s.clone(), |acc, op| acc.apply_unitary(&op.unitary()).unwrap())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Permanent by direct expansion over permutations.
pub fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    permutations(m.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| m[i][j]).product::<Complex64>())
        .sum()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Every way to place `n` photons in `MODES` modes.
pub fn occupations(n: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i);
            rec(left - i, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, MODES, &mut Vec::new(), &mut out);
    out
}

fn mode_list(counts: &[u32]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
        .collect()
}

/// `<out| U |in>` from the permanent of the submatrix selected by the two
/// occupation patterns.
pub fn permanent_amplitude(u: &[Vec<Complex64>], input: &[u32], output: &[u32]) -> Complex64 {
    let (rows, cols) = (mode_list(output), mode_list(input));
    let sub: Vec<Vec<Complex64>> = rows.iter().map(|&r| cols.iter().map(|&c| u[r][c]).collect()).collect();
    let norm: f64 = input.iter().chain(output).map(|&n| factorial(n)).product::<f64>().sqrt();
    permanent(&sub) / norm
}

pub fn occ(counts: &[u32]) -> Occupation {
    Occupation::from_counts(counts.iter().enumerate().map(|(i, &n)| (mode(i), n)))
}

pub fn state(terms: &[(Vec<u32>, Complex64)]) -> PhotonicState {
    PhotonicState::from_terms(terms.iter().map(|(c, a)| (occ(c), *a)))
        .unwrap()
        .normalized()
        .unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn arb_op() -> impl Strategy<Value = Op> {
    let pair = (0..MODES, 1..MODES).prop_map(|(a, k)| (a, (a + k) % MODES));
    prop_oneof![
        (pair.clone(), 0.0..=1.0f64, -PI..PI).prop_map(|((a, b), ratio, phase)| Op::Coupler { a, b, ratio, phase }),
        (pair, -PI..PI).prop_map(|((a, b), angle)| Op::Rotation { a, b, angle }),
        (0..MODES, -PI..PI).prop_map(|(a, phase)| Op::Phase { a, phase }),
    ]
}

pub fn arb_network() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(arb_op(), 1..8)
}

pub fn arb_amp() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| c(re, im))
}

fn arb_state_n(n: u32) -> impl Strategy<Value = PhotonicState> {
    prop::collection::vec((prop::sample::select(occupations(n)), arb_amp()), 1..5)
        .prop_filter("nonzero", |t| t.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|t| state(&t))
}

/// A normalised superposition of up to four occupation patterns with the
/// same photon number (1 to 3).
pub fn arb_state() -> impl Strategy<Value = PhotonicState> {
    (1u32..=3).prop_flat_map(arb_state_n)
}

pub fn arb_pair_same_n() -> impl Strategy<Value = (PhotonicState, PhotonicState)> {
    (1u32..=3).prop_flat_map(|n| (arb_state_n(n), arb_state_n(n)))
}

pub fn arb_qubit() -> impl Strategy<Value = [Complex64; 2]> {
    (arb_amp(), arb_amp())
        .prop_filter("nonzero", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-3)
        .prop_map(|(a, b)| {
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            [a / n, b / n]
        })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn check_norm(ops: &[Op], s: &PhotonicState) -> Result<(), TestCaseError> {
    let out = apply_network(ops, s);
    ensure((out.norm_sqr() - 1.0).abs() < TOL, || format!("norm {}", out.norm_sqr()))?;
    ensure(out.photons() == s.photons(), || "photon number changed".into())
}

pub fn check_unitarity(ops: &[Op], a: &PhotonicState, b: &PhotonicState) -> Result<(), TestCaseError> {
    let before = a.inner(b);
    let after = apply_network(ops, a).inner(&apply_network(ops, b));
    ensure((before - after).norm() < TOL, || format!("inner product {before} -> {after}"))
}

pub fn check_composition(ops: &[Op], s: &PhotonicState) -> Result<(), TestCaseError> {
    // consecutive ops on the same mode pair fold into one unitary
    for w in ops.windows(2) {
        let (u, v) = (w[0].unitary(), w[1].unitary());
        if u.modes() == v.modes() {
            let seq = s.apply_unitary(&u).unwrap().apply_unitary(&v).unwrap();
            let one = s.apply_unitary(&v.compose(&u).unwrap()).unwrap();
            ensure((seq.fidelity(&one) - 1.0).abs() < TOL, || "composition mismatch".into())?;
        }
    }
    Ok(())
}

pub fn check_permanent(ops: &[Op], input: &[u32]) -> Result<(), TestCaseError> {
    let u = network_matrix(ops);
    let out = apply_network(ops, &PhotonicState::basis(occ(input)).unwrap());
    for o in occupations(input.iter().sum()) {
        let want = permanent_amplitude(&u, input, &o);
        let got = out.amplitude(&occ(&o));
        ensure((want - got).norm() < TOL, || format!("{o:?}: permanent {want}, simulated {got}"))?;
    }
    Ok(())
}

pub fn check_detect(ops: &[Op], s: &PhotonicState, watched: &[bool; MODES], threshold: bool) -> Result<(), TestCaseError> {
    let s = apply_network(ops, s);
    let sel: Vec<ModeSelector> = (0..MODES)
        .filter(|&i| watched[i])
        .map(|i| ModeSelector::Exact(vec![mode(i)]))
        .collect();
    if sel.is_empty() {
        return Ok(());
    }
    let model = if threshold {
        DetectorModel::Threshold
    } else {
        DetectorModel::NumberResolving
    };
    let branches = s.detect(&sel, model).unwrap();
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    ensure((total - 1.0).abs() < TOL, || format!("probabilities sum to {total}"))?;
    let n = s.photons();
    for b in &branches {
        // oracle: weight of all basis patterns agreeing on the watched modes
        let want: f64 = occupations(n)
            .iter()
            .filter(|o| (0..MODES).filter(|&i| watched[i]).all(|i| o[i] == b.pattern.count(&mode(i))))
            .map(|o| s.amplitude(&occ(o)).norm_sqr())
            .sum();
        ensure((b.probability - want).abs() < TOL, || {
            format!("branch {:?}: {} vs {want}", b.pattern, b.probability)
        })?;
        ensure(b.post.is_empty() || (b.post.norm_sqr() - 1.0).abs() < TOL, || {
            "post-state not normalised".into()
        })?;
        for (i, &r) in b.readout.iter().enumerate() {
            let k = (0..MODES).filter(|&m| watched[m]).nth(i).unwrap();
            let count = b.pattern.count(&mode(k));
            let expect = if threshold { count.min(1) } else { count };
            ensure(r == expect, || format!("readout {r} for count {count}"))?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct GraphCase {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
    pub frame: Vec<(u32, Pauli)>,
    pub v: u32,
    pub basis_x: bool,
    pub outcome: u8,
}

pub fn arb_graph_case() -> impl Strategy<Value = GraphCase> {
    (2u32..=5).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let np = pairs.len();
        let pauli = prop::sample::select(vec![Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]);
        (
            prop::collection::vec(any::<bool>(), np),
            prop::collection::vec(pauli, n as usize),
            0..n,
            any::<bool>(),
            0u8..2,
        )
            .prop_map(move |(mask, ps, v, basis_x, outcome)| GraphCase {
                n,
                edges: pairs.iter().zip(mask).filter(|(_, m)| *m).map(|(e, _)| *e).collect(),
                frame: (0..n).zip(ps).collect(),
                v,
                basis_x,
                outcome,
            })
    })
}

/// Graph-rule measurement against projection of the full state vector.
pub fn check_graph_rule(case: &GraphCase) -> Result<(), TestCaseError> {
    let mut g = GraphState::from_edges(0..case.n, case.edges.iter().copied()).unwrap();
    for &(v, p) in &case.frame {
        g = g.with_pauli(v, p).unwrap();
    }
    let basis = if case.basis_x { Basis::X } else { Basis::Z };
    let (p, want) = g
        .to_statevector()
        .unwrap()
        .measure_after(case.v, &basis.bras(), case.outcome)
        .unwrap();
    if p < 1e-12 {
        return Ok(());
    }
    let got = match g.measure_vertex(case.v, basis, case.outcome).unwrap() {
        Measured::Graph(r) => r.to_statevector().unwrap(),
        Measured::Vector(s) => s,
    };
    let f = got.fidelity(&want).unwrap();
    ensure(f > 1.0 - TOL, || format!("fidelity {f}"))
}

pub fn tb_frame() -> Frame {
    Frame::new([(0, QubitSlot::time_bin(0, 0))])
}

pub fn h_frame() -> Frame {
    Frame::new([(0, QubitSlot::time_bin_h(0, 0))])
}

pub fn qubit_state(v: [Complex64; 2]) -> LogicalState {
    LogicalState::new(vec![0], v.to_vec()).unwrap()
}

pub fn check_converter_roundtrip(v: [Complex64; 2]) -> Result<(), TestCaseError> {
    let f = h_frame();
    let psi = qubit_state(v);
    let t = tpc(&f, 0).unwrap();
    let pol = t.output.decode(&t.evolve(&f.encode(&psi).unwrap()).unwrap()).unwrap();
    let back = ptc(&t.output, 0).unwrap();
    let out = back.output.decode(&back.evolve(&t.output.encode(&pol).unwrap()).unwrap()).unwrap();
    let fid = out.fidelity(&psi).unwrap();
    ensure(fid > 1.0 - TOL, || format!("fidelity {fid}"))
}

/// The same logical gate in both encodings.
pub fn check_encoding_duality(phi1: f64, phi2: f64) -> Result<(), TestCaseError> {
    let tb = gate_matrix(&rt45_circuit(&tb_frame(), 0, phi1, phi2).unwrap(), 0).unwrap();
    let d = |phi: f64| Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, PI - phi));
    let want = d(phi2).mul(&Mat2::rot45()).mul(&d(phi1));
    ensure(tb.distance_up_to_phase(&want) < TOL, || {
        format!("rt45({phi1}, {phi2}) does not match its phase-settings formula")
    })?;
    let pol_rt = gate_matrix(&rt45_pol(&h_frame(), 0).unwrap(), 0).unwrap();
    let tb_rt = gate_matrix(&rt45_circuit(&tb_frame(), 0, PI, PI).unwrap(), 0).unwrap();
    ensure(pol_rt.distance_up_to_phase(&tb_rt) < TOL, || {
        "rt45 differs between encodings".into()
    })?;
    let pol_h = gate_matrix(&hadamard_pol(&h_frame(), 0).unwrap(), 0).unwrap();
    let tb_h = gate_matrix(&hadamard_t(&tb_frame(), 0).unwrap(), 0).unwrap();
    ensure(pol_h.distance_up_to_phase(&tb_h) < TOL, || {
        "Hadamard differs between encodings".into()
    })?;
    ensure(tb.unitarity_defect() < TOL, || "gate not unitary".into())
}

/// Outcome probabilities of both measurement circuits against the Born rule.
pub fn check_measurement(theta: f64, sign: i8, v: [Complex64; 2]) -> Result<(), TestCaseError> {
    let psi = qubit_state(v);
    let bras = Mat2::hadamard().mul(&Mat2::rz(f64::from(sign) * theta));
    let probs = |circ: fiberloom::circuits::OpticalCircuit, f: &Frame| -> [f64; 2] {
        let mut p = [0.0; 2];
        for b in circ.run(&f.encode(&psi).unwrap()).unwrap() {
            p[measurement_bit(&b.readout).expect("one click") as usize] += b.probability;
        }
        p
    };
    let pt = probs(measure_circuit_timebin(&tb_frame(), 0, theta, sign).unwrap(), &tb_frame());
    let pp = probs(measure_circuit_pol(&h_frame(), 0, theta, sign).unwrap(), &h_frame());
    for m in 0..2u8 {
        let (want, _) = psi.measure_after(0, &bras, m).unwrap();
        ensure((pt[m as usize] - want).abs() < TOL, || {
            format!("time-bin p({m}) = {} vs {want}", pt[m as usize])
        })?;
        ensure((pp[m as usize] - pt[m as usize]).abs() < TOL, || {
            format!("polarization p({m}) = {} vs {}", pp[m as usize], pt[m as usize])
        })?;
    }
    Ok(())
}
