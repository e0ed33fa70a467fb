//! Adaptive measurement patterns with feedforward.
//!
//! Each step measures one vertex after `H * R_z(sign * theta)`; the sign is
//! `(-1)^(parity of the outcomes of the step's dependency set)`. Output
//! vertices receive final X and Z corrections from their own dependency sets.
//! Two backends execute a pattern: the ideal state vector and the optical
//! circuits (measurement stages and bit/phase-flip circuits on photons).

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuits::{
    bit_flip_circuit, fuse, graph_frame, make_seed_cluster_on, measure_circuit_timebin, measurement_bit, phase_flip_circuit, CircuitError,
    Frame, FusionKind, FusionStatus,
};
use crate::fock::PhotonicState;
use crate::graphstate::{FusionOutcome, GraphError, GraphState, VertexId};
use crate::logical::{LogicalError, LogicalState, Mat2, Pauli};
use crate::Pol;

/// Largest photon number the circuit backend accepts.
pub const MAX_CIRCUIT_PHOTONS: usize = 4;

const BRANCH_EPS: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MbqcError {
    #[error("vertex {0} is not in the cluster")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is measured twice or is both measured and an output")]
    Remeasured(VertexId),
    #[error("step {step} depends on step {dep}, which is not earlier")]
    Acausal { step: usize, dep: usize },
    #[error("circuit backend is limited to {MAX_CIRCUIT_PHOTONS} photons, cluster has {0}")]
    BackendTooLarge(usize),
    #[error("pattern is not a linear-chain pattern")]
    NotAChain,
    #[error("outcome history has {found} entries, pattern has {expected} steps")]
    History { expected: usize, found: usize },
    #[error("outcome {outcome} of step {step} has probability zero")]
    Impossible { step: usize, outcome: u8 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Logical(#[from] LogicalError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub vertex: VertexId,
    /// Angle magnitude.
    pub theta: f64,
    /// Indices of earlier steps whose outcome parity flips the sign.
    pub sign_deps: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub vertex: VertexId,
    pub x_deps: BTreeSet<usize>,
    pub z_deps: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPattern {
    pub steps: Vec<Step>,
    pub outputs: Vec<Correction>,
}

fn parity(outcomes: &[u8], deps: &BTreeSet<usize>) -> bool {
    deps.iter().fold(false, |acc, &i| acc ^ (outcomes[i] == 1))
}

fn toggle(set: &mut BTreeSet<usize>, k: usize) {
    if !set.remove(&k) {
        set.insert(k);
    }
}

impl MeasurementPattern {
    /// Pattern for a linear chain: measure `chain[k]` with `thetas[k]` for
    /// every vertex but the last, which carries the output.
    ///
    /// The byproduct on the unmeasured remainder is `X^a Z^b`. Measuring with
    /// sign `(-1)^a` absorbs it into the rotation, and the Hadamard swaps the
    /// two flags while the new outcome adds to X.
    pub fn linear_chain(chain: &[VertexId], thetas: &[f64]) -> Result<Self, MbqcError> {
        if chain.len() < 2 || thetas.len() + 1 != chain.len() {
            return Err(MbqcError::NotAChain);
        }
        let (mut x, mut z) = (BTreeSet::new(), BTreeSet::new());
        let mut steps = Vec::new();
        for (k, (&vertex, &theta)) in chain.iter().zip(thetas).enumerate() {
            steps.push(Step {
                vertex,
                theta,
                sign_deps: x.clone(),
            });
            let mut nx = z.clone();
            toggle(&mut nx, k);
            z = std::mem::replace(&mut x, nx);
        }
        let out = *chain.last().expect("non-empty chain");
        let p = MeasurementPattern {
            steps,
            outputs: vec![Correction {
                vertex: out,
                x_deps: x,
                z_deps: z,
            }],
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks causality and that no vertex is used twice.
    pub fn validate(&self) -> Result<(), MbqcError> {
        let mut seen = BTreeSet::new();
        for (k, s) in self.steps.iter().enumerate() {
            if !seen.insert(s.vertex) {
                return Err(MbqcError::Remeasured(s.vertex));
            }
            if let Some(&dep) = s.sign_deps.iter().find(|&&d| d >= k) {
                return Err(MbqcError::Acausal { step: k, dep });
            }
        }
        let n = self.steps.len();
        for c in &self.outputs {
            if !seen.insert(c.vertex) {
                return Err(MbqcError::Remeasured(c.vertex));
            }
            if let Some(&dep) = c.x_deps.iter().chain(&c.z_deps).find(|&&d| d >= n) {
                return Err(MbqcError::Acausal { step: n, dep });
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        self.steps
            .iter()
            .map(|s| s.vertex)
            .chain(self.outputs.iter().map(|c| c.vertex))
            .collect()
    }

    pub fn output_vertices(&self) -> Vec<VertexId> {
        self.outputs.iter().map(|c| c.vertex).collect()
    }

    /// Sign used at step `k` given the outcomes so far.
    pub fn sign(&self, k: usize, outcomes: &[u8]) -> i8 {
        if parity(outcomes, &self.steps[k].sign_deps) {
            -1
        } else {
            1
        }
    }

    /// `(x, z)` corrections for every output vertex after a full history.
    pub fn corrections(&self, outcomes: &[u8]) -> CorrectionFlags {
        self.outputs
            .iter()
            .map(|c| (c.vertex, parity(outcomes, &c.x_deps), parity(outcomes, &c.z_deps)))
            .collect()
    }
}

/// Single-qubit map a linear-chain pattern implements on `|+>`:
/// `H R_z(theta_n) ... H R_z(theta_1)`.
pub fn expected_map(pattern: &MeasurementPattern) -> Result<Mat2, MbqcError> {
    let mut chain: Vec<VertexId> = pattern.steps.iter().map(|s| s.vertex).collect();
    chain.extend(pattern.output_vertices());
    let thetas: Vec<f64> = pattern.steps.iter().map(|s| s.theta).collect();
    if pattern.outputs.len() != 1 || MeasurementPattern::linear_chain(&chain, &thetas).ok().as_ref() != Some(pattern) {
        return Err(MbqcError::NotAChain);
    }
    Ok(thetas
        .iter()
        .fold(Mat2::identity(), |acc, &t| Mat2::hadamard().mul(&Mat2::rz(t)).mul(&acc)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Graph,
    Circuit,
}

/// Starting resource for a run.
#[derive(Clone, Debug)]
pub enum Initial {
    Graph(GraphState),
    Photonic(PhotonicState, Frame),
}

#[derive(Clone, Debug)]
enum Live {
    Vector(LogicalState),
    Optical(PhotonicState, Frame),
}

impl Live {
    fn start(initial: &Initial, backend: Backend) -> Result<Live, MbqcError> {
        Ok(match (initial, backend) {
            (Initial::Graph(g), Backend::Graph) => Live::Vector(g.to_statevector()?),
            (Initial::Graph(g), Backend::Circuit) => {
                if g.len() > MAX_CIRCUIT_PHOTONS {
                    return Err(MbqcError::BackendTooLarge(g.len()));
                }
                let frame = graph_frame(g, false);
                Live::Optical(frame.encode(&g.to_statevector()?)?, frame)
            }
            (Initial::Photonic(s, f), Backend::Graph) => Live::Vector(f.decode(s)?),
            (Initial::Photonic(s, f), Backend::Circuit) => {
                if s.photons() as usize > MAX_CIRCUIT_PHOTONS {
                    return Err(MbqcError::BackendTooLarge(s.photons() as usize));
                }
                Live::Optical(s.clone(), f.clone())
            }
        })
    }

    fn has(&self, v: VertexId) -> bool {
        match self {
            Live::Vector(s) => s.qubits().contains(&v),
            Live::Optical(_, f) => f.qubits.contains_key(&v),
        }
    }

    /// Outcome branches `(bit, probability, normalised post-state)`.
    fn measure(&self, v: VertexId, theta: f64, sign: i8) -> Result<Vec<(u8, f64, Live)>, MbqcError> {
        let mut out = Vec::new();
        match self {
            Live::Vector(s) => {
                let basis = Mat2::hadamard().mul(&Mat2::rz(f64::from(sign) * theta));
                for m in 0..2u8 {
                    let (p, rest) = s.measure_after(v, &basis, m)?;
                    if p > BRANCH_EPS {
                        out.push((m, p, Live::Vector(rest)));
                    }
                }
            }
            Live::Optical(s, f) => {
                let c = measure_circuit_timebin(f, v, theta, sign)?;
                for br in c.run(s)? {
                    let bit = measurement_bit(&br.readout).ok_or(CircuitError::Leakage(br.probability))?;
                    if br.probability > BRANCH_EPS {
                        out.push((bit, br.probability, Live::Optical(br.post, c.output.clone())));
                    }
                }
            }
        }
        Ok(out)
    }

    fn correct(self, v: VertexId, x: bool, z: bool) -> Result<Live, MbqcError> {
        Ok(match self {
            Live::Vector(mut s) => {
                if x {
                    s = s.apply_pauli(v, Pauli::X)?;
                }
                if z {
                    s = s.apply_pauli(v, Pauli::Z)?;
                }
                Live::Vector(s)
            }
            Live::Optical(mut s, mut f) => {
                if x {
                    let c = bit_flip_circuit(&f, v)?;
                    s = c.evolve(&s)?;
                    f = c.output;
                }
                if z {
                    let c = phase_flip_circuit(&f, v)?;
                    s = c.evolve(&s)?;
                    f = c.output;
                }
                Live::Optical(s, f)
            }
        })
    }

    fn logical(&self) -> Result<LogicalState, MbqcError> {
        Ok(match self {
            Live::Vector(s) => s.clone(),
            Live::Optical(s, f) => f.decode(s)?,
        })
    }
}

/// `(vertex, x applied, z applied)` per output vertex.
pub type CorrectionFlags = Vec<(VertexId, bool, bool)>;

/// Result of one execution.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub outcomes: Vec<u8>,
    pub signs: Vec<i8>,
    /// Probability of this outcome history.
    pub probability: f64,
    /// Corrected state of the output vertices, global phase fixed.
    pub final_state: LogicalState,
    pub corrections_applied: CorrectionFlags,
    pub backend: Backend,
}

fn check_vertices(pattern: &MeasurementPattern, live: &Live) -> Result<(), MbqcError> {
    pattern.validate()?;
    match pattern.vertices().into_iter().find(|&v| !live.has(v)) {
        Some(v) => Err(MbqcError::UnknownVertex(v)),
        None => Ok(()),
    }
}

fn finish(pattern: &MeasurementPattern, mut live: Live, outcomes: &[u8]) -> Result<(LogicalState, CorrectionFlags), MbqcError> {
    let corrections = pattern.corrections(outcomes);
    for &(v, x, z) in &corrections {
        live = live.correct(v, x, z)?;
    }
    let state = live.logical()?;
    Ok((state.reordered(&pattern.output_vertices())?.phase_fixed(), corrections))
}

/// Executes the pattern, sampling outcomes with a seeded generator.
pub fn run(pattern: &MeasurementPattern, initial: &Initial, backend: Backend, seed: u64) -> Result<RunRecord, MbqcError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut live = Live::start(initial, backend)?;
    check_vertices(pattern, &live)?;
    let (mut outcomes, mut signs, mut probability) = (Vec::new(), Vec::new(), 1.0);
    for (k, step) in pattern.steps.iter().enumerate() {
        let sign = pattern.sign(k, &outcomes);
        let branches = live.measure(step.vertex, step.theta, sign)?;
        let (bit, p, next) = crate::circuits::sample_branch(&branches, |b| b.1, &mut rng)
            .cloned()
            .ok_or(MbqcError::Impossible { step: k, outcome: 0 })?;
        outcomes.push(bit);
        signs.push(sign);
        probability *= p;
        live = next;
    }
    let (final_state, corrections_applied) = finish(pattern, live, &outcomes)?;
    Ok(RunRecord {
        outcomes,
        signs,
        probability,
        final_state,
        corrections_applied,
        backend,
    })
}

/// Executes the pattern along a fixed outcome history.
pub fn run_history(pattern: &MeasurementPattern, initial: &Initial, backend: Backend, history: &[u8]) -> Result<RunRecord, MbqcError> {
    if history.len() != pattern.steps.len() {
        return Err(MbqcError::History {
            expected: pattern.steps.len(),
            found: history.len(),
        });
    }
    let mut live = Live::start(initial, backend)?;
    check_vertices(pattern, &live)?;
    let (mut signs, mut probability) = (Vec::new(), 1.0);
    for (k, step) in pattern.steps.iter().enumerate() {
        let sign = pattern.sign(k, &history[..k]);
        let branches = live.measure(step.vertex, step.theta, sign)?;
        let mut hit: Option<(f64, Live)> = None;
        for (bit, p, next) in branches {
            if bit != history[k] {
                continue;
            }
            hit = Some(match hit {
                None => (p, next),
                // several fine detection patterns for one bit: keep the
                // first post-state, total the weight
                Some((q, l)) => (q + p, l),
            });
        }
        let (p, next) = hit.ok_or(MbqcError::Impossible {
            step: k,
            outcome: history[k],
        })?;
        signs.push(sign);
        probability *= p;
        live = next;
    }
    let (final_state, corrections_applied) = finish(pattern, live, history)?;
    Ok(RunRecord {
        outcomes: history.to_vec(),
        signs,
        probability,
        final_state,
        corrections_applied,
        backend,
    })
}

/// Every outcome history with nonzero probability, exactly.
pub fn exact_distribution(pattern: &MeasurementPattern, initial: &Initial, backend: Backend) -> Result<Vec<RunRecord>, MbqcError> {
    let n = pattern.steps.len();
    let mut out = Vec::new();
    for h in 0..(1usize << n) {
        let history: Vec<u8> = (0..n).map(|k| ((h >> k) & 1) as u8).collect();
        match run_history(pattern, initial, backend, &history) {
            Ok(r) => out.push(r),
            Err(MbqcError::Impossible { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Total-variation distance between two exact history distributions.
pub fn total_variation(a: &[RunRecord], b: &[RunRecord]) -> f64 {
    let mut keys: BTreeSet<&[u8]> = a.iter().map(|r| r.outcomes.as_slice()).collect();
    keys.extend(b.iter().map(|r| r.outcomes.as_slice()));
    let p = |rs: &[RunRecord], k: &[u8]| rs.iter().filter(|r| r.outcomes == k).map(|r| r.probability).sum::<f64>();
    keys.into_iter().map(|k| (p(a, k) - p(b, k)).abs()).sum::<f64>() / 2.0
}

/// Three-qubit linear cluster 0-1-2 grown optically: two seed clusters on
/// rails (0, 1) and (2, 3) are fused at qubits 1 and 2 with the time-bin
/// type-I gate, the `(1, 0)` success branch is kept and its byproduct
/// undone with the phase-flip circuit. Vertex 3 is renamed to 2 in the
/// returned frame.
pub fn fused_chain3() -> Result<(PhotonicState, Frame), MbqcError> {
    let (s1, f1) = make_seed_cluster_on(0, 1, Pol::None)?;
    let (s2, f2) = make_seed_cluster_on(2, 3, Pol::None)?;
    let branches = fuse(
        FusionKind::Type1TimeBin,
        &s1.tensor(&s2).map_err(CircuitError::from)?,
        &f1.merged(&f2),
        1,
        2,
    )?;
    let br = branches
        .iter()
        .find(|b| b.status == FusionStatus::Success && b.readout == [1, 0])
        .ok_or(MbqcError::Impossible { step: 0, outcome: 1 })?;
    let FusionOutcome::Success(b) = br.outcome else {
        unreachable!("success branch")
    };
    let mut state = br.post.normalized().map_err(CircuitError::from)?;
    let mut frame = br.frame.clone();
    let (fx, fz) = b.fused.flags();
    if fx {
        let c = bit_flip_circuit(&frame, 1)?;
        state = c.evolve(&state)?;
        frame = c.output;
    }
    if fz {
        let c = phase_flip_circuit(&frame, 1)?;
        state = c.evolve(&state)?;
        frame = c.output;
    }
    let slot = frame.slot(3)?;
    Ok((state, frame.without(3).with(2, slot)))
}
