//! Named fibre circuits: the reconfigurable time-bin gate, encoding
//! converters, fusion gates of both types in both encodings, adaptive
//! measurement stages and Pauli corrections.
//!
//! Every circuit carries an input and output [`Frame`] telling which modes
//! hold which logical qubit. Delays shift the frame rather than the logical
//! content, so frames are threaded through circuit construction.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::elements::{BinPredicate, Element, ElementError, ElementKind, PhaseProfile};
use crate::fock::{DetectionBranch, DetectorModel, FockError, Mode, ModeSelector, Occupation, PhotonicState, Pol};
use crate::graphstate::{Byproduct, FusionOutcome, GraphError, GraphState};
use crate::logical::{LogicalError, LogicalState, Mat2};

pub type QubitId = u32;

/// Weight outside the logical subspace tolerated when decoding.
pub const LEAK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubits {0} and {1} cannot be fused: {2}")]
    BadFrame(QubitId, QubitId, &'static str),
    #[error("qubit {0} is not in the frame")]
    UnknownQubit(QubitId),
    #[error("qubit {0} has the wrong encoding for this circuit")]
    WrongEncoding(QubitId),
    #[error("circuit leaks {0:e} of the norm outside the qubit frame")]
    NotDeterministic(f64),
    #[error("state does not fit the frame ({0:e} of the norm outside it)")]
    Leakage(f64),
    #[error("no byproduct reproduces the oracle for readout {0:?}")]
    ByproductUnresolved(Vec<u32>),
    #[error("unknown circuit `{0}`")]
    UnknownCircuit(String),
    #[error("malformed byproduct table line {0}")]
    ByproductTable(usize),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Logical(#[from] LogicalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    TimeBin,
    Polarization,
}

/// Where one logical qubit lives.
///
/// Time-bin: `|0> = (rail, bin)`, `|1> = (rail, bin + 1)`, both with the
/// carrier polarisation. Polarisation: `|0> = H`, `|1> = V` in `(rail, bin)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitSlot {
    pub encoding: Encoding,
    pub rail: u32,
    pub bin: u32,
    pub carrier: Pol,
}

impl QubitSlot {
    pub fn time_bin(rail: u32, bin: u32) -> Self {
        QubitSlot {
            encoding: Encoding::TimeBin,
            rail,
            bin,
            carrier: Pol::None,
        }
    }

    /// Time-bin qubit on H-polarised photons, as used by the polarisation scheme.
    pub fn time_bin_h(rail: u32, bin: u32) -> Self {
        QubitSlot {
            encoding: Encoding::TimeBin,
            rail,
            bin,
            carrier: Pol::H,
        }
    }

    pub fn polarization(rail: u32, bin: u32) -> Self {
        QubitSlot {
            encoding: Encoding::Polarization,
            rail,
            bin,
            carrier: Pol::H,
        }
    }

    pub fn basis_modes(&self) -> [Mode; 2] {
        match self.encoding {
            Encoding::TimeBin => [
                Mode::new(self.rail, self.bin, self.carrier),
                Mode::new(self.rail, self.bin + 1, self.carrier),
            ],
            Encoding::Polarization => [Mode::new(self.rail, self.bin, Pol::H), Mode::new(self.rail, self.bin, Pol::V)],
        }
    }
}

/// Logical qubit layout over optical modes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Frame {
    pub qubits: BTreeMap<QubitId, QubitSlot>,
}

impl Frame {
    pub fn new<I: IntoIterator<Item = (QubitId, QubitSlot)>>(slots: I) -> Self {
        Frame {
            qubits: slots.into_iter().collect(),
        }
    }

    pub fn slot(&self, q: QubitId) -> Result<QubitSlot, CircuitError> {
        self.qubits.get(&q).copied().ok_or(CircuitError::UnknownQubit(q))
    }

    pub fn ids(&self) -> Vec<QubitId> {
        self.qubits.keys().copied().collect()
    }

    pub fn rails(&self) -> BTreeSet<u32> {
        self.qubits.values().map(|s| s.rail).collect()
    }

    pub fn with(&self, q: QubitId, slot: QubitSlot) -> Frame {
        let mut f = self.clone();
        f.qubits.insert(q, slot);
        f
    }

    pub fn without(&self, q: QubitId) -> Frame {
        let mut f = self.clone();
        f.qubits.remove(&q);
        f
    }

    pub fn merged(&self, other: &Frame) -> Frame {
        let mut f = self.clone();
        f.qubits.extend(other.qubits.iter().map(|(k, v)| (*k, *v)));
        f
    }

    /// Photonic state carrying `logical` in this frame.
    pub fn encode(&self, logical: &LogicalState) -> Result<PhotonicState, CircuitError> {
        let slots: Vec<QubitSlot> = logical.qubits().iter().map(|&q| self.slot(q)).collect::<Result<_, _>>()?;
        let n = slots.len();
        let mut terms = Vec::new();
        for (i, amp) in logical.amplitudes().iter().enumerate() {
            if amp.norm() < crate::fock::PRUNE_EPS {
                continue;
            }
            let modes = slots.iter().enumerate().map(|(k, s)| s.basis_modes()[(i >> (n - 1 - k)) & 1]);
            terms.push((Occupation::photons(modes), *amp));
        }
        Ok(PhotonicState::from_terms(terms)?)
    }

    /// Logical state of every qubit in the frame, in ascending id order.
    pub fn decode(&self, state: &PhotonicState) -> Result<LogicalState, CircuitError> {
        let ids = self.ids();
        let slots: Vec<[Mode; 2]> = ids.iter().map(|q| self.qubits[q].basis_modes()).collect();
        let n = ids.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        let mut leak = 0.0;
        'terms: for (occ, amp) in state.terms() {
            if occ.total() as usize != n {
                leak += amp.norm_sqr();
                continue;
            }
            let mut idx = 0usize;
            for (k, [m0, m1]) in slots.iter().enumerate() {
                let bit = match (occ.count(m0), occ.count(m1)) {
                    (1, 0) => 0,
                    (0, 1) => 1,
                    _ => {
                        leak += amp.norm_sqr();
                        continue 'terms;
                    }
                };
                idx |= bit << (n - 1 - k);
            }
            amps[idx] += amp;
        }
        let total = state.norm_sqr();
        if total == 0.0 || leak / total > LEAK_TOL {
            return Err(CircuitError::Leakage(if total == 0.0 { 1.0 } else { leak / total }));
        }
        Ok(LogicalState::new(ids, amps)?.normalized()?)
    }
}

/// How the final stage of the reconfigurable gate is read out when it ends in
/// detection: with the last switch merging both outputs onto one rail and a
/// time-resolving detector, or with one detector on each rail instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DetectorLayout {
    #[default]
    Split,
    Merged,
}

/// Ordered list of elements with input/output frames and final detectors.
#[derive(Clone, Debug, PartialEq)]
pub struct OpticalCircuit {
    pub name: String,
    pub elements: Vec<Element>,
    pub input: Frame,
    pub output: Frame,
    pub rails: BTreeSet<u32>,
    pub detectors: Vec<ModeSelector>,
    pub model: DetectorModel,
    /// Loss reservoirs: measured and discarded after the detectors.
    pub traced: Vec<u32>,
}

impl OpticalCircuit {
    /// Applies every element in order.
    pub fn evolve(&self, state: &PhotonicState) -> Result<PhotonicState, CircuitError> {
        let mut s = state.clone();
        for e in &self.elements {
            s = e.apply(&self.rails, &s)?;
        }
        Ok(s)
    }

    /// Evolves and detects. Circuits without detectors return one branch.
    pub fn run(&self, state: &PhotonicState) -> Result<Vec<DetectionBranch>, CircuitError> {
        let s = self.evolve(state)?;
        if self.detectors.is_empty() && self.traced.is_empty() {
            return Ok(vec![DetectionBranch {
                pattern: Occupation::vacuum(),
                readout: vec![],
                probability: 1.0,
                post: s,
            }]);
        }
        let mut selectors = self.detectors.clone();
        selectors.extend(self.traced.iter().map(|&r| ModeSelector::Rail(r)));
        let mut branches = s.detect(&selectors, self.model)?;
        for b in &mut branches {
            b.readout.truncate(self.detectors.len());
        }
        Ok(branches)
    }

    /// Runs `self` then `next`; `next` must start from this circuit's output frame.
    pub fn then(&self, next: &OpticalCircuit) -> OpticalCircuit {
        let mut c = self.clone();
        c.name = format!("{}+{}", self.name, next.name);
        c.elements.extend(next.elements.iter().cloned());
        c.rails.extend(next.rails.iter().copied());
        c.output = next.output.clone();
        c.detectors = next.detectors.clone();
        c.model = next.model;
        c.traced.extend(next.traced.iter().copied());
        c
    }

    pub fn component_counts(&self) -> BTreeMap<ElementKind, usize> {
        let mut m = BTreeMap::new();
        for e in &self.elements {
            *m.entry(e.kind()).or_insert(0) += 1;
        }
        m
    }

    /// Inserts a loss element after every element whose kind has a nonzero
    /// loss probability, on each rail it touches. Reservoirs get fresh rails
    /// and are traced out by [`OpticalCircuit::run`].
    pub fn with_loss(&self, loss: &BTreeMap<ElementKind, f64>) -> OpticalCircuit {
        let mut c = self.clone();
        c.elements.clear();
        let mut next = self.rails.iter().max().map_or(0, |r| r + 1);
        for e in &self.elements {
            c.elements.push(e.clone());
            let p = loss.get(&e.kind()).copied().unwrap_or(0.0);
            if p <= 0.0 {
                continue;
            }
            for rail in e.rails() {
                let reservoir = next;
                next += 1;
                c.rails.insert(reservoir);
                c.traced.push(reservoir);
                c.elements.push(Element::Loss {
                    rail,
                    probability: p,
                    reservoir,
                });
            }
        }
        c
    }
}

/// Incremental circuit construction with fresh auxiliary rails.
struct Builder {
    name: String,
    elements: Vec<Element>,
    rails: BTreeSet<u32>,
    next_rail: u32,
    frame: Frame,
    input: Frame,
}

impl Builder {
    fn new(name: &str, input: &Frame) -> Self {
        Self::with_reserved(name, input, &BTreeSet::new())
    }

    fn with_reserved(name: &str, input: &Frame, reserved: &BTreeSet<u32>) -> Self {
        let rails: BTreeSet<u32> = input.rails();
        let next_rail = rails.iter().chain(reserved.iter()).max().map_or(0, |r| r + 1);
        Builder {
            name: name.into(),
            elements: Vec::new(),
            rails,
            next_rail,
            frame: input.clone(),
            input: input.clone(),
        }
    }

    fn fresh(&mut self) -> u32 {
        let r = self.next_rail;
        self.next_rail += 1;
        self.rails.insert(r);
        r
    }

    fn push(&mut self, e: Element) {
        self.elements.push(e);
    }

    fn time_bin(&self, q: QubitId) -> Result<QubitSlot, CircuitError> {
        let s = self.frame.slot(q)?;
        if s.encoding != Encoding::TimeBin {
            return Err(CircuitError::WrongEncoding(q));
        }
        Ok(s)
    }

    fn finish(self, detectors: Vec<ModeSelector>, model: DetectorModel) -> OpticalCircuit {
        OpticalCircuit {
            name: self.name,
            elements: self.elements,
            input: self.input,
            output: self.frame,
            rails: self.rails,
            detectors,
            model,
            traced: Vec::new(),
        }
    }

    /// Reconfigurable one-qubit gate on a time-bin qubit.
    ///
    /// The input rail doubles as the short arm. The first switch sends the
    /// early bin to a fresh long arm, whose extra bin of delay synchronises
    /// both components at the coupler. `phi1` and `phi2` sit on the long arm
    /// before and after the coupler; the fixed `+pi/2` and `-pi/2` offsets
    /// folded into them compensate the symmetric coupler convention. With
    /// [`DetectorLayout::Merged`] the last switch returns everything to the
    /// input rail, one bin later; with `Split` the gate stops before that
    /// switch and returns the two detector positions for outcomes 0 and 1.
    fn rt45(&mut self, q: QubitId, phi1: f64, phi2: f64, layout: DetectorLayout) -> Result<Option<[ModeSelector; 2]>, CircuitError> {
        let slot = self.time_bin(q)?;
        let (short, b) = (slot.rail, slot.bin);
        let long = self.fresh();
        self.push(Element::Switch {
            rail_a: short,
            rail_b: long,
            swap_bins: BinPredicate::only([b]),
        });
        self.push(Element::Delay { rail: long, bins: 1 });
        self.push(Element::PhaseMod {
            rail: long,
            profile: PhaseProfile::Uniform(phi1 + FRAC_PI_2),
        });
        self.push(Element::Coupler {
            rail_a: long,
            rail_b: short,
            ratio: 0.5,
            phase: 0.0,
        });
        self.push(Element::PhaseMod {
            rail: long,
            profile: PhaseProfile::Uniform(phi2 - FRAC_PI_2),
        });
        self.push(Element::Delay { rail: short, bins: 1 });
        match layout {
            DetectorLayout::Merged => {
                self.push(Element::Switch {
                    rail_a: long,
                    rail_b: short,
                    swap_bins: BinPredicate::only([b + 1]),
                });
                self.frame = self.frame.with(q, QubitSlot { bin: b + 1, ..slot });
                Ok(None)
            }
            DetectorLayout::Split => {
                self.frame = self.frame.without(q);
                Ok(Some([ModeSelector::Rail(long), ModeSelector::Rail(short)]))
            }
        }
    }

    fn tpc(&mut self, q: QubitId) -> Result<(), CircuitError> {
        let slot = self.time_bin(q)?;
        if slot.carrier != Pol::H {
            return Err(CircuitError::WrongEncoding(q));
        }
        let (r, b) = (slot.rail, slot.bin);
        let aux = self.fresh();
        self.push(Element::Switch {
            rail_a: r,
            rail_b: aux,
            swap_bins: BinPredicate::only([b + 1]),
        });
        self.push(Element::Delay { rail: r, bins: 1 });
        self.push(Element::PolRot {
            rail: aux,
            angle: FRAC_PI_2,
        });
        self.push(Element::Pbsc { rail_a: r, rail_b: aux });
        self.frame = self.frame.with(q, QubitSlot::polarization(r, b + 1));
        Ok(())
    }

    fn ptc(&mut self, q: QubitId) -> Result<(), CircuitError> {
        let slot = self.frame.slot(q)?;
        if slot.encoding != Encoding::Polarization {
            return Err(CircuitError::WrongEncoding(q));
        }
        let (r, b) = (slot.rail, slot.bin);
        let aux = self.fresh();
        self.push(Element::Pbsc { rail_a: r, rail_b: aux });
        self.push(Element::PolRot {
            rail: aux,
            angle: -FRAC_PI_2,
        });
        self.push(Element::Delay { rail: aux, bins: 1 });
        self.push(Element::Switch {
            rail_a: r,
            rail_b: aux,
            swap_bins: BinPredicate::only([b + 1]),
        });
        self.frame = self.frame.with(q, QubitSlot::time_bin_h(r, b));
        Ok(())
    }

    /// Delays the earlier of two time-bin qubits so both share bins.
    fn align(&mut self, qa: QubitId, qb: QubitId) -> Result<u32, CircuitError> {
        let (a, b) = (self.time_bin(qa)?, self.time_bin(qb)?);
        if a.rail == b.rail {
            return Err(CircuitError::BadFrame(qa, qb, "qubits share a rail"));
        }
        if a.carrier != b.carrier {
            return Err(CircuitError::BadFrame(qa, qb, "carrier polarisations differ"));
        }
        let (early, late, eslot) = if a.bin <= b.bin { (qa, b, a) } else { (qb, a, b) };
        let gap = late.bin - eslot.bin;
        if gap > 0 {
            self.push(Element::Delay {
                rail: eslot.rail,
                bins: gap,
            });
            self.frame = self.frame.with(early, QubitSlot { bin: late.bin, ..eslot });
        }
        Ok(late.bin)
    }
}

fn single_qubit_frame() -> Frame {
    Frame::new([(0, QubitSlot::time_bin(0, 0))])
}

/// Reconfigurable gate on qubit 0 at rail 0. `(pi, pi)` gives the 45 degree
/// rotation, `(0, pi)` the Hadamard.
pub fn build_rt45(phi1: f64, phi2: f64) -> OpticalCircuit {
    rt45_circuit(&single_qubit_frame(), 0, phi1, phi2).expect("default frame is time-bin")
}

pub fn rt45_circuit(input: &Frame, q: QubitId, phi1: f64, phi2: f64) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("rt45", input);
    b.rt45(q, phi1, phi2, DetectorLayout::Merged)?;
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

pub fn hadamard_t(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut c = rt45_circuit(input, q, 0.0, PI)?;
    c.name = "hadamard_t".into();
    Ok(c)
}

/// Time-bin to polarisation converter.
pub fn tpc(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("tpc", input);
    b.tpc(q)?;
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

/// Polarisation to time-bin converter.
pub fn ptc(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("ptc", input);
    b.ptc(q)?;
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

/// 45 degree rotation applied in polarisation: convert, rotate, convert back.
pub fn rt45_pol(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("rt45_pol", input);
    b.tpc(q)?;
    let r = b.frame.slot(q)?.rail;
    b.push(Element::PolRot { rail: r, angle: FRAC_PI_4 });
    b.ptc(q)?;
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

/// Hadamard applied in polarisation (half-wave plate: Z retardance then a 45 degree rotation).
pub fn hadamard_pol(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("hadamard_pol", input);
    b.tpc(q)?;
    let r = b.frame.slot(q)?.rail;
    b.push(Element::Retarder {
        rail: r,
        phase_h: 0.0,
        phase_v: PI,
    });
    b.push(Element::PolRot { rail: r, angle: FRAC_PI_4 });
    b.ptc(q)?;
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

/// Bit flip: the early bin is delayed by two bins; the frame moves one bin later.
pub fn bit_flip_circuit(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("bitflip", input);
    let slot = b.time_bin(q)?;
    let aux = b.fresh();
    b.push(Element::Switch {
        rail_a: slot.rail,
        rail_b: aux,
        swap_bins: BinPredicate::only([slot.bin]),
    });
    b.push(Element::Delay { rail: aux, bins: 2 });
    b.push(Element::Switch {
        rail_a: slot.rail,
        rail_b: aux,
        swap_bins: BinPredicate::only([slot.bin + 2]),
    });
    b.frame = b.frame.with(q, QubitSlot { bin: slot.bin + 1, ..slot });
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

/// Phase flip, realised as `R_z(-pi)` on the phase modulator.
pub fn phase_flip_circuit(input: &Frame, q: QubitId) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("phaseflip", input);
    let slot = b.time_bin(q)?;
    b.push(Element::PhaseMod {
        rail: slot.rail,
        profile: PhaseProfile::per_bin([(slot.bin, FRAC_PI_2), (slot.bin + 1, -FRAC_PI_2)]),
    });
    Ok(b.finish(vec![], DetectorModel::NumberResolving))
}

/// Measurement stage: `R_z(sign * theta)`, Hadamard, then detection. The
/// two detectors report outcome 0 and 1 respectively.
pub fn measure_circuit_timebin(input: &Frame, q: QubitId, theta: f64, sign: i8) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("measure_tb", input);
    let slot = b.time_bin(q)?;
    let half = f64::from(sign) * theta / 2.0;
    b.push(Element::PhaseMod {
        rail: slot.rail,
        profile: PhaseProfile::per_bin([(slot.bin, -half), (slot.bin + 1, half)]),
    });
    let det = b.rt45(q, 0.0, PI, DetectorLayout::Split)?.expect("split layout yields detectors");
    Ok(b.finish(det.to_vec(), DetectorModel::NumberResolving))
}

/// Polarisation version of the measurement stage: convert, retarder for
/// `R_z`, half-wave plate for the Hadamard, polarisation-resolved detection.
pub fn measure_circuit_pol(input: &Frame, q: QubitId, theta: f64, sign: i8) -> Result<OpticalCircuit, CircuitError> {
    let mut b = Builder::new("measure_pol", input);
    b.tpc(q)?;
    let r = b.frame.slot(q)?.rail;
    let half = f64::from(sign) * theta / 2.0;
    b.push(Element::Retarder {
        rail: r,
        phase_h: -half,
        phase_v: half + PI,
    });
    b.push(Element::PolRot { rail: r, angle: FRAC_PI_4 });
    b.frame = b.frame.without(q);
    Ok(b.finish(
        vec![ModeSelector::RailPol(r, Pol::H), ModeSelector::RailPol(r, Pol::V)],
        DetectorModel::NumberResolving,
    ))
}

/// Measurement outcome from a two-detector readout.
pub fn measurement_bit(readout: &[u32]) -> Option<u8> {
    match readout {
        [1, 0] => Some(0),
        [0, 1] => Some(1),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionKind {
    Type1TimeBin,
    Type2TimeBin,
    Type1Pol,
    Type2Pol,
}

impl FusionKind {
    pub const ALL: [FusionKind; 4] = [
        FusionKind::Type1TimeBin,
        FusionKind::Type2TimeBin,
        FusionKind::Type1Pol,
        FusionKind::Type2Pol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FusionKind::Type1TimeBin => "fusion1_tb",
            FusionKind::Type2TimeBin => "fusion2_tb",
            FusionKind::Type1Pol => "fusion1_pol",
            FusionKind::Type2Pol => "fusion2_pol",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_type2(self) -> bool {
        matches!(self, FusionKind::Type2TimeBin | FusionKind::Type2Pol)
    }

    pub fn is_polarization(self) -> bool {
        matches!(self, FusionKind::Type1Pol | FusionKind::Type2Pol)
    }

    /// Heralded success for a readout.
    pub fn succeeded(self, readout: &[u32]) -> bool {
        if self.is_type2() {
            readout.len() == 4 && readout[0] + readout[1] >= 1 && readout[2] + readout[3] >= 1
        } else {
            readout.iter().sum::<u32>() == 1
        }
    }

    /// Measurement outcomes implied by a failed readout.
    ///
    /// Type I: no photon at the detectors means the first qubit was `|0>` and
    /// the second `|1>`; two photons mean the opposite. Type II: both photons
    /// leave on one rail; the rail fixes the X outcomes.
    pub fn failure_bits(self, readout: &[u32]) -> (u8, u8) {
        if self.is_type2() {
            if readout[0] + readout[1] > 0 {
                (1, 0)
            } else {
                (0, 1)
            }
        } else if readout.iter().sum::<u32>() == 0 {
            (0, 1)
        } else {
            (1, 0)
        }
    }
}

/// Builds a fusion circuit for qubits `qa` (first) and `qb` (second). For
/// type I the survivor is `qa`; its rail keeps the fused qubit.
pub fn fusion_circuit(
    kind: FusionKind,
    input: &Frame,
    qa: QubitId,
    qb: QubitId,
    layout: DetectorLayout,
) -> Result<OpticalCircuit, CircuitError> {
    fusion_circuit_reserving(kind, input, qa, qb, layout, &BTreeSet::new())
}

fn fusion_circuit_reserving(
    kind: FusionKind,
    input: &Frame,
    qa: QubitId,
    qb: QubitId,
    layout: DetectorLayout,
    reserved: &BTreeSet<u32>,
) -> Result<OpticalCircuit, CircuitError> {
    if qa == qb {
        return Err(CircuitError::BadFrame(qa, qb, "same qubit"));
    }
    let mut b = Builder::with_reserved(kind.name(), input, reserved);
    let bin = b.align(qa, qb)?;
    let (ra, rb) = (b.frame.slot(qa)?.rail, b.frame.slot(qb)?.rail);
    let pol_carrier = b.frame.slot(qa)?.carrier == Pol::H;
    if kind.is_polarization() && !pol_carrier {
        return Err(CircuitError::WrongEncoding(qa));
    }
    match kind {
        FusionKind::Type1TimeBin => {
            b.push(Element::Switch {
                rail_a: ra,
                rail_b: rb,
                swap_bins: BinPredicate::only([bin + 1]),
            });
            let det = match layout {
                DetectorLayout::Split => b.rt45(qb, PI, PI, layout)?.expect("split").to_vec(),
                DetectorLayout::Merged => {
                    b.rt45(qb, PI, PI, layout)?;
                    b.frame = b.frame.without(qb);
                    vec![
                        ModeSelector::Exact(vec![Mode::new(rb, bin + 1, b.frame.slot(qa)?.carrier)]),
                        ModeSelector::Exact(vec![Mode::new(rb, bin + 2, b.frame.slot(qa)?.carrier)]),
                    ]
                }
            };
            Ok(b.finish(det, DetectorModel::NumberResolving))
        }
        FusionKind::Type2TimeBin => {
            b.rt45(qa, PI, PI, DetectorLayout::Merged)?;
            b.rt45(qb, PI, PI, DetectorLayout::Merged)?;
            b.push(Element::Switch {
                rail_a: ra,
                rail_b: rb,
                swap_bins: BinPredicate::only([bin + 2]),
            });
            let mut det = b.rt45(qa, PI, PI, DetectorLayout::Split)?.expect("split").to_vec();
            det.extend(b.rt45(qb, PI, PI, DetectorLayout::Split)?.expect("split"));
            Ok(b.finish(det, DetectorModel::Threshold))
        }
        FusionKind::Type1Pol => {
            b.tpc(qa)?;
            b.tpc(qb)?;
            b.push(Element::Pbsc { rail_a: ra, rail_b: rb });
            b.push(Element::PolRot {
                rail: rb,
                angle: FRAC_PI_4,
            });
            b.frame = b.frame.without(qb);
            b.ptc(qa)?;
            Ok(b.finish(
                vec![ModeSelector::RailPol(rb, Pol::H), ModeSelector::RailPol(rb, Pol::V)],
                DetectorModel::NumberResolving,
            ))
        }
        FusionKind::Type2Pol => {
            b.tpc(qa)?;
            b.tpc(qb)?;
            b.push(Element::PolRot {
                rail: ra,
                angle: FRAC_PI_4,
            });
            b.push(Element::PolRot {
                rail: rb,
                angle: FRAC_PI_4,
            });
            b.push(Element::Pbsc { rail_a: ra, rail_b: rb });
            b.push(Element::PolRot {
                rail: ra,
                angle: FRAC_PI_4,
            });
            b.push(Element::PolRot {
                rail: rb,
                angle: FRAC_PI_4,
            });
            b.frame = b.frame.without(qa).without(qb);
            Ok(b.finish(
                vec![
                    ModeSelector::RailPol(ra, Pol::H),
                    ModeSelector::RailPol(ra, Pol::V),
                    ModeSelector::RailPol(rb, Pol::H),
                    ModeSelector::RailPol(rb, Pol::V),
                ],
                DetectorModel::Threshold,
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusionStatus {
    Success,
    Failure,
}

/// One exact branch of a fusion attempt.
#[derive(Clone, Debug)]
pub struct FusionResult {
    pub status: FusionStatus,
    pub readout: Vec<u32>,
    pub probability: f64,
    pub post: PhotonicState,
    /// Frame of the qubits left in `post`.
    pub frame: Frame,
    pub outcome: FusionOutcome,
}

/// All branches of a fusion attempt on `joint` (normalised), using the
/// frozen byproduct table.
pub fn fuse(kind: FusionKind, joint: &PhotonicState, frame: &Frame, qa: QubitId, qb: QubitId) -> Result<Vec<FusionResult>, CircuitError> {
    fuse_with_layout(kind, joint, frame, qa, qb, DetectorLayout::Split)
}

pub fn fuse_with_layout(
    kind: FusionKind,
    joint: &PhotonicState,
    frame: &Frame,
    qa: QubitId,
    qb: QubitId,
    layout: DetectorLayout,
) -> Result<Vec<FusionResult>, CircuitError> {
    let table = frozen_byproducts(kind, layout)?;
    fuse_branches(kind, joint, frame, qa, qb, layout, |readout| {
        table
            .get(readout)
            .copied()
            .ok_or_else(|| CircuitError::ByproductUnresolved(readout.to_vec()))
    })
}

fn fuse_branches<F>(
    kind: FusionKind,
    joint: &PhotonicState,
    frame: &Frame,
    qa: QubitId,
    qb: QubitId,
    layout: DetectorLayout,
    byproduct: F,
) -> Result<Vec<FusionResult>, CircuitError>
where
    F: Fn(&[u32]) -> Result<Byproduct, CircuitError>,
{
    let circuit = fusion_circuit_reserving(kind, frame, qa, qb, layout, &joint.rails())?;
    let ra = frame.slot(qa)?.rail;
    let mut out = Vec::new();
    for br in circuit.run(joint)? {
        if kind.succeeded(&br.readout) {
            let b = byproduct(&br.readout)?;
            out.push(FusionResult {
                status: FusionStatus::Success,
                readout: br.readout,
                probability: br.probability,
                post: br.post,
                frame: circuit.output.clone(),
                outcome: FusionOutcome::Success(b),
            });
            continue;
        }
        let (m1, m2) = kind.failure_bits(&br.readout);
        let frame_after = circuit.output.without(qa).without(qb);
        // photons left in the fused qubit's modes are measured and discarded
        let parts = if kind.is_type2() {
            vec![(1.0, br.post)]
        } else {
            br.post
                .detect(&[ModeSelector::Rail(ra)], DetectorModel::NumberResolving)?
                .into_iter()
                .map(|s| (s.probability, s.post))
                .collect()
        };
        for (p, post) in parts {
            out.push(FusionResult {
                status: FusionStatus::Failure,
                readout: br.readout.clone(),
                probability: br.probability * p,
                post,
                frame: frame_after.clone(),
                outcome: FusionOutcome::Failure { m1, m2 },
            });
        }
    }
    Ok(out)
}

pub fn fusion_type1_timebin(joint: &PhotonicState, frame: &Frame, qa: QubitId, qb: QubitId) -> Result<Vec<FusionResult>, CircuitError> {
    fuse(FusionKind::Type1TimeBin, joint, frame, qa, qb)
}

pub fn fusion_type2_timebin(joint: &PhotonicState, frame: &Frame, qa: QubitId, qb: QubitId) -> Result<Vec<FusionResult>, CircuitError> {
    fuse(FusionKind::Type2TimeBin, joint, frame, qa, qb)
}

pub fn fusion_type1_pol(joint: &PhotonicState, frame: &Frame, qa: QubitId, qb: QubitId) -> Result<Vec<FusionResult>, CircuitError> {
    fuse(FusionKind::Type1Pol, joint, frame, qa, qb)
}

pub fn fusion_type2_pol(joint: &PhotonicState, frame: &Frame, qa: QubitId, qb: QubitId) -> Result<Vec<FusionResult>, CircuitError> {
    fuse(FusionKind::Type2Pol, joint, frame, qa, qb)
}

pub fn success_probability(results: &[FusionResult]) -> f64 {
    results
        .iter()
        .filter(|r| r.status == FusionStatus::Success)
        .map(|r| r.probability)
        .sum()
}

/// Draws one branch according to its probability.
pub fn sample_branch<'a, T, R: Rng + ?Sized>(branches: &'a [T], prob: impl Fn(&T) -> f64, rng: &mut R) -> Option<&'a T> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for b in branches {
        acc += prob(b);
        if u < acc {
            return Some(b);
        }
    }
    branches.iter().rev().find(|b| prob(b) > 0.0)
}

/// Reference inputs used to derive byproducts: two 2-chains fused at their
/// inner ends for type I, and two chains ending in a redundantly encoded
/// vertex for type II (the redundant photons are fused).
pub fn reference_inputs(kind: FusionKind) -> (GraphState, VertexPair, GraphState) {
    if kind.is_type2() {
        let g1 = GraphState::chain(&[0, 1])
            .add_vertex(2)
            .and_then(|g| g.with_group([1, 2]))
            .expect("fixed graph");
        let g2 = GraphState::chain(&[4, 5])
            .add_vertex(3)
            .and_then(|g| g.with_group([3, 4]))
            .expect("fixed graph");
        (g1, VertexPair(2, 3), g2)
    } else {
        (GraphState::chain(&[0, 1]), VertexPair(1, 2), GraphState::chain(&[2, 3]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexPair(pub QubitId, pub QubitId);

/// Frame placing each graph vertex on its own rail (rail = vertex id).
pub fn graph_frame(g: &GraphState, polarization_scheme: bool) -> Frame {
    Frame::new(g.vertices().iter().map(|&v| {
        (
            v,
            if polarization_scheme {
                QubitSlot::time_bin_h(v, 0)
            } else {
                QubitSlot::time_bin(v, 0)
            },
        )
    }))
}

/// Graph-level prediction for a fusion outcome.
pub fn oracle_fusion(
    kind: FusionKind,
    g1: &GraphState,
    v1: QubitId,
    g2: &GraphState,
    v2: QubitId,
    outcome: FusionOutcome,
) -> Result<GraphState, CircuitError> {
    Ok(if kind.is_type2() {
        GraphState::fuse2(g1, v1, g2, v2, outcome)?
    } else {
        GraphState::fuse1(g1, v1, g2, v2, outcome)?
    })
}

/// Derives the readout -> byproduct table by simulating the fusion on the
/// reference inputs and searching, for every success readout, the first
/// candidate byproduct whose graph prediction matches the simulated state.
pub fn derive_byproducts(kind: FusionKind, layout: DetectorLayout) -> Result<ByproductMap, CircuitError> {
    let (g1, VertexPair(v1, v2), g2) = reference_inputs(kind);
    let joint_graph = g1.union(&g2)?;
    let frame = graph_frame(&joint_graph, kind.is_polarization());
    let joint = frame.encode(&joint_graph.to_statevector()?)?;
    let branches = fuse_branches(kind, &joint, &frame, v1, v2, layout, |_| Ok(Byproduct::NONE))?;
    let mut table = BTreeMap::new();
    for br in branches.iter().filter(|b| b.status == FusionStatus::Success) {
        let sim = br.frame.decode(&br.post)?;
        let mut found = None;
        for cand in Byproduct::candidates() {
            let oracle = oracle_fusion(kind, &g1, v1, &g2, v2, FusionOutcome::Success(cand))?.to_statevector()?;
            if sim.fidelity(&oracle)? > 1.0 - 1e-10 {
                found = Some(cand);
                break;
            }
        }
        let cand = found.ok_or_else(|| CircuitError::ByproductUnresolved(br.readout.clone()))?;
        if let Some(prev) = table.insert(br.readout.clone(), cand) {
            if prev != cand {
                return Err(CircuitError::ByproductUnresolved(br.readout.clone()));
            }
        }
    }
    Ok(table)
}

fn layout_name(layout: DetectorLayout) -> &'static str {
    match layout {
        DetectorLayout::Split => "split",
        DetectorLayout::Merged => "merged",
    }
}

/// Text form of byproduct tables, one `kind layout readout code` per line.
pub fn render_byproduct_tables(tables: &[(FusionKind, DetectorLayout, ByproductMap)]) -> String {
    let mut s = format!("{} byproducts\n", crate::FORMAT_HEADER);
    for (kind, layout, table) in tables {
        for (readout, b) in table {
            let r: Vec<String> = readout.iter().map(|n| n.to_string()).collect();
            s.push_str(&format!("{} {} {} {}\n", kind.name(), layout_name(*layout), r.join(","), b.code()));
        }
    }
    s
}

/// Layouts with a byproduct table (merged readout exists for type I only).
pub fn table_layouts(kind: FusionKind) -> Vec<DetectorLayout> {
    if kind == FusionKind::Type1TimeBin {
        vec![DetectorLayout::Split, DetectorLayout::Merged]
    } else {
        vec![DetectorLayout::Split]
    }
}

/// Regenerates every table.
pub fn derive_all_byproducts() -> Result<String, CircuitError> {
    let mut tables = Vec::new();
    for kind in FusionKind::ALL {
        for layout in table_layouts(kind) {
            tables.push((kind, layout, derive_byproducts(kind, layout)?));
        }
    }
    Ok(render_byproduct_tables(&tables))
}

type TableKey = (FusionKind, DetectorLayout);

fn parse_byproduct_tables(text: &str) -> Result<Vec<(TableKey, Vec<u32>, Byproduct)>, CircuitError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if i == 0 || line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || CircuitError::ByproductTable(i + 1);
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [kind, layout, readout, code] = parts[..] else {
            return Err(bad());
        };
        let kind = FusionKind::from_name(kind).ok_or_else(bad)?;
        let layout = match layout {
            "split" => DetectorLayout::Split,
            "merged" => DetectorLayout::Merged,
            _ => return Err(bad()),
        };
        let readout = readout
            .split(',')
            .map(|x| x.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let b = Byproduct::from_code(code).ok_or_else(bad)?;
        rows.push(((kind, layout), readout, b));
    }
    Ok(rows)
}

/// Detector readout -> byproduct.
pub type ByproductMap = BTreeMap<Vec<u32>, Byproduct>;

type TableRow = (TableKey, Vec<u32>, Byproduct);

/// The checked-in byproduct tables.
pub const FROZEN_BYPRODUCTS: &str = include_str!("../data/byproducts.txt");

/// Frozen readout -> byproduct table for one fusion circuit.
pub fn frozen_byproducts(kind: FusionKind, layout: DetectorLayout) -> Result<ByproductMap, CircuitError> {
    static ROWS: OnceLock<Result<Vec<TableRow>, CircuitError>> = OnceLock::new();
    let rows = ROWS
        .get_or_init(|| parse_byproduct_tables(FROZEN_BYPRODUCTS))
        .as_ref()
        .map_err(Clone::clone)?;
    Ok(rows
        .iter()
        .filter(|(k, _, _)| *k == (kind, layout))
        .map(|(_, r, b)| (r.clone(), *b))
        .collect())
}

/// Ideal down-converted pair `(|ss> + |ll>)/sqrt2` on two rails.
pub fn pdc_pair(rail_a: u32, rail_b: u32, carrier: Pol) -> PhotonicState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PhotonicState::from_terms([
        (
            Occupation::photons([Mode::new(rail_a, 0, carrier), Mode::new(rail_b, 0, carrier)]),
            Complex64::new(h, 0.0),
        ),
        (
            Occupation::photons([Mode::new(rail_a, 1, carrier), Mode::new(rail_b, 1, carrier)]),
            Complex64::new(h, 0.0),
        ),
    ])
    .expect("two photons")
}

/// Two-qubit cluster from a down-converted pair and a Hadamard on the
/// second photon, with qubit ids 0 and 1 on rails 0 and 1.
pub fn make_seed_cluster() -> (PhotonicState, Frame) {
    make_seed_cluster_on(0, 1, Pol::None).expect("default seed")
}

/// Seed cluster with qubits `qa`, `qb` on rails `qa`, `qb`. `carrier` is
/// `Pol::H` for the polarisation scheme.
pub fn make_seed_cluster_on(qa: QubitId, qb: QubitId, carrier: Pol) -> Result<(PhotonicState, Frame), CircuitError> {
    let pair = pdc_pair(qa, qb, carrier);
    let slot = |r| QubitSlot {
        encoding: Encoding::TimeBin,
        rail: r,
        bin: 0,
        carrier,
    };
    let frame = Frame::new([(qa, slot(qa)), (qb, slot(qb))]);
    let h = hadamard_t(&frame, qb)?;
    Ok((h.evolve(&pair)?, h.output))
}

/// Logical 2x2 action of a detector-free circuit on qubit `q`, global phase
/// fixed so that the first nonzero entry is real and positive.
pub fn gate_matrix(c: &OpticalCircuit, q: QubitId) -> Result<Mat2, CircuitError> {
    let slot_in = c.input.slot(q)?;
    let slot_out = c.output.slot(q)?;
    if !c.detectors.is_empty() {
        return Err(CircuitError::NotDeterministic(1.0));
    }
    let mut cols = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (j, col) in cols.iter_mut().enumerate() {
        let input = PhotonicState::single(slot_in.basis_modes()[j]);
        let out = c.evolve(&input)?;
        let [m0, m1] = slot_out.basis_modes();
        let a0 = out.amplitude(&Occupation::photons([m0]));
        let a1 = out.amplitude(&Occupation::photons([m1]));
        let leak = (out.norm_sqr() - a0.norm_sqr() - a1.norm_sqr()).abs();
        if leak > LEAK_TOL {
            return Err(CircuitError::NotDeterministic(leak));
        }
        *col = [a0, a1];
    }
    Ok(Mat2::new(cols[0][0], cols[1][0], cols[0][1], cols[1][1]).phase_fixed())
}

/// Catalog entry for the command-line front end.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "rt45",
        summary: "reconfigurable time-bin gate, phi1 = phi2 = pi: 45 degree rotation (switch, delay, phase modulators, 50:50 coupler)",
    },
    CatalogEntry {
        name: "hadamard_t",
        summary: "reconfigurable time-bin gate, phi1 = 0, phi2 = pi: Hadamard",
    },
    CatalogEntry {
        name: "fusion1_tb",
        summary: "type-I fusion, time-bin: switch acting as PBSC then a 45 degree gate ending in number-resolving detectors",
    },
    CatalogEntry {
        name: "fusion2_tb",
        summary: "type-II fusion, time-bin: four 45 degree gates around a switch acting as PBSC, threshold detectors",
    },
    CatalogEntry {
        name: "fusion1_pol",
        summary: "type-I fusion via polarisation: converters, PBSC, 45 degree controller, polarisation-resolved counting, converter back",
    },
    CatalogEntry {
        name: "fusion2_pol",
        summary: "type-II fusion via polarisation: converters, controllers before and after the PBSC, one detector pair per output",
    },
    CatalogEntry {
        name: "tpc",
        summary: "time-bin to polarisation converter (switch, delay, controller, PBSC)",
    },
    CatalogEntry {
        name: "ptc",
        summary: "polarisation to time-bin converter (PBSC, controller, delay, switch)",
    },
    CatalogEntry {
        name: "measure_tb",
        summary: "measurement in a feedforward-selected basis: phase modulator R_z(+-theta), Hadamard configuration, detection",
    },
    CatalogEntry {
        name: "measure_pol",
        summary: "measurement in a chosen basis after conversion to polarisation: retarder and half-wave plate",
    },
    CatalogEntry {
        name: "bitflip",
        summary: "bit-flip correction: early bin delayed by two bin spacings",
    },
    CatalogEntry {
        name: "phaseflip",
        summary: "phase-flip correction: pi phase difference between bins (R_z(-pi))",
    },
    CatalogEntry {
        name: "rt45_pol",
        summary: "45 degree rotation applied in polarisation between converters",
    },
    CatalogEntry {
        name: "hadamard_pol",
        summary: "Hadamard applied in polarisation between converters",
    },
];

/// Parameters of a named circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams {
    pub theta: f64,
    pub sign: i8,
    pub layout: DetectorLayout,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams {
            theta: 0.0,
            sign: 1,
            layout: DetectorLayout::Split,
        }
    }
}

/// Builds a catalog circuit on its default frame: qubit 0 on rail 0 (and
/// qubit 1 on rail 1 for fusion gates), bin 0, with an H carrier where the
/// circuit starts with a converter.
pub fn build_named(name: &str, p: &CircuitParams) -> Result<OpticalCircuit, CircuitError> {
    let tb = single_qubit_frame();
    let tbh = Frame::new([(0, QubitSlot::time_bin_h(0, 0))]);
    let pol = Frame::new([(0, QubitSlot::polarization(0, 0))]);
    match name {
        "rt45" => rt45_circuit(&tb, 0, PI, PI),
        "hadamard_t" => hadamard_t(&tb, 0),
        "tpc" => tpc(&tbh, 0),
        "ptc" => ptc(&pol, 0),
        "measure_tb" => measure_circuit_timebin(&tb, 0, p.theta, p.sign),
        "measure_pol" => measure_circuit_pol(&tbh, 0, p.theta, p.sign),
        "bitflip" => bit_flip_circuit(&tb, 0),
        "phaseflip" => phase_flip_circuit(&tb, 0),
        "rt45_pol" => rt45_pol(&tbh, 0),
        "hadamard_pol" => hadamard_pol(&tbh, 0),
        other => match FusionKind::from_name(other) {
            Some(kind) => {
                let slot = if kind.is_polarization() {
                    QubitSlot::time_bin_h
                } else {
                    QubitSlot::time_bin
                };
                let frame = Frame::new([(0, slot(0, 0)), (1, slot(1, 0))]);
                fusion_circuit(kind, &frame, 0, 1, p.layout)
            }
            None => Err(CircuitError::UnknownCircuit(other.to_string())),
        },
    }
}
