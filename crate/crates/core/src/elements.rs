//! Fibre-optic components and their compilation to mode unitaries.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fock::{FockError, Mode, ModeUnitary, PhotonicState, Pol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("element references rail {0}, which is not part of the circuit frame")]
    FrameMismatch(u32),
    #[error("invalid element parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Bins on which an active switch is set to the cross (rail-swapping) state.
#[derive(Clone, Debug, PartialEq)]
pub enum BinPredicate {
    All,
    Even,
    Odd,
    Only(BTreeSet<u32>),
}

impl BinPredicate {
    pub fn only<I: IntoIterator<Item = u32>>(bins: I) -> Self {
        BinPredicate::Only(bins.into_iter().collect())
    }

    pub fn holds(&self, bin: u32) -> bool {
        match self {
            BinPredicate::All => true,
            BinPredicate::Even => bin.is_multiple_of(2),
            BinPredicate::Odd => bin % 2 == 1,
            BinPredicate::Only(set) => set.contains(&bin),
        }
    }
}

/// Phase applied by a phase modulator, possibly varying from bin to bin.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseProfile {
    Uniform(f64),
    /// Bins absent from the map see no phase.
    PerBin(BTreeMap<u32, f64>),
}

impl PhaseProfile {
    pub fn per_bin<I: IntoIterator<Item = (u32, f64)>>(phases: I) -> Self {
        PhaseProfile::PerBin(phases.into_iter().collect())
    }

    pub fn at(&self, bin: u32) -> f64 {
        match self {
            PhaseProfile::Uniform(p) => *p,
            PhaseProfile::PerBin(map) => map.get(&bin).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Coupler,
    Switch,
    PhaseMod,
    Delay,
    PolRot,
    Retarder,
    Pbsc,
    Loss,
}

impl ElementKind {
    pub const ALL: [ElementKind; 8] = [
        ElementKind::Coupler,
        ElementKind::Switch,
        ElementKind::PhaseMod,
        ElementKind::Delay,
        ElementKind::PolRot,
        ElementKind::Retarder,
        ElementKind::Pbsc,
        ElementKind::Loss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Coupler => "coupler",
            ElementKind::Switch => "switch",
            ElementKind::PhaseMod => "phase_mod",
            ElementKind::Delay => "delay",
            ElementKind::PolRot => "pol_rot",
            ElementKind::Retarder => "retarder",
            ElementKind::Pbsc => "pbsc",
            ElementKind::Loss => "loss",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Electro-optic (driven) components: the ones carrying excess loss.
    pub fn is_active(self) -> bool {
        matches!(self, ElementKind::Switch | ElementKind::PhaseMod)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    /// Fibre coupler between two rails, applied in every bin and polarisation.
    Coupler {
        rail_a: u32,
        rail_b: u32,
        ratio: f64,
        phase: f64,
    },
    /// Active switch: in the bins selected by the predicate both inputs change
    /// rails, otherwise they continue on their own rail.
    Switch {
        rail_a: u32,
        rail_b: u32,
        swap_bins: BinPredicate,
    },
    PhaseMod {
        rail: u32,
        profile: PhaseProfile,
    },
    /// Fibre delay line of `bins` bin spacings.
    Delay {
        rail: u32,
        bins: u32,
    },
    /// Polarisation rotation `[[cos, -sin], [sin, cos]]` on (H, V).
    PolRot {
        rail: u32,
        angle: f64,
    },
    /// Birefringent phase plate: phases on the H and V components.
    Retarder {
        rail: u32,
        phase_h: f64,
        phase_v: f64,
    },
    /// Polarising beam splitter/combiner: H continues, V changes rails.
    Pbsc {
        rail_a: u32,
        rail_b: u32,
    },
    /// Photon loss, modelled as a coupler into an otherwise unused reservoir
    /// rail with amplitude transmission `sqrt(1 - probability)`.
    Loss {
        rail: u32,
        probability: f64,
        reservoir: u32,
    },
}

/// Mode universe an element is compiled against.
#[derive(Clone, Debug, Default)]
pub struct FrameContext {
    pub rails: BTreeSet<u32>,
    pub bins: BTreeSet<u32>,
    pub pols: BTreeSet<Pol>,
}

impl FrameContext {
    /// Context covering the given rails and every bin/polarisation occupied
    /// in `state`.
    pub fn for_state(rails: &BTreeSet<u32>, state: &PhotonicState) -> Self {
        let support = state.support_modes();
        FrameContext {
            rails: rails.clone(),
            bins: support.iter().map(|m| m.bin).collect(),
            pols: support.iter().map(|m| m.pol).collect(),
        }
    }
}

/// Result of compiling one element.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Unitary(ModeUnitary),
    /// Relabelling of every mode on a rail by a bin offset.
    Shift {
        rail: u32,
        bins: u32,
    },
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Coupler { .. } => ElementKind::Coupler,
            Element::Switch { .. } => ElementKind::Switch,
            Element::PhaseMod { .. } => ElementKind::PhaseMod,
            Element::Delay { .. } => ElementKind::Delay,
            Element::PolRot { .. } => ElementKind::PolRot,
            Element::Retarder { .. } => ElementKind::Retarder,
            Element::Pbsc { .. } => ElementKind::Pbsc,
            Element::Loss { .. } => ElementKind::Loss,
        }
    }

    pub fn rails(&self) -> Vec<u32> {
        match *self {
            Element::Coupler { rail_a, rail_b, .. } | Element::Switch { rail_a, rail_b, .. } | Element::Pbsc { rail_a, rail_b } => {
                vec![rail_a, rail_b]
            }
            Element::PhaseMod { rail, .. }
            | Element::Delay { rail, .. }
            | Element::PolRot { rail, .. }
            | Element::Retarder { rail, .. } => vec![rail],
            Element::Loss { rail, reservoir, .. } => vec![rail, reservoir],
        }
    }

    pub fn validate(&self) -> Result<(), ElementError> {
        let bad = |s: String| Err(ElementError::InvalidParameter(s));
        match self {
            Element::Coupler { ratio, .. } if !(*ratio > 0.0 && *ratio < 1.0) => bad(format!("coupler ratio {ratio} outside (0, 1)")),
            Element::Delay { bins: 0, .. } => bad("delay of zero bins".into()),
            Element::Loss { probability, .. } if !(*probability >= 0.0 && *probability < 1.0) => {
                bad(format!("loss probability {probability} outside [0, 1)"))
            }
            Element::Coupler { rail_a, rail_b, .. } | Element::Switch { rail_a, rail_b, .. } | Element::Pbsc { rail_a, rail_b }
                if rail_a == rail_b =>
            {
                bad(format!("two-rail element on a single rail {rail_a}"))
            }
            Element::Loss { rail, reservoir, .. } if rail == reservoir => bad("loss reservoir equals the lossy rail".into()),
            _ => Ok(()),
        }
    }

    /// Compiles the element over the bins and polarisations of `frame`.
    pub fn compile(&self, frame: &FrameContext) -> Result<Vec<Primitive>, ElementError> {
        self.validate()?;
        for r in self.rails() {
            if !frame.rails.contains(&r) {
                return Err(ElementError::FrameMismatch(r));
            }
        }
        let mut out = Vec::new();
        let all_pols: Vec<Pol> = frame.pols.iter().copied().collect();
        match self {
            Element::Coupler {
                rail_a,
                rail_b,
                ratio,
                phase,
            } => {
                for &b in &frame.bins {
                    for &p in &all_pols {
                        out.push(Primitive::Unitary(ModeUnitary::coupler(
                            Mode::new(*rail_a, b, p),
                            Mode::new(*rail_b, b, p),
                            *ratio,
                            *phase,
                        )?));
                    }
                }
            }
            Element::Switch { rail_a, rail_b, swap_bins } => {
                for &b in frame.bins.iter().filter(|&&b| swap_bins.holds(b)) {
                    for &p in &all_pols {
                        out.push(Primitive::Unitary(ModeUnitary::swap(
                            Mode::new(*rail_a, b, p),
                            Mode::new(*rail_b, b, p),
                        )?));
                    }
                }
            }
            Element::PhaseMod { rail, profile } => {
                for &b in &frame.bins {
                    let phi = profile.at(b);
                    if phi == 0.0 {
                        continue;
                    }
                    for &p in &all_pols {
                        out.push(Primitive::Unitary(ModeUnitary::phase(Mode::new(*rail, b, p), phi)));
                    }
                }
            }
            Element::Delay { rail, bins } => out.push(Primitive::Shift { rail: *rail, bins: *bins }),
            Element::PolRot { rail, angle } => {
                for &b in &frame.bins {
                    out.push(Primitive::Unitary(ModeUnitary::rotation(
                        Mode::new(*rail, b, Pol::H),
                        Mode::new(*rail, b, Pol::V),
                        *angle,
                    )?));
                }
            }
            Element::Retarder { rail, phase_h, phase_v } => {
                for &b in &frame.bins {
                    out.push(Primitive::Unitary(ModeUnitary::phase(Mode::new(*rail, b, Pol::H), *phase_h)));
                    out.push(Primitive::Unitary(ModeUnitary::phase(Mode::new(*rail, b, Pol::V), *phase_v)));
                }
            }
            Element::Pbsc { rail_a, rail_b } => {
                for &b in &frame.bins {
                    out.push(Primitive::Unitary(ModeUnitary::swap(
                        Mode::new(*rail_a, b, Pol::V),
                        Mode::new(*rail_b, b, Pol::V),
                    )?));
                }
            }
            Element::Loss {
                rail,
                probability,
                reservoir,
            } => {
                let angle = probability.sqrt().asin();
                for &b in &frame.bins {
                    for &p in &all_pols {
                        out.push(Primitive::Unitary(ModeUnitary::rotation(
                            Mode::new(*rail, b, p),
                            Mode::new(*reservoir, b, p),
                            angle,
                        )?));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Compiles against the current support of `state` and applies the result.
    pub fn apply(&self, rails: &BTreeSet<u32>, state: &PhotonicState) -> Result<PhotonicState, ElementError> {
        let ctx = FrameContext::for_state(rails, state);
        let mut s = state.clone();
        for prim in self.compile(&ctx)? {
            s = match prim {
                Primitive::Unitary(u) => s.apply_unitary(&u)?,
                Primitive::Shift { rail, bins } => s.shift_bins(rail, bins)?,
            };
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Occupation;
    use std::f64::consts::FRAC_PI_4;

    fn ctx(rails: &[u32], bins: &[u32], pols: &[Pol]) -> FrameContext {
        FrameContext {
            rails: rails.iter().copied().collect(),
            bins: bins.iter().copied().collect(),
            pols: pols.iter().copied().collect(),
        }
    }

    fn rails(r: &[u32]) -> BTreeSet<u32> {
        r.iter().copied().collect()
    }

    #[test]
    fn switch_routes_odd_bin_across() {
        let sw = Element::Switch {
            rail_a: 0,
            rail_b: 1,
            swap_bins: BinPredicate::Odd,
        };
        let out = sw.apply(&rails(&[0, 1]), &PhotonicState::single(Mode::tb(0, 1))).unwrap();
        assert_eq!(out, PhotonicState::single(Mode::tb(1, 1)));
        let stay = sw.apply(&rails(&[0, 1]), &PhotonicState::single(Mode::tb(0, 0))).unwrap();
        assert_eq!(stay, PhotonicState::single(Mode::tb(0, 0)));
    }

    #[test]
    fn pbsc_reflects_v_only() {
        let pbsc = Element::Pbsc { rail_a: 0, rail_b: 1 };
        let r = rails(&[0, 1]);
        let v = pbsc.apply(&r, &PhotonicState::single(Mode::new(0, 3, Pol::V))).unwrap();
        assert_eq!(v, PhotonicState::single(Mode::new(1, 3, Pol::V)));
        let h = pbsc.apply(&r, &PhotonicState::single(Mode::new(0, 3, Pol::H))).unwrap();
        assert_eq!(h, PhotonicState::single(Mode::new(0, 3, Pol::H)));
    }

    #[test]
    fn delay_relabels_bin() {
        let d = Element::Delay { rail: 0, bins: 2 };
        let out = d.apply(&rails(&[0]), &PhotonicState::single(Mode::tb(0, 0))).unwrap();
        assert_eq!(out, PhotonicState::single(Mode::tb(0, 2)));
    }

    #[test]
    fn switch_and_pbsc_compile_to_permutations() {
        let c = ctx(&[0, 1], &[0, 1, 2], &[Pol::None, Pol::H, Pol::V]);
        let sw = Element::Switch {
            rail_a: 0,
            rail_b: 1,
            swap_bins: BinPredicate::All,
        };
        let pb = Element::Pbsc { rail_a: 0, rail_b: 1 };
        for e in [sw, pb] {
            let prims = e.compile(&c).unwrap();
            assert!(!prims.is_empty());
            for p in prims {
                match p {
                    Primitive::Unitary(u) => assert!(u.is_permutation()),
                    Primitive::Shift { .. } => panic!("unexpected shift"),
                }
            }
        }
    }

    #[test]
    fn pol_rot_inverse_pair_is_identity() {
        let c = ctx(&[0], &[0], &[Pol::H, Pol::V]);
        let fwd = Element::PolRot { rail: 0, angle: 0.7 }.compile(&c).unwrap();
        let back = Element::PolRot { rail: 0, angle: -0.7 }.compile(&c).unwrap();
        let (Primitive::Unitary(f), Primitive::Unitary(b)) = (&fwd[0], &back[0]) else {
            panic!()
        };
        let id = b.compose(f).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((id.entry(i, j) - t).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pol_rot_45_matches_rotation_convention() {
        let e = Element::PolRot { rail: 0, angle: FRAC_PI_4 };
        let out = e.apply(&rails(&[0]), &PhotonicState::single(Mode::new(0, 0, Pol::V))).unwrap();
        let h = out.amplitude(&Occupation::photons([Mode::new(0, 0, Pol::H)]));
        let v = out.amplitude(&Occupation::photons([Mode::new(0, 0, Pol::V)]));
        assert!((h.re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn loss_moves_weight_into_reservoir() {
        let e = Element::Loss {
            rail: 0,
            probability: 0.3,
            reservoir: 9,
        };
        let out = e.apply(&rails(&[0, 9]), &PhotonicState::single(Mode::tb(0, 0))).unwrap();
        let kept = out.amplitude(&Occupation::photons([Mode::tb(0, 0)])).norm_sqr();
        let lost = out.amplitude(&Occupation::photons([Mode::tb(9, 0)])).norm_sqr();
        assert!((kept - 0.7).abs() < 1e-12);
        assert!((lost - 0.3).abs() < 1e-12);
    }

    #[test]
    fn frame_mismatch_and_bad_parameters() {
        let c = ctx(&[0], &[0], &[Pol::None]);
        let e = Element::Coupler {
            rail_a: 0,
            rail_b: 5,
            ratio: 0.5,
            phase: 0.0,
        };
        assert_eq!(e.compile(&c).unwrap_err(), ElementError::FrameMismatch(5));
        let e = Element::Coupler {
            rail_a: 0,
            rail_b: 1,
            ratio: 1.0,
            phase: 0.0,
        };
        assert!(matches!(e.validate(), Err(ElementError::InvalidParameter(_))));
        assert!(Element::Delay { rail: 0, bins: 0 }.validate().is_err());
        assert!(Element::Loss {
            rail: 0,
            probability: 1.0,
            reservoir: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn active_kinds() {
        assert!(ElementKind::Switch.is_active());
        assert!(ElementKind::PhaseMod.is_active());
        assert!(!ElementKind::Coupler.is_active());
        assert_eq!(ElementKind::from_name("pbsc"), Some(ElementKind::Pbsc));
    }
}
