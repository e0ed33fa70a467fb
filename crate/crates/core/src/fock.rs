//! Exact multi-photon states over labelled optical modes.
//!
//! A [`PhotonicState`] is a sparse superposition of occupation-number basis
//! states. Linear-optical elements act on it through [`ModeUnitary`] values,
//! which transform creation operators as `a†_i -> sum_j U[j][i] a†_j` and are
//! expanded over every multi-photon term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Largest photon number a state may carry.
pub const MAX_PHOTONS: u32 = 8;
/// Largest number of distinct occupied modes across a state's support.
pub const MAX_MODES: usize = 32;
/// Amplitudes with modulus below this are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-14;
/// Tolerance for the unitarity check on [`ModeUnitary`].
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("rail {0} is occupied in both states")]
    RailCollision(u32),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NonUnitary(f64),
    #[error("matrix dimension {found} does not match {expected} modes")]
    Dimension { expected: usize, found: usize },
    #[error("a mode unitary couples at most two modes, got {0}")]
    TooManyModes(usize),
    #[error("mode {0} listed twice in a unitary")]
    RepeatedMode(Mode),
    #[error("{found} photons exceed the bound of {max}")]
    PhotonBound { found: u32, max: u32 },
    #[error("{found} occupied modes exceed the bound of {max}")]
    ModeBound { found: usize, max: usize },
    #[error("basis terms carry different photon numbers ({0} and {1})")]
    MixedPhotonNumber(u32, u32),
    #[error("state has no amplitudes")]
    EmptyState,
    #[error("relabelling maps two occupied modes onto {0}")]
    RelabelCollision(Mode),
}

/// Polarisation label of a mode. `None` is used in the fully time-bin scheme,
/// where polarisation is not tracked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pol {
    None,
    H,
    V,
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pol::None => write!(f, "-"),
            Pol::H => write!(f, "H"),
            Pol::V => write!(f, "V"),
        }
    }
}

/// One optical mode: a fibre path, a time bin (in units of the bin spacing)
/// and a polarisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub rail: u32,
    pub bin: u32,
    pub pol: Pol,
}

impl Mode {
    pub const fn new(rail: u32, bin: u32, pol: Pol) -> Self {
        Mode { rail, bin, pol }
    }

    /// Mode of the fully time-bin scheme (polarisation untracked).
    pub const fn tb(rail: u32, bin: u32) -> Self {
        Mode { rail, bin, pol: Pol::None }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}b{}{}", self.rail, self.bin, self.pol)
    }
}

/// Occupation-number basis state. Entries are kept sorted by mode and only
/// nonzero counts are stored, so derived equality and ordering are canonical.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<(Mode, u32)>);

impl Occupation {
    pub fn vacuum() -> Self {
        Occupation(Vec::new())
    }

    pub fn from_counts<I: IntoIterator<Item = (Mode, u32)>>(counts: I) -> Self {
        let mut map: BTreeMap<Mode, u32> = BTreeMap::new();
        for (m, n) in counts {
            *map.entry(m).or_insert(0) += n;
        }
        Occupation(map.into_iter().filter(|&(_, n)| n > 0).collect())
    }

    /// One photon in each listed mode (repeats add up).
    pub fn photons<I: IntoIterator<Item = Mode>>(modes: I) -> Self {
        Self::from_counts(modes.into_iter().map(|m| (m, 1)))
    }

    pub fn count(&self, mode: &Mode) -> u32 {
        self.0.binary_search_by(|(m, _)| m.cmp(mode)).map(|i| self.0[i].1).unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&(_, n)| n).sum()
    }

    pub fn entries(&self) -> &[(Mode, u32)] {
        &self.0
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        self.0.iter().map(|&(m, _)| m)
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    /// Splits into (entries matching `pred`, remaining entries).
    pub fn split<F: Fn(&Mode) -> bool>(&self, pred: F) -> (Occupation, Occupation) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|(m, _)| pred(m));
        (Occupation(a), Occupation(b))
    }

    /// Union of two occupations on disjoint or overlapping modes (counts add).
    pub fn merge(&self, other: &Occupation) -> Occupation {
        Self::from_counts(self.0.iter().chain(other.0.iter()).copied())
    }

    fn map_modes<F: Fn(Mode) -> Mode>(&self, f: F) -> Result<Occupation, FockError> {
        let mut map: BTreeMap<Mode, u32> = BTreeMap::new();
        for &(m, n) in &self.0 {
            let t = f(m);
            if map.insert(t, n).is_some() {
                return Err(FockError::RelabelCollision(t));
            }
        }
        Ok(Occupation(map.into_iter().collect()))
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "|vac>");
        }
        write!(f, "|")?;
        for (i, (m, n)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}:{n}")?;
        }
        write!(f, ">")
    }
}

/// Linear map on creation operators of up to two modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    modes: Vec<Mode>,
    /// Row-major `d x d`; column `i` is the image of `a†_{modes[i]}`.
    matrix: Vec<Complex64>,
}

fn unitarity_defect(m: &[Complex64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += m[k * d + i].conj() * m[k * d + j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

impl ModeUnitary {
    pub fn new(modes: Vec<Mode>, matrix: Vec<Complex64>) -> Result<Self, FockError> {
        let d = modes.len();
        if d == 0 || d > 2 {
            return Err(FockError::TooManyModes(d));
        }
        if d == 2 && modes[0] == modes[1] {
            return Err(FockError::RepeatedMode(modes[0]));
        }
        if matrix.len() != d * d {
            return Err(FockError::Dimension {
                expected: d,
                found: matrix.len(),
            });
        }
        let defect = unitarity_defect(&matrix, d);
        if defect.is_nan() || defect >= UNITARY_TOL {
            return Err(FockError::NonUnitary(defect));
        }
        Ok(ModeUnitary { modes, matrix })
    }

    /// Phase shift `e^{i phase}` on a single mode.
    pub fn phase(mode: Mode, phase: f64) -> Self {
        ModeUnitary {
            modes: vec![mode],
            matrix: vec![Complex64::from_polar(1.0, phase)],
        }
    }

    /// Directional coupler with power transmission `ratio`, in the symmetric
    /// convention `[[t, i e^{i phase} r], [i e^{-i phase} r, t]]`.
    pub fn coupler(a: Mode, b: Mode, ratio: f64, phase: f64) -> Result<Self, FockError> {
        let t = Complex64::new(ratio.sqrt(), 0.0);
        let r = (1.0 - ratio).sqrt();
        let i = Complex64::i();
        Self::new(
            vec![a, b],
            vec![t, i * Complex64::from_polar(r, phase), i * Complex64::from_polar(r, -phase), t],
        )
    }

    /// Exchange of two modes.
    pub fn swap(a: Mode, b: Mode) -> Result<Self, FockError> {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        Self::new(vec![a, b], vec![z, o, o, z])
    }

    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(a: Mode, b: Mode, angle: f64) -> Result<Self, FockError> {
        let (s, c) = angle.sin_cos();
        let re = |x: f64| Complex64::new(x, 0.0);
        Self::new(vec![a, b], vec![re(c), re(-s), re(s), re(c)])
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Entry `U[row][col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// `self * other` (apply `other` first). Both must act on the same modes.
    pub fn compose(&self, other: &ModeUnitary) -> Result<ModeUnitary, FockError> {
        if self.modes != other.modes {
            return Err(FockError::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let d = self.dim();
        let mut m = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    m[i * d + j] += self.entry(i, k) * other.entry(k, j);
                }
            }
        }
        ModeUnitary::new(self.modes.clone(), m)
    }

    pub fn is_permutation(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0 && (z.re == 0.0 || z.re == 1.0))
    }
}

/// Which modes a detector watches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeSelector {
    Exact(Vec<Mode>),
    /// Every bin and polarisation of a rail.
    Rail(u32),
    /// Every bin of one polarisation on a rail.
    RailPol(u32, Pol),
}

impl ModeSelector {
    pub fn matches(&self, m: &Mode) -> bool {
        match self {
            ModeSelector::Exact(ms) => ms.contains(m),
            ModeSelector::Rail(r) => m.rail == *r,
            ModeSelector::RailPol(r, p) => m.rail == *r && m.pol == *p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorModel {
    /// Click / no click.
    Threshold,
    /// Exact photon count.
    NumberResolving,
}

/// One detection branch: the exact photon content of the watched modes, the
/// per-detector readout under the chosen model, its probability and the
/// renormalised state of the unwatched modes.
#[derive(Clone, Debug)]
pub struct DetectionBranch {
    pub pattern: Occupation,
    pub readout: Vec<u32>,
    pub probability: f64,
    pub post: PhotonicState,
}

/// Exact pure state of a fixed number of photons.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonicState {
    terms: BTreeMap<Occupation, Complex64>,
    photons: u32,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl PhotonicState {
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Occupation::vacuum(), Complex64::new(1.0, 0.0));
        PhotonicState { terms, photons: 0 }
    }

    /// Basis state with amplitude one.
    pub fn basis(occ: Occupation) -> Result<Self, FockError> {
        Self::from_terms([(occ, Complex64::new(1.0, 0.0))])
    }

    /// Single photon in `mode`.
    pub fn single(mode: Mode) -> Self {
        Self::basis(Occupation::photons([mode])).expect("one photon is within bounds")
    }

    /// Builds a state from (basis, amplitude) pairs. Repeated basis states are
    /// summed; the result is not normalised.
    pub fn from_terms<I: IntoIterator<Item = (Occupation, Complex64)>>(terms: I) -> Result<Self, FockError> {
        let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        let mut photons = None;
        for (occ, amp) in terms {
            let n = occ.total();
            match photons {
                None => photons = Some(n),
                Some(p) if p != n => return Err(FockError::MixedPhotonNumber(p, n)),
                _ => {}
            }
            *map.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let state = PhotonicState {
            terms: map,
            photons: photons.unwrap_or(0),
        };
        state.check_bounds()?;
        Ok(state.pruned())
    }

    fn check_bounds(&self) -> Result<(), FockError> {
        if self.photons > MAX_PHOTONS {
            return Err(FockError::PhotonBound {
                found: self.photons,
                max: MAX_PHOTONS,
            });
        }
        let modes = self.support_modes().len();
        if modes > MAX_MODES {
            return Err(FockError::ModeBound {
                found: modes,
                max: MAX_MODES,
            });
        }
        Ok(())
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, a| a.norm() >= PRUNE_EPS);
        self
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self, FockError> {
        let n = self.norm_sqr().sqrt();
        if self.terms.is_empty() || n == 0.0 {
            return Err(FockError::EmptyState);
        }
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a / n)).collect();
        Ok(PhotonicState {
            terms,
            photons: self.photons,
        }
        .pruned())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * factor)).collect();
        PhotonicState {
            terms,
            photons: self.photons,
        }
        .pruned()
    }

    /// All modes holding a photon in some term.
    pub fn support_modes(&self) -> BTreeSet<Mode> {
        self.terms.keys().flat_map(|o| o.modes()).collect()
    }

    pub fn rails(&self) -> BTreeSet<u32> {
        self.support_modes().into_iter().map(|m| m.rail).collect()
    }

    /// Product state. The two states must occupy disjoint rails.
    pub fn tensor(&self, other: &PhotonicState) -> Result<PhotonicState, FockError> {
        let mine = self.rails();
        if let Some(r) = other.rails().intersection(&mine).next() {
            return Err(FockError::RailCollision(*r));
        }
        let mut terms = BTreeMap::new();
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                terms.insert(ka.merge(kb), a * b);
            }
        }
        let s = PhotonicState {
            terms,
            photons: self.photons + other.photons,
        };
        s.check_bounds()?;
        Ok(s.pruned())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PhotonicState) -> Complex64 {
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    /// `|<self|other>|^2` for normalised inputs.
    pub fn fidelity(&self, other: &PhotonicState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies a mode unitary to every term.
    pub fn apply_unitary(&self, u: &ModeUnitary) -> Result<PhotonicState, FockError> {
        let d = u.dim();
        let umodes = u.modes();
        let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        // Expansion cache keyed by the input counts on the coupled modes.
        let mut cache: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Complex64)>> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let counts: Vec<u32> = umodes.iter().map(|m| occ.count(m)).collect();
            if counts.iter().all(|&n| n == 0) {
                *out.entry(occ.clone()).or_default() += amp;
                continue;
            }
            let (_, rest) = occ.split(|m| umodes.contains(m));
            let expansion = cache.entry(counts.clone()).or_insert_with(|| expand(u, d, &counts));
            for (outc, coeff) in expansion.iter() {
                let added = Occupation::from_counts(umodes.iter().zip(outc.iter()).map(|(&m, &n)| (m, n)));
                *out.entry(rest.merge(&added)).or_default() += amp * coeff;
            }
        }
        let s = PhotonicState {
            terms: out,
            photons: self.photons,
        };
        s.check_bounds()?;
        Ok(s.pruned())
    }

    /// Shifts every mode on `rail` by `bins` time bins.
    pub fn shift_bins(&self, rail: u32, bins: u32) -> Result<PhotonicState, FockError> {
        self.relabel(|m| if m.rail == rail { Mode { bin: m.bin + bins, ..m } } else { m })
    }

    /// Applies an injective relabelling of modes.
    pub fn relabel<F: Fn(Mode) -> Mode>(&self, f: F) -> Result<PhotonicState, FockError> {
        let mut terms = BTreeMap::new();
        for (k, a) in &self.terms {
            terms.insert(k.map_modes(&f)?, *a);
        }
        Ok(PhotonicState {
            terms,
            photons: self.photons,
        })
    }

    /// Projective photon-content measurement of the modes watched by
    /// `detectors`. Branches are returned in canonical order of the detected
    /// pattern; each carries the per-detector readout under `model`.
    pub fn detect(&self, detectors: &[ModeSelector], model: DetectorModel) -> Result<Vec<DetectionBranch>, FockError> {
        if self.terms.is_empty() {
            return Err(FockError::EmptyState);
        }
        let total = self.norm_sqr();
        if total == 0.0 {
            return Err(FockError::EmptyState);
        }
        let watched = |m: &Mode| detectors.iter().any(|d| d.matches(m));
        let mut groups: BTreeMap<Occupation, Vec<(Occupation, Complex64)>> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let (seen, rest) = occ.split(watched);
            groups.entry(seen).or_default().push((rest, *amp));
        }
        let mut branches = Vec::with_capacity(groups.len());
        for (pattern, rest) in groups {
            let weight: f64 = rest.iter().map(|(_, a)| a.norm_sqr()).sum();
            // the first matching detector owns a mode
            let mut readout = vec![0u32; detectors.len()];
            for &(m, n) in pattern.entries() {
                if let Some(owner) = detectors.iter().position(|d| d.matches(&m)) {
                    readout[owner] += n;
                }
            }
            if model == DetectorModel::Threshold {
                readout.iter_mut().for_each(|n| *n = (*n).min(1));
            }
            let post = PhotonicState::from_terms(rest)?.normalized()?;
            branches.push(DetectionBranch {
                pattern,
                readout,
                probability: weight / total,
                post,
            });
        }
        Ok(branches)
    }
}

/// Coefficients of `prod_i (sum_j U[j][i] a†_j)^{n_i} / sqrt(prod n_i!)`
/// re-expressed over normalised output Fock states.
fn expand(u: &ModeUnitary, d: usize, counts: &[u32]) -> Vec<(Vec<u32>, Complex64)> {
    let mut poly: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    poly.insert(vec![0; d], Complex64::new(1.0, 0.0));
    for (i, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
            for (mono, c) in &poly {
                for j in 0..d {
                    let uji = u.entry(j, i);
                    if uji.norm() == 0.0 {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[j] += 1;
                    *next.entry(m).or_default() += c * uji;
                }
            }
            poly = next;
        }
    }
    let in_norm: f64 = counts.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
    poly.into_iter()
        .map(|(mono, c)| {
            let out_norm: f64 = mono.iter().map(|&k| factorial(k)).product::<f64>().sqrt();
            (mono, c * out_norm / in_norm)
        })
        .collect()
}
