//! Small dense qubit state vectors and 2x2 operators.
//!
//! Basis index convention: the first listed qubit is the most significant
//! bit, so for qubits `[a, b]` the order is `|00>, |01>, |10>, |11>`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicalError {
    #[error("qubit {0} is not part of the state")]
    UnknownQubit(u32),
    #[error("qubit {0} listed twice")]
    DuplicateQubit(u32),
    #[error("amplitude vector of length {found} does not match {qubits} qubits")]
    Length { qubits: usize, found: usize },
    #[error("projection has zero probability")]
    ZeroProbability,
}

/// Row-major 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn x() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn z() -> Self {
        Self::real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn y() -> Self {
        let i = C64::i();
        Self::new(0.0.into(), -i, i, 0.0.into())
    }

    pub fn hadamard() -> Self {
        Self::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
    }

    /// `|0> -> (|0>+|1>)/sqrt2`, `|1> -> (-|0>+|1>)/sqrt2`.
    pub fn rot45() -> Self {
        Self::real(FRAC_1_SQRT_2, -FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    /// `diag(e^{-i phi/2}, e^{i phi/2})`.
    pub fn rz(phi: f64) -> Self {
        Self::new(
            C64::from_polar(1.0, -phi / 2.0),
            0.0.into(),
            0.0.into(),
            C64::from_polar(1.0, phi / 2.0),
        )
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        Mat2(m)
    }

    pub fn adjoint(&self) -> Mat2 {
        Self::new(self.0[0][0].conj(), self.0[1][0].conj(), self.0[0][1].conj(), self.0[1][1].conj())
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.0[0][0] * v[0] + self.0[0][1] * v[1], self.0[1][0] * v[0] + self.0[1][1] * v[1]]
    }

    /// Multiplies by the phase that makes the first nonzero entry (column
    /// major) real and positive.
    pub fn phase_fixed(&self) -> Mat2 {
        let first = [self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1]]
            .into_iter()
            .find(|z| z.norm() > 1e-12);
        match first {
            Some(z) => {
                let f = z.conj() / z.norm();
                Mat2([[self.0[0][0] * f, self.0[0][1] * f], [self.0[1][0] * f, self.0[1][1] * f]])
            }
            None => *self,
        }
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - o.0[i][j]).norm());
            }
        }
        worst
    }

    /// Entrywise distance after fixing the global phase of both matrices.
    pub fn distance_up_to_phase(&self, o: &Mat2) -> f64 {
        self.phase_fixed().max_abs_diff(&o.phase_fixed())
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&Mat2::identity())
    }
}

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => Mat2::x(),
            Pauli::Y => Mat2::y(),
            Pauli::Z => Mat2::z(),
        }
    }

    /// (x, z) flags with `Y ~ XZ` up to phase.
    pub fn flags(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_flags(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        Pauli::ALL.into_iter().find(|p| p.symbol() == c)
    }
}

/// Pure state of labelled qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalState {
    qubits: Vec<u32>,
    amps: Vec<C64>,
}

impl LogicalState {
    pub fn new(qubits: Vec<u32>, amps: Vec<C64>) -> Result<Self, LogicalError> {
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(LogicalError::DuplicateQubit(*q));
            }
        }
        if amps.len() != 1usize << qubits.len() {
            return Err(LogicalError::Length {
                qubits: qubits.len(),
                found: amps.len(),
            });
        }
        Ok(LogicalState { qubits, amps })
    }

    /// Product state from per-qubit amplitude pairs.
    pub fn product(qubits: &[(u32, [C64; 2])]) -> Result<Self, LogicalError> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for (_, v) in qubits {
            amps = amps.iter().flat_map(|a| [a * v[0], a * v[1]]).collect();
        }
        Self::new(qubits.iter().map(|(q, _)| *q).collect(), amps)
    }

    pub fn qubits(&self) -> &[u32] {
        &self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    fn position(&self, q: u32) -> Result<usize, LogicalError> {
        self.qubits.iter().position(|&x| x == q).ok_or(LogicalError::UnknownQubit(q))
    }

    fn bit_mask(&self, q: u32) -> Result<usize, LogicalError> {
        let pos = self.position(q)?;
        Ok(1 << (self.qubits.len() - 1 - pos))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self, LogicalError> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(LogicalError::ZeroProbability);
        }
        Ok(LogicalState {
            qubits: self.qubits.clone(),
            amps: self.amps.iter().map(|a| a / n).collect(),
        })
    }

    pub fn apply(&self, q: u32, m: &Mat2) -> Result<Self, LogicalError> {
        let mask = self.bit_mask(q)?;
        let mut amps = self.amps.clone();
        for i in 0..amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let [a, b] = m.apply([self.amps[i], self.amps[j]]);
                amps[i] = a;
                amps[j] = b;
            }
        }
        Ok(LogicalState {
            qubits: self.qubits.clone(),
            amps,
        })
    }

    pub fn apply_pauli(&self, q: u32, p: Pauli) -> Result<Self, LogicalError> {
        if p == Pauli::I {
            self.position(q)?;
            return Ok(self.clone());
        }
        self.apply(q, &p.matrix())
    }

    pub fn apply_cz(&self, a: u32, b: u32) -> Result<Self, LogicalError> {
        let (ma, mb) = (self.bit_mask(a)?, self.bit_mask(b)?);
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &v)| if i & ma != 0 && i & mb != 0 { -v } else { v })
            .collect();
        Ok(LogicalState {
            qubits: self.qubits.clone(),
            amps,
        })
    }

    /// Projects qubit `q` onto `bra` (a row vector), removes the qubit and
    /// returns (probability, renormalised remainder).
    pub fn project(&self, q: u32, bra: [C64; 2]) -> Result<(f64, LogicalState), LogicalError> {
        let mask = self.bit_mask(q)?;
        let pos = self.position(q)?;
        let mut qubits = self.qubits.clone();
        qubits.remove(pos);
        let n = self.qubits.len();
        let low = (1usize << (n - 1 - pos)) - 1;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << (n - 1)];
        for (i, &v) in self.amps.iter().enumerate() {
            let bit = usize::from(i & mask != 0);
            let reduced = ((i >> 1) & !low) | (i & low);
            amps[reduced] += bra[bit] * v;
        }
        let total = self.norm_sqr();
        let rem = LogicalState { qubits, amps };
        let p = rem.norm_sqr() / total;
        if p < 1e-300 {
            return Ok((0.0, rem));
        }
        Ok((p, rem.normalized()?))
    }

    /// Measures `q` in the computational basis after applying `basis_change`
    /// (i.e. projects on the rows of that matrix). Returns the outcome
    /// probability and the post-state of the other qubits.
    pub fn measure_after(&self, q: u32, basis_change: &Mat2, outcome: u8) -> Result<(f64, LogicalState), LogicalError> {
        let row = basis_change.0[outcome as usize];
        self.project(q, row)
    }

    /// Reorders qubits to `order` (same set).
    pub fn reordered(&self, order: &[u32]) -> Result<Self, LogicalError> {
        if order.len() != self.qubits.len() {
            return Err(LogicalError::Length {
                qubits: order.len(),
                found: self.amps.len(),
            });
        }
        let masks: Vec<usize> = order.iter().map(|&q| self.bit_mask(q)).collect::<Result<_, _>>()?;
        let n = order.len();
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (new_idx, slot) in amps.iter_mut().enumerate() {
            let mut old = 0;
            for (k, m) in masks.iter().enumerate() {
                if new_idx & (1 << (n - 1 - k)) != 0 {
                    old |= m;
                }
            }
            *slot = self.amps[old];
        }
        LogicalState::new(order.to_vec(), amps)
    }

    /// `<self|other>` after aligning qubit order.
    pub fn inner(&self, other: &LogicalState) -> Result<C64, LogicalError> {
        let o = other.reordered(&self.qubits)?;
        Ok(self.amps.iter().zip(o.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &LogicalState) -> Result<f64, LogicalError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Global phase fixed so the first nonzero amplitude is real-positive.
    pub fn phase_fixed(&self) -> LogicalState {
        match self.amps.iter().find(|a| a.norm() > 1e-12) {
            Some(z) => {
                let f = z.conj() / z.norm();
                LogicalState {
                    qubits: self.qubits.clone(),
                    amps: self.amps.iter().map(|a| a * f).collect(),
                }
            }
            None => self.clone(),
        }
    }

    /// Bit-string label of basis index `i` in qubit order.
    pub fn label(&self, i: usize) -> String {
        let n = self.qubits.len();
        (0..n).map(|k| if i & (1 << (n - 1 - k)) != 0 { '1' } else { '0' }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn plus() -> [C64; 2] {
        [FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into()]
    }

    #[test]
    fn hadamard_on_plus_is_zero() {
        let s = LogicalState::product(&[(0, plus())]).unwrap();
        let h = s.apply(0, &Mat2::hadamard()).unwrap();
        assert!((h.amplitudes()[0] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn cz_on_plus_plus_gives_seed_signs() {
        let s = LogicalState::product(&[(0, plus()), (1, plus())]).unwrap().apply_cz(0, 1).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn project_removes_qubit() {
        let s = LogicalState::product(&[(3, [1.0.into(), 0.0.into()]), (5, plus())]).unwrap();
        let (p, rem) = s.project(3, [1.0.into(), 0.0.into()]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert_eq!(rem.qubits(), &[5]);
        let (p1, _) = s.project(3, [0.0.into(), 1.0.into()]).unwrap();
        assert_eq!(p1, 0.0);
    }

    #[test]
    fn reorder_roundtrip() {
        let s = LogicalState::new(vec![0, 1], vec![1.0.into(), 2.0.into(), 3.0.into(), 4.0.into()]).unwrap();
        let r = s.reordered(&[1, 0]).unwrap();
        assert_eq!(r.amplitudes()[1], C64::new(3.0, 0.0));
        assert_eq!(r.reordered(&[0, 1]).unwrap(), s);
    }

    #[test]
    fn phase_fix_and_rz() {
        let m = Mat2::rz(PI).phase_fixed();
        assert!(m.max_abs_diff(&Mat2::z()) < 1e-15);
        assert!(Mat2::rot45().unitarity_defect() < 1e-15);
    }
}
