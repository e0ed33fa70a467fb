//! Ideal graph (cluster) states: `prod CZ |+>^V` with classical Pauli frame
//! bookkeeping, redundant encoding groups, fusion and single-vertex
//! measurement rules.
//!
//! The rules are checked against brute-force state-vector projection; every
//! comparison goes through [`GraphState::to_statevector`].

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use thiserror::Error;

use crate::logical::{LogicalError, LogicalState, Mat2, Pauli};

pub type VertexId = u32;

/// Largest graph expanded into a state vector.
pub const MAX_STATEVECTOR_VERTICES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {0} is not in the graph")]
    MissingVertex(VertexId),
    #[error("vertex {0} already present")]
    DuplicateVertex(VertexId),
    #[error("graphs share vertex {0}")]
    Overlap(VertexId),
    #[error("{0} vertices exceed the state-vector limit of {MAX_STATEVECTOR_VERTICES}")]
    TooLarge(usize),
    #[error("vertex {0} carries a frame or local operator")]
    FramedVertex(VertexId),
    #[error("type-II fusion of {0} and {1} needs at least one redundantly encoded partner")]
    MissingRedundancy(VertexId, VertexId),
    #[error("vertex {0} and its neighbourhood must not be redundantly encoded for this rule")]
    Unsupported(VertexId),
    #[error("outcome {outcome} on vertex {vertex} has zero probability")]
    ImpossibleOutcome { vertex: VertexId, outcome: u8 },
    #[error(transparent)]
    Logical(#[from] LogicalError),
}

/// Outcome-dependent correction attached to a successful fusion.
///
/// `fused` acts on the surviving fused vertex. `partner_flip` applies X to
/// every surviving member of the second input's encoding group and Z to that
/// group's former neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Byproduct {
    pub fused: Pauli,
    pub partner_flip: bool,
}

impl Byproduct {
    pub const NONE: Byproduct = Byproduct {
        fused: Pauli::I,
        partner_flip: false,
    };

    /// Candidate corrections in search order.
    pub fn candidates() -> Vec<Byproduct> {
        let mut v = Vec::new();
        for partner_flip in [false, true] {
            for fused in Pauli::ALL {
                v.push(Byproduct { fused, partner_flip });
            }
        }
        v
    }

    pub fn code(&self) -> String {
        format!("{}{}", self.fused.symbol(), if self.partner_flip { "+flip" } else { "" })
    }

    pub fn from_code(s: &str) -> Option<Byproduct> {
        let (head, flip) = match s.strip_suffix("+flip") {
            Some(h) => (h, true),
            None => (s, false),
        };
        let mut chars = head.chars();
        let p = Pauli::from_symbol(chars.next()?)?;
        if chars.next().is_some() {
            return None;
        }
        Some(Byproduct {
            fused: p,
            partner_flip: flip,
        })
    }
}

/// Graph-level effect of one fusion attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusionOutcome {
    Success(Byproduct),
    /// The two photons were measured; `m1`, `m2` are the outcomes on the
    /// first and second fused vertex (Z basis for type I, X basis for type II).
    Failure {
        m1: u8,
        m2: u8,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    Z,
    X,
    /// `R_z(sign * theta)` followed by a Hadamard, then a Z measurement.
    Rotated {
        theta: f64,
        sign: i8,
    },
}

impl Basis {
    /// Rows are the measurement bras for outcomes 0 and 1.
    pub fn bras(&self) -> Mat2 {
        match *self {
            Basis::Z => Mat2::identity(),
            Basis::X => Mat2::hadamard(),
            Basis::Rotated { theta, sign } => Mat2::hadamard().mul(&Mat2::rz(f64::from(sign) * theta)),
        }
    }
}

/// Result of a single-vertex measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum Measured {
    Graph(GraphState),
    Vector(LogicalState),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphState {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
    /// Outermost Pauli corrections (identity entries are not stored).
    frame: BTreeMap<VertexId, Pauli>,
    /// Local unitaries produced by measurement rules, applied before the frame.
    local: BTreeMap<VertexId, Mat2>,
    /// Redundant encodings: each set of two or more vertices is one logical qubit.
    groups: Vec<BTreeSet<VertexId>>,
}

fn edge(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    (a.min(b), a.max(b))
}

fn pauli_mul(a: Pauli, b: Pauli) -> Pauli {
    let (ax, az) = a.flags();
    let (bx, bz) = b.flags();
    Pauli::from_flags(ax ^ bx, az ^ bz)
}

/// `exp(-i sign pi/4 Y)`, the local correction of the X-measurement rule.
fn sqrt_iy(sign: i8) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k = f64::from(sign);
    Mat2::real(s, -k * s, k * s, s)
}

impl GraphState {
    pub fn new<I: IntoIterator<Item = VertexId>>(vertices: I) -> Self {
        GraphState {
            vertices: vertices.into_iter().collect(),
            ..Default::default()
        }
    }

    /// Graph from vertices and edges; CZ on every edge of `|+>^V`.
    pub fn from_edges<I, E>(vertices: I, edges: E) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut g = GraphState::new(vertices);
        for (a, b) in edges {
            if !g.has_edge(a, b) {
                g = g.apply_cz(a, b)?;
            }
        }
        Ok(g)
    }

    /// Linear cluster over `ids` in order.
    pub fn chain(ids: &[VertexId]) -> Self {
        Self::from_edges(ids.iter().copied(), ids.windows(2).map(|w| (w[0], w[1]))).expect("distinct chain ids")
    }

    pub fn star(center: VertexId, leaves: &[VertexId]) -> Self {
        Self::from_edges(
            std::iter::once(center).chain(leaves.iter().copied()),
            leaves.iter().map(|&l| (center, l)),
        )
        .expect("distinct star ids")
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn groups(&self) -> &[BTreeSet<VertexId>] {
        &self.groups
    }

    pub fn frame(&self) -> &BTreeMap<VertexId, Pauli> {
        &self.frame
    }

    pub fn pauli(&self, v: VertexId) -> Pauli {
        self.frame.get(&v).copied().unwrap_or(Pauli::I)
    }

    pub fn has_local_ops(&self) -> bool {
        !self.local.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&edge(a, b))
    }

    pub fn neighbors(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    /// The encoding group of `v` (a singleton when not redundantly encoded).
    pub fn group_of(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.groups.iter().find(|g| g.contains(&v)).cloned().unwrap_or_else(|| [v].into())
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if self.vertices.contains(&v) {
            Ok(())
        } else {
            Err(GraphError::MissingVertex(v))
        }
    }

    fn is_plain(&self, v: VertexId) -> bool {
        !self.frame.contains_key(&v) && !self.local.contains_key(&v)
    }

    pub fn add_vertex(&self, v: VertexId) -> Result<GraphState, GraphError> {
        if self.vertices.contains(&v) {
            return Err(GraphError::DuplicateVertex(v));
        }
        let mut g = self.clone();
        g.vertices.insert(v);
        Ok(g)
    }

    /// Toggles the edge `(a, b)`.
    pub fn apply_cz(&self, a: VertexId, b: VertexId) -> Result<GraphState, GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        self.check(a)?;
        self.check(b)?;
        for v in [a, b] {
            if !self.is_plain(v) {
                return Err(GraphError::FramedVertex(v));
            }
        }
        let mut g = self.clone();
        g.toggle_edge(a, b);
        Ok(g)
    }

    fn toggle_edge(&mut self, a: VertexId, b: VertexId) {
        let e = edge(a, b);
        if !self.edges.remove(&e) {
            self.edges.insert(e);
        }
    }

    /// Declares `members` as one redundantly encoded logical qubit. Members
    /// must be plain vertices without mutual edges.
    pub fn with_group<I: IntoIterator<Item = VertexId>>(&self, members: I) -> Result<GraphState, GraphError> {
        let members: BTreeSet<VertexId> = members.into_iter().collect();
        let mut g = self.clone();
        let mut merged = BTreeSet::new();
        for &m in &members {
            g.check(m)?;
            merged.extend(g.group_of(m));
        }
        g.groups.retain(|grp| grp.is_disjoint(&merged));
        if merged.len() > 1 {
            g.groups.push(merged);
        }
        g.groups.sort();
        Ok(g)
    }

    /// Multiplies the outer Pauli frame of `v` by `p`.
    pub fn with_pauli(&self, v: VertexId, p: Pauli) -> Result<GraphState, GraphError> {
        self.check(v)?;
        let mut g = self.clone();
        g.push_outer(v, p);
        Ok(g)
    }

    fn push_outer(&mut self, v: VertexId, p: Pauli) {
        let q = pauli_mul(self.pauli(v), p);
        if q == Pauli::I {
            self.frame.remove(&v);
        } else {
            self.frame.insert(v, q);
        }
    }

    /// Appends an operator applied directly to the graph state (inside the
    /// existing local operator and frame of `v`).
    fn push_inner(&mut self, v: VertexId, m: Mat2) {
        match self.local.get(&v) {
            Some(l) => {
                let prod = l.mul(&m);
                self.local.insert(v, prod);
            }
            None => {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    if m.distance_up_to_phase(&p.matrix()) < 1e-12 {
                        self.push_outer(v, p);
                        return;
                    }
                }
                if m.distance_up_to_phase(&Mat2::identity()) < 1e-12 {
                    return;
                }
                self.local.insert(v, m);
            }
        }
    }

    fn remove_vertex(&mut self, v: VertexId) {
        self.vertices.remove(&v);
        self.edges.retain(|&(a, b)| a != v && b != v);
        self.frame.remove(&v);
        self.local.remove(&v);
        for g in &mut self.groups {
            g.remove(&v);
        }
        self.groups.retain(|g| g.len() > 1);
    }

    /// Moves every edge of `from` onto `to` (toggling).
    fn transfer_edges(&mut self, from: VertexId, to: VertexId) {
        for n in self.neighbors(from) {
            self.toggle_edge(from, n);
            if n != to {
                self.toggle_edge(to, n);
            }
        }
    }

    /// Disjoint union.
    pub fn union(&self, other: &GraphState) -> Result<GraphState, GraphError> {
        if let Some(v) = self.vertices.intersection(&other.vertices).next() {
            return Err(GraphError::Overlap(*v));
        }
        let mut g = self.clone();
        g.vertices.extend(other.vertices.iter().copied());
        g.edges.extend(other.edges.iter().copied());
        g.frame.extend(other.frame.iter().map(|(k, v)| (*k, *v)));
        g.local.extend(other.local.iter().map(|(k, v)| (*k, *v)));
        g.groups.extend(other.groups.iter().cloned());
        g.groups.sort();
        Ok(g)
    }

    /// Normalised amplitudes of the state, qubits in ascending vertex order.
    pub fn to_statevector(&self) -> Result<LogicalState, GraphError> {
        let n = self.vertices.len();
        if n > MAX_STATEVECTOR_VERTICES {
            return Err(GraphError::TooLarge(n));
        }
        let order: Vec<VertexId> = self.vertices.iter().copied().collect();
        let pos = |v: VertexId| order.iter().position(|&x| x == v).expect("vertex in order");
        // logical qubits: groups plus singletons
        let mut logical: Vec<Vec<usize>> = self.groups.iter().map(|g| g.iter().map(|&v| pos(v)).collect()).collect();
        for &v in &order {
            if !self.groups.iter().any(|g| g.contains(&v)) {
                logical.push(vec![pos(v)]);
            }
        }
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b)| (pos(a), pos(b))).collect();
        let scale = (0.5f64).powf(logical.len() as f64 / 2.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for assign in 0..(1usize << logical.len()) {
            let mut bits = vec![false; n];
            for (k, members) in logical.iter().enumerate() {
                if assign & (1 << k) != 0 {
                    for &p in members {
                        bits[p] = true;
                    }
                }
            }
            let parity = edges.iter().filter(|&&(a, b)| bits[a] && bits[b]).count() % 2;
            let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
            amps[idx] = Complex64::new(if parity == 1 { -scale } else { scale }, 0.0);
        }
        let mut s = LogicalState::new(order, amps)?;
        for (&v, m) in &self.local {
            s = s.apply(v, m)?;
        }
        for (&v, &p) in &self.frame {
            s = s.apply_pauli(v, p)?;
        }
        Ok(s)
    }

    /// Exact probability of `outcome` when measuring `v` in `basis`.
    pub fn outcome_probability(&self, v: VertexId, basis: Basis, outcome: u8) -> Result<f64, GraphError> {
        self.check(v)?;
        let (p, _) = self.to_statevector()?.measure_after(v, &basis.bras(), outcome)?;
        Ok(p)
    }

    /// Measures vertex `v`. Z and X use graph rules; the rotated basis goes
    /// through the state vector.
    pub fn measure_vertex(&self, v: VertexId, basis: Basis, outcome: u8) -> Result<Measured, GraphError> {
        self.check(v)?;
        match basis {
            Basis::Z => Ok(Measured::Graph(self.measure_z(v, outcome)?)),
            Basis::X => Ok(Measured::Graph(self.measure_x(v, outcome)?)),
            Basis::Rotated { .. } => {
                let (p, rest) = self.to_statevector()?.measure_after(v, &basis.bras(), outcome)?;
                if p == 0.0 {
                    return Err(GraphError::ImpossibleOutcome { vertex: v, outcome });
                }
                Ok(Measured::Vector(rest))
            }
        }
    }

    fn measure_z(&self, v: VertexId, outcome: u8) -> Result<GraphState, GraphError> {
        if self.local.contains_key(&v) {
            return Err(GraphError::FramedVertex(v));
        }
        let m = (outcome & 1) ^ u8::from(self.pauli(v).flags().0);
        let group = self.group_of(v);
        let mut g = self.clone();
        let zm = if m == 1 { Pauli::Z.matrix() } else { Mat2::identity() };
        for &u in &group {
            for n in self.neighbors(u) {
                if !group.contains(&n) {
                    g.push_inner(n, zm);
                }
            }
        }
        for &u in group.iter().filter(|&&u| u != v) {
            // collapsed partner: |m> = X^m H |+>
            for n in g.neighbors(u) {
                g.toggle_edge(u, n);
            }
            let x = if m == 1 { Mat2::x() } else { Mat2::identity() };
            g.push_inner(u, x.mul(&Mat2::hadamard()));
        }
        g.groups.retain(|grp| !grp.contains(&v));
        g.remove_vertex(v);
        Ok(g)
    }

    fn measure_x(&self, v: VertexId, outcome: u8) -> Result<GraphState, GraphError> {
        if self.local.contains_key(&v) {
            return Err(GraphError::FramedVertex(v));
        }
        let m = (outcome & 1) ^ u8::from(self.pauli(v).flags().1);
        let group = self.group_of(v);
        let mut g = self.clone();
        if group.len() > 1 {
            let keep = *group.iter().find(|&&u| u != v).expect("group has a partner");
            g.transfer_edges(v, keep);
            if m == 1 {
                g.push_inner(keep, Mat2::z());
            }
            g.remove_vertex(v);
            return Ok(g);
        }
        let nv = self.neighbors(v);
        let Some(&b0) = nv.iter().next() else {
            if m == 1 {
                return Err(GraphError::ImpossibleOutcome { vertex: v, outcome });
            }
            g.remove_vertex(v);
            return Ok(g);
        };
        for &u in nv.iter().chain([&v]) {
            if self.group_of(u).len() > 1 {
                return Err(GraphError::Unsupported(u));
            }
        }
        let nb = self.neighbors(b0);
        g.local_complement(b0);
        g.local_complement(v);
        g.local_complement(b0);
        g.remove_vertex(v);
        if m == 0 {
            g.push_inner(b0, sqrt_iy(-1));
            for &c in nv.iter().filter(|&&c| c != b0 && !nb.contains(&c)) {
                g.push_inner(c, Mat2::z());
            }
        } else {
            g.push_inner(b0, sqrt_iy(1));
            for &c in nb.iter().filter(|&&c| c != v && !nv.contains(&c)) {
                g.push_inner(c, Mat2::z());
            }
        }
        Ok(g)
    }

    fn local_complement(&mut self, v: VertexId) {
        let n: Vec<VertexId> = self.neighbors(v).into_iter().collect();
        for i in 0..n.len() {
            for j in (i + 1)..n.len() {
                self.toggle_edge(n[i], n[j]);
            }
        }
    }

    fn fusion_precheck(g1: &GraphState, v1: VertexId, g2: &GraphState, v2: VertexId) -> Result<GraphState, GraphError> {
        g1.check(v1)?;
        g2.check(v2)?;
        let u = g1.union(g2)?;
        for v in [v1, v2] {
            if !u.is_plain(v) {
                return Err(GraphError::FramedVertex(v));
            }
        }
        Ok(u)
    }

    fn apply_byproduct(&mut self, fused: VertexId, partner: &BTreeSet<VertexId>, partner_nbrs: &BTreeSet<VertexId>, b: Byproduct) {
        self.push_outer(fused, b.fused);
        if b.partner_flip {
            for &u in partner {
                self.push_outer(u, Pauli::X);
            }
            for &n in partner_nbrs {
                self.push_outer(n, Pauli::Z);
            }
        }
    }

    fn group_neighbors(&self, group: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
        group
            .iter()
            .flat_map(|&u| self.neighbors(u))
            .filter(|n| !group.contains(n))
            .collect()
    }

    /// Type-I fusion of `v1` (survivor) with `v2`.
    ///
    /// Success merges the two vertices: `v1` takes over the neighbours of
    /// `v2`. Failure is a Z measurement of both.
    pub fn fuse1(g1: &GraphState, v1: VertexId, g2: &GraphState, v2: VertexId, outcome: FusionOutcome) -> Result<GraphState, GraphError> {
        let mut g = Self::fusion_precheck(g1, v1, g2, v2)?;
        match outcome {
            FusionOutcome::Success(b) => {
                let l2 = g2.group_of(v2);
                let partner: BTreeSet<VertexId> = l2.iter().copied().filter(|&u| u != v2).collect();
                let partner_nbrs = g2.group_neighbors(&l2);
                g.transfer_edges(v2, v1);
                let merged: BTreeSet<VertexId> = g1.group_of(v1).union(&partner).copied().collect();
                g.remove_vertex(v2);
                g = g.with_group(merged)?;
                g.apply_byproduct(v1, &partner, &partner_nbrs, b);
                Ok(g)
            }
            FusionOutcome::Failure { m1, m2 } => g.measure_z(v1, m1)?.measure_z(v2, m2),
        }
    }

    /// Type-II fusion: both photons are consumed.
    ///
    /// Success joins the remaining members of both encoding groups into one
    /// logical vertex carrying the union of neighbourhoods. Failure is an X
    /// measurement of both photons.
    pub fn fuse2(g1: &GraphState, v1: VertexId, g2: &GraphState, v2: VertexId, outcome: FusionOutcome) -> Result<GraphState, GraphError> {
        let mut g = Self::fusion_precheck(g1, v1, g2, v2)?;
        let l1 = g1.group_of(v1);
        let l2 = g2.group_of(v2);
        if l1.len() < 2 && l2.len() < 2 {
            return Err(GraphError::MissingRedundancy(v1, v2));
        }
        match outcome {
            FusionOutcome::Success(b) => {
                let rest1: BTreeSet<VertexId> = l1.iter().copied().filter(|&u| u != v1).collect();
                let partner: BTreeSet<VertexId> = l2.iter().copied().filter(|&u| u != v2).collect();
                let partner_nbrs = g2.group_neighbors(&l2);
                let merged: BTreeSet<VertexId> = rest1.union(&partner).copied().collect();
                let anchor = *merged.iter().next().expect("nonempty merged group");
                g.transfer_edges(v1, anchor);
                g.transfer_edges(v2, anchor);
                g.remove_vertex(v1);
                g.remove_vertex(v2);
                g = g.with_group(merged)?;
                g.apply_byproduct(anchor, &partner, &partner_nbrs, b);
                Ok(g)
            }
            FusionOutcome::Failure { m1, m2 } => g.measure_x(v1, m1)?.measure_x(v2, m2),
        }
    }

    /// The vertex holding the merged logical qubit after a successful fusion.
    pub fn fused_vertex(kind_type2: bool, g1: &GraphState, v1: VertexId, g2: &GraphState, v2: VertexId) -> Option<VertexId> {
        if !kind_type2 {
            return Some(v1);
        }
        g1.group_of(v1)
            .into_iter()
            .filter(|&u| u != v1)
            .chain(g2.group_of(v2).into_iter().filter(|&u| u != v2))
            .min()
    }
}
