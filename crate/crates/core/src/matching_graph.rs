//! Per-patch matching graph extracted from the detector error model of the
//! memory-equivalent circuit.
//!
//! Every noise outcome is propagated to the detectors of the decoded check
//! type. Outcomes with identical `(detectors, logical flip)` signatures are
//! merged and then classified:
//!
//! * one detector, or two in the same round: a spatial edge, labelled with the
//!   data qubits whose error reproduces the signature;
//! * the same check in consecutive rounds without a logical flip: a temporal
//!   edge;
//! * anything else: a diagonal edge carrying its decomposition into spatial
//!   and temporal edges. Signatures with more than two detectors are split
//!   into existing edges and their probability is folded into them.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::circuit::{Basis, LogicalCircuitSpec, PatchLayout};
use crate::error::{Error, Result};
use crate::pauli::PauliFrame;
use crate::sampler::{noise_sites, FaultTable, SiteKind};

const MIN_PROBABILITY: f64 = 1e-15;
const MAX_DECOMPOSITION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Spatial,
    Temporal,
    Diagonal,
}

impl std::fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EdgeKind::Spatial => "spatial",
            EdgeKind::Temporal => "temporal",
            EdgeKind::Diagonal => "diagonal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    /// Second endpoint; equals [`MatchingGraph::boundary`] for boundary edges.
    pub v: usize,
    pub p: f64,
    pub weight: f64,
    pub kind: EdgeKind,
    /// Whether the error flips the patch's logical readout.
    pub flips_logical: bool,
    /// Error slice of a spatial edge; the earlier round otherwise.
    pub slice: usize,
    /// Data qubits flipped by a spatial edge.
    pub qubits: Vec<usize>,
    /// Primitive edges of a diagonal edge.
    pub decomposition: Vec<usize>,
}

/// Matching graph of one patch. Node `round * num_checks + check` is the
/// detector of `check` in `round`; round `num_slices - 1` is the final data
/// readout. Node `num_nodes` is the boundary.
#[derive(Debug, Clone)]
pub struct MatchingGraph {
    pub basis: Basis,
    pub num_checks: usize,
    pub num_slices: usize,
    pub num_data: usize,
    pub edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    check_supports: Vec<Vec<usize>>,
    logical: Vec<usize>,
}

fn weight_of(p: f64) -> f64 {
    let p = p.max(MIN_PROBABILITY);
    ((1.0 - p) / p).ln().max(0.0)
}

fn merge_probability(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

type Signature = (Vec<usize>, bool);

impl MatchingGraph {
    /// Extracts the graph shared by all patches of `spec`.
    pub fn from_spec(spec: &LogicalCircuitSpec) -> Result<Self> {
        let lc = spec.memory_equivalent().build()?;
        let circuit = &lc.circuit;
        let sites = noise_sites(circuit);
        let table = FaultTable::new(circuit, &sites)?;
        let num_checks = lc.num_checks();
        let num_slices = spec.total_rounds() + 1;
        let num_nodes = num_checks * num_slices;

        let mut signatures: BTreeMap<Signature, f64> = BTreeMap::new();
        for (i, site) in sites.iter().enumerate() {
            let n = site.num_outcomes();
            let p = site.p / n as f64;
            for code in 1..=n {
                let mut nodes: Vec<usize> = Vec::new();
                let mut obs = false;
                for (slot, bit) in [(0usize, 1u8), (1, 2), (2, 4), (3, 8)] {
                    let on = match site.kind {
                        SiteKind::Depolarize1
                        | SiteKind::Depolarize2 => code & bit != 0,
                        _ => slot == 0,
                    };
                    if !on {
                        continue;
                    }
                    let e = table.effect(i, slot);
                    for &d in &e.detectors {
                        if let Some(pd) = lc.patch_detectors[d as usize] {
                            nodes.push(pd.node);
                        }
                    }
                    obs ^= e.observables & 1 != 0;
                }
                nodes.sort_unstable();
                let mut reduced: Vec<usize> = Vec::with_capacity(nodes.len());
                for x in nodes {
                    if reduced.last() == Some(&x) {
                        reduced.pop();
                    } else {
                        reduced.push(x);
                    }
                }
                if reduced.is_empty() {
                    if obs && p > 0.0 {
                        log::warn!("noise site {i} flips the logical without any detector");
                    }
                    continue;
                }
                let entry = signatures.entry((reduced, obs)).or_insert(0.0);
                *entry = merge_probability(*entry, p);
            }
        }

        let mut graph = MatchingGraph {
            basis: spec.basis,
            num_checks,
            num_slices,
            num_data: lc.layout.num_data,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); num_nodes + 1],
            check_supports: lc
                .layout
                .checks(spec.basis)
                .iter()
                .map(|c| c.support.clone())
                .collect(),
            logical: lc.layout.logical(spec.basis).to_vec(),
        };
        graph.classify(&lc.layout, signatures)?;
        Ok(graph)
    }

    fn classify(&mut self, layout: &PatchLayout, signatures: BTreeMap<Signature, f64>) -> Result<()> {
        let qubit_checks = layout.qubit_checks(self.basis);
        let n = self.num_checks;
        let boundary = self.boundary();
        let mut deferred = Vec::new();
        for ((nodes, obs), p) in signatures {
            let rounds: Vec<usize> = nodes.iter().map(|&x| x / n).collect();
            let checks: Vec<usize> = nodes.iter().map(|&x| x % n).collect();
            let same_round = nodes.len() <= 2 && rounds.iter().all(|&r| r == rounds[0]);
            let qubits = if same_round {
                self.explain(&qubit_checks, &checks, obs)
            } else {
                None
            };
            let (u, v) = match nodes.len() {
                1 => (nodes[0], boundary),
                _ => (nodes[0], nodes[1]),
            };
            if let Some(qubits) = qubits {
                self.push_edge(Edge {
                    u,
                    v,
                    p,
                    weight: 0.0,
                    kind: EdgeKind::Spatial,
                    flips_logical: obs,
                    slice: rounds[0],
                    qubits,
                    decomposition: Vec::new(),
                });
            } else if nodes.len() == 2 && checks[0] == checks[1] && rounds[1] == rounds[0] + 1 && !obs
            {
                self.push_edge(Edge {
                    u,
                    v,
                    p,
                    weight: 0.0,
                    kind: EdgeKind::Temporal,
                    flips_logical: false,
                    slice: rounds[0],
                    qubits: Vec::new(),
                    decomposition: Vec::new(),
                });
            } else {
                deferred.push((nodes, obs, p));
            }
        }
        for (nodes, obs, p) in deferred {
            let parts = self.decompose(&nodes, obs).ok_or_else(|| {
                Error::Extraction(format!(
                    "cannot decompose error with detectors {nodes:?} (logical flip {obs}) into at most {MAX_DECOMPOSITION} primitive edges"
                ))
            })?;
            if nodes.len() == 2 {
                let slice = parts
                    .iter()
                    .map(|&e| self.edges[e].slice)
                    .min()
                    .unwrap_or(nodes[0] / n);
                self.push_edge(Edge {
                    u: nodes[0],
                    v: nodes[1],
                    p,
                    weight: 0.0,
                    kind: EdgeKind::Diagonal,
                    flips_logical: obs,
                    slice,
                    qubits: Vec::new(),
                    decomposition: parts,
                });
            } else {
                for e in parts {
                    self.edges[e].p = merge_probability(self.edges[e].p, p);
                }
            }
        }
        for e in &mut self.edges {
            e.weight = weight_of(e.p);
        }
        Ok(())
    }

    /// Data qubits (one, else a pair) whose flip triggers exactly `checks`
    /// with logical parity `obs`.
    fn explain(&self, qubit_checks: &[Vec<usize>], checks: &[usize], obs: bool) -> Option<Vec<usize>> {
        let in_logical = |q: usize| self.logical.contains(&q);
        let mut target = checks.to_vec();
        target.sort_unstable();
        for q in 0..self.num_data {
            if qubit_checks[q] == target && in_logical(q) == obs {
                return Some(vec![q]);
            }
        }
        for a in 0..self.num_data {
            for b in a + 1..self.num_data {
                let mut sym: Vec<usize> = qubit_checks[a]
                    .iter()
                    .filter(|c| !qubit_checks[b].contains(c))
                    .chain(qubit_checks[b].iter().filter(|c| !qubit_checks[a].contains(c)))
                    .copied()
                    .collect();
                sym.sort_unstable();
                if sym == target && (in_logical(a) ^ in_logical(b)) == obs {
                    return Some(vec![a, b]);
                }
            }
        }
        None
    }

    fn push_edge(&mut self, edge: Edge) {
        let idx = self.edges.len();
        self.adjacency[edge.u].push((edge.v, idx));
        self.adjacency[edge.v].push((edge.u, idx));
        self.edges.push(edge);
    }

    /// Shortest decomposition of a detector set into existing spatial and
    /// temporal edges, preferring spatial edges at earlier slices.
    fn decompose(&self, nodes: &[usize], obs: bool) -> Option<Vec<usize>> {
        let boundary = self.boundary();
        let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); self.adjacency.len()];
        for (node, list) in self.adjacency.iter().enumerate() {
            let mut edges: Vec<usize> = list
                .iter()
                .map(|&(_, e)| e)
                .filter(|&e| self.edges[e].kind != EdgeKind::Diagonal)
                .collect();
            edges.sort_by_key(|&e| (self.edges[e].kind, self.edges[e].slice, e));
            edges.dedup();
            candidates[node] = edges;
        }
        for depth in 1..=MAX_DECOMPOSITION {
            let mut chosen = Vec::new();
            if self.search(nodes.to_vec(), obs, depth, &candidates, boundary, &mut chosen) {
                return Some(chosen);
            }
        }
        None
    }

    fn search(
        &self,
        residual: Vec<usize>,
        obs: bool,
        depth: usize,
        candidates: &[Vec<usize>],
        boundary: usize,
        chosen: &mut Vec<usize>,
    ) -> bool {
        let Some(&first) = residual.first() else {
            return !obs;
        };
        if depth == 0 || residual.len() > 2 * depth {
            return false;
        }
        for &e in &candidates[first] {
            if chosen.contains(&e) {
                continue;
            }
            let edge = &self.edges[e];
            let mut next = residual.clone();
            for x in [edge.u, edge.v] {
                if x == boundary {
                    continue;
                }
                match next.binary_search(&x) {
                    Ok(i) => {
                        next.remove(i);
                    }
                    Err(i) => next.insert(i, x),
                }
            }
            chosen.push(e);
            if self.search(next, obs ^ edge.flips_logical, depth - 1, candidates, boundary, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    pub fn num_nodes(&self) -> usize {
        self.num_checks * self.num_slices
    }

    pub fn boundary(&self) -> usize {
        self.num_nodes()
    }

    /// `(neighbor, edge index)` pairs of `node`.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn node(&self, round: usize, check: usize) -> usize {
        round * self.num_checks + check
    }

    /// Support of the decoded logical operator.
    pub fn logical(&self) -> &[usize] {
        &self.logical
    }

    /// Empty per-slice error frames.
    pub fn empty_frames(&self) -> Vec<PauliFrame> {
        vec![PauliFrame::new(self.num_data); self.num_slices]
    }

    /// Data-qubit flips of `frame` relevant to the decoded checks.
    pub fn frame_support(&self, frame: &PauliFrame) -> Vec<usize> {
        match self.basis {
            Basis::Z => frame.x_support(),
            Basis::X => frame.z_support(),
        }
    }

    /// Adds a relevant flip on data qubit `q`.
    pub fn toggle(&self, frame: &mut PauliFrame, q: usize) {
        match self.basis {
            Basis::Z => frame.toggle_x(q),
            Basis::X => frame.toggle_z(q),
        }
    }

    /// Checks violated by `frame`.
    pub fn syndrome_of(&self, frame: &PauliFrame) -> Vec<bool> {
        let bit = |q: usize| match self.basis {
            Basis::Z => frame.x_bit(q),
            Basis::X => frame.z_bit(q),
        };
        self.check_supports
            .iter()
            .map(|s| s.iter().fold(false, |acc, &q| acc ^ bit(q)))
            .collect()
    }

    /// Whether `frame` flips the logical readout.
    pub fn flips_logical(&self, frame: &PauliFrame) -> bool {
        let support = self.frame_support(frame);
        self.logical.iter().filter(|q| support.contains(q)).count() % 2 == 1
    }

    /// Applies the error represented by edge `e` to per-slice frames.
    pub fn apply_edge(&self, e: usize, frames: &mut [PauliFrame]) {
        let edge = &self.edges[e];
        match edge.kind {
            EdgeKind::Spatial => {
                for &q in &edge.qubits {
                    self.toggle(&mut frames[edge.slice], q);
                }
            }
            EdgeKind::Temporal => {}
            EdgeKind::Diagonal => {
                for &part in &edge.decomposition {
                    self.apply_edge(part, frames);
                }
            }
        }
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Human-readable edge list.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# basis={} checks={} slices={} boundary={}",
            self.basis,
            self.num_checks,
            self.num_slices,
            self.boundary()
        );
        let name = |x: usize| {
            if x == self.boundary() {
                "B".to_string()
            } else {
                format!("{}:{}", x / self.num_checks, x % self.num_checks)
            }
        };
        for (i, e) in self.edges.iter().enumerate() {
            let _ = write!(
                out,
                "{i} {} {} {} p={:e} w={:.6} slice={} logical={}",
                e.kind,
                name(e.u),
                name(e.v),
                e.p,
                e.weight,
                e.slice,
                e.flips_logical as u8
            );
            if !e.qubits.is_empty() {
                let _ = write!(out, " qubits={:?}", e.qubits);
            }
            if !e.decomposition.is_empty() {
                let _ = write!(out, " parts={:?}", e.decomposition);
            }
            out.push('\n');
        }
        out
    }
}
