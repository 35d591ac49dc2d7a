//! Minimum-weight perfect matching decoder for one patch's matching graph.
//!
//! Shortest paths between all nodes are precomputed. For a set of detection
//! events the decoder builds the complete graph on the events plus one
//! boundary copy per event (copies are joined by zero-weight edges) and
//! solves it with a blossom matching on integer-scaled weights.

mod blossom;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub use blossom::max_weight_matching;

use crate::error::{Error, Result};
use crate::matching_graph::MatchingGraph;
use crate::pauli::PauliFrame;

/// Fixed-point scale applied to weights before matching.
const SCALE: f64 = (1u64 << 36) as f64;
const NO_EDGE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Each event paired with another event, or `None` for the boundary.
    pub pairs: Vec<(usize, Option<usize>)>,
    /// Total path weight of the matching.
    pub weight: f64,
    /// Graph edges used an odd number of times across all matched paths.
    pub edges: Vec<usize>,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Decoder with precomputed shortest paths.
#[derive(Debug, Clone)]
pub struct Mwpm {
    graph: MatchingGraph,
    size: usize,
    dist: Vec<f64>,
    pred: Vec<u32>,
}

impl Mwpm {
    pub fn new(graph: MatchingGraph) -> Self {
        let size = graph.num_nodes() + 1;
        let mut dist = vec![f64::INFINITY; size * size];
        let mut pred = vec![NO_EDGE; size * size];
        for s in 0..size {
            let row = &mut dist[s * size..(s + 1) * size];
            let prow = &mut pred[s * size..(s + 1) * size];
            row[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(HeapItem(0.0, s));
            while let Some(HeapItem(d, u)) = heap.pop() {
                if d > row[u] {
                    continue;
                }
                for &(v, e) in graph.neighbors(u) {
                    let nd = d + graph.edges[e].weight;
                    if nd < row[v] {
                        row[v] = nd;
                        prow[v] = e as u32;
                        heap.push(HeapItem(nd, v));
                    }
                }
            }
        }
        Self {
            graph,
            size,
            dist,
            pred,
        }
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.size + v]
    }

    /// Edges of the stored shortest path from `u` to `v`.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = v;
        while cur != u {
            let e = self.pred[u * self.size + cur];
            if e == NO_EDGE {
                return Vec::new();
            }
            out.push(e as usize);
            let edge = &self.graph.edges[e as usize];
            cur = if edge.u == cur { edge.v } else { edge.u };
        }
        out
    }

    /// Minimum-weight pairing of `events` (node indices, any order).
    pub fn decode(&self, events: &[usize]) -> Result<Matching> {
        let mut ev = events.to_vec();
        ev.sort_unstable();
        ev.dedup();
        let boundary = self.graph.boundary();
        if let Some(&bad) = ev.iter().find(|&&x| x >= boundary) {
            return Err(Error::Decode(format!(
                "detection event {bad} outside graph with {boundary} nodes"
            )));
        }
        let n = ev.len();
        let mut pairs = Vec::with_capacity(n);
        if n == 1 {
            pairs.push((ev[0], None));
        } else if n > 1 {
            let mut max_w: f64 = 0.0;
            let mut raw: Vec<(usize, usize, f64)> = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let d = self.distance(ev[i], ev[j]);
                    if d.is_finite() {
                        raw.push((i, j, d));
                        max_w = max_w.max(d);
                    }
                }
                let d = self.distance(ev[i], boundary);
                if d.is_finite() {
                    raw.push((i, n + i, d));
                    max_w = max_w.max(d);
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    raw.push((n + i, n + j, 0.0));
                }
            }
            let top = (max_w * SCALE).round() as i64 + 1;
            let edges: Vec<(usize, usize, i64)> = raw
                .iter()
                .map(|&(i, j, w)| (i, j, top - (w * SCALE).round() as i64))
                .collect();
            let mate = max_weight_matching(&edges, true);
            for i in 0..n {
                match mate.get(i).copied().flatten() {
                    Some(j) if j < n => {
                        if i < j {
                            pairs.push((ev[i], Some(ev[j])));
                        }
                    }
                    Some(_) => pairs.push((ev[i], None)),
                    None => {
                        return Err(Error::Decode(format!(
                            "detection event {} cannot be matched",
                            ev[i]
                        )))
                    }
                }
            }
        }
        let mut weight = 0.0;
        let mut used = vec![false; self.graph.edges.len()];
        for &(a, b) in &pairs {
            let b = b.unwrap_or(boundary);
            let d = self.distance(a, b);
            if !d.is_finite() {
                return Err(Error::Decode(format!(
                    "detection event {a} has no path to {b}"
                )));
            }
            weight += d;
            for e in self.path(a, b) {
                used[e] ^= true;
            }
        }
        let edges = (0..used.len()).filter(|&e| used[e]).collect();
        Ok(Matching {
            pairs,
            weight,
            edges,
        })
    }

    /// Decodes `events` into per-slice data-qubit correction frames.
    pub fn decode_to_frames(&self, events: &[usize]) -> Result<Vec<PauliFrame>> {
        let m = self.decode(events)?;
        let mut frames = self.graph.empty_frames();
        for e in m.edges {
            self.graph.apply_edge(e, &mut frames);
        }
        Ok(frames)
    }
}

/// Exhaustive minimum-weight pairing with Floyd–Warshall distances, used as
/// an independent reference for small event sets.
#[derive(Debug, Clone)]
pub struct BruteForce {
    size: usize,
    boundary: usize,
    dist: Vec<f64>,
}

pub const BRUTE_FORCE_LIMIT: usize = 20;

impl BruteForce {
    pub fn new(graph: &MatchingGraph) -> Self {
        let size = graph.num_nodes() + 1;
        let mut dist = vec![f64::INFINITY; size * size];
        for i in 0..size {
            dist[i * size + i] = 0.0;
        }
        for e in &graph.edges {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let slot = &mut dist[a * size + b];
                *slot = slot.min(e.weight);
            }
        }
        for k in 0..size {
            for i in 0..size {
                let dik = dist[i * size + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..size {
                    let cand = dik + dist[k * size + j];
                    if cand < dist[i * size + j] {
                        dist[i * size + j] = cand;
                    }
                }
            }
        }
        Self {
            size,
            boundary: graph.boundary(),
            dist,
        }
    }

    /// Minimum total weight over all pairings of `events` where any event
    /// may instead go to the boundary.
    pub fn min_weight(&self, events: &[usize]) -> Result<f64> {
        let mut ev = events.to_vec();
        ev.sort_unstable();
        ev.dedup();
        if ev.len() > BRUTE_FORCE_LIMIT {
            return Err(Error::Decode(format!(
                "brute force limited to {BRUTE_FORCE_LIMIT} events, got {}",
                ev.len()
            )));
        }
        let d = |a: usize, b: usize| self.dist[a * self.size + b];
        // best[mask]: cheapest way to retire the events in `mask`, always
        // resolving the lowest one first so each pairing is seen once
        let n = ev.len();
        let mut best = vec![f64::INFINITY; 1 << n];
        best[0] = 0.0;
        for mask in 1usize..1 << n {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let mut w = d(ev[i], self.boundary) + best[rest];
            let mut others = rest;
            while others != 0 {
                let j = others.trailing_zeros() as usize;
                others &= others - 1;
                w = w.min(d(ev[i], ev[j]) + best[rest & !(1 << j)]);
            }
            best[mask] = w;
        }
        let w = best[(1 << n) - 1];
        if !w.is_finite() {
            return Err(Error::Decode("events cannot be matched".into()));
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Basis, CodeFamily, LogicalCircuitSpec, NoiseModel};
    use rand::{Rng, SeedableRng};

    fn rep(d: usize, rounds: usize) -> Mwpm {
        Mwpm::new(
            MatchingGraph::from_spec(&LogicalCircuitSpec::memory(
                CodeFamily::Repetition,
                d,
                rounds,
                Basis::Z,
                NoiseModel::Phenomenological,
                0.05,
            ))
            .unwrap(),
        )
    }

    #[test]
    fn single_data_error_is_corrected() {
        let m = rep(5, 2);
        let g = m.graph();
        // X on q2 before round 0 fires checks 1 and 2 in round 0
        let frames = m.decode_to_frames(&[g.node(0, 1), g.node(0, 2)]).unwrap();
        assert_eq!(frames[0].x_support(), vec![2]);
        assert!(frames[1..].iter().all(|f| f.is_identity()));
        // X on q0 fires only check 0: matched to the boundary
        let frames = m.decode_to_frames(&[g.node(1, 0)]).unwrap();
        assert_eq!(frames[1].x_support(), vec![0]);
        assert!(g.flips_logical(&frames[1]));
    }

    #[test]
    fn measurement_error_is_temporal() {
        let m = rep(5, 3);
        let g = m.graph();
        let r = m.decode(&[g.node(1, 2), g.node(2, 2)]).unwrap();
        assert_eq!(r.edges.len(), 1);
        assert!(m.decode_to_frames(&[g.node(1, 2), g.node(2, 2)]).unwrap().iter().all(|f| f.is_identity()));
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let m = rep(3, 2);
        let r = m.decode(&[]).unwrap();
        assert!(r.pairs.is_empty() && r.edges.is_empty() && r.weight == 0.0);
        assert!(m.decode(&[m.graph().boundary()]).is_err());
    }

    #[test]
    fn matches_brute_force_on_random_syndromes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for (d, rounds) in [(3, 2), (5, 3), (7, 4)] {
            let m = rep(d, rounds);
            let bf = BruteForce::new(m.graph());
            let n = m.graph().num_nodes();
            for _ in 0..200 {
                let k = rng.random_range(0..=8);
                let events: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
                let got = m.decode(&events).unwrap().weight;
                let want = bf.min_weight(&events).unwrap();
                assert!((got - want).abs() < 1e-9, "{events:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn sd6_surface_matches_brute_force() {
        let spec = LogicalCircuitSpec::memory(
            CodeFamily::RotatedSurface,
            3,
            3,
            Basis::Z,
            NoiseModel::Sd6,
            0.003,
        );
        let m = Mwpm::new(MatchingGraph::from_spec(&spec).unwrap());
        let bf = BruteForce::new(m.graph());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let n = m.graph().num_nodes();
        for _ in 0..300 {
            let k = rng.random_range(0..=10);
            let events: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            let got = m.decode(&events).unwrap();
            let want = bf.min_weight(&events).unwrap();
            assert!((got.weight - want).abs() < 1e-9);
        }
    }
}
