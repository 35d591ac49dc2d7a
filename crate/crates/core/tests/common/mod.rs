//! Injected bit-flip instances on a d=5 phenomenological repetition code.
//! Patch 0 ("left") gets X on q0,q1 before round 0; patch 1 ("right") gets
//! X on q4 before round 1.
#![allow(dead_code)]

use tcnot::circuit::LogicalCircuit;
use tcnot::sampler::{self, Fault, SiteKind};
use tcnot::*;

pub const D: usize = 5;

pub fn spec(directions: &[(usize, usize)], rounds: Vec<usize>) -> LogicalCircuitSpec {
    LogicalCircuitSpec::two_patch(
        CodeFamily::Repetition,
        D,
        directions,
        rounds,
        Basis::Z,
        NoiseModel::Phenomenological,
        0.01,
    )
}

pub fn single_cnot() -> LogicalCircuitSpec {
    spec(&[(0, 1)], vec![1, 1])
}

pub fn two_cnots() -> LogicalCircuitSpec {
    spec(&[(0, 1), (1, 0)], vec![1, 1, 1])
}

/// Bit-flip site on `patch`'s data qubit `q` just before `round`.
pub fn flip_site(lc: &LogicalCircuit, sampler: &FrameSampler, round: usize, patch: usize, q: usize) -> usize {
    let qubit = patch * lc.layout.num_qubits() + q;
    let mut seen = Vec::new();
    for (i, s) in sampler.sites().iter().enumerate() {
        if s.kind != SiteKind::XError {
            continue;
        }
        if !seen.contains(&s.instruction) {
            seen.push(s.instruction);
        }
        if seen.len() == round + 1 && s.a == qubit {
            return i;
        }
    }
    panic!("no flip site for round {round} qubit {qubit}");
}

pub fn inject(lc: &LogicalCircuit) -> ShotResult {
    let sampler = FrameSampler::new(&lc.circuit).unwrap();
    let mut faults: Vec<Fault> = [(0, 0, 0), (0, 0, 1), (1, 1, 4)]
        .iter()
        .map(|&(r, k, q)| Fault {
            site: flip_site(lc, &sampler, r, k, q),
            code: 1,
        })
        .collect();
    faults.sort();
    let shot = sampler.evaluate(&faults);
    assert_eq!(shot, sampler::simulate_faults(&lc.circuit, &faults).unwrap());
    shot
}

/// Fired detectors of one patch as (round, check).
pub fn fired(g: &MatchingGraph, syndrome: &[bool]) -> Vec<(usize, usize)> {
    (0..g.num_nodes())
        .filter(|&n| syndrome[n])
        .map(|n| (n / g.num_checks, n % g.num_checks))
        .collect()
}
