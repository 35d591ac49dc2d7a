//! Iterative multi-pass MWPM decoding of circuits with transversal CNOTs.
//!
//! Each patch is decoded on its own matching graph. A transversal CNOT copies
//! the errors of its source patch (the control for Z-basis experiments, the
//! target for X-basis ones) onto its destination. Sweeping over the CNOTs in
//! order, the decoder estimates the source's pre-CNOT error frame `P` from
//! its current correction, toggles the destination's detectors in the first
//! round after the CNOT by the syndrome of `P`, and records `P` in the
//! destination's propagated-error frames `G`. Contributions from earlier
//! sweeps are undone by XOR, so each CNOT's effect always reflects the
//! latest estimate. A patch whose syndrome changed is re-decoded the next
//! time it is needed. Sweeps repeat until the estimates are stable or the
//! sweep limit is reached.

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, CnotEvent, LogicalCircuit, LogicalCircuitSpec};
use crate::error::{Error, Result};
use crate::matching_graph::MatchingGraph;
use crate::mwpm::Mwpm;
use crate::pauli::PauliFrame;
use crate::sampler::ShotResult;

/// When to stop sweeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// No CNOT's propagated frame changed during a sweep.
    FramesFixed,
    /// No detector was toggled during a sweep.
    NoToggles,
    /// Whichever of the two happens first.
    Either,
}

impl std::str::FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frames_fixed" | "frames-fixed" => Ok(Termination::FramesFixed),
            "no_toggles" | "no-toggles" => Ok(Termination::NoToggles),
            "either" => Ok(Termination::Either),
            other => Err(Error::Parameter(format!("unknown termination rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterativeConfig {
    /// Maximum number of sweeps; `None` means one more than the number of
    /// CNOTs.
    pub l_max: Option<usize>,
    pub termination: Termination,
}

impl Default for IterativeConfig {
    fn default() -> Self {
        Self {
            l_max: None,
            termination: Termination::Either,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Per-patch, per-slice corrections found by matching.
    pub b: Vec<Vec<PauliFrame>>,
    /// Per-patch, per-slice errors propagated in by CNOTs.
    pub g: Vec<Vec<PauliFrame>>,
    /// Per-patch detector values after all toggles.
    pub syndromes: Vec<Vec<bool>>,
    /// Number of sweeps that toggled at least one detector (at least 1).
    pub iterations: usize,
    /// False when the sweep limit stopped the loop.
    pub converged: bool,
    /// Predicted flip of each patch's logical readout, bit per patch.
    pub predicted_observables: u64,
}

impl DecodeOutcome {
    /// Net error frame of `patch`: `⊕_i B[i] ⊕ G[i]`.
    pub fn net_frame(&self, patch: usize) -> PauliFrame {
        let mut out = PauliFrame::new(self.b[patch][0].num_qubits());
        for (b, g) in self.b[patch].iter().zip(&self.g[patch]) {
            out.xor_assign(b).expect("uniform frame size");
            out.xor_assign(g).expect("uniform frame size");
        }
        out
    }
}

/// Decoder for one logical circuit layout; reusable across shots.
#[derive(Debug, Clone)]
pub struct IterativeDecoder {
    mwpm: Mwpm,
    events: Vec<CnotEvent>,
    num_patches: usize,
    basis: Basis,
    config: IterativeConfig,
}

impl IterativeDecoder {
    pub fn new(spec: &LogicalCircuitSpec, config: IterativeConfig) -> Result<Self> {
        spec.validate()?;
        let graph = MatchingGraph::from_spec(spec)?;
        Ok(Self::with_graph(spec, graph, config))
    }

    pub fn with_graph(spec: &LogicalCircuitSpec, graph: MatchingGraph, config: IterativeConfig) -> Self {
        Self {
            mwpm: Mwpm::new(graph),
            events: spec.cnot_events(),
            num_patches: spec.num_patches,
            basis: spec.basis,
            config,
        }
    }

    pub fn graph(&self) -> &MatchingGraph {
        self.mwpm.graph()
    }

    pub fn mwpm(&self) -> &Mwpm {
        &self.mwpm
    }

    pub fn l_max(&self) -> usize {
        self.config.l_max.unwrap_or(self.events.len() + 1)
    }

    /// Splits a sampled shot into per-patch detector vectors.
    pub fn split_syndromes(&self, circuit: &LogicalCircuit, shot: &ShotResult) -> Result<Vec<Vec<bool>>> {
        if shot.num_detectors != circuit.circuit.num_detectors() {
            return Err(Error::Contract(format!(
                "shot has {} detectors, circuit has {}",
                shot.num_detectors,
                circuit.circuit.num_detectors()
            )));
        }
        let nodes = self.graph().num_nodes();
        let mut out = vec![vec![false; nodes]; self.num_patches];
        for (d, pd) in circuit.patch_detectors.iter().enumerate() {
            if let Some(pd) = pd {
                if pd.patch >= self.num_patches || pd.node >= nodes {
                    return Err(Error::Contract(format!(
                        "detector {d} maps outside the decoder's graph"
                    )));
                }
                out[pd.patch][pd.node] = shot.detector(d);
            }
        }
        Ok(out)
    }

    pub fn decode_shot(&self, circuit: &LogicalCircuit, shot: &ShotResult) -> Result<DecodeOutcome> {
        self.decode(self.split_syndromes(circuit, shot)?)
    }

    /// Corrections for one patch's detector vector.
    pub fn decode_patch(&self, syndrome: &[bool]) -> Result<Vec<PauliFrame>> {
        let events: Vec<usize> = (0..syndrome.len()).filter(|&i| syndrome[i]).collect();
        self.mwpm.decode_to_frames(&events)
    }

    pub fn decode(&self, mut syndromes: Vec<Vec<bool>>) -> Result<DecodeOutcome> {
        let graph = self.graph();
        if syndromes.len() != self.num_patches {
            return Err(Error::Contract(format!(
                "{} syndromes for {} patches",
                syndromes.len(),
                self.num_patches
            )));
        }
        if let Some(s) = syndromes.iter().find(|s| s.len() != graph.num_nodes()) {
            return Err(Error::Contract(format!(
                "syndrome of length {} for a graph with {} nodes",
                s.len(),
                graph.num_nodes()
            )));
        }
        let n_checks = graph.num_checks;
        let mut b: Vec<Vec<PauliFrame>> = vec![graph.empty_frames(); self.num_patches];
        let mut g: Vec<Vec<PauliFrame>> = vec![graph.empty_frames(); self.num_patches];
        let mut dirty = vec![true; self.num_patches];
        let mut applied_syndrome = vec![vec![false; n_checks]; self.events.len()];
        let mut applied_frame = vec![PauliFrame::new(graph.num_data); self.events.len()];

        let l_max = self.l_max();
        let mut iterations = 0;
        let mut converged = self.events.is_empty();
        for sweep in 1..=l_max {
            if self.events.is_empty() {
                break;
            }
            let mut toggled = false;
            let mut frames_changed = false;
            for (a, ev) in self.events.iter().enumerate() {
                let (src, dst) = match self.basis {
                    Basis::Z => (ev.control, ev.target),
                    Basis::X => (ev.target, ev.control),
                };
                if dirty[src] {
                    b[src] = self.decode_patch(&syndromes[src])?;
                    dirty[src] = false;
                }
                let mut p_frame = PauliFrame::new(graph.num_data);
                for i in 0..ev.round {
                    p_frame.xor_assign(&b[src][i])?;
                    p_frame.xor_assign(&g[src][i])?;
                }
                let s_new = graph.syndrome_of(&p_frame);
                let mut delta_any = false;
                for (c, (&new, old)) in s_new.iter().zip(applied_syndrome[a].iter_mut()).enumerate() {
                    if new != *old {
                        let node = graph.node(ev.round, c);
                        syndromes[dst][node] ^= true;
                        *old = new;
                        delta_any = true;
                    }
                }
                if delta_any {
                    dirty[dst] = true;
                    toggled = true;
                }
                if p_frame != applied_frame[a] {
                    let change = p_frame.xor(&applied_frame[a])?;
                    g[dst][ev.round].xor_assign(&change)?;
                    applied_frame[a] = p_frame;
                    frames_changed = true;
                }
                log::debug!(
                    "sweep {sweep} cnot {a} ({src}->{dst} @ round {}): toggle={delta_any} frame={:?}",
                    ev.round,
                    graph.frame_support(&applied_frame[a])
                );
            }
            if toggled {
                iterations = sweep;
            }
            let stop = match self.config.termination {
                Termination::FramesFixed => !frames_changed,
                Termination::NoToggles => !toggled,
                Termination::Either => !frames_changed || !toggled,
            };
            if stop {
                converged = true;
                break;
            }
        }
        for k in 0..self.num_patches {
            if dirty[k] {
                b[k] = self.decode_patch(&syndromes[k])?;
            }
        }
        let mut outcome = DecodeOutcome {
            b,
            g,
            syndromes,
            iterations: iterations.max(1),
            converged,
            predicted_observables: 0,
        };
        for k in 0..self.num_patches {
            if graph.flips_logical(&outcome.net_frame(k)) {
                outcome.predicted_observables |= 1 << k;
            }
        }
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CodeFamily, NoiseModel};
    use crate::sampler::FrameSampler;

    #[test]
    fn no_cnots_is_plain_matching() {
        let spec = LogicalCircuitSpec::memory(
            CodeFamily::Repetition,
            5,
            2,
            Basis::Z,
            NoiseModel::Phenomenological,
            0.05,
        );
        let dec = IterativeDecoder::new(&spec, IterativeConfig::default()).unwrap();
        let mut s = vec![vec![false; dec.graph().num_nodes()]];
        s[0][dec.graph().node(0, 0)] = true;
        let out = dec.decode(s).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert_eq!(out.predicted_observables, 1);
    }

    #[test]
    fn rejects_wrong_shapes() {
        let spec = LogicalCircuitSpec::two_patch(
            CodeFamily::Repetition,
            3,
            &[(0, 1)],
            vec![1, 1],
            Basis::Z,
            NoiseModel::Phenomenological,
            0.05,
        );
        let dec = IterativeDecoder::new(&spec, IterativeConfig::default()).unwrap();
        assert!(matches!(dec.decode(vec![vec![]]), Err(Error::Contract(_))));
        assert!(dec.decode(vec![vec![false; 3], vec![false; 3]]).is_err());
    }

    #[test]
    fn noiseless_shots_decode_to_identity() {
        let spec = LogicalCircuitSpec::two_patch(
            CodeFamily::RotatedSurface,
            3,
            &[(0, 1), (1, 0)],
            vec![1, 1, 1],
            Basis::X,
            NoiseModel::Sd6,
            0.0,
        );
        let lc = spec.build().unwrap();
        let dec = IterativeDecoder::new(&spec, IterativeConfig::default()).unwrap();
        let shot = FrameSampler::new(&lc.circuit).unwrap().sample_shot(0, 0);
        let out = dec.decode_shot(&lc, &shot).unwrap();
        assert_eq!(out.predicted_observables, 0);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn sweep_limit_reports_non_convergence() {
        let spec = LogicalCircuitSpec::two_patch(
            CodeFamily::Repetition,
            5,
            &[(0, 1)],
            vec![1, 1],
            Basis::Z,
            NoiseModel::Phenomenological,
            0.05,
        );
        let config = IterativeConfig {
            l_max: Some(1),
            termination: Termination::NoToggles,
        };
        let dec = IterativeDecoder::new(&spec, config).unwrap();
        let g = dec.graph();
        let mut s = vec![vec![false; g.num_nodes()]; 2];
        // X on q0,q1 of the control before round 0, copied to the target.
        s[0][g.node(0, 1)] = true;
        s[1][g.node(1, 1)] = true;
        let out = dec.decode(s).unwrap();
        assert!(!out.converged);
        assert!(out.b[1].iter().all(|f| f.is_identity()));
        assert_eq!(out.iterations, 1);
        assert_eq!(g.frame_support(&out.g[1][1]), vec![0, 1]);
        assert_eq!(out.predicted_observables, 0b11);
    }
}
