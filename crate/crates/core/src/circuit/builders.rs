//! Circuit generators for memory experiments and transversal-CNOT circuits.

use serde::{Deserialize, Serialize};

use super::layout::{Basis, CodeFamily, PatchLayout};
use super::{Circuit, DetectorMeta, Instruction};
use crate::error::{Error, Result};

/// Circuit-level noise model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Standard depolarizing: reset flips, single- and two-qubit
    /// depolarizing after every gate and on idle qubits, measurement flips.
    Sd6,
    /// Data-qubit noise once per round plus measurement flips; extraction
    /// gates are ideal. Repetition codes get bit flips, surface codes get
    /// single-qubit depolarizing noise.
    Phenomenological,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sd6" => Ok(NoiseModel::Sd6),
            "phenomenological" | "phenom" => Ok(NoiseModel::Phenomenological),
            other => Err(Error::Parameter(format!("unknown noise model '{other}'"))),
        }
    }
}

/// A circuit of `num_patches` identical code patches: syndrome-extraction
/// blocks of `rounds[γ]` rounds interleaved with transversal CNOT layers.
/// `layers.len() + 1 == rounds.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalCircuitSpec {
    pub family: CodeFamily,
    pub distance: usize,
    pub num_patches: usize,
    /// Each layer is a list of `(control, target)` patch pairs.
    pub layers: Vec<Vec<(usize, usize)>>,
    pub rounds: Vec<usize>,
    /// Preparation and readout basis shared by every patch.
    pub basis: Basis,
    pub noise: NoiseModel,
    pub p: f64,
}

/// One transversal CNOT in the flattened layer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnotEvent {
    pub layer: usize,
    pub control: usize,
    pub target: usize,
    /// Index of the first extraction round after the CNOT.
    pub round: usize,
}

/// Decoder-side address of a detector: the patch and its node index
/// `round * n_checks + check` in that patch's matching graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchDetector {
    pub patch: usize,
    pub node: usize,
}

impl LogicalCircuitSpec {
    /// Two patches with one CNOT per layer; `directions[i]` is `(control,
    /// target)` of the i-th CNOT.
    pub fn two_patch(
        family: CodeFamily,
        distance: usize,
        directions: &[(usize, usize)],
        rounds: Vec<usize>,
        basis: Basis,
        noise: NoiseModel,
        p: f64,
    ) -> Self {
        Self {
            family,
            distance,
            num_patches: 2,
            layers: directions.iter().map(|&d| vec![d]).collect(),
            rounds,
            basis,
            noise,
            p,
        }
    }

    /// A single-patch memory circuit of `rounds` rounds.
    pub fn memory(
        family: CodeFamily,
        distance: usize,
        rounds: usize,
        basis: Basis,
        noise: NoiseModel,
        p: f64,
    ) -> Self {
        Self {
            family,
            distance,
            num_patches: 1,
            layers: Vec::new(),
            rounds: vec![rounds],
            basis,
            noise,
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_patches == 0 {
            return Err(Error::Spec("at least one patch is required".into()));
        }
        if self.rounds.len() != self.layers.len() + 1 {
            return Err(Error::Spec(format!(
                "{} CNOT layers need {} round counts, got {}",
                self.layers.len(),
                self.layers.len() + 1,
                self.rounds.len()
            )));
        }
        if let Some(pos) = self.rounds.iter().position(|&x| x == 0) {
            return Err(Error::Spec(format!("round count {pos} must be at least 1")));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Parameter(format!("p = {} outside [0, 1]", self.p)));
        }
        if self.family == CodeFamily::Repetition && self.basis == Basis::X {
            return Err(Error::Spec(
                "the repetition code only protects Z-basis states".into(),
            ));
        }
        for (g, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.num_patches];
            for &(c, t) in layer {
                if c == t {
                    return Err(Error::Spec(format!(
                        "layer {g}: CNOT control and target are both patch {c}"
                    )));
                }
                for q in [c, t] {
                    if q >= self.num_patches {
                        return Err(Error::Spec(format!(
                            "layer {g}: patch {q} out of range for {} patches",
                            self.num_patches
                        )));
                    }
                    if std::mem::replace(&mut used[q], true) {
                        return Err(Error::Spec(format!(
                            "layer {g}: patch {q} used by two CNOTs"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn total_rounds(&self) -> usize {
        self.rounds.iter().sum()
    }

    pub fn num_cnots(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// CNOTs in layer order, then in listed order within a layer.
    pub fn cnot_events(&self) -> Vec<CnotEvent> {
        let mut out = Vec::new();
        let mut y = 0;
        for (g, layer) in self.layers.iter().enumerate() {
            y += self.rounds[g];
            for &(control, target) in layer {
                out.push(CnotEvent {
                    layer: g,
                    control,
                    target,
                    round: y,
                });
            }
        }
        out
    }

    /// The single-patch memory circuit with the same total number of rounds.
    pub fn memory_equivalent(&self) -> Self {
        Self {
            num_patches: 1,
            layers: Vec::new(),
            rounds: vec![self.total_rounds()],
            ..self.clone()
        }
    }

    /// The same patches idling for the same total number of rounds.
    pub fn baseline(&self) -> Self {
        Self {
            layers: Vec::new(),
            rounds: vec![self.total_rounds()],
            ..self.clone()
        }
    }

    pub fn layout(&self) -> Result<PatchLayout> {
        PatchLayout::new(self.family, self.distance)
    }

    /// Builds the noisy circuit. Circuits without CNOT layers carry
    /// detectors of both check types; circuits with CNOTs only carry those
    /// of the preparation basis.
    pub fn build(&self) -> Result<LogicalCircuit> {
        self.validate()?;
        let layout = self.layout()?;
        let both = self.layers.is_empty() && layout.family == CodeFamily::RotatedSurface;
        let circuit = generate(&layout, self, both)?;
        let n_checks = layout.checks(self.basis).len();
        let patch_detectors = circuit
            .detectors()
            .iter()
            .map(|d| {
                (d.meta.basis == self.basis).then_some(PatchDetector {
                    patch: d.meta.patch,
                    node: d.meta.round * n_checks + d.meta.check,
                })
            })
            .collect();
        Ok(LogicalCircuit {
            spec: self.clone(),
            layout,
            circuit,
            patch_detectors,
        })
    }
}

/// A generated circuit with the bookkeeping the decoder needs.
#[derive(Debug, Clone)]
pub struct LogicalCircuit {
    pub spec: LogicalCircuitSpec,
    pub layout: PatchLayout,
    pub circuit: Circuit,
    /// For each circuit detector, its patch-local address if it belongs to
    /// the decoded check type.
    pub patch_detectors: Vec<Option<PatchDetector>>,
}

impl LogicalCircuit {
    /// Checks of the decoded type per patch.
    pub fn num_checks(&self) -> usize {
        self.layout.checks(self.spec.basis).len()
    }

    /// Detector nodes per patch: one per check per round, plus the final
    /// data-readout slice.
    pub fn nodes_per_patch(&self) -> usize {
        self.num_checks() * (self.spec.total_rounds() + 1)
    }
}

/// Standalone memory circuit on one patch.
pub fn memory_circuit(
    layout: &PatchLayout,
    rounds: usize,
    basis: Basis,
    noise: NoiseModel,
    p: f64,
) -> Result<Circuit> {
    let spec = LogicalCircuitSpec::memory(layout.family, layout.distance, rounds, basis, noise, p);
    spec.validate()?;
    generate(layout, &spec, layout.family == CodeFamily::RotatedSurface)
}

struct Emitter {
    insts: Vec<Instruction>,
    measurements: usize,
}

impl Emitter {
    fn push(&mut self, inst: Instruction) {
        let empty = match &inst {
            Instruction::ResetZ(q) | Instruction::H(q) | Instruction::MeasureZ(q) => q.is_empty(),
            Instruction::Depolarize1 { targets, .. }
            | Instruction::XError { targets, .. }
            | Instruction::MeasureFlip { targets, .. } => targets.is_empty(),
            Instruction::Cnot(p) | Instruction::Depolarize2 { pairs: p, .. } => p.is_empty(),
            _ => false,
        };
        if !empty {
            self.insts.push(inst);
        }
    }

    fn measure(&mut self, qubits: Vec<usize>) -> Vec<usize> {
        let start = self.measurements;
        self.measurements += qubits.len();
        self.push(Instruction::MeasureZ(qubits));
        (start..self.measurements).collect()
    }

    fn lookback(&self, records: &[usize]) -> Vec<usize> {
        records.iter().map(|&r| self.measurements - r).collect()
    }
}

fn generate(layout: &PatchLayout, spec: &LogicalCircuitSpec, both_bases: bool) -> Result<Circuit> {
    let nq = layout.num_qubits();
    let k = spec.num_patches;
    let p = spec.p;
    let sd6 = spec.noise == NoiseModel::Sd6;
    let data: Vec<usize> = (0..k)
        .flat_map(|i| (0..layout.num_data).map(move |q| i * nq + q))
        .collect();
    let z_anc: Vec<usize> = (0..k)
        .flat_map(|i| layout.z_checks.iter().map(move |c| i * nq + c.ancilla))
        .collect();
    let x_anc: Vec<usize> = (0..k)
        .flat_map(|i| layout.x_checks.iter().map(move |c| i * nq + c.ancilla))
        .collect();
    let ancillas: Vec<usize> = z_anc.iter().chain(&x_anc).copied().collect();
    let all: Vec<usize> = (0..k * nq).collect();
    let d1 = |targets: Vec<usize>| Instruction::Depolarize1 { p, targets };

    // CNOT pairs per extraction step, over all patches.
    let steps: Vec<Vec<(usize, usize)>> = (0..layout.cnot_steps)
        .map(|s| {
            let mut pairs = Vec::new();
            for i in 0..k {
                let off = i * nq;
                for c in &layout.z_checks {
                    if let Some(q) = c.schedule[s] {
                        pairs.push((off + q, off + c.ancilla));
                    }
                }
                for c in &layout.x_checks {
                    if let Some(q) = c.schedule[s] {
                        pairs.push((off + c.ancilla, off + q));
                    }
                }
            }
            pairs
        })
        .collect();

    let bases: Vec<Basis> = if both_bases {
        vec![spec.basis, spec.basis.other()]
    } else {
        vec![spec.basis]
    };

    let mut e = Emitter {
        insts: Vec::new(),
        measurements: 0,
    };

    e.push(Instruction::ResetZ(data.clone()));
    if sd6 {
        e.push(Instruction::XError {
            p,
            targets: data.clone(),
        });
    }
    if spec.basis == Basis::X {
        e.push(Instruction::Tick);
        e.push(Instruction::H(data.clone()));
        if sd6 {
            e.push(d1(data.clone()));
        }
    }
    e.push(Instruction::Tick);

    // prev[patch][basis][check] = absolute record of the previous round
    let mut prev: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; k];
    let basis_slot = |b: Basis| match b {
        Basis::Z => 0,
        Basis::X => 1,
    };
    let mut round = 0usize;
    for (block, &x) in spec.rounds.iter().enumerate() {
        for _ in 0..x {
            if !sd6 {
                if layout.family == CodeFamily::Repetition {
                    e.push(Instruction::XError {
                        p,
                        targets: data.clone(),
                    });
                } else {
                    e.push(d1(data.clone()));
                }
            }
            e.push(Instruction::ResetZ(ancillas.clone()));
            if sd6 {
                e.push(Instruction::XError {
                    p,
                    targets: ancillas.clone(),
                });
                e.push(d1(data.clone()));
            }
            e.push(Instruction::Tick);
            if !x_anc.is_empty() {
                e.push(Instruction::H(x_anc.clone()));
                if sd6 {
                    e.push(d1(all.clone()));
                }
                e.push(Instruction::Tick);
            }
            for pairs in &steps {
                e.push(Instruction::Cnot(pairs.clone()));
                if sd6 {
                    e.push(Instruction::Depolarize2 {
                        p,
                        pairs: pairs.clone(),
                    });
                    let mut busy = vec![false; k * nq];
                    for &(a, b) in pairs {
                        busy[a] = true;
                        busy[b] = true;
                    }
                    e.push(d1(all.iter().copied().filter(|&q| !busy[q]).collect()));
                }
                e.push(Instruction::Tick);
            }
            if !x_anc.is_empty() {
                e.push(Instruction::H(x_anc.clone()));
                if sd6 {
                    e.push(d1(all.clone()));
                }
                e.push(Instruction::Tick);
            }
            e.push(Instruction::MeasureFlip {
                p,
                targets: ancillas.clone(),
            });
            if sd6 {
                e.push(d1(data.clone()));
            }
            let records = e.measure(ancillas.clone());
            let nz = layout.z_checks.len();
            let nx = layout.x_checks.len();
            for i in 0..k {
                let z_rec = &records[i * nz..(i + 1) * nz];
                let x_rec = &records[k * nz + i * nx..k * nz + (i + 1) * nx];
                for &b in &bases {
                    let cur = if b == Basis::Z { z_rec } else { x_rec };
                    let slot = basis_slot(b);
                    for (check, &r) in cur.iter().enumerate() {
                        if round == 0 && b != spec.basis {
                            continue;
                        }
                        let mut recs = vec![r];
                        if round > 0 {
                            recs.push(prev[i][slot][check]);
                        }
                        let lookback = e.lookback(&recs);
                        e.push(Instruction::Detector {
                            lookback,
                            meta: DetectorMeta {
                                patch: i,
                                round,
                                basis: b,
                                check,
                            },
                        });
                    }
                    prev[i][slot] = cur.to_vec();
                }
            }
            e.push(Instruction::Tick);
            round += 1;
        }
        if let Some(layer) = spec.layers.get(block) {
            let mut pairs = Vec::new();
            for &(c, t) in layer {
                for q in 0..layout.num_data {
                    pairs.push((c * nq + q, t * nq + q));
                }
            }
            e.push(Instruction::Cnot(pairs));
            e.push(Instruction::Tick);
        }
    }

    if spec.basis == Basis::X {
        e.push(Instruction::H(data.clone()));
        if sd6 {
            e.push(d1(data.clone()));
        }
        e.push(Instruction::Tick);
    }
    e.push(Instruction::MeasureFlip {
        p,
        targets: data.clone(),
    });
    let data_records = e.measure(data.clone());
    let slot = basis_slot(spec.basis);
    for i in 0..k {
        let base = i * layout.num_data;
        for (check, c) in layout.checks(spec.basis).iter().enumerate() {
            let mut recs: Vec<usize> = c.support.iter().map(|&q| data_records[base + q]).collect();
            recs.push(prev[i][slot][check]);
            let lookback = e.lookback(&recs);
            e.push(Instruction::Detector {
                lookback,
                meta: DetectorMeta {
                    patch: i,
                    round,
                    basis: spec.basis,
                    check,
                },
            });
        }
    }
    for i in 0..k {
        let base = i * layout.num_data;
        let recs: Vec<usize> = layout
            .logical(spec.basis)
            .iter()
            .map(|&q| data_records[base + q])
            .collect();
        let lookback = e.lookback(&recs);
        e.push(Instruction::Observable { id: i, lookback });
    }
    Circuit::new(e.insts, k * nq)
}
