//! Stabilizer circuit representation with noise channels and detector
//! annotations.

mod builders;
mod layout;
mod text;
mod validate;

pub use builders::{
    memory_circuit, CnotEvent, LogicalCircuit, LogicalCircuitSpec, NoiseModel, PatchDetector,
};
pub use layout::{Basis, Check, CodeFamily, PatchLayout};
pub use text::parse_circuit;

use crate::error::{Error, Result};

/// Where a detector sits in the per-patch space-time lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectorMeta {
    pub patch: usize,
    /// Syndrome-extraction round. The final data readout uses index `R`.
    pub round: usize,
    pub basis: Basis,
    /// Index into the patch's checks of `basis`.
    pub check: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    ResetZ(Vec<usize>),
    H(Vec<usize>),
    Cnot(Vec<(usize, usize)>),
    MeasureZ(Vec<usize>),
    /// Single-qubit depolarizing channel.
    Depolarize1 { p: f64, targets: Vec<usize> },
    /// Two-qubit depolarizing channel.
    Depolarize2 { p: f64, pairs: Vec<(usize, usize)> },
    XError { p: f64, targets: Vec<usize> },
    /// Classical flip of the next measurement of each target.
    MeasureFlip { p: f64, targets: Vec<usize> },
    /// Parity of earlier measurements, addressed as `rec[-k]`.
    Detector { lookback: Vec<usize>, meta: DetectorMeta },
    Observable { id: usize, lookback: Vec<usize> },
    Tick,
}

impl Instruction {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Instruction::ResetZ(q)
            | Instruction::H(q)
            | Instruction::MeasureZ(q)
            | Instruction::Depolarize1 { targets: q, .. }
            | Instruction::XError { targets: q, .. }
            | Instruction::MeasureFlip { targets: q, .. } => q.clone(),
            Instruction::Cnot(pairs) | Instruction::Depolarize2 { pairs, .. } => {
                pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorDef {
    /// Absolute measurement indices.
    pub records: Vec<usize>,
    pub meta: DetectorMeta,
}

/// A validated instruction list together with resolved detector and
/// observable record tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    num_measurements: usize,
    detectors: Vec<DetectorDef>,
    observables: Vec<Vec<usize>>,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Circuit(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl Circuit {
    /// Validates and indexes an instruction list. The qubit count is one past
    /// the largest index used, or `min_qubits` if that is larger.
    pub fn new(instructions: Vec<Instruction>, min_qubits: usize) -> Result<Self> {
        let mut num_qubits = min_qubits;
        let mut num_measurements = 0usize;
        let mut detectors = Vec::new();
        let mut observables: Vec<Vec<usize>> = Vec::new();
        let resolve = |lookback: &[usize], count: usize| -> Result<Vec<usize>> {
            lookback
                .iter()
                .map(|&k| {
                    if k == 0 || k > count {
                        Err(Error::Circuit(format!(
                            "rec[-{k}] does not refer to an earlier measurement ({count} so far)"
                        )))
                    } else {
                        Ok(count - k)
                    }
                })
                .collect()
        };
        for inst in &instructions {
            if let Some(&m) = inst.qubits().iter().max() {
                num_qubits = num_qubits.max(m + 1);
            }
            match inst {
                Instruction::Cnot(pairs) | Instruction::Depolarize2 { pairs, .. } => {
                    if let Some(&(a, _)) = pairs.iter().find(|(a, b)| a == b) {
                        return Err(Error::InvalidGate(format!(
                            "two-qubit operation on qubit {a} with itself"
                        )));
                    }
                    if let Instruction::Depolarize2 { p, .. } = inst {
                        check_probability(*p)?;
                    }
                }
                Instruction::Depolarize1 { p, .. }
                | Instruction::XError { p, .. }
                | Instruction::MeasureFlip { p, .. } => check_probability(*p)?,
                Instruction::MeasureZ(q) => num_measurements += q.len(),
                Instruction::Detector { lookback, meta } => detectors.push(DetectorDef {
                    records: resolve(lookback, num_measurements)?,
                    meta: *meta,
                }),
                Instruction::Observable { id, lookback } => {
                    if observables.len() <= *id {
                        observables.resize(*id + 1, Vec::new());
                    }
                    let recs = resolve(lookback, num_measurements)?;
                    observables[*id].extend(recs);
                }
                Instruction::ResetZ(_) | Instruction::H(_) | Instruction::Tick => {}
            }
        }
        Ok(Self {
            num_qubits,
            instructions,
            num_measurements,
            detectors,
            observables,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn num_measurements(&self) -> usize {
        self.num_measurements
    }

    pub fn detectors(&self) -> &[DetectorDef] {
        &self.detectors
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    /// Absolute measurement indices of each observable.
    pub fn observables(&self) -> &[Vec<usize>] {
        &self.observables
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    /// Number of independent noise locations (one per target or pair).
    pub fn num_noise_sites(&self) -> usize {
        self.instructions
            .iter()
            .map(|inst| match inst {
                Instruction::Depolarize1 { targets, .. }
                | Instruction::XError { targets, .. }
                | Instruction::MeasureFlip { targets, .. } => targets.len(),
                Instruction::Depolarize2 { pairs, .. } => pairs.len(),
                _ => 0,
            })
            .sum()
    }

    /// Same circuit with every noise channel removed.
    pub fn without_noise(&self) -> Circuit {
        let instructions = self
            .instructions
            .iter()
            .filter(|inst| {
                !matches!(
                    inst,
                    Instruction::Depolarize1 { .. }
                        | Instruction::Depolarize2 { .. }
                        | Instruction::XError { .. }
                        | Instruction::MeasureFlip { .. }
                )
            })
            .cloned()
            .collect();
        Circuit::new(instructions, self.num_qubits).expect("removing noise keeps validity")
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        text::format_circuit(self)
    }

    /// Fails unless every detector and observable has a fixed value in the
    /// absence of noise.
    pub fn check_deterministic(&self) -> Result<()> {
        validate::check_deterministic(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> DetectorMeta {
        DetectorMeta {
            patch: 0,
            round: 0,
            basis: Basis::Z,
            check: 0,
        }
    }

    #[test]
    fn resolves_records() {
        let c = Circuit::new(
            vec![
                Instruction::MeasureZ(vec![0, 1, 2]),
                Instruction::Detector {
                    lookback: vec![1, 3],
                    meta: meta(),
                },
                Instruction::Observable {
                    id: 1,
                    lookback: vec![2],
                },
            ],
            0,
        )
        .unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.detectors()[0].records, vec![2, 0]);
        assert_eq!(c.observables(), &[vec![], vec![1]]);
    }

    #[test]
    fn rejects_bad_lookback_and_probability() {
        let bad = Circuit::new(
            vec![
                Instruction::MeasureZ(vec![0]),
                Instruction::Detector {
                    lookback: vec![2],
                    meta: meta(),
                },
            ],
            0,
        );
        assert!(matches!(bad, Err(Error::Circuit(_))));
        let bad = Circuit::new(
            vec![Instruction::XError {
                p: 1.5,
                targets: vec![0],
            }],
            0,
        );
        assert!(bad.is_err());
        let bad = Circuit::new(vec![Instruction::Cnot(vec![(2, 2)])], 0);
        assert!(matches!(bad, Err(Error::InvalidGate(_))));
    }
}
