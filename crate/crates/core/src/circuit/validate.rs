//! Noiseless determinism check by backward Heisenberg propagation.
//!
//! Each detector (or observable) is a product of measured `Z`s. Walking the
//! circuit in reverse, the operator picks up `Z_q` at every included
//! measurement and is conjugated through gates. It is deterministic iff it
//! never reaches a measurement or reset it anticommutes with and carries no
//! `X` component at the start (all qubits begin in `|0>`). Up to 64
//! operators are propagated at once, one per bit lane.

use super::{Circuit, Instruction};
use crate::error::{Error, Result};

pub(crate) fn check_deterministic(circuit: &Circuit) -> Result<()> {
    let mut targets: Vec<(String, &[usize])> = circuit
        .detectors()
        .iter()
        .enumerate()
        .map(|(i, d)| (format!("detector {i}"), d.records.as_slice()))
        .collect();
    for (i, o) in circuit.observables().iter().enumerate() {
        targets.push((format!("observable {i}"), o.as_slice()));
    }
    for chunk in targets.chunks(64) {
        check_chunk(circuit, chunk)?;
    }
    Ok(())
}

fn check_chunk(circuit: &Circuit, chunk: &[(String, &[usize])]) -> Result<()> {
    let n = circuit.num_qubits();
    let mut included = vec![0u64; circuit.num_measurements()];
    for (lane, (_, records)) in chunk.iter().enumerate() {
        for &r in records.iter() {
            included[r] ^= 1 << lane;
        }
    }
    let mut x = vec![0u64; n];
    let mut z = vec![0u64; n];
    let mut bad = 0u64;
    let mut m = circuit.num_measurements();
    for inst in circuit.instructions().iter().rev() {
        match inst {
            Instruction::MeasureZ(qs) => {
                for &q in qs.iter().rev() {
                    m -= 1;
                    bad |= x[q];
                    z[q] ^= included[m];
                }
            }
            Instruction::ResetZ(qs) => {
                for &q in qs {
                    bad |= x[q];
                    z[q] = 0;
                }
            }
            Instruction::H(qs) => {
                for &q in qs {
                    std::mem::swap(&mut x[q], &mut z[q]);
                }
            }
            Instruction::Cnot(pairs) => {
                for &(c, t) in pairs.iter().rev() {
                    x[t] ^= x[c];
                    z[c] ^= z[t];
                }
            }
            _ => {}
        }
    }
    for q in 0..n {
        bad |= x[q];
    }
    if bad != 0 {
        let lane = bad.trailing_zeros() as usize;
        return Err(Error::Circuit(format!(
            "{} is not deterministic without noise",
            chunk[lane].0
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{Basis, DetectorMeta};
    use super::*;

    fn det(lookback: Vec<usize>) -> Instruction {
        Instruction::Detector {
            lookback,
            meta: DetectorMeta {
                patch: 0,
                round: 0,
                basis: Basis::Z,
                check: 0,
            },
        }
    }

    #[test]
    fn bell_parity_is_deterministic() {
        let c = Circuit::new(
            vec![
                Instruction::ResetZ(vec![0, 1]),
                Instruction::H(vec![0]),
                Instruction::Cnot(vec![(0, 1)]),
                Instruction::MeasureZ(vec![0, 1]),
                det(vec![1, 2]),
            ],
            0,
        )
        .unwrap();
        c.check_deterministic().unwrap();
    }

    #[test]
    fn random_outcome_is_rejected() {
        let c = Circuit::new(
            vec![
                Instruction::ResetZ(vec![0, 1]),
                Instruction::H(vec![0]),
                Instruction::Cnot(vec![(0, 1)]),
                Instruction::MeasureZ(vec![0, 1]),
                det(vec![1]),
            ],
            0,
        )
        .unwrap();
        assert!(c.check_deterministic().is_err());
    }

    #[test]
    fn measurement_collapse_is_respected() {
        // Measure |+>, then re-measure: the second outcome equals the first.
        let c = Circuit::new(
            vec![
                Instruction::ResetZ(vec![0]),
                Instruction::H(vec![0]),
                Instruction::MeasureZ(vec![0]),
                Instruction::MeasureZ(vec![0]),
                det(vec![1, 2]),
            ],
            0,
        )
        .unwrap();
        c.check_deterministic().unwrap();
    }
}
