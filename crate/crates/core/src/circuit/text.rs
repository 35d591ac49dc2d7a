//! Line-oriented text format.
//!
//! ```text
//! RESET_Z 0 1 2
//! DEPOLARIZE2(0.001) 0 3 1 4
//! CNOT 0 3 1 4
//! MEASURE_FLIP(0.001) 3 4
//! MEASURE_Z 3 4
//! DETECTOR(0,0,Z,1) rec[-1]
//! OBSERVABLE(0) rec[-5]
//! TICK
//! ```
//!
//! Blank lines and text after `#` are ignored.

use std::fmt::Write;

use super::{Basis, Circuit, DetectorMeta, Instruction};
use crate::error::{Error, Result};

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn pairs(p: &[(usize, usize)]) -> String {
    join(p.iter().flat_map(|&(a, b)| [a, b]))
}

fn recs(lookback: &[usize]) -> String {
    join(lookback.iter().map(|k| format!("rec[-{k}]")))
}

fn line(name: &str, args: &str) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name} {args}")
    }
}

pub(crate) fn format_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    for inst in circuit.instructions() {
        let text = match inst {
            Instruction::ResetZ(q) => line("RESET_Z", &join(q)),
            Instruction::H(q) => line("H", &join(q)),
            Instruction::Cnot(p) => line("CNOT", &pairs(p)),
            Instruction::MeasureZ(q) => line("MEASURE_Z", &join(q)),
            Instruction::Depolarize1 { p, targets } => {
                line(&format!("DEPOLARIZE1({p:?})"), &join(targets))
            }
            Instruction::Depolarize2 { p, pairs: ps } => {
                line(&format!("DEPOLARIZE2({p:?})"), &pairs(ps))
            }
            Instruction::XError { p, targets } => line(&format!("X_ERROR({p:?})"), &join(targets)),
            Instruction::MeasureFlip { p, targets } => {
                line(&format!("MEASURE_FLIP({p:?})"), &join(targets))
            }
            Instruction::Detector { lookback, meta } => line(
                &format!(
                    "DETECTOR({},{},{},{})",
                    meta.patch, meta.round, meta.basis, meta.check
                ),
                &recs(lookback),
            ),
            Instruction::Observable { id, lookback } => {
                line(&format!("OBSERVABLE({id})"), &recs(lookback))
            }
            Instruction::Tick => "TICK".to_string(),
        };
        let _ = writeln!(out, "{text}");
    }
    out
}

/// Parses the text format. Lines must be well-formed; the resulting
/// circuit is validated like any other.
pub fn parse_circuit(input: &str) -> Result<Circuit> {
    let mut instructions = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let mut tokens = content.split_whitespace();
        let head = tokens.next().unwrap();
        let args: Vec<&str> = tokens.collect();
        let (name, param) = match head.find('(') {
            Some(open) => {
                if !head.ends_with(')') {
                    return Err(err(format!("unterminated argument list in '{head}'")));
                }
                (&head[..open], Some(&head[open + 1..head.len() - 1]))
            }
            None => (head, None),
        };
        let qubits = || -> Result<Vec<usize>> {
            args.iter()
                .map(|a| {
                    a.parse::<usize>()
                        .map_err(|_| err(format!("invalid qubit index '{a}'")))
                })
                .collect()
        };
        let qubit_pairs = || -> Result<Vec<(usize, usize)>> {
            let q = qubits()?;
            if q.len() % 2 != 0 {
                return Err(err(format!("{name} needs an even number of targets")));
            }
            Ok(q.chunks(2).map(|c| (c[0], c[1])).collect())
        };
        let lookback = || -> Result<Vec<usize>> {
            args.iter()
                .map(|a| {
                    a.strip_prefix("rec[-")
                        .and_then(|s| s.strip_suffix(']'))
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| err(format!("invalid record target '{a}'")))
                })
                .collect()
        };
        let prob = || -> Result<f64> {
            let text = param.ok_or_else(|| err(format!("{name} needs a probability")))?;
            text.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("invalid probability '{text}'")))
        };
        let no_param = || -> Result<()> {
            match param {
                Some(_) => Err(err(format!("{name} takes no argument"))),
                None => Ok(()),
            }
        };
        let inst = match name {
            "RESET_Z" => {
                no_param()?;
                Instruction::ResetZ(qubits()?)
            }
            "H" => {
                no_param()?;
                Instruction::H(qubits()?)
            }
            "CNOT" => {
                no_param()?;
                Instruction::Cnot(qubit_pairs()?)
            }
            "MEASURE_Z" => {
                no_param()?;
                Instruction::MeasureZ(qubits()?)
            }
            "TICK" => {
                no_param()?;
                if !args.is_empty() {
                    return Err(err("TICK takes no targets".into()));
                }
                Instruction::Tick
            }
            "DEPOLARIZE1" => Instruction::Depolarize1 {
                p: prob()?,
                targets: qubits()?,
            },
            "DEPOLARIZE2" => Instruction::Depolarize2 {
                p: prob()?,
                pairs: qubit_pairs()?,
            },
            "X_ERROR" => Instruction::XError {
                p: prob()?,
                targets: qubits()?,
            },
            "MEASURE_FLIP" => Instruction::MeasureFlip {
                p: prob()?,
                targets: qubits()?,
            },
            "DETECTOR" => {
                let fields: Vec<&str> = param
                    .ok_or_else(|| err("DETECTOR needs (patch,round,basis,check)".into()))?
                    .split(',')
                    .map(str::trim)
                    .collect();
                if fields.len() != 4 {
                    return Err(err("DETECTOR needs (patch,round,basis,check)".into()));
                }
                let num = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(format!("invalid detector field '{s}'")))
                };
                let basis: Basis = fields[2]
                    .parse()
                    .map_err(|_| err(format!("invalid basis '{}'", fields[2])))?;
                Instruction::Detector {
                    lookback: lookback()?,
                    meta: DetectorMeta {
                        patch: num(fields[0])?,
                        round: num(fields[1])?,
                        basis,
                        check: num(fields[3])?,
                    },
                }
            }
            "OBSERVABLE" => {
                let text = param.ok_or_else(|| err("OBSERVABLE needs an index".into()))?;
                let id = text
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| err(format!("invalid observable index '{text}'")))?;
                Instruction::Observable {
                    id,
                    lookback: lookback()?,
                }
            }
            other => return Err(err(format!("unknown instruction '{other}'"))),
        };
        instructions.push(inst);
    }
    Circuit::new(instructions, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{memory_circuit, NoiseModel, PatchLayout};
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let c = parse_circuit(
            "# header\n\nRESET_Z 0 1  # trailing\nX_ERROR(0.25) 1\nMEASURE_Z 0 1\nDETECTOR(0,0,Z,0) rec[-1] rec[-2]\n",
        )
        .unwrap();
        assert_eq!(c.instructions().len(), 4);
        assert_eq!(c.detectors()[0].records, vec![1, 0]);
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_circuit("TICK\nCNOT 0 1 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_circuit("FOO 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_circuit("X_ERROR(abc) 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    #[test]
    fn generated_circuits_round_trip() {
        for layout in [
            PatchLayout::repetition(3).unwrap(),
            PatchLayout::rotated_surface(3).unwrap(),
        ] {
            for noise in [NoiseModel::Sd6, NoiseModel::Phenomenological] {
                for basis in [Basis::Z, Basis::X] {
                    if layout.x_checks.is_empty() && basis == Basis::X {
                        continue;
                    }
                    let c = memory_circuit(&layout, 3, basis, noise, 0.001).unwrap();
                    let text = c.to_text();
                    let back = parse_circuit(&text).unwrap();
                    assert_eq!(back, c);
                    assert_eq!(back.to_text(), text);
                }
            }
        }
    }

    fn arb_instruction() -> impl Strategy<Value = Instruction> {
        let q = || proptest::collection::vec(0usize..20, 0..5);
        let pr = || proptest::collection::vec((0usize..10, 10usize..20), 0..4);
        let p = || prop_oneof![Just(0.0), Just(1.0), 0.0f64..1.0];
        prop_oneof![
            q().prop_map(Instruction::ResetZ),
            q().prop_map(Instruction::H),
            pr().prop_map(Instruction::Cnot),
            q().prop_map(Instruction::MeasureZ),
            (p(), q()).prop_map(|(p, targets)| Instruction::Depolarize1 { p, targets }),
            (p(), pr()).prop_map(|(p, pairs)| Instruction::Depolarize2 { p, pairs }),
            (p(), q()).prop_map(|(p, targets)| Instruction::XError { p, targets }),
            (p(), q()).prop_map(|(p, targets)| Instruction::MeasureFlip { p, targets }),
            Just(Instruction::Tick),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_arbitrary(insts in proptest::collection::vec(arb_instruction(), 0..30)) {
            let c = Circuit::new(insts, 0).unwrap();
            let text = c.to_text();
            let back = parse_circuit(&text).unwrap();
            prop_assert_eq!(back.to_text(), text);
            prop_assert_eq!(back.instructions(), c.instructions());
        }
    }
}
