//! Qubit layouts of a single logical patch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pauli basis of a stabilizer check, preparation or readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" | "z" => Ok(Basis::Z),
            "X" | "x" => Ok(Basis::X),
            other => Err(Error::Parameter(format!("unknown basis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFamily {
    Repetition,
    RotatedSurface,
}

impl std::str::FromStr for CodeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "repetition" | "rep" => Ok(CodeFamily::Repetition),
            "rotated_surface" | "rotated-surface" | "surface" => Ok(CodeFamily::RotatedSurface),
            other => Err(Error::Parameter(format!("unknown code family '{other}'"))),
        }
    }
}

/// One stabilizer measured by a dedicated ancilla.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    /// Patch-local ancilla qubit index.
    pub ancilla: usize,
    /// Data qubit touched at each CNOT step of the extraction circuit.
    pub schedule: Vec<Option<usize>>,
    /// Sorted data-qubit support.
    pub support: Vec<usize>,
}

/// Geometry of one code patch. Data qubits are numbered first, then Z-check
/// ancillas, then X-check ancillas.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchLayout {
    pub family: CodeFamily,
    pub distance: usize,
    pub num_data: usize,
    /// `(row, col)` of each data qubit.
    pub data_coords: Vec<(usize, usize)>,
    pub z_checks: Vec<Check>,
    pub x_checks: Vec<Check>,
    pub logical_z: Vec<usize>,
    pub logical_x: Vec<usize>,
    /// Number of CNOT steps per extraction round.
    pub cnot_steps: usize,
}

fn check_distance(d: usize) -> Result<()> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::Parameter(format!(
            "distance must be an odd integer >= 3, got {d}"
        )));
    }
    Ok(())
}

impl PatchLayout {
    pub fn new(family: CodeFamily, distance: usize) -> Result<Self> {
        match family {
            CodeFamily::Repetition => Self::repetition(distance),
            CodeFamily::RotatedSurface => Self::rotated_surface(distance),
        }
    }

    /// Bit-flip repetition code: checks `Z_j Z_{j+1}`, `Z_L = Z_0`, `X_L = X^{⊗d}`.
    pub fn repetition(d: usize) -> Result<Self> {
        check_distance(d)?;
        let z_checks = (0..d - 1)
            .map(|a| Check {
                ancilla: d + a,
                schedule: vec![Some(a), Some(a + 1)],
                support: vec![a, a + 1],
            })
            .collect();
        Ok(Self {
            family: CodeFamily::Repetition,
            distance: d,
            num_data: d,
            data_coords: (0..d).map(|c| (0, c)).collect(),
            z_checks,
            x_checks: Vec::new(),
            logical_z: vec![0],
            logical_x: (0..d).collect(),
            cnot_steps: 2,
        })
    }

    /// Rotated surface code with X-type boundary plaquettes on the top and
    /// bottom edges and Z-type ones on the left and right edges.
    ///
    /// Plaquette `(r, c)` has top-left data corner `(r, c)`; it is X-type when
    /// `r + c` is even. X checks visit NW, NE, SW, SE and Z checks visit
    /// NW, SW, NE, SE so that hook errors run perpendicular to the logical
    /// they could shorten.
    pub fn rotated_surface(d: usize) -> Result<Self> {
        check_distance(d)?;
        let di = d as i64;
        let data_index = |r: i64, c: i64| -> Option<usize> {
            (r >= 0 && r < di && c >= 0 && c < di).then(|| (r * di + c) as usize)
        };
        let mut z_plaquettes = Vec::new();
        let mut x_plaquettes = Vec::new();
        for r in -1..di {
            for c in -1..di {
                let is_x = (r + c).rem_euclid(2) == 0;
                let bulk = (0..di - 1).contains(&r) && (0..di - 1).contains(&c);
                let top_bottom = (r == -1 || r == di - 1) && (0..di - 1).contains(&c);
                let left_right = (c == -1 || c == di - 1) && (0..di - 1).contains(&r);
                let keep = bulk || (top_bottom && is_x) || (left_right && !is_x);
                if !keep {
                    continue;
                }
                let nw = data_index(r, c);
                let ne = data_index(r, c + 1);
                let sw = data_index(r + 1, c);
                let se = data_index(r + 1, c + 1);
                if is_x {
                    x_plaquettes.push(vec![nw, ne, sw, se]);
                } else {
                    z_plaquettes.push(vec![nw, sw, ne, se]);
                }
            }
        }
        let num_data = d * d;
        let make = |plaquettes: Vec<Vec<Option<usize>>>, first_ancilla: usize| -> Vec<Check> {
            plaquettes
                .into_iter()
                .enumerate()
                .map(|(i, schedule)| {
                    let mut support: Vec<usize> = schedule.iter().flatten().copied().collect();
                    support.sort_unstable();
                    Check {
                        ancilla: first_ancilla + i,
                        schedule,
                        support,
                    }
                })
                .collect()
        };
        let nz = z_plaquettes.len();
        let z_checks = make(z_plaquettes, num_data);
        let x_checks = make(x_plaquettes, num_data + nz);
        Ok(Self {
            family: CodeFamily::RotatedSurface,
            distance: d,
            num_data,
            data_coords: (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).collect(),
            z_checks,
            x_checks,
            logical_z: (0..d).collect(),
            logical_x: (0..d).map(|r| r * d).collect(),
            cnot_steps: 4,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_data + self.z_checks.len() + self.x_checks.len()
    }

    pub fn num_ancillas(&self) -> usize {
        self.z_checks.len() + self.x_checks.len()
    }

    /// Checks of the given Pauli type.
    pub fn checks(&self, basis: Basis) -> &[Check] {
        match basis {
            Basis::Z => &self.z_checks,
            Basis::X => &self.x_checks,
        }
    }

    /// Support of the logical operator read out in `basis`.
    pub fn logical(&self, basis: Basis) -> &[usize] {
        match basis {
            Basis::Z => &self.logical_z,
            Basis::X => &self.logical_x,
        }
    }

    /// For each data qubit, the indices of the `basis` checks containing it.
    pub fn qubit_checks(&self, basis: Basis) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_data];
        for (i, check) in self.checks(basis).iter().enumerate() {
            for &q in &check.support {
                out[q].push(i);
            }
        }
        out
    }

    /// Every X/Z pair of stabilizers, and each logical against the opposite
    /// checks, must overlap on an even number of qubits; the two logicals
    /// must overlap oddly.
    pub fn check_commutation(&self) -> Result<()> {
        let overlap = |a: &[usize], b: &[usize]| a.iter().filter(|q| b.contains(q)).count();
        for (i, z) in self.z_checks.iter().enumerate() {
            for (j, x) in self.x_checks.iter().enumerate() {
                if overlap(&z.support, &x.support) % 2 != 0 {
                    return Err(Error::Circuit(format!(
                        "Z check {i} and X check {j} anticommute"
                    )));
                }
            }
            if overlap(&z.support, &self.logical_x) % 2 != 0 {
                return Err(Error::Circuit(format!("Z check {i} anticommutes with X_L")));
            }
        }
        for (j, x) in self.x_checks.iter().enumerate() {
            if overlap(&x.support, &self.logical_z) % 2 != 0 {
                return Err(Error::Circuit(format!("X check {j} anticommutes with Z_L")));
            }
        }
        if overlap(&self.logical_x, &self.logical_z) % 2 != 1 {
            return Err(Error::Circuit("logical operators commute".into()));
        }
        Ok(())
    }

    /// Data qubits used by each CNOT step must be distinct.
    pub fn check_schedule(&self) -> Result<()> {
        for step in 0..self.cnot_steps {
            let mut used = vec![false; self.num_data];
            for check in self.z_checks.iter().chain(&self.x_checks) {
                if let Some(Some(q)) = check.schedule.get(step) {
                    if std::mem::replace(&mut used[*q], true) {
                        return Err(Error::Circuit(format!(
                            "data qubit {q} used twice in CNOT step {step}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
