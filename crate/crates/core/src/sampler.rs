//! Pauli-frame Monte Carlo sampling of detection events.
//!
//! Noise is drawn once per shot as a sparse list of [`Fault`]s from a
//! ChaCha8 stream keyed by `(seed, shot)`, so results do not depend on how
//! shots are split across threads. Two consumers of the fault list exist:
//! [`simulate_faults`] walks the circuit with an explicit frame, while
//! [`FrameSampler`] XORs precomputed per-fault effects.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Instruction};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Depolarize1,
    Depolarize2,
    XError,
    MeasureFlip,
}

/// One independent noise location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSite {
    /// Index of the owning instruction.
    pub instruction: usize,
    pub kind: SiteKind,
    pub p: f64,
    pub a: usize,
    /// Second qubit of a two-qubit channel, else equal to `a`.
    pub b: usize,
}

impl NoiseSite {
    /// Number of distinct non-trivial outcomes.
    pub fn num_outcomes(&self) -> u8 {
        match self.kind {
            SiteKind::Depolarize1 => 3,
            SiteKind::Depolarize2 => 15,
            SiteKind::XError | SiteKind::MeasureFlip => 1,
        }
    }

    /// Pauli on `(a, b)` for outcome `code` (1-based). Measurement flips
    /// report `(X, I)`.
    pub fn outcome(&self, code: u8) -> (Pauli, Pauli) {
        match self.kind {
            SiteKind::Depolarize1 => (Pauli::from_code(code), Pauli::I),
            SiteKind::Depolarize2 => (Pauli::from_code(code & 3), Pauli::from_code(code >> 2)),
            SiteKind::XError | SiteKind::MeasureFlip => (Pauli::X, Pauli::I),
        }
    }
}

/// A sampled non-trivial outcome at a noise site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fault {
    pub site: usize,
    /// Outcome index in `1..=num_outcomes`. For depolarizing channels it is
    /// the Pauli code `x | z << 1`, per qubit for two-qubit channels.
    pub code: u8,
}

pub fn noise_sites(circuit: &Circuit) -> Vec<NoiseSite> {
    let mut out = Vec::new();
    for (i, inst) in circuit.instructions().iter().enumerate() {
        let mut push = |kind, p, a, b| {
            out.push(NoiseSite {
                instruction: i,
                kind,
                p,
                a,
                b,
            })
        };
        match inst {
            Instruction::Depolarize1 { p, targets } => {
                targets.iter().for_each(|&q| push(SiteKind::Depolarize1, *p, q, q))
            }
            Instruction::XError { p, targets } => {
                targets.iter().for_each(|&q| push(SiteKind::XError, *p, q, q))
            }
            Instruction::MeasureFlip { p, targets } => {
                targets.iter().for_each(|&q| push(SiteKind::MeasureFlip, *p, q, q))
            }
            Instruction::Depolarize2 { p, pairs } => pairs
                .iter()
                .for_each(|&(a, b)| push(SiteKind::Depolarize2, *p, a, b)),
            _ => {}
        }
    }
    out
}

/// RNG for one shot.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Maximal runs of consecutive sites with equal probability.
fn probability_runs(sites: &[NoiseSite]) -> Vec<(usize, usize, f64)> {
    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, s) in sites.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == s.p && run.1 == i => run.1 = i + 1,
            _ => runs.push((i, i + 1, s.p)),
        }
    }
    runs
}

/// Draws the faults of one shot by geometric skipping within each run of
/// equal probability. Each outcome is uniform over the non-trivial ones.
pub fn draw_faults<R: Rng>(sites: &[NoiseSite], rng: &mut R) -> Vec<Fault> {
    draw_with_runs(sites, &probability_runs(sites), rng)
}

fn draw_with_runs<R: Rng>(
    sites: &[NoiseSite],
    runs: &[(usize, usize, f64)],
    rng: &mut R,
) -> Vec<Fault> {
    let mut faults = Vec::new();
    for &(start, end, p) in runs {
        if p <= 0.0 {
            continue;
        }
        let log_q = (1.0 - p).ln();
        let mut i = start;
        loop {
            if p < 1.0 {
                let u: f64 = 1.0 - rng.random::<f64>();
                let skip = (u.ln() / log_q).floor();
                if skip >= (end - i) as f64 {
                    break;
                }
                i += skip as usize;
            }
            if i >= end {
                break;
            }
            let n = sites[i].num_outcomes();
            let code = if n == 1 { 1 } else { rng.random_range(1..=n) };
            faults.push(Fault { site: i, code });
            i += 1;
        }
    }
    faults
}

/// Detection events and observable flips of one shot, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotResult {
    pub num_detectors: usize,
    pub detectors: Vec<u64>,
    /// Bit `k` is set when observable `k` flipped.
    pub observables: u64,
}

impl ShotResult {
    pub fn new(num_detectors: usize) -> Self {
        Self {
            num_detectors,
            detectors: vec![0; num_detectors.div_ceil(64)],
            observables: 0,
        }
    }

    pub fn detector(&self, i: usize) -> bool {
        self.detectors[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn toggle_detector(&mut self, i: usize) {
        self.detectors[i / 64] ^= 1 << (i % 64);
    }

    pub fn fired(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.detectors.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }
}

fn check_observable_count(circuit: &Circuit) -> Result<()> {
    if circuit.num_observables() > 64 {
        return Err(Error::Parameter(format!(
            "at most 64 observables are supported, got {}",
            circuit.num_observables()
        )));
    }
    Ok(())
}

/// Reference simulator: applies `faults` while walking the circuit with an
/// explicit Pauli frame. `faults` must be sorted by site.
pub fn simulate_faults(circuit: &Circuit, faults: &[Fault]) -> Result<ShotResult> {
    check_observable_count(circuit)?;
    let mut frame = PauliFrame::new(circuit.num_qubits());
    let mut pending_flip = vec![false; circuit.num_qubits()];
    let mut flips = Vec::with_capacity(circuit.num_measurements());
    let mut site = 0usize;
    let mut next = faults.iter().peekable();
    let mut hit = |site: usize| -> Option<u8> {
        match next.peek() {
            Some(f) if f.site == site => next.next().map(|f| f.code),
            _ => None,
        }
    };
    for inst in circuit.instructions() {
        match inst {
            Instruction::ResetZ(qs) => {
                for &q in qs {
                    frame.clear(q);
                    pending_flip[q] = false;
                }
            }
            Instruction::H(qs) => qs.iter().for_each(|&q| frame.apply_h(q)),
            Instruction::Cnot(pairs) => pairs.iter().for_each(|&(c, t)| frame.apply_cnot(c, t)),
            Instruction::MeasureZ(qs) => {
                for &q in qs {
                    flips.push(frame.x_bit(q) ^ std::mem::take(&mut pending_flip[q]));
                }
            }
            Instruction::Depolarize1 { targets, .. } | Instruction::XError { targets, .. } => {
                let is_x = matches!(inst, Instruction::XError { .. });
                for &q in targets {
                    if let Some(code) = hit(site) {
                        let pauli = if is_x { Pauli::X } else { Pauli::from_code(code) };
                        frame.apply(q, pauli)?;
                    }
                    site += 1;
                }
            }
            Instruction::Depolarize2 { pairs, .. } => {
                for &(a, b) in pairs {
                    if let Some(code) = hit(site) {
                        frame.apply(a, Pauli::from_code(code & 3))?;
                        frame.apply(b, Pauli::from_code(code >> 2))?;
                    }
                    site += 1;
                }
            }
            Instruction::MeasureFlip { targets, .. } => {
                for &q in targets {
                    if hit(site).is_some() {
                        pending_flip[q] ^= true;
                    }
                    site += 1;
                }
            }
            Instruction::Detector { .. } | Instruction::Observable { .. } | Instruction::Tick => {}
        }
    }
    let mut out = ShotResult::new(circuit.num_detectors());
    for (i, d) in circuit.detectors().iter().enumerate() {
        if d.records.iter().fold(false, |acc, &r| acc ^ flips[r]) {
            out.toggle_detector(i);
        }
    }
    for (k, o) in circuit.observables().iter().enumerate() {
        if o.iter().fold(false, |acc, &r| acc ^ flips[r]) {
            out.observables |= 1 << k;
        }
    }
    Ok(out)
}

/// Sparse effect of one basic Pauli component.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Effect {
    pub detectors: Vec<u32>,
    pub observables: u64,
}

impl Effect {
    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty() && self.observables == 0
    }
}

// Component slots per site.
const XA: usize = 0;
const ZA: usize = 1;
const XB: usize = 2;
const ZB: usize = 3;

/// Per-site effects of each basic component (`X_a`, `Z_a`, `X_b`, `Z_b`;
/// measurement flips use the `X_a` slot), found by forward propagation of
/// 64 injected Paulis at a time.
#[derive(Debug, Clone)]
pub struct FaultTable {
    effects: Vec<[Effect; 4]>,
}

impl FaultTable {
    pub fn new(circuit: &Circuit, sites: &[NoiseSite]) -> Result<Self> {
        check_observable_count(circuit)?;
        let mut lanes: Vec<(usize, usize)> = Vec::new();
        for (i, s) in sites.iter().enumerate() {
            match s.kind {
                SiteKind::Depolarize1 => lanes.extend([(i, XA), (i, ZA)]),
                SiteKind::Depolarize2 => lanes.extend([(i, XA), (i, ZA), (i, XB), (i, ZB)]),
                SiteKind::XError | SiteKind::MeasureFlip => lanes.push((i, XA)),
            }
        }
        let mut effects = vec![<[Effect; 4]>::default(); sites.len()];
        for chunk in lanes.chunks(64) {
            propagate_chunk(circuit, sites, chunk, &mut effects);
        }
        Ok(Self { effects })
    }

    pub fn effect(&self, site: usize, slot: usize) -> &Effect {
        &self.effects[site][slot]
    }

    /// XORs the effect of `fault` into `out`.
    pub fn apply(&self, sites: &[NoiseSite], fault: Fault, out: &mut ShotResult) {
        let e = &self.effects[fault.site];
        let mut slots = [false; 4];
        match sites[fault.site].kind {
            SiteKind::Depolarize1 => {
                slots[XA] = fault.code & 1 != 0;
                slots[ZA] = fault.code & 2 != 0;
            }
            SiteKind::Depolarize2 => {
                slots[XA] = fault.code & 1 != 0;
                slots[ZA] = fault.code & 2 != 0;
                slots[XB] = fault.code & 4 != 0;
                slots[ZB] = fault.code & 8 != 0;
            }
            SiteKind::XError | SiteKind::MeasureFlip => slots[XA] = true,
        }
        for (slot, on) in slots.into_iter().enumerate() {
            if on {
                for &d in &e[slot].detectors {
                    out.toggle_detector(d as usize);
                }
                out.observables ^= e[slot].observables;
            }
        }
    }
}

fn propagate_chunk(
    circuit: &Circuit,
    sites: &[NoiseSite],
    chunk: &[(usize, usize)],
    effects: &mut [[Effect; 4]],
) {
    let n = circuit.num_qubits();
    let mut x = vec![0u64; n];
    let mut z = vec![0u64; n];
    let mut pending = vec![0u64; n];
    let mut meas = vec![0u64; circuit.num_measurements()];
    let mut m = 0usize;
    // Injections grouped by site; sites within a chunk are contiguous.
    let first_site = chunk[0].0;
    let mut injections: Vec<Vec<(usize, u64)>> = vec![Vec::new(); chunk.last().unwrap().0 - first_site + 1];
    for (lane, &(site, slot)) in chunk.iter().enumerate() {
        injections[site - first_site].push((slot, 1u64 << lane));
    }
    let first_inst = sites[first_site].instruction;
    let mut site = 0usize;
    for (idx, inst) in circuit.instructions().iter().enumerate() {
        let active = idx >= first_inst;
        match inst {
            Instruction::ResetZ(qs) if active => {
                for &q in qs {
                    x[q] = 0;
                    z[q] = 0;
                    pending[q] = 0;
                }
            }
            Instruction::H(qs) if active => {
                for &q in qs {
                    std::mem::swap(&mut x[q], &mut z[q]);
                }
            }
            Instruction::Cnot(pairs) if active => {
                for &(c, t) in pairs {
                    x[t] ^= x[c];
                    z[c] ^= z[t];
                }
            }
            Instruction::MeasureZ(qs) => {
                for &q in qs {
                    if active {
                        meas[m] = x[q] ^ pending[q];
                        pending[q] = 0;
                    }
                    m += 1;
                }
            }
            Instruction::Depolarize1 { .. }
            | Instruction::XError { .. }
            | Instruction::MeasureFlip { .. }
            | Instruction::Depolarize2 { .. } => {
                let count = match inst {
                    Instruction::Depolarize2 { pairs, .. } => pairs.len(),
                    Instruction::Depolarize1 { targets, .. }
                    | Instruction::XError { targets, .. }
                    | Instruction::MeasureFlip { targets, .. } => targets.len(),
                    _ => unreachable!(),
                };
                if active {
                    for s in site..site + count {
                        let Some(list) = s.checked_sub(first_site).and_then(|i| injections.get(i))
                        else {
                            continue;
                        };
                        let ns = &sites[s];
                        for &(slot, bit) in list {
                            match (ns.kind, slot) {
                                (SiteKind::MeasureFlip, _) => pending[ns.a] ^= bit,
                                (_, XA) => x[ns.a] ^= bit,
                                (_, ZA) => z[ns.a] ^= bit,
                                (_, XB) => x[ns.b] ^= bit,
                                _ => z[ns.b] ^= bit,
                            }
                        }
                    }
                }
                site += count;
            }
            _ => {}
        }
    }
    let mut det_words: Vec<u64> = circuit
        .detectors()
        .iter()
        .map(|d| d.records.iter().fold(0, |acc, &r| acc ^ meas[r]))
        .collect();
    let obs_words: Vec<u64> = circuit
        .observables()
        .iter()
        .map(|o| o.iter().fold(0, |acc, &r| acc ^ meas[r]))
        .collect();
    for (lane, &(s, slot)) in chunk.iter().enumerate() {
        let bit = 1u64 << lane;
        let e = &mut effects[s][slot];
        for (d, w) in det_words.iter_mut().enumerate() {
            if *w & bit != 0 {
                e.detectors.push(d as u32);
            }
        }
        for (k, w) in obs_words.iter().enumerate() {
            if w & bit != 0 {
                e.observables |= 1 << k;
            }
        }
    }
}

/// Compiled sampler for one circuit.
#[derive(Debug, Clone)]
pub struct FrameSampler {
    num_detectors: usize,
    sites: Vec<NoiseSite>,
    runs: Vec<(usize, usize, f64)>,
    table: FaultTable,
}

impl FrameSampler {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let sites = noise_sites(circuit);
        let table = FaultTable::new(circuit, &sites)?;
        Ok(Self {
            num_detectors: circuit.num_detectors(),
            runs: probability_runs(&sites),
            sites,
            table,
        })
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn sites(&self) -> &[NoiseSite] {
        &self.sites
    }

    pub fn table(&self) -> &FaultTable {
        &self.table
    }

    pub fn draw(&self, seed: u64, shot: u64) -> Vec<Fault> {
        draw_with_runs(&self.sites, &self.runs, &mut shot_rng(seed, shot))
    }

    /// Result of an explicit fault list.
    pub fn evaluate(&self, faults: &[Fault]) -> ShotResult {
        let mut out = ShotResult::new(self.num_detectors);
        for &f in faults {
            self.table.apply(&self.sites, f, &mut out);
        }
        out
    }

    pub fn sample_shot(&self, seed: u64, shot: u64) -> ShotResult {
        self.evaluate(&self.draw(seed, shot))
    }

    /// Shots `0..shots`, computed in parallel on the current rayon pool.
    pub fn sample(&self, seed: u64, shots: u64) -> Vec<ShotResult> {
        (0..shots)
            .into_par_iter()
            .map(|s| self.sample_shot(seed, s))
            .collect()
    }
}

const MAGIC: &[u8; 8] = b"TCNOTDET";

/// Writes detection events as: magic, detector count and shot count (u64
/// LE), then each shot's bit-packed detector words (u64 LE, bit `i % 64`
/// of word `i / 64` is detector `i`).
pub fn write_detection_events<W: Write>(
    mut w: W,
    num_detectors: usize,
    shots: &[ShotResult],
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(num_detectors as u64).to_le_bytes())?;
    w.write_all(&(shots.len() as u64).to_le_bytes())?;
    for s in shots {
        if s.num_detectors != num_detectors {
            return Err(Error::Contract(format!(
                "shot has {} detectors, expected {num_detectors}",
                s.num_detectors
            )));
        }
        for word in &s.detectors {
            w.write_all(&word.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Inverse of [`write_detection_events`]; observables are not stored.
pub fn read_detection_events<R: Read>(mut r: R) -> Result<(usize, Vec<ShotResult>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Io("not a detection-event file".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let nd = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let shots = u64::from_le_bytes(buf) as usize;
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut s = ShotResult::new(nd);
        for word in s.detectors.iter_mut() {
            r.read_exact(&mut buf)?;
            *word = u64::from_le_bytes(buf);
        }
        out.push(s);
    }
    Ok((nd, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Basis, CodeFamily, LogicalCircuitSpec, NoiseModel};

    fn surface_circuit(p: f64) -> Circuit {
        LogicalCircuitSpec::two_patch(
            CodeFamily::RotatedSurface,
            3,
            &[(0, 1)],
            vec![2, 1],
            Basis::Z,
            NoiseModel::Sd6,
            p,
        )
        .build()
        .unwrap()
        .circuit
    }

    #[test]
    fn compiled_matches_reference_shot_for_shot() {
        let c = surface_circuit(0.02);
        let sampler = FrameSampler::new(&c).unwrap();
        let mut nontrivial = 0;
        for shot in 0..300 {
            let faults = sampler.draw(7, shot);
            let a = sampler.evaluate(&faults);
            let b = simulate_faults(&c, &faults).unwrap();
            assert_eq!(a, b, "shot {shot}");
            nontrivial += (!a.fired().is_empty()) as usize;
        }
        assert!(nontrivial > 100);
    }

    #[test]
    fn every_single_fault_matches_reference() {
        for basis in [Basis::Z, Basis::X] {
            let mut spec = LogicalCircuitSpec::two_patch(
                CodeFamily::RotatedSurface,
                3,
                &[(0, 1)],
                vec![1, 1],
                basis,
                NoiseModel::Sd6,
                0.01,
            );
            spec.basis = basis;
            let c = spec.build().unwrap().circuit;
            let sampler = FrameSampler::new(&c).unwrap();
            for (i, s) in sampler.sites().iter().enumerate() {
                for code in 1..=s.num_outcomes() {
                    let f = [Fault { site: i, code }];
                    assert_eq!(sampler.evaluate(&f), simulate_faults(&c, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn noiseless_circuit_never_fires() {
        let c = surface_circuit(0.0);
        let sampler = FrameSampler::new(&c).unwrap();
        for s in sampler.sample(1, 50) {
            assert!(s.fired().is_empty());
            assert_eq!(s.observables, 0);
        }
    }

    #[test]
    fn certain_noise_hits_every_site() {
        let c = Circuit::new(
            vec![
                Instruction::XError {
                    p: 1.0,
                    targets: vec![0, 1, 2],
                },
                Instruction::XError {
                    p: 0.0,
                    targets: vec![0, 1],
                },
            ],
            0,
        )
        .unwrap();
        let sites = noise_sites(&c);
        let f = draw_faults(&sites, &mut shot_rng(0, 0));
        assert_eq!(f.iter().map(|f| f.site).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn fault_rate_matches_probability() {
        let p = 0.01;
        let c = Circuit::new(
            vec![Instruction::Depolarize1 {
                p,
                targets: (0..1000).collect(),
            }],
            0,
        )
        .unwrap();
        let sites = noise_sites(&c);
        let mut total = 0usize;
        let mut codes = [0usize; 4];
        for shot in 0..200 {
            for f in draw_faults(&sites, &mut shot_rng(3, shot)) {
                total += 1;
                codes[f.code as usize] += 1;
            }
        }
        // mean 2000, sd ~ 44.5
        assert!((total as f64 - 2000.0).abs() < 5.0 * 44.5, "{total}");
        assert_eq!(codes[0], 0);
        for &c in &codes[1..] {
            assert!((c as f64 - total as f64 / 3.0).abs() < 150.0);
        }
    }

    #[test]
    fn sampling_is_reproducible_across_pools() {
        let c = surface_circuit(0.01);
        let sampler = FrameSampler::new(&c).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| sampler.sample(11, 200));
        let b = three.install(|| sampler.sample(11, 200));
        assert_eq!(a, b);
        assert_ne!(sampler.sample(12, 200), a);
    }

    #[test]
    fn binary_round_trip() {
        let c = surface_circuit(0.02);
        let sampler = FrameSampler::new(&c).unwrap();
        let shots: Vec<ShotResult> = sampler
            .sample(5, 20)
            .into_iter()
            .map(|mut s| {
                s.observables = 0;
                s
            })
            .collect();
        let mut buf = Vec::new();
        write_detection_events(&mut buf, c.num_detectors(), &shots).unwrap();
        assert_eq!(buf.len(), 24 + 20 * 8 * c.num_detectors().div_ceil(64));
        let (nd, back) = read_detection_events(buf.as_slice()).unwrap();
        assert_eq!(nd, c.num_detectors());
        assert_eq!(back, shots);
    }
}
