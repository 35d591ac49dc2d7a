//! Shared fixtures for the benchmarks.

use tcnot::circuit::LogicalCircuit;
use tcnot::experiment::alternating_directions;
use tcnot::*;

/// Everything needed to decode shots of one circuit.
pub struct Fixture {
    pub spec: LogicalCircuitSpec,
    pub circuit: LogicalCircuit,
    pub sampler: FrameSampler,
    pub decoder: IterativeDecoder,
    pub shots: Vec<ShotResult>,
}

/// Surface-code SD6 chain of `m` alternating CNOTs with one round between
/// layers (`m = 0` gives a `d`-round memory), plus `shots` pre-sampled shots.
pub fn surface_chain(d: usize, p: f64, m: usize, shots: u64) -> Fixture {
    let spec = if m == 0 {
        LogicalCircuitSpec::memory(CodeFamily::RotatedSurface, d, d, Basis::Z, NoiseModel::Sd6, p)
    } else {
        LogicalCircuitSpec::two_patch(
            CodeFamily::RotatedSurface,
            d,
            &alternating_directions(m),
            vec![1; m + 1],
            Basis::Z,
            NoiseModel::Sd6,
            p,
        )
    };
    let circuit = spec.build().expect("valid spec");
    let sampler = FrameSampler::new(&circuit.circuit).expect("valid circuit");
    let decoder = IterativeDecoder::new(&spec, IterativeConfig::default()).expect("graph extraction");
    let shots = (0..shots).map(|s| sampler.sample_shot(1, s)).collect();
    Fixture {
        spec,
        circuit,
        sampler,
        decoder,
        shots,
    }
}

impl Fixture {
    /// Detection events of patch 0 for each pre-sampled shot.
    pub fn patch_events(&self) -> Vec<Vec<usize>> {
        self.shots
            .iter()
            .map(|s| {
                let syn = &self.decoder.split_syndromes(&self.circuit, s).expect("shape")[0];
                (0..syn.len()).filter(|&i| syn[i]).collect()
            })
            .collect()
    }
}
