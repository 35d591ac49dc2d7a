//! Monte Carlo logical-error-rate experiments.

use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, CodeFamily, LogicalCircuitSpec, NoiseModel};
use crate::error::{Error, Result};
use crate::iterative::{IterativeConfig, IterativeDecoder, Termination};
use crate::sampler::FrameSampler;

/// Column order of the results table.
pub const CSV_HEADER: &str =
    "experiment,d,p,n_r,num_cnots,shots,failures,ler,ci_low,ci_high,mean_iterations,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// One patch idling for `n_r` rounds.
    Memory,
    /// Two patches with `num_cnots` CNOTs of alternating direction.
    CnotChain,
    /// Eight patches, three CNOT layers.
    YFactory,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Memory => "memory",
            ExperimentKind::CnotChain => "cnot_chain",
            ExperimentKind::YFactory => "y_factory",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "memory" => Ok(ExperimentKind::Memory),
            "cnot_chain" => Ok(ExperimentKind::CnotChain),
            "y_factory" => Ok(ExperimentKind::YFactory),
            other => Err(Error::Parameter(format!("unknown experiment '{other}'"))),
        }
    }
}

/// CNOT layers of the eight-patch factory circuit.
pub fn y_factory_layers() -> Vec<Vec<(usize, usize)>> {
    vec![
        vec![(1, 5), (2, 6)],
        vec![(0, 2), (4, 6), (1, 3), (5, 7)],
        vec![(0, 1), (2, 3), (4, 5), (6, 7)],
    ]
}

/// Alternating directions `0→1, 1→0, 0→1, ...`.
pub fn alternating_directions(m: usize) -> Vec<(usize, usize)> {
    (0..m).map(|i| if i % 2 == 0 { (0, 1) } else { (1, 0) }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub family: CodeFamily,
    pub noise: NoiseModel,
    pub basis: Basis,
    pub d: usize,
    pub p: f64,
    /// Memory: total rounds (default `d`). Otherwise: rounds between
    /// consecutive CNOT layers (default 1).
    pub n_r: Option<usize>,
    /// Number of CNOTs in a chain.
    pub num_cnots: usize,
    pub shots: u64,
    pub seed: u64,
    pub l_max: Option<usize>,
    pub termination: Termination,
    /// Run the idle circuit with the same patches and total rounds instead.
    pub baseline: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::CnotChain,
            family: CodeFamily::RotatedSurface,
            noise: NoiseModel::Sd6,
            basis: Basis::Z,
            d: 3,
            p: 1e-3,
            n_r: None,
            num_cnots: 1,
            shots: 10_000,
            seed: 0,
            l_max: None,
            termination: Termination::Either,
            baseline: false,
        }
    }
}

impl ExperimentConfig {
    pub fn n_r(&self) -> usize {
        self.n_r.unwrap_or(match self.experiment {
            ExperimentKind::Memory => self.d,
            _ => 1,
        })
    }

    pub fn label(&self) -> String {
        let mut s = self.experiment.name().to_string();
        if self.basis == Basis::X {
            s.push_str("-x");
        }
        if self.baseline {
            s.push_str("-baseline");
        }
        s
    }

    /// The logical circuit being simulated (before any baseline reduction).
    pub fn logical_spec(&self) -> Result<LogicalCircuitSpec> {
        if self.shots == 0 {
            return Err(Error::Parameter("shots must be positive".into()));
        }
        let n_r = self.n_r();
        if n_r == 0 {
            return Err(Error::Parameter("n_r must be at least 1".into()));
        }
        let spec = match self.experiment {
            ExperimentKind::Memory => LogicalCircuitSpec::memory(
                self.family,
                self.d,
                n_r,
                self.basis,
                self.noise,
                self.p,
            ),
            ExperimentKind::CnotChain => {
                if self.num_cnots == 0 {
                    return Err(Error::Parameter("a chain needs at least one CNOT".into()));
                }
                let m = self.num_cnots;
                let rounds = (0..=m).map(|i| if i == 0 || i == m { 1 } else { n_r }).collect();
                LogicalCircuitSpec::two_patch(
                    self.family,
                    self.d,
                    &alternating_directions(m),
                    rounds,
                    self.basis,
                    self.noise,
                    self.p,
                )
            }
            ExperimentKind::YFactory => LogicalCircuitSpec {
                family: self.family,
                distance: self.d,
                num_patches: 8,
                layers: y_factory_layers(),
                rounds: vec![self.d, n_r, n_r, self.d],
                basis: self.basis,
                noise: self.noise,
                p: self.p,
            },
        };
        spec.validate()?;
        spec.layout()?;
        Ok(spec)
    }

    /// The circuit actually run: the logical circuit, or its idle baseline.
    pub fn spec(&self) -> Result<LogicalCircuitSpec> {
        let spec = self.logical_spec()?;
        Ok(if self.baseline { spec.baseline() } else { spec })
    }
}

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let k = k as f64;
    let z2 = Z * Z;
    let denom = n + z2;
    let center = (k + z2 / 2.0) / denom;
    let half = Z * (k * (n - k) / n + z2 / 4.0).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub d: usize,
    pub p: f64,
    pub n_r: usize,
    pub num_cnots: usize,
    pub shots: u64,
    pub failures: u64,
    pub ler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_iterations: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub non_converged: u64,
}

impl ExperimentResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.8e},{:.8e},{:.8e},{:.6},{}",
            self.experiment,
            self.d,
            self.p,
            self.n_r,
            self.num_cnots,
            self.shots,
            self.failures,
            self.ler,
            self.ci_low,
            self.ci_high,
            self.mean_iterations,
            self.seed
        )
    }
}

pub fn to_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in results {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

pub fn to_json(results: &[ExperimentResult]) -> Result<String> {
    serde_json::to_string_pretty(results).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Default, Clone, Copy)]
struct Tally {
    failures: u64,
    iterations: u64,
    max_iterations: usize,
    non_converged: u64,
}

/// Runs one experiment on the current rayon pool. Shot `i` always uses the
/// random stream `(seed, i)`, so the result does not depend on the pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let spec = config.spec()?;
    let lc = spec.build()?;
    let sampler = FrameSampler::new(&lc.circuit)?;
    let decoder = IterativeDecoder::new(
        &spec,
        IterativeConfig {
            l_max: config.l_max,
            termination: config.termination,
        },
    )?;
    const CHUNK: u64 = 256;
    let chunks = config.shots.div_ceil(CHUNK);
    let tallies: Vec<Result<Tally>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for shot in c * CHUNK..((c + 1) * CHUNK).min(config.shots) {
                let s = sampler.sample_shot(config.seed, shot);
                let out = decoder.decode_shot(&lc, &s)?;
                if out.predicted_observables != s.observables {
                    t.failures += 1;
                }
                t.iterations += out.iterations as u64;
                t.max_iterations = t.max_iterations.max(out.iterations);
                t.non_converged += (!out.converged) as u64;
            }
            Ok(t)
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        let t = t?;
        total.failures += t.failures;
        total.iterations += t.iterations;
        total.max_iterations = total.max_iterations.max(t.max_iterations);
        total.non_converged += t.non_converged;
    }
    let (ci_low, ci_high) = wilson_interval(total.failures, config.shots);
    log::info!(
        "{} d={} p={} n_r={}: {}/{} failures",
        config.label(),
        config.d,
        config.p,
        config.n_r(),
        total.failures,
        config.shots
    );
    Ok(ExperimentResult {
        experiment: config.label(),
        d: config.d,
        p: config.p,
        n_r: config.n_r(),
        num_cnots: spec.num_cnots(),
        shots: config.shots,
        failures: total.failures,
        ler: total.failures as f64 / config.shots as f64,
        ci_low,
        ci_high,
        mean_iterations: total.iterations as f64 / config.shots as f64,
        seed: config.seed,
        max_iterations: total.max_iterations,
        non_converged: total.non_converged,
    })
}

/// Runs `config` on a dedicated pool of `workers` threads.
pub fn run_with_workers(config: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_experiment(config))
}

/// A grid of experiments sharing every setting except `d`, `p` and `n_r`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub base: ExperimentConfig,
    pub distances: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub rounds: Vec<usize>,
    /// Also run each point's baseline.
    pub with_baseline: bool,
}

impl SweepConfig {
    /// Grid points in `d`, then `p`, then `n_r` order.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let ds = if self.distances.is_empty() {
            vec![self.base.d]
        } else {
            self.distances.clone()
        };
        let ps = if self.probabilities.is_empty() {
            vec![self.base.p]
        } else {
            self.probabilities.clone()
        };
        let rs: Vec<Option<usize>> = if self.rounds.is_empty() {
            vec![self.base.n_r]
        } else {
            self.rounds.iter().map(|&r| Some(r)).collect()
        };
        let mut out = Vec::new();
        for &d in &ds {
            for &p in &ps {
                for &n_r in &rs {
                    let c = ExperimentConfig {
                        d,
                        p,
                        n_r,
                        ..self.base.clone()
                    };
                    if self.with_baseline && !c.baseline {
                        out.push(ExperimentConfig {
                            baseline: true,
                            ..c.clone()
                        });
                    }
                    out.push(c);
                }
            }
        }
        out
    }
}
