//! Monte Carlo validation of trained QAEs: Bloch-uniform logical states,
//! explicitly sampled error patterns, and per-error-class fidelity reports.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{logical_state, sample_bloch_uniform, Pauli, PauliString, StabilizerCode};
use crate::dqnn::{KrausChannel, QaeCollection};
use crate::error::{Error, Result};
use crate::linalg::{insert_maximally_mixed, partial_trace, DensityMatrix};
use crate::noise::{
    bit_flip, correlated_bit_flip, correlated_flip_distribution, depolarizing_single,
};

/// Noise model used for training inputs (channel form) and validation
/// sampling (explicit error patterns).
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    BitFlip { p: f64 },
    Depolarizing { p: f64 },
    CorrelatedFlip { p: f64, eta: f64 },
    /// Per-qubit losses followed by depolarizing noise on the survivors.
    ErasureDepolarizing { p_loss: f64, p_comp: f64 },
}

/// One sampled error event: lost positions plus a Pauli error on the
/// original register (identity on lost positions).
#[derive(Debug, Clone)]
pub struct SampledError {
    pub lost: Vec<usize>,
    pub pauli: PauliString,
}

impl SampledError {
    pub fn class(&self) -> ErrorClass {
        ErrorClass {
            losses: self.lost.len() as u8,
            pauli_weight: self.pauli.weight() as u8,
        }
    }
}

impl NoiseSpec {
    /// Deterministic channel form (mixture over patterns). Erasures change
    /// the register and are routed per pattern, so they have no single
    /// channel form.
    pub fn apply_channel(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let all: Vec<usize> = (0..rho.num_qubits()).collect();
        match self {
            NoiseSpec::BitFlip { p } => bit_flip(rho, *p, &all),
            NoiseSpec::Depolarizing { p } => depolarizing_single(rho, *p, &all),
            NoiseSpec::CorrelatedFlip { p, eta } => {
                let dist = correlated_flip_distribution(*p, *eta)?;
                correlated_bit_flip(rho, &dist)
            }
            NoiseSpec::ErasureDepolarizing { .. } => Err(Error::InvalidArgument(
                "erasure noise has no fixed-register channel form".into(),
            )),
        }
    }

    /// Draws one explicit error pattern for an n-qubit register.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampledError> {
        match self {
            NoiseSpec::BitFlip { p } => {
                let mut ops = vec![Pauli::I; n];
                for op in ops.iter_mut() {
                    if rng.random::<f64>() < *p {
                        *op = Pauli::X;
                    }
                }
                Ok(SampledError {
                    lost: vec![],
                    pauli: PauliString(ops),
                })
            }
            NoiseSpec::Depolarizing { p } => {
                let mut ops = vec![Pauli::I; n];
                for op in ops.iter_mut() {
                    if rng.random::<f64>() < *p {
                        *op = match rng.random_range(0..3) {
                            0 => Pauli::X,
                            1 => Pauli::Y,
                            _ => Pauli::Z,
                        };
                    }
                }
                Ok(SampledError {
                    lost: vec![],
                    pauli: PauliString(ops),
                })
            }
            NoiseSpec::CorrelatedFlip { p, eta } => {
                if n != 3 {
                    return Err(Error::InvalidArgument(
                        "correlated flips are defined on 3 qubits".into(),
                    ));
                }
                let dist = correlated_flip_distribution(*p, *eta)?;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = 0u8;
                for (pattern, prob) in dist.patterns() {
                    acc += prob;
                    if u < acc {
                        chosen = pattern;
                        break;
                    }
                }
                let ops = (0..3)
                    .map(|q| {
                        if chosen & (1 << (2 - q)) != 0 {
                            Pauli::X
                        } else {
                            Pauli::I
                        }
                    })
                    .collect();
                Ok(SampledError {
                    lost: vec![],
                    pauli: PauliString(ops),
                })
            }
            NoiseSpec::ErasureDepolarizing { p_loss, p_comp } => {
                let lost: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < *p_loss).collect();
                let mut ops = vec![Pauli::I; n];
                for (q, op) in ops.iter_mut().enumerate() {
                    if !lost.contains(&q) && rng.random::<f64>() < *p_comp {
                        *op = match rng.random_range(0..3) {
                            0 => Pauli::X,
                            1 => Pauli::Y,
                            _ => Pauli::Z,
                        };
                    }
                }
                Ok(SampledError {
                    lost,
                    pauli: PauliString(ops),
                })
            }
        }
    }
}

/// Error class of a sample: number of erasures and Pauli weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ErrorClass {
    pub losses: u8,
    pub pauli_weight: u8,
}

impl ErrorClass {
    pub fn pauli_only(weight: u8) -> Self {
        Self {
            losses: 0,
            pauli_weight: weight,
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.losses, self.pauli_weight) {
            (0, 0) => write!(f, "no error"),
            (0, w) => write!(f, "{w} Pauli"),
            (l, 0) => write!(f, "{l} erasure"),
            (l, w) => write!(f, "{l} erasure + {w} Pauli"),
        }
    }
}

/// Accumulated fidelity statistics of one error class.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassStat {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ClassStat {
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let mean = self.mean();
        let var = (self.sum_sq / self.count as f64 - mean * mean).max(0.0);
        (var / self.count as f64).sqrt()
    }

    fn add(&mut self, f: f64) {
        self.count += 1;
        self.sum += f;
        self.sum_sq += f * f;
    }
}

/// Per-class and overall validation fidelities.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub noise: NoiseSpec,
    pub num_samples: usize,
    pub classes: BTreeMap<ErrorClass, ClassStat>,
}

impl ValidationReport {
    pub fn mean_fidelity(&self) -> f64 {
        let total: f64 = self.classes.values().map(|s| s.sum).sum();
        total / self.num_samples as f64
    }

    pub fn std_error(&self) -> f64 {
        let total: f64 = self.classes.values().map(|s| s.sum).sum();
        let total_sq: f64 = self.classes.values().map(|s| s.sum_sq).sum();
        let n = self.num_samples as f64;
        let mean = total / n;
        let var = (total_sq / n - mean * mean).max(0.0);
        (var / n).sqrt()
    }

    pub fn class_mean(&self, class: ErrorClass) -> Option<f64> {
        self.classes.get(&class).map(|s| s.mean())
    }

    /// The overall mean must equal the class-weighted combination exactly
    /// when the classes partition the sample.
    pub fn class_weighted_mean(&self) -> f64 {
        let weighted: f64 = self
            .classes
            .values()
            .map(|s| s.mean() * s.count as f64)
            .sum();
        weighted / self.num_samples as f64
    }
}

/// Validates a trained QAE channel on sampled logical states and error
/// patterns. Erasure-free noise specs only; erasure collections go through
/// [`validate_collection`].
pub fn validate_qae(
    channel: &KrausChannel,
    code: &StabilizerCode,
    noise: &NoiseSpec,
    n_samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if channel.n_in != code.n || channel.n_out != code.n {
        return Err(Error::DimensionMismatch(format!(
            "channel {}→{} does not match code on {} qubits",
            channel.n_in, channel.n_out, code.n
        )));
    }
    let samples: Vec<(ErrorClass, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let psi = logical_state(code, sample_bloch_uniform(&mut rng));
            let err = noise.sample(code.n, &mut rng)?;
            let corrupted = err.pauli.apply_pure(&psi);
            let f = channel.pure_fidelity(&corrupted, &psi);
            Ok((err.class(), f))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut classes: BTreeMap<ErrorClass, ClassStat> = BTreeMap::new();
    for (class, f) in samples {
        classes.entry(class).or_default().add(f);
    }
    Ok(ValidationReport {
        noise: noise.clone(),
        num_samples: n_samples,
        classes,
    })
}

/// Validates an erasure collection: each sample draws losses and Pauli
/// errors, is routed to the member matching its recorded loss positions,
/// and is scored against the noise-free logical state. Patterns without a
/// trained member are passed through the no-loss member after the lost
/// qubits are replaced by maximally mixed fresh ones.
pub fn validate_collection(
    collection: &QaeCollection,
    code: &StabilizerCode,
    noise: &NoiseSpec,
    n_samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let channels: BTreeMap<Vec<usize>, KrausChannel> = collection
        .members
        .iter()
        .map(|m| Ok((m.lost.clone(), KrausChannel::from_params(&m.params)?)))
        .collect::<Result<_>>()?;
    let fallback = channels
        .get(&vec![])
        .ok_or_else(|| Error::InvalidArgument("collection lacks a no-loss member".into()))?;
    let samples: Vec<(ErrorClass, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let psi = logical_state(code, sample_bloch_uniform(&mut rng));
            let err = noise.sample(code.n, &mut rng)?;
            let corrupted = err.pauli.apply_pure(&psi).to_density();
            let reduced = partial_trace(&corrupted, &err.lost)?;
            let out = match channels.get(&err.lost) {
                Some(member) => member.apply(&reduced)?,
                None => {
                    // Replace each lost qubit with a maximally mixed fresh
                    // one and run the no-loss member.
                    let refilled = insert_maximally_mixed(&reduced, &err.lost)?;
                    fallback.apply(&refilled)?
                }
            };
            let f = out.expectation_pure(&psi);
            Ok((err.class(), f))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut classes: BTreeMap<ErrorClass, ClassStat> = BTreeMap::new();
    for (class, f) in samples {
        classes.entry(class).or_default().add(f);
    }
    Ok(ValidationReport {
        noise: noise.clone(),
        num_samples: n_samples,
        classes,
    })
}

/// Mean fidelity of a channel over all listed error patterns applied to a
/// deterministic sweep of Bloch-sampled logical states. Used for the
/// "perfect class" checks that gate re-training.
pub fn pattern_class_fidelity(
    channel: &KrausChannel,
    code: &StabilizerCode,
    patterns: &[PauliString],
    states_per_pattern: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    let mut count = 0usize;
    for pattern in patterns {
        for _ in 0..states_per_pattern {
            let psi = logical_state(code, sample_bloch_uniform(&mut rng));
            let corrupted = pattern.apply_pure(&psi);
            acc += channel.pure_fidelity(&corrupted, &psi);
            count += 1;
        }
    }
    acc / count as f64
}
