//! Erasure-collection training: a self-inverse no-loss QAE is trained
//! first, its decoder is frozen and reused by one separately trained
//! encoder per correctable erasure pattern.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::{
    cardinal_logical_states, logical_state, perfect_recovery, sample_bloch_uniform, StabilizerCode,
};
use crate::dqnn::{
    Architecture, CollectionMember, KrausChannel, NetworkParams, QaeCollection, Transition,
};
use crate::error::{Error, Result};
use crate::experiments::presets::{reference_cost, train_denoising_qae, QaeSettings};
use crate::experiments::validation::{validate_collection, NoiseSpec, ValidationReport};
use crate::linalg::{haar_random_unitary, DensityMatrix};
use crate::noise::{depolarizing_single, erase};
use crate::training::{train, TrainOutcome, TrainTask, TrainingConfig, TrainingPair};

/// Hyperparameters of an erasure-collection run.
#[derive(Debug, Clone)]
pub struct ErasureConfig {
    /// Erasure patterns up to this many losses get their own member.
    pub correctable_losses: usize,
    pub copies_per_state: usize,
    pub epsilon: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub seed: u64,
    /// Re-training attempts per member (and for the no-loss phase).
    pub member_attempts: usize,
    /// Pure-erasure probe fidelity a member must reach before acceptance.
    pub member_probe_target: f64,
    pub validation_samples: usize,
}

impl ErasureConfig {
    /// Published settings: learning rate 0.1, 200 epochs, minibatch 3,
    /// 50 copies of each cardinal state.
    pub fn for_code(code: &StabilizerCode, seed: u64) -> Result<Self> {
        let correctable_losses = match code.name.as_str() {
            "4qec" => 1,
            "5qc" => 2,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no erasure-collection defaults for code '{other}'"
                )))
            }
        };
        Ok(Self {
            correctable_losses,
            copies_per_state: 50,
            epsilon: 0.1,
            epochs: 200,
            minibatch_size: 3,
            seed,
            member_attempts: 4,
            member_probe_target: 0.995,
            validation_samples: 10_000,
        })
    }
}

/// Trained collection with its training statistics and validation report.
#[derive(Debug, Clone)]
pub struct CollectionOutcome {
    pub collection: QaeCollection,
    pub no_loss: TrainOutcome,
    pub member_costs: BTreeMap<Vec<usize>, f64>,
    /// Pure-erasure probe fidelity each member reached.
    pub member_probes: BTreeMap<Vec<usize>, f64>,
    pub report: ValidationReport,
}

fn loss_patterns(n: usize, max_losses: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for count in 1..=max_losses {
        let mut combo: Vec<usize> = (0..count).collect();
        loop {
            out.push(combo.clone());
            let mut advanced = false;
            for slot in (0..count).rev() {
                if combo[slot] < n - (count - slot) {
                    combo[slot] += 1;
                    for later in slot + 1..count {
                        combo[later] = combo[later - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    out
}

/// Mean fidelity of a member on noiseless erased codespace states.
fn member_probe(
    channel: &KrausChannel,
    code: &StabilizerCode,
    lost: &[usize],
    seed: u64,
) -> Result<f64> {
    let mut states = cardinal_logical_states(code);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..6 {
        states.push(logical_state(code, sample_bloch_uniform(&mut rng)));
    }
    let mut acc = 0.0;
    for psi in &states {
        let input = erase(&psi.to_density(), lost)?;
        acc += channel.apply(&input)?.expectation_pure(psi);
    }
    Ok(acc / states.len() as f64)
}

/// Trains the full collection: self-inverse no-loss network first, then
/// one frozen-decoder encoder per loss pattern, each on its own group of
/// stochastically erased batch copies. Returns the collection together
/// with a sampled validation report.
pub fn erasure_collection(
    code: &StabilizerCode,
    p_loss: f64,
    p_comp: f64,
    config: &ErasureConfig,
) -> Result<CollectionOutcome> {
    let n = code.n;
    let all: Vec<usize> = (0..n).collect();
    let states = cardinal_logical_states(code);

    // Phase 1: no-loss self-inverse QAE on computational noise only.
    let settings = QaeSettings {
        code: code.clone(),
        architecture: Architecture::new(vec![n, 1, n], true)?,
        noise: NoiseSpec::Depolarizing { p: p_comp },
        batch_indices: (0..6).collect(),
        epsilon: config.epsilon,
        epochs: config.epochs,
        minibatch_size: config.minibatch_size,
    };
    let phase1_pairs: Vec<TrainingPair> = states
        .iter()
        .map(|s| {
            Ok(TrainingPair {
                input: depolarizing_single(&s.to_density(), p_comp, &all)?,
                target: s.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let code_ref = code.clone();
    let reference = move |rho: &DensityMatrix| perfect_recovery(&code_ref, rho);
    let threshold = reference_cost(&phase1_pairs, &[&reference])? + 0.02;
    let phase1_config = TrainingConfig::new(
        config.epsilon,
        config.epochs,
        config.minibatch_size,
        config.seed,
    )?
    .with_restarts(3, threshold);
    let probe_code = code.clone();
    let probe_target = config.member_probe_target;
    let no_loss_check = move |channel: &KrausChannel| -> Result<bool> {
        Ok(member_probe(channel, &probe_code, &[], 1)? >= probe_target)
    };
    let phase1 = train_denoising_qae(
        &settings,
        &phase1_config,
        Some(&no_loss_check),
        config.member_attempts,
    )?;
    let encoder0 = phase1.outcome.params.transitions[0].clone();
    let frozen_decoder = encoder0.mirrored();

    // Stochastic batch: per copy one sampled loss pattern, grouped.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for state_idx in 0..states.len() {
        for _ in 0..config.copies_per_state {
            let lost: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < p_loss).collect();
            if (1..=config.correctable_losses).contains(&lost.len()) {
                groups.entry(lost).or_default().push(state_idx);
            }
        }
    }

    // Phase 2: one member per correctable pattern, decoder frozen.
    let mut members = vec![CollectionMember {
        lost: vec![],
        params: NetworkParams::new(
            Architecture::new(vec![n, 1, n], false)?,
            vec![encoder0.clone(), frozen_decoder.clone()],
        )?,
    }];
    let mut member_costs = BTreeMap::new();
    let mut member_probes = BTreeMap::new();
    for (pattern_idx, pattern) in loss_patterns(n, config.correctable_losses)
        .into_iter()
        .enumerate()
    {
        let survivors = n - pattern.len();
        let mut group = groups.get(&pattern).cloned().unwrap_or_default();
        // A member whose sampled group misses one of the batch states would
        // leave that logical direction untrained; supplement with one copy
        // of each missing state.
        for i in 0..states.len() {
            if !group.contains(&i) {
                group.push(i);
            }
        }
        let surviving_positions: Vec<usize> = (0..survivors).collect();
        let pairs: Vec<TrainingPair> = group
            .iter()
            .map(|&i| {
                let erased = erase(&states[i].to_density(), &pattern)?;
                let input = depolarizing_single(&erased, p_comp, &surviving_positions)?;
                Ok(TrainingPair {
                    input,
                    target: states[i].clone(),
                })
            })
            .collect::<Result<_>>()?;

        let member_seed = config
            .seed
            .wrapping_add(1000)
            .wrapping_add(pattern_idx as u64 * 127);
        let mut best: Option<(NetworkParams, f64, f64)> = None;
        for attempt in 0..config.member_attempts {
            let mut member_rng =
                ChaCha8Rng::seed_from_u64(member_seed.wrapping_add(attempt as u64));
            let encoder = Transition::standard(
                survivors,
                1,
                vec![haar_random_unitary(survivors + 1, &mut member_rng)],
            )?;
            let params = NetworkParams::new(
                Architecture::new(vec![survivors, 1, n], false)?,
                vec![encoder, frozen_decoder.clone()],
            )?;
            let mut task = TrainTask::from_pairs(&params, pairs.clone());
            task.frozen.insert((1, 0));
            let member_config = TrainingConfig::new(
                config.epsilon,
                config.epochs,
                config.minibatch_size,
                member_seed.wrapping_add(attempt as u64 * 13),
            )?
            .with_restarts(0, 0.5);
            let outcome = train(&params, &task, &member_config)?;
            let channel = KrausChannel::from_params(&outcome.params)?;
            let probe = member_probe(&channel, code, &pattern, 2)?;
            let better = best.as_ref().map(|b| probe > b.2).unwrap_or(true);
            if better {
                best = Some((outcome.params.clone(), outcome.final_cost, probe));
            }
            if probe >= config.member_probe_target {
                break;
            }
        }
        let (params, final_cost, probe) = best.unwrap();
        member_costs.insert(pattern.clone(), final_cost);
        member_probes.insert(pattern.clone(), probe);
        members.push(CollectionMember {
            lost: pattern,
            params,
        });
    }

    let collection = QaeCollection {
        code_qubits: n,
        members,
    };
    let report = validate_collection(
        &collection,
        code,
        &NoiseSpec::ErasureDepolarizing { p_loss, p_comp },
        config.validation_samples,
        config.seed.wrapping_add(7),
    )?;
    Ok(CollectionOutcome {
        collection,
        no_loss: phase1.outcome,
        member_costs,
        member_probes,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_pattern_enumeration() {
        let singles = loss_patterns(4, 1);
        assert_eq!(singles.len(), 4);
        let up_to_two = loss_patterns(5, 2);
        assert_eq!(up_to_two.len(), 5 + 10);
        assert!(up_to_two.contains(&vec![1, 4]));
    }

    #[test]
    fn default_configs_follow_code_distance() {
        let four = ErasureConfig::for_code(&crate::codes::four_qubit_erasure_code(), 0).unwrap();
        assert_eq!(four.correctable_losses, 1);
        let five = ErasureConfig::for_code(&crate::codes::five_qubit_code(), 0).unwrap();
        assert_eq!(five.correctable_losses, 2);
        assert_eq!(five.copies_per_state, 50);
        assert!(ErasureConfig::for_code(&crate::codes::three_qubit_code(), 0).is_err());
    }
}
