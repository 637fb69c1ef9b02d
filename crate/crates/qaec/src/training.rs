//! Supervised training of DQNNs: cost evaluation, forward/backpropagated
//! update matrices (standard and self-inverse), Nadam optimization,
//! minibatching, epochs, restarts and slot freezing.
//!
//! Update matrices are computed locally per transition: the training input
//! is propagated forward to the transition's input layer and the target is
//! pulled back through the adjoint channels of all later stages. The
//! commutator of the two, partially traced onto a gate's targets, yields
//! the gate's Hermitian update direction. For self-inverse networks the
//! stored encoder gate also appears (daggered, with permuted targets) in
//! the decoder; its mirrored occurrence contributes an extra conjugated
//! commutator term with opposite sign.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dqnn::{forward_pipeline, haar_refresh, InternalNoise, NetworkParams, Stage};
use crate::error::{Error, Result};
use crate::linalg::{
    embed_on_targets, exp_i_hermitian, reduce_to_ordered_subsystem, sandwich_basis,
    tensor_insert_identity, C64, ComplexMatrix, DensityMatrix, PureState, ONE,
};
use crate::noise::{collective_dephasing_adjoint, depolarizing_multi_adjoint};

/// A supervised training example.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub input: DensityMatrix,
    pub target: PureState,
}

/// A training example routed through a specific pipeline of the task.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub pair: TrainingPair,
    pub pipeline: usize,
}

/// Identifies one stored gate: (transition index, gate index).
pub type SlotId = (usize, usize);

/// Hyperparameters of one training run.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub epsilon: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub max_restarts: usize,
    pub restart_threshold: f64,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn new(epsilon: f64, epochs: usize, minibatch_size: usize, seed: u64) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(Error::InvalidArgument(
                "learning rate must be positive".into(),
            ));
        }
        if minibatch_size == 0 {
            return Err(Error::InvalidArgument("minibatch size must be ≥ 1".into()));
        }
        Ok(Self {
            epsilon,
            epochs,
            minibatch_size,
            beta1: 0.9,
            beta2: 0.999,
            max_restarts: 5,
            restart_threshold: 0.05,
            seed,
        })
    }

    pub fn with_restarts(mut self, max_restarts: usize, threshold: f64) -> Self {
        self.max_restarts = max_restarts;
        self.restart_threshold = threshold;
        self
    }
}

/// A full training task: samples with their pipelines, optional internal
/// noise and a set of frozen slots.
#[derive(Debug, Clone)]
pub struct TrainTask {
    pub samples: Vec<TrainingSample>,
    pub pipelines: Vec<Vec<Stage>>,
    pub noise: Option<InternalNoise>,
    pub frozen: BTreeSet<SlotId>,
}

impl TrainTask {
    /// Plain task: all pairs through the network's default pipeline.
    pub fn from_pairs(params: &NetworkParams, pairs: Vec<TrainingPair>) -> Self {
        Self {
            samples: pairs
                .into_iter()
                .map(|pair| TrainingSample { pair, pipeline: 0 })
                .collect(),
            pipelines: vec![params.default_pipeline()],
            noise: None,
            frozen: BTreeSet::new(),
        }
    }
}

/// Result of a training run (best over restarts).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    /// Cost after each epoch, preceded by the initial cost.
    pub history: Vec<f64>,
    pub final_cost: f64,
    /// Whether the final cost reached the restart threshold.
    pub converged: bool,
    pub restarts_used: usize,
}

/// Averaged infidelity 1 − (1/N) Σ ⟨target|ρ_out|target⟩ over the task.
pub fn cost_task(params: &NetworkParams, task: &TrainTask) -> Result<f64> {
    let mut acc = 0.0;
    for sample in &task.samples {
        let out = forward_pipeline(
            params,
            &task.pipelines[sample.pipeline],
            &sample.pair.input,
            task.noise,
        )?;
        acc += out.expectation_pure(&sample.pair.target);
    }
    Ok(1.0 - acc / task.samples.len() as f64)
}

/// Cost over the default pipeline.
pub fn cost(
    params: &NetworkParams,
    pairs: &[TrainingPair],
    noise_in_network: Option<InternalNoise>,
) -> Result<f64> {
    let mut task = TrainTask::from_pairs(params, pairs.to_vec());
    task.noise = noise_in_network;
    cost_task(params, &task)
}

/// Per-gate forward states of one transition stage: the full-register state
/// after each gate, before that gate's noise insertion.
struct StageForward {
    post_gate: Vec<ComplexMatrix>,
}

fn forward_with_cache(
    params: &NetworkParams,
    pipeline: &[Stage],
    input: &DensityMatrix,
    noise: Option<InternalNoise>,
) -> Result<(Vec<Option<StageForward>>, DensityMatrix)> {
    let mut caches = Vec::with_capacity(pipeline.len());
    let mut rho = input.clone();
    for stage in pipeline {
        match stage {
            Stage::Transition(_) | Stage::Mirrored(_) => {
                let t = params.stage_transition(stage).unwrap();
                if rho.num_qubits() != t.prev_width {
                    return Err(Error::DimensionMismatch(format!(
                        "stage expects {} qubits, got {}",
                        t.prev_width,
                        rho.num_qubits()
                    )));
                }
                let fresh = DensityMatrix::basis_state(t.next_width, 0);
                let mut full = rho.tensor(&fresh)?;
                let mut post_gate = Vec::with_capacity(t.gates.len());
                for gate in &t.gates {
                    full = crate::linalg::apply_unitary(&full, &gate.unitary, &gate.targets)?;
                    post_gate.push(full.matrix().clone());
                    if let Some(noi) = noise {
                        if noi.p_n > 0.0 {
                            full =
                                crate::noise::depolarizing_multi(&full, noi.p_n, &gate.targets)?;
                        }
                    }
                }
                let discard: Vec<usize> = (0..t.prev_width).collect();
                rho = crate::linalg::partial_trace(&full, &discard)?;
                caches.push(Some(StageForward { post_gate }));
            }
            Stage::Dephase(quad) => {
                rho = crate::noise::collective_dephasing(&rho, quad)?;
                caches.push(None);
            }
            Stage::Erase(positions) => {
                rho = crate::linalg::partial_trace(&rho, positions)?;
                caches.push(None);
            }
        }
    }
    Ok((caches, rho))
}

/// Accumulates Σ_i Tr_{¬slot}[M] terms into `acc` for one sample, walking
/// the pipeline backwards with the target pulled through adjoint channels.
fn accumulate_update_terms(
    params: &NetworkParams,
    pipeline: &[Stage],
    caches: &[Option<StageForward>],
    target: &PureState,
    noise: Option<InternalNoise>,
    frozen: &BTreeSet<SlotId>,
    acc: &mut BTreeMap<SlotId, ComplexMatrix>,
) -> Result<()> {
    // Backward operator on the current layer, initialized with the target
    // projector on the output layer.
    let mut sigma = target.to_density().matrix().clone();
    let mut sigma_width = target.num_qubits();
    for (stage_idx, stage) in pipeline.iter().enumerate().rev() {
        match stage {
            Stage::Dephase(quad) => {
                sigma = collective_dephasing_adjoint(&sigma, sigma_width, quad);
            }
            Stage::Erase(positions) => {
                // Adjoint of the partial trace: insert identities at the
                // erased positions.
                sigma = tensor_insert_identity(&sigma, sigma_width, positions)?;
                sigma_width += positions.len();
            }
            Stage::Transition(t_idx) | Stage::Mirrored(t_idx) => {
                let t = params.stage_transition(stage).unwrap();
                let n = t.register_width();
                let cache = caches[stage_idx].as_ref().unwrap();
                let prev_positions: Vec<usize> = (0..t.prev_width).collect();
                let mut b_run = tensor_insert_identity(&sigma, t.next_width, &prev_positions)?;
                for (g_idx, gate) in t.gates.iter().enumerate().rev() {
                    let b_slot = match noise {
                        Some(noi) if noi.p_n > 0.0 => {
                            depolarizing_multi_adjoint(&b_run, n, noi.p_n, &gate.targets)?
                        }
                        _ => b_run.clone(),
                    };
                    match stage {
                        Stage::Transition(_) => {
                            let slot = (*t_idx, g_idx);
                            if !frozen.contains(&slot) {
                                let m = cache.post_gate[g_idx].commutator(&b_slot);
                                let reduced = reduce_to_ordered_subsystem(&m, n, &gate.targets)?;
                                acc.entry(slot)
                                    .and_modify(|s| s.add_scaled_in_place(&reduced, ONE))
                                    .or_insert(reduced);
                            }
                        }
                        Stage::Mirrored(_) => {
                            // Stored encoder gate for decoder slot j̄ is gate
                            // m − 1 − j̄ of the source transition; its
                            // contribution is the conjugated commutator with
                            // opposite sign.
                            let src_gate_idx = t.gates.len() - 1 - g_idx;
                            let slot = (*t_idx, src_gate_idx);
                            if !frozen.contains(&slot) {
                                let m = cache.post_gate[g_idx].commutator(&b_slot);
                                let reduced = reduce_to_ordered_subsystem(&m, n, &gate.targets)?;
                                let u_e = params.transitions[*t_idx].gates[src_gate_idx]
                                    .unitary
                                    .matrix();
                                let corr = u_e.mul(&reduced).mul(&u_e.dagger());
                                acc.entry(slot)
                                    .and_modify(|s| s.add_scaled_in_place(&corr, -ONE))
                                    .or_insert_with(|| corr.scale(-ONE));
                            }
                        }
                        _ => unreachable!(),
                    }
                    // Pull the backward operator through the gate itself.
                    let emb = embed_on_targets(&gate.unitary, &gate.targets, n)?;
                    b_run = emb.dagger().mul(&b_slot).mul(&emb);
                }
                // Project the fresh qubits onto |0…0⟩.
                let fresh: Vec<usize> = (t.prev_width..n).collect();
                sigma = sandwich_basis(&b_run, n, &fresh, 0)?;
                sigma_width = t.prev_width;
            }
        }
    }
    Ok(())
}

/// Hermitian update matrices K for every trainable slot over a minibatch:
/// K = i · dim(U) / (2N) · Σ_i (Tr_{¬slot}[M_i] − mirrored correction).
pub fn update_matrices_task(
    params: &NetworkParams,
    minibatch: &[&TrainingSample],
    task: &TrainTask,
) -> Result<BTreeMap<SlotId, ComplexMatrix>> {
    if minibatch.is_empty() {
        return Err(Error::InvalidArgument("empty minibatch".into()));
    }
    let mut acc: BTreeMap<SlotId, ComplexMatrix> = BTreeMap::new();
    for sample in minibatch {
        let pipeline = &task.pipelines[sample.pipeline];
        let (caches, _) = forward_with_cache(params, pipeline, &sample.pair.input, task.noise)?;
        accumulate_update_terms(
            params,
            pipeline,
            &caches,
            &sample.pair.target,
            task.noise,
            &task.frozen,
            &mut acc,
        )?;
    }
    let n = minibatch.len() as f64;
    let out = acc
        .into_iter()
        .map(|(slot, sum)| {
            let dim = params.transitions[slot.0].gates[slot.1].unitary.dim() as f64;
            // i·dim/(2N) · Σ; the accumulated commutator sum is
            // anti-Hermitian, so the result is Hermitian up to round-off.
            let k = sum.scale(C64::new(0.0, dim / (2.0 * n))).hermitize();
            (slot, k)
        })
        .collect();
    Ok(out)
}

/// Update matrices of a standard (independently parameterized) network over
/// its default pipeline.
pub fn update_matrices(
    params: &NetworkParams,
    minibatch: &[TrainingPair],
    noise: Option<InternalNoise>,
) -> Result<BTreeMap<SlotId, ComplexMatrix>> {
    if params.architecture.self_inverse {
        return Err(Error::InvalidArgument(
            "use update_matrices_self_inverse for self-inverse networks".into(),
        ));
    }
    let mut task = TrainTask::from_pairs(params, minibatch.to_vec());
    task.noise = noise;
    let refs: Vec<&TrainingSample> = task.samples.iter().collect();
    update_matrices_task(params, &refs, &task)
}

/// Update matrices of a self-inverse network: every encoder K carries the
/// extra mirrored-occurrence term; decoder matrices are never updated
/// independently, they follow from the stored encoder gates.
pub fn update_matrices_self_inverse(
    params: &NetworkParams,
    minibatch: &[TrainingPair],
) -> Result<BTreeMap<SlotId, ComplexMatrix>> {
    if !params.architecture.self_inverse {
        return Err(Error::InvalidArgument("network is not self-inverse".into()));
    }
    let task = TrainTask::from_pairs(params, minibatch.to_vec());
    let refs: Vec<&TrainingSample> = task.samples.iter().collect();
    update_matrices_task(params, &refs, &task)
}

/// Predicted directional derivative of the cost when every slot steps along
/// its own update matrix: dC/ds = −Σ_slots (2/dim) ‖K‖²_F.
pub fn predicted_descent_rate(params: &NetworkParams, ks: &BTreeMap<SlotId, ComplexMatrix>) -> f64 {
    ks.iter()
        .map(|(slot, k)| {
            let dim = params.transitions[slot.0].gates[slot.1].unitary.dim() as f64;
            let norm_sq = k.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
            -(2.0 / dim) * norm_sq
        })
        .sum()
}

/// Per-slot Nadam accumulators: first moment, second moment, and the
/// running maximum of the bias-corrected second moment.
#[derive(Debug, Clone)]
struct Moments {
    m: ComplexMatrix,
    v: Vec<f64>,
    v_hat_max: Vec<f64>,
}

/// First/second-moment accumulators of the Nadam optimizer, one set per
/// trainable slot.
#[derive(Debug, Clone, Default)]
pub struct OptimizerState {
    step: usize,
    moments: BTreeMap<SlotId, Moments>,
}

impl OptimizerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step_count(&self) -> usize {
        self.step
    }
}

/// One Nadam step: moments are tracked entrywise on the Hermitian update
/// matrices; the mixed result is re-symmetrized and fed into the exact
/// unitary update U ← exp(iεK̃)U. Degenerate β₁ = β₂ = 0 reduces to the
/// plain gradient step U ← exp(iεK)U.
///
/// The second-moment scaling uses the running maximum of the
/// bias-corrected accumulator. A plain entrywise divisor keeps the
/// effective step at ε-scale even as the gradient vanishes, which on these
/// deterministic full-batch costs leaves the unitaries orbiting the
/// optimum at ε-sized radius; the running maximum pins the divisor to the
/// largest gradient scale seen, so late steps shrink with the gradient and
/// the cost converges to the endpoint instead of plateauing.
pub fn nadam_step(
    state: &mut OptimizerState,
    params: &mut NetworkParams,
    ks: &BTreeMap<SlotId, ComplexMatrix>,
    config: &TrainingConfig,
) -> Result<()> {
    const DELTA: f64 = 1e-8;
    state.step += 1;
    let t = state.step as i32;
    for (slot, k) in ks {
        if !k.is_hermitian(1e-8) {
            return Err(Error::InvalidArgument(format!(
                "update matrix for slot {slot:?} is not Hermitian"
            )));
        }
        let dim = k.rows();
        let entry = state.moments.entry(*slot).or_insert_with(|| Moments {
            m: ComplexMatrix::zeros(dim, dim),
            v: vec![0.0; dim * dim],
            v_hat_max: vec![0.0; dim * dim],
        });
        let b1 = config.beta1;
        let b2 = config.beta2;
        entry.m = entry.m.scale(C64::new(b1, 0.0));
        entry.m.add_scaled_in_place(k, C64::new(1.0 - b1, 0.0));
        let bias1 = 1.0 - b1.powi(t);
        let bias2 = 1.0 - b2.powi(t);
        for ((vi, vmax), ki) in entry
            .v
            .iter_mut()
            .zip(entry.v_hat_max.iter_mut())
            .zip(k.data())
        {
            *vi = b2 * *vi + (1.0 - b2) * ki.norm_sqr();
            *vmax = vmax.max(*vi / bias2);
        }
        // Nadam effective gradient: β₁·m̂ + (1−β₁)/(1−β₁ᵗ)·g.
        let mut effective = entry.m.scale(C64::new(b1 / bias1, 0.0));
        effective.add_scaled_in_place(k, C64::new((1.0 - b1) / bias1, 0.0));
        let stepped = if b2 > 0.0 {
            let v_hat_max = &entry.v_hat_max;
            ComplexMatrix::from_fn(dim, dim, |r, c| {
                effective.get(r, c) / (v_hat_max[r * dim + c].sqrt() + DELTA)
            })
        } else {
            effective
        };
        let k_tilde = stepped.hermitize();
        let rotation = exp_i_hermitian(&k_tilde, config.epsilon)?;
        let gate = &mut params.transitions[slot.0].gates[slot.1];
        let updated = rotation.matrix().mul(gate.unitary.matrix());
        gate.unitary =
            crate::linalg::Unitary::from_matrix_unchecked(gate.unitary.num_qubits(), updated);
    }
    Ok(())
}

fn run_once(
    params_init: &NetworkParams,
    task: &TrainTask,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(NetworkParams, Vec<f64>)> {
    let mut params = params_init.clone();
    let mut state = OptimizerState::new();
    let mut history = Vec::with_capacity(config.epochs + 1);
    history.push(cost_task(&params, task)?);
    let mut order: Vec<usize> = (0..task.samples.len()).collect();
    for _epoch in 0..config.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            let minibatch: Vec<&TrainingSample> = chunk.iter().map(|&i| &task.samples[i]).collect();
            let ks = update_matrices_task(&params, &minibatch, task)?;
            nadam_step(&mut state, &mut params, &ks, config)?;
        }
        history.push(cost_task(&params, task)?);
    }
    Ok((params, history))
}

/// Trains with minibatched Nadam; when the final cost stays above the
/// restart threshold the trainable slots are re-drawn Haar-randomly and the
/// run repeats, up to `max_restarts` times. Returns the best run; the
/// caller decides how to treat an unconverged outcome.
pub fn train(
    params_init: &NetworkParams,
    task: &TrainTask,
    config: &TrainingConfig,
) -> Result<TrainOutcome> {
    if task.samples.is_empty() {
        return Err(Error::InvalidArgument("no training samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<TrainOutcome> = None;
    let mut params = params_init.clone();
    for restart in 0..=config.max_restarts {
        let (trained, history) = run_once(&params, task, config, &mut rng)?;
        let final_cost = *history.last().unwrap();
        let outcome = TrainOutcome {
            params: trained,
            history,
            final_cost,
            converged: final_cost <= config.restart_threshold,
            restarts_used: restart,
        };
        let better = best
            .as_ref()
            .map(|b| outcome.final_cost < b.final_cost)
            .unwrap_or(true);
        if better {
            best = Some(outcome.clone());
        }
        if best.as_ref().unwrap().converged {
            break;
        }
        if restart < config.max_restarts {
            params = haar_refresh(params_init, &task.frozen, &mut rng)?;
        }
    }
    Ok(best.unwrap())
}

/// Convenience wrapper: default pipeline, no frozen slots.
pub fn train_pairs(
    params_init: &NetworkParams,
    pairs: Vec<TrainingPair>,
    config: &TrainingConfig,
) -> Result<TrainOutcome> {
    let task = TrainTask::from_pairs(params_init, pairs);
    train(params_init, &task, config)
}
