//! The dissipative quantum neural network model: per-neuron unitary
//! parameterization, layer-to-layer channels, full forward passes with
//! optional internal noise, and self-inverse decoder assembly.
//!
//! A layer transition appends the next layer's qubits in |0⟩, applies its
//! gates in order and traces out the previous layer. Gates carry explicit
//! target lists into the (previous + fresh) register, which absorbs all swap
//! bookkeeping of the self-inverse construction: mirrored decoder gates are
//! plain adjoints applied to permuted targets, never physical swap gates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    apply_unitary, haar_random_unitary, partial_trace, C64, ComplexMatrix, DensityMatrix,
    PureState, Unitary, MAX_QUBITS, ONE, ZERO,
};
use crate::noise::{collective_dephasing, depolarizing_multi, DephasingQuadrature};

/// Layer widths plus the self-inverse flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub layer_widths: Vec<usize>,
    pub self_inverse: bool,
}

impl Architecture {
    pub fn new(layer_widths: Vec<usize>, self_inverse: bool) -> Result<Self> {
        if layer_widths.len() < 2 {
            return Err(Error::InvalidArgument(
                "a network needs at least two layers".into(),
            ));
        }
        if layer_widths.iter().any(|w| *w == 0) {
            return Err(Error::InvalidArgument(
                "layer widths must be positive".into(),
            ));
        }
        if self_inverse {
            let palindrome = layer_widths
                .iter()
                .zip(layer_widths.iter().rev())
                .all(|(a, b)| a == b);
            if !palindrome || layer_widths.len() % 2 == 0 {
                return Err(Error::InvalidArgument(
                    "self-inverse networks need an odd-length palindromic width list".into(),
                ));
            }
        }
        for window in layer_widths.windows(2) {
            if window[0] + window[1] > MAX_QUBITS {
                return Err(Error::RegisterTooLarge {
                    requested: window[0] + window[1],
                    max: MAX_QUBITS,
                });
            }
        }
        Ok(Self {
            layer_widths,
            self_inverse,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layer_widths.len()
    }

    /// Number of transitions that carry independent parameters: all of them
    /// for a standard network, the encoder half for a self-inverse one.
    pub fn num_stored_transitions(&self) -> usize {
        if self.self_inverse {
            (self.layer_widths.len() - 1) / 2
        } else {
            self.layer_widths.len() - 1
        }
    }
}

/// A unitary together with the register positions it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub unitary: Unitary,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(unitary: Unitary, targets: Vec<usize>) -> Self {
        Self { unitary, targets }
    }
}

/// One layer-to-layer transition: an ordered gate list on the register
/// formed by the previous layer (positions 0..prev) plus the freshly
/// appended layer (positions prev..prev+next).
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub prev_width: usize,
    pub next_width: usize,
    pub gates: Vec<Gate>,
}

impl Transition {
    /// Per-neuron standard form: gate j acts on all previous-layer qubits
    /// plus fresh neuron j.
    pub fn standard(prev_width: usize, next_width: usize, unitaries: Vec<Unitary>) -> Result<Self> {
        if unitaries.len() != next_width {
            return Err(Error::InvalidArgument(format!(
                "standard transition to {next_width} neurons needs {next_width} unitaries, got {}",
                unitaries.len()
            )));
        }
        let gates = unitaries
            .into_iter()
            .enumerate()
            .map(|(j, u)| {
                if u.num_qubits() != prev_width + 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "per-neuron unitary must act on {} qubits, got {}",
                        prev_width + 1,
                        u.num_qubits()
                    )));
                }
                let mut targets: Vec<usize> = (0..prev_width).collect();
                targets.push(prev_width + j);
                Ok(Gate::new(u, targets))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            prev_width,
            next_width,
            gates,
        })
    }

    pub fn register_width(&self) -> usize {
        self.prev_width + self.next_width
    }

    /// The mirrored transition of the self-inverse ansatz, for transitions
    /// in per-neuron standard form: daggered gates in reverse order, with
    /// the previous layer's slots mapped onto the fresh output qubits and
    /// each neuron slot onto its originating latent qubit.
    pub fn mirrored(&self) -> Transition {
        let m = self.gates.len();
        let gates = (0..m)
            .map(|jbar| {
                let source = &self.gates[m - 1 - jbar];
                let mut targets: Vec<usize> =
                    (0..self.prev_width).map(|t| self.next_width + t).collect();
                let neuron_index = source.targets[self.prev_width] - self.prev_width;
                targets.push(neuron_index);
                Gate::new(source.unitary.dagger(), targets)
            })
            .collect();
        Transition {
            prev_width: self.next_width,
            next_width: self.prev_width,
            gates,
        }
    }
}

/// Stored parameters of a network. For self-inverse architectures only the
/// encoder half is stored; decoder transitions are materialized on the fly.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub architecture: Architecture,
    pub transitions: Vec<Transition>,
}

impl NetworkParams {
    pub fn new(architecture: Architecture, transitions: Vec<Transition>) -> Result<Self> {
        if transitions.len() != architecture.num_stored_transitions() {
            return Err(Error::InvalidArgument(format!(
                "architecture stores {} transitions, got {}",
                architecture.num_stored_transitions(),
                transitions.len()
            )));
        }
        for (i, t) in transitions.iter().enumerate() {
            if t.prev_width != architecture.layer_widths[i]
                || t.next_width != architecture.layer_widths[i + 1]
            {
                return Err(Error::InvalidArgument(format!(
                    "transition {i} widths {}→{} do not match architecture",
                    t.prev_width, t.next_width
                )));
            }
        }
        Ok(Self {
            architecture,
            transitions,
        })
    }

    /// Standard-form network with Haar-random per-neuron unitaries.
    pub fn random<R: Rng + ?Sized>(architecture: Architecture, rng: &mut R) -> Result<Self> {
        let transitions = (0..architecture.num_stored_transitions())
            .map(|i| {
                let prev = architecture.layer_widths[i];
                let next = architecture.layer_widths[i + 1];
                let unitaries = (0..next)
                    .map(|_| haar_random_unitary(prev + 1, rng))
                    .collect();
                Transition::standard(prev, next, unitaries)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(architecture, transitions)
    }

    /// Standard-form network with identity unitaries.
    pub fn identity(architecture: Architecture) -> Result<Self> {
        let transitions = (0..architecture.num_stored_transitions())
            .map(|i| {
                let prev = architecture.layer_widths[i];
                let next = architecture.layer_widths[i + 1];
                let unitaries = (0..next).map(|_| Unitary::identity(prev + 1)).collect();
                Transition::standard(prev, next, unitaries)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(architecture, transitions)
    }

    pub fn input_width(&self) -> usize {
        self.architecture.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.architecture.layer_widths.last().unwrap()
    }

    /// The execution order of the network as pipeline stages.
    pub fn default_pipeline(&self) -> Vec<Stage> {
        let mut stages: Vec<Stage> = (0..self.transitions.len()).map(Stage::Transition).collect();
        if self.architecture.self_inverse {
            for idx in (0..self.transitions.len()).rev() {
                stages.push(Stage::Mirrored(idx));
            }
        }
        stages
    }

    /// Materializes the transition a stage executes; `None` for fixed
    /// channel stages.
    pub fn stage_transition(&self, stage: &Stage) -> Option<Transition> {
        match stage {
            Stage::Transition(i) => Some(self.transitions[*i].clone()),
            Stage::Mirrored(i) => Some(self.transitions[*i].mirrored()),
            _ => None,
        }
    }

    /// Largest unitarity deviation over all stored gates.
    pub fn max_unitarity_deviation(&self) -> f64 {
        self.transitions
            .iter()
            .flat_map(|t| t.gates.iter())
            .map(|g| g.unitary.unitarity_deviation())
            .fold(0.0, f64::max)
    }
}

/// Fresh Haar-random draw of every non-frozen gate; frozen gates and all
/// target structure are kept. Used by the restart machinery.
pub fn haar_refresh<R: Rng + ?Sized>(
    params: &NetworkParams,
    frozen: &std::collections::BTreeSet<(usize, usize)>,
    rng: &mut R,
) -> Result<NetworkParams> {
    let mut out = params.clone();
    for (t_idx, transition) in out.transitions.iter_mut().enumerate() {
        for (g_idx, gate) in transition.gates.iter_mut().enumerate() {
            if !frozen.contains(&(t_idx, g_idx)) {
                gate.unitary = haar_random_unitary(gate.unitary.num_qubits(), rng);
            }
        }
    }
    Ok(out)
}

/// One step of a network execution pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    /// Apply stored transition i.
    Transition(usize),
    /// Apply the mirrored (self-inverse decoder) form of stored transition i.
    Mirrored(usize),
    /// Collective dephasing on the current intermediate state.
    Dephase(DephasingQuadrature),
    /// Erasure (partial trace) of the listed positions of the current state.
    Erase(Vec<usize>),
}

/// Multi-qubit depolarizing noise inserted after every gate, acting on
/// exactly the qubits that gate touched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalNoise {
    pub p_n: f64,
}

impl InternalNoise {
    pub fn new(p_n: f64) -> Result<Self> {
        if p_n < 0.0 {
            return Err(Error::InvalidArgument("negative noise strength".into()));
        }
        Ok(Self { p_n })
    }
}

/// One layer-to-layer map: appends the next layer in |0…0⟩, applies the
/// gates in order (each optionally followed by depolarizing noise on its
/// targets) and traces out the previous layer.
pub fn layer_map(
    rho_prev: &DensityMatrix,
    transition: &Transition,
    noise: Option<InternalNoise>,
) -> Result<DensityMatrix> {
    if rho_prev.num_qubits() != transition.prev_width {
        return Err(Error::DimensionMismatch(format!(
            "transition expects {} input qubits, got {}",
            transition.prev_width,
            rho_prev.num_qubits()
        )));
    }
    let fresh = DensityMatrix::basis_state(transition.next_width, 0);
    let mut full = rho_prev.tensor(&fresh)?;
    for gate in &transition.gates {
        full = apply_unitary(&full, &gate.unitary, &gate.targets)?;
        if let Some(n) = noise {
            if n.p_n > 0.0 {
                full = depolarizing_multi(&full, n.p_n, &gate.targets)?;
            }
        }
    }
    let discard: Vec<usize> = (0..transition.prev_width).collect();
    partial_trace(&full, &discard)
}

/// Runs an explicit pipeline.
pub fn forward_pipeline(
    params: &NetworkParams,
    pipeline: &[Stage],
    rho_in: &DensityMatrix,
    noise: Option<InternalNoise>,
) -> Result<DensityMatrix> {
    let mut rho = rho_in.clone();
    for stage in pipeline {
        rho = match stage {
            Stage::Transition(_) | Stage::Mirrored(_) => {
                let t = params.stage_transition(stage).unwrap();
                layer_map(&rho, &t, noise)?
            }
            Stage::Dephase(quad) => collective_dephasing(&rho, quad)?,
            Stage::Erase(positions) => partial_trace(&rho, positions)?,
        };
    }
    Ok(rho)
}

/// Full forward pass over the network's default pipeline.
pub fn forward(
    params: &NetworkParams,
    rho_in: &DensityMatrix,
    noise: Option<InternalNoise>,
) -> Result<DensityMatrix> {
    forward_pipeline(params, &params.default_pipeline(), rho_in, noise)
}

/// Materializes the decoder half of a self-inverse network: for every
/// encoder transition the daggered gates in reverse order with permuted
/// targets (the swap bookkeeping lives entirely in the target lists).
pub fn build_self_inverse_decoder(params: &NetworkParams) -> Result<Vec<Transition>> {
    if !params.architecture.self_inverse {
        return Err(Error::InvalidArgument(
            "decoder assembly requires a self-inverse architecture".into(),
        ));
    }
    Ok(params
        .transitions
        .iter()
        .rev()
        .map(Transition::mirrored)
        .collect())
}

// ---------------------------------------------------------------------------
// Kraus representation of noiseless networks (fast validation path).
// ---------------------------------------------------------------------------

/// Channel in Kraus form: ρ ↦ Σ K ρ K†.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub n_in: usize,
    pub n_out: usize,
    pub ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Kraus operators of one noiseless transition:
    /// A_x = (⟨x|_prev ⊗ I) Û (I ⊗ |0…0⟩_next).
    pub fn from_transition(transition: &Transition) -> Result<Self> {
        let n = transition.register_width();
        let d = 1usize << n;
        let mut full = ComplexMatrix::identity(d);
        for gate in &transition.gates {
            let emb = crate::linalg::embed_on_targets(&gate.unitary, &gate.targets, n)?;
            full = emb.mul(&full);
        }
        let d_prev = 1usize << transition.prev_width;
        let d_next = 1usize << transition.next_width;
        let mut ops = Vec::with_capacity(d_prev);
        for x in 0..d_prev {
            let mut k = ComplexMatrix::zeros(d_next, d_prev);
            for r in 0..d_next {
                for c in 0..d_prev {
                    // Row: previous layer in ⟨x|, fresh layer at r.
                    // Column: previous layer at c, fresh layer in |0…0⟩.
                    k.set(r, c, full.get(x * d_next + r, c * d_next));
                }
            }
            ops.push(k);
        }
        Ok(Self {
            n_in: transition.prev_width,
            n_out: transition.next_width,
            ops,
        })
    }

    /// Composition: `then` runs after `self`. Kraus set is the product set.
    pub fn compose(&self, then: &KrausChannel) -> Result<Self> {
        if then.n_in != self.n_out {
            return Err(Error::DimensionMismatch(format!(
                "composition mismatch: {} out vs {} in",
                self.n_out, then.n_in
            )));
        }
        let mut ops = Vec::with_capacity(self.ops.len() * then.ops.len());
        for b in &then.ops {
            for a in &self.ops {
                ops.push(b.mul(a));
            }
        }
        Ok(Self {
            n_in: self.n_in,
            n_out: then.n_out,
            ops,
        })
    }

    /// Kraus form of a noiseless network over its default pipeline.
    pub fn from_params(params: &NetworkParams) -> Result<Self> {
        let pipeline = params.default_pipeline();
        let mut channel: Option<KrausChannel> = None;
        for stage in &pipeline {
            let t = params.stage_transition(stage).ok_or_else(|| {
                Error::InvalidArgument("Kraus form needs a transitions-only pipeline".into())
            })?;
            let next = KrausChannel::from_transition(&t)?;
            channel = Some(match channel {
                None => next,
                Some(c) => c.compose(&next)?,
            });
        }
        channel.ok_or_else(|| Error::InvalidArgument("empty pipeline".into()))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.num_qubits() != self.n_in {
            return Err(Error::DimensionMismatch(format!(
                "channel expects {} qubits, got {}",
                self.n_in,
                rho.num_qubits()
            )));
        }
        let d_out = 1usize << self.n_out;
        let mut out = ComplexMatrix::zeros(d_out, d_out);
        for k in &self.ops {
            let term = k.mul(rho.matrix()).mul(&k.dagger());
            out.add_scaled_in_place(&term, ONE);
        }
        Ok(DensityMatrix::from_matrix_unchecked(self.n_out, out))
    }

    /// ⟨target| Q(|ψ⟩⟨ψ|) |target⟩ without materializing the output state.
    pub fn pure_fidelity(&self, psi: &PureState, target: &PureState) -> f64 {
        let mut acc = 0.0;
        for k in &self.ops {
            // amp = ⟨target| K |ψ⟩
            let mut amp = ZERO;
            for r in 0..k.rows() {
                let t = target.amplitudes()[r].conj();
                if t == ZERO {
                    continue;
                }
                let mut s = ZERO;
                for c in 0..k.cols() {
                    s += k.get(r, c) * psi.amplitudes()[c];
                }
                amp += t * s;
            }
            acc += amp.norm_sqr();
        }
        acc
    }

    /// Max-abs deviation of Σ K†K from the identity.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let d_in = 1usize << self.n_in;
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &self.ops {
            sum.add_scaled_in_place(&k.dagger().mul(k), ONE);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d_in))
    }
}

// ---------------------------------------------------------------------------
// QAE collections (erasure correction, encoding discovery).
// ---------------------------------------------------------------------------

/// One QAE of a collection, handling a specific erasure pattern.
#[derive(Debug, Clone)]
pub struct CollectionMember {
    /// Erased positions of the code register this member handles (sorted).
    pub lost: Vec<usize>,
    pub params: NetworkParams,
}

/// A collection of QAEs sharing a decoder, one member per erasure pattern.
#[derive(Debug, Clone)]
pub struct QaeCollection {
    /// Width of the intact code register.
    pub code_qubits: usize,
    pub members: Vec<CollectionMember>,
}

impl QaeCollection {
    pub fn member_for(&self, lost: &[usize]) -> Option<&CollectionMember> {
        self.members.iter().find(|m| m.lost == lost)
    }
}

/// Rearranges a trained encoding-finder network (1-n-1 collection) into an
/// x-1-n QAE collection: the finder's input-side map D becomes the shared
/// output-side decoder and each compression channel E_i becomes a member's
/// encoder, with no retraining.
///
/// Finder layout: transition 0 = D (1 → n, standard form; its mirror is
/// E_0), transitions 1..=n = E_i for the loss of qubit i−1 ((n−1) → 1).
pub fn rearrange_to_qae(finder: &NetworkParams) -> Result<QaeCollection> {
    if finder.transitions.is_empty() {
        return Err(Error::InvalidArgument("empty finder network".into()));
    }
    let decoder = &finder.transitions[0];
    if decoder.prev_width != 1 {
        return Err(Error::InvalidArgument(
            "finder transition 0 must map a single qubit to the code register".into(),
        ));
    }
    let n = decoder.next_width;
    if finder.transitions.len() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "finder needs 1 + {n} transitions, got {}",
            finder.transitions.len()
        )));
    }
    let mut members = Vec::with_capacity(n + 1);
    // No-loss member: the mirrored decoder compresses, D re-encodes.
    let arch0 = Architecture::new(vec![n, 1, n], false)?;
    members.push(CollectionMember {
        lost: vec![],
        params: NetworkParams::new(arch0, vec![decoder.mirrored(), decoder.clone()])?,
    });
    for q in 0..n {
        let encoder = finder.transitions[q + 1].clone();
        if encoder.prev_width != n - 1 || encoder.next_width != 1 {
            return Err(Error::InvalidArgument(format!(
                "finder transition {} must map {} qubits to 1",
                q + 1,
                n - 1
            )));
        }
        let arch = Architecture::new(vec![n - 1, 1, n], false)?;
        members.push(CollectionMember {
            lost: vec![q],
            params: NetworkParams::new(arch, vec![encoder, decoder.clone()])?,
        });
    }
    Ok(QaeCollection {
        code_qubits: n,
        members,
    })
}

// ---------------------------------------------------------------------------
// Hand-built reference network.
// ---------------------------------------------------------------------------

pub(crate) fn cnot() -> Unitary {
    let mut m = ComplexMatrix::zeros(4, 4);
    m.set(0, 0, ONE);
    m.set(1, 1, ONE);
    m.set(2, 3, ONE);
    m.set(3, 2, ONE);
    Unitary::from_matrix_unchecked(2, m)
}

pub(crate) fn swap() -> Unitary {
    let mut m = ComplexMatrix::zeros(4, 4);
    m.set(0, 0, ONE);
    m.set(1, 2, ONE);
    m.set(2, 1, ONE);
    m.set(3, 3, ONE);
    Unitary::from_matrix_unchecked(2, m)
}

/// Standard-architecture 3-1-3 network whose noiseless channel equals the
/// 3-qubit-code recovery map. The encoder unitary computes both syndrome
/// bits into the first two register positions, applies the majority
/// correction to the third and swaps the corrected qubit onto the appended
/// latent qubit; the decoder re-encodes the latent qubit with two CNOTs and
/// a SWAP.
pub fn recovery_network_3qc() -> NetworkParams {
    // Basis permutation on (q0, q1, q2, a): → (q0⊕q1, q1⊕q2, a, m) with
    // m = q2 ⊕ [¬(q0⊕q1) ∧ (q1⊕q2)] the majority of (q0, q1, q2).
    let mut enc = ComplexMatrix::zeros(16, 16);
    for idx in 0..16usize {
        let q0 = (idx >> 3) & 1;
        let q1 = (idx >> 2) & 1;
        let q2 = (idx >> 1) & 1;
        let a = idx & 1;
        let b0 = q0 ^ q1;
        let b1 = q1 ^ q2;
        let m = q2 ^ ((1 - b0) & b1);
        let out = (b0 << 3) | (b1 << 2) | (a << 1) | m;
        enc.set(out, idx, ONE);
    }
    let encoder = Unitary::from_matrix_unchecked(4, enc);
    let t1 = Transition::standard(3, 1, vec![encoder]).unwrap();
    let t2 = Transition {
        prev_width: 1,
        next_width: 3,
        gates: vec![
            Gate::new(cnot(), vec![0, 1]),
            Gate::new(cnot(), vec![0, 2]),
            Gate::new(swap(), vec![0, 3]),
        ],
    };
    let arch = Architecture::new(vec![3, 1, 3], false).unwrap();
    NetworkParams::new(arch, vec![t1, t2]).unwrap()
}

/// The encoder of [`recovery_network_3qc`] reused as a self-inverse 3-1-3
/// network (decoder mirrored from the encoder).
pub fn recovery_network_3qc_self_inverse() -> NetworkParams {
    let standard = recovery_network_3qc();
    let arch = Architecture::new(vec![3, 1, 3], true).unwrap();
    NetworkParams::new(arch, vec![standard.transitions[0].clone()]).unwrap()
}
