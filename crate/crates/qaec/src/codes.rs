//! Stabilizer-code definitions: the 3-qubit repetition code, a 4-qubit
//! erasure code and the 5-qubit perfect code, with logical state
//! construction, syndrome-based recovery maps and closed-form error rates.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    kron, pauli_i, pauli_x, pauli_y, pauli_z, C64, ComplexMatrix, DensityMatrix, PureState, ONE,
    ZERO,
};

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => pauli_i(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

/// Tensor product of single-qubit Paulis over an n-qubit register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// Parses strings like "XZZXI".
    pub fn parse(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!(
                    "unknown Pauli letter '{other}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(ops))
    }

    /// Single-qubit Pauli at position `q` of an n-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[q] = p;
        Self(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.len(), other.len());
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        anti % 2 == 0
    }

    /// Dense 2^n × 2^n matrix representation.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(1);
        for p in &self.0 {
            m = kron(&m, &p.matrix()).expect("register within size limit");
        }
        m
    }

    /// Applies the Pauli string to a pure state using bit operations.
    pub fn apply_pure(&self, psi: &PureState) -> PureState {
        let n = self.len();
        assert_eq!(psi.num_qubits(), n);
        let d = 1usize << n;
        let mut flip_mask = 0usize;
        let mut z_mask = 0usize;
        let mut y_count = 0usize;
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip_mask |= bit,
                Pauli::Y => {
                    flip_mask |= bit;
                    z_mask |= bit;
                    y_count += 1;
                }
                Pauli::Z => z_mask |= bit,
            }
        }
        // Y = iXZ: Z-phase on the input bit, then flip, then a factor i per Y.
        let global = C64::new(0.0, 1.0).powu(y_count as u32);
        let mut out = vec![ZERO; d];
        for (idx, amp) in psi.amplitudes().iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            let parity = (idx & z_mask).count_ones() & 1;
            let sign = if parity == 1 { -ONE } else { ONE };
            out[idx ^ flip_mask] = amp * sign * global;
        }
        PureState::new(n, out).expect("Pauli action preserves the norm")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            let ch = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// Point on the logical Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalPoint {
    pub theta: f64,
    pub phi: f64,
}

impl LogicalPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta {theta} outside [0, π]"
            )));
        }
        if !(0.0..2.0 * std::f64::consts::PI).contains(&phi) {
            return Err(Error::InvalidArgument(format!("phi {phi} outside [0, 2π)")));
        }
        Ok(Self { theta, phi })
    }
}

/// Stabilizer code with a syndrome → correction lookup table.
#[derive(Debug, Clone)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub generators: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub basis0: PureState,
    pub basis1: PureState,
    /// Syndrome bits (bit i set ⇔ anticommutes with generator i) → correction.
    pub recovery_table: BTreeMap<u16, PauliString>,
    /// Cached Kraus operators M_b = C_b Π_b of the recovery map.
    recovery_kraus: Vec<ComplexMatrix>,
}

impl StabilizerCode {
    fn build(
        name: &str,
        generators: Vec<PauliString>,
        logical_x: PauliString,
        logical_z: PauliString,
    ) -> Result<Self> {
        let n = logical_x.len();
        for (i, a) in generators.iter().enumerate() {
            for b in generators.iter().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(Error::InvalidArgument(format!(
                        "generators {a} and {b} do not commute"
                    )));
                }
            }
        }
        if logical_x.commutes_with(&logical_z) {
            return Err(Error::InvalidArgument(
                "logical X and Z must anticommute".into(),
            ));
        }
        let basis0 = Self::project_fiducial(n, &generators, &logical_z)?;
        // basis1 inherits its phase from X_L|0_L⟩ so the logical Pauli
        // algebra (X_L|0_L⟩ = |1_L⟩, Z_L|1_L⟩ = −|1_L⟩) holds exactly.
        let basis1 = logical_x.apply_pure(&basis0);
        let recovery_table = Self::min_weight_table(n, &generators);
        let recovery_kraus = recovery_kraus(n, &generators, &recovery_table);
        Ok(Self {
            name: name.to_string(),
            n,
            generators,
            logical_x,
            logical_z,
            basis0,
            basis1,
            recovery_table,
            recovery_kraus,
        })
    }

    /// |0_L⟩ from projecting a computational fiducial with Π(1+g)/2 per
    /// generator and (1+Z_L)/2, then normalizing with a fixed phase.
    fn project_fiducial(
        n: usize,
        generators: &[PauliString],
        logical_z: &PauliString,
    ) -> Result<PureState> {
        let d = 1usize << n;
        for fiducial in 0..d {
            let mut vec: Vec<C64> = vec![ZERO; d];
            vec[fiducial] = ONE;
            let mut state = PureState::new(n, vec).unwrap();
            let mut ok = true;
            for g in generators.iter().chain(std::iter::once(logical_z)) {
                let projected: Vec<C64> = {
                    let gs = g.apply_pure(&state);
                    state
                        .amplitudes()
                        .iter()
                        .zip(gs.amplitudes())
                        .map(|(a, b)| (a + b) * 0.5)
                        .collect()
                };
                let norm_sq: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
                if norm_sq < 1e-12 {
                    ok = false;
                    break;
                }
                state = PureState::normalized(n, projected).unwrap();
            }
            if ok {
                return Ok(state.canonical_phase());
            }
        }
        Err(Error::InvalidArgument(
            "no computational fiducial has support on the codespace".into(),
        ))
    }

    /// Minimum-weight decoder table over all Pauli errors, ties broken by
    /// enumeration order (weight, then qubit indices ascending, then X<Y<Z).
    fn min_weight_table(n: usize, generators: &[PauliString]) -> BTreeMap<u16, PauliString> {
        let mut table: BTreeMap<u16, PauliString> = BTreeMap::new();
        table.insert(0, PauliString::identity(n));
        let num_syndromes = 1usize << generators.len();
        for weight in 1..=n {
            if table.len() == num_syndromes {
                break;
            }
            for error in enumerate_weight(n, weight) {
                let synd = syndrome_of(&error, generators);
                table.entry(synd).or_insert(error);
            }
        }
        table
    }

    pub fn syndrome_of(&self, error: &PauliString) -> u16 {
        syndrome_of(error, &self.generators)
    }

    /// Y_L = i X_L Z_L as a dense matrix.
    pub fn logical_y(&self) -> ComplexMatrix {
        self.logical_x
            .to_matrix()
            .mul(&self.logical_z.to_matrix())
            .scale(C64::new(0.0, 1.0))
    }

    pub fn recovery_kraus_ops(&self) -> &[ComplexMatrix] {
        &self.recovery_kraus
    }

    /// Recovery map with a caller-supplied syndrome table (e.g. the
    /// alternative two-flip strategy for correlated noise).
    pub fn recovery_with_table(
        &self,
        table: &BTreeMap<u16, PauliString>,
        rho: &DensityMatrix,
    ) -> Result<DensityMatrix> {
        let kraus = recovery_kraus(self.n, &self.generators, table);
        apply_kraus(self.n, &kraus, rho)
    }
}

fn syndrome_of(error: &PauliString, generators: &[PauliString]) -> u16 {
    let mut synd = 0u16;
    for (i, g) in generators.iter().enumerate() {
        if !error.commutes_with(g) {
            synd |= 1 << i;
        }
    }
    synd
}

/// All weight-w Pauli strings on n qubits, ordered by qubit indices then
/// Pauli letter.
pub(crate) fn enumerate_weight(n: usize, weight: usize) -> Vec<PauliString> {
    let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    if weight == 0 || weight > n {
        return out;
    }
    let mut positions: Vec<usize> = (0..weight).collect();
    loop {
        let mut assignment = vec![0usize; weight];
        loop {
            let mut ops = vec![Pauli::I; n];
            for (slot, &pos) in positions.iter().enumerate() {
                ops[pos] = paulis[assignment[slot]];
            }
            out.push(PauliString(ops));
            let mut advanced = false;
            for slot in (0..weight).rev() {
                if assignment[slot] < 2 {
                    assignment[slot] += 1;
                    advanced = true;
                    break;
                }
                assignment[slot] = 0;
            }
            if !advanced {
                break;
            }
        }
        let mut advanced = false;
        for slot in (0..weight).rev() {
            if positions[slot] < n - (weight - slot) {
                positions[slot] += 1;
                for later in slot + 1..weight {
                    positions[later] = positions[later - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    out
}

fn recovery_kraus(
    n: usize,
    generators: &[PauliString],
    table: &BTreeMap<u16, PauliString>,
) -> Vec<ComplexMatrix> {
    let d = 1usize << n;
    let num_syndromes = 1usize << generators.len();
    let gen_matrices: Vec<ComplexMatrix> = generators.iter().map(|g| g.to_matrix()).collect();
    let mut kraus = Vec::with_capacity(num_syndromes);
    for synd in 0..num_syndromes as u16 {
        let mut projector = ComplexMatrix::identity(d);
        for (i, g) in gen_matrices.iter().enumerate() {
            let sign = if synd & (1 << i) != 0 { -1.0 } else { 1.0 };
            let mut half = ComplexMatrix::identity(d);
            half.add_scaled_in_place(g, C64::new(sign, 0.0));
            projector = projector.mul(&half.scale(C64::new(0.5, 0.0)));
        }
        let correction = table
            .get(&synd)
            .cloned()
            .unwrap_or_else(|| PauliString::identity(n));
        kraus.push(correction.to_matrix().mul(&projector));
    }
    kraus
}

fn apply_kraus(n: usize, kraus: &[ComplexMatrix], rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.num_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "recovery map acts on {n} qubits, state has {}",
            rho.num_qubits()
        )));
    }
    let d = 1usize << n;
    let mut out = ComplexMatrix::zeros(d, d);
    for k in kraus {
        let term = k.mul(rho.matrix()).mul(&k.dagger());
        out.add_scaled_in_place(&term, ONE);
    }
    Ok(DensityMatrix::from_matrix_unchecked(n, out))
}

/// 3-qubit repetition code: |0_L⟩ = |000⟩, |1_L⟩ = |111⟩ with stabilizers
/// Z1Z2, Z2Z3.
pub fn three_qubit_code() -> StabilizerCode {
    StabilizerCode::build(
        "3qc",
        vec![
            PauliString::parse("ZZI").unwrap(),
            PauliString::parse("IZZ").unwrap(),
        ],
        PauliString::parse("XXX").unwrap(),
        PauliString::parse("ZZZ").unwrap(),
    )
    .expect("3-qubit code construction")
}

/// Alternative decoder for the 3-qubit code: each nontrivial syndrome is
/// corrected with the complementary two-qubit flip, which is optimal when
/// bit-flip errors bunch (η above the critical correlation strength).
pub fn three_qubit_alternative_table() -> BTreeMap<u16, PauliString> {
    let mut table = BTreeMap::new();
    table.insert(0u16, PauliString::identity(3));
    // Syndrome bit 0 ⇔ anticommutes with Z1Z2, bit 1 ⇔ with Z2Z3.
    table.insert(0b01, PauliString::parse("IXX").unwrap()); // X1 ↦ X2X3
    table.insert(0b11, PauliString::parse("XIX").unwrap()); // X2 ↦ X1X3
    table.insert(0b10, PauliString::parse("XXI").unwrap()); // X3 ↦ X1X2
    table
}

/// 5-qubit perfect code generated by XZZXI and its cyclic shifts.
pub fn five_qubit_code() -> StabilizerCode {
    StabilizerCode::build(
        "5qc",
        vec![
            PauliString::parse("XZZXI").unwrap(),
            PauliString::parse("IXZZX").unwrap(),
            PauliString::parse("XIXZZ").unwrap(),
            PauliString::parse("ZXIXZ").unwrap(),
        ],
        PauliString::parse("XXXXX").unwrap(),
        PauliString::parse("ZZZZZ").unwrap(),
    )
    .expect("5-qubit code construction")
}

/// Distance-2 erasure code on four qubits with
/// |0_L⟩ = (|0000⟩+|1111⟩)/√2 and |1_L⟩ = (|0011⟩+|1100⟩)/√2; every
/// single-qubit marginal of a logical state is maximally mixed, so any
/// single erasure is correctable.
pub fn four_qubit_erasure_code() -> StabilizerCode {
    StabilizerCode::build(
        "4qec",
        vec![
            PauliString::parse("XXXX").unwrap(),
            PauliString::parse("ZZZZ").unwrap(),
            PauliString::parse("ZZII").unwrap(),
        ],
        PauliString::parse("XXII").unwrap(),
        PauliString::parse("IZZI").unwrap(),
    )
    .expect("4-qubit erasure code construction")
}

/// Looks up a code by its CLI name.
pub fn code_by_name(name: &str) -> Result<StabilizerCode> {
    match name {
        "3qc" => Ok(three_qubit_code()),
        "4qec" => Ok(four_qubit_erasure_code()),
        "5qc" => Ok(five_qubit_code()),
        other => Err(Error::InvalidArgument(format!("unknown code '{other}'"))),
    }
}

/// |ψ_L⟩ = cos(θ/2)|0_L⟩ + e^{iφ} sin(θ/2)|1_L⟩.
pub fn logical_state(code: &StabilizerCode, point: LogicalPoint) -> PureState {
    let c0 = C64::new((point.theta / 2.0).cos(), 0.0);
    let c1 = C64::from_polar((point.theta / 2.0).sin(), point.phi);
    let amps: Vec<C64> = code
        .basis0
        .amplitudes()
        .iter()
        .zip(code.basis1.amplitudes())
        .map(|(a, b)| c0 * a + c1 * b)
        .collect();
    PureState::new(code.n, amps).expect("superposition of orthonormal basis states")
}

/// Uniform point on the Bloch sphere: cos θ ~ U[−1, 1], φ ~ U[0, 2π).
pub fn sample_bloch_uniform<R: Rng + ?Sized>(rng: &mut R) -> LogicalPoint {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
    LogicalPoint {
        theta: cos_theta.clamp(-1.0, 1.0).acos(),
        phi,
    }
}

/// The six logical eigenstates |0_L⟩, |1_L⟩, |±_L⟩, |±'_L⟩ of Z_L, X_L, Y_L.
pub fn cardinal_logical_states(code: &StabilizerCode) -> Vec<PureState> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let points = [
        (0.0, 0.0),                   // |0_L⟩
        (PI, 0.0),                    // |1_L⟩
        (FRAC_PI_2, 0.0),             // |+_L⟩
        (FRAC_PI_2, PI),              // |−_L⟩
        (FRAC_PI_2, FRAC_PI_2),       // |+'_L⟩ (Y_L = +1)
        (FRAC_PI_2, 3.0 * FRAC_PI_2), // |−'_L⟩ (Y_L = −1)
    ];
    points
        .iter()
        .map(|&(theta, phi)| logical_state(code, LogicalPoint { theta, phi }))
        .collect()
}

/// Syndrome-projective recovery Σ_b M_b ρ M_b† with M_b = C_b Π_b.
pub fn perfect_recovery(code: &StabilizerCode, rho: &DensityMatrix) -> Result<DensityMatrix> {
    apply_kraus(code.n, &code.recovery_kraus, rho)
}

/// Closed forms for the 3-qubit code under independent bit flips: the
/// logical flip rate p_L = 3p²(1−p) + p³ and the Bloch-averaged fidelity
/// 1 − (2/3)p_L of recovered states.
pub fn analytic_3qc(p: f64) -> (f64, f64) {
    let p_l = 3.0 * p * p * (1.0 - p) + p * p * p;
    (p_l, 1.0 - 2.0 / 3.0 * p_l)
}
