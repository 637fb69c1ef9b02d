//! Quantum process tomography: chi-matrix extraction in the normalized
//! Pauli operator basis, hand-specified reference channels, and channel
//! distance metrics.
//!
//! Channels are probed exactly on the matrix units |j⟩⟨k| (via linear
//! combinations of four physical probe states), assembled into the Choi
//! matrix, and rotated into the Pauli chi representation. Rectangular
//! channels (different input and output register sizes) use a generalized
//! orthonormal basis built from Paulis on the smaller register tensored
//! with computational bras/kets on the remaining qubits.

use crate::codes::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{
    fidelity, hermitian_eigen, C64, ComplexMatrix, DensityMatrix, PureState, ONE, ZERO,
};

/// Chi matrix of a channel over the (possibly rectangular) normalized Pauli
/// basis.
#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    pub n_in: usize,
    pub n_out: usize,
    pub chi: ComplexMatrix,
}

/// The orthonormal operator basis used for chi matrices.
///
/// Square case: E_i = P_i/√(2^n) with P_i ∈ {I,X,Y,Z}^⊗n in lexicographic
/// order. Rectangular case with n_out < n_in (compression): E_{(r,b)} =
/// (P_r ⊗ ⟨b|)/√(2^{n_out}); with n_out > n_in (re-encoding): E_{(b,r)} =
/// (|b⟩ ⊗ P_r)/√(2^{n_in}).
pub fn operator_basis(n_in: usize, n_out: usize) -> Vec<ComplexMatrix> {
    let d_in = 1usize << n_in;
    let d_out = 1usize << n_out;
    let small = n_in.min(n_out);
    let d_small = 1usize << small;
    let norm = C64::new(1.0 / (d_small as f64).sqrt(), 0.0);
    let paulis: Vec<ComplexMatrix> = all_pauli_strings(small)
        .into_iter()
        .map(|p| p.to_matrix().scale(norm))
        .collect();
    let mut basis = Vec::with_capacity(d_in * d_out);
    if n_in == n_out {
        return paulis;
    }
    if n_out < n_in {
        let d_aux = d_in / d_out;
        for p in &paulis {
            for b in 0..d_aux {
                // (P ⊗ ⟨b|): shape d_out × (d_out·d_aux).
                let mut e = ComplexMatrix::zeros(d_out, d_in);
                for r in 0..d_out {
                    for c in 0..d_out {
                        e.set(r, c * d_aux + b, p.get(r, c));
                    }
                }
                basis.push(e);
            }
        }
    } else {
        let d_aux = d_out / d_in;
        for b in 0..d_aux {
            for p in &paulis {
                // (|b⟩ ⊗ P): shape (d_aux·d_in) × d_in.
                let mut e = ComplexMatrix::zeros(d_out, d_in);
                for r in 0..d_in {
                    for c in 0..d_in {
                        e.set(b * d_in + r, c, p.get(r, c));
                    }
                }
                basis.push(e);
            }
        }
    }
    basis
}

/// All n-qubit Pauli strings in lexicographic order (I < X < Y < Z), the
/// first qubit being the most significant digit.
pub fn all_pauli_strings(n: usize) -> Vec<PauliString> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let count = 4usize.pow(n as u32);
    (0..count)
        .map(|mut idx| {
            let mut ops = vec![Pauli::I; n];
            for q in (0..n).rev() {
                ops[q] = letters[idx % 4];
                idx /= 4;
            }
            PauliString(ops)
        })
        .collect()
}

/// Applies a channel closure to the matrix unit |j⟩⟨k| through four
/// physical probe states.
fn channel_on_unit<F>(apply: &F, n_in: usize, j: usize, k: usize) -> Result<ComplexMatrix>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    let d = 1usize << n_in;
    if j == k {
        return Ok(apply(&DensityMatrix::basis_state(n_in, j))?.matrix().clone());
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = vec![ZERO; d];
    plus[j] = C64::new(h, 0.0);
    plus[k] = C64::new(h, 0.0);
    let mut plus_i = vec![ZERO; d];
    plus_i[j] = C64::new(h, 0.0);
    plus_i[k] = C64::new(0.0, h);
    let e_plus = apply(&PureState::new(n_in, plus)?.to_density())?;
    let e_plus_i = apply(&PureState::new(n_in, plus_i)?.to_density())?;
    let e_j = apply(&DensityMatrix::basis_state(n_in, j))?;
    let e_k = apply(&DensityMatrix::basis_state(n_in, k))?;
    // |j⟩⟨k| = P₊ + iP₊ᵢ − (1+i)/2 (|j⟩⟨j| + |k⟩⟨k|)
    let mut out = e_plus.matrix().clone();
    out.add_scaled_in_place(e_plus_i.matrix(), C64::new(0.0, 1.0));
    let half = C64::new(0.5, 0.5);
    out.add_scaled_in_place(e_j.matrix(), -half);
    out.add_scaled_in_place(e_k.matrix(), -half);
    Ok(out)
}

/// Choi matrix Σ_{jk} |j⟩⟨k| ⊗ Q(|j⟩⟨k|).
pub fn choi_matrix<F>(apply: &F, n_in: usize, n_out: usize) -> Result<ComplexMatrix>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    let d_in = 1usize << n_in;
    let d_out = 1usize << n_out;
    let mut choi = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for j in 0..d_in {
        for k in 0..d_in {
            let block = channel_on_unit(apply, n_in, j, k)?;
            if block.rows() != d_out {
                return Err(Error::DimensionMismatch(format!(
                    "channel produced {} rows, expected {d_out}",
                    block.rows()
                )));
            }
            for r in 0..d_out {
                for c in 0..d_out {
                    choi.set(j * d_out + r, k * d_out + c, block.get(r, c));
                }
            }
        }
    }
    Ok(choi)
}

fn vectorized_basis(basis: &[ComplexMatrix], d_in: usize, d_out: usize) -> ComplexMatrix {
    // Column m is the vectorization v_m[(j, r)] = E_m[r, j].
    let dim = d_in * d_out;
    let mut v = ComplexMatrix::zeros(dim, basis.len());
    for (m, e) in basis.iter().enumerate() {
        for j in 0..d_in {
            for r in 0..d_out {
                v.set(j * d_out + r, m, e.get(r, j));
            }
        }
    }
    v
}

fn chi_from_choi(
    choi: &ComplexMatrix,
    basis: &[ComplexMatrix],
    d_in: usize,
    d_out: usize,
) -> ComplexMatrix {
    let v = vectorized_basis(basis, d_in, d_out);
    v.dagger().mul(&choi.mul(&v))
}

fn choi_from_chi(
    chi: &ComplexMatrix,
    basis: &[ComplexMatrix],
    d_in: usize,
    d_out: usize,
) -> ComplexMatrix {
    let v = vectorized_basis(basis, d_in, d_out);
    v.mul(&chi.mul(&v.dagger()))
}

/// Extracts the chi matrix of a linear CPTP channel by exact probing; the
/// reconstruction is cross-checked against direct applications and a
/// mismatch (e.g. a non-linear channel) is reported as a consistency error.
pub fn chi_matrix<F>(apply: F, n_in: usize, n_out: usize) -> Result<ProcessMatrix>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    let choi = choi_matrix(&apply, n_in, n_out)?;
    let basis = operator_basis(n_in, n_out);
    let d_in = 1usize << n_in;
    let d_out = 1usize << n_out;
    let chi = chi_from_choi(&choi, &basis, d_in, d_out);
    let process = ProcessMatrix { n_in, n_out, chi };
    // Consistency: the reconstruction must reproduce the channel on states
    // outside the probe set.
    let mut check_states = vec![DensityMatrix::maximally_mixed(n_in)];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; d_in];
    amps[0] = C64::new(h, 0.0);
    amps[d_in - 1] = C64::new(0.0, h);
    check_states.push(PureState::new(n_in, amps)?.to_density());
    for rho in &check_states {
        let direct = apply(rho)?;
        let rebuilt = reconstruct(&process, rho)?;
        if direct.matrix().max_abs_diff(rebuilt.matrix()) > 1e-8 {
            return Err(Error::ChannelConsistency(
                "chi reconstruction deviates from direct channel application".into(),
            ));
        }
    }
    Ok(process)
}

/// Applies the channel encoded by a chi matrix: Σ χ_{mn} E_m ρ E_n†.
pub fn reconstruct(process: &ProcessMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.num_qubits() != process.n_in {
        return Err(Error::DimensionMismatch(format!(
            "chi matrix expects {} input qubits, got {}",
            process.n_in,
            rho.num_qubits()
        )));
    }
    let basis = operator_basis(process.n_in, process.n_out);
    let d_out = 1usize << process.n_out;
    // B_n = Σ_m χ_{mn} E_m ρ, then out = Σ_n B_n E_n†.
    let applied: Vec<ComplexMatrix> = basis.iter().map(|e| e.mul(rho.matrix())).collect();
    let mut out = ComplexMatrix::zeros(d_out, d_out);
    for (n_idx, e_n) in basis.iter().enumerate() {
        let mut b = ComplexMatrix::zeros(d_out, 1 << process.n_in);
        for (m_idx, a) in applied.iter().enumerate() {
            let coeff = process.chi.get(m_idx, n_idx);
            if coeff != ZERO {
                b.add_scaled_in_place(a, coeff);
            }
        }
        let term = b.mul(&e_n.dagger());
        out.add_scaled_in_place(&term, ONE);
    }
    Ok(DensityMatrix::from_matrix_unchecked(process.n_out, out))
}

impl ProcessMatrix {
    /// Max-abs deviation of Σ_{ij} χ_{ij} E_j†E_i from the identity
    /// (trace-preservation constraint).
    pub fn trace_preservation_deviation(&self) -> f64 {
        let basis = operator_basis(self.n_in, self.n_out);
        let d_in = 1usize << self.n_in;
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for (i, e_i) in basis.iter().enumerate() {
            for (j, e_j) in basis.iter().enumerate() {
                let coeff = self.chi.get(i, j);
                if coeff != ZERO {
                    sum.add_scaled_in_place(&e_j.dagger().mul(e_i), coeff);
                }
            }
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d_in))
    }

    /// Smallest eigenvalue of the chi matrix (complete positivity check).
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eigen(&self.chi.hermitize());
        vals.first().copied().unwrap_or(0.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.chi.is_hermitian(tol)
    }
}

/// Chi matrix of a Kraus map given explicitly.
pub fn chi_of_kraus(ops: &[ComplexMatrix], n_in: usize, n_out: usize) -> Result<ProcessMatrix> {
    let d_out = 1usize << n_out;
    let apply = |rho: &DensityMatrix| -> Result<DensityMatrix> {
        let mut out = ComplexMatrix::zeros(d_out, d_out);
        for k in ops {
            out.add_scaled_in_place(&k.mul(rho.matrix()).mul(&k.dagger()), ONE);
        }
        Ok(DensityMatrix::from_matrix_unchecked(n_out, out))
    };
    chi_matrix(apply, n_in, n_out)
}

fn ket_bra_sum(n_out: usize, n_in: usize, terms: &[(usize, usize)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(1 << n_out, 1 << n_in);
    for &(ket, bra) in terms {
        m.set(ket, bra, ONE);
    }
    m
}

/// Kraus operators of the 3-qubit-code recovery map (projective syndrome
/// extraction followed by the majority correction).
pub fn reference_recovery_kraus() -> Vec<ComplexMatrix> {
    vec![
        ket_bra_sum(3, 3, &[(0b000, 0b000), (0b111, 0b111)]),
        ket_bra_sum(3, 3, &[(0b000, 0b001), (0b111, 0b110)]),
        ket_bra_sum(3, 3, &[(0b000, 0b100), (0b111, 0b011)]),
        ket_bra_sum(3, 3, &[(0b000, 0b010), (0b111, 0b101)]),
    ]
}

/// Kraus operators of the hand-specified compressing encoder (corrects a
/// single bit flip while mapping the codespace to one qubit).
pub fn reference_encoder_kraus() -> Vec<ComplexMatrix> {
    vec![
        ket_bra_sum(1, 3, &[(0, 0b000), (1, 0b111)]),
        ket_bra_sum(1, 3, &[(0, 0b001), (1, 0b110)]),
        ket_bra_sum(1, 3, &[(0, 0b100), (1, 0b011)]),
        ket_bra_sum(1, 3, &[(0, 0b010), (1, 0b101)]),
    ]
}

/// The single Kraus operator of the re-encoding decoder |000⟩⟨0| + |111⟩⟨1|.
pub fn reference_decoder_kraus() -> Vec<ComplexMatrix> {
    vec![ket_bra_sum(3, 1, &[(0b000, 0), (0b111, 1)])]
}

pub fn reference_recovery_chi() -> Result<ProcessMatrix> {
    chi_of_kraus(&reference_recovery_kraus(), 3, 3)
}

pub fn reference_encoder_chi() -> Result<ProcessMatrix> {
    chi_of_kraus(&reference_encoder_kraus(), 3, 1)
}

pub fn reference_decoder_chi() -> Result<ProcessMatrix> {
    chi_of_kraus(&reference_decoder_kraus(), 1, 3)
}

/// Channel distance: max-abs elementwise chi difference (primary metric)
/// and the fidelity of the normalized Choi states (reported alongside).
#[derive(Debug, Clone, Copy)]
pub struct ChannelDistance {
    pub max_abs: f64,
    pub choi_fidelity: f64,
}

pub fn channel_distance(a: &ProcessMatrix, b: &ProcessMatrix) -> Result<ChannelDistance> {
    if a.n_in != b.n_in || a.n_out != b.n_out {
        return Err(Error::DimensionMismatch(
            "channel distance of differently shaped channels".into(),
        ));
    }
    let max_abs = a.chi.max_abs_diff(&b.chi);
    let basis = operator_basis(a.n_in, a.n_out);
    let d_in = 1usize << a.n_in;
    let d_out = 1usize << a.n_out;
    let scale = C64::new(1.0 / d_in as f64, 0.0);
    let choi_a = choi_from_chi(&a.chi, &basis, d_in, d_out).scale(scale);
    let choi_b = choi_from_chi(&b.chi, &basis, d_in, d_out).scale(scale);
    let n_total = a.n_in + a.n_out;
    let rho_a = DensityMatrix::from_matrix_unchecked(n_total, choi_a.hermitize());
    let rho_b = DensityMatrix::from_matrix_unchecked(n_total, choi_b.hermitize());
    let choi_fidelity = fidelity(&rho_a, &rho_b)?;
    Ok(ChannelDistance {
        max_abs,
        choi_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{cardinal_logical_states, three_qubit_code};
    use crate::linalg::{haar_random_unitary, pauli_x};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_channel(n: usize) -> impl Fn(&DensityMatrix) -> Result<DensityMatrix> {
        move |rho: &DensityMatrix| {
            assert_eq!(rho.num_qubits(), n);
            Ok(rho.clone())
        }
    }

    #[test]
    fn identity_chi_has_single_entry() {
        for n in 1..=2 {
            let process = chi_matrix(identity_channel(n), n, n).unwrap();
            let d = 1usize << n;
            for r in 0..process.chi.rows() {
                for c in 0..process.chi.cols() {
                    let expect = if r == 0 && c == 0 {
                        C64::new(d as f64, 0.0)
                    } else {
                        ZERO
                    };
                    assert!(
                        (process.chi.get(r, c) - expect).norm() < 1e-10,
                        "chi[{r},{c}] = {}",
                        process.chi.get(r, c)
                    );
                }
            }
        }
    }

    #[test]
    fn x_gate_chi_has_single_entry() {
        let x = pauli_x();
        let apply = move |rho: &DensityMatrix| {
            Ok(DensityMatrix::from_matrix_unchecked(
                1,
                x.mul(rho.matrix()).mul(&x.dagger()),
            ))
        };
        let process = chi_matrix(apply, 1, 1).unwrap();
        // X is basis index 1 in (I, X, Y, Z) order.
        assert!((process.chi.get(1, 1) - C64::new(2.0, 0.0)).norm() < 1e-10);
        assert!(process.chi.get(0, 0).norm() < 1e-10);
    }

    #[test]
    fn composed_reference_channels_equal_recovery() {
        let enc = reference_encoder_kraus();
        let dec = reference_decoder_kraus();
        let apply = move |rho: &DensityMatrix| -> Result<DensityMatrix> {
            let mut mid = ComplexMatrix::zeros(2, 2);
            for k in &enc {
                mid.add_scaled_in_place(&k.mul(rho.matrix()).mul(&k.dagger()), ONE);
            }
            let mut out = ComplexMatrix::zeros(8, 8);
            for k in &dec {
                out.add_scaled_in_place(&k.mul(&mid).mul(&k.dagger()), ONE);
            }
            Ok(DensityMatrix::from_matrix_unchecked(3, out))
        };
        let composed = chi_matrix(apply, 3, 3).unwrap();
        let recovery = reference_recovery_chi().unwrap();
        let dist = channel_distance(&composed, &recovery).unwrap();
        assert!(dist.max_abs < 1e-10);
        assert!(dist.choi_fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn reference_decoder_and_encoder_examples() {
        let dec = reference_decoder_kraus();
        let zero = DensityMatrix::basis_state(1, 0);
        let mut out = ComplexMatrix::zeros(8, 8);
        for k in &dec {
            out.add_scaled_in_place(&k.mul(zero.matrix()).mul(&k.dagger()), ONE);
        }
        assert!(out.max_abs_diff(DensityMatrix::basis_state(3, 0).matrix()) < 1e-12);

        let enc = reference_encoder_kraus();
        let one_flip = DensityMatrix::basis_state(3, 0b001);
        let mut mid = ComplexMatrix::zeros(2, 2);
        for k in &enc {
            mid.add_scaled_in_place(&k.mul(one_flip.matrix()).mul(&k.dagger()), ONE);
        }
        assert!(mid.max_abs_diff(DensityMatrix::basis_state(1, 0).matrix()) < 1e-12);

        // X₁|+_L⟩ compresses to exactly |+⟩ for the hand-made channel.
        let code = three_qubit_code();
        let plus_l = cardinal_logical_states(&code)[2].clone();
        let x1 = crate::codes::PauliString::parse("XII").unwrap();
        let corrupted = x1.apply_pure(&plus_l).to_density();
        let mut mid2 = ComplexMatrix::zeros(2, 2);
        for k in &enc {
            mid2.add_scaled_in_place(&k.mul(corrupted.matrix()).mul(&k.dagger()), ONE);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(1, vec![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        assert!(mid2.max_abs_diff(plus.to_density().matrix()) < 1e-12);
    }

    fn random_kraus_cptp<R: Rng>(
        n_in: usize,
        n_out: usize,
        count: usize,
        rng: &mut R,
    ) -> Vec<ComplexMatrix> {
        let d_in = 1usize << n_in;
        let d_out = 1usize << n_out;
        let raw: Vec<ComplexMatrix> = (0..count)
            .map(|_| {
                ComplexMatrix::from_fn(d_out, d_in, |_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let mut s = ComplexMatrix::zeros(d_in, d_in);
        for k in &raw {
            s.add_scaled_in_place(&k.dagger().mul(k), ONE);
        }
        // Normalize with S^{-1/2} so Σ K†K = I.
        let (vals, vecs) = hermitian_eigen(&s.hermitize());
        let inv_sqrt = {
            let diag = ComplexMatrix::from_fn(d_in, d_in, |r, c| {
                if r == c {
                    C64::new(1.0 / vals[r].max(1e-12).sqrt(), 0.0)
                } else {
                    ZERO
                }
            });
            vecs.mul(&diag).mul(&vecs.dagger())
        };
        raw.into_iter().map(|k| k.mul(&inv_sqrt)).collect()
    }

    #[test]
    fn chi_round_trip_on_random_cptp_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for &(n_in, n_out) in &[(1usize, 1usize), (2, 2), (2, 1), (1, 2)] {
            let kraus = random_kraus_cptp(n_in, n_out, 3, &mut rng);
            let process = chi_of_kraus(&kraus, n_in, n_out).unwrap();
            assert!(process.is_hermitian(1e-10));
            assert!(process.trace_preservation_deviation() < 1e-8);
            assert!(process.min_eigenvalue() > -1e-9);
            // Round trip on random states.
            for _ in 0..3 {
                let d = 1usize << n_in;
                let g = ComplexMatrix::from_fn(d, d, |_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let m = g.mul(&g.dagger());
                let tr = m.trace().re;
                let rho = DensityMatrix::from_matrix_unchecked(
                    n_in,
                    m.scale(C64::new(1.0 / tr, 0.0)).hermitize(),
                );
                let direct = {
                    let d_out = 1usize << n_out;
                    let mut out = ComplexMatrix::zeros(d_out, d_out);
                    for k in &kraus {
                        out.add_scaled_in_place(&k.mul(rho.matrix()).mul(&k.dagger()), ONE);
                    }
                    out
                };
                let rebuilt = reconstruct(&process, &rho).unwrap();
                assert!(rebuilt.matrix().max_abs_diff(&direct) < 1e-8);
            }
        }
    }

    #[test]
    fn chi_of_unitary_channel_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let u = haar_random_unitary(2, &mut rng);
        let process = chi_of_kraus(&[u.matrix().clone()], 2, 2).unwrap();
        let (vals, _) = hermitian_eigen(&process.chi.hermitize());
        let nonzero = vals.iter().filter(|v| v.abs() > 1e-9).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn channel_distance_identity_vs_x_gate() {
        let id_chi = chi_matrix(identity_channel(1), 1, 1).unwrap();
        let x = pauli_x();
        let x_chi = chi_matrix(
            move |rho: &DensityMatrix| {
                Ok(DensityMatrix::from_matrix_unchecked(
                    1,
                    x.mul(rho.matrix()).mul(&x.dagger()),
                ))
            },
            1,
            1,
        )
        .unwrap();
        let same = channel_distance(&id_chi, &id_chi).unwrap();
        assert!(same.max_abs < 1e-12);
        assert!((same.choi_fidelity - 1.0).abs() < 1e-9);
        let dist = channel_distance(&id_chi, &x_chi).unwrap();
        assert!((dist.max_abs - 2.0).abs() < 1e-10);
        assert!(dist.choi_fidelity < 1e-9);
    }

    #[test]
    fn rectangular_basis_is_orthonormal() {
        for &(n_in, n_out) in &[(3usize, 1usize), (1, 3), (2, 2)] {
            let basis = operator_basis(n_in, n_out);
            assert_eq!(basis.len(), 1 << (n_in + n_out));
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let inner = a.hs_inner(b);
                    let expect = if i == j { ONE } else { ZERO };
                    assert!(
                        (inner - expect).norm() < 1e-12,
                        "({n_in},{n_out}): ⟨E{i}|E{j}⟩ = {inner}"
                    );
                }
            }
        }
    }

    #[test]
    fn nonlinear_channel_rejected() {
        // Purity-dependent mixing is not linear: it agrees with the identity
        // on the pure probe states but deviates on mixed inputs.
        let apply = |rho: &DensityMatrix| -> Result<DensityMatrix> {
            let purity = rho.purity();
            let mut m = rho.matrix().scale(C64::new(purity, 0.0));
            m.add_scaled_in_place(
                DensityMatrix::basis_state(rho.num_qubits(), 0).matrix(),
                C64::new(1.0 - purity, 0.0),
            );
            Ok(DensityMatrix::from_matrix_unchecked(rho.num_qubits(), m))
        };
        assert!(matches!(
            chi_matrix(apply, 1, 1),
            Err(Error::ChannelConsistency(_))
        ));
    }
}
