//! Noise processes as channels on density matrices: bit flip, depolarizing
//! (single- and multi-qubit), spatially correlated bit flip, erasure and
//! collective dephasing.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    apply_unitary, insert_maximally_mixed, partial_trace, pauli_x, pauli_y, pauli_z, C64,
    ComplexMatrix, DensityMatrix, Unitary, ZERO,
};

/// Applies (1−p)ρ + pXρX independently to every listed qubit.
pub fn bit_flip(rho: &DensityMatrix, p: f64, qubits: &[usize]) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "bit flip probability {p} outside [0, 1]"
        )));
    }
    let x = Unitary::from_matrix_unchecked(1, pauli_x());
    let mut out = rho.clone();
    for &q in qubits {
        let flipped = apply_unitary(&out, &x, &[q])?;
        let mut m = out.matrix().scale(C64::new(1.0 - p, 0.0));
        m.add_scaled_in_place(flipped.matrix(), C64::new(p, 0.0));
        out = DensityMatrix::from_matrix_unchecked(rho.num_qubits(), m);
    }
    Ok(out)
}

/// Applies (1−p)ρ + (p/3)(XρX + YρY + ZρZ) independently per listed qubit.
pub fn depolarizing_single(rho: &DensityMatrix, p: f64, qubits: &[usize]) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing probability {p} outside [0, 1]"
        )));
    }
    let paulis = [
        Unitary::from_matrix_unchecked(1, pauli_x()),
        Unitary::from_matrix_unchecked(1, pauli_y()),
        Unitary::from_matrix_unchecked(1, pauli_z()),
    ];
    let mut out = rho.clone();
    for &q in qubits {
        let mut m = out.matrix().scale(C64::new(1.0 - p, 0.0));
        for u in &paulis {
            let conj = apply_unitary(&out, u, &[q])?;
            m.add_scaled_in_place(conj.matrix(), C64::new(p / 3.0, 0.0));
        }
        out = DensityMatrix::from_matrix_unchecked(rho.num_qubits(), m);
    }
    Ok(out)
}

/// m-qubit depolarizing channel on the listed targets: every non-identity
/// Pauli on the targets occurs with probability p_n/(4^m − 1). Implemented in
/// the equivalent identity-mixing form
/// (1 − 4^m p_n/(4^m−1)) ρ + (4^m p_n/(4^m−1)) (Tr_T ρ) ⊗ I/2^m.
pub fn depolarizing_multi(
    rho: &DensityMatrix,
    p_n: f64,
    targets: &[usize],
) -> Result<DensityMatrix> {
    let m = targets.len();
    let four_m = 4f64.powi(m as i32);
    let p_max = 1.0 - 1.0 / four_m;
    if !(0.0..=p_max + 1e-12).contains(&p_n) {
        return Err(Error::InvalidArgument(format!(
            "multi-qubit depolarizing strength {p_n} outside [0, {p_max}]"
        )));
    }
    let gamma = four_m * p_n / (four_m - 1.0);
    let marginal = partial_trace(rho, targets)?;
    let mixed_part = insert_maximally_mixed(&marginal, targets)?;
    let mut out = rho.matrix().scale(C64::new(1.0 - gamma, 0.0));
    out.add_scaled_in_place(mixed_part.matrix(), C64::new(gamma, 0.0));
    Ok(DensityMatrix::from_matrix_unchecked(rho.num_qubits(), out))
}

/// The multi-qubit depolarizing channel is self-adjoint (a uniform mixture of
/// Pauli conjugations); the Heisenberg-picture pullback applies the same map
/// to an arbitrary operator. Used by backpropagation.
pub fn depolarizing_multi_adjoint(
    op: &ComplexMatrix,
    n: usize,
    p_n: f64,
    targets: &[usize],
) -> Result<ComplexMatrix> {
    let m = targets.len();
    let four_m = 4f64.powi(m as i32);
    let gamma = four_m * p_n / (four_m - 1.0);
    let keep: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let reduced = crate::linalg::reduce_to_ordered_subsystem(op, n, &keep)?;
    let grown = insert_maximally_mixed(
        &DensityMatrix::from_matrix_unchecked(keep.len(), reduced),
        targets,
    )?;
    let mut out = op.scale(C64::new(1.0 - gamma, 0.0));
    out.add_scaled_in_place(grown.matrix(), C64::new(gamma, 0.0));
    Ok(out)
}

/// Joint distribution of the 8 symmetric flip patterns on three qubits with
/// marginal flip probability `p` and correlation strength `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedFlipDistribution {
    pub p: f64,
    pub eta: f64,
    /// Probability of the all-identity pattern.
    pub q0: f64,
    /// Probability of each single-flip pattern.
    pub q1: f64,
    /// Probability of each double-flip pattern.
    pub q2: f64,
    /// Probability of the triple-flip pattern.
    pub q3: f64,
}

impl CorrelatedFlipDistribution {
    /// Conditional flip probability Pr(flip on A | B flipped).
    pub fn p_conditional(&self) -> f64 {
        self.eta * self.p / (1.0 - self.p + self.eta * self.p)
    }

    /// Probability of a specific pattern, given as a 3-bit mask.
    pub fn pattern_probability(&self, pattern: u8) -> f64 {
        match pattern.count_ones() {
            0 => self.q0,
            1 => self.q1,
            2 => self.q2,
            _ => self.q3,
        }
    }

    /// All eight (pattern, probability) pairs in mask order.
    pub fn patterns(&self) -> Vec<(u8, f64)> {
        (0u8..8).map(|m| (m, self.pattern_probability(m))).collect()
    }
}

/// Closes the correlated-noise constraints (marginal p, ratio η and the
/// conditional-independence condition) with exchangeability, yielding the
/// geometric family q1 = p(1−p_c)², q2 = p·p_c(1−p_c), q3 = p·p_c² with
/// p_c = ηp/(1−p+ηp).
pub fn correlated_flip_distribution(p: f64, eta: f64) -> Result<CorrelatedFlipDistribution> {
    if !(0.0..1.0).contains(&p) || p == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "flip probability {p} outside (0, 1)"
        )));
    }
    if eta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "correlation strength {eta} must be positive"
        )));
    }
    let p_c = eta * p / (1.0 - p + eta * p);
    let q1 = p * (1.0 - p_c) * (1.0 - p_c);
    let q2 = p * p_c * (1.0 - p_c);
    let q3 = p * p_c * p_c;
    let q0 = 1.0 - 3.0 * q1 - 3.0 * q2 - q3;
    if q0 < 0.0 {
        return Err(Error::InfeasibleParameters(format!(
            "p = {p}, eta = {eta} yield negative no-flip probability {q0}"
        )));
    }
    Ok(CorrelatedFlipDistribution {
        p,
        eta,
        q0,
        q1,
        q2,
        q3,
    })
}

/// Mixture over the eight flip patterns of a three-qubit register.
pub fn correlated_bit_flip(
    rho: &DensityMatrix,
    dist: &CorrelatedFlipDistribution,
) -> Result<DensityMatrix> {
    if rho.num_qubits() != 3 {
        return Err(Error::InvalidArgument(format!(
            "correlated bit flip acts on 3 qubits, got {}",
            rho.num_qubits()
        )));
    }
    let x = Unitary::from_matrix_unchecked(1, pauli_x());
    let mut out = ComplexMatrix::zeros(8, 8);
    for (pattern, prob) in dist.patterns() {
        if prob == 0.0 {
            continue;
        }
        let mut conj = rho.clone();
        for q in 0..3 {
            if pattern & (1 << (2 - q)) != 0 {
                conj = apply_unitary(&conj, &x, &[q])?;
            }
        }
        out.add_scaled_in_place(conj.matrix(), C64::new(prob, 0.0));
    }
    Ok(DensityMatrix::from_matrix_unchecked(3, out))
}

/// Erasure of the listed qubit positions, modeled as a partial trace. The
/// caller records the erased positions for routing.
pub fn erase(rho: &DensityMatrix, positions: &[usize]) -> Result<DensityMatrix> {
    partial_trace(rho, positions)
}

/// Gauss-Hermite discretization of a centered Gaussian over rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingQuadrature {
    pub sigma: f64,
    /// (angle, weight) pairs; weights sum to one and nodes are symmetric
    /// about zero.
    pub nodes: Vec<(f64, f64)>,
}

impl DephasingQuadrature {
    pub const DEFAULT_NODES: usize = 21;

    /// Quadrature for a centered Gaussian with standard deviation `sigma`;
    /// `num_nodes` Gauss-Hermite nodes rescaled by √2·σ.
    pub fn gaussian(sigma: f64, num_nodes: usize) -> Result<Self> {
        if sigma < 0.0 {
            return Err(Error::InvalidArgument("negative sigma".into()));
        }
        if num_nodes == 0 {
            return Err(Error::InvalidArgument("empty quadrature".into()));
        }
        if sigma == 0.0 {
            return Ok(Self {
                sigma,
                nodes: vec![(0.0, 1.0)],
            });
        }
        let (xs, ws) = gauss_hermite(num_nodes);
        let scale = std::f64::consts::SQRT_2 * sigma;
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let nodes = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| (scale * x, w * inv_sqrt_pi))
            .collect();
        Ok(Self { sigma, nodes })
    }

    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}

/// Gauss-Hermite nodes and weights for ∫ e^{−x²} f(x) dx via Golub-Welsch on
/// the Jacobi matrix of the Hermite recurrence.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mu0 = std::f64::consts::PI.sqrt();
    let xs: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let ws: Vec<f64> = order
        .iter()
        .map(|&i| {
            let v0 = eig.eigenvectors[(0, i)];
            mu0 * v0 * v0
        })
        .collect();
    (xs, ws)
}

/// Phase kernel of the collective-dephasing channel for a magnetization
/// difference Δ: Σ_j w_j exp(−i α_j Δ/2).
fn dephasing_kernel(quad: &DephasingQuadrature, delta: i64) -> C64 {
    let mut acc = ZERO;
    for &(alpha, w) in &quad.nodes {
        acc += C64::from_polar(w, -alpha * delta as f64 / 2.0);
    }
    acc
}

fn magnetization(index: usize, n: usize) -> i64 {
    let ones = (index & ((1usize << n) - 1)).count_ones() as i64;
    n as i64 - 2 * ones
}

/// Collective dephasing Σ_j w_j U(α_j) ρ U(α_j)† with
/// U(α) = exp(−i(α/2) Σ_n Z_n). U(α) is diagonal in the computational basis,
/// so the channel reduces to an elementwise phase-damping kernel.
pub fn collective_dephasing(
    rho: &DensityMatrix,
    quad: &DephasingQuadrature,
) -> Result<DensityMatrix> {
    if quad.nodes.is_empty() {
        return Err(Error::InvalidArgument("empty quadrature".into()));
    }
    Ok(DensityMatrix::from_matrix_unchecked(
        rho.num_qubits(),
        dephase_matrix(rho.matrix(), rho.num_qubits(), quad, false),
    ))
}

/// Heisenberg-picture pullback of collective dephasing (inverse rotations).
pub fn collective_dephasing_adjoint(
    op: &ComplexMatrix,
    n: usize,
    quad: &DephasingQuadrature,
) -> ComplexMatrix {
    dephase_matrix(op, n, quad, true)
}

fn dephase_matrix(
    m: &ComplexMatrix,
    n: usize,
    quad: &DephasingQuadrature,
    adjoint: bool,
) -> ComplexMatrix {
    let d = 1usize << n;
    let mut kernel = vec![ZERO; 4 * n + 1];
    for (i, k) in kernel.iter_mut().enumerate() {
        let delta = i as i64 - 2 * n as i64;
        let val = dephasing_kernel(quad, delta);
        *k = if adjoint { val.conj() } else { val };
    }
    let mags: Vec<i64> = (0..d).map(|i| magnetization(i, n)).collect();
    ComplexMatrix::from_fn(d, d, |r, c| {
        let delta = mags[r] - mags[c];
        m.get(r, c) * kernel[(delta + 2 * n as i64) as usize]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, PureState, ONE};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    fn random_density<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
        let d = 1usize << n;
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = g.mul(&g.dagger());
        let tr = m.trace().re;
        DensityMatrix::from_matrix_unchecked(n, m.scale(c(1.0 / tr, 0.0)).hermitize())
    }

    #[test]
    fn bit_flip_zero_probability_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(2, &mut rng);
        let out = bit_flip(&rho, 0.0, &[0, 1]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn bit_flip_half_fully_mixes_populations() {
        let rho = DensityMatrix::basis_state(1, 0);
        let out = bit_flip(&rho, 0.5, &[0]).unwrap();
        assert!(out
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(1).matrix())
            < 1e-15);
    }

    #[test]
    fn bit_flip_three_qubit_no_error_weight() {
        let rho = DensityMatrix::basis_state(3, 0);
        let out = bit_flip(&rho, 0.1, &[0, 1, 2]).unwrap();
        assert!((out.matrix().get(0, 0).re - 0.729).abs() < 1e-12);
    }

    #[test]
    fn bit_flip_rejects_bad_probability() {
        let rho = DensityMatrix::basis_state(1, 0);
        assert!(bit_flip(&rho, 1.5, &[0]).is_err());
    }

    #[test]
    fn depolarizing_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(2, &mut rng);
        let out = depolarizing_single(&rho, 0.0, &[0, 1]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_three_quarters_fully_mixes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(1, &mut rng);
        let out = depolarizing_single(&rho, 0.75, &[0]).unwrap();
        assert!(out
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(1).matrix())
            < 1e-12);
    }

    #[test]
    fn depolarizing_matches_kraus_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(2, &mut rng);
        let p = 0.23;
        let out = depolarizing_single(&rho, p, &[0, 1]).unwrap();
        // Oracle: explicit 16-term Kraus expansion of the two independent
        // single-qubit channels.
        let paulis = [crate::linalg::pauli_i(), pauli_x(), pauli_y(), pauli_z()];
        let weight = |i: usize| if i == 0 { 1.0 - p } else { p / 3.0 };
        let mut oracle = ComplexMatrix::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                let k = kron(&paulis[a], &paulis[b]).unwrap();
                let term = k.mul(rho.matrix()).mul(&k.dagger());
                oracle.add_scaled_in_place(&term, c(weight(a) * weight(b), 0.0));
            }
        }
        assert!(out.matrix().max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn depolarizing_multi_m1_matches_single_qubit_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(2, &mut rng);
        let p_n = 0.2;
        let multi = depolarizing_multi(&rho, p_n, &[1]).unwrap();
        let single = depolarizing_single(&rho, p_n, &[1]).unwrap();
        assert!(multi.matrix().max_abs_diff(single.matrix()) < 1e-12);
    }

    #[test]
    fn depolarizing_multi_identity_mixing_coefficient_m4() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(4, &mut rng);
        let p_n = 0.03;
        let out = depolarizing_multi(&rho, p_n, &[0, 1, 2, 3]).unwrap();
        let gamma = 256.0 * p_n / 255.0;
        let mut expect = rho.matrix().scale(c(1.0 - gamma, 0.0));
        expect.add_scaled_in_place(DensityMatrix::maximally_mixed(4).matrix(), c(gamma, 0.0));
        assert!(out.matrix().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn depolarizing_multi_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_density(3, &mut rng);
        let out = depolarizing_multi(&rho, 0.0, &[0, 2]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_multi_endpoint_fully_mixes_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_density(3, &mut rng);
        let m = 2usize;
        let p_max = 1.0 - 1.0 / 4f64.powi(m as i32);
        let out = depolarizing_multi(&rho, p_max, &[0, 1]).unwrap();
        let marginal = partial_trace(&rho, &[0, 1]).unwrap();
        let expect = insert_maximally_mixed(&marginal, &[0, 1]).unwrap();
        assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-12);
    }

    #[test]
    fn depolarizing_multi_rejects_out_of_range() {
        let rho = DensityMatrix::basis_state(2, 0);
        assert!(depolarizing_multi(&rho, 0.95, &[0, 1]).is_err());
    }

    #[test]
    fn correlated_distribution_uncorrelated_case() {
        let p = 0.2;
        let dist = correlated_flip_distribution(p, 1.0).unwrap();
        assert!((dist.q0 - (1.0 - p).powi(3)).abs() < 1e-14);
        assert!((dist.q1 - p * (1.0 - p) * (1.0 - p)).abs() < 1e-14);
        assert!((dist.q2 - p * p * (1.0 - p)).abs() < 1e-14);
        assert!((dist.q3 - p * p * p).abs() < 1e-14);
        assert!((dist.q0 - 0.512).abs() < 1e-14);
    }

    #[test]
    fn correlated_distribution_conditional_probability() {
        let dist = correlated_flip_distribution(0.2, 4.0).unwrap();
        assert!((dist.p_conditional() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn correlated_distribution_invariants() {
        for &(p, eta) in &[(0.2, 1.0), (0.2, 4.0), (0.2, 16.0), (0.05, 0.5), (0.3, 2.0)] {
            let d = correlated_flip_distribution(p, eta).unwrap();
            assert!((d.q0 + 3.0 * d.q1 + 3.0 * d.q2 + d.q3 - 1.0).abs() < 1e-12);
            assert!((d.q1 + 2.0 * d.q2 + d.q3 - p).abs() < 1e-12);
            assert!(d.q0 >= 0.0 && d.q1 >= 0.0 && d.q2 >= 0.0 && d.q3 >= 0.0);
            // Conditional-independence constraint: Pr(A | B, C flipped)
            // equals Pr(A | B flipped, C not flipped).
            let lhs = d.q3 / (d.q2 + d.q3);
            let rhs = d.q2 / (d.q1 + d.q2);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn correlated_distribution_infeasible_pair_rejected() {
        assert!(correlated_flip_distribution(0.9, 0.01).is_err());
    }

    #[test]
    fn correlated_channel_identity_when_q0_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density(3, &mut rng);
        let dist = CorrelatedFlipDistribution {
            p: 0.0,
            eta: 1.0,
            q0: 1.0,
            q1: 0.0,
            q2: 0.0,
            q3: 0.0,
        };
        let out = correlated_bit_flip(&rho, &dist).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn correlated_channel_eta_one_matches_product_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_density(3, &mut rng);
        let p = 0.17;
        let dist = correlated_flip_distribution(p, 1.0).unwrap();
        let out = correlated_bit_flip(&rho, &dist).unwrap();
        let oracle = bit_flip(&rho, p, &[0, 1, 2]).unwrap();
        assert!(out.matrix().max_abs_diff(oracle.matrix()) < 1e-12);
    }

    #[test]
    fn correlated_channel_weight_crossover_at_eta_c() {
        let p = 0.2;
        let eta_c = (1.0 - p) / p;
        let below = correlated_flip_distribution(p, eta_c * 0.5).unwrap();
        assert!(3.0 * below.q1 > 3.0 * below.q2);
        let above = correlated_flip_distribution(p, eta_c * 2.0).unwrap();
        assert!(3.0 * above.q2 > 3.0 * above.q1);
        let at = correlated_flip_distribution(p, eta_c).unwrap();
        assert!((at.q1 - at.q2).abs() < 1e-14);
    }

    #[test]
    fn correlated_channel_exchangeable_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(3, &mut rng);
        let dist = correlated_flip_distribution(0.2, 6.0).unwrap();
        let out = correlated_bit_flip(&rho, &dist).unwrap();
        // Permute qubits, apply, permute back: must agree.
        let perm = [1usize, 2, 0];
        let permuted = DensityMatrix::from_matrix_unchecked(
            3,
            crate::linalg::permute_qubits(rho.matrix(), &perm).unwrap(),
        );
        let out_permuted = correlated_bit_flip(&permuted, &dist).unwrap();
        let inv = [2usize, 0, 1];
        let back = crate::linalg::permute_qubits(out_permuted.matrix(), &inv).unwrap();
        assert!(back.max_abs_diff(out.matrix()) < 1e-12);
    }

    #[test]
    fn correlated_channel_rejects_wrong_register() {
        let rho = DensityMatrix::basis_state(2, 0);
        let dist = correlated_flip_distribution(0.2, 1.0).unwrap();
        assert!(correlated_bit_flip(&rho, &dist).is_err());
    }

    #[test]
    fn erase_no_positions_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = random_density(2, &mut rng);
        let out = erase(&rho, &[]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn erase_bell_qubit_gives_maximally_mixed() {
        let bell = PureState::normalized(2, vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let out = erase(&bell.to_density(), &[0]).unwrap();
        assert!(out
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(1).matrix())
            < 1e-12);
    }

    #[test]
    fn dephasing_zero_sigma_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = random_density(2, &mut rng);
        let quad = DephasingQuadrature::gaussian(0.0, 21).unwrap();
        let out = collective_dephasing(&rho, &quad).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-14);
    }

    #[test]
    fn dephasing_preserves_zero_magnetization_subspace() {
        // (|01⟩ + |10⟩)/√2 lives in the zero-magnetization eigenspace.
        let psi = PureState::normalized(2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let quad = DephasingQuadrature::gaussian(1.0, 21).unwrap();
        let out = collective_dephasing(&psi.to_density(), &quad).unwrap();
        assert!(out.matrix().max_abs_diff(psi.to_density().matrix()) < 1e-12);
    }

    #[test]
    fn dephasing_plus_state_coherence_decay() {
        let plus = PureState::normalized(1, vec![ONE, ONE]).unwrap();
        let quad = DephasingQuadrature::gaussian(1.0, 21).unwrap();
        let out = collective_dephasing(&plus.to_density(), &quad).unwrap();
        // Off-diagonal scales by the Gaussian characteristic function e^{−σ²/2}.
        let expect = (-0.5f64).exp() * 0.5;
        assert!((out.matrix().get(0, 1).re - expect).abs() < 1e-9);
        assert!(out.matrix().get(0, 1).im.abs() < 1e-9);
    }

    #[test]
    fn dephasing_quadrature_invariants() {
        let quad = DephasingQuadrature::gaussian(1.3, 21).unwrap();
        assert!((quad.weight_sum() - 1.0).abs() < 1e-10);
        for (alpha, _) in &quad.nodes {
            assert!(
                quad.nodes.iter().any(|(a2, _)| (a2 + alpha).abs() < 1e-9),
                "nodes must be symmetric about zero"
            );
        }
    }

    #[test]
    fn dephasing_rejects_empty_quadrature() {
        let rho = DensityMatrix::basis_state(1, 0);
        let quad = DephasingQuadrature {
            sigma: 1.0,
            nodes: vec![],
        };
        assert!(collective_dephasing(&rho, &quad).is_err());
    }

    #[test]
    fn channels_are_trace_and_positivity_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let quad = DephasingQuadrature::gaussian(1.0, 21).unwrap();
        for _ in 0..3 {
            let rho = random_density(3, &mut rng);
            let dist = correlated_flip_distribution(0.2, 5.0).unwrap();
            let outs = [
                bit_flip(&rho, 0.3, &[0, 1, 2]).unwrap(),
                depolarizing_single(&rho, 0.2, &[0, 2]).unwrap(),
                depolarizing_multi(&rho, 0.1, &[1, 2]).unwrap(),
                correlated_bit_flip(&rho, &dist).unwrap(),
                collective_dephasing(&rho, &quad).unwrap(),
            ];
            for out in &outs {
                assert!((out.trace().re - 1.0).abs() < 1e-10);
                out.validate_full().unwrap();
            }
        }
    }

    #[test]
    fn adjoint_channels_satisfy_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let rho = random_density(3, &mut rng);
        let sigma = random_density(3, &mut rng);
        let quad = DephasingQuadrature::gaussian(0.8, 21).unwrap();
        // Tr[σ† N(ρ)] = Tr[N*(σ)† ρ]
        let lhs = sigma
            .matrix()
            .hs_inner(collective_dephasing(&rho, &quad).unwrap().matrix());
        let pulled = collective_dephasing_adjoint(sigma.matrix(), 3, &quad);
        let rhs = pulled.hs_inner(rho.matrix());
        assert!((lhs - rhs).norm() < 1e-10);

        let p_n = 0.07;
        let lhs2 = sigma
            .matrix()
            .hs_inner(depolarizing_multi(&rho, p_n, &[0, 2]).unwrap().matrix());
        let pulled2 = depolarizing_multi_adjoint(sigma.matrix(), 3, p_n, &[0, 2]).unwrap();
        let rhs2 = pulled2.hs_inner(rho.matrix());
        assert!((lhs2 - rhs2).norm() < 1e-10);
    }
}
