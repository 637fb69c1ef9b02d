//! Noisy-memory comparison: a bare physical qubit, an uncorrected logical
//! qubit, and a logical qubit actively corrected by an intrinsically noisy
//! QAE between two idling intervals. Includes the closed-form companion
//! expressions (Bloch-averaged discrimination probabilities, the
//! first-order noisy-output constructor, and the phase boundaries).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{logical_state, perfect_recovery, sample_bloch_uniform, StabilizerCode};
use crate::dqnn::{forward, InternalNoise, NetworkParams};
use crate::error::Result;
use crate::linalg::{kron, sandwich_basis, C64, ComplexMatrix, DensityMatrix, PureState};
use crate::noise::bit_flip;

/// Closed-form memory quantities at one (p_i, p_n) point.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticMemory {
    /// Net flip probability of two idling rounds: 2p_i(1−p_i).
    pub p_flip_two_rounds: f64,
    /// Bloch-averaged discrimination probability of a bare qubit.
    pub p_single: f64,
    /// Logical flip rate of the uncorrected encoded qubit after perfect QEC.
    pub p_uncorrected_rate: f64,
    /// Bloch-averaged discrimination probability, uncorrected logical qubit.
    pub p_uncorrected: f64,
    /// First-order (in p_n) discrimination probability with the noisy QAE.
    pub p_corrected: f64,
    /// Network noise at which the corrected memory drops to the bare qubit.
    pub p_n_crit_single: f64,
    /// Network noise at which it drops to the uncorrected logical qubit.
    pub p_n_crit_logical: f64,
}

/// Evaluates every closed form at (p_i, p_n).
pub fn analytic_memory(p_i: f64, p_n: f64) -> AnalyticMemory {
    let p = p_i;
    let p_flip = 2.0 * p * (1.0 - p);
    let p_single = 1.0 - 4.0 / 3.0 * p * (1.0 - p);
    let rate = {
        let s = p_flip;
        s * s * s + 3.0 * s * s * (1.0 - s)
    };
    let p_uncorrected = 1.0 - 2.0 / 3.0 * rate;
    let noiseless = 1.0 - 4.0 * p.powi(2) + 8.0 / 3.0 * p.powi(3) + 12.0 * p.powi(4)
        - 16.0 * p.powi(5)
        + 16.0 / 3.0 * p.powi(6);
    let linear_coeff = 156.0 / 85.0 + 8.0 / 15.0 * p - 776.0 / 51.0 * p.powi(2)
        + 5312.0 / 765.0 * p.powi(3)
        + 13408.0 / 255.0 * p.powi(4)
        - 17152.0 / 255.0 * p.powi(5)
        + 17152.0 / 765.0 * p.powi(6);
    let p_corrected = noiseless - p_n * linear_coeff;
    let denom = 351.0 + 102.0 * p - 2910.0 * p.powi(2) + 1328.0 * p.powi(3)
        + 10056.0 * p.powi(4)
        - 12864.0 * p.powi(5)
        + 4288.0 * p.powi(6);
    let p_n_crit_single = 255.0
        * (p - 4.0 * p.powi(2) + 2.0 * p.powi(3) + 9.0 * p.powi(4) - 12.0 * p.powi(5)
            + 4.0 * p.powi(6))
        / denom;
    let p_n_crit_logical = 765.0
        * (p.powi(2) - 6.0 * p.powi(3) + 13.0 * p.powi(4) - 12.0 * p.powi(5) + 4.0 * p.powi(6))
        / denom;
    AnalyticMemory {
        p_flip_two_rounds: p_flip,
        p_single,
        p_uncorrected_rate: rate,
        p_uncorrected,
        p_corrected,
        p_n_crit_single,
        p_n_crit_logical,
    }
}

/// First-order expansion of the noisy QAE output: one depolarizing event at
/// most, summed over the four insertion points, minus the triple-counted
/// noiseless term. The result is linear in p_n and may have tiny negative
/// eigenvalues; it is an analytic device, not a physical state.
pub fn first_order_noisy_output(rho_l: &DensityMatrix, p_n: f64) -> Result<ComplexMatrix> {
    assert_eq!(rho_l.num_qubits(), 3);
    let rho = rho_l.matrix();
    let c4 = 256.0 / 255.0 * p_n;
    let c2 = 16.0 / 15.0 * p_n;
    let one = |m: &ComplexMatrix, w: f64| m.scale(C64::new(w, 0.0));

    // Noise after the 4-qubit encoder unitary: mixes toward the projected
    // codespace populations.
    let mut ghz_mix = ComplexMatrix::zeros(8, 8);
    ghz_mix.set(0b000, 0b000, C64::new(0.5, 0.0));
    ghz_mix.set(0b111, 0b111, C64::new(0.5, 0.0));
    let noise1 = one(rho, 1.0 - c4).add(&one(&ghz_mix, c4));

    // Noise after the first decoder CNOT.
    let mut four_mix = ComplexMatrix::zeros(8, 8);
    for idx in [0b000usize, 0b011, 0b100, 0b111] {
        four_mix.set(idx, idx, C64::new(0.25, 0.0));
    }
    let noise2 = one(rho, 1.0 - c2).add(&one(&four_mix, c2));

    // Noise after the second decoder CNOT: qubits 2, 3 are replaced with
    // I/4 weighted by the matching diagonal blocks of ρ_L.
    let keep1 = sandwich_basis(rho, 3, &[1, 2], 0b00)?
        .add(&sandwich_basis(rho, 3, &[1, 2], 0b11)?);
    let eye4 = ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0));
    let noise3 = one(rho, 1.0 - c2).add(&one(&kron(&keep1, &eye4)?, c2));

    // Noise after the final SWAP: qubit 3 is replaced with I/2.
    let keep12 = sandwich_basis(rho, 3, &[2], 0)?.add(&sandwich_basis(rho, 3, &[2], 1)?);
    let eye2 = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0));
    let noise4 = one(rho, 1.0 - c2).add(&one(&kron(&keep12, &eye2)?, c2));

    let sum = noise1.add(&noise2).add(&noise3).add(&noise4);
    Ok(sum.add(&one(rho, -3.0)))
}

/// Classification of one phase-diagram cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    CorrectedBest,
    Between,
    CorrectedWorst,
    /// Means too close for a 3-combined-standard-error distinction.
    Ambiguous,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::CorrectedBest => "corrected-best",
            Region::Between => "between",
            Region::CorrectedWorst => "corrected-worst",
            Region::Ambiguous => "ambiguous",
        }
    }
}

/// Monte Carlo means of the three memory scenarios at one noise point.
#[derive(Debug, Clone, Copy)]
pub struct MemoryPoint {
    pub p_i: f64,
    pub p_n: f64,
    pub num_samples: usize,
    pub p_single: f64,
    pub p_single_se: f64,
    pub p_uncorrected: f64,
    pub p_uncorrected_se: f64,
    pub p_corrected: f64,
    pub p_corrected_se: f64,
    pub region: Region,
}

fn mean_se(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

fn significantly_greater(a: f64, a_se: f64, b: f64, b_se: f64) -> bool {
    a - b > 3.0 * (a_se * a_se + b_se * b_se).sqrt()
}

fn classify(
    single: (f64, f64),
    uncorr: (f64, f64),
    corr: (f64, f64),
) -> Region {
    let beats_single = significantly_greater(corr.0, corr.1, single.0, single.1);
    let beats_uncorr = significantly_greater(corr.0, corr.1, uncorr.0, uncorr.1);
    let loses_single = significantly_greater(single.0, single.1, corr.0, corr.1);
    let loses_uncorr = significantly_greater(uncorr.0, uncorr.1, corr.0, corr.1);
    if beats_single && beats_uncorr {
        Region::CorrectedBest
    } else if beats_single && loses_uncorr {
        Region::Between
    } else if loses_single && loses_uncorr {
        Region::CorrectedWorst
    } else {
        Region::Ambiguous
    }
}

/// Runs the three memory scenarios over Bloch-uniform states: idling noise,
/// optional noisy QEC, second idling round, and a final round of perfect
/// QEC on the encoded scenarios.
pub fn memory_point(
    p_i: f64,
    p_n: f64,
    network: &NetworkParams,
    code: &StabilizerCode,
    n_samples: usize,
    seed: u64,
) -> Result<MemoryPoint> {
    let noise = if p_n > 0.0 {
        Some(InternalNoise { p_n })
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = [0.0f64; 6]; // (sum, sum_sq) × 3 scenarios
    for _ in 0..n_samples {
        let point = sample_bloch_uniform(&mut rng);
        // Bare physical qubit with the same Bloch angles.
        let psi1 = {
            let c0 = C64::new((point.theta / 2.0).cos(), 0.0);
            let c1 = C64::from_polar((point.theta / 2.0).sin(), point.phi);
            PureState::new(1, vec![c0, c1]).unwrap()
        };
        let rho1 = bit_flip(
            &bit_flip(&psi1.to_density(), p_i, &[0])?,
            p_i,
            &[0],
        )?;
        let f_single = rho1.expectation_pure(&psi1);

        let psi_l = logical_state(code, point);
        let all: Vec<usize> = (0..code.n).collect();
        let rho_noisy = bit_flip(
            &bit_flip(&psi_l.to_density(), p_i, &all)?,
            p_i,
            &all,
        )?;
        let f_uncorr = perfect_recovery(code, &rho_noisy)?.expectation_pure(&psi_l);

        let half = bit_flip(&psi_l.to_density(), p_i, &all)?;
        let corrected = forward(network, &half, noise)?;
        let second = bit_flip(&corrected, p_i, &all)?;
        let f_corr = perfect_recovery(code, &second)?.expectation_pure(&psi_l);

        acc[0] += f_single;
        acc[1] += f_single * f_single;
        acc[2] += f_uncorr;
        acc[3] += f_uncorr * f_uncorr;
        acc[4] += f_corr;
        acc[5] += f_corr * f_corr;
    }
    let single = mean_se(acc[0], acc[1], n_samples);
    let uncorr = mean_se(acc[2], acc[3], n_samples);
    let corr = mean_se(acc[4], acc[5], n_samples);
    Ok(MemoryPoint {
        p_i,
        p_n,
        num_samples: n_samples,
        p_single: single.0,
        p_single_se: single.1,
        p_uncorrected: uncorr.0,
        p_uncorrected_se: uncorr.1,
        p_corrected: corr.0,
        p_corrected_se: corr.1,
        region: classify(single, uncorr, corr),
    })
}

/// Analytic boundary values for one p_i column.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryRow {
    pub p_i: f64,
    pub p_n_crit_single: f64,
    pub p_n_crit_logical: f64,
}

/// Grid of memory points plus the analytic boundary overlay.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub points: Vec<MemoryPoint>,
    pub boundaries: Vec<BoundaryRow>,
}

/// Sweeps the (p_i, p_n) grid; each grid point runs on its own RNG stream
/// derived from (seed, point index), so results are independent of
/// scheduling.
pub fn phase_diagram(
    p_i_grid: &[f64],
    p_n_grid: &[f64],
    network: &NetworkParams,
    code: &StabilizerCode,
    n_samples: usize,
    seed: u64,
) -> Result<PhaseDiagram> {
    let cells: Vec<(usize, f64, f64)> = p_i_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &p_i)| {
            p_n_grid
                .iter()
                .enumerate()
                .map(move |(j, &p_n)| (i * p_n_grid.len() + j, p_i, p_n))
        })
        .collect();
    let points: Vec<MemoryPoint> = cells
        .par_iter()
        .map(|&(idx, p_i, p_n)| {
            memory_point(
                p_i,
                p_n,
                network,
                code,
                n_samples,
                seed.wrapping_add(idx as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let boundaries = p_i_grid
        .iter()
        .map(|&p_i| {
            let a = analytic_memory(p_i, 0.0);
            BoundaryRow {
                p_i,
                p_n_crit_single: a.p_n_crit_single,
                p_n_crit_logical: a.p_n_crit_logical,
            }
        })
        .collect();
    Ok(PhaseDiagram { points, boundaries })
}
