//! Correlated-noise adaptation study: trains one 3-1-3 QAE per correlation
//! strength and classifies the learned channel against the standard and
//! alternative recovery strategies.

use crate::codes::{perfect_recovery, three_qubit_alternative_table, three_qubit_code};
use crate::error::Result;
use crate::experiments::presets::{
    denoising_pairs, qae_settings, reference_cost, train_denoising_qae, Preset, QaeSettings,
};
use crate::experiments::validation::{validate_qae, NoiseSpec, ValidationReport};
use crate::linalg::DensityMatrix;
use crate::tomography::{chi_matrix, channel_distance, ProcessMatrix};
use crate::training::TrainingConfig;

/// Which recovery strategy a trained channel is closest to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Correct single flips (minimum-weight decoding).
    Standard,
    /// Correct complementary double flips (optimal for bunched errors).
    Alternative,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Standard => "standard",
            Strategy::Alternative => "alternative",
        }
    }
}

/// Result of one correlation strength.
#[derive(Debug, Clone)]
pub struct EtaStudyRow {
    pub eta: f64,
    pub report: ValidationReport,
    pub strategy: Strategy,
    pub chi_distance_standard: f64,
    pub chi_distance_alternative: f64,
    /// Bloch-averaged fidelity of the standard strategy: 1 − (2/3)(3q₂+q₃).
    pub analytic_standard: f64,
    /// Bloch-averaged fidelity of the alternative strategy: 1 − (2/3)(3q₁+q₃).
    pub analytic_alternative: f64,
    pub final_cost: f64,
}

/// Bloch-averaged fidelities of the two fixed strategies under correlated
/// flips.
pub fn strategy_curves(p: f64, eta: f64) -> Result<(f64, f64)> {
    let dist = crate::noise::correlated_flip_distribution(p, eta)?;
    let standard_fail = 3.0 * dist.q2 + dist.q3;
    let alternative_fail = 3.0 * dist.q1 + dist.q3;
    Ok((
        1.0 - 2.0 / 3.0 * standard_fail,
        1.0 - 2.0 / 3.0 * alternative_fail,
    ))
}

fn reference_chis() -> Result<(ProcessMatrix, ProcessMatrix)> {
    let code = three_qubit_code();
    let std_chi = chi_matrix(
        |rho: &DensityMatrix| perfect_recovery(&code, rho),
        3,
        3,
    )?;
    let table = three_qubit_alternative_table();
    let alt_chi = chi_matrix(
        |rho: &DensityMatrix| code.recovery_with_table(&table, rho),
        3,
        3,
    )?;
    Ok((std_chi, alt_chi))
}

/// Trains a QAE at each correlation strength (fixed overall flip rate `p`),
/// validates it and labels the learned channel by its chi-nearest strategy.
pub fn correlated_noise_study(
    p: f64,
    eta_grid: &[f64],
    base_config: &TrainingConfig,
    validation_samples: usize,
) -> Result<Vec<EtaStudyRow>> {
    let (std_chi, alt_chi) = reference_chis()?;
    let code = three_qubit_code();
    let table = three_qubit_alternative_table();
    let mut rows = Vec::with_capacity(eta_grid.len());
    for (idx, &eta) in eta_grid.iter().enumerate() {
        let noise = NoiseSpec::CorrelatedFlip { p, eta };
        let settings: QaeSettings = qae_settings(Preset::Fig6, Some(noise.clone()))?;
        let pairs = denoising_pairs(&settings.code, &settings.noise, &settings.batch_indices)?;
        // The trained network must reach whichever fixed strategy is optimal
        // at this correlation strength; restart until it does.
        let code_std = code.clone();
        let std_recovery =
            move |rho: &DensityMatrix| -> Result<DensityMatrix> { perfect_recovery(&code_std, rho) };
        let code_alt = code.clone();
        let table_alt = table.clone();
        let alt_recovery = move |rho: &DensityMatrix| -> Result<DensityMatrix> {
            code_alt.recovery_with_table(&table_alt, rho)
        };
        let best_reference = reference_cost(&pairs, &[&std_recovery, &alt_recovery])?;
        let mut config = TrainingConfig::new(
            settings.epsilon,
            settings.epochs,
            settings.minibatch_size,
            base_config.seed.wrapping_add(idx as u64 * 31),
        )?
        .with_restarts(base_config.max_restarts, best_reference + 0.02);
        config.beta1 = base_config.beta1;
        config.beta2 = base_config.beta2;
        let trained = train_denoising_qae(&settings, &config, None, 1)?;
        let apply = {
            let channel = trained.channel.clone();
            move |rho: &DensityMatrix| channel.apply(rho)
        };
        let trained_chi = chi_matrix(apply, 3, 3)?;
        let d_std = channel_distance(&trained_chi, &std_chi)?.max_abs;
        let d_alt = channel_distance(&trained_chi, &alt_chi)?.max_abs;
        let strategy = if d_std <= d_alt {
            Strategy::Standard
        } else {
            Strategy::Alternative
        };
        let report = validate_qae(
            &trained.channel,
            &settings.code,
            &noise,
            validation_samples,
            config.seed.wrapping_add(1),
        )?;
        let (analytic_standard, analytic_alternative) = strategy_curves(p, eta)?;
        rows.push(EtaStudyRow {
            eta,
            report,
            strategy,
            chi_distance_standard: d_std,
            chi_distance_alternative: d_alt,
            analytic_standard,
            analytic_alternative,
            final_cost: trained.outcome.final_cost,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_curves_cross_exactly_at_eta_c() {
        let p = 0.2;
        let eta_c = (1.0 - p) / p;
        let (std_at, alt_at) = strategy_curves(p, eta_c).unwrap();
        assert!((std_at - alt_at).abs() < 1e-12);
        let (std_lo, alt_lo) = strategy_curves(p, eta_c * 0.5).unwrap();
        assert!(std_lo > alt_lo);
        let (std_hi, alt_hi) = strategy_curves(p, eta_c * 2.0).unwrap();
        assert!(alt_hi > std_hi);
    }

    #[test]
    fn reference_strategies_are_chi_distinguishable() {
        let (std_chi, alt_chi) = reference_chis().unwrap();
        let d = channel_distance(&std_chi, &alt_chi).unwrap();
        assert!(d.max_abs > 0.4, "strategies too close: {}", d.max_abs);
    }
}
