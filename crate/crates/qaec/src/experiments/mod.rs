//! Experiment drivers: QAE validation curves, correlated-noise adaptation,
//! erasure collections, encoding discovery, and the noisy-memory comparison
//! with its analytic companion formulas.

pub mod correlated;
pub mod discovery;
pub mod erasure;
pub mod memory;
pub mod presets;
pub mod validation;

pub use correlated::{correlated_noise_study, EtaStudyRow, Strategy};
pub use discovery::{encoding_discovery, DiscoveryConfig, DiscoveryOutcome};
pub use erasure::{erasure_collection, CollectionOutcome, ErasureConfig};
pub use memory::{
    analytic_memory, first_order_noisy_output, memory_point, phase_diagram, AnalyticMemory,
    BoundaryRow, MemoryPoint, PhaseDiagram, Region,
};
pub use presets::{preset_by_name, train_denoising_qae, Preset, TrainedQae};
pub use validation::{
    validate_collection, validate_qae, ErrorClass, NoiseSpec, SampledError, ValidationReport,
};
