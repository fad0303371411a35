//! Lee-Yang zeros of the long-range ferromagnetic Ising model through the
//! probe-spin-coherence mapping.
//!
//! The coherence of a probe spin Ising-coupled to an N-spin bath equals the
//! bath partition function continued to a complex magnetic field; its zeros
//! in time are the Lee-Yang zeros on the unit circle. This crate builds the
//! partition polynomial in log space, evaluates the coherence, locates all
//! N zeros per period, reconstructs free energies from them, detects the
//! phase transition from the Yang-Lee edge trajectory, and simulates the
//! noisy measurement pipeline end to end.

pub mod coherence;
pub mod error;
pub mod experiment;
pub mod ising;
mod mp;
pub mod numeric;
pub mod thermo;
pub mod zeros;

pub use coherence::{coherence_at, coherence_sensitivity, coherence_trace, CoherenceTrace};
pub use error::{Error, Result};
pub use experiment::{
    ensemble_weights, extract_degenerate_zero, extract_zeros, synthesize_measurement,
    zero_uncertainty, EnsembleWeights, Extraction, MeasuredTrace, NoiseModel, NoisePreset,
};
pub use ising::{
    brute_force_partition, build_polynomial, critical_temperature, degeneracy, partition_direct,
    saddle_point, uniform_couplings, IsingParams, PartitionPolynomial, SaddlePointResult,
    DEFAULT_PROBE_COUPLING,
};
pub use thermo::{
    edge_scan, estimate_tc, free_energy_direct, free_energy_from_zeros, free_energy_saddle,
    EdgeCurve, EdgeSample, FreeEnergyResult, FreeEnergySource,
};
pub use zeros::{
    find_first_zero, find_zeros_polynomial, find_zeros_real, verify_circle_theorem, CircleReport,
    ZeroSet,
};
