//! Darboux-synthesized oscillating potential wells and the numerical tools
//! used to check that they do not Floquet-scatter.
//!
//! Units are `hbar = m = 1`; wavefunctions obey
//! `i dψ/dt = -½ d²ψ/dx² + V(x,t) ψ`.

pub mod darboux;
pub mod error;
pub mod field;
pub mod floquet;
pub mod grid;
pub mod io;
pub mod potential;
pub mod seed;
pub mod spectral;
pub mod ssfm;

pub use darboux::{
    check_nonsingular, darboux_potential, darboux_state, group_delay_family1, hermitian_projection,
    transmission_family1, AnalyticState, DarbouxPotential, NonsingularReport, Side,
};
pub use error::{Error, Result};
pub use field::{make_gaussian, MomentumSpectrum, PacketParams, WaveField};
pub use grid::Grid1D;
pub use potential::{PotentialSampler, PotentialSpec, TabulatedPotential};
pub use seed::{seed_family1, seed_family2, SeedFunction, SeedValue};
pub use spectral::Spectral;
pub use ssfm::{
    convergence_probe, propagate, EdgeGuard, PropagationConfig, Propagator, StepDiagnostics, Trajectory,
};
