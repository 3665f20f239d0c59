//! Floquet scattering analysis: channel bookkeeping, temporal harmonics of
//! the potential, the coupled-channel S-matrix solver, wave-packet sideband
//! analysis and the comparison between the two.

pub mod channels;
pub mod crossval;
pub mod harmonics;
mod linalg;
pub mod packet;
pub mod quadrature;
pub mod report;
pub mod smatrix;

pub use channels::{Channel, ChannelSet};
pub use crossval::{cross_validate, packet_averaged_report, AveragingOptions, CrossValidation, Direction, Discrepancy};
pub use harmonics::{potential_harmonics, potential_harmonics_auto, HarmonicPotential};
pub use packet::{analyze_packet, wavepacket_floquet_report, PacketAnalysis, PacketReport};
pub use report::{ChannelResult, FloquetReport};
pub use smatrix::{
    coupled_channel_smatrix, coupled_channel_smatrix_both, default_slice_width, solve_floquet, Convergence, FloquetProblem,
    FloquetSolution, SolverOptions, TwoSidedReport,
};
