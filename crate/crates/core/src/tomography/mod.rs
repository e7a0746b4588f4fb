//! Classical-shadow process tomography on the two-qubit triplet subspace.

pub mod choi;
pub mod complexity;
pub mod estimator;
pub mod mchannel;
pub mod noise;
pub mod optimize;
pub mod rotation;

pub use choi::{apply_choi, choi_of_channel, kron3, trace_output, Channel, ChannelId};
pub use complexity::{complexity, sample_complexity, upper_bound_a, Complexity};
pub use estimator::{
    choi_distance, infinite_sample_delta, infinite_sample_estimate, run_tomography, single_shot_estimator, Protocol,
    RunRecord, TomographyRun,
};
pub use mchannel::{build_m_channels, MChannel};
pub use noise::{apply_noise, NoiseMode, NoiseSpec};
pub use optimize::{optimize_sets, DescentOptions, Loss, Optimized};
pub use rotation::{
    outcome_to_b, rotation_unitary, triplet_restriction, Role, RotationSet, TripletRotation, M3, M9,
};
