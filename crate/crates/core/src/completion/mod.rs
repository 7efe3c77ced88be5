//! Sequences of metrics: deflated and unbounded sets, pointwise limits,
//! summability certificates, and the completed conformal orbit.

mod conformal;
mod sequence;

pub use conformal::{
    conformal_distance, conformal_path, mask_mix, mask_mix_path_length, orbit_completion_member, psi, psi_inv,
    radial_path_length, MaskMix,
};
pub use sequence::{
    deflated_unbounded_sets, distance_lower, distance_upper, field_certificate, omega_limit, omega_limit_with,
    semimetric_equiv, volume_convergence_report, DeflationMasks, OmegaOptions, SemiMetricField, SequenceReport,
    VolumeRow, VANISHING_RATIO,
};
