//! Geometry of positive definite symmetric tensors at a single point.

mod classify;
mod ebin;
mod linalg;
mod ops;
mod point;
mod theta;

pub use classify::{
    classify_point_sequence, classify_point_sequence_with, dyadic_blocks, final_window, point_certificate,
    CauchyCertificate, ClassifyOptions, PointClassification, PointEvidence, PointKind,
};
pub use ebin::{
    domain_sup, ebin_exp_point, ebin_log_point, ebin_log_point_with, range_margin, EbinTangent, LogData,
};
pub use linalg::Congruence;
pub(crate) use linalg::{trace_prod, traceless};
pub use ops::{
    affine_distance, boundary_speed_constant, det_ratio, eig_extremes, geodesic_affine, inner0, split_traceless,
    sqrt_det_ratio, trace_g, trace_pair,
};
pub use point::{packed_len, SymTensorPoint, MAX_DIM};
pub use theta::{
    affine_geodesic_length0, det_lower_bound, ebin_geodesic_length0, polyline_length0, segment_length0,
    separation_lower_bound, theta_bounds, theta_bounds_with, through_zero_upper, ThetaBounds, ThetaOptions,
    UpperSource,
};
