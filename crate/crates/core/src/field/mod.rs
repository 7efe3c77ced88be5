//! Fields of symmetric tensors on a periodic grid over the flat torus, with
//! the L² metric, its geodesics and curvature, path lengths and distance bounds.

mod amenable;
mod grid;
mod ops;
mod path;
mod smallvol;
mod theta;

pub use amenable::{amenable_check, amenable_check_with, random_tangent, AmenableClass, AmenableOptions, AmenableReport};
pub use grid::{CellMask, GridSpec, MetricField, ScalarField, TangentField, TensorField};
pub(crate) use grid::{bits, cell_sum, group_cells};
pub use ops::{
    christoffel, christoffel_point, curvature_point, curvature_tensor, exp_domain_sup, exp_field, exp_velocity_field, geodesic_residual,
    l2_inner, l2_norm, log_field, log_field_with, sectional_curvature, sectional_density, total_volume, volume,
};
pub use path::{path_length, path_length_with, polyline_length, straight_segment_length, MetricPath};
pub use smallvol::{
    dist_upper_smallvol, geometric, smallvol_bound, smallvol_path_lengths, smallvol_sweep, MaskDepth, SmallVolLength,
    SmallVolSweep,
};
pub use theta::{theta_y, theta_y_with, ThetaInterval};
