//! The flow space of a model: generalized geodesics, the exponentially
//! weighted metric, the flow, foliated closeness, and periodicity data.

pub mod fol;
pub mod geodesic;
pub mod period;
pub mod quad;

pub use fol::{fol_fs_check, fol_fs_min, fol_symmetry_eps, fol_triangle_eps, FolMin, FolVerdict};
pub use geodesic::{geo_eq, restrict_window, Geodesic, Support};
pub use period::{assumption_probe, in_translation_group, periodicity, PeriodBudget, PeriodInfo};
pub use quad::dist_fs;
