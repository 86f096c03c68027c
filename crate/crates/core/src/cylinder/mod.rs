//! Cylinder flow: circle-field family, descent schedule, vertical profile,
//! orbit integration and strip occupancy.

pub mod family;
pub mod integrate;
pub mod occupancy;
pub mod profile;
pub mod schedule;
pub mod smooth;

pub use family::{family_validate, w_eval, CircleFieldFamily, FamilyReport, FamilyViolation};
pub use integrate::{
    integrate_full_field, integrate_orbit, rho_independence, CylinderFlow, OrbitPoint, OrbitSample, RhoIndependence,
};
pub use occupancy::{
    block_time, cross_term, e1_bound, e1_e2_check, occupancy, pair_occupancy, strip_label, strip_partition,
    strip_partition_at, strip_segments, PairOccupancy, StripOccupancy, STRIP_L, STRIP_OUT, STRIP_R,
};
pub use profile::{flatness_check, profile_eval, rho_tilde, Flatness, ProfilePoint, VerticalProfile};
pub use schedule::{block_of_depth, h_eval, DescentSchedule};
