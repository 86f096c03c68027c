//! Overflow-free representations of times that grow geometrically or as towers.

mod log_value;
mod time;
mod tower;

pub use log_value::{log_sum_exp, LogValue};
pub use time::EventTime;
pub use tower::TowerValue;
