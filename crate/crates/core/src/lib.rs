//! Dynamic ridesharing dispatch with walking meeting points.
//!
//! Requests are inserted one at a time into vehicle routes. Pickup and
//! dropoff may happen at any boardable vertex within a walking radius of the
//! origin and destination. Distances come from contraction hierarchies and
//! bucket-based many-to-many searches.
//!
//! All times are integer deciseconds.

pub mod ch;
pub mod cost_model;
pub mod elliptic;
pub mod fleet_state;
pub mod instance;
pub mod last_stop;
pub mod pd_locations;
pub mod road_network;
pub mod search_core;
pub mod sim;
pub mod synth;

/// Time or distance in deciseconds.
pub type Time = i64;

/// Vertex id shared by the vehicle and pedestrian networks.
pub type Vertex = u32;

/// Unreachable distance. Small enough that adding two of them never overflows.
pub const INF: Time = i64::MAX / 8;
