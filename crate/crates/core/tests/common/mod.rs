#![allow(dead_code)]

use dispatch_core::cost_model::CostParameters;
use dispatch_core::fleet_state::Vehicle;
use dispatch_core::instance::Request;
use dispatch_core::road_network::RoadNetworkPair;
use dispatch_core::sim::{PreparedNetwork, SimConfig};
use dispatch_core::synth;
use dispatch_core::Time;

/// Walking radii cycled through by the random cases: none, about one
/// footpath, about three footpaths.
pub const RADII: [Time; 3] = [0, 2500, 7000];

pub struct Case {
    pub seed: u64,
    pub prep: PreparedNetwork,
    pub vehicles: Vec<Vehicle>,
    pub requests: Vec<Request>,
    pub cfg: SimConfig,
}

/// Small random instance: at most 50 vertices, 5 vehicles and 40 requests.
pub fn small_case(seed: u64) -> Case {
    let n = 12 + (seed as usize * 7) % 39;
    let base = synth::random_network(seed, n, n / 2 + 3, 0.75);
    // Slow walkers so that vehicles win often enough.
    let psg: Vec<_> = base.psg.edges().into_iter().map(|(a, b, w)| (a, b, 3 * w)).collect();
    let board = base.boarding_set();
    let net = RoadNetworkPair::new(n, &base.veh.edges(), &psg, &[], &[], Some(&board)).unwrap();
    let prep = PreparedNetwork::new(net);
    let (vehicles, requests) = synth::random_demand(seed, &prep.net, 1 + seed as usize % 5, 20 + seed as usize % 21, 3000);
    let params = CostParameters {
        t_wait_max: 1500 + 500 * (seed as i64 % 3),
        beta: 1500 + 500 * (seed as i64 % 4),
        t_stop: 50 + 25 * (seed as i64 % 3),
        omega_walk: (seed % 2) as i64,
        radius: RADII[seed as usize % 3],
        ..CostParameters::default()
    };
    Case { seed, prep, vehicles, requests, cfg: SimConfig { params, check_routes: true, ..SimConfig::default() } }
}
