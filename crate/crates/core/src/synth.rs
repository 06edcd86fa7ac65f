//! Fixtures and seeded generators for networks and instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fleet_state::Vehicle;
use crate::instance::Request;
use crate::road_network::{Graph, RoadNetworkPair};
use crate::{Time, Vertex};

/// Four vertices on a line, 100 ds per edge in both directions and both networks.
pub const LINE: &str = "vertices 4\n\
    veh 0 1 100\nveh 1 0 100\nveh 1 2 100\nveh 2 1 100\nveh 2 3 100\nveh 3 2 100\n\
    psg 0 1 100\npsg 1 0 100\npsg 1 2 100\npsg 2 1 100\npsg 2 3 100\npsg 3 2 100\n";

pub fn line() -> RoadNetworkPair {
    RoadNetworkPair::parse(LINE).expect("LINE fixture parses")
}

/// Random directed graph with `m` edges; weights drawn from `weights`.
pub fn random_graph(seed: u64, n: usize, m: usize, weights: std::ops::Range<Time>) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (0..m)
        .map(|_| {
            let t = rng.gen_range(0..n) as Vertex;
            let h = rng.gen_range(0..n) as Vertex;
            (t, h, rng.gen_range(weights.clone()))
        })
        .collect();
    Graph::from_edges(n, &edges)
}

/// Strongly connected random road network pair.
///
/// The vehicle graph is a random Hamiltonian cycle plus random chords. The
/// pedestrian graph is bidirected over the same chords with slower weights.
/// About `board_share` of the vertices are boardable.
pub fn random_network(seed: u64, n: usize, extra: usize, board_share: f64) -> RoadNetworkPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Vertex> = (0..n as Vertex).collect();
    order.shuffle(&mut rng);
    let mut veh = Vec::new();
    let mut psg = Vec::new();
    let mut link = |rng: &mut ChaCha8Rng, a: Vertex, b: Vertex| {
        let w = rng.gen_range(60..400);
        veh.push((a, b, w));
        if rng.gen_bool(0.5) {
            veh.push((b, a, w + rng.gen_range(0..40)));
        }
        let walk = w * rng.gen_range(3..6);
        psg.push((a, b, walk));
        psg.push((b, a, walk));
    };
    for i in 0..n {
        link(&mut rng, order[i], order[(i + 1) % n]);
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n) as Vertex;
        let b = rng.gen_range(0..n) as Vertex;
        if a != b {
            link(&mut rng, a, b);
        }
    }
    let board: Vec<Vertex> = (0..n as Vertex).filter(|_| rng.gen_bool(board_share)).collect();
    let board = if board.is_empty() { vec![0] } else { board };
    RoadNetworkPair::new(n, &veh, &psg, &[], &[], Some(&board)).expect("generated network is valid")
}

/// `w`×`h` grid, bidirected, `edge` ds per vehicle edge and `walk` ds per pedestrian edge.
pub fn grid(w: usize, h: usize, edge: Time, walk: Time) -> RoadNetworkPair {
    let id = |x: usize, y: usize| (y * w + x) as Vertex;
    let mut veh = Vec::new();
    let mut psg = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut nb = Vec::new();
            if x + 1 < w {
                nb.push(id(x + 1, y));
            }
            if y + 1 < h {
                nb.push(id(x, y + 1));
            }
            for b in nb {
                let a = id(x, y);
                veh.push((a, b, edge));
                veh.push((b, a, edge));
                psg.push((a, b, walk));
                psg.push((b, a, walk));
            }
        }
    }
    RoadNetworkPair::new(w * h, &veh, &psg, &[], &[], None).expect("grid is valid")
}

/// Random fleet and request stream over `net`. Service windows vary so that
/// some vehicles retire early; requests arrive in `0..horizon`.
pub fn random_demand(seed: u64, net: &RoadNetworkPair, vehicles: usize, requests: usize, horizon: Time) -> (Vec<Vehicle>, Vec<Request>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = net.num_vertices();
    let vs = (0..vehicles)
        .map(|i| {
            let t_start = rng.gen_range(0..horizon / 4 + 1);
            let t_end = if rng.gen_bool(0.3) { t_start + rng.gen_range(1..horizon + 2) } else { t_start + 20 * horizon };
            Vehicle { id: i as u32 * 3 + 1, start: rng.gen_range(0..n) as Vertex, capacity: rng.gen_range(1..4), t_start, t_end }
        })
        .collect();
    let mut times: Vec<Time> = (0..requests).map(|_| rng.gen_range(0..horizon)).collect();
    times.sort_unstable();
    let rs = times
        .into_iter()
        .enumerate()
        .map(|(i, t_req)| {
            let origin = rng.gen_range(0..n) as Vertex;
            let mut dest = rng.gen_range(0..n) as Vertex;
            if dest == origin && n > 1 {
                dest = (dest + 1) % n as Vertex;
            }
            Request { id: i as u32, origin, dest, t_req }
        })
        .collect();
    (vs, rs)
}
