//! Pickup/dropoff candidates around a request and their vehicle distances.

use crate::ch::{ContractionHierarchy, Direction};
use crate::road_network::{Graph, RoadNetworkPair};
use crate::search_core::{BucketEntry, BucketStore, BundledSearch, KeyOrder};
use crate::{Time, Vertex, INF};

/// Boardable vertices near the origin (pickups) and destination (dropoffs),
/// each with its walking time, sorted by walk then vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PdSet {
    pub pickups: Vec<(Vertex, Time)>,
    pub dropoffs: Vec<(Vertex, Time)>,
}

impl PdSet {
    pub fn is_empty(&self) -> bool {
        self.pickups.is_empty() || self.dropoffs.is_empty()
    }

    pub fn min_walk_p(&self) -> Time {
        self.pickups.iter().map(|e| e.1).min().unwrap_or(INF)
    }

    pub fn min_walk_d(&self) -> Time {
        self.dropoffs.iter().map(|e| e.1).min().unwrap_or(INF)
    }
}

/// `psg_rev` must be the reversed pedestrian graph.
pub fn find_pd_locations(net: &RoadNetworkPair, psg_rev: &Graph, origin: Vertex, dest: Vertex, radius: Time) -> PdSet {
    let near = |g: &Graph, root: Vertex| -> Vec<(Vertex, Time)> {
        let mut s = BundledSearch::new(g.num_vertices(), 1);
        let mut out = Vec::new();
        s.run(
            g,
            &[root],
            radius,
            |v, _, d| {
                out.push((v, d));
                true
            },
            |key| key > radius,
        );
        out.sort_unstable();
        out.dedup_by_key(|e| e.0);
        let mut out: Vec<_> = out.into_iter().filter(|&(v, d)| d <= radius && net.is_boarding(v)).collect();
        out.sort_unstable_by_key(|&(v, d)| (d, v));
        out
    };
    PdSet { pickups: near(&net.psg, origin), dropoffs: near(psg_rev, dest) }
}

/// Upper bound on every vehicle distance from a pickup to a dropoff.
/// `veh_rev` must be the reversed vehicle graph.
pub fn max_pd_dist(
    ch: &ContractionHierarchy,
    veh: &Graph,
    veh_rev: &Graph,
    origin: Vertex,
    dest: Vertex,
    pickups: &[Vertex],
    dropoffs: &[Vertex],
) -> Time {
    let Some(od) = ch.query(origin, dest) else { return INF };
    let farthest = |g: &Graph, root: Vertex, targets: &[Vertex]| -> Time {
        let mut want = vec![false; g.num_vertices()];
        let left = std::cell::Cell::new(0usize);
        for &t in targets {
            if !want[t as usize] {
                want[t as usize] = true;
                left.set(left.get() + 1);
            }
        }
        let mut far = 0;
        let mut s = BundledSearch::new(g.num_vertices(), 1);
        s.run(
            g,
            &[root],
            INF,
            |v, _, d| {
                if want[v as usize] {
                    want[v as usize] = false;
                    left.set(left.get() - 1);
                    far = far.max(d);
                }
                true
            },
            |_| left.get() == 0,
        );
        if left.get() > 0 {
            INF
        } else {
            far
        }
    };
    let to_o = farthest(veh_rev, origin, pickups);
    let from_dest = farthest(veh, dest, dropoffs);
    if to_o >= INF || from_dest >= INF {
        return INF;
    }
    to_o + od + from_dest
}

/// Row-major pickup × dropoff vehicle distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdMatrix {
    pub num_pickups: usize,
    pub num_dropoffs: usize,
    pub dist: Vec<Time>,
}

impl PdMatrix {
    pub fn get(&self, p: usize, d: usize) -> Time {
        self.dist[p * self.num_dropoffs + d]
    }

    pub fn rows(&self) -> Vec<Vec<Time>> {
        self.dist.chunks(self.num_dropoffs.max(1)).map(<[Time]>::to_vec).collect()
    }

    pub fn min(&self) -> Time {
        self.dist.iter().copied().min().unwrap_or(INF)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PdCounters {
    pub edges_relaxed: u64,
    pub entries_scanned: u64,
}

/// All pickup-to-dropoff distances with bundled bucket searches.
pub fn pd_distance_search(
    ch: &ContractionHierarchy,
    pickups: &[Vertex],
    dropoffs: &[Vertex],
    radius: Time,
    k: usize,
    counters: &mut PdCounters,
) -> PdMatrix {
    let n = ch.num_vertices();
    let (np, nd) = (pickups.len(), dropoffs.len());
    let mut dist = vec![INF; np * nd];
    let mut buckets: BucketStore<u32> = BucketStore::new(n, KeyOrder::Increasing, true);
    let mut search = BundledSearch::new(n, k);
    for (b, batch) in dropoffs.chunks(k).enumerate() {
        let mut found: Vec<(Vertex, usize, Time)> = Vec::new();
        search.run(
            ch.search_graph(Direction::Down),
            batch,
            radius,
            |v, l, d| {
                found.push((v, l, d));
                true
            },
            |_| false,
        );
        counters.edges_relaxed += std::mem::take(&mut search.edges_relaxed);
        // Settles can repeat with shorter distances; keep the final one per lane.
        found.sort_unstable_by_key(|&(v, l, d)| (v, l, d));
        found.dedup_by_key(|e| (e.0, e.1));
        for (v, l, d) in found {
            buckets.insert(v, BucketEntry { owner: (b * k + l) as u32, dist: d, key: d });
        }
    }
    for (b, batch) in pickups.chunks(k).enumerate() {
        let mut scanned = 0u64;
        search.run(
            ch.search_graph(Direction::Up),
            batch,
            radius,
            |v, l, d| {
                let row = (b * k + l) * nd;
                scanned += buckets.scan(
                    v,
                    |e| d + e.dist > radius,
                    |e| {
                        let cell = &mut dist[row + e.owner as usize];
                        *cell = (*cell).min(d + e.dist);
                    },
                ) as u64;
                true
            },
            |_| false,
        );
        counters.entries_scanned += scanned;
        counters.edges_relaxed += std::mem::take(&mut search.edges_relaxed);
    }
    PdMatrix { num_pickups: np, num_dropoffs: nd, dist }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search_core::dijkstra;
    use crate::synth;
    use proptest::prelude::*;

    fn line() -> (RoadNetworkPair, ContractionHierarchy) {
        let net = synth::line();
        let ch = ContractionHierarchy::build(&net.veh);
        (net, ch)
    }

    #[test]
    fn radius_zero_is_origin() {
        let (net, _) = line();
        let pd = find_pd_locations(&net, &net.psg.reversed(), 1, 3, 0);
        assert_eq!(pd.pickups, vec![(1, 0)]);
        assert_eq!(pd.dropoffs, vec![(3, 0)]);
    }

    #[test]
    fn line_pickups_within_radius() {
        let (net, _) = line();
        let pd = find_pd_locations(&net, &net.psg.reversed(), 1, 3, 100);
        assert_eq!(pd.pickups, vec![(1, 0), (0, 100), (2, 100)]);
        assert_eq!(pd.dropoffs, vec![(3, 0), (2, 100)]);
    }

    #[test]
    fn dropoffs_use_reverse_walks() {
        // One-way footpath 0 -> 1 of 50; from 1 back to 0 takes 500.
        let net = RoadNetworkPair::new(2, &[(0, 1, 10), (1, 0, 10)], &[(0, 1, 50), (1, 0, 500)], &[], &[], None).unwrap();
        let pd = find_pd_locations(&net, &net.psg.reversed(), 1, 1, 100);
        assert_eq!(pd.dropoffs, vec![(1, 0), (0, 50)]);
        assert_eq!(pd.pickups, vec![(1, 0)]);
    }

    #[test]
    fn pd_bound_on_line() {
        let (net, ch) = line();
        let rev = net.veh.reversed();
        assert_eq!(max_pd_dist(&ch, &net.veh, &rev, 1, 3, &[0, 1], &[3]), 300);
        assert_eq!(max_pd_dist(&ch, &net.veh, &rev, 1, 3, &[1], &[3]), 200);
    }

    #[test]
    fn line_matrix() {
        let (_, ch) = line();
        let mut c = PdCounters::default();
        let m = pd_distance_search(&ch, &[0, 1], &[2, 3], INF, 4, &mut c);
        assert_eq!(m.rows(), vec![vec![200, 300], vec![100, 200]]);
        let one = pd_distance_search(&ch, &[0], &[3], INF, 1, &mut c);
        assert_eq!(one.rows(), vec![vec![ch.query(0, 3).unwrap()]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn matrix_matches_dijkstra(seed in 0u64..1000, k in 1usize..9, np in 1usize..30, nd in 1usize..30) {
            let net = synth::random_network(seed, 120, 200, 1.0);
            let ch = ContractionHierarchy::build(&net.veh);
            let rev = net.veh.reversed();
            let ps: Vec<Vertex> = (0..np as Vertex).map(|x| (x * 7 + seed as Vertex) % 120).collect();
            let ds: Vec<Vertex> = (0..nd as Vertex).map(|x| (x * 11 + 3 + seed as Vertex) % 120).collect();
            let mut c = PdCounters::default();
            let full = pd_distance_search(&ch, &ps, &ds, INF, k, &mut c);
            let mu = max_pd_dist(&ch, &net.veh, &rev, ps[0], ds[0], &ps, &ds);
            let cut = pd_distance_search(&ch, &ps, &ds, mu, k, &mut c);
            prop_assert_eq!(&full, &cut);
            let oracle = dijkstra(&net.veh, &ps, 1, INF, |_, _| false);
            for (pi, row) in oracle.iter().enumerate() {
                for (di, &d) in ds.iter().enumerate() {
                    let want = row.binary_search_by_key(&d, |e| e.0).map(|x| row[x].1).unwrap_or(INF);
                    prop_assert_eq!(full.get(pi, di), want);
                    prop_assert!(mu >= want);
                }
            }
        }
    }
}
