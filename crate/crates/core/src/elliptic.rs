//! Bucket entries around planned legs, and the insertions before a route's
//! last stop that they make cheap to find.
//!
//! For leg `i` of a route, the source stop `s_i` gets entries in its upward
//! search space and the target stop `s_{i+1}` in its downward one, each keyed
//! by the leeway left after reaching the bucket vertex. A point `x` can only
//! be inserted into the leg when
//! `dist(s_i, x) + t_stop + dist(x, s_{i+1}) <= leeway(i)`.

use rustc_hash::FxHashMap as HashMap;

use crate::ch::{ContractionHierarchy, Direction};
use crate::cost_model::{evaluate, offer, Insertion, RequestCtx, Scored};
use crate::fleet_state::{FleetState, Route};
use crate::pd_locations::{PdMatrix, PdSet};
use crate::search_core::{BucketEntry, BucketStore, BundledSearch, KeyOrder};
use crate::{Time, Vertex, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StopRef {
    pub veh: u32,
    pub stop: u32,
}

#[derive(Debug, Clone)]
struct Leg {
    src: StopRef,
    tgt: StopRef,
    leeway: Time,
    src_at: Vec<Vertex>,
    tgt_at: Vec<Vertex>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EllipticCounters {
    pub entries_generated: u64,
    pub generation_edges: u64,
    pub query_edges: u64,
    pub entries_scanned: u64,
}

pub struct EllipticIndex {
    src: BucketStore<StopRef>,
    tgt: BucketStore<StopRef>,
    legs: Vec<Vec<Leg>>,
    prune: bool,
    t_stop: Time,
    search: BundledSearch,
    pub counters: EllipticCounters,
}

impl EllipticIndex {
    /// With `prune` off, entries cover whole search spaces and scans never stop early.
    pub fn new(num_vertices: usize, num_vehicles: usize, t_stop: Time, sorted: bool, prune: bool) -> Self {
        EllipticIndex {
            src: BucketStore::new(num_vertices, KeyOrder::Decreasing, sorted),
            tgt: BucketStore::new(num_vertices, KeyOrder::Decreasing, sorted),
            legs: vec![Vec::new(); num_vehicles],
            prune,
            t_stop,
            search: BundledSearch::new(num_vertices, 1),
            counters: EllipticCounters::default(),
        }
    }

    pub fn total_entries(&self) -> usize {
        self.src.total_entries() + self.tgt.total_entries()
    }

    /// Brings the entries of vehicle `v` in line with its route. Legs whose
    /// endpoints and leeway are unchanged keep their entries.
    pub fn sync_vehicle(&mut self, ch: &ContractionHierarchy, route: &Route, v: usize) {
        let want: Vec<(u32, u32, Time)> = (0..route.n()).map(|i| (route.stops[i].id, route.stops[i + 1].id, route.leeway(i))).collect();
        let old = std::mem::take(&mut self.legs[v]);
        let mut kept = Vec::new();
        for leg in old {
            if want.contains(&(leg.src.stop, leg.tgt.stop, leg.leeway)) {
                kept.push(leg);
            } else {
                self.src.remove_owner(leg.src, leg.src_at.iter().copied());
                self.tgt.remove_owner(leg.tgt, leg.tgt_at.iter().copied());
            }
        }
        for (i, &(s, t, leeway)) in want.iter().enumerate() {
            if kept.iter().any(|l| (l.src.stop, l.tgt.stop, l.leeway) == (s, t, leeway)) {
                continue;
            }
            let src = StopRef { veh: v as u32, stop: s };
            let tgt = StopRef { veh: v as u32, stop: t };
            let radius = if self.prune { leeway.saturating_sub(self.t_stop) } else { INF };
            let mut leg = Leg { src, tgt, leeway, src_at: Vec::new(), tgt_at: Vec::new() };
            if radius >= 0 {
                for (at, dir) in [(route.stops[i].loc, Direction::Up), (route.stops[i + 1].loc, Direction::Down)] {
                    for (u, d) in self.space(ch, at, dir, radius) {
                        let key = if leeway >= INF { INF } else { leeway - d };
                        let (store, owner, list) = match dir {
                            Direction::Up => (&mut self.src, src, &mut leg.src_at),
                            Direction::Down => (&mut self.tgt, tgt, &mut leg.tgt_at),
                        };
                        store.insert(u, BucketEntry { owner, dist: d, key });
                        list.push(u);
                        self.counters.entries_generated += 1;
                    }
                }
            }
            kept.push(leg);
        }
        self.legs[v] = kept;
    }

    fn space(&mut self, ch: &ContractionHierarchy, v: Vertex, dir: Direction, radius: Time) -> Vec<(Vertex, Time)> {
        let mut out = Vec::new();
        self.search.run(
            ch.search_graph(dir),
            &[v],
            radius,
            |u, _, d| {
                out.push((u, d));
                true
            },
            |_| false,
        );
        self.counters.generation_edges += std::mem::take(&mut self.search.edges_relaxed);
        out.sort_unstable();
        out.dedup_by_key(|e| e.0);
        out
    }

    /// Distances between route stops and the points `xs`, for every leg whose
    /// ellipse may contain the point.
    pub fn query(&mut self, ch: &ContractionHierarchy, xs: &[Vertex], k: usize) -> StopDistances {
        let mut search = BundledSearch::new(ch.num_vertices(), k);
        let mut to: HashMap<(u32, usize), Time> = HashMap::default();
        let mut from: HashMap<(u32, usize), Time> = HashMap::default();
        let ts = self.t_stop;
        let prune = self.prune;
        let mut scanned = 0u64;
        for (b, batch) in xs.chunks(k).enumerate() {
            for (dir, store, acc) in [(Direction::Down, &self.src, &mut to), (Direction::Up, &self.tgt, &mut from)] {
                search.run(
                    ch.search_graph(dir),
                    batch,
                    INF,
                    |v, l, d| {
                        let xi = b * k + l;
                        scanned += store.scan(
                            v,
                            |e| prune && e.key < d + ts,
                            |e| {
                                let cell = acc.entry((e.owner.stop, xi)).or_insert(INF);
                                *cell = (*cell).min(e.dist + d);
                            },
                        ) as u64;
                        true
                    },
                    |_| false,
                );
            }
        }
        self.counters.entries_scanned += scanned;
        self.counters.query_edges += search.edges_relaxed;
        StopDistances { to: group(to), from: group(from) }
    }
}

fn group(m: HashMap<(u32, usize), Time>) -> HashMap<u32, Vec<(usize, Time)>> {
    let mut out: HashMap<u32, Vec<(usize, Time)>> = HashMap::default();
    for ((stop, xi), d) in m {
        out.entry(stop).or_default().push((xi, d));
    }
    for list in out.values_mut() {
        list.sort_unstable();
    }
    out
}

/// Per stop id: `to` holds dist(stop, x) and `from` holds dist(x, stop),
/// as `(index into the queried points, distance)` sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopDistances {
    pub to: HashMap<u32, Vec<(usize, Time)>>,
    pub from: HashMap<u32, Vec<(usize, Time)>>,
}

impl StopDistances {
    /// Points inside the ellipse of leg `i`: `(index, dist(s_i, x), dist(x, s_{i+1}))`.
    pub fn leg_options(&self, route: &Route, i: usize, t_stop: Time) -> Vec<(usize, Time, Time)> {
        let (Some(to), Some(from)) = (self.to.get(&route.stops[i].id), self.from.get(&route.stops[i + 1].id)) else {
            return Vec::new();
        };
        let leeway = route.leeway(i);
        let mut out = Vec::new();
        let (mut a, mut b) = (0, 0);
        while a < to.len() && b < from.len() {
            match to[a].0.cmp(&from[b].0) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    if to[a].1 + t_stop + from[b].1 <= leeway {
                        out.push((to[a].0, to[a].1, from[b].1));
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
        out
    }
}

/// Exact distances from vehicles' current locations to pickups.
#[derive(Debug, Default)]
pub struct CurrentLocDists {
    map: HashMap<(usize, usize), Time>,
    pub resolved_pairs: u64,
}

impl CurrentLocDists {
    /// Computes the missing `(vehicle, pickup index)` pairs with one bucket
    /// search: vehicles' current locations fill transient buckets, pickups
    /// scan them.
    pub fn resolve(&mut self, ch: &ContractionHierarchy, fleet: &FleetState, pd: &PdSet, pairs: &[(usize, usize)]) {
        let missing: Vec<(usize, usize)> = pairs.iter().copied().filter(|pr| !self.map.contains_key(pr)).collect();
        if missing.is_empty() {
            return;
        }
        let mut vehs: Vec<usize> = missing.iter().map(|e| e.0).collect();
        vehs.sort_unstable();
        vehs.dedup();
        let mut pis: Vec<usize> = missing.iter().map(|e| e.1).collect();
        pis.sort_unstable();
        pis.dedup();
        let n = ch.num_vertices();
        let mut buckets: BucketStore<u32> = BucketStore::new(n, KeyOrder::Increasing, false);
        for &v in &vehs {
            let (lc, _) = fleet.location_and_base(v);
            for (u, d) in ch.search_space(lc, Direction::Up, INF) {
                buckets.insert(u, BucketEntry { owner: v as u32, dist: d, key: d });
            }
        }
        let mut search = BundledSearch::new(n, 1);
        for &pi in &pis {
            let mut best: HashMap<usize, Time> = HashMap::default();
            search.run(
                ch.search_graph(Direction::Down),
                &[pd.pickups[pi].0],
                INF,
                |u, _, d| {
                    buckets.scan(
                        u,
                        |_| false,
                        |e| {
                            let cell = best.entry(e.owner as usize).or_insert(INF);
                            *cell = (*cell).min(e.dist + d);
                        },
                    );
                    true
                },
                |_| false,
            );
            for &v in &vehs {
                self.map.insert((v, pi), best.get(&v).copied().unwrap_or(INF));
            }
        }
        self.resolved_pairs += missing.len() as u64;
    }

    pub fn get(&self, v: usize, pi: usize) -> Time {
        self.map.get(&(v, pi)).copied().unwrap_or(INF)
    }
}

/// Everything needed to enumerate insertions for one request.
pub struct RequestView<'a> {
    pub fleet: &'a FleetState,
    pub req: &'a RequestCtx,
    pub pd: &'a PdSet,
    pub matrix: &'a PdMatrix,
    pub pick: &'a StopDistances,
    pub drop: &'a StopDistances,
    pickup_at: HashMap<Vertex, usize>,
    dropoff_at: HashMap<Vertex, usize>,
}

/// A pickup placed after `s_i`: `to` is dist(s_i, p) and `from` dist(p, s_{i+1}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PickupOption {
    pub pi: usize,
    pub to: Time,
    pub from: Time,
}

impl<'a> RequestView<'a> {
    pub fn new(
        fleet: &'a FleetState,
        req: &'a RequestCtx,
        pd: &'a PdSet,
        matrix: &'a PdMatrix,
        pick: &'a StopDistances,
        drop: &'a StopDistances,
    ) -> Self {
        let pickup_at = pd.pickups.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
        let dropoff_at = pd.dropoffs.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
        RequestView { fleet, req, pd, matrix, pick, drop, pickup_at, dropoff_at }
    }

    pub fn pickup_index(&self, v: Vertex) -> Option<usize> {
        self.pickup_at.get(&v).copied()
    }

    pub fn dropoff_index(&self, v: Vertex) -> Option<usize> {
        self.dropoff_at.get(&v).copied()
    }

    /// Pickup choices after `s_i` (i < n), including joining `s_i` itself.
    pub fn pickup_options(&self, v: usize, i: usize) -> Vec<PickupOption> {
        let route = self.fleet.route(v);
        let ts = self.fleet.params().t_stop;
        let here = route.stops[i].loc;
        let mut out: Vec<PickupOption> = self
            .pick
            .leg_options(route, i, ts)
            .into_iter()
            .filter(|&(pi, _, _)| i == 0 || self.pd.pickups[pi].0 != here)
            .map(|(pi, to, from)| PickupOption { pi, to, from })
            .collect();
        if i >= 1 {
            if let Some(pi) = self.pickup_index(here) {
                out.push(PickupOption { pi, to: 0, from: route.leg(i) });
            }
        }
        out
    }

    fn insertion(&self, v: usize, i: usize, j: usize, p: &PickupOption, di: usize) -> Insertion {
        let (pv, wp) = self.pd.pickups[p.pi];
        let (dv, wd) = self.pd.dropoffs[di];
        let dep_i = self.fleet.route(v).stops[i].dep;
        Insertion {
            veh: v,
            i,
            j,
            p: pv,
            walk_p: wp,
            d: dv,
            walk_d: wd,
            veh_arr_p: dep_i + p.to,
            dist_p_next: p.from,
            dist_p_d: INF,
            dist_sj_d: INF,
            dist_d_next: INF,
        }
    }

    /// Insertions of vehicle `v` with pickup after `s_i` and dropoff before the
    /// last stop. For `i = 0`, `veh_arr_p` assumes departure from `s_0`.
    pub fn for_each_before_last(&self, v: usize, i: usize, mut emit: impl FnMut(Insertion, &PickupOption)) {
        let route = self.fleet.route(v);
        let n = route.n();
        let ts = self.fleet.params().t_stop;
        if i >= n {
            return;
        }
        let picks = self.pickup_options(v, i);
        if picks.is_empty() {
            return;
        }
        let drops: Vec<Vec<(usize, Time, Time)>> = (i..n).map(|j| self.drop.leg_options(route, j, ts)).collect();
        for p in &picks {
            for &(di, _, dfrom) in &drops[0] {
                let pd = self.matrix.get(p.pi, di);
                if pd >= INF || self.pd.dropoffs[di].0 == self.pd.pickups[p.pi].0 {
                    continue;
                }
                let mut ins = self.insertion(v, i, i, p, di);
                ins.dist_p_d = pd;
                ins.dist_d_next = dfrom;
                emit(ins, p);
            }
            for j in i + 1..n {
                let here = route.stops[j].loc;
                for &(di, dto, dfrom) in &drops[j - i] {
                    if self.pd.dropoffs[di].0 == here {
                        continue;
                    }
                    let mut ins = self.insertion(v, i, j, p, di);
                    ins.dist_sj_d = dto;
                    ins.dist_d_next = dfrom;
                    emit(ins, p);
                }
                if let Some(di) = self.dropoff_index(here) {
                    let mut ins = self.insertion(v, i, j, p, di);
                    ins.dist_sj_d = 0;
                    ins.dist_d_next = route.leg(j);
                    emit(ins, p);
                }
            }
        }
    }

    fn score(&self, ins: &Insertion, base: Time) -> Scored {
        let v = ins.veh;
        let cost = evaluate(self.fleet.route(v), self.fleet.vehicle(v), self.fleet.params(), self.req, ins, base).cost;
        Scored::new(cost, *ins, self.fleet.vehicle(v).id)
    }

    /// Best insertion with `1 <= i <= j < n`.
    pub fn best_ordinary(&self) -> (Option<Scored>, u64) {
        let mut best = None;
        let mut evaluated = 0;
        for v in 0..self.fleet.num_vehicles() {
            for i in 1..self.fleet.route(v).n() {
                self.for_each_before_last(v, i, |ins, _| {
                    evaluated += 1;
                    offer(&mut best, self.score(&ins, INF));
                });
            }
        }
        (best, evaluated)
    }

    /// Best insertion with the pickup right after the vehicle's current
    /// position and the dropoff before the last stop.
    pub fn best_pbns(&self, ch: &ContractionHierarchy, cur: &mut CurrentLocDists, bound: Time, cost_pruning: bool) -> (Option<Scored>, u64) {
        let mut survivors = Vec::new();
        let mut evaluated = 0;
        for v in 0..self.fleet.num_vehicles() {
            self.for_each_before_last(v, 0, |ins, p| {
                evaluated += 1;
                self.screen_first_leg(ins, p, bound, cost_pruning, &mut survivors);
            });
        }
        let mut best = None;
        self.finish_first_leg(ch, cur, survivors, &mut best);
        (best, evaluated)
    }

    /// Screens an insertion with `i = 0`. When the vehicle is away from `s_0`,
    /// departing from `s_0` gives a lower bound; candidates whose bound already
    /// exceeds `bound` are dropped before exact distances are fetched.
    pub fn screen_first_leg(&self, ins: Insertion, p: &PickupOption, bound: Time, cost_pruning: bool, out: &mut Vec<FirstLeg>) {
        let v = ins.veh;
        let (lc, base) = self.fleet.location_and_base(v);
        let route = self.fleet.route(v);
        if route.stops[0].loc == lc {
            let mut exact = ins;
            exact.veh_arr_p = base + p.to;
            out.push(FirstLeg { ins: exact, pi: p.pi, exact: true });
            return;
        }
        let lb = self.score(&ins, route.stops[0].dep);
        if !lb.cost.feasible || (cost_pruning && lb.cost.total > bound) {
            return;
        }
        out.push(FirstLeg { ins, pi: p.pi, exact: false });
    }

    /// Resolves current-location distances for screened candidates and scores them.
    pub fn finish_first_leg(&self, ch: &ContractionHierarchy, cur: &mut CurrentLocDists, list: Vec<FirstLeg>, best: &mut Option<Scored>) {
        let pairs: Vec<(usize, usize)> = list.iter().filter(|s| !s.exact).map(|s| (s.ins.veh, s.pi)).collect();
        cur.resolve(ch, self.fleet, self.pd, &pairs);
        for FirstLeg { mut ins, pi, exact } in list {
            let (_, base) = self.fleet.location_and_base(ins.veh);
            if !exact {
                let d = cur.get(ins.veh, pi);
                if d >= INF {
                    continue;
                }
                ins.veh_arr_p = base + d;
            }
            offer(best, self.score(&ins, base));
        }
    }

    pub fn score_at(&self, ins: &Insertion) -> Scored {
        let (_, base) = self.fleet.location_and_base(ins.veh);
        self.score(ins, base)
    }
}

/// An `i = 0` candidate awaiting its exact current-location distance.
#[derive(Debug, Clone, Copy)]
pub struct FirstLeg {
    pub ins: Insertion,
    pub pi: usize,
    pub exact: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::CostParameters;
    use crate::fleet_state::{Booking, Stop, Vehicle};
    use crate::search_core::dijkstra;
    use crate::synth;
    use proptest::prelude::*;

    fn ts() -> Time {
        60
    }

    /// Vehicle on LINE driving v0 -> v3 with one rider, planned at 0.
    fn line_route(slack: Time) -> (ContractionHierarchy, FleetState) {
        let net = synth::line();
        let ch = ContractionHierarchy::build(&net.veh);
        let params = CostParameters { t_stop: ts(), ..CostParameters::default() };
        let veh = Vehicle { id: 0, start: 0, capacity: 4, t_start: 0, t_end: 1_000_000 };
        let mut f = FleetState::new(vec![veh], params);
        f.advance_time(&ch, 0);
        let ins = Insertion {
            veh: 0,
            i: 0,
            j: 0,
            p: 0,
            walk_p: 0,
            d: 3,
            walk_d: 0,
            veh_arr_p: 0,
            dist_p_next: INF,
            dist_p_d: 300,
            dist_sj_d: INF,
            dist_d_next: INF,
        };
        let ctx = RequestCtx { t_req: 0, t_trip_max: 300 + ts() + slack };
        f.apply_insertion(&ch, &ins, Booking { rider: 1, ctx }).unwrap();
        (ch, f)
    }

    #[test]
    fn entries_respect_leeway() {
        let (ch, f) = line_route(0);
        let mut idx = EllipticIndex::new(4, 1, ts(), true, true);
        idx.sync_vehicle(&ch, f.route(0), 0);
        // Route v0 (picks up) -> v3; the only slack is at the start, which no detour can use.
        let r = f.route(0);
        assert_eq!(r.n(), 2);
        assert_eq!(r.leeway(1), 300);
        let d = idx.query(&ch, &[1, 2], 4);
        let opts = d.leg_options(r, 1, ts());
        assert!(opts.is_empty());
    }

    #[test]
    fn ellipse_membership() {
        let (ch, f) = line_route(1000);
        let mut idx = EllipticIndex::new(4, 1, ts(), true, true);
        idx.sync_vehicle(&ch, f.route(0), 0);
        let r = f.route(0);
        let d = idx.query(&ch, &[0, 1, 2, 3], 2);
        let mut opts = d.leg_options(r, 1, ts());
        opts.sort_unstable();
        // Leg v0 -> v3 with 1000 slack: any vertex on the line fits.
        assert_eq!(opts, vec![(0, 0, 300), (1, 100, 200), (2, 200, 100), (3, 300, 0)]);
    }

    #[test]
    fn resync_removes_stale_entries() {
        let (ch, mut f) = line_route(1000);
        let mut idx = EllipticIndex::new(4, 1, ts(), true, true);
        idx.sync_vehicle(&ch, f.route(0), 0);
        assert!(idx.total_entries() > 0);
        f.finish(&ch);
        idx.sync_vehicle(&ch, f.route(0), 0);
        assert_eq!(idx.total_entries(), 0);
    }

    fn synthetic_route(stops: &[(Vertex, Time, Time)], leeways: &[Time]) -> Route {
        let mut s: Vec<Stop> = stops.iter().enumerate().map(|(k, &(loc, arr, dep))| Stop::new(k as u32, loc, arr, dep)).collect();
        for (k, &l) in leeways.iter().enumerate() {
            s[k + 1].deadline = s[k].dep + l;
        }
        Route::from_stops(s)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        /// Reported distances equal Dijkstra, and every point inside an
        /// ellipse is reported, with and without pruning and sorting.
        #[test]
        fn distances_exact_and_complete(seed in 0u64..500, k in 1usize..6, sorted in any::<bool>(), prune in any::<bool>()) {
            let net = synth::random_network(seed, 80, 120, 1.0);
            let ch = ContractionHierarchy::build(&net.veh);
            let t_stop = 30;
            let locs: Vec<Vertex> = (0..4).map(|x| ((seed as u32) * 13 + x * 19) % 80).collect();
            let mut stops = Vec::new();
            let mut t = 0;
            for (k2, &l) in locs.iter().enumerate() {
                if k2 > 0 {
                    t += ch.query(locs[k2 - 1], l).unwrap();
                }
                stops.push((l, t, t + t_stop));
                t += t_stop;
            }
            stops[0].2 = stops[0].1;
            let legs: Vec<Time> = (0..3).map(|i| stops[i + 1].1 - stops[i].2).collect();
            let leeways: Vec<Time> = legs.iter().enumerate().map(|(i, &l)| l + 150 * i as Time + 200).collect();
            let route = synthetic_route(&stops, &leeways);
            let mut idx = EllipticIndex::new(80, 1, t_stop, sorted, prune);
            idx.sync_vehicle(&ch, &route, 0);
            let xs: Vec<Vertex> = (0..80).collect();
            let dists = idx.query(&ch, &xs, k);
            let fwd = dijkstra(&net.veh, &locs, 1, INF, |_, _| false);
            let rev = dijkstra(&net.veh.reversed(), &locs, 1, INF, |_, _| false);
            let at = |tab: &Vec<(Vertex, Time)>, x: Vertex| tab.binary_search_by_key(&x, |e| e.0).map(|p| tab[p].1).unwrap_or(INF);
            for i in 0..3 {
                let opts = dists.leg_options(&route, i, t_stop);
                for x in 0..80u32 {
                    let a = at(&fwd[i], x);
                    let b = at(&rev[i + 1], x);
                    let inside = a < INF && b < INF && a + t_stop + b <= route.leeway(i);
                    let got = opts.iter().find(|o| o.0 == x as usize);
                    prop_assert_eq!(got.is_some(), inside);
                    if let Some(&(_, ga, gb)) = got {
                        prop_assert_eq!((ga, gb), (a, b));
                    }
                }
            }
        }
    }
}
