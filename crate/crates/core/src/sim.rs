//! Request-by-request simulation: advance the fleet, find the cheapest way to
//! serve each request, apply it, and collect rider and fleet statistics.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::ch::ContractionHierarchy;
use crate::cost_model::{offer, pseudo_insertion_cost, CostBreakdown, CostParameters, InsertionKind, RequestCtx, Scored};
use crate::elliptic::{CurrentLocDists, EllipticCounters, EllipticIndex, RequestView};
use crate::fleet_state::{Booking, FleetState, Vehicle};
use crate::instance::Request;
use crate::last_stop::{best_dals, best_pals, LastStopCounters, LastStopIndex, SearchConfig, Strategy};
use crate::pd_locations::{find_pd_locations, max_pd_dist, pd_distance_search, PdCounters, PdSet};
use crate::road_network::{Graph, RoadNetworkPair};
use crate::{Time, Vertex, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub params: CostParameters,
    pub strategy_pals: Strategy,
    pub strategy_dals: Strategy,
    pub k_elliptic: usize,
    pub k_pd: usize,
    /// Bundle width of the last-stop BCH strategies.
    pub k_laststop: usize,
    /// Bundle width of the last-stop Dijkstra strategy.
    pub k_laststop_dijkstra: usize,
    pub sorted_buckets: bool,
    /// Truncate leg entries at the leeway and stop leg scans early.
    pub prune_elliptic: bool,
    /// Bound the pickup-dropoff searches by an upper bound on their distances.
    pub pd_radius: bool,
    pub cost_pruning: bool,
    pub domination: bool,
    /// Run the route consistency checker after every applied insertion.
    pub check_routes: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: CostParameters::default(),
            strategy_pals: Strategy::CollectiveBch,
            strategy_dals: Strategy::CollectiveBch,
            k_elliptic: 16,
            k_pd: 32,
            k_laststop: 8,
            k_laststop_dijkstra: 64,
            sorted_buckets: true,
            prune_elliptic: true,
            pd_radius: true,
            cost_pruning: true,
            domination: true,
            check_routes: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.params.validate()?;
        for (name, k) in [("k_elliptic", self.k_elliptic), ("k_pd", self.k_pd), ("k_laststop", self.k_laststop), ("k_laststop_dijkstra", self.k_laststop_dijkstra)] {
            if k == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }
}

/// A network with everything the engine needs precomputed.
pub struct PreparedNetwork {
    pub net: RoadNetworkPair,
    pub veh_ch: ContractionHierarchy,
    pub psg_ch: ContractionHierarchy,
    pub veh_rev: Graph,
    pub psg_rev: Graph,
}

impl PreparedNetwork {
    pub fn new(net: RoadNetworkPair) -> Self {
        let veh_ch = ContractionHierarchy::build(&net.veh);
        let psg_ch = ContractionHierarchy::build(&net.psg);
        Self::with_ch(net, veh_ch, psg_ch)
    }

    pub fn with_ch(net: RoadNetworkPair, veh_ch: ContractionHierarchy, psg_ch: ContractionHierarchy) -> Self {
        let veh_rev = net.veh.reversed();
        let psg_rev = net.psg.reversed();
        PreparedNetwork { net, veh_ch, psg_ch, veh_rev, psg_rev }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Decision {
    Vehicle {
        vehicle: u32,
        kind: InsertionKind,
        i: usize,
        j: usize,
        pickup: Vertex,
        dropoff: Vertex,
        walk_p: Time,
        walk_d: Time,
        /// Route after applying: (location, arrival, departure) per stop.
        route: Vec<(Vertex, Time, Time)>,
    },
    Walk {
        walk: Time,
    },
    Unserved,
}

/// One line of the outcome log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DispatchOutcome {
    pub request: u32,
    pub t_req: Time,
    pub decision: Decision,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DispatchCounters {
    pub pickups: u64,
    pub dropoffs: u64,
    pub pd: PdCountersOut,
    pub elliptic_edges: u64,
    pub elliptic_scanned: u64,
    pub ordinary_evaluated: u64,
    pub pbns_evaluated: u64,
    pub current_loc_pairs: u64,
    pub pals: LastStopCounters,
    pub dals: LastStopCounters,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PdCountersOut {
    pub edges_relaxed: u64,
    pub entries_scanned: u64,
}

impl From<PdCounters> for PdCountersOut {
    fn from(c: PdCounters) -> Self {
        PdCountersOut { edges_relaxed: c.edges_relaxed, entries_scanned: c.entries_scanned }
    }
}

/// Wall-clock nanoseconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PhaseTimes {
    pub pd: u64,
    pub elliptic: u64,
    pub ordinary: u64,
    pub pbns: u64,
    pub pals: u64,
    pub dals: u64,
    pub apply: u64,
}

/// The chosen option before it is applied.
#[derive(Debug, Clone)]
pub struct Choice {
    pub request: Request,
    pub ctx: RequestCtx,
    pub pseudo: CostBreakdown,
    pub walk: Time,
    pub best: Option<Scored>,
    /// Cheapest option per phase, for diagnostics and strategy comparisons.
    pub per_phase: [Option<Scored>; 4],
    pub counters: DispatchCounters,
    pub times: PhaseTimes,
}

impl Choice {
    pub fn uses_vehicle(&self) -> bool {
        matches!(&self.best, Some(b) if b.cost.total < self.pseudo.total)
    }

    pub fn cost(&self) -> CostBreakdown {
        match &self.best {
            Some(b) if b.cost.total < self.pseudo.total => b.cost,
            _ => self.pseudo,
        }
    }
}

pub const PHASES: [&str; 4] = ["ordinary", "pbns", "pals", "dals"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationStats {
    pub requests: usize,
    pub served_by_vehicle: usize,
    pub walked: usize,
    pub unserved: usize,
    pub mean_wait: f64,
    pub p95_wait: Time,
    pub mean_ride: f64,
    pub mean_trip: f64,
    pub mean_empty_drive: f64,
    pub mean_occupied_drive: f64,
    pub mean_stop: f64,
    pub mean_operation: f64,
}

pub struct Engine<'a> {
    prep: &'a PreparedNetwork,
    cfg: SimConfig,
    fleet: FleetState,
    elliptic: EllipticIndex,
    last: LastStopIndex,
    walkers: Vec<(u32, Time)>,
    unserved: usize,
    requests: usize,
}

fn nanos(t: Instant) -> u64 {
    t.elapsed().as_nanos() as u64
}

impl<'a> Engine<'a> {
    pub fn new(prep: &'a PreparedNetwork, vehicles: Vec<Vehicle>, cfg: SimConfig) -> Result<Self, String> {
        cfg.validate()?;
        let n = prep.net.num_vertices();
        for v in &vehicles {
            if v.start as usize >= n {
                return Err(format!("vehicle {} starts at vertex {} outside the network", v.id, v.start));
            }
        }
        let nv = vehicles.len();
        let fleet = FleetState::new(vehicles, cfg.params);
        let mut e = Engine {
            prep,
            cfg,
            fleet,
            elliptic: EllipticIndex::new(n, nv, cfg.params.t_stop, cfg.sorted_buckets, cfg.prune_elliptic),
            last: LastStopIndex::new(n, nv, cfg.sorted_buckets),
            walkers: Vec::new(),
            unserved: 0,
            requests: 0,
        };
        for v in 0..nv {
            e.sync(v);
        }
        Ok(e)
    }

    pub fn fleet(&self) -> &FleetState {
        &self.fleet
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn prepared(&self) -> &PreparedNetwork {
        self.prep
    }

    pub fn elliptic_entries(&self) -> usize {
        self.elliptic.total_entries()
    }

    pub fn last_stop_entries(&self) -> usize {
        self.last.total_entries()
    }

    fn sync(&mut self, v: usize) {
        let ch = &self.prep.veh_ch;
        self.elliptic.sync_vehicle(ch, self.fleet.route(v), v);
        self.last.sync_vehicle(ch, self.fleet.route(v), v);
    }

    /// Executes the schedule up to time `t`.
    pub fn advance(&mut self, t: Time) {
        for v in self.fleet.advance_time(&self.prep.veh_ch, t) {
            self.sync(v);
        }
    }

    /// Advances to the request time and finds the cheapest option without applying it.
    pub fn decide(&mut self, r: &Request) -> Choice {
        self.advance(r.t_req);
        let prep = self.prep;
        let cfg = self.cfg;
        let params = cfg.params;
        let ch = &prep.veh_ch;
        let mut counters = DispatchCounters::default();
        let mut times = PhaseTimes::default();

        let clock = Instant::now();
        let od = ch.query(r.origin, r.dest).unwrap_or(INF);
        let ctx = RequestCtx { t_req: r.t_req, t_trip_max: params.t_trip_max(od) };
        let walk = prep.psg_ch.query(r.origin, r.dest).unwrap_or(INF);
        let pseudo = pseudo_insertion_cost(&params, &ctx, walk);
        let pd = if prep.net.psg_accessible(r.origin) && prep.net.psg_accessible(r.dest) {
            find_pd_locations(&prep.net, &prep.psg_rev, r.origin, r.dest, params.radius)
        } else {
            PdSet::default()
        };
        counters.pickups = pd.pickups.len() as u64;
        counters.dropoffs = pd.dropoffs.len() as u64;
        let ps: Vec<Vertex> = pd.pickups.iter().map(|e| e.0).collect();
        let ds: Vec<Vertex> = pd.dropoffs.iter().map(|e| e.0).collect();
        let mu = if cfg.pd_radius && !pd.is_empty() { max_pd_dist(ch, &prep.net.veh, &prep.veh_rev, r.origin, r.dest, &ps, &ds) } else { INF };
        let mut pdc = PdCounters::default();
        let matrix = pd_distance_search(ch, &ps, &ds, mu, cfg.k_pd, &mut pdc);
        counters.pd = pdc.into();
        times.pd = nanos(clock);

        let clock = Instant::now();
        let before: EllipticCounters = self.elliptic.counters;
        let pick = self.elliptic.query(ch, &ps, cfg.k_elliptic);
        let drop = self.elliptic.query(ch, &ds, cfg.k_elliptic);
        counters.elliptic_edges = self.elliptic.counters.query_edges - before.query_edges;
        counters.elliptic_scanned = self.elliptic.counters.entries_scanned - before.entries_scanned;
        times.elliptic = nanos(clock);

        let view = RequestView::new(&self.fleet, &ctx, &pd, &matrix, &pick, &drop);
        let mut cur = CurrentLocDists::default();
        let mut best: Option<Scored> = None;
        let mut per_phase: [Option<Scored>; 4] = [None; 4];
        let bound = |best: &Option<Scored>| best.as_ref().map_or(pseudo.total, |b| b.cost.total.min(pseudo.total));

        let clock = Instant::now();
        let (ord, evaluated) = view.best_ordinary();
        counters.ordinary_evaluated = evaluated;
        per_phase[0] = ord;
        if let Some(s) = ord {
            offer(&mut best, s);
        }
        times.ordinary = nanos(clock);

        let clock = Instant::now();
        let (pbns, evaluated) = view.best_pbns(ch, &mut cur, bound(&best), cfg.cost_pruning);
        counters.pbns_evaluated = evaluated;
        per_phase[1] = pbns;
        if let Some(s) = pbns {
            offer(&mut best, s);
        }
        times.pbns = nanos(clock);

        let clock = Instant::now();
        let sc = |strategy| SearchConfig {
            strategy,
            k: if strategy == Strategy::Dijkstra { cfg.k_laststop_dijkstra } else { cfg.k_laststop },
            cost_pruning: cfg.cost_pruning, domination: cfg.domination };
        let pals = best_pals(&view, ch, &prep.veh_rev, &self.last, &sc(cfg.strategy_pals), bound(&best), &mut counters.pals);
        per_phase[2] = pals;
        if let Some(s) = pals {
            offer(&mut best, s);
        }
        times.pals = nanos(clock);

        let clock = Instant::now();
        let dals = best_dals(&view, ch, &prep.veh_rev, &self.last, &sc(cfg.strategy_dals), bound(&best), &mut cur, &mut counters.dals);
        per_phase[3] = dals;
        if let Some(s) = dals {
            offer(&mut best, s);
        }
        times.dals = nanos(clock);
        counters.current_loc_pairs = cur.resolved_pairs;

        Choice { request: *r, ctx, pseudo, walk, best, per_phase, counters, times }
    }

    /// Applies a choice made by [`Engine::decide`] in the current state.
    pub fn commit(&mut self, mut choice: Choice) -> (DispatchOutcome, DispatchCounters, PhaseTimes) {
        let clock = Instant::now();
        let r = choice.request;
        self.requests += 1;
        let decision = if choice.uses_vehicle() {
            let b = choice.best.expect("vehicle option");
            let ins = b.ins;
            let n = self.fleet.route(ins.veh).n();
            if let Err(e) = self.fleet.apply_insertion(&self.prep.veh_ch, &ins, Booking { rider: r.id, ctx: choice.ctx }) {
                panic!("request {}: chosen insertion rejected: {e}", r.id);
            }
            self.sync(ins.veh);
            if self.cfg.check_routes {
                if let Err(e) = self.fleet.check_route(ins.veh) {
                    panic!("request {}: route of vehicle {} inconsistent: {e}", r.id, b.key.0);
                }
            }
            let route = self.fleet.route(ins.veh).stops.iter().map(|s| (s.loc, s.arr, s.dep)).collect();
            Decision::Vehicle {
                vehicle: b.key.0,
                kind: ins.kind(n),
                i: ins.i,
                j: ins.j,
                pickup: ins.p,
                dropoff: ins.d,
                walk_p: ins.walk_p,
                walk_d: ins.walk_d,
                route,
            }
        } else if choice.pseudo.feasible {
            self.walkers.push((r.id, choice.walk));
            Decision::Walk { walk: choice.walk }
        } else {
            self.unserved += 1;
            Decision::Unserved
        };
        choice.times.apply = nanos(clock);
        let outcome = DispatchOutcome { request: r.id, t_req: r.t_req, decision, cost: choice.cost() };
        (outcome, choice.counters, choice.times)
    }

    pub fn dispatch(&mut self, r: &Request) -> (DispatchOutcome, DispatchCounters, PhaseTimes) {
        let c = self.decide(r);
        self.commit(c)
    }

    /// Runs every route to completion.
    pub fn finish(&mut self) {
        self.advance(INF);
    }

    /// Statistics over riders whose trips are complete and all vehicles.
    pub fn stats(&self) -> SimulationStats {
        let mut waits = Vec::new();
        let mut rides = Vec::new();
        let mut trips = Vec::new();
        let mut served = 0;
        for r in self.fleet.riders() {
            served += 1;
            if let (Some(dep), Some(arr)) = (r.dep_p, r.arr_d) {
                waits.push(dep - r.t_req);
                rides.push(arr - dep);
                trips.push(arr + r.walk_d - r.t_req);
            }
        }
        for &(_, walk) in &self.walkers {
            waits.push(0);
            rides.push(0);
            trips.push(walk);
        }
        let times = self.fleet.vehicle_times();
        let fleet_mean = |f: &dyn Fn(usize) -> Time| mean(&(0..times.len()).map(f).collect::<Vec<_>>());
        SimulationStats {
            requests: self.requests,
            served_by_vehicle: served,
            walked: self.walkers.len(),
            unserved: self.unserved,
            mean_wait: mean(&waits),
            p95_wait: percentile_nearest_rank(&waits, 95),
            mean_ride: mean(&rides),
            mean_trip: mean(&trips),
            mean_empty_drive: fleet_mean(&|v| times[v].empty),
            mean_occupied_drive: fleet_mean(&|v| times[v].occupied),
            mean_stop: fleet_mean(&|v| times[v].stopped),
            mean_operation: fleet_mean(&|v| times[v].operation()),
        }
    }
}

fn mean(xs: &[Time]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<Time>() as f64 / xs.len() as f64
    }
}

/// Smallest value with at least `pct` percent of the values at or below it; 0 when empty.
pub fn percentile_nearest_rank(xs: &[Time], pct: usize) -> Time {
    if xs.is_empty() {
        return 0;
    }
    let mut v = xs.to_vec();
    v.sort_unstable();
    let rank = (pct * v.len()).div_ceil(100).max(1);
    v[rank - 1]
}

pub struct RunResult {
    pub outcomes: Vec<DispatchOutcome>,
    pub counters: Vec<DispatchCounters>,
    pub times: Vec<PhaseTimes>,
    pub stats: SimulationStats,
}

/// Simulates all requests in order and runs the routes to completion.
pub fn run(prep: &PreparedNetwork, vehicles: Vec<Vehicle>, requests: &[Request], cfg: SimConfig) -> Result<RunResult, String> {
    run_observed(prep, vehicles, requests, cfg, |_, _| Ok(()))
}

/// Like [`run`], calling `observe` with each decision before it is applied.
/// An error from `observe` aborts the run.
pub fn run_observed(
    prep: &PreparedNetwork,
    vehicles: Vec<Vehicle>,
    requests: &[Request],
    cfg: SimConfig,
    mut observe: impl FnMut(&Engine, &Choice) -> Result<(), String>,
) -> Result<RunResult, String> {
    let n = prep.net.num_vertices();
    for r in requests {
        if r.origin as usize >= n || r.dest as usize >= n {
            return Err(format!("request {} references a vertex outside the network", r.id));
        }
    }
    let mut sorted = requests.to_vec();
    sorted.sort_by_key(|r| (r.t_req, r.id));
    let mut engine = Engine::new(prep, vehicles, cfg)?;
    let mut out = RunResult { outcomes: Vec::new(), counters: Vec::new(), times: Vec::new(), stats: engine.stats() };
    for r in &sorted {
        let choice = engine.decide(r);
        observe(&engine, &choice)?;
        let (o, c, t) = engine.commit(choice);
        out.outcomes.push(o);
        out.counters.push(c);
        out.times.push(t);
    }
    engine.finish();
    out.stats = engine.stats();
    Ok(out)
}

pub fn write_outcome_log(w: &mut impl Write, outcomes: &[DispatchOutcome]) -> std::io::Result<()> {
    for o in outcomes {
        serde_json::to_writer(&mut *w, o)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn outcome_log_string(outcomes: &[DispatchOutcome]) -> String {
    let mut buf = Vec::new();
    write_outcome_log(&mut buf, outcomes).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn write_stats_csv(w: &mut impl Write, s: &SimulationStats) -> std::io::Result<()> {
    writeln!(
        w,
        "requests,served_by_vehicle,walked,unserved,mean_wait,p95_wait,mean_ride,mean_trip,mean_empty_drive,mean_occupied_drive,mean_stop,mean_operation"
    )?;
    writeln!(
        w,
        "{},{},{},{},{:.3},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
        s.requests,
        s.served_by_vehicle,
        s.walked,
        s.unserved,
        s.mean_wait,
        s.p95_wait,
        s.mean_ride,
        s.mean_trip,
        s.mean_empty_drive,
        s.mean_occupied_drive,
        s.mean_stop,
        s.mean_operation
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn line_prep() -> PreparedNetwork {
        PreparedNetwork::new(synth::line())
    }

    /// LINE with every footpath taking `walk` instead of 100.
    fn line_walking(walk: Time) -> PreparedNetwork {
        let veh: Vec<_> = synth::line().veh.edges();
        let psg: Vec<_> = veh.iter().map(|&(a, b, _)| (a, b, walk)).collect();
        PreparedNetwork::new(RoadNetworkPair::new(4, &veh, &psg, &[], &[], None).unwrap())
    }

    fn cfg(radius: Time) -> SimConfig {
        SimConfig {
            params: CostParameters { t_stop: 60, radius, ..CostParameters::default() },
            check_routes: true,
            ..SimConfig::default()
        }
    }

    #[test]
    fn nearest_rank() {
        assert_eq!(percentile_nearest_rank(&[], 95), 0);
        assert_eq!(percentile_nearest_rank(&[5], 95), 5);
        let xs: Vec<Time> = (1..=20).collect();
        assert_eq!(percentile_nearest_rank(&xs, 95), 19);
        assert_eq!(percentile_nearest_rank(&xs, 100), 20);
    }

    #[test]
    fn empty_fleet_walks() {
        let prep = line_prep();
        let res = run(&prep, vec![], &[Request { id: 0, origin: 1, dest: 3, t_req: 0 }], cfg(0)).unwrap();
        assert_eq!(res.outcomes[0].decision, Decision::Walk { walk: 200 });
        assert_eq!(res.outcomes[0].cost.total, 200);
        assert_eq!(res.stats.walked, 1);
        assert_eq!(res.stats.mean_trip, 200.0);
    }

    #[test]
    fn zero_requests() {
        let prep = line_prep();
        let veh = Vehicle { id: 0, start: 0, capacity: 4, t_start: 0, t_end: 100_000 };
        let res = run(&prep, vec![veh], &[], cfg(0)).unwrap();
        assert!(res.outcomes.is_empty());
        assert_eq!(res.stats.mean_operation, 0.0);
        assert_eq!(res.stats.mean_wait, 0.0);
    }

    #[test]
    fn line_single_request_timetable() {
        // Vehicle at v0 picks up at v2 (200 away) and drives on to v3.
        let prep = line_walking(10_000);
        let veh = Vehicle { id: 0, start: 0, capacity: 4, t_start: 0, t_end: 100_000 };
        let r = Request { id: 0, origin: 2, dest: 3, t_req: 0 };
        let res = run(&prep, vec![veh], &[r], cfg(0)).unwrap();
        let Decision::Vehicle { kind, route, .. } = &res.outcomes[0].decision else { panic!("expected a vehicle") };
        assert_eq!(*kind, InsertionKind::Pals);
        assert_eq!(route, &vec![(0, 0, 0), (2, 200, 260), (3, 360, 420)]);
        // detour 420, trip 260 + 100 = 360, no penalties.
        assert_eq!(res.outcomes[0].cost.total, 420 + 360);
        let s = &res.stats;
        assert_eq!((s.mean_wait, s.mean_ride, s.mean_trip), (260.0, 100.0, 360.0));
        assert_eq!((s.mean_empty_drive, s.mean_occupied_drive, s.mean_stop), (200.0, 100.0, 120.0));
        assert_eq!(s.mean_operation, 420.0);
    }

    #[test]
    fn pseudo_wins_ties() {
        // Vehicle waiting at the origin: departs after one stop time, 60 + 100
        // to the destination, so detour 60 + 100 + 60 and trip 160.
        let veh = Vehicle { id: 0, start: 2, capacity: 4, t_start: 0, t_end: 100_000 };
        let r = Request { id: 0, origin: 2, dest: 3, t_req: 0 };
        let vehicle_cost = 220 + 160;
        let tie = run(&line_walking(vehicle_cost), vec![veh], &[r], cfg(0)).unwrap();
        assert_eq!(tie.outcomes[0].decision, Decision::Walk { walk: vehicle_cost });
        let slower = run(&line_walking(vehicle_cost + 1), vec![veh], &[r], cfg(0)).unwrap();
        assert!(matches!(slower.outcomes[0].decision, Decision::Vehicle { .. }));
        assert_eq!(slower.outcomes[0].cost.total, vehicle_cost);
    }

    #[test]
    fn unreachable_is_unserved() {
        let net = RoadNetworkPair::new(2, &[(0, 1, 10)], &[(0, 1, 10)], &[], &[], None).unwrap();
        let prep = PreparedNetwork::new(net);
        let veh = Vehicle { id: 0, start: 0, capacity: 1, t_start: 0, t_end: 1000 };
        let res = run(&prep, vec![veh], &[Request { id: 5, origin: 1, dest: 0, t_req: 0 }], cfg(0)).unwrap();
        assert_eq!(res.outcomes[0].decision, Decision::Unserved);
        assert_eq!(res.stats.unserved, 1);
    }

    #[test]
    fn advance_granularity_does_not_matter() {
        let net = synth::random_network(3, 40, 60, 0.7);
        let prep = PreparedNetwork::new(net);
        let (vs, rs) = synth::random_demand(3, &prep.net, 4, 30, 6000);
        let c = SimConfig { params: CostParameters { t_stop: 60, radius: 400, ..CostParameters::default() }, check_routes: true, ..SimConfig::default() };
        let direct = run(&prep, vs.clone(), &rs, c).unwrap();
        let mut e = Engine::new(&prep, vs, c).unwrap();
        let mut outcomes = Vec::new();
        for r in &rs {
            let mut t = e.fleet().clock().max(0);
            while t < r.t_req {
                e.advance(t);
                t += 37;
            }
            outcomes.push(e.dispatch(r).0);
        }
        let mut t = e.fleet().clock();
        for _ in 0..2000 {
            t += 50;
            e.advance(t);
        }
        e.finish();
        assert_eq!(outcomes, direct.outcomes);
        assert_eq!(e.stats(), direct.stats);
    }
}
