//! Brute-force reference dispatcher.
//!
//! Distances come from plain Dijkstra runs over every source. Each candidate
//! insertion is judged by writing out the new stop list and replaying its
//! timetable from scratch; nothing here reuses the engine's searches or
//! cost code. Meant for small instances only (quadratic memory).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use dispatch_core::cost_model::{CostParameters, Insertion};
use dispatch_core::fleet_state::{FleetState, RiderId};
use dispatch_core::instance::Request;
use dispatch_core::road_network::RoadNetworkPair;
use dispatch_core::{Time, Vertex, INF};

/// All-pairs shortest paths by repeated Dijkstra.
pub struct Apsp {
    n: usize,
    d: Vec<Time>,
}

impl Apsp {
    pub fn new(n: usize, edges: &[(Vertex, Vertex, Time)]) -> Self {
        let mut adj: Vec<Vec<(usize, Time)>> = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            adj[a as usize].push((b as usize, w));
        }
        let mut d = vec![INF; n * n];
        for s in 0..n {
            let row = &mut d[s * n..(s + 1) * n];
            let mut heap = BinaryHeap::new();
            row[s] = 0;
            heap.push(Reverse((0, s)));
            while let Some(Reverse((du, u))) = heap.pop() {
                if du > row[u] {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    if du + w < row[v] {
                        row[v] = du + w;
                        heap.push(Reverse((du + w, v)));
                    }
                }
            }
        }
        Apsp { n, d }
    }

    pub fn get(&self, a: Vertex, b: Vertex) -> Time {
        self.d[a as usize * self.n + b as usize]
    }
}

/// One enumerated vehicle option with its replayed cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub veh: usize,
    pub veh_id: u32,
    pub i: usize,
    pub j: usize,
    pub p: Vertex,
    pub walk_p: Time,
    pub d: Vertex,
    pub walk_d: Time,
    pub detour: Time,
    pub trip: Time,
    pub added_trip: Time,
    pub wait_violation: Time,
    pub trip_violation: Time,
    pub total: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBest {
    pub pseudo: Time,
    /// Cheapest feasible vehicle option (ties by vehicle id, i, j, pickup, dropoff).
    pub vehicle: Option<Candidate>,
}

impl OracleBest {
    /// Cost of the best option; walking wins ties.
    pub fn total(&self) -> Time {
        match &self.vehicle {
            Some(c) if c.total < self.pseudo => c.total,
            _ => self.pseudo,
        }
    }
}

#[derive(Clone)]
struct Slot {
    loc: Vertex,
    ready: Time,
    boards: Vec<RiderId>,
    alights: Vec<RiderId>,
    /// Index in the current route, `None` for new stops.
    old: Option<usize>,
}

pub struct Oracle {
    veh: Apsp,
    psg: Apsp,
    boarding: Vec<bool>,
}

impl Oracle {
    pub fn new(net: &RoadNetworkPair) -> Self {
        let n = net.num_vertices();
        Oracle {
            veh: Apsp::new(n, &net.veh.edges()),
            psg: Apsp::new(n, &net.psg.edges()),
            boarding: (0..n as Vertex).map(|v| net.is_boarding(v)).collect(),
        }
    }

    pub fn dist_veh(&self, a: Vertex, b: Vertex) -> Time {
        self.veh.get(a, b)
    }

    pub fn dist_psg(&self, a: Vertex, b: Vertex) -> Time {
        self.psg.get(a, b)
    }

    /// Where vehicle `v` can start a new leg: the next vertex on its current
    /// edge, and when it gets there (never before its planned departure).
    pub fn start_point(fleet: &FleetState, v: usize) -> (Vertex, Time) {
        let r = fleet.route(v);
        let t = fleet.clock();
        let s0 = &r.stops[0];
        if r.stops.len() == 1 || t <= s0.dep {
            return (s0.loc, t.max(s0.dep));
        }
        for &(u, a) in r.leg0_path() {
            if a >= t {
                return (u, a);
            }
        }
        (r.stops[1].loc, r.stops[1].arr.max(t))
    }

    fn ready_of(fleet: &FleetState, riders: &[RiderId]) -> Time {
        riders
            .iter()
            .map(|id| {
                let r = fleet.rider(*id).expect("booked rider");
                r.t_req + r.walk_p
            })
            .max()
            .unwrap_or(Time::MIN)
    }

    /// Replays `slots` from a departure at `start`: returns (arr, dep) per slot.
    fn replay(&self, ts: Time, slots: &[Slot], start: Time) -> Option<Vec<(Time, Time)>> {
        let mut out = vec![(start, start)];
        for k in 1..slots.len() {
            let d = self.veh.get(slots[k - 1].loc, slots[k].loc);
            if d >= INF {
                return None;
            }
            let arr = out[k - 1].1 + d;
            out.push((arr, (arr + ts).max(slots[k].ready)));
        }
        Some(out)
    }

    fn hard_constraints_hold(&self, fleet: &FleetState, v: usize, slots: &[Slot], times: &[(Time, Time)], onboard: i64) -> bool {
        let veh = fleet.vehicle(v);
        let mut occ = onboard;
        for (k, s) in slots.iter().enumerate().skip(1) {
            occ += s.boards.len() as i64 - s.alights.len() as i64;
            if occ > veh.capacity as i64 {
                return false;
            }
            for id in &s.boards {
                if let Some(r) = fleet.rider(*id) {
                    if times[k].1 > r.max_dep {
                        return false;
                    }
                }
            }
            for id in &s.alights {
                if let Some(r) = fleet.rider(*id) {
                    if times[k].0 > r.max_arr {
                        return false;
                    }
                }
            }
        }
        slots.len() == 1 || times.last().unwrap().0 < veh.t_end
    }

    fn current_slots(fleet: &FleetState, v: usize) -> Vec<Slot> {
        fleet
            .route(v)
            .stops
            .iter()
            .enumerate()
            .map(|(a, s)| Slot {
                loc: s.loc,
                ready: if a == 0 { Time::MIN } else { Self::ready_of(fleet, &s.pickups) },
                boards: if a == 0 { Vec::new() } else { s.pickups.clone() },
                alights: if a == 0 { Vec::new() } else { s.dropoffs.clone() },
                old: Some(a),
            })
            .collect()
    }

    fn onboard_at_start(slots: &[Slot]) -> i64 {
        slots.iter().skip(1).map(|s| s.alights.len() as i64 - s.boards.len() as i64).sum()
    }

    /// Every feasible vehicle option for `r` in the current state.
    pub fn candidates(&self, fleet: &FleetState, params: &CostParameters, r: &Request) -> Vec<Candidate> {
        const NEW: RiderId = RiderId::MAX;
        let ts = params.t_stop;
        let t_trip_max = self.t_trip_max(params, r);
        let n = self.boarding.len() as Vertex;
        let pickups: Vec<(Vertex, Time)> =
            (0..n).filter(|&x| self.boarding[x as usize]).map(|x| (x, self.psg.get(r.origin, x))).filter(|e| e.1 <= params.radius).collect();
        let dropoffs: Vec<(Vertex, Time)> =
            (0..n).filter(|&x| self.boarding[x as usize]).map(|x| (x, self.psg.get(x, r.dest))).filter(|e| e.1 <= params.radius).collect();
        let mut out = Vec::new();
        for v in 0..fleet.num_vehicles() {
            let route = fleet.route(v);
            let nst = route.stops.len() - 1;
            let base_slots = Self::current_slots(fleet, v);
            let onboard = Self::onboard_at_start(&base_slots);
            let old_end = if nst == 0 { fleet.clock().max(route.stops[0].dep) } else { route.stops[nst].arr + ts };
            let (lc, base) = Self::start_point(fleet, v);
            for i in 0..=nst {
                for j in i..=nst {
                    for &(p, wp) in &pickups {
                        for &(d, wd) in &dropoffs {
                            if p == d {
                                continue;
                            }
                            let virtual_start = i == 0 && (lc != route.stops[0].loc || base != route.stops[0].dep);
                            let start = if virtual_start { base } else { route.stops[0].dep };
                            let merge_p = i >= 1 && base_slots[i].loc == p;
                            let merge_d = j >= 1 && i < j && base_slots[j].loc == d;
                            let (mut pk, mut dk) = (0, 0);
                            let mut slots = Vec::with_capacity(nst + 3);
                            for (a, old) in base_slots.iter().enumerate() {
                                let mut s = old.clone();
                                if a == 0 && virtual_start {
                                    s = Slot { loc: lc, ready: Time::MIN, boards: vec![], alights: vec![], old: None };
                                }
                                if a == i && merge_p {
                                    s.boards.push(NEW);
                                    s.ready = s.ready.max(r.t_req + wp);
                                    pk = slots.len();
                                }
                                if a == j && merge_d {
                                    s.alights.push(NEW);
                                    dk = slots.len();
                                }
                                slots.push(s);
                                if a == i && !merge_p {
                                    pk = slots.len();
                                    slots.push(Slot { loc: p, ready: r.t_req + wp, boards: vec![NEW], alights: vec![], old: None });
                                }
                                if a == j && !merge_d {
                                    dk = slots.len();
                                    slots.push(Slot { loc: d, ready: Time::MIN, boards: vec![], alights: vec![NEW], old: None });
                                }
                            }
                            let Some(times) = self.replay(ts, &slots, start) else { continue };
                            if !self.hard_constraints_hold(fleet, v, &slots, &times, onboard) {
                                continue;
                            }
                            let t_dep_p = times[pk].1;
                            let arr_d = times[dk].0;
                            let last = slots.len() - 1;
                            let detour = times[last].0 + ts - old_end;
                            let trip = arr_d + wd - r.t_req;
                            let mut added = 0;
                            for (k, s) in slots.iter().enumerate().skip(1) {
                                if let Some(a) = s.old {
                                    let n_old = s.alights.iter().filter(|&&x| x != NEW).count() as Time;
                                    added += n_old * (times[k].0 - route.stops[a].arr);
                                }
                            }
                            let wait_violation = params.gamma_wait * (t_dep_p - r.t_req - params.t_wait_max).max(0);
                            let trip_violation = if t_trip_max >= INF { 0 } else { params.gamma_trip * (trip - t_trip_max).max(0) };
                            let total = detour + params.omega_trip * (trip + added) + params.omega_walk * (wp + wd) + wait_violation + trip_violation;
                            out.push(Candidate {
                                veh: v,
                                veh_id: fleet.vehicle(v).id,
                                i,
                                j,
                                p,
                                walk_p: wp,
                                d,
                                walk_d: wd,
                                detour,
                                trip,
                                added_trip: added,
                                wait_violation,
                                trip_violation,
                                total,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn t_trip_max(&self, params: &CostParameters, r: &Request) -> Time {
        let od = self.veh.get(r.origin, r.dest);
        if od >= INF {
            INF
        } else {
            params.alpha_num * od / params.alpha_den + params.beta
        }
    }

    pub fn pseudo_cost(&self, params: &CostParameters, r: &Request) -> Time {
        let walk = self.psg.get(r.origin, r.dest);
        if walk >= INF {
            return INF;
        }
        let tmax = self.t_trip_max(params, r);
        let vio = if tmax >= INF { 0 } else { params.gamma_trip * (walk - tmax).max(0) };
        (params.omega_trip + params.omega_walk) * walk + vio
    }

    pub fn best(&self, fleet: &FleetState, params: &CostParameters, r: &Request) -> OracleBest {
        let key = |c: &Candidate| (c.total, c.veh_id, c.i, c.j, c.p, c.d);
        let vehicle = self.candidates(fleet, params, r).into_iter().min_by_key(key);
        OracleBest { pseudo: self.pseudo_cost(params, r), vehicle }
    }

    /// The insertion record the engine uses for `c`, with distances from this oracle.
    pub fn to_insertion(&self, fleet: &FleetState, c: &Candidate) -> Insertion {
        let route = fleet.route(c.veh);
        let n = route.stops.len() - 1;
        let (lc, base) = Self::start_point(fleet, c.veh);
        let (from, dep) = if c.i == 0 { (lc, base) } else { (route.stops[c.i].loc, route.stops[c.i].dep) };
        let next = |a: usize, x: Vertex| if a < n { self.veh.get(x, route.stops[a + 1].loc) } else { INF };
        Insertion {
            veh: c.veh,
            i: c.i,
            j: c.j,
            p: c.p,
            walk_p: c.walk_p,
            d: c.d,
            walk_d: c.walk_d,
            veh_arr_p: dep + self.veh.get(from, c.p),
            dist_p_next: next(c.i, c.p),
            dist_p_d: if c.i == c.j { self.veh.get(c.p, c.d) } else { INF },
            dist_sj_d: if c.i < c.j { self.veh.get(route.stops[c.j].loc, c.d) } else { INF },
            dist_d_next: next(c.j, c.d),
        }
    }

    /// Replays every route from its first stop and checks the stored
    /// timetable, occupancies, rider deadlines and service windows.
    pub fn check_state(&self, fleet: &FleetState) -> Result<(), String> {
        let ts = fleet.params().t_stop;
        let mut seen: BTreeMap<RiderId, (bool, bool)> = BTreeMap::new();
        for v in 0..fleet.num_vehicles() {
            let route = fleet.route(v);
            let slots = Self::current_slots(fleet, v);
            let times = self.replay(ts, &slots, route.stops[0].dep).ok_or_else(|| format!("vehicle {v}: unreachable stop"))?;
            for (k, s) in route.stops.iter().enumerate().skip(1) {
                if (s.arr, s.dep) != times[k] {
                    return Err(format!("vehicle {v} stop {k}: stored ({}, {}) but replay gives {:?}", s.arr, s.dep, times[k]));
                }
                for id in &s.pickups {
                    seen.entry(*id).or_default().0 = true;
                }
                for id in &s.dropoffs {
                    seen.entry(*id).or_default().1 = true;
                }
            }
            if !self.hard_constraints_hold(fleet, v, &slots, &times, Self::onboard_at_start(&slots)) {
                return Err(format!("vehicle {v}: a hard constraint is violated"));
            }
            if Self::onboard_at_start(&slots) < 0 {
                return Err(format!("vehicle {v}: negative occupancy"));
            }
        }
        for r in fleet.riders() {
            let (picked, dropped) = seen.get(&r.id).copied().unwrap_or_default();
            let done_pick = r.dep_p.is_some();
            let done_drop = r.arr_d.is_some();
            if picked == done_pick || dropped == done_drop || (done_drop && !done_pick) {
                return Err(format!("rider {}: inconsistent progress", r.id));
            }
        }
        Ok(())
    }
}
