//! Vehicle routes, rider bookkeeping and route mutation.
//!
//! A route is a stop sequence `s_0..s_n`. `s_0` is the stop the vehicle last
//! reached (or its start position); stops are dropped from the front once the
//! vehicle arrives at the next one.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ch::ContractionHierarchy;
use crate::cost_model::{dropoff_merges, evaluate, pickup_merges, CostParameters, Evaluation, Insertion, RequestCtx};
use crate::{Time, Vertex, INF};

pub type RiderId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Vehicle {
    pub id: u32,
    pub start: Vertex,
    pub capacity: u32,
    pub t_start: Time,
    pub t_end: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stop {
    /// Unique across the fleet; never reused.
    pub id: u32,
    pub loc: Vertex,
    pub arr: Time,
    pub dep: Time,
    /// Latest time a boarding rider reaches the stop on foot.
    pub ready: Time,
    pub pickups: Vec<RiderId>,
    pub dropoffs: Vec<RiderId>,
    pub occ_after: u32,
    /// Earliest dropoff deadline of riders alighting here.
    pub max_arr: Time,
    /// Earliest pickup deadline of riders boarding here.
    pub max_dep: Time,
    /// Latest arrival keeping this and every later stop feasible.
    pub deadline: Time,
}

impl Stop {
    pub fn new(id: u32, loc: Vertex, arr: Time, dep: Time) -> Self {
        Stop {
            id,
            loc,
            arr,
            dep,
            ready: Time::MIN,
            pickups: Vec::new(),
            dropoffs: Vec::new(),
            occ_after: 0,
            max_arr: INF,
            max_dep: INF,
            deadline: INF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub stops: Vec<Stop>,
    /// Unpacked path of leg 0 with absolute arrival times.
    leg0: Vec<(Vertex, Time)>,
}

impl Route {
    pub fn from_stops(stops: Vec<Stop>) -> Self {
        assert!(!stops.is_empty());
        Route { stops, leg0: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.stops.len() - 1
    }

    pub fn last(&self) -> &Stop {
        self.stops.last().expect("route is never empty")
    }

    /// Planned driving time from `s_i` to `s_{i+1}`.
    pub fn leg(&self, i: usize) -> Time {
        self.stops[i + 1].arr - self.stops[i].dep
    }

    /// Largest detour leg `i` can absorb.
    pub fn leeway(&self, i: usize) -> Time {
        sat_sub(self.stops[i + 1].deadline, self.stops[i].dep)
    }

    pub fn leg0_path(&self) -> &[(Vertex, Time)] {
        &self.leg0
    }

    /// Vertex the vehicle is at or heading to at time `t`, with the remaining
    /// time until it gets there.
    pub fn current_location(&self, t: Time) -> (Vertex, Time) {
        let s0 = &self.stops[0];
        if self.n() == 0 || t <= s0.dep {
            return (s0.loc, 0);
        }
        match self.leg0.iter().find(|&&(_, a)| a >= t) {
            Some(&(v, a)) => (v, a - t),
            None => (self.stops[1].loc, (self.stops[1].arr - t).max(0)),
        }
    }

    /// Current location and the earliest time the vehicle can leave it.
    pub fn location_and_base(&self, t: Time) -> (Vertex, Time) {
        let (v, off) = self.current_location(t);
        (v, t.max(self.stops[0].dep) + off)
    }

    /// Departure time from the last stop as seen at time `t`.
    pub fn last_departure(&self, t: Time) -> Time {
        if self.n() == 0 {
            t.max(self.stops[0].dep)
        } else {
            self.last().dep
        }
    }

    fn recompute_deadlines(&mut self, t_stop: Time, t_end: Time) {
        let n = self.n();
        self.stops[0].deadline = INF;
        for a in (1..=n).rev() {
            let s = &self.stops[a];
            let mut dl = s.max_arr.min(sat_sub(s.max_dep, t_stop));
            if a == n {
                dl = dl.min(t_end - 1);
            } else {
                let next = &self.stops[a + 1];
                dl = dl.min(sat_sub(next.deadline, next.arr - s.dep + t_stop));
            }
            self.stops[a].deadline = dl;
        }
    }

    fn recompute_occupancy(&mut self) {
        for a in 1..self.stops.len() {
            let prev = self.stops[a - 1].occ_after;
            let s = &mut self.stops[a];
            s.occ_after = prev + s.pickups.len() as u32 - s.dropoffs.len() as u32;
        }
    }

    fn refresh_leg0(&mut self, ch: &ContractionHierarchy) {
        self.leg0.clear();
        if self.n() == 0 {
            return;
        }
        let (s0, s1) = (&self.stops[0], &self.stops[1]);
        let path = ch.path_with_times(s0.loc, s1.loc).expect("planned leg is reachable");
        self.leg0 = path.into_iter().map(|(v, d)| (v, s0.dep + d)).collect();
        debug_assert_eq!(self.leg0.last().map(|e| e.1), Some(s1.arr));
    }
}

fn sat_sub(a: Time, b: Time) -> Time {
    if a >= INF {
        INF
    } else {
        a - b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiderInfo {
    pub id: RiderId,
    pub veh: usize,
    pub t_req: Time,
    pub pickup: Vertex,
    pub dropoff: Vertex,
    pub walk_p: Time,
    pub walk_d: Time,
    pub max_dep: Time,
    pub max_arr: Time,
    /// Actual pickup departure, once it happened.
    pub dep_p: Option<Time>,
    /// Actual dropoff arrival, once it happened.
    pub arr_d: Option<Time>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VehicleTimes {
    pub empty: Time,
    pub occupied: Time,
    pub stopped: Time,
}

impl VehicleTimes {
    pub fn operation(&self) -> Time {
        self.empty + self.occupied + self.stopped
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApplyError {
    #[error("insertion is infeasible")]
    Infeasible,
    #[error("vehicle index {0} out of range")]
    UnknownVehicle(usize),
    #[error("rider {0} already booked")]
    DuplicateRider(RiderId),
}

/// Per-rider values fixed at booking time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Booking {
    pub rider: RiderId,
    pub ctx: RequestCtx,
}

#[derive(Debug, Clone)]
pub struct FleetState {
    params: CostParameters,
    vehicles: Vec<Vehicle>,
    routes: Vec<Route>,
    riders: BTreeMap<RiderId, RiderInfo>,
    times: Vec<VehicleTimes>,
    next_stop_id: u32,
    clock: Time,
}

impl FleetState {
    pub fn new(vehicles: Vec<Vehicle>, params: CostParameters) -> Self {
        let mut next_stop_id = 0;
        let routes = vehicles
            .iter()
            .map(|v| {
                let mut r = Route::from_stops(vec![Stop::new(next_stop_id, v.start, v.t_start, v.t_start)]);
                next_stop_id += 1;
                r.recompute_deadlines(params.t_stop, v.t_end);
                r
            })
            .collect();
        let times = vec![VehicleTimes::default(); vehicles.len()];
        FleetState { params, vehicles, routes, riders: BTreeMap::new(), times, next_stop_id, clock: Time::MIN }
    }

    pub fn params(&self) -> &CostParameters {
        &self.params
    }

    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn vehicle(&self, v: usize) -> &Vehicle {
        &self.vehicles[v]
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn route(&self, v: usize) -> &Route {
        &self.routes[v]
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn clock(&self) -> Time {
        self.clock
    }

    pub fn rider(&self, id: RiderId) -> Option<&RiderInfo> {
        self.riders.get(&id)
    }

    pub fn riders(&self) -> impl Iterator<Item = &RiderInfo> {
        self.riders.values()
    }

    pub fn vehicle_times(&self) -> &[VehicleTimes] {
        &self.times
    }

    /// Current location and departure base of vehicle `v` at the clock.
    pub fn location_and_base(&self, v: usize) -> (Vertex, Time) {
        self.routes[v].location_and_base(self.clock)
    }

    /// Moves the clock forward and retires reached stops. Returns the
    /// indices of vehicles whose route changed.
    pub fn advance_time(&mut self, ch: &ContractionHierarchy, t: Time) -> Vec<usize> {
        self.clock = self.clock.max(t);
        let mut changed = Vec::new();
        for v in 0..self.routes.len() {
            let mut popped = false;
            while self.routes[v].n() >= 1 && self.routes[v].stops[1].arr <= self.clock {
                let s0 = self.routes[v].stops.remove(0);
                let s1 = &self.routes[v].stops[0];
                let drive = s1.arr - s0.dep;
                if s0.occ_after > 0 {
                    self.times[v].occupied += drive;
                } else {
                    self.times[v].empty += drive;
                }
                self.times[v].stopped += s1.dep - s1.arr;
                for r in &s1.pickups {
                    self.riders.get_mut(r).expect("booked rider").dep_p = Some(s1.dep);
                }
                for r in &s1.dropoffs {
                    self.riders.get_mut(r).expect("booked rider").arr_d = Some(s1.arr);
                }
                popped = true;
            }
            if popped {
                self.routes[v].refresh_leg0(ch);
                changed.push(v);
            }
        }
        changed
    }

    /// Runs every route to completion.
    pub fn finish(&mut self, ch: &ContractionHierarchy) {
        self.advance_time(ch, INF);
    }

    pub fn evaluate(&self, ins: &Insertion, req: &RequestCtx) -> Evaluation {
        let (_, base) = self.location_and_base(ins.veh);
        evaluate(&self.routes[ins.veh], &self.vehicles[ins.veh], &self.params, req, ins, base)
    }

    /// Books a rider into a vehicle route.
    pub fn apply_insertion(&mut self, ch: &ContractionHierarchy, ins: &Insertion, booking: Booking) -> Result<Evaluation, ApplyError> {
        let v = ins.veh;
        if v >= self.vehicles.len() {
            return Err(ApplyError::UnknownVehicle(v));
        }
        if self.riders.contains_key(&booking.rider) {
            return Err(ApplyError::DuplicateRider(booking.rider));
        }
        let eval = self.evaluate(ins, &booking.ctx);
        if !eval.cost.feasible {
            return Err(ApplyError::Infeasible);
        }
        let (lc, base) = self.location_and_base(v);
        let ts = self.params.t_stop;
        let (i, j) = (ins.i, ins.j);
        let rider = booking.rider;
        let ready = booking.ctx.t_req + ins.walk_p;

        // Leaving before reaching the next vertex is impossible, so an
        // insertion right after s_0 starts from a stop at the current position.
        if i == 0 {
            let s0 = &self.routes[v].stops[0];
            if lc != s0.loc || base != s0.dep {
                if lc != s0.loc {
                    let drive = base - s0.dep;
                    if s0.occ_after > 0 {
                        self.times[v].occupied += drive;
                    } else {
                        self.times[v].empty += drive;
                    }
                }
                let mut virt = Stop::new(self.next_stop_id, lc, base, base);
                self.next_stop_id += 1;
                virt.occ_after = s0.occ_after;
                self.routes[v].stops[0] = virt;
            }
        }

        let route = &mut self.routes[v];
        let n = route.n();
        let merged_p = pickup_merges(route, i, ins.p);
        let merged_d = dropoff_merges(route, i, j, ins.d);
        let old_legs: Vec<Time> = (0..=n).map(|a| if a == 0 { 0 } else { route.stops[a].arr - route.stops[a - 1].dep }).collect();

        let mut stops: Vec<(Stop, bool, Time)> = Vec::with_capacity(n + 3);
        let fresh = |loc: Vertex, next_id: &mut u32| {
            let s = Stop::new(*next_id, loc, 0, 0);
            *next_id += 1;
            s
        };
        let mut next_id = self.next_stop_id;
        for (a, s) in route.stops.drain(..).enumerate() {
            stops.push((s, false, old_legs[a]));
            if a == i {
                if merged_p {
                    let s = &mut stops.last_mut().unwrap().0;
                    s.pickups.push(rider);
                    s.ready = s.ready.max(ready);
                } else {
                    let mut p = fresh(ins.p, &mut next_id);
                    p.pickups.push(rider);
                    p.ready = ready;
                    stops.push((p, true, 0));
                }
                if i == j {
                    let mut d = fresh(ins.d, &mut next_id);
                    d.dropoffs.push(rider);
                    stops.push((d, true, 0));
                }
            } else if a == j && i < j {
                if merged_d {
                    stops.last_mut().unwrap().0.dropoffs.push(rider);
                } else {
                    let mut d = fresh(ins.d, &mut next_id);
                    d.dropoffs.push(rider);
                    stops.push((d, true, 0));
                }
            }
        }
        self.next_stop_id = next_id;

        for k in 1..stops.len() {
            if stops[k].1 || stops[k - 1].1 {
                stops[k].2 = ch.query(stops[k - 1].0.loc, stops[k].0.loc).expect("inserted stop is reachable");
            }
            let dep_prev = stops[k - 1].0.dep;
            let (s, _, leg) = &mut stops[k];
            s.arr = dep_prev + *leg;
            s.dep = (s.arr + ts).max(s.ready);
        }
        route.stops = stops.into_iter().map(|e| e.0).collect();
        route.recompute_occupancy();

        let pk = route.stops.iter().position(|s| s.pickups.contains(&rider)).expect("pickup placed");
        let dk = route.stops.iter().position(|s| s.dropoffs.contains(&rider)).expect("dropoff placed");
        let t_dep_p = route.stops[pk].dep;
        let arr_d = route.stops[dk].arr;
        debug_assert_eq!(t_dep_p, eval.t_dep_p);
        debug_assert_eq!(arr_d, eval.arr_d);
        debug_assert_eq!(route.last().arr, eval.new_last_arr);
        let max_dep = (booking.ctx.t_req + self.params.t_wait_max).max(t_dep_p);
        let max_arr = if booking.ctx.t_trip_max >= INF { INF } else { (booking.ctx.t_req + booking.ctx.t_trip_max - ins.walk_d).max(arr_d) };
        route.stops[pk].max_dep = route.stops[pk].max_dep.min(max_dep);
        route.stops[dk].max_arr = route.stops[dk].max_arr.min(max_arr);
        route.recompute_deadlines(ts, self.vehicles[v].t_end);
        if i == 0 {
            route.refresh_leg0(ch);
        }
        self.riders.insert(
            rider,
            RiderInfo {
                id: rider,
                veh: v,
                t_req: booking.ctx.t_req,
                pickup: ins.p,
                dropoff: ins.d,
                walk_p: ins.walk_p,
                walk_d: ins.walk_d,
                max_dep,
                max_arr,
                dep_p: None,
                arr_d: None,
            },
        );
        Ok(eval)
    }

    /// Internal consistency of one route; used by tests and debug checks.
    pub fn check_route(&self, v: usize) -> Result<(), String> {
        let r = &self.routes[v];
        let veh = &self.vehicles[v];
        let ts = self.params.t_stop;
        for a in 1..r.stops.len() {
            let s = &r.stops[a];
            if s.arr < r.stops[a - 1].dep {
                return Err(format!("stop {a} arrives before departure of stop {}", a - 1));
            }
            if s.dep != (s.arr + ts).max(s.ready) {
                return Err(format!("stop {a} departure {} inconsistent", s.dep));
            }
            if s.occ_after > veh.capacity {
                return Err(format!("stop {a} exceeds capacity"));
            }
            if s.arr > s.max_arr || s.dep > s.max_dep {
                return Err(format!("stop {a} violates a rider deadline"));
            }
            if s.arr > s.deadline {
                return Err(format!("stop {a} arrives after its deadline"));
            }
        }
        if r.n() >= 1 && r.last().occ_after != 0 {
            return Err("riders left on board after the last stop".into());
        }
        if r.n() >= 1 && r.last().arr >= veh.t_end {
            return Err("last stop outside the service window".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ch::ContractionHierarchy;
    use crate::synth;

    fn line_fleet(t_stop: Time) -> (ContractionHierarchy, FleetState) {
        let net = synth::line();
        let ch = ContractionHierarchy::build(&net.veh);
        let params = CostParameters { t_stop, ..CostParameters::default() };
        let veh = Vehicle { id: 0, start: 0, capacity: 4, t_start: 0, t_end: 100_000 };
        (ch, FleetState::new(vec![veh], params))
    }

    fn pals(p: Vertex, d: Vertex, veh_arr_p: Time, dist_pd: Time) -> Insertion {
        Insertion {
            veh: 0,
            i: 0,
            j: 0,
            p,
            walk_p: 0,
            d,
            walk_d: 0,
            veh_arr_p,
            dist_p_next: INF,
            dist_p_d: dist_pd,
            dist_sj_d: INF,
            dist_d_next: INF,
        }
    }

    fn booking(rider: RiderId, t_req: Time) -> Booking {
        Booking { rider, ctx: RequestCtx { t_req, t_trip_max: INF } }
    }

    #[test]
    fn line_apply_schedule() {
        let (ch, mut f) = line_fleet(60);
        f.advance_time(&ch, 0);
        f.apply_insertion(&ch, &pals(2, 3, 200, 100), booking(7, 0)).unwrap();
        let r = f.route(0);
        assert_eq!(r.n(), 2);
        assert_eq!((r.stops[1].loc, r.stops[1].arr, r.stops[1].dep), (2, 200, 260));
        assert_eq!((r.stops[2].loc, r.stops[2].arr), (3, 360));
        assert_eq!(r.stops[1].occ_after, 1);
        assert_eq!(r.stops[2].occ_after, 0);
        f.check_route(0).unwrap();
    }

    #[test]
    fn current_location_mid_leg() {
        let (ch, mut f) = line_fleet(60);
        f.advance_time(&ch, 0);
        f.apply_insertion(&ch, &pals(3, 2, 300, 100), booking(1, 0)).unwrap();
        assert_eq!(f.route(0).current_location(150), (2, 50));
        assert_eq!(f.route(0).location_and_base(150), (2, 200));
        assert_eq!(f.route(0).current_location(0), (0, 0));
    }

    #[test]
    fn leeway_from_dropoff_deadline() {
        let mut s0 = Stop::new(0, 0, 0, 0);
        s0.occ_after = 1;
        let mut s1 = Stop::new(1, 3, 300, 360);
        s1.dropoffs.push(1);
        s1.max_arr = 300 + 500;
        let mut r = Route::from_stops(vec![s0, s1]);
        r.recompute_deadlines(60, 100_000);
        assert_eq!(r.leeway(0), r.leg(0) + 500);
    }

    #[test]
    fn stops_retire_with_stats() {
        let (ch, mut f) = line_fleet(60);
        f.advance_time(&ch, 0);
        f.apply_insertion(&ch, &pals(2, 3, 200, 100), booking(7, 0)).unwrap();
        assert_eq!(f.advance_time(&ch, 199), Vec::<usize>::new());
        assert_eq!(f.advance_time(&ch, 200), vec![0]);
        assert_eq!(f.route(0).n(), 1);
        f.finish(&ch);
        let t = f.vehicle_times()[0];
        assert_eq!((t.empty, t.occupied, t.stopped), (200, 100, 120));
        let rider = f.rider(7).unwrap();
        assert_eq!((rider.dep_p, rider.arr_d), (Some(260), Some(360)));
    }

    #[test]
    fn insertion_mid_leg_uses_current_position() {
        let (ch, mut f) = line_fleet(60);
        f.advance_time(&ch, 0);
        f.apply_insertion(&ch, &pals(3, 2, 300, 100), booking(1, 0)).unwrap();
        f.advance_time(&ch, 150);
        // From v2 (reached at 200) pick up at v1 and drop off at v0, then go on to v3.
        let ins = Insertion {
            veh: 0,
            i: 0,
            j: 0,
            p: 1,
            walk_p: 0,
            d: 0,
            walk_d: 0,
            veh_arr_p: 300,
            dist_p_next: INF,
            dist_p_d: 100,
            dist_sj_d: INF,
            dist_d_next: 300,
        };
        let e = f.apply_insertion(&ch, &ins, booking(2, 150)).unwrap();
        assert!(e.cost.feasible);
        let r = f.route(0);
        let locs: Vec<Vertex> = r.stops.iter().map(|s| s.loc).collect();
        assert_eq!(locs, vec![2, 1, 0, 3, 2]);
        assert_eq!(r.stops[0].arr, 200);
        assert_eq!(r.stops[1].arr, 300);
        assert_eq!(r.stops[2].arr, 460);
        assert_eq!(r.stops[3].arr, 820);
        f.check_route(0).unwrap();
        f.finish(&ch);
        let t = f.vehicle_times()[0];
        assert_eq!(t.operation(), 200 + 100 + 100 + 300 + 100 + 60 * 4);
    }
}
