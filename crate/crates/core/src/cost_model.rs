//! Insertion cost evaluation.
//!
//! An insertion puts pickup `p` after stop `s_i` and dropoff `d` after stop
//! `s_j` (i <= j) of one vehicle's route. Costs are integer deciseconds; an
//! infeasible insertion has total `INF`.

use serde::{Deserialize, Serialize};

use crate::fleet_state::{Route, Vehicle};
use crate::{Time, Vertex, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostParameters {
    pub t_wait_max: Time,
    pub t_stop: Time,
    /// Max trip time is `alpha_num * dist_veh(o, dest) / alpha_den + beta`.
    pub alpha_num: i64,
    pub alpha_den: i64,
    pub beta: Time,
    pub gamma_wait: i64,
    pub gamma_trip: i64,
    pub omega_trip: i64,
    pub omega_walk: i64,
    /// Walking radius for pickup and dropoff discovery.
    pub radius: Time,
}

impl Default for CostParameters {
    fn default() -> Self {
        CostParameters {
            t_wait_max: 6000,
            t_stop: 600,
            alpha_num: 17,
            alpha_den: 10,
            beta: 1200,
            gamma_wait: 1,
            gamma_trip: 10,
            omega_trip: 1,
            omega_walk: 0,
            radius: 3000,
        }
    }
}

impl CostParameters {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("t_wait_max", self.t_wait_max),
            ("t_stop", self.t_stop),
            ("alpha_num", self.alpha_num),
            ("beta", self.beta),
            ("gamma_wait", self.gamma_wait),
            ("gamma_trip", self.gamma_trip),
            ("omega_trip", self.omega_trip),
            ("omega_walk", self.omega_walk),
            ("radius", self.radius),
        ];
        for (name, v) in fields {
            if v < 0 {
                return Err(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.alpha_den <= 0 {
            return Err(format!("alpha_den must be positive, got {}", self.alpha_den));
        }
        Ok(())
    }

    pub fn t_trip_max(&self, dist_veh_od: Time) -> Time {
        if dist_veh_od >= INF {
            return INF;
        }
        self.alpha_num * dist_veh_od / self.alpha_den + self.beta
    }

    pub fn wait_violation(&self, t_dep_p: Time, t_req: Time) -> Time {
        self.gamma_wait * (t_dep_p - t_req - self.t_wait_max).max(0)
    }

    pub fn trip_violation(&self, trip: Time, t_trip_max: Time) -> Time {
        if t_trip_max >= INF {
            return 0;
        }
        self.gamma_trip * (trip - t_trip_max).max(0)
    }
}

/// Per-request values the cost function needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestCtx {
    pub t_req: Time,
    pub t_trip_max: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub detour: Time,
    pub trip: Time,
    pub added_trip: Time,
    pub walk: Time,
    pub wait_violation: Time,
    pub trip_violation: Time,
    pub total: Time,
    pub feasible: bool,
}

impl CostBreakdown {
    pub fn infeasible() -> Self {
        CostBreakdown {
            detour: 0,
            trip: 0,
            added_trip: 0,
            walk: 0,
            wait_violation: 0,
            trip_violation: 0,
            total: INF,
            feasible: false,
        }
    }

    pub fn new(p: &CostParameters, detour: Time, trip: Time, added_trip: Time, walk: Time, wait_vio: Time, trip_vio: Time) -> Self {
        let total = detour + p.omega_trip * (trip + added_trip) + p.omega_walk * walk + wait_vio + trip_vio;
        CostBreakdown {
            detour,
            trip,
            added_trip,
            walk,
            wait_violation: wait_vio,
            trip_violation: trip_vio,
            total,
            feasible: true,
        }
    }
}

/// Departure from the pickup: the vehicle needs to arrive and stop, the rider needs to walk there.
pub fn departure_at_pickup(veh_arr_p: Time, t_stop: Time, t_req: Time, walk_p: Time) -> Time {
    (veh_arr_p + t_stop).max(t_req + walk_p)
}

pub fn initial_pickup_detour(same_leg: bool, t_dep_p: Time, dep_i: Time, dist_p_next: Time, leg_i: Time) -> Time {
    if same_leg {
        t_dep_p - dep_i
    } else {
        t_dep_p - dep_i + dist_p_next - leg_i
    }
}

/// `from_pickup` selects dist(p, d) (i = j) over dist(s_j, d); `at_end` is j = n.
pub fn initial_dropoff_detour(leg_dist_to_d: Time, t_stop: Time, at_end: bool, dist_d_next: Time, leg_j: Time) -> Time {
    if at_end {
        leg_dist_to_d + t_stop
    } else {
        leg_dist_to_d + t_stop + dist_d_next - leg_j
    }
}

/// Arrival-time shifts at every stop `0..=n` caused by the insertion.
pub fn residual_detours(route: &Route, t_stop: Time, i: usize, j: usize, delta_p: Time, delta_d: Time) -> Vec<Time> {
    let n = route.n();
    let wait = |a: usize| route.stops[a].dep - route.stops[a].arr - t_stop;
    let mut res = vec![0; n + 1];
    for a in i + 1..=n {
        res[a] = if a <= j {
            if a == i + 1 {
                delta_p
            } else {
                (res[a - 1] - wait(a - 1)).max(0)
            }
        } else if a == j + 1 {
            if i == j {
                delta_p + delta_d
            } else {
                (res[j] - wait(j)).max(0) + delta_d
            }
        } else {
            (res[a - 1] - wait(a - 1)).max(0)
        };
    }
    res
}

/// A fully resolved insertion candidate. Distances that the shape does not
/// need are ignored (conventionally `INF`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Insertion {
    /// Vehicle index in the fleet.
    pub veh: usize,
    pub i: usize,
    pub j: usize,
    pub p: Vertex,
    pub walk_p: Time,
    pub d: Vertex,
    pub walk_d: Time,
    /// Earliest vehicle arrival at `p` (unused for a merged pickup).
    pub veh_arr_p: Time,
    pub dist_p_next: Time,
    pub dist_p_d: Time,
    pub dist_sj_d: Time,
    pub dist_d_next: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord, Hash)]
#[serde(rename_all = "snake_case")]
pub enum InsertionKind {
    Ordinary,
    Op,
    Pbns,
    Pals,
    Dals,
}

impl Insertion {
    pub fn kind(&self, n: usize) -> InsertionKind {
        if self.i == n {
            InsertionKind::Pals
        } else if self.j == n {
            InsertionKind::Dals
        } else if self.i == 0 {
            InsertionKind::Pbns
        } else if self.i == self.j {
            InsertionKind::Op
        } else {
            InsertionKind::Ordinary
        }
    }
}

/// Deterministic tie-break: vehicle id, pickup index, dropoff index, pickup, dropoff.
pub type TieKey = (u32, usize, usize, Vertex, Vertex);

/// An evaluated feasible insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Scored {
    pub cost: CostBreakdown,
    pub ins: Insertion,
    pub key: TieKey,
}

impl Scored {
    pub fn new(cost: CostBreakdown, ins: Insertion, veh_id: u32) -> Self {
        Scored { cost, ins, key: (veh_id, ins.i, ins.j, ins.p, ins.d) }
    }

    fn rank(&self) -> (Time, TieKey) {
        (self.cost.total, self.key)
    }
}

/// Keeps the cheaper of `best` and `cand`; feasible candidates only.
pub fn offer(best: &mut Option<Scored>, cand: Scored) {
    if !cand.cost.feasible {
        return;
    }
    if best.as_ref().is_none_or(|b| cand.rank() < b.rank()) {
        *best = Some(cand);
    }
}

pub fn pickup_merges(route: &Route, i: usize, p: Vertex) -> bool {
    i >= 1 && route.stops[i].loc == p
}

pub fn dropoff_merges(route: &Route, i: usize, j: usize, d: Vertex) -> bool {
    j >= 1 && i < j && route.stops[j].loc == d
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub cost: CostBreakdown,
    pub t_dep_p: Time,
    pub arr_d: Time,
    pub new_last_arr: Time,
}

/// Evaluates `ins` against the current route. `base` is the departure time
/// from the vehicle's current location (used when `i = 0`).
pub fn evaluate(
    route: &Route,
    veh: &Vehicle,
    params: &CostParameters,
    req: &RequestCtx,
    ins: &Insertion,
    base: Time,
) -> Evaluation {
    let fail = Evaluation { cost: CostBreakdown::infeasible(), t_dep_p: INF, arr_d: INF, new_last_arr: INF };
    let n = route.n();
    let (i, j) = (ins.i, ins.j);
    assert!(i <= j && j <= n, "bad insertion indices {i}, {j} for n = {n}");
    if ins.p == ins.d {
        return fail;
    }
    let ts = params.t_stop;
    let s = &route.stops;
    let merged_p = pickup_merges(route, i, ins.p);
    let merged_d = dropoff_merges(route, i, j, ins.d);
    let dep_i = if i == 0 { base } else { s[i].dep };
    let leg = |a: usize| if a == 0 { s[1].arr - base } else { s[a + 1].arr - s[a].dep };
    let w = ins.walk_p;

    // Pick the distances this shape needs; give up if one is unknown.
    let need = |x: Time| x < INF;
    if !merged_p && !need(ins.veh_arr_p) {
        return fail;
    }
    if i < j && !merged_p && !need(ins.dist_p_next) {
        return fail;
    }
    if i == j && !need(ins.dist_p_d) {
        return fail;
    }
    if i < j && !merged_d && !need(ins.dist_sj_d) {
        return fail;
    }
    if j < n && !merged_d && !need(ins.dist_d_next) {
        return fail;
    }

    let t_dep_p = if merged_p { s[i].dep.max(req.t_req + w) } else { departure_at_pickup(ins.veh_arr_p, ts, req.t_req, w) };
    let dist_p_next = if merged_p && i < n { leg(i) } else { ins.dist_p_next };
    let delta_p = if i == n {
        t_dep_p - dep_i
    } else {
        initial_pickup_detour(i == j, t_dep_p, dep_i, dist_p_next, leg(i))
    };
    let delta_d = if merged_d {
        0
    } else if i == j {
        initial_dropoff_detour(ins.dist_p_d, ts, j == n, ins.dist_d_next, if j < n { leg(j) } else { 0 })
    } else {
        initial_dropoff_detour(ins.dist_sj_d, ts, j == n, ins.dist_d_next, if j < n { leg(j) } else { 0 })
    };
    let res = residual_detours(route, ts, i, j, delta_p, delta_d);
    let new_arr = |a: usize| s[a].arr + res[a];
    let new_dep = |a: usize| (new_arr(a) + ts).max(s[a].dep);

    // Hard constraints: capacity, existing riders, service window.
    let cap_end = if merged_d { j - 1 } else { j };
    if (i..=cap_end).any(|a| s[a].occ_after + 1 > veh.capacity) {
        return fail;
    }
    if merged_p && t_dep_p > s[i].max_dep {
        return fail;
    }
    for a in i + 1..=n {
        if res[a] == 0 {
            continue;
        }
        if new_arr(a) > s[a].max_arr || new_dep(a) > s[a].max_dep {
            return fail;
        }
    }
    let arr_d = if merged_d {
        new_arr(j)
    } else if i == j {
        t_dep_p + ins.dist_p_d
    } else {
        new_dep(j) + ins.dist_sj_d
    };
    let new_last_arr = if j == n && !merged_d { arr_d } else { new_arr(n) };
    if new_last_arr >= veh.t_end {
        return fail;
    }

    let detour = if i == n {
        delta_p + delta_d
    } else if j == n {
        res[n] + delta_d
    } else {
        res[n]
    };
    let trip = (t_dep_p - req.t_req) + (arr_d - t_dep_p) + ins.walk_d;
    let added_trip: Time = (i + 1..=n).map(|a| s[a].dropoffs.len() as Time * res[a]).sum();
    let cost = CostBreakdown::new(
        params,
        detour,
        trip,
        added_trip,
        ins.walk_p + ins.walk_d,
        params.wait_violation(t_dep_p, req.t_req),
        params.trip_violation(trip, req.t_trip_max),
    );
    Evaluation { cost, t_dep_p, arr_d, new_last_arr }
}

/// Serving the request on foot.
pub fn pseudo_insertion_cost(params: &CostParameters, req: &RequestCtx, walk_od: Time) -> CostBreakdown {
    if walk_od >= INF {
        return CostBreakdown::infeasible();
    }
    CostBreakdown::new(params, 0, walk_od, 0, walk_od, 0, params.trip_violation(walk_od, req.t_trip_max))
}

/// Cost of a pickup-after-last-stop insertion from its characterising values.
/// `merged` is set when the pickup is at the last stop's location and the
/// vehicle has already left its initial position (n >= 1).
#[allow(clippy::too_many_arguments)]
pub fn pals_cost(
    params: &CostParameters,
    req: &RequestCtx,
    walk_p: Time,
    dist_pd: Time,
    walk_d: Time,
    dep_last: Time,
    dist_last_p: Time,
    merged: bool,
) -> CostBreakdown {
    if dist_pd >= INF || dist_last_p >= INF {
        return CostBreakdown::infeasible();
    }
    let w = req.t_req + walk_p;
    let t_dep_p = if merged { dep_last.max(w) } else { departure_at_pickup(dep_last + dist_last_p, params.t_stop, req.t_req, walk_p) };
    let detour = t_dep_p - dep_last + dist_pd + params.t_stop;
    let trip = t_dep_p - req.t_req + dist_pd + walk_d;
    CostBreakdown::new(
        params,
        detour,
        trip,
        0,
        walk_p + walk_d,
        params.wait_violation(t_dep_p, req.t_req),
        params.trip_violation(trip, req.t_trip_max),
    )
}

/// Arrival at the dropoff of a pickup-after-last-stop insertion, for the service check.
pub fn pals_dropoff_arrival(params: &CostParameters, req: &RequestCtx, walk_p: Time, dist_pd: Time, dep_last: Time, dist_last_p: Time, merged: bool) -> Time {
    let w = req.t_req + walk_p;
    let t_dep_p = if merged { dep_last.max(w) } else { departure_at_pickup(dep_last + dist_last_p, params.t_stop, req.t_req, walk_p) };
    t_dep_p + dist_pd
}

/// Stop time after driving `x` to a new stop; zero only when it may merge.
fn stop_lb(x: Time, t_stop: Time) -> Time {
    if x == 0 {
        0
    } else {
        t_stop
    }
}

/// Vehicle-independent lower bound on any pickup-after-last-stop insertion
/// whose vehicle drives at least `x` to a pickup with walk `walk_p`, using
/// lower bounds `pd` and `pd_walk_d` on dist(p, d) and dist(p, d) + walk(d),
/// and `walk_d` on the dropoff walk.
pub fn pals_lower_bound(params: &CostParameters, req: &RequestCtx, walk_p: Time, pd: Time, pd_walk_d: Time, walk_d: Time, x: Time) -> Time {
    if x >= INF || pd >= INF {
        return INF;
    }
    let drive = x + stop_lb(x, params.t_stop);
    let dep_rel = drive.max(walk_p);
    let trip = dep_rel + pd_walk_d;
    drive
        + pd
        + params.t_stop
        + params.omega_trip * trip
        + params.omega_walk * (walk_p + walk_d)
        + params.gamma_wait * (dep_rel - params.t_wait_max).max(0)
        + params.trip_violation(trip, req.t_trip_max)
}

/// A pickup/dropoff label at some vertex `v`: `dist` is d↓(v, p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PdLabel {
    pub dist: Time,
    pub walk_p: Time,
    pub dist_pd: Time,
    pub walk_d: Time,
}

/// Upper bound on c(l1) - c(l2) over all completions reaching `v` at the same time.
pub fn delta_c_max(params: &CostParameters, l1: &PdLabel, l2: &PdLabel) -> Time {
    let tdep_max = (l1.dist + params.t_stop).max(l1.walk_p);
    let tdep_min = l2.dist + stop_lb(l2.dist, params.t_stop);
    let d_detour = tdep_max + l1.dist_pd - tdep_min - l2.dist_pd;
    let d_trip = (tdep_max + l1.dist_pd + l1.walk_d) - (tdep_min + l2.dist_pd + l2.walk_d);
    let d_walk = (l1.walk_p + l1.walk_d) - (l2.walk_p + l2.walk_d);
    d_detour
        + params.omega_trip * d_trip
        + params.omega_walk * d_walk
        + params.gamma_wait * (tdep_max - tdep_min).max(0)
        + params.gamma_trip * d_trip.max(0)
}

/// Lower bound for dropoff-after-last-stop insertions with dropoff walk
/// `walk_d` reached `y` after the last stop; `min_walk_p` bounds the pickup walk.
pub fn dals_lower_bound(params: &CostParameters, req: &RequestCtx, min_walk_p: Time, walk_d: Time, y: Time) -> Time {
    if y >= INF {
        return INF;
    }
    let e = y + stop_lb(y, params.t_stop);
    let trip = min_walk_p + e + walk_d;
    e + params.omega_trip * trip + params.omega_walk * (min_walk_p + walk_d) + params.trip_violation(trip, req.t_trip_max)
}

/// A dropoff label at some vertex `v`: `dist` is d↓(v, d).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropoffLabel {
    pub dist: Time,
    pub walk_d: Time,
}

/// Whether `l1` gives a strictly cheaper dropoff-after-last-stop insertion than
/// `l2` for every pickup, pickup position and vehicle reaching `v`.
pub fn dals_dominates(params: &CostParameters, l1: &DropoffLabel, l2: &DropoffLabel) -> bool {
    let e_max = l1.dist + params.t_stop;
    let e_min = l2.dist + stop_lb(l2.dist, params.t_stop);
    let d_e = e_max - e_min;
    let d_trip = d_e + l1.walk_d - l2.walk_d;
    let d_walk = l1.walk_d - l2.walk_d;
    d_e <= 0
        && d_e + params.omega_trip * d_trip + params.omega_walk * d_walk < 0
        && d_e + (params.omega_trip + params.gamma_trip) * d_trip + params.omega_walk * d_walk < 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet_state::Stop;
    use proptest::prelude::*;

    fn params() -> CostParameters {
        CostParameters::default()
    }

    fn ctx(t_req: Time, t_trip_max: Time) -> RequestCtx {
        RequestCtx { t_req, t_trip_max }
    }

    #[test]
    fn departure_formula() {
        assert_eq!(departure_at_pickup(100, 600, 0, 1300), 1300);
        assert_eq!(departure_at_pickup(100, 600, 0, 0), 700);
        assert_eq!(departure_at_pickup(100, 600, 0, 700), 700);
    }

    #[test]
    fn initial_detour_formulas() {
        assert_eq!(initial_pickup_detour(false, 1300, 0, 100, 200), 1200);
        assert_eq!(initial_dropoff_detour(100, 600, true, 0, 0), 700);
        assert_eq!(initial_dropoff_detour(100, 600, false, 100, 150), 650);
    }

    fn route(times: &[(Time, Time)], t_stop: Time) -> Route {
        let stops = times
            .iter()
            .enumerate()
            .map(|(k, &(arr, dep))| {
                let mut s = Stop::new(k as u32, k as Vertex, arr, dep);
                s.ready = if dep > arr + t_stop { dep } else { Time::MIN };
                s
            })
            .collect();
        Route::from_stops(stops)
    }

    #[test]
    fn residual_recurrence() {
        // Wait buffer 500 at s_3 after a 1200 shift at s_3 (i = 1, j = 2).
        let ts = 600;
        let r = route(&[(0, 0), (100, 700), (800, 1400), (1500, 2600), (2700, 3300)], ts);
        let res = residual_detours(&r, ts, 1, 1, 1200, 0);
        assert_eq!(res[0], 0);
        assert_eq!(res[1], 0);
        assert_eq!(res[2], 1200);
        assert_eq!(res[3], 1200);
        assert_eq!(res[4], 700);
        let r = route(&[(0, 0), (100, 700), (800, 1400), (1500, 3600), (3700, 4300)], ts);
        let res = residual_detours(&r, ts, 1, 1, 1200, 0);
        assert_eq!(res[4], 0);
    }

    #[test]
    fn trip_time_same_leg() {
        // t_dep_p = 1300, t_req = 0, dist(p, d) = 100, walk from d = 200.
        let p = params();
        let c = pals_cost(&p, &ctx(0, INF), 1300, 100, 200, 0, 100, false);
        assert_eq!(c.trip, 1600);
    }

    #[test]
    fn pseudo_costs() {
        let mut p = params();
        assert_eq!(pseudo_insertion_cost(&p, &ctx(0, 10_000), 500).total, 500);
        assert_eq!(pseudo_insertion_cost(&p, &ctx(0, 400), 500).total, 500 + 1000);
        p.omega_trip = 0;
        p.omega_walk = 0;
        assert_eq!(pseudo_insertion_cost(&p, &ctx(0, 10_000), 500).total, 0);
        assert!(!pseudo_insertion_cost(&p, &ctx(0, 10_000), INF).feasible);
    }

    #[test]
    fn identical_labels_never_dominate() {
        let p = params();
        let l = PdLabel { dist: 300, walk_p: 100, dist_pd: 500, walk_d: 50 };
        assert!(delta_c_max(&p, &l, &l) >= 0);
        let d = DropoffLabel { dist: 300, walk_d: 50 };
        assert!(!dals_dominates(&p, &d, &d));
    }

    #[test]
    fn strictly_better_label_dominates() {
        let p = params();
        let l1 = PdLabel { dist: 100, walk_p: 0, dist_pd: 200, walk_d: 0 };
        let l2 = PdLabel { dist: 400, walk_p: 0, dist_pd: 500, walk_d: 100 };
        assert!(delta_c_max(&p, &l1, &l2) < 0);
        let d1 = DropoffLabel { dist: 100, walk_d: 0 };
        let d2 = DropoffLabel { dist: 400, walk_d: 100 };
        assert!(dals_dominates(&p, &d1, &d2));
        assert!(!dals_dominates(&p, &d2, &d1));
    }

    #[test]
    fn lower_bound_tight_at_degenerate_point() {
        let p = params();
        let r = ctx(0, INF);
        let exact = pals_cost(&p, &r, 0, 300, 0, 0, 0, false);
        // x = 0 assumes a merge may happen, which drops one stop time.
        assert_eq!(pals_lower_bound(&p, &r, 0, 300, 300, 0, 0) + p.t_stop * (1 + p.omega_trip), exact.total);
        let exact = pals_cost(&p, &r, 0, 300, 0, 0, 50, false);
        assert_eq!(pals_lower_bound(&p, &r, 0, 300, 300, 0, 50), exact.total);
    }

    proptest! {
        #[test]
        fn pals_cost_monotone_in_distance(
            walk_p in 0i64..3000, pd in 0i64..3000, walk_d in 0i64..3000,
            dep in 0i64..5000, x in 0i64..5000, t_req in 0i64..5000, tmax in 0i64..20000,
        ) {
            let p = params();
            let r = ctx(t_req.min(dep), tmax);
            let a = pals_cost(&p, &r, walk_p, pd, walk_d, dep, x, false).total;
            let b = pals_cost(&p, &r, walk_p, pd, walk_d, dep, x + 1, false).total;
            prop_assert!(a <= b);
        }

        #[test]
        fn pals_lower_bound_admissible(
            walk_p in 0i64..3000, pd in 0i64..3000, walk_d in 0i64..3000,
            dep_off in 0i64..5000, x in 0i64..5000, t_req in 0i64..5000, tmax in 0i64..20000,
            merged in any::<bool>(),
        ) {
            let p = params();
            let r = ctx(t_req, tmax);
            let x = if merged { 0 } else { x };
            let exact = pals_cost(&p, &r, walk_p, pd, walk_d, t_req + dep_off, x, merged).total;
            prop_assert!(pals_lower_bound(&p, &r, walk_p, pd, pd + walk_d, walk_d, x) <= exact);
        }

        #[test]
        fn loud_objective_reduction(
            walk_p in 0i64..3000, pd in 0i64..3000, walk_d in 0i64..3000,
            dep_off in 0i64..5000, x in 1i64..5000, tmax in 0i64..20000,
        ) {
            let mut p = params();
            p.omega_trip = 0;
            p.omega_walk = 0;
            let c = pals_cost(&p, &ctx(0, tmax), walk_p, pd, walk_d, dep_off, x, false);
            prop_assert_eq!(c.total, c.detour + c.wait_violation + c.trip_violation);
        }

        #[test]
        fn penalties_zero_iff_soft_constraints_hold(
            walk_p in 0i64..9000, pd in 0i64..3000, walk_d in 0i64..3000, x in 1i64..9000, tmax in 0i64..20000,
        ) {
            let p = params();
            let r = ctx(0, tmax);
            let c = pals_cost(&p, &r, walk_p, pd, walk_d, 0, x, false);
            let t_dep = (x + p.t_stop).max(walk_p);
            prop_assert_eq!(c.wait_violation == 0, t_dep <= p.t_wait_max);
            prop_assert_eq!(c.trip_violation == 0, c.trip <= tmax);
        }
    }
}
