//! Insertions at the end of routes: pickup after the last stop (with the
//! dropoff right behind it) and dropoff after the last stop.
//!
//! Each vehicle's last stop has bucket entries in its upward search space.
//! Three interchangeable strategies find vehicle-to-point distances:
//! plain reverse Dijkstra, one bucket search per point, or one collective
//! bucket search over all points with label domination.

use std::cell::Cell;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::str::FromStr;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use serde::{Deserialize, Serialize};

use crate::ch::{ContractionHierarchy, Direction};
use crate::cost_model::{
    dals_dominates, dals_lower_bound, delta_c_max, offer, pals_cost, pals_dropoff_arrival, pals_lower_bound, DropoffLabel, Insertion, PdLabel,
    Scored,
};
use crate::elliptic::{CurrentLocDists, RequestView};
use crate::fleet_state::Route;
use crate::road_network::Graph;
use crate::search_core::{BucketEntry, BucketStore, BundledSearch, KeyOrder};
use crate::{Time, Vertex, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Dijkstra,
    IndividualBch,
    CollectiveBch,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Dijkstra, Strategy::IndividualBch, Strategy::CollectiveBch];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Dijkstra => "dijkstra",
            Strategy::IndividualBch => "individual-bch",
            Strategy::CollectiveBch => "collective-bch",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown strategy `{s}` (dijkstra, individual-bch, collective-bch)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub strategy: Strategy,
    /// Lanes per bundled search.
    pub k: usize,
    pub cost_pruning: bool,
    pub domination: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LastStopCounters {
    pub edges_relaxed: u64,
    pub entries_scanned: u64,
    pub labels_settled: u64,
    pub candidates: u64,
    pub fallbacks: u64,
}

pub struct LastStopIndex {
    buckets: BucketStore<u32>,
    placed: Vec<Option<(Vertex, Vec<Vertex>)>>,
    at_vertex: HashMap<Vertex, Vec<usize>>,
}

impl LastStopIndex {
    pub fn new(num_vertices: usize, num_vehicles: usize, sorted: bool) -> Self {
        LastStopIndex {
            buckets: BucketStore::new(num_vertices, KeyOrder::Increasing, sorted),
            placed: vec![None; num_vehicles],
            at_vertex: HashMap::default(),
        }
    }

    pub fn total_entries(&self) -> usize {
        self.buckets.total_entries()
    }

    /// Exchanges the entries of vehicle `v` when its last stop moved.
    pub fn sync_vehicle(&mut self, ch: &ContractionHierarchy, route: &Route, v: usize) {
        let loc = route.last().loc;
        if matches!(&self.placed[v], Some((at, _)) if *at == loc) {
            return;
        }
        if let Some((at, verts)) = self.placed[v].take() {
            self.buckets.remove_owner(v as u32, verts);
            if let Some(list) = self.at_vertex.get_mut(&at) {
                list.retain(|&x| x != v);
            }
        }
        let space = ch.search_space(loc, Direction::Up, INF);
        for &(u, d) in &space {
            self.buckets.insert(u, BucketEntry { owner: v as u32, dist: d, key: d });
        }
        let list = self.at_vertex.entry(loc).or_default();
        list.push(v);
        list.sort_unstable();
        self.placed[v] = Some((loc, space.into_iter().map(|e| e.0).collect()));
    }

    pub fn vehicles_at(&self, v: Vertex) -> &[usize] {
        self.at_vertex.get(&v).map_or(&[], Vec::as_slice)
    }
}

/// Shared state of one search: the pruning bound and the per-pair minimum distances.
struct Found {
    cmax: Cell<Time>,
    prune: bool,
    dist: HashMap<(usize, usize), Time>,
}

impl Found {
    fn new(bound: Time, prune: bool) -> Self {
        Found { cmax: Cell::new(bound), prune, dist: HashMap::default() }
    }

    fn limit(&self) -> Time {
        if self.prune {
            self.cmax.get()
        } else {
            INF
        }
    }

    fn record(&mut self, veh: usize, idx: usize, x: Time) {
        let cell = self.dist.entry((veh, idx)).or_insert(INF);
        *cell = (*cell).min(x);
    }
}

struct PalsProblem<'v, 'a> {
    view: &'v RequestView<'a>,
    /// Per pickup: min dist(p, d), min dist(p, d) + walk(d).
    min_pd: Vec<(Time, Time)>,
    min_walk_d: Time,
}

impl PalsProblem<'_, '_> {
    fn lower_bound(&self, pi: usize, x: Time) -> Time {
        let (pd, pdw) = self.min_pd[pi];
        let p = self.view.fleet.params();
        pals_lower_bound(p, self.view.req, self.view.pd.pickups[pi].1, pd, pdw, self.min_walk_d, x)
    }

    fn label_lower_bound(&self, pi: usize, di: usize, x: Time) -> Time {
        let pd = self.view.matrix.get(pi, di);
        let wd = self.view.pd.dropoffs[di].1;
        pals_lower_bound(self.view.fleet.params(), self.view.req, self.view.pd.pickups[pi].1, pd, pd + wd, wd, x)
    }

    /// Cost with vehicle distance `x` (service window ignored) and whether it
    /// respects the service window and capacity.
    fn cost(&self, veh: usize, pi: usize, di: usize, x: Time) -> (Time, bool) {
        let f = self.view.fleet;
        let route = f.route(veh);
        let (p, wp) = self.view.pd.pickups[pi];
        let (d, wd) = self.view.pd.dropoffs[di];
        let pd = self.view.matrix.get(pi, di);
        if p == d || pd >= INF || x >= INF {
            return (INF, false);
        }
        let dep = route.last_departure(f.clock());
        let merged = route.n() >= 1 && route.last().loc == p;
        let c = pals_cost(f.params(), self.view.req, wp, pd, wd, dep, x, merged);
        let arr = pals_dropoff_arrival(f.params(), self.view.req, wp, pd, dep, x, merged);
        (c.total, arr < f.vehicle(veh).t_end && f.vehicle(veh).capacity >= 1)
    }

    /// Tightens the bound with every feasible completion of `(veh, pi)` at distance `x`.
    fn tighten(&self, found: &Found, veh: usize, pi: usize, x: Time) {
        for di in 0..self.view.pd.dropoffs.len() {
            let (c, ok) = self.cost(veh, pi, di, x);
            if ok && c < found.cmax.get() {
                found.cmax.set(c);
            }
        }
    }

    fn insertion(&self, veh: usize, pi: usize, di: usize, x: Time) -> Insertion {
        let route = self.view.fleet.route(veh);
        let n = route.n();
        let (p, wp) = self.view.pd.pickups[pi];
        let (d, wd) = self.view.pd.dropoffs[di];
        Insertion {
            veh,
            i: n,
            j: n,
            p,
            walk_p: wp,
            d,
            walk_d: wd,
            veh_arr_p: route.last_departure(self.view.fleet.clock()) + x,
            dist_p_next: INF,
            dist_p_d: self.view.matrix.get(pi, di),
            dist_sj_d: INF,
            dist_d_next: INF,
        }
    }

    fn score_pairs(&self, pairs: &HashMap<(usize, usize), Time>, bound: Time) -> Option<Scored> {
        let mut best = None;
        let mut keys: Vec<_> = pairs.iter().collect();
        keys.sort_unstable();
        for (&(veh, pi), &x) in keys {
            for di in 0..self.view.pd.dropoffs.len() {
                if self.view.pd.dropoffs[di].0 == self.view.pd.pickups[pi].0 || self.view.matrix.get(pi, di) >= INF {
                    continue;
                }
                offer(&mut best, self.view.score_at(&self.insertion(veh, pi, di, x)));
            }
        }
        best.filter(|b: &Scored| b.cost.total <= bound)
    }
}

/// Best pickup-after-last-stop insertion costing at most `bound`.
pub fn best_pals(
    view: &RequestView,
    ch: &ContractionHierarchy,
    veh_rev: &Graph,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    bound: Time,
    counters: &mut LastStopCounters,
) -> Option<Scored> {
    let np = view.pd.pickups.len();
    let nd = view.pd.dropoffs.len();
    if np == 0 || nd == 0 {
        return None;
    }
    let min_pd = (0..np)
        .map(|pi| {
            let mut m = (INF, INF);
            for di in 0..nd {
                let pd = view.matrix.get(pi, di);
                if pd < INF && view.pd.pickups[pi].0 != view.pd.dropoffs[di].0 {
                    m.0 = m.0.min(pd);
                    m.1 = m.1.min(pd + view.pd.dropoffs[di].1);
                }
            }
            m
        })
        .collect();
    let prob = PalsProblem { view, min_pd, min_walk_d: view.pd.min_walk_d() };
    match cfg.strategy {
        Strategy::Dijkstra => {
            let found = pals_dijkstra(&prob, veh_rev, index, cfg, bound, counters);
            prob.score_pairs(&found.dist, bound)
        }
        Strategy::IndividualBch => {
            let found = pals_individual(&prob, ch, index, cfg, bound, counters);
            prob.score_pairs(&found.dist, bound)
        }
        Strategy::CollectiveBch => pals_collective(&prob, ch, index, cfg, bound, counters),
    }
}

fn pals_dijkstra(prob: &PalsProblem, veh_rev: &Graph, index: &LastStopIndex, cfg: &SearchConfig, bound: Time, counters: &mut LastStopCounters) -> Found {
    let mut found = Found::new(bound, cfg.cost_pruning);
    let pickups: Vec<Vertex> = prob.view.pd.pickups.iter().map(|e| e.0).collect();
    let mut search = BundledSearch::new(veh_rev.num_vertices(), cfg.k);
    for (b, batch) in pickups.chunks(cfg.k).enumerate() {
        let lanes = b * cfg.k..b * cfg.k + batch.len();
        let found_ref = std::cell::RefCell::new(&mut found);
        search.run(
            veh_rev,
            batch,
            INF,
            |v, l, d| {
                let pi = b * cfg.k + l;
                let mut f = found_ref.borrow_mut();
                if prob.lower_bound(pi, d) > f.limit() {
                    return false;
                }
                for &veh in index.vehicles_at(v) {
                    f.record(veh, pi, d);
                    prob.tighten(&f, veh, pi, d);
                }
                true
            },
            |key| {
                let f = found_ref.borrow();
                lanes.clone().all(|pi| prob.lower_bound(pi, key) > f.limit())
            },
        );
    }
    counters.edges_relaxed += search.edges_relaxed;
    counters.labels_settled += search.vertices_settled;
    counters.candidates += found.dist.len() as u64;
    found
}

fn pals_individual(
    prob: &PalsProblem,
    ch: &ContractionHierarchy,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    bound: Time,
    counters: &mut LastStopCounters,
) -> Found {
    let mut found = Found::new(bound, cfg.cost_pruning);
    let pickups: Vec<Vertex> = prob.view.pd.pickups.iter().map(|e| e.0).collect();
    let mut search = BundledSearch::new(ch.num_vertices(), cfg.k);
    let mut scanned = 0u64;
    for (b, batch) in pickups.chunks(cfg.k).enumerate() {
        search.run(
            ch.search_graph(Direction::Down),
            batch,
            INF,
            |v, l, y| {
                let pi = b * cfg.k + l;
                if prob.lower_bound(pi, y) > found.limit() {
                    return false;
                }
                let mut hits = Vec::new();
                scanned += index.buckets.scan(v, |e| prob.lower_bound(pi, e.dist + y) > found.limit(), |e| hits.push((e.owner as usize, e.dist + y))) as u64;
                for (veh, x) in hits {
                    found.record(veh, pi, x);
                    prob.tighten(&found, veh, pi, x);
                }
                true
            },
            |_| false,
        );
    }
    counters.entries_scanned += scanned;
    counters.edges_relaxed += search.edges_relaxed;
    counters.labels_settled += search.vertices_settled;
    counters.candidates += found.dist.len() as u64;
    found
}

#[derive(Debug, Clone, Copy)]
struct Label {
    a: usize,
    b: usize,
    y: Time,
    closed: bool,
    dead: bool,
}

/// Per-vertex label lists of a collective search.
#[derive(Default)]
struct Labels {
    arena: Vec<(Vertex, Label)>,
    at: HashMap<Vertex, Vec<usize>>,
}

impl Labels {
    /// Adds a label unless it is dominated by a label already at `v`; open
    /// labels the newcomer dominates are retired. `dominates(x, y)` says
    /// whether label `x` dominates `y`.
    fn offer(&mut self, v: Vertex, a: usize, b: usize, y: Time, use_dom: bool, dominates: impl Fn(&Label, &Label) -> bool) -> Option<usize> {
        let new = Label { a, b, y, closed: false, dead: false };
        let list = self.at.entry(v).or_default();
        for &idx in list.iter() {
            let old = &self.arena[idx].1;
            if old.dead {
                continue;
            }
            if (old.a, old.b) == (a, b) {
                if old.y <= y {
                    return None;
                }
                continue;
            }
            if use_dom && dominates(old, &new) {
                return None;
            }
        }
        for &idx in list.iter() {
            let old = &mut self.arena[idx].1;
            if old.dead || old.closed {
                continue;
            }
            if ((old.a, old.b) == (a, b) && old.y > y) || (use_dom && dominates(&new, old)) {
                old.dead = true;
            }
        }
        let idx = self.arena.len();
        self.arena.push((v, new));
        list.push(idx);
        Some(idx)
    }
}

fn pals_collective(
    prob: &PalsProblem,
    ch: &ContractionHierarchy,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    bound: Time,
    counters: &mut LastStopCounters,
) -> Option<Scored> {
    let view = prob.view;
    let params = view.fleet.params();
    let found = Found::new(bound, cfg.cost_pruning);
    let as_pd = |l: &Label| PdLabel {
        dist: l.y,
        walk_p: view.pd.pickups[l.a].1,
        dist_pd: view.matrix.get(l.a, l.b),
        walk_d: view.pd.dropoffs[l.b].1,
    };
    let dominates = |x: &Label, y: &Label| delta_c_max(params, &as_pd(x), &as_pd(y)) < 0;
    let mut labels = Labels::default();
    let mut heap = BinaryHeap::new();
    let push = |labels: &mut Labels, heap: &mut BinaryHeap<_>, v: Vertex, a: usize, b: usize, y: Time| {
        let lb = prob.label_lower_bound(a, b, y);
        if lb > found.limit() {
            return;
        }
        if let Some(idx) = labels.offer(v, a, b, y, cfg.domination, dominates) {
            heap.push(Reverse((lb, a, b, v, idx)));
        }
    };
    for (a, &(p, _)) in view.pd.pickups.iter().enumerate() {
        for (b, &(d, _)) in view.pd.dropoffs.iter().enumerate() {
            if p != d && view.matrix.get(a, b) < INF {
                push(&mut labels, &mut heap, p, a, b, 0);
            }
        }
    }
    let mut cands: Vec<(usize, usize, usize)> = Vec::new();
    let down = ch.search_graph(Direction::Down);
    while let Some(Reverse((lb, a, b, v, idx))) = heap.pop() {
        if lb > found.limit() {
            break;
        }
        let l = labels.arena[idx].1;
        if l.dead || l.closed {
            continue;
        }
        labels.arena[idx].1.closed = true;
        counters.labels_settled += 1;
        let mut hits = Vec::new();
        counters.entries_scanned += index.buckets.scan(v, |e| prob.label_lower_bound(a, b, e.dist + l.y) > found.limit(), |e| hits.push((e.owner as usize, e.dist + l.y))) as u64;
        for (veh, x) in hits {
            let (c, ok) = prob.cost(veh, a, b, x);
            if ok && cfg.cost_pruning && c < found.cmax.get() {
                found.cmax.set(c);
            }
            if c <= found.limit() {
                cands.push((veh, a, b));
            }
        }
        for (w, c) in down.out(v) {
            counters.edges_relaxed += 1;
            push(&mut labels, &mut heap, w, a, b, l.y + c);
        }
    }
    counters.candidates += cands.len() as u64;
    if cands.is_empty() {
        return None;
    }
    // Tentative distances can overshoot when a label was retired on the way;
    // recompute them before comparing.
    let pairs: Vec<(usize, usize)> = cands.iter().map(|&(veh, a, _)| (veh, a)).collect();
    let targets: Vec<Vertex> = view.pd.pickups.iter().map(|p| p.0).collect();
    let mut exact = exact_pairs(ch, index, &targets, &pairs, cfg.k, |_, _| false, counters);
    for &pair in &pairs {
        exact.entry(pair).or_insert(INF);
    }
    let costs: Vec<(Time, bool)> = cands.iter().map(|&(veh, a, b)| prob.cost(veh, a, b, exact[&(veh, a)])).collect();
    let c_all = costs.iter().map(|c| c.0).min().unwrap_or(INF);
    if c_all >= INF {
        return None;
    }
    if costs.iter().any(|&(c, ok)| ok && c == c_all) {
        let mut best = None;
        for (&(veh, a, b), &(c, ok)) in cands.iter().zip(&costs) {
            if ok && c == c_all {
                offer(&mut best, view.score_at(&prob.insertion(veh, a, b, exact[&(veh, a)])));
            }
        }
        return best.filter(|s: &Scored| s.cost.total <= bound);
    }
    // The cheapest completions all break a service window; domination may have
    // hidden a feasible one, so redo the search without it.
    counters.fallbacks += 1;
    let found = pals_individual(prob, ch, index, cfg, found.cmax.get(), counters);
    prob.score_pairs(&found.dist, bound)
}

/// Per vehicle with at least one stop ahead: the dropoffs (index, exact
/// distance from the last stop) that may complete an insertion costing at
/// most `bound`. With domination on, dominated dropoffs are left out.
pub fn dals_dropoff_sets(
    view: &RequestView,
    ch: &ContractionHierarchy,
    veh_rev: &Graph,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    bound: Time,
    counters: &mut LastStopCounters,
) -> BTreeMap<usize, Vec<(usize, Time)>> {
    let mut per_veh: BTreeMap<usize, Vec<(usize, Time)>> = BTreeMap::new();
    if view.pd.is_empty() {
        return per_veh;
    }
    let prob = DalsProblem { view, min_walk_p: view.pd.min_walk_p() };
    let limit = if cfg.cost_pruning { bound } else { INF };
    let found = match cfg.strategy {
        Strategy::Dijkstra => dals_dijkstra(&prob, veh_rev, index, cfg, limit, counters),
        Strategy::IndividualBch => dals_individual(&prob, ch, index, cfg, limit, counters),
        Strategy::CollectiveBch => dals_collective(&prob, ch, index, cfg, limit, counters),
    };
    for ((veh, di), y) in found {
        if view.fleet.route(veh).n() >= 1 {
            per_veh.entry(veh).or_default().push((di, y));
        }
    }
    let params = view.fleet.params();
    for ds in per_veh.values_mut() {
        ds.sort_unstable();
        if cfg.domination {
            let lab = |&(di, y): &(usize, Time)| DropoffLabel { dist: y, walk_d: view.pd.dropoffs[di].1 };
            let all = ds.clone();
            ds.retain(|c| !all.iter().any(|o| o != c && dals_dominates(params, &lab(o), &lab(c))));
        }
    }
    per_veh
}

/// Distances from every vehicle's last stop to each target, without any
/// pruning: `(vehicle, target index, distance)` for reachable pairs, sorted.
/// Only the Dijkstra and individual bucket strategies compute plain distances.
pub fn last_stop_distances(
    strategy: Strategy,
    ch: &ContractionHierarchy,
    veh_rev: &Graph,
    index: &LastStopIndex,
    targets: &[Vertex],
    k: usize,
) -> Vec<(usize, usize, Time)> {
    let mut found = Found::new(INF, false);
    match strategy {
        Strategy::Dijkstra => {
            let mut search = BundledSearch::new(veh_rev.num_vertices(), k);
            for (b, batch) in targets.chunks(k).enumerate() {
                search.run(
                    veh_rev,
                    batch,
                    INF,
                    |v, l, d| {
                        for &veh in index.vehicles_at(v) {
                            found.record(veh, b * k + l, d);
                        }
                        true
                    },
                    |_| false,
                );
            }
        }
        _ => {
            let mut search = BundledSearch::new(ch.num_vertices(), k);
            for (b, batch) in targets.chunks(k).enumerate() {
                search.run(
                    ch.search_graph(Direction::Down),
                    batch,
                    INF,
                    |v, l, y| {
                        index.buckets.scan(v, |_| false, |e| found.record(e.owner as usize, b * k + l, e.dist + y));
                        true
                    },
                    |_| false,
                );
            }
        }
    }
    let mut out: Vec<_> = found.dist.into_iter().map(|((v, i), d)| (v, i, d)).collect();
    out.sort_unstable();
    out
}

/// Exact distances from the last stop of `veh` to `targets[t]` for each wanted
/// `(veh, t)`, by bucket scans along the targets' downward search spaces.
/// Bucket scans at `v` end at the first entry for which `stop(t, dist)` holds.
fn exact_pairs(
    ch: &ContractionHierarchy,
    index: &LastStopIndex,
    targets: &[Vertex],
    wanted: &[(usize, usize)],
    k: usize,
    stop: impl Fn(usize, Time) -> bool,
    counters: &mut LastStopCounters,
) -> HashMap<(usize, usize), Time> {
    let want: HashSet<(usize, usize)> = wanted.iter().copied().collect();
    let mut ts: Vec<usize> = wanted.iter().map(|&(_, t)| t).collect();
    ts.sort_unstable();
    ts.dedup();
    let mut out: HashMap<(usize, usize), Time> = HashMap::default();
    let mut scanned = 0u64;
    let mut search = BundledSearch::new(ch.num_vertices(), k);
    for batch in ts.chunks(k) {
        let srcs: Vec<Vertex> = batch.iter().map(|&t| targets[t]).collect();
        search.run(
            ch.search_graph(Direction::Down),
            &srcs,
            INF,
            |v, l, y| {
                let t = batch[l];
                scanned += index.buckets.scan(
                    v,
                    |e| stop(t, e.dist + y),
                    |e| {
                        let key = (e.owner as usize, t);
                        if want.contains(&key) {
                            let d = out.entry(key).or_insert(INF);
                            *d = (*d).min(e.dist + y);
                        }
                    },
                ) as u64;
                true
            },
            |_| false,
        );
    }
    counters.entries_scanned += scanned;
    counters.edges_relaxed += search.edges_relaxed;
    counters.labels_settled += search.vertices_settled;
    out
}

struct DalsProblem<'v, 'a> {
    view: &'v RequestView<'a>,
    min_walk_p: Time,
}

impl DalsProblem<'_, '_> {
    fn lower_bound(&self, di: usize, y: Time) -> Time {
        dals_lower_bound(self.view.fleet.params(), self.view.req, self.min_walk_p, self.view.pd.dropoffs[di].1, y)
    }
}

/// Best dropoff-after-last-stop insertion costing at most `bound`.
#[allow(clippy::too_many_arguments)]
pub fn best_dals(
    view: &RequestView,
    ch: &ContractionHierarchy,
    veh_rev: &Graph,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    bound: Time,
    cur: &mut CurrentLocDists,
    counters: &mut LastStopCounters,
) -> Option<Scored> {
    let sets = dals_dropoff_sets(view, ch, veh_rev, index, cfg, bound, counters);
    let mut best = None;
    let mut first = Vec::new();
    for (veh, ds) in sets {
        let route = view.fleet.route(veh);
        let n = route.n();
        for i in 0..n {
            for p in view.pickup_options(veh, i) {
                for &(di, y) in &ds {
                    let (pv, wp) = view.pd.pickups[p.pi];
                    let (dv, wd) = view.pd.dropoffs[di];
                    if pv == dv {
                        continue;
                    }
                    let ins = Insertion {
                        veh,
                        i,
                        j: n,
                        p: pv,
                        walk_p: wp,
                        d: dv,
                        walk_d: wd,
                        veh_arr_p: route.stops[i].dep + p.to,
                        dist_p_next: p.from,
                        dist_p_d: INF,
                        dist_sj_d: y,
                        dist_d_next: INF,
                    };
                    if i == 0 {
                        view.screen_first_leg(ins, &p, bound, cfg.cost_pruning, &mut first);
                    } else {
                        offer(&mut best, view.score_at(&ins));
                    }
                }
            }
        }
    }
    view.finish_first_leg(ch, cur, first, &mut best);
    best.filter(|s| s.cost.total <= bound)
}

fn dals_dijkstra(prob: &DalsProblem, veh_rev: &Graph, index: &LastStopIndex, cfg: &SearchConfig, limit: Time, counters: &mut LastStopCounters) -> HashMap<(usize, usize), Time> {
    let mut found = Found::new(limit, false);
    let drops: Vec<Vertex> = prob.view.pd.dropoffs.iter().map(|e| e.0).collect();
    let mut search = BundledSearch::new(veh_rev.num_vertices(), cfg.k);
    for (b, batch) in drops.chunks(cfg.k).enumerate() {
        let lanes = b * cfg.k..b * cfg.k + batch.len();
        search.run(
            veh_rev,
            batch,
            INF,
            |v, l, y| {
                let di = b * cfg.k + l;
                if prob.lower_bound(di, y) > limit {
                    return false;
                }
                for &veh in index.vehicles_at(v) {
                    found.record(veh, di, y);
                }
                true
            },
            |key| lanes.clone().all(|di| prob.lower_bound(di, key) > limit),
        );
    }
    counters.edges_relaxed += search.edges_relaxed;
    counters.labels_settled += search.vertices_settled;
    counters.candidates += found.dist.len() as u64;
    found.dist
}

fn dals_individual(
    prob: &DalsProblem,
    ch: &ContractionHierarchy,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    limit: Time,
    counters: &mut LastStopCounters,
) -> HashMap<(usize, usize), Time> {
    let mut found = Found::new(limit, false);
    let drops: Vec<Vertex> = prob.view.pd.dropoffs.iter().map(|e| e.0).collect();
    let mut search = BundledSearch::new(ch.num_vertices(), cfg.k);
    let mut scanned = 0u64;
    for (b, batch) in drops.chunks(cfg.k).enumerate() {
        search.run(
            ch.search_graph(Direction::Down),
            batch,
            INF,
            |v, l, y| {
                let di = b * cfg.k + l;
                if prob.lower_bound(di, y) > limit {
                    return false;
                }
                scanned += index.buckets.scan(v, |e| prob.lower_bound(di, e.dist + y) > limit, |e| found.record(e.owner as usize, di, e.dist + y)) as u64;
                true
            },
            |_| false,
        );
    }
    counters.entries_scanned += scanned;
    counters.edges_relaxed += search.edges_relaxed;
    counters.labels_settled += search.vertices_settled;
    counters.candidates += found.dist.len() as u64;
    found.dist
}

fn dals_collective(
    prob: &DalsProblem,
    ch: &ContractionHierarchy,
    index: &LastStopIndex,
    cfg: &SearchConfig,
    limit: Time,
    counters: &mut LastStopCounters,
) -> HashMap<(usize, usize), Time> {
    let view = prob.view;
    let params = view.fleet.params();
    let lab = |l: &Label| DropoffLabel { dist: l.y, walk_d: view.pd.dropoffs[l.a].1 };
    let dominates = |x: &Label, y: &Label| dals_dominates(params, &lab(x), &lab(y));
    let mut labels = Labels::default();
    let mut heap = BinaryHeap::new();
    let push = |labels: &mut Labels, heap: &mut BinaryHeap<_>, v: Vertex, a: usize, y: Time| {
        let lb = prob.lower_bound(a, y);
        if lb > limit {
            return;
        }
        if let Some(idx) = labels.offer(v, a, 0, y, cfg.domination, dominates) {
            heap.push(Reverse((lb, a, v, idx)));
        }
    };
    for (a, &(d, _)) in view.pd.dropoffs.iter().enumerate() {
        push(&mut labels, &mut heap, d, a, 0);
    }
    let mut hits: Vec<(usize, usize)> = Vec::new();
    let down = ch.search_graph(Direction::Down);
    while let Some(Reverse((lb, a, v, idx))) = heap.pop() {
        if lb > limit {
            break;
        }
        let l = labels.arena[idx].1;
        if l.dead || l.closed {
            continue;
        }
        labels.arena[idx].1.closed = true;
        counters.labels_settled += 1;
        counters.entries_scanned += index.buckets.scan(v, |e| prob.lower_bound(a, e.dist + l.y) > limit, |e| hits.push((e.owner as usize, a))) as u64;
        for (w, c) in down.out(v) {
            counters.edges_relaxed += 1;
            push(&mut labels, &mut heap, w, a, l.y + c);
        }
    }
    hits.sort_unstable();
    hits.dedup();
    counters.candidates += hits.len() as u64;
    // Tentative distances can overshoot when a label was retired on the way.
    let targets: Vec<Vertex> = view.pd.dropoffs.iter().map(|d| d.0).collect();
    exact_pairs(ch, index, &targets, &hits, cfg.k, |a, y| prob.lower_bound(a, y) > limit, counters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("bch".parse::<Strategy>().is_err());
    }
}
