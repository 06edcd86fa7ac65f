//! Shared search machinery: bundled Dijkstra and sorted per-vertex buckets.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::road_network::Graph;
use crate::{Time, Vertex, INF};

/// Dijkstra with `k` lanes sharing one queue and one pass over each edge.
///
/// The queue key of a vertex is the smallest pending lane distance. A vertex
/// can be popped again when a lane improves after it was settled, so lanes
/// converge to their exact distances independently of `k`.
pub struct BundledSearch {
    k: usize,
    dist: Vec<Time>,
    done: Vec<Time>,
    key: Vec<Time>,
    touched: Vec<Vertex>,
    is_touched: Vec<bool>,
    active: Vec<bool>,
    heap: BinaryHeap<Reverse<(Time, Vertex)>>,
    pub edges_relaxed: u64,
    pub vertices_settled: u64,
}

impl BundledSearch {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(k >= 1);
        BundledSearch {
            k,
            dist: vec![INF; n * k],
            done: vec![INF; n * k],
            key: vec![INF; n],
            touched: Vec::new(),
            is_touched: vec![false; n],
            active: vec![false; k],
            heap: BinaryHeap::new(),
            edges_relaxed: 0,
            vertices_settled: 0,
        }
    }

    pub fn lanes(&self) -> usize {
        self.k
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            let v = v as usize;
            self.is_touched[v] = false;
            self.key[v] = INF;
            for l in 0..self.k {
                self.dist[v * self.k + l] = INF;
                self.done[v * self.k + l] = INF;
            }
        }
        self.touched.clear();
        self.heap.clear();
    }

    #[inline]
    fn improve(&mut self, v: Vertex, lane: usize, d: Time) {
        let vi = v as usize;
        if !self.is_touched[vi] {
            self.is_touched[vi] = true;
            self.touched.push(v);
        }
        self.dist[vi * self.k + lane] = d;
        if d < self.key[vi] {
            self.key[vi] = d;
            self.heap.push(Reverse((d, v)));
        }
    }

    /// Runs from `sources[l]` in lane `l` (at most `k` sources).
    ///
    /// `visit(v, lane, d)` is called whenever a lane label is settled; returning
    /// false keeps the label from being relaxed. Labels above `radius` are
    /// dropped. `stop(min_key)` ends the search early.
    pub fn run(
        &mut self,
        g: &Graph,
        sources: &[Vertex],
        radius: Time,
        mut visit: impl FnMut(Vertex, usize, Time) -> bool,
        mut stop: impl FnMut(Time) -> bool,
    ) {
        assert!(sources.len() <= self.k);
        self.reset();
        for (l, &s) in sources.iter().enumerate() {
            self.improve(s, l, 0);
        }
        let k = self.k;
        while let Some(Reverse((key, v))) = self.heap.pop() {
            let vi = v as usize;
            if key != self.key[vi] {
                continue;
            }
            if stop(key) {
                break;
            }
            self.key[vi] = INF;
            self.vertices_settled += 1;
            let mut any = false;
            for l in 0..k {
                let d = self.dist[vi * k + l];
                self.active[l] = false;
                if d < self.done[vi * k + l] {
                    self.done[vi * k + l] = d;
                    if visit(v, l, d) && d <= radius {
                        self.active[l] = true;
                        any = true;
                    }
                }
            }
            if !any {
                continue;
            }
            for (w, c) in g.out(v) {
                self.edges_relaxed += 1;
                for l in 0..k {
                    if !self.active[l] {
                        continue;
                    }
                    let nd = self.dist[vi * k + l] + c;
                    if nd <= radius && nd < self.dist[w as usize * k + l] {
                        self.improve(w, l, nd);
                    }
                }
            }
        }
    }

    pub fn dist(&self, v: Vertex, lane: usize) -> Time {
        self.dist[v as usize * self.k + lane]
    }

    /// Vertices reached by the last run, in first-touch order.
    pub fn reached(&self) -> &[Vertex] {
        &self.touched
    }
}

/// Bounded many-source Dijkstra processed in bundles of `k` sources.
///
/// `beyond(source_index, d)` must be monotone in `d`; labels for which it
/// holds are neither reported nor relaxed. Each result lists `(vertex, dist)`
/// sorted by vertex.
pub fn dijkstra(
    g: &Graph,
    sources: &[Vertex],
    k: usize,
    radius: Time,
    mut beyond: impl FnMut(usize, Time) -> bool,
) -> Vec<Vec<(Vertex, Time)>> {
    let mut search = BundledSearch::new(g.num_vertices(), k);
    let mut out = Vec::with_capacity(sources.len());
    for (b, batch) in sources.chunks(k).enumerate() {
        search.run(g, batch, radius, |_, l, d| !beyond(b * k + l, d), |_| false);
        for l in 0..batch.len() {
            let mut res: Vec<(Vertex, Time)> = search
                .reached()
                .iter()
                .map(|&v| (v, search.dist(v, l)))
                .filter(|&(_, d)| d < INF && d <= radius && !beyond(b * k + l, d))
                .collect();
            res.sort_unstable();
            out.push(res);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketEntry<O> {
    pub owner: O,
    pub dist: Time,
    pub key: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyOrder {
    Increasing,
    Decreasing,
}

/// Per-vertex bucket lists. When `sorted`, each list is ordered by key
/// (stable for equal keys) and scans may stop early.
#[derive(Debug, Clone)]
pub struct BucketStore<O> {
    buckets: Vec<Vec<BucketEntry<O>>>,
    order: KeyOrder,
    sorted: bool,
}

impl<O: Copy + Eq> BucketStore<O> {
    pub fn new(n: usize, order: KeyOrder, sorted: bool) -> Self {
        BucketStore { buckets: vec![Vec::new(); n], order, sorted }
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn insert(&mut self, v: Vertex, e: BucketEntry<O>) {
        let b = &mut self.buckets[v as usize];
        if !self.sorted {
            b.push(e);
            return;
        }
        let pos = match self.order {
            KeyOrder::Increasing => b.partition_point(|x| x.key <= e.key),
            KeyOrder::Decreasing => b.partition_point(|x| x.key >= e.key),
        };
        b.insert(pos, e);
    }

    /// Removes every entry of `owner` at the given vertices. Unknown owners are ignored.
    pub fn remove_owner(&mut self, owner: O, vertices: impl IntoIterator<Item = Vertex>) {
        for v in vertices {
            self.buckets[v as usize].retain(|e| e.owner != owner);
        }
    }

    pub fn bucket(&self, v: Vertex) -> &[BucketEntry<O>] {
        &self.buckets[v as usize]
    }

    pub fn total_entries(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    /// Visits entries at `v` until `stop_rule` fires. In a sorted store the
    /// scan breaks there; unsorted stores skip just that entry. The stop rule
    /// must be monotone along the key order. Returns the number of entries
    /// looked at.
    pub fn scan(
        &self,
        v: Vertex,
        mut stop_rule: impl FnMut(&BucketEntry<O>) -> bool,
        mut visit: impl FnMut(&BucketEntry<O>),
    ) -> usize {
        let mut scanned = 0;
        for e in &self.buckets[v as usize] {
            scanned += 1;
            if stop_rule(e) {
                if self.sorted {
                    break;
                }
                continue;
            }
            visit(e);
        }
        scanned
    }
}
