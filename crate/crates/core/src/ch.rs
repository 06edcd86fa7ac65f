//! Contraction hierarchy: construction, exact queries, search spaces, cache file.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::road_network::Graph;
use crate::search_core::BundledSearch;
use crate::{Time, Vertex, INF};

const MAGIC: &[u8; 4] = b"DCH\x01";
const VERSION: u32 = 1;
const WITNESS_SETTLE_LIMIT: usize = 500;
const SIMULATE_SETTLE_LIMIT: usize = 60;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a CH cache file")]
    BadMagic,
    #[error("unsupported CH cache version {0}")]
    Version(u32),
    #[error("CH cache was built for a different graph")]
    GraphMismatch,
    #[error("CH cache is corrupt: {0}")]
    Corrupt(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Upward search from a source: d↑(v, ·).
    Up,
    /// Reverse search over downward edges from a target: d↓(·, v).
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Arc {
    tail: Vertex,
    head: Vertex,
    weight: Time,
    /// The two arcs a shortcut replaces.
    unpack: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionHierarchy {
    rank: Vec<u32>,
    fwd: Graph,
    fwd_arc: Vec<u32>,
    bwd: Graph,
    bwd_arc: Vec<u32>,
    arcs: Vec<Arc>,
    fingerprint: [u8; 32],
}

fn fingerprint(g: &Graph) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((g.num_vertices() as u64).to_le_bytes());
    for (t, hd, w) in g.edges() {
        h.update(t.to_le_bytes());
        h.update(hd.to_le_bytes());
        h.update(w.to_le_bytes());
    }
    h.finalize().into()
}

struct Contractor {
    arcs: Vec<Arc>,
    out: Vec<Vec<(Vertex, Time, u32)>>,
    inc: Vec<Vec<(Vertex, Time, u32)>>,
    contracted: Vec<bool>,
    witness_dist: Vec<Time>,
    witness_touched: Vec<Vertex>,
}

impl Contractor {
    fn new(g: &Graph) -> Self {
        let n = g.num_vertices();
        let mut c = Contractor {
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
            contracted: vec![false; n],
            witness_dist: vec![INF; n],
            witness_touched: Vec::new(),
        };
        for (t, h, w) in g.edges() {
            if t != h {
                c.add_arc(t, h, w, None);
            }
        }
        c
    }

    fn add_arc(&mut self, t: Vertex, h: Vertex, w: Time, unpack: Option<(u32, u32)>) {
        if let Some(e) = self.out[t as usize].iter_mut().find(|e| e.0 == h) {
            if e.1 <= w {
                return;
            }
            e.1 = w;
            let id = e.2;
            self.arcs[id as usize].weight = w;
            self.arcs[id as usize].unpack = unpack;
            let back = self.inc[h as usize].iter_mut().find(|e| e.2 == id).expect("arc mirrored");
            back.1 = w;
            return;
        }
        let id = self.arcs.len() as u32;
        self.arcs.push(Arc { tail: t, head: h, weight: w, unpack });
        self.out[t as usize].push((h, w, id));
        self.inc[h as usize].push((t, w, id));
    }

    /// Local Dijkstra from `s` that avoids `skip`, bounded by distance and settle count.
    fn witness(&mut self, s: Vertex, skip: Vertex, bound: Time, limit: usize) {
        for &v in &self.witness_touched {
            self.witness_dist[v as usize] = INF;
        }
        self.witness_touched.clear();
        let mut heap = BinaryHeap::new();
        self.witness_dist[s as usize] = 0;
        self.witness_touched.push(s);
        heap.push(Reverse((0, s)));
        let mut settled = 0;
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > self.witness_dist[v as usize] {
                continue;
            }
            if d > bound || settled >= limit {
                break;
            }
            settled += 1;
            for &(w, c, _) in &self.out[v as usize] {
                if w == skip {
                    continue;
                }
                let nd = d + c;
                if nd < self.witness_dist[w as usize] {
                    if self.witness_dist[w as usize] == INF {
                        self.witness_touched.push(w);
                    }
                    self.witness_dist[w as usize] = nd;
                    heap.push(Reverse((nd, w)));
                }
            }
        }
    }

    /// Shortcuts that contracting `v` needs, as (tail, head, weight, in-arc, out-arc).
    fn shortcuts(&mut self, v: Vertex, limit: usize) -> Vec<(Vertex, Vertex, Time, u32, u32)> {
        let ins = self.inc[v as usize].clone();
        let outs = self.out[v as usize].clone();
        let mut res = Vec::new();
        for &(u, luv, a1) in &ins {
            let bound = outs.iter().filter(|o| o.0 != u).map(|o| luv + o.1).max();
            let Some(bound) = bound else { continue };
            self.witness(u, v, bound, limit);
            for &(w, lvw, a2) in &outs {
                if w != u && self.witness_dist[w as usize] > luv + lvw {
                    res.push((u, w, luv + lvw, a1, a2));
                }
            }
        }
        res
    }

    fn priority(&mut self, v: Vertex, contracted_neighbors: &[i64]) -> i64 {
        let added = self.shortcuts(v, SIMULATE_SETTLE_LIMIT).len() as i64;
        let removed = (self.inc[v as usize].len() + self.out[v as usize].len()) as i64;
        added - removed + contracted_neighbors[v as usize]
    }

    fn contract(&mut self, v: Vertex, cn: &mut [i64]) {
        for (u, w, len, a1, a2) in self.shortcuts(v, WITNESS_SETTLE_LIMIT) {
            self.add_arc(u, w, len, Some((a1, a2)));
        }
        self.contracted[v as usize] = true;
        let ins = std::mem::take(&mut self.inc[v as usize]);
        let outs = std::mem::take(&mut self.out[v as usize]);
        for &(u, _, _) in &ins {
            self.out[u as usize].retain(|e| e.0 != v);
            cn[u as usize] += 1;
        }
        for &(w, _, _) in &outs {
            self.inc[w as usize].retain(|e| e.0 != v);
            cn[w as usize] += 1;
        }
        // Keep the final incident arcs for the search graphs.
        self.inc[v as usize] = ins;
        self.out[v as usize] = outs;
    }
}

impl ContractionHierarchy {
    /// Builds with a lazy edge-difference + contracted-neighbour ordering.
    pub fn build(g: &Graph) -> Self {
        let n = g.num_vertices();
        let mut c = Contractor::new(g);
        let mut cn = vec![0i64; n];
        let mut heap: BinaryHeap<Reverse<(i64, Vertex)>> = BinaryHeap::new();
        for v in 0..n as Vertex {
            let p = c.priority(v, &cn);
            heap.push(Reverse((p, v)));
        }
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, v))) = heap.pop() {
            if c.contracted[v as usize] {
                continue;
            }
            let p = c.priority(v, &cn);
            if let Some(&Reverse((next, _))) = heap.peek() {
                if p > next {
                    heap.push(Reverse((p, v)));
                    continue;
                }
            }
            c.contract(v, &mut cn);
            order.push(v);
        }
        Self::finish(g, c, &order)
    }

    /// Builds with a fixed contraction order (first element contracted first).
    pub fn build_with_order(g: &Graph, order: &[Vertex]) -> Self {
        let n = g.num_vertices();
        assert_eq!(order.len(), n, "order must be a permutation");
        let mut c = Contractor::new(g);
        let mut cn = vec![0i64; n];
        for &v in order {
            assert!(!c.contracted[v as usize], "order must be a permutation");
            c.contract(v, &mut cn);
        }
        Self::finish(g, c, order)
    }

    fn finish(g: &Graph, c: Contractor, order: &[Vertex]) -> Self {
        let n = g.num_vertices();
        let mut rank = vec![0u32; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v as usize] = r as u32;
        }
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        for v in 0..n {
            for &(w, len, id) in &c.out[v] {
                fwd.push((v as Vertex, w, len, id));
            }
            for &(u, len, id) in &c.inc[v] {
                bwd.push((v as Vertex, u, len, id));
            }
        }
        Self::from_parts(rank, c.arcs, fwd, bwd, fingerprint(g))
    }

    fn from_parts(
        rank: Vec<u32>,
        arcs: Vec<Arc>,
        mut fwd: Vec<(Vertex, Vertex, Time, u32)>,
        mut bwd: Vec<(Vertex, Vertex, Time, u32)>,
        fingerprint: [u8; 32],
    ) -> Self {
        let n = rank.len();
        fwd.sort_by_key(|e| (e.0, e.1));
        bwd.sort_by_key(|e| (e.0, e.1));
        let split = |es: &[(Vertex, Vertex, Time, u32)]| {
            let g = Graph::from_edges(n, &es.iter().map(|e| (e.0, e.1, e.2)).collect::<Vec<_>>());
            (g, es.iter().map(|e| e.3).collect::<Vec<_>>())
        };
        let (fwd, fwd_arc) = split(&fwd);
        let (bwd, bwd_arc) = split(&bwd);
        ContractionHierarchy { rank, fwd, fwd_arc, bwd, bwd_arc, arcs, fingerprint }
    }

    pub fn num_vertices(&self) -> usize {
        self.rank.len()
    }

    pub fn rank(&self, v: Vertex) -> u32 {
        self.rank[v as usize]
    }

    /// Upward edges u→w with rank(u) < rank(w).
    pub fn up_graph(&self) -> &Graph {
        &self.fwd
    }

    /// Downward edges u→v (rank(u) > rank(v)) stored reversed at v, so that a
    /// forward search in this graph from t yields d↓(·, t).
    pub fn down_graph_reversed(&self) -> &Graph {
        &self.bwd
    }

    pub fn search_graph(&self, dir: Direction) -> &Graph {
        match dir {
            Direction::Up => &self.fwd,
            Direction::Down => &self.bwd,
        }
    }

    pub fn num_shortcuts(&self) -> usize {
        self.arcs.iter().filter(|a| a.unpack.is_some()).count()
    }

    pub fn query(&self, s: Vertex, t: Vertex) -> Option<Time> {
        ChQuery::new(self.num_vertices()).run(self, s, t).map(|(d, _)| d)
    }

    /// Shortest path as a vertex sequence with its length.
    pub fn path(&self, s: Vertex, t: Vertex) -> Option<(Time, Vec<Vertex>)> {
        let mut q = ChQuery::new(self.num_vertices());
        let (d, meet) = q.run(self, s, t)?;
        let mut path = vec![s];
        for a in q.arc_chain(self, meet) {
            self.unpack(a, &mut path);
        }
        Some((d, path))
    }

    /// Shortest path with the distance from `s` at every vertex.
    pub fn path_with_times(&self, s: Vertex, t: Vertex) -> Option<Vec<(Vertex, Time)>> {
        let mut q = ChQuery::new(self.num_vertices());
        let (_, meet) = q.run(self, s, t)?;
        let mut out = vec![(s, 0)];
        for a in q.arc_chain(self, meet) {
            self.unpack_timed(a, &mut out);
        }
        Some(out)
    }

    fn unpack_timed(&self, a: u32, out: &mut Vec<(Vertex, Time)>) {
        let arc = self.arcs[a as usize];
        match arc.unpack {
            None => {
                let acc = out.last().map_or(0, |e| e.1);
                out.push((arc.head, acc + arc.weight));
            }
            Some((x, y)) => {
                self.unpack_timed(x, out);
                self.unpack_timed(y, out);
            }
        }
    }

    fn unpack(&self, a: u32, path: &mut Vec<Vertex>) {
        let arc = self.arcs[a as usize];
        match arc.unpack {
            None => path.push(arc.head),
            Some((x, y)) => {
                self.unpack(x, path);
                self.unpack(y, path);
            }
        }
    }

    /// Search space of `v` with exact d↑ / d↓ distances, sorted by vertex.
    /// Labels above `radius` are cut off.
    pub fn search_space(&self, v: Vertex, dir: Direction, radius: Time) -> Vec<(Vertex, Time)> {
        self.search_space_until(v, dir, radius, |_, _| false)
    }

    /// Like `search_space`, also pruning labels for which `prune(vertex, dist)` holds.
    pub fn search_space_until(
        &self,
        v: Vertex,
        dir: Direction,
        radius: Time,
        mut prune: impl FnMut(Vertex, Time) -> bool,
    ) -> Vec<(Vertex, Time)> {
        let mut s = BundledSearch::new(self.num_vertices(), 1);
        let mut out = Vec::new();
        s.run(
            self.search_graph(dir),
            &[v],
            radius,
            |u, _, d| {
                if d > radius || prune(u, d) {
                    return false;
                }
                out.push((u, d));
                true
            },
            |_| false,
        );
        // Relabelled vertices appear more than once; keep the final distance.
        out.sort_unstable();
        out.dedup_by_key(|e| e.0);
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CacheError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.fingerprint);
        buf.extend_from_slice(&(self.rank.len() as u64).to_le_bytes());
        for r in &self.rank {
            buf.extend_from_slice(&r.to_le_bytes());
        }
        buf.extend_from_slice(&(self.arcs.len() as u64).to_le_bytes());
        for a in &self.arcs {
            buf.extend_from_slice(&a.tail.to_le_bytes());
            buf.extend_from_slice(&a.head.to_le_bytes());
            buf.extend_from_slice(&a.weight.to_le_bytes());
            let (x, y) = a.unpack.map_or((u32::MAX, u32::MAX), |p| p);
            buf.extend_from_slice(&x.to_le_bytes());
            buf.extend_from_slice(&y.to_le_bytes());
        }
        let mut edges = |g: &Graph, ids: &[u32]| {
            buf.extend_from_slice(&(ids.len() as u64).to_le_bytes());
            for ((t, _, _), id) in g.edges().into_iter().zip(ids) {
                buf.extend_from_slice(&t.to_le_bytes());
                buf.extend_from_slice(&id.to_le_bytes());
            }
        };
        edges(&self.fwd, &self.fwd_arc);
        edges(&self.bwd, &self.bwd_arc);
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Loads a cache and checks that it belongs to `g`.
    pub fn load(path: &Path, g: &Graph) -> Result<Self, CacheError> {
        let mut data = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut data)?;
        let mut r = Reader { data: &data, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(CacheError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CacheError::Version(version));
        }
        let fp: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        if fp != fingerprint(g) {
            return Err(CacheError::GraphMismatch);
        }
        let n = r.u64()? as usize;
        if n != g.num_vertices() {
            return Err(CacheError::GraphMismatch);
        }
        let rank = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        let m = r.u64()? as usize;
        let mut arcs = Vec::with_capacity(m);
        for _ in 0..m {
            let tail = r.u32()?;
            let head = r.u32()?;
            let weight = r.u64()? as i64;
            let x = r.u32()?;
            let y = r.u32()?;
            if tail as usize >= n || head as usize >= n {
                return Err(CacheError::Corrupt("arc endpoint out of range"));
            }
            let unpack = if x == u32::MAX { None } else { Some((x, y)) };
            if let Some((x, y)) = unpack {
                if x as usize >= m || y as usize >= m {
                    return Err(CacheError::Corrupt("unpack index out of range"));
                }
            }
            arcs.push(Arc { tail, head, weight, unpack });
        }
        let mut edges = |fwd: bool| -> Result<Vec<(Vertex, Vertex, Time, u32)>, CacheError> {
            let k = r.u64()? as usize;
            let mut es = Vec::with_capacity(k);
            for _ in 0..k {
                let t = r.u32()?;
                let id = r.u32()?;
                let a = *arcs.get(id as usize).ok_or(CacheError::Corrupt("edge arc out of range"))?;
                let other = if fwd { a.head } else { a.tail };
                es.push((t, other, a.weight, id));
            }
            Ok(es)
        };
        let fwd = edges(true)?;
        let bwd = edges(false)?;
        Ok(Self::from_parts(rank, arcs, fwd, bwd, fp))
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], CacheError> {
        let s = self.data.get(self.pos..self.pos + k).ok_or(CacheError::Corrupt("truncated"))?;
        self.pos += k;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Reusable bidirectional query buffers.
pub struct ChQuery {
    dist: [Vec<Time>; 2],
    parent: [Vec<Option<u32>>; 2],
    touched: Vec<Vertex>,
}

impl ChQuery {
    pub fn new(n: usize) -> Self {
        ChQuery {
            dist: [vec![INF; n], vec![INF; n]],
            parent: [vec![None; n], vec![None; n]],
            touched: Vec::new(),
        }
    }

    /// Arcs of the last query's path through `meet`, in path order.
    fn arc_chain(&self, ch: &ContractionHierarchy, meet: Vertex) -> Vec<u32> {
        let mut arcs = Vec::new();
        let mut v = meet;
        while let Some(a) = self.parent[0][v as usize] {
            arcs.push(a);
            v = ch.arcs[a as usize].tail;
        }
        arcs.reverse();
        let mut v = meet;
        while let Some(a) = self.parent[1][v as usize] {
            arcs.push(a);
            v = ch.arcs[a as usize].head;
        }
        arcs
    }

    /// Returns the distance and the meeting vertex.
    pub fn run(&mut self, ch: &ContractionHierarchy, s: Vertex, t: Vertex) -> Option<(Time, Vertex)> {
        for &v in &self.touched {
            for side in 0..2 {
                self.dist[side][v as usize] = INF;
                self.parent[side][v as usize] = None;
            }
        }
        self.touched.clear();
        let mut heaps = [BinaryHeap::new(), BinaryHeap::new()];
        let graphs = [(&ch.fwd, &ch.fwd_arc), (&ch.bwd, &ch.bwd_arc)];
        for (side, root) in [(0, s), (1, t)] {
            self.dist[side][root as usize] = 0;
            heaps[side].push(Reverse((0, root)));
        }
        self.touched.push(s);
        self.touched.push(t);
        let mut best = INF;
        let mut meet = None;
        if s == t {
            return Some((0, s));
        }
        let mut side = 0;
        loop {
            let open = |h: &BinaryHeap<Reverse<(Time, Vertex)>>| h.peek().is_some_and(|Reverse((d, _))| *d < best);
            let (o0, o1) = (open(&heaps[0]), open(&heaps[1]));
            if !o0 && !o1 {
                break;
            }
            if !(if side == 0 { o0 } else { o1 }) {
                side ^= 1;
            }
            let Reverse((d, v)) = heaps[side].pop().expect("open heap");
            if d > self.dist[side][v as usize] {
                side ^= 1;
                continue;
            }
            let other = self.dist[side ^ 1][v as usize];
            if other < INF && d + other < best {
                best = d + other;
                meet = Some(v);
            }
            let (g, ids) = graphs[side];
            let first = g.first_edge(v);
            for (idx, (w, c)) in g.out(v).enumerate() {
                let nd = d + c;
                if nd < self.dist[side][w as usize] {
                    if self.dist[0][w as usize] == INF && self.dist[1][w as usize] == INF {
                        self.touched.push(w);
                    }
                    self.dist[side][w as usize] = nd;
                    self.parent[side][w as usize] = Some(ids[first + idx]);
                    heaps[side].push(Reverse((nd, w)));
                }
            }
            side ^= 1;
        }
        meet.map(|m| (best, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search_core::dijkstra;
    use crate::synth;
    use proptest::prelude::*;

    fn line_ch() -> ContractionHierarchy {
        ContractionHierarchy::build_with_order(&synth::line().veh, &[1, 2, 0, 3])
    }

    #[test]
    fn single_vertex() {
        let g = Graph::from_edges(1, &[]);
        let ch = ContractionHierarchy::build(&g);
        assert_eq!(ch.rank(0), 0);
        assert_eq!(ch.up_graph().num_edges(), 0);
        assert_eq!(ch.query(0, 0), Some(0));
    }

    #[test]
    fn line_forced_order_shortcut() {
        let ch = line_ch();
        let sc: Vec<_> = ch.arcs.iter().filter(|a| a.unpack.is_some()).map(|a| (a.tail, a.head, a.weight)).collect();
        assert!(sc.contains(&(0, 2, 200)));
        assert!(sc.contains(&(2, 0, 200)));
    }

    #[test]
    fn line_queries() {
        let ch = line_ch();
        assert_eq!(ch.query(0, 0), Some(0));
        assert_eq!(ch.query(0, 3), Some(300));
        assert_eq!(ch.path(0, 3), Some((300, vec![0, 1, 2, 3])));
        assert_eq!(ch.path_with_times(3, 1), Some(vec![(3, 0), (2, 100), (1, 200)]));
    }

    #[test]
    fn line_search_space() {
        // v2 ranks below v0 here, so v0 reaches v3 through the shortcut 0->3 added with v2.
        let ch = line_ch();
        assert_eq!(ch.search_space(0, Direction::Up, INF), vec![(0, 0), (3, 300)]);
        assert_eq!(ch.search_space(0, Direction::Up, 150), vec![(0, 0)]);
        assert_eq!(ch.search_space(3, Direction::Up, INF), vec![(3, 0)]);
    }

    #[test]
    fn line_search_space_v0_below_v2() {
        let ch = ContractionHierarchy::build_with_order(&synth::line().veh, &[1, 0, 2, 3]);
        assert_eq!(ch.search_space(0, Direction::Up, INF), vec![(0, 0), (2, 200), (3, 300)]);
        assert_eq!(ch.search_space(0, Direction::Up, 150), vec![(0, 0)]);
        let oracle = dijkstra(ch.up_graph(), &[0], 1, INF, |_, _| false);
        assert_eq!(ch.search_space(0, Direction::Up, INF), oracle[0]);
    }

    #[test]
    fn line_up_space_matches_dijkstra_on_up_graph() {
        let ch = line_ch();
        let oracle = dijkstra(ch.up_graph(), &[0], 1, INF, |_, _| false);
        assert_eq!(ch.search_space(0, Direction::Up, INF), oracle[0]);
    }

    #[test]
    fn disconnected_pair_unreachable() {
        let g = Graph::from_edges(4, &[(0, 1, 5), (1, 0, 5), (2, 3, 5), (3, 2, 5)]);
        let ch = ContractionHierarchy::build(&g);
        assert_eq!(ch.query(0, 3), None);
        assert_eq!(ch.query(2, 3), Some(5));
    }

    #[test]
    fn random_graph_matches_dijkstra() {
        let g = synth::random_graph(7, 50, 200, 1..100);
        let ch = ContractionHierarchy::build(&g);
        let all = dijkstra(&g, &(0..50).collect::<Vec<_>>(), 8, INF, |_, _| false);
        for s in 0..50u32 {
            for t in 0..50u32 {
                let want = all[s as usize].iter().find(|e| e.0 == t).map(|e| e.1);
                assert_eq!(ch.query(s, t), want, "{s}->{t}");
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let g = synth::random_graph(3, 40, 150, 1..60);
        let ch = ContractionHierarchy::build(&g);
        let dir = std::env::temp_dir().join(format!("dch-test-{}", std::process::id()));
        ch.save(&dir).unwrap();
        let back = ContractionHierarchy::load(&dir, &g).unwrap();
        assert_eq!(ch, back);
        let other = synth::random_graph(4, 40, 150, 1..60);
        assert!(matches!(ContractionHierarchy::load(&dir, &other), Err(CacheError::GraphMismatch)));
        std::fs::remove_file(&dir).ok();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn query_and_paths_exact(seed in any::<u64>(), n in 2usize..60, zero in any::<bool>()) {
            let lo = if zero { 0 } else { 1 };
            let g = synth::random_graph(seed, n, n * 3, lo..40);
            let ch = ContractionHierarchy::build(&g);
            let srcs: Vec<Vertex> = (0..n as Vertex).collect();
            let all = dijkstra(&g, &srcs, 16, INF, |_, _| false);
            for s in 0..n as Vertex {
                for t in 0..n as Vertex {
                    let want = all[s as usize].iter().find(|e| e.0 == t).map(|e| e.1);
                    prop_assert_eq!(ch.query(s, t), want);
                    if let Some((d, p)) = ch.path(s, t) {
                        prop_assert_eq!(p[0], s);
                        prop_assert_eq!(*p.last().unwrap(), t);
                        let len: Time = p.windows(2).map(|w| g.out(w[0]).filter(|e| e.0 == w[1]).map(|e| e.1).min().unwrap()).sum();
                        prop_assert_eq!(len, d);
                    }
                }
            }
        }

        #[test]
        fn up_down_concatenation(seed in any::<u64>()) {
            let g = synth::random_graph(seed, 30, 90, 1..30);
            let ch = ContractionHierarchy::build(&g);
            let all = dijkstra(&g, &(0..30).collect::<Vec<_>>(), 8, INF, |_, _| false);
            for s in 0..30u32 {
                let up = ch.search_space(s, Direction::Up, INF);
                for t in 0..30u32 {
                    let down = ch.search_space(t, Direction::Down, INF);
                    let mut best = INF;
                    for &(v, a) in &up {
                        if let Some(&(_, b)) = down.iter().find(|e| e.0 == v) {
                            best = best.min(a + b);
                        }
                    }
                    let want = all[s as usize].iter().find(|e| e.0 == t).map_or(INF, |e| e.1);
                    prop_assert_eq!(best, want);
                    for &(v, a) in &up {
                        let exact = all[s as usize].iter().find(|e| e.0 == v).map_or(INF, |e| e.1);
                        prop_assert!(a >= exact);
                    }
                }
            }
        }
    }
}
