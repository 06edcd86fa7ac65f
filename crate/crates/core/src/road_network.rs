//! Vehicle and pedestrian road networks over one vertex id space.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::{Time, Vertex};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: vertex {vertex} out of range (vertex count {count})")]
    DanglingVertex { line: usize, vertex: i64, count: usize },
    #[error("line {line}: negative travel time {time}")]
    NegativeWeight { line: usize, time: i64 },
    #[error("boarding set is empty")]
    EmptyBoardingSet,
    #[error("missing `vertices N` header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Static graph in forward-star layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    first_out: Vec<u32>,
    head: Vec<Vertex>,
    weight: Vec<Time>,
}

impl Graph {
    /// Builds from an edge list. Edge order within a tail is kept.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex, Time)]) -> Self {
        let mut first_out = vec![0u32; n + 1];
        for &(t, _, _) in edges {
            first_out[t as usize + 1] += 1;
        }
        for v in 0..n {
            first_out[v + 1] += first_out[v];
        }
        let mut pos: Vec<u32> = first_out[..n].to_vec();
        let mut head = vec![0; edges.len()];
        let mut weight = vec![0; edges.len()];
        for &(t, h, w) in edges {
            let p = pos[t as usize] as usize;
            head[p] = h;
            weight[p] = w;
            pos[t as usize] += 1;
        }
        Graph { first_out, head, weight }
    }

    pub fn num_vertices(&self) -> usize {
        self.first_out.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.head.len()
    }

    #[inline]
    pub fn out(&self, v: Vertex) -> impl Iterator<Item = (Vertex, Time)> + '_ {
        let r = self.first_out[v as usize] as usize..self.first_out[v as usize + 1] as usize;
        self.head[r.clone()].iter().copied().zip(self.weight[r].iter().copied())
    }

    /// Index of the first out-edge of `v` in edge order.
    pub fn first_edge(&self, v: Vertex) -> usize {
        self.first_out[v as usize] as usize
    }

    pub fn degree(&self, v: Vertex) -> usize {
        (self.first_out[v as usize + 1] - self.first_out[v as usize]) as usize
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex, Time)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for v in 0..self.num_vertices() as Vertex {
            for (h, w) in self.out(v) {
                out.push((v, h, w));
            }
        }
        out
    }

    pub fn reversed(&self) -> Graph {
        let rev: Vec<_> = self.edges().into_iter().map(|(t, h, w)| (h, t, w)).collect();
        Graph::from_edges(self.num_vertices(), &rev)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoadNetworkPair {
    pub veh: Graph,
    pub psg: Graph,
    veh_accessible: Vec<bool>,
    psg_accessible: Vec<bool>,
    explicit_veh: Vec<Vertex>,
    explicit_psg: Vec<Vertex>,
    board_filter: Option<Vec<Vertex>>,
    boarding: Vec<bool>,
}

impl RoadNetworkPair {
    /// `explicit_*` flag vertices accessible even without incident edges;
    /// `board_filter` restricts the boarding set when given.
    pub fn new(
        n: usize,
        veh_edges: &[(Vertex, Vertex, Time)],
        psg_edges: &[(Vertex, Vertex, Time)],
        explicit_veh: &[Vertex],
        explicit_psg: &[Vertex],
        board_filter: Option<&[Vertex]>,
    ) -> Result<Self, NetworkError> {
        let check = |v: Vertex| -> Result<(), NetworkError> {
            if (v as usize) < n {
                Ok(())
            } else {
                Err(NetworkError::DanglingVertex { line: 0, vertex: v as i64, count: n })
            }
        };
        let mut veh_acc = vec![false; n];
        let mut psg_acc = vec![false; n];
        for &(t, h, w) in veh_edges {
            check(t)?;
            check(h)?;
            if w < 0 {
                return Err(NetworkError::NegativeWeight { line: 0, time: w });
            }
            veh_acc[t as usize] = true;
            veh_acc[h as usize] = true;
        }
        for &(t, h, w) in psg_edges {
            check(t)?;
            check(h)?;
            if w < 0 {
                return Err(NetworkError::NegativeWeight { line: 0, time: w });
            }
            psg_acc[t as usize] = true;
            psg_acc[h as usize] = true;
        }
        for &v in explicit_veh {
            check(v)?;
            veh_acc[v as usize] = true;
        }
        for &v in explicit_psg {
            check(v)?;
            psg_acc[v as usize] = true;
        }
        let mut boarding: Vec<bool> = (0..n).map(|v| veh_acc[v] && psg_acc[v]).collect();
        if let Some(filter) = board_filter {
            let mut keep = vec![false; n];
            for &v in filter {
                check(v)?;
                keep[v as usize] = true;
            }
            for v in 0..n {
                boarding[v] &= keep[v];
            }
        }
        if !boarding.iter().any(|&b| b) {
            return Err(NetworkError::EmptyBoardingSet);
        }
        Ok(RoadNetworkPair {
            veh: Graph::from_edges(n, veh_edges),
            psg: Graph::from_edges(n, psg_edges),
            veh_accessible: veh_acc,
            psg_accessible: psg_acc,
            explicit_veh: explicit_veh.to_vec(),
            explicit_psg: explicit_psg.to_vec(),
            board_filter: board_filter.map(|f| f.to_vec()),
            boarding,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.boarding.len()
    }

    pub fn veh_accessible(&self, v: Vertex) -> bool {
        self.veh_accessible[v as usize]
    }

    pub fn psg_accessible(&self, v: Vertex) -> bool {
        self.psg_accessible[v as usize]
    }

    pub fn is_boarding(&self, v: Vertex) -> bool {
        self.boarding[v as usize]
    }

    pub fn boarding_set(&self) -> Vec<Vertex> {
        (0..self.num_vertices() as Vertex).filter(|&v| self.is_boarding(v)).collect()
    }

    pub fn parse(text: &str) -> Result<Self, NetworkError> {
        let mut n: Option<usize> = None;
        let mut veh = Vec::new();
        let mut psg = Vec::new();
        let mut ex_veh = Vec::new();
        let mut ex_psg = Vec::new();
        let mut board: Option<Vec<Vertex>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let perr = |msg: &str| NetworkError::Parse { line, msg: msg.to_string() };
            let int = |s: &str| s.parse::<i64>().map_err(|_| perr(&format!("not an integer: `{s}`")));
            let count = match n {
                Some(c) => c,
                None if toks[0] == "vertices" => {
                    if toks.len() != 2 {
                        return Err(perr("expected `vertices N`"));
                    }
                    let c = int(toks[1])?;
                    if c < 0 {
                        return Err(perr("negative vertex count"));
                    }
                    n = Some(c as usize);
                    continue;
                }
                None => return Err(NetworkError::MissingHeader),
            };
            let vertex = |s: &str| -> Result<Vertex, NetworkError> {
                let v = int(s)?;
                if v < 0 || v as usize >= count {
                    return Err(NetworkError::DanglingVertex { line, vertex: v, count });
                }
                Ok(v as Vertex)
            };
            match toks[0] {
                "veh" | "psg" => {
                    if toks.len() != 4 {
                        return Err(perr("expected `veh|psg tail head time_ds`"));
                    }
                    let (t, h) = (vertex(toks[1])?, vertex(toks[2])?);
                    let w = int(toks[3])?;
                    if w < 0 {
                        return Err(NetworkError::NegativeWeight { line, time: w });
                    }
                    if toks[0] == "veh" { &mut veh } else { &mut psg }.push((t, h, w));
                }
                "board" | "veh_vertex" | "psg_vertex" => {
                    if toks.len() != 2 {
                        return Err(perr(&format!("expected `{} v`", toks[0])));
                    }
                    let v = vertex(toks[1])?;
                    match toks[0] {
                        "board" => board.get_or_insert_with(Vec::new).push(v),
                        "veh_vertex" => ex_veh.push(v),
                        _ => ex_psg.push(v),
                    }
                }
                "vertices" => return Err(perr("duplicate `vertices` header")),
                other => return Err(perr(&format!("unknown record `{other}`"))),
            }
        }
        let n = n.ok_or(NetworkError::MissingHeader)?;
        Self::new(n, &veh, &psg, &ex_veh, &ex_psg, board.as_deref())
    }

    pub fn load(path: &Path) -> Result<Self, NetworkError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vertices {}", self.num_vertices()).unwrap();
        for (t, h, w) in self.veh.edges() {
            writeln!(s, "veh {t} {h} {w}").unwrap();
        }
        for (t, h, w) in self.psg.edges() {
            writeln!(s, "psg {t} {h} {w}").unwrap();
        }
        for v in &self.explicit_veh {
            writeln!(s, "veh_vertex {v}").unwrap();
        }
        for v in &self.explicit_psg {
            writeln!(s, "psg_vertex {v}").unwrap();
        }
        if let Some(f) = &self.board_filter {
            for v in f {
                writeln!(s, "board {v}").unwrap();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::LINE;

    #[test]
    fn line_fixture_parses() {
        let net = RoadNetworkPair::parse(LINE).unwrap();
        assert_eq!(net.num_vertices(), 4);
        assert_eq!(net.veh.num_edges(), 6);
        assert_eq!(net.psg.num_edges(), 6);
        assert_eq!(net.boarding_set(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn dangling_vertex_rejected() {
        let err = RoadNetworkPair::parse("vertices 4\nveh 0 9 10\n").unwrap_err();
        assert!(matches!(err, NetworkError::DanglingVertex { line: 2, vertex: 9, count: 4 }));
    }

    #[test]
    fn negative_weight_rejected() {
        let err = RoadNetworkPair::parse("vertices 2\nveh 0 1 -5\n").unwrap_err();
        assert!(matches!(err, NetworkError::NegativeWeight { line: 2, time: -5 }));
    }

    #[test]
    fn parse_error_names_line() {
        let err = RoadNetworkPair::parse("vertices 2\nveh 0 1\n").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 2, .. }));
    }

    #[test]
    fn single_vertex_network() {
        let net = RoadNetworkPair::parse("vertices 1\nveh_vertex 0\npsg_vertex 0\n").unwrap();
        assert_eq!(net.boarding_set(), vec![0]);
        let err = RoadNetworkPair::parse("vertices 1\n").unwrap_err();
        assert!(matches!(err, NetworkError::EmptyBoardingSet));
    }

    #[test]
    fn board_lines_restrict() {
        let net = RoadNetworkPair::parse(&format!("{LINE}board 1\nboard 3\n")).unwrap();
        assert_eq!(net.boarding_set(), vec![1, 3]);
    }

    #[test]
    fn round_trip() {
        let text = format!("{LINE}board 2\nveh_vertex 3\n");
        let net = RoadNetworkPair::parse(&text).unwrap();
        let again = RoadNetworkPair::parse(&net.serialize()).unwrap();
        assert_eq!(net, again);
    }
}
