//! Vehicle and request files.
//!
//! ```text
//! vehicle <id> <loc> <capacity> <t_start> <t_end>
//! request <id> <origin> <dest> <t_req>
//! ```
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::fleet_state::Vehicle;
use crate::{Time, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Request {
    pub id: u32,
    pub origin: Vertex,
    pub dest: Vertex,
    pub t_req: Time,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn records<'a>(text: &'a str, tag: &'static str, arity: usize) -> impl Iterator<Item = Result<(usize, Vec<i64>), InstanceError>> + 'a {
    text.lines().enumerate().filter_map(move |(idx, raw)| {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            return None;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let err = |msg: String| Some(Err(InstanceError::Parse { line, msg }));
        if toks[0] != tag {
            return err(format!("unknown record `{}`, expected `{tag}`", toks[0]));
        }
        if toks.len() != arity + 1 {
            return err(format!("`{tag}` takes {arity} fields, got {}", toks.len() - 1));
        }
        let mut vals = Vec::with_capacity(arity);
        for t in &toks[1..] {
            match t.parse::<i64>() {
                Ok(v) => vals.push(v),
                Err(_) => return err(format!("not an integer: `{t}`")),
            }
        }
        Some(Ok((line, vals)))
    })
}

fn check(line: usize, ok: bool, msg: impl FnOnce() -> String) -> Result<(), InstanceError> {
    if ok {
        Ok(())
    } else {
        Err(InstanceError::Parse { line, msg: msg() })
    }
}

/// Parses a vehicle file; vertex ids must be below `num_vertices`.
pub fn parse_vehicles(text: &str, num_vertices: usize) -> Result<Vec<Vehicle>, InstanceError> {
    let mut out: Vec<Vehicle> = Vec::new();
    for rec in records(text, "vehicle", 5) {
        let (line, v) = rec?;
        check(line, (0..=u32::MAX as i64).contains(&v[0]), || format!("bad vehicle id {}", v[0]))?;
        check(line, v[1] >= 0 && (v[1] as usize) < num_vertices, || format!("vertex {} out of range (network has {num_vertices})", v[1]))?;
        check(line, v[2] >= 1 && v[2] <= u32::MAX as i64, || format!("capacity must be at least 1, got {}", v[2]))?;
        check(line, v[3] < v[4], || format!("empty service window [{}, {})", v[3], v[4]))?;
        let id = v[0] as u32;
        if out.iter().any(|x| x.id == id) {
            return Err(InstanceError::DuplicateId { kind: "vehicle", id });
        }
        out.push(Vehicle { id, start: v[1] as Vertex, capacity: v[2] as u32, t_start: v[3], t_end: v[4] });
    }
    Ok(out)
}

/// Parses a request file and sorts it by (t_req, id).
pub fn parse_requests(text: &str, num_vertices: usize) -> Result<Vec<Request>, InstanceError> {
    let mut out: Vec<Request> = Vec::new();
    for rec in records(text, "request", 4) {
        let (line, v) = rec?;
        check(line, (0..=u32::MAX as i64).contains(&v[0]), || format!("bad request id {}", v[0]))?;
        for &x in &v[1..3] {
            check(line, x >= 0 && (x as usize) < num_vertices, || format!("vertex {x} out of range (network has {num_vertices})"))?;
        }
        check(line, v[3] >= 0, || format!("negative request time {}", v[3]))?;
        out.push(Request { id: v[0] as u32, origin: v[1] as Vertex, dest: v[2] as Vertex, t_req: v[3] });
    }
    let mut ids: Vec<u32> = out.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(InstanceError::DuplicateId { kind: "request", id: w[0] });
    }
    out.sort_by_key(|r| (r.t_req, r.id));
    Ok(out)
}

pub fn load_vehicles(path: &Path, num_vertices: usize) -> Result<Vec<Vehicle>, InstanceError> {
    parse_vehicles(&std::fs::read_to_string(path)?, num_vertices)
}

pub fn load_requests(path: &Path, num_vertices: usize) -> Result<Vec<Request>, InstanceError> {
    parse_requests(&std::fs::read_to_string(path)?, num_vertices)
}

pub fn serialize_vehicles(vs: &[Vehicle]) -> String {
    let mut s = String::new();
    for v in vs {
        writeln!(s, "vehicle {} {} {} {} {}", v.id, v.start, v.capacity, v.t_start, v.t_end).unwrap();
    }
    s
}

pub fn serialize_requests(rs: &[Request]) -> String {
    let mut s = String::new();
    for r in rs {
        writeln!(s, "request {} {} {} {}", r.id, r.origin, r.dest, r.t_req).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vehicles() {
        let vs = parse_vehicles("# fleet\nvehicle 7 2 4 0 36000\n\nvehicle 8 0 1 100 200 # late\n", 4).unwrap();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0], Vehicle { id: 7, start: 2, capacity: 4, t_start: 0, t_end: 36000 });
        assert_eq!(vs[1].t_start, 100);
    }

    #[test]
    fn rejects_bad_vehicles() {
        let msg = |t: &str| parse_vehicles(t, 4).unwrap_err().to_string();
        assert_eq!(msg("vehicle 1 9 4 0 10"), "line 1: vertex 9 out of range (network has 4)");
        assert_eq!(msg("vehicle 1 0 0 0 10"), "line 1: capacity must be at least 1, got 0");
        assert_eq!(msg("\nvehicle 1 0 1 10 10"), "line 2: empty service window [10, 10)");
        assert_eq!(msg("vehicle 1 0 1 0"), "line 1: `vehicle` takes 5 fields, got 4");
        assert_eq!(msg("car 1 0 1 0 5"), "line 1: unknown record `car`, expected `vehicle`");
        assert_eq!(msg("vehicle 1 0 1 0 5\nvehicle 1 0 1 0 5"), "duplicate vehicle id 1");
    }

    #[test]
    fn requests_sorted_by_time() {
        let rs = parse_requests("request 2 0 3 50\nrequest 1 1 2 50\nrequest 0 3 0 10\n", 4).unwrap();
        assert_eq!(rs.iter().map(|r| r.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(parse_requests("request 0 0 1 x", 4).is_err());
        assert!(parse_requests("request 0 0 1 -1", 4).is_err());
    }

    #[test]
    fn round_trip() {
        let vs = vec![Vehicle { id: 3, start: 1, capacity: 2, t_start: 5, t_end: 900 }];
        let rs = vec![Request { id: 4, origin: 0, dest: 2, t_req: 7 }];
        assert_eq!(parse_vehicles(&serialize_vehicles(&vs), 3).unwrap(), vs);
        assert_eq!(parse_requests(&serialize_requests(&rs), 3).unwrap(), rs);
    }
}
