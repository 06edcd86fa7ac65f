use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dispatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispatch")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dispatch(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

struct Instance {
    dir: TempDir,
}

impl Instance {
    fn new(shape: &str, size: &str, seed: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in");
        ok(&["generate", "--shape", shape, "--size", size, "--vehicles", "8", "--requests", "120", "--horizon", "4000", "--seed", seed, "--out", p.to_str().unwrap()]);
        Instance { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn inputs(&self) -> Vec<String> {
        let f = |n: &str| self.path("in").join(n).to_str().unwrap().to_string();
        vec!["--network".into(), f("network.txt"), "--vehicles".into(), f("vehicles.txt"), "--requests".into(), f("requests.txt")]
    }

    fn run(&self, out: &str, extra: &[&str]) -> Output {
        let mut args: Vec<String> = vec!["run".into()];
        args.extend(self.inputs());
        args.extend(["--out".into(), self.path(out).to_str().unwrap().into()]);
        args.extend(extra.iter().map(|s| s.to_string()));
        dispatch(&args.iter().map(String::as_str).collect::<Vec<_>>())
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn run_writes_stats_and_log() {
    let inst = Instance::new("grid", "8", "3");
    let out = inst.run("o", &["--counters"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stats = read(&inst.path("o/stats.csv"));
    let lines: Vec<&str> = stats.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("requests,served_by_vehicle,walked,unserved,"));
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells.len(), lines[0].split(',').count());
    assert_eq!(cells[0], "120");
    let served: usize = cells[1..4].iter().map(|c| c.parse::<usize>().unwrap()).sum();
    assert_eq!(served, 120);

    let log = read(&inst.path("o/outcomes.jsonl"));
    assert_eq!(log.lines().count(), 120);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["decision"]["type"].is_string());
        assert!(v["cost"]["total"].is_i64());
    }
    assert_eq!(read(&inst.path("o/counters.jsonl")).lines().count(), 120);
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let inst = Instance::new("grid", "5", "1");
    std::fs::write(inst.path("cfg.txt"), "k_pd = 8\nbogus_key = 1\n").unwrap();
    let cfg = inst.path("cfg.txt");
    let out = inst.run("o", &["--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus_key") && err.contains("line 2"), "{err}");
    assert!(!inst.path("o/stats.csv").exists());
}

#[test]
fn bad_flag_values_fail() {
    let inst = Instance::new("grid", "5", "1");
    assert!(!inst.run("o", &["--strategy-pals", "fastest"]).status.success());
    assert!(!inst.run("o", &["--k-pd", "0"]).status.success());
    assert!(!inst.run("o", &["--sorted-buckets", "maybe"]).status.success());
}

#[test]
fn flags_override_config() {
    let inst = Instance::new("random", "40", "5");
    std::fs::write(inst.path("cfg.txt"), "radius = 0\nstrategy_dals = dijkstra\n").unwrap();
    let cfg = inst.path("cfg.txt");
    let out = inst.run("o", &["--config", cfg.to_str().unwrap(), "--radius", "1234"]);
    assert!(out.status.success());
    let written = read(&inst.path("o/config.txt"));
    assert!(written.contains("radius = 1234\n"), "{written}");
    assert!(written.contains("strategy_dals = dijkstra\n"), "{written}");
}

#[test]
fn verify_oracle_passes() {
    for (shape, size, seed) in [("grid", "5", "3"), ("grid", "6", "2"), ("random", "60", "7"), ("random", "35", "11")] {
        let inst = Instance::new(shape, size, seed);
        for extra in [&[][..], &["--strategy-pals", "dijkstra", "--strategy-dals", "individual-bch", "--radius", "0"][..]] {
            let mut args = vec!["--verify-oracle"];
            args.extend_from_slice(extra);
            let out = inst.run("o", &args);
            assert!(out.status.success(), "{shape} {size} {seed}: {}", String::from_utf8_lossy(&out.stderr));
            assert!(String::from_utf8_lossy(&out.stderr).contains("oracle agreed on 120 requests"));
        }
    }
}

#[test]
fn repeated_runs_are_identical() {
    let inst = Instance::new("random", "50", "9");
    ok_out(inst.run("a", &[]));
    ok_out(inst.run("b", &["--sorted-buckets", "off", "--k-laststop", "1", "--k-elliptic", "64"]));
    ok_out(inst.run("c", &[]));
    for f in ["outcomes.jsonl", "stats.csv"] {
        let a = read(&inst.path("a").join(f));
        assert_eq!(a, read(&inst.path("b").join(f)), "{f}");
        assert_eq!(a, read(&inst.path("c").join(f)), "{f}");
    }
}

fn ok_out(o: Output) {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn ch_cache_is_reused() {
    let inst = Instance::new("grid", "7", "4");
    let net = inst.path("in/network.txt");
    let cache = inst.path("ch");
    ok(&["build-ch", "--network", net.to_str().unwrap(), "--out", cache.to_str().unwrap()]);
    assert!(cache.join("veh.ch").exists() && cache.join("psg.ch").exists());
    ok_out(inst.run("cached", &["--ch-cache", cache.to_str().unwrap()]));
    ok_out(inst.run("fresh", &[]));
    assert_eq!(read(&inst.path("cached/outcomes.jsonl")), read(&inst.path("fresh/outcomes.jsonl")));

    // A cache built for another network is refused.
    let other = Instance::new("grid", "6", "4");
    let out = other.run("o", &["--ch-cache", cache.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn bench_sorted_scans_no_more_than_unsorted() {
    let inst = Instance::new("random", "70", "13");
    let mut args: Vec<String> = vec!["bench".into()];
    args.extend(inst.inputs());
    args.extend(["--counters".into(), "--out".into(), inst.path("b").to_str().unwrap().into()]);
    let out = dispatch(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = read(&inst.path("b/bench.csv"));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][col("sorted_buckets")], "on");
        assert_eq!(pair[1][col("sorted_buckets")], "off");
        for c in ["elliptic_scanned", "pals_scanned", "dals_scanned"] {
            let on: u64 = pair[0][col(c)].parse().unwrap();
            let off: u64 = pair[1][col(c)].parse().unwrap();
            assert!(on <= off, "{} {c}: {on} > {off}", pair[0][0]);
        }
    }
}

#[test]
fn bench_without_counters_has_only_timings() {
    let inst = Instance::new("grid", "5", "2");
    let mut args: Vec<String> = vec!["bench".into()];
    args.extend(inst.inputs());
    args.extend(["--strategies".into(), "collective-bch".into(), "--out".into(), inst.path("b").to_str().unwrap().into()]);
    ok_out(dispatch(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let csv = read(&inst.path("b/bench.csv"));
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "strategy,sorted_buckets,requests,wall_ms,pd_us,elliptic_us,ordinary_us,pbns_us,pals_us,dals_us,apply_us");
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn malformed_inputs_report_the_line() {
    let inst = Instance::new("grid", "5", "1");
    std::fs::write(inst.path("in/requests.txt"), "request 0 1 2 10\nrequest 1 1 99 20\n").unwrap();
    let out = inst.run("o", &[]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("vertex 99 out of range"), "{err}");
}

#[test]
fn bench_strategies_agree_with_many_pickup_options() {
    let inst = Instance::new("grid", "12", "21");
    let mut args: Vec<String> = vec!["bench".into()];
    args.extend(inst.inputs());
    args.extend(["--radius", "3000", "--strategies", "individual-bch,collective-bch", "--counters", "--out"].map(String::from));
    args.push(inst.path("b").to_str().unwrap().into());
    ok_out(dispatch(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    let csv = read(&inst.path("b/bench.csv"));
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let pickups = header.iter().position(|h| *h == "pickups").unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["individual-bch", "individual-bch", "collective-bch", "collective-bch"]);
    // Walking radius 3000 on 900-ds footpaths reaches several boarding points per request.
    let p: u64 = rows[0][pickups].parse().unwrap();
    assert!(p > 3 * 120, "{p}");
}
