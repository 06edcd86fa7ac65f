mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dispatch_core::ch::ContractionHierarchy;
use dispatch_core::fleet_state::Vehicle;
use dispatch_core::instance::{self, Request};
use dispatch_core::last_stop::Strategy;
use dispatch_core::road_network::RoadNetworkPair;
use dispatch_core::sim::{self, PreparedNetwork, RunResult, SimConfig};
use dispatch_core::{synth, Time};
use dispatch_oracle::Oracle;

/// Above this many vertices `--verify-oracle` refuses to run (all-pairs tables).
const ORACLE_MAX_VERTICES: usize = 3000;

#[derive(Parser)]
#[command(name = "dispatch", version, about = "Ridesharing dispatch simulator with walking meeting points")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a request stream and write statistics and the outcome log.
    Run(RunArgs),
    /// Time the dispatch phases under each last-stop strategy, sorted and unsorted buckets.
    Bench(BenchArgs),
    /// Build both contraction hierarchies and store them in a cache directory.
    BuildCh(BuildChArgs),
    /// Write a synthetic network, fleet and request file.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    vehicles: PathBuf,
    #[arg(long)]
    requests: PathBuf,
    /// Directory with `veh.ch` and `psg.ch`; built and stored there when missing.
    #[arg(long)]
    ch_cache: Option<PathBuf>,
}

#[derive(Args)]
struct Overrides {
    /// `key = value` file; command-line flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Walking radius in deciseconds.
    #[arg(long)]
    radius: Option<Time>,
    #[arg(long)]
    strategy_pals: Option<Strategy>,
    #[arg(long)]
    strategy_dals: Option<Strategy>,
    #[arg(long)]
    k_elliptic: Option<usize>,
    #[arg(long)]
    k_pd: Option<usize>,
    /// Bundle width of the last-stop BCH strategies.
    #[arg(long)]
    k_laststop: Option<usize>,
    #[arg(long)]
    k_laststop_dijkstra: Option<usize>,
    #[arg(long, value_enum)]
    sorted_buckets: Option<Switch>,
}

impl Overrides {
    fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::default();
        if let Some(p) = &self.config {
            config::apply_file(&mut cfg, p)?;
        }
        if let Some(r) = self.radius {
            cfg.params.radius = r;
        }
        if let Some(s) = self.strategy_pals {
            cfg.strategy_pals = s;
        }
        if let Some(s) = self.strategy_dals {
            cfg.strategy_dals = s;
        }
        if let Some(k) = self.k_elliptic {
            cfg.k_elliptic = k;
        }
        if let Some(k) = self.k_pd {
            cfg.k_pd = k;
        }
        if let Some(k) = self.k_laststop {
            cfg.k_laststop = k;
        }
        if let Some(k) = self.k_laststop_dijkstra {
            cfg.k_laststop_dijkstra = k;
        }
        if let Some(s) = self.sorted_buckets {
            cfg.sorted_buckets = s.into();
        }
        cfg.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    overrides: Overrides,
    /// Check every decision against the brute-force dispatcher.
    #[arg(long)]
    verify_oracle: bool,
    /// Also write per-request counters and phase timings.
    #[arg(long)]
    counters: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    overrides: Overrides,
    /// Strategies to compare (applied to both last-stop phases).
    #[arg(long, value_delimiter = ',', default_values = ["dijkstra", "individual-bch", "collective-bch"])]
    strategies: Vec<Strategy>,
    /// Add work counter columns.
    #[arg(long)]
    counters: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BuildChArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Grid,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "grid")]
    shape: Shape,
    /// Grid side length, or vertex count for random networks.
    #[arg(long, default_value_t = 20)]
    size: usize,
    #[arg(long, default_value_t = 50)]
    vehicles: usize,
    #[arg(long, default_value_t = 500)]
    requests: usize,
    /// Requests arrive in [0, horizon) deciseconds.
    #[arg(long, default_value_t = 36000)]
    horizon: Time,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::BuildCh(a) => cmd_build_ch(a),
        Cmd::Generate(a) => cmd_generate(a),
    }
}

fn load_network(path: &Path) -> Result<RoadNetworkPair> {
    RoadNetworkPair::load(path).with_context(|| format!("loading network {}", path.display()))
}

fn build_ch(net: &RoadNetworkPair, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    ContractionHierarchy::build(&net.veh).save(&dir.join("veh.ch")).context("writing veh.ch")?;
    ContractionHierarchy::build(&net.psg).save(&dir.join("psg.ch")).context("writing psg.ch")?;
    Ok(())
}

fn prepare(net: RoadNetworkPair, cache: Option<&Path>) -> Result<PreparedNetwork> {
    let Some(dir) = cache else {
        return Ok(PreparedNetwork::new(net));
    };
    if !dir.join("veh.ch").exists() || !dir.join("psg.ch").exists() {
        build_ch(&net, dir)?;
    }
    let veh = ContractionHierarchy::load(&dir.join("veh.ch"), &net.veh).context("loading veh.ch")?;
    let psg = ContractionHierarchy::load(&dir.join("psg.ch"), &net.psg).context("loading psg.ch")?;
    Ok(PreparedNetwork::with_ch(net, veh, psg))
}

fn load_inputs(i: &Inputs) -> Result<(PreparedNetwork, Vec<Vehicle>, Vec<Request>)> {
    let net = load_network(&i.network)?;
    let n = net.num_vertices();
    let vehicles = instance::load_vehicles(&i.vehicles, n).with_context(|| format!("loading vehicles {}", i.vehicles.display()))?;
    let requests = instance::load_requests(&i.requests, n).with_context(|| format!("loading requests {}", i.requests.display()))?;
    Ok((prepare(net, i.ch_cache.as_deref())?, vehicles, requests))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let cfg = a.overrides.resolve()?;
    let (prep, vehicles, requests) = load_inputs(&a.inputs)?;
    let res = if a.verify_oracle {
        if prep.net.num_vertices() > ORACLE_MAX_VERTICES {
            bail!("--verify-oracle supports at most {ORACLE_MAX_VERTICES} vertices, network has {}", prep.net.num_vertices());
        }
        let oracle = Oracle::new(&prep.net);
        let res = sim::run_observed(&prep, vehicles, &requests, cfg, |eng, choice| {
            oracle.check_state(eng.fleet())?;
            let want = oracle.best(eng.fleet(), &eng.config().params, &choice.request);
            let got = choice.cost().total;
            if want.total() != got {
                return Err(format!("oracle mismatch on request {}: engine cost {got}, oracle cost {}", choice.request.id, want.total()));
            }
            Ok(())
        });
        let res = res.map_err(anyhow::Error::msg)?;
        eprintln!("oracle agreed on {} requests", res.outcomes.len());
        res
    } else {
        sim::run(&prep, vehicles, &requests, cfg).map_err(anyhow::Error::msg)?
    };

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = create(&a.out.join("stats.csv"))?;
    sim::write_stats_csv(&mut w, &res.stats)?;
    w.flush()?;
    let mut w = create(&a.out.join("outcomes.jsonl"))?;
    sim::write_outcome_log(&mut w, &res.outcomes)?;
    w.flush()?;
    fs::write(a.out.join("config.txt"), config::render(&cfg))?;
    if a.counters {
        let mut w = create(&a.out.join("counters.jsonl"))?;
        for ((o, c), t) in res.outcomes.iter().zip(&res.counters).zip(&res.times) {
            let line = serde_json::json!({ "request": o.request, "counters": c, "times_ns": t });
            writeln!(w, "{line}")?;
        }
        w.flush()?;
    }
    let s = &res.stats;
    println!("requests {}  vehicle {}  walk {}  unserved {}  mean wait {:.1}  mean trip {:.1}", s.requests, s.served_by_vehicle, s.walked, s.unserved, s.mean_wait, s.mean_trip);
    Ok(())
}

struct BenchRow {
    strategy: Strategy,
    sorted: bool,
    wall_ms: f64,
    res: RunResult,
}

const TIME_COLS: [&str; 7] = ["pd", "elliptic", "ordinary", "pbns", "pals", "dals", "apply"];
const COUNTER_COLS: [&str; 9] = [
    "pickups",
    "dropoffs",
    "pd_scanned",
    "elliptic_scanned",
    "pals_scanned",
    "dals_scanned",
    "pals_edges",
    "dals_edges",
    "laststop_candidates",
];

fn bench_line(row: &BenchRow, counters: bool) -> String {
    let n = row.res.times.len().max(1) as f64;
    let mut cells = vec![row.strategy.name().to_string(), if row.sorted { "on" } else { "off" }.into(), row.res.times.len().to_string(), format!("{:.3}", row.wall_ms)];
    let sums = row.res.times.iter().fold([0u64; 7], |mut acc, t| {
        for (a, x) in acc.iter_mut().zip([t.pd, t.elliptic, t.ordinary, t.pbns, t.pals, t.dals, t.apply]) {
            *a += x;
        }
        acc
    });
    cells.extend(sums.iter().map(|&s| format!("{:.3}", s as f64 / n / 1000.0)));
    if counters {
        let sums = row.res.counters.iter().fold([0u64; 9], |mut acc, c| {
            let xs = [
                c.pickups,
                c.dropoffs,
                c.pd.entries_scanned,
                c.elliptic_scanned,
                c.pals.entries_scanned,
                c.dals.entries_scanned,
                c.pals.edges_relaxed,
                c.dals.edges_relaxed,
                c.pals.candidates + c.dals.candidates,
            ];
            for (a, x) in acc.iter_mut().zip(xs) {
                *a += x;
            }
            acc
        });
        cells.extend(sums.iter().map(u64::to_string));
    }
    cells.join(",")
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let base = a.overrides.resolve()?;
    let (prep, vehicles, requests) = load_inputs(&a.inputs)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    for &strategy in &a.strategies {
        for sorted in [true, false] {
            let cfg = SimConfig { strategy_pals: strategy, strategy_dals: strategy, sorted_buckets: sorted, ..base };
            let t0 = Instant::now();
            let res = sim::run(&prep, vehicles.clone(), &requests, cfg).map_err(anyhow::Error::msg)?;
            let wall_ms = t0.elapsed().as_secs_f64() * 1000.0;
            if let Some(first) = rows.first() {
                if first.res.outcomes != res.outcomes {
                    bail!("{} with sorted buckets {} changed the outcome log", strategy.name(), if sorted { "on" } else { "off" });
                }
            }
            rows.push(BenchRow { strategy, sorted, wall_ms, res });
        }
    }

    let mut header: Vec<String> = ["strategy", "sorted_buckets", "requests", "wall_ms"].iter().map(|s| s.to_string()).collect();
    header.extend(TIME_COLS.iter().map(|c| format!("{c}_us")));
    if a.counters {
        header.extend(COUNTER_COLS.iter().map(|c| c.to_string()));
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = create(&a.out.join("bench.csv"))?;
    writeln!(w, "{}", header.join(","))?;
    println!("{}", header.join(","));
    for row in &rows {
        let line = bench_line(row, a.counters);
        writeln!(w, "{line}")?;
        println!("{line}");
    }
    w.flush()?;
    Ok(())
}

fn cmd_build_ch(a: BuildChArgs) -> Result<()> {
    let net = load_network(&a.network)?;
    let t0 = Instant::now();
    build_ch(&net, &a.out)?;
    eprintln!("built hierarchies for {} vertices in {:.2}s", net.num_vertices(), t0.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    if a.size < 2 {
        bail!("--size must be at least 2");
    }
    if a.horizon < 1 {
        bail!("--horizon must be positive");
    }
    let net = match a.shape {
        Shape::Grid => synth::grid(a.size, a.size, 300, 900),
        Shape::Random => synth::random_network(a.seed, a.size, a.size * 2, 0.6),
    };
    let (vs, rs) = synth::random_demand(a.seed, &net, a.vehicles, a.requests, a.horizon);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    fs::write(a.out.join("network.txt"), net.serialize())?;
    fs::write(a.out.join("vehicles.txt"), instance::serialize_vehicles(&vs))?;
    fs::write(a.out.join("requests.txt"), instance::serialize_requests(&rs))?;
    Ok(())
}
