//! Flat `key = value` run configuration.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dispatch_core::last_stop::Strategy;
use dispatch_core::sim::SimConfig;

pub const KEYS: &[&str] = &[
    "t_wait_max",
    "t_stop",
    "alpha_num",
    "alpha_den",
    "beta",
    "gamma_wait",
    "gamma_trip",
    "omega_trip",
    "omega_walk",
    "radius",
    "strategy_pals",
    "strategy_dals",
    "k_elliptic",
    "k_pd",
    "k_laststop",
    "k_laststop_dijkstra",
    "sorted_buckets",
    "prune_elliptic",
    "pd_radius",
    "cost_pruning",
    "domination",
    "check_routes",
];

pub fn parse_switch(v: &str) -> Result<bool> {
    match v {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => bail!("expected on or off, got `{v}`"),
    }
}

/// Sets one key on `cfg`.
pub fn set(cfg: &mut SimConfig, key: &str, value: &str) -> Result<()> {
    let int = || value.parse::<i64>().with_context(|| format!("{key}: not an integer: `{value}`"));
    let width = || value.parse::<usize>().with_context(|| format!("{key}: not a bundle width: `{value}`"));
    let strategy = || value.parse::<Strategy>().map_err(anyhow::Error::msg).with_context(|| key.to_string());
    let switch = || parse_switch(value).with_context(|| key.to_string());
    let p = &mut cfg.params;
    match key {
        "t_wait_max" => p.t_wait_max = int()?,
        "t_stop" => p.t_stop = int()?,
        "alpha_num" => p.alpha_num = int()?,
        "alpha_den" => p.alpha_den = int()?,
        "beta" => p.beta = int()?,
        "gamma_wait" => p.gamma_wait = int()?,
        "gamma_trip" => p.gamma_trip = int()?,
        "omega_trip" => p.omega_trip = int()?,
        "omega_walk" => p.omega_walk = int()?,
        "radius" => p.radius = int()?,
        "strategy_pals" => cfg.strategy_pals = strategy()?,
        "strategy_dals" => cfg.strategy_dals = strategy()?,
        "k_elliptic" => cfg.k_elliptic = width()?,
        "k_pd" => cfg.k_pd = width()?,
        "k_laststop" => cfg.k_laststop = width()?,
        "k_laststop_dijkstra" => cfg.k_laststop_dijkstra = width()?,
        "sorted_buckets" => cfg.sorted_buckets = switch()?,
        "prune_elliptic" => cfg.prune_elliptic = switch()?,
        "pd_radius" => cfg.pd_radius = switch()?,
        "cost_pruning" => cfg.cost_pruning = switch()?,
        "domination" => cfg.domination = switch()?,
        "check_routes" => cfg.check_routes = switch()?,
        _ => bail!("unknown config key `{key}` (known: {})", KEYS.join(", ")),
    }
    Ok(())
}

pub fn apply_text(cfg: &mut SimConfig, text: &str) -> Result<()> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').with_context(|| format!("line {}: expected `key = value`", idx + 1))?;
        set(cfg, k.trim(), v.trim()).with_context(|| format!("line {}", idx + 1))?;
    }
    Ok(())
}

pub fn apply_file(cfg: &mut SimConfig, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    apply_text(cfg, &text).with_context(|| format!("in config {}", path.display()))
}

/// The configuration as `key = value` lines, accepted back by [`apply_text`].
pub fn render(cfg: &SimConfig) -> String {
    let p = &cfg.params;
    let on = |b: bool| if b { "on" } else { "off" };
    let vals: Vec<String> = vec![
        p.t_wait_max.to_string(),
        p.t_stop.to_string(),
        p.alpha_num.to_string(),
        p.alpha_den.to_string(),
        p.beta.to_string(),
        p.gamma_wait.to_string(),
        p.gamma_trip.to_string(),
        p.omega_trip.to_string(),
        p.omega_walk.to_string(),
        p.radius.to_string(),
        cfg.strategy_pals.name().into(),
        cfg.strategy_dals.name().into(),
        cfg.k_elliptic.to_string(),
        cfg.k_pd.to_string(),
        cfg.k_laststop.to_string(),
        cfg.k_laststop_dijkstra.to_string(),
        on(cfg.sorted_buckets).into(),
        on(cfg.prune_elliptic).into(),
        on(cfg.pd_radius).into(),
        on(cfg.cost_pruning).into(),
        on(cfg.domination).into(),
        on(cfg.check_routes).into(),
    ];
    KEYS.iter().zip(vals).map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        let mut cfg = SimConfig::default();
        apply_text(&mut cfg, "radius = 10\nstrategy_dals = dijkstra\nsorted_buckets = off # unsorted\n").unwrap();
        assert_eq!(cfg.params.radius, 10);
        assert_eq!(cfg.strategy_dals, Strategy::Dijkstra);
        assert!(!cfg.sorted_buckets);
        let mut back = SimConfig::default();
        apply_text(&mut back, &render(&cfg)).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = apply_text(&mut SimConfig::default(), "\nradius = 1\nradiu = 2\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("line 3") && msg.contains("`radiu`"), "{msg}");
    }

    #[test]
    fn bad_values() {
        assert!(apply_text(&mut SimConfig::default(), "t_stop = fast").is_err());
        assert!(apply_text(&mut SimConfig::default(), "domination = maybe").is_err());
        assert!(apply_text(&mut SimConfig::default(), "no equals sign").is_err());
    }
}
