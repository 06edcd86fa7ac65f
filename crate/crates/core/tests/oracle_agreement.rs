mod common;

use dispatch_core::sim::run_observed;
use dispatch_oracle::Oracle;

#[test]
fn dispatch_matches_brute_force() {
    for seed in 0..12 {
        let case = common::small_case(seed);
        let oracle = Oracle::new(&case.prep.net);
        let params = case.cfg.params;
        run_observed(&case.prep, case.vehicles.clone(), &case.requests, case.cfg, |engine, choice| {
            oracle.check_state(engine.fleet()).map_err(|e| format!("seed {seed}: {e}"))?;
            let want = oracle.best(engine.fleet(), &params, &choice.request);
            let got = choice.cost().total;
            if want.total() != got {
                return Err(format!("seed {seed} request {}: engine {got}, oracle {} ({:?})\nengine pick {:?}", choice.request.id, want.total(), want.vehicle, choice.best));
            }
            Ok(())
        })
        .unwrap();
    }
}
