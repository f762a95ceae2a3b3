//! Benchmark fixtures.

use trigger_sim_core::scenario::{chile_config, ParamValue};
use trigger_sim_core::Scenario;

/// Bundled Chile scenario.
pub fn chile() -> Scenario {
    chile_config().build().expect("bundled Chile scenario")
}

/// Chile with transmission raised until the epidemic grows and the
/// trigger fires repeatedly.
pub fn growing_chile() -> Scenario {
    let mut c = chile_config();
    for (k, v) in [("beta_E", 0.2), ("beta_Im", 0.2), ("beta_I", 0.6)] {
        c.params.insert(k.into(), ParamValue::Number(v));
    }
    c.build().expect("high-transmission Chile")
}
