//! Fixtures shared by the benchmarks.

use frontburn_core::experiment::plan_window;
use frontburn_core::{make_front_initial_data, FrontState, LayerSystem, Window};

/// Two-layer system with its auto-sized window and sigmoid initial data.
pub fn two_layer_fixture(a: f64, kappa: f64, dx: f64) -> (LayerSystem, FrontState, f64) {
    let sys = LayerSystem::two_layer(a, kappa).expect("valid system");
    let plan = plan_window(&sys, 1.0);
    let state = make_front_initial_data(&sys, 1.0, Window::new(plan.x_lo, plan.x_hi, dx))
        .expect("window fits the initial data");
    (sys, state, plan.target)
}
