//! Built-in experiment setups, used by the command line when no
//! configuration file is given and by the acceptance suite.

use super::SimConfig;
use crate::dda::Schedule;
use crate::problems::ProblemKind;

/// Processor-count sweep: quadmax with `d = 10`, `m = 840`, `r = 0.0293`,
/// stopping at `F* + 0.01`.
///
/// The step scale is fixed at `A = 0.3`. The bound-minimising value is
/// about ten times smaller and needs hundreds of thousands of iterations.
pub fn node_sweep() -> (SimConfig, Vec<usize>) {
    let mut c = SimConfig::new(ProblemKind::Quadmax, 10, 840, 1);
    c.seed = 1;
    c.topology_seed = 1;
    c.r = 0.0293;
    c.step_a = Some(0.3);
    c.epsilon = Some(0.01);
    c.stop_at_target = true;
    c.max_iters = Some(200_000);
    c.record_every = 100;
    (c, (1..=14).collect())
}

/// Schedule comparison on ten fully connected nodes with `r = 0.00089`,
/// target `F* + 0.4` and a virtual-time budget of 9 units (about 85
/// iterations).
pub fn schedule_sweep() -> (SimConfig, Vec<Schedule>) {
    let mut c = SimConfig::new(ProblemKind::Quadmax, 10, 840, 10);
    c.seed = 1;
    c.topology_seed = 1;
    c.r = 0.00089;
    c.step_a = Some(0.3);
    c.epsilon = Some(0.4);
    c.time_budget = Some(9.0);
    c.stop_at_target = false;
    c.max_iters = None;
    c.record_every = 1;
    let set = vec![
        Schedule::FixedPeriod(1),
        Schedule::FixedPeriod(2),
        Schedule::PowerLaw(0.3),
        Schedule::PowerLaw(1.0),
    ];
    (c, set)
}
