//! Incremental ATC oracle: re-run the DC solve at transfer levels
//! 0, step, 2*step, ... and report the last level with every rated branch
//! inside its limit. Replaces the closed-form headroom arithmetic with an
//! exhaustive walk.

use pstflow::dc::{dc_solve_with_transfer, TransferDefinition};
use pstflow::model::Network;

/// Largest feasible transfer found by stepping, or None if nothing violated
/// up to `max_mw` (unbounded as far as the walk can see).
pub fn brute_force_atc(
    net: &Network,
    transfer: &TransferDefinition,
    use_correction: bool,
    step_mw: f64,
    max_mw: f64,
) -> Option<f64> {
    let violated_at = |level: f64| -> bool {
        let sol = dc_solve_with_transfer(net, transfer, level, use_correction)
            .expect("dc solvable at every level");
        net.branches
            .iter()
            .filter(|b| b.status && b.rating_mva > 0.0)
            .any(|b| sol.flow_mw(b.id).expect("flow present").abs() > b.rating_mva)
    };

    if violated_at(0.0) {
        return Some(0.0);
    }
    let mut level = 0.0;
    loop {
        let trial = level + step_mw;
        if trial > max_mw {
            return None;
        }
        if violated_at(trial) {
            return Some(level);
        }
        level = trial;
    }
}
