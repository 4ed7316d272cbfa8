//! Newton-Raphson AC power flow in polar form, with per-branch flow and loss
//! reporting on the same admittance matrix that was solved.

use crate::correction::interpolate_factor;
use crate::linear::solve_dense;
use crate::model::{BranchId, BusId, BusKind, CorrectionTable, Network};
use crate::ybus::{assemble_ybus, pst_branch_admittance, YbusError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tolerance_pu: f64,
    pub max_iterations: usize,
    pub flat_start: bool,
    pub enforce_q_limits: bool,
    pub use_correction: bool,
    /// Initial complex voltages in ascending bus order, honored when
    /// `flat_start` is off.
    pub warm_start: Option<Vec<Complex64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance_pu: 1e-8,
            max_iterations: 50,
            flat_start: true,
            enforce_q_limits: false,
            use_correction: true,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BusVoltage {
    pub bus: BusId,
    pub vm_pu: f64,
    pub va_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchFlow {
    pub branch: BranchId,
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
    /// Larger of the two end currents.
    pub current_pu: f64,
    /// 100 * MVA / rating for rated branches, 0 when unlimited.
    pub loading_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFlowSolution {
    pub voltages: Vec<BusVoltage>,
    pub flows: Vec<BranchFlow>,
    pub total_loss_mw: f64,
    pub iterations: usize,
    pub max_mismatch_pu: f64,
    pub converged: bool,
}

impl PowerFlowSolution {
    pub fn voltage(&self, bus: BusId) -> Option<&BusVoltage> {
        self.voltages.iter().find(|v| v.bus == bus)
    }

    pub fn flow(&self, branch: BranchId) -> Option<&BranchFlow> {
        self.flows.iter().find(|f| f.branch == branch)
    }

    pub fn complex_voltage(&self, bus: BusId) -> Option<Complex64> {
        self.voltage(bus)
            .map(|v| Complex64::from_polar(v.vm_pu, v.va_deg.to_radians()))
    }
}

#[derive(Debug, Error)]
pub enum PowerFlowError {
    #[error(transparent)]
    Ybus(#[from] YbusError),
    #[error("network must have exactly one slack bus (found {0})")]
    SlackCount(usize),
    #[error("network is not connected")]
    Disconnected,
    #[error("did not converge after {iterations} iterations (max mismatch {max_mismatch_pu:.3e} pu)")]
    NotConverged {
        iterations: usize,
        max_mismatch_pu: f64,
    },
    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),
}

/// True when every bus is reachable from every other over in-service branches.
pub fn is_connected(net: &Network) -> bool {
    if net.buses.is_empty() {
        return false;
    }
    let mut adjacency: HashMap<BusId, Vec<BusId>> = HashMap::new();
    for br in net.branches.iter().filter(|b| b.status) {
        adjacency.entry(br.from_bus).or_default().push(br.to_bus);
        adjacency.entry(br.to_bus).or_default().push(br.from_bus);
    }
    let start = net.buses[0].id;
    let mut seen: HashSet<BusId> = HashSet::new();
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    while let Some(bus) = queue.pop_front() {
        for &next in adjacency.get(&bus).into_iter().flatten() {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen.len() == net.buses.len()
}

struct Schedule {
    p_inj: Vec<f64>,
    q_inj: Vec<f64>,
    q_load: Vec<f64>,
    kind: Vec<BusKind>,
    setpoint: Vec<f64>,
    /// Aggregate generator reactive range per bus, p.u.; None when the bus
    /// has no generator record (then limits never bind).
    q_range: Vec<Option<(f64, f64)>>,
}

fn build_schedule(net: &Network, order: &[BusId]) -> Schedule {
    let index = net.bus_index();
    let n = order.len();
    let mut p_inj = vec![0.0; n];
    let mut q_inj = vec![0.0; n];
    let mut q_load = vec![0.0; n];
    let mut q_range: Vec<Option<(f64, f64)>> = vec![None; n];
    for gen in &net.generators {
        let i = index[&gen.bus];
        p_inj[i] += gen.p_mw / net.base_mva;
        let entry = q_range[i].get_or_insert((0.0, 0.0));
        entry.0 += gen.q_min_mvar / net.base_mva;
        entry.1 += gen.q_max_mvar / net.base_mva;
    }
    for load in &net.loads {
        let i = index[&load.bus];
        p_inj[i] -= load.p_mw / net.base_mva;
        q_inj[i] -= load.q_mvar / net.base_mva;
        q_load[i] += load.q_mvar / net.base_mva;
    }
    let mut kind = vec![BusKind::Pq; n];
    let mut setpoint = vec![1.0; n];
    for bus in &net.buses {
        let i = index[&bus.id];
        kind[i] = bus.kind;
        setpoint[i] = bus.v_setpoint_pu.unwrap_or_else(|| {
            net.generators
                .iter()
                .find(|g| g.bus == bus.id)
                .and_then(|g| g.v_setpoint_pu)
                .unwrap_or(1.0)
        });
    }
    Schedule {
        p_inj,
        q_inj,
        q_load,
        kind,
        setpoint,
        q_range,
    }
}

fn injections(y: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let current: Complex64 = (0..n).map(|k| y[i][k] * v[k]).sum();
            v[i] * current.conj()
        })
        .collect()
}

/// Solve the AC power flow.
///
/// Converges when every pq-bus P and Q mismatch and every pv-bus P mismatch
/// is at or below `tolerance_pu`; the slack bus absorbs the residual.
pub fn solve(net: &Network, opts: &SolveOptions) -> Result<PowerFlowSolution, PowerFlowError> {
    let slack = net.slack_buses();
    if slack.len() != 1 {
        return Err(PowerFlowError::SlackCount(slack.len()));
    }
    if !is_connected(net) {
        return Err(PowerFlowError::Disconnected);
    }

    let order = net.bus_order();
    let n = order.len();
    let y = assemble_ybus(net, opts.use_correction)?.to_dense();
    let sched = build_schedule(net, &order);
    let mut kind = sched.kind.clone();
    let mut q_sched = sched.q_inj.clone();

    let mut v: Vec<Complex64> = match (&opts.warm_start, opts.flat_start) {
        (Some(start), false) if start.len() == n => start.clone(),
        _ => (0..n)
            .map(|i| match kind[i] {
                BusKind::Pq => Complex64::new(1.0, 0.0),
                _ => Complex64::new(sched.setpoint[i], 0.0),
            })
            .collect(),
    };

    let mut iterations = 0usize;
    let mut max_mismatch;
    loop {
        let angle_vars: Vec<usize> = (0..n).filter(|&i| kind[i] != BusKind::Slack).collect();
        let vmag_vars: Vec<usize> = (0..n).filter(|&i| kind[i] == BusKind::Pq).collect();

        let s_calc = injections(&y, &v);
        let mut mismatch = Vec::with_capacity(angle_vars.len() + vmag_vars.len());
        for &i in &angle_vars {
            mismatch.push(sched.p_inj[i] - s_calc[i].re);
        }
        for &i in &vmag_vars {
            mismatch.push(q_sched[i] - s_calc[i].im);
        }
        max_mismatch = mismatch.iter().fold(0.0f64, |m, x| m.max(x.abs()));

        if !max_mismatch.is_finite() {
            return Err(PowerFlowError::NotConverged {
                iterations,
                max_mismatch_pu: max_mismatch,
            });
        }

        if max_mismatch <= opts.tolerance_pu {
            if opts.enforce_q_limits && switch_q_violations(&mut kind, &mut q_sched, &sched, &s_calc)
            {
                // a pv bus hit its reactive limit; re-solve as pq
                continue;
            }
            break;
        }

        if iterations >= opts.max_iterations {
            return Err(PowerFlowError::NotConverged {
                iterations,
                max_mismatch_pu: max_mismatch,
            });
        }

        let jac = jacobian(&y, &v, &s_calc, &angle_vars, &vmag_vars);
        let rhs = DVector::from_vec(mismatch);
        let delta =
            solve_dense(jac, rhs).ok_or(PowerFlowError::SingularJacobian(iterations + 1))?;

        for (j, &i) in angle_vars.iter().enumerate() {
            let (mag, ang) = v[i].to_polar();
            v[i] = Complex64::from_polar(mag, ang + delta[j]);
        }
        for (j, &i) in vmag_vars.iter().enumerate() {
            let (mag, ang) = v[i].to_polar();
            v[i] = Complex64::from_polar(mag + delta[angle_vars.len() + j], ang);
        }
        iterations += 1;
    }

    let (flows, total_loss_mw) = branch_flows(net, &v, opts.use_correction)?;
    let voltages = order
        .iter()
        .enumerate()
        .map(|(i, &bus)| BusVoltage {
            bus,
            vm_pu: v[i].norm(),
            va_deg: v[i].arg().to_degrees(),
        })
        .collect();

    Ok(PowerFlowSolution {
        voltages,
        flows,
        total_loss_mw,
        iterations,
        max_mismatch_pu: max_mismatch,
        converged: true,
    })
}

/// Convert pv buses whose aggregate generator reactive output left its range
/// into pq buses held at the violated limit. Returns true when any switched.
fn switch_q_violations(
    kind: &mut [BusKind],
    q_sched: &mut [f64],
    sched: &Schedule,
    s_calc: &[Complex64],
) -> bool {
    let mut switched = false;
    for i in 0..kind.len() {
        if kind[i] != BusKind::Pv {
            continue;
        }
        let Some((q_min, q_max)) = sched.q_range[i] else {
            continue;
        };
        let q_gen = s_calc[i].im + sched.q_load[i];
        if q_gen > q_max {
            kind[i] = BusKind::Pq;
            q_sched[i] = q_max - sched.q_load[i];
            switched = true;
        } else if q_gen < q_min {
            kind[i] = BusKind::Pq;
            q_sched[i] = q_min - sched.q_load[i];
            switched = true;
        }
    }
    switched
}

fn jacobian(
    y: &[Vec<Complex64>],
    v: &[Complex64],
    s_calc: &[Complex64],
    angle_vars: &[usize],
    vmag_vars: &[usize],
) -> DMatrix<f64> {
    let np = angle_vars.len();
    let nq = vmag_vars.len();
    let mut jac = DMatrix::zeros(np + nq, np + nq);

    let term = |i: usize, k: usize| -> (f64, f64) {
        let theta_ik = v[i].arg() - v[k].arg();
        let (g, b) = (y[i][k].re, y[i][k].im);
        // (g cos + b sin, g sin - b cos) scaled by |V_i||V_k|
        let scale = v[i].norm() * v[k].norm();
        (
            scale * (g * theta_ik.cos() + b * theta_ik.sin()),
            scale * (g * theta_ik.sin() - b * theta_ik.cos()),
        )
    };

    for (row, &i) in angle_vars.iter().enumerate() {
        let vm_i = v[i].norm();
        let (p_i, q_i) = (s_calc[i].re, s_calc[i].im);
        for (col, &k) in angle_vars.iter().enumerate() {
            jac[(row, col)] = if i == k {
                -q_i - y[i][i].im * vm_i * vm_i
            } else {
                term(i, k).1
            };
        }
        for (col, &k) in vmag_vars.iter().enumerate() {
            jac[(row, np + col)] = if i == k {
                p_i / vm_i + y[i][i].re * vm_i
            } else {
                term(i, k).0 / v[k].norm()
            };
        }
    }
    for (row, &i) in vmag_vars.iter().enumerate() {
        let vm_i = v[i].norm();
        let (p_i, q_i) = (s_calc[i].re, s_calc[i].im);
        for (col, &k) in angle_vars.iter().enumerate() {
            jac[(np + row, col)] = if i == k {
                p_i - y[i][i].re * vm_i * vm_i
            } else {
                -term(i, k).0
            };
        }
        for (col, &k) in vmag_vars.iter().enumerate() {
            jac[(np + row, np + col)] = if i == k {
                q_i / vm_i - y[i][i].im * vm_i
            } else {
                term(i, k).1 / v[k].norm()
            };
        }
    }
    jac
}

/// Per-branch complex flows and the total MW loss for a voltage profile.
///
/// Flows come from each branch's own stamp (including its line charging), so
/// summing them at a bus reproduces the bus injection of the solved matrix.
pub fn branch_flows(
    net: &Network,
    voltages: &[Complex64],
    use_correction: bool,
) -> Result<(Vec<BranchFlow>, f64), YbusError> {
    let index = net.bus_index();
    let base = net.base_mva;
    let mut flows = Vec::with_capacity(net.branches.len());
    let mut total_loss_mw = 0.0;

    let mut sorted: Vec<&crate::model::Branch> = net.branches.iter().collect();
    sorted.sort_by_key(|b| b.id);

    for branch in sorted {
        if !branch.status {
            flows.push(BranchFlow {
                branch: branch.id,
                p_from_mw: 0.0,
                q_from_mvar: 0.0,
                p_to_mw: 0.0,
                q_to_mvar: 0.0,
                current_pu: 0.0,
                loading_pct: 0.0,
            });
            continue;
        }
        let factor = crate::ybus::branch_factor(net, branch.id, use_correction)?;
        let stamp = pst_branch_admittance(
            branch.r_pu,
            branch.x_pu,
            branch.tap_ratio(),
            branch.phase_shift_deg(),
            factor,
        )?;
        let charging = Complex64::new(0.0, branch.b_pu / 2.0);
        let v_i = voltages[index[&branch.from_bus]];
        let v_k = voltages[index[&branch.to_bus]];
        let i_from = (stamp.y_ii + charging) * v_i + stamp.y_ik * v_k;
        let i_to = stamp.y_ki * v_i + (stamp.y_kk + charging) * v_k;
        let s_from = v_i * i_from.conj() * base;
        let s_to = v_k * i_to.conj() * base;
        let mva = s_from.norm().max(s_to.norm());
        total_loss_mw += s_from.re + s_to.re;
        flows.push(BranchFlow {
            branch: branch.id,
            p_from_mw: s_from.re,
            q_from_mvar: s_from.im,
            p_to_mw: s_to.re,
            q_to_mvar: s_to.im,
            current_pu: i_from.norm().max(i_to.norm()),
            loading_pct: if branch.rating_mva > 0.0 {
                100.0 * mva / branch.rating_mva
            } else {
                0.0
            },
        });
    }
    Ok((flows, total_loss_mw))
}

/// Diagnostic loss of a phase-shifted branch under the corrected-resistance
/// reading `r * K(φ) * cos(φ) * I²`.
///
/// This is not the loss the solver reports; [`branch_flows`] derives losses
/// from the complex flows themselves. Both coincide for plain branches at
/// φ = 0, and the two readings diverge as |φ| grows.
pub fn pst_loss_eq6(
    r_pu: f64,
    table: &CorrectionTable,
    phase_shift_deg: f64,
    current_pu: f64,
) -> f64 {
    debug_assert!(r_pu >= 0.0);
    let k = interpolate_factor(table, phase_shift_deg).factor;
    r_pu * k * phase_shift_deg.to_radians().cos() * current_pu * current_pu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_case;

    const TWO_BUS: &str = r#"{
        "base_mva": 100,
        "buses": [
            {"id": 1, "base_kv": 138, "kind": "slack", "v_setpoint_pu": 1.0, "area": "north"},
            {"id": 2, "base_kv": 138, "kind": "pq", "area": "south"}
        ],
        "branches": [
            {"id": 1, "from_bus": 1, "to_bus": 2, "r_pu": 0, "x_pu": 0.1, "rating_mva": 150}
        ],
        "generators": [
            {"bus": 1, "p_mw": 0, "q_min_mvar": -300, "q_max_mvar": 300, "p_max_mw": 500}
        ],
        "loads": [
            {"bus": 2, "p_mw": 100, "q_mvar": 0}
        ]
    }"#;

    #[test]
    fn two_bus_closed_form() {
        let net = parse_case(TWO_BUS).unwrap();
        let sol = solve(&net, &SolveOptions::default()).unwrap();
        let v2 = sol.voltage(2).unwrap();
        assert!((v2.vm_pu - 0.99494).abs() < 1e-3, "vm {}", v2.vm_pu);
        assert!((v2.va_deg - -5.768).abs() < 1e-3, "va {}", v2.va_deg);
        assert!(sol.iterations <= 6, "iterations {}", sol.iterations);
        assert!(sol.converged);
        assert!(sol.max_mismatch_pu <= 1e-8);
    }

    #[test]
    fn zero_injection_flat_start_is_fixed_point() {
        let doc = r#"{
            "base_mva": 100,
            "buses": [
                {"id": 1, "base_kv": 138, "kind": "slack"},
                {"id": 2, "base_kv": 138, "kind": "pq"},
                {"id": 3, "base_kv": 138, "kind": "pq"}
            ],
            "branches": [
                {"id": 1, "from_bus": 1, "to_bus": 2, "r_pu": 0, "x_pu": 0.1},
                {"id": 2, "from_bus": 2, "to_bus": 3, "r_pu": 0, "x_pu": 0.1},
                {"id": 3, "from_bus": 1, "to_bus": 3, "r_pu": 0, "x_pu": 0.1}
            ]
        }"#;
        let net = parse_case(doc).unwrap();
        let sol = solve(&net, &SolveOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        for v in &sol.voltages {
            assert_eq!(v.vm_pu, 1.0);
            assert_eq!(v.va_deg, 0.0);
        }
    }

    #[test]
    fn infeasible_demand_does_not_converge() {
        let doc = TWO_BUS.replace("\"p_mw\": 100", "\"p_mw\": 10000");
        let net = parse_case(&doc).unwrap();
        let err = solve(&net, &SolveOptions::default()).unwrap_err();
        assert!(
            matches!(err, PowerFlowError::NotConverged { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn lossless_branch_has_zero_loss() {
        let net = parse_case(TWO_BUS).unwrap();
        let sol = solve(&net, &SolveOptions::default()).unwrap();
        assert!(sol.total_loss_mw.abs() < 1e-10 * net.base_mva);
        let flow = sol.flow(1).unwrap();
        assert!((flow.p_from_mw + flow.p_to_mw).abs() < 1e-8);
    }

    #[test]
    fn resistive_loss_matches_slack_balance() {
        let doc = TWO_BUS.replace("\"r_pu\": 0,", "\"r_pu\": 0.01,");
        let net = parse_case(&doc).unwrap();
        let sol = solve(&net, &SolveOptions::default()).unwrap();
        let flow = sol.flow(1).unwrap();
        // loss = |I|^2 R on the system base
        let i2r = flow.current_pu * flow.current_pu * 0.01 * net.base_mva;
        assert!((sol.total_loss_mw - i2r).abs() < 1e-6, "{}", sol.total_loss_mw);
        // and equals slack injection minus delivered load
        let slack_out = flow.p_from_mw;
        assert!((slack_out - 100.0 - sol.total_loss_mw).abs() < 1e-6);
    }

    #[test]
    fn out_of_service_branch_reports_zero_flow() {
        let doc = r#"{
            "base_mva": 100,
            "buses": [
                {"id": 1, "base_kv": 138, "kind": "slack"},
                {"id": 2, "base_kv": 138, "kind": "pq"}
            ],
            "branches": [
                {"id": 1, "from_bus": 1, "to_bus": 2, "r_pu": 0, "x_pu": 0.1},
                {"id": 2, "from_bus": 1, "to_bus": 2, "r_pu": 0, "x_pu": 0.2, "status": false}
            ],
            "loads": [{"bus": 2, "p_mw": 50, "q_mvar": 10}]
        }"#;
        let net = parse_case(doc).unwrap();
        let sol = solve(&net, &SolveOptions::default()).unwrap();
        let dead = sol.flow(2).unwrap();
        assert_eq!(dead.p_from_mw, 0.0);
        assert_eq!(dead.current_pu, 0.0);
    }

    #[test]
    fn disconnected_network_rejected() {
        let doc = r#"{
            "base_mva": 100,
            "buses": [
                {"id": 1, "base_kv": 138, "kind": "slack"},
                {"id": 2, "base_kv": 138, "kind": "pq"},
                {"id": 3, "base_kv": 138, "kind": "pq"},
                {"id": 4, "base_kv": 138, "kind": "pq"}
            ],
            "branches": [
                {"id": 1, "from_bus": 1, "to_bus": 2, "r_pu": 0, "x_pu": 0.1},
                {"id": 2, "from_bus": 3, "to_bus": 4, "r_pu": 0, "x_pu": 0.1}
            ]
        }"#;
        let net = parse_case(doc).unwrap();
        let err = solve(&net, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, PowerFlowError::Disconnected), "{err:?}");
    }

    #[test]
    fn q_limit_switching_holds_limit() {
        let doc = r#"{
            "base_mva": 100,
            "buses": [
                {"id": 1, "base_kv": 138, "kind": "slack", "v_setpoint_pu": 1.0},
                {"id": 2, "base_kv": 138, "kind": "pv", "v_setpoint_pu": 1.05},
                {"id": 3, "base_kv": 138, "kind": "pq"}
            ],
            "branches": [
                {"id": 1, "from_bus": 1, "to_bus": 2, "r_pu": 0.01, "x_pu": 0.1},
                {"id": 2, "from_bus": 2, "to_bus": 3, "r_pu": 0.01, "x_pu": 0.1}
            ],
            "generators": [
                {"bus": 2, "p_mw": 40, "q_min_mvar": -5, "q_max_mvar": 5, "p_max_mw": 100}
            ],
            "loads": [{"bus": 3, "p_mw": 60, "q_mvar": 40}]
        }"#;
        let net = parse_case(doc).unwrap();

        let unlimited = solve(&net, &SolveOptions::default()).unwrap();
        assert_eq!(unlimited.voltage(2).unwrap().vm_pu, 1.05);

        let opts = SolveOptions {
            enforce_q_limits: true,
            ..SolveOptions::default()
        };
        let limited = solve(&net, &opts).unwrap();
        let vm2 = limited.voltage(2).unwrap().vm_pu;
        assert!(vm2 < 1.05, "pv bus should fall off its setpoint, vm {vm2}");

        // reactive output pinned at q_max: recompute injection at bus 2
        let order = net.bus_order();
        let v: Vec<Complex64> = order
            .iter()
            .map(|&b| limited.complex_voltage(b).unwrap())
            .collect();
        let y = assemble_ybus(&net, true).unwrap().to_dense();
        let s = injections(&y, &v);
        let q_gen_mvar = s[1].im * net.base_mva; // no reactive load at bus 2
        assert!((q_gen_mvar - 5.0).abs() < 1e-5, "q_gen {q_gen_mvar}");
    }

    #[test]
    fn warm_start_reuses_a_previous_solution() {
        let net = parse_case(TWO_BUS).unwrap();
        let first = solve(&net, &SolveOptions::default()).unwrap();
        let warm: Vec<Complex64> = net
            .bus_order()
            .iter()
            .map(|&b| first.complex_voltage(b).unwrap())
            .collect();
        let opts = SolveOptions {
            flat_start: false,
            warm_start: Some(warm),
            ..SolveOptions::default()
        };
        let second = solve(&net, &opts).unwrap();
        assert_eq!(second.iterations, 0);
        assert!((second.voltage(2).unwrap().vm_pu - first.voltage(2).unwrap().vm_pu).abs() < 1e-12);
    }

    #[test]
    fn constant_unity_table_matches_correction_off() {
        let doc = r#"{
            "base_mva": 100,
            "buses": [
                {"id": 1, "base_kv": 138, "kind": "slack"},
                {"id": 2, "base_kv": 138, "kind": "pq"}
            ],
            "branches": [
                {"id": 1, "from_bus": 1, "to_bus": 2, "r_pu": 0.01, "x_pu": 0.1,
                 "transformer": {"phase_shift_deg": 5.0, "correction_table": "unity"}}
            ],
            "loads": [{"bus": 2, "p_mw": 40, "q_mvar": 10}],
            "correction_tables": [
                {"id": "unity", "points": [[-90, 1.0], [90, 1.0]]}
            ]
        }"#;
        let net = parse_case(doc).unwrap();
        let on = solve(&net, &SolveOptions::default()).unwrap();
        let off = solve(
            &net,
            &SolveOptions {
                use_correction: false,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        for (a, b) in on.voltages.iter().zip(off.voltages.iter()) {
            assert!((a.vm_pu - b.vm_pu).abs() < 1e-10);
            assert!((a.va_deg - b.va_deg).abs() < 1e-10);
        }
    }

    #[test]
    fn eq6_diagnostic_loss() {
        let table = crate::correction::sample_table();
        // K(0) = 0.15, cos 0 = 1
        let loss = pst_loss_eq6(0.01, &table, 0.0, 2.0);
        assert!((loss - 0.006).abs() < 1e-15);
        // real-part reading vanishes at 90 degrees
        let loss = pst_loss_eq6(0.01, &table, 90.0, 3.0);
        assert!(loss.abs() < 1e-12);
        // unity table at zero shift reduces to R I^2
        let unity = CorrectionTable {
            id: "unity".into(),
            points: vec![(-90.0, 1.0), (90.0, 1.0)],
        };
        assert!((pst_loss_eq6(0.01, &unity, 0.0, 1.0) - 0.01).abs() < 1e-15);
    }
}
