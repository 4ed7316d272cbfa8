//! Study procedures over the solvers: violation scanning, phase-angle sweeps
//! with and without impedance correction, and N-1 contingency re-solves.

use crate::model::{BranchId, BusId, Network};
use crate::powerflow::{is_connected, solve, PowerFlowError, PowerFlowSolution, SolveOptions};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("solution is not converged")]
    Unconverged,
    #[error("branch {0} not found")]
    UnknownBranch(BranchId),
    #[error("bus {0} not found")]
    UnknownBus(BusId),
    #[error("branch {0} is not a transformer")]
    NotATransformer(BranchId),
    #[error("branch {0} is out of service")]
    OutOfService(BranchId),
    #[error("invalid sweep range: {0}")]
    BadRange(String),
    #[error(transparent)]
    PowerFlow(#[from] PowerFlowError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VoltageBound {
    Low,
    High,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VoltageViolation {
    pub bus: BusId,
    pub vm_pu: f64,
    pub limit_pu: f64,
    pub bound: VoltageBound,
    /// How far past the limit, as a positive magnitude.
    pub deficit_pu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalViolation {
    pub branch: BranchId,
    pub loading_pct: f64,
    pub rating_mva: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ViolationCounts {
    pub low_voltage: usize,
    pub high_voltage: usize,
    pub thermal: usize,
}

/// Buses past their voltage limits and rated branches past 100% loading.
/// Entries exist only for strict violations: a bus sitting exactly on its
/// limit or a branch at exactly 100% is compliant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationReport {
    pub voltage: Vec<VoltageViolation>,
    pub thermal: Vec<ThermalViolation>,
    pub counts: ViolationCounts,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.voltage.is_empty() && self.thermal.is_empty()
    }
}

/// Scan a converged solution for voltage and thermal limit violations.
pub fn scan_violations(
    net: &Network,
    sol: &PowerFlowSolution,
) -> Result<ViolationReport, StudyError> {
    if !sol.converged {
        return Err(StudyError::Unconverged);
    }
    let mut voltage = Vec::new();
    for v in &sol.voltages {
        let Some(bus) = net.bus(v.bus) else { continue };
        if v.vm_pu < bus.vmin_pu {
            voltage.push(VoltageViolation {
                bus: v.bus,
                vm_pu: v.vm_pu,
                limit_pu: bus.vmin_pu,
                bound: VoltageBound::Low,
                deficit_pu: bus.vmin_pu - v.vm_pu,
            });
        } else if v.vm_pu > bus.vmax_pu {
            voltage.push(VoltageViolation {
                bus: v.bus,
                vm_pu: v.vm_pu,
                limit_pu: bus.vmax_pu,
                bound: VoltageBound::High,
                deficit_pu: v.vm_pu - bus.vmax_pu,
            });
        }
    }
    let mut thermal = Vec::new();
    for f in &sol.flows {
        let Some(branch) = net.branch(f.branch) else {
            continue;
        };
        if branch.status && branch.rating_mva > 0.0 && f.loading_pct > 100.0 {
            thermal.push(ThermalViolation {
                branch: f.branch,
                loading_pct: f.loading_pct,
                rating_mva: branch.rating_mva,
            });
        }
    }
    let counts = ViolationCounts {
        low_voltage: voltage
            .iter()
            .filter(|v| v.bound == VoltageBound::Low)
            .count(),
        high_voltage: voltage
            .iter()
            .filter(|v| v.bound == VoltageBound::High)
            .count(),
        thermal: thermal.len(),
    };
    Ok(ViolationReport {
        voltage,
        thermal,
        counts,
    })
}

/// Parameters of a phase-angle sweep. The sweep covers the inclusive range
/// `[from_deg, to_deg]` in `step_deg` increments, solving each point both
/// without and with impedance correction.
#[derive(Clone, Debug)]
pub struct SweepRequest {
    pub pst_branch: BranchId,
    pub from_deg: f64,
    pub to_deg: f64,
    pub step_deg: f64,
    /// Branch whose flow and loading are reported; defaults to the swept
    /// transformer itself. Its thermal violations are excluded from the
    /// extra-violation count.
    pub track_branch: Option<BranchId>,
    pub track_buses: Vec<BusId>,
}

/// One sweep evaluation. Result fields are None when the point failed to
/// converge; the row itself is always present.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi_deg: f64,
    pub corrected: bool,
    pub converged: bool,
    pub target_flow_mw: Option<f64>,
    pub target_loading_pct: Option<f64>,
    pub total_loss_mw: Option<f64>,
    /// Thermal violations not counting the target branch.
    pub extra_line_violations: Option<usize>,
    pub low_v_count: Option<usize>,
    pub high_v_count: Option<usize>,
    /// One magnitude per tracked bus, in request order.
    pub tracked_vm_pu: Vec<Option<f64>>,
}

/// Sweep a transformer's phase angle and record the AC response of the
/// target branch, tracked buses, losses, and violation counts for both
/// correction modes. The input network is never mutated.
pub fn angle_sweep(net: &Network, req: &SweepRequest) -> Result<Vec<SweepRow>, StudyError> {
    let pst = net
        .branch(req.pst_branch)
        .ok_or(StudyError::UnknownBranch(req.pst_branch))?;
    if pst.transformer.is_none() {
        return Err(StudyError::NotATransformer(req.pst_branch));
    }
    if req.step_deg <= 0.0 {
        return Err(StudyError::BadRange(format!(
            "step {} must be positive",
            req.step_deg
        )));
    }
    if req.from_deg > req.to_deg {
        return Err(StudyError::BadRange(format!(
            "from {} above to {}",
            req.from_deg, req.to_deg
        )));
    }
    let target = req.track_branch.unwrap_or(req.pst_branch);
    if net.branch(target).is_none() {
        return Err(StudyError::UnknownBranch(target));
    }
    for &bus in &req.track_buses {
        if net.bus(bus).is_none() {
            return Err(StudyError::UnknownBus(bus));
        }
    }

    let mut rows = Vec::new();
    let mut step_index = 0usize;
    loop {
        let phi = req.from_deg + step_index as f64 * req.step_deg;
        if phi > req.to_deg + 1e-9 {
            break;
        }
        let mut scenario = net.clone();
        scenario
            .branches
            .iter_mut()
            .find(|b| b.id == req.pst_branch)
            .expect("checked above")
            .transformer
            .as_mut()
            .expect("checked above")
            .phase_shift_deg = phi;

        for corrected in [false, true] {
            let opts = SolveOptions {
                use_correction: corrected,
                ..SolveOptions::default()
            };
            let row = match solve(&scenario, &opts) {
                Ok(sol) => {
                    let report = scan_violations(&scenario, &sol)?;
                    let extra = report
                        .thermal
                        .iter()
                        .filter(|t| t.branch != target)
                        .count();
                    let flow = sol.flow(target).expect("target exists");
                    SweepRow {
                        phi_deg: phi,
                        corrected,
                        converged: true,
                        target_flow_mw: Some(flow.p_from_mw),
                        target_loading_pct: Some(flow.loading_pct),
                        total_loss_mw: Some(sol.total_loss_mw),
                        extra_line_violations: Some(extra),
                        low_v_count: Some(report.counts.low_voltage),
                        high_v_count: Some(report.counts.high_voltage),
                        tracked_vm_pu: req
                            .track_buses
                            .iter()
                            .map(|&b| sol.voltage(b).map(|v| v.vm_pu))
                            .collect(),
                    }
                }
                Err(_) => SweepRow {
                    phi_deg: phi,
                    corrected,
                    converged: false,
                    target_flow_mw: None,
                    target_loading_pct: None,
                    total_loss_mw: None,
                    extra_line_violations: None,
                    low_v_count: None,
                    high_v_count: None,
                    tracked_vm_pu: vec![None; req.track_buses.len()],
                },
            };
            rows.push(row);
        }
        step_index += 1;
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContingencyRecord {
    pub outage: BranchId,
    pub islanded: bool,
    pub converged: bool,
    pub report: Option<ViolationReport>,
    /// Lowest bus voltage of the re-solved case.
    pub worst_voltage_pu: Option<f64>,
    /// Highest loading among rated in-service branches.
    pub worst_loading_pct: Option<f64>,
}

/// Re-solve the network once per branch outage. Outages that split the
/// network are flagged islanded and not solved; solver failures are recorded,
/// not raised. The base network is left untouched.
pub fn contingency_scan(
    net: &Network,
    outages: &[BranchId],
    opts: &SolveOptions,
) -> Result<Vec<ContingencyRecord>, StudyError> {
    for &id in outages {
        let branch = net.branch(id).ok_or(StudyError::UnknownBranch(id))?;
        if !branch.status {
            return Err(StudyError::OutOfService(id));
        }
    }

    let mut records = Vec::with_capacity(outages.len());
    for &id in outages {
        let mut scenario = net.clone();
        scenario
            .branches
            .iter_mut()
            .find(|b| b.id == id)
            .expect("checked above")
            .status = false;

        if !is_connected(&scenario) {
            records.push(ContingencyRecord {
                outage: id,
                islanded: true,
                converged: false,
                report: None,
                worst_voltage_pu: None,
                worst_loading_pct: None,
            });
            continue;
        }
        match solve(&scenario, opts) {
            Ok(sol) => {
                let report = scan_violations(&scenario, &sol)?;
                let worst_voltage_pu = sol
                    .voltages
                    .iter()
                    .map(|v| v.vm_pu)
                    .fold(f64::INFINITY, f64::min);
                let worst_loading_pct = sol
                    .flows
                    .iter()
                    .filter(|f| {
                        scenario
                            .branch(f.branch)
                            .is_some_and(|b| b.status && b.rating_mva > 0.0)
                    })
                    .map(|f| f.loading_pct)
                    .fold(None, |acc: Option<f64>, x| {
                        Some(acc.map_or(x, |a| a.max(x)))
                    });
                records.push(ContingencyRecord {
                    outage: id,
                    islanded: false,
                    converged: true,
                    report: Some(report),
                    worst_voltage_pu: Some(worst_voltage_pu),
                    worst_loading_pct,
                });
            }
            Err(_) => records.push(ContingencyRecord {
                outage: id,
                islanded: false,
                converged: false,
                report: None,
                worst_voltage_pu: None,
                worst_loading_pct: None,
            }),
        }
    }
    Ok(records)
}
