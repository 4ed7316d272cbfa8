//! Grid case model: buses, branches, transformers, correction tables, and the
//! JSON case format every analysis consumes.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

pub type BusId = u32;
pub type BranchId = u32;

/// Bus classification for power flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: BusId,
    #[serde(default)]
    pub name: String,
    /// Area label used by transfer definitions (buyer/seller areas).
    #[serde(default)]
    pub area: String,
    pub base_kv: f64,
    pub kind: BusKind,
    /// Voltage setpoint, honored for slack and pv buses.
    #[serde(default)]
    pub v_setpoint_pu: Option<f64>,
    #[serde(default = "default_vmin")]
    pub vmin_pu: f64,
    #[serde(default = "default_vmax")]
    pub vmax_pu: f64,
}

fn default_vmin() -> f64 {
    0.95
}

fn default_vmax() -> f64 {
    1.05
}

fn default_true() -> bool {
    true
}

fn default_tap() -> f64 {
    1.0
}

/// Transformer extension on a branch. A record with all defaults behaves
/// exactly as a line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerExt {
    #[serde(default = "default_tap")]
    pub tap_ratio: f64,
    #[serde(default)]
    pub phase_shift_deg: f64,
    /// Id of an impedance correction table in the network, if any.
    #[serde(default)]
    pub correction_table: Option<String>,
}

impl Default for TransformerExt {
    fn default() -> Self {
        TransformerExt {
            tap_ratio: 1.0,
            phase_shift_deg: 0.0,
            correction_table: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub id: BranchId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r_pu: f64,
    pub x_pu: f64,
    /// Total line-charging susceptance; half is stamped at each end.
    #[serde(default)]
    pub b_pu: f64,
    /// 0 means unlimited.
    #[serde(default)]
    pub rating_mva: f64,
    #[serde(default = "default_true")]
    pub status: bool,
    #[serde(default)]
    pub transformer: Option<TransformerExt>,
}

impl Branch {
    /// Phase shift in degrees (0 for plain lines).
    pub fn phase_shift_deg(&self) -> f64 {
        self.transformer.as_ref().map_or(0.0, |t| t.phase_shift_deg)
    }

    pub fn tap_ratio(&self) -> f64 {
        self.transformer.as_ref().map_or(1.0, |t| t.tap_ratio)
    }

    pub fn correction_table(&self) -> Option<&str> {
        self.transformer
            .as_ref()
            .and_then(|t| t.correction_table.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub bus: BusId,
    pub p_mw: f64,
    pub q_min_mvar: f64,
    pub q_max_mvar: f64,
    pub p_max_mw: f64,
    #[serde(default)]
    pub v_setpoint_pu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub bus: BusId,
    pub p_mw: f64,
    pub q_mvar: f64,
}

/// Sorted (angle°, factor) breakpoints defining a piecewise-linear impedance
/// multiplier as a function of phase shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionTable {
    pub id: String,
    pub points: Vec<(f64, f64)>,
}

/// Immutable grid description. All branch impedances are per unit on
/// `base_mva`; parsing rejects any document that fails an error-severity
/// validation finding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub correction_tables: Vec<CorrectionTable>,
}

impl Network {
    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn branch(&self, id: BranchId) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn correction_table(&self, id: &str) -> Option<&CorrectionTable> {
        self.correction_tables.iter().find(|t| t.id == id)
    }

    /// Bus ids in ascending order; fixes the row/column ordering of every
    /// matrix and report built from this network.
    pub fn bus_order(&self) -> Vec<BusId> {
        let mut ids: Vec<BusId> = self.buses.iter().map(|b| b.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn bus_index(&self) -> HashMap<BusId, usize> {
        self.bus_order()
            .into_iter()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect()
    }

    pub fn slack_buses(&self) -> Vec<BusId> {
        self.buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .map(|b| b.id)
            .collect()
    }

    /// Copy of the network with every correction-table reference removed.
    /// Analyses on the copy behave as if no table had ever been attached.
    pub fn without_correction_tables(&self) -> Network {
        let mut net = self.clone();
        net.correction_tables.clear();
        for branch in &mut net.branches {
            if let Some(t) = branch.transformer.as_mut() {
                t.correction_table = None;
            }
        }
        net
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One falsified invariant, reported by [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {}", tag, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("case parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid case: {}", join_findings(.0))]
    Invalid(Vec<Finding>),
}

fn join_findings(findings: &[Finding]) -> String {
    findings
        .iter()
        .filter(|f| f.severity == Severity::Error)
        .map(|f| f.message.clone())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
#[error("non-positive MVA base: {0}")]
pub struct NonPositiveBase(pub f64);

/// Parse a JSON case document into a cross-linked [`Network`].
///
/// Unknown keys, malformed numbers, dangling references and duplicate ids are
/// all rejected; a parsed network never carries an error-severity finding.
pub fn parse_case(text: &str) -> Result<Network, CaseError> {
    let net: Network = serde_json::from_str(text)?;
    let findings = validate(&net);
    if findings.iter().any(|f| f.severity == Severity::Error) {
        return Err(CaseError::Invalid(findings));
    }
    Ok(net)
}

/// Serialize a network back to the case format. `parse_case` of the result
/// reproduces the network field-by-field.
pub fn serialize_case(net: &Network) -> String {
    let mut s = serde_json::to_string_pretty(net).expect("network serializes");
    s.push('\n');
    s
}

/// Convert MW or MVAr to per unit on the given MVA base.
pub fn to_per_unit(value: f64, base_mva: f64) -> Result<f64, NonPositiveBase> {
    if base_mva <= 0.0 {
        return Err(NonPositiveBase(base_mva));
    }
    Ok(value / base_mva)
}

/// Check every type invariant and return one finding per violation.
/// An empty list means the network is internally consistent.
pub fn validate(net: &Network) -> Vec<Finding> {
    let mut out = Vec::new();
    let err = |msg: String| Finding {
        severity: Severity::Error,
        message: msg,
    };

    if net.base_mva <= 0.0 {
        out.push(err(format!("non-positive base_mva {}", net.base_mva)));
    }
    if net.buses.is_empty() {
        out.push(err("network has no buses".into()));
    }

    let mut bus_ids = HashSet::new();
    for bus in &net.buses {
        if bus.id == 0 {
            out.push(err("bus id must be a positive integer".into()));
        }
        if !bus_ids.insert(bus.id) {
            out.push(err(format!("duplicate bus id {}", bus.id)));
        }
        if bus.base_kv <= 0.0 {
            out.push(err(format!("bus {}: non-positive base_kv", bus.id)));
        }
        if bus.vmin_pu >= bus.vmax_pu {
            out.push(err(format!(
                "bus {}: vmin_pu {} not below vmax_pu {}",
                bus.id, bus.vmin_pu, bus.vmax_pu
            )));
        }
        if bus.kind == BusKind::Pq && bus.v_setpoint_pu.is_some() {
            out.push(Finding {
                severity: Severity::Warning,
                message: format!("bus {}: v_setpoint_pu on a pq bus is ignored", bus.id),
            });
        }
    }

    let slack_count = net.slack_buses().len();
    if slack_count == 0 {
        out.push(err("no slack bus".into()));
    } else if slack_count > 1 {
        out.push(err(format!("multiple slack buses (found {slack_count})")));
    }

    let table_ids: HashSet<&str> = net.correction_tables.iter().map(|t| t.id.as_str()).collect();
    let mut seen_tables = HashSet::new();
    for table in &net.correction_tables {
        if !seen_tables.insert(table.id.as_str()) {
            out.push(err(format!("duplicate correction table id '{}'", table.id)));
        }
        if table.points.len() < 2 {
            out.push(err(format!(
                "table '{}': fewer than 2 breakpoints",
                table.id
            )));
        }
        if table.points.windows(2).any(|w| w[0].0 >= w[1].0) {
            out.push(err(format!(
                "table '{}': angles not strictly increasing",
                table.id
            )));
        }
        for &(angle, factor) in &table.points {
            if factor <= 0.0 {
                out.push(err(format!(
                    "table '{}': non-positive factor {} at {}°",
                    table.id, factor, angle
                )));
            }
        }
    }

    let mut branch_ids = HashSet::new();
    for branch in &net.branches {
        if branch.id == 0 {
            out.push(err("branch id must be a positive integer".into()));
        }
        if !branch_ids.insert(branch.id) {
            out.push(err(format!("duplicate branch id {}", branch.id)));
        }
        for end in [branch.from_bus, branch.to_bus] {
            if !bus_ids.contains(&end) {
                out.push(err(format!(
                    "branch {}: unknown bus reference {}",
                    branch.id, end
                )));
            }
        }
        if branch.from_bus == branch.to_bus {
            out.push(err(format!(
                "branch {}: from_bus equals to_bus",
                branch.id
            )));
        }
        if branch.r_pu < 0.0 {
            out.push(err(format!("branch {}: negative r_pu", branch.id)));
        }
        if branch.r_pu * branch.r_pu + branch.x_pu * branch.x_pu == 0.0 {
            out.push(err(format!("branch {}: zero series impedance", branch.id)));
        }
        if branch.rating_mva < 0.0 {
            out.push(err(format!("branch {}: negative rating_mva", branch.id)));
        }
        if let Some(t) = &branch.transformer {
            if t.tap_ratio <= 0.0 {
                out.push(err(format!("branch {}: non-positive tap_ratio", branch.id)));
            }
            if t.phase_shift_deg.abs() > 90.0 {
                out.push(err(format!(
                    "branch {}: phase_shift_deg {} outside [-90, 90]",
                    branch.id, t.phase_shift_deg
                )));
            }
            if let Some(table) = &t.correction_table {
                if !table_ids.contains(table.as_str()) {
                    out.push(err(format!(
                        "branch {}: unknown correction table '{}'",
                        branch.id, table
                    )));
                }
            }
            if (t.phase_shift_deg != 0.0 || t.correction_table.is_some()) && branch.b_pu != 0.0 {
                out.push(Finding {
                    severity: Severity::Warning,
                    message: format!(
                        "branch {}: phase shifter carries line charging b_pu {}",
                        branch.id, branch.b_pu
                    ),
                });
            }
        }
    }

    for gen in &net.generators {
        if !bus_ids.contains(&gen.bus) {
            out.push(err(format!("generator: unknown bus reference {}", gen.bus)));
        }
        if gen.q_min_mvar > gen.q_max_mvar {
            out.push(err(format!(
                "generator at bus {}: q_min_mvar above q_max_mvar",
                gen.bus
            )));
        }
        if gen.p_max_mw < gen.p_mw {
            out.push(err(format!(
                "generator at bus {}: p_max_mw below p_mw",
                gen.bus
            )));
        }
    }

    for load in &net.loads {
        if !bus_ids.contains(&load.bus) {
            out.push(err(format!("load: unknown bus reference {}", load.bus)));
        }
    }

    // Isolated buses solve to singular systems later; flag them early.
    let mut touched: HashSet<BusId> = HashSet::new();
    for branch in net.branches.iter().filter(|b| b.status) {
        touched.insert(branch.from_bus);
        touched.insert(branch.to_bus);
    }
    if net.buses.len() > 1 {
        for bus in &net.buses {
            if !touched.contains(&bus.id) {
                out.push(Finding {
                    severity: Severity::Warning,
                    message: format!("bus {}: no in-service branch connects it", bus.id),
                });
            }
        }
    }

    out
}
