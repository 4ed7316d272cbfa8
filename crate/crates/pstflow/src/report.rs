//! CSV renderers for every analysis report. All numeric cells use fixed
//! 6-decimal formatting so repeated runs are byte-identical.

use crate::dc::{AtcLimit, AtcResult};
use crate::model::BusId;
use crate::powerflow::PowerFlowSolution;
use crate::studies::{ContingencyRecord, SweepRow, ViolationReport, VoltageBound};

/// Fixed 6-decimal cell; negative zero collapses to zero.
pub fn f6(v: f64) -> String {
    let s = format!("{:.6}", v);
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn opt_f6(v: Option<f64>) -> String {
    v.map(f6).unwrap_or_default()
}

fn opt_count(v: Option<usize>) -> String {
    v.map(|c| c.to_string()).unwrap_or_default()
}

/// Bus voltages and branch flows in two labeled sections.
pub fn solution_csv(sol: &PowerFlowSolution) -> String {
    let mut out = String::from("BUS\nid,vm_pu,va_deg\n");
    for v in &sol.voltages {
        out.push_str(&format!("{},{},{}\n", v.bus, f6(v.vm_pu), f6(v.va_deg)));
    }
    out.push_str("BRANCH\nid,p_from_mw,q_from_mvar,p_to_mw,q_to_mvar,loading_pct\n");
    for f in &sol.flows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f.branch,
            f6(f.p_from_mw),
            f6(f.q_from_mvar),
            f6(f.p_to_mw),
            f6(f.q_to_mvar),
            f6(f.loading_pct)
        ));
    }
    out
}

pub fn violations_csv(report: &ViolationReport) -> String {
    let mut out = String::from("VOLTAGE\nbus_id,vm_pu,limit_pu,bound,deficit_pu\n");
    for v in &report.voltage {
        let bound = match v.bound {
            VoltageBound::Low => "low",
            VoltageBound::High => "high",
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            v.bus,
            f6(v.vm_pu),
            f6(v.limit_pu),
            bound,
            f6(v.deficit_pu)
        ));
    }
    out.push_str("THERMAL\nbranch_id,loading_pct,rating_mva\n");
    for t in &report.thermal {
        out.push_str(&format!(
            "{},{},{}\n",
            t.branch,
            f6(t.loading_pct),
            f6(t.rating_mva)
        ));
    }
    out.push_str("COUNTS\nlow_voltage,high_voltage,thermal\n");
    out.push_str(&format!(
        "{},{},{}\n",
        report.counts.low_voltage, report.counts.high_voltage, report.counts.thermal
    ));
    out
}

/// One row per (angle, correction mode); unconverged points keep their cells
/// empty and are marked in the trailing status column.
pub fn sweep_csv(rows: &[SweepRow], track_buses: &[BusId]) -> String {
    let mut header = String::from(
        "phi_deg,corrected,target_flow_mw,target_loading_pct,total_loss_mw,\
         extra_line_violations,low_v_count,high_v_count",
    );
    for bus in track_buses {
        header.push_str(&format!(",vm_pu_{bus}"));
    }
    header.push_str(",status\n");

    let mut out = header;
    for row in rows {
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            f6(row.phi_deg),
            row.corrected,
            opt_f6(row.target_flow_mw),
            opt_f6(row.target_loading_pct),
            opt_f6(row.total_loss_mw),
            opt_count(row.extra_line_violations),
            opt_count(row.low_v_count),
            opt_count(row.high_v_count),
        );
        for vm in &row.tracked_vm_pu {
            line.push(',');
            line.push_str(&opt_f6(*vm));
        }
        line.push(',');
        line.push_str(if row.converged { "ok" } else { "failed" });
        line.push('\n');
        out.push_str(&line);
    }
    out
}

pub fn contingency_csv(records: &[ContingencyRecord]) -> String {
    let mut out =
        String::from("outage_branch,status,worst_voltage_pu,worst_loading_pct,violation_count\n");
    for r in records {
        let status = if r.islanded {
            "islanded"
        } else if r.converged {
            "ok"
        } else {
            "failed"
        };
        let count = r
            .report
            .as_ref()
            .map(|rep| rep.counts.low_voltage + rep.counts.high_voltage + rep.counts.thermal)
            .map(|c| c.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.outage,
            status,
            opt_f6(r.worst_voltage_pu),
            opt_f6(r.worst_loading_pct),
            count
        ));
    }
    out
}

/// ATC summary rows (one per correction mode) followed by per-branch detail.
pub fn atc_csv(entries: &[(String, bool, AtcResult)]) -> String {
    let mut out = String::from("transfer_name,use_correction,atc_mw,binding_branch\n");
    for (name, corrected, result) in entries {
        match result.limit {
            AtcLimit::Bounded {
                atc_mw,
                binding_branch,
            } => out.push_str(&format!(
                "{},{},{},{}\n",
                name,
                corrected,
                f6(atc_mw),
                binding_branch
            )),
            AtcLimit::Unbounded => {
                out.push_str(&format!("{},{},unbounded,\n", name, corrected))
            }
        }
    }
    out.push_str("BRANCH_DETAIL\nuse_correction,branch_id,base_flow_mw,ptdf,headroom_mw\n");
    for (_, corrected, result) in entries {
        for d in &result.branches {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                corrected,
                d.branch,
                f6(d.base_flow_mw),
                f6(d.ptdf),
                opt_f6(d.headroom_mw)
            ));
        }
    }
    out
}
