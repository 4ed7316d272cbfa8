//! Linearized (DC) power flow, transfer sensitivities (PTDF), and available
//! transfer capability between buyer and seller areas.

use crate::linear::solve_dense;
use crate::model::{BranchId, BusId, Network};
use crate::ybus::{branch_factor, YbusError};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DcError {
    #[error("branch {0}: zero reactance")]
    ZeroReactance(BranchId),
    #[error(transparent)]
    Ybus(#[from] YbusError),
    #[error("network must have exactly one slack bus (found {0})")]
    SlackCount(usize),
    #[error("dc system is singular; network is likely disconnected")]
    Singular,
    #[error("no {0} in area '{1}'")]
    EmptyArea(&'static str, String),
    #[error("invalid transfer: {0}")]
    Transfer(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BusAngle {
    pub bus: BusId,
    pub theta_rad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DcFlow {
    pub branch: BranchId,
    /// Signed MW, from -> to positive.
    pub flow_mw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DcSolution {
    pub angles: Vec<BusAngle>,
    pub flows: Vec<DcFlow>,
}

impl DcSolution {
    pub fn angle_rad(&self, bus: BusId) -> Option<f64> {
        self.angles.iter().find(|a| a.bus == bus).map(|a| a.theta_rad)
    }

    pub fn flow_mw(&self, branch: BranchId) -> Option<f64> {
        self.flows.iter().find(|f| f.branch == branch).map(|f| f.flow_mw)
    }
}

/// Area-to-area transfer: which generators back the export and which loads
/// absorb it. Participation indexes into `net.generators` / `net.loads`;
/// each side's fractions sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferDefinition {
    pub seller_area: String,
    pub buyer_area: String,
    pub seller_participation: Vec<(usize, f64)>,
    pub buyer_participation: Vec<(usize, f64)>,
}

impl TransferDefinition {
    /// Pro-rata split: sellers weighted by generator capacity, buyers by load.
    /// Zero-weight sides fall back to uniform shares.
    pub fn pro_rata(net: &Network, seller_area: &str, buyer_area: &str) -> Result<Self, DcError> {
        if seller_area == buyer_area {
            return Err(DcError::Transfer(
                "seller and buyer areas must differ".into(),
            ));
        }
        let area_of = |bus: BusId| net.bus(bus).map(|b| b.area.as_str());

        let sellers: Vec<usize> = net
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| area_of(g.bus) == Some(seller_area))
            .map(|(i, _)| i)
            .collect();
        if sellers.is_empty() {
            return Err(DcError::EmptyArea("generators", seller_area.into()));
        }
        let buyers: Vec<usize> = net
            .loads
            .iter()
            .enumerate()
            .filter(|(_, l)| area_of(l.bus) == Some(buyer_area))
            .map(|(i, _)| i)
            .collect();
        if buyers.is_empty() {
            return Err(DcError::EmptyArea("loads", buyer_area.into()));
        }

        let seller_weight = |i: &usize| net.generators[*i].p_max_mw.max(0.0);
        let buyer_weight = |i: &usize| net.loads[*i].p_mw.max(0.0);
        Ok(TransferDefinition {
            seller_area: seller_area.into(),
            buyer_area: buyer_area.into(),
            seller_participation: split(&sellers, seller_weight),
            buyer_participation: split(&buyers, buyer_weight),
        })
    }

    pub fn name(&self) -> String {
        format!("{}->{}", self.seller_area, self.buyer_area)
    }

    fn validate(&self, net: &Network) -> Result<(), DcError> {
        if self.seller_participation.is_empty() || self.buyer_participation.is_empty() {
            return Err(DcError::Transfer("empty participation list".into()));
        }
        for (side, list, len) in [
            ("seller", &self.seller_participation, net.generators.len()),
            ("buyer", &self.buyer_participation, net.loads.len()),
        ] {
            let mut sum = 0.0;
            for &(idx, frac) in list.iter() {
                if idx >= len {
                    return Err(DcError::Transfer(format!(
                        "{side} participation index {idx} out of range"
                    )));
                }
                if frac < 0.0 {
                    return Err(DcError::Transfer(format!(
                        "{side} participation fraction is negative"
                    )));
                }
                sum += frac;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(DcError::Transfer(format!(
                    "{side} participation sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Per-bus injection deltas (p.u.) for a transfer of `amount_mw`.
    fn injection_deltas(&self, net: &Network, amount_mw: f64) -> HashMap<BusId, f64> {
        let amount_pu = amount_mw / net.base_mva;
        let mut deltas: HashMap<BusId, f64> = HashMap::new();
        for &(idx, frac) in &self.seller_participation {
            *deltas.entry(net.generators[idx].bus).or_default() += frac * amount_pu;
        }
        for &(idx, frac) in &self.buyer_participation {
            *deltas.entry(net.loads[idx].bus).or_default() -= frac * amount_pu;
        }
        deltas
    }
}

fn split(indices: &[usize], weight: impl Fn(&usize) -> f64) -> Vec<(usize, f64)> {
    let total: f64 = indices.iter().map(&weight).sum();
    if total > 0.0 {
        indices.iter().map(|&i| (i, weight(&i) / total)).collect()
    } else {
        let share = 1.0 / indices.len() as f64;
        indices.iter().map(|&i| (i, share)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtcLimit {
    Bounded {
        atc_mw: f64,
        binding_branch: BranchId,
    },
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtcBranchDetail {
    pub branch: BranchId,
    pub base_flow_mw: f64,
    pub ptdf: f64,
    /// Largest feasible transfer before this branch alone hits its rating;
    /// None when the branch can never bind (unrated or insensitive).
    pub headroom_mw: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtcResult {
    pub limit: AtcLimit,
    pub branches: Vec<AtcBranchDetail>,
}

/// Branches with a transfer sensitivity below this never constrain ATC.
pub const PTDF_DEADBAND: f64 = 1e-6;

/// DC power flow of the base injections: solves `B'θ = P` with the slack
/// angle fixed at zero. Corrected phase shifters contribute both a scaled
/// susceptance `1/(K x)` and an equivalent shift injection at the same
/// effective reactance.
pub fn dc_solve(net: &Network, use_correction: bool) -> Result<DcSolution, DcError> {
    dc_solve_shifted(net, &HashMap::new(), use_correction)
}

/// DC power flow with a transfer of `amount_mw` superimposed on the base
/// injections.
pub fn dc_solve_with_transfer(
    net: &Network,
    transfer: &TransferDefinition,
    amount_mw: f64,
    use_correction: bool,
) -> Result<DcSolution, DcError> {
    transfer.validate(net)?;
    dc_solve_shifted(net, &transfer.injection_deltas(net, amount_mw), use_correction)
}

fn dc_solve_shifted(
    net: &Network,
    extra_pu: &HashMap<BusId, f64>,
    use_correction: bool,
) -> Result<DcSolution, DcError> {
    let slack = net.slack_buses();
    if slack.len() != 1 {
        return Err(DcError::SlackCount(slack.len()));
    }
    let order = net.bus_order();
    let index = net.bus_index();
    let n = order.len();
    let slack_idx = index[&slack[0]];

    // reduced index: every bus except the slack
    let reduced: Vec<usize> = (0..n).filter(|&i| i != slack_idx).collect();
    let pos: HashMap<usize, usize> = reduced.iter().enumerate().map(|(r, &i)| (i, r)).collect();
    let m = reduced.len();

    let mut injections = vec![0.0; n];
    for gen in &net.generators {
        injections[index[&gen.bus]] += gen.p_mw / net.base_mva;
    }
    for load in &net.loads {
        injections[index[&load.bus]] -= load.p_mw / net.base_mva;
    }
    for (&bus, &delta) in extra_pu {
        injections[index[&bus]] += delta;
    }

    let mut b_mat = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for &i in &reduced {
        rhs[pos[&i]] = injections[i];
    }

    struct Effective {
        from: usize,
        to: usize,
        w: f64,
        shift_rad: f64,
    }
    let mut effective: HashMap<BranchId, Effective> = HashMap::new();
    for branch in net.branches.iter().filter(|b| b.status) {
        let k = branch_factor(net, branch.id, use_correction)?;
        let x_eff = k * branch.x_pu;
        if x_eff == 0.0 {
            return Err(DcError::ZeroReactance(branch.id));
        }
        let w = 1.0 / x_eff;
        let f = index[&branch.from_bus];
        let t = index[&branch.to_bus];
        let shift_rad = branch.phase_shift_deg().to_radians();
        if let Some(&pf) = pos.get(&f) {
            b_mat[(pf, pf)] += w;
            rhs[pf] += shift_rad * w;
            if let Some(&pt) = pos.get(&t) {
                b_mat[(pf, pt)] -= w;
            }
        }
        if let Some(&pt) = pos.get(&t) {
            b_mat[(pt, pt)] += w;
            rhs[pt] -= shift_rad * w;
            if let Some(&pf) = pos.get(&f) {
                b_mat[(pt, pf)] -= w;
            }
        }
        effective.insert(
            branch.id,
            Effective {
                from: f,
                to: t,
                w,
                shift_rad,
            },
        );
    }

    let theta_reduced = if m == 0 {
        DVector::zeros(0)
    } else {
        solve_dense(b_mat, rhs).ok_or(DcError::Singular)?
    };
    let mut theta = vec![0.0; n];
    for (&i, &r) in &pos {
        theta[i] = theta_reduced[r];
    }

    let mut sorted: Vec<&crate::model::Branch> = net.branches.iter().collect();
    sorted.sort_by_key(|b| b.id);
    let flows = sorted
        .iter()
        .map(|branch| DcFlow {
            branch: branch.id,
            flow_mw: match effective.get(&branch.id) {
                Some(e) => (theta[e.from] - theta[e.to] - e.shift_rad) * e.w * net.base_mva,
                None => 0.0,
            },
        })
        .collect();

    let angles = order
        .iter()
        .enumerate()
        .map(|(i, &bus)| BusAngle {
            bus,
            theta_rad: theta[i],
        })
        .collect();

    Ok(DcSolution { angles, flows })
}

/// Sensitivity of each branch's MW flow to 1 MW of the composite transfer,
/// taken as the flow difference of two dc solves (base and base + 1 MW).
pub fn ptdf(
    net: &Network,
    transfer: &TransferDefinition,
    use_correction: bool,
) -> Result<Vec<(BranchId, f64)>, DcError> {
    let base = dc_solve(net, use_correction)?;
    let shifted = dc_solve_with_transfer(net, transfer, 1.0, use_correction)?;
    Ok(base
        .flows
        .iter()
        .zip(shifted.flows.iter())
        .map(|(b, s)| (b.branch, s.flow_mw - b.flow_mw))
        .collect())
}

/// Available transfer capability: the largest extra transfer (MW) that keeps
/// every rated branch within |flow| <= rating. Branches whose sensitivity is
/// inside [`PTDF_DEADBAND`] never bind; with no binding candidate the result
/// is unbounded.
pub fn compute_atc(
    net: &Network,
    transfer: &TransferDefinition,
    use_correction: bool,
) -> Result<AtcResult, DcError> {
    let base = dc_solve(net, use_correction)?;
    let sensitivities = ptdf(net, transfer, use_correction)?;

    let mut branches = Vec::with_capacity(base.flows.len());
    let mut best: Option<(f64, BranchId)> = None;
    for (flow, &(branch_id, s)) in base.flows.iter().zip(sensitivities.iter()) {
        debug_assert_eq!(flow.branch, branch_id);
        let branch = net.branch(branch_id).expect("branch exists");
        let headroom = if branch.status && branch.rating_mva > 0.0 && s.abs() >= PTDF_DEADBAND {
            let limit = if s > 0.0 {
                branch.rating_mva
            } else {
                -branch.rating_mva
            };
            Some(((limit - flow.flow_mw) / s).max(0.0))
        } else {
            None
        };
        if let Some(h) = headroom {
            if best.is_none_or(|(b, _)| h < b) {
                best = Some((h, branch_id));
            }
        }
        branches.push(AtcBranchDetail {
            branch: branch_id,
            base_flow_mw: flow.flow_mw,
            ptdf: s,
            headroom_mw: headroom,
        });
    }

    let limit = match best {
        Some((atc_mw, binding_branch)) => AtcLimit::Bounded {
            atc_mw,
            binding_branch,
        },
        None => AtcLimit::Unbounded,
    };
    Ok(AtcResult { limit, branches })
}
