//! Bus admittance matrix assembly, including the asymmetric two-port stamp
//! for phase-shifting transformers with optional impedance correction.

use crate::correction::interpolate_factor;
use crate::model::{BranchId, BusId, Network};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum YbusError {
    #[error("zero series impedance")]
    ZeroSeriesImpedance,
    #[error("branch {branch}: zero series impedance")]
    BranchZeroImpedance { branch: BranchId },
    #[error("non-positive tap ratio {0}")]
    NonPositiveTap(f64),
    #[error("non-positive correction factor {0}")]
    NonPositiveFactor(f64),
    #[error("branch {branch}: unknown correction table '{table}'")]
    UnknownTable { branch: BranchId, table: String },
    #[error("zero line reactance")]
    ZeroReactance,
}

/// 2x2 two-port admittance entries of one branch; side i is the from bus.
///
/// For a plain line `y_ik == y_ki`; a nonzero phase shift makes the pair
/// conjugate-asymmetric with `arg(y_ik) - arg(y_ki) = 2φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchStamp {
    pub y_ii: Complex64,
    pub y_ik: Complex64,
    pub y_ki: Complex64,
    pub y_kk: Complex64,
}

/// Series stamp of a (possibly phase-shifting) transformer branch.
///
/// With `y = 1 / (k * (r + jx))` and `t = tap * e^{jφ}`:
/// `y_ii = y/tap²`, `y_ik = -y/conj(t)`, `y_ki = -y/t`, `y_kk = y`.
/// A plain line is the special case `tap = 1, φ = 0, k = 1`.
pub fn pst_branch_admittance(
    r_pu: f64,
    x_pu: f64,
    tap_ratio: f64,
    phase_shift_deg: f64,
    factor: f64,
) -> Result<BranchStamp, YbusError> {
    if r_pu * r_pu + x_pu * x_pu == 0.0 {
        return Err(YbusError::ZeroSeriesImpedance);
    }
    if tap_ratio <= 0.0 {
        return Err(YbusError::NonPositiveTap(tap_ratio));
    }
    if factor <= 0.0 {
        return Err(YbusError::NonPositiveFactor(factor));
    }
    let z = Complex64::new(r_pu, x_pu) * factor;
    let y = z.inv();
    let t = Complex64::from_polar(tap_ratio, phase_shift_deg.to_radians());
    Ok(BranchStamp {
        y_ii: y / (tap_ratio * tap_ratio),
        y_ik: -y / t.conj(),
        y_ki: -y / t,
        y_kk: y,
    })
}

/// Sparse complex admittance matrix over the network's ascending bus order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmittanceMatrix {
    order: Vec<BusId>,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl AdmittanceMatrix {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn bus_order(&self) -> &[BusId] {
        &self.order
    }

    pub fn index_of(&self, bus: BusId) -> Option<usize> {
        self.order.binary_search(&bus).ok()
    }

    /// Entry by matrix index; absent entries are zero.
    pub fn at(&self, i: usize, k: usize) -> Complex64 {
        self.entries
            .get(&(i, k))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Entry by bus ids.
    pub fn get(&self, bus_i: BusId, bus_k: BusId) -> Option<Complex64> {
        Some(self.at(self.index_of(bus_i)?, self.index_of(bus_k)?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Complex64)> {
        self.entries.iter()
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.n();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (&(i, k), &v) in &self.entries {
            m[i][k] = v;
        }
        m
    }

    /// Text dump: one `i k re im` row per stored entry, sorted by (i, k) bus
    /// ids, 12 significant digits. Reproducible byte-for-byte.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (&(i, k), &v) in &self.entries {
            out.push_str(&format!(
                "{} {} {:.11e} {:.11e}\n",
                self.order[i], self.order[k], v.re, v.im
            ));
        }
        out
    }

    fn add(&mut self, i: usize, k: usize, v: Complex64) {
        *self
            .entries
            .entry((i, k))
            .or_insert(Complex64::new(0.0, 0.0)) += v;
    }
}

/// Assemble the bus admittance matrix.
///
/// Out-of-service branches contribute nothing; line charging adds `j*b/2` to
/// each end's diagonal. When `use_correction` is set and a branch names a
/// table, the series impedance is pre-scaled by the table factor at the
/// branch's phase shift.
pub fn assemble_ybus(net: &Network, use_correction: bool) -> Result<AdmittanceMatrix, YbusError> {
    let order = net.bus_order();
    let index = net.bus_index();
    let mut matrix = AdmittanceMatrix {
        order,
        entries: BTreeMap::new(),
    };

    for branch in net.branches.iter().filter(|b| b.status) {
        if branch.r_pu * branch.r_pu + branch.x_pu * branch.x_pu == 0.0 {
            return Err(YbusError::BranchZeroImpedance { branch: branch.id });
        }
        let factor = branch_factor(net, branch.id, use_correction)?;
        let stamp = pst_branch_admittance(
            branch.r_pu,
            branch.x_pu,
            branch.tap_ratio(),
            branch.phase_shift_deg(),
            factor,
        )?;
        let i = index[&branch.from_bus];
        let k = index[&branch.to_bus];
        let charging = Complex64::new(0.0, branch.b_pu / 2.0);
        matrix.add(i, i, stamp.y_ii + charging);
        matrix.add(i, k, stamp.y_ik);
        matrix.add(k, i, stamp.y_ki);
        matrix.add(k, k, stamp.y_kk + charging);
    }

    Ok(matrix)
}

/// Correction factor in effect for a branch: the table interpolated at the
/// branch's own phase shift when correction is on and a table is named,
/// otherwise 1.
pub fn branch_factor(
    net: &Network,
    branch: BranchId,
    use_correction: bool,
) -> Result<f64, YbusError> {
    let br = net.branch(branch).expect("branch exists");
    if !use_correction {
        return Ok(1.0);
    }
    match br.correction_table() {
        None => Ok(1.0),
        Some(id) => match net.correction_table(id) {
            Some(table) => Ok(interpolate_factor(table, br.phase_shift_deg()).factor),
            None => Err(YbusError::UnknownTable {
                branch,
                table: id.to_string(),
            }),
        },
    }
}

/// Real power transferred over a lossless line:
/// `v_i * v_k / x_line * sin(theta_ik)`.
pub fn line_real_power(
    v_i: f64,
    v_k: f64,
    x_line: f64,
    theta_ik_deg: f64,
) -> Result<f64, YbusError> {
    if x_line == 0.0 {
        return Err(YbusError::ZeroReactance);
    }
    Ok(v_i * v_k / x_line * theta_ik_deg.to_radians().sin())
}
