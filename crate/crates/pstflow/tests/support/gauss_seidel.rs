//! Gauss-Seidel power flow oracle.
//!
//! Deliberately independent of the library's solver path: it stamps its own
//! admittance terms from the case data (including its own piecewise-linear
//! table lookup) and iterates the classic fixed-point update, so a defect in
//! the library's assembly or Newton iteration cannot cancel out here.

use num_complex::Complex64;
use pstflow::model::{BusKind, Network};
use std::collections::HashMap;

fn lerp_factor(points: &[(f64, f64)], angle: f64) -> f64 {
    if angle <= points[0].0 {
        return points[0].1;
    }
    if angle >= points[points.len() - 1].0 {
        return points[points.len() - 1].1;
    }
    for w in points.windows(2) {
        let ((a0, f0), (a1, f1)) = (w[0], w[1]);
        if angle <= a1 {
            return f0 + (angle - a0) * (f1 - f0) / (a1 - a0);
        }
    }
    unreachable!("angle inside table range")
}

fn build_admittance(net: &Network, use_correction: bool) -> Vec<Vec<Complex64>> {
    let order = net.bus_order();
    let index: HashMap<_, _> = order.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let n = order.len();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for br in net.branches.iter().filter(|b| b.status) {
        let mut k = 1.0;
        if use_correction {
            if let Some(id) = br.correction_table() {
                let table = net.correction_table(id).expect("table exists");
                k = lerp_factor(&table.points, br.phase_shift_deg());
            }
        }
        let z = Complex64::new(br.r_pu, br.x_pu) * k;
        let series = z.inv();
        let tap = br.tap_ratio();
        let t = Complex64::from_polar(tap, br.phase_shift_deg().to_radians());
        let (f, s) = (index[&br.from_bus], index[&br.to_bus]);
        let charge = Complex64::new(0.0, br.b_pu / 2.0);
        y[f][f] += series / (tap * tap) + charge;
        y[f][s] -= series / t.conj();
        y[s][f] -= series / t;
        y[s][s] += series + charge;
    }
    y
}

/// Fixed-point solve; voltages come back in ascending bus order.
/// Returns None if the sweep-to-sweep change never drops below `tol`.
pub fn gs_solve(
    net: &Network,
    use_correction: bool,
    tol: f64,
    max_sweeps: usize,
) -> Option<Vec<Complex64>> {
    let order = net.bus_order();
    let index: HashMap<_, _> = order.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let n = order.len();
    let y = build_admittance(net, use_correction);

    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for g in &net.generators {
        p[index[&g.bus]] += g.p_mw / net.base_mva;
    }
    for l in &net.loads {
        p[index[&l.bus]] -= l.p_mw / net.base_mva;
        q[index[&l.bus]] -= l.q_mvar / net.base_mva;
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

    let mut v: Vec<Complex64> = (0..n)
        .map(|i| match kind[i] {
            BusKind::Pq => Complex64::new(1.0, 0.0),
            _ => Complex64::new(setpoint[i], 0.0),
        })
        .collect();

    for _ in 0..max_sweeps {
        let mut delta = 0.0f64;
        for i in 0..n {
            match kind[i] {
                BusKind::Slack => continue,
                BusKind::Pq | BusKind::Pv => {
                    let injected: Complex64 = (0..n).map(|k| y[i][k] * v[k]).sum();
                    let q_i = match kind[i] {
                        // pv buses: reactive power floats, take it from the
                        // current iterate
                        BusKind::Pv => (v[i] * injected.conj()).im,
                        _ => q[i],
                    };
                    let others: Complex64 = (0..n)
                        .filter(|&k| k != i)
                        .map(|k| y[i][k] * v[k])
                        .sum();
                    let s = Complex64::new(p[i], -q_i);
                    let mut v_new = (s / v[i].conj() - others) / y[i][i];
                    if kind[i] == BusKind::Pv {
                        v_new = Complex64::from_polar(setpoint[i], v_new.arg());
                    }
                    delta = delta.max((v_new - v[i]).norm());
                    v[i] = v_new;
                }
            }
        }
        if delta < tol {
            return Some(v);
        }
    }
    None
}
