//! Impedance correction factors: piecewise-linear table lookup over phase
//! angle, and the IEC 60909 closed-form factor for transformers.

use crate::model::CorrectionTable;
use num_complex::Complex64;
use thiserror::Error;

/// Result of a table lookup. `clamped` is set when the requested angle lies
/// outside the table range and the end factor was used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionEvaluation {
    pub angle_deg: f64,
    pub factor: f64,
    pub clamped: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum CorrectionError {
    #[error("negative transformer reactance {0}")]
    NegativeReactance(f64),
    #[error("non-positive voltage factor {0}")]
    NonPositiveVoltageFactor(f64),
    #[error("non-positive transformer rating: {0}")]
    NonPositiveRating(f64),
    #[error("non-positive correction factor {0}")]
    NonPositiveFactor(f64),
}

/// Evaluate a correction table at `angle_deg`.
///
/// Breakpoints are returned exactly; between breakpoints the factor is linear;
/// outside the table range the end factor is held (clamped, not extrapolated).
pub fn interpolate_factor(table: &CorrectionTable, angle_deg: f64) -> CorrectionEvaluation {
    let points = &table.points;
    debug_assert!(points.len() >= 2, "table '{}' has too few points", table.id);

    let (first, last) = (points[0], points[points.len() - 1]);
    if angle_deg < first.0 {
        return CorrectionEvaluation {
            angle_deg,
            factor: first.1,
            clamped: true,
        };
    }
    if angle_deg > last.0 {
        return CorrectionEvaluation {
            angle_deg,
            factor: last.1,
            clamped: true,
        };
    }

    // Exact hit first, so breakpoint factors survive with zero rounding.
    match points.binary_search_by(|&(a, _)| a.partial_cmp(&angle_deg).unwrap()) {
        Ok(i) => CorrectionEvaluation {
            angle_deg,
            factor: points[i].1,
            clamped: false,
        },
        Err(i) => {
            let (a0, f0) = points[i - 1];
            let (a1, f1) = points[i];
            let factor = f0 + (angle_deg - a0) * (f1 - f0) / (a1 - a0);
            CorrectionEvaluation {
                angle_deg,
                factor,
                clamped: false,
            }
        }
    }
}

/// IEC 60909 transformer impedance correction factor
/// `0.95 * c_max / (1 + 0.6 * x_t)`.
pub fn iec_correction_factor(x_t: f64, c_max: f64) -> Result<f64, CorrectionError> {
    if x_t < 0.0 {
        return Err(CorrectionError::NegativeReactance(x_t));
    }
    if c_max <= 0.0 {
        return Err(CorrectionError::NonPositiveVoltageFactor(c_max));
    }
    Ok(0.95 * c_max / (1.0 + 0.6 * x_t))
}

/// Convert an ohmic transformer reactance to per unit on its own rating:
/// `x_ohm * s_rt / v_rt^2` with s_rt in MVA and v_rt in kV (the 10^6 SI
/// scale factors cancel).
pub fn per_unit_reactance(x_ohm: f64, s_rt_mva: f64, v_rt_kv: f64) -> Result<f64, CorrectionError> {
    if s_rt_mva <= 0.0 {
        return Err(CorrectionError::NonPositiveRating(s_rt_mva));
    }
    if v_rt_kv <= 0.0 {
        return Err(CorrectionError::NonPositiveRating(v_rt_kv));
    }
    Ok(x_ohm * s_rt_mva / (v_rt_kv * v_rt_kv))
}

/// Scale a complex series impedance by a correction factor (both parts).
pub fn corrected_impedance(z: Complex64, k: f64) -> Result<Complex64, CorrectionError> {
    if k <= 0.0 {
        return Err(CorrectionError::NonPositiveFactor(k));
    }
    Ok(z * k)
}

/// Nine-breakpoint factory table spanning ±152°, used across the test suite.
#[cfg(test)]
pub(crate) fn sample_table() -> CorrectionTable {
    CorrectionTable {
        id: "sample".into(),
        points: vec![
            (-152.0, 1.0),
            (-121.0, 0.62),
            (-85.0, 0.37),
            (-42.0, 0.21),
            (0.0, 0.15),
            (42.0, 0.21),
            (85.0, 0.37),
            (121.0, 0.62),
            (152.0, 1.0),
        ],
    }
}
