//! Brooks–Corey capillary pressure and Burdine relative permeabilities.

use crate::grid::MaterialProps;

/// Lower clamp on effective saturation; caps capillary pressure at
/// `pd · SE_MIN^(-1/λ)`.
pub const SE_MIN: f64 = 0.01;

#[inline]
pub fn effective_saturation(sw: f64, swr: f64, snr: f64) -> f64 {
    ((sw - swr) / (1.0 - swr - snr)).clamp(SE_MIN, 1.0)
}

#[inline]
pub fn capillary_pressure(se: f64, pd: f64, lambda: f64) -> f64 {
    pd * se.max(SE_MIN).powf(-1.0 / lambda)
}

/// `(krw, krn)` for effective saturation `se`.
#[inline]
pub fn rel_perm(se: f64, lambda: f64) -> (f64, f64) {
    let se = se.clamp(0.0, 1.0);
    let krw = se.powf((2.0 + 3.0 * lambda) / lambda);
    let krn = (1.0 - se).powi(2) * (1.0 - se.powf((2.0 + lambda) / lambda));
    (krw, krn)
}

/// Derivative of `krn` with respect to `se`.
#[inline]
pub fn d_krn_d_se(se: f64, lambda: f64) -> f64 {
    let e = (2.0 + lambda) / lambda;
    let se = se.clamp(0.0, 1.0);
    -2.0 * (1.0 - se) * (1.0 - se.powf(e)) - (1.0 - se).powi(2) * e * se.powf(e - 1.0)
}

/// Derivative magnitude of `pc` with respect to `se` (zero in the clamp).
#[inline]
pub fn d_pc_d_se(se: f64, pd: f64, lambda: f64) -> f64 {
    if se <= SE_MIN || se >= 1.0 {
        0.0
    } else {
        pd / lambda * se.powf(-1.0 / lambda - 1.0)
    }
}

/// Per-cell closure values for a TCE saturation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellClosure {
    pub se: f64,
    pub pc: f64,
    pub krw: f64,
    pub krn: f64,
}

#[inline]
pub fn evaluate(props: &MaterialProps, sn: f64) -> CellClosure {
    let se = effective_saturation(1.0 - sn, props.swr, props.snr);
    let (krw, krn) = rel_perm(se, props.lambda);
    CellClosure { se, pc: capillary_pressure(se, props.entry_pressure, props.lambda), krw, krn }
}

/// Entry-pressure interface condition: whether TCE may move from a cell with
/// capillary pressure `pc_up` and entry pressure `pd_up` into a cell with
/// entry pressure `pd_down`. Only entry into a finer (higher `pd`) medium
/// is restricted.
#[inline]
pub fn napl_entry_permitted(pc_up: f64, pd_up: f64, pd_down: f64) -> bool {
    pd_down <= pd_up || pc_up > pd_down
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn effective_saturation_examples() {
        assert_eq!(effective_saturation(1.0, 0.08, 0.08), 1.0);
        assert_eq!(effective_saturation(0.08, 0.08, 0.08), SE_MIN);
        assert!(rel(effective_saturation(0.54, 0.08, 0.08), 0.46 / 0.84) < 1e-14);
        assert!((effective_saturation(0.54, 0.08, 0.08) - 0.5476).abs() < 1e-4);
    }

    #[test]
    fn capillary_pressure_examples() {
        assert_eq!(capillary_pressure(1.0, 1300.0, 2.0), 1300.0);
        assert!(rel(capillary_pressure(0.25, 1300.0, 2.0), 2600.0) < 1e-14);
        assert!(rel(capillary_pressure(SE_MIN, 1300.0, 2.0), 13000.0) < 1e-14);
        assert!(rel(capillary_pressure(1e-6, 1300.0, 2.0), 13000.0) < 1e-14);
    }

    #[test]
    fn rel_perm_examples() {
        assert_eq!(rel_perm(1.0, 2.0), (1.0, 0.0));
        assert_eq!(rel_perm(0.0, 2.0), (0.0, 1.0));
        let (krw, krn) = rel_perm(0.5, 2.0);
        assert!(rel(krw, 0.0625) < 1e-14);
        assert!(rel(krn, 0.1875) < 1e-14);
    }

    #[test]
    fn krn_derivative_matches_finite_difference() {
        for &se in &[0.05, 0.3, 0.5, 0.8, 0.95] {
            let h = 1e-6;
            let fd = (rel_perm(se + h, 2.0).1 - rel_perm(se - h, 2.0).1) / (2.0 * h);
            assert!((d_krn_d_se(se, 2.0) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_cell_sits_at_entry_pressure() {
        let c = evaluate(&MaterialProps::clay(), 0.0);
        assert_eq!(c.pc, 3200.0);
        assert_eq!((c.krw, c.krn), (1.0, 0.0));
    }

    #[test]
    fn entry_condition_examples() {
        // sand at 2000 Pa over clay (3200 Pa)
        assert!(!napl_entry_permitted(2000.0, 1300.0, 3200.0));
        // upper sand at 1600 Pa over lower sand (1500 Pa)
        assert!(napl_entry_permitted(1600.0, 1300.0, 1500.0));
        // same medium or coarser receiver
        assert!(napl_entry_permitted(1300.0, 1300.0, 1300.0));
        assert!(napl_entry_permitted(3300.0, 3200.0, 1300.0));
    }
}
