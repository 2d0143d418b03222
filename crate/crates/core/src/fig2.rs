//! Reference curves: the three scenarios and the shot-noise limit at
//! kappa' = 10 kappa'', eta = 0.7, e^{2r} = 30, N = 1, normalized by kappa'/N
//! over Ω/kappa' in [0, 4].

use crate::curve::{CurveKind, SpectrumCurve};
use crate::error::{Error, Result};
use crate::io::{closed_form_curve, GridSpec};
use crate::params::{Scenario, SensorParams};

pub const DEFAULT_POINTS: usize = 401;

#[derive(Debug, Clone)]
pub struct Fig2Curves {
    pub grid: GridSpec,
    pub no_squeeze: SpectrumCurve,
    pub input_squeeze: SpectrumCurve,
    pub double_squeeze: SpectrumCurve,
    pub snl: SpectrumCurve,
}

impl Fig2Curves {
    pub fn all(&self) -> [&SpectrumCurve; 4] {
        [&self.no_squeeze, &self.input_squeeze, &self.double_squeeze, &self.snl]
    }
}

pub fn fig2_grid(points: usize) -> GridSpec {
    GridSpec { min: 0.0, max: 4.0, points }
}

/// Computes the four normalized curves and checks their ordering.
pub fn fig2_curves(points: usize) -> Result<Fig2Curves> {
    let params = SensorParams::fig2().validate()?;
    let grid = fig2_grid(points);
    let curve = |kind| closed_form_curve(kind, &params, &grid, true);
    let curves = Fig2Curves {
        grid,
        no_squeeze: curve(CurveKind::Scenario(Scenario::NoSqueeze))?,
        input_squeeze: curve(CurveKind::Scenario(Scenario::InputSqueeze))?,
        double_squeeze: curve(CurveKind::Scenario(Scenario::DoubleSqueezeOptimal))?,
        snl: curve(CurveKind::ShotNoiseLimit)?,
    };
    check_ordering(&curves.double_squeeze, &curves.input_squeeze, &curves.no_squeeze)?;
    Ok(curves)
}

/// Requires `low <= mid <= high` everywhere and strictly away from the grid ends.
pub fn check_ordering(low: &SpectrumCurve, mid: &SpectrumCurve, high: &SpectrumCurve) -> Result<()> {
    let n = low.len();
    for i in 0..n {
        let (a, b, c) = (low.values()[i], mid.values()[i], high.values()[i]);
        let interior = i > 0 && i + 1 < n;
        let ok = if interior { a < b && b < c } else { a <= b && b <= c };
        if !ok {
            return Err(Error::Ordering {
                omega: low.frequencies()[i],
                detail: format!("{} = {a}, {} = {b}, {} = {c}", low.kind().label(), mid.kind().label(), high.kind().label()),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snl_column_is_quarter_omega() {
        let c = fig2_curves(DEFAULT_POINTS).unwrap();
        for (w, s) in c.snl.iter() {
            assert_eq!(s, w / 4.0);
        }
    }

    #[test]
    fn ordering_violation_is_reported() {
        let c = fig2_curves(11).unwrap();
        let err = check_ordering(&c.no_squeeze, &c.input_squeeze, &c.double_squeeze).unwrap_err();
        assert!(matches!(err, Error::Ordering { .. }));
    }
}
