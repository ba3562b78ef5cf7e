use serde::{Deserialize, Serialize};

use super::{MetricValue, Unit};
use crate::error::{Error, Result};

pub(crate) const VARIANT: &str = "zwicker-composite";

/// Reference values the sharpness, roughness and fluctuation deviations are
/// measured from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnoyanceThresholds {
    pub s0: f64,
    pub r0: f64,
    pub f0: f64,
}

/// `PA = N·(1 + sqrt(((S−S0)² + (R−R0)² + (F−F0)²)/3))`.
pub fn annoyance(n: f64, s: f64, r: f64, f: f64, thresholds: &AnnoyanceThresholds) -> Result<MetricValue> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::param(format!("loudness must be finite and non-negative, got {n}")));
    }
    for (name, v) in [("sharpness", s), ("roughness", r), ("fluctuation", f)] {
        if !v.is_finite() {
            return Err(Error::param(format!("{name} must be finite, got {v}")));
        }
    }
    let ds = s - thresholds.s0;
    let dr = r - thresholds.r0;
    let df = f - thresholds.f0;
    let spread = ((ds * ds + dr * dr + df * df) / 3.0).sqrt();
    Ok(MetricValue::new(n * (1.0 + spread), Unit::Annoyance, VARIANT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case() {
        let pa = annoyance(2.0, 3.0, 0.0, 0.0, &AnnoyanceThresholds::default()).unwrap().value;
        assert!((pa - 2.0 * (1.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((pa - 5.4641).abs() < 1e-4);
    }

    #[test]
    fn zero_deviation_returns_loudness() {
        let t = AnnoyanceThresholds { s0: 1.7, r0: 0.3, f0: 0.05 };
        assert_eq!(annoyance(4.25, 1.7, 0.3, 0.05, &t).unwrap().value, 4.25);
        assert_eq!(annoyance(0.0, 9.0, 9.0, 9.0, &t).unwrap().value, 0.0);
    }

    #[test]
    fn signed_deviations_square_away() {
        let t = AnnoyanceThresholds { s0: 2.0, r0: 0.0, f0: 0.0 };
        let lo = annoyance(1.0, 1.0, 0.0, 0.0, &t).unwrap().value;
        let hi = annoyance(1.0, 3.0, 0.0, 0.0, &t).unwrap().value;
        assert_eq!(lo, hi);
    }

    #[test]
    fn rejects_negative_loudness() {
        assert!(matches!(annoyance(-0.1, 0.0, 0.0, 0.0, &AnnoyanceThresholds::default()), Err(Error::Parameter(_))));
        assert!(annoyance(1.0, f64::NAN, 0.0, 0.0, &AnnoyanceThresholds::default()).is_err());
    }
}
