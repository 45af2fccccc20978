use super::{CurveKind, ExplanationCurve};
use crate::data::ColumnKind;
use crate::error::{Error, Result};
use crate::stats;

/// Importance of a feature as the flatness of its PDP: the sample variance
/// of the curve for numeric features, the range divided by four for
/// categorical ones.
pub fn ipd_importance(curve: &ExplanationCurve, kind: &ColumnKind) -> Result<f64> {
    if curve.kind != CurveKind::Pdp {
        return Err(Error::invalid(
            "IPD is defined on partial dependence curves",
        ));
    }
    let values = curve
        .aggregate()
        .ok_or_else(|| Error::invalid("PDP curve has no aggregate values"))?;
    match kind {
        ColumnKind::Numeric => {
            if values.len() < 2 {
                return Err(Error::UndefinedStatistic(
                    "variance of a single-point curve is undefined".into(),
                ));
            }
            Ok(stats::sample_variance(values))
        }
        ColumnKind::Categorical { .. } => {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((max - min) / 4.0)
        }
    }
}
