use crate::describe::sample_sd;
use crate::StatError;
use serde::{Deserialize, Serialize};

/// A Gaussian kernel density estimate evaluated on an even grid.
/// Plot material only; distances are computed on raw samples by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub bandwidth: f64,
}

/// Silverman's rule of thumb: `0.9 * min(sd, IQR/1.34) * n^(-1/5)`.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64, StatError> {
    let sd = sample_sd(sample)?;
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 {
        sd.min(iqr / 1.34)
    } else {
        sd
    };
    Ok(0.9 * spread * (sample.len() as f64).powf(-0.2))
}

// Linear-interpolation quantile on a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Evaluate the Gaussian KDE of a sample on `points` grid nodes over
/// `[lo, hi]`. `bandwidth` defaults to Silverman's rule; degenerate
/// bandwidths fall back to 1.0 so single-value-heavy samples still render.
pub fn kde(
    sample: &[f64],
    lo: f64,
    hi: f64,
    points: usize,
    bandwidth: Option<f64>,
) -> Result<DensityCurve, StatError> {
    if sample.len() < 2 {
        return Err(StatError::TooFewSamples {
            needed: 2,
            got: sample.len(),
        });
    }
    if points < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(StatError::Degenerate(
            "kde grid needs at least 2 points and hi > lo".into(),
        ));
    }
    let mut h = match bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(sample)?,
    };
    if h.is_nan() || h <= 0.0 {
        h = 1.0;
    }

    let n = sample.len() as f64;
    let step = (hi - lo) / (points - 1) as f64;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * n);
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let x = lo + step * i as f64;
        let mut density = 0.0;
        for &v in sample {
            let z = (x - v) / h;
            density += (-0.5 * z * z).exp();
        }
        xs.push(x);
        ys.push(density * norm);
    }
    Ok(DensityCurve { xs, ys, bandwidth: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_integrates_to_one_on_a_wide_grid() {
        let sample = [10.0, 12.0, 30.0, 55.0, 55.0, 71.0, 90.0];
        let h = silverman_bandwidth(&sample).unwrap();
        let (lo, hi) = (-6.0 * h - 10.0, 100.0 + 6.0 * h + 10.0);
        let curve = kde(&sample, lo, hi, 4001, None).unwrap();
        let dx = curve.xs[1] - curve.xs[0];
        let integral: f64 = curve.ys.iter().sum::<f64>() * dx;
        assert!((integral - 1.0).abs() < 1e-3, "{integral}");
    }

    #[test]
    fn mode_tracks_a_heavy_value() {
        let sample = [20.0, 20.0, 20.0, 20.0, 20.0, 20.0, 70.0];
        let curve = kde(&sample, 0.0, 100.0, 1001, Some(2.0)).unwrap();
        let argmax = curve
            .ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| curve.xs[i])
            .unwrap();
        assert!((argmax - 20.0).abs() < 1.0, "{argmax}");
    }

    #[test]
    fn constant_sample_falls_back_to_a_unit_bandwidth() {
        let err = kde(&[5.0], 0.0, 10.0, 11, None).unwrap_err();
        assert!(matches!(err, StatError::TooFewSamples { .. }));
        let curve = kde(&[5.0, 5.0, 5.0], 0.0, 10.0, 11, None).unwrap();
        assert_eq!(curve.bandwidth, 1.0);
    }
}
