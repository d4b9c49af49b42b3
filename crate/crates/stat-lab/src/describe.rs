use crate::StatError;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Mean, summed in sorted order: permutation-invariant to the bit.
pub fn mean(xs: &[f64]) -> Result<f64, StatError> {
    if xs.is_empty() {
        return Err(StatError::EmptySample);
    }
    Ok(sorted(xs).iter().sum::<f64>() / xs.len() as f64)
}

/// Unbiased (n-1) sample standard deviation.
pub fn sample_sd(xs: &[f64]) -> Result<f64, StatError> {
    if xs.len() < 2 {
        return Err(StatError::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let m = mean(xs)?;
    let ss: f64 = sorted(xs).iter().map(|x| (x - m) * (x - m)).sum();
    Ok((ss / (xs.len() - 1) as f64).sqrt())
}

/// Adjusted Fisher-Pearson standardized moment coefficient
/// `G1 = g1 * sqrt(n(n-1)) / (n-2)` with `g1 = m3 / m2^(3/2)`.
/// Undefined (error) for n < 3 or zero variance.
pub fn skewness(xs: &[f64]) -> Result<f64, StatError> {
    let n = xs.len();
    if n < 3 {
        return Err(StatError::TooFewSamples { needed: 3, got: n });
    }
    let m = mean(xs)?;
    let s = sorted(xs);
    let m2: f64 = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    let m3: f64 = s.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n as f64;
    if m2 == 0.0 {
        return Err(StatError::Degenerate("zero variance".into()));
    }
    let g1 = m3 / m2.powf(1.5);
    let n = n as f64;
    Ok(g1 * (n * (n - 1.0)).sqrt() / (n - 2.0))
}

/// Fraction of exact zeros in an integer guess sample.
pub fn zero_rate(guesses: &[i64]) -> Result<f64, StatError> {
    if guesses.is_empty() {
        return Err(StatError::EmptySample);
    }
    Ok(guesses.iter().filter(|g| **g == 0).count() as f64 / guesses.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_is_permutation_invariant_exactly() {
        let a = [0.1, 0.7, 13.0, 2.000000001, 5.5, 0.3];
        let mut b = a;
        b.reverse();
        b.swap(1, 4);
        assert_eq!(mean(&a).unwrap().to_bits(), mean(&b).unwrap().to_bits());
    }

    #[test]
    fn symmetric_sample_has_zero_skewness() {
        assert_eq!(skewness(&[10.0, 20.0, 30.0]).unwrap(), 0.0);
    }

    #[test]
    fn known_skewness_value() {
        // scipy.stats.skew([1,2,3,4,10], bias=False)
        let got = skewness(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert!((got - 1.6970562748477143).abs() < 1e-12, "{got}");
    }

    #[test]
    fn degenerate_and_short_samples_error() {
        assert!(matches!(
            skewness(&[5.0, 5.0, 5.0]),
            Err(StatError::Degenerate(_))
        ));
        assert!(matches!(
            skewness(&[1.0, 2.0]),
            Err(StatError::TooFewSamples { .. })
        ));
        assert!(sample_sd(&[1.0]).is_err());
        assert!(mean(&[]).is_err());
    }

    #[test]
    fn zero_rates() {
        assert_eq!(zero_rate(&[0, 0, 0, 0]).unwrap(), 1.0);
        assert_eq!(zero_rate(&[0, 5, 10, 0]).unwrap(), 0.5);
        assert_eq!(zero_rate(&[7]).unwrap(), 0.0);
        assert!(zero_rate(&[]).is_err());
    }
}
