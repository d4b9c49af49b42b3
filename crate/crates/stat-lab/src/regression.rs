use crate::StatError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// One fitted coefficient with its inference. The p-value is NaN on an
/// exact fit (zero residual variance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTerm {
    pub name: String,
    pub coef: f64,
    pub std_error: f64,
    pub t_stat: f64,
    #[serde(with = "crate::nullable_float")]
    pub p_value: f64,
}

/// An ordinary least squares fit (intercept always included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub terms: Vec<FitTerm>,
    pub n: usize,
    pub df_resid: usize,
    pub sigma2: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    pub fn term(&self, name: &str) -> Option<&FitTerm> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// Least-squares fit of `y` on the named factor columns plus an intercept,
/// solved by Householder QR. Standard errors come from `sigma^2 (X'X)^-1`
/// via the triangular factor; p-values are two-sided t tail probabilities
/// at `n - p` degrees of freedom. Rank deficiency is reported with the
/// offending column.
pub fn ols(names: &[&str], columns: &[Vec<f64>], y: &[f64]) -> Result<RegressionFit, StatError> {
    if names.len() != columns.len() {
        return Err(StatError::LengthMismatch(names.len(), columns.len()));
    }
    let n = y.len();
    let p = columns.len() + 1;
    if n < p + 1 {
        return Err(StatError::TooFewSamples { needed: p + 1, got: n });
    }
    for c in columns {
        if c.len() != n {
            return Err(StatError::LengthMismatch(c.len(), n));
        }
    }

    // Row-major design matrix with a leading intercept column.
    let mut x = vec![0.0; n * p];
    for row in 0..n {
        x[row * p] = 1.0;
        for (j, col) in columns.iter().enumerate() {
            x[row * p + j + 1] = col[row];
        }
    }
    let mut qty = y.to_vec();

    // Householder QR: transforms x into R (upper p x p block) and y into Q'y.
    let mut scale_max = 0.0f64;
    for j in 0..p {
        let mut norm2 = 0.0;
        for i in j..n {
            norm2 += x[i * p + j] * x[i * p + j];
        }
        let norm = norm2.sqrt();
        scale_max = scale_max.max(norm);
        if norm <= 1e-12 * scale_max.max(1.0) {
            return Err(StatError::RankDeficient {
                column: j,
                name: if j == 0 {
                    "intercept".to_string()
                } else {
                    names[j - 1].to_string()
                },
            });
        }
        let alpha = if x[j * p + j] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - j];
        v[0] = x[j * p + j] - alpha;
        for i in j + 1..n {
            v[i - j] = x[i * p + j];
        }
        let vnorm2: f64 = v.iter().map(|a| a * a).sum();
        if vnorm2 > 0.0 {
            for col in j..p {
                let mut dot = 0.0;
                for i in j..n {
                    dot += v[i - j] * x[i * p + col];
                }
                let f = 2.0 * dot / vnorm2;
                for i in j..n {
                    x[i * p + col] -= f * v[i - j];
                }
            }
            let mut dot = 0.0;
            for i in j..n {
                dot += v[i - j] * qty[i];
            }
            let f = 2.0 * dot / vnorm2;
            for i in j..n {
                qty[i] -= f * v[i - j];
            }
        }
        x[j * p + j] = alpha;
    }

    // Rank check on the R diagonal against the largest diagonal magnitude.
    let diag_max = (0..p).map(|j| x[j * p + j].abs()).fold(0.0f64, f64::max);
    for j in 0..p {
        if x[j * p + j].abs() < 1e-10 * diag_max {
            return Err(StatError::RankDeficient {
                column: j,
                name: if j == 0 {
                    "intercept".to_string()
                } else {
                    names[j - 1].to_string()
                },
            });
        }
    }

    // Back substitution: R beta = (Q'y)[0..p].
    let mut beta = vec![0.0; p];
    for j in (0..p).rev() {
        let mut acc = qty[j];
        for k in j + 1..p {
            acc -= x[j * p + k] * beta[k];
        }
        beta[j] = acc / x[j * p + j];
    }

    // Residuals and fit quality from the original data.
    let mut residuals = Vec::with_capacity(n);
    let mut rss = 0.0;
    for row in 0..n {
        let mut fitted = beta[0];
        for (j, col) in columns.iter().enumerate() {
            fitted += beta[j + 1] * col[row];
        }
        let r = y[row] - fitted;
        residuals.push(r);
        rss += r * r;
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let df_resid = n - p;
    let sigma2 = rss / df_resid as f64;

    // (X'X)^-1 = R^-1 R^-T from the triangular factor.
    let mut rinv = vec![0.0; p * p];
    for j in (0..p).rev() {
        rinv[j * p + j] = 1.0 / x[j * p + j];
        for i in (0..j).rev() {
            let mut acc = 0.0;
            for k in i + 1..=j {
                acc += x[i * p + k] * rinv[k * p + j];
            }
            rinv[i * p + j] = -acc / x[i * p + i];
        }
    }
    let xtx_inv_diag: Vec<f64> = (0..p)
        .map(|i| (i..p).map(|k| rinv[i * p + k] * rinv[i * p + k]).sum())
        .collect();

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64)
        .map_err(|e| StatError::Degenerate(e.to_string()))?;
    let mut terms = Vec::with_capacity(p);
    for j in 0..p {
        let se = (sigma2 * xtx_inv_diag[j]).sqrt();
        let t = if se > 0.0 { beta[j] / se } else { 0.0 };
        let p_value = if se > 0.0 {
            2.0 * (1.0 - t_dist.cdf(t.abs()))
        } else {
            f64::NAN
        };
        terms.push(FitTerm {
            name: if j == 0 {
                "intercept".to_string()
            } else {
                names[j - 1].to_string()
            },
            coef: beta[j],
            std_error: se,
            t_stat: t,
            p_value,
        });
    }

    Ok(RegressionFit {
        terms,
        n,
        df_resid,
        sigma2,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { f64::NAN },
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn exact_linear_data_is_recovered_exactly() {
        // y = 5 + 2 x1 - 3 x2
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let y: Vec<f64> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| 5.0 + 2.0 * a - 3.0 * b)
            .collect();
        let fit = ols(&["x1", "x2"], &[x1, x2], &y).unwrap();
        assert!(close(fit.term("intercept").unwrap().coef, 5.0, 1e-10));
        assert!(close(fit.term("x1").unwrap().coef, 2.0, 1e-10));
        assert!(close(fit.term("x2").unwrap().coef, -3.0, 1e-10));
        for r in &fit.residuals {
            assert!(close(*r, 0.0, 1e-10));
        }
        assert!(close(fit.r_squared, 1.0, 1e-12));
    }

    #[test]
    fn inference_matches_a_python_reference() {
        // numpy/scipy closed-form OLS on this fixed system.
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![3.1, 4.5, 4.8, 6.2, 6.8];
        let fit = ols(&["x"], &[x], &y).unwrap();
        let icept = fit.term("intercept").unwrap();
        let slope = fit.term("x").unwrap();
        assert!(close(icept.coef, 2.35, 1e-10), "{}", icept.coef);
        assert!(close(slope.coef, 0.91, 1e-10), "{}", slope.coef);
        assert!(close(slope.std_error, 0.09433981, 1e-7), "{}", slope.std_error);
        assert!(close(slope.t_stat, 9.64598071, 1e-7), "{}", slope.t_stat);
        assert!(close(slope.p_value, 0.00236526, 1e-7), "{}", slope.p_value);
        assert!(close(icept.p_value, 0.00489099, 1e-7), "{}", icept.p_value);
    }

    #[test]
    fn collinear_columns_report_the_offending_factor() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let y = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        match ols(&["x1", "x2"], &[x1, x2], &y) {
            Err(StatError::RankDeficient { name, .. }) => assert_eq!(name, "x2"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn too_small_systems_are_rejected() {
        assert!(matches!(
            ols(&["x"], &[vec![1.0, 2.0]], &[1.0, 2.0]),
            Err(StatError::TooFewSamples { .. })
        ));
    }
}
