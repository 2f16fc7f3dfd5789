//! Small least-squares helpers used by the tail classifier and decay fits.

/// Result of an ordinary least-squares fit `y ≈ X·coef`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coef: Vec<f64>,
    /// Coefficient of determination, clamped to `[0, 1]`.
    pub r_squared: f64,
    pub rms_residual: f64,
}

/// Least squares over rows of features. Solves the normal equations with
/// column scaling and partial pivoting; returns `None` when the system is
/// rank deficient or there are fewer rows than features.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<LinearFit> {
    let n = rows.len();
    let m = rows.first()?.len();
    if n < m || n != y.len() || m == 0 {
        return None;
    }
    // column scaling keeps the normal matrix well conditioned when one
    // feature spans many orders of magnitude
    let mut scale = vec![0.0f64; m];
    for row in rows {
        for (s, x) in scale.iter_mut().zip(row) {
            *s = s.max(x.abs());
        }
    }
    for s in scale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..m {
            let xi = row[i] / scale[i];
            for j in 0..m {
                a[i][j] += xi * row[j] / scale[j];
            }
            a[i][m] += xi * yi;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 * (1.0 + a[col][col].abs()) {
            return None;
        }
        a.swap(col, piv);
        for row in 0..m {
            if row != col {
                let factor = a[row][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (cell, &pv) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                    *cell -= factor * pv;
                }
            }
        }
    }
    let coef: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i] / scale[i]).collect();

    let mean = y.iter().sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let pred: f64 = row.iter().zip(&coef).map(|(x, c)| x * c).sum();
        ss_res += (yi - pred).powi(2);
        ss_tot += (yi - mean).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Some(LinearFit {
        coef,
        r_squared,
        rms_residual: (ss_res / n as f64).sqrt(),
    })
}

/// Fit `y ≈ slope·x + intercept`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![xi, 1.0]).collect();
    least_squares(&rows, y)
}

/// `ln(Σ exp(x_i))` without overflow; `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let rows: Vec<Vec<f64>> = (1..20)
            .map(|i| {
                let x = i as f64;
                vec![x * 100.0, x.ln(), 1.0]
            })
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.5 * r[0] - 2.0 * r[1] + 3.0).collect();
        let fit = least_squares(&rows, &y).unwrap();
        assert!((fit.coef[0] - 0.5).abs() < 1e-10);
        assert!((fit.coef[1] + 2.0).abs() < 1e-8);
        assert!((fit.coef[2] - 3.0).abs() < 1e-8);
        assert!(fit.r_squared > 0.999_999);
    }

    #[test]
    fn rank_deficient_is_none() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert!(least_squares(&rows, &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn log_sum_exp_handles_large_values() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
