//! Small sample statistics used by the estimators.

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; `0` for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the intercept (`0` with two points or a perfect fit).
    pub intercept_se: f64,
}

/// Least squares line through `(x, y)`; `None` with fewer than two points or
/// a degenerate abscissa.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let intercept_se = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let s2 = rss / (n - 2) as f64;
        (s2 * (1.0 / n as f64 + mx * mx / sxx)).sqrt()
    } else {
        0.0
    };
    Some(LinearFit {
        intercept,
        slope,
        intercept_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.5, 0.25, 0.125, 0.0625];
        let y: Vec<f64> = x.iter().map(|t| 2.0 + 3.0 * t).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(f.intercept, 2.0, epsilon = 1e-12);
        assert_relative_eq!(f.slope, 3.0, epsilon = 1e-12);
        assert!(f.intercept_se < 1e-12);
    }

    #[test]
    fn standard_error_matches_hand_value() {
        // variance of 1..=4 is 5/3
        assert_relative_eq!(
            standard_error(&[1.0, 2.0, 3.0, 4.0]),
            (5.0f64 / 12.0).sqrt()
        );
        assert_eq!(standard_error(&[7.0]), 0.0);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
