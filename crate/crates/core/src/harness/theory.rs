/// Asymptotic ratio between the regret bounds with and without the grid
/// options, ((2d − 2 + m² + m)d + m) / ((2d − 2)d) · √(n/T_n).
pub fn theoretical_ratio(d: usize, m: usize, n_over_tn: f64) -> f64 {
    let (d, m) = (d as f64, m as f64);
    ((2.0 * d - 2.0 + m * m + m) * d + m) / ((2.0 * d - 2.0) * d) * n_over_tn.sqrt()
}

/// Option length minimizing the ratio when T_n/n = (m + 1)/2, searched over
/// 1 ≤ m < d.
pub fn best_option_length(d: usize) -> usize {
    (1..d)
        .map(|m| (m, theoretical_ratio(d, m, 2.0 / (m as f64 + 1.0))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(m, _)| m)
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_options_are_neutral() {
        let r = theoretical_ratio(1000, 1, 1.0);
        assert!((r - 1.0).abs() < 2e-3);
    }

    #[test]
    fn minimizer_grows_with_side() {
        let ms: Vec<usize> = [10, 20, 40, 80].iter().map(|&d| best_option_length(d)).collect();
        assert!(ms.windows(2).all(|w| w[0] < w[1]), "{ms:?}");
    }
}
