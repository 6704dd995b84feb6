use super::EvalError;

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::DimensionMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(EvalError::TooFewPairs { found: xs.len() });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::DegenerateInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::DimensionMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((rho - 0.9487).abs() < 5e-5, "{rho}");
    }

    #[test]
    fn tie_ranks() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn four_point_pearson() {
        let cos = [0.1, 0.4, 0.2, 0.9];
        let human = [1.0, 5.0, 2.0, 8.0];
        assert!((spearman(&cos, &human).unwrap() - 1.0).abs() < 1e-15);
        // sxy = 3.3, sxx = 0.38, syy = 30
        let r = pearson(&cos, &human).unwrap();
        assert!((r - 3.3 / (0.38f64 * 30.0).sqrt()).abs() < 1e-12, "{r}");
        assert!((r - 0.97738).abs() < 5e-6);
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(EvalError::DegenerateInput)));
        assert!(matches!(pearson(&[1.0, 2.0], &[3.0, 3.0]), Err(EvalError::DegenerateInput)));
        assert!(matches!(pearson(&[1.0], &[3.0]), Err(EvalError::TooFewPairs { found: 1 })));
        assert!(matches!(pearson(&[1.0, 2.0], &[3.0]), Err(EvalError::DimensionMismatch { .. })));
    }
}
