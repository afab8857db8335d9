//! Aggregate scores over a methods x functions table of mean distances.
//!
//! Tables are indexed `[method][function]`.

/// Distances below this count as zero in the competitive ratio.
pub const ECR_FLOOR: f64 = 1e-12;
/// Cap on a single competitive ratio.
pub const ECR_CAP: f64 = 100.0;
/// Average ranks closer than this share a final rank.
pub const RANK_TIE_TOL: f64 = 1e-9;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (divisor `n - 1`); 0 for a single value.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Competitive ratio of one method on one function against the best method.
pub fn competitive_ratio(distance: f64, best: f64) -> f64 {
    match (distance < ECR_FLOOR, best < ECR_FLOOR) {
        (true, _) => 1.0,
        (false, true) => ECR_CAP,
        (false, false) => (distance / best).min(ECR_CAP),
    }
}

/// Empirical competitive ratio of every method: the mean over functions of
/// `min(100, d_m / d_best)`, with distances below [`ECR_FLOOR`] treated as
/// zero.
pub fn ecr(table: &[Vec<f64>]) -> Vec<f64> {
    let Some(n_functions) = table.first().map(Vec::len) else {
        return Vec::new();
    };
    let best: Vec<f64> = (0..n_functions)
        .map(|f| table.iter().map(|row| row[f]).fold(f64::INFINITY, f64::min))
        .collect();
    table
        .iter()
        .map(|row| {
            let total: f64 = row.iter().zip(&best).map(|(&d, &b)| competitive_ratio(d, b)).sum();
            total / n_functions as f64
        })
        .collect()
}

/// Ranks of `values` ascending, 1-based, with tied values sharing the mean of
/// the positions they occupy.
pub fn tie_averaged_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean over functions of each method's tie-averaged rank.
pub fn average_rank(table: &[Vec<f64>]) -> Vec<f64> {
    let Some(n_functions) = table.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut sums = vec![0.0; table.len()];
    for f in 0..n_functions {
        let column: Vec<f64> = table.iter().map(|row| row[f]).collect();
        for (s, r) in sums.iter_mut().zip(tie_averaged_ranks(&column)) {
            *s += r;
        }
    }
    sums.iter().map(|s| s / n_functions as f64).collect()
}

/// Competition ranking of average ranks: one plus the number of methods with
/// a strictly better average, so ties share the lower ordinal (1, 1, 3).
pub fn final_rank(avg_rank: &[f64]) -> Vec<usize> {
    avg_rank
        .iter()
        .map(|&a| 1 + avg_rank.iter().filter(|&&b| b < a - RANK_TIE_TOL).count())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_conventions() {
        assert_eq!(sample_std(&[3.0]), 0.0);
        assert!((sample_std(&[1.0, 2.0, 3.0, 4.0]) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean(&[1.0, 2.0, 6.0]), 3.0);
    }

    #[test]
    fn ecr_examples() {
        assert_eq!(ecr(&[vec![0.3, 1e-20, 5.0]]), vec![1.0]);
        let two = ecr(&[vec![250.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(two, vec![50.5, 1.0]);
        let three = ecr(&[vec![1.0, 2.0, 4.0], vec![1.0, 1.0, 1.0]]);
        assert!((three[0] - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ecr_floor_rules() {
        assert_eq!(competitive_ratio(1e-13, 1e-14), 1.0);
        assert_eq!(competitive_ratio(1e-3, 0.0), 100.0);
        assert_eq!(competitive_ratio(1e-3, 1e-13), 100.0);
        assert_eq!(competitive_ratio(1e4, 1.0), 100.0);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(tie_averaged_ranks(&[0.5, 0.5]), vec![1.5, 1.5]);
        assert_eq!(tie_averaged_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let table = [vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        let avg = average_rank(&table);
        assert_eq!(avg, vec![2.0, 2.0, 2.0]);
        assert_eq!(final_rank(&avg), vec![1, 1, 1]);
        assert_eq!(final_rank(&[1.5, 1.5, 3.0]), vec![1, 1, 3]);
    }

    #[test]
    fn best_everywhere_ranks_first() {
        let table = [vec![0.1, 0.2, 0.0], vec![1.0, 2.0, 3.0], vec![4.0, 0.5, 6.0]];
        assert_eq!(average_rank(&table)[0], 1.0);
        assert_eq!(final_rank(&average_rank(&table))[0], 1);
        assert_eq!(ecr(&table)[0], 1.0);
    }
}
