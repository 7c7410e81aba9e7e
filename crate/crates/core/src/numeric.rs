/// Pairwise (cascade) summation; error grows with `log n` rather than `n`.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let values: Vec<f64> = (1..=10_000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&values), 50_005_000.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
