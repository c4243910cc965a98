//! Pearson χ² tests and binomial bounds.

use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(stat)
}

/// p-value of the goodness-of-fit test of `counts` against the uniform law
/// over `counts.len()` categories.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 || counts.len() < 2 {
        return 1.0;
    }
    let expected = n as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    chi_square_sf(stat, counts.len() - 1)
}

/// p-value of the independence test on an `r × c` contingency table.
/// Rows or columns with zero total are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> f64 {
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r.get(j).copied().unwrap_or(0)).sum::<u64>() as f64)
        .collect();
    let n: f64 = row_sums.iter().sum();
    let live_rows = row_sums.iter().filter(|&&s| s > 0.0).count();
    let live_cols = col_sums.iter().filter(|&&s| s > 0.0).count();
    if n == 0.0 || live_rows < 2 || live_cols < 2 {
        return 1.0;
    }
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, cs) in col_sums.iter().enumerate() {
            let e = row_sums[i] * cs / n;
            if e > 0.0 {
                let o = row.get(j).copied().unwrap_or(0) as f64;
                stat += (o - e).powi(2) / e;
            }
        }
    }
    chi_square_sf(stat, (live_rows - 1) * (live_cols - 1))
}

/// `|k/n − p|` in units of the binomial standard deviation.
pub fn binomial_z(k: u64, n: u64, p: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    if sigma == 0.0 {
        return if (k as f64 / n as f64 - p).abs() == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (k as f64 / n as f64 - p).abs() / sigma
}
