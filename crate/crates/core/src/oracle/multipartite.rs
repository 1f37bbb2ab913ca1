use serde::Serialize;

use super::OracleError;

/// Bisection tolerance on `p`.
pub const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipartiteBound {
    pub parts: Vec<usize>,
    /// `p*_1, ..., p*_m`, with `p*_m = 1`.
    pub p_star: Vec<f64>,
    /// `|p*_j - p*_{j+1} (1 - p*_j)^{n_j}|` for `j < m`.
    pub residuals: Vec<f64>,
    /// `1 / p*_1`.
    pub bound: f64,
}

/// Root in `(0, 1)` of `p - c (1 - p)^k`, which is increasing in `p`,
/// negative at 0 and positive at 1.
fn root(c: f64, k: i32) -> f64 {
    let f = |p: f64| p - c * (1.0 - p).powi(k);
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upper bound `1 / p*_1` on the fractional DP-chromatic number of the
/// complete multipartite graph with the given part sizes, in the given order.
pub fn multipartite_bound(parts: &[usize]) -> Result<MultipartiteBound, OracleError> {
    if parts.is_empty() || parts.contains(&0) {
        return Err(OracleError::BadParts);
    }
    let m = parts.len();
    let mut p_star = vec![1.0; m];
    for j in (0..m - 1).rev() {
        p_star[j] = root(p_star[j + 1], parts[j] as i32);
    }
    let residuals = (0..m - 1)
        .map(|j| (p_star[j] - p_star[j + 1] * (1.0 - p_star[j]).powi(parts[j] as i32)).abs())
        .collect();
    Ok(MultipartiteBound {
        parts: parts.to_vec(),
        bound: 1.0 / p_star[0],
        p_star,
        residuals,
    })
}

/// Exploratory: the bound for every distinct ordering of the parts, best
/// first. The ordering is not part of the bound's statement.
pub fn multipartite_order_scan(parts: &[usize]) -> Result<Vec<MultipartiteBound>, OracleError> {
    let mut order = parts.to_vec();
    order.sort_unstable();
    let mut out = vec![multipartite_bound(&order)?];
    // next lexicographic permutation, skipping repeats
    while let Some(i) = (1..order.len()).rev().find(|&i| order[i - 1] < order[i]) {
        let j = (i..order.len())
            .rev()
            .find(|&j| order[j] > order[i - 1])
            .unwrap();
        order.swap(i - 1, j);
        order[i..].reverse();
        out.push(multipartite_bound(&order)?);
    }
    out.sort_by(|x, y| x.bound.total_cmp(&y.bound));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_part_golden_bound() {
        let want = 2.0 / (3.0 - 5f64.sqrt());
        for m in 1..8 {
            let b = multipartite_bound(&[2, m]).unwrap();
            assert!((b.bound - want).abs() < 1e-9);
            assert!(b.residuals.iter().all(|&r| r <= 1e-10));
        }
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(multipartite_bound(&[1]).unwrap().bound, 1.0);
        assert!((multipartite_bound(&[1, 1]).unwrap().bound - 2.0).abs() < 1e-9);
        assert!(multipartite_bound(&[]).is_err());
        assert!(multipartite_bound(&[2, 0]).is_err());
    }

    #[test]
    fn order_scan_covers_distinct_orders() {
        let scan = multipartite_order_scan(&[1, 2, 2]).unwrap();
        assert_eq!(scan.len(), 3);
        assert!(scan.windows(2).all(|w| w[0].bound <= w[1].bound));
    }
}
