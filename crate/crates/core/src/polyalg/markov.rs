use super::linsolve::solve_real;
use super::matrix::RealMatrix;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Checks that every row is a probability vector within `tol`.
pub fn check_row_stochastic(p: &RealMatrix, tol: f64) -> Result<()> {
    for (i, row) in p.rows().enumerate() {
        if let Some(j) = row.iter().position(|&x| x < 0.0) {
            return Err(Error::Validation(format!(
                "negative transition probability {} at ({i}, {j})",
                row[j]
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::Validation(format!("row {i} sums to {s}, not 1")));
        }
    }
    Ok(())
}

fn reach_all(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && edge(i, j) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Irreducibility of the positivity pattern of `p` (strong connectivity).
pub fn is_irreducible(p: &RealMatrix) -> bool {
    let n = p.dim();
    n == 0 || (reach_all(n, |i, j| p[(i, j)] > 0.0) && reach_all(n, |i, j| p[(j, i)] > 0.0))
}

/// Stationary distribution `d^T P = d^T`, `d^T e = 1` of an irreducible
/// row-stochastic matrix, by a direct solve with one balance equation
/// replaced by the normalization.
pub fn stationary_distribution(p: &RealMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = p.dim();
    if n == 0 {
        return Err(Error::Dimension("empty transition matrix".into()));
    }
    check_row_stochastic(p, tol.stochastic)?;
    // Rows of P^T - I sum to zero, and for an irreducible chain that is the
    // only dependency, so dropping any one of them leaves a full-rank system.
    let mut a = p.transpose().sub(&RealMatrix::identity(n));
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut d = solve_real(&a, &rhs, tol.pivot).map_err(|e| match e {
        Error::Singular { pivot, column } => Error::Structure(format!(
            "balance equations have rank deficiency > 1 (pivot {pivot:e} at column {column}); chain is reducible"
        )),
        other => other,
    })?;
    // One step of iterative refinement.
    let ad = a.matvec(&d);
    let r: Vec<f64> = rhs.iter().zip(&ad).map(|(b, x)| b - x).collect();
    if let Ok(corr) = solve_real(&a, &r, tol.pivot) {
        for (x, c) in d.iter_mut().zip(corr) {
            *x += c;
        }
    }
    if let Some(i) = d.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Structure(format!(
            "stationary weight of state {i} is {} (not strictly positive)",
            d[i]
        )));
    }
    let s: f64 = d.iter().sum();
    d.iter_mut().for_each(|x| *x /= s);
    let dp = p.vecmat(&d);
    let res = dp.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if res > tol.stationary_residual {
        return Err(Error::Inconsistent(format!(
            "stationary residual {res:e} exceeds {:e}",
            tol.stationary_residual
        )));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_chain_is_uniform() {
        let p = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = stationary_distribution(&p, &Tolerances::default()).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rank_one_chain_returns_its_row() {
        let w = [0.1, 0.2, 0.3, 0.4];
        let p = RealMatrix::from_fn(4, |_, j| w[j]);
        let d = stationary_distribution(&p, &Tolerances::default()).unwrap();
        for (a, b) in d.iter().zip(w) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn reducible_chain_rejected() {
        let p = RealMatrix::identity(3);
        assert!(!is_irreducible(&p));
        assert!(matches!(
            stationary_distribution(&p, &Tolerances::default()),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn transient_state_rejected() {
        // State 0 leaks into the closed class {1, 2}.
        let p = RealMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(!is_irreducible(&p));
        assert!(stationary_distribution(&p, &Tolerances::default()).is_err());
    }

    #[test]
    fn non_stochastic_rejected() {
        let p = RealMatrix::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            check_row_stochastic(&p, 1e-12),
            Err(Error::Validation(_))
        ));
    }
}
