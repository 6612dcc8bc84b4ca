//! Banded Cholesky factorization for symmetric Toeplitz matrices given by an
//! autocorrelation profile.
//!
//! The sampled-autocorrelation Gram matrix G with entries G[i][j] = g[|i - j|]
//! is symmetric, positive semidefinite and banded (band width = profile length
//! minus one). Cholesky preserves the band, which is what bounds the memory of
//! the whitened detection model: with G = L L^T and J the index-reversal
//! permutation, U = J L J is upper banded and G = U U^T, so solving U z = y
//! whitens while keeping the signal model causal.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CholeskyError {
    /// A pivot went non-positive even after the diagonal jitter.
    NotPositiveDefinite { row: usize },
    /// Empty profile or zero dimension.
    EmptyInput,
}

impl fmt::Display for CholeskyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CholeskyError::NotPositiveDefinite { row } => {
                write!(f, "matrix is not positive definite (pivot at row {} not positive)", row)
            }
            CholeskyError::EmptyInput => write!(f, "empty profile or zero matrix dimension"),
        }
    }
}

impl std::error::Error for CholeskyError {}

/// Lower Cholesky factor of a banded symmetric Toeplitz matrix, band storage.
///
/// `rows[i][d]` holds L[i][i - d] for d in 0..=min(i, bandwidth).
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    w: usize,
    rows: Vec<Vec<f64>>,
}

/// Factor G = L L^T where G[i][j] = g[|i - j|] (zero beyond the profile).
///
/// `jitter` is added to every diagonal entry before factoring; pass a small
/// positive value (1e-9 at unit g[0] scale) to absorb the slight indefiniteness
/// a truncated autocorrelation can have.
pub fn cholesky_from_profile(g: &[f64], n: usize, jitter: f64) -> Result<BandCholesky, CholeskyError> {
    if g.is_empty() || n == 0 {
        return Err(CholeskyError::EmptyInput);
    }
    let w = g.len() - 1;
    let gram = |i: usize, j: usize| -> f64 {
        let lag = i.abs_diff(j);
        let mut v = if lag <= w { g[lag] } else { 0.0 };
        if lag == 0 {
            v += jitter;
        }
        v
    };

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(w);
        let mut row = vec![0.0; i - lo + 1];
        for j in lo..=i {
            // sum_k L[i][k] * L[j][k] for k < j, restricted to both bands
            let klo = lo.max(j.saturating_sub(w));
            let mut sum = 0.0;
            for k in klo..j {
                let li_k = row[i - k];
                // Row i is still being built, so the diagonal case reads from it.
                let lj_k = if j == i { li_k } else { rows[j][j - k] };
                sum += li_k * lj_k;
            }
            if j < i {
                let piv = rows[j][0];
                row[i - j] = (gram(i, j) - sum) / piv;
            } else {
                let d = gram(i, i) - sum;
                if d <= 0.0 || !d.is_finite() {
                    return Err(CholeskyError::NotPositiveDefinite { row: i });
                }
                row[0] = d.sqrt();
            }
        }
        rows.push(row);
    }
    Ok(BandCholesky { n, w, rows })
}

impl BandCholesky {
    pub fn n(&self) -> usize {
        self.n
    }

    /// One-sided band width of the factor (same as the input profile's).
    pub fn bandwidth(&self) -> usize {
        self.w
    }

    /// L[i][i - d]; zero outside the band.
    pub fn lower(&self, i: usize, d: usize) -> f64 {
        if d <= self.w && d <= i {
            self.rows[i][d]
        } else {
            0.0
        }
    }

    /// Entry U[k - d][k] of the reversed factor U = J L J (G = U U^T).
    ///
    /// Row k of U^T holds the causal whitened-model taps: z_k depends on
    /// symbols k, k-1, ..., k-d through these coefficients.
    pub fn reversed_upper(&self, k: usize, d: usize) -> f64 {
        if d > k || d > self.w {
            return 0.0;
        }
        // U[i][j] = L[n-1-i][n-1-j]; with i = k - d, j = k this is
        // L[n-1-k+d][(n-1-k+d) - (n-1-k)] = rows[n-1-k+d][d].
        self.rows[self.n - 1 - k + d][d]
    }

    /// y = L x (used to color white noise to covariance L L^T).
    pub fn color(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = 0.0;
            for (d, &l) in self.rows[i].iter().enumerate() {
                s += l * x[i - d];
            }
            y[i] = s;
        }
        y
    }

    /// Solve U z = y with U = J L J (back substitution from the last sample).
    pub fn solve_reversed_upper(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        let mut z = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            let mut s = y[i];
            let dmax = (self.n - 1 - i).min(self.w);
            for d in 1..=dmax {
                // U[i][i + d] = L[n-1-i][d]
                s -= self.rows[self.n - 1 - i][d] * z[i + d];
            }
            z[i] = s / self.rows[self.n - 1 - i][0];
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense reconstruction oracle: (L L^T)[i][j] from the band rows.
    fn reconstruct(c: &BandCholesky, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let mut sum = 0.0;
        for k in 0..=j {
            sum += c.lower(i, i - k) * c.lower(j, j - k);
        }
        sum
    }

    fn gram(g: &[f64], i: usize, j: usize) -> f64 {
        let lag = i.abs_diff(j);
        if lag < g.len() {
            g[lag]
        } else {
            0.0
        }
    }

    #[test]
    fn reconstructs_gram_matrix() {
        let g = [1.0, 0.3, 0.05];
        let n = 12;
        let c = cholesky_from_profile(&g, n, 0.0).unwrap();
        for i in 0..n {
            for j in 0..=i {
                assert!(
                    (reconstruct(&c, i, j) - gram(&g, i, j)).abs() < 1e-12,
                    "mismatch at ({}, {})",
                    i,
                    j
                );
            }
        }
    }

    #[test]
    fn reversed_factor_also_reconstructs() {
        let g = [1.0, 0.45, 0.1, 0.02];
        let n = 10;
        let c = cholesky_from_profile(&g, n, 0.0).unwrap();
        // (U U^T)[i][j] = sum_k U[i][k] U[j][k], k >= max(i, j)
        for i in 0..n {
            for j in 0..n {
                let mut sum = 0.0;
                for k in i.max(j)..n {
                    sum += c.reversed_upper(k, k - i) * c.reversed_upper(k, k - j);
                }
                assert!((sum - gram(&g, i, j)).abs() < 1e-12, "mismatch at ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn solve_inverts_reversed_factor() {
        let g = [1.0, 0.4, 0.12];
        let n = 9;
        let c = cholesky_from_profile(&g, n, 0.0).unwrap();
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let z = c.solve_reversed_upper(&y);
        // Multiply back: (U z)[i] = sum_d U[i][i+d] z[i+d]
        for i in 0..n {
            let mut s = 0.0;
            for j in i..n {
                s += c.reversed_upper(j, j - i) * z[j];
            }
            assert!((s - y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn color_matches_dense_multiply() {
        let g = [1.0, 0.3, 0.08];
        let n = 8;
        let c = cholesky_from_profile(&g, n, 0.0).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 1.0 - 0.2 * i as f64).collect();
        let y = c.color(&x);
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..=i {
                if i - k <= c.bandwidth() {
                    s += c.lower(i, i - k) * x[k];
                }
            }
            assert!((y[i] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite_profile() {
        // [[1, 1.01], [1.01, 1]] has a negative eigenvalue.
        let err = cholesky_from_profile(&[1.0, 1.01], 2, 1e-9);
        assert!(matches!(err, Err(CholeskyError::NotPositiveDefinite { row: 1 })));
    }

    #[test]
    fn jitter_rescues_borderline_profile() {
        // Exactly singular 2x2: [[1, 1], [1, 1]]. Bare factorization hits a
        // zero pivot; jitter makes it factorable.
        assert!(cholesky_from_profile(&[1.0, 1.0], 2, 0.0).is_err());
        assert!(cholesky_from_profile(&[1.0, 1.0], 2, 1e-9).is_ok());
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(cholesky_from_profile(&[], 4, 0.0), Err(CholeskyError::EmptyInput)));
        assert!(matches!(cholesky_from_profile(&[1.0], 0, 0.0), Err(CholeskyError::EmptyInput)));
    }
}
