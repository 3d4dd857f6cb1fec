//! Envelope Cholesky and banded LU factorisations of a symmetrically
//! permuted matrix `B = P A Pᵀ`, with `B_ij = A[perm[i], perm[j]]`.

use super::{SolveError, SparseMatrix};

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// `L Lᵀ = P A Pᵀ` stored row by row over the lower envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

/// Failure of the factorisation: the Schur complement `value` at `pivot`
/// and a direction `witness` (original ordering) with `wᵀ A w = value`.
#[derive(Debug, Clone)]
pub struct CholeskyBreakdown {
    pub pivot: usize,
    pub value: f64,
    pub witness: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors the lower triangle of `a`; pivots must exceed `pivot_tol`.
    pub fn factor(a: &SparseMatrix, perm: &[usize], pivot_tol: f64) -> Result<Self, CholeskyBreakdown> {
        let n = a.dim();
        let iperm = inverse(perm);
        let mut first: Vec<usize> = (0..n).collect();
        for (r, c, _) in a.triplets() {
            let (i, j) = (iperm[r], iperm[c]);
            let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
            first[hi] = first[hi].min(lo);
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for (r, c, v) in a.triplets() {
            let (i, j) = (iperm[r], iperm[c]);
            if i >= j {
                values[start[i] + j - first[i]] = v;
            }
        }
        let mut f = EnvelopeCholesky { perm: perm.to_vec(), first, start, values };
        for i in 0..n {
            let fi = f.first[i];
            for j in fi..i {
                let fj = f.first[j];
                let k0 = fi.max(fj);
                let ri = f.start[i];
                let rj = f.start[j];
                let mut s = f.values[ri + j - fi];
                for k in k0..j {
                    s -= f.values[ri + k - fi] * f.values[rj + k - fj];
                }
                f.values[ri + j - fi] = s / f.values[rj + j - fj];
            }
            let ri = f.start[i];
            let d = f.values[ri + i - fi] - f.values[ri..ri + i - fi].iter().map(|v| v * v).sum::<f64>();
            if !(d > pivot_tol) {
                let witness = f.witness(i);
                return Err(CholeskyBreakdown { pivot: perm[i], value: d, witness });
            }
            f.values[ri + i - fi] = d.sqrt();
        }
        Ok(f)
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.values[self.start[i] + j - self.first[i]]
    }

    /// Direction `x = [-L₁₁⁻ᵀ l; 1; 0]` for a breakdown at row `i`.
    fn witness(&self, i: usize) -> Vec<f64> {
        let n = self.perm.len();
        let mut rhs = vec![0.0; i];
        for k in self.first[i]..i {
            rhs[k] = self.l(i, k);
        }
        let mut x = vec![0.0; n];
        for m in (0..i).rev() {
            let y = rhs[m] / self.l(m, m);
            x[m] = -y;
            for k in self.first[m]..m {
                rhs[k] -= self.l(m, k) * y;
            }
        }
        x[i] = 1.0;
        let mut out = vec![0.0; n];
        for (p, &old) in self.perm.iter().enumerate() {
            out[old] = x[p];
        }
        out
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.start[i];
            let mut s = z[i];
            for k in fi..i {
                s -= self.values[ri + k - fi] * z[k];
            }
            z[i] = s / self.values[ri + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.start[i];
            let xi = z[i] / self.values[ri + i - fi];
            z[i] = xi;
            for k in fi..i {
                z[k] -= self.values[ri + k - fi] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (p, &old) in self.perm.iter().enumerate() {
            x[old] = z[p];
        }
        x
    }
}

/// Banded LU with partial pivoting; row `i` keeps columns `i-kl ..= i+kl+ku`.
#[derive(Debug, Clone)]
pub struct BandLu {
    perm: Vec<usize>,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &SparseMatrix, perm: &[usize]) -> Result<Self, SolveError> {
        let n = a.dim();
        let iperm = inverse(perm);
        let (mut kl, mut ku) = (0, 0);
        for (r, c, _) in a.triplets() {
            let (i, j) = (iperm[r], iperm[c]);
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * width];
        let idx = |i: usize, j: usize| i * width + j + kl - i;
        for (r, c, v) in a.triplets() {
            band[idx(iperm[r], iperm[c])] = v;
        }
        let tol = 1e-14 * a.max_abs();
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let jmax = (k + kl + ku).min(n - 1);
            let mut p = k;
            for i in k + 1..=last {
                if band[idx(i, k)].abs() > band[idx(p, k)].abs() {
                    p = i;
                }
            }
            if !(band[idx(p, k)].abs() > tol) {
                return Err(SolveError::Singular { pivot: perm[k] });
            }
            pivots[k] = p;
            if p != k {
                for j in k..=jmax {
                    band.swap(idx(k, j), idx(p, j));
                }
            }
            let ukk = band[idx(k, k)];
            for i in k + 1..=last {
                let lik = band[idx(i, k)] / ukk;
                band[idx(i, k)] = lik;
                if lik != 0.0 {
                    for j in k + 1..=jmax {
                        band[idx(i, j)] -= lik * band[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandLu { perm: perm.to_vec(), kl, ku, width, band, pivots })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let (kl, ku, w) = (self.kl, self.ku, self.width);
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            z.swap(k, self.pivots[k]);
            let zk = z[k];
            if zk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    z[i] -= self.band[idx(i, k)] * zk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = z[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.band[idx(k, j)] * z[j];
            }
            z[k] = s / self.band[idx(k, k)];
        }
        let mut x = vec![0.0; n];
        for (p, &old) in self.perm.iter().enumerate() {
            x[old] = z[p];
        }
        x
    }
}
