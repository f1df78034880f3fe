//! Banded LU with partial pivoting.
//!
//! Storage follows the LAPACK general-band layout: row `i` keeps columns
//! `i - kl ..= i + kl + ku`, the extra `kl` super-diagonals absorbing the
//! fill-in produced by row interchanges.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision at column {0}")]
    Singular(usize),
}

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.index(i, j)]
        }
    }

    /// Adds `value` to entry `(i, j)`, which must lie inside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside the band");
        let k = self.index(i, j);
        self.data[k] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Factorizes in place and solves `A x = b`.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let reach = kl + ku;
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.index(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.index(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LinalgError::Singular(k));
            }
            pivots[k] = p;
            let right = (k + reach).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.index(k, j), self.index(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.index(k, k)];
            for i in k + 1..=last {
                let ik = self.index(i, k);
                let factor = self.data[ik] / pivot;
                self.data[ik] = 0.0;
                lower[k * kl + (i - k - 1)] = factor;
                if factor != 0.0 {
                    for j in k + 1..=right {
                        let kj = self.data[self.index(k, j)];
                        let ij = self.index(i, j);
                        self.data[ij] -= factor * kj;
                    }
                }
            }
        }
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, pivots[k]);
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= lower[k * kl + (i - k - 1)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let right = (k + reach).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=right {
                s -= self.data[self.index(k, j)] * x[j];
            }
            x[k] = s / self.data[self.index(k, k)];
        }
        Ok(x)
    }
}
