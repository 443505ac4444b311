//! Real banded Gaussian elimination with partial pivoting.

use crate::error::{NdpoError, Result};

/// n × n matrix with kl sub- and ku super-diagonals. Row i keeps columns
/// i − kl ..= i + ku + kl; the extra kl columns hold pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
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

    /// Smallest band holding every (row, col) entry.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Self {
        let kl = entries.iter().map(|e| e.0.saturating_sub(e.1)).max().unwrap_or(0);
        let ku = entries.iter().map(|e| e.1.saturating_sub(e.0)).max().unwrap_or(0);
        let mut m = Self::zeros(n, kl, ku);
        for &(i, j, v) in entries {
            *m.at_mut(i, j) += v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let o = self.offset(i, j);
        &mut self.data[o]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.at(i, j)
        }
    }

    /// Replaces row i by the unit row e_i.
    pub fn set_unit_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku + self.kl).min(self.n - 1);
        for j in lo..=hi {
            *self.at_mut(i, j) = if i == j { 1.0 } else { 0.0 };
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.at(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves A x = b in place, consuming the matrix.
    pub fn solve(mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(NdpoError::SteadyState(format!(
                    "singular banded system at pivot {k}"
                )));
            }
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.offset(k, j);
                    let c = self.offset(p, j);
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let pivot = self.at(k, k);
            for i in k + 1..=last_row {
                let f = self.at(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                *self.at_mut(i, k) = 0.0;
                for j in k + 1..=last_col {
                    let v = self.at(k, j);
                    *self.at_mut(i, j) -= f * v;
                }
                b[i] -= f * b[k];
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + reach).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=last_col {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        // Zero leading diagonal forces a row swap.
        let entries = vec![
            (0, 1, 2.0),
            (1, 0, 1.0),
            (1, 1, 1.0),
            (1, 2, 3.0),
            (2, 1, 4.0),
            (2, 2, 1.0),
            (2, 3, 1.0),
            (3, 2, 2.0),
            (3, 3, 5.0),
        ];
        let m = BandedMatrix::from_entries(4, &entries);
        assert_eq!(m.bandwidths(), (1, 1));
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = m.matvec(&x);
        m.solve(&mut b).unwrap();
        for (got, want) in b.iter().zip(x) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_reported() {
        let m = BandedMatrix::from_entries(2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        assert!(m.solve(&mut [1.0, 1.0]).is_err());
    }
}
