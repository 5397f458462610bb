//! Banded matrix storage and direct LU solve with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix stored by diagonals: row i holds columns i-kl ..= i+ku.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// row-major, width kl + ku + 1; entry (i, j) lives at slot j - i + kl
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.in_band(i, j));
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Column range [lo, hi) of the band in row i.
    pub fn row_range(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.kl), (i + self.ku + 1).min(self.n))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            let mut acc = 0.0;
            for j in lo..hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Factor with partial pivoting; fill stays within kl extra
    /// superdiagonals (total upper width ku + kl).
    pub fn lu(&self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let kuw = self.ku + self.kl; // widened upper bandwidth
        let width = kl + kuw + 1;
        let mut w = vec![0.0; n * width];
        let slot = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                w[slot(i, j)] = self.get(i, j);
            }
        }
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * kl]; // multipliers per elimination column
        for k in 0..n {
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = w[slot(k, k)].abs();
            for i in (k + 1)..=imax {
                let v = w[slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < f64::MIN_POSITIVE {
                return Err(Error::SingularSystem(k));
            }
            pivots[k] = p;
            let jmax = (k + kuw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    w.swap(slot(k, j), slot(p, j));
                }
            }
            let piv = w[slot(k, k)];
            for i in (k + 1)..=imax {
                let m = w[slot(i, k)] / piv;
                lower[k * kl + (i - k - 1)] = m;
                w[slot(i, k)] = 0.0;
                for j in (k + 1)..=jmax {
                    let upper = w[slot(k, j)];
                    if upper != 0.0 {
                        w[slot(i, j)] -= m * upper;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            kuw,
            upper: w,
            lower,
            pivots,
        })
    }
}

/// Factored form produced by [`BandedMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    kuw: usize,
    upper: Vec<f64>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let width = self.kl + self.kuw + 1;
        let slot = |i: usize, j: usize| i * width + (j + self.kl - i);
        let mut x = b.to_vec();
        for k in 0..self.n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let imax = (k + self.kl).min(self.n - 1);
            for i in (k + 1)..=imax {
                x[i] -= self.lower[k * self.kl + (i - k - 1)] * x[k];
            }
        }
        for k in (0..self.n).rev() {
            let jmax = (k + self.kuw).min(self.n - 1);
            let mut acc = x[k];
            for j in (k + 1)..=jmax {
                acc -= self.upper[slot(k, j)] * x[j];
            }
            x[k] = acc / self.upper[slot(k, k)];
        }
        x
    }
}

/// Relative residual max|Ax - b| / max|b| (absolute when b = 0).
pub fn relative_residual(a: &BandedMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let num = ax
        .iter()
        .zip(b)
        .fold(0.0_f64, |m, (&p, &q)| m.max((p - q).abs()));
    let den = b.iter().fold(0.0_f64, |m, &q| m.max(q.abs()));
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn identity_returns_rhs() {
        let mut a = BandedMatrix::new(5, 2, 2);
        for i in 0..5 {
            a.set(i, i, 1.0);
        }
        let b = vec![3.0, -1.0, 0.5, 2.0, 9.0];
        let x = a.lu().unwrap().solve(&b);
        assert_eq!(x, b);
    }

    #[test]
    fn one_by_one_system() {
        let mut a = BandedMatrix::new(1, 0, 0);
        a.set(0, 0, 2.0);
        let x = a.lu().unwrap().solve(&[4.0]);
        assert_eq!(x, vec![2.0]);
    }

    #[test]
    fn singular_pivot_names_dof() {
        let mut a = BandedMatrix::new(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 0.0);
        a.set(2, 2, 1.0);
        match a.lu() {
            Err(Error::SingularSystem(k)) => assert_eq!(k, 1),
            other => panic!("expected singular system, got {other:?}"),
        }
    }

    /// Textbook dense LU with partial pivoting, used as the solve oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in (k + 1)..n {
                let m = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
                b[i] -= m * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in (k + 1)..n {
                acc -= a[k][j] * x[j];
            }
            x[k] = acc / a[k][k];
        }
        x
    }

    #[test]
    fn random_banded_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        for trial in 0..10 {
            let n = 50;
            let (kl, ku) = (3, 3);
            let mut banded = BandedMatrix::new(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                let (lo, hi) = banded.row_range(i);
                for j in lo..hi {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    // diagonally dominated perturbation keeps it nonsingular
                    let v = if i == j { v + 5.0 } else { v };
                    banded.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x = banded.lu().unwrap().solve(&b);
            let y = dense_solve(dense, b.clone());
            for (p, q) in x.iter().zip(&y) {
                assert!((p - q).abs() <= 1e-10, "trial {trial}: {p} vs {q}");
            }
            assert!(relative_residual(&banded, &x, &b) <= 1e-12);
        }
    }

    #[test]
    fn pivoting_handles_weak_diagonal() {
        // leading diagonal entry much smaller than its subdiagonal neighbor
        let mut a = BandedMatrix::new(4, 1, 1);
        let rows = [
            [1e-14, 1.0, 0.0, 0.0],
            [1.0, 1.0, 1.0, 0.0],
            [0.0, 1.0, 2.0, 1.0],
            [0.0, 0.0, 1.0, 3.0],
        ];
        let mut dense = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                if a.in_band(i, j) {
                    a.set(i, j, rows[i][j]);
                }
                dense[i][j] = rows[i][j];
            }
        }
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let x = a.lu().unwrap().solve(&b);
        let y = dense_solve(dense, b.clone());
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() <= 1e-10);
        }
    }
}
