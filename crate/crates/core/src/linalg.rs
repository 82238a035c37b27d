//! Symmetric banded matrices and a banded Cholesky solver.
//!
//! The discrete Euler-Lagrange operators are pentadiagonal (fourth order)
//! or tridiagonal (second order) and positive definite, so a bandwidth-2
//! Cholesky factorization covers everything the solvers need.

/// Symmetric banded matrix of dimension `m` with bandwidth `bw`.
/// `diags[d][i]` stores A[i, i+d] for 0 <= d <= bw.
#[derive(Debug, Clone)]
pub struct SymBanded {
    pub m: usize,
    pub bw: usize,
    pub diags: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(m: usize, bw: usize) -> Self {
        let diags = (0..=bw).map(|d| vec![0.0; m.saturating_sub(d)]).collect();
        SymBanded { m, bw, diags }
    }

    /// Central second difference with zero Dirichlet clamp, scaled 1/h^2,
    /// on the interior nodes.
    pub fn second_difference(m: usize, h: f64) -> Self {
        let mut t = SymBanded::zeros(m, 1);
        let ih2 = 1.0 / (h * h);
        for i in 0..m {
            t.diags[0][i] = -2.0 * ih2;
        }
        for i in 0..m - 1 {
            t.diags[1][i] = ih2;
        }
        t
    }

    pub fn identity(m: usize) -> Self {
        let mut a = SymBanded::zeros(m, 0);
        for i in 0..m {
            a.diags[0][i] = 1.0;
        }
        a
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bw {
            0.0
        } else {
            self.diags[d][lo]
        }
    }

    /// self * other, both symmetric; the product of two symmetric banded
    /// matrices that commute stays symmetric — used here only for T*T.
    pub fn mul_symmetric(&self, other: &SymBanded) -> SymBanded {
        assert_eq!(self.m, other.m);
        let bw = self.bw + other.bw;
        let mut c = SymBanded::zeros(self.m, bw);
        for i in 0..self.m {
            for j in i..(i + bw + 1).min(self.m) {
                let klo = i.saturating_sub(self.bw).max(j.saturating_sub(other.bw));
                let khi = (i + self.bw).min(j + other.bw).min(self.m - 1);
                let mut s = 0.0;
                for k in klo..=khi {
                    s += self.get(i, k) * other.get(k, j);
                }
                c.diags[j - i][i] = s;
            }
        }
        c
    }

    /// self += c * other (other's bandwidth must not exceed self's).
    pub fn add_scaled(&mut self, other: &SymBanded, c: f64) {
        assert!(other.bw <= self.bw);
        for d in 0..=other.bw {
            for i in 0..other.diags[d].len() {
                self.diags[d][i] += c * other.diags[d][i];
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m);
        let mut out = vec![0.0; self.m];
        for i in 0..self.m {
            let mut s = self.diags[0][i] * v[i];
            for d in 1..=self.bw {
                if i + d < self.m {
                    s += self.diags[d][i] * v[i + d];
                }
                if i >= d {
                    s += self.diags[d][i - d] * v[i - d];
                }
            }
            out[i] = s;
        }
        out
    }

    /// Banded Cholesky A = G G^T; fails if A is not positive definite.
    pub fn cholesky(&self) -> Result<BandedChol, String> {
        let m = self.m;
        let p = self.bw;
        // low[d][j] = G[j+d, j]
        let mut low: Vec<Vec<f64>> = (0..=p).map(|d| vec![0.0; m.saturating_sub(d)]).collect();
        for j in 0..m {
            let mut s = self.diags[0][j];
            for k in j.saturating_sub(p)..j {
                let d = j - k;
                s -= low[d][k] * low[d][k];
            }
            if s <= 0.0 {
                return Err(format!("matrix not positive definite at column {j}"));
            }
            let gjj = s.sqrt();
            low[0][j] = gjj;
            for i in j + 1..(j + p + 1).min(m) {
                let mut s = self.get(i, j);
                // sum over k < j with both (i,k) and (j,k) inside the band
                for k in i.saturating_sub(p)..j {
                    s -= low[i - k][k] * low[j - k][k];
                }
                low[i - j][j] = s / gjj;
            }
        }
        Ok(BandedChol { m, p, low })
    }
}

/// Lower-banded Cholesky factor.
pub struct BandedChol {
    m: usize,
    p: usize,
    low: Vec<Vec<f64>>,
}

impl BandedChol {
    /// Solves A x = b where A = G G^T.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.m);
        let mut y = b.to_vec();
        // forward: G y = b
        for i in 0..self.m {
            let mut s = y[i];
            for k in i.saturating_sub(self.p)..i {
                s -= self.low[i - k][k] * y[k];
            }
            y[i] = s / self.low[0][i];
        }
        // backward: G^T x = y
        for i in (0..self.m).rev() {
            let mut s = y[i];
            for j in i + 1..(i + self.p + 1).min(self.m) {
                s -= self.low[j - i][i] * y[j];
            }
            y[i] = s / self.low[0][i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let m = b.len();
        let mut aug: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut x = b.to_vec();
        for c in 0..m {
            let piv = (c..m).max_by(|&i, &j| aug[i][c].abs().total_cmp(&aug[j][c].abs())).unwrap();
            aug.swap(c, piv);
            x.swap(c, piv);
            for r in c + 1..m {
                let f = aug[r][c] / aug[c][c];
                for k in c..m {
                    aug[r][k] -= f * aug[c][k];
                }
                x[r] -= f * x[c];
            }
        }
        for c in (0..m).rev() {
            x[c] /= aug[c][c];
            for r in 0..c {
                x[r] -= aug[r][c] * x[c];
                aug[r][c] = 0.0;
            }
        }
        x
    }

    fn build_operator(m: usize, h: f64, c4: f64, c2: f64, c0: f64) -> SymBanded {
        let t = SymBanded::second_difference(m, h);
        let mut l = if c4 != 0.0 {
            let mut tt = t.mul_symmetric(&t);
            for d in 0..=tt.bw {
                for v in &mut tt.diags[d] {
                    *v *= c4;
                }
            }
            tt
        } else {
            SymBanded::zeros(m, 2)
        };
        l.add_scaled(&t, -c2);
        l.add_scaled(&SymBanded::identity(m), c0);
        l
    }

    #[test]
    fn banded_cholesky_matches_dense_solve() {
        let m = 37;
        let h = 0.3;
        let l = build_operator(m, h, 1.0, 6.5, 1.5625);
        let dense: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| l.get(i, j)).collect())
            .collect();
        let b: Vec<f64> = (0..m).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let chol = l.cholesky().unwrap();
        let x = chol.solve(&b);
        let xd = dense_solve(&dense, &b);
        for i in 0..m {
            assert_relative_eq!(x[i], xd[i], max_relative = 1e-10, epsilon = 1e-10);
        }
        // and the residual is tiny
        let lx = l.apply(&x);
        for i in 0..m {
            assert_relative_eq!(lx[i], b[i], max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn tridiagonal_case_bandwidth_one() {
        let m = 25;
        let l = build_operator(m, 0.1, 0.0, 1.0, 0.25);
        let b: Vec<f64> = (0..m).map(|i| (i as f64 * 0.77).sin()).collect();
        let x = l.cholesky().unwrap().solve(&b);
        let lx = l.apply(&x);
        for i in 0..m {
            assert_relative_eq!(lx[i], b[i], max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}
