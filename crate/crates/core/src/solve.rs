//! Dense linear solver used by the exact walk analysis.
//!
//! Gaussian elimination with partial pivoting plus one round of iterative
//! refinement. State spaces here are O(wall position), so a dense solve is
//! simpler than exploiting the band structure and still instantaneous.

use thiserror::Error;

#[derive(Debug, Error)]
#[error("singular linear system: no usable pivot in column {column} (max |entry| = {pivot:.3e})")]
pub struct SingularSystem {
    pub column: usize,
    pub pivot: f64,
}

/// Row-major dense matrix.
#[derive(Clone)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.a[r * self.n + c]
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.n {
            let row = &self.a[r * self.n..(r + 1) * self.n];
            out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

fn factor(m: &Dense) -> Result<Lu, SingularSystem> {
    let n = m.n;
    let mut lu = m.a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[k * n + k].abs();
        for i in k + 1..n {
            let v = lu[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best < 1e-300 {
            return Err(SingularSystem { column: k, pivot: best });
        }
        if piv != k {
            for c in 0..n {
                lu.swap(k * n + c, piv * n + c);
            }
            perm.swap(k, piv);
        }
        let d = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / d;
            lu[i * n + k] = f;
            if f != 0.0 {
                for c in k + 1..n {
                    lu[i * n + c] -= f * lu[k * n + c];
                }
            }
        }
    }
    Ok(Lu { n, lu, perm })
}

impl Lu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for c in 0..i {
                s -= self.lu[i * n + c] * x[c];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for c in i + 1..n {
                s -= self.lu[i * n + c] * x[c];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Solve `a x = b`. One refinement pass keeps absorption-time systems at
/// full double precision even for the larger grids.
pub fn solve(a: &Dense, b: &[f64]) -> Result<Vec<f64>, SingularSystem> {
    let lu = factor(a)?;
    let mut x = lu.solve(b);
    let mut ax = vec![0.0; a.n];
    for _ in 0..2 {
        a.mul(&x, &mut ax);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        if r.iter().all(|v| v.abs() < 1e-306) {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    Ok(x)
}
