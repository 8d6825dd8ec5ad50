//! Dense Cholesky factorization with diagonal jitter.

use crate::error::{Error, Result};

/// Jitter levels, relative to the largest diagonal entry, tried in order
/// after an unperturbed attempt fails.
pub const JITTER_LEVELS: [f64; 7] = [1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

/// Symmetric matrix stored as packed lower-triangular rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl SymmetricMatrix {
    /// Builds the matrix from `f(i, j)` evaluated for `j <= i`.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(offset(n));
        for i in 0..n {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds the matrix from a square array, which must be symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Size("matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                    return Err(Error::Domain(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.data[offset(i) + j]
    }

    fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }
}

/// Lower-triangular Cholesky factor, packed by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>,
    jitter: f64,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal shift that was added to obtain the factor (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[offset(i) + j]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[offset(i)..offset(i) + i + 1]
    }

    /// Computes `L z`.
    pub fn mul_vec(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.n {
            return Err(Error::Size(format!(
                "vector length {} does not match dimension {}",
                z.len(),
                self.n
            )));
        }
        Ok((0..self.n).map(|i| dot(self.row(i), &z[..=i])).collect())
    }

    /// Reconstructs `L Lᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.n, |i, j| dot(&self.row(i)[..=j], self.row(j)))
    }

    /// Dense row-major copy with explicit zeros above the diagonal.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

fn factor_with_shift(m: &SymmetricMatrix, shift: f64) -> std::result::Result<Vec<f64>, usize> {
    let n = m.n;
    let mut l = vec![0.0; offset(n)];
    for i in 0..n {
        let (done, rest) = l.split_at_mut(offset(i));
        let row_i = &mut rest[..=i];
        for j in 0..=i {
            let a = m.data[offset(i) + j] + if i == j { shift } else { 0.0 };
            if i == j {
                let s = a - dot(&row_i[..j], &row_i[..j]);
                if !(s > 0.0) || !s.is_finite() {
                    return Err(i);
                }
                row_i[j] = s.sqrt();
            } else {
                let row_j = &done[offset(j)..offset(j) + j + 1];
                let s = a - dot(&row_i[..j], &row_j[..j]);
                row_i[j] = s / row_j[j];
            }
        }
    }
    Ok(l)
}

/// Factors `m = L Lᵀ`. If the plain factorization fails, a diagonal shift
/// `eps * max(diag)` is added with `eps` escalating through
/// [`JITTER_LEVELS`].
pub fn cholesky(m: &SymmetricMatrix) -> Result<LowerTriangular> {
    if m.n == 0 {
        return Err(Error::Empty("cannot factor an empty matrix".into()));
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let scale = m.max_diag();
    let mut pivot = match factor_with_shift(m, 0.0) {
        Ok(data) => {
            return Ok(LowerTriangular {
                n: m.n,
                data,
                jitter: 0.0,
            })
        }
        Err(p) => p,
    };
    if scale > 0.0 {
        for eps in JITTER_LEVELS {
            let shift = eps * scale;
            match factor_with_shift(m, shift) {
                Ok(data) => {
                    return Ok(LowerTriangular {
                        n: m.n,
                        data,
                        jitter: shift,
                    })
                }
                Err(p) => pivot = p,
            }
        }
    }
    Err(Error::NotPositiveDefinite { pivot })
}
