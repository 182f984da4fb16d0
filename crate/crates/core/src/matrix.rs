//! Small dense matrices and vectors over the exact scalar field.

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{CoxError, Result};
use crate::scalar::{Field, Scalar};

/// Square matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    n: usize,
    a: Vec<Scalar>,
}

impl Hash for Mat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        for s in &self.a {
            s.hash(state);
        }
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| format!("{:?}", self.at(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn from_rows(n: usize, a: Vec<Scalar>) -> Mat {
        assert_eq!(a.len(), n * n);
        Mat { n, a }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut a = vec![Scalar::zero(field); n * n];
        for i in 0..n {
            a[i * n + i] = Scalar::one(field);
        }
        Mat { n, a }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let field = self.a[0].field().clone();
        let mut out = vec![Scalar::zero(&field); n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.at(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out[i * n + j] = out[i * n + j].add(&aik.mul(b));
                }
            }
        }
        Mat { n, a: out }
    }

    /// Matrix-vector product (vector of length n).
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        let n = self.n;
        let field = self.a[0].field().clone();
        let mut out = vec![Scalar::zero(&field); n];
        for i in 0..n {
            for j in 0..n {
                let a = self.at(i, j);
                if a.is_zero() || v[j].is_zero() {
                    continue;
                }
                out[i] = out[i].add(&a.mul(&v[j]));
            }
        }
        out
    }

    /// j-th column.
    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.n).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(self.at(j, i).clone());
            }
        }
        Mat { n, a }
    }

    pub fn is_identity(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                let e = self.at(i, j);
                if i == j {
                    if !e.is_one() {
                        return false;
                    }
                } else if !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Inverse by Gauss-Jordan elimination; errors on singular input.
    pub fn inverse(&self) -> Result<Mat> {
        let n = self.n;
        let field = self.a[0].field().clone();
        let mut m = self.clone();
        let mut inv = Mat::identity(&field, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !m.at(r, col).is_zero())
                .ok_or_else(|| CoxError::Internal("singular matrix".into()))?;
            if pivot != col {
                for j in 0..n {
                    m.a.swap(pivot * n + j, col * n + j);
                    inv.a.swap(pivot * n + j, col * n + j);
                }
            }
            let p = m.at(col, col).clone();
            let pinv = p.inv()?;
            for j in 0..n {
                m.a[col * n + j] = m.a[col * n + j].mul(&pinv);
                inv.a[col * n + j] = inv.a[col * n + j].mul(&pinv);
            }
            for r in 0..n {
                if r == col || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for j in 0..n {
                    let t = factor.mul(m.at(col, j));
                    m.a[r * n + j] = m.a[r * n + j].sub(&t);
                    let t = factor.mul(inv.at(col, j));
                    inv.a[r * n + j] = inv.a[r * n + j].sub(&t);
                }
            }
        }
        Ok(inv)
    }

    /// Exact determinant by fraction-producing elimination.
    pub fn determinant(&self) -> Result<Scalar> {
        let n = self.n;
        let field = self.a[0].field().clone();
        let mut m = self.clone();
        let mut det = Scalar::one(&field);
        for col in 0..n {
            let pivot = match (col..n).find(|&r| !m.at(r, col).is_zero()) {
                Some(p) => p,
                None => return Ok(Scalar::zero(&field)),
            };
            if pivot != col {
                for j in 0..n {
                    m.a.swap(pivot * n + j, col * n + j);
                }
                det = det.neg();
            }
            let p = m.at(col, col).clone();
            det = det.mul(&p);
            let pinv = p.inv()?;
            for r in (col + 1)..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).mul(&pinv);
                for j in col..n {
                    let t = factor.mul(m.at(col, j));
                    m.a[r * n + j] = m.a[r * n + j].sub(&t);
                }
            }
        }
        Ok(det)
    }

    /// Rank via Gaussian elimination.
    pub fn rank(&self) -> Result<usize> {
        let n = self.n;
        let mut m = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            let pivot = match (row..n).find(|&r| !m.at(r, col).is_zero()) {
                Some(p) => p,
                None => continue,
            };
            if pivot != row {
                for j in 0..n {
                    m.a.swap(pivot * n + j, row * n + j);
                }
            }
            let pinv = m.at(row, col).inv()?;
            for r in (row + 1)..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).mul(&pinv);
                for j in col..n {
                    let t = factor.mul(m.at(row, j));
                    m.a[r * n + j] = m.a[r * n + j].sub(&t);
                }
            }
            rank += 1;
            row += 1;
            if row == n {
                break;
            }
        }
        Ok(rank)
    }

    /// Basis of the kernel {v : Mv = 0}, via reduced row echelon form.
    /// Deterministic: one vector per free column, in column order.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<Scalar>>> {
        let n = self.n;
        let field = self.a[0].field().clone();
        let mut m = self.clone();
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
        let mut row = 0;
        for col in 0..n {
            let pivot = match (row..n).find(|&r| !m.at(r, col).is_zero()) {
                Some(p) => p,
                None => continue,
            };
            if pivot != row {
                for j in 0..n {
                    m.a.swap(pivot * n + j, row * n + j);
                }
            }
            let pinv = m.at(row, col).inv()?;
            for j in 0..n {
                m.a[row * n + j] = m.a[row * n + j].mul(&pinv);
            }
            for r in 0..n {
                if r == row || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for j in 0..n {
                    let t = factor.mul(m.at(row, j));
                    m.a[r * n + j] = m.a[r * n + j].sub(&t);
                }
            }
            pivot_of_col[col] = Some(row);
            row += 1;
            if row == n {
                break;
            }
        }
        let mut basis = vec![];
        for free in 0..n {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![Scalar::zero(&field); n];
            v[free] = Scalar::one(&field);
            for col in 0..n {
                if let Some(r) = pivot_of_col[col] {
                    v[col] = m.at(r, free).neg();
                }
            }
            basis.push(v);
        }
        Ok(basis)
    }

    /// Canonical byte encoding for deterministic ordering and hashing.
    pub fn canon_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.n * self.n * 8);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for s in &self.a {
            s.canon_bytes(&mut out);
        }
        out
    }
}

/// Sign classification of a vector of scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecSign {
    Zero,
    Positive,
    Negative,
    Mixed,
}

/// Classify a coordinate vector: positive means all >= 0 with at least one > 0.
pub fn vector_sign(v: &[Scalar]) -> Result<VecSign> {
    let mut pos = false;
    let mut neg = false;
    for s in v {
        match s.sign()? {
            1 => pos = true,
            -1 => neg = true,
            _ => {}
        }
        if pos && neg {
            return Ok(VecSign::Mixed);
        }
    }
    Ok(match (pos, neg) {
        (true, false) => VecSign::Positive,
        (false, true) => VecSign::Negative,
        (false, false) => VecSign::Zero,
        (true, true) => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldData;

    #[test]
    fn inverse_and_determinant() {
        let f = FieldData::new(5);
        let x = Scalar::generator(&f);
        // [[x, 1], [1, 1]]
        let m = Mat::from_rows(
            2,
            vec![x.clone(), Scalar::one(&f), Scalar::one(&f), Scalar::one(&f)],
        );
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        let det = m.determinant().unwrap();
        // det = x - 1
        assert_eq!(det, x.sub(&Scalar::one(&f)));
        assert_eq!(m.rank().unwrap(), 2);
    }
}
