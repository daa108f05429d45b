//! Dense LU factorization with partial pivoting.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major square factorization `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    original: Vec<T>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &[T], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Dimension(format!("matrix has {} entries, want {}", a.len(), n * n)));
        }
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs())).max(T::one());
        let tiny = T::epsilon() * scale * T::lit(n.max(1) as f64);
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
            if best <= tiny {
                return Err(Error::Singular);
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, original: a.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs has {} entries, want {}", b.len(), n)));
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        // one step of iterative refinement keeps residuals near machine precision
        let r = self.residual_vec(&x, b);
        if max_abs(&r) > T::zero() {
            let mut dx: Vec<T> = self.perm.iter().map(|&p| r[p]).collect();
            for i in 0..n {
                let mut acc = dx[i];
                for j in 0..i {
                    acc -= self.lu[i * n + j] * dx[j];
                }
                dx[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = dx[i];
                for j in i + 1..n {
                    acc -= self.lu[i * n + j] * dx[j];
                }
                dx[i] = acc / self.lu[i * n + i];
            }
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        Ok(x)
    }

    /// Solves `A^T x = b` from the same factorization.
    pub fn solve_transpose(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs has {} entries, want {}", b.len(), n)));
        }
        // U^T z = b, L^T w = z, x = P^T w
        let mut z = b.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu[j * n + i] * z[j];
            }
            z[i] = acc / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu[j * n + i] * z[j];
            }
            z[i] = acc;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        Ok(x)
    }

    fn residual_vec(&self, x: &[T], b: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.original[i * n..(i + 1) * n];
                b[i] - row.iter().zip(x).map(|(&a, &xj)| a * xj).sum::<T>()
            })
            .collect()
    }

    /// Sup-norm residual of `A x - b`.
    pub fn residual(&self, x: &[T], b: &[T]) -> T {
        max_abs(&self.residual_vec(x, b))
    }
}

fn max_abs<T: Real>(v: &[T]) -> T {
    crate::scalar::max_abs(v)
}

/// Solves `A x = b` and rejects the answer if the residual exceeds `1e-10` relative to `b`.
pub fn solve_checked<T: Real>(a: &[T], n: usize, b: &[T]) -> Result<Vec<T>> {
    let lu = Lu::factor(a, n)?;
    let x = lu.solve(b)?;
    check_residual(&lu, &x, b)?;
    Ok(x)
}

pub(crate) fn check_residual<T: Real>(lu: &Lu<T>, x: &[T], b: &[T]) -> Result<()> {
    let res = lu.residual(x, b);
    let scale = T::one() + max_abs(b) + max_abs(x);
    if res > T::tol(1e-10) * scale {
        return Err(Error::Residual(res.as_f64()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a: [f64; _] = [2.0, 1.0, 1.0, 3.0];
        let x = solve_checked(&a, 2, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn transpose_solve_matches() {
        let a: [f64; _] = [4.0, 1.0, 2.0, 0.5, 3.0, 1.0, 1.0, 2.0, 5.0];
        let lu = Lu::factor(&a, 3).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = lu.solve_transpose(&b).unwrap();
        for j in 0..3 {
            let v: f64 = (0..3).map(|i| a[i * 3 + j] * x[i]).sum();
            assert!((v - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a: [f64; _] = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(Lu::factor(&a, 2).unwrap_err(), Error::Singular);
    }
}
