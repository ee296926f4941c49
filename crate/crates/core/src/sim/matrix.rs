//! Small dense complex linear algebra: LU, Householder QR and Jacobi.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Complex<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [Complex<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b.re == T::zero() && b.im == T::zero() {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.column(k)) {
                    *d += *a * b;
                }
            }
        }
        out
    }

    /// `self^H other` without forming the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "shape mismatch in adjoint_matmul");
        Self::from_fn(self.cols, other.cols, |i, j| dotc(self.column(i), other.column(j)))
    }

    pub fn scale(&mut self, factor: Complex<T>) {
        for z in &mut self.data {
            *z = *z * factor;
        }
    }

    pub fn add_scaled(&mut self, other: &Self, factor: Complex<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * factor;
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.cols {
            for i in 0..self.rows {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix by `(A + A^H) / 2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for j in 0..self.cols {
            for i in 0..=j {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * half;
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[j * self.rows + i]
    }
}

/// `sum conj(a_i) b_i`.
pub fn dotc<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm2<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    pivots: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(domain("LU needs a square matrix"));
        }
        let mut lu = a.clone();
        let mut pivots = Vec::with_capacity(n);
        let scale = a.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[(x, k)].norm().partial_cmp(&lu[(y, k)].norm()).expect("finite entries"))
                .expect("non-empty range");
            if !(lu[(p, k)].norm() > scale * T::epsilon() * T::from_count(n)) {
                return Err(Error::Numeric(format!("shifted matrix is numerically singular at column {k}")));
            }
            pivots.push(p);
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let inv = lu[(k, k)].inv();
            for i in (k + 1)..n {
                lu[(i, k)] = lu[(i, k)] * inv;
            }
            for j in (k + 1)..n {
                let ukj = lu[(k, j)];
                if ukj.re == T::zero() && ukj.im == T::zero() {
                    continue;
                }
                for i in (k + 1)..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Self { lu, pivots })
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &CMatrix<T>) -> CMatrix<T> {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "right-hand side has the wrong height");
        let mut x = b.clone();
        for j in 0..x.cols() {
            let col = x.column_mut(j);
            for (k, &p) in self.pivots.iter().enumerate() {
                col.swap(k, p);
            }
            for k in 0..n {
                let ck = col[k];
                for i in (k + 1)..n {
                    col[i] -= self.lu[(i, k)] * ck;
                }
            }
            for k in (0..n).rev() {
                col[k] = col[k] / self.lu[(k, k)];
                let ck = col[k];
                for i in 0..k {
                    col[i] -= self.lu[(i, k)] * ck;
                }
            }
        }
        x
    }
}

/// Thin Householder QR of a tall matrix: `(Q, |R_jj|)`.
pub fn householder_qr<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let (n, k) = (a.rows(), a.cols());
    assert!(k <= n, "QR needs at least as many rows as columns");
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<Complex<T>>> = Vec::with_capacity(k);
    let mut diag = Vec::with_capacity(k);
    let zero = Complex::new(T::zero(), T::zero());
    for j in 0..k {
        let x = &r.column(j)[j..];
        let norm = norm2(x);
        let mut v = x.to_vec();
        if norm > T::zero() {
            let phase = if x[0].norm() > T::zero() { x[0] / x[0].norm() } else { Complex::new(T::one(), T::zero()) };
            let alpha = -phase * norm;
            v[0] = v[0] - alpha;
            let vn = norm2(&v);
            if vn > T::zero() {
                for z in &mut v {
                    *z = *z / vn;
                }
            }
            for c in j..k {
                let col = &mut r.column_mut(c)[j..];
                let proj = dotc(&v, col) * T::lit(2.0);
                for (z, vi) in col.iter_mut().zip(&v) {
                    *z -= *vi * proj;
                }
            }
        } else {
            v.iter_mut().for_each(|z| *z = zero);
        }
        diag.push(r[(j, j)].norm());
        reflectors.push(v);
    }
    let mut q = CMatrix::zeros(n, k);
    for j in 0..k {
        q[(j, j)] = Complex::new(T::one(), T::zero());
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..k {
            let col = &mut q.column_mut(c)[j..];
            let proj = dotc(v, col) * T::lit(2.0);
            for (z, vi) in col.iter_mut().zip(v) {
                *z -= *vi * proj;
            }
        }
    }
    (q, diag)
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns.
pub fn jacobi_eigen<T: Real>(a: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let n = a.rows();
    if n != a.cols() {
        return Err(domain("eigen-decomposition needs a square matrix"));
    }
    let mut m = a.clone();
    m.symmetrize();
    let mut v = CMatrix::identity(n);
    let total = m.frobenius_norm();
    let off = |m: &CMatrix<T>| {
        let mut s = T::zero();
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut converged = n < 2;
    for _sweep in 0..100 {
        if off(&m) <= T::epsilon() * total * T::lit(0.1) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                // rotate the phase out of a_pq, then apply a real rotation
                let u = apq.conj() / mag;
                for k in 0..n {
                    m[(k, q)] = m[(k, q)] * u;
                }
                for k in 0..n {
                    m[(q, k)] = m[(q, k)] * u.conj();
                }
                for k in 0..n {
                    v[(k, q)] = v[(k, q)] * u;
                }
                let theta = (m[(q, q)].re - m[(p, p)].re) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = kp * c - kq * s;
                    m[(k, q)] = kp * s + kq * c;
                }
                for k in 0..n {
                    let (pk, qk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = pk * c - qk * s;
                    m[(q, k)] = pk * s + qk * c;
                }
                for k in 0..n {
                    let (kp, kq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = kp * c - kq * s;
                    v[(k, q)] = kp * s + kq * c;
                }
                let zero = Complex::new(T::zero(), T::zero());
                m[(p, q)] = zero;
                m[(q, p)] = zero;
            }
        }
    }
    if !converged && off(&m) > T::lit(1e3) * T::epsilon() * total {
        return Err(Error::Numeric("Jacobi iteration did not converge in 100 sweeps".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, k: usize) -> CMatrix<f64> {
        CMatrix::from_fn(n, k, |i, j| {
            let t = (i * 7 + j * 13) as f64;
            Complex::new((t * 0.37).sin(), (t * 0.11 + 1.0).cos())
        })
    }

    #[test]
    fn lu_solves_a_system() {
        // the sample pattern has low rank on its own
        let mut a = sample(6, 6);
        for i in 0..6 {
            a[(i, i)] += Complex::new(4.0, 0.0);
        }
        let x = sample(6, 2);
        let b = a.matmul(&x);
        let sol = Lu::factor(&a).unwrap().solve(&b);
        let mut diff = sol.clone();
        diff.add_scaled(&x, Complex::new(-1.0, 0.0));
        assert!(diff.max_abs() < 1e-10, "{}", diff.max_abs());
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CMatrix::<f64>::zeros(3, 3);
        assert!(Lu::factor(&a).is_err());
    }

    #[test]
    fn qr_is_orthonormal_and_spans_the_input() {
        let a = sample(10, 4);
        let (q, _) = householder_qr(&a);
        let mut defect = q.adjoint_matmul(&q);
        defect.add_scaled(&CMatrix::identity(4), Complex::new(-1.0, 0.0));
        assert!(defect.max_abs() < 1e-14);
        // residual of projecting a onto span(q)
        let mut back = q.matmul(&q.adjoint_matmul(&a));
        back.add_scaled(&a, Complex::new(-1.0, 0.0));
        assert!(back.max_abs() < 1e-13);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let b = sample(8, 8);
        let mut a = b.adjoint_matmul(&b);
        a.symmetrize();
        let (values, vectors) = jacobi_eigen(&a).unwrap();
        let av = a.matmul(&vectors);
        for (j, &lam) in values.iter().enumerate() {
            let r: f64 = av.column(j).iter().zip(vectors.column(j)).map(|(x, y)| (*x - *y * lam).norm_sqr()).sum();
            assert!(r.sqrt() < 1e-12 * a.frobenius_norm());
        }
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }
}
