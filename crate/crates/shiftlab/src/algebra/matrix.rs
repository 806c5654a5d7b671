use super::cvec::CVec;
use super::poly::CPoly;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::ops::{Index, IndexMut};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Small dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        CMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = CMatrix::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[CVec]) -> Self {
        let n = cols.len();
        let mut m = CMatrix::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n);
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> CVec {
        CVec::new((0..self.n).map(|i| self[(i, j)]).collect())
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        assert_eq!(self.n, v.len());
        CVec::new(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
                .collect(),
        )
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Induced max-norm (max row sum), matching the max-norm on vectors.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = ONE;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].norm().total_cmp(&a[(y, c)].norm()))
                .unwrap();
            if a[(p, c)] == ZERO {
                return ZERO;
            }
            if p != c {
                for j in 0..n {
                    let t = a[(p, j)];
                    a[(p, j)] = a[(c, j)];
                    a[(c, j)] = t;
                }
                det = -det;
            }
            let piv = a[(c, c)];
            det *= piv;
            for r in c + 1..n {
                let f = a[(r, c)] / piv;
                if f == ZERO {
                    continue;
                }
                for j in c..n {
                    let v = a[(c, j)];
                    a[(r, j)] -= f * v;
                }
            }
        }
        det
    }

    /// Solve A x = b by Gaussian elimination with partial pivoting. A pivot that is
    /// exactly zero is replaced by a tiny value, which is what inverse iteration wants.
    pub fn solve(&self, b: &CVec) -> CVec {
        let n = self.n;
        let mut a = self.clone();
        let mut x: Vec<C64> = b.as_slice().to_vec();
        let tiny = 1e-300_f64.max(self.max_abs() * 1e-18);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&u, &v| a[(u, c)].norm().total_cmp(&a[(v, c)].norm()))
                .unwrap();
            if p != c {
                for j in 0..n {
                    let t = a[(p, j)];
                    a[(p, j)] = a[(c, j)];
                    a[(c, j)] = t;
                }
                x.swap(p, c);
            }
            if a[(c, c)].norm() < tiny {
                a[(c, c)] = C64::new(tiny, 0.0);
            }
            let piv = a[(c, c)];
            for r in c + 1..n {
                let f = a[(r, c)] / piv;
                if f == ZERO {
                    continue;
                }
                for j in c..n {
                    let v = a[(c, j)];
                    a[(r, j)] -= f * v;
                }
                let xc = x[c];
                x[r] -= f * xc;
            }
        }
        for c in (0..n).rev() {
            let mut s = x[c];
            for j in c + 1..n {
                s -= a[(c, j)] * x[j];
            }
            x[c] = s / a[(c, c)];
        }
        CVec::new(x)
    }

    /// det(xI - A) via Faddeev-LeVerrier; ascending coefficients, monic.
    pub fn charpoly(&self) -> CPoly {
        let n = self.n;
        let mut c = vec![ZERO; n + 1];
        c[n] = ONE;
        let mut m = CMatrix::zeros(n);
        for j in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                next[(i, i)] += c[n - j + 1];
            }
            m = next;
            let am = self.mul(&m);
            c[n - j] = -am.trace() / j as f64;
        }
        CPoly::new(c)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == ZERO))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self[(i, j)] == ZERO))
    }

    /// Eigenvalues with multiplicity, sorted by descending modulus.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(self)
    }

    /// Unit (2-norm) eigenvector for an eigenvalue estimate, by inverse iteration.
    pub fn eigenvector(&self, lambda: C64) -> CVec {
        let n = self.n;
        let scale = self.max_abs().max(1.0);
        let shifted = self.sub(&CMatrix::identity(n).scale(lambda + C64::new(scale * 1e-14, 0.0)));
        let mut v = CVec::new(vec![ONE; n]);
        for _ in 0..4 {
            let w = shifted.solve(&v);
            let nv = w.norm2();
            v = w.scale(C64::new(1.0 / nv, 0.0));
        }
        // fix the phase: largest entry real positive
        let (jmax, _) = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let ph = v[jmax].conj() / v[jmax].norm();
        v.scale(ph)
    }
}

pub const MAX_EIGEN_DIM: usize = 8;

/// Eigenvalues of a small complex matrix: characteristic polynomial, then
/// simultaneous root iteration with Newton polishing. Triangular input is read off
/// the diagonal.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.dim();
    if n == 0 || n > MAX_EIGEN_DIM {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues supported for 1 <= k <= {MAX_EIGEN_DIM}, got {n}"
        )));
    }
    let mut ev: Vec<C64> = if m.is_upper_triangular() || m.is_lower_triangular() {
        (0..n).map(|i| m[(i, i)]).collect()
    } else {
        let p = m.charpoly();
        let roots = p.roots()?;
        let norm = m.norm_inf().max(f64::MIN_POSITIVE);
        let worst = roots
            .iter()
            .map(|&r| p.root_backward_error(r))
            .fold(0.0, f64::max);
        if worst > 1e-9 * norm.max(1.0) {
            return Err(Error::EigenNoConvergence { residual: worst });
        }
        roots
    };
    sort_by_modulus(&mut ev);
    Ok(ev)
}

/// Descending modulus; ties by descending real part, then descending imaginary part.
pub fn sort_by_modulus(v: &mut [C64]) {
    v.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}
