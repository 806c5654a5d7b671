use num_complex::Complex64 as C64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

/// A point of C^k. The canonical norm is the max-norm.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(Vec<C64>);

impl CVec {
    pub fn new(entries: Vec<C64>) -> Self {
        assert!(entries.len() >= 2, "CVec needs k >= 2, got {}", entries.len());
        CVec(entries)
    }

    pub fn zeros(k: usize) -> Self {
        CVec::new(vec![C64::new(0.0, 0.0); k])
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        CVec::new(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Basis vector e_j (0-based).
    pub fn unit(k: usize, j: usize) -> Self {
        let mut v = CVec::zeros(k);
        v.0[j] = C64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    /// max_i |z_i|
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &CVec) -> f64 {
        (self - other).norm()
    }

    pub fn scale(&self, s: C64) -> CVec {
        CVec(self.0.iter().map(|z| z * s).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dot_conj(&self, other: &CVec) -> C64 {
        // <self, other> = sum conj(self_i) other_i
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

impl Index<usize> for CVec {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &CVec {
    type Output = CVec;
    fn add(self, rhs: &CVec) -> CVec {
        assert_eq!(self.len(), rhs.len());
        CVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVec {
    type Output = CVec;
    fn sub(self, rhs: &CVec) -> CVec {
        assert_eq!(self.len(), rhs.len());
        CVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<C64> for &CVec {
    type Output = CVec;
    fn mul(self, s: C64) -> CVec {
        self.scale(s)
    }
}

impl std::fmt::Display for CVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if z.im == 0.0 {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, ")")
    }
}
