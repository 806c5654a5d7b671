use super::cvec::CVec;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);

pub const DEFAULT_ORDER: usize = 40;

/// Truncated scalar series helpers; coefficient j multiplies t^j, length N+1.
pub mod scalar {
    use super::*;

    pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
        let n = a.len();
        debug_assert_eq!(n, b.len());
        let mut out = vec![ZERO; n];
        for (i, x) in a.iter().enumerate() {
            if *x == ZERO {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(n - i) {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn eval(a: &[C64], t: C64) -> C64 {
        a.iter().rev().fold(ZERO, |acc, &c| acc * t + c)
    }
}

/// Truncated power series with C^k coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct VecSeries {
    k: usize,
    /// comps[i][j] = coefficient of t^j in coordinate i
    comps: Vec<Vec<C64>>,
}

impl VecSeries {
    pub fn zero(k: usize, order: usize) -> Self {
        VecSeries {
            k,
            comps: vec![vec![ZERO; order + 1]; k],
        }
    }

    /// (0,...,0,t)
    pub fn last_coordinate_identity(k: usize, order: usize) -> Self {
        let mut s = VecSeries::zero(k, order);
        if order >= 1 {
            s.comps[k - 1][1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn constant(v: &CVec, order: usize) -> Self {
        let mut s = VecSeries::zero(v.len(), order);
        for i in 0..v.len() {
            s.comps[i][0] = v[i];
        }
        s
    }

    pub fn from_coeffs(coeffs: &[CVec]) -> Self {
        assert!(!coeffs.is_empty());
        let k = coeffs[0].len();
        assert!(coeffs.iter().all(|c| c.len() == k));
        let comps = (0..k)
            .map(|i| coeffs.iter().map(|c| c[i]).collect())
            .collect();
        VecSeries { k, comps }
    }

    pub fn from_components(comps: Vec<Vec<C64>>) -> Self {
        let k = comps.len();
        assert!(k >= 2);
        let n = comps[0].len();
        assert!(n >= 1 && comps.iter().all(|c| c.len() == n));
        VecSeries { k, comps }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.comps[0].len() - 1
    }

    pub fn component(&self, i: usize) -> &[C64] {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Vec<C64>] {
        &self.comps
    }

    pub fn coeff(&self, j: usize) -> CVec {
        CVec::new(self.comps.iter().map(|c| c[j]).collect())
    }

    pub fn set_coeff(&mut self, j: usize, v: &CVec) {
        for i in 0..self.k {
            self.comps[i][j] = v[i];
        }
    }

    pub fn coeffs(&self) -> Vec<CVec> {
        (0..=self.order()).map(|j| self.coeff(j)).collect()
    }

    pub fn eval(&self, t: C64) -> CVec {
        CVec::new(self.comps.iter().map(|c| scalar::eval(c, t)).collect())
    }

    pub fn add(&self, other: &VecSeries) -> VecSeries {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VecSeries) -> VecSeries {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> VecSeries {
        VecSeries {
            k: self.k,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|x| x * s).collect())
                .collect(),
        }
    }

    /// Coordinatewise truncated product.
    pub fn mul(&self, other: &VecSeries) -> VecSeries {
        self.check(other);
        VecSeries {
            k: self.k,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| scalar::mul(a, b))
                .collect(),
        }
    }

    /// Largest coefficient change |c_j - c'_j| / max(1, |c_j|) over all degrees.
    pub fn max_coeff_change(&self, other: &VecSeries) -> f64 {
        self.check(other);
        let mut worst: f64 = 0.0;
        for j in 0..=self.order() {
            let a = self.coeff(j);
            let b = other.coeff(j);
            worst = worst.max(a.dist(&b) / a.norm().max(1.0));
        }
        worst
    }

    fn zip(&self, other: &VecSeries, f: impl Fn(C64, C64) -> C64) -> VecSeries {
        self.check(other);
        VecSeries {
            k: self.k,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    fn check(&self, other: &VecSeries) {
        assert_eq!(self.k, other.k, "series dimension mismatch");
        assert_eq!(self.order(), other.order(), "series order mismatch");
    }
}

/// t -> mu t substitution: coefficient j is multiplied by mu^j.
pub fn series_scale_arg(s: &VecSeries, mu: C64) -> Result<VecSeries> {
    if mu == ZERO {
        return Err(Error::InvalidArgument("series_scale_arg: mu = 0".into()));
    }
    let mut out = s.clone();
    let mut pw = C64::new(1.0, 0.0);
    for j in 0..=s.order() {
        for i in 0..s.k {
            out.comps[i][j] = s.comps[i][j] * pw;
        }
        pw *= mu;
    }
    Ok(out)
}
