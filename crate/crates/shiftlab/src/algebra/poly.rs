use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Dense polynomial in one complex variable, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    coeffs: Vec<C64>,
}

impl CPoly {
    /// Trailing zero coefficients are dropped so the degree is well defined.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == C64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        CPoly { coeffs }
    }

    pub fn from_reals(cs: &[f64]) -> Self {
        CPoly::new(cs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        CPoly::new(vec![])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Degree of the zero polynomial is reported as 0; see `is_zero`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C64::new(0.0, 0.0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> CPoly {
        if self.coeffs.len() <= 1 {
            return CPoly::zero();
        }
        CPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| c * j as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        CPoly::new(
            (0..n)
                .map(|j| {
                    self.coeffs.get(j).copied().unwrap_or(zero)
                        + other.coeffs.get(j).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &CPoly) -> CPoly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }

    pub fn scale(&self, s: C64) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Relative backward error of `z` as a root: |p(z)| / sum |c_i| |z|^i.
    pub fn root_backward_error(&self, z: C64) -> f64 {
        let r = z.norm();
        let scale = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm());
        if scale == 0.0 {
            return 0.0;
        }
        self.eval(z).norm() / scale
    }

    /// All roots with multiplicity (Aberth-Ehrlich iteration, then Newton polishing).
    pub fn roots(&self) -> Result<Vec<C64>> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("roots of the zero polynomial".into()));
        }
        let mut cs = self.coeffs.clone();
        let mut roots = Vec::new();
        // exact zero roots first
        while cs.len() > 1 && cs[0] == C64::new(0.0, 0.0) {
            cs.remove(0);
            roots.push(C64::new(0.0, 0.0));
        }
        let p = CPoly::new(cs);
        let n = p.degree();
        match n {
            0 => {}
            1 => roots.push(-p.coeffs[0] / p.coeffs[1]),
            2 => {
                let (c, b, a) = (p.coeffs[0], p.coeffs[1], p.coeffs[2]);
                let disc = (b * b - a * c * 4.0).sqrt();
                // pick the sign that avoids cancellation
                let q = if (b.conj() * disc).re >= 0.0 {
                    -(b + disc) * 0.5
                } else {
                    -(b - disc) * 0.5
                };
                if q == C64::new(0.0, 0.0) {
                    roots.push(C64::new(0.0, 0.0));
                    roots.push(C64::new(0.0, 0.0));
                } else {
                    roots.push(q / a);
                    roots.push(c / q);
                }
            }
            _ => roots.extend(p.aberth()?),
        }
        Ok(roots)
    }

    fn aberth(&self) -> Result<Vec<C64>> {
        let n = self.degree();
        let lead = self.coeffs[n];
        // Fujiwara-type bound for the starting circle
        let mut radius: f64 = 0.0;
        for j in 0..n {
            let v = (self.coeffs[j] / lead).norm().powf(1.0 / (n - j) as f64);
            radius = radius.max(v);
        }
        let radius = radius.max(1e-3);
        let mut z: Vec<C64> = (0..n)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64 + 0.4;
                C64::from_polar(radius, th)
            })
            .collect();
        let mut converged = false;
        for _ in 0..1000 {
            let mut max_step: f64 = 0.0;
            for j in 0..n {
                let (pv, dpv) = self.eval_with_derivative(z[j]);
                if pv == C64::new(0.0, 0.0) {
                    continue;
                }
                let ratio = pv / dpv;
                let mut s = C64::new(0.0, 0.0);
                for i in 0..n {
                    if i != j {
                        s += C64::new(1.0, 0.0) / (z[j] - z[i]);
                    }
                }
                let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
                if !(w.re.is_finite() && w.im.is_finite()) {
                    continue;
                }
                z[j] -= w;
                max_step = max_step.max(w.norm() / z[j].norm().max(1.0));
            }
            if max_step < 1e-15 {
                converged = true;
                break;
            }
        }
        // Newton polish; keep a step only if it lowers |p|
        for r in z.iter_mut() {
            for _ in 0..5 {
                let (pv, dpv) = self.eval_with_derivative(*r);
                if dpv == C64::new(0.0, 0.0) {
                    break;
                }
                let cand = *r - pv / dpv;
                if self.eval(cand).norm() < pv.norm() {
                    *r = cand;
                } else {
                    break;
                }
            }
        }
        let worst = z
            .iter()
            .map(|&r| self.root_backward_error(r))
            .fold(0.0, f64::max);
        if !converged && worst > 1e-9 {
            return Err(Error::EigenNoConvergence { residual: worst });
        }
        Ok(z)
    }
}

pub fn poly_eval(p: &CPoly, z: C64) -> C64 {
    p.eval(z)
}
