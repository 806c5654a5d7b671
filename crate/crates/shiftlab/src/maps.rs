//! Shift-like factors F_i(z) = (z_2, ..., z_k, alpha_i z_1 + p_i(z_{k-nu+1})) and their compositions.

use crate::algebra::{series::scalar, CMatrix, CPoly, CVec, VecSeries};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftFactor {
    pub alpha: C64,
    pub p: CPoly,
    pub k: usize,
    /// shift type, 1 <= nu <= k-1
    pub nu: usize,
}

impl ShiftFactor {
    pub fn new(k: usize, alpha: C64, p: CPoly) -> Result<Self> {
        ShiftFactor::with_type(k, alpha, p, 1)
    }

    pub fn with_type(k: usize, alpha: C64, p: CPoly, nu: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
        }
        if alpha == C64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("alpha must be nonzero".into()));
        }
        if nu < 1 || nu > k - 1 {
            return Err(Error::InvalidArgument(format!(
                "shift type nu must lie in [1, {}], got {nu}",
                k - 1
            )));
        }
        Ok(ShiftFactor { alpha, p, k, nu })
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    /// 0-based index of the coordinate fed into p.
    fn src(&self) -> usize {
        self.k - self.nu
    }

    pub fn eval(&self, z: &CVec) -> CVec {
        let k = self.k;
        let mut out = Vec::with_capacity(k);
        out.extend_from_slice(&z.as_slice()[1..]);
        out.push(self.alpha * z[0] + self.p.eval(z[self.src()]));
        CVec::new(out)
    }

    pub fn eval_inverse(&self, w: &CVec) -> Result<CVec> {
        if self.nu != 1 {
            return Err(Error::Unsupported(format!(
                "inverse of a shift of type {} (only type 1 is invertible here)",
                self.nu
            )));
        }
        let k = self.k;
        let mut out = Vec::with_capacity(k);
        out.push((w[k - 1] - self.p.eval(w[k - 2])) / self.alpha);
        out.extend_from_slice(&w.as_slice()[..k - 1]);
        Ok(CVec::new(out))
    }

    pub fn jacobian(&self, z: &CVec) -> CMatrix {
        let k = self.k;
        let mut j = CMatrix::zeros(k);
        for i in 0..k - 1 {
            j[(i, i + 1)] = C64::new(1.0, 0.0);
        }
        j[(k - 1, 0)] += self.alpha;
        j[(k - 1, self.src())] += self.p.derivative().eval(z[self.src()]);
        j
    }

    pub fn map_series(&self, s: &VecSeries) -> VecSeries {
        let k = self.k;
        let comps = s.components();
        let n = comps[0].len();
        let arg = &comps[self.src()];
        // Horner in the series ring
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for &c in self.p.coeffs().iter().rev() {
            acc = scalar::mul(&acc, arg);
            acc[0] += c;
        }
        let last: Vec<C64> = acc
            .iter()
            .zip(&comps[0])
            .map(|(a, z1)| a + self.alpha * z1)
            .collect();
        let mut out: Vec<Vec<C64>> = comps[1..].to_vec();
        out.push(last);
        debug_assert_eq!(out.len(), k);
        VecSeries::from_components(out)
    }
}

/// F = F_m o ... o F_1, stored with F_1 (applied first) at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftComposition {
    factors: Vec<ShiftFactor>,
    k: usize,
}

impl ShiftComposition {
    /// Factors listed in application order: `factors[0]` is F_1.
    pub fn new(factors: Vec<ShiftFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("composition needs m >= 1 factors".into()));
        }
        let k = factors[0].k;
        if let Some(f) = factors.iter().find(|f| f.k != k) {
            return Err(Error::Dimension {
                expected: k,
                got: f.k,
            });
        }
        Ok(ShiftComposition { factors, k })
    }

    /// Factors listed as written in F = F_m o ... o F_1, outermost first.
    pub fn from_outermost_first(mut factors: Vec<ShiftFactor>) -> Result<Self> {
        factors.reverse();
        ShiftComposition::new(factors)
    }

    pub fn single(f: ShiftFactor) -> Self {
        let k = f.k;
        ShiftComposition { factors: vec![f], k }
    }

    /// k = 3, alpha = 1, p(z) = z^2 - 6: the running example throughout the tests.
    pub fn flagship() -> Self {
        ShiftComposition::single(
            ShiftFactor::new(3, C64::new(1.0, 0.0), CPoly::from_reals(&[-6.0, 0.0, 1.0])).unwrap(),
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[ShiftFactor] {
        &self.factors
    }

    /// F_i for 1 <= i <= m.
    pub fn factor(&self, i: usize) -> &ShiftFactor {
        &self.factors[i - 1]
    }

    pub fn degree(&self) -> u64 {
        self.factors.iter().map(|f| f.degree() as u64).product()
    }

    /// d_{[n]} with [n] taken in {1, ..., m}.
    pub fn degree_at(&self, n: i64) -> u64 {
        self.factor(bracket(n, self.m())).degree() as u64
    }

    pub fn is_invertible_type(&self) -> bool {
        self.factors.iter().all(|f| f.nu == 1)
    }

    pub fn det_jacobian(&self) -> C64 {
        let sign = if self.k % 2 == 0 { -1.0 } else { 1.0 };
        self.factors
            .iter()
            .map(|f| f.alpha * sign)
            .product()
    }

    pub fn eval(&self, z: &CVec) -> CVec {
        assert_eq!(z.len(), self.k, "dimension mismatch");
        let mut w = z.clone();
        for f in &self.factors {
            w = f.eval(&w);
        }
        w
    }

    pub fn eval_inverse(&self, w: &CVec) -> Result<CVec> {
        if w.len() != self.k {
            return Err(Error::Dimension {
                expected: self.k,
                got: w.len(),
            });
        }
        let mut z = w.clone();
        for f in self.factors.iter().rev() {
            z = f.eval_inverse(&z)?;
        }
        Ok(z)
    }

    pub fn iterate(&self, z: &CVec, n: usize) -> CVec {
        let mut w = z.clone();
        for _ in 0..n {
            w = self.eval(&w);
        }
        w
    }

    pub fn jacobian(&self, z: &CVec) -> CMatrix {
        let mut j = CMatrix::identity(self.k);
        let mut w = z.clone();
        for f in &self.factors {
            j = f.jacobian(&w).mul(&j);
            w = f.eval(&w);
        }
        j
    }

    /// G_j = F_j o ... o F_1.
    pub fn partial_composition(&self, j: usize) -> Result<ShiftComposition> {
        if j < 1 || j > self.m() {
            return Err(Error::InvalidArgument(format!(
                "partial composition index {j} outside 1..={}",
                self.m()
            )));
        }
        ShiftComposition::new(self.factors[..j].to_vec())
    }

    pub fn map_series(&self, s: &VecSeries) -> VecSeries {
        assert_eq!(s.k(), self.k, "series dimension mismatch");
        let mut out = s.clone();
        for f in &self.factors {
            out = f.map_series(&out);
        }
        out
    }

    /// Parse the plain-text map description (see `to_map_text`).
    pub fn parse_map_text(text: &str) -> Result<Self> {
        let mut k: Option<usize> = None;
        let mut pending: Vec<(Option<C64>, Option<CPoly>, usize)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", ln + 1)))?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "k" => {
                    k = Some(val.parse().map_err(|_| {
                        Error::Parse(format!("line {}: bad dimension {val:?}", ln + 1))
                    })?)
                }
                "alpha" => pending.push((Some(parse_complex(val)?), None, 1)),
                "p" => {
                    let cur = pending.last_mut().ok_or_else(|| {
                        Error::Parse(format!("line {}: p given before alpha", ln + 1))
                    })?;
                    cur.1 = Some(parse_poly(val)?);
                }
                "nu" => {
                    let cur = pending.last_mut().ok_or_else(|| {
                        Error::Parse(format!("line {}: nu given before alpha", ln + 1))
                    })?;
                    cur.2 = val
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad nu {val:?}", ln + 1)))?;
                }
                other => {
                    return Err(Error::Parse(format!("line {}: unknown key {other:?}", ln + 1)))
                }
            }
        }
        let k = k.ok_or_else(|| Error::Parse("missing k".into()))?;
        let mut factors = Vec::new();
        for (i, (alpha, p, nu)) in pending.into_iter().enumerate() {
            let p = p.ok_or_else(|| Error::Parse(format!("factor {} has no p", i + 1)))?;
            factors.push(ShiftFactor::with_type(k, alpha.unwrap(), p, nu)?);
        }
        ShiftComposition::new(factors)
    }

    pub fn to_map_text(&self) -> String {
        let mut s = format!("# F = F_m o ... o F_1, factors listed F_1 first\nk = {}\n", self.k);
        for f in &self.factors {
            s.push_str(&format!("alpha = {},{}\n", f.alpha.re, f.alpha.im));
            let cs: Vec<String> = f
                .p
                .coeffs()
                .iter()
                .map(|c| {
                    if c.im == 0.0 {
                        format!("{}", c.re)
                    } else {
                        format!("({},{})", c.re, c.im)
                    }
                })
                .collect();
            s.push_str(&format!("p = [{}]\n", cs.join(", ")));
            if f.nu != 1 {
                s.push_str(&format!("nu = {}\n", f.nu));
            }
        }
        s
    }
}

/// [n] = n mod m with representative in {1, ..., m}.
pub fn bracket(n: i64, m: usize) -> usize {
    ((n - 1).rem_euclid(m as i64) + 1) as usize
}

/// `re,im` or a bare real.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number {t:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(Error::Parse(format!("bad complex number {s:?}"))),
    }
}

/// `[c0, c1, ...]` where each entry is a real or `(re,im)`.
pub fn parse_poly(s: &str) -> Result<CPoly> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("polynomial must be [c0, c1, ...], got {s:?}")))?;
    let mut items = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch)
            }
            ')' => {
                depth -= 1;
                cur.push(ch)
            }
            ',' if depth == 0 => items.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        items.push(cur);
    }
    let coeffs = items
        .iter()
        .map(|t| parse_complex(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(CPoly::new(coeffs))
}

pub fn eval(f: &ShiftComposition, z: &CVec) -> CVec {
    f.eval(z)
}

pub fn eval_inverse(f: &ShiftComposition, w: &CVec) -> Result<CVec> {
    f.eval_inverse(w)
}

pub fn jacobian(f: &ShiftComposition, z: &CVec) -> CMatrix {
    f.jacobian(z)
}

pub fn partial_composition(f: &ShiftComposition, j: usize) -> Result<ShiftComposition> {
    f.partial_composition(j)
}

pub fn map_on_series(f: &ShiftComposition, s: &VecSeries) -> VecSeries {
    f.map_series(s)
}

fn gap(a: &CVec, b: &CVec) -> f64 {
    if a == b {
        return 0.0;
    }
    let d = a.dist(b);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Sampled estimate of d(f, g) = sum_n 2^{-n} d_n / (1 + d_n). The sup over the
/// closed polydisc of radius n is taken over quasi-random points of its distinguished
/// boundary |z_i| = n, where holomorphic maps attain it, so the result never exceeds
/// the true metric up to rounding.
pub fn auto_metric(
    f: &ShiftComposition,
    g: &ShiftComposition,
    terms: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if f.k() != g.k() {
        return Err(Error::Dimension {
            expected: f.k(),
            got: g.k(),
        });
    }
    if !f.is_invertible_type() || !g.is_invertible_type() {
        return Err(Error::Unsupported("metric needs invertible (type 1) factors".into()));
    }
    let k = f.k();
    let mut total = 0.0;
    for n in 1..=terms {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
        let r = n as f64;
        let mut dn: f64 = 0.0;
        for _ in 0..samples {
            let z = CVec::new(
                (0..k)
                    .map(|_| C64::from_polar(r, rng.gen::<f64>() * std::f64::consts::TAU))
                    .collect(),
            );
            dn = dn.max(gap(&f.eval(&z), &g.eval(&z)));
            dn = dn.max(gap(&f.eval_inverse(&z)?, &g.eval_inverse(&z)?));
        }
        let term = if dn.is_infinite() { 1.0 } else { dn / (1.0 + dn) };
        total += term / 2f64.powi(n as i32);
    }
    Ok(total)
}
