//! Fixed points, saddle classification and the series parametrization of the
//! unstable manifold, H with F(H(t)) = H(lambda t).

use crate::algebra::{eigenvalues, CMatrix, CVec, VecSeries};
use crate::error::{Error, Result};
use crate::maps::ShiftComposition;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Starts per real axis for the Newton grid; above this many starts in total the
/// grid is replaced by seeded random starts.
const MAX_GRID_STARTS: usize = 20_000;

/// Newton's method on F(z) - z from a grid of starts in the polydisc-like box
/// |Re z_i|, |Im z_i| <= half_width. Results are deduplicated at 1e-6.
pub fn find_fixed_points(
    f: &ShiftComposition,
    half_width: f64,
    per_axis: usize,
    newton_tol: f64,
) -> Result<Vec<CVec>> {
    if !f.is_invertible_type() {
        return Err(Error::Unsupported("fixed point search needs type-1 factors".into()));
    }
    if per_axis == 0 || !(half_width > 0.0) {
        return Err(Error::InvalidArgument("empty search box".into()));
    }
    let k = f.k();
    let axis: Vec<f64> = if per_axis == 1 {
        vec![0.0]
    } else {
        (0..per_axis)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let total = (per_axis as f64).powi(2 * k as i32);
    let starts: Vec<CVec> = if total <= MAX_GRID_STARTS as f64 {
        let total = total as usize;
        (0..total)
            .map(|mut idx| {
                let mut v = Vec::with_capacity(k);
                for _ in 0..k {
                    let re = axis[idx % per_axis];
                    idx /= per_axis;
                    let im = axis[idx % per_axis];
                    idx /= per_axis;
                    v.push(C64::new(re, im));
                }
                CVec::new(v)
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..MAX_GRID_STARTS)
            .map(|_| {
                CVec::new(
                    (0..k)
                        .map(|_| {
                            C64::new(
                                rng.gen_range(-half_width..=half_width),
                                rng.gen_range(-half_width..=half_width),
                            )
                        })
                        .collect(),
                )
            })
            .collect()
    };
    let found: Vec<CVec> = starts
        .par_iter()
        .filter_map(|z0| newton_fixed(f, z0, newton_tol))
        .collect();
    let mut out: Vec<CVec> = Vec::new();
    for z in found {
        if !out.iter().any(|w| w.dist(&z) < 1e-6) {
            out.push(z);
        }
    }
    out.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn newton_fixed(f: &ShiftComposition, z0: &CVec, tol: f64) -> Option<CVec> {
    let k = f.k();
    let id = CMatrix::identity(k);
    let mut z = z0.clone();
    for _ in 0..60 {
        let g = &f.eval(&z) - &z;
        if !g.is_finite() {
            return None;
        }
        if g.norm() < tol * 1e-3 {
            break;
        }
        let j = f.jacobian(&z).sub(&id);
        let dz = j.solve(&g);
        z = &z - &dz;
        if !z.is_finite() || z.norm() > 1e12 {
            return None;
        }
    }
    (f.eval(&z).dist(&z) < tol).then_some(z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddlePoint {
    pub a: CVec,
    /// sorted by descending modulus
    pub eigenvalues: Vec<C64>,
    /// the expanding eigenvalue; present only when type_ok
    pub lambda: Option<C64>,
    pub type_ok: bool,
    /// min_i | |lambda_i| - 1 |
    pub margin: f64,
}

impl SaddlePoint {
    pub fn lambda(&self) -> Result<C64> {
        self.lambda
            .ok_or_else(|| Error::InvalidArgument("fixed point is not a (k-1,1) saddle".into()))
    }
}

pub fn classify_saddle(f: &ShiftComposition, a: &CVec) -> Result<SaddlePoint> {
    let res = f.eval(a).dist(a);
    if !(res < 1e-6 * a.norm().max(1.0)) {
        return Err(Error::InvalidArgument(format!(
            "point is not fixed (|F(a) - a| = {res:e})"
        )));
    }
    let ev = eigenvalues(&f.jacobian(a))?;
    let margin = ev
        .iter()
        .map(|e| (e.norm() - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let type_ok = ev[0].norm() > 1.0 && ev[1..].iter().all(|e| e.norm() < 1.0);
    Ok(SaddlePoint {
        a: a.clone(),
        lambda: type_ok.then_some(ev[0]),
        eigenvalues: ev,
        type_ok,
        margin,
    })
}

/// Contraction data in the auxiliary norm |z|_s = sum_i alpha_s^{-i} |A^i z|, A = T/s,
/// with s = |lambda|^{3/2}.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesDiagnostics {
    pub s: f64,
    pub alpha_s: f64,
    /// s / |lambda|^2
    pub contraction_bound: f64,
    /// sup over |t| = rho0 of |H_n - H_{n-1}|_s, n = 1, 2, ...
    pub difference_norms: Vec<f64>,
}

impl SeriesDiagnostics {
    /// Successive ratios of the difference norms while they stay above `floor`.
    pub fn ratios(&self, floor: f64) -> Vec<f64> {
        self.difference_norms
            .windows(2)
            .take_while(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnstableSeries {
    pub base: SaddlePoint,
    /// unitary Q; the last column is the unit expanding eigenvector
    pub frame: CMatrix,
    /// local series S with H(t) = a + Q S(t)
    pub series: VecSeries,
    pub rho0: f64,
    pub iterations: usize,
    pub diagnostics: Option<SeriesDiagnostics>,
}

/// Unitary frame with the expanding eigenvector last and Gram-Schmidt completions of
/// the standard basis in front. In it, T = Q^H DF Q has last column lambda e_k.
pub fn unstable_frame(jac: &CMatrix, lambda: C64) -> CMatrix {
    let k = jac.dim();
    let v = jac.eigenvector(lambda);
    let mut basis: Vec<CVec> = vec![v];
    let mut used = vec![false; k];
    while basis.len() < k {
        // the standard basis vector least aligned with what we have so far
        let (i, w) = (0..k)
            .filter(|&i| !used[i])
            .map(|i| {
                let mut w = CVec::unit(k, i);
                for b in &basis {
                    let c = b.dot_conj(&w);
                    w = &w - &b.scale(c);
                }
                (i, w)
            })
            .max_by(|x, y| x.1.norm2().total_cmp(&y.1.norm2()))
            .unwrap();
        used[i] = true;
        let n = w.norm2();
        basis.push(w.scale(C64::new(1.0 / n, 0.0)));
    }
    // second pass for orthogonality to rounding
    for idx in 1..basis.len() {
        let mut w = basis[idx].clone();
        for b in &basis[..idx] {
            let c = b.dot_conj(&w);
            w = &w - &b.scale(c);
        }
        let n = w.norm2();
        basis[idx] = w.scale(C64::new(1.0 / n, 0.0));
    }
    basis.rotate_left(1);
    CMatrix::from_columns(&basis)
}

fn apply_matrix(m: &CMatrix, s: &VecSeries) -> VecSeries {
    let k = s.k();
    let comps = s.components();
    let len = comps[0].len();
    let out = (0..k)
        .map(|i| {
            (0..len)
                .map(|j| (0..k).map(|l| m[(i, l)] * comps[l][j]).sum())
                .collect()
        })
        .collect();
    VecSeries::from_components(out)
}

/// F~(S) = Q^H (F(a + Q S) - a) on series.
fn local_map(f: &ShiftComposition, a: &CVec, q: &CMatrix, qh: &CMatrix, s: &VecSeries) -> VecSeries {
    let order = s.order();
    let global = VecSeries::constant(a, order).add(&apply_matrix(q, s));
    let img = f.map_series(&global).sub(&VecSeries::constant(a, order));
    apply_matrix(qh, &img)
}

fn local_point(f: &ShiftComposition, a: &CVec, q: &CMatrix, qh: &CMatrix, w: &CVec) -> CVec {
    let z = a + &q.mul_vec(w);
    qh.mul_vec(&(&f.eval(&z) - a))
}

const STABILIZE_TOL: f64 = 1e-12;
const RHO0_RESIDUAL: f64 = 1e-8;
const CIRCLE_SAMPLES: usize = 64;

/// Iterates S <- F~(S(t / lambda)) from (0, ..., 0, t) until no coefficient moves by
/// more than 1e-12 (relative to max(1, |c|)).
pub fn sternberg_series(
    f: &ShiftComposition,
    saddle: &SaddlePoint,
    order: usize,
    iters: usize,
) -> Result<UnstableSeries> {
    let lambda = saddle.lambda()?;
    if order < 1 {
        return Err(Error::InvalidArgument("series order must be >= 1".into()));
    }
    let k = f.k();
    let a = &saddle.a;
    let jac = f.jacobian(a);
    let q = unstable_frame(&jac, lambda);
    let qh = q.adjoint();
    let inv = lambda.inv();
    let mut s = VecSeries::last_coordinate_identity(k, order);
    let mut history = vec![s.clone()];
    let mut change = f64::INFINITY;
    let mut it = 0;
    while it < iters {
        it += 1;
        let scaled = crate::algebra::series_scale_arg(&s, inv)?;
        let mut next = local_map(f, a, &q, &qh, &scaled);
        next.set_coeff(0, &CVec::zeros(k));
        change = next.max_coeff_change(&s);
        s = next;
        history.push(s.clone());
        if change < STABILIZE_TOL {
            break;
        }
    }
    let lam_abs = lambda.norm();
    let s_param = lam_abs.powf(1.5);
    if change >= STABILIZE_TOL {
        return Err(Error::SeriesNoConvergence {
            iterations: it,
            last_change: change,
            ratio: s_param / (lam_abs * lam_abs),
        });
    }
    let mut out = UnstableSeries {
        base: saddle.clone(),
        frame: q,
        series: s,
        rho0: 0.0,
        iterations: it,
        diagnostics: None,
    };
    out.rho0 = choose_rho0(f, &out)?;
    let t_mat = qh.mul(&jac).mul(&out.frame);
    let alpha_s = (lam_abs / s_param + 1.0) / 2.0;
    let a_mat = t_mat.scale(C64::new(1.0 / s_param, 0.0));
    let difference_norms = history
        .windows(2)
        .map(|w| {
            let d = w[1].sub(&w[0]);
            circle(out.rho0)
                .map(|t| s_norm(&a_mat, alpha_s, &d.eval(t)))
                .fold(0.0, f64::max)
        })
        .collect();
    out.diagnostics = Some(SeriesDiagnostics {
        s: s_param,
        alpha_s,
        contraction_bound: s_param / (lam_abs * lam_abs),
        difference_norms,
    });
    Ok(out)
}

fn circle(r: f64) -> impl Iterator<Item = C64> {
    (0..CIRCLE_SAMPLES)
        .map(move |i| C64::from_polar(r, std::f64::consts::TAU * i as f64 / CIRCLE_SAMPLES as f64))
}

/// sum_i alpha^{-i} |A^i z| (max-norm), stopped once a term drops below 1e-15 of the sum.
pub fn s_norm(a_mat: &CMatrix, alpha: f64, z: &CVec) -> f64 {
    let mut v = z.clone();
    let mut w = 1.0;
    let mut total = 0.0;
    for _ in 0..10_000 {
        let term = w * v.norm();
        total += term;
        if term <= 1e-15 * total.max(f64::MIN_POSITIVE) || term == 0.0 {
            break;
        }
        v = a_mat.mul_vec(&v);
        w /= alpha;
    }
    total
}

/// Sup over |t| = r of |F(H(t / lambda)) - H(t)| with H the bare series.
fn series_defect(f: &ShiftComposition, h: &UnstableSeries, r: f64) -> f64 {
    let lambda = h.base.lambda.unwrap();
    let qh = h.frame.adjoint();
    circle(r)
        .map(|t| {
            let lhs = local_point(f, &h.base.a, &h.frame, &qh, &h.series.eval(t / lambda));
            let d = (&lhs - &h.series.eval(t)).norm();
            if d.is_nan() { f64::INFINITY } else { d }
        })
        .fold(0.0, f64::max)
}

fn choose_rho0(f: &ShiftComposition, h: &UnstableSeries) -> Result<f64> {
    // the defect is holomorphic in t, so the circle sup bounds the disc
    let mut best = None;
    for e in -30..=20 {
        let r = 2f64.powi(e);
        if series_defect(f, h, r) < RHO0_RESIDUAL {
            best = Some(r);
        } else if best.is_some() {
            break;
        }
    }
    best.ok_or_else(|| Error::Certification("no dyadic radius meets the series residual bound".into()))
}

/// H(t) = F^n(H(t / lambda^n)) with the least n >= 0 putting t / lambda^n in the disc rho0.
pub fn eval_unstable(h: &UnstableSeries, f: &ShiftComposition, t: C64) -> CVec {
    let lam = h.base.lambda.unwrap().norm();
    let mut n = 0;
    let mut r = t.norm();
    while r > h.rho0 {
        r /= lam;
        n += 1;
    }
    eval_unstable_with(h, f, t, n)
}

/// The same with an explicit push count; t / lambda^n need not lie in the disc rho0.
pub fn eval_unstable_with(h: &UnstableSeries, f: &ShiftComposition, t: C64, n: usize) -> CVec {
    let lambda = h.base.lambda.unwrap();
    push(h, f, t / lambda.powi(n as i32), n)
}

fn push(h: &UnstableSeries, f: &ShiftComposition, tau: C64, n: usize) -> CVec {
    let z = &h.base.a + &h.frame.mul_vec(&h.series.eval(tau));
    f.iterate(&z, n)
}

/// Max over sample points of |t| <= radius of |F(H(t)) - H(lambda t)| / (1 + |H(lambda t)|),
/// both sides through eval_unstable. Points lie on circles at radius * (i / rings).
pub fn conjugacy_residual(h: &UnstableSeries, f: &ShiftComposition, radius: f64, samples: usize) -> f64 {
    let lambda = h.base.lambda.unwrap();
    sample_disc(radius, samples)
        .par_iter()
        .map(|&t| {
            let rhs = eval_unstable(h, f, lambda * t);
            let lhs = f.eval(&eval_unstable(h, f, t));
            relative_gap(&lhs, &rhs)
        })
        .reduce(|| 0.0, f64::max)
}

/// The same quantity with both sides from the bare series (no pushing forward), which
/// measures the truncation error itself. Needs |lambda t| inside the series' reach.
pub fn series_residual(h: &UnstableSeries, f: &ShiftComposition, radius: f64, samples: usize) -> f64 {
    let lambda = h.base.lambda.unwrap();
    sample_disc(radius, samples)
        .par_iter()
        .map(|&t| {
            let rhs = &h.base.a + &h.frame.mul_vec(&h.series.eval(lambda * t));
            let lhs = f.eval(&(&h.base.a + &h.frame.mul_vec(&h.series.eval(t))));
            relative_gap(&lhs, &rhs)
        })
        .reduce(|| 0.0, f64::max)
}

fn relative_gap(lhs: &CVec, rhs: &CVec) -> f64 {
    let g = lhs.dist(rhs) / (1.0 + rhs.norm());
    if g.is_nan() {
        f64::INFINITY
    } else {
        g
    }
}

fn sample_disc(radius: f64, samples: usize) -> Vec<C64> {
    let samples = samples.max(1);
    let rings = ((samples as f64).sqrt().ceil() as usize).max(1);
    let per = samples.div_ceil(rings);
    let mut out = Vec::with_capacity(rings * per);
    for r in 1..=rings {
        let rad = radius * r as f64 / rings as f64;
        for i in 0..per {
            let th = std::f64::consts::TAU * (i as f64 + 0.5 * (r % 2) as f64) / per as f64;
            out.push(C64::from_polar(rad, th));
        }
    }
    out.truncate(samples);
    out
}

/// Points H(t) with |H(t)| <= max_norm, t drawn log-uniformly in modulus between
/// rho0 |lambda|^-2 and rho0 |lambda|^max_push and uniformly in angle.
pub fn sample_unstable_points(
    h: &UnstableSeries,
    f: &ShiftComposition,
    count: usize,
    max_norm: f64,
    max_push: u32,
    seed: u64,
) -> Vec<(C64, CVec)> {
    let lam = h.base.lambda.unwrap().norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let u = rng.gen_range(-2.0..max_push as f64);
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let t = C64::from_polar(h.rho0 * lam.powf(u), th);
        let z = eval_unstable(h, f, t);
        if z.is_finite() && z.norm() <= max_norm {
            out.push((t, z));
        }
    }
    out
}

impl UnstableSeries {
    pub fn lambda(&self) -> C64 {
        self.base.lambda.unwrap()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    /// Degree-1 coefficient in global coordinates, i.e. H'(0).
    pub fn tangent(&self) -> CVec {
        self.frame.mul_vec(&self.series.coeff(1))
    }

    /// Plain-text form; every float is written with its shortest round-trip digits.
    pub fn to_text(&self) -> String {
        let k = self.series.k();
        let mut s = String::from("unstable-series v1\n");
        let cv = |v: &[C64]| {
            v.iter()
                .map(|c| format!("{} {}", c.re, c.im))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "k {k}");
        let _ = writeln!(s, "order {}", self.order());
        let _ = writeln!(s, "a {}", cv(self.base.a.as_slice()));
        let _ = writeln!(s, "eigenvalues {}", cv(&self.base.eigenvalues));
        let _ = writeln!(s, "lambda {}", cv(&[self.lambda()]));
        let _ = writeln!(s, "margin {}", self.base.margin);
        let _ = writeln!(s, "rho0 {}", self.rho0);
        let _ = writeln!(s, "iterations {}", self.iterations);
        for i in 0..k {
            let row: Vec<C64> = (0..k).map(|j| self.frame[(i, j)]).collect();
            let _ = writeln!(s, "frame {}", cv(&row));
        }
        for j in 0..=self.order() {
            let _ = writeln!(s, "coeff {j} {}", cv(self.series.coeff(j).as_slice()));
        }
        s
    }

    /// Inverse of `to_text`. Diagnostics are not stored and come back as None.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("unstable-series v1") {
            return Err(Error::Parse("missing 'unstable-series v1' header".into()));
        }
        let mut k = None;
        let mut order = None;
        let mut a = None;
        let mut ev = None;
        let mut lambda = None;
        let mut margin = None;
        let mut rho0 = None;
        let mut iterations = None;
        let mut frame_rows: Vec<Vec<C64>> = Vec::new();
        let mut coeffs: Vec<(usize, Vec<C64>)> = Vec::new();
        for line in lines {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "k" => k = Some(parse_usize(rest)?),
                "order" => order = Some(parse_usize(rest)?),
                "a" => a = Some(parse_complexes(rest)?),
                "eigenvalues" => ev = Some(parse_complexes(rest)?),
                "lambda" => lambda = parse_complexes(rest)?.first().copied(),
                "margin" => margin = Some(parse_f64(rest)?),
                "rho0" => rho0 = Some(parse_f64(rest)?),
                "iterations" => iterations = Some(parse_usize(rest)?),
                "frame" => frame_rows.push(parse_complexes(rest)?),
                "coeff" => {
                    let (j, vals) = rest
                        .split_once(' ')
                        .ok_or_else(|| Error::Parse(format!("bad coeff line: {line}")))?;
                    coeffs.push((parse_usize(j)?, parse_complexes(vals)?));
                }
                _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("missing field '{name}'"));
        let k = k.ok_or_else(|| missing("k"))?;
        let order = order.ok_or_else(|| missing("order"))?;
        let a = a.ok_or_else(|| missing("a"))?;
        let ev = ev.ok_or_else(|| missing("eigenvalues"))?;
        let lambda = lambda.ok_or_else(|| missing("lambda"))?;
        if a.len() != k || ev.len() != k || frame_rows.len() != k || frame_rows.iter().any(|r| r.len() != k) {
            return Err(Error::Parse("field lengths disagree with k".into()));
        }
        if coeffs.len() != order + 1 || coeffs.iter().enumerate().any(|(i, (j, v))| i != *j || v.len() != k) {
            return Err(Error::Parse("coefficient list must run 0..=order in order".into()));
        }
        let series = VecSeries::from_coeffs(&coeffs.into_iter().map(|(_, v)| CVec::new(v)).collect::<Vec<_>>());
        Ok(UnstableSeries {
            base: SaddlePoint {
                a: CVec::new(a),
                eigenvalues: ev,
                lambda: Some(lambda),
                type_ok: true,
                margin: margin.ok_or_else(|| missing("margin"))?,
            },
            frame: CMatrix::from_rows(frame_rows),
            series,
            rho0: rho0.ok_or_else(|| missing("rho0"))?,
            iterations: iterations.ok_or_else(|| missing("iterations"))?,
            diagnostics: None,
        })
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number '{s}': {e}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("bad integer '{s}': {e}")))
}

fn parse_complexes(s: &str) -> Result<Vec<C64>> {
    let nums: Vec<f64> = s.split_whitespace().map(parse_f64).collect::<Result<_>>()?;
    if nums.len() % 2 != 0 {
        return Err(Error::Parse("odd number of reals in a complex list".into()));
    }
    Ok(nums.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

/// The expanding eigenvalue's unit eigenvector, phase-fixed as in `CMatrix::eigenvector`.
pub fn unstable_direction(f: &ShiftComposition, saddle: &SaddlePoint) -> Result<CVec> {
    Ok(f.jacobian(&saddle.a).eigenvector(saddle.lambda()?))
}
