//! Escape-rate function G+, its pullback u+ = G+ o H, and finite-window
//! order/type estimates for entire data.

use crate::algebra::CVec;
use crate::error::{Error, Result};
use crate::maps::ShiftComposition;
use crate::unstable::{eval_unstable, UnstableSeries};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenParams {
    pub r_escape: f64,
    pub n_max: usize,
    pub tail_tol: f64,
}

impl GreenParams {
    pub fn new(r_escape: f64, n_max: usize, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tail_tol must be positive, got {tail_tol}")));
        }
        if !(r_escape > 0.0) {
            return Err(Error::InvalidArgument(format!("R_escape must be positive, got {r_escape}")));
        }
        Ok(GreenParams {
            r_escape,
            n_max,
            tail_tol,
        })
    }
}

impl Default for GreenParams {
    fn default() -> Self {
        GreenParams {
            r_escape: 40.0,
            n_max: 200,
            tail_tol: 1e-12,
        }
    }
}

/// Past this norm one more iterate would only test the float range.
const HUGE: f64 = 1e100;

/// d^{-n} log+ |F^n(z)|, iterated until the increment drops below
/// tail_tol * max(1, g). Zero when the orbit never leaves the R_escape ball in N_max steps.
pub fn green_plus(f: &ShiftComposition, z: &CVec, gp: &GreenParams) -> f64 {
    let d = f.degree() as f64;
    let mut w = z.clone();
    let mut n = 0usize;
    let mut escaped = false;
    let mut scale = 1.0;
    let mut g = 0.0;
    loop {
        let norm = w.norm();
        if !norm.is_finite() {
            return g;
        }
        let g_new = scale * norm.ln().max(0.0);
        if !escaped && norm > gp.r_escape {
            escaped = true;
        } else if escaped && ((g_new - g).abs() < gp.tail_tol * g_new.max(1.0)) {
            return g_new;
        }
        g = g_new;
        if escaped && norm > HUGE {
            return g;
        }
        if !escaped && n >= gp.n_max {
            return 0.0;
        }
        w = f.eval(&w);
        n += 1;
        scale /= d;
    }
}

/// G- through the inverse map; degree of F^{-1} on the escaping side equals d.
pub fn green_minus(f: &ShiftComposition, z: &CVec, gp: &GreenParams) -> Result<f64> {
    let d = f.degree() as f64;
    let mut w = z.clone();
    let mut scale = 1.0;
    let mut g = 0.0;
    let mut escaped = false;
    for n in 0.. {
        let norm = w.norm();
        if !norm.is_finite() {
            return Ok(g);
        }
        let g_new = scale * norm.ln().max(0.0);
        if !escaped && norm > gp.r_escape {
            escaped = true;
        } else if escaped && (g_new - g).abs() < gp.tail_tol * g_new.max(1.0) {
            return Ok(g_new);
        }
        g = g_new;
        if escaped && norm > HUGE {
            return Ok(g);
        }
        if !escaped && n >= gp.n_max {
            return Ok(0.0);
        }
        w = f.eval_inverse(&w)?;
        scale /= d;
    }
    unreachable!()
}

/// u+(t) = G+(H(t)). If the forward push inside eval_unstable would overflow, the
/// remaining pushes are folded into the factor d^{remaining}.
pub fn u_plus(f: &ShiftComposition, h: &UnstableSeries, t: C64, gp: &GreenParams) -> f64 {
    let lam = h.lambda().norm();
    let mut n = 0usize;
    let mut r = t.norm();
    while r > h.rho0 {
        r /= lam;
        n += 1;
    }
    let tau = t / h.lambda().powi(n as i32);
    let mut z = eval_unstable(h, f, tau);
    let d = f.degree() as f64;
    for i in 0..n {
        if z.norm() > HUGE.sqrt() || !z.is_finite() {
            return d.powi((n - i) as i32) * green_plus(f, &z, gp);
        }
        z = f.eval(&z);
    }
    green_plus(f, &z, gp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSample {
    pub radii: Vec<f64>,
    /// log of the circle maximum of |g| (or the maximum itself for log-type data)
    pub logmax: Vec<f64>,
}

impl GrowthSample {
    pub fn new(radii: Vec<f64>, logmax: Vec<f64>) -> Result<Self> {
        if radii.len() != logmax.len() {
            return Err(Error::InvalidArgument("radii and logmax lengths differ".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidArgument("radii must be positive and strictly increasing".into()));
        }
        Ok(GrowthSample { radii, logmax })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,logmax\n");
        for (r, l) in self.radii.iter().zip(&self.logmax) {
            let _ = writeln!(s, "{r},{l}");
        }
        s
    }

    /// Circle maxima of a real-valued (already logarithmic) function.
    pub fn from_log_fn<G>(radii: &[f64], angles: usize, g: G) -> Result<Self>
    where
        G: Fn(C64) -> f64 + Sync,
    {
        let logmax = radii.iter().map(|&r| circle_max(r, angles, &g)).collect();
        GrowthSample::new(radii.to_vec(), logmax)
    }

    /// log of circle maxima of |g| for complex-valued g.
    pub fn from_abs_fn<G>(radii: &[f64], angles: usize, g: G) -> Result<Self>
    where
        G: Fn(C64) -> C64 + Sync,
    {
        GrowthSample::from_log_fn(radii, angles, |t| g(t).norm().ln())
    }
}

pub const DEFAULT_ANGLES: usize = 256;

pub fn circle_max<G>(r: f64, angles: usize, g: &G) -> f64
where
    G: Fn(C64) -> f64 + Sync,
{
    (0..angles.max(1))
        .into_par_iter()
        .map(|i| {
            let v = g(C64::from_polar(r, std::f64::consts::TAU * i as f64 / angles as f64));
            if v.is_nan() { f64::NEG_INFINITY } else { v }
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Largest relative change of the circle maxima when the angle count is doubled.
pub fn angle_doubling_change<G>(radii: &[f64], angles: usize, g: G) -> f64
where
    G: Fn(C64) -> f64 + Sync,
{
    radii
        .iter()
        .map(|&r| {
            let a = circle_max(r, angles, &g);
            let b = circle_max(r, 2 * angles, &g);
            (b - a).abs() / a.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    pub rho: f64,
    /// rms residual of the fit in log-log coordinates
    pub residual: f64,
    /// number of radii that entered the fit
    pub used: usize,
}

fn top_half(gs: &GrowthSample) -> (Vec<f64>, Vec<f64>) {
    let n = gs.radii.len();
    let start = n / 2;
    (gs.radii[start..].to_vec(), gs.logmax[start..].to_vec())
}

fn check_window(gs: &GrowthSample) -> Result<()> {
    let n = gs.radii.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!("need >= 8 radii, got {n}")));
    }
    if gs.radii[n - 1] / gs.radii[0] < 1e3 * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument("radii must span at least 3 decades".into()));
    }
    Ok(())
}

/// Least-squares slope of log(logmax) against log r over the upper half of the window.
pub fn order_estimate(gs: &GrowthSample) -> Result<OrderEstimate> {
    check_window(gs)?;
    let (r, l) = top_half(gs);
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(&l)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&r, &v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two usable radii in the upper window".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(OrderEstimate {
        rho: slope,
        residual,
        used: pts.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeTrend {
    /// ratio falling across the window: rho too large, type tends to 0
    Decaying,
    /// ratio rising: rho too small, type tends to infinity
    Growing,
    Steady,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeEstimate {
    pub sigma: f64,
    pub trend: TypeTrend,
    /// 0 < sigma < inf with a steady ratio over the window
    pub mean_type: bool,
    pub window: (f64, f64),
}

/// max over the upper half of the window of logmax(r) / r^rho, with a trend flag from
/// comparing the first and last ratios in that half.
pub fn type_estimate(gs: &GrowthSample, rho: f64) -> Result<TypeEstimate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let (r, l) = top_half(gs);
    if r.is_empty() {
        return Err(Error::InvalidArgument("empty growth sample".into()));
    }
    let ratios: Vec<f64> = r.iter().zip(&l).map(|(r, l)| l / r.powf(rho)).collect();
    let sigma = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = ratios[0];
    let last = *ratios.last().unwrap();
    let trend = if last < 0.5 * first {
        TypeTrend::Decaying
    } else if last > 2.0 * first {
        TypeTrend::Growing
    } else {
        TypeTrend::Steady
    };
    Ok(TypeEstimate {
        sigma,
        trend,
        mean_type: trend == TypeTrend::Steady && sigma > 0.0 && sigma.is_finite(),
        window: (r[0], *r.last().unwrap()),
    })
}

/// log d / log |lambda|
pub fn predicted_order(f: &ShiftComposition, h: &UnstableSeries) -> f64 {
    (f.degree() as f64).ln() / h.lambda().norm().ln()
}

/// Radii |lambda|^j for j in lo..=hi.
pub fn lambda_radii(h: &UnstableSeries, lo: i32, hi: i32) -> Vec<f64> {
    let lam = h.lambda().norm();
    (lo..=hi).map(|j| lam.powi(j)).collect()
}

pub fn u_plus_growth(
    f: &ShiftComposition,
    h: &UnstableSeries,
    radii: &[f64],
    angles: usize,
    gp: &GreenParams,
) -> Result<GrowthSample> {
    GrowthSample::from_log_fn(radii, angles, |t| u_plus(f, h, t, gp))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentTable {
    pub rho: f64,
    /// alpha[i-1][j] is the type at rho of log|pi_i G_j H|, 1 <= i <= k, 0 <= j <= m
    pub alpha: Vec<Vec<f64>>,
    /// max relative gap in alpha_i^j = alpha_{i+1}^{j-1}
    pub shift_gap: f64,
    /// alpha_1^m / (d alpha_1^0)
    pub closure_ratio: f64,
}

impl ExponentTable {
    pub fn closure_ok(&self, tol: f64) -> bool {
        (self.closure_ratio - 1.0).abs() <= tol
    }

    pub fn all_positive_finite(&self) -> bool {
        self.alpha.iter().flatten().all(|a| *a > 0.0 && a.is_finite())
    }
}

/// Types of the coordinate functions of G_j o H at rho = log d / log|lambda|.
pub fn growth_exponents(
    f: &ShiftComposition,
    h: &UnstableSeries,
    radii: &[f64],
    angles: usize,
) -> Result<ExponentTable> {
    let k = f.k();
    let m = f.m();
    let rho = predicted_order(f, h);
    let partials: Vec<ShiftComposition> = (1..=m).map(|j| f.partial_composition(j)).collect::<Result<_>>()?;
    let mut alpha = vec![vec![0.0; m + 1]; k];
    for j in 0..=m {
        for i in 0..k {
            let g = |t: C64| {
                let z = eval_unstable(h, f, t);
                let w = if j == 0 { z } else { partials[j - 1].eval(&z) };
                w[i]
            };
            let gs = GrowthSample::from_abs_fn(radii, angles, g)?;
            alpha[i][j] = type_estimate(&gs, rho)?.sigma;
        }
    }
    let mut shift_gap: f64 = 0.0;
    for j in 1..=m {
        for i in 0..k - 1 {
            let a = alpha[i][j];
            let b = alpha[i + 1][j - 1];
            shift_gap = shift_gap.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    let closure_ratio = alpha[0][m] / (f.degree() as f64 * alpha[0][0]);
    Ok(ExponentTable {
        rho,
        alpha,
        shift_gap,
        closure_ratio,
    })
}
