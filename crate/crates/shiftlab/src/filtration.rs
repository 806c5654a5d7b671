//! Filtration regions, escape classification and the quantitative orbit estimates.

use crate::algebra::CVec;
use crate::error::{Error, Result};
use crate::maps::{bracket, ShiftComposition};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiltrationParams {
    pub r: f64,
    pub r_escape: f64,
    pub n_max: usize,
}

impl FiltrationParams {
    pub fn new(r: f64, r_escape: f64, n_max: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("R must be positive, got {r}")));
        }
        if !(r_escape >= r) {
            return Err(Error::InvalidArgument(format!(
                "R_escape = {r_escape} must be at least R = {r}"
            )));
        }
        Ok(FiltrationParams { r, r_escape, n_max })
    }

    /// R_escape = 10 R, N_max = 200.
    pub fn with_radius(r: f64) -> Result<Self> {
        FiltrationParams::new(r, 10.0 * r, 200)
    }
}

/// `Inner` is the polydisc V; `Side(i)` is V_i (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Inner,
    Side(usize),
}

impl Region {
    pub fn is_plus(self, k: usize) -> bool {
        self == Region::Side(k)
    }

    pub fn is_minus(self, k: usize) -> bool {
        matches!(self, Region::Side(i) if i != k)
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Inner => write!(f, "V"),
            Region::Side(i) => write!(f, "V_{i}"),
        }
    }
}

/// Ties for the max coordinate go to the largest index.
pub fn classify_point(z: &CVec, p: &FiltrationParams) -> Region {
    let norm = z.norm();
    if norm <= p.r {
        return Region::Inner;
    }
    let i = (0..z.len()).rev().find(|&i| z[i].norm() == norm).unwrap();
    Region::Side(i + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeResult {
    Bounded,
    Escaped(usize),
}

const CONFIRM_STEPS: usize = 3;
const FLIGHT_STEPS: usize = 200;

fn step(f: &ShiftComposition, z: &CVec, dir: Direction) -> Result<CVec> {
    match dir {
        Direction::Forward => Ok(f.eval(z)),
        Direction::Backward => f.eval_inverse(z),
    }
}

/// Escaped(n): n is the first iterate outside the R_escape ball after which the norm
/// grows for three more steps. An orbit still growing outside R at the cap is followed
/// until it settles, so raising R_escape cannot turn an escape into Bounded.
pub fn escape_test(
    f: &ShiftComposition,
    z: &CVec,
    p: &FiltrationParams,
    dir: Direction,
) -> Result<EscapeResult> {
    if z.len() != f.k() {
        return Err(Error::Dimension {
            expected: f.k(),
            got: z.len(),
        });
    }
    if dir == Direction::Backward && !f.is_invertible_type() {
        return Err(Error::Unsupported("backward escape needs type-1 factors".into()));
    }
    let mut w = z.clone();
    let mut prev = f64::NAN;
    let mut n = 0usize;
    loop {
        let norm = w.norm();
        if !w.is_finite() {
            return Ok(EscapeResult::Escaped(n));
        }
        let in_flight = n > p.n_max && norm > p.r && norm > prev;
        if n > p.n_max && !in_flight {
            return Ok(EscapeResult::Bounded);
        }
        if n > p.n_max + FLIGHT_STEPS {
            return Ok(EscapeResult::Bounded);
        }
        if norm > p.r_escape && confirm_growth(f, &w, dir)? {
            return Ok(EscapeResult::Escaped(n));
        }
        prev = norm;
        w = step(f, &w, dir)?;
        n += 1;
    }
}

fn confirm_growth(f: &ShiftComposition, z: &CVec, dir: Direction) -> Result<bool> {
    let mut w = z.clone();
    let mut last = w.norm();
    for _ in 0..CONFIRM_STEPS {
        w = step(f, &w, dir)?;
        if !w.is_finite() {
            return Ok(true);
        }
        let nn = w.norm();
        if nn <= last {
            return Ok(false);
        }
        last = nn;
    }
    Ok(true)
}

/// Indices D^l_i and the constants C_j(+-eps), kept in log form.
#[derive(Clone, Debug, PartialEq)]
pub struct Thm13Constants {
    pub eps: f64,
    pub m_bound: f64,
    pub k: usize,
    pub m: usize,
    pub d: u64,
    /// dli[i-1][l-1] for 1 <= i <= k, 1 <= l <= m-1
    pub dli: Vec<Vec<u64>>,
    /// indexed by j, entries 0 and 1 unused
    pub ln_c_plus: Vec<f64>,
    pub ln_c_minus: Vec<f64>,
}

impl Thm13Constants {
    pub fn d_li(&self, l: usize, i: usize) -> u64 {
        self.dli[i - 1][l - 1]
    }

    pub fn c_plus(&self, j: usize) -> f64 {
        self.ln_c_plus[j].exp()
    }

    pub fn c_minus(&self, j: usize) -> f64 {
        self.ln_c_minus[j].exp()
    }

    /// 1 + D^1_j + ... + D^{m-1}_j
    pub fn exponent(&self, j: usize) -> u64 {
        1 + self.dli[j - 1].iter().sum::<u64>()
    }
}

pub fn thm13_constants(f: &ShiftComposition, eps: f64, m_bound: f64) -> Result<Thm13Constants> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    if !(m_bound > 0.0) {
        return Err(Error::InvalidArgument(format!("M must be positive, got {m_bound}")));
    }
    let k = f.k();
    let m = f.m();
    let mi = m as i64;
    let ki = k as i64;
    let dli: Vec<Vec<u64>> = (1..=k)
        .map(|i| {
            let mut acc = 1u64;
            (1..m)
                .map(|l| {
                    let s = l as i64 - 1;
                    acc *= f.degree_at(mi - ki + i as i64 - s);
                    acc
                })
                .collect()
        })
        .collect();
    let mut c = Thm13Constants {
        eps,
        m_bound,
        k,
        m,
        d: f.degree(),
        dli,
        ln_c_plus: vec![0.0; k + 1],
        ln_c_minus: vec![0.0; k + 1],
    };
    for j in 2..=k {
        let e = c.exponent(j) as f64;
        c.ln_c_plus[j] = e * eps.ln_1p();
        c.ln_c_minus[j] = e * (-eps).ln_1p();
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub j: usize,
    pub n: usize,
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    /// positive when the inequality holds with room to spare
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport {
    /// backward orbit certified bounded
    pub precondition_ok: bool,
    pub rows: Vec<BoundRow>,
    /// iterate at which the orbit stopped being finite, if it did
    pub overflow_at: Option<usize>,
}

impl OrbitReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        bound_rows_csv(&self.rows)
    }
}

pub fn bound_rows_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("j,n,lhs,rhs,margin,pass\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.j, r.n, r.lhs, r.rhs, r.margin, r.pass);
    }
    s
}

const LOG_SLACK: f64 = 1e-9;

/// Both displayed growth inequalities in log space, for 2 <= j <= k and n <= n_max.
pub fn verify_orbit_bounds(
    f: &ShiftComposition,
    z: &CVec,
    c: &Thm13Constants,
    n_max: usize,
    p: &FiltrationParams,
) -> Result<OrbitReport> {
    let precondition_ok = escape_test(f, z, p, Direction::Backward)? == EscapeResult::Bounded;
    let k = f.k();
    let ln_m = c.m_bound.ln();
    let d = c.d as f64;
    let ln0: Vec<f64> = (0..k).map(|i| z[i].norm().ln()).collect();
    let mut rows = Vec::new();
    let mut overflow_at = None;
    let mut w = z.clone();
    for n in 0..=n_max {
        if n > 0 {
            w = f.eval(&w);
        }
        if !w.is_finite() {
            overflow_at = Some(n);
            break;
        }
        let dn = d.powi(n as i32);
        for j in 2..=k {
            let lz = w[j - 1].norm().ln();
            let lhs = lz;
            let rhs = dn * (c.ln_c_plus[j] + ln0[j - 1].max(ln_m));
            let margin = rhs - lhs;
            rows.push(row(j, n, BoundKind::Upper, lhs, rhs, margin));
            let lhs = lz.max(dn * (c.ln_c_minus[j] + ln_m));
            let rhs = dn * (c.ln_c_minus[j] + ln0[j - 1]);
            let margin = lhs - rhs;
            rows.push(row(j, n, BoundKind::Lower, lhs, rhs, margin));
        }
    }
    Ok(OrbitReport {
        precondition_ok,
        rows,
        overflow_at,
    })
}

fn row(j: usize, n: usize, kind: BoundKind, lhs: f64, rhs: f64, margin: f64) -> BoundRow {
    // -inf on either side (a zero coordinate) makes the inequality trivially true
    let margin = if margin.is_nan() { f64::INFINITY } else { margin };
    let tol = LOG_SLACK * lhs.abs().max(rhs.abs()).max(1.0);
    let pass = margin >= -tol;
    BoundRow {
        j,
        n,
        kind,
        lhs,
        rhs,
        margin,
        pass,
    }
}

/// Worst excess for one (part, coordinate) pair of the one-step estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma31Row {
    /// j in 1..=m; j = m is the statement on K^- itself
    pub part: usize,
    /// coordinate index i in 2..=k
    pub i: usize,
    pub exponent: u64,
    /// max of |z_i| - (1+eps)|z_{i-1}|^e
    pub upper_excess: f64,
    /// max of (1-eps)|z_{i-1}|^e - |z_i|, -inf when eps >= 1
    pub lower_excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma31Report {
    pub eps: f64,
    /// smallest M for the additive one-step estimates
    pub m_bound: f64,
    /// smallest M for the max-form steps
    /// |z_i| <= (1+eps) max(|z_{i-1}|, M)^e and max(|z_i|, (1-eps) M^e) >= (1-eps)|z_{i-1}|^e
    pub m_chain: f64,
    /// M to feed the orbit-growth bounds: the larger of the two above, and at least
    /// (1-eps)^{-1/(d_min-1)} so the iterated lower step does not lose ground
    pub m_theorem: f64,
    pub samples: usize,
    pub rows: Vec<Lemma31Row>,
}

impl Lemma31Report {
    /// M - worst excess, per row: (upper, lower)
    pub fn margins(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .map(|r| (self.m_bound - r.upper_excess, self.m_bound - r.lower_excess))
            .collect()
    }
}

pub const LEMMA31_M_CAP: f64 = 1e12;

/// The smallest M making the one-step estimates hold on every supplied point of K^-,
/// and on their images under the partial compositions G_1, ..., G_{m-1}. The minimum
/// over the sample is computed exactly rather than searched for.
pub fn verify_lemma31(
    f: &ShiftComposition,
    eps: f64,
    points: &[CVec],
) -> Result<Lemma31Report> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if points.is_empty() {
        return Err(Error::Certification("no K^- sample points supplied".into()));
    }
    let k = f.k();
    let m = f.m();
    let mut rows = Vec::new();
    let mut chain = f64::MIN_POSITIVE;
    for part in 1..=m {
        let g = f.partial_composition(part)?;
        let imgs: Vec<CVec> = if part == m {
            points.to_vec()
        } else {
            points.iter().map(|z| g.eval(z)).collect()
        };
        for i in 2..=k {
            let e = f.degree_at(part as i64 - k as i64 + i as i64);
            let mut up = f64::NEG_INFINITY;
            let mut lo = f64::NEG_INFINITY;
            for z in &imgs {
                let x = z[i - 2].norm();
                let a = x.powi(e as i32);
                let b = z[i - 1].norm();
                up = up.max(b - (1.0 + eps) * a);
                if b > (1.0 + eps) * a {
                    chain = chain.max((b / (1.0 + eps)).powf(1.0 / e as f64));
                }
                if eps < 1.0 {
                    lo = lo.max((1.0 - eps) * a - b);
                    if b < (1.0 - eps) * a {
                        chain = chain.max(x);
                    }
                }
            }
            rows.push(Lemma31Row {
                part,
                i,
                exponent: e,
                upper_excess: up,
                lower_excess: lo,
            });
        }
    }
    let worst = rows
        .iter()
        .map(|r| r.upper_excess.max(r.lower_excess))
        .fold(f64::NEG_INFINITY, f64::max);
    if !worst.is_finite() && worst != f64::NEG_INFINITY {
        return Err(Error::Certification(format!(
            "non-finite excess {worst} in one-step estimates"
        )));
    }
    let m_bound = worst.max(f64::MIN_POSITIVE);
    if m_bound > LEMMA31_M_CAP {
        return Err(Error::Certification(format!(
            "required M = {m_bound:e} exceeds cap {LEMMA31_M_CAP:e}"
        )));
    }
    let d_min = f.factors().iter().map(|g| g.degree()).min().unwrap_or(1);
    let floor = if eps < 1.0 && d_min >= 2 {
        (1.0 - eps).powf(-1.0 / (d_min as f64 - 1.0))
    } else {
        1.0
    };
    if !chain.is_finite() || chain > LEMMA31_M_CAP {
        return Err(Error::Certification(format!(
            "max-form M = {chain:e} not below cap {LEMMA31_M_CAP:e}"
        )));
    }
    Ok(Lemma31Report {
        eps,
        m_bound,
        m_chain: chain,
        m_theorem: m_bound.max(chain).max(floor),
        samples: points.len(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusScanRow {
    pub r: f64,
    pub accepted: usize,
    pub m_bound: Option<f64>,
}

/// For each R, keep the candidates whose backward orbit stays in the 10R ball for
/// n_max steps and certify M on them. Returns the rows and the smallest R certified.
pub fn lemma31_radius_scan(
    f: &ShiftComposition,
    eps: f64,
    radii: &[f64],
    n_max: usize,
    candidates: &[CVec],
) -> Result<(Vec<RadiusScanRow>, Option<f64>)> {
    let mut rows = Vec::new();
    let mut best: Option<f64> = None;
    for &r in radii {
        let p = FiltrationParams::new(r, 10.0 * r, n_max)?;
        let mut kept = Vec::new();
        for z in candidates {
            if escape_test(f, z, &p, Direction::Backward)? == EscapeResult::Bounded {
                kept.push(z.clone());
            }
        }
        let m_bound = if kept.is_empty() {
            None
        } else {
            verify_lemma31(f, eps, &kept).ok().map(|rep| rep.m_theorem)
        };
        if m_bound.is_some() {
            best = Some(best.map_or(r, |b: f64| b.min(r)));
        }
        rows.push(RadiusScanRow {
            r,
            accepted: kept.len(),
            m_bound,
        });
    }
    Ok((rows, best))
}

/// d_{[n]} as a plain function of the degree list, for callers holding only degrees.
pub fn degree_index(degrees: &[u64], n: i64) -> u64 {
    degrees[bracket(n, degrees.len()) - 1]
}
