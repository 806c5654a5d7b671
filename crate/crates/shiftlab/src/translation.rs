//! Exact combinatorial model of the translation skeleton: the cells Y^n, the
//! translations P^n, the unit cells Delta(l), the limit maps S and T, the range
//! verdicts built on them, and the power-map range oracle.
//!
//! Everything except `thm11_oracle` is exact rational arithmetic. Only real parts
//! matter; imaginary parts ride along.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::f64::consts::PI;
use std::fmt::Write as _;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "a", "a/b" or a finite decimal like "-0.25".
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegionPoint {
    pub re: Vec<Q>,
    pub im: Vec<Q>,
}

impl RegionPoint {
    pub fn new(re: Vec<Q>, im: Vec<Q>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Dimension {
                expected: re.len(),
                got: im.len(),
            });
        }
        if re.len() < 2 {
            return Err(Error::InvalidArgument("need at least two coordinates".into()));
        }
        Ok(RegionPoint { re, im })
    }

    pub fn real(re: Vec<Q>) -> Result<Self> {
        let im = vec![Q::zero(); re.len()];
        RegionPoint::new(re, im)
    }

    pub fn from_ratios(re: &[(i64, i64)]) -> Result<Self> {
        RegionPoint::real(re.iter().map(|&(n, d)| qf(n, d)).collect())
    }

    pub fn k(&self) -> usize {
        self.re.len()
    }

    fn translated(&self, shift: &[Q]) -> RegionPoint {
        RegionPoint {
            re: self.re.iter().zip(shift).map(|(x, s)| x - s).collect(),
            im: self.im.clone(),
        }
    }

    pub fn min_re(&self) -> &Q {
        self.re.iter().min().unwrap()
    }

    pub fn max_re(&self) -> &Q {
        self.re.iter().max().unwrap()
    }

    pub fn to_f64(&self) -> Vec<C64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| C64::new(r.to_f64().unwrap_or(f64::NAN), i.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }
}

impl std::fmt::Display for RegionPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| if i.is_zero() { r.to_string() } else { format!("{r}{}{i}i", if i.is_negative() { "" } else { "+" }) })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum YIndex {
    Bits(Vec<u8>),
    Boundary,
}

/// Threshold the k-th real part is compared with in Y^n, given bit k-1.
fn last_threshold(n: i64, prev_bit: u8) -> Q {
    if prev_bit == 0 {
        q(n - 1)
    } else {
        q(n)
    }
}

pub fn y_index(z: &RegionPoint, n: i64) -> Result<YIndex> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
    }
    Ok(y_bits(&z.re, n))
}

fn y_bits(re: &[Q], n: i64) -> YIndex {
    let k = re.len();
    let nq = q(n);
    let mut bits = Vec::with_capacity(k);
    for x in &re[..k - 1] {
        if *x > nq {
            bits.push(1);
        } else if *x < nq {
            bits.push(0);
        } else {
            return YIndex::Boundary;
        }
    }
    let t = last_threshold(n, bits[k - 2]);
    if re[k - 1] > t {
        bits.push(1);
    } else if re[k - 1] < t {
        bits.push(0);
    } else {
        return YIndex::Boundary;
    }
    YIndex::Bits(bits)
}

/// (i_k, i_1, ..., i_{k-1}) as rationals.
fn rotated(bits: &[u8]) -> Vec<Q> {
    let k = bits.len();
    (0..k).map(|j| q(bits[(j + k - 1) % k] as i64)).collect()
}

pub fn apply_pn(z: &RegionPoint, n: i64) -> Result<RegionPoint> {
    match y_index(z, n)? {
        YIndex::Bits(b) => Ok(z.translated(&rotated(&b))),
        YIndex::Boundary => Err(Error::InvalidArgument(format!("{z} lies on a wall of Y^{n}"))),
    }
}

/// The unique w with P^n(w) = z, if any.
pub fn pn_inverse(z: &RegionPoint, n: i64) -> Result<Option<RegionPoint>> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
    }
    let k = z.k();
    if k > 20 {
        return Err(Error::Unsupported("inverse search over 2^k cells with k > 20".into()));
    }
    for pattern in 0u32..(1 << k) {
        let bits: Vec<u8> = (0..k).map(|j| ((pattern >> j) & 1) as u8).collect();
        let shift = rotated(&bits);
        let w = RegionPoint {
            re: z.re.iter().zip(&shift).map(|(x, s)| x + s).collect(),
            im: z.im.clone(),
        };
        if y_bits(&w.re, n) == YIndex::Bits(bits) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Index (l_1, ..., l_k) of the unit cell containing z and l_z = max l_j, or None on a wall.
pub fn delta_index(z: &RegionPoint) -> Option<(Vec<i64>, i64)> {
    let k = z.k();
    let mut l = Vec::with_capacity(k);
    for (j, x) in z.re.iter().enumerate() {
        let floor_cut = if j + 1 < k { q(1) } else { q(0) };
        if *x < floor_cut {
            l.push(if j + 1 < k { 1 } else { 0 });
        } else if x.is_integer() {
            return None;
        } else {
            l.push(x.floor().to_integer().to_i64()? + 1);
        }
    }
    let lz = *l.iter().max().unwrap();
    Some((l, lz))
}

/// Interval of real parts for coordinate j of Delta(l): (lo, hi) with None = -infinity.
fn delta_interval(j: usize, k: usize, l: i64) -> (Option<Q>, Q) {
    if j + 1 < k {
        if l <= 1 {
            (None, q(1))
        } else {
            (Some(q(l - 1)), q(l))
        }
    } else if l == 0 {
        (None, q(0))
    } else {
        (Some(q(l - 1)), q(l))
    }
}

/// S(z) = P^1 o ... o P^{l_z}(z).
pub fn apply_s(z: &RegionPoint) -> Result<RegionPoint> {
    let (_, lz) = delta_index(z).ok_or_else(|| Error::InvalidArgument(format!("{z} is not in any unit cell")))?;
    s_n(z, lz.max(1))
}

/// S_n(z) = P^1 o ... o P^n(z).
pub fn s_n(z: &RegionPoint, n: i64) -> Result<RegionPoint> {
    let mut w = z.clone();
    for m in (1..=n).rev() {
        w = apply_pn(&w, m)?;
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq)]
pub enum TResult {
    Preimage { w: RegionPoint, steps: i64 },
    NotInOmega { reason: String },
}

pub const DEFAULT_T_CAP: i64 = 100_000;

/// T = S^{-1} on Omega: apply (P^1)^{-1}, (P^2)^{-1}, ... until every real part is <= n,
/// then confirm by replaying S.
pub fn apply_t(z: &RegionPoint, cap: i64) -> Result<TResult> {
    let all_above = |w: &RegionPoint, n: i64| w.re.iter().all(|x| *x > q(n));
    let mut w = z.clone();
    if all_above(&w, 0) {
        return Ok(TResult::NotInOmega {
            reason: "all real parts positive".into(),
        });
    }
    for n in 1..=cap {
        w = match pn_inverse(&w, n)? {
            Some(w) => w,
            None => {
                return Ok(TResult::NotInOmega {
                    reason: format!("no preimage under P^{n}"),
                })
            }
        };
        if *w.max_re() <= q(n) {
            if delta_index(&w).is_none() {
                return Ok(TResult::NotInOmega {
                    reason: format!("candidate preimage {w} lies on a unit-cell wall"),
                });
            }
            if apply_s(&w)? != *z {
                return Ok(TResult::NotInOmega {
                    reason: "replay of S does not return the input".into(),
                });
            }
            return Ok(TResult::Preimage { w, steps: n });
        }
        if all_above(&w, n) {
            // from here every inverse step adds (1, ..., 1)
            return Ok(TResult::NotInOmega {
                reason: format!("inverse orbit enters Y^{}(1,...,1) at step {n}", n + 1),
            });
        }
    }
    Ok(TResult::NotInOmega {
        reason: format!("no stopping index below {cap}"),
    })
}

/// Max-norm real-part distance from z = S(w) to the walls of the translated cell
/// S(Delta(l_w)), which contains z and lies inside Omega. This bounds dist(z; A) from below.
pub fn omega_cell_margin(z: &RegionPoint, w: &RegionPoint) -> Result<Q> {
    let (l, _) = delta_index(w).ok_or_else(|| Error::InvalidArgument(format!("{w} is not in any unit cell")))?;
    let k = z.k();
    let mut best: Option<Q> = None;
    for j in 0..k {
        let shift = &w.re[j] - &z.re[j];
        let (lo, hi) = delta_interval(j, k, l[j]);
        let mut cand = vec![&hi - &shift - &z.re[j]];
        if let Some(lo) = lo {
            cand.push(&z.re[j] - (lo - &shift));
        }
        for c in cand {
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        }
    }
    Ok(best.unwrap())
}

/// Distance (real parts, any norm) from z to B, the union of the unit-cell walls.
pub fn dist_to_b(z: &RegionPoint) -> Q {
    let k = z.k();
    let mut best: Option<Q> = None;
    for (j, x) in z.re.iter().enumerate() {
        let first = if j + 1 < k { 1 } else { 0 };
        // nearest integer wall >= first
        let fl = x.floor();
        let mut cands = vec![];
        for c in [fl.clone(), fl + q(1)] {
            if c >= q(first) {
                cands.push((x - &c).abs());
            }
        }
        if cands.is_empty() {
            cands.push(q(first) - x);
        }
        for c in cands {
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        }
    }
    best.unwrap()
}

#[derive(Clone, Debug, PartialEq)]
pub enum RangeVerdict {
    NotInRange,
    InRange { witness: RegionPoint, margin: Q },
    Unknown { reason: String },
}

fn check_eps(eps: &Q) -> Result<()> {
    if !(eps.is_positive() && *eps < qf(1, 2)) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {eps}")));
    }
    Ok(())
}

/// Range verdict of the limit map at tolerance eps.
pub fn theta_a_range_oracle(z: &RegionPoint, eps: &Q) -> Result<RangeVerdict> {
    check_eps(eps)?;
    if z.re.iter().all(|x| x > eps) {
        return Ok(RangeVerdict::NotInRange);
    }
    match apply_t(z, DEFAULT_T_CAP)? {
        TResult::Preimage { w, .. } => {
            let margin = omega_cell_margin(z, &w)?;
            if margin > *eps {
                Ok(RangeVerdict::InRange { witness: w, margin })
            } else {
                Ok(RangeVerdict::Unknown {
                    reason: format!("distance to A only certified >= {margin}"),
                })
            }
        }
        TResult::NotInOmega { reason } => Ok(RangeVerdict::Unknown { reason }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetStep {
    pub n: i64,
    /// real-part radius of the box after this step
    pub radius: Q,
    /// smallest slack between the margin-inflated box and the walls of its Y^n cell
    pub wall_slack: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetReport {
    pub steps: Vec<BudgetStep>,
    pub center: RegionPoint,
    pub radius: Q,
    pub budget: Q,
    pub center_matches: bool,
    /// radius <= budget (the box is open, so this is the strict bound for the true orbit)
    pub within_budget: bool,
}

/// Interval model of the perturbed composition theta_1 o ... o theta_n with
/// |theta_m - P^m| < eps / 2^{m+1} on points at distance > eps / 2^{m+1} from the
/// walls of Y^m. Requires dist(z; B) > eps/2 - eps/2^{n+1}.
pub fn epsilon_budget(z: &RegionPoint, eps: &Q, n: i64) -> Result<BudgetReport> {
    check_eps(eps)?;
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
    }
    let pow2 = |m: i64| q(2).pow(m as i32);
    let budget = eps / q(2) - eps / pow2(n + 1);
    let d = dist_to_b(z);
    if d <= budget {
        return Err(Error::InvalidArgument(format!(
            "{z} is within {d} of a unit-cell wall; needs more than {budget}"
        )));
    }
    let k = z.k();
    let mut c = z.clone();
    let mut r = q(0);
    let mut steps = Vec::new();
    for m in (1..=n).rev() {
        let delta = eps / pow2(m + 1);
        let reach = &r + &delta;
        let bits = match y_bits(&c.re, m) {
            YIndex::Bits(b) => b,
            YIndex::Boundary => {
                return Err(Error::Certification(format!("box centre on a wall of Y^{m}")));
            }
        };
        // the inflated box must sit inside the same open cell as its centre
        let mut slack: Option<Q> = None;
        for j in 0..k {
            let t = if j + 1 < k { q(m) } else { last_threshold(m, bits[k - 2]) };
            let s = (&c.re[j] - &t).abs() - &reach;
            if slack.as_ref().is_none_or(|b| s < *b) {
                slack = Some(s);
            }
        }
        let slack = slack.unwrap();
        if !slack.is_positive() {
            return Err(Error::Certification(format!(
                "perturbation box at step {m} reaches a wall of Y^{m} (slack {slack})"
            )));
        }
        c = c.translated(&rotated(&bits));
        r = reach;
        steps.push(BudgetStep {
            n: m,
            radius: r.clone(),
            wall_slack: slack,
        });
    }
    let exact = s_n(z, n)?;
    Ok(BudgetReport {
        steps,
        center_matches: c == exact,
        within_budget: r <= budget,
        center: c,
        radius: r,
        budget,
    })
}

/// Text table of the walls of Y^n for audit.
pub fn y_walls_table(k: usize, n: i64) -> String {
    let mut s = String::from("coordinate,condition,wall\n");
    for j in 1..k {
        let _ = writeln!(s, "{j},always,Re z{j} = {n}");
    }
    let _ = writeln!(s, "{k},Re z{} < {n},Re z{k} = {}", k - 1, n - 1);
    let _ = writeln!(s, "{k},Re z{} > {n},Re z{k} = {n}", k - 1);
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Thm11Case {
    LastLarge,
    FirstLarge,
    MiddleLarge(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Thm11Verdict {
    Excluded,
    InRangeWitness {
        v: Vec<C64>,
        case: Thm11Case,
        /// number of preimages of u under the coordinatewise power map
        fibre_size: usize,
        fibre_bound: usize,
    },
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thm11Params {
    pub alpha: f64,
    pub m: f64,
    pub eps_theta: f64,
}

pub fn thm11_params(eps: f64, n: u32) -> Result<Thm11Params> {
    if !(eps > 0.0) || n < 2 {
        return Err(Error::InvalidArgument(format!("need eps > 0 and n >= 2, got eps={eps}, n={n}")));
    }
    let alpha = (1.0 + eps).powf(1.0 / n as f64) * (PI / n as f64).cos() - 1.0;
    if !(alpha > 0.0 && alpha < eps) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha:.6e} is not in (0, eps); n = {n} is too small for eps = {eps}"
        )));
    }
    let m = (alpha + eps + 2.0).ceil();
    Ok(Thm11Params {
        alpha,
        m,
        eps_theta: alpha / (2.0 * m),
    })
}

/// n-th root of e^{i theta} (|theta| <= pi) with real part >= 0 (principal) or <= 0
/// (the root whose argument is closest to pi).
fn unit_root(theta: f64, n: u32, nonneg: bool) -> C64 {
    if nonneg {
        return C64::from_polar(1.0, theta / n as f64);
    }
    (0..n)
        .map(|r| (theta + 2.0 * PI * r as f64) / n as f64)
        .max_by(|a, b| (-a.cos()).total_cmp(&(-b.cos())))
        .map(|a| C64::from_polar(1.0, a))
        .unwrap()
}

/// Range verdict for the power-map construction: Excluded on the closed unit polydisc,
/// a preimage v under psi (checked against the half-plane properties) when some
/// |u_j| >= 1 + eps, Unknown in between.
pub fn thm11_oracle(u: &[C64], eps: f64, n: u32) -> Result<Thm11Verdict> {
    let k = u.len();
    if k < 2 {
        return Err(Error::InvalidArgument("need at least two coordinates".into()));
    }
    let p = thm11_params(eps, n)?;
    let rho: Vec<f64> = u.iter().map(|z| z.norm()).collect();
    if rho.iter().all(|r| *r <= 1.0) {
        return Ok(Thm11Verdict::Excluded);
    }
    let big = |j: usize| rho[j] >= 1.0 + eps;
    let case = if big(k - 1) {
        Thm11Case::LastLarge
    } else if big(0) {
        Thm11Case::FirstLarge
    } else if let Some(j) = (1..k - 1).find(|&j| big(j)) {
        Thm11Case::MiddleLarge(j)
    } else {
        return Ok(Thm11Verdict::Unknown);
    };
    let root = |j: usize, nonneg: bool| {
        let th = if rho[j] == 0.0 { 0.0 } else { u[j].arg() };
        unit_root(th, n, nonneg) * rho[j].powf(1.0 / n as f64)
    };
    // which coordinates take the nonpositive root
    let negative: Vec<bool> = (0..k)
        .map(|j| match case {
            Thm11Case::LastLarge => false,
            Thm11Case::FirstLarge => j == k - 1,
            Thm11Case::MiddleLarge(l) => j < l || j == k - 1,
        })
        .collect();
    let v: Vec<C64> = (0..k).map(|j| root(j, !negative[j])).collect();
    check_thm11_witness(&v, u, case, n, &p)?;
    let fibre_size = u.iter().map(|z| if *z == C64::new(0.0, 0.0) { 1 } else { n as usize }).product();
    Ok(Thm11Verdict::InRangeWitness {
        v,
        case,
        fibre_size,
        fibre_bound: (n as usize).pow(k as u32),
    })
}

fn check_thm11_witness(v: &[C64], u: &[C64], case: Thm11Case, n: u32, p: &Thm11Params) -> Result<()> {
    const SLACK: f64 = 1e-12;
    let k = v.len();
    let hi = 1.0 + p.alpha;
    let lo = -p.m + 1.0 + p.alpha;
    let ge = |x: f64, b: f64| x >= b - SLACK;
    let le = |x: f64, b: f64| x <= b + SLACK;
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let ok = match case {
        Thm11Case::LastLarge => (0..k - 1).all(|j| ge(re[j], lo)) && ge(re[k - 1], hi),
        Thm11Case::FirstLarge => {
            ge(re[0], hi) && (1..k - 1).all(|j| ge(re[j], lo)) && ge(re[k - 1], lo) && le(re[k - 1], hi)
        }
        Thm11Case::MiddleLarge(l) => {
            (0..l).all(|i| ge(re[i], lo) && le(re[i], hi))
                && ge(re[l], hi)
                && (l + 1..k - 1).all(|j| ge(re[j], lo))
                && ge(re[k - 1], lo)
                && le(re[k - 1], hi)
        }
    };
    if !ok {
        return Err(Error::Certification(format!("witness {v:?} violates the half-plane conditions of {case:?}")));
    }
    for (vj, uj) in v.iter().zip(u) {
        let back = vj.powu(n);
        if (back - uj).norm() > 1e-10 * (1.0 + uj.norm()) {
            return Err(Error::Certification(format!("psi(v) = {back} differs from u = {uj}")));
        }
    }
    Ok(())
}

/// Translation vector (subtracted from z) of the idealised shift-like automorphism with
/// thresholds a, gaps delta and steps lambda, or None within delta of a wall.
///
/// Coordinate j >= 2 moves by lambda_j when Re z_{j-1} is high. Coordinate 1 moves by
/// lambda_1 when Re z_k clears a_k, or a_k - lambda_k if coordinate k itself did not move.
pub fn appendix_classify(re: &[Q], a: &[Q], delta: &Q, lambda: &[Q]) -> Result<Option<Vec<Q>>> {
    let k = re.len();
    if a.len() != k || lambda.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: a.len().min(lambda.len()),
        });
    }
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let side = |x: &Q, wall: &Q| -> Option<bool> {
        if *x >= wall + delta {
            Some(true)
        } else if *x <= wall - delta {
            Some(false)
        } else {
            None
        }
    };
    let mut out = vec![Q::zero(); k];
    let mut high = vec![false; k];
    for j in 1..k {
        match side(&re[j - 1], &a[j - 1]) {
            Some(h) => high[j] = h,
            None => return Ok(None),
        }
        if high[j] {
            out[j] = lambda[j].clone();
        }
    }
    let wall = if high[k - 1] { a[k - 1].clone() } else { &a[k - 1] - &lambda[k - 1] };
    match side(&re[k - 1], &wall) {
        Some(true) => out[0] = lambda[0].clone(),
        Some(false) => {}
        None => return Ok(None),
    }
    Ok(Some(out))
}
