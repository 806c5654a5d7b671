//! Exact enclosure model of the strip construction: vertical strips V_l, disc lattices
//! D/E (radius 1/8) and their thickened versions (radius 1/4), the idealised step
//! functions f with their certified ranges, and escape/boundedness certificates for
//! inverse orbits of product regions.
//!
//! Coordinates are enclosed either by a closed disc (bounded regions) or by a vertical
//! band with possibly infinite real bounds (strips). Minkowski sums of discs are
//! discs, so the enclosures never lose precision.

use crate::error::{Error, Result};
use crate::translation::{q, qf, Q};
use num_traits::{Signed, ToPrimitive};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct StripConfig {
    pub a: Q,
    pub big_k: i64,
    pub m: Q,
    pub k: usize,
}

impl StripConfig {
    pub fn new(a: Q, big_k: i64, m: Q, k: usize) -> Result<Self> {
        if !a.is_positive() {
            return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
        }
        if big_k < 1 {
            return Err(Error::InvalidArgument(format!("K must be >= 1, got {big_k}")));
        }
        let need = q(2) * &a + q(4 * big_k + 5);
        if m <= need {
            return Err(Error::InvalidArgument(format!("M = {m} must exceed 2a + 4K + 5 = {need}")));
        }
        if k < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {k}")));
        }
        Ok(StripConfig { a, big_k, m, k })
    }

    /// a = 1, K = 1, M = 16, k = 3.
    pub fn standard() -> Self {
        StripConfig::new(q(1), 1, q(16), 3).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiscKind {
    D,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// V_l, l in -(K+1)..=K+1, V_0 the central strip
    V(i64),
    Disc { kind: DiscKind, n: i64, l: i64 },
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::V(l) => write!(f, "V{l}"),
            Region::Disc { kind, n, l } => write!(f, "{kind:?}[n={n},l={l}]"),
        }
    }
}

pub fn disc_center(p: &Q, kind: DiscKind, n: i64, l: i64) -> (Q, Q) {
    let x = p + qf(4 * l.abs() - 3, 2);
    let x = if l < 0 { -x } else { x };
    let y = match kind {
        DiscKind::D => q(2 * n),
        DiscKind::E => q(2 * n + 1),
    };
    (x, y)
}

pub const DISC_RADIUS: (i64, i64) = (1, 8);
pub const BARRED_RADIUS: (i64, i64) = (1, 4);

#[derive(Clone, Debug, PartialEq)]
pub struct PointClass {
    /// strip, or disc of radius 1/8
    pub region: Option<Region>,
    /// disc of radius 1/4 containing the point, if any
    pub barred: Option<Region>,
}

/// Region of the point re + i im for the family with parameter a + shift.
pub fn strip_classify(re: &Q, im: &Q, cfg: &StripConfig, shift: i64) -> PointClass {
    let p = &cfg.a + q(shift);
    let strip = strip_of_interval(&Some(re.clone()), &Some(re.clone()), &p, cfg.big_k);
    let disc_at = |radius: Q| {
        nearest_disc(re, im, &p, cfg.big_k).into_iter().find(|reg| {
            let Region::Disc { kind, n, l } = *reg else { return false };
            let (cx, cy) = disc_center(&p, kind, n, l);
            let d2 = (re - &cx) * (re - &cx) + (im - &cy) * (im - &cy);
            d2 < &radius * &radius
        })
    };
    let small = disc_at(qf(DISC_RADIUS.0, DISC_RADIUS.1));
    let barred = disc_at(qf(BARRED_RADIUS.0, BARRED_RADIUS.1));
    PointClass {
        region: strip.map(Region::V).or(small),
        barred,
    }
}

/// Candidate discs (one D, one E) nearest to a point.
fn nearest_disc(re: &Q, im: &Q, p: &Q, big_k: i64) -> Vec<Region> {
    let x = re.to_f64().unwrap_or(f64::NAN);
    let y = im.to_f64().unwrap_or(f64::NAN);
    let pf = p.to_f64().unwrap_or(f64::NAN);
    if !x.is_finite() || !y.is_finite() {
        return vec![];
    }
    let l = ((x.abs() - pf + 1.5) / 2.0).round() as i64;
    if l < 1 || l > big_k + 1 {
        return vec![];
    }
    let l = if x < 0.0 { -l } else { l };
    vec![
        Region::Disc {
            kind: DiscKind::D,
            n: (y / 2.0).round() as i64,
            l,
        },
        Region::Disc {
            kind: DiscKind::E,
            n: ((y - 1.0) / 2.0).round() as i64,
            l,
        },
    ]
}

/// Strip index containing the real interval [lo, hi] (None = infinite end).
fn strip_of_interval(lo: &Option<Q>, hi: &Option<Q>, p: &Q, big_k: i64) -> Option<i64> {
    let ge = |b: &Q| lo.as_ref().is_some_and(|x| x >= b);
    let le = |b: &Q| hi.as_ref().is_some_and(|x| x <= b);
    if ge(&-p.clone()) && le(p) {
        return Some(0);
    }
    for l in 1..=big_k {
        if ge(&(p + q(2 * l - 1))) && le(&(p + q(2 * l))) {
            return Some(l);
        }
        if ge(&-(p + q(2 * l))) && le(&-(p + q(2 * l - 1))) {
            return Some(-l);
        }
    }
    if ge(&(p + q(2 * big_k + 1))) {
        return Some(big_k + 1);
    }
    if le(&-(p + q(2 * big_k + 1))) {
        return Some(-(big_k + 1));
    }
    None
}

/// Enclosure of one coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum Coord {
    /// closed disc
    Disc { re: Q, im: Q, r: Q },
    /// vertical band lo <= Re <= hi, any imaginary part
    Band { lo: Option<Q>, hi: Option<Q> },
}

impl Coord {
    pub fn re_bounds(&self) -> (Option<Q>, Option<Q>) {
        match self {
            Coord::Disc { re, r, .. } => (Some(re - r), Some(re + r)),
            Coord::Band { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    pub fn contains(&self, x: &Q, y: &Q) -> bool {
        match self {
            Coord::Disc { re, im, r } => (x - re) * (x - re) + (y - im) * (y - im) <= r * r,
            Coord::Band { lo, hi } => lo.as_ref().is_none_or(|l| x >= l) && hi.as_ref().is_none_or(|h| x <= h),
        }
    }

    fn shifted(&self, c: &Q, rho: &Q) -> Coord {
        match self {
            Coord::Disc { re, im, r } => Coord::Disc {
                re: re + c,
                im: im.clone(),
                r: r + rho,
            },
            Coord::Band { lo, hi } => Coord::Band {
                lo: lo.as_ref().map(|x| x + c - rho),
                hi: hi.as_ref().map(|x| x + c + rho),
            },
        }
    }

    /// Radius for discs, half-width for bands (None if unbounded).
    pub fn size(&self) -> Option<Q> {
        match self {
            Coord::Disc { r, .. } => Some(r.clone()),
            Coord::Band { lo: Some(l), hi: Some(h) } => Some((h - l) / q(2)),
            _ => None,
        }
    }
}

/// Region whose f-bound applies to the whole enclosure at parameter p: a strip, or a
/// thickened disc (radius 1/4).
pub fn classify_coord(c: &Coord, p: &Q, big_k: i64) -> Option<Region> {
    let (lo, hi) = c.re_bounds();
    if let Some(l) = strip_of_interval(&lo, &hi, p, big_k) {
        return Some(Region::V(l));
    }
    let Coord::Disc { re, im, r } = c else { return None };
    let outer = qf(BARRED_RADIUS.0, BARRED_RADIUS.1) - r;
    if outer.is_negative() {
        return None;
    }
    nearest_disc(re, im, p, big_k).into_iter().find(|reg| {
        let Region::Disc { kind, n, l } = *reg else { return false };
        let (cx, cy) = disc_center(p, kind, n, l);
        let d2 = (re - &cx) * (re - &cx) + (im - &cy) * (im - &cy);
        d2 < &outer * &outer
    })
}

/// Certified range of f_{a+shift} on a region: centre and radius of a disc.
pub fn f_range(region: Region, cfg: &StripConfig, shift: i64) -> (Q, Q) {
    let small = q(2).pow(-(4 + shift as i32));
    match region {
        Region::V(0) => (q(0), small),
        Region::V(l) if l > 0 => (cfg.m.clone(), q(1)),
        Region::V(_) => (-cfg.m.clone(), q(1)),
        Region::Disc { kind: DiscKind::D, .. } => (cfg.m.clone(), q(1)),
        Region::Disc { kind: DiscKind::E, .. } => (q(0), small),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBox {
    pub coords: Vec<Coord>,
    /// number of steps taken; step i uses parameter a + 2i
    pub step: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: i64,
    /// region used for f at each evaluation, in evaluation order (coordinates 2..k, then new 1)
    pub regions: Vec<Region>,
    pub coords: Vec<Coord>,
}

/// One step of the inverse orbit: u_j <- u_j + f(u_{j+1}) for j < k using old values,
/// then u_k <- u_k + f(u_1) with the new u_1.
pub fn inverse_orbit_step(bx: &IntervalBox, cfg: &StripConfig) -> Result<(IntervalBox, StepRecord)> {
    let k = bx.coords.len();
    if k != cfg.k {
        return Err(Error::Dimension { expected: cfg.k, got: k });
    }
    let shift = 2 * bx.step;
    let p = &cfg.a + q(shift);
    let classify = |j: usize, c: &Coord| {
        classify_coord(c, &p, cfg.big_k).ok_or_else(|| {
            Error::Certification(format!(
                "coordinate {} straddles regions at step {} (enclosure {:?})",
                j + 1,
                bx.step,
                c
            ))
        })
    };
    let mut out = bx.coords.clone();
    let mut regions = Vec::with_capacity(k);
    for j in 0..k - 1 {
        let reg = classify(j + 1, &bx.coords[j + 1])?;
        let (c, rho) = f_range(reg, cfg, shift);
        out[j] = bx.coords[j].shifted(&c, &rho);
        regions.push(reg);
    }
    let reg = classify(0, &out[0])?;
    let (c, rho) = f_range(reg, cfg, shift);
    out[k - 1] = bx.coords[k - 1].shifted(&c, &rho);
    regions.push(reg);
    let next = IntervalBox {
        coords: out.clone(),
        step: bx.step + 1,
    };
    Ok((
        next,
        StepRecord {
            step: bx.step,
            regions,
            coords: out,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductFactor {
    Strip(i64),
    D { n: i64, l: i64 },
    E { n: i64, l: i64 },
}

/// Enclosure of a factor at parameter a.
pub fn initial_coord(f: ProductFactor, cfg: &StripConfig) -> Result<Coord> {
    let kk = cfg.big_k;
    let a = &cfg.a;
    let check_l = |l: i64| {
        if l == 0 || l.abs() > kk + 1 {
            Err(Error::InvalidArgument(format!("index l = {l} outside 1 <= |l| <= K+1")))
        } else {
            Ok(())
        }
    };
    match f {
        ProductFactor::Strip(l) => {
            check_l(l)?;
            let (lo, hi) = if l.abs() == kk + 1 {
                (Some(a + q(2 * kk + 1)), None)
            } else {
                (Some(a + q(2 * l.abs() - 1)), Some(a + q(2 * l.abs())))
            };
            Ok(if l > 0 {
                Coord::Band { lo, hi }
            } else {
                Coord::Band {
                    lo: hi.map(|x| -x),
                    hi: lo.map(|x| -x),
                }
            })
        }
        ProductFactor::D { n, l } | ProductFactor::E { n, l } => {
            check_l(l)?;
            let kind = if matches!(f, ProductFactor::D { .. }) { DiscKind::D } else { DiscKind::E };
            let (re, im) = disc_center(a, kind, n, l);
            Ok(Coord::Disc {
                re,
                im,
                r: qf(DISC_RADIUS.0, DISC_RADIUS.1),
            })
        }
    }
}

pub fn initial_box(factors: &[ProductFactor], cfg: &StripConfig) -> Result<IntervalBox> {
    if factors.len() != cfg.k {
        return Err(Error::Dimension {
            expected: cfg.k,
            got: factors.len(),
        });
    }
    Ok(IntervalBox {
        coords: factors.iter().map(|f| initial_coord(*f, cfg)).collect::<Result<_>>()?,
        step: 0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeCertificate {
    /// +1 escape to Re -> +infinity, -1 to -infinity
    pub direction: i64,
    /// after step i: min over coordinates of direction * (real-part lower end)
    pub bounds: Vec<Q>,
    /// smallest per-step increase of the bound (>= M - 1 for a valid certificate)
    pub min_increment: Q,
    pub records: Vec<StepRecord>,
}

/// Inverse orbits of the product escape: after each step all coordinates lie in
/// V_{+-(K+1)} at the next parameter, and the real-part bound grows by at least M - 1
/// per step while the parameter grows by 2, so the orbit leaves every compact set.
pub fn verify_escape(factors: &[ProductFactor], cfg: &StripConfig, steps: usize) -> Result<EscapeCertificate> {
    if factors.iter().any(|f| matches!(f, ProductFactor::E { .. })) {
        return Err(Error::InvalidArgument("escape certificates take strips and D discs only".into()));
    }
    let mut bx = initial_box(factors, cfg)?;
    let mut bounds = Vec::with_capacity(steps);
    let mut records = Vec::with_capacity(steps);
    let mut direction = 0;
    let mut min_inc: Option<Q> = None;
    let mut prev: Option<Q> = None;
    for _ in 0..steps {
        let (next, rec) = inverse_orbit_step(&bx, cfg)?;
        bx = next;
        let p = &cfg.a + q(2 * bx.step);
        let edge = &p + q(2 * cfg.big_k + 1);
        let lows: Vec<Option<Q>> = bx.coords.iter().map(|c| c.re_bounds().0).collect();
        let highs: Vec<Option<Q>> = bx.coords.iter().map(|c| c.re_bounds().1).collect();
        let all_right = lows.iter().all(|l| l.as_ref().is_some_and(|x| *x >= edge));
        let all_left = highs.iter().all(|h| h.as_ref().is_some_and(|x| *x <= -edge.clone()));
        let dir = if all_right {
            1
        } else if all_left {
            -1
        } else {
            return Err(Error::Certification(format!(
                "after step {} the coordinates are not all in V_(+-(K+1)) at parameter {p}",
                bx.step
            )));
        };
        if direction != 0 && dir != direction {
            return Err(Error::Certification("escape direction flipped".into()));
        }
        direction = dir;
        let bound = if dir > 0 {
            lows.iter().map(|l| l.clone().unwrap()).min().unwrap()
        } else {
            highs.iter().map(|h| -h.clone().unwrap()).min().unwrap()
        };
        if let Some(pb) = &prev {
            let inc = &bound - pb;
            if min_inc.as_ref().is_none_or(|m| inc < *m) {
                min_inc = Some(inc);
            }
        }
        prev = Some(bound.clone());
        bounds.push(bound);
        records.push(rec);
    }
    let min_increment = min_inc.unwrap_or_else(|| cfg.m.clone() - q(1));
    if min_increment < &cfg.m - q(1) {
        return Err(Error::Certification(format!(
            "bound grew by only {min_increment} in one step (needs M - 1)"
        )));
    }
    Ok(EscapeCertificate {
        direction,
        bounds,
        min_increment,
        records,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedCertificate {
    /// max |l_j| of the product
    pub ladder: i64,
    /// 1: all |l_j| = 1 (real parts stay within a + 2); 2: disc ladder first
    pub case: u8,
    /// largest |Re| over all coordinates and steps
    pub max_abs_re: Q,
    /// largest enclosure radius over all steps, and its a priori cap 1/8 + sum 2^{-(4+2m)}
    pub max_radius: Q,
    pub radius_cap: Q,
    /// uniform bound on |u_j^n| over all steps (floating point, rounded up)
    pub modulus_bound: f64,
    pub records: Vec<StepRecord>,
}

/// Inverse orbits of an E-disc product stay bounded: every evaluation sees a V_0 or
/// thickened E region (|f| tiny), enclosure radii stay below 1/8 + 1/12 < 1/4, and in the
/// all-|l| = 1 case real parts stay within a + 2.
pub fn verify_bounded(discs: &[(i64, i64)], cfg: &StripConfig, steps: usize) -> Result<BoundedCertificate> {
    let factors: Vec<ProductFactor> = discs.iter().map(|&(n, l)| ProductFactor::E { n, l }).collect();
    let mut bx = initial_box(&factors, cfg)?;
    let ladder = discs.iter().map(|(_, l)| l.abs()).max().unwrap_or(0);
    let case = if ladder == 1 { 1 } else { 2 };
    let radius_cap = qf(1, 8) + qf(1, 12);
    let mut max_abs_re = q(0);
    let mut max_radius = qf(1, 8);
    let mut modulus: f64 = 0.0;
    let mut records = Vec::with_capacity(steps);
    let track = |bx: &IntervalBox, max_abs_re: &mut Q, max_radius: &mut Q, modulus: &mut f64| {
        for c in &bx.coords {
            if let Coord::Disc { re, im, r } = c {
                let m = re.abs() + r;
                if m > *max_abs_re {
                    *max_abs_re = m;
                }
                if r > max_radius {
                    *max_radius = r.clone();
                }
                let f = |x: &Q| x.to_f64().unwrap_or(f64::INFINITY);
                *modulus = modulus.max(f(re).hypot(f(im)) + f(r));
            }
        }
    };
    track(&bx, &mut max_abs_re, &mut max_radius, &mut modulus);
    for _ in 0..steps {
        let (next, rec) = inverse_orbit_step(&bx, cfg)?;
        if let Some(bad) = rec
            .regions
            .iter()
            .find(|r| !matches!(r, Region::V(0) | Region::Disc { kind: DiscKind::E, .. }))
        {
            return Err(Error::Certification(format!(
                "step {} evaluates f on {bad}, outside the small-f regime",
                rec.step
            )));
        }
        bx = next;
        track(&bx, &mut max_abs_re, &mut max_radius, &mut modulus);
        records.push(rec);
    }
    if max_radius >= radius_cap {
        return Err(Error::Certification(format!("enclosure radius {max_radius} reached the cap {radius_cap}")));
    }
    if case == 1 && max_abs_re > &cfg.a + q(2) {
        return Err(Error::Certification(format!("real part {max_abs_re} exceeds a + 2")));
    }
    Ok(BoundedCertificate {
        ladder,
        case,
        max_abs_re,
        max_radius,
        radius_cap,
        modulus_bound: modulus * (1.0 + 1e-12),
        records,
    })
}

/// CSV rows step,coordinate,lo,hi,region for a run of step records.
pub fn records_csv(records: &[StepRecord]) -> String {
    let mut s = String::from("step,coordinate,lo,hi,region\n");
    let show = |x: &Option<Q>, inf: &str| x.as_ref().map(|v| v.to_string()).unwrap_or_else(|| inf.to_string());
    for r in records {
        for (j, c) in r.coords.iter().enumerate() {
            let (lo, hi) = c.re_bounds();
            // region that drove coordinate j: f was evaluated on coordinate j+1 (old), or new u_1 for j = k-1
            let reg = r.regions[j];
            let _ = writeln!(s, "{},{},{},{},{}", r.step + 1, j + 1, show(&lo, "-inf"), show(&hi, "inf"), reg);
        }
    }
    s
}

/// Sum_{m >= 0} 2^{-(4+2m)} = 1/12.
pub fn ladder_series_sum() -> Q {
    qf(1, 12)
}
