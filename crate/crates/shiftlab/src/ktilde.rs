//! Pixel charts of K~ = {t : u+(t) = 0} in the unstable parameter plane, complement
//! components, their rotation under t -> lambda t, access paths, and the
//! Yoccoz-type inequality.

use crate::error::{Error, Result};
use crate::green::{u_plus, GreenParams};
use crate::maps::ShiftComposition;
use crate::unstable::UnstableSeries;
use num_complex::Complex64 as C64;
use num_integer::Integer;
use rayon::prelude::*;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

pub const DEFAULT_THRESHOLD: f64 = 1e-6;

/// Square chart of side 2R centred at 0. Pixel (row, col) has centre
/// ((col - n/2) h, (n/2 - row) h) with h = 2R/n, so the origin is a pixel centre.
#[derive(Clone, Debug, PartialEq)]
pub struct KtildeChart {
    pub radius: f64,
    pub n: usize,
    /// row-major, true = K~ pixel
    pub mask: Vec<bool>,
    /// 0 on K~ pixels, complement components numbered from 1 in row-major order of
    /// their first pixel
    pub labels: Vec<u32>,
    pub components: usize,
    /// indexed by label - 1
    pub touches_boundary: Vec<bool>,
    pub threshold: f64,
    pub lambda: C64,
    pub d: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    RowMajor,
    ColumnMajor,
    Reverse,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// 4-connected labelling of the pixels where `select` holds. Labels are canonical
/// (row-major order of first pixel), so the result does not depend on `order`.
pub fn label_pixels(select: &[bool], n: usize, order: ScanOrder) -> (Vec<u32>, usize) {
    assert_eq!(select.len(), n * n);
    let mut uf = UnionFind::new(n * n);
    let visit: Box<dyn Iterator<Item = usize>> = match order {
        ScanOrder::RowMajor => Box::new(0..n * n),
        ScanOrder::ColumnMajor => Box::new((0..n).flat_map(move |c| (0..n).map(move |r| r * n + c))),
        ScanOrder::Reverse => Box::new((0..n * n).rev()),
    };
    for idx in visit {
        if !select[idx] {
            continue;
        }
        let (r, c) = (idx / n, idx % n);
        if c + 1 < n && select[idx + 1] {
            uf.union(idx, idx + 1);
        }
        if r + 1 < n && select[idx + n] {
            uf.union(idx, idx + n);
        }
        if c > 0 && select[idx - 1] {
            uf.union(idx, idx - 1);
        }
        if r > 0 && select[idx - n] {
            uf.union(idx, idx - n);
        }
    }
    let mut labels = vec![0u32; n * n];
    let mut canon: HashMap<usize, u32> = HashMap::new();
    for idx in 0..n * n {
        if select[idx] {
            let root = uf.find(idx);
            let next = canon.len() as u32 + 1;
            labels[idx] = *canon.entry(root).or_insert(next);
        }
    }
    (labels, canon.len())
}

impl KtildeChart {
    /// Chart from a precomputed mask; labels the complement.
    pub fn from_mask(mask: Vec<bool>, n: usize, radius: f64, lambda: C64, d: u64, threshold: f64) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("resolution must be even and positive, got {n}")));
        }
        if mask.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: mask.len(),
            });
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("chart radius must be positive".into()));
        }
        let complement: Vec<bool> = mask.iter().map(|m| !m).collect();
        let (labels, components) = label_pixels(&complement, n, ScanOrder::RowMajor);
        let mut touches_boundary = vec![false; components];
        for i in 0..n {
            for idx in [i, (n - 1) * n + i, i * n, i * n + n - 1] {
                if labels[idx] > 0 {
                    touches_boundary[labels[idx] as usize - 1] = true;
                }
            }
        }
        Ok(KtildeChart {
            radius,
            n,
            mask,
            labels,
            components,
            touches_boundary,
            threshold,
            lambda,
            d,
        })
    }

    /// Synthetic chart from a predicate on t.
    pub fn from_fn<P>(n: usize, radius: f64, lambda: C64, d: u64, in_k: P) -> Result<Self>
    where
        P: Fn(C64) -> bool + Sync,
    {
        let h = 2.0 * radius / n as f64;
        let mask: Vec<bool> = (0..n * n)
            .into_par_iter()
            .map(|idx| in_k(pixel_center_of(idx, n, h)))
            .collect();
        KtildeChart::from_mask(mask, n, radius, lambda, d, DEFAULT_THRESHOLD)
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.radius / self.n as f64
    }

    pub fn center(&self, idx: usize) -> C64 {
        pixel_center_of(idx, self.n, self.pixel_size())
    }

    pub fn pixel_of(&self, t: C64) -> Option<usize> {
        let h = self.pixel_size();
        let half = (self.n / 2) as f64;
        let col = (t.re / h + half).round();
        let row = (half - t.im / h).round();
        if col < 0.0 || row < 0.0 || col >= self.n as f64 || row >= self.n as f64 {
            return None;
        }
        Some(row as usize * self.n + col as usize)
    }

    pub fn origin_pixel(&self) -> usize {
        (self.n / 2) * self.n + self.n / 2
    }

    pub fn label_at(&self, t: C64) -> Option<u32> {
        self.pixel_of(t).map(|i| self.labels[i])
    }

    pub fn in_ktilde(&self, t: C64) -> Option<bool> {
        self.pixel_of(t).map(|i| self.mask[i])
    }

    pub fn ktilde_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }

    /// Complement labels met by the circle |t| = r, in order of first hit going
    /// counterclockwise from angle 0, with the hit angle.
    pub fn circle_order(&self, r: f64) -> Vec<(u32, f64)> {
        let samples = 8 * self.n;
        let mut seen: Vec<(u32, f64)> = Vec::new();
        for i in 0..samples {
            let th = TAU * i as f64 / samples as f64;
            if let Some(l) = self.label_at(C64::from_polar(r, th)) {
                if l > 0 && !seen.iter().any(|(x, _)| *x == l) {
                    seen.push((l, th));
                }
            }
        }
        seen
    }

    /// q': complement components meeting the circle of half the chart radius.
    pub fn qprime(&self) -> usize {
        self.circle_order(self.radius / 2.0).len()
    }

    /// Witness point of component `label`: the middle of its longest arc on the circle
    /// |t| = min(R/2, 0.8 R/|lambda|), so that lambda times it stays in the chart. Falls
    /// back to the pixel with the largest |t| subject to |lambda t| <= 0.9 R.
    pub fn witness(&self, label: u32) -> Option<C64> {
        let r = (0.5 * self.radius).min(0.8 * self.radius / self.lambda.norm());
        let samples = 8 * self.n;
        let hit: Vec<bool> = (0..samples)
            .map(|i| self.label_at(C64::from_polar(r, TAU * i as f64 / samples as f64)) == Some(label))
            .collect();
        if hit.iter().all(|b| *b) {
            return Some(C64::new(r, 0.0));
        }
        if let Some(start) = (0..samples).find(|&i| !hit[i]) {
            // longest circular run of hits, scanning from a miss
            let (mut best, mut best_len, mut run_start, mut len) = (0, 0, 0, 0);
            for j in 1..=samples {
                let i = (start + j) % samples;
                if hit[i] {
                    if len == 0 {
                        run_start = start + j;
                    }
                    len += 1;
                    if len > best_len {
                        best_len = len;
                        best = run_start;
                    }
                } else {
                    len = 0;
                }
            }
            if best_len > 0 {
                let mid = (best as f64 + (best_len - 1) as f64 / 2.0) / samples as f64;
                let t = C64::from_polar(r, TAU * mid);
                if self.label_at(t) == Some(label) {
                    return Some(t);
                }
            }
        }
        let lim = 0.9 * self.radius / self.lambda.norm();
        (0..self.n * self.n)
            .filter(|&i| self.labels[i] == label)
            .map(|i| self.center(i))
            .filter(|t| t.norm() <= lim)
            .max_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())))
    }

    /// PGM (P5) bytes: 0 on K~, label value on the complement. Fails past 255 labels.
    pub fn to_pgm(&self) -> Result<Vec<u8>> {
        if self.components > 255 {
            return Err(Error::Unsupported(format!(
                "{} complement components do not fit one byte per pixel",
                self.components
            )));
        }
        let pixels: Vec<u8> = self.labels.iter().map(|&l| l as u8).collect();
        Ok(crate::io::encode_pgm(self.n, self.n, 255, &pixels))
    }
}

fn pixel_center_of(idx: usize, n: usize, h: f64) -> C64 {
    let (row, col) = (idx / n, idx % n);
    let half = (n / 2) as f64;
    C64::new((col as f64 - half) * h, (half - row as f64) * h)
}

/// K~ chart of the real map: a pixel is in K~ when u+ at its centre is below threshold.
pub fn ktilde_grid(
    f: &ShiftComposition,
    h: &UnstableSeries,
    radius: f64,
    n: usize,
    threshold: f64,
    gp: &GreenParams,
) -> Result<KtildeChart> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("resolution must be even and positive, got {n}")));
    }
    let px = 2.0 * radius / n as f64;
    let mask: Vec<bool> = (0..n * n)
        .into_par_iter()
        .map(|idx| u_plus(f, h, pixel_center_of(idx, n, px), gp) < threshold)
        .collect();
    KtildeChart::from_mask(mask, n, radius, h.lambda(), f.degree(), threshold)
}

/// Fraction of pixels t of `small` (radius R) whose K~ membership matches that of
/// lambda t in `large` (radius |lambda| R, same resolution).
pub fn scaling_agreement(small: &KtildeChart, large: &KtildeChart) -> f64 {
    let lambda = small.lambda;
    let mut total = 0usize;
    let mut agree = 0usize;
    for idx in 0..small.n * small.n {
        if let Some(j) = large.pixel_of(lambda * small.center(idx)) {
            total += 1;
            if large.mask[j] == small.mask[idx] {
                agree += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        agree as f64 / total as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotationData {
    pub qprime: usize,
    pub pprime: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// principal log lambda
    pub tau: C64,
    /// complement labels in circular order on |t| = R/2
    pub ordering: Vec<u32>,
    /// per component in `ordering`: index of the component containing lambda * witness
    pub images: Vec<usize>,
    /// q' <= max(1, ceil(2 rho))
    pub count_bound_ok: bool,
    pub rho: f64,
}

impl RotationData {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("qprime,pprime,N,p,q,tau_re,tau_im,rho,count_bound_ok\n");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            self.qprime, self.pprime, self.n, self.p, self.q, self.tau.re, self.tau.im, self.rho, self.count_bound_ok
        );
        s
    }
}

pub fn rotation_data(chart: &KtildeChart) -> Result<RotationData> {
    let order = chart.circle_order(chart.radius / 2.0);
    let qprime = order.len();
    if qprime == 0 {
        return Err(Error::Certification("no complement component meets the half-radius circle".into()));
    }
    let ordering: Vec<u32> = order.iter().map(|(l, _)| *l).collect();
    let mut images = Vec::with_capacity(qprime);
    let mut shifts = Vec::with_capacity(qprime);
    for (j, &label) in ordering.iter().enumerate() {
        let w = chart
            .witness(label)
            .ok_or_else(|| Error::Certification(format!("component {label} has no witness inside R/|lambda|")))?;
        let img = chart
            .label_at(chart.lambda * w)
            .filter(|&l| l > 0)
            .ok_or_else(|| Error::Certification(format!("lambda * witness of component {label} lands in K~ or off-chart")))?;
        let pos = ordering.iter().position(|&l| l == img).ok_or_else(|| {
            Error::Certification(format!(
                "lambda * witness of component {label} lands in component {img}, which misses the half-radius circle"
            ))
        })?;
        images.push(pos);
        shifts.push((pos + qprime - j) % qprime);
    }
    if shifts.iter().any(|&s| s != shifts[0]) {
        return Err(Error::Certification(format!(
            "index shift is not constant across components: {shifts:?} (resolution too coarse?)"
        )));
    }
    let pprime = shifts[0];
    let n = pprime.gcd(&qprime);
    let lambda = chart.lambda;
    let rho = (chart.d as f64).ln() / lambda.norm().ln();
    Ok(RotationData {
        qprime,
        pprime,
        n,
        p: pprime / n,
        q: qprime / n,
        tau: C64::new(lambda.norm().ln(), lambda.arg()),
        ordering,
        images,
        count_bound_ok: qprime as f64 <= (2.0 * rho).ceil().max(1.0),
        rho,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OriginComponent {
    pub pixels: usize,
    pub touches_boundary: bool,
    /// largest |t| over its pixel centres
    pub extent: f64,
}

/// The 4-connected K~ component containing the origin pixel.
pub fn origin_component(chart: &KtildeChart) -> OriginComponent {
    let n = chart.n;
    let start = chart.origin_pixel();
    if !chart.mask[start] {
        return OriginComponent {
            pixels: 0,
            touches_boundary: false,
            extent: 0.0,
        };
    }
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 0;
    let mut touches = false;
    let mut extent: f64 = 0.0;
    while let Some(idx) = queue.pop_front() {
        count += 1;
        let (r, c) = (idx / n, idx % n);
        if r == 0 || c == 0 || r == n - 1 || c == n - 1 {
            touches = true;
        }
        extent = extent.max(chart.center(idx).norm());
        for nb in neighbours(idx, n) {
            if chart.mask[nb] && !seen[nb] {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    OriginComponent {
        pixels: count,
        touches_boundary: touches,
        extent,
    }
}

fn neighbours(idx: usize, n: usize) -> impl Iterator<Item = usize> {
    let (r, c) = (idx / n, idx % n);
    let mut v = Vec::with_capacity(4);
    if r > 0 {
        v.push(idx - n);
    }
    if r + 1 < n {
        v.push(idx + n);
    }
    if c > 0 {
        v.push(idx - 1);
    }
    if c + 1 < n {
        v.push(idx + 1);
    }
    v.into_iter()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BridgedVerdict {
    BridgedEvidence,
    IsolatedOriginEvidence,
    Inconclusive,
}

/// Bridged evidence when the origin's K~ component reaches the chart edge in either
/// chart. Isolated evidence when it stays inside both charts and does not grow under
/// refinement beyond one coarse pixel.
pub fn bridged_test(coarse: &KtildeChart, fine: &KtildeChart) -> BridgedVerdict {
    let a = origin_component(coarse);
    let b = origin_component(fine);
    if a.touches_boundary || b.touches_boundary {
        return BridgedVerdict::BridgedEvidence;
    }
    if a.pixels > 0 && b.pixels > 0 && b.extent <= a.extent + coarse.pixel_size() {
        return BridgedVerdict::IsolatedOriginEvidence;
    }
    BridgedVerdict::Inconclusive
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccessPath {
    pub label: u32,
    /// one fundamental segment from t0 to t0 * lambda^{-q}, then its rescalings
    pub segments: Vec<Vec<C64>>,
    /// number of segments checked pixel by pixel against the component
    pub verified: usize,
    pub q: usize,
}

impl AccessPath {
    pub fn polyline(&self) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::new();
        for s in &self.segments {
            let skip = usize::from(!out.is_empty());
            out.extend_from_slice(&s[skip..]);
        }
        out
    }
}

/// Path in complement component `label` from its witness toward 0: a fundamental
/// segment from t0 to t0 lambda^{-q} (straight if that stays in the component, else a
/// breadth-first pixel path), followed by copies scaled by lambda^{-q}, lambda^{-2q}, ...
/// Copies are checked against the chart while they stay RESOLVED_PIXELS pixels away
/// from 0; below that they are kept unchecked until they drop under two pixels.
pub const RESOLVED_PIXELS: f64 = 8.0;

pub fn access_path(chart: &KtildeChart, label: u32, q: usize) -> Result<AccessPath> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    let t0 = chart
        .witness(label)
        .ok_or_else(|| Error::Certification(format!("component {label} is empty inside R/|lambda|")))?;
    let mu = chart.lambda.powi(q as i32).inv();
    let t1 = t0 * mu;
    let h = chart.pixel_size();
    let steps = ((t0 - t1).norm() / (0.25 * h)).ceil().max(1.0) as usize;
    let straight: Vec<C64> = (0..=steps).map(|i| t0 + (t1 - t0) * (i as f64 / steps as f64)).collect();
    let inside = |pts: &[C64]| pts.iter().all(|&t| chart.label_at(t) == Some(label));
    let base = if inside(&straight) {
        vec![t0, t1]
    } else {
        pixel_path(chart, label, t0, t1)?
    };
    let mut segments = vec![base];
    let mut verified = 1;
    loop {
        let prev = segments.last().unwrap();
        let next: Vec<C64> = prev.iter().map(|&t| t * mu).collect();
        let size = next.iter().map(|t| t.norm()).fold(0.0, f64::max);
        let inner = next.iter().map(|t| t.norm()).fold(f64::INFINITY, f64::min);
        let small = size < 2.0 * h;
        if inner >= RESOLVED_PIXELS * h {
            if !densify_inside(chart, label, &next) {
                return Err(Error::Certification(format!(
                    "rescaled access segment {} leaves component {label} at |t| ~ {size:.3e}",
                    segments.len()
                )));
            }
            verified += 1;
        }
        segments.push(next);
        if small || segments.len() > 10_000 {
            break;
        }
    }
    Ok(AccessPath {
        label,
        segments,
        verified,
        q,
    })
}

fn densify_inside(chart: &KtildeChart, label: u32, pts: &[C64]) -> bool {
    let h = chart.pixel_size();
    pts.windows(2).all(|w| {
        let steps = ((w[1] - w[0]).norm() / (0.25 * h)).ceil().max(1.0) as usize;
        (0..=steps).all(|i| chart.label_at(w[0] + (w[1] - w[0]) * (i as f64 / steps as f64)) == Some(label))
    })
}

fn pixel_path(chart: &KtildeChart, label: u32, from: C64, to: C64) -> Result<Vec<C64>> {
    let n = chart.n;
    let (s, g) = match (chart.pixel_of(from), chart.pixel_of(to)) {
        (Some(s), Some(g)) if chart.labels[s] == label && chart.labels[g] == label => (s, g),
        _ => {
            return Err(Error::Certification(format!(
                "endpoints of the fundamental segment are not both in component {label}"
            )))
        }
    };
    let mut prev = vec![usize::MAX; n * n];
    prev[s] = s;
    let mut queue = VecDeque::from([s]);
    while let Some(idx) = queue.pop_front() {
        if idx == g {
            break;
        }
        for nb in neighbours(idx, n) {
            if chart.labels[nb] == label && prev[nb] == usize::MAX {
                prev[nb] = idx;
                queue.push_back(nb);
            }
        }
    }
    if prev[g] == usize::MAX {
        return Err(Error::Certification(format!("no pixel path inside component {label}")));
    }
    let mut rev = vec![g];
    let mut cur = g;
    while cur != s {
        cur = prev[cur];
        rev.push(cur);
    }
    rev.reverse();
    let mut pts: Vec<C64> = vec![from];
    pts.extend(rev[1..rev.len().saturating_sub(1)].iter().map(|&i| chart.center(i)));
    pts.push(to);
    Ok(pts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoccozResult {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Re tau / |tau - 2 pi i p/q|^2 against N q / (2 log d).
pub fn yoccoz_check(tau: C64, p: i64, q: i64, n: i64, d: u64) -> Result<YoccozResult> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be nonzero".into()));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("degree must be >= 2, got {d}")));
    }
    if !(tau.re > 0.0) {
        return Err(Error::InvalidArgument("Re tau must be positive (|lambda| > 1)".into()));
    }
    let shift = C64::new(0.0, 2.0 * PI * p as f64 / q as f64);
    let lhs = tau.re / (tau - shift).norm_sqr();
    let rhs = (n * q) as f64 / (2.0 * (d as f64).ln());
    Ok(YoccozResult {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-12,
    })
}

/// Tries the branches tau0 + 2 pi i k for |k| <= q and returns the one with the
/// largest lhs - rhs.
pub fn best_branch(lambda: C64, p: i64, q: i64, n: i64, d: u64) -> Result<(i64, C64, YoccozResult)> {
    let tau0 = C64::new(lambda.norm().ln(), lambda.arg());
    let mut best: Option<(i64, C64, YoccozResult)> = None;
    for k in -q.abs()..=q.abs() {
        let tau = tau0 + C64::new(0.0, TAU * k as f64);
        let r = yoccoz_check(tau, p, q, n, d)?;
        if best.as_ref().is_none_or(|b| r.lhs - r.rhs > b.2.lhs - b.2.rhs) {
            best = Some((k, tau, r));
        }
    }
    Ok(best.unwrap())
}
