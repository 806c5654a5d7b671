//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails.

mod common;

use num_complex::Complex64 as C64;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::algebra::{eigenvalues, CMatrix};
use shiftlab::filtration::{thm13_constants, verify_lemma31, verify_orbit_bounds, FiltrationParams};
use shiftlab::green::{green_plus, order_estimate, u_plus_growth, GreenParams};
use shiftlab::ktilde::{
    ktilde_grid, rotation_data, scaling_agreement, yoccoz_check, KtildeChart, DEFAULT_THRESHOLD,
};
use shiftlab::strips::{verify_bounded, verify_escape, ProductFactor, StripConfig};
use shiftlab::translation::{
    apply_pn, apply_s, apply_t, delta_index, dist_to_b, epsilon_budget, q, qf, thm11_oracle, thm11_params,
    y_index, RegionPoint, TResult, Thm11Case, Thm11Verdict, YIndex, DEFAULT_T_CAP, Q,
};
use shiftlab::unstable::{
    classify_saddle, conjugacy_residual, sample_unstable_points, sternberg_series, UnstableSeries,
};
use shiftlab::{CPoly, CVec, ShiftComposition, ShiftFactor};
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn flagship() -> (ShiftComposition, UnstableSeries) {
    let f = ShiftComposition::flagship();
    let sp = classify_saddle(&f, &common::flagship_saddle()).unwrap();
    let h = sternberg_series(&f, &sp, 40, 500).unwrap();
    (f, h)
}

fn order_law(f: &ShiftComposition, h: &UnstableSeries) -> Outcome {
    // dominant root of x^3 - 2 sqrt6 x^2 - 1 by bisection on [4, 6]
    let s6 = 6f64.sqrt();
    let (mut lo, mut hi) = (4.0f64, 6.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powi(3) - 2.0 * s6 * mid * mid - 1.0 > 0.0 {
            hi = mid
        } else {
            lo = mid
        }
    }
    let lam = 0.5 * (lo + hi);
    ensure((h.lambda().norm() - lam).abs() < 1e-10, || format!("lambda {} vs root {lam}", h.lambda()))?;
    let want = 2f64.ln() / lam.ln();
    // 15 radii spread over [|lambda|, |lambda|^8], mostly off the lambda-lattice
    let radii: Vec<f64> = (0..15).map(|i| lam.powf(1.0 + 7.0 * i as f64 / 14.0)).collect();
    let gs = u_plus_growth(f, h, &radii, 256, &GreenParams::default()).map_err(|e| e.to_string())?;
    let est = order_estimate(&gs).map_err(|e| e.to_string())?;
    let rel = (est.rho / want - 1.0).abs();
    ensure(rel < 0.05, || format!("rho estimate {} vs {want}", est.rho))?;
    Ok(format!("rho = {:.5}, predicted {want:.5}, rel err {rel:.2e}", est.rho))
}

fn conjugacy(f: &ShiftComposition, h: &UnstableSeries) -> Outcome {
    let r = conjugacy_residual(h, f, 100.0 * h.rho0, 1000);
    ensure(r < 1e-6, || format!("flagship residual {r:e}"))?;
    let lin = ShiftComposition::single(ShiftFactor::new(3, C64::new(0.5, 0.0), CPoly::from_reals(&[0.0, 3.0])).unwrap());
    let sp = classify_saddle(&lin, &CVec::zeros(3)).map_err(|e| e.to_string())?;
    let hl = sternberg_series(&lin, &sp, 40, 500).map_err(|e| e.to_string())?;
    let rl = conjugacy_residual(&hl, &lin, 100.0 * hl.rho0, 1000);
    ensure(rl < 1e-12, || format!("linear residual {rl:e}"))?;
    Ok(format!("flagship {r:.2e}, linear {rl:.2e}"))
}

fn orbit_inequalities(f: &ShiftComposition, h: &UnstableSeries) -> Outcome {
    let pts = sample_unstable_points(h, f, 1000, 50.0, 3, 2024);
    ensure(pts.len() == 1000, || format!("only {} points sampled", pts.len()))?;
    let p = FiltrationParams::new(4.0, 40.0, 15).map_err(|e| e.to_string())?;
    let mut visited = Vec::new();
    for (_, z) in &pts {
        for n in 0..=6 {
            visited.push(f.iterate(z, n));
        }
    }
    let lemma = verify_lemma31(f, 0.5, &visited).map_err(|e| e.to_string())?;
    let c = thm13_constants(f, 0.5, lemma.m_theorem).map_err(|e| e.to_string())?;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for (t, z) in &pts {
        let rep = verify_orbit_bounds(f, z, &c, 6, &p).map_err(|e| e.to_string())?;
        ensure(rep.precondition_ok, || format!("H({t}) = {z} not backward bounded"))?;
        violations += rep.violations();
        min_margin = min_margin.min(rep.min_margin());
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("M = {:.4}, 0 violations, min log-margin {min_margin:.3e}", lemma.m_theorem))
}

fn rational_point(rng: &mut ChaCha8Rng, k: usize, lo: i64, hi: i64, den: i64) -> RegionPoint {
    RegionPoint::real((0..k).map(|_| qf(rng.gen_range(lo * den..=hi * den), den)).collect()).unwrap()
}

fn delta_point(rng: &mut ChaCha8Rng, k: usize, top: i64, den: i64) -> RegionPoint {
    loop {
        let z = rational_point(rng, k, -3, top, den);
        if delta_index(&z).is_some() {
            return z;
        }
    }
}

fn exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // (a) ones cell maps into the ones cell one level down
    for _ in 0..10_000 {
        let k = rng.gen_range(2..=6);
        let n: i64 = rng.gen_range(2..=30);
        let z = RegionPoint::real((0..k).map(|_| q(n) + qf(rng.gen_range(1..5000), 101)).collect()).unwrap();
        let ones = YIndex::Bits(vec![1; k]);
        ensure(y_index(&z, n).unwrap() == ones, || format!("{z} not in Y^{n}(1..1)"))?;
        let w = apply_pn(&z, n).map_err(|e| e.to_string())?;
        ensure(y_index(&w, n - 1).unwrap() == ones, || format!("P^{n}({z}) = {w} left the cell"))?;
    }
    // (b) S lands outside the open positive orthant; (c) T inverts S
    let mut round_trips = 0;
    for i in 0..10_000 {
        let k = rng.gen_range(2..=5);
        let w = delta_point(&mut rng, k, 10, 8);
        let z = apply_s(&w).map_err(|e| e.to_string())?;
        ensure(!z.min_re().is_positive(), || format!("S({w}) = {z} has all real parts positive"))?;
        if i < 1000 {
            match apply_t(&z, DEFAULT_T_CAP).map_err(|e| e.to_string())? {
                TResult::Preimage { w: back, .. } if back == w => round_trips += 1,
                other => return Err(format!("T(S({w})) = {other:?}")),
            }
        }
    }
    // (d) epsilon budget for n <= 20
    // the oracle needs eps < 1/2 so that shrunken cells stay non-empty
    let eps = qf(1, 3);
    let mut budgets = 0;
    for n in 1..=20i64 {
        let mut found = 0;
        for _ in 0..400 {
            let z = delta_point(&mut rng, 3, (n + 2).min(12), 24);
            let budget: Q = &eps / q(2) - &eps / q(2).pow(n as i32 + 1);
            if dist_to_b(&z) <= budget {
                continue;
            }
            let r = epsilon_budget(&z, &eps, n).map_err(|e| format!("n={n}, z={z}: {e}"))?;
            ensure(r.center_matches && r.within_budget, || format!("n={n}, z={z}: {r:?}"))?;
            found += 1;
            if found == 5 {
                break;
            }
        }
        ensure(found > 0, || format!("no admissible point for n = {n}"))?;
        budgets += found;
    }
    Ok(format!("10^4 cell checks, 10^4 S checks, {round_trips} T round trips, {budgets} budget runs"))
}

fn power_map_oracle() -> Outcome {
    let (eps, n) = (0.5, 16u32);
    let p = thm11_params(eps, n).map_err(|e| e.to_string())?;
    ensure((p.alpha - 0.005_957_523_473_220_5).abs() < 1e-12, || format!("alpha {}", p.alpha))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = 3;
    let hi = 1.0 + p.alpha;
    let lo = -p.m + 1.0 + p.alpha;
    let mut max_fibre = 0;
    for _ in 0..10_000 {
        let mut u: Vec<C64> = (0..k)
            .map(|_| C64::from_polar(rng.gen_range(0.0..4.0), rng.gen_range(-3.14..3.14)))
            .collect();
        let j = rng.gen_range(0..k);
        u[j] = C64::from_polar(rng.gen_range(1.5..6.0), rng.gen_range(-3.14..3.14));
        let Thm11Verdict::InRangeWitness { v, case, fibre_size, fibre_bound } =
            thm11_oracle(&u, eps, n).map_err(|e| e.to_string())?
        else {
            return Err(format!("{u:?} did not get a witness"));
        };
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let s = 1e-12;
        let ok = match case {
            Thm11Case::LastLarge => re[k - 1] >= hi - s && re[..k - 1].iter().all(|x| *x >= lo - s),
            Thm11Case::FirstLarge => {
                re[0] >= hi - s && re[1..].iter().all(|x| *x >= lo - s) && re[k - 1] <= hi + s
            }
            Thm11Case::MiddleLarge(l) => {
                re[l] >= hi - s
                    && re[..l].iter().all(|x| *x >= lo - s && *x <= hi + s)
                    && re[l + 1..].iter().all(|x| *x >= lo - s)
                    && re[k - 1] <= hi + s
            }
        };
        ensure(ok, || format!("witness {v:?} for {u:?} ({case:?}) fails its inequalities"))?;
        for (a, b) in v.iter().zip(&u) {
            ensure((a.powu(n) - b).norm() < 1e-9 * (1.0 + b.norm()), || format!("v^n != u at {u:?}"))?;
        }
        ensure(fibre_size <= fibre_bound && fibre_bound == 4096, || format!("fibre {fibre_size}/{fibre_bound}"))?;
        max_fibre = max_fibre.max(fibre_size);
    }
    for _ in 0..10_000 {
        let u: Vec<C64> = (0..k)
            .map(|_| C64::from_polar(rng.gen_range(0.0..=1.0), rng.gen_range(-3.14..3.14)))
            .collect();
        let v = thm11_oracle(&u, eps, n).map_err(|e| e.to_string())?;
        ensure(v == Thm11Verdict::Excluded, || format!("{u:?}: {v:?}"))?;
    }
    Ok(format!("alpha = {:.6}, 10^4 witnesses, 10^4 exclusions, max fibre {max_fibre}", p.alpha))
}

fn strip_certificates() -> Outcome {
    let cfg = StripConfig::new(q(1), 1, q(16), 3).map_err(|e| e.to_string())?;
    let steps = 50;
    let ls = [1i64, 2];
    let mut escapes = 0;
    for sign in [1i64, -1] {
        for &a in &ls {
            for &b in &ls {
                for &c in &ls {
                    let f = [a, b, c].map(|l| ProductFactor::Strip(sign * l));
                    verify_escape(&f, &cfg, steps).map_err(|e| format!("{f:?}: {e}"))?;
                    escapes += 1;
                }
            }
        }
    }
    let signed = [-2i64, -1, 1, 2];
    let ns = [-1i64, 0, 1];
    let mut bounded = 0;
    for &l1 in &signed {
        for &l2 in &signed {
            for &l3 in &signed {
                for &n in &ns {
                    let d = [(n, l1), (-n, l2), (n + 1, l3)];
                    let f = d.map(|(n, l)| ProductFactor::D { n, l });
                    verify_escape(&f, &cfg, steps).map_err(|e| format!("{f:?}: {e}"))?;
                    escapes += 1;
                    let cert = verify_bounded(&d, &cfg, steps).map_err(|e| format!("E {d:?}: {e}"))?;
                    if cert.case == 1 {
                        ensure(cert.max_abs_re <= q(3), || format!("E {d:?}: |Re| reached {}", cert.max_abs_re))?;
                    } else {
                        ensure(cert.max_abs_re <= q(1) + q(2 * cert.ladder), || {
                            format!("E {d:?}: |Re| reached {}", cert.max_abs_re)
                        })?;
                    }
                    bounded += 1;
                }
            }
        }
    }
    Ok(format!("{escapes} escape and {bounded} boundedness certificates over {steps} steps"))
}

fn three_rays() -> KtildeChart {
    let (n, radius) = (256usize, 1.0);
    let h = 2.0 * radius / n as f64;
    let lambda = C64::from_polar(1.5, 2.0 * std::f64::consts::PI / 3.0);
    KtildeChart::from_fn(n, radius, lambda, 2, |t| {
        (0..3).any(|j| {
            let dir = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 3.0);
            let s = t * dir.conj();
            s.re >= -h && s.im.abs() <= h
        })
    })
    .unwrap()
}

fn yoccoz_machinery(f: &ShiftComposition, h: &UnstableSeries) -> Outcome {
    let y = yoccoz_check(C64::new(3f64.ln(), 0.0), 0, 1, 1, 2).map_err(|e| e.to_string())?;
    ensure((y.lhs - 0.910_239_226_626_837_4).abs() < 1e-12 && y.holds, || format!("{y:?}"))?;
    let rhs = 1.0 / (2.0 * 2f64.ln());
    ensure((y.rhs - rhs).abs() < 1e-12, || format!("rhs {}", y.rhs))?;
    let y = yoccoz_check(C64::new(4f64.ln(), 0.0), 0, 1, 1, 2).map_err(|e| e.to_string())?;
    ensure((y.lhs - y.rhs).abs() < 1e-12 && y.holds, || format!("equality case {y:?}"))?;
    let y = yoccoz_check(C64::new(10.0, 0.0), 0, 1, 1, 2).map_err(|e| e.to_string())?;
    ensure((y.lhs - 0.1).abs() < 1e-12 && !y.holds, || format!("failing case {y:?}"))?;

    let r = rotation_data(&three_rays()).map_err(|e| e.to_string())?;
    let tuple = (r.pprime, r.qprime, r.n, r.p, r.q);
    ensure(tuple == (1, 3, 1, 1, 3), || format!("three rays gave {tuple:?}"))?;

    let chart = ktilde_grid(f, h, 1.0, 256, DEFAULT_THRESHOLD, &GreenParams::default()).map_err(|e| e.to_string())?;
    let rho = 2f64.ln() / h.lambda().norm().ln();
    let bound = (2.0 * rho).ceil().max(1.0) as usize;
    ensure(chart.qprime() <= bound, || format!("q' = {} > {bound}", chart.qprime()))?;
    Ok(format!("3 arithmetic cases, rays {tuple:?}, flagship q' = {} <= {bound}", chart.qprime()))
}

fn kernel_properties(f: &ShiftComposition, h: &UnstableSeries) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // eigenvalue identities on random 3x3 and 4x4 matrices
    for _ in 0..200 {
        let n = rng.gen_range(2..=4);
        let rows: Vec<Vec<C64>> = (0..n)
            .map(|_| (0..n).map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect())
            .collect();
        let m = CMatrix::from_rows(rows.clone());
        let ev = eigenvalues(&m).map_err(|e| e.to_string())?;
        let tr: C64 = (0..n).map(|i| rows[i][i]).sum();
        let sum: C64 = ev.iter().sum();
        ensure((tr - sum).norm() < 1e-8 * (1.0 + tr.norm()), || format!("trace {tr} vs {sum}"))?;
        let det = det_by_elimination(rows.clone());
        let prod: C64 = ev.iter().product();
        ensure((det - prod).norm() < 1e-8 * (1.0 + det.norm()), || format!("det {det} vs {prod}"))?;
    }
    // eval / eval_inverse and finite-difference Jacobian
    let hstep = 1e-6;
    for _ in 0..200 {
        let z = common::random_point(&mut rng, 3, 3.0);
        let back = f.eval_inverse(&f.eval(&z)).map_err(|e| e.to_string())?;
        ensure(back.dist(&z) < 1e-10 * (1.0 + z.norm()), || format!("round trip at {z}"))?;
        let j = f.jacobian(&z);
        for col in 0..3 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[col] += hstep;
            zm[col] -= hstep;
            let d = &f.eval(&zp) - &f.eval(&zm);
            for row in 0..3 {
                let fd = d[row] / (2.0 * hstep);
                ensure((fd - j[(row, col)]).norm() < 1e-6 * (1.0 + fd.norm()), || {
                    format!("J({row},{col}) at {z}: {} vs {fd}", j[(row, col)])
                })?;
            }
        }
    }
    // G+ o F = d G+
    let gp = GreenParams::default();
    let mut checked = 0;
    while checked < 200 {
        let z = common::random_point(&mut rng, 3, 6.0);
        let g = green_plus(f, &z, &gp);
        if g <= 0.0 {
            continue;
        }
        let g1 = green_plus(f, &f.eval(&z), &gp);
        ensure((g1 - 2.0 * g).abs() <= 1e-6 * g1.max(1.0), || format!("G+(F z) = {g1}, 2 G+(z) = {}", 2.0 * g))?;
        checked += 1;
    }
    // K~ scaling
    let small = ktilde_grid(f, h, 1.0, 256, DEFAULT_THRESHOLD, &gp).map_err(|e| e.to_string())?;
    let large = ktilde_grid(f, h, h.lambda().norm(), 256, DEFAULT_THRESHOLD, &gp).map_err(|e| e.to_string())?;
    let agree = scaling_agreement(&small, &large);
    ensure(agree >= 0.95, || format!("scaling agreement {agree}"))?;
    Ok(format!("eigen, round trip, Jacobian, Green checks ok; scaling agreement {agree:.4}"))
}

fn det_by_elimination(mut a: Vec<Vec<C64>>) -> C64 {
    let n = a.len();
    let mut det = C64::new(1.0, 0.0);
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        if a[piv][c].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let m = a[r][c] / a[c][c];
            for cc in c..n {
                let v = a[c][cc];
                a[r][cc] -= m * v;
            }
        }
    }
    det
}

fn main() {
    let (f, h) = flagship();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("order law", Box::new(|| order_law(&f, &h))),
        ("conjugacy residual", Box::new(|| conjugacy(&f, &h))),
        ("orbit growth inequalities", Box::new(|| orbit_inequalities(&f, &h))),
        ("translation exactness", Box::new(exactness)),
        ("power map range oracle", Box::new(power_map_oracle)),
        ("strip certificates", Box::new(strip_certificates)),
        ("Yoccoz machinery", Box::new(|| yoccoz_machinery(&f, &h))),
        ("kernel properties", Box::new(|| kernel_properties(&f, &h))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let secs = t0.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {why}", i + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
