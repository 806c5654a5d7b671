//! Built-in examples run by `--selftest`.

use crate::commands::fmt_vec;
use crate::{CliError, CliResult};
use num_complex::Complex64 as C64;
use shiftlab::filtration::{escape_test, thm13_constants, verify_orbit_bounds, Direction, EscapeResult, FiltrationParams};
use shiftlab::green::{green_plus, order_estimate, GreenParams, GrowthSample};
use shiftlab::io::{decode_pgm, encode_pgm};
use shiftlab::ktilde::{rotation_data, yoccoz_check, KtildeChart};
use shiftlab::strips::{verify_escape, ProductFactor, StripConfig};
use shiftlab::translation::{apply_pn, qf, y_index, RegionPoint, YIndex};
use shiftlab::unstable::{classify_saddle, conjugacy_residual, find_fixed_points, sternberg_series};
use shiftlab::{CPoly, CVec, ShiftComposition, ShiftFactor};

fn check(name: &str, ok: bool) -> CliResult<()> {
    if ok {
        println!("  ok   {name}");
        Ok(())
    } else {
        println!("  FAIL {name}");
        Err(CliError::Verify(format!("selftest case failed: {name}")))
    }
}

fn square_map() -> ShiftComposition {
    ShiftComposition::single(ShiftFactor::new(3, C64::new(1.0, 0.0), CPoly::from_reals(&[0.0, 0.0, 1.0])).unwrap())
}

fn diag(x: f64) -> CVec {
    CVec::from_reals(&[x, x, x])
}

pub fn run(cmd: &str) -> CliResult<()> {
    println!("selftest {cmd}");
    let s6 = 6f64.sqrt();
    let flag = ShiftComposition::flagship();
    match cmd {
        "eval" => {
            let f = square_map();
            let w = f.eval(&CVec::from_reals(&[1.0, 2.0, 3.0]));
            check("(1,2,3) -> (2,3,10)", fmt_vec(&w) == "(2,3,10)")?;
            check("inverse round trip", f.eval_inverse(&w)? == CVec::from_reals(&[1.0, 2.0, 3.0]))?;
            check("flagship fixes the saddle", flag.eval(&diag(s6)).dist(&diag(s6)) < 1e-14)?;
        }
        "orbit" => {
            let z = flag.iterate(&diag(s6), 5);
            check("saddle orbit is constant", z.dist(&diag(s6)) < 1e-12)?;
        }
        "filtration" => {
            let p = FiltrationParams::new(4.0, 40.0, 15)?;
            let r = escape_test(&flag, &CVec::from_reals(&[0.0, 0.0, 1e6]), &p, Direction::Forward)?;
            check("(0,0,1e6) escapes forward within 3 steps", matches!(r, EscapeResult::Escaped(n) if n <= 3))?;
            let r = escape_test(&flag, &diag(s6), &p, Direction::Forward)?;
            check("saddle is bounded", r == EscapeResult::Bounded)?;
        }
        "thm13-verify" => {
            let p = FiltrationParams::new(4.0, 40.0, 15)?;
            let c = thm13_constants(&flag, 0.5, 3.0)?;
            let rep = verify_orbit_bounds(&flag, &diag(s6), &c, 6, &p)?;
            check("no violations at the saddle", rep.precondition_ok && rep.violations() == 0)?;
        }
        "green-slice" => {
            let f = ShiftComposition::single(ShiftFactor::new(3, C64::new(0.5, 0.0), CPoly::from_reals(&[0.0, 0.0, 1.0]))?);
            let g = green_plus(&f, &CVec::from_reals(&[0.0, 0.0, 1e6]), &GreenParams::default());
            check("G+(0,0,1e6) ~ log 1e6", (g - 1e6f64.ln()).abs() < 0.01)?;
            // short horizon: rounding drift pushes the saddle orbit out after ~20 steps
            let short = GreenParams::new(40.0, 15, 1e-12)?;
            check("G+ vanishes at the saddle", green_plus(&flag, &diag(s6), &short) == 0.0)?;
        }
        "saddles" => {
            let pts = find_fixed_points(&flag, 4.0, 4, 1e-10)?;
            check("two fixed points", pts.len() == 2)?;
            check("they are +-sqrt6 on the diagonal", pts.iter().all(|p| p.dist(&diag(s6)) < 1e-9 || p.dist(&diag(-s6)) < 1e-9))?;
        }
        "unstable" => {
            let lin = ShiftComposition::single(ShiftFactor::new(3, C64::new(0.5, 0.0), CPoly::from_reals(&[0.0, 3.0]))?);
            let sp = classify_saddle(&lin, &CVec::zeros(3))?;
            let h = sternberg_series(&lin, &sp, 12, 50)?;
            check("linear map: residual < 1e-12", conjugacy_residual(&h, &lin, 100.0 * h.rho0, 400) < 1e-12)?;
        }
        "order" => {
            let radii: Vec<f64> = (0..16).map(|i| 1e4 * 1e8f64.powf(i as f64 / 15.0)).collect();
            let gs = GrowthSample::new(radii.clone(), radii.iter().map(|r| r.powf(0.7)).collect())?;
            check("order of exp(r^0.7) is 0.7", (order_estimate(&gs)?.rho - 0.7).abs() < 1e-3)?;
        }
        "ktilde" => {
            let chart = KtildeChart::from_fn(16, 1.0, C64::new(2.0, 0.0), 2, |_| false)?;
            check("empty K~ has one complement component", chart.qprime() == 1)?;
            let r = rotation_data(&chart)?;
            check("rotation data (0,1,1,0,1)", (r.pprime, r.qprime, r.n, r.p, r.q) == (0, 1, 1, 0, 1))?;
            let pgm = encode_pgm(2, 2, 255, &[0, 1, 2, 3]);
            check("PGM header", pgm.starts_with(b"P5\n2 2\n255\n") && pgm.ends_with(&[0, 1, 2, 3]))?;
            check("PGM round trip", decode_pgm(&pgm)? == (2, 2, vec![0, 1, 2, 3]))?;
        }
        "yoccoz" => {
            let y = yoccoz_check(C64::new(3f64.ln(), 0.0), 0, 1, 1, 2)?;
            check("lhs 0.9102, rhs 0.7213, holds", (y.lhs - 0.9102).abs() < 1e-4 && (y.rhs - 0.7213).abs() < 1e-4 && y.holds)?;
            let y = yoccoz_check(C64::new(10.0, 0.0), 0, 1, 1, 2)?;
            check("lambda = e^10 fails", !y.holds)?;
        }
        "translation" => {
            let z = RegionPoint::from_ratios(&[(5, 1), (5, 1), (5, 1)])?;
            check("Y^1(5,5,5) = (1,1,1)", y_index(&z, 1)? == YIndex::Bits(vec![1, 1, 1]))?;
            check("P^1(5,5,5) = (4,4,4)", apply_pn(&z, 1)? == RegionPoint::from_ratios(&[(4, 1), (4, 1), (4, 1)])?)?;
            let z = RegionPoint::real(vec![qf(1, 2), qf(1, 2), qf(-1, 2)])?;
            check("zero cell is fixed", apply_pn(&z, 1)? == z)?;
        }
        "strips" => {
            let cert = verify_escape(&[ProductFactor::Strip(1); 3], &StripConfig::standard(), 3)?;
            check("V1^3 escapes, first bound 17", cert.direction == 1 && cert.bounds[0] == qf(17, 1))?;
        }
        other => return Err(CliError::Usage(format!("no selftest for {other}"))),
    }
    println!("selftest {cmd}: ok");
    Ok(())
}
