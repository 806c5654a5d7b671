use crate::args::*;
use crate::{selftest, CliError, CliResult};
use num_complex::Complex64 as C64;
use shiftlab::filtration::{
    bound_rows_csv, classify_point, escape_test, thm13_constants, verify_lemma31, verify_orbit_bounds, Direction,
    FiltrationParams,
};
use shiftlab::green::{
    green_plus, order_estimate, predicted_order, type_estimate, u_plus_growth, GreenParams,
};
use shiftlab::io::{encode_pgm, write_file};
use shiftlab::ktilde::{bridged_test, ktilde_grid, rotation_data, yoccoz_check};
use shiftlab::maps::parse_complex;
use shiftlab::strips::{records_csv, verify_bounded, verify_escape, ProductFactor, StripConfig};
use shiftlab::translation::{
    apply_pn, apply_s, apply_t, delta_index, epsilon_budget, parse_q, theta_a_range_oracle, thm11_oracle,
    y_index, y_walls_table, RangeVerdict, RegionPoint, TResult, Thm11Verdict, YIndex, Q,
};
use shiftlab::unstable::{
    classify_saddle, conjugacy_residual, find_fixed_points, sample_unstable_points, sternberg_series, SaddlePoint,
    UnstableSeries,
};
use shiftlab::{CVec, ShiftComposition};
use num_traits::ToPrimitive;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn run(cli: Cli) -> CliResult<()> {
    let cmd = cli.command;
    if cmd.common().selftest {
        return selftest::run(cmd.name());
    }
    match cmd {
        Command::Eval(a) => eval(a),
        Command::Orbit(a) => orbit(a),
        Command::Filtration(a) => filtration(a),
        Command::Thm13Verify(a) => thm13(a),
        Command::GreenSlice(a) => green_slice(a),
        Command::Saddles(a) => saddles(a),
        Command::Unstable(a) => unstable(a),
        Command::Order(a) => order(a),
        Command::Ktilde(a) => ktilde(a),
        Command::Yoccoz(a) => yoccoz(a),
        Command::Translation(a) => translation(a),
        Command::Strips(a) => strips(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load_map(common: &Common, required: bool) -> CliResult<ShiftComposition> {
    match &common.map {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read map file {}: {e}", p.display())))?;
            Ok(ShiftComposition::parse_map_text(&text)?)
        }
        None if required => Err(usage("--map is required")),
        None => Ok(ShiftComposition::flagship()),
    }
}

fn parse_point(s: Option<&str>, k: usize) -> CliResult<CVec> {
    let s = s.ok_or_else(|| usage("--point is required"))?;
    let xs: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad number {t:?} in --point"))))
        .collect::<CliResult<_>>()?;
    if xs.len() != 2 * k {
        return Err(usage(format!("--point needs {} numbers (re,im per coordinate), got {}", 2 * k, xs.len())));
    }
    Ok(CVec::new(xs.chunks(2).map(|c| C64::new(c[0], c[1])).collect()))
}

/// Imaginary parts below 1e-12 of the modulus are rounding noise and are dropped.
pub fn fmt_c(z: C64) -> String {
    if z.im.abs() <= 1e-12 * z.norm() {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

pub fn fmt_vec(v: &CVec) -> String {
    let parts: Vec<String> = (0..v.len()).map(|i| fmt_c(v[i])).collect();
    format!("({})", parts.join(","))
}

fn out_path(common: &Common, name: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(&common.out).map_err(|e| usage(format!("cannot create {}: {e}", common.out.display())))?;
    Ok(common.out.join(name))
}

fn write_out(common: &Common, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    let p = out_path(common, name)?;
    write_file(&p, bytes)?;
    Ok(p)
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn eval(a: EvalArgs) -> CliResult<()> {
    let f = load_map(&a.common, true)?;
    let z = parse_point(a.point.as_deref(), f.k())?;
    let w = if a.inverse { f.eval_inverse(&z)? } else { f.eval(&z) };
    println!("{}", fmt_vec(&w));
    Ok(())
}

fn orbit(a: OrbitArgs) -> CliResult<()> {
    let f = load_map(&a.common, true)?;
    let mut z = parse_point(a.point.as_deref(), f.k())?;
    let mut csv = String::from("n");
    for j in 1..=f.k() {
        let _ = write!(csv, ",re{j},im{j}");
    }
    csv.push('\n');
    for n in 0..=a.steps {
        let _ = write!(csv, "{n}");
        for j in 0..f.k() {
            let _ = write!(csv, ",{},{}", z[j].re, z[j].im);
        }
        csv.push('\n');
        if n < a.steps {
            z = if a.backward { f.eval_inverse(&z)? } else { f.eval(&z) };
            if !z.is_finite() {
                break;
            }
        }
    }
    print!("{csv}");
    Ok(())
}

fn filtration(a: FiltrationArgs) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let z = parse_point(a.point.as_deref(), f.k())?;
    let p = FiltrationParams::new(a.radius, a.r_escape, a.n_max)?;
    println!("region: {}", classify_point(&z, &p));
    println!("forward: {:?}", escape_test(&f, &z, &p, Direction::Forward)?);
    println!("backward: {:?}", escape_test(&f, &z, &p, Direction::Backward)?);
    Ok(())
}

fn saddle_list(f: &ShiftComposition, half_width: f64, per_axis: usize, tol: f64) -> CliResult<Vec<SaddlePoint>> {
    let pts = find_fixed_points(f, half_width, per_axis, tol)?;
    let mut out = Vec::new();
    for p in pts {
        let s = classify_saddle(f, &p)?;
        if s.type_ok {
            out.push(s);
        }
    }
    // rightmost saddle first, so index 0 is the positive saddle of the default map
    out.sort_by(|x, y| y.a[0].re.total_cmp(&x.a[0].re));
    Ok(out)
}

fn series_at(f: &ShiftComposition, idx: usize, order: usize) -> CliResult<UnstableSeries> {
    let list = saddle_list(f, 4.0, 4, 1e-10)?;
    let sp = list
        .get(idx)
        .ok_or_else(|| usage(format!("saddle index {idx} out of range ({} saddles found)", list.len())))?;
    Ok(sternberg_series(f, sp, order, 500)?)
}

fn thm13(a: Thm13Args) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let h = series_at(&f, 0, a.order)?;
    let pts = sample_unstable_points(&h, &f, a.samples, 50.0, 3, a.seed);
    let mut visited = Vec::new();
    for (_, z) in &pts {
        for n in 0..=a.steps {
            visited.push(f.iterate(z, n));
        }
    }
    let lemma = verify_lemma31(&f, a.eps, &visited)?;
    let c = thm13_constants(&f, a.eps, lemma.m_theorem)?;
    let p = FiltrationParams::new(a.radius, 40.0, 15)?;
    let mut rows = Vec::new();
    let mut violations = 0;
    let mut not_bounded = 0;
    for (_, z) in &pts {
        let rep = verify_orbit_bounds(&f, z, &c, a.steps, &p)?;
        if !rep.precondition_ok {
            not_bounded += 1;
        }
        violations += rep.violations();
        rows.extend(rep.rows);
    }
    let path = write_out(&a.common, "thm13.csv", bound_rows_csv(&rows).as_bytes())?;
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    println!(
        "points={} M={:.6} rows={} violations={violations} min_margin={min_margin:.4e} csv={}",
        pts.len(),
        lemma.m_theorem,
        rows.len(),
        show(&path)
    );
    if not_bounded > 0 {
        return Err(CliError::Verify(format!("{not_bounded} sampled points failed the backward-bounded check")));
    }
    if violations > 0 {
        return Err(CliError::Verify(format!("{violations} inequality violations")));
    }
    Ok(())
}

fn green_slice(a: GreenSliceArgs) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let base = match a.point.as_deref() {
        Some(_) => parse_point(a.point.as_deref(), f.k())?,
        None => CVec::zeros(f.k()),
    };
    if a.axis == 0 || a.axis > f.k() {
        return Err(usage(format!("--axis must be in 1..={}", f.k())));
    }
    if a.resolution == 0 || !(a.radius > 0.0) {
        return Err(usage("--resolution and --radius must be positive"));
    }
    let gp = GreenParams::new(a.r_escape, a.n_max, 1e-12)?;
    let n = a.resolution;
    let h = 2.0 * a.radius / n as f64;
    let mut vals = vec![0.0; n * n];
    let mut csv = String::from("re,im,g\n");
    for row in 0..n {
        for col in 0..n {
            let t = C64::new(-a.radius + (col as f64 + 0.5) * h, a.radius - (row as f64 + 0.5) * h);
            let mut z = base.clone();
            z[a.axis - 1] += t;
            let g = green_plus(&f, &z, &gp);
            vals[row * n + col] = g;
            let _ = writeln!(csv, "{},{},{}", t.re, t.im, g);
        }
    }
    let gmax = vals.iter().cloned().fold(0.0, f64::max);
    let pixels: Vec<u8> = vals
        .iter()
        .map(|g| if gmax > 0.0 { (255.0 * g / gmax).round() as u8 } else { 0 })
        .collect();
    let pc = write_out(&a.common, "green_slice.csv", csv.as_bytes())?;
    let pp = write_out(&a.common, "green_slice.pgm", &encode_pgm(n, n, 255, &pixels))?;
    let zero = vals.iter().filter(|g| **g == 0.0).count();
    println!("max G+ = {gmax:.6}, K+ pixels = {zero}/{}, csv={} pgm={}", n * n, show(&pc), show(&pp));
    Ok(())
}

fn saddles(a: SaddlesArgs) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let pts = find_fixed_points(&f, a.half_width, a.per_axis, a.tol)?;
    println!("index,point,type_ok,lambda,margin");
    let saddles = saddle_list(&f, a.half_width, a.per_axis, a.tol)?;
    for (i, s) in saddles.iter().enumerate() {
        let lam = s.lambda.map(fmt_c).unwrap_or_default();
        println!("{i},{},true,{lam},{:.6}", fmt_vec(&s.a).replace(',', " "), s.margin);
    }
    for p in pts {
        let s = classify_saddle(&f, &p)?;
        if !s.type_ok {
            println!("-,{},false,-,{:.6}", fmt_vec(&s.a).replace(',', " "), s.margin);
        }
    }
    Ok(())
}

fn unstable(a: UnstableArgs) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let list = saddle_list(&f, 4.0, 4, 1e-10)?;
    let sp = list
        .get(a.saddle)
        .ok_or_else(|| usage(format!("saddle index {} out of range ({} saddles found)", a.saddle, list.len())))?;
    let h = sternberg_series(&f, sp, a.order, a.iters)?;
    let res = conjugacy_residual(&h, &f, 100.0 * h.rho0, 1000);
    let path = write_out(&a.common, "unstable.txt", h.to_text().as_bytes())?;
    println!(
        "saddle={} lambda={} N={} iterations={} rho0={} residual(100 rho0)={res:.3e} series={}",
        fmt_vec(&sp.a),
        fmt_c(h.lambda()),
        h.order(),
        h.iterations,
        h.rho0,
        show(&path)
    );
    Ok(())
}

fn order(a: OrderArgs) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let h = series_at(&f, a.saddle, a.order)?;
    let lam = h.lambda().norm();
    if a.radii < 2 || !(a.hi > a.lo) {
        return Err(usage("need --radii >= 2 and --hi > --lo"));
    }
    let radii: Vec<f64> = (0..a.radii)
        .map(|i| lam.powf(a.lo + (a.hi - a.lo) * i as f64 / (a.radii - 1) as f64))
        .collect();
    let gs = u_plus_growth(&f, &h, &radii, a.angles, &GreenParams::default())?;
    let est = order_estimate(&gs)?;
    let want = predicted_order(&f, &h);
    let te = type_estimate(&gs, want)?;
    let path = write_out(&a.common, "growth.csv", gs.to_csv().as_bytes())?;
    let mut report = String::from("rho_estimate,rho_predicted,fit_residual,sigma,mean_type\n");
    let _ = writeln!(report, "{},{},{},{},{}", est.rho, want, est.residual, te.sigma, te.mean_type);
    let rp = write_out(&a.common, "order.csv", report.as_bytes())?;
    let rel = (est.rho / want - 1.0).abs();
    println!(
        "rho={:.6} predicted={want:.6} rel_err={rel:.3e} sigma={:.6} trend={:?} csv={} report={}",
        est.rho,
        te.sigma,
        te.trend,
        show(&path),
        show(&rp)
    );
    if rel > a.tol {
        return Err(CliError::Verify(format!("order estimate off by {rel:.3e} (tolerance {})", a.tol)));
    }
    Ok(())
}

fn ktilde(a: KtildeArgs) -> CliResult<()> {
    let f = load_map(&a.common, false)?;
    let h = series_at(&f, a.saddle, a.order)?;
    let gp = GreenParams::default();
    let chart = ktilde_grid(&f, &h, a.radius, a.resolution, a.threshold, &gp)?;
    let pp = write_out(&a.common, "ktilde.pgm", &chart.to_pgm()?)?;
    println!(
        "resolution={} R={} ktilde_fraction={:.6} components={} pgm={}",
        a.resolution,
        a.radius,
        chart.ktilde_fraction(),
        chart.qprime(),
        show(&pp)
    );
    let rot = rotation_data(&chart);
    match &rot {
        Ok(r) => {
            let rc = write_out(&a.common, "rotation.csv", r.to_csv().as_bytes())?;
            println!(
                "(p',q',N,p,q)=({},{},{},{},{}) count_bound_ok={} csv={}",
                r.pprime,
                r.qprime,
                r.n,
                r.p,
                r.q,
                r.count_bound_ok,
                show(&rc)
            );
        }
        Err(e) => println!("rotation data unavailable: {e}"),
    }
    if a.bridged {
        let fine = ktilde_grid(&f, &h, a.radius, 2 * a.resolution, a.threshold, &gp)?;
        println!("bridged: {:?}", bridged_test(&chart, &fine));
    }
    if let Ok(r) = rot {
        if !r.count_bound_ok {
            return Err(CliError::Verify(format!("component count {} exceeds the order bound", r.qprime)));
        }
    }
    Ok(())
}

fn yoccoz(a: YoccozArgs) -> CliResult<()> {
    let tau = parse_complex(a.tau.as_deref().ok_or_else(|| usage("--tau is required"))?)?;
    let y = yoccoz_check(tau, a.p, a.q, a.n, a.d)?;
    println!("lhs={:.4} rhs={:.4} holds={}", y.lhs, y.rhs, y.holds);
    if !y.holds {
        return Err(CliError::Verify(format!("inequality fails: {} < {}", y.lhs, y.rhs)));
    }
    Ok(())
}

fn parse_q_list(s: &str) -> CliResult<Vec<Q>> {
    s.split(',').map(|t| parse_q(t.trim()).map_err(CliError::from)).collect()
}

fn region_point(a: &TranslationArgs) -> CliResult<RegionPoint> {
    let re = parse_q_list(a.point.as_deref().ok_or_else(|| usage("--point is required"))?)?;
    let im = match a.imag.as_deref() {
        Some(s) => parse_q_list(s)?,
        None => vec![Q::from_integer(0.into()); re.len()],
    };
    Ok(RegionPoint::new(re, im)?)
}

fn translation(a: TranslationArgs) -> CliResult<()> {
    let op = a.op.ok_or_else(|| usage("--op is required"))?;
    match op {
        TranslationOp::Walls => print!("{}", y_walls_table(a.k, a.n)),
        TranslationOp::Y => match y_index(&region_point(&a)?, a.n)? {
            YIndex::Bits(b) => println!("bits={}", b.iter().map(|x| x.to_string()).collect::<String>()),
            YIndex::Boundary => println!("boundary"),
        },
        TranslationOp::P => println!("{}", apply_pn(&region_point(&a)?, a.n)?),
        TranslationOp::S => {
            let z = region_point(&a)?;
            let (cell, lz) = delta_index(&z).ok_or_else(|| usage(format!("{z} is not in any Delta cell")))?;
            println!("cell={cell:?} l_z={lz} S={}", apply_s(&z)?);
        }
        TranslationOp::T => match apply_t(&region_point(&a)?, a.cap)? {
            TResult::Preimage { w, steps } => println!("preimage={w} steps={steps}"),
            TResult::NotInOmega { reason } => println!("not in Omega: {reason}"),
        },
        TranslationOp::Range => {
            let eps = parse_q(&a.eps)?;
            match theta_a_range_oracle(&region_point(&a)?, &eps)? {
                RangeVerdict::NotInRange => println!("not in range"),
                RangeVerdict::InRange { witness, margin } => println!("in range: witness={witness} margin={margin}"),
                RangeVerdict::Unknown { reason } => println!("unknown: {reason}"),
            }
        }
        TranslationOp::Budget => {
            let eps = parse_q(&a.eps)?;
            let r = epsilon_budget(&region_point(&a)?, &eps, a.n)?;
            let mut csv = String::from("n,radius,wall_slack\n");
            for s in &r.steps {
                let _ = writeln!(csv, "{},{},{}", s.n, s.radius, s.wall_slack);
            }
            let p = write_out(&a.common, "budget.csv", csv.as_bytes())?;
            println!(
                "center={} radius={} budget={} center_matches={} within_budget={} csv={}",
                r.center,
                r.radius,
                r.budget,
                r.center_matches,
                r.within_budget,
                show(&p)
            );
            if !(r.center_matches && r.within_budget) {
                return Err(CliError::Verify("epsilon budget exceeded".into()));
            }
        }
        TranslationOp::Power => {
            let eps: f64 = a.eps.parse().map_err(|_| usage(format!("--eps {:?} is not a decimal", a.eps)))?;
            let s = a.point.as_deref().ok_or_else(|| usage("--point is required"))?;
            let xs: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad number {t:?}"))))
                .collect::<CliResult<_>>()?;
            if xs.len() % 2 != 0 || xs.len() < 4 {
                return Err(usage("--point needs re,im pairs for at least two coordinates"));
            }
            let u: Vec<C64> = xs.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            let n = u32::try_from(a.n).map_err(|_| usage("--n must be positive"))?;
            match thm11_oracle(&u, eps, n)? {
                Thm11Verdict::Excluded => println!("excluded"),
                Thm11Verdict::Unknown => println!("unknown"),
                Thm11Verdict::InRangeWitness { v, case, fibre_size, fibre_bound } => {
                    let vs: Vec<String> = v.iter().map(|z| fmt_c(*z)).collect();
                    println!(
                        "in range: case={case:?} witness=({}) fibre={fibre_size}/{fibre_bound}",
                        vs.join(",")
                    );
                }
            }
        }
    }
    Ok(())
}

fn parse_factor(s: &str) -> CliResult<ProductFactor> {
    let bad = || usage(format!("bad product factor {s:?} (use V<l>, D<n>:<l> or E<n>:<l>)"));
    let (head, rest) = s.split_at(1.min(s.len()));
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
    match head {
        "V" => Ok(ProductFactor::Strip(int(rest)?)),
        "D" | "E" => {
            let (n, l) = rest.split_once(':').ok_or_else(bad)?;
            let (n, l) = (int(n)?, int(l)?);
            Ok(if head == "D" { ProductFactor::D { n, l } } else { ProductFactor::E { n, l } })
        }
        _ => Err(bad()),
    }
}

fn strips(a: StripsArgs) -> CliResult<()> {
    let factors: Vec<ProductFactor> = a
        .product
        .as_deref()
        .ok_or_else(|| usage("--product is required"))?
        .split(',')
        .map(|t| parse_factor(t.trim()))
        .collect::<CliResult<_>>()?;
    let cfg = StripConfig::new(parse_q(&a.a)?, a.big_k, parse_q(&a.m)?, factors.len())?;
    let all_e = factors.iter().all(|f| matches!(f, ProductFactor::E { .. }));
    if all_e {
        let discs: Vec<(i64, i64)> = factors
            .iter()
            .map(|f| match f {
                ProductFactor::E { n, l } => (*n, *l),
                _ => unreachable!(),
            })
            .collect();
        let cert = verify_bounded(&discs, &cfg, a.steps)?;
        let p = write_out(&a.common, "strips.csv", records_csv(&cert.records).as_bytes())?;
        println!(
            "bounded: case={} ladder={} max|Re|={:.6} max_radius={:.6} cap={} |u|<={:.6} csv={}",
            cert.case,
            cert.ladder,
            cert.max_abs_re.to_f64().unwrap_or(f64::NAN),
            cert.max_radius.to_f64().unwrap_or(f64::NAN),
            cert.radius_cap,
            cert.modulus_bound,
            show(&p)
        );
    } else {
        let cert = verify_escape(&factors, &cfg, a.steps)?;
        let p = write_out(&a.common, "strips.csv", records_csv(&cert.records).as_bytes())?;
        println!(
            "escape: direction={} first_bound={} last_bound={} min_increment={} csv={}",
            cert.direction,
            cert.bounds.first().map(|b| b.to_string()).unwrap_or_default(),
            cert.bounds.last().map(|b| b.to_string()).unwrap_or_default(),
            cert.min_increment,
            show(&p)
        );
    }
    Ok(())
}
