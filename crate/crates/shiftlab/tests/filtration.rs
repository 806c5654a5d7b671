mod common;

use common::{flagship_kminus_points, flagship_saddle, random_point};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftlab::filtration::{
    classify_point, escape_test, lemma31_radius_scan, thm13_constants, verify_lemma31,
    verify_orbit_bounds, BoundKind, Direction, EscapeResult, FiltrationParams, Region,
};
use shiftlab::{CPoly, CVec, ShiftComposition, ShiftFactor};

fn params() -> FiltrationParams {
    FiltrationParams::new(4.0, 40.0, 20).unwrap()
}

fn two_factor(d1: usize, d2: usize) -> ShiftComposition {
    let mono = |d: usize| {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        CPoly::from_reals(&c)
    };
    ShiftComposition::new(vec![
        ShiftFactor::new(3, C64::new(1.0, 0.0), mono(d1)).unwrap(),
        ShiftFactor::new(3, C64::new(1.0, 0.0), mono(d2)).unwrap(),
    ])
    .unwrap()
}

#[test]
fn classify_examples() {
    let p = FiltrationParams::with_radius(5.0).unwrap();
    assert_eq!(classify_point(&CVec::from_reals(&[1.0, -2.0, 5.0]), &p), Region::Inner);
    let r = classify_point(&CVec::from_reals(&[0.0, 0.0, 10.0]), &p);
    assert_eq!(r, Region::Side(3));
    assert!(r.is_plus(3) && !r.is_minus(3));
    assert_eq!(classify_point(&CVec::from_reals(&[10.0, 0.0, 10.0]), &p), Region::Side(3));
    assert_eq!(classify_point(&CVec::from_reals(&[10.0, 10.0, 1.0]), &p), Region::Side(2));
    assert!(Region::Side(2).is_minus(3));
    assert_eq!(format!("{}", Region::Side(2)), "V_2");
    assert!(FiltrationParams::new(5.0, 1.0, 10).is_err());
    assert!(FiltrationParams::new(-1.0, 1.0, 10).is_err());
}

#[test]
fn escape_examples() {
    let f = ShiftComposition::flagship();
    let a = flagship_saddle();
    // short cap: rounding drifts the fixed orbit off after ~20 steps
    let p = FiltrationParams::new(4.0, 40.0, 15).unwrap();
    assert_eq!(escape_test(&f, &a, &p, Direction::Forward).unwrap(), EscapeResult::Bounded);
    assert_eq!(escape_test(&f, &a, &p, Direction::Backward).unwrap(), EscapeResult::Bounded);
    let big = CVec::from_reals(&[0.0, 0.0, 1e6]);
    match escape_test(&f, &big, &p, Direction::Forward).unwrap() {
        EscapeResult::Escaped(n) => assert!(n <= 3, "escaped at {n}"),
        r => panic!("{r:?}"),
    }
    // typed factors have no inverse
    let typed = ShiftComposition::single(
        ShiftFactor::with_type(4, C64::new(1.0, 0.0), CPoly::from_reals(&[0.0, 0.0, 1.0]), 2).unwrap(),
    );
    assert!(escape_test(&typed, &CVec::zeros(4), &p, Direction::Backward).is_err());
    assert!(escape_test(&f, &CVec::zeros(4), &p, Direction::Forward).is_err());
}

#[test]
fn unstable_manifold_points_are_backward_bounded() {
    let f = ShiftComposition::flagship();
    let pts = flagship_kminus_points(200, 6, 1);
    for z in &pts {
        assert_eq!(escape_test(&f, z, &params(), Direction::Backward).unwrap(), EscapeResult::Bounded);
    }
}

// [n] enumerated by hand: representatives in 1..=m
fn bracket_oracle(n: i64, m: i64) -> i64 {
    let mut r = n;
    while r < 1 {
        r += m;
    }
    while r > m {
        r -= m;
    }
    r
}

#[test]
fn growth_constant_examples() {
    let f = ShiftComposition::flagship();
    let c = thm13_constants(&f, 0.5, 3.0).unwrap();
    for j in 2..=3 {
        assert!((c.c_plus(j) - 1.5).abs() < 1e-15);
        assert!((c.c_minus(j) - 0.5).abs() < 1e-15);
    }
    let g = two_factor(2, 3);
    let c = thm13_constants(&g, 0.25, 3.0).unwrap();
    assert_eq!(c.d_li(1, 2), 2);
    assert!((c.c_plus(2) - 1.25f64.powi(3)).abs() < 1e-14);
    // every D^l_i against the enumeration oracle
    let degs = [2i64, 3];
    for i in 1..=3i64 {
        let l = 1;
        let mut prod = 1;
        for s in 0..l {
            prod *= degs[(bracket_oracle(2 - 3 + i - s, 2) - 1) as usize];
        }
        assert_eq!(c.d_li(1, i as usize) as i64, prod, "i = {i}");
    }
    assert!(thm13_constants(&f, 1.0, 3.0).is_err());
    assert!(thm13_constants(&f, 0.0, 3.0).is_err());
    assert!(thm13_constants(&f, 0.5, 0.0).is_err());
}

proptest! {
    #[test]
    fn growth_constants_bracket_unity(eps in 0.001f64..0.999, d1 in 1usize..5, d2 in 1usize..5) {
        let g = two_factor(d1, d2);
        let c = thm13_constants(&g, eps, 1.0).unwrap();
        for j in 2..=3 {
            prop_assert!(c.c_minus(j) <= 1.0 && c.c_plus(j) >= 1.0);
            prop_assert!(c.c_minus(j) * c.c_plus(j) <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn escape_monotone_in_threshold(seed in 0u64..10_000, scale in 1.0f64..30.0) {
        let f = ShiftComposition::flagship();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_point(&mut rng, 3, 4.0);
        let lo = escape_test(&f, &z, &FiltrationParams::new(4.0, 40.0, 12).unwrap(), Direction::Forward).unwrap();
        let hi = escape_test(&f, &z, &FiltrationParams::new(4.0, 40.0 * scale, 12).unwrap(), Direction::Forward).unwrap();
        if matches!(lo, EscapeResult::Escaped(_)) {
            prop_assert!(matches!(hi, EscapeResult::Escaped(_)), "{:?} -> {:?}", lo, hi);
        }
    }
}

#[test]
fn orbit_bounds_at_saddle() {
    let f = ShiftComposition::flagship();
    let a = flagship_saddle();
    let p = FiltrationParams::new(4.0, 40.0, 15).unwrap();
    // any M at least |a| absorbs the shrinking lower constant
    let c = thm13_constants(&f, 0.5, 3.0).unwrap();
    let rep = verify_orbit_bounds(&f, &a, &c, 6, &p).unwrap();
    assert!(rep.precondition_ok);
    assert_eq!(rep.violations(), 0);
    assert_eq!(rep.rows.len(), 7 * 2 * 2);
    assert!(rep.to_csv().starts_with("j,n,lhs,rhs,margin,pass\n"));
}

#[test]
fn orbit_bounds_on_unstable_manifold() {
    let f = ShiftComposition::flagship();
    let pts = flagship_kminus_points(100, 6, 2);
    // M must cover every point the orbit visits, not just the seeds
    let mut visited = Vec::new();
    for z in &pts {
        for n in 0..=6 {
            visited.push(f.iterate(z, n));
        }
    }
    let lemma = verify_lemma31(&f, 0.5, &visited).unwrap();
    assert!(lemma.m_theorem.is_finite());
    let c = thm13_constants(&f, 0.5, lemma.m_theorem).unwrap();
    for z in &pts {
        let rep = verify_orbit_bounds(&f, z, &c, 6, &params()).unwrap();
        assert!(rep.precondition_ok);
        assert_eq!(rep.violations(), 0, "{z}: min margin {}", rep.min_margin());
    }
}

#[test]
fn precondition_gating() {
    let f = ShiftComposition::flagship();
    let c = thm13_constants(&f, 0.5, 0.01).unwrap();
    let seed = CVec::from_reals(&[0.0, 0.0, 100.0]);
    let rep = verify_orbit_bounds(&f, &seed, &c, 6, &params()).unwrap();
    assert!(!rep.precondition_ok);
    assert!(rep.rows.iter().any(|r| r.kind == BoundKind::Upper));
}

#[test]
fn log_space_handles_large_exponents() {
    // fixed point of (z2, z3, z1 + z3^6 - c) with c chosen so that (1,1,1) is fixed
    let f = ShiftComposition::single(
        ShiftFactor::new(3, C64::new(1.0, 0.0), CPoly::from_reals(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])).unwrap(),
    );
    let z = CVec::from_reals(&[1.0, 1.0, 1.0]);
    assert!(f.eval(&z).dist(&z) < 1e-15);
    let c = thm13_constants(&f, 0.5, 2.0).unwrap();
    let rep = verify_orbit_bounds(&f, &z, &c, 30, &FiltrationParams::new(2.0, 20.0, 10).unwrap()).unwrap();
    assert!(rep.overflow_at.is_none());
    assert!(rep.rows.iter().all(|r| r.rhs.is_finite() && r.lhs.is_finite()));
    assert_eq!(rep.violations(), 0);
}

#[test]
fn one_step_bound_examples() {
    let f = ShiftComposition::flagship();
    let pts = flagship_kminus_points(300, 6, 3);
    let r05 = verify_lemma31(&f, 0.5, &pts).unwrap();
    assert_eq!(r05.rows.len(), 2);
    assert!(r05.rows.iter().all(|r| r.exponent == 2));
    for (up, lo) in r05.margins() {
        assert!(up >= 0.0 && lo >= 0.0);
    }
    let r1 = verify_lemma31(&f, 1.0, &pts).unwrap();
    assert!(r1.rows.iter().all(|r| r.lower_excess == f64::NEG_INFINITY));
    assert!(r1.margins().iter().all(|m| m.1 == f64::INFINITY));
    let mut last = f64::INFINITY;
    for eps in [0.05, 0.1, 0.3, 0.5, 1.0, 2.0] {
        let m = verify_lemma31(&f, eps, &pts).unwrap().m_bound;
        assert!(m <= last, "eps {eps}: {m} > {last}");
        last = m;
    }
    assert!(verify_lemma31(&f, 0.5, &[]).is_err());
    assert!(verify_lemma31(&f, 0.0, &pts).is_err());
}

#[test]
fn one_step_bound_two_factor_parts() {
    let g = two_factor(2, 3);
    let pts: Vec<CVec> = (0..20).map(|i| CVec::from_reals(&[0.1 * i as f64, 0.2, -0.3])).collect();
    let rep = verify_lemma31(&g, 0.5, &pts).unwrap();
    // part 1 on G_1 images and part 2 on the points, each with i = 2, 3
    assert_eq!(rep.rows.len(), 4);
    let e: Vec<(usize, usize, u64)> = rep.rows.iter().map(|r| (r.part, r.i, r.exponent)).collect();
    // d_{[j-k+i]}: part 1 -> d_{[0]} = d_2, d_{[1]} = d_1; part 2 -> d_{[1]}, d_{[2]}
    assert_eq!(e, vec![(1, 2, 3), (1, 3, 2), (2, 2, 2), (2, 3, 3)]);
}

#[test]
fn forward_images_respect_the_same_constants() {
    let f = ShiftComposition::flagship();
    let pts = flagship_kminus_points(300, 5, 4);
    let rep = verify_lemma31(&f, 0.5, &pts).unwrap();
    let imgs: Vec<CVec> = pts.iter().map(|z| f.eval(z)).collect();
    let img = verify_lemma31(&f, 0.5, &imgs).unwrap();
    for r in &img.rows {
        assert!(r.upper_excess <= rep.m_theorem && r.lower_excess <= rep.m_theorem, "{r:?}");
    }
}

// The additive M alone is too small for the growth bounds: at the saddle the lower
// bound needs M >= |a_j|, while the additive excess there is only (1-eps)|a|^2 - |a|.
#[test]
fn additive_constant_does_not_carry_the_growth_bounds() {
    let f = ShiftComposition::flagship();
    let a = flagship_saddle();
    let rep = verify_lemma31(&f, 0.5, &[a.clone()]).unwrap();
    let s6 = 6f64.sqrt();
    assert!((rep.m_bound - (0.5 * 6.0 - s6)).abs() < 1e-12);
    assert!((rep.m_chain - s6).abs() < 1e-12);
    let p = FiltrationParams::new(4.0, 40.0, 15).unwrap();
    let weak = thm13_constants(&f, 0.5, rep.m_bound).unwrap();
    assert!(verify_orbit_bounds(&f, &a, &weak, 6, &p).unwrap().violations() > 0);
    let strong = thm13_constants(&f, 0.5, rep.m_theorem).unwrap();
    assert_eq!(verify_orbit_bounds(&f, &a, &strong, 6, &p).unwrap().violations(), 0);
}

#[test]
fn radius_scan_reports_smallest_certified() {
    let f = ShiftComposition::flagship();
    let mut cands = flagship_kminus_points(50, 4, 5);
    cands.push(CVec::from_reals(&[0.0, 0.0, 100.0]));
    let (rows, best) = lemma31_radius_scan(&f, 0.5, &[1.0, 4.0, 8.0], 25, &cands).unwrap();
    assert_eq!(rows.len(), 3);
    // R = 1 puts the saddle itself outside the ball V, but the 10R escape ball still holds it
    assert!(rows.iter().all(|r| r.accepted <= 50));
    assert_eq!(best, Some(1.0));
}

