use num_complex::Complex64 as C64;
use proptest::prelude::*;
use shiftlab::algebra::{eigenvalues, poly_eval, series_scale_arg, CMatrix, CPoly, CVec, VecSeries};
use shiftlab::maps::map_on_series;
use shiftlab::{ShiftComposition, ShiftFactor};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// Independent oracle for the flagship cubic x^3 - 2 sqrt6 x^2 - 1: bisection for
// the real root, then the quadratic factor by deflation.
fn flagship_cubic_roots() -> (f64, C64, C64) {
    let s6 = 6f64.sqrt();
    let f = |x: f64| x * x * x - 2.0 * s6 * x * x - 1.0;
    let (mut lo, mut hi) = (4.0, 6.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid
        } else {
            lo = mid
        }
    }
    let r = 0.5 * (lo + hi);
    let b = r - 2.0 * s6;
    let cc = r * b;
    let disc = c(b * b - 4.0 * cc, 0.0).sqrt();
    (r, (-b + disc) / 2.0, (-b - disc) / 2.0)
}

// frozen from a 30-digit evaluation of the same cubic
const FLAGSHIP_LAMBDA: f64 = 4.939_957_747_240_851;
const FLAGSHIP_STABLE_MODULUS: f64 = 0.449_923_194_809_272_3;

#[test]
fn poly_eval_examples() {
    let p = CPoly::from_reals(&[-6.0, 0.0, 1.0]);
    assert_eq!(poly_eval(&p, c(3.0, 0.0)), c(3.0, 0.0));
    assert_eq!(poly_eval(&CPoly::zero(), c(17.0, 1.0)), c(0.0, 0.0));
    // sqrt6 as the positive root of z^2 - 6 from the quadratic formula
    let root = (-0.0 + (0.0f64 - 4.0 * -6.0).sqrt()) / 2.0;
    assert!(poly_eval(&p, c(root, 0.0)).norm() < 1e-14);
}

#[test]
fn poly_degree_and_trim() {
    let p = CPoly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(p.degree(), 1);
    assert!(CPoly::zero().is_zero());
    assert_eq!(CPoly::zero().degree(), 0);
}

#[test]
fn eigen_identity_and_diagonal() {
    let ev = eigenvalues(&CMatrix::identity(3)).unwrap();
    assert_eq!(ev, vec![c(1.0, 0.0); 3]);
    let d = CMatrix::diagonal(&[c(2.0, 0.0), c(0.5, 0.0), c(-3.0, 0.0)]);
    assert_eq!(
        eigenvalues(&d).unwrap(),
        vec![c(-3.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]
    );
}

#[test]
fn eigen_flagship_companion() {
    let s6 = 6f64.sqrt();
    // DF at the saddle (s6, s6, s6) of (z2, z3, z1 + z3^2 - 6)
    let m = CMatrix::from_real_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 2.0 * s6],
    ]);
    let ev = eigenvalues(&m).unwrap();
    let (r, z1, z2) = flagship_cubic_roots();
    assert!((ev[0].re - r).abs() < 1e-12 && ev[0].im.abs() < 1e-12);
    assert!((r - FLAGSHIP_LAMBDA).abs() < 1e-12);
    for z in [z1, z2] {
        assert!(ev[1..].iter().any(|e| (e - z).norm() < 1e-10));
    }
    assert!((ev[1].norm() - FLAGSHIP_STABLE_MODULUS).abs() < 1e-10);
    assert!((ev[2].norm() - FLAGSHIP_STABLE_MODULUS).abs() < 1e-10);
    let prod: C64 = ev.iter().product();
    assert!((prod - c(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn eigen_rejects_too_large() {
    assert!(eigenvalues(&CMatrix::identity(9)).is_err());
}

#[test]
fn eigenvector_of_companion() {
    let s6 = 6f64.sqrt();
    let m = CMatrix::from_real_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 2.0 * s6],
    ]);
    let lam = eigenvalues(&m).unwrap()[0];
    let v = m.eigenvector(lam);
    let r = &m.mul_vec(&v) - &v.scale(lam);
    assert!(r.norm() < 1e-12);
    assert!((v.norm2() - 1.0).abs() < 1e-12);
}

#[test]
fn scale_arg_examples() {
    let lam = c(FLAGSHIP_LAMBDA, 0.0);
    let s = VecSeries::last_coordinate_identity(3, 5);
    let out = series_scale_arg(&s, lam.inv()).unwrap();
    assert_eq!(out.coeff(1), CVec::new(vec![c(0.0, 0.0), c(0.0, 0.0), lam.inv()]));
    assert_eq!(series_scale_arg(&s, c(1.0, 0.0)).unwrap(), s);
    // t + t^2 in every coordinate, mu = 2
    let one = CVec::from_reals(&[1.0, 1.0]);
    let z = CVec::zeros(2);
    let s2 = VecSeries::from_coeffs(&[z.clone(), one.clone(), one.clone()]);
    let out = series_scale_arg(&s2, c(2.0, 0.0)).unwrap();
    assert_eq!(out.coeff(1), CVec::from_reals(&[2.0, 2.0]));
    assert_eq!(out.coeff(2), CVec::from_reals(&[4.0, 4.0]));
    assert!(series_scale_arg(&s2, c(0.0, 0.0)).is_err());
}

#[test]
fn map_on_series_examples() {
    // linear diagonal-type action on (0,...,0,t): F(z) = (z2, z3, 2 z1 + 3 z3)
    let lin = ShiftComposition::single(
        ShiftFactor::new(3, c(2.0, 0.0), CPoly::from_reals(&[0.0, 3.0])).unwrap(),
    );
    let s = VecSeries::last_coordinate_identity(3, 4);
    let out = map_on_series(&lin, &s);
    assert_eq!(out.coeff(1), CVec::from_reals(&[0.0, 1.0, 3.0]));
    // p = z^2, alpha = 1: (0,0,t) -> (0, t, t^2)
    let sq = ShiftComposition::single(
        ShiftFactor::new(3, c(1.0, 0.0), CPoly::from_reals(&[0.0, 0.0, 1.0])).unwrap(),
    );
    let out = map_on_series(&sq, &s);
    assert_eq!(out.coeff(0), CVec::zeros(3));
    assert_eq!(out.coeff(1), CVec::from_reals(&[0.0, 1.0, 0.0]));
    assert_eq!(out.coeff(2), CVec::from_reals(&[0.0, 0.0, 1.0]));
    // constant series at the flagship fixed point
    let f = ShiftComposition::flagship();
    let s6 = 6f64.sqrt();
    let a = CVec::from_reals(&[s6, s6, s6]);
    let out = map_on_series(&f, &VecSeries::constant(&a, 6));
    assert!(out.coeff(0).dist(&a) < 1e-14);
    for j in 1..=6 {
        assert_eq!(out.coeff(j).norm(), 0.0);
    }
}

fn random_matrix(vals: &[f64], n: usize) -> CMatrix {
    let rows = (0..n)
        .map(|i| (0..n).map(|j| c(vals[2 * (i * n + j)], vals[2 * (i * n + j) + 1])).collect())
        .collect();
    CMatrix::from_rows(rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigen_trace_and_det(n in 2usize..=8, vals in prop::collection::vec(-2.0f64..2.0, 128)) {
        let m = random_matrix(&vals, n);
        let ev = eigenvalues(&m).unwrap();
        prop_assert_eq!(ev.len(), n);
        let sum: C64 = ev.iter().sum();
        let prod: C64 = ev.iter().product();
        let tr = m.trace();
        let det = m.det();
        let scale = m.norm_inf().max(1.0);
        prop_assert!((sum - tr).norm() <= 1e-8 * scale, "trace {} vs {}", sum, tr);
        prop_assert!((prod - det).norm() <= 1e-8 * scale.powi(n as i32), "det {} vs {}", prod, det);
        for w in ev.windows(2) {
            prop_assert!(w[0].norm() >= w[1].norm() - 1e-15);
        }
    }

    #[test]
    fn series_ring_laws(vals in prop::collection::vec(-1.0f64..1.0, 3 * 2 * 2 * 7)) {
        let mk = |off: usize| {
            let comps = (0..2).map(|i| (0..7).map(|j| {
                let b = off + 2 * (i * 7 + j);
                c(vals[b], vals[b + 1])
            }).collect()).collect();
            VecSeries::from_components(comps)
        };
        let (a, b, d) = (mk(0), mk(28), mk(56));
        let lhs = a.mul(&b).mul(&d);
        let rhs = a.mul(&b.mul(&d));
        prop_assert!(lhs.max_coeff_change(&rhs) < 1e-12);
        let lhs = a.mul(&b.add(&d));
        let rhs = a.mul(&b).add(&a.mul(&d));
        prop_assert!(lhs.max_coeff_change(&rhs) < 1e-12);
    }
}

#[test]
fn map_series_commutes_with_evaluation() {
    let f = ShiftComposition::flagship();
    let lam = c(FLAGSHIP_LAMBDA, 0.0);
    let n = 12;
    // a generic polynomial curve of degree 3 through the origin
    let s = VecSeries::from_coeffs(&[
        CVec::from_reals(&[0.1, -0.2, 0.3]),
        CVec::new(vec![c(1.0, 0.5), c(0.0, 1.0), c(-1.0, 0.0)]),
        CVec::from_reals(&[0.5, 0.25, -0.75]),
        CVec::new(vec![c(0.0, 0.2), c(0.3, 0.0), c(0.1, 0.1)]),
    ]);
    let mut padded = VecSeries::zero(3, n);
    for j in 0..=3 {
        padded.set_coeff(j, &s.coeff(j));
    }
    let composed = map_on_series(&f, &series_scale_arg(&padded, lam.inv()).unwrap());
    for i in 0..100 {
        let th = i as f64 * 0.618_033_988_749_895 * std::f64::consts::TAU;
        let r = 0.1 * ((i % 10) as f64 + 1.0) / 10.0;
        let t = C64::from_polar(r, th);
        let direct = f.eval(&padded.eval(t / lam));
        let via = composed.eval(t);
        // F o S has degree 6 in t, below the truncation order
        assert!(direct.dist(&via) < 1e-13, "{i}: {}", direct.dist(&via));
    }
}
