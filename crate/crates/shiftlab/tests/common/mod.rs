#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::{CMatrix, CVec, ShiftComposition};

pub fn flagship_saddle() -> CVec {
    let s6 = 6f64.sqrt();
    CVec::from_reals(&[s6, s6, s6])
}

/// Unstable eigenvector of DF at the flagship saddle: for the companion-type
/// Jacobian it is (1, lambda, lambda^2) up to scale.
pub fn flagship_unstable_direction(lambda: f64) -> CVec {
    let v = CVec::from_reals(&[1.0, lambda, lambda * lambda]);
    let n = v.norm2();
    v.scale(C64::new(1.0 / n, 0.0))
}

/// Points on the unstable manifold: a small step from the saddle along the unstable
/// direction, pushed forward a few times. Stable error contracts under the push, so
/// the backward orbit retraces the pushes and then sits near the saddle.
pub fn flagship_kminus_points(count: usize, max_push: usize, seed: u64) -> Vec<CVec> {
    let f = ShiftComposition::flagship();
    let lambda = 4.939_957_747_240_851;
    let a = flagship_saddle();
    let v = flagship_unstable_direction(lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = 1e-4 * (1.0 + rng.gen::<f64>() * (lambda - 1.0));
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let z = &a + &v.scale(C64::from_polar(r, th));
            let n = rng.gen_range(0..=max_push);
            f.iterate(&z, n)
        })
        .collect()
}

pub fn random_point(rng: &mut ChaCha8Rng, k: usize, radius: f64) -> CVec {
    CVec::new(
        (0..k)
            .map(|_| C64::from_polar(radius * rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU))
            .collect(),
    )
}

pub fn matrix_residual(m: &CMatrix, v: &CVec, lambda: C64) -> f64 {
    (&m.mul_vec(v) - &v.scale(lambda)).norm()
}
