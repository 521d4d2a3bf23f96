#![allow(dead_code)]

pub mod exact;

use hirota_rh::{SpectralConfig64, SpectralPoint64, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_upper(rng: &mut StdRng, re: (f64, f64), im: (f64, f64)) -> C64 {
    c(rng.gen_range(re.0..re.1), rng.gen_range(im.0..im.1))
}

pub fn fig1() -> SpectralConfig64 {
    SpectralConfig64::figure_one()
}

pub fn one_soliton_n1() -> SpectralConfig64 {
    SpectralConfig64::new(
        1,
        0.5,
        vec![SpectralPoint64::new(c(0.3, 0.6), vec![c(1.0, 0.0), c(0.4, -0.7)])],
    )
}

pub fn two_soliton_n1() -> SpectralConfig64 {
    SpectralConfig64::new(
        1,
        0.25,
        vec![
            SpectralPoint64::new(c(0.4, 0.5), vec![c(1.0, 0.0), c(0.8, 0.3)]),
            SpectralPoint64::new(c(-0.3, 0.7), vec![c(0.6, -0.2), c(1.0, 0.0)]),
        ],
    )
}

pub fn two_soliton_n3() -> SpectralConfig64 {
    SpectralConfig64::new(
        3,
        0.3,
        vec![
            SpectralPoint64::new(c(0.4, 0.5), vec![c(1.0, 0.0), c(0.5, 0.2), c(0.0, -0.3), c(0.7, 0.0)]),
            SpectralPoint64::new(c(-0.3, 0.7), vec![c(0.8, 0.1), c(-0.2, 0.0), c(0.6, 0.4), c(0.1, 0.1)]),
        ],
    )
}

pub fn three_soliton_n1() -> SpectralConfig64 {
    SpectralConfig64::new(
        1,
        0.2,
        vec![
            SpectralPoint64::new(c(0.5, 0.4), vec![c(1.0, 0.0), c(0.5, 0.5)]),
            SpectralPoint64::new(c(-0.2, 0.6), vec![c(0.7, 0.0), c(1.0, -0.3)]),
            SpectralPoint64::new(c(0.1, 0.8), vec![c(1.0, 0.2), c(-0.4, 0.0)]),
        ],
    )
}

pub fn three_soliton_n3() -> SpectralConfig64 {
    SpectralConfig64::new(
        3,
        0.2,
        vec![
            SpectralPoint64::new(c(0.5, 0.4), vec![c(1.0, 0.0), c(0.5, 0.5), c(0.2, 0.0), c(0.0, 0.3)]),
            SpectralPoint64::new(c(-0.2, 0.6), vec![c(0.7, 0.0), c(1.0, -0.3), c(0.0, 0.4), c(0.3, 0.0)]),
            SpectralPoint64::new(c(0.1, 0.8), vec![c(1.0, 0.2), c(-0.4, 0.0), c(0.2, 0.2), c(0.5, 0.0)]),
        ],
    )
}

/// Configs used by the residual sweeps: n = 1, 2, 3 for one and three fields.
pub fn residual_suite() -> Vec<(&'static str, SpectralConfig64)> {
    vec![
        ("n=1 N=1", one_soliton_n1()),
        ("n=1 N=3", fig1()),
        ("n=2 N=1", two_soliton_n1()),
        ("n=2 N=3", two_soliton_n3()),
        ("n=3 N=1", three_soliton_n1()),
        ("n=3 N=3", three_soliton_n3()),
    ]
}

/// Golden-section maximisation of a unimodal function on [a, b].
pub fn maximize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
