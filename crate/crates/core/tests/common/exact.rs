//! Brute-force evaluation of the kernel and field at the origin in exact
//! rational arithmetic.

use hirota_rh::{SpectralConfig64, SpectralPoint64};
use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use super::c;

pub type Q = Ratio<i128>;
pub type Z = Complex<Q>;

pub fn z(re: (i128, i128), im: (i128, i128)) -> Z {
    Complex::new(Q::new(re.0, re.1), Q::new(im.0, im.1))
}

pub fn to_f64(v: &Z) -> (f64, f64) {
    (v.re.to_f64().unwrap(), v.im.to_f64().unwrap())
}

pub struct ExactPoint {
    pub lambda: Z,
    pub seed: Vec<Z>,
}

pub fn kernel(points: &[ExactPoint]) -> Vec<Vec<Z>> {
    points
        .iter()
        .map(|pk| {
            points
                .iter()
                .map(|pl| {
                    let inner = pk
                        .seed
                        .iter()
                        .zip(&pl.seed)
                        .fold(Z::zero(), |acc, (a, b)| acc + a.conj() * b);
                    inner / (pl.lambda - pk.lambda.conj())
                })
                .collect()
        })
        .collect()
}

pub fn inverse(m: &[Vec<Z>]) -> Vec<Vec<Z>> {
    match m.len() {
        1 => vec![vec![Z::one() / m[0][0]]],
        2 => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            vec![vec![m[1][1] / det, -m[0][1] / det], vec![-m[1][0] / det, m[0][0] / det]]
        }
        _ => unreachable!(),
    }
}

pub fn exact_field(points: &[ExactPoint]) -> Vec<Z> {
    let inv = inverse(&kernel(points));
    let n_fields = points[0].seed.len() - 1;
    let minus_2i = Complex::new(Q::zero(), Q::from_integer(-2));
    (0..n_fields)
        .map(|j| {
            let mut acc = Z::zero();
            for (k, pk) in points.iter().enumerate() {
                for (l, pl) in points.iter().enumerate() {
                    acc += pk.seed[0] * pl.seed[j + 1].conj() * inv[k][l];
                }
            }
            minus_2i * acc
        })
        .collect()
}

pub fn to_config(epsilon: f64, points: &[ExactPoint]) -> SpectralConfig64 {
    let conv = |v: &Z| {
        let (re, im) = to_f64(v);
        c(re, im)
    };
    SpectralConfig64::new(
        points[0].seed.len() - 1,
        epsilon,
        points
            .iter()
            .map(|p| SpectralPoint64::new(conv(&p.lambda), p.seed.iter().map(conv).collect()))
            .collect(),
    )
}

pub fn cases() -> Vec<Vec<ExactPoint>> {
    vec![
        vec![ExactPoint {
            lambda: z((1, 2), (1, 2)),
            seed: vec![z((1, 1), (0, 1)), z((1, 1), (0, 1))],
        }],
        vec![ExactPoint {
            lambda: z((-1, 3), (3, 4)),
            seed: vec![
                z((2, 1), (1, 1)),
                z((1, 2), (0, 1)),
                z((0, 1), (-1, 5)),
                z((3, 4), (1, 3)),
            ],
        }],
        vec![
            ExactPoint {
                lambda: z((1, 2), (1, 2)),
                seed: vec![z((1, 1), (0, 1)), z((1, 2), (1, 4))],
            },
            ExactPoint {
                lambda: z((-1, 4), (1, 1)),
                seed: vec![z((1, 3), (-1, 2)), z((1, 1), (0, 1))],
            },
        ],
        vec![
            ExactPoint {
                lambda: z((2, 5), (1, 2)),
                seed: vec![
                    z((1, 1), (0, 1)),
                    z((1, 2), (1, 5)),
                    z((0, 1), (-3, 10)),
                    z((7, 10), (0, 1)),
                ],
            },
            ExactPoint {
                lambda: z((-3, 10), (7, 10)),
                seed: vec![
                    z((4, 5), (1, 10)),
                    z((-1, 5), (0, 1)),
                    z((3, 5), (2, 5)),
                    z((1, 10), (1, 10)),
                ],
            },
        ],
    ]
}
