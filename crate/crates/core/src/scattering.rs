//! Direct scattering on a sampled potential.
//!
//! Integrates the spatial spectral problem η_x = iλ[Λ, η] + Qη from η = I at
//! the left edge to the right edge with fixed-step RK4, then reads off the
//! scattering matrix S = E⁻¹ η E with E = e^{iλΛx} at x_max. For Im λ > 0
//! the full matrix system grows like e^{2 Im λ x}, so s₁₁ is computed from
//! the first column alone:
//!
//! ```text
//! v' = iλ(Λ + I)v + Qv,   v(x_min) = (1, 0, …, 0)
//! ```
//!
//! which is closed because Λ₁₁ = −1, and whose decaying modes stay bounded
//! throughout the upper half-plane.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lax::FieldEvaluator;
use crate::linalg::CMatrix;
use crate::scalar::{cx, i_unit, is_finite_cx, real, Cx, Real};
use crate::spectral::SpectralConfig;

/// Edge magnitude above which a trace is rejected.
pub const TAIL_THRESHOLD: f64 = 1e-8;
pub const MIN_SAMPLES: usize = 2001;
pub const DEFAULT_SAMPLES: usize = 20001;
/// Entry magnitude treated as overflow during integration.
pub const BLOWUP_LIMIT: f64 = 1e300;

/// Half-width giving edge decay of about e^{−20} for the slowest soliton.
pub fn default_half_width<T: Real>(config: &SpectralConfig<T>) -> T {
    match config.min_imag() {
        Some(b) => T::lit(10.0) / b,
        None => T::lit(10.0),
    }
}

/// q(x) at a frozen time on a uniform grid, plus midpoint values for RK4.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTrace<T: Real> {
    pub t: T,
    pub x_min: T,
    pub x_max: T,
    pub n_fields: usize,
    /// (x, q) per node, uniform in x.
    pub samples: Vec<(T, Vec<Cx<T>>)>,
    midpoints: Vec<Vec<Cx<T>>>,
}

impl<T: Real> PotentialTrace<T> {
    /// Builds a trace from values on the uniform grid over [x_min, x_max].
    pub fn from_samples(t: T, x_min: T, x_max: T, values: Vec<Vec<Cx<T>>>) -> Result<Self> {
        let n = values.len();
        if n < 4 || !(x_min < x_max) {
            return Err(Error::Precondition(format!(
                "trace needs at least 4 samples over a nonempty interval, got {n} on [{x_min}, {x_max}]"
            )));
        }
        let n_fields = values[0].len();
        if values.iter().any(|v| v.len() != n_fields) {
            return Err(Error::Precondition("trace samples have inconsistent lengths".into()));
        }
        let step = (x_max - x_min) / T::of_usize(n - 1);
        let samples: Vec<(T, Vec<Cx<T>>)> = values
            .into_iter()
            .enumerate()
            .map(|(i, q)| {
                (
                    if i == n - 1 {
                        x_max
                    } else {
                        x_min + step * T::of_usize(i)
                    },
                    q,
                )
            })
            .collect();
        let midpoints = cubic_midpoints(&samples);
        Ok(PotentialTrace {
            t,
            x_min,
            x_max,
            n_fields,
            samples,
            midpoints,
        })
    }

    pub fn step(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.samples.len() - 1)
    }

    /// Largest |q| over the two edge samples.
    pub fn edge_magnitude(&self) -> T {
        let norm = |q: &[Cx<T>]| q.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        norm(&self.samples[0].1).max(norm(&self.samples[self.samples.len() - 1].1))
    }
}

/// Four-point cubic interpolation at interval midpoints, one-sided at the ends.
fn cubic_midpoints<T: Real>(samples: &[(T, Vec<Cx<T>>)]) -> Vec<Vec<Cx<T>>> {
    let n = samples.len();
    let central = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
    let left = [5.0 / 16.0, 15.0 / 16.0, -5.0 / 16.0, 1.0 / 16.0];
    (0..n - 1)
        .map(|i| {
            let (start, w) = if i == 0 {
                (0, left)
            } else if i == n - 2 {
                (n - 4, [left[3], left[2], left[1], left[0]])
            } else {
                (i - 1, central)
            };
            let m = samples[0].1.len();
            (0..m)
                .map(|j| {
                    (0..4).fold(Cx::new(T::zero(), T::zero()), |acc, k| {
                        acc + samples[start + k].1[j] * T::lit(w[k])
                    })
                })
                .collect()
        })
        .collect()
}

/// Samples `field` at time `t` on `n_samples` uniform nodes over [−L, L].
pub fn trace_field<T: Real>(
    field: &impl FieldEvaluator<T>,
    t: T,
    half_width: T,
    n_samples: usize,
    suggested_half_width: T,
) -> Result<PotentialTrace<T>> {
    if n_samples < MIN_SAMPLES || n_samples.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "n_samples must be odd and at least {MIN_SAMPLES}, got {n_samples}"
        )));
    }
    if !(half_width > T::zero() && half_width.is_finite()) {
        return Err(Error::Precondition(format!(
            "half-width must be positive, got {half_width}"
        )));
    }
    let step = (half_width + half_width) / T::of_usize(n_samples - 1);
    let values = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let x = if i == n_samples - 1 {
                half_width
            } else {
                -half_width + step * T::of_usize(i)
            };
            field.evaluate(x, t).map_err(|e| e.at(x.as_f64(), t.as_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = PotentialTrace::from_samples(t, -half_width, half_width, values)?;
    let edge = trace.edge_magnitude();
    if !(edge < T::lit(TAIL_THRESHOLD)) {
        return Err(Error::TailNotDecayed {
            magnitude: edge.as_f64(),
            threshold: TAIL_THRESHOLD,
            suggested_half_width: suggested_half_width.as_f64(),
        });
    }
    Ok(trace)
}

/// Samples the reconstructed potential of `config` at time `t` over [−L, L].
pub fn trace_potential<T: Real>(
    config: &SpectralConfig<T>,
    t: T,
    half_width: T,
    n_samples: usize,
) -> Result<PotentialTrace<T>> {
    trace_field(config, t, half_width, n_samples, default_half_width(config))
}

/// Qv without forming Q.
fn apply_q<T: Real>(q: &[Cx<T>], v: &[Cx<T>], out: &mut [Cx<T>]) {
    let mut head = Cx::new(T::zero(), T::zero());
    for (j, &qj) in q.iter().enumerate() {
        head += qj * v[j + 1];
        out[j + 1] = -qj.conj() * v[0];
    }
    out[0] = head;
}

fn check_finite<T: Real>(values: &[Cx<T>], x: T) -> Result<()> {
    let limit = T::lit(BLOWUP_LIMIT);
    if values
        .iter()
        .all(|z| is_finite_cx(*z) && z.re.abs() <= limit && z.im.abs() <= limit)
    {
        Ok(())
    } else {
        Err(Error::NonFiniteState { x: x.as_f64() })
    }
}

/// Classical RK4 over the trace for a linear system y' = f(q(x), y).
fn rk4<T: Real>(
    trace: &PotentialTrace<T>,
    mut y: Vec<Cx<T>>,
    rhs: impl Fn(&[Cx<T>], &[Cx<T>], &mut [Cx<T>]),
) -> Result<Vec<Cx<T>>> {
    let h = trace.step();
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let n = y.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![y[0]; n],
        vec![y[0]; n],
        vec![y[0]; n],
        vec![y[0]; n],
        vec![y[0]; n],
    );
    let axpy = |tmp: &mut [Cx<T>], y: &[Cx<T>], a: T, k: &[Cx<T>]| {
        for ((t, &yi), &ki) in tmp.iter_mut().zip(y).zip(k) {
            *t = yi + ki * a;
        }
    };
    for (i, window) in trace.samples.windows(2).enumerate() {
        let (q0, q1, qm) = (&window[0].1, &window[1].1, &trace.midpoints[i]);
        rhs(q0, &y, &mut k1);
        axpy(&mut tmp, &y, half, &k1);
        rhs(qm, &tmp, &mut k2);
        axpy(&mut tmp, &y, half, &k2);
        rhs(qm, &tmp, &mut k3);
        axpy(&mut tmp, &y, h, &k3);
        rhs(q1, &tmp, &mut k4);
        for j in 0..n {
            y[j] += (k1[j] + (k2[j] + k3[j]) * T::lit(2.0) + k4[j]) * sixth;
        }
        check_finite(&y, window[1].0)?;
    }
    Ok(y)
}

/// η₋ at x_max, starting from the identity at x_min.
pub fn integrate_jost<T: Real>(trace: &PotentialTrace<T>, lambda: Cx<T>) -> Result<CMatrix<T>> {
    let dim = trace.n_fields + 1;
    let ilam = i_unit::<T>() * lambda;
    // [Λ, η]_jk = (Λ_j − Λ_k) η_jk, and Λ_j − Λ_k is ∓2 on the first row/column.
    let two = T::lit(2.0);
    let identity = CMatrix::<T>::identity(dim).as_slice().to_vec();
    let col = vec![Cx::new(T::zero(), T::zero()); dim];
    let y = rk4(trace, identity, |q, y, out| {
        let mut qv = col.clone();
        let mut v = col.clone();
        for k in 0..dim {
            for j in 0..dim {
                v[j] = y[j * dim + k];
            }
            apply_q(q, &v, &mut qv);
            for j in 0..dim {
                let comm = match (j == 0, k == 0) {
                    (true, false) => -two,
                    (false, true) => two,
                    _ => T::zero(),
                };
                out[j * dim + k] = ilam * v[j] * comm + qv[j];
            }
        }
    })?;
    Ok(CMatrix::from_fn(dim, dim, |j, k| y[j * dim + k]))
}

/// First column of η₋ at x_max; stable for Im λ ≥ 0.
pub fn integrate_jost_column1<T: Real>(trace: &PotentialTrace<T>, lambda: Cx<T>) -> Result<Vec<Cx<T>>> {
    if lambda.im < T::zero() {
        return Err(Error::Precondition(format!(
            "column-1 integration needs Im λ >= 0, got {lambda}"
        )));
    }
    let dim = trace.n_fields + 1;
    let growth = i_unit::<T>() * lambda * T::lit(2.0);
    let mut start = vec![Cx::new(T::zero(), T::zero()); dim];
    start[0] = real(T::one());
    rk4(trace, start, |q, y, out| {
        apply_q(q, y, out);
        for j in 1..dim {
            out[j] += growth * y[j];
        }
    })
}

/// Scattering matrix at a real spectral parameter, with its invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix<T: Real> {
    pub lambda: Cx<T>,
    pub s: CMatrix<T>,
    /// |det S − 1|.
    pub det_deviation: T,
    /// max |S†S − I|.
    pub unitarity_deviation: T,
}

impl<T: Real> ScatteringMatrix<T> {
    /// Largest |s_j1| for j ≥ 2: zero for a reflectionless potential.
    pub fn reflection(&self) -> T {
        (1..self.s.rows()).fold(T::zero(), |m, j| m.max(self.s[(j, 0)].norm()))
    }

    pub fn s11(&self) -> Cx<T> {
        self.s[(0, 0)]
    }
}

/// S = E⁻¹ η₋ E at x_max for real λ.
pub fn scattering_matrix<T: Real>(trace: &PotentialTrace<T>, lambda: Cx<T>) -> Result<ScatteringMatrix<T>> {
    if lambda.im != T::zero() {
        return Err(Error::Precondition(format!(
            "scattering matrix needs real λ, got {lambda}"
        )));
    }
    let eta = integrate_jost(trace, lambda)?;
    let dim = eta.rows();
    let phase = (i_unit::<T>() * lambda * trace.x_max).exp();
    // E = diag(e^{−iλx}, e^{iλx}, …); S_jk = E_j⁻¹ η_jk E_k.
    let e = |j: usize| if j == 0 { phase.conj() } else { phase };
    let s = CMatrix::from_fn(dim, dim, |j, k| eta[(j, k)] * e(k) / e(j));
    let det_deviation = (s.det() - real(T::one())).norm();
    let gram = &s.adjoint() * &s;
    let unitarity_deviation = (&gram - &CMatrix::identity(dim)).max_abs();
    Ok(ScatteringMatrix {
        lambda,
        s,
        det_deviation,
        unitarity_deviation,
    })
}

/// s₁₁(λ) for Im λ ≥ 0.
pub fn s11<T: Real>(trace: &PotentialTrace<T>, lambda: Cx<T>) -> Result<Cx<T>> {
    integrate_jost_column1(trace, lambda).map(|v| v[0])
}

/// Axis-aligned rectangle in the closed upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour<T: Real> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> Contour<T> {
    /// Rectangle enclosing every eigenvalue of `config` with margin.
    pub fn enclosing(config: &SpectralConfig<T>, margin: T) -> Self {
        let pts = config.points.iter().map(|p| p.lambda);
        let (mut re_min, mut re_max, mut im_max) = (T::zero(), T::zero(), T::zero());
        for z in pts {
            re_min = re_min.min(z.re);
            re_max = re_max.max(z.re);
            im_max = im_max.max(z.im);
        }
        let im_min = config.min_imag().map_or(margin, |b| b * T::lit(0.5));
        Contour {
            re_min: re_min - margin,
            re_max: re_max + margin,
            im_min,
            im_max: im_max + margin,
        }
    }

    fn corners(&self) -> [Cx<T>; 4] {
        [
            cx(self.re_min, self.im_min),
            cx(self.re_max, self.im_min),
            cx(self.re_max, self.im_max),
            cx(self.re_min, self.im_max),
        ]
    }
}

const MAX_ARG_STEP: f64 = 0.5;
const MAX_REFINE_DEPTH: usize = 12;

/// Total change of arg s₁₁ along a counter-clockwise contour, in turns.
///
/// Each edge starts from `per_side` segments and bisects any segment whose
/// phase jump exceeds half a radian, so the unwrapped sum is reliable.
pub fn s11_winding<T: Real>(trace: &PotentialTrace<T>, contour: &Contour<T>, per_side: usize) -> Result<T> {
    if contour.im_min < T::zero() || !(contour.re_min < contour.re_max && contour.im_min < contour.im_max) {
        return Err(Error::Precondition(
            "contour must be a nonempty rectangle in Im λ >= 0".into(),
        ));
    }
    let corners = contour.corners();
    let per_side = per_side.max(1);
    let nodes: Vec<Cx<T>> = (0..4)
        .flat_map(|e| {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            (0..per_side).map(move |k| a + (b - a) * T::of_usize(k) / T::of_usize(per_side))
        })
        .collect();
    let values = nodes.par_iter().map(|&z| s11(trace, z)).collect::<Result<Vec<_>>>()?;
    let mut total = T::zero();
    for i in 0..nodes.len() {
        let j = (i + 1) % nodes.len();
        total += arg_change(trace, nodes[i], values[i], nodes[j], values[j], 0)?;
    }
    Ok(total / T::TAU())
}

fn arg_change<T: Real>(
    trace: &PotentialTrace<T>,
    za: Cx<T>,
    fa: Cx<T>,
    zb: Cx<T>,
    fb: Cx<T>,
    depth: usize,
) -> Result<T> {
    let d = (fb / fa).arg();
    if d.abs() <= T::lit(MAX_ARG_STEP) || depth >= MAX_REFINE_DEPTH {
        return Ok(d);
    }
    let zm = (za + zb) * T::lit(0.5);
    let fm = s11(trace, zm)?;
    Ok(arg_change(trace, za, fa, zm, fm, depth + 1)? + arg_change(trace, zm, fm, zb, fb, depth + 1)?)
}

/// Number of zeros of s₁₁ inside the contour.
pub fn count_zeros<T: Real>(trace: &PotentialTrace<T>, contour: &Contour<T>) -> Result<i64> {
    let w = s11_winding(trace, contour, 64)?;
    Ok(w.round().to_i64().unwrap_or(i64::MAX))
}
