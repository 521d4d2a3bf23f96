//! Reflectionless reconstruction of multi-soliton fields.
//!
//! Each spectral point λ_l in the upper half-plane carries a kernel vector
//! ν_l(x, t) = diag(e^{-θ_l}, e^{θ_l}, ..., e^{θ_l}) ν_{l,0} with
//! θ_l = iλ_l x + (iλ_l² − 4iελ_l³) t, and ν̂_l = ν_l†. With the n x n matrix
//!
//! ```text
//! M_kl = ν̂_k ν_l / (λ_l − λ_k*)
//! ```
//!
//! the rational matrices P1, P2 and the fields follow in closed form:
//!
//! ```text
//! P1(λ) = I − Σ_kl ν_k ν̂_l (M⁻¹)_kl / (λ − λ_l*)
//! P2(λ) = I + Σ_kl ν_k ν̂_l (M⁻¹)_kl / (λ − λ_k)
//! q_j   = −2i Σ_kl ν_{k,1} ν̂_{l,j+1} (M⁻¹)_kl
//! ```
//!
//! Kernel vectors are stored with a real positive per-soliton scale factor
//! so that nothing overflows at large |x| or |t|. Such rescalings cancel
//! exactly in P1, P2 and q.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{condition_number_1, CMatrix, Lu};
use crate::scalar::{i_unit, real, Cx, Real};
use crate::spectral::SpectralConfig;

/// Distance from a pole of P1 or P2 below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-12;

/// Phase θ = iλx + (iλ² − 4iελ³)t of one spectral point.
pub fn theta<T: Real>(lambda: Cx<T>, epsilon: T, x: T, t: T) -> Cx<T> {
    let i = i_unit::<T>();
    let l2 = lambda * lambda;
    let l3 = l2 * lambda;
    i * lambda * real(x) + (i * l2 - i * l3 * real(T::lit(4.0) * epsilon)) * real(t)
}

/// Group velocity of the soliton with eigenvalue λ = a + ib: its envelope
/// depends on x and t only through x − v t.
pub fn soliton_velocity<T: Real>(lambda: Cx<T>, epsilon: T) -> T {
    let (a, b) = (lambda.re, lambda.im);
    T::lit(-2.0) * a + T::lit(4.0) * epsilon * (T::lit(3.0) * a * a - b * b)
}

/// Kernel vectors ν_l and ν̂_l at one space-time point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedVectors<T: Real> {
    /// Column vectors ν_l, scaled by e^{-log_scale[l]}.
    pub nu: Vec<Vec<Cx<T>>>,
    /// Row vectors ν̂_l = ν_l†, scaled by the same factor.
    pub nu_hat: Vec<Vec<Cx<T>>>,
    pub log_scale: Vec<T>,
}

impl<T: Real> EvolvedVectors<T> {
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// Unscaled ν_l. Overflows for large |Re θ_l|; meant for small-argument checks.
    pub fn unscaled_nu(&self, l: usize) -> Vec<Cx<T>> {
        let s = real(self.log_scale[l].exp());
        self.nu[l].iter().map(|&z| z * s).collect()
    }
}

/// Evolves every seed vector to (x, t).
///
/// The scale removed from soliton l is the largest real exponent among the
/// components whose seed entry is nonzero, i.e. max(−Re θ_l, Re θ_l) for a
/// generic seed. Every stored component is then bounded in modulus by the
/// largest seed component, and the dominant one keeps its seed magnitude.
pub fn evolve_vectors<T: Real>(config: &SpectralConfig<T>, x: T, t: T) -> EvolvedVectors<T> {
    let n = config.n_solitons();
    let mut nu = Vec::with_capacity(n);
    let mut nu_hat = Vec::with_capacity(n);
    let mut log_scale = Vec::with_capacity(n);
    for p in &config.points {
        let th = theta(p.lambda, config.epsilon, x, t);
        let exponent = |j: usize| if j == 0 { -th } else { th };
        let scale = p
            .nu0
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(j, _)| exponent(j).re)
            .fold(T::neg_infinity(), T::max);
        let scale = if scale.is_finite() { scale } else { T::zero() };
        let v: Vec<Cx<T>> = p
            .nu0
            .iter()
            .enumerate()
            .map(|(j, &z)| {
                if z.is_zero() {
                    Cx::zero()
                } else {
                    z * (exponent(j) - real(scale)).exp()
                }
            })
            .collect();
        nu_hat.push(v.iter().map(|z| z.conj()).collect());
        nu.push(v);
        log_scale.push(scale);
    }
    EvolvedVectors { nu, nu_hat, log_scale }
}

/// The n x n kernel matrix together with its LU factorization.
#[derive(Debug, Clone)]
pub struct KernelMatrix<T: Real> {
    pub m: CMatrix<T>,
    lu: Lu<T>,
    pub cond_estimate: T,
}

impl<T: Real> KernelMatrix<T> {
    /// Solves `M y = b`.
    pub fn solve(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        self.lu.solve(b)
    }

    /// Solves `Mᵀ y = b`.
    pub fn solve_transpose(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        self.lu.solve_transpose(b)
    }
}

/// Assembles M_kl = ν̂_k ν_l / (λ_l − λ_k*) from the (scaled) vectors and
/// factors it.
pub fn build_kernel<T: Real>(config: &SpectralConfig<T>, vecs: &EvolvedVectors<T>) -> Result<KernelMatrix<T>> {
    let n = config.n_solitons();
    assert_eq!(vecs.len(), n, "vectors evolved from a different config");
    let pts = &config.points;
    let m: CMatrix<T> = CMatrix::from_fn(n, n, |k, l| {
        let dot = vecs.nu_hat[k]
            .iter()
            .zip(&vecs.nu[l])
            .fold(Cx::<T>::zero(), |acc, (&a, &b)| acc + a * b);
        dot / (pts[l].lambda - pts[k].lambda.conj())
    });
    let lu = Lu::factor(&m);
    let cond = condition_number_1(&m, lu.as_ref());
    match lu {
        Some(lu) if cond.is_finite() && cond.as_f64() <= T::SINGULAR_CONDITION => Ok(KernelMatrix {
            m,
            lu,
            cond_estimate: cond,
        }),
        _ => Err(Error::SingularKernel { cond: cond.as_f64() }),
    }
}

/// Field values q_1..q_N at one space-time point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample<T: Real> {
    pub x: T,
    pub t: T,
    pub q: Vec<Cx<T>>,
}

impl<T: Real> FieldSample<T> {
    pub fn zero(n_fields: usize, x: T, t: T) -> Self {
        FieldSample {
            x,
            t,
            q: vec![Cx::zero(); n_fields],
        }
    }

    /// sqrt(Σ_j |q_j|²).
    pub fn total_modulus(&self) -> T {
        self.q.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }
}

/// Evaluates the n-soliton field at (x, t).
pub fn evaluate_field<T: Real>(config: &SpectralConfig<T>, x: T, t: T) -> Result<FieldSample<T>> {
    let n_fields = config.n_fields;
    if config.n_solitons() == 0 {
        return Ok(FieldSample::zero(n_fields, x, t));
    }
    let vecs = evolve_vectors(config, x, t);
    let kernel = build_kernel(config, &vecs)?;
    // Σ_k ν_{k,1} (M⁻¹)_kl is component l of M⁻ᵀ a with a_k = ν_{k,1}.
    let first: Vec<Cx<T>> = vecs.nu.iter().map(|v| v[0]).collect();
    let y = kernel.solve_transpose(&first);
    let minus_two_i = Cx::new(T::zero(), T::lit(-2.0));
    let q = (0..n_fields)
        .map(|j| {
            let s = y
                .iter()
                .zip(&vecs.nu_hat)
                .fold(Cx::zero(), |acc, (&yl, hat)| acc + yl * hat[j + 1]);
            minus_two_i * s
        })
        .collect();
    Ok(FieldSample { x, t, q })
}

fn check_poles<T: Real>(lambda: Cx<T>, poles: impl Iterator<Item = Cx<T>>) -> Result<()> {
    for (index, pole) in poles.enumerate() {
        if (lambda - pole).norm().as_f64() < POLE_TOL {
            return Err(Error::PoleHit { index, tol: POLE_TOL });
        }
    }
    Ok(())
}

/// P1(λ) at (x, t); analytic in the upper half-plane, poles at λ_l*.
pub fn evaluate_p1<T: Real>(config: &SpectralConfig<T>, lambda: Cx<T>, x: T, t: T) -> Result<CMatrix<T>> {
    let dim = config.dim();
    check_poles(lambda, config.points.iter().map(|p| p.lambda.conj()))?;
    let mut p1 = CMatrix::identity(dim);
    if config.n_solitons() == 0 {
        return Ok(p1);
    }
    let vecs = evolve_vectors(config, x, t);
    let kernel = build_kernel(config, &vecs)?;
    let weights: Vec<Cx<T>> = config
        .points
        .iter()
        .map(|p| Cx::new(T::one(), T::zero()) / (lambda - p.lambda.conj()))
        .collect();
    for i in 0..dim {
        // Row i of W M⁻¹, where W has the ν_k as columns.
        let row: Vec<Cx<T>> = vecs.nu.iter().map(|v| v[i]).collect();
        let x_row = kernel.solve_transpose(&row);
        for j in 0..dim {
            let s = (0..x_row.len()).fold(Cx::zero(), |acc, l| acc + x_row[l] * vecs.nu_hat[l][j] * weights[l]);
            p1[(i, j)] -= s;
        }
    }
    Ok(p1)
}

/// P2(λ) at (x, t); analytic in the lower half-plane, poles at λ_k.
pub fn evaluate_p2<T: Real>(config: &SpectralConfig<T>, lambda: Cx<T>, x: T, t: T) -> Result<CMatrix<T>> {
    let dim = config.dim();
    check_poles(lambda, config.points.iter().map(|p| p.lambda))?;
    let mut p2 = CMatrix::identity(dim);
    if config.n_solitons() == 0 {
        return Ok(p2);
    }
    let vecs = evolve_vectors(config, x, t);
    let kernel = build_kernel(config, &vecs)?;
    let weights: Vec<Cx<T>> = config
        .points
        .iter()
        .map(|p| Cx::new(T::one(), T::zero()) / (lambda - p.lambda))
        .collect();
    for j in 0..dim {
        // Column j of M⁻¹ V̂, where V̂ has the ν̂_l as rows.
        let col: Vec<Cx<T>> = vecs.nu_hat.iter().map(|h| h[j]).collect();
        let z_col = kernel.solve(&col);
        for i in 0..dim {
            let s = (0..z_col.len()).fold(Cx::zero(), |acc, k| acc + vecs.nu[k][i] * z_col[k] * weights[k]);
            p2[(i, j)] += s;
        }
    }
    Ok(p2)
}

fn require_one_soliton_n3<T: Real>(config: &SpectralConfig<T>) -> Result<()> {
    if config.n_fields != 3 || config.n_solitons() != 1 || config.points[0].nu0.len() != 4 {
        return Err(Error::Precondition(format!(
            "closed form needs N = 3 and n = 1, got N = {} and n = {}",
            config.n_fields,
            config.n_solitons()
        )));
    }
    Ok(())
}

/// Explicit three-field one-soliton, seed (α, β, γ, δ):
///
/// ```text
/// q_j = −2i α c_j* e^{θ*−θ} (λ − λ*) / (|α|² e^{−θ*−θ} + (|β|²+|γ|²+|δ|²) e^{θ*+θ})
/// ```
///
/// with c = (β, γ, δ). Evaluated as written, so it overflows once |Re θ|
/// exceeds the exponent range.
pub fn one_soliton_closed_form<T: Real>(config: &SpectralConfig<T>, x: T, t: T) -> Result<FieldSample<T>> {
    require_one_soliton_n3(config)?;
    let p = &config.points[0];
    let lambda = p.lambda;
    let th = theta(lambda, config.epsilon, x, t);
    let alpha = p.nu0[0];
    let tail: T = p.nu0[1..].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let denom = real(alpha.norm_sqr()) * (-th.conj() - th).exp() + real(tail) * (th.conj() + th).exp();
    let lead = Cx::new(T::zero(), T::lit(-2.0)) * alpha * (th.conj() - th).exp() * (lambda - lambda.conj());
    let q = p.nu0[1..].iter().map(|c| lead * c.conj() / denom).collect();
    Ok(FieldSample { x, t, q })
}

/// Parameters of the sech-profile one-soliton (α normalized to 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechParams<T: Real> {
    pub lambda: Cx<T>,
    pub epsilon: T,
    pub beta: Cx<T>,
    pub gamma: Cx<T>,
    pub delta: Cx<T>,
    /// Log-amplitude offset: |β|² + |γ|² + |δ|² = e^{2ξ}.
    pub xi: T,
}

impl<T: Real> SechParams<T> {
    /// Rescales the seed so that α = 1 and derives ξ from the rest.
    pub fn from_config(config: &SpectralConfig<T>) -> Result<Self> {
        require_one_soliton_n3(config)?;
        let p = &config.points[0];
        let alpha = p.nu0[0];
        if alpha.is_zero() {
            return Err(Error::Precondition(
                "sech form needs a nonzero first seed component".into(),
            ));
        }
        let c: Vec<Cx<T>> = p.nu0[1..].iter().map(|&z| z / alpha).collect();
        let sum: T = c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if sum.is_zero() {
            return Err(Error::Precondition(
                "sech form needs a nonzero field polarization".into(),
            ));
        }
        Ok(SechParams {
            lambda: p.lambda,
            epsilon: config.epsilon,
            beta: c[0],
            gamma: c[1],
            delta: c[2],
            xi: T::lit(0.5) * sum.ln(),
        })
    }

    /// Peak moduli 2|c_j| b e^{−ξ} of the three fields.
    pub fn peak_amplitudes(&self) -> [T; 3] {
        let k = T::lit(2.0) * self.lambda.im * (-self.xi).exp();
        [self.beta.norm() * k, self.gamma.norm() * k, self.delta.norm() * k]
    }
}

/// q_j = 2 c_j* b e^{θ*−θ} e^{−ξ} sech(θ* + θ + ξ), c = (β, γ, δ), λ = a + ib.
pub fn one_soliton_sech_form<T: Real>(params: &SechParams<T>, x: T, t: T) -> Result<FieldSample<T>> {
    let sum = params.beta.norm_sqr() + params.gamma.norm_sqr() + params.delta.norm_sqr();
    let target = (T::lit(2.0) * params.xi).exp();
    if !((sum - target).abs() <= T::lit(1e-12) * target) {
        return Err(Error::Precondition(format!(
            "|β|²+|γ|²+|δ|² = {sum} but e^(2ξ) = {target}"
        )));
    }
    let th = theta(params.lambda, params.epsilon, x, t);
    let b = params.lambda.im;
    let arg = T::lit(2.0) * th.re + params.xi;
    let envelope = T::lit(2.0) * b * (-params.xi).exp() / arg.cosh();
    // e^{θ*−θ} = e^{−2i Im θ}
    let carrier = Cx::from_polar(T::one(), T::lit(-2.0) * th.im);
    let q = [params.beta, params.gamma, params.delta]
        .iter()
        .map(|c| c.conj() * carrier * real(envelope))
        .collect();
    Ok(FieldSample { x, t, q })
}

/// Pointwise relative deviation ‖a − b‖ / max(‖a‖, ‖b‖), zero when both vanish.
pub fn relative_deviation<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> T {
    let norm = |v: &[Cx<T>]| v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    let diff: Vec<Cx<T>> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale.is_zero() {
        T::zero()
    } else {
        norm(&diff) / scale
    }
}
