//! Verification of constructed fields against the PDE and its Lax pair.
//!
//! All derivatives here come from central finite differences of the field
//! evaluator, never from the reconstruction formula, so these checks share no
//! algebra with the engine.
//!
//! The Lax pair is Φ_x = UΦ, Φ_t = VΦ with Λ = diag(−1, 1, …, 1),
//!
//! ```text
//! U = iλΛ + Q
//! V = (−4iελ³ + iλ²)Λ + (−4ελ² + λ)Q + (−2iελ + i/2)Q₁ + εQ₂
//! ```
//!
//! and the PDE is equivalent to U_t − V_x + [U, V] = 0.

use num_traits::Zero;
use rayon::prelude::*;

use crate::engine::evaluate_field;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::CMatrix;
use crate::scalar::{cx, i_unit, real, Cx, Real};
use crate::spectral::SpectralConfig;
use crate::stencil::{Stencil, StencilSpec};

/// A field q(x, t) that can be sampled pointwise.
pub trait FieldEvaluator<T: Real>: Sync {
    fn evaluate(&self, x: T, t: T) -> Result<Vec<Cx<T>>>;
}

impl<T: Real> FieldEvaluator<T> for SpectralConfig<T> {
    fn evaluate(&self, x: T, t: T) -> Result<Vec<Cx<T>>> {
        evaluate_field(self, x, t).map(|s| s.q)
    }
}

impl<T: Real, F> FieldEvaluator<T> for F
where
    F: Fn(T, T) -> Result<Vec<Cx<T>>> + Sync,
{
    fn evaluate(&self, x: T, t: T) -> Result<Vec<Cx<T>>> {
        self(x, t)
    }
}

fn eval_at<T: Real>(field: &impl FieldEvaluator<T>, x: T, t: T) -> Result<Vec<Cx<T>>> {
    field.evaluate(x, t).map_err(|e| e.at(x.as_f64(), t.as_f64()))
}

/// Λ = diag(−1, 1, …, 1) of size N + 1.
pub fn lambda_matrix<T: Real>(n_fields: usize) -> CMatrix<T> {
    let mut d = vec![real(T::one()); n_fields + 1];
    d[0] = real(-T::one());
    CMatrix::diag(&d)
}

fn sum_sq<T: Real>(q: &[Cx<T>]) -> T {
    q.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Q: first row (0, q_1, …, q_N), first column (0, −q_1*, …, −q_N*).
pub fn build_q<T: Real>(q: &[Cx<T>]) -> CMatrix<T> {
    let n = q.len();
    let mut m = CMatrix::zeros(n + 1, n + 1);
    for (j, &qj) in q.iter().enumerate() {
        m[(0, j + 1)] = qj;
        m[(j + 1, 0)] = -qj.conj();
    }
    m
}

/// Q₁: Hermitian; corner Σ|q_r|², first row q_jx, interior −q_k q_j*.
pub fn build_q1<T: Real>(q: &[Cx<T>], qx: &[Cx<T>]) -> CMatrix<T> {
    let n = q.len();
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = real(sum_sq(q));
    for j in 0..n {
        m[(0, j + 1)] = qx[j];
        m[(j + 1, 0)] = qx[j].conj();
        for k in 0..n {
            m[(j + 1, k + 1)] = -(q[k] * q[j].conj());
        }
    }
    m
}

/// Q₂: anti-Hermitian. The first-column entries read −q_jxx* − 2A q_j*, with
/// A = Σ|q_r|², mirroring the first row q_jxx + 2q_j Σ|q_r|².
pub fn build_q2<T: Real>(q: &[Cx<T>], qx: &[Cx<T>], qxx: &[Cx<T>]) -> CMatrix<T> {
    let n = q.len();
    let a = real(sum_sq(q));
    let two = real(T::lit(2.0));
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = (0..n).fold(Cx::zero(), |acc, r| acc + qx[r] * q[r].conj() - q[r] * qx[r].conj());
    for j in 0..n {
        m[(0, j + 1)] = qxx[j] + two * q[j] * a;
        m[(j + 1, 0)] = -qxx[j].conj() - two * a * q[j].conj();
        for k in 0..n {
            m[(j + 1, k + 1)] = -(qx[k] * q[j].conj() - q[k] * qx[j].conj());
        }
    }
    m
}

/// ∂_x Q₁ by the product rule.
pub fn build_q1_dx<T: Real>(q: &[Cx<T>], qx: &[Cx<T>], qxx: &[Cx<T>]) -> CMatrix<T> {
    let n = q.len();
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = (0..n).fold(Cx::zero(), |acc, r| acc + q[r] * qx[r].conj() + qx[r] * q[r].conj());
    for j in 0..n {
        m[(0, j + 1)] = qxx[j];
        m[(j + 1, 0)] = qxx[j].conj();
        for k in 0..n {
            m[(j + 1, k + 1)] = -(qx[k] * q[j].conj() + q[k] * qx[j].conj());
        }
    }
    m
}

/// ∂_x Q₂ by the product rule.
pub fn build_q2_dx<T: Real>(q: &[Cx<T>], qx: &[Cx<T>], qxx: &[Cx<T>], qxxx: &[Cx<T>]) -> CMatrix<T> {
    let n = q.len();
    let a = real(sum_sq(q));
    let a_x = real((0..n).fold(T::zero(), |acc, r| acc + T::lit(2.0) * (q[r].conj() * qx[r]).re));
    let two = real(T::lit(2.0));
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = (0..n).fold(Cx::zero(), |acc, r| acc + qxx[r] * q[r].conj() - q[r] * qxx[r].conj());
    for j in 0..n {
        m[(0, j + 1)] = qxxx[j] + two * (qx[j] * a + q[j] * a_x);
        m[(j + 1, 0)] = -qxxx[j].conj() - two * (a_x * q[j].conj() + a * qx[j].conj());
        for k in 0..n {
            m[(j + 1, k + 1)] = -(qxx[k] * q[j].conj() - q[k] * qxx[j].conj());
        }
    }
    m
}

/// Field and its finite-difference derivatives at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet<T: Real> {
    pub q: Vec<Cx<T>>,
    pub qx: Vec<Cx<T>>,
    pub qxx: Vec<Cx<T>>,
    pub qxxx: Vec<Cx<T>>,
    pub qt: Vec<Cx<T>>,
}

/// Central-difference stencils for ∂_x, ∂_xx, ∂_xxx and ∂_t at one order.
#[derive(Debug, Clone)]
pub struct Differentiator {
    d1: Stencil,
    d2: Stencil,
    d3: Stencil,
}

impl Differentiator {
    pub fn new(order: usize) -> Self {
        Differentiator {
            d1: Stencil::central(1, order),
            d2: Stencil::central(2, order),
            d3: Stencil::central(3, order),
        }
    }

    /// Samples the field on the x- and t-stencils around (x, t).
    pub fn jet<T: Real>(
        &self,
        field: &impl FieldEvaluator<T>,
        spec: &StencilSpec<T>,
        x: T,
        t: T,
    ) -> Result<FieldJet<T>> {
        let q = eval_at(field, x, t)?;
        let n = q.len();
        let reach = self.d3.half_width() as i32;
        let mut row = Vec::with_capacity(2 * reach as usize + 1);
        for o in -reach..=reach {
            row.push(if o == 0 {
                q.clone()
            } else {
                eval_at(field, x + spec.h_x * T::lit(o as f64), t)?
            });
        }
        let centre = reach;
        let apply_x = |s: &Stencil| {
            let w = s.scaled(spec.h_x);
            (0..n)
                .map(|j| {
                    w.iter().fold(Cx::zero(), |acc, &(o, wt)| {
                        acc + row[(centre + o) as usize][j] * real(wt)
                    })
                })
                .collect::<Vec<_>>()
        };
        let qx = apply_x(&self.d1);
        let qxx = apply_x(&self.d2);
        let qxxx = apply_x(&self.d3);
        let mut qt = vec![Cx::zero(); n];
        for (o, wt) in self.d1.scaled(spec.h_t) {
            let s = eval_at(field, x, t + spec.h_t * T::lit(o as f64))?;
            for j in 0..n {
                qt[j] += s[j] * real(wt);
            }
        }
        Ok(FieldJet { q, qx, qxx, qxxx, qt })
    }
}

/// Pointwise residual LHS − RHS of the coupled Hirota equations.
pub fn hirota_residual<T: Real>(jet: &FieldJet<T>, epsilon: T) -> Vec<Cx<T>> {
    let n = jet.q.len();
    let s = real(sum_sq(&jet.q));
    let c = (0..n).fold(Cx::zero(), |acc, r| acc + jet.q[r].conj() * jet.qx[r]);
    let i = i_unit::<T>();
    let half = real(T::lit(0.5));
    let three = real(T::lit(3.0));
    let eps = real(epsilon);
    (0..n)
        .map(|j| {
            let rhs = i * (half * jet.qxx[j] + s * jet.q[j])
                + eps * (jet.qxxx[j] + three * s * jet.qx[j] + three * c * jet.q[j]);
            jet.qt[j] - rhs
        })
        .collect()
}

/// Aggregate of a residual over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T: Real> {
    pub max_abs: T,
    pub rms: T,
    pub location_of_max: (T, T),
    /// Max |r_j| per component j.
    pub per_component: Vec<T>,
}

/// Node coordinates of a grid shrunk by `margin_x` / `margin_t` on each side.
fn interior_nodes<T: Real>(region: &GridSpec<T>, margin_x: T, margin_t: T) -> Vec<(T, T)> {
    let shrink = |lo: T, hi: T, n: usize, m: T| {
        if n == 1 || hi - lo <= T::lit(2.0) * m {
            (lo, hi)
        } else {
            (lo + m, hi - m)
        }
    };
    let (x0, x1) = shrink(region.x_min, region.x_max, region.nx, margin_x);
    let (t0, t1) = shrink(region.t_min, region.t_max, region.nt, margin_t);
    let inner = GridSpec {
        x_min: x0,
        x_max: x1,
        t_min: t0,
        t_max: t1,
        nx: region.nx,
        nt: region.nt,
    };
    inner.nodes()
}

/// Finite-difference residual of the PDE over a rectangle.
///
/// The grid is placed inside `region` less a margin of (order/2)·h on each
/// side. Nodes are evaluated in parallel and reduced in node order.
pub fn pde_residual<T: Real>(
    field: &impl FieldEvaluator<T>,
    epsilon: T,
    region: &GridSpec<T>,
    stencil: &StencilSpec<T>,
) -> Result<ResidualReport<T>> {
    region.check()?;
    let diff = Differentiator::new(stencil.order);
    let half = T::of_usize(stencil.order / 2);
    let nodes = interior_nodes(region, half * stencil.h_x, half * stencil.h_t);
    let per_node: Vec<Result<Vec<Cx<T>>>> = nodes
        .par_iter()
        .map(|&(x, t)| diff.jet(field, stencil, x, t).map(|jet| hirota_residual(&jet, epsilon)))
        .collect();
    let mut report = ResidualReport {
        max_abs: T::zero(),
        rms: T::zero(),
        location_of_max: nodes.first().copied().unwrap_or((T::zero(), T::zero())),
        per_component: Vec::new(),
    };
    let mut sum = T::zero();
    let mut count = 0usize;
    for (r, &(x, t)) in per_node.into_iter().zip(&nodes) {
        let r = r?;
        if report.per_component.is_empty() {
            report.per_component = vec![T::zero(); r.len()];
        }
        for (j, z) in r.iter().enumerate() {
            let a = z.norm();
            sum += a * a;
            count += 1;
            report.per_component[j] = report.per_component[j].max(a);
            if a > report.max_abs {
                report.max_abs = a;
                report.location_of_max = (x, t);
            }
        }
    }
    if count > 0 {
        report.rms = (sum / T::of_usize(count)).sqrt();
    }
    Ok(report)
}

/// U and V of the Lax pair at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxMatrices<T: Real> {
    pub u: CMatrix<T>,
    pub v: CMatrix<T>,
}

impl<T: Real> LaxMatrices<T> {
    pub fn new(lambda: Cx<T>, epsilon: T, q: &[Cx<T>], qx: &[Cx<T>], qxx: &[Cx<T>]) -> Self {
        let (cl, cq, cq1, eps) = v_coefficients(lambda, epsilon);
        let big_lambda = lambda_matrix::<T>(q.len());
        let i = i_unit::<T>();
        let u = &big_lambda.scale(i * lambda) + &build_q(q);
        let v = &(&(&big_lambda.scale(cl) + &build_q(q).scale(cq)) + &build_q1(q, qx).scale(cq1))
            + &build_q2(q, qx, qxx).scale(eps);
        LaxMatrices { u, v }
    }
}

/// Coefficients of Λ, Q, Q₁ and Q₂ in V.
fn v_coefficients<T: Real>(lambda: Cx<T>, epsilon: T) -> (Cx<T>, Cx<T>, Cx<T>, Cx<T>) {
    let i = i_unit::<T>();
    let eps = real(epsilon);
    let four = real(T::lit(4.0));
    let l2 = lambda * lambda;
    let l3 = l2 * lambda;
    (
        -four * i * eps * l3 + i * l2,
        -four * eps * l2 + lambda,
        cx(T::zero(), T::lit(-2.0)) * eps * lambda + cx(T::zero(), T::lit(0.5)),
        eps,
    )
}

/// Max-norm of U_t − V_x + [U, V] at one point for a generic field.
pub fn zero_curvature_residual_of<T: Real>(
    field: &impl FieldEvaluator<T>,
    epsilon: T,
    lambda: Cx<T>,
    x: T,
    t: T,
    stencil: &StencilSpec<T>,
) -> Result<T> {
    let jet = Differentiator::new(stencil.order).jet(field, stencil, x, t)?;
    let lax = LaxMatrices::new(lambda, epsilon, &jet.q, &jet.qx, &jet.qxx);
    let (_, cq, cq1, eps) = v_coefficients(lambda, epsilon);
    let u_t = build_q(&jet.qt);
    let v_x = &(&build_q(&jet.qx).scale(cq) + &build_q1_dx(&jet.q, &jet.qx, &jet.qxx).scale(cq1))
        + &build_q2_dx(&jet.q, &jet.qx, &jet.qxx, &jet.qxxx).scale(eps);
    let r = &(&u_t - &v_x) + &lax.u.commutator(&lax.v);
    Ok(r.max_abs())
}

/// Zero-curvature residual of the field constructed from `config`.
pub fn zero_curvature_residual<T: Real>(
    config: &SpectralConfig<T>,
    lambda: Cx<T>,
    x: T,
    t: T,
    stencil: &StencilSpec<T>,
) -> Result<T> {
    zero_curvature_residual_of(config, config.epsilon, lambda, x, t, stencil)
}

/// Endpoint magnitude above which a mass integral is refused.
pub const MASS_TAIL_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_QUADRATURE_NODES: usize = 4001;

/// ∫ Σ_r |q_r(x, t)|² dx over `x_range` by composite Simpson.
pub fn conserved_mass<T: Real>(field: &impl FieldEvaluator<T>, t: T, x_range: (T, T), n_quad: usize) -> Result<T> {
    let (a, b) = x_range;
    if !(a < b) || n_quad < 3 || n_quad.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "Simpson needs a < b and an odd node count >= 3, got [{a}, {b}] with {n_quad}"
        )));
    }
    let h = (b - a) / T::of_usize(n_quad - 1);
    let density = |i: usize| -> Result<T> {
        let x = if i == n_quad - 1 { b } else { a + h * T::of_usize(i) };
        eval_at(field, x, t).map(|q| sum_sq(&q))
    };
    let edge = density(0)?.sqrt().max(density(n_quad - 1)?.sqrt());
    if edge > T::lit(MASS_TAIL_THRESHOLD) {
        return Err(Error::TailNotDecayed {
            magnitude: edge.as_f64(),
            threshold: MASS_TAIL_THRESHOLD,
            suggested_half_width: 2.0 * a.abs().max(b.abs()).as_f64(),
        });
    }
    let values: Vec<Result<T>> = (0..n_quad).into_par_iter().map(density).collect();
    let mut acc = T::zero();
    for (i, v) in values.into_iter().enumerate() {
        let w = if i == 0 || i == n_quad - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += T::lit(w) * v?;
    }
    Ok(acc * h / T::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Cx<f64>;

    fn zero_field(x: f64, t: f64) -> Result<Vec<C>> {
        let _ = (x, t);
        Ok(vec![C::zero(); 2])
    }

    #[test]
    fn q_examples() {
        assert_eq!(build_q(&[C::zero(); 3]), CMatrix::zeros(4, 4));
        let q = build_q(&[cx(1.0, 0.0)]);
        assert_eq!(
            q,
            CMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => cx(1.0, 0.0),
                (1, 0) => cx(-1.0, 0.0),
                _ => C::zero(),
            })
        );
    }

    #[test]
    fn q1_example() {
        let m = build_q1(&[cx(1.0, 0.0)], &[C::zero()]);
        assert_eq!(m, CMatrix::diag(&[cx(1.0, 0.0), cx(-1.0, 0.0)]));
        assert_eq!(build_q1(&[C::zero(); 2], &[C::zero(); 2]), CMatrix::zeros(3, 3));
    }

    #[test]
    fn q2_example() {
        let m = build_q2(&[cx(1.0, 0.0)], &[C::zero()], &[C::zero()]);
        assert_eq!(m[(0, 1)], cx(2.0, 0.0));
        assert_eq!(m[(1, 0)], cx(-2.0, 0.0));
        assert_eq!(m[(0, 0)], C::zero());
        assert_eq!(m[(1, 1)], C::zero());
        assert_eq!(
            build_q2(&[C::zero(); 2], &[C::zero(); 2], &[C::zero(); 2]),
            CMatrix::zeros(3, 3)
        );
    }

    fn arb_vec(n: usize) -> impl Strategy<Value = Vec<C>> {
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| cx(a, b)), n)
    }

    proptest! {
        #[test]
        fn structural_symmetries((q, qx, qxx) in (1usize..5).prop_flat_map(|n| (arb_vec(n), arb_vec(n), arb_vec(n)))) {
            let m = build_q(&q);
            // Bit-exact anti-Hermitian and traceless.
            prop_assert_eq!(m.adjoint().scale(cx(-1.0, 0.0)), m.clone());
            prop_assert_eq!((0..m.rows()).fold(C::zero(), |a, i| a + m[(i, i)]), C::zero());
            let m1 = build_q1(&q, &qx);
            prop_assert!((&m1 - &m1.adjoint()).max_abs() == 0.0);
            let m2 = build_q2(&q, &qx, &qxx);
            prop_assert!((&m2 + &m2.adjoint()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn product_rule_matrices_match_finite_differences() {
        // q(s) = a + b s + c s² + d s³ along a line; derivatives known exactly.
        let a = [cx(0.3, -0.2), cx(0.1, 0.5)];
        let b = [cx(-0.4, 0.1), cx(0.2, 0.2)];
        let c = [cx(0.05, 0.3), cx(-0.3, 0.0)];
        let d = [cx(0.2, -0.1), cx(0.1, 0.4)];
        let at = |s: f64| {
            let q: Vec<C> = (0..2)
                .map(|j| a[j] + b[j] * s + c[j] * s * s + d[j] * s * s * s)
                .collect();
            let qx: Vec<C> = (0..2).map(|j| b[j] + c[j] * 2.0 * s + d[j] * 3.0 * s * s).collect();
            let qxx: Vec<C> = (0..2).map(|j| c[j] * 2.0 + d[j] * 6.0 * s).collect();
            let qxxx: Vec<C> = (0..2).map(|j| d[j] * 6.0).collect();
            (q, qx, qxx, qxxx)
        };
        let s0 = 0.4;
        let h = 1e-4;
        let (q, qx, qxx, qxxx) = at(s0);
        let (qp, qxp, qxxp, _) = at(s0 + h);
        let (qm, qxm, qxxm, _) = at(s0 - h);
        let fd1 = (&build_q1(&qp, &qxp) - &build_q1(&qm, &qxm)).scale(cx(0.5 / h, 0.0));
        assert!((&fd1 - &build_q1_dx(&q, &qx, &qxx)).max_abs() < 1e-7);
        let fd2 = (&build_q2(&qp, &qxp, &qxxp) - &build_q2(&qm, &qxm, &qxxm)).scale(cx(0.5 / h, 0.0));
        assert!((&fd2 - &build_q2_dx(&q, &qx, &qxx, &qxxx)).max_abs() < 1e-7);
    }

    #[test]
    fn zero_field_has_zero_residuals() {
        let region = GridSpec::new(-1.0, 1.0, 5, -1.0, 1.0, 3).unwrap();
        let r = pde_residual(&zero_field, 1.0, &region, &StencilSpec::default()).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert_eq!(r.rms, 0.0);
        assert_eq!(r.per_component, vec![0.0, 0.0]);
        for lam in [cx(1.0, 0.3), cx(-2.0, 0.0)] {
            let z = zero_curvature_residual_of(&zero_field, 1.0, lam, 0.2, 0.1, &StencilSpec::default()).unwrap();
            assert_eq!(z, 0.0);
        }
        assert_eq!(conserved_mass(&zero_field, 0.0, (-5.0, 5.0), 101).unwrap(), 0.0);
    }

    #[test]
    fn mass_guards() {
        let flat = |_x: f64, _t: f64| Ok(vec![cx(1.0, 0.0)]);
        assert!(matches!(
            conserved_mass(&flat, 0.0, (-1.0, 1.0), 11),
            Err(Error::TailNotDecayed { .. })
        ));
        assert!(matches!(
            conserved_mass(&zero_field, 0.0, (-1.0, 1.0), 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn evaluation_failures_carry_coordinates() {
        let failing = |x: f64, _t: f64| {
            if x > 0.5 {
                Err(Error::SingularKernel { cond: f64::INFINITY })
            } else {
                Ok(vec![C::zero()])
            }
        };
        let region = GridSpec::new(-1.0, 1.0, 11, 0.0, 0.0, 1).unwrap();
        match pde_residual(&failing, 0.0, &region, &StencilSpec::default()) {
            Err(Error::EvaluationFailure { x, source, .. }) => {
                assert!(x > 0.5);
                assert!(matches!(*source, Error::SingularKernel { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
