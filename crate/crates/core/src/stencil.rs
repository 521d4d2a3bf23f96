//! Central finite-difference stencils of even accuracy order.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Accuracy order and step sizes used by the residual oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilSpec<T: Real> {
    pub order: usize,
    pub h_x: T,
    pub h_t: T,
}

impl<T: Real> StencilSpec<T> {
    pub const DEFAULT_ORDER: usize = 6;
    pub const DEFAULT_STEP: f64 = 1e-2;

    pub fn new(order: usize, h_x: T, h_t: T) -> Result<Self> {
        if !matches!(order, 2 | 4 | 6 | 8) {
            return Err(Error::Precondition(format!(
                "stencil order must be 2, 4, 6 or 8, got {order}"
            )));
        }
        if !(h_x > T::zero() && h_t > T::zero() && h_x.is_finite() && h_t.is_finite()) {
            return Err(Error::Precondition("stencil steps must be positive and finite".into()));
        }
        Ok(StencilSpec { order, h_x, h_t })
    }

    /// Largest offset, in steps, used by any derivative up to the third.
    pub fn reach(&self) -> usize {
        self.order / 2 + 1
    }
}

impl<T: Real> Default for StencilSpec<T> {
    fn default() -> Self {
        let h = T::lit(Self::DEFAULT_STEP);
        StencilSpec {
            order: Self::DEFAULT_ORDER,
            h_x: h,
            h_t: h,
        }
    }
}

/// Weights of a central difference for one derivative order, unit spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    /// Offsets -m..=m.
    pub offsets: Vec<i32>,
    pub weights: Vec<f64>,
    pub derivative: usize,
}

impl Stencil {
    /// Central stencil for the `derivative`-th derivative with error O(h^order).
    pub fn central(derivative: usize, order: usize) -> Self {
        assert!(derivative >= 1 && order >= 2 && order.is_multiple_of(2));
        let half = derivative.div_ceil(2) - 1 + order / 2;
        let offsets: Vec<i32> = (-(half as i32)..=half as i32).collect();
        let nodes: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let table = fornberg_weights(0.0, &nodes, derivative);
        Stencil {
            offsets,
            weights: table[derivative].clone(),
            derivative,
        }
    }

    pub fn half_width(&self) -> usize {
        self.offsets.len() / 2
    }

    /// Nonzero (offset, weight / h^d) pairs for spacing `h`.
    pub fn scaled<T: Real>(&self, h: T) -> Vec<(i32, T)> {
        let scale = h.powi(self.derivative as i32).recip();
        self.offsets
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(&o, &w)| (o, T::lit(w) * scale))
            .collect()
    }

    /// Applies the stencil to real samples `f(offset)` at spacing `h`.
    pub fn apply<T: Real>(&self, h: T, mut f: impl FnMut(i32) -> T) -> T {
        self.scaled(h).into_iter().fold(T::zero(), |acc, (o, w)| acc + w * f(o))
    }
}

/// Finite-difference weights on arbitrary nodes (Fornberg, 1988).
///
/// Returns `c` with `c[k][j]` the weight of node `j` in the approximation of
/// the `k`-th derivative at `z`, for every `k <= max_derivative`.
pub fn fornberg_weights(z: f64, nodes: &[f64], max_derivative: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let m = max_derivative;
    assert!(n > m, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
