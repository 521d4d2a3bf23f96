use std::fmt;
use std::str::FromStr;

use hirota_rh::lax::DEFAULT_QUADRATURE_NODES;
use hirota_rh::scattering::{default_half_width, DEFAULT_SAMPLES};
use hirota_rh::{
    conserved_mass, count_zeros, evaluate_field, one_soliton_closed_form, one_soliton_sech_form, pde_residual,
    relative_deviation, s11, scattering_matrix, soliton_velocity, trace_potential, zero_curvature_residual, Contour,
    Error, GridSpec, SechParams, SpectralConfig64, StencilSpec, C64,
};
use serde::Serialize;

use crate::report::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Oracle {
    Pde,
    Lax,
    Mass,
    Scatter,
    ClosedForm,
}

impl Oracle {
    pub const ALL: [Oracle; 5] = [
        Oracle::Pde,
        Oracle::Lax,
        Oracle::Mass,
        Oracle::Scatter,
        Oracle::ClosedForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Oracle::Pde => "pde",
            Oracle::Lax => "lax",
            Oracle::Mass => "mass",
            Oracle::Scatter => "scatter",
            Oracle::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Oracle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Oracle::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown oracle {s:?}; expected one of pde, lax, mass, scatter, closed-form"))
    }
}

/// Every tunable default in one place; printed by `--show-defaults`.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub grid: [f64; 6],
    pub parts: Vec<&'static str>,
    pub order: usize,
    pub step: f64,
    pub tol_pde: f64,
    pub tol_lax: f64,
    pub tol_mass: f64,
    pub tol_scatter: f64,
    pub tol_det: f64,
    pub tol_closed_form: f64,
    pub lax_spectral_parameters: Vec<[f64; 2]>,
    pub lax_points_per_axis: usize,
    pub mass_times: usize,
    pub mass_quadrature_nodes: usize,
    pub scatter_samples: usize,
    /// `null` means 10 / min Im λ.
    pub scatter_half_width: Option<f64>,
    pub scatter_real_lambdas: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid: [-10.0, 10.0, 201.0, -2.0, 2.0, 41.0],
            parts: vec!["modulus"],
            order: StencilSpec::<f64>::DEFAULT_ORDER,
            step: StencilSpec::<f64>::DEFAULT_STEP,
            tol_pde: 1e-6,
            tol_lax: 1e-5,
            tol_mass: 1e-8,
            tol_scatter: 1e-6,
            tol_det: 1e-8,
            tol_closed_form: 1e-12,
            lax_spectral_parameters: vec![[1.0, 0.3], [-0.5, 0.8], [0.2, -0.4], [1.5, 0.0], [-1.2, 0.1]],
            lax_points_per_axis: 5,
            mass_times: 5,
            mass_quadrature_nodes: DEFAULT_QUADRATURE_NODES,
            scatter_samples: DEFAULT_SAMPLES,
            scatter_half_width: None,
            scatter_real_lambdas: vec![-1.0, -0.3, 0.0, 0.3, 1.2],
        }
    }
}

impl Settings {
    pub fn grid_spec(&self) -> Result<GridSpec<f64>, Error> {
        let g = self.grid;
        GridSpec::new(g[0], g[1], g[2] as usize, g[3], g[4], g[5] as usize)
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

pub fn pde(config: &SpectralConfig64, s: &Settings) -> Result<Vec<Outcome>, Error> {
    let stencil = StencilSpec::new(s.order, s.step, s.step)?;
    let r = pde_residual(config, config.epsilon, &s.grid_spec()?, &stencil)?;
    Ok(vec![Outcome::at_most("pde-residual", r.max_abs, s.tol_pde)])
}

pub fn lax(config: &SpectralConfig64, s: &Settings) -> Result<Vec<Outcome>, Error> {
    let stencil = StencilSpec::new(s.order, s.step, s.step)?;
    let g = s.grid_spec()?;
    let mut worst = 0.0f64;
    for x in axis(g.x_min, g.x_max, s.lax_points_per_axis) {
        for t in axis(g.t_min, g.t_max, s.lax_points_per_axis) {
            for &[re, im] in &s.lax_spectral_parameters {
                worst = worst.max(zero_curvature_residual(config, C64::new(re, im), x, t, &stencil)?);
            }
        }
    }
    Ok(vec![Outcome::at_most("zero-curvature", worst, s.tol_lax)])
}

pub fn mass(config: &SpectralConfig64, s: &Settings) -> Result<Vec<Outcome>, Error> {
    let g = s.grid_spec()?;
    let times = axis(g.t_min, g.t_max, s.mass_times);
    // Window wide enough for every soliton over the whole time range.
    let drift = config
        .points
        .iter()
        .map(|p| soliton_velocity(p.lambda, config.epsilon).abs())
        .fold(0.0, f64::max)
        * g.t_min.abs().max(g.t_max.abs());
    let half = default_half_width(config) + drift;
    let n_quad = s.mass_quadrature_nodes.max((8.0 * half) as usize) | 1;
    let masses = times
        .iter()
        .map(|&t| conserved_mass(config, t, (-half, half), n_quad))
        .collect::<Result<Vec<_>, _>>()?;
    let expected = 4.0 * config.points.iter().map(|p| p.lambda.im).sum::<f64>();
    let scale = expected.max(f64::MIN_POSITIVE);
    let spread = masses.iter().map(|m| (m - masses[0]).abs()).fold(0.0, f64::max) / scale;
    let analytic = masses.iter().map(|m| (m - expected).abs()).fold(0.0, f64::max) / scale;
    Ok(vec![
        Outcome::at_most("mass-conservation", spread, s.tol_mass),
        Outcome::at_most("mass-analytic", analytic, s.tol_mass),
    ])
}

pub fn scatter(config: &SpectralConfig64, s: &Settings) -> Result<Vec<Outcome>, Error> {
    let half = s.scatter_half_width.unwrap_or_else(|| default_half_width(config));
    let trace = trace_potential(config, 0.0, half, s.scatter_samples)?;
    let mut zero = 0.0f64;
    for p in &config.points {
        zero = zero.max(s11(&trace, p.lambda)?.norm());
    }
    let (mut refl, mut det, mut unit) = (0.0f64, 0.0f64, 0.0f64);
    for &lam in &s.scatter_real_lambdas {
        let m = scattering_matrix(&trace, C64::new(lam, 0.0))?;
        refl = refl.max(m.reflection());
        det = det.max(m.det_deviation);
        unit = unit.max(m.unitarity_deviation);
    }
    let mut out = vec![
        Outcome::at_most("s11-zeros", zero, s.tol_scatter),
        Outcome::at_most("reflection", refl, s.tol_scatter),
        Outcome::at_most("det-s", det, s.tol_det),
        Outcome::at_most("unitarity", unit, s.tol_scatter),
    ];
    if config.n_solitons() > 0 {
        let found = count_zeros(&trace, &Contour::enclosing(config, 0.5))?;
        let miss = (found - config.n_solitons() as i64).unsigned_abs() as f64;
        out.push(Outcome::at_most("zero-count-mismatch", miss, 0.0));
    }
    Ok(out)
}

pub fn closed_form_applies(config: &SpectralConfig64) -> bool {
    config.n_fields == 3 && config.n_solitons() == 1
}

/// Running maximum that keeps a NaN once seen.
fn worst(acc: f64, d: f64) -> f64 {
    if acc.is_nan() || d.is_nan() {
        f64::NAN
    } else {
        acc.max(d)
    }
}

pub fn closed_form(config: &SpectralConfig64, s: &Settings) -> Result<Vec<Outcome>, Error> {
    let sech = SechParams::from_config(config).ok();
    let mut closed = 0.0f64;
    let mut sech_dev = 0.0f64;
    for (x, t) in s.grid_spec()?.nodes() {
        let q = evaluate_field(config, x, t)?.q;
        let d = relative_deviation(&q, &one_soliton_closed_form(config, x, t)?.q);
        closed = worst(closed, d);
        if let Some(p) = &sech {
            sech_dev = worst(sech_dev, relative_deviation(&q, &one_soliton_sech_form(p, x, t)?.q));
        }
    }
    let mut out = vec![Outcome::at_most("closed-form", closed, s.tol_closed_form)];
    if sech.is_some() {
        out.push(Outcome::at_most("sech-form", sech_dev, s.tol_closed_form));
    }
    Ok(out)
}

pub fn run(oracle: Oracle, config: &SpectralConfig64, s: &Settings) -> Result<Vec<Outcome>, Error> {
    match oracle {
        Oracle::Pde => pde(config, s),
        Oracle::Lax => lax(config, s),
        Oracle::Mass => mass(config, s),
        Oracle::Scatter => scatter(config, s),
        Oracle::ClosedForm => closed_form(config, s),
    }
}
