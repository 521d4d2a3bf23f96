//! Discrete spectral data: eigenvalues in the upper half-plane, each with a
//! constant seed vector. This is the complete input of an n-soliton solution.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cast_cx, cx, Cx, Real};

/// One discrete eigenvalue and its seed vector (length N + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint<T: Real> {
    pub lambda: Cx<T>,
    pub nu0: Vec<Cx<T>>,
}

impl<T: Real> SpectralPoint<T> {
    pub fn new(lambda: Cx<T>, nu0: Vec<Cx<T>>) -> Self {
        SpectralPoint { lambda, nu0 }
    }
}

/// Problem size, higher-order coefficient and spectral points.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig<T: Real> {
    /// Number of coupled fields N.
    pub n_fields: usize,
    /// Coefficient of the third-order terms.
    pub epsilon: T,
    pub points: Vec<SpectralPoint<T>>,
}

impl<T: Real> SpectralConfig<T> {
    pub fn new(n_fields: usize, epsilon: T, points: Vec<SpectralPoint<T>>) -> Self {
        SpectralConfig {
            n_fields,
            epsilon,
            points,
        }
    }

    /// The vacuum: no solitons, identically zero field.
    pub fn vacuum(n_fields: usize, epsilon: T) -> Self {
        Self::new(n_fields, epsilon, Vec::new())
    }

    /// Number of solitons n.
    pub fn n_solitons(&self) -> usize {
        self.points.len()
    }

    /// Dimension of the spectral problem, N + 1.
    pub fn dim(&self) -> usize {
        self.n_fields + 1
    }

    /// Smallest Im λ over the points, `None` for the vacuum.
    pub fn min_imag(&self) -> Option<T> {
        self.points.iter().map(|p| p.lambda.im).reduce(T::min)
    }

    pub fn cast<U: Real>(&self) -> SpectralConfig<U> {
        SpectralConfig {
            n_fields: self.n_fields,
            epsilon: U::lit(self.epsilon.as_f64()),
            points: self
                .points
                .iter()
                .map(|p| SpectralPoint {
                    lambda: cast_cx(p.lambda),
                    nu0: p.nu0.iter().map(|&z| cast_cx(z)).collect(),
                })
                .collect(),
        }
    }

    /// Three-field one-soliton used for the bell-shaped reference plots:
    /// ε = 1, λ = 0.5 + 0.5i, seed (1, 0.5, 0.2, √0.71).
    ///
    /// Only α, β and γ are fixed by the plotted parameters; the last seed
    /// component is pinned by requiring |β|² + |γ|² + |δ|² = 1 (ξ = 0) and is
    /// taken real positive. Any phase would give the same |q₁|.
    pub fn figure_one() -> Self {
        let r = |v: f64| cx(T::lit(v), T::zero());
        SpectralConfig::new(
            3,
            T::one(),
            vec![SpectralPoint::new(
                cx(T::lit(0.5), T::lit(0.5)),
                vec![r(1.0), r(0.5), r(0.2), r(0.71f64.sqrt())],
            )],
        )
    }
}

/// A broken invariant of a [`SpectralConfig`], with the offending point index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code")]
pub enum Violation {
    ZeroFields,
    NonFiniteEpsilon,
    NonFinite {
        index: usize,
    },
    NotUpperHalfPlane {
        index: usize,
    },
    WrongSeedLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    ZeroSeedVector {
        index: usize,
    },
    DuplicateEigenvalue {
        first: usize,
        second: usize,
    },
}

impl Violation {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::ZeroFields => "ZeroFields",
            Violation::NonFiniteEpsilon => "NonFiniteEpsilon",
            Violation::NonFinite { .. } => "NonFinite",
            Violation::NotUpperHalfPlane { .. } => "NotUpperHalfPlane",
            Violation::WrongSeedLength { .. } => "WrongSeedLength",
            Violation::ZeroSeedVector { .. } => "ZeroSeedVector",
            Violation::DuplicateEigenvalue { .. } => "DuplicateEigenvalue",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroFields => write!(f, "n_fields must be positive"),
            Violation::NonFiniteEpsilon => write!(f, "epsilon is not finite"),
            Violation::NonFinite { index } => write!(f, "point {index}: non-finite component"),
            Violation::NotUpperHalfPlane { index } => {
                write!(f, "point {index}: eigenvalue not in upper half-plane")
            }
            Violation::WrongSeedLength { index, expected, found } => {
                write!(f, "point {index}: nu0 has {found} components, expected {expected}")
            }
            Violation::ZeroSeedVector { index } => write!(f, "point {index}: nu0 is the zero vector"),
            Violation::DuplicateEigenvalue { first, second } => {
                write!(f, "points {first} and {second}: duplicate eigenvalue")
            }
        }
    }
}

/// Relative tolerance under which two eigenvalues count as the same zero.
pub const DUPLICATE_EIGENVALUE_TOL: f64 = 1e-12;

/// Lists every invariant violation; empty iff the config is valid.
pub fn validate<T: Real>(config: &SpectralConfig<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    if config.n_fields == 0 {
        out.push(Violation::ZeroFields);
    }
    if !config.epsilon.is_finite() {
        out.push(Violation::NonFiniteEpsilon);
    }
    let expected = config.dim();
    for (index, p) in config.points.iter().enumerate() {
        let finite = std::iter::once(&p.lambda)
            .chain(&p.nu0)
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            out.push(Violation::NonFinite { index });
        }
        if !(p.lambda.im > T::zero()) {
            out.push(Violation::NotUpperHalfPlane { index });
        }
        if p.nu0.len() != expected {
            out.push(Violation::WrongSeedLength {
                index,
                expected,
                found: p.nu0.len(),
            });
        }
        if p.nu0.iter().all(|z| z.is_zero()) {
            out.push(Violation::ZeroSeedVector { index });
        }
    }
    let tol = T::lit(DUPLICATE_EIGENVALUE_TOL);
    for (k, pk) in config.points.iter().enumerate() {
        for (l, pl) in config.points.iter().enumerate().skip(k + 1) {
            let scale = T::one().max(pk.lambda.norm()).max(pl.lambda.norm());
            if (pk.lambda - pl.lambda).norm() < tol * scale {
                out.push(Violation::DuplicateEigenvalue { first: k, second: l });
            }
        }
    }
    out
}

/// Rescales every seed vector to unit Euclidean norm with its first nonzero
/// component real positive. The reconstructed field is unchanged.
pub fn gauge_normalize<T: Real>(config: &SpectralConfig<T>) -> SpectralConfig<T> {
    let points = config
        .points
        .iter()
        .map(|p| {
            let norm = p.nu0.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
            let Some(lead) = p.nu0.iter().position(|z| !z.is_zero()) else {
                return p.clone();
            };
            // Divide out the norm and the phase of the leading component.
            let phase = p.nu0[lead] / Cx::new(p.nu0[lead].norm(), T::zero());
            let factor = phase.conj() / Cx::new(norm, T::zero());
            let mut nu0: Vec<Cx<T>> = p.nu0.iter().map(|&z| z * factor).collect();
            nu0[lead] = Cx::new(nu0[lead].norm(), T::zero());
            SpectralPoint::new(p.lambda, nu0)
        })
        .collect();
    SpectralConfig::new(config.n_fields, config.epsilon, points)
}

// ---------------------------------------------------------------------------
// JSON configuration format

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireComplex {
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WirePoint {
    lambda: WireComplex,
    nu0: Vec<WireComplex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireConfig {
    n_fields: usize,
    epsilon: f64,
    points: Vec<WirePoint>,
}

/// Why a configuration document was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid spectral data: {}", join_violations(.0))]
    Domain(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Parses a configuration document, checking syntax and schema only.
pub fn parse_config_unchecked(text: &str) -> Result<SpectralConfig<f64>, ConfigError> {
    let wire: WireConfig = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => ConfigError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
            Category::Data => ConfigError::Schema(e.to_string()),
        }
    })?;
    let expected = wire.n_fields + 1;
    for (index, p) in wire.points.iter().enumerate() {
        if p.nu0.len() != expected {
            return Err(ConfigError::Schema(format!(
                "point {index}: nu0 has {} components, expected n_fields + 1 = {expected}",
                p.nu0.len()
            )));
        }
    }
    let c = |w: WireComplex| cx(w.re, w.im);
    Ok(SpectralConfig {
        n_fields: wire.n_fields,
        epsilon: wire.epsilon,
        points: wire
            .points
            .into_iter()
            .map(|p| SpectralPoint::new(c(p.lambda), p.nu0.into_iter().map(c).collect()))
            .collect(),
    })
}

/// Parses and validates a configuration document. Values are kept bit-exact;
/// no normalization is applied.
pub fn parse_config(text: &str) -> Result<SpectralConfig<f64>, ConfigError> {
    let config = parse_config_unchecked(text)?;
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Domain(violations))
    }
}

/// Serializes a configuration in the document format read by [`parse_config`].
pub fn emit_config(config: &SpectralConfig<f64>) -> String {
    let w = |z: Cx<f64>| WireComplex { re: z.re, im: z.im };
    let wire = WireConfig {
        n_fields: config.n_fields,
        epsilon: config.epsilon,
        points: config
            .points
            .iter()
            .map(|p| WirePoint {
                lambda: w(p.lambda),
                nu0: p.nu0.iter().copied().map(w).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIG1: &str = r#"{
        "n_fields": 3, "epsilon": 1.0,
        "points": [ { "lambda": {"re": 0.5, "im": 0.5},
                      "nu0": [ {"re": 1.0, "im": 0.0}, {"re": 0.5, "im": 0.0},
                               {"re": 0.2, "im": 0.0}, {"re": 0.8426149773176358, "im": 0.0} ] } ]
    }"#;

    #[test]
    fn parses_figure_one_document() {
        let c = parse_config(FIG1).unwrap();
        assert_eq!(c.n_fields, 3);
        assert_eq!(c.epsilon, 1.0);
        assert_eq!(c.n_solitons(), 1);
        assert_eq!(c.points[0].lambda, cx(0.5, 0.5));
        assert_eq!(c.points[0].nu0[1], cx(0.5, 0.0));
        assert_eq!(c.points[0].nu0[3].re, 0.71f64.sqrt());
        assert_eq!(c, SpectralConfig::figure_one());
    }

    #[test]
    fn empty_point_list_is_the_vacuum() {
        let c = parse_config(r#"{"n_fields": 2, "epsilon": 0.0, "points": []}"#).unwrap();
        assert_eq!(c.n_solitons(), 0);
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn lower_half_plane_eigenvalue_is_a_domain_error() {
        let text = FIG1.replace(r#""im": 0.5"#, r#""im": -0.5"#);
        match parse_config(&text) {
            Err(ConfigError::Domain(v)) => {
                assert_eq!(v, vec![Violation::NotUpperHalfPlane { index: 0 }]);
                assert!(v[0].to_string().contains("eigenvalue not in upper half-plane"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_categories() {
        assert!(matches!(parse_config("{ not json"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(
            parse_config(r#"{"n_fields": 1, "points": []}"#),
            Err(ConfigError::Schema(_))
        ));
        let short = r#"{"n_fields": 2, "epsilon": 0.0, "points": [
            {"lambda": {"re": 0, "im": 1}, "nu0": [{"re": 1, "im": 0}, {"re": 1, "im": 0}]}]}"#;
        match parse_config(short) {
            Err(ConfigError::Schema(msg)) => assert!(msg.contains("point 0")),
            other => panic!("unexpected {other:?}"),
        }
        // String-form complex numbers are not accepted.
        let stringy = r#"{"n_fields": 1, "epsilon": 0.0, "points": [
            {"lambda": "1+1i", "nu0": [{"re": 1, "im": 0}, {"re": 1, "im": 0}]}]}"#;
        assert!(matches!(parse_config(stringy), Err(ConfigError::Schema(_))));
    }

    #[test]
    fn validate_reports_each_violation() {
        assert!(validate(&SpectralConfig::<f64>::figure_one()).is_empty());

        let p = |l: Cx<f64>, v: Vec<Cx<f64>>| SpectralPoint::new(l, v);
        let one = cx(1.0, 0.0);
        let dup = SpectralConfig::new(
            1,
            0.0,
            vec![p(cx(0.1, 0.4), vec![one, one]), p(cx(0.1, 0.4), vec![one, one])],
        );
        assert_eq!(
            validate(&dup),
            vec![Violation::DuplicateEigenvalue { first: 0, second: 1 }]
        );

        let zero = SpectralConfig::new(1, 0.0, vec![p(cx(0.1, 0.4), vec![cx(0.0, 0.0); 2])]);
        assert_eq!(validate(&zero), vec![Violation::ZeroSeedVector { index: 0 }]);

        let nan = SpectralConfig::new(1, 0.0, vec![p(cx(f64::NAN, 0.4), vec![one, one])]);
        assert_eq!(validate(&nan), vec![Violation::NonFinite { index: 0 }]);

        let real_axis = SpectralConfig::new(1, 0.0, vec![p(cx(0.3, 0.0), vec![one, one])]);
        assert_eq!(validate(&real_axis), vec![Violation::NotUpperHalfPlane { index: 0 }]);
    }

    #[test]
    fn near_duplicates_respect_relative_tolerance() {
        let one = cx(1.0, 0.0);
        let make = |d: f64| {
            SpectralConfig::new(
                1,
                0.0,
                vec![
                    SpectralPoint::new(cx(1e6, 1.0), vec![one, one]),
                    SpectralPoint::new(cx(1e6 + d, 1.0), vec![one, one]),
                ],
            )
        };
        assert!(!validate(&make(1e-7)).is_empty());
        assert!(validate(&make(1e-5)).is_empty());
    }

    #[test]
    fn gauge_normalize_examples() {
        let norm_of = |v: Vec<Cx<f64>>| {
            let c = SpectralConfig::new(3, 1.0, vec![SpectralPoint::new(cx(0.0, 1.0), v)]);
            gauge_normalize(&c).points[0].nu0.clone()
        };
        let z = cx(0.0, 0.0);
        assert_eq!(norm_of(vec![cx(2.0, 0.0), z, z, z]), vec![cx(1.0, 0.0), z, z, z]);
        assert_eq!(norm_of(vec![cx(0.0, 2.0), z, z, z]), vec![cx(1.0, 0.0), z, z, z]);
        let h = norm_of(vec![cx(1.0, 0.0); 4]);
        for w in h {
            assert!((w - cx(0.5, 0.0)).norm() < 1e-15);
        }
        // Leading zeros are skipped when fixing the phase.
        let v = norm_of(vec![z, cx(0.0, -3.0), cx(4.0, 0.0), z]);
        assert!((v[1] - cx(0.6, 0.0)).norm() < 1e-15);
        assert!((v[2] - cx(0.0, 0.8)).norm() < 1e-15);
    }

    fn arb_config() -> impl Strategy<Value = SpectralConfig<f64>> {
        (1usize..4, -2.0..2.0f64, 0usize..4)
            .prop_flat_map(|(n_fields, eps, n)| {
                let comp = (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| cx(a, b));
                let point = (-2.0..2.0f64, 0.05..2.0f64, prop::collection::vec(comp, n_fields + 1))
                    .prop_map(|(a, b, nu0)| SpectralPoint::new(cx(a, b), nu0));
                prop::collection::vec(point, n).prop_map(move |points| SpectralConfig::new(n_fields, eps, points))
            })
            .prop_filter("valid", |c| validate(c).is_empty())
    }

    proptest! {
        #[test]
        fn emitted_documents_round_trip(c in arb_config()) {
            let back = parse_config(&emit_config(&c)).unwrap();
            prop_assert!(validate(&back).is_empty());
            prop_assert_eq!(back, c);
        }

        #[test]
        fn gauge_normalize_is_idempotent(c in arb_config()) {
            let once = gauge_normalize(&c);
            let twice = gauge_normalize(&once);
            for (a, b) in once.points.iter().zip(&twice.points) {
                let n: f64 = a.nu0.iter().map(|z| z.norm_sqr()).sum();
                prop_assert!((n - 1.0).abs() < 1e-14);
                for (x, y) in a.nu0.iter().zip(&b.nu0) {
                    prop_assert!((x - y).norm() < 1e-15);
                }
            }
        }
    }
}
