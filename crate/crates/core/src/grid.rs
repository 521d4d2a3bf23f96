//! Space-time grids, field tables and their CSV / JSON encodings.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::evaluate_field;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use crate::spectral::{emit_config, SpectralConfig};
use crate::ENGINE_VERSION;

/// Uniform rectangular grid; `nt = 1` gives a fixed-time slice at `t_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T: Real> {
    pub x_min: T,
    pub x_max: T,
    pub t_min: T,
    pub t_max: T,
    pub nx: usize,
    pub nt: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x_min: T, x_max: T, nx: usize, t_min: T, t_max: T, nt: usize) -> Result<Self> {
        let g = GridSpec {
            x_min,
            x_max,
            t_min,
            t_max,
            nx,
            nt,
        };
        g.check()?;
        Ok(g)
    }

    /// A single node at (x, t).
    pub fn point(x: T, t: T) -> Self {
        GridSpec {
            x_min: x,
            x_max: x,
            t_min: t,
            t_max: t,
            nx: 1,
            nt: 1,
        }
    }

    pub fn check(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.t_min, self.t_max]
            .iter()
            .all(|v| v.is_finite());
        let x_ok = self.x_min < self.x_max || (self.nx == 1 && self.x_min <= self.x_max);
        if !finite || !x_ok || self.t_min > self.t_max || self.nx == 0 || self.nt == 0 {
            return Err(Error::Precondition(format!(
                "invalid grid x=[{}, {}]x{} t=[{}, {}]x{}",
                self.x_min, self.x_max, self.nx, self.t_min, self.t_max, self.nt
            )));
        }
        Ok(())
    }

    fn axis(lo: T, hi: T, n: usize) -> Vec<T> {
        if n == 1 {
            return vec![lo];
        }
        let step = (hi - lo) / T::of_usize(n - 1);
        (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + step * T::of_usize(i) })
            .collect()
    }

    pub fn xs(&self) -> Vec<T> {
        Self::axis(self.x_min, self.x_max, self.nx)
    }

    pub fn ts(&self) -> Vec<T> {
        Self::axis(self.t_min, self.t_max, self.nt)
    }

    /// All nodes, x-major (t varies fastest).
    pub fn nodes(&self) -> Vec<(T, T)> {
        let ts = self.ts();
        self.xs()
            .into_iter()
            .flat_map(|x| ts.iter().map(move |&t| (x, t)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A node whose evaluation failed; the sweep carries on without it.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFailure {
    pub x: f64,
    pub t: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMetadata {
    pub config_digest: String,
    pub engine_version: String,
}

/// Field values on every grid node, x-major. Failed nodes hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub grid: GridSpec<f64>,
    pub n_fields: usize,
    pub values: Vec<Vec<Cx<f64>>>,
    pub failures: Vec<NodeFailure>,
    pub metadata: TableMetadata,
}

impl FieldTable {
    /// Values at grid indices (i along x, k along t).
    pub fn at(&self, i: usize, k: usize) -> &[Cx<f64>] {
        &self.values[i * self.grid.nt + k]
    }

    /// Largest |q_j| per component over the successfully evaluated nodes.
    pub fn peak_modulus(&self) -> Vec<f64> {
        let mut peak = vec![0.0f64; self.n_fields];
        for v in &self.values {
            for (p, z) in peak.iter_mut().zip(v) {
                let m = z.norm();
                if m.is_finite() {
                    *p = p.max(m);
                }
            }
        }
        peak
    }
}

/// SHA-256 of the canonical configuration document, hex encoded.
pub fn config_digest(config: &SpectralConfig<f64>) -> String {
    let digest = Sha256::digest(emit_config(config).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn sample_nodes(config: &SpectralConfig<f64>, grid: &GridSpec<f64>, parallel: bool) -> Result<FieldTable> {
    grid.check()?;
    let nodes = grid.nodes();
    let eval = |&(x, t): &(f64, f64)| evaluate_field(config, x, t).map(|s| s.q);
    let results: Vec<Result<Vec<Cx<f64>>>> = if parallel {
        nodes.par_iter().map(eval).collect()
    } else {
        nodes.iter().map(eval).collect()
    };
    let mut values = Vec::with_capacity(nodes.len());
    let mut failures = Vec::new();
    for (r, &(x, t)) in results.into_iter().zip(&nodes) {
        match r {
            Ok(q) => values.push(q),
            Err(error) => {
                values.push(vec![Cx::new(f64::NAN, f64::NAN); config.n_fields]);
                failures.push(NodeFailure { x, t, error });
            }
        }
    }
    Ok(FieldTable {
        grid: *grid,
        n_fields: config.n_fields,
        values,
        failures,
        metadata: TableMetadata {
            config_digest: config_digest(config),
            engine_version: ENGINE_VERSION.to_string(),
        },
    })
}

/// Evaluates the field on every node of `grid`, in parallel.
pub fn sample_grid(config: &SpectralConfig<f64>, grid: &GridSpec<f64>) -> Result<FieldTable> {
    sample_nodes(config, grid, true)
}

/// Single-threaded [`sample_grid`]; produces an identical table.
pub fn sample_grid_serial(config: &SpectralConfig<f64>, grid: &GridSpec<f64>) -> Result<FieldTable> {
    sample_nodes(config, grid, false)
}

/// Which scalar to emit per complex value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Modulus,
    Real,
    Imag,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::Modulus, Part::Real, Part::Imag];

    pub fn name(self) -> &'static str {
        match self {
            Part::Modulus => "modulus",
            Part::Real => "real",
            Part::Imag => "imag",
        }
    }

    pub fn parse(s: &str) -> Option<Part> {
        Part::ALL.into_iter().find(|p| p.name() == s.trim())
    }

    fn of(self, z: Cx<f64>) -> f64 {
        match self {
            Part::Modulus => z.norm(),
            Part::Real => z.re,
            Part::Imag => z.im,
        }
    }
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row of the long-format CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub x: f64,
    pub t: f64,
    /// 1-based field index.
    pub component: usize,
    pub part: Part,
    pub value: f64,
}

pub const CSV_HEADER: [&str; 5] = ["x", "t", "component", "part", "value"];

#[derive(Debug, Error)]
pub enum GridIoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Flattens a table to records: x-major, then t, component, part.
pub fn table_records(table: &FieldTable, parts: &[Part]) -> Vec<CsvRecord> {
    let mut parts = parts.to_vec();
    parts.sort();
    parts.dedup();
    let mut out = Vec::with_capacity(table.values.len() * table.n_fields * parts.len());
    for ((x, t), q) in table.grid.nodes().into_iter().zip(&table.values) {
        for (j, &z) in q.iter().enumerate() {
            for &part in &parts {
                out.push(CsvRecord {
                    x,
                    t,
                    component: j + 1,
                    part,
                    value: part.of(z),
                });
            }
        }
    }
    out
}

pub fn emit_records(records: &[CsvRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            format_float(r.x),
            format_float(r.t),
            r.component.to_string(),
            r.part.name().to_string(),
            format_float(r.value),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Long-format CSV with header `x,t,component,part,value`.
pub fn emit_csv(table: &FieldTable, parts: &[Part]) -> String {
    emit_records(&table_records(table, parts))
}

pub fn parse_csv(text: &str) -> std::result::Result<Vec<CsvRecord>, GridIoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(GridIoError::Malformed {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |message: String| GridIoError::Malformed { line, message };
        let float = |k: usize| -> std::result::Result<f64, GridIoError> {
            rec[k]
                .parse::<f64>()
                .map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[k])))
        };
        out.push(CsvRecord {
            x: float(0)?,
            t: float(1)?,
            component: rec[2].parse().map_err(|e| bad(format!("component: {e}")))?,
            part: Part::parse(&rec[3]).ok_or_else(|| bad(format!("unknown part {:?}", &rec[3])))?,
            value: float(4)?,
        });
    }
    Ok(out)
}

fn raw_number(v: f64) -> Option<Box<RawValue>> {
    if v.is_finite() {
        Some(RawValue::from_string(format_float(v)).expect("formatted float is valid JSON"))
    } else {
        None
    }
}

#[derive(Serialize)]
struct JsonComplex {
    re: Option<Box<RawValue>>,
    im: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct JsonGrid {
    x_min: Option<Box<RawValue>>,
    x_max: Option<Box<RawValue>>,
    nx: usize,
    t_min: Option<Box<RawValue>>,
    t_max: Option<Box<RawValue>>,
    nt: usize,
}

#[derive(Serialize)]
struct JsonFailure {
    x: Option<Box<RawValue>>,
    t: Option<Box<RawValue>>,
    error: String,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    grid: JsonGrid,
    n_fields: usize,
    metadata: &'a TableMetadata,
    /// One entry per node, x-major; `null` for failed nodes.
    values: Vec<Option<Vec<JsonComplex>>>,
    failures: Vec<JsonFailure>,
}

/// JSON mirror of a [`FieldTable`], numbers printed as in the CSV.
pub fn emit_json(table: &FieldTable) -> String {
    let g = &table.grid;
    let doc = JsonTable {
        grid: JsonGrid {
            x_min: raw_number(g.x_min),
            x_max: raw_number(g.x_max),
            nx: g.nx,
            t_min: raw_number(g.t_min),
            t_max: raw_number(g.t_max),
            nt: g.nt,
        },
        n_fields: table.n_fields,
        metadata: &table.metadata,
        values: table
            .values
            .iter()
            .map(|q| {
                if q.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    Some(
                        q.iter()
                            .map(|z| JsonComplex {
                                re: raw_number(z.re),
                                im: raw_number(z.im),
                            })
                            .collect(),
                    )
                } else {
                    None
                }
            })
            .collect(),
        failures: table
            .failures
            .iter()
            .map(|f| JsonFailure {
                x: raw_number(f.x),
                t: raw_number(f.t),
                error: f.error.to_string(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("table serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::spectral::SpectralPoint;
    use proptest::prelude::*;

    #[test]
    fn vacuum_table_is_zero() {
        let c = SpectralConfig::vacuum(2, 1.0);
        let g = GridSpec::new(-1.0, 1.0, 4, 0.0, 1.0, 3).unwrap();
        let t = sample_grid(&c, &g).unwrap();
        assert_eq!(t.values.len(), 12);
        assert!(t.values.iter().flatten().all(|z| *z == cx(0.0, 0.0)));
        assert_eq!(t.peak_modulus(), vec![0.0, 0.0]);
    }

    #[test]
    fn single_node_table() {
        let c = SpectralConfig::figure_one();
        let t = sample_grid(&c, &GridSpec::point(0.0, 0.0)).unwrap();
        assert_eq!(t.values, vec![evaluate_field(&c, 0.0, 0.0).unwrap().q]);
    }

    #[test]
    fn axes_hit_endpoints_and_are_x_major() {
        let g = GridSpec::new(-10.0, 10.0, 401, 0.0, 0.0, 1).unwrap();
        let xs = g.xs();
        assert_eq!(xs[0], -10.0);
        assert_eq!(xs[200], 0.0);
        assert_eq!(xs[400], 10.0);
        let g = GridSpec::new(0.0, 1.0, 2, 5.0, 6.0, 2).unwrap();
        assert_eq!(g.nodes(), vec![(0.0, 5.0), (0.0, 6.0), (1.0, 5.0), (1.0, 6.0)]);
        assert!(GridSpec::new(1.0, 0.0, 2, 0.0, 0.0, 1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 2, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn figure_two_slice_peak() {
        let c = SpectralConfig::figure_one();
        let g = GridSpec::new(-10.0, 10.0, 401, 0.0, 0.0, 1).unwrap();
        let t = sample_grid(&c, &g).unwrap();
        assert!((t.peak_modulus()[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn singular_nodes_are_recorded_not_fatal() {
        let one = cx(1.0, 0.0);
        let c = SpectralConfig::new(
            1,
            0.0,
            vec![
                SpectralPoint::new(cx(0.2, 0.5), vec![one, one]),
                SpectralPoint::new(cx(0.2 + 1e-11, 0.5), vec![one, one]),
            ],
        );
        let t = sample_grid(&c, &GridSpec::new(0.0, 1.0, 3, 0.0, 0.0, 1).unwrap()).unwrap();
        assert_eq!(t.failures.len(), 3);
        assert!(t.values.iter().flatten().all(|z| z.re.is_nan()));
        let json = emit_json(&t);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["values"][0].is_null());
        assert_eq!(v["failures"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn zero_one_by_one_csv() {
        let c = SpectralConfig::vacuum(1, 0.0);
        let t = sample_grid(&c, &GridSpec::point(0.0, 0.0)).unwrap();
        let csv = emit_csv(&t, &[Part::Modulus]);
        assert_eq!(
            csv,
            "x,t,component,part,value\n0.0000000000000000e0,0.0000000000000000e0,1,modulus,0.0000000000000000e0\n"
        );
    }

    #[test]
    fn csv_parts_and_modulus_consistency() {
        let c = SpectralConfig::figure_one();
        let g = GridSpec::new(-3.0, 3.0, 13, -0.5, 0.5, 3).unwrap();
        let t = sample_grid(&c, &g).unwrap();
        let text = emit_csv(&t, &[Part::Imag, Part::Modulus, Part::Real]);
        let recs = parse_csv(&text).unwrap();
        assert_eq!(recs.len(), 13 * 3 * 3 * 3);
        assert!(recs.iter().filter(|r| r.part == Part::Modulus).all(|r| r.value >= 0.0));
        for chunk in recs.chunks(3) {
            assert_eq!(chunk.iter().map(|r| r.part).collect::<Vec<_>>(), Part::ALL);
            let m = cx(chunk[1].value, chunk[2].value).norm();
            assert!((m - chunk[0].value).abs() <= 1e-16);
        }
    }

    #[test]
    fn parallel_and_serial_tables_are_identical() {
        let c = SpectralConfig::new(
            2,
            0.4,
            vec![
                SpectralPoint::new(cx(0.3, 0.6), vec![cx(1.0, 0.0), cx(0.2, 0.1), cx(0.5, -0.4)]),
                SpectralPoint::new(cx(-0.5, 0.4), vec![cx(0.3, 0.3), cx(1.0, 0.0), cx(0.0, 0.2)]),
            ],
        );
        let g = GridSpec::new(-6.0, 6.0, 31, -1.0, 1.0, 5).unwrap();
        let a = sample_grid(&c, &g).unwrap();
        let b = sample_grid_serial(&c, &g).unwrap();
        assert_eq!(emit_csv(&a, &Part::ALL), emit_csv(&b, &Part::ALL));
        assert_eq!(emit_json(&a), emit_json(&b));
    }

    #[test]
    fn json_numbers_use_csv_formatting() {
        let c = SpectralConfig::figure_one();
        let t = sample_grid(&c, &GridSpec::point(0.0, 0.0)).unwrap();
        let json = emit_json(&t);
        assert!(json.contains(r#""x_min":0.0000000000000000e0"#));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let re = v["values"][0][0]["re"].as_f64().unwrap();
        assert_eq!(re, t.values[0][0].re);
        assert_eq!(v["metadata"]["engine_version"], ENGINE_VERSION);
        assert_eq!(v["metadata"]["config_digest"].as_str().unwrap().len(), 64);
    }

    proptest! {
        #[test]
        fn csv_emit_parse_emit_is_byte_identical(
            rows in prop::collection::vec(
                (any::<f64>(), -1e300..1e300f64, 1usize..9, 0usize..3, any::<f64>()), 0..40)
        ) {
            let recs: Vec<CsvRecord> = rows
                .into_iter()
                .filter(|r| r.0.is_finite() && r.4.is_finite())
                .map(|(x, t, component, p, value)| CsvRecord { x, t, component, part: Part::ALL[p], value })
                .collect();
            let text = emit_records(&recs);
            let back = parse_csv(&text).unwrap();
            prop_assert_eq!(&back, &recs);
            prop_assert_eq!(emit_records(&back), text);
        }
    }
}
