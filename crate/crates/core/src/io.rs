//! CSV and JSON readers and writers.
//!
//! Datasets are one realization per row with columns `s_1..s_k`; the start
//! time is supplied separately. Every emitted float uses 17 significant
//! digits so values survive a decimal round trip.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{BoundarySummary, ContourGrid, Method, PropertyReport, RankTable};
use crate::depth::{DepthBreakdown, DepthParams, EventSequence};
use crate::error::IoError;
use crate::estimation::SampleSet;

pub const SCHEMA_VERSION: u32 = 1;

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |e| {
        let message = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(source) => IoError::Io {
                path: path.to_path_buf(),
                source,
            },
            _ => IoError::Format {
                path: path.to_path_buf(),
                message,
            },
        }
    }
}

/// Reads a dataset, skipping a leading header row when its cells are not numeric.
pub fn read_sample<R: Read>(reader: R, t0: f64, label: &Path) -> Result<SampleSet, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut width = None;
    let mut realizations = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err(label))?;
        let row = i + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(c, text)| text.parse::<f64>().map_err(|_| c))
            .collect();
        if i == 0 && parsed.iter().all(Result::is_err) {
            continue;
        }
        let mut times = Vec::with_capacity(parsed.len());
        for (c, value) in parsed.into_iter().enumerate() {
            match value {
                Ok(v) if v.is_finite() => times.push(v),
                _ => {
                    return Err(IoError::Parse {
                        path: label.to_path_buf(),
                        row,
                        column: c + 1,
                        text: record[c].to_string(),
                    })
                }
            }
        }
        let expected = *width.get_or_insert(times.len());
        if times.len() != expected {
            return Err(IoError::MixedWidth {
                path: label.to_path_buf(),
                row,
                expected,
                found: times.len(),
            });
        }
        let seq = EventSequence::new(t0, times).map_err(|source| IoError::InvalidRow {
            path: label.to_path_buf(),
            row,
            source,
        })?;
        realizations.push(seq);
    }
    if realizations.is_empty() {
        return Err(IoError::Empty {
            path: label.to_path_buf(),
        });
    }
    Ok(SampleSet::new(realizations)?)
}

pub fn load_csv(path: impl AsRef<Path>, t0: f64) -> Result<SampleSet, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_sample(file, t0, path)
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// The parameters document exchanged between `fit` and the scoring commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub params: DepthParams,
}

pub fn params_to_json(params: &DepthParams) -> String {
    let doc = ParamsDocument {
        schema_version: SCHEMA_VERSION,
        params: params.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("params serialize")
}

pub fn params_from_json(text: &str, label: &Path) -> Result<DepthParams, IoError> {
    let doc: ParamsDocument = serde_json::from_str(text).map_err(|e| IoError::Format {
        path: label.to_path_buf(),
        message: e.to_string(),
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(IoError::Format {
            path: label.to_path_buf(),
            message: format!("unsupported schema_version {}", doc.schema_version),
        });
    }
    doc.params.validate()?;
    Ok(doc.params)
}

pub fn write_params(params: &DepthParams, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    writeln!(w, "{}", params_to_json(params)).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_params(path: impl AsRef<Path>) -> Result<DepthParams, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    params_from_json(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

impl Format {
    /// Picks JSON for `.json` paths and CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// A result that can be written as CSV or as a versioned JSON document.
pub trait Emit {
    /// Document type recorded in the JSON `kind` field.
    const KIND: &'static str;

    fn csv_header(&self) -> Vec<String>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
    fn json_body(&self) -> Value;

    fn to_json(&self) -> Value {
        let mut doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "kind": Self::KIND,
        });
        if let (Value::Object(doc), Value::Object(body)) = (&mut doc, self.json_body()) {
            doc.extend(body);
        }
        doc
    }

    fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.csv_header())?;
        for row in self.csv_rows() {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_to<W: Write>(&self, mut writer: W, format: Format) -> Result<(), IoError> {
        let label = Path::new("<output>");
        match format {
            Format::Csv => self.write_csv(writer).map_err(csv_err(label)),
            Format::Json => {
                let text = serde_json::to_string_pretty(&self.to_json()).expect("json value");
                writeln!(writer, "{text}").map_err(io_err(label))
            }
        }
    }
}

/// Writes `item` to `path` in `format`.
pub fn emit_results<T: Emit>(item: &T, format: Format, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut w = create(path)?;
    item.write_to(&mut w, format).map_err(|e| relabel(e, path))?;
    w.flush().map_err(io_err(path))
}

fn relabel(e: IoError, path: &Path) -> IoError {
    let path: PathBuf = path.to_path_buf();
    match e {
        IoError::Io { source, .. } => IoError::Io { path, source },
        IoError::Format { message, .. } => IoError::Format { path, message },
        other => other,
    }
}

impl Emit for SampleSet {
    const KIND: &'static str = "sample";

    fn csv_header(&self) -> Vec<String> {
        (1..=self.k()).map(|i| format!("s{i}")).collect()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| r.times().iter().map(|&t| format_float(t)).collect())
            .collect()
    }

    fn json_body(&self) -> Value {
        serde_json::json!({
            "start": self.start(),
            "k": self.k(),
            "realizations": self.iter().map(|r| r.times().to_vec()).collect::<Vec<_>>(),
        })
    }
}

impl Emit for RankTable {
    const KIND: &'static str = "rank_table";

    fn csv_header(&self) -> Vec<String> {
        ["rank", "index", "depth", "method"].map(String::from).to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|e| {
                vec![
                    e.rank.to_string(),
                    e.index.to_string(),
                    format_float(e.depth),
                    self.method.to_string(),
                ]
            })
            .collect()
    }

    fn json_body(&self) -> Value {
        serde_json::to_value(self).expect("rank table")
    }
}

impl Emit for ContourGrid {
    const KIND: &'static str = "contour_grid";

    fn csv_header(&self) -> Vec<String> {
        ["s1", "s2", "method", "value"].map(String::from).to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::with_capacity(self.axis1.len() * self.axis2.len());
        for (i, &s1) in self.axis1.iter().enumerate() {
            for (j, &s2) in self.axis2.iter().enumerate() {
                rows.push(vec![
                    format_float(s1),
                    format_float(s2),
                    self.method.to_string(),
                    format_float(self.values[i][j]),
                ]);
            }
        }
        rows
    }

    fn json_body(&self) -> Value {
        serde_json::to_value(self).expect("contour grid")
    }
}

impl Emit for PropertyReport {
    const KIND: &'static str = "property_report";

    fn csv_header(&self) -> Vec<String> {
        ["name", "trials", "violations", "worst_margin", "tolerance"]
            .map(String::from)
            .to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.trials.to_string(),
                    c.violations.to_string(),
                    format_float(c.worst_margin),
                    format_float(c.tolerance),
                ]
            })
            .collect()
    }

    fn json_body(&self) -> Value {
        let mut body = serde_json::to_value(self).expect("property report");
        body["passed"] = Value::Bool(self.passed());
        body
    }
}

impl Emit for BoundarySummary {
    const KIND: &'static str = "boundary_summary";

    fn csv_header(&self) -> Vec<String> {
        [
            "threshold",
            "n",
            "subset_size",
            "mean_product_rank",
            "mean_mahalanobis_rank",
        ]
        .map(String::from)
        .to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        vec![vec![
            format_float(self.threshold),
            self.n.to_string(),
            self.subset.len().to_string(),
            opt(self.mean_product_rank),
            opt(self.mean_mahalanobis_rank),
        ]]
    }

    fn json_body(&self) -> Value {
        let mut body = serde_json::to_value(self).expect("boundary summary");
        if self.is_empty() {
            body["warning"] = Value::String("no realization falls below the threshold".into());
        }
        body
    }
}

/// Per-realization depth under one method, with the product breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub index: usize,
    pub depth: f64,
    pub breakdown: DepthBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthTable {
    pub method: Method,
    pub rows: Vec<DepthRow>,
}

impl Emit for DepthTable {
    const KIND: &'static str = "depth_table";

    fn csv_header(&self) -> Vec<String> {
        [
            "index",
            "method",
            "depth",
            "omega",
            "exponent",
            "marginal_factor",
            "conditional",
            "product",
            "mahalanobis",
        ]
        .map(String::from)
        .to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let b = &r.breakdown;
                vec![
                    r.index.to_string(),
                    self.method.to_string(),
                    format_float(r.depth),
                    format_float(b.omega),
                    format_float(b.exponent),
                    format_float(b.marginal_factor),
                    format_float(b.conditional),
                    format_float(b.product),
                    b.baseline_mahalanobis.map(format_float).unwrap_or_default(),
                ]
            })
            .collect()
    }

    fn json_body(&self) -> Value {
        serde_json::to_value(self).expect("depth table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{verify_properties, Method};

    fn label() -> &'static Path {
        Path::new("mem.csv")
    }

    #[test]
    fn reads_plain_rows() {
        let s = read_sample("1,2\n3,6\n".as_bytes(), 0.0, label()).unwrap();
        assert_eq!((s.k(), s.len()), (2, 2));
        assert_eq!(s.realizations()[1].times(), &[3.0, 6.0]);
    }

    #[test]
    fn skips_header_and_blank_lines() {
        let s = read_sample("s1, s2\n1, 2\n\n3 ,6\n".as_bytes(), 0.5, label()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.start(), 0.5);
    }

    #[test]
    fn reports_unordered_row() {
        let err = read_sample("1,2\n2,1\n".as_bytes(), 0.0, label()).unwrap_err();
        assert!(matches!(err, IoError::InvalidRow { row: 2, .. }), "{err}");
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn reports_parse_location() {
        let err = read_sample("1,2\n3,x\n".as_bytes(), 0.0, label()).unwrap_err();
        assert!(
            matches!(err, IoError::Parse { row: 2, column: 2, .. }),
            "{err}"
        );
        let err = read_sample("1,2\n3,inf\n".as_bytes(), 0.0, label()).unwrap_err();
        assert!(matches!(err, IoError::Parse { row: 2, column: 2, .. }));
    }

    #[test]
    fn reports_mixed_width() {
        let err = read_sample("1,2\n3,4,5\n".as_bytes(), 0.0, label()).unwrap_err();
        assert!(matches!(
            err,
            IoError::MixedWidth { row: 2, expected: 2, found: 3, .. }
        ));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            read_sample("s1,s2\n".as_bytes(), 0.0, label()),
            Err(IoError::Empty { .. })
        ));
    }

    #[test]
    fn sample_round_trips_bit_for_bit() {
        let rows = vec![
            vec![0.1, 0.30000000000000004, 1.0 / 3.0],
            vec![1e-300, 2.5e-10, 7.123456789012345e8],
        ];
        let s = SampleSet::from_rows(0.0, rows).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf, Format::Csv).unwrap();
        let back = read_sample(buf.as_slice(), 0.0, label()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn params_round_trip() {
        let p = DepthParams::from_moments(0.25, 1.0 / 3.0, 0.1, vec![0.2, 0.8]).unwrap();
        let text = params_to_json(&p);
        let v: Value = serde_json::from_str(&text).unwrap();
        for field in [
            "schema_version",
            "k",
            "start",
            "mu_last",
            "var_last",
            "u_bar",
            "eta",
            "big_m",
            "center",
        ] {
            assert!(v.get(field).is_some(), "missing {field}");
        }
        assert_eq!(params_from_json(&text, label()).unwrap(), p);
        let bad = text.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(params_from_json(&bad, label()).is_err());
    }

    #[test]
    fn rank_table_csv_shape() {
        let t = RankTable::from_values(Method::Product, &[0.9, 0.5, 0.7]);
        let mut buf = Vec::new();
        t.write_to(&mut buf, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "rank,index,depth,method");
        assert!(lines[1].starts_with("1,0,"));
    }

    #[test]
    fn property_report_json_lists_every_check() {
        let p = DepthParams::from_moments(0.0, 1.0, 0.5, vec![0.5, 0.5]).unwrap();
        let report = verify_properties(&p, 20, 1, None).unwrap();
        let json = report.to_json();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["checks"].as_array().unwrap().len(), report.checks.len());
        assert_eq!(json["passed"], Value::Bool(true));
    }
}
