//! Reading and writing data sets, distance matrices, dendrograms,
//! partitions, experiment reports and run manifests.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dendrogram::DendrogramModel;
use crate::directions::DirectionSet;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::grid::{validate_common_grid, DataSet, FunctionalSample, Grid, Partition};
use crate::simulate::ExperimentReport;

/// Input layout for functional data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    /// One file per data set: header row of grid times, one row per sample.
    WideCsv,
    /// One file with columns `set_id,sample_id,t,value`.
    LongCsv,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wide" | "wide-csv" => Ok(DataFormat::WideCsv),
            "long" | "long-csv" => Ok(DataFormat::LongCsv),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

/// Full-precision decimal form (17 significant digits).
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(path: &Path, line: Option<u64>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: line.map(|l| l as usize),
        message: message.into(),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn open_csv(path: &Path, has_headers: bool) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, None, format!("cannot open: {e}")))
}

fn parse_value(path: &Path, line: Option<u64>, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue {
            value: v,
            context: format!(
                "{}{}",
                path.display(),
                line.map(|l| format!(" line {l}")).unwrap_or_default()
            ),
        });
    }
    Ok(v)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// One data set from a wide CSV file; the label is the file stem.
pub fn load_wide_csv(path: &Path) -> Result<DataSet> {
    let mut reader = open_csv(path, false)?;
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| parse_err(path, Some(1), "empty file"))?
        .map_err(|e| parse_err(path, e.position().map(|p| p.line()), e.to_string()))?;
    let times = header
        .iter()
        .map(|f| parse_value(path, Some(1), f, "grid time"))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::from_times(times).map_err(|e| parse_err(path, Some(1), e.to_string()))?;

    let mut samples = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| parse_err(path, e.position().map(|p| p.line()), e.to_string()))?;
        let line = rec.position().map(|p| p.line());
        if rec.len() != grid.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} values, found {}", grid.len(), rec.len()),
            ));
        }
        let values = rec
            .iter()
            .map(|f| parse_value(path, line, f, "value"))
            .collect::<Result<Vec<_>>>()?;
        samples.push(FunctionalSample::new(values)?);
    }
    DataSet::new(stem(path), samples, grid).map_err(|e| match e {
        Error::InvalidCount(m) => parse_err(path, None, m),
        other => other,
    })
}

struct LongSample {
    id: String,
    first_line: Option<u64>,
    cells: Vec<(f64, f64)>,
}

/// Data sets from one long CSV file, reassembled in order of first appearance.
pub fn load_long_csv(path: &Path) -> Result<Vec<DataSet>> {
    let mut reader = open_csv(path, true)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, Some(1), e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(path, Some(1), format!("missing column {name:?}")))
    };
    let (c_set, c_sample, c_t, c_value) = (col("set_id")?, col("sample_id")?, col("t")?, col("value")?);

    let mut sets: Vec<(String, Vec<LongSample>, HashMap<String, usize>)> = Vec::new();
    let mut set_index: HashMap<String, usize> = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map(|p| p.line()), e.to_string()))?;
        let line = rec.position().map(|p| p.line());
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| parse_err(path, line, "missing field"))
        };
        let set_id = field(c_set)?.to_string();
        let sample_id = field(c_sample)?.to_string();
        let t = parse_value(path, line, field(c_t)?, "time")?;
        let value = parse_value(path, line, field(c_value)?, "value")?;

        let si = *set_index.entry(set_id.clone()).or_insert_with(|| {
            sets.push((set_id, Vec::new(), HashMap::new()));
            sets.len() - 1
        });
        let (_, samples, sample_index) = &mut sets[si];
        let ni = *sample_index.entry(sample_id.clone()).or_insert_with(|| {
            samples.push(LongSample {
                id: sample_id,
                first_line: line,
                cells: Vec::new(),
            });
            samples.len() - 1
        });
        samples[ni].cells.push((t, value));
    }
    if sets.is_empty() {
        return Err(parse_err(path, None, "no data rows"));
    }

    let mut out = Vec::with_capacity(sets.len());
    for (set_id, samples, _) in sets {
        let mut times: Vec<f64> = samples
            .iter()
            .flat_map(|s| s.cells.iter().map(|c| c.0))
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let grid = Grid::from_times(times.clone()).map_err(|e| {
            parse_err(path, None, format!("set {set_id:?}: {e}"))
        })?;
        let mut functional = Vec::with_capacity(samples.len());
        for mut s in samples {
            s.cells.sort_by(|a, b| a.0.total_cmp(&b.0));
            if s.cells.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(parse_err(
                    path,
                    s.first_line,
                    format!("set {set_id:?} sample {:?} has a duplicated time", s.id),
                ));
            }
            if s.cells.len() != times.len() {
                return Err(parse_err(
                    path,
                    s.first_line,
                    format!(
                        "set {set_id:?} sample {:?} has {} of {} grid times",
                        s.id,
                        s.cells.len(),
                        times.len()
                    ),
                ));
            }
            functional.push(FunctionalSample::new(s.cells.iter().map(|c| c.1).collect())?);
        }
        out.push(DataSet::new(set_id, functional, grid)?);
    }
    Ok(out)
}

/// Loads all inputs and checks that they share one grid.
pub fn load_datasets(paths: &[PathBuf], format: DataFormat) -> Result<Vec<DataSet>> {
    let sets = match format {
        DataFormat::WideCsv => paths
            .iter()
            .map(|p| load_wide_csv(p))
            .collect::<Result<Vec<_>>>()?,
        DataFormat::LongCsv => {
            let mut all = Vec::new();
            for p in paths {
                all.extend(load_long_csv(p)?);
            }
            all
        }
    };
    let mut seen = HashMap::new();
    for ds in &sets {
        if seen.insert(ds.id().to_string(), ()).is_some() {
            return Err(Error::LabelMismatch(format!("duplicate data set label {:?}", ds.id())));
        }
    }
    validate_common_grid(&sets)?;
    Ok(sets)
}

pub fn wide_csv_string(ds: &DataSet) -> String {
    let mut out = String::new();
    let header: Vec<String> = ds.grid().times().iter().map(|&t| fmt_full(t)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for s in ds.samples() {
        let row: Vec<String> = s.values().iter().map(|&v| fmt_full(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn long_csv_string(sets: &[DataSet]) -> String {
    let mut out = String::from("set_id,sample_id,t,value\n");
    for ds in sets {
        for (n, s) in ds.samples().iter().enumerate() {
            for (&t, &v) in ds.grid().times().iter().zip(s.values()) {
                let _ = writeln!(out, "{},{},{},{}", ds.id(), n, fmt_full(t), fmt_full(v));
            }
        }
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn save_wide_csv(ds: &DataSet, path: &Path) -> Result<()> {
    write_file(path, &wide_csv_string(ds))
}

/// Square matrix with a header row of labels and the label leading each row.
pub fn distance_matrix_csv(m: &DistanceMatrix) -> String {
    let mut out = String::from("label");
    for l in m.labels() {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (i, l) in m.labels().iter().enumerate() {
        out.push_str(l);
        for j in 0..m.len() {
            let _ = write!(out, ",{}", fmt_full(m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// `label,cluster` rows in label order.
pub fn partition_csv(p: &Partition) -> String {
    let mut out = String::from("label,cluster\n");
    for (l, c) in p.labels().iter().zip(p.assignment()) {
        let _ = writeln!(out, "{l},{c}");
    }
    out
}

/// Directions as columns, one row per grid time.
pub fn directions_csv(grid: &Grid, dirs: &DirectionSet) -> String {
    let mut out = String::from("t");
    for m in 0..dirs.len() {
        let _ = write!(out, ",b{m}");
    }
    out.push('\n');
    for (i, &t) in grid.times().iter().enumerate() {
        out.push_str(&fmt_full(t));
        for p in dirs.paths() {
            let _ = write!(out, ",{}", fmt_full(p[i]));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct DendrogramJson {
    pub labels: Vec<String>,
    pub merges: Vec<MergeJson>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct MergeJson {
    pub step: usize,
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub height: f64,
}

pub fn dendrogram_json(d: &DendrogramModel) -> String {
    let names = |ix: &[usize]| ix.iter().map(|&i| d.labels()[i].clone()).collect();
    let doc = DendrogramJson {
        labels: d.labels().to_vec(),
        merges: d
            .merges()
            .iter()
            .enumerate()
            .map(|(k, m)| MergeJson {
                step: k + 1,
                left: names(&m.left),
                right: names(&m.right),
                height: m.height,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("dendrogram serializes") + "\n"
}

pub const REPORT_HEADER: &str = "model,N,sigma,proportion_correct,type1,type2";

/// Report rows without the header line.
pub fn report_rows(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            report.model, c.n, c.sigma, c.proportion_correct, c.type1_rate, c.type2_rate
        );
    }
    out
}

pub fn report_csv(reports: &[ExperimentReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        out.push_str(&report_rows(r));
    }
    out
}

/// Line chart of proportion correct against N, one polyline per sigma.
pub fn report_svg(report: &ExperimentReport) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 48.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let ns: Vec<usize> = report.cells.iter().map(|c| c.n).collect();
    let (n_min, n_max) = (
        *ns.iter().min().unwrap_or(&0) as f64,
        *ns.iter().max().unwrap_or(&1) as f64,
    );
    let span = if n_max > n_min { n_max - n_min } else { 1.0 };
    let x = |n: usize| PAD + (n as f64 - n_min) / span * (W - 2.0 * PAD);
    let y = |p: f64| H - PAD - p * (H - 2.0 * PAD);

    let mut sigmas: Vec<usize> = report.cells.iter().map(|c| c.sigma).collect();
    sigmas.sort_unstable();
    sigmas.dedup();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}: proportion of correct partitions</text>"#,
        W / 2.0,
        report.model
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#,
        H - PAD
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{tick}</text>"#,
            PAD - 6.0,
            y(tick) + 4.0
        );
    }
    let mut n_ticks = ns.clone();
    n_ticks.sort_unstable();
    n_ticks.dedup();
    for n in n_ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#,
            x(n),
            H - PAD + 16.0
        );
    }
    for (k, sigma) in sigmas.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = report
            .cells
            .iter()
            .filter(|c| c.sigma == *sigma)
            .map(|c| format!("{:.2},{:.2}", x(c.n), y(c.proportion_correct)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">sigma = {sigma}</text>"#,
            W - PAD - 70.0,
            PAD + 14.0 * k as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Record of one `cluster` run: enough to repeat it exactly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ManifestConfig,
    pub inputs: Vec<InputFingerprint>,
    pub grid: GridSummary,
    pub outputs: ManifestOutputs,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestConfig {
    pub alpha: f64,
    pub directions: usize,
    pub sigma: Option<usize>,
    pub constant_c: f64,
    pub seed: u64,
    pub quadrature: String,
    pub delta_grid_size: usize,
    pub format: DataFormat,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InputFingerprint {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridSummary {
    pub points: usize,
    pub horizon: f64,
    pub sets: Vec<SetSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SetSummary {
    pub id: String,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestOutputs {
    pub gamma_star: f64,
    pub delta: f64,
    pub v_star: f64,
    pub num_clusters: usize,
    pub distance_matrix: String,
    pub dendrogram: String,
    pub partition: String,
    pub gamma_star_file: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<manifest>"),
            line: Some(e.line()),
            message: e.to_string(),
        })
    }
}
