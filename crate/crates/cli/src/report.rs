use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

/// Where a number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed form evaluated directly.
    Formula,
    /// Numerical integration or a sampled path.
    Quadrature,
    /// Best over a parameter sweep.
    Sweep,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Formula => "formula",
            Provenance::Quadrature => "quadrature",
            Provenance::Sweep => "sweep",
        }
    }
}

/// One summary line: a quantity, optionally checked against a limit.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub name: String,
    pub value: f64,
    /// `value <= limit` when present.
    pub limit: Option<f64>,
    pub pass: Option<bool>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub preset: String,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub summary: Vec<SummaryRow>,
    pub table: Table,
    pub pass: bool,
}

impl Report {
    pub fn new(preset: &str, dims: &[usize], seed: u64) -> Self {
        Self {
            preset: preset.into(),
            dims: dims.to_vec(),
            seed,
            parameters: BTreeMap::new(),
            summary: Vec::new(),
            table: Table::default(),
            pass: true,
        }
    }

    pub fn param(&mut self, name: &str, value: impl Into<Value>) {
        self.parameters.insert(name.into(), value.into());
    }

    pub fn value(&mut self, name: &str, value: f64, provenance: Provenance) {
        self.summary.push(SummaryRow {
            name: name.into(),
            value,
            limit: None,
            pass: None,
            provenance,
        });
    }

    /// Record `value <= limit`; NaN fails.
    pub fn check(&mut self, name: &str, value: f64, limit: f64, provenance: Provenance) {
        let pass = value <= limit;
        self.pass &= pass;
        self.summary.push(SummaryRow {
            name: name.into(),
            value,
            limit: Some(limit),
            pass: Some(pass),
            provenance,
        });
    }

    /// Record a yes/no condition; the value column is 1 for true.
    pub fn check_flag(&mut self, name: &str, ok: bool, provenance: Provenance) {
        self.pass &= ok;
        self.summary.push(SummaryRow {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: None,
            pass: Some(ok),
            provenance,
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &SummaryRow> {
        self.summary.iter().filter(|r| r.pass == Some(false))
    }
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

pub fn table_csv(t: &Table) -> String {
    let mut out = t.columns.join(",");
    out.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(csv_field).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("name,value,limit,pass,provenance\n");
    for r in rows {
        let limit = r.limit.map(|l| Value::from(l).to_string()).unwrap_or_default();
        let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{limit},{pass},{}",
            r.name,
            Value::from(r.value),
            r.provenance.as_str()
        );
    }
    out
}

/// `run.csv` → `run.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

/// Documents to write: `(destination, contents)`; `None` is standard output.
pub fn render(report: &Report, format: Format, out: Option<&Path>) -> Vec<(Option<PathBuf>, String)> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            vec![(out.map(Path::to_path_buf), s)]
        }
        Format::Csv => match out {
            Some(p) => vec![
                (Some(p.to_path_buf()), table_csv(&report.table)),
                (Some(summary_path(p)), summary_csv(&report.summary)),
            ],
            None => vec![(None, format!("{}\n{}", table_csv(&report.table), summary_csv(&report.summary)))],
        },
    }
}

/// Write every document through a temporary sibling and rename; on any
/// failure nothing new is left behind.
pub fn write_all(docs: &[(Option<PathBuf>, String)]) -> std::io::Result<()> {
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| {
        for (dest, body) in docs {
            match dest {
                None => std::io::stdout().write_all(body.as_bytes())?,
                Some(p) => {
                    let tmp = p.with_file_name(format!(
                        ".{}.partial",
                        p.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
                    ));
                    staged.push((tmp.clone(), p.clone()));
                    fs::write(&tmp, body)?;
                }
            }
        }
        let mut done = Vec::new();
        for (tmp, p) in &staged {
            if let Err(e) = fs::rename(tmp, p) {
                for d in done {
                    let _ = fs::remove_file(d);
                }
                return Err(e);
            }
            done.push(p.clone());
        }
        Ok(())
    })();
    if result.is_err() {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}
