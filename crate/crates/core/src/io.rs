//! CSV ingestion and atomic output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::CurveSample;
use crate::data::DataMatrix;
use crate::dbscan::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Tsv,
}

impl TableFormat {
    fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads one point per row. A first row that does not parse as numbers is
/// taken as a header and skipped.
pub fn load_matrix(path: &Path, format: TableFormat) -> Result<DataMatrix> {
    parse_matrix(&read_to_string(path)?, format)
}

pub fn parse_matrix(text: &str, format: TableFormat) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut n_rows = 0;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(index + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.iter().all(|cell| cell.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if index == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: format!("non-numeric cell: {e}"),
                })
            }
        };
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value in column {}", bad + 1),
            });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("ragged row: {} columns, expected {w}", row.len()),
                })
            }
            Some(_) => {}
        }
        values.extend(row);
        n_rows += 1;
    }
    let width = width.ok_or_else(|| Error::Empty("no numeric rows in input".into()))?;
    DataMatrix::new(n_rows, width, values)
}

/// Reads one integer label per line, `-1` meaning noise.
pub fn load_labels(path: &Path) -> Result<Vec<Label>> {
    parse_labels(&read_to_string(path)?)
}

pub fn parse_labels(text: &str) -> Result<Vec<Label>> {
    let labels = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 1;
            let code: i64 = line.trim().parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("expected an integer label, got {line:?}: {e}"),
            })?;
            Label::from_code(code).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if labels.is_empty() {
        return Err(Error::Empty("label file has no lines".into()));
    }
    Ok(labels)
}

pub fn format_labels(labels: &[Label]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_code().to_string());
        out.push('\n');
    }
    out
}

pub fn format_curve(curve: &[CurveSample]) -> String {
    let mut out = String::from("epsilon,k,noise_fraction\n");
    for s in curve {
        out.push_str(&format!("{},{},{}\n", s.epsilon, s.k, s.noise));
    }
    out
}

pub fn parse_curve(text: &str) -> Result<Vec<CurveSample>> {
    let mut curve = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line.trim().starts_with("epsilon") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(parse_err(format!("expected 3 columns, got {}", cells.len())));
        }
        curve.push(CurveSample {
            epsilon: cells[0].parse().map_err(|e| parse_err(format!("epsilon: {e}")))?,
            k: cells[1].parse().map_err(|e| parse_err(format!("k: {e}")))?,
            noise: cells[2]
                .parse()
                .map_err(|e| parse_err(format!("noise_fraction: {e}")))?,
        });
    }
    if curve.is_empty() {
        return Err(Error::Empty("curve file has no rows".into()));
    }
    Ok(curve)
}

pub fn format_matrix(x: &DataMatrix) -> String {
    let mut out = String::new();
    for row in x.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Files staged in temporaries and renamed into place together, so a
/// failed run leaves nothing behind.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
            tmp.write_all(contents).map_err(|e| Error::io(tmp.path(), e))?;
            tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_examples() {
        let x = parse_matrix("0,0\n1,0\n", TableFormat::Csv).unwrap();
        assert_eq!((x.n_points(), x.n_dims()), (2, 2));
        let h = parse_matrix("x,y\n0,0\n", TableFormat::Csv).unwrap();
        assert_eq!((h.n_points(), h.n_dims()), (1, 2));
        match parse_matrix("0,0\n1\n", TableFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_errors() {
        assert!(matches!(parse_matrix("", TableFormat::Csv), Err(Error::Empty(_))));
        assert!(matches!(parse_matrix("x,y\n", TableFormat::Csv), Err(Error::Empty(_))));
        match parse_matrix("0,0\n1,a\n", TableFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_matrix("0,NaN\n", TableFormat::Csv).is_err());
    }

    #[test]
    fn tsv_input() {
        let x = parse_matrix("1\t2\t3\n4\t5\t6\n", TableFormat::Tsv).unwrap();
        assert_eq!(x.row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn label_examples() {
        assert_eq!(
            parse_labels("0\n0\n-1\n").unwrap(),
            vec![Label::Cluster(0), Label::Cluster(0), Label::Noise]
        );
        assert!(matches!(parse_labels(""), Err(Error::Empty(_))));
        assert_eq!(parse_labels("2\n2\n2\n").unwrap(), vec![Label::Cluster(2); 3]);
        assert!(matches!(parse_labels("1\nx\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_labels("-3\n").is_err());
    }

    #[test]
    fn curve_text_round_trip() {
        let curve = vec![
            CurveSample {
                epsilon: 0.1,
                k: 0,
                noise: 1.0,
            },
            CurveSample {
                epsilon: 0.30000000000000004,
                k: 3,
                noise: 0.125,
            },
        ];
        assert_eq!(parse_curve(&format_curve(&curve)).unwrap(), curve);
    }

    #[test]
    fn output_set_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::default();
        out.add("a.txt", "alpha");
        out.add("b.txt", "beta");
        let written = out.commit(dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(fs::read_to_string(dir.path().join("b.txt")).unwrap(), "beta");
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 2);
    }
}
