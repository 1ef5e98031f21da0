//! LIBSVM sparse text format: `<label> <index>:<value> ...`, one sample per
//! line, 1-based strictly increasing indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::ArrayView1;

use crate::error::{Error, Result};

/// Rows stored in compressed sparse row form with 0-based feature indices.
/// Labels are normalised to `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    row_ptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    labels: Vec<f64>,
    n_features: usize,
}

impl SparseDataset {
    /// Builds a dataset from `(label, [(index, value)])` rows with 0-based
    /// indices. `n_features` is raised to cover the largest index present.
    pub fn from_rows<I>(rows: I, n_features: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<(usize, f64)>)>,
    {
        let mut ds = SparseDataset {
            row_ptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            labels: Vec::new(),
            n_features,
        };
        for (line, (label, entries)) in rows.into_iter().enumerate() {
            let label = normalize_label(label).ok_or_else(|| Error::Parse {
                line: line + 1,
                message: format!("label {label} is not one of -1, 0, +1"),
            })?;
            let mut prev = None;
            for &(idx, value) in &entries {
                if prev.is_some_and(|p| idx <= p) {
                    return Err(Error::Parse {
                        line: line + 1,
                        message: format!("feature index {} is not ascending", idx + 1),
                    });
                }
                prev = Some(idx);
                ds.push_entry(idx, value);
            }
            ds.finish_row(label);
        }
        Ok(ds)
    }

    fn push_entry(&mut self, idx: usize, value: f64) {
        self.indices.push(idx as u32);
        self.values.push(value);
        self.n_features = self.n_features.max(idx + 1);
    }

    fn finish_row(&mut self, label: f64) {
        self.labels.push(label);
        self.row_ptr.push(self.indices.len());
    }

    /// Number of samples `m`.
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    /// Feature dimension `d` (the largest index seen).
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// `(indices, values)` of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// `⟨x_i, v⟩` for a dense `v` of length `d`.
    pub fn row_dot(&self, i: usize, v: ArrayView1<f64>) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).fold(0.0, |acc, (&j, &x)| acc + x * v[j as usize])
    }

    /// Same dataset with every feature value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SparseDataset {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

fn normalize_label(v: f64) -> Option<f64> {
    if v == 1.0 {
        Some(1.0)
    } else if v == -1.0 || v == 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

/// Streams a LIBSVM file line by line. Blank lines are skipped; line numbers
/// in errors are 1-based physical line numbers.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<SparseDataset> {
    let mut ds = SparseDataset {
        row_ptr: vec![0],
        indices: Vec::new(),
        values: Vec::new(),
        labels: Vec::new(),
        n_features: 0,
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let err = |message: String| Error::Parse { line: lineno, message };
        let mut tokens = line.split_ascii_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("invalid label {label_tok:?}")))?;
        let label = normalize_label(label).ok_or_else(|| err(format!("unmappable label {label_tok:?}")))?;
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("malformed token {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("invalid feature index in {tok:?}")))?;
            if idx == 0 {
                return Err(err(format!("feature indices are 1-based, got {tok:?}")));
            }
            if idx <= prev {
                return Err(err(format!("feature index {idx} is not ascending")));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("non-numeric value in {tok:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value in {tok:?}")));
            }
            prev = idx;
            ds.push_entry(idx - 1, val);
        }
        ds.finish_row(label);
    }
    Ok(ds)
}

pub fn read_libsvm_file(path: impl AsRef<Path>) -> Result<SparseDataset> {
    let file = File::open(path)?;
    parse_libsvm(BufReader::new(file))
}

/// Writes `±1` labels and 1-based indices; values use the shortest
/// round-tripping representation.
pub fn write_libsvm<W: Write>(ds: &SparseDataset, mut sink: W) -> Result<()> {
    for i in 0..ds.n_samples() {
        let label = if ds.label(i) > 0.0 { "+1" } else { "-1" };
        write!(sink, "{label}")?;
        let (idx, val) = ds.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            write!(sink, " {}:{}", j + 1, v)?;
        }
        writeln!(sink)?;
    }
    sink.flush()?;
    Ok(())
}
