//! Group-annotated datasets, (group, label) partitions, and sequential splits.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Predictor matrix with a separate group column and binary labels.
///
/// Rows of `z` are stored in standard (row-major) layout so a row can be
/// borrowed as a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    z: Array2<f64>,
    group: Vec<usize>,
    label: Vec<u8>,
    feature_names: Vec<String>,
    group_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        z: Array2<f64>,
        group: Vec<usize>,
        label: Vec<u8>,
        feature_names: Vec<String>,
        group_names: Vec<String>,
    ) -> Result<Self> {
        let n = z.nrows();
        if group.len() != n || label.len() != n {
            return Err(Error::Dimension(format!(
                "z has {n} rows, group {} and label {}",
                group.len(),
                label.len()
            )));
        }
        if feature_names.len() != z.ncols() {
            return Err(Error::Dimension(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                z.ncols()
            )));
        }
        let num_groups = group_names.len();
        for (row, &g) in group.iter().enumerate() {
            if g >= num_groups {
                return Err(Error::GroupOutOfRange {
                    row,
                    index: g,
                    num_groups,
                });
            }
        }
        if let Some(row) = label.iter().position(|&y| y > 1) {
            return Err(Error::InvalidLabel { row });
        }
        let z = if z.is_standard_layout() {
            z
        } else {
            z.as_standard_layout().into_owned()
        };
        Ok(Dataset {
            z,
            group,
            label,
            feature_names,
            group_names,
        })
    }

    /// Builds a dataset with generated names `g0..` and `z1..`.
    pub fn with_default_names(
        z: Array2<f64>,
        group: Vec<usize>,
        label: Vec<u8>,
        num_groups: usize,
    ) -> Result<Self> {
        let features = (1..=z.ncols()).map(|k| format!("z{k}")).collect();
        let groups = (0..num_groups).map(|a| format!("g{a}")).collect();
        Dataset::new(z, group, label, features, groups)
    }

    pub fn n(&self) -> usize {
        self.group.len()
    }

    pub fn p(&self) -> usize {
        self.z.ncols()
    }

    pub fn num_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn z(&self) -> &Array2<f64> {
        &self.z
    }

    pub fn z_row(&self, i: usize) -> &[f64] {
        let p = self.p();
        let flat = self.z.as_slice().expect("standard layout");
        &flat[i * p..(i + 1) * p]
    }

    pub fn groups(&self) -> &[usize] {
        &self.group
    }

    pub fn labels(&self) -> &[u8] {
        &self.label
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    /// Copies the listed rows, in the given order, into a new dataset.
    /// Indices may repeat.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let p = self.p();
        let mut z = Vec::with_capacity(rows.len() * p);
        for &i in rows {
            z.extend_from_slice(self.z_row(i));
        }
        Dataset {
            z: Array2::from_shape_vec((rows.len(), p), z).expect("shape"),
            group: rows.iter().map(|&i| self.group[i]).collect(),
            label: rows.iter().map(|&i| self.label[i]).collect(),
            feature_names: self.feature_names.clone(),
            group_names: self.group_names.clone(),
        }
    }

    /// Row counts per (group, label), indexed `[group][label]`.
    pub fn cell_counts(&self) -> Vec<[usize; 2]> {
        let mut counts = vec![[0usize; 2]; self.num_groups()];
        for (&g, &y) in self.group.iter().zip(&self.label) {
            counts[g][y as usize] += 1;
        }
        counts
    }

    /// Writes the dataset as CSV with columns `group`, features, `y`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["group".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push("y".to_string());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.p() + 2);
        for i in 0..self.n() {
            record.clear();
            record.push(self.group_names[self.group[i]].clone());
            record.extend(self.z_row(i).iter().map(|v| v.to_string()));
            record.push(self.label[i].to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Names of the group and label columns in a CSV file. All remaining columns
/// are numeric predictors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRoles {
    pub group: String,
    pub label: String,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        ColumnRoles {
            group: "group".into(),
            label: "y".into(),
        }
    }
}

/// Loads a dataset from a CSV file. Group levels are indexed in order of first
/// appearance; reported row numbers are 1-based data rows (header excluded).
pub fn load_csv(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(file, roles)
}

pub fn read_csv<R: Read>(reader: R, roles: &ColumnRoles) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let group_col = find(&roles.group)?;
    let label_col = find(&roles.label)?;
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != group_col && c != label_col)
        .collect();
    let feature_names = feature_cols.iter().map(|&c| headers[c].to_string()).collect();

    let mut levels: HashMap<String, usize> = HashMap::new();
    let mut group_names = Vec::new();
    let mut group = Vec::new();
    let mut label = Vec::new();
    let mut z = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::CsvRow {
            row,
            message: e.to_string(),
        })?;
        let g = record[group_col].trim().to_string();
        let next = levels.len();
        let index = *levels.entry(g.clone()).or_insert_with(|| {
            group_names.push(g);
            next
        });
        group.push(index);

        let raw = record[label_col].trim();
        let y: f64 = raw.parse().map_err(|_| Error::CsvRow {
            row,
            message: format!("label {raw:?} is not numeric"),
        })?;
        if y != 0.0 && y != 1.0 {
            return Err(Error::CsvRow {
                row,
                message: format!("label {raw:?} is not 0 or 1"),
            });
        }
        label.push(y as u8);

        for &c in &feature_cols {
            let cell = record[c].trim();
            let v: f64 = cell.parse().map_err(|_| Error::CsvRow {
                row,
                message: format!("column {:?}: {cell:?} is not numeric", &headers[c]),
            })?;
            z.push(v);
        }
    }
    let n = group.len();
    let z = Array2::from_shape_vec((n, feature_cols.len()), z).expect("shape");
    Dataset::new(z, group, label, feature_names, group_names)
}

/// Flat index of the `(group, label)` cell.
#[inline]
pub fn cell_index(group: usize, label: u8) -> usize {
    2 * group + label as usize
}

/// Row indices split by (group, label): the cells `G_a^y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLabelPartition {
    num_groups: usize,
    cells: Vec<Vec<usize>>,
}

impl GroupLabelPartition {
    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn cell(&self, group: usize, label: u8) -> &[usize] {
        &self.cells[cell_index(group, label)]
    }

    pub fn count(&self, group: usize, label: u8) -> usize {
        self.cell(group, label).len()
    }

    /// Cells in (group, label) lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, u8), &[usize])> {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, c)| ((k / 2, (k % 2) as u8), c.as_slice()))
    }
}

pub fn partition_by_group_label(data: &Dataset) -> GroupLabelPartition {
    let num_groups = data.num_groups();
    let mut cells = vec![Vec::new(); 2 * num_groups];
    for (i, (&g, &y)) in data.groups().iter().zip(data.labels()).enumerate() {
        cells[cell_index(g, y)].push(i);
    }
    GroupLabelPartition { num_groups, cells }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub test: f64,
    pub val: f64,
}

impl SplitFractions {
    pub fn new(train: f64, test: f64, val: f64) -> Result<Self> {
        let ok = [train, test, val].iter().all(|f| *f >= 0.0 && f.is_finite())
            && (train + test + val - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::InvalidFractions(train, test, val));
        }
        Ok(SplitFractions { train, test, val })
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.6,
            test: 0.2,
            val: 0.2,
        }
    }
}

/// Per-cell train/test/validation index lists (`R_a^y`, `T_a^y`, `V_a^y`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestValSplit {
    num_groups: usize,
    pub train: Vec<Vec<usize>>,
    pub test: Vec<Vec<usize>>,
    pub val: Vec<Vec<usize>>,
    pub fractions: SplitFractions,
}

impl TrainTestValSplit {
    /// Uses every row of every cell for training.
    pub fn train_only(part: &GroupLabelPartition) -> Self {
        let empty = vec![Vec::new(); part.cells.len()];
        TrainTestValSplit {
            num_groups: part.num_groups,
            train: part.cells.clone(),
            test: empty.clone(),
            val: empty,
            fractions: SplitFractions {
                train: 1.0,
                test: 0.0,
                val: 0.0,
            },
        }
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn train_cell(&self, group: usize, label: u8) -> &[usize] {
        &self.train[cell_index(group, label)]
    }

    pub fn test_cell(&self, group: usize, label: u8) -> &[usize] {
        &self.test[cell_index(group, label)]
    }

    pub fn val_cell(&self, group: usize, label: u8) -> &[usize] {
        &self.val[cell_index(group, label)]
    }

    pub fn train_indices(&self) -> Vec<usize> {
        self.train.concat()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        self.test.concat()
    }

    pub fn val_indices(&self) -> Vec<usize> {
        self.val.concat()
    }
}

/// Order-preserving split of every cell: the first `floor(f_train * m)`
/// indices go to train, the next `floor(f_test * m)` to test, the rest to val.
pub fn sequential_split(
    part: &GroupLabelPartition,
    fractions: SplitFractions,
) -> Result<TrainTestValSplit> {
    let fractions = SplitFractions::new(fractions.train, fractions.test, fractions.val)?;
    let mut train = Vec::with_capacity(part.cells.len());
    let mut test = Vec::with_capacity(part.cells.len());
    let mut val = Vec::with_capacity(part.cells.len());
    for cell in &part.cells {
        let m = cell.len();
        let n_train = floor_count(fractions.train, m);
        let n_test = floor_count(fractions.test, m).min(m - n_train);
        train.push(cell[..n_train].to_vec());
        test.push(cell[n_train..n_train + n_test].to_vec());
        val.push(cell[n_train + n_test..].to_vec());
    }
    Ok(TrainTestValSplit {
        num_groups: part.num_groups,
        train,
        test,
        val,
        fractions,
    })
}

// 0.29 * 100 evaluates to 28.999999999999996; absorb that before flooring.
fn floor_count(fraction: f64, m: usize) -> usize {
    ((fraction * m as f64 + 1e-9).floor() as usize).min(m)
}
