//! Spectra, juice metadata and sensory labels, plus the canonical CSV format.
//!
//! A dataset file is UTF-8, comma separated, with this header (201
//! zero-padded absorbance columns on the 2 nm grid):
//!
//! ```text
//! sample_id,juice_id,variety,region,vineyard,block,harvest_type,replicate,tss,ph,ta,astringency,bitterness,herbaceous,a0200,a0202,...,a0600
//! ```
//!
//! Empty label cells mean "not scored". Numbers are written with six
//! significant digits; equal datasets serialize to equal bytes.

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absorbance values below this are treated as instrument error.
pub const ABSORBANCE_FLOOR: f64 = -0.05;
/// Sensory scale bounds (0 = absent, 9 = extremely intense).
pub const LABEL_RANGE: (f64, f64) = (0.0, 9.0);

pub const METADATA_COLUMNS: [&str; 14] = [
    "sample_id",
    "juice_id",
    "variety",
    "region",
    "vineyard",
    "block",
    "harvest_type",
    "replicate",
    "tss",
    "ph",
    "ta",
    "astringency",
    "bitterness",
    "herbaceous",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("unexpected column `{0}`")]
    UnexpectedColumn(String),
    #[error("row {row}, column `{column}`: malformed value `{value}`")]
    MalformedValue { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: {value} is outside {expected}")]
    OutOfRange {
        row: usize,
        column: String,
        value: f64,
        expected: &'static str,
    },
    #[error("row {row}: required field `{column}` is empty")]
    EmptyField { row: usize, column: String },
    #[error("row {row}: duplicate sample_id `{sample_id}`")]
    DuplicateSampleId { row: usize, sample_id: String },
    #[error("row {row}: spectrum has {found} points, grid has {expected}")]
    SpectrumLength { row: usize, found: usize, expected: usize },
    #[error("invalid wavelength grid {start}..={end} step {step}")]
    InvalidGrid { start: u32, end: u32, step: u32 },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for DatasetError {
    fn from(e: csv::Error) -> Self {
        DatasetError::Csv(e.to_string())
    }
}

/// Wavelength sampling of the spectrophotometer, in whole nanometers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WavelengthGrid {
    start_nm: u32,
    end_nm: u32,
    step_nm: u32,
}

impl WavelengthGrid {
    /// 200–600 nm every 2 nm (201 points).
    pub const STANDARD: WavelengthGrid = WavelengthGrid {
        start_nm: 200,
        end_nm: 600,
        step_nm: 2,
    };

    pub fn new(start_nm: u32, end_nm: u32, step_nm: u32) -> Result<Self, DatasetError> {
        if step_nm == 0 || start_nm >= end_nm || !(end_nm - start_nm).is_multiple_of(step_nm) {
            return Err(DatasetError::InvalidGrid {
                start: start_nm,
                end: end_nm,
                step: step_nm,
            });
        }
        Ok(Self {
            start_nm,
            end_nm,
            step_nm,
        })
    }

    pub fn start_nm(&self) -> u32 {
        self.start_nm
    }

    pub fn end_nm(&self) -> u32 {
        self.end_nm
    }

    pub fn step_nm(&self) -> u32 {
        self.step_nm
    }

    pub fn len(&self) -> usize {
        ((self.end_nm - self.start_nm) / self.step_nm) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wavelength_at(&self, index: usize) -> u32 {
        self.start_nm + index as u32 * self.step_nm
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len()).map(|i| self.wavelength_at(i))
    }

    pub fn index_of(&self, nm: u32) -> Option<usize> {
        if nm < self.start_nm || nm > self.end_nm || !(nm - self.start_nm).is_multiple_of(self.step_nm) {
            None
        } else {
            Some(((nm - self.start_nm) / self.step_nm) as usize)
        }
    }
}

impl Default for WavelengthGrid {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Column name of the absorbance at `nm`, e.g. `a0204`.
pub fn absorbance_column(nm: u32) -> String {
    format!("a{nm:04}")
}

/// Inverse of [`absorbance_column`].
pub fn parse_absorbance_column(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('a')?;
    if digits.len() != 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Absorbance values (AU), one per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Validates length against `grid`, finiteness and the negative floor.
    /// `row` is only used for error reporting.
    pub fn new(values: Vec<f64>, grid: &WavelengthGrid, row: usize) -> Result<Self, DatasetError> {
        if values.len() != grid.len() {
            return Err(DatasetError::SpectrumLength {
                row,
                found: values.len(),
                expected: grid.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            check_absorbance(v, row, grid.wavelength_at(i))?;
        }
        Ok(Self(values))
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_absorbance(v: f64, row: usize, nm: u32) -> Result<(), DatasetError> {
    if !v.is_finite() || v < ABSORBANCE_FLOOR {
        return Err(DatasetError::OutOfRange {
            row,
            column: absorbance_column(nm),
            value: v,
            expected: "[-0.05, inf) AU",
        });
    }
    Ok(())
}

/// Descriptive and chemical information about one juice replicate.
///
/// Everything except `juice_id` may be left empty: regression-only
/// datasets carry no origin information.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub juice_id: String,
    pub variety: String,
    pub region: String,
    pub vineyard: String,
    pub block: String,
    pub harvest_type: String,
    pub replicate: Option<u32>,
    /// Total soluble solids, °Brix.
    pub tss: Option<f64>,
    pub ph: Option<f64>,
    /// Total acidity, g/L.
    pub ta: Option<f64>,
}

impl SampleMetadata {
    fn validate(&self, row: usize) -> Result<(), DatasetError> {
        if self.juice_id.is_empty() {
            return Err(DatasetError::EmptyField {
                row,
                column: "juice_id".into(),
            });
        }
        if let Some(r) = self.replicate {
            if r < 1 {
                return Err(out_of_range(row, "replicate", r as f64, ">= 1"));
            }
        }
        if let Some(ph) = self.ph {
            if !(ph.is_finite() && ph > 0.0 && ph < 14.0) {
                return Err(out_of_range(row, "ph", ph, "(0, 14)"));
            }
        }
        if let Some(tss) = self.tss {
            if !(tss.is_finite() && tss >= 0.0) {
                return Err(out_of_range(row, "tss", tss, "[0, inf)"));
            }
        }
        if let Some(ta) = self.ta {
            if !(ta.is_finite() && ta >= 0.0) {
                return Err(out_of_range(row, "ta", ta, "[0, inf)"));
            }
        }
        Ok(())
    }
}

fn out_of_range(row: usize, column: &str, value: f64, expected: &'static str) -> DatasetError {
    DatasetError::OutOfRange {
        row,
        column: column.to_string(),
        value,
        expected,
    }
}

/// Panel-mean sensory scores on the 0–9 scale.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensoryLabels {
    pub astringency: Option<f64>,
    pub bitterness: Option<f64>,
    pub herbaceous: Option<f64>,
}

impl SensoryLabels {
    fn validate(&self, row: usize) -> Result<(), DatasetError> {
        for (name, value) in [
            ("astringency", self.astringency),
            ("bitterness", self.bitterness),
            ("herbaceous", self.herbaceous),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v >= LABEL_RANGE.0 && v <= LABEL_RANGE.1) {
                    return Err(out_of_range(row, name, v, "[0, 9]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: String,
    pub spectrum: Spectrum,
    pub metadata: SampleMetadata,
    pub labels: SensoryLabels,
}

/// An ordered collection of samples sharing one wavelength grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    grid: WavelengthGrid,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Builds a dataset, checking every sample. Row numbers in errors are
    /// 1-based sample positions.
    pub fn new(grid: WavelengthGrid, samples: Vec<Sample>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            let row = i + 1;
            if s.sample_id.is_empty() {
                return Err(DatasetError::EmptyField {
                    row,
                    column: "sample_id".into(),
                });
            }
            if s.spectrum.len() != grid.len() {
                return Err(DatasetError::SpectrumLength {
                    row,
                    found: s.spectrum.len(),
                    expected: grid.len(),
                });
            }
            for (j, &v) in s.spectrum.values().iter().enumerate() {
                check_absorbance(v, row, grid.wavelength_at(j))?;
            }
            s.metadata.validate(row)?;
            s.labels.validate(row)?;
            if !seen.insert(s.sample_id.as_str()) {
                return Err(DatasetError::DuplicateSampleId {
                    row,
                    sample_id: s.sample_id.clone(),
                });
            }
        }
        Ok(Self { grid, samples })
    }

    pub fn empty(grid: WavelengthGrid) -> Self {
        Self {
            grid,
            samples: Vec::new(),
        }
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Groups sample indices by juice, in order of first appearance.
    pub fn group_by_juice(&self) -> Vec<JuiceGroup> {
        let mut groups: Vec<JuiceGroup> = Vec::new();
        let mut position: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            let id = s.metadata.juice_id.as_str();
            match position.get(id) {
                Some(&g) => groups[g].indices.push(i),
                None => {
                    position.insert(id, groups.len());
                    groups.push(JuiceGroup {
                        juice_id: id.to_string(),
                        indices: vec![i],
                    });
                }
            }
        }
        groups
    }
}

/// All replicates of one juice treatment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JuiceGroup {
    pub juice_id: String,
    pub indices: Vec<usize>,
}

/// Full canonical header for `grid`.
pub fn canonical_header(grid: &WavelengthGrid) -> Vec<String> {
    METADATA_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(grid.wavelengths().map(absorbance_column))
        .collect()
}

/// Parses a dataset on the standard 200–600 nm grid.
pub fn parse_dataset_csv<R: Read>(source: R) -> Result<Dataset, DatasetError> {
    let grid = WavelengthGrid::STANDARD;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(source);

    let header = reader.headers()?.clone();
    let expected = canonical_header(&grid);
    let mut position = std::collections::HashMap::new();
    for (i, name) in header.iter().enumerate() {
        if !expected.iter().any(|e| e == name) || position.insert(name.to_string(), i).is_some() {
            return Err(DatasetError::UnexpectedColumn(name.to_string()));
        }
    }
    let mut columns = Vec::with_capacity(expected.len());
    for name in &expected {
        match position.get(name) {
            Some(&i) => columns.push(i),
            None => return Err(DatasetError::MissingColumn(name.clone())),
        }
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let field = |c: usize| record.get(columns[c]).unwrap_or("");
        let cell = Cell { row, names: &expected };

        let mut absorbance = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let c = METADATA_COLUMNS.len() + k;
            absorbance.push(cell.required_f64(c, field(c))?);
        }
        let metadata = SampleMetadata {
            juice_id: field(1).to_string(),
            variety: field(2).to_string(),
            region: field(3).to_string(),
            vineyard: field(4).to_string(),
            block: field(5).to_string(),
            harvest_type: field(6).to_string(),
            replicate: cell.optional_u32(7, field(7))?,
            tss: cell.optional_f64(8, field(8))?,
            ph: cell.optional_f64(9, field(9))?,
            ta: cell.optional_f64(10, field(10))?,
        };
        let labels = SensoryLabels {
            astringency: cell.optional_f64(11, field(11))?,
            bitterness: cell.optional_f64(12, field(12))?,
            herbaceous: cell.optional_f64(13, field(13))?,
        };
        samples.push(Sample {
            sample_id: field(0).to_string(),
            spectrum: Spectrum::new(absorbance, &grid, row)?,
            metadata,
            labels,
        });
    }
    Dataset::new(grid, samples)
}

struct Cell<'a> {
    row: usize,
    names: &'a [String],
}

impl Cell<'_> {
    fn malformed(&self, column: usize, value: &str) -> DatasetError {
        DatasetError::MalformedValue {
            row: self.row,
            column: self.names[column].clone(),
            value: value.to_string(),
        }
    }

    fn required_f64(&self, column: usize, value: &str) -> Result<f64, DatasetError> {
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.malformed(column, value)),
        }
    }

    fn optional_f64(&self, column: usize, value: &str) -> Result<Option<f64>, DatasetError> {
        if value.is_empty() {
            Ok(None)
        } else {
            self.required_f64(column, value).map(Some)
        }
    }

    fn optional_u32(&self, column: usize, value: &str) -> Result<Option<u32>, DatasetError> {
        if value.is_empty() {
            return Ok(None);
        }
        value
            .parse::<u32>()
            .map(Some)
            .map_err(|_| self.malformed(column, value))
    }
}

/// Renders `v` with six significant digits, shortest form.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("scientific rendering parses");
    format!("{rounded}")
}

fn format_optional(v: Option<f64>) -> String {
    v.map(format_decimal).unwrap_or_default()
}

/// Serializes `dataset` in the canonical format.
pub fn write_dataset_csv(dataset: &Dataset) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(canonical_header(dataset.grid()))
        .expect("writing to memory");
    for s in dataset.samples() {
        let m = &s.metadata;
        let mut record = vec![
            s.sample_id.clone(),
            m.juice_id.clone(),
            m.variety.clone(),
            m.region.clone(),
            m.vineyard.clone(),
            m.block.clone(),
            m.harvest_type.clone(),
            m.replicate.map(|r| r.to_string()).unwrap_or_default(),
            format_optional(m.tss),
            format_optional(m.ph),
            format_optional(m.ta),
            format_optional(s.labels.astringency),
            format_optional(s.labels.bitterness),
            format_optional(s.labels.herbaceous),
        ];
        record.extend(s.spectrum.values().iter().map(|&v| format_decimal(v)));
        writer.write_record(&record).expect("writing to memory");
    }
    writer.into_inner().expect("flushing to memory")
}
