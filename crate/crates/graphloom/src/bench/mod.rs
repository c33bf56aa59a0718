//! Benchmark harness: synthetic dataset generation, the strategy
//! comparison grid, and report rendering.
//!
//! An experiment is a grid of cells, one per (strategy, dataset fraction,
//! attribute count). Every cell samples the dataset at its fraction,
//! builds a single-class mapping with that many attribute columns, then
//! times the RDFization passes alone: warmup runs first, then `repeats`
//! measured runs, reporting the median (plus mean and standard deviation)
//! of per-run wall-clock seconds. Output goes to a scratch file that is
//! removed between runs. Everything is single-threaded so the timings
//! compare passes, not schedulers.

mod generate;
mod render;
mod run;

pub use generate::{generate_dataset, DatasetSummary, GeneratorSpec};
pub use render::{render_report, ReportFormat};
pub use run::run_experiment;

use std::path::PathBuf;

use crate::ingest::IngestError;
use crate::mapping::SourceFormat;
use crate::normalize::NormalizeError;
use crate::rdf::{RdfizeError, Strategy};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Rdfize(#[from] RdfizeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// A cross-strategy or cross-run triple-count mismatch. This means a
    /// strategy bug, never a configuration problem.
    #[error("benchmark invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Sampling fractions, each in (0, 1].
    #[serde(default = "defaults::fractions")]
    pub fractions: Vec<f64>,
    /// How many value columns the generated mapping reads per cell.
    #[serde(default = "defaults::attribute_counts")]
    pub attribute_counts: Vec<u32>,
    #[serde(default = "defaults::strategies")]
    pub strategies: Vec<Strategy>,
    /// Measured runs per cell.
    #[serde(default = "defaults::repeats")]
    pub repeats: u32,
    /// Unmeasured runs before the measured ones, absorbing cache and
    /// page-in effects.
    #[serde(default = "defaults::warmup_runs")]
    pub warmup_runs: u32,
    /// Seeds both the generator and the per-fraction sampling.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sink: SinkSpec,
    /// Where scratch output and generated datasets go. Defaults to the
    /// system temp directory.
    #[serde(default)]
    pub scratch_dir: Option<PathBuf>,
}

mod defaults {
    use crate::rdf::Strategy;

    pub fn fractions() -> Vec<f64> {
        vec![1.0, 0.5, 0.25]
    }

    pub fn attribute_counts() -> Vec<u32> {
        vec![5, 12]
    }

    pub fn strategies() -> Vec<Strategy> {
        vec![Strategy::ClassBased, Strategy::AttributeBased]
    }

    pub fn repeats() -> u32 {
        5
    }

    pub fn warmup_runs() -> u32 {
        1
    }

    pub fn null_rate() -> f64 {
        0.1
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum DatasetSpec {
    /// An existing delimited file. `format` overrides extension sniffing.
    File {
        path: PathBuf,
        #[serde(default)]
        format: Option<SourceFormat>,
    },
    /// A synthetic dataset built by [`generate_dataset`] before the runs.
    Generate {
        rows: u64,
        columns: u32,
        #[serde(default = "defaults::null_rate")]
        null_rate: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SinkSpec {
    /// Write real N-Triples to a scratch file (deleted between runs).
    #[default]
    File,
    /// Count triples, write nothing: isolates transform cost from I/O.
    Null,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        for &fraction in &self.fractions {
            if !fraction.is_finite() || fraction <= 0.0 || fraction > 1.0 {
                return Err(BenchError::Config(format!("fraction {fraction} is outside (0, 1]")));
            }
        }
        if self.attribute_counts.iter().any(|&n| n < 1) {
            return Err(BenchError::Config("attribute counts must be at least 1".into()));
        }
        if self.repeats < 1 {
            return Err(BenchError::Config("repeats must be at least 1".into()));
        }
        if let DatasetSpec::Generate { rows, columns, null_rate } = &self.dataset {
            GeneratorSpec { rows: *rows, columns: *columns, null_rate: *null_rate, seed: self.seed }
                .validate()?;
        }
        Ok(())
    }
}

/// One grid cell's aggregated measurements.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellReport {
    pub strategy: Strategy,
    pub fraction: f64,
    pub attribute_count: u32,
    pub median_seconds: f64,
    pub mean_seconds: f64,
    /// Sample standard deviation over the measured runs; 0 when repeats = 1.
    pub stddev_seconds: f64,
    pub triples_emitted: u64,
    /// Rows entering the timed passes (after sampling and normalization).
    pub rows_processed: u64,
    pub passes_performed: u32,
}

/// Median-vs-median comparison for one (fraction, attribute count) pair
/// that ran under both strategies.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StrategyComparison {
    pub fraction: f64,
    pub attribute_count: u32,
    pub class_median_seconds: f64,
    pub attribute_median_seconds: f64,
    /// `100 × (1 − class/attribute)`: how much of the attribute-based
    /// time the class-based strategy saves.
    pub reduction_percent: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Environment {
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub os: String,
    pub arch: String,
    pub logical_cpus: Option<u32>,
    /// Always true: measured runs never spawn threads.
    pub single_thread: bool,
}

impl Environment {
    pub fn capture() -> Self {
        Environment {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            os: std::env::consts::OS.to_owned(),
            arch: std::env::consts::ARCH.to_owned(),
            logical_cpus: std::thread::available_parallelism().ok().map(|n| n.get() as u32),
            single_thread: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentReport {
    pub environment: Environment,
    /// Cell order: fractions outermost, then attribute counts, then
    /// strategies, each in config order.
    pub cells: Vec<CellReport>,
    pub comparisons: Vec<StrategyComparison>,
}
