//! Grid execution: sample, normalize, then time the RDFization passes.

use std::borrow::Cow;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::bench::generate::{generate_dataset, GeneratorSpec};
use crate::bench::{
    BenchError, CellReport, DatasetSpec, Environment, ExperimentConfig, ExperimentReport,
    SinkSpec, StrategyComparison,
};
use crate::ingest::{load_source, sample_rows, SourceTable};
use crate::mapping::{
    IriTemplate, LogicalSource, ObjectRef, PredicateObjectMap, SubjectMap, TriplesMap,
};
use crate::normalize::{normalize, NormalizedTable};
use crate::rdf::{rdfize, ExecutionPlan, NtriplesWriter, NullSink, PlanBinding, Strategy};

/// Runs every (fraction, attribute count, strategy) cell of the config,
/// in that nesting order. The timed region per run is the RDFization
/// boundary only; dataset loading, sampling, and normalization happen
/// outside it. Also checks, per run, that the triple count is stable and
/// equal across strategies.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    config.validate()?;
    let scratch = config.scratch_dir.clone().unwrap_or_else(std::env::temp_dir);
    fs::create_dir_all(&scratch)?;

    let table = load_dataset(config, &scratch)?;
    if let Some(&max) = config.attribute_counts.iter().max() {
        let available = table.header.len().saturating_sub(1) as u32;
        if max > available {
            return Err(BenchError::Config(format!(
                "{max} attributes need a key column plus {max} value columns, \
                 but the dataset has {} columns",
                table.header.len()
            )));
        }
    }

    let environment = Environment::capture();
    let mut cells = Vec::new();

    for &fraction in &config.fractions {
        let sampled: Cow<'_, SourceTable> = if fraction == 1.0 {
            Cow::Borrowed(&table)
        } else {
            Cow::Owned(sample_rows(&table, fraction, config.seed)?)
        };
        for &attribute_count in &config.attribute_counts {
            let map = benchmark_map(&table.name, attribute_count);
            let normalized = normalize(&sampled, &map)?;
            let mut first: Option<(Strategy, u64)> = None;
            for &strategy in &config.strategies {
                let cell =
                    run_cell(config, &scratch, strategy, fraction, attribute_count, &map, &normalized)?;
                match first {
                    None => first = Some((strategy, cell.triples_emitted)),
                    Some((other, count)) if count != cell.triples_emitted => {
                        return Err(BenchError::Invariant(format!(
                            "at fraction {fraction} with {attribute_count} attributes, \
                             {other} emitted {count} triples but {strategy} emitted {}",
                            cell.triples_emitted
                        )));
                    }
                    Some(_) => {}
                }
                cells.push(cell);
            }
        }
    }

    let comparisons = comparisons_from(&cells);
    Ok(ExperimentReport { environment, cells, comparisons })
}

fn run_cell(
    config: &ExperimentConfig,
    scratch: &Path,
    strategy: Strategy,
    fraction: f64,
    attribute_count: u32,
    map: &TriplesMap,
    normalized: &NormalizedTable,
) -> Result<CellReport, BenchError> {
    let plan = ExecutionPlan {
        strategy,
        bindings: vec![PlanBinding::Table { map, table: normalized }],
    };
    let mut timings = Vec::with_capacity(config.repeats as usize);
    let mut last = None;

    for run in 0..config.warmup_runs + config.repeats {
        let stats = match config.sink {
            SinkSpec::File => {
                let out = ScratchFile::new(scratch, "out", "nt");
                let mut sink = NtriplesWriter::new(BufWriter::new(File::create(&out.0)?));
                rdfize(&plan, &mut sink)?
            }
            SinkSpec::Null => rdfize(&plan, &mut NullSink::default())?,
        };
        if let Some(prev) = last.replace(stats) {
            if prev.triples_emitted != stats.triples_emitted {
                return Err(BenchError::Invariant(format!(
                    "triple count changed between runs of the same cell: {} then {}",
                    prev.triples_emitted, stats.triples_emitted
                )));
            }
        }
        if run >= config.warmup_runs {
            timings.push(stats.elapsed.as_secs_f64());
        }
    }

    let stats = last.expect("repeats >= 1 is validated");
    timings.sort_by(f64::total_cmp);
    Ok(CellReport {
        strategy,
        fraction,
        attribute_count,
        median_seconds: median_of_sorted(&timings),
        mean_seconds: mean(&timings),
        stddev_seconds: sample_stddev(&timings),
        triples_emitted: stats.triples_emitted,
        rows_processed: normalized.rows.len() as u64,
        passes_performed: stats.passes_performed,
    })
}

fn load_dataset(config: &ExperimentConfig, scratch: &Path) -> Result<SourceTable, BenchError> {
    match &config.dataset {
        DatasetSpec::File { path, format } => Ok(load_source(path, *format)?),
        DatasetSpec::Generate { rows, columns, null_rate } => {
            let spec = GeneratorSpec {
                rows: *rows,
                columns: *columns,
                null_rate: *null_rate,
                seed: config.seed,
            };
            let file = ScratchFile::new(scratch, "dataset", "tsv");
            let mut out = BufWriter::new(File::create(&file.0)?);
            generate_dataset(&spec, &mut out)?;
            out.flush()?;
            drop(out);
            Ok(load_source(&file.0, None)?)
        }
    }
}

/// Single-class mapping over the generated column shape: subject keyed by
/// `C0`, one literal predicate per value column `C1..=C{n}`.
fn benchmark_map(source_name: &str, attribute_count: u32) -> TriplesMap {
    TriplesMap {
        id: "http://benchmark.example/maps#record".into(),
        logical_source: LogicalSource::for_name(source_name),
        subject_map: SubjectMap {
            template: IriTemplate::parse("http://benchmark.example/record/{C0}")
                .expect("static template"),
            class_iri: "http://benchmark.example/Record".into(),
        },
        predicate_object_maps: (1..=attribute_count)
            .map(|i| PredicateObjectMap {
                predicate_iri: format!("http://benchmark.example/attr/C{i}"),
                object: ObjectRef::Column(format!("C{i}")),
                datatype_iri: None,
            })
            .collect(),
    }
}

fn comparisons_from(cells: &[CellReport]) -> Vec<StrategyComparison> {
    let mut keys: Vec<(u64, u32)> = Vec::new();
    for cell in cells {
        let key = (cell.fraction.to_bits(), cell.attribute_count);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .filter_map(|(bits, attribute_count)| {
            let fraction = f64::from_bits(bits);
            let find = |strategy| {
                cells.iter().find(|c| {
                    c.strategy == strategy
                        && c.fraction.to_bits() == bits
                        && c.attribute_count == attribute_count
                })
            };
            let class = find(Strategy::ClassBased)?;
            let attribute = find(Strategy::AttributeBased)?;
            Some(StrategyComparison {
                fraction,
                attribute_count,
                class_median_seconds: class.median_seconds,
                attribute_median_seconds: attribute.median_seconds,
                reduction_percent: 100.0 * (1.0 - class.median_seconds / attribute.median_seconds),
            })
        })
        .collect()
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

static SCRATCH_COUNTER: AtomicU64 = AtomicU64::new(0);

/// A scratch path that is removed on drop.
struct ScratchFile(PathBuf);

impl ScratchFile {
    fn new(dir: &Path, tag: &str, ext: &str) -> Self {
        let n = SCRATCH_COUNTER.fetch_add(1, Ordering::Relaxed);
        ScratchFile(dir.join(format!("graphloom-{tag}-{}-{n}.{ext}", std::process::id())))
    }
}

impl Drop for ScratchFile {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(json: &str) -> ExperimentConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn single_cell_config_produces_one_cell() {
        let config = quick_config(
            r#"{
                "dataset": {"rows": 500, "columns": 6},
                "fractions": [1.0],
                "attribute_counts": [5],
                "strategies": ["class"],
                "repeats": 3,
                "warmup_runs": 0,
                "sink": "null"
            }"#,
        );
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.cells.len(), 1);
        let cell = &report.cells[0];
        assert_eq!(cell.rows_processed, 500);
        assert_eq!(cell.passes_performed, 1);
        assert!(cell.median_seconds >= 0.0);
        assert!(report.comparisons.is_empty());
        assert!(report.environment.single_thread);
    }

    #[test]
    fn default_grid_has_twelve_cells_and_six_comparisons() {
        let config = quick_config(
            r#"{
                "dataset": {"rows": 800, "columns": 13},
                "repeats": 1,
                "warmup_runs": 0,
                "sink": "null"
            }"#,
        );
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.cells.len(), 12);
        assert_eq!(report.comparisons.len(), 6);
        for comparison in &report.comparisons {
            assert!(comparison.attribute_median_seconds > 0.0);
            assert!(comparison.reduction_percent.is_finite());
        }
    }

    #[test]
    fn strategies_agree_on_triples_and_differ_on_passes() {
        let config = quick_config(
            r#"{
                "dataset": {"rows": 1000, "columns": 7, "null_rate": 0.3},
                "fractions": [1.0, 0.5],
                "attribute_counts": [6],
                "repeats": 2,
                "warmup_runs": 1,
                "sink": "null",
                "seed": 99
            }"#,
        );
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.cells.len(), 4);
        for pair in report.cells.chunks(2) {
            assert_eq!(pair[0].triples_emitted, pair[1].triples_emitted);
            assert_eq!(pair[0].passes_performed, 1);
            assert_eq!(pair[1].passes_performed, 7);
        }
        // fraction 0.5 of 1000 rows
        assert!(report.cells.iter().any(|c| c.rows_processed == 500));
    }

    #[test]
    fn same_seed_reruns_reproduce_triple_counts() {
        let config = quick_config(
            r#"{
                "dataset": {"rows": 400, "columns": 4, "null_rate": 0.5},
                "fractions": [0.5],
                "attribute_counts": [3],
                "repeats": 1,
                "warmup_runs": 0,
                "sink": "null",
                "seed": 7
            }"#,
        );
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        let counts = |r: &ExperimentReport| {
            r.cells.iter().map(|c| c.triples_emitted).collect::<Vec<_>>()
        };
        assert_eq!(counts(&a), counts(&b));
    }

    #[test]
    fn file_datasets_load_and_file_sink_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("input.tsv");
        {
            let spec = GeneratorSpec { rows: 50, columns: 3, null_rate: 0.0, seed: 1 };
            let mut out = BufWriter::new(File::create(&data).unwrap());
            generate_dataset(&spec, &mut out).unwrap();
            out.flush().unwrap();
        }
        let config = quick_config(&format!(
            r#"{{
                "dataset": {{"path": {:?}}},
                "fractions": [1.0],
                "attribute_counts": [2],
                "repeats": 1,
                "warmup_runs": 0,
                "scratch_dir": {:?}
            }}"#,
            data, dir.path()
        ));
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.cells.len(), 2);
        assert!(report.cells[0].triples_emitted > 0);
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .filter(|n| n != "input.tsv")
            .collect();
        assert!(leftovers.is_empty(), "scratch not cleaned: {leftovers:?}");
    }

    #[test]
    fn attribute_count_beyond_dataset_width_is_a_config_error() {
        let config = quick_config(
            r#"{"dataset": {"rows": 10, "columns": 4}, "attribute_counts": [4], "repeats": 1}"#,
        );
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err, BenchError::Config(_)), "{err}");
    }

    #[test]
    fn statistics_helpers() {
        assert_eq!(median_of_sorted(&[1.0, 2.0, 9.0]), 2.0);
        assert_eq!(median_of_sorted(&[1.0, 2.0, 3.0, 9.0]), 2.5);
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(sample_stddev(&[5.0]), 0.0);
        let s = sample_stddev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert!((s - 2.138089935299395).abs() < 1e-12);
    }
}
