//! Synthetic delimited datasets shaped like wide biomedical exports: a
//! unique key column followed by alphanumeric value columns with a
//! configurable null rate.

use std::fmt::Write as _;
use std::io::Write;

use rand::distributions::Alphanumeric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bench::BenchError;

/// Value lengths are drawn from this range; at the default 0.1 null rate
/// a 557,162-row, 13-column dataset lands near 170 MB.
const VALUE_LEN: std::ops::RangeInclusive<usize> = 20..=32;

#[derive(Debug, Clone, Copy)]
pub struct GeneratorSpec {
    pub rows: u64,
    pub columns: u32,
    /// Probability that a non-key cell is empty. In [0, 1).
    pub null_rate: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.rows < 1 {
            return Err(BenchError::Config("a dataset needs at least 1 row".into()));
        }
        if self.columns < 1 {
            return Err(BenchError::Config("a dataset needs at least 1 column".into()));
        }
        if !self.null_rate.is_finite() || !(0.0..1.0).contains(&self.null_rate) {
            return Err(BenchError::Config(format!(
                "null rate {} is outside [0, 1)",
                self.null_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSummary {
    pub rows: u64,
    pub columns: u32,
    pub bytes: u64,
}

/// Writes a TSV with header `C0..C{columns-1}`. `C0` holds a unique,
/// never-null row key; every other cell is either empty (with probability
/// `null_rate`) or a random alphanumeric string. Byte-identical for equal
/// specs.
pub fn generate_dataset(spec: &GeneratorSpec, out: &mut impl Write) -> Result<DatasetSummary, BenchError> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut line = String::new();
    let mut bytes = 0u64;

    for c in 0..spec.columns {
        if c > 0 {
            line.push('\t');
        }
        let _ = write!(line, "C{c}");
    }
    line.push('\n');
    out.write_all(line.as_bytes())?;
    bytes += line.len() as u64;

    for row in 0..spec.rows {
        line.clear();
        let _ = write!(line, "R{row:010}");
        for _ in 1..spec.columns {
            line.push('\t');
            if !rng.gen_bool(spec.null_rate) {
                let len = rng.gen_range(VALUE_LEN);
                line.extend((0..len).map(|_| rng.sample(Alphanumeric) as char));
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
        bytes += line.len() as u64;
    }

    Ok(DatasetSummary { rows: spec.rows, columns: spec.columns, bytes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generate_to_vec(spec: &GeneratorSpec) -> (Vec<u8>, DatasetSummary) {
        let mut buf = Vec::new();
        let summary = generate_dataset(spec, &mut buf).unwrap();
        (buf, summary)
    }

    #[test]
    fn header_row_count_and_key_shape() {
        let spec = GeneratorSpec { rows: 7, columns: 4, null_rate: 0.0, seed: 1 };
        let (buf, summary) = generate_to_vec(&spec);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[0], "C0\tC1\tC2\tC3");
        for (i, line) in lines[1..].iter().enumerate() {
            let cells: Vec<&str> = line.split('\t').collect();
            assert_eq!(cells.len(), 4);
            assert_eq!(cells[0], format!("R{i:010}"));
            assert!(cells[1..].iter().all(|c| !c.is_empty()));
        }
        assert_eq!(summary.bytes, text.len() as u64);
        assert_eq!(summary.rows, 7);
    }

    #[test]
    fn single_row_dataset_is_header_plus_one_line() {
        let spec = GeneratorSpec { rows: 1, columns: 2, null_rate: 0.0, seed: 9 };
        let (buf, _) = generate_to_vec(&spec);
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn same_spec_is_byte_identical_and_seed_changes_output() {
        let spec = GeneratorSpec { rows: 50, columns: 5, null_rate: 0.3, seed: 42 };
        let (a, _) = generate_to_vec(&spec);
        let (b, _) = generate_to_vec(&spec);
        assert_eq!(a, b);
        let (c, _) = generate_to_vec(&GeneratorSpec { seed: 43, ..spec });
        assert_ne!(a, c);
    }

    #[test]
    fn null_rate_empties_cells_but_never_the_key() {
        let spec = GeneratorSpec { rows: 200, columns: 3, null_rate: 0.5, seed: 7 };
        let (buf, _) = generate_to_vec(&spec);
        let text = String::from_utf8(buf).unwrap();
        let mut empties = 0;
        let mut filled = 0;
        for line in text.lines().skip(1) {
            let cells: Vec<&str> = line.split('\t').collect();
            assert!(!cells[0].is_empty());
            for cell in &cells[1..] {
                if cell.is_empty() {
                    empties += 1;
                } else {
                    filled += 1;
                }
            }
        }
        // 400 cells at rate 0.5; a 120..280 window is 8+ sigma.
        assert!((120..=280).contains(&empties), "{empties} empty cells");
        assert!(filled > 0);
    }

    #[test]
    fn keys_are_unique() {
        let spec = GeneratorSpec { rows: 1000, columns: 2, null_rate: 0.9, seed: 3 };
        let (buf, _) = generate_to_vec(&spec);
        let text = String::from_utf8(buf).unwrap();
        let keys: std::collections::HashSet<&str> =
            text.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
        assert_eq!(keys.len(), 1000);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = GeneratorSpec { rows: 1, columns: 1, null_rate: 0.0, seed: 0 };
        for bad in [
            GeneratorSpec { rows: 0, ..base },
            GeneratorSpec { columns: 0, ..base },
            GeneratorSpec { null_rate: 1.0, ..base },
            GeneratorSpec { null_rate: -0.1, ..base },
            GeneratorSpec { null_rate: f64::NAN, ..base },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn generated_output_round_trips_through_the_reader() {
        use std::io::Write as _;
        let spec = GeneratorSpec { rows: 30, columns: 4, null_rate: 0.4, seed: 11 };
        let (buf, _) = generate_to_vec(&spec);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        std::fs::File::create(&path).unwrap().write_all(&buf).unwrap();
        let table = crate::ingest::load_source(&path, None).unwrap();
        assert_eq!(table.header, vec!["C0", "C1", "C2", "C3"]);
        assert_eq!(table.rows.len(), 30);
        assert_eq!(table.format, crate::mapping::SourceFormat::Tsv);
    }
}
