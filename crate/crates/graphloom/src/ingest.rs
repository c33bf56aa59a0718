//! Loading delimited sources and sampling rows.
//!
//! The first line of every source is its header. CSV follows RFC 4180
//! (quoted cells, doubled quotes, embedded delimiters and newlines). TSV
//! has no quoting at all, so a tab always splits cells; a stray tab shows
//! up as a ragged row. In both formats an empty cell means null.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::mapping::SourceFormat;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: row has {found} cells, header has {expected}")]
    RaggedRow { path: PathBuf, line: u64, expected: u64, found: u64 },
    #[error("{path}:{line}: invalid UTF-8")]
    Encoding { path: PathBuf, line: u64 },
    #[error("{path}: missing header line")]
    MissingHeader { path: PathBuf },
    #[error("{path}: duplicate column {column:?} in header")]
    DuplicateColumn { path: PathBuf, column: String },
    #[error("sample fraction must be in (0, 1], got {fraction}")]
    InvalidFraction { fraction: f64 },
    #[error("row {row}: cell contains a {what}; TSV output cannot represent it")]
    EmbeddedDelimiter { row: u64, what: &'static str },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

/// One data row. `None` cells are nulls (empty cells in the file).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub cells: Vec<Option<String>>,
}

impl Row {
    pub fn new(cells: Vec<Option<String>>) -> Self {
        Row { cells }
    }

    /// Builds a row from raw strings, mapping `""` to null.
    pub fn from_fields<I, S>(fields: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Row {
            cells: fields
                .into_iter()
                .map(|f| {
                    let f = f.as_ref();
                    if f.is_empty() {
                        None
                    } else {
                        Some(f.to_owned())
                    }
                })
                .collect(),
        }
    }

    pub fn cell(&self, idx: usize) -> Option<&str> {
        self.cells.get(idx).and_then(|c| c.as_deref())
    }
}

/// A fully materialized source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceTable {
    /// Source name, matched against `rml:source` in mappings.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Row>,
    pub format: SourceFormat,
}

impl SourceTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Streaming row reader: memory stays proportional to one row no matter
/// the file size. Use [`load_source`] to materialize instead.
pub struct RowReader {
    reader: csv::Reader<File>,
    record: csv::StringRecord,
    header: Vec<String>,
    path: PathBuf,
}

impl RowReader {
    /// Opens `path` and reads the header line. `format` of `None` means
    /// "by file extension" (`.tsv` is TSV, anything else CSV).
    pub fn open(path: &Path, format: Option<SourceFormat>) -> Result<Self, IngestError> {
        let format = format.unwrap_or_else(|| SourceFormat::from_name(&path.to_string_lossy()));
        let file = File::open(path).map_err(|source| IngestError::Io { path: path.to_owned(), source })?;
        let metadata_len = file
            .metadata()
            .map_err(|source| IngestError::Io { path: path.to_owned(), source })?
            .len();
        if metadata_len == 0 {
            return Err(IngestError::MissingHeader { path: path.to_owned() });
        }
        let mut builder = csv::ReaderBuilder::new();
        builder.delimiter(format.delimiter()).has_headers(true).flexible(false);
        if format == SourceFormat::Tsv {
            builder.quoting(false);
        }
        let mut reader = builder.from_reader(file);
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| map_csv_error(e, path))?
            .iter()
            .map(str::to_owned)
            .collect();
        for (i, column) in header.iter().enumerate() {
            if header[..i].contains(column) {
                return Err(IngestError::DuplicateColumn {
                    path: path.to_owned(),
                    column: column.clone(),
                });
            }
        }
        Ok(RowReader { reader, record: csv::StringRecord::new(), header, path: path.to_owned() })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn read_row(&mut self) -> Result<Option<Row>, IngestError> {
        match self.reader.read_record(&mut self.record) {
            Ok(false) => Ok(None),
            Ok(true) => Ok(Some(Row::from_fields(self.record.iter()))),
            Err(e) => Err(map_csv_error(e, &self.path)),
        }
    }
}

impl Iterator for RowReader {
    type Item = Result<Row, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_row().transpose()
    }
}

fn map_csv_error(error: csv::Error, path: &Path) -> IngestError {
    let line_of = |pos: &Option<csv::Position>| pos.as_ref().map(|p| p.line()).unwrap_or(0);
    match error.kind() {
        csv::ErrorKind::UnequalLengths { pos, expected_len, len } => IngestError::RaggedRow {
            path: path.to_owned(),
            line: line_of(pos),
            expected: *expected_len,
            found: *len,
        },
        csv::ErrorKind::Utf8 { pos, .. } => {
            IngestError::Encoding { path: path.to_owned(), line: line_of(pos) }
        }
        csv::ErrorKind::Io(_) => match error.into_kind() {
            csv::ErrorKind::Io(source) => IngestError::Io { path: path.to_owned(), source },
            _ => unreachable!(),
        },
        other => IngestError::Malformed { path: path.to_owned(), message: format!("{other:?}") },
    }
}

/// Reads the whole file into a [`SourceTable`]. The table's `name` is the
/// file name component of `path`.
pub fn load_source(path: &Path, format: Option<SourceFormat>) -> Result<SourceTable, IngestError> {
    let format = format.unwrap_or_else(|| SourceFormat::from_name(&path.to_string_lossy()));
    let mut reader = RowReader::open(path, Some(format))?;
    let header = reader.header().to_vec();
    let mut rows = Vec::new();
    while let Some(row) = reader.read_row()? {
        rows.push(row);
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned());
    Ok(SourceTable { name, header, rows, format })
}

/// Uniform sample of `⌊fraction · n⌋` rows without replacement, keeping
/// the rows' relative order.
///
/// Deterministic for a given `(table, fraction, seed)`: the PRNG is
/// ChaCha12 seeded with `seed`, and selection is a partial Fisher-Yates
/// shuffle of the index array whose first `k` entries are then sorted.
/// `fraction` must be in `(0, 1]`; 1.0 reproduces the table unchanged.
pub fn sample_rows(table: &SourceTable, fraction: f64, seed: u64) -> Result<SourceTable, IngestError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(IngestError::InvalidFraction { fraction });
    }
    let n = table.rows.len();
    let k = (fraction * n as f64).floor() as usize;
    let mut indexes: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in 0..k {
        let j = rng.gen_range(i..n);
        indexes.swap(i, j);
    }
    let mut chosen = indexes[..k].to_vec();
    chosen.sort_unstable();
    Ok(SourceTable {
        name: table.name.clone(),
        header: table.header.clone(),
        rows: chosen.iter().map(|&i| table.rows[i].clone()).collect(),
        format: table.format,
    })
}

/// Writes header and rows in `format`; nulls become empty cells. CSV
/// quotes only where RFC 4180 requires it. TSV cannot represent tabs,
/// carriage returns, or newlines inside a cell, so those error.
pub fn write_delimited<W: Write>(
    header: &[String],
    rows: &[Row],
    format: SourceFormat,
    out: W,
) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io { path: PathBuf::from("<output>"), source };
    match format {
        SourceFormat::Csv => {
            let mut writer = csv::WriterBuilder::new().from_writer(out);
            let write_record = |writer: &mut csv::Writer<W>, fields: Vec<&str>| {
                writer.write_record(fields).map_err(|e| match e.into_kind() {
                    csv::ErrorKind::Io(source) => io_err(source),
                    other => IngestError::Malformed {
                        path: PathBuf::from("<output>"),
                        message: format!("{other:?}"),
                    },
                })
            };
            write_record(&mut writer, header.iter().map(String::as_str).collect())?;
            for row in rows {
                write_record(&mut writer, row.cells.iter().map(|c| c.as_deref().unwrap_or("")).collect())?;
            }
            writer.flush().map_err(io_err)
        }
        SourceFormat::Tsv => {
            let mut out = io::BufWriter::new(out);
            let mut write_line = |cells: Vec<&str>, row: u64| -> Result<(), IngestError> {
                let mut first = true;
                for cell in cells {
                    if let Some(what) = embedded_delimiter(cell) {
                        return Err(IngestError::EmbeddedDelimiter { row, what });
                    }
                    if !first {
                        out.write_all(b"\t").map_err(io_err)?;
                    }
                    first = false;
                    out.write_all(cell.as_bytes()).map_err(io_err)?;
                }
                out.write_all(b"\n").map_err(io_err)
            };
            write_line(header.iter().map(String::as_str).collect(), 0)?;
            for (i, row) in rows.iter().enumerate() {
                write_line(row.cells.iter().map(|c| c.as_deref().unwrap_or("")).collect(), i as u64 + 1)?;
            }
            out.flush().map_err(io_err)
        }
    }
}

fn embedded_delimiter(cell: &str) -> Option<&'static str> {
    if cell.contains('\t') {
        Some("tab")
    } else if cell.contains('\n') {
        Some("newline")
    } else if cell.contains('\r') {
        Some("carriage return")
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &[u8], ext: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(format!("t.{ext}"));
        let mut f = File::create(&path).unwrap();
        f.write_all(contents).unwrap();
        (dir, path)
    }

    #[test]
    fn csv_quoting_and_nulls() {
        let (_dir, path) = write_temp(b"a,b,c\n1,\"x,y\",\"say \"\"hi\"\"\"\n,2,\n", "csv");
        let table = load_source(&path, None).unwrap();
        assert_eq!(table.header, vec!["a", "b", "c"]);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].cells[1].as_deref(), Some("x,y"));
        assert_eq!(table.rows[0].cells[2].as_deref(), Some("say \"hi\""));
        assert_eq!(table.rows[1].cells, vec![None, Some("2".into()), None]);
    }

    #[test]
    fn quoted_cell_with_newline() {
        let (_dir, path) = write_temp(b"a,b\n\"line1\nline2\",2\n", "csv");
        let table = load_source(&path, None).unwrap();
        assert_eq!(table.rows[0].cells[0].as_deref(), Some("line1\nline2"));
    }

    #[test]
    fn tsv_takes_quotes_literally() {
        let (_dir, path) = write_temp(b"a\tb\n\"x\ty\n", "tsv");
        let table = load_source(&path, None).unwrap();
        assert_eq!(table.format, SourceFormat::Tsv);
        assert_eq!(table.rows[0].cells[0].as_deref(), Some("\"x"));
        assert_eq!(table.rows[0].cells[1].as_deref(), Some("y"));
    }

    #[test]
    fn ragged_row_reports_line() {
        let (_dir, path) = write_temp(b"a,b\n1,2\n1,2,3\n", "csv");
        let err = load_source(&path, None).unwrap_err();
        match err {
            IngestError::RaggedRow { line, expected, found, .. } => {
                assert_eq!(line, 3);
                assert_eq!((expected, found), (2, 3));
            }
            other => panic!("expected RaggedRow, got {other:?}"),
        }
    }

    #[test]
    fn stray_tab_in_tsv_is_a_ragged_row() {
        let (_dir, path) = write_temp(b"a\tb\n1\t2\t3\n", "tsv");
        assert!(matches!(load_source(&path, None), Err(IngestError::RaggedRow { .. })));
    }

    #[test]
    fn invalid_utf8_is_an_encoding_error() {
        let (_dir, path) = write_temp(b"a,b\n1,\xff\n", "csv");
        assert!(matches!(load_source(&path, None), Err(IngestError::Encoding { line: 2, .. })));
    }

    #[test]
    fn empty_file_is_missing_header() {
        let (_dir, path) = write_temp(b"", "csv");
        assert!(matches!(load_source(&path, None), Err(IngestError::MissingHeader { .. })));
    }

    #[test]
    fn duplicate_header_column_is_rejected() {
        let (_dir, path) = write_temp(b"a,b,a\n1,2,3\n", "csv");
        match load_source(&path, None).unwrap_err() {
            IngestError::DuplicateColumn { column, .. } => assert_eq!(column, "a"),
            other => panic!("expected DuplicateColumn, got {other:?}"),
        }
    }

    #[test]
    fn format_override_beats_extension() {
        let (_dir, path) = write_temp(b"a\tb\n1\t2\n", "csv");
        let table = load_source(&path, Some(SourceFormat::Tsv)).unwrap();
        assert_eq!(table.header, vec!["a", "b"]);
    }

    #[test]
    fn streaming_reader_matches_load() {
        let (_dir, path) = write_temp(b"a,b\n1,2\n3,\n", "csv");
        let table = load_source(&path, None).unwrap();
        let reader = RowReader::open(&path, None).unwrap();
        let streamed: Vec<Row> = reader.map(Result::unwrap).collect();
        assert_eq!(streamed, table.rows);
    }

    fn toy_table(n: usize) -> SourceTable {
        SourceTable {
            name: "toy.csv".into(),
            header: vec!["id".into()],
            rows: (0..n).map(|i| Row::from_fields([i.to_string()])).collect(),
            format: SourceFormat::Csv,
        }
    }

    #[test]
    fn sample_full_fraction_is_identity() {
        let table = toy_table(10);
        assert_eq!(sample_rows(&table, 1.0, 7).unwrap(), table);
    }

    #[test]
    fn sample_is_deterministic_and_order_preserving() {
        let table = toy_table(100);
        let a = sample_rows(&table, 0.25, 42).unwrap();
        let b = sample_rows(&table, 0.25, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 25);
        let picked: Vec<usize> = a
            .rows
            .iter()
            .map(|r| r.cells[0].as_deref().unwrap().parse().unwrap())
            .collect();
        let mut sorted = picked.clone();
        sorted.sort_unstable();
        assert_eq!(picked, sorted, "sample must keep source order");
        let different = sample_rows(&table, 0.25, 43).unwrap();
        assert_ne!(a, different, "a different seed should pick different rows");
    }

    #[test]
    fn sample_size_is_floor_of_fraction() {
        let table = toy_table(7);
        assert_eq!(sample_rows(&table, 0.5, 1).unwrap().rows.len(), 3);
        assert_eq!(sample_rows(&table, 0.9999, 1).unwrap().rows.len(), 6);
    }

    #[test]
    fn bad_fractions_are_rejected() {
        let table = toy_table(3);
        for fraction in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                sample_rows(&table, fraction, 0),
                Err(IngestError::InvalidFraction { .. })
            ));
        }
    }

    #[test]
    fn write_back_round_trips_cells() {
        for (raw, ext) in [
            (&b"a,b\n\"x,1\",\ny,\"q\"\"z\"\n"[..], "csv"),
            (&b"a\tb\nx,1\t\ny\tqz\n"[..], "tsv"),
        ] {
            let (_dir, path) = write_temp(raw, ext);
            let table = load_source(&path, None).unwrap();
            let mut buf = Vec::new();
            write_delimited(&table.header, &table.rows, table.format, &mut buf).unwrap();
            let (_dir2, path2) = write_temp(&buf, ext);
            let reloaded = load_source(&path2, None).unwrap();
            assert_eq!(reloaded.header, table.header);
            assert_eq!(reloaded.rows, table.rows);
        }
    }

    #[test]
    fn tsv_write_rejects_embedded_tab() {
        let rows = vec![Row::new(vec![Some("a\tb".into())])];
        let err = write_delimited(&["x".into()], &rows, SourceFormat::Tsv, Vec::new()).unwrap_err();
        assert!(matches!(err, IngestError::EmbeddedDelimiter { row: 1, what: "tab" }));
    }
}
