//! Per-class projection: each triples map gets a table holding exactly
//! the columns it reads, with duplicate rows collapsed.
//!
//! The projected header is the ordered union of subject template
//! placeholders (template order) and object map columns (document order),
//! first occurrence winning. Rows whose subject columns are *all* null
//! can never form a subject and are dropped here; rows with only some
//! subject columns null are kept, because which placeholders matter is
//! the subject template's call at emission time. Deduplication is exact
//! byte equality of the projected row, first occurrence kept.

use indexmap::IndexSet;

use crate::ingest::{IngestError, Row, SourceTable};
use crate::mapping::{MappingSet, TriplesMap};

#[derive(Debug, thiserror::Error)]
pub enum NormalizeError {
    #[error("<{map_id}>: source {source_name:?} is missing referenced columns: {}", columns.join(", "))]
    UnboundColumns { map_id: String, source_name: String, columns: Vec<String> },
    #[error("<{map_id}>: no source named {source_name:?} was provided")]
    MissingSource { map_id: String, source_name: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// The rows of one (triples map, source) binding, projected to the
/// columns the map actually reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedTable {
    pub class_iri: String,
    pub source_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Row>,
    /// Indexes into `header` of the subject template's placeholders.
    pub subject_columns: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeStats {
    pub rows_read: u64,
    pub dropped_null_subject: u64,
    pub dropped_duplicates: u64,
}

struct Projector {
    header: Vec<String>,
    /// Source cell index for each projected column.
    source_indexes: Vec<usize>,
    /// Indexes into the projected header that feed the subject template.
    subject_columns: Vec<usize>,
}

impl Projector {
    fn build(map: &TriplesMap, source_header: &[String], source_name: &str) -> Result<Self, NormalizeError> {
        let header: Vec<String> = map.referenced_columns().into_iter().map(str::to_owned).collect();
        let mut source_indexes = Vec::with_capacity(header.len());
        let mut missing = Vec::new();
        for column in &header {
            match source_header.iter().position(|h| h == column) {
                Some(idx) => source_indexes.push(idx),
                None => missing.push(column.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(NormalizeError::UnboundColumns {
                map_id: map.id.clone(),
                source_name: source_name.to_owned(),
                columns: missing,
            });
        }
        let mut subject_columns: Vec<usize> = Vec::new();
        for placeholder in map.subject_map.template.placeholders() {
            let idx = header.iter().position(|h| h == placeholder).unwrap();
            if !subject_columns.contains(&idx) {
                subject_columns.push(idx);
            }
        }
        Ok(Projector { header, source_indexes, subject_columns })
    }

    /// Projects one source row; `None` when every subject cell is null.
    fn project(&self, cells: &[Option<String>]) -> Option<Row> {
        let all_null = self.subject_columns.iter().all(|&c| cells[self.source_indexes[c]].is_none());
        if all_null {
            return None;
        }
        Some(Row::new(self.source_indexes.iter().map(|&i| cells[i].clone()).collect()))
    }
}

/// Normalizes a materialized source against one triples map.
pub fn normalize(source: &SourceTable, map: &TriplesMap) -> Result<NormalizedTable, NormalizeError> {
    let (table, _) = normalize_with_stats(source, map)?;
    Ok(table)
}

pub fn normalize_with_stats(
    source: &SourceTable,
    map: &TriplesMap,
) -> Result<(NormalizedTable, NormalizeStats), NormalizeError> {
    let projector = Projector::build(map, &source.header, &source.name)?;
    let mut stats = NormalizeStats::default();
    let mut rows: IndexSet<Row> = IndexSet::new();
    for row in &source.rows {
        stats.rows_read += 1;
        match projector.project(&row.cells) {
            None => stats.dropped_null_subject += 1,
            Some(projected) => {
                if !rows.insert(projected) {
                    stats.dropped_duplicates += 1;
                }
            }
        }
    }
    Ok((finish(projector, map, &source.name, rows), stats))
}

/// Streaming variant: consumes rows as they are read, so only the
/// deduplicated projection is ever held in memory.
pub fn normalize_streaming<I>(
    source_name: &str,
    source_header: &[String],
    rows_in: I,
    map: &TriplesMap,
) -> Result<(NormalizedTable, NormalizeStats), NormalizeError>
where
    I: IntoIterator<Item = Result<Row, IngestError>>,
{
    let projector = Projector::build(map, source_header, source_name)?;
    let mut stats = NormalizeStats::default();
    let mut rows: IndexSet<Row> = IndexSet::new();
    for row in rows_in {
        let row = row?;
        stats.rows_read += 1;
        match projector.project(&row.cells) {
            None => stats.dropped_null_subject += 1,
            Some(projected) => {
                if !rows.insert(projected) {
                    stats.dropped_duplicates += 1;
                }
            }
        }
    }
    Ok((finish(projector, map, source_name, rows), stats))
}

fn finish(projector: Projector, map: &TriplesMap, source_name: &str, rows: IndexSet<Row>) -> NormalizedTable {
    NormalizedTable {
        class_iri: map.subject_map.class_iri.clone(),
        source_name: source_name.to_owned(),
        header: projector.header,
        rows: rows.into_iter().collect(),
        subject_columns: projector.subject_columns,
    }
}

/// One normalized table per triples map, in mapping order, binding each
/// map to the provided source with a matching name.
pub fn normalize_all(
    sources: &[SourceTable],
    set: &MappingSet,
) -> Result<Vec<NormalizedTable>, NormalizeError> {
    set.triples_maps
        .iter()
        .map(|map| {
            let source = sources
                .iter()
                .find(|s| s.name == map.logical_source.source_name)
                .ok_or_else(|| NormalizeError::MissingSource {
                    map_id: map.id.clone(),
                    source_name: map.logical_source.source_name.clone(),
                })?;
            normalize(source, map)
        })
        .collect()
}
