//! Subject-key merge: rows from different sources that expand to the same
//! subject IRI become one entity.
//!
//! Every (predicate, value) pair a row contributes lands in its entity's
//! attribute multimap. Values are kept as a set per predicate, so the
//! merge never invents a winner: conflicting values for the same
//! predicate are simply all retained. Merging is order-independent — any
//! permutation of the input tables produces an equal [`IntegratedClass`].

use indexmap::{IndexMap, IndexSet};

use crate::mapping::TriplesMap;
use crate::normalize::NormalizedTable;
use crate::rdf::strategy::{compile_values, AccessError};
use crate::rdf::{CompiledTemplate, RdfTerm, TemplateError};

#[derive(Debug, thiserror::Error)]
pub enum IntegrateError {
    #[error("<{map_id}> maps class <{found}>, expected <{expected}>")]
    ClassMismatch { map_id: String, expected: String, found: String },
    #[error("<{map_id}>: {source}")]
    Template {
        map_id: String,
        #[source]
        source: TemplateError,
    },
    #[error("<{map_id}>: object column {column:?} is not in the normalized header")]
    UnboundColumn { map_id: String, column: String },
}

/// One subject and everything every source said about it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub subject_iri: String,
    pub class_iri: String,
    /// Predicate IRI → set of values, insertion-ordered, duplicates
    /// collapsed. Equality ignores order.
    pub attributes: IndexMap<String, IndexSet<RdfTerm>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegratedClass {
    pub class_iri: String,
    /// Subject IRI → entity. Equality ignores order.
    pub entities: IndexMap<String, EntityRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub rows_processed: u64,
    /// Rows whose subject template hit a null placeholder.
    pub rows_skipped: u64,
    /// Rows that landed on an entity another row had already created.
    pub rows_merged: u64,
    /// (predicate, value) contributions that were already present.
    pub duplicate_pairs_collapsed: u64,
}

#[derive(Debug)]
pub struct IntegrationOutcome {
    pub class: IntegratedClass,
    pub stats: IntegrationStats,
}

/// Merges normalized tables of one class. Each table comes with the
/// triples map that produced it, because that map names the predicates
/// for the table's columns.
pub fn integrate<'a, I>(class_iri: &str, bindings: I) -> Result<IntegrationOutcome, IntegrateError>
where
    I: IntoIterator<Item = (&'a NormalizedTable, &'a TriplesMap)>,
{
    let mut entities: IndexMap<String, EntityRecord> = IndexMap::new();
    let mut stats = IntegrationStats::default();

    for (table, map) in bindings {
        for (id, class) in [(&map.id, &map.subject_map.class_iri), (&map.id, &table.class_iri)] {
            if class != class_iri {
                return Err(IntegrateError::ClassMismatch {
                    map_id: id.clone(),
                    expected: class_iri.to_owned(),
                    found: class.clone(),
                });
            }
        }
        let subject = CompiledTemplate::compile(&map.subject_map.template, &table.header)
            .map_err(|source| IntegrateError::Template { map_id: map.id.clone(), source })?;
        let values = compile_values(&map.predicate_object_maps, &table.header).map_err(|e| match e {
            AccessError::Column(column) => IntegrateError::UnboundColumn { map_id: map.id.clone(), column },
            AccessError::Template(source) => IntegrateError::Template { map_id: map.id.clone(), source },
        })?;

        for row in &table.rows {
            stats.rows_processed += 1;
            let Some(subject_iri) = subject.expand(&row.cells) else {
                stats.rows_skipped += 1;
                continue;
            };
            let entity = match entities.entry(subject_iri) {
                indexmap::map::Entry::Occupied(e) => {
                    stats.rows_merged += 1;
                    e.into_mut()
                }
                indexmap::map::Entry::Vacant(e) => {
                    let subject_iri = e.key().clone();
                    e.insert(EntityRecord {
                        subject_iri,
                        class_iri: class_iri.to_owned(),
                        attributes: IndexMap::new(),
                    })
                }
            };
            for (predicate, value) in &values {
                let Some(term) = value.term_for(&row.cells) else { continue };
                if !entity.attributes.entry(predicate.clone()).or_default().insert(term) {
                    stats.duplicate_pairs_collapsed += 1;
                }
            }
        }
    }

    Ok(IntegrationOutcome {
        class: IntegratedClass { class_iri: class_iri.to_owned(), entities },
        stats,
    })
}
