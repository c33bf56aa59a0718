//! The two execution strategies.
//!
//! Class-based: one pass per class binding. Each row expands its subject
//! once and emits the rdf:type triple (first time that subject is seen)
//! plus one triple per non-null mapped value, all in the same pass.
//!
//! Attribute-based: the baseline it is measured against. One full pass
//! over the rows for rdf:type, then one full pass per predicate-object
//! map, re-expanding the subject template on every pass. The redundant
//! subject work is the point: it reproduces how per-attribute mapping
//! rules execute when nothing batches them by class.
//!
//! Both strategies emit the same triple set for the same input — only
//! order, pass count, and time differ. The timed region starts after
//! templates are resolved against headers and ends after the sink flush,
//! so it covers input iteration, term construction, and output writing,
//! but not mapping parsing or header validation.

use std::io;
use std::time::{Duration, Instant};

use indexmap::IndexSet;

use crate::integrate::IntegratedClass;
use crate::mapping::{ObjectRef, PredicateObjectMap, TriplesMap};
use crate::normalize::NormalizedTable;
use crate::rdf::{CompiledTemplate, TemplateError, TermRef, TripleRef, TripleSink, RDF_TYPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Strategy {
    #[serde(rename = "class")]
    ClassBased,
    #[serde(rename = "attribute")]
    AttributeBased,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::ClassBased => "class",
            Strategy::AttributeBased => "attribute",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RdfizeError {
    #[error("{0}")]
    Template(#[from] TemplateError),
    #[error("object column {column:?} is not in the table header")]
    UnboundColumn { column: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What to execute: each binding is one class's input, either a
/// normalized table with its triples map, or pre-merged entities.
pub struct ExecutionPlan<'a> {
    pub strategy: Strategy,
    pub bindings: Vec<PlanBinding<'a>>,
}

pub enum PlanBinding<'a> {
    Table {
        map: &'a TriplesMap,
        table: &'a NormalizedTable,
    },
    /// Pre-integrated entities. `predicates` drives the attribute-based
    /// pass structure and must cover every attribute key the entities
    /// hold; build this binding with [`PlanBinding::entities_for`].
    Entities {
        class: &'a IntegratedClass,
        predicates: Vec<String>,
    },
}

impl<'a> PlanBinding<'a> {
    /// Entities binding whose predicate list is the ordered union of the
    /// given maps' predicate-object maps.
    pub fn entities_for(
        class: &'a IntegratedClass,
        maps: impl IntoIterator<Item = &'a TriplesMap>,
    ) -> Self {
        let mut predicates: Vec<String> = Vec::new();
        for map in maps {
            for pom in &map.predicate_object_maps {
                if !predicates.contains(&pom.predicate_iri) {
                    predicates.push(pom.predicate_iri.clone());
                }
            }
        }
        PlanBinding::Entities { class, predicates }
    }
}

/// Counters from one strategy execution. `elapsed` covers the timed
/// region described in the module docs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TripleStats {
    pub triples_emitted: u64,
    /// Distinct subjects that received an rdf:type triple.
    pub subjects_emitted: u64,
    /// Rows whose subject template hit a null placeholder. Counted once
    /// per row, not once per pass.
    pub rows_skipped: u64,
    pub passes_performed: u32,
    pub elapsed: Duration,
}

impl TripleStats {
    pub fn seconds(&self) -> f64 {
        self.elapsed.as_secs_f64()
    }
}

/// Runs `plan.strategy` over `plan.bindings`, emitting into `sink`.
pub fn rdfize(plan: &ExecutionPlan<'_>, sink: &mut impl TripleSink) -> Result<TripleStats, RdfizeError> {
    match plan.strategy {
        Strategy::ClassBased => rdfize_class_based(plan, sink),
        Strategy::AttributeBased => rdfize_attribute_based(plan, sink),
    }
}

pub fn rdfize_class_based(
    plan: &ExecutionPlan<'_>,
    sink: &mut impl TripleSink,
) -> Result<TripleStats, RdfizeError> {
    let prepared = prepare(&plan.bindings)?;
    let mut stats = TripleStats::default();
    let started = Instant::now();
    for binding in &prepared {
        stats.passes_performed += 1;
        match binding {
            Prepared::Table(t) => {
                let mut seen: IndexSet<String> = IndexSet::new();
                for row in &t.table.rows {
                    let Some(subject) = t.subject.expand(&row.cells) else {
                        stats.rows_skipped += 1;
                        continue;
                    };
                    let (index, new) = seen.insert_full(subject);
                    let subject = seen.get_index(index).unwrap().as_str();
                    if new {
                        sink.emit(TripleRef {
                            subject,
                            predicate: RDF_TYPE,
                            object: TermRef::Iri(t.class_iri),
                        })?;
                        stats.subjects_emitted += 1;
                        stats.triples_emitted += 1;
                    }
                    for (predicate, access) in &t.values {
                        stats.triples_emitted += emit_value(sink, subject, predicate, access, row)?;
                    }
                }
            }
            Prepared::Entities { class, .. } => {
                for (subject, entity) in &class.entities {
                    sink.emit(TripleRef {
                        subject,
                        predicate: RDF_TYPE,
                        object: TermRef::Iri(&class.class_iri),
                    })?;
                    stats.subjects_emitted += 1;
                    stats.triples_emitted += 1;
                    for (predicate, values) in &entity.attributes {
                        for value in values {
                            sink.emit(TripleRef { subject, predicate, object: value.as_ref() })?;
                            stats.triples_emitted += 1;
                        }
                    }
                }
            }
        }
    }
    sink.finish()?;
    stats.elapsed = started.elapsed();
    Ok(stats)
}

pub fn rdfize_attribute_based(
    plan: &ExecutionPlan<'_>,
    sink: &mut impl TripleSink,
) -> Result<TripleStats, RdfizeError> {
    let prepared = prepare(&plan.bindings)?;
    let mut stats = TripleStats::default();
    let started = Instant::now();
    for binding in &prepared {
        match binding {
            Prepared::Table(t) => {
                // rdf:type pass.
                stats.passes_performed += 1;
                let mut seen: IndexSet<String> = IndexSet::new();
                for row in &t.table.rows {
                    let Some(subject) = t.subject.expand(&row.cells) else {
                        stats.rows_skipped += 1;
                        continue;
                    };
                    let (index, new) = seen.insert_full(subject);
                    if new {
                        sink.emit(TripleRef {
                            subject: seen.get_index(index).unwrap(),
                            predicate: RDF_TYPE,
                            object: TermRef::Iri(t.class_iri),
                        })?;
                        stats.subjects_emitted += 1;
                        stats.triples_emitted += 1;
                    }
                }
                // One full pass per predicate-object map, subject
                // template re-expanded from scratch every time.
                for (predicate, access) in &t.values {
                    stats.passes_performed += 1;
                    for row in &t.table.rows {
                        let Some(subject) = t.subject.expand(&row.cells) else {
                            continue;
                        };
                        stats.triples_emitted += emit_value(sink, &subject, predicate, access, row)?;
                    }
                }
            }
            Prepared::Entities { class, predicates } => {
                stats.passes_performed += 1;
                for (subject, _) in &class.entities {
                    sink.emit(TripleRef {
                        subject,
                        predicate: RDF_TYPE,
                        object: TermRef::Iri(&class.class_iri),
                    })?;
                    stats.subjects_emitted += 1;
                    stats.triples_emitted += 1;
                }
                for predicate in predicates.iter() {
                    stats.passes_performed += 1;
                    for (subject, entity) in &class.entities {
                        let Some(values) = entity.attributes.get(predicate) else { continue };
                        for value in values {
                            sink.emit(TripleRef { subject, predicate, object: value.as_ref() })?;
                            stats.triples_emitted += 1;
                        }
                    }
                }
            }
        }
    }
    sink.finish()?;
    stats.elapsed = started.elapsed();
    Ok(stats)
}

fn emit_value(
    sink: &mut impl TripleSink,
    subject: &str,
    predicate: &str,
    access: &ValueAccess,
    row: &crate::ingest::Row,
) -> Result<u64, RdfizeError> {
    let object = match access {
        ValueAccess::Cell { index, datatype } => match &row.cells[*index] {
            Some(lexical) => TermRef::Literal { lexical, datatype: datatype.as_deref() },
            None => return Ok(0),
        },
        ValueAccess::Constant(iri) => TermRef::Iri(iri),
        ValueAccess::Template(template) => {
            return match template.expand(&row.cells) {
                Some(iri) => {
                    sink.emit(TripleRef { subject, predicate, object: TermRef::Iri(&iri) })?;
                    Ok(1)
                }
                None => Ok(0),
            };
        }
    };
    sink.emit(TripleRef { subject, predicate, object })?;
    Ok(1)
}

enum Prepared<'a> {
    Table(PreparedTable<'a>),
    Entities { class: &'a IntegratedClass, predicates: &'a [String] },
}

struct PreparedTable<'a> {
    table: &'a NormalizedTable,
    class_iri: &'a str,
    subject: CompiledTemplate,
    values: Vec<(String, ValueAccess)>,
}

fn prepare<'a>(bindings: &'a [PlanBinding<'a>]) -> Result<Vec<Prepared<'a>>, RdfizeError> {
    bindings
        .iter()
        .map(|binding| match binding {
            PlanBinding::Table { map, table } => {
                let subject = CompiledTemplate::compile(&map.subject_map.template, &table.header)?;
                let values = compile_values(&map.predicate_object_maps, &table.header)
                    .map_err(|e| match e {
                        AccessError::Column(column) => RdfizeError::UnboundColumn { column },
                        AccessError::Template(t) => RdfizeError::Template(t),
                    })?;
                Ok(Prepared::Table(PreparedTable {
                    table,
                    class_iri: &map.subject_map.class_iri,
                    subject,
                    values,
                }))
            }
            PlanBinding::Entities { class, predicates } => {
                Ok(Prepared::Entities { class, predicates })
            }
        })
        .collect()
}

/// How one predicate-object map reads a normalized row.
pub(crate) enum ValueAccess {
    Cell { index: usize, datatype: Option<String> },
    Constant(String),
    Template(CompiledTemplate),
}

impl ValueAccess {
    /// Owned-term variant of [`emit_value`], for callers that store terms
    /// instead of streaming them.
    pub(crate) fn term_for(&self, cells: &[Option<String>]) -> Option<crate::rdf::RdfTerm> {
        use crate::rdf::RdfTerm;
        match self {
            ValueAccess::Cell { index, datatype } => cells[*index].as_ref().map(|v| RdfTerm::Literal {
                lexical: v.clone(),
                datatype: datatype.clone(),
            }),
            ValueAccess::Constant(iri) => Some(RdfTerm::Iri(iri.clone())),
            ValueAccess::Template(template) => template.expand(cells).map(RdfTerm::Iri),
        }
    }
}

pub(crate) enum AccessError {
    Column(String),
    Template(TemplateError),
}

pub(crate) fn compile_values(
    poms: &[PredicateObjectMap],
    header: &[String],
) -> Result<Vec<(String, ValueAccess)>, AccessError> {
    poms.iter()
        .map(|pom| {
            let access = match &pom.object {
                ObjectRef::Column(column) => {
                    let index = header
                        .iter()
                        .position(|h| h == column)
                        .ok_or_else(|| AccessError::Column(column.clone()))?;
                    ValueAccess::Cell { index, datatype: pom.datatype_iri.clone() }
                }
                ObjectRef::Constant(iri) => ValueAccess::Constant(iri.clone()),
                ObjectRef::Template(template) => ValueAccess::Template(
                    CompiledTemplate::compile(template, header).map_err(AccessError::Template)?,
                ),
            };
            Ok((pom.predicate_iri.clone(), access))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Row, SourceTable};
    use crate::integrate::integrate;
    use crate::mapping::{IriTemplate, LogicalSource, SourceFormat, SubjectMap};
    use crate::normalize::normalize;
    use crate::rdf::{CollectSink, Triple};
    use std::collections::HashSet;

    fn test_map(columns: &[&str]) -> TriplesMap {
        TriplesMap {
            id: "http://ex.org/M".into(),
            logical_source: LogicalSource::for_name("s.csv"),
            subject_map: SubjectMap {
                template: IriTemplate::parse("http://ex.org/e/{key}").unwrap(),
                class_iri: "http://ex.org/T".into(),
            },
            predicate_object_maps: columns
                .iter()
                .map(|c| PredicateObjectMap {
                    predicate_iri: format!("http://ex.org/p/{c}"),
                    object: ObjectRef::Column((*c).to_owned()),
                    datatype_iri: None,
                })
                .collect(),
        }
    }

    fn table_for(map: &TriplesMap, header: &[&str], rows: &[&[&str]]) -> NormalizedTable {
        let source = SourceTable {
            name: "s.csv".into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows.iter().map(|r| Row::from_fields(r.iter().copied())).collect(),
            format: SourceFormat::Csv,
        };
        normalize(&source, map).unwrap()
    }

    fn run(strategy: Strategy, bindings: Vec<PlanBinding<'_>>) -> (Vec<Triple>, TripleStats) {
        let plan = ExecutionPlan { strategy, bindings };
        let mut sink = CollectSink::default();
        let stats = rdfize(&plan, &mut sink).unwrap();
        (sink.triples, stats)
    }

    #[test]
    fn three_rows_five_attributes_all_non_null() {
        let map = test_map(&["a", "b", "c", "d", "e"]);
        let table = table_for(
            &map,
            &["key", "a", "b", "c", "d", "e"],
            &[
                &["1", "v", "v", "v", "v", "v"],
                &["2", "v", "v", "v", "v", "v"],
                &["3", "v", "v", "v", "v", "v"],
            ],
        );
        let (triples, stats) = run(Strategy::ClassBased, vec![PlanBinding::Table { map: &map, table: &table }]);
        assert_eq!(triples.len(), 18); // 3 * (1 type + 5 values)
        assert_eq!(stats.triples_emitted, 18);
        assert_eq!(stats.subjects_emitted, 3);
        assert_eq!(stats.passes_performed, 1);
    }

    #[test]
    fn attribute_based_pass_count_is_poms_plus_one() {
        let map = test_map(&["a", "b", "c"]);
        let table = table_for(&map, &["key", "a", "b", "c"], &[&["1", "x", "y", "z"]]);
        let (_, stats) = run(Strategy::AttributeBased, vec![PlanBinding::Table { map: &map, table: &table }]);
        assert_eq!(stats.passes_performed, 4);
    }

    #[test]
    fn strategies_emit_equal_sets_with_nulls_and_duplicate_subjects() {
        let map = test_map(&["a", "b"]);
        let table = table_for(
            &map,
            &["key", "a", "b"],
            &[
                &["1", "x", ""],
                &["1", "", "y"], // same subject, different projection
                &["2", "", ""],
                &["1", "x", ""],
            ],
        );
        let class_based = run(Strategy::ClassBased, vec![PlanBinding::Table { map: &map, table: &table }]);
        let attr_based = run(Strategy::AttributeBased, vec![PlanBinding::Table { map: &map, table: &table }]);
        let class_set: HashSet<_> = class_based.0.iter().cloned().collect();
        let attr_set: HashSet<_> = attr_based.0.iter().cloned().collect();
        assert_eq!(class_set, attr_set);
        assert_eq!(class_based.1.triples_emitted, attr_based.1.triples_emitted);
        assert_eq!(class_based.1.subjects_emitted, 2);
        // normalization dropped the repeated projected row, and type
        // triples deduplicate per subject: 2 types + 2 values
        assert_eq!(class_based.1.triples_emitted, 4);
    }

    #[test]
    fn null_subject_rows_are_skipped_once() {
        let mut map = test_map(&["a"]);
        map.subject_map.template = IriTemplate::parse("http://ex.org/e/{key}/{key2}").unwrap();
        let table = table_for(&map, &["key", "key2", "a"], &[&["1", "", "x"], &["1", "2", "y"]]);
        for strategy in [Strategy::ClassBased, Strategy::AttributeBased] {
            let (triples, stats) = run(strategy, vec![PlanBinding::Table { map: &map, table: &table }]);
            assert_eq!(stats.rows_skipped, 1, "{strategy}");
            assert_eq!(triples.len(), 2, "{strategy}");
        }
    }

    #[test]
    fn entities_bindings_match_table_bindings() {
        let map = test_map(&["a", "b"]);
        let table = table_for(
            &map,
            &["key", "a", "b"],
            &[&["1", "x", "y"], &["2", "", "z"], &["1", "q", "y"]],
        );
        let outcome = integrate("http://ex.org/T", [(&table, &map)]).unwrap();

        let from_table: HashSet<Triple> = run(
            Strategy::ClassBased,
            vec![PlanBinding::Table { map: &map, table: &table }],
        )
        .0
        .into_iter()
        .collect();

        for strategy in [Strategy::ClassBased, Strategy::AttributeBased] {
            let (triples, stats) = run(
                strategy,
                vec![PlanBinding::entities_for(&outcome.class, [&map])],
            );
            let set: HashSet<Triple> = triples.into_iter().collect();
            assert_eq!(set, from_table, "{strategy}");
            assert_eq!(stats.subjects_emitted, 2, "{strategy}");
        }
    }

    #[test]
    fn constant_and_template_objects_emit_iris() {
        let mut map = test_map(&[]);
        map.predicate_object_maps = vec![
            PredicateObjectMap {
                predicate_iri: "http://ex.org/p/const".into(),
                object: ObjectRef::Constant("http://ex.org/K".into()),
                datatype_iri: None,
            },
            PredicateObjectMap {
                predicate_iri: "http://ex.org/p/tpl".into(),
                object: ObjectRef::Template(IriTemplate::parse("http://ex.org/v/{a}").unwrap()),
                datatype_iri: None,
            },
        ];
        let table = table_for(&map, &["key", "a"], &[&["1", "x y"], &["2", ""]]);
        let (triples, _) = run(Strategy::ClassBased, vec![PlanBinding::Table { map: &map, table: &table }]);
        let objects: HashSet<String> = triples
            .iter()
            .filter_map(|t| match &t.object {
                crate::rdf::RdfTerm::Iri(iri) if t.predicate != RDF_TYPE => Some(iri.clone()),
                _ => None,
            })
            .collect();
        assert!(objects.contains("http://ex.org/K"));
        assert!(objects.contains("http://ex.org/v/x%20y"));
        // The null template placeholder skips that value, not the row.
        assert_eq!(
            triples
                .iter()
                .filter(|t| t.subject == "http://ex.org/e/2" && t.predicate != RDF_TYPE)
                .count(),
            1 // just the constant
        );
    }

    #[test]
    fn empty_table_emits_nothing_but_still_counts_passes() {
        let map = test_map(&["a"]);
        let table = table_for(&map, &["key", "a"], &[]);
        let (triples, stats) = run(Strategy::AttributeBased, vec![PlanBinding::Table { map: &map, table: &table }]);
        assert!(triples.is_empty());
        assert_eq!(stats.passes_performed, 2);
        assert_eq!(stats.triples_emitted, 0);
    }
}
