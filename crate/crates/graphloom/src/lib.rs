//! graphloom materializes RDF knowledge graphs from delimited files.
//!
//! A mapping document binds each class to one tabular source, an IRI
//! template for subjects, and a list of predicate-object maps. The
//! pipeline is: load ([`ingest`]) → per-class projection and
//! deduplication ([`normalize`]) → subject-key merge across sources
//! ([`integrate`]) → triple emission ([`rdf`]). Emission runs under one
//! of two strategies that produce identical triple sets but different
//! pass structures, and [`bench`] measures them against each other.
//!
//! ```
//! use graphloom::ingest::{Row, SourceTable};
//! use graphloom::mapping::{parse_mapping_document, SourceFormat};
//! use graphloom::normalize::normalize;
//! use graphloom::rdf::{rdfize_class_based, CollectSink, ExecutionPlan, PlanBinding, Strategy};
//!
//! let set = parse_mapping_document(r#"
//! @prefix rml: <http://semweb.mmlab.be/ns/rml#> .
//! @prefix rr: <http://www.w3.org/ns/r2rml#> .
//! @prefix ex: <http://example.org/> .
//! ex:M rml:logicalSource [ rml:source "genes.csv" ] ;
//!   rr:subjectMap [ rr:template "http://example.org/gene/{ID}" ; rr:class ex:Gene ] ;
//!   rr:predicateObjectMap [ rr:predicate ex:symbol ; rr:objectMap [ rml:reference "SYM" ] ] .
//! "#).unwrap();
//! let map = &set.triples_maps[0];
//!
//! let source = SourceTable {
//!     name: "genes.csv".into(),
//!     header: vec!["ID".into(), "SYM".into()],
//!     rows: vec![Row::from_fields(["g1", "TP53"])],
//!     format: SourceFormat::Csv,
//! };
//! let table = normalize(&source, map).unwrap();
//!
//! let plan = ExecutionPlan {
//!     strategy: Strategy::ClassBased,
//!     bindings: vec![PlanBinding::Table { map, table: &table }],
//! };
//! let mut sink = CollectSink::default();
//! let stats = rdfize_class_based(&plan, &mut sink).unwrap();
//! assert_eq!(stats.triples_emitted, 2); // rdf:type + ex:symbol
//! ```

pub mod bench;
pub mod ingest;
pub mod integrate;
pub mod mapping;
pub mod normalize;
pub mod rdf;
