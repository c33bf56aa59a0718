//! RDF terms, triples, and the N-Triples output path.

mod ntriples;
pub(crate) mod strategy;
mod template;

pub use ntriples::{
    dedupe_triples, write_ntriples, CollectSink, DedupeSink, NtriplesWriter, NullSink, TripleSink,
};
pub use strategy::{
    rdfize, rdfize_attribute_based, rdfize_class_based, ExecutionPlan, PlanBinding, RdfizeError,
    Strategy, TripleStats,
};
pub use template::{expand_template, CompiledTemplate, Expansion, TemplateError};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// An RDF term in the object position. Subjects and predicates are plain
/// IRI strings; only objects need the IRI/literal split.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RdfTerm {
    Iri(String),
    Literal {
        lexical: String,
        /// Datatype IRI; `None` means a plain `xsd:string` literal.
        datatype: Option<String>,
    },
}

impl RdfTerm {
    pub fn literal(lexical: impl Into<String>) -> Self {
        RdfTerm::Literal { lexical: lexical.into(), datatype: None }
    }

    pub fn as_ref(&self) -> TermRef<'_> {
        match self {
            RdfTerm::Iri(iri) => TermRef::Iri(iri),
            RdfTerm::Literal { lexical, datatype } => {
                TermRef::Literal { lexical, datatype: datatype.as_deref() }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: RdfTerm,
}

impl Triple {
    pub fn as_ref(&self) -> TripleRef<'_> {
        TripleRef { subject: &self.subject, predicate: &self.predicate, object: self.object.as_ref() }
    }
}

/// Borrowed view of a triple. The strategy engines emit these so the hot
/// path never allocates per line; sinks that need ownership call
/// [`TripleRef::to_owned`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleRef<'a> {
    pub subject: &'a str,
    pub predicate: &'a str,
    pub object: TermRef<'a>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermRef<'a> {
    Iri(&'a str),
    Literal { lexical: &'a str, datatype: Option<&'a str> },
}

impl TripleRef<'_> {
    pub fn to_owned(&self) -> Triple {
        Triple {
            subject: self.subject.to_owned(),
            predicate: self.predicate.to_owned(),
            object: match self.object {
                TermRef::Iri(iri) => RdfTerm::Iri(iri.to_owned()),
                TermRef::Literal { lexical, datatype } => RdfTerm::Literal {
                    lexical: lexical.to_owned(),
                    datatype: datatype.map(str::to_owned),
                },
            },
        }
    }
}
