//! The mapping model: which tabular sources feed which classes, how row
//! cells become subject IRIs and property values.
//!
//! Documents use a strict Turtle subset (see [`parse_mapping_document`]);
//! everything here can also be built programmatically.

mod parse;
mod serialize;

pub use parse::parse_mapping_document;
pub use serialize::serialize_mapping;

pub mod vocab {
    //! IRIs of the mapping vocabulary accepted by the parser.

    pub const RML_NS: &str = "http://semweb.mmlab.be/ns/rml#";
    pub const RR_NS: &str = "http://www.w3.org/ns/r2rml#";
    pub const QL_NS: &str = "http://semweb.mmlab.be/ns/ql#";

    pub const RML_LOGICAL_SOURCE: &str = "http://semweb.mmlab.be/ns/rml#logicalSource";
    pub const RML_SOURCE: &str = "http://semweb.mmlab.be/ns/rml#source";
    pub const RML_REFERENCE_FORMULATION: &str = "http://semweb.mmlab.be/ns/rml#referenceFormulation";
    pub const RML_REFERENCE: &str = "http://semweb.mmlab.be/ns/rml#reference";

    pub const RR_SUBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#subjectMap";
    pub const RR_CLASS: &str = "http://www.w3.org/ns/r2rml#class";
    pub const RR_TEMPLATE: &str = "http://www.w3.org/ns/r2rml#template";
    pub const RR_PREDICATE_OBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#predicateObjectMap";
    pub const RR_PREDICATE: &str = "http://www.w3.org/ns/r2rml#predicate";
    pub const RR_OBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#objectMap";
    pub const RR_CONSTANT: &str = "http://www.w3.org/ns/r2rml#constant";
    pub const RR_DATATYPE: &str = "http://www.w3.org/ns/r2rml#datatype";

    pub const QL_CSV: &str = "http://semweb.mmlab.be/ns/ql#CSV";
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MappingError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{message}")]
    Semantic { message: String },
    #[error("duplicate triples map <{iri}>")]
    DuplicateId { iri: String },
}

/// A parsed mapping document: every triples map, plus the base IRI used
/// to resolve any relative IRIs it contained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingSet {
    pub base_iri: Option<String>,
    pub triples_maps: Vec<TriplesMap>,
}

impl MappingSet {
    /// Triples maps grouped by class IRI, first-seen class order, each
    /// group in document order.
    pub fn maps_by_class(&self) -> Vec<(&str, Vec<&TriplesMap>)> {
        let mut groups: Vec<(&str, Vec<&TriplesMap>)> = Vec::new();
        for map in &self.triples_maps {
            let class = map.subject_map.class_iri.as_str();
            match groups.iter_mut().find(|(c, _)| *c == class) {
                Some((_, maps)) => maps.push(map),
                None => groups.push((class, vec![map])),
            }
        }
        groups
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesMap {
    /// Absolute IRI identifying the map.
    pub id: String,
    pub logical_source: LogicalSource,
    pub subject_map: SubjectMap,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
}

impl TriplesMap {
    /// Every column the map reads, first occurrence wins: subject template
    /// placeholders in template order, then each predicate-object map in
    /// document order.
    pub fn referenced_columns(&self) -> Vec<&str> {
        fn add_unique<'a>(out: &mut Vec<&'a str>, col: &'a str) {
            if !out.contains(&col) {
                out.push(col);
            }
        }
        let mut out: Vec<&str> = Vec::new();
        for p in self.subject_map.template.placeholders() {
            add_unique(&mut out, p);
        }
        for pom in &self.predicate_object_maps {
            match &pom.object {
                ObjectRef::Column(col) => add_unique(&mut out, col),
                ObjectRef::Template(t) => {
                    for p in t.placeholders() {
                        add_unique(&mut out, p);
                    }
                }
                ObjectRef::Constant(_) => {}
            }
        }
        out
    }

    /// Missing-column issues for running this map against `header`.
    /// Deduplicated by column, in reference order.
    pub fn validate_against_header(&self, header: &[String]) -> Vec<ValidationIssue> {
        self.referenced_columns()
            .into_iter()
            .filter(|col| !header.iter().any(|h| h == col))
            .map(|col| ValidationIssue::MissingColumn { column: col.to_owned() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    MissingColumn { column: String },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::MissingColumn { column } => {
                write!(f, "referenced column {column:?} is missing from the source header")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalSource {
    /// File name of the source, resolved against a source directory at
    /// load time.
    pub source_name: String,
    pub format: SourceFormat,
}

impl LogicalSource {
    /// Format follows the file extension: `.tsv` means tab-separated, and
    /// anything else is RFC 4180 CSV.
    pub fn for_name(source_name: impl Into<String>) -> Self {
        let source_name = source_name.into();
        let format = SourceFormat::from_name(&source_name);
        LogicalSource { source_name, format }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    Tsv,
}

impl SourceFormat {
    pub fn from_name(name: &str) -> Self {
        let lower = name.to_ascii_lowercase();
        if lower.ends_with(".tsv") {
            SourceFormat::Tsv
        } else {
            SourceFormat::Csv
        }
    }

    pub fn delimiter(self) -> u8 {
        match self {
            SourceFormat::Csv => b',',
            SourceFormat::Tsv => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectMap {
    pub template: IriTemplate,
    pub class_iri: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateObjectMap {
    pub predicate_iri: String,
    pub object: ObjectRef,
    /// Only allowed when `object` is a column reference.
    pub datatype_iri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectRef {
    /// Cell value becomes a literal.
    Column(String),
    /// Fixed IRI emitted for every row.
    Constant(String),
    /// Expanded per row into an IRI.
    Template(IriTemplate),
}

/// An IRI template: fixed text with `{COLUMN}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IriTemplate {
    pub segments: Vec<TemplateSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSegment {
    Literal(String),
    Placeholder(String),
}

impl IriTemplate {
    /// Parses `{...}` placeholder syntax. Braces cannot be escaped, so
    /// fixed text never contains `{` or `}`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut chars = text.chars();
        while let Some(ch) = chars.next() {
            match ch {
                '{' => {
                    if !literal.is_empty() {
                        segments.push(TemplateSegment::Literal(std::mem::take(&mut literal)));
                    }
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some('{') => return Err(format!("nested '{{' in template {text:?}")),
                            Some(c) => name.push(c),
                            None => return Err(format!("unclosed '{{' in template {text:?}")),
                        }
                    }
                    if name.is_empty() {
                        return Err(format!("empty placeholder in template {text:?}"));
                    }
                    segments.push(TemplateSegment::Placeholder(name));
                }
                '}' => return Err(format!("unmatched '}}' in template {text:?}")),
                c => literal.push(c),
            }
        }
        if !literal.is_empty() {
            segments.push(TemplateSegment::Literal(literal));
        }
        Ok(IriTemplate { segments })
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            TemplateSegment::Placeholder(name) => Some(name.as_str()),
            TemplateSegment::Literal(_) => None,
        })
    }

    /// The source text form, reconstructed.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                TemplateSegment::Literal(text) => out.push_str(text),
                TemplateSegment::Placeholder(name) => {
                    out.push('{');
                    out.push_str(name);
                    out.push('}');
                }
            }
        }
        out
    }

    /// Whether the template starts with fixed text that opens an absolute
    /// IRI (a scheme followed by `:`).
    pub fn has_absolute_stem(&self) -> bool {
        match self.segments.first() {
            Some(TemplateSegment::Literal(text)) => has_scheme(text),
            _ => false,
        }
    }
}

/// Whether `iri` starts with an RFC 3986 scheme (`ALPHA (ALPHA / DIGIT /
/// "+" / "-" / ".")* ":"`).
pub(crate) fn has_scheme(iri: &str) -> bool {
    let mut chars = iri.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for c in chars {
        match c {
            ':' => return true,
            c if c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.') => {}
            _ => return false,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_with_columns() -> TriplesMap {
        TriplesMap {
            id: "http://ex.org/map/M".into(),
            logical_source: LogicalSource::for_name("data.csv"),
            subject_map: SubjectMap {
                template: IriTemplate::parse("http://ex.org/item/{ID}").unwrap(),
                class_iri: "http://ex.org/Item".into(),
            },
            predicate_object_maps: vec![
                PredicateObjectMap {
                    predicate_iri: "http://ex.org/a".into(),
                    object: ObjectRef::Column("A".into()),
                    datatype_iri: None,
                },
                PredicateObjectMap {
                    predicate_iri: "http://ex.org/b".into(),
                    object: ObjectRef::Template(IriTemplate::parse("http://ex.org/b/{B}/{ID}").unwrap()),
                    datatype_iri: None,
                },
                PredicateObjectMap {
                    predicate_iri: "http://ex.org/c".into(),
                    object: ObjectRef::Constant("http://ex.org/C".into()),
                    datatype_iri: None,
                },
            ],
        }
    }

    #[test]
    fn template_parse_round_trip() {
        let text = "http://ex.org/{A}/fixed/{B}";
        let t = IriTemplate::parse(text).unwrap();
        assert_eq!(t.to_text(), text);
        assert_eq!(t.placeholders().collect::<Vec<_>>(), vec!["A", "B"]);
    }

    #[test]
    fn template_rejects_bad_braces() {
        assert!(IriTemplate::parse("http://ex.org/{").is_err());
        assert!(IriTemplate::parse("http://ex.org/}").is_err());
        assert!(IriTemplate::parse("http://ex.org/{}").is_err());
        assert!(IriTemplate::parse("http://ex.org/{A{B}}").is_err());
    }

    #[test]
    fn referenced_columns_ordered_and_deduped() {
        let map = map_with_columns();
        assert_eq!(map.referenced_columns(), vec!["ID", "A", "B"]);
    }

    #[test]
    fn header_validation_names_missing_columns() {
        let map = map_with_columns();
        let header: Vec<String> = ["ID", "B"].iter().map(|s| s.to_string()).collect();
        let issues = map.validate_against_header(&header);
        assert_eq!(issues, vec![ValidationIssue::MissingColumn { column: "A".into() }]);
        assert!(map
            .validate_against_header(&["ID".into(), "A".into(), "B".into()])
            .is_empty());
    }

    #[test]
    fn format_follows_extension() {
        assert_eq!(SourceFormat::from_name("x.tsv"), SourceFormat::Tsv);
        assert_eq!(SourceFormat::from_name("x.TSV"), SourceFormat::Tsv);
        assert_eq!(SourceFormat::from_name("x.csv"), SourceFormat::Csv);
        assert_eq!(SourceFormat::from_name("x.txt"), SourceFormat::Csv);
    }

    #[test]
    fn scheme_detection() {
        assert!(has_scheme("http://ex.org/x"));
        assert!(has_scheme("urn:x"));
        assert!(!has_scheme("#fragment"));
        assert!(!has_scheme("relative/path"));
        assert!(!has_scheme("9http://x"));
        assert!(!has_scheme("ab#c:d"));
    }
}
