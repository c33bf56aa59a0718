//! Canonical serializer for mapping documents.
//!
//! Output is deterministic: the standard prefix block, an `@base` line
//! when the set has one, then each triples map in order with its
//! properties in a fixed layout. Non-vocabulary IRIs are written in full,
//! so parse → serialize → parse is a fixed point.

use super::{MappingSet, ObjectRef, TriplesMap};

pub fn serialize_mapping(set: &MappingSet) -> String {
    let mut out = String::new();
    out.push_str("@prefix rml: <http://semweb.mmlab.be/ns/rml#> .\n");
    out.push_str("@prefix rr: <http://www.w3.org/ns/r2rml#> .\n");
    out.push_str("@prefix ql: <http://semweb.mmlab.be/ns/ql#> .\n");
    if let Some(base) = &set.base_iri {
        out.push_str("@base <");
        out.push_str(base);
        out.push_str("> .\n");
    }
    for map in &set.triples_maps {
        out.push('\n');
        write_map(map, &mut out);
    }
    out
}

fn write_map(map: &TriplesMap, out: &mut String) {
    out.push('<');
    out.push_str(&map.id);
    out.push_str(">\n");

    out.push_str("    rml:logicalSource [\n        rml:source ");
    write_string(&map.logical_source.source_name, out);
    out.push_str(" ;\n        rml:referenceFormulation ql:CSV\n    ] ;\n");

    out.push_str("    rr:subjectMap [\n        rr:template ");
    write_string(&map.subject_map.template.to_text(), out);
    out.push_str(" ;\n        rr:class <");
    out.push_str(&map.subject_map.class_iri);
    out.push_str(">\n    ]");

    for pom in &map.predicate_object_maps {
        out.push_str(" ;\n    rr:predicateObjectMap [\n        rr:predicate <");
        out.push_str(&pom.predicate_iri);
        out.push_str("> ;\n        rr:objectMap [ ");
        match &pom.object {
            ObjectRef::Column(column) => {
                out.push_str("rml:reference ");
                write_string(column, out);
            }
            ObjectRef::Template(template) => {
                out.push_str("rr:template ");
                write_string(&template.to_text(), out);
            }
            ObjectRef::Constant(iri) => {
                out.push_str("rr:constant <");
                out.push_str(iri);
                out.push('>');
            }
        }
        if let Some(datatype) = &pom.datatype_iri {
            out.push_str(" ; rr:datatype <");
            out.push_str(datatype);
            out.push('>');
        }
        out.push_str(" ]\n    ]");
    }
    out.push_str(" .\n");
}

fn write_string(value: &str, out: &mut String) {
    out.push('"');
    for ch in value.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}
