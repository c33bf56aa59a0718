//! Parser for mapping documents.
//!
//! The accepted language is a strict subset of Turtle: `@prefix` and
//! `@base` declarations followed by one statement per triples map, where
//! every property is one of the vocabulary IRIs in [`super::vocab`] and
//! every nested map is an inline blank node. Anything outside that subset
//! is rejected up front rather than silently skipped, so a mapping that
//! parses is a mapping this engine fully executes.
//!
//! ```
//! use graphloom::mapping::{parse_mapping_document, ObjectRef};
//!
//! let doc = r##"
//! @prefix rml: <http://semweb.mmlab.be/ns/rml#> .
//! @prefix rr: <http://www.w3.org/ns/r2rml#> .
//! @prefix ql: <http://semweb.mmlab.be/ns/ql#> .
//! @prefix ex: <http://example.org/> .
//! @base <http://example.org/maps> .
//!
//! <#Gene>
//!     rml:logicalSource [
//!         rml:source "genes.tsv" ;
//!         rml:referenceFormulation ql:CSV
//!     ] ;
//!     rr:subjectMap [
//!         rr:template "http://example.org/gene/{GENE_ID}" ;
//!         rr:class ex:Gene
//!     ] ;
//!     rr:predicateObjectMap [
//!         rr:predicate ex:symbol ;
//!         rr:objectMap [ rml:reference "SYMBOL" ]
//!     ] .
//! "##;
//!
//! let set = parse_mapping_document(doc).unwrap();
//! let map = &set.triples_maps[0];
//! assert_eq!(map.id, "http://example.org/maps#Gene");
//! assert_eq!(map.logical_source.source_name, "genes.tsv");
//! assert_eq!(map.subject_map.class_iri, "http://example.org/Gene");
//! assert_eq!(map.predicate_object_maps[0].object, ObjectRef::Column("SYMBOL".into()));
//! ```

use std::collections::{HashMap, HashSet};

use super::vocab::*;
use super::{
    has_scheme, IriTemplate, LogicalSource, MappingError, MappingSet, ObjectRef,
    PredicateObjectMap, SubjectMap, TriplesMap,
};

pub fn parse_mapping_document(text: &str) -> Result<MappingSet, MappingError> {
    Parser::new(text).parse_document()
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> MappingError {
    MappingError::Syntax { line, col, message: message.into() }
}

fn semantic(message: impl Into<String>) -> MappingError {
    MappingError::Semantic { message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Iri(String),
    PName { prefix: String, local: String },
    Str(String),
    AtPrefix,
    AtBase,
    Open,
    Close,
    Semi,
    Dot,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Iri(iri) => format!("<{iri}>"),
            Token::PName { prefix, local } => format!("{prefix}:{local}"),
            Token::Str(_) => "a string".into(),
            Token::AtPrefix => "@prefix".into(),
            Token::AtBase => "@base".into(),
            Token::Open => "'['".into(),
            Token::Close => "']'".into(),
            Token::Semi => "';'".into(),
            Token::Dot => "'.'".into(),
            Token::Eof => "end of document".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
    /// Dots split off the tail of a prefixed-name local part, waiting to
    /// be emitted as their own tokens.
    pending_dots: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { text, pos: 0, line: 1, col: 1, pending_dots: 0 }
    }

    fn peek_char(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek_char()?;
        self.pos += ch.len_utf8();
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(ch)
    }

    fn skip_trivia(&mut self) {
        while let Some(ch) = self.peek_char() {
            if ch.is_whitespace() {
                self.bump();
            } else if ch == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Spanned, MappingError> {
        if self.pending_dots > 0 {
            self.pending_dots -= 1;
            // col points just past the trimmed local part.
            return Ok(Spanned { token: Token::Dot, line: self.line, col: self.col });
        }
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let spanned = |token| Ok(Spanned { token, line, col });
        let Some(ch) = self.peek_char() else {
            return spanned(Token::Eof);
        };
        match ch {
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some('\n') | None => return Err(syntax(line, col, "unterminated IRI")),
                        Some(c) => iri.push(c),
                    }
                }
                spanned(Token::Iri(iri))
            }
            '"' => {
                self.bump();
                let mut value = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some('n') => value.push('\n'),
                            Some('r') => value.push('\r'),
                            Some('t') => value.push('\t'),
                            Some(c) => {
                                return Err(syntax(line, col, format!("unsupported escape '\\{c}'")))
                            }
                            None => return Err(syntax(line, col, "unterminated string")),
                        },
                        Some('\n') | None => return Err(syntax(line, col, "unterminated string")),
                        Some(c) => value.push(c),
                    }
                }
                spanned(Token::Str(value))
            }
            '[' => {
                self.bump();
                spanned(Token::Open)
            }
            ']' => {
                self.bump();
                spanned(Token::Close)
            }
            ';' => {
                self.bump();
                spanned(Token::Semi)
            }
            '.' => {
                self.bump();
                spanned(Token::Dot)
            }
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphabetic());
                match word.as_str() {
                    "prefix" => spanned(Token::AtPrefix),
                    "base" => spanned(Token::AtBase),
                    _ => Err(syntax(line, col, format!("unknown directive '@{word}'"))),
                }
            }
            c if c == ':' || c == '_' || c.is_ascii_alphabetic() => {
                let prefix = self.take_while(|c| c == '_' || c == '-' || c.is_ascii_alphanumeric());
                if self.peek_char() != Some(':') {
                    return Err(syntax(
                        line,
                        col,
                        format!("expected ':' after '{prefix}' (bare words are not in the subset)"),
                    ));
                }
                self.bump();
                let mut local =
                    self.take_while(|c| matches!(c, '_' | '-' | '.' | '%') || c.is_ascii_alphanumeric());
                while local.ends_with('.') {
                    local.pop();
                    self.pending_dots += 1;
                }
                spanned(Token::PName { prefix, local })
            }
            c => Err(syntax(line, col, format!("unexpected character '{c}'"))),
        }
    }

    fn take_while(&mut self, keep: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek_char() {
            if keep(c) {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }
}

/// A property parsed from a statement or blank node, before the
/// vocabulary is interpreted.
struct Prop {
    pred: String,
    line: usize,
    col: usize,
    value: Value,
}

enum Value {
    Iri(String),
    Str(String),
    Blank(Vec<Prop>),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Iri(_) => "an IRI",
            Value::Str(_) => "a string",
            Value::Blank(_) => "a nested map",
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<Spanned>,
    prefixes: HashMap<String, String>,
    base: Option<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { lexer: Lexer::new(text), lookahead: None, prefixes: HashMap::new(), base: None }
    }

    fn peek(&mut self) -> Result<&Spanned, MappingError> {
        if self.lookahead.is_none() {
            self.lookahead = Some(self.lexer.next_token()?);
        }
        Ok(self.lookahead.as_ref().unwrap())
    }

    fn next(&mut self) -> Result<Spanned, MappingError> {
        match self.lookahead.take() {
            Some(t) => Ok(t),
            None => self.lexer.next_token(),
        }
    }

    fn expect(&mut self, want: Token, context: &str) -> Result<Spanned, MappingError> {
        let tok = self.next()?;
        if tok.token == want {
            Ok(tok)
        } else {
            Err(syntax(
                tok.line,
                tok.col,
                format!("expected {} {context}, found {}", want.describe(), tok.token.describe()),
            ))
        }
    }

    fn parse_document(mut self) -> Result<MappingSet, MappingError> {
        let mut triples_maps: Vec<TriplesMap> = Vec::new();
        let mut seen_ids: HashSet<String> = HashSet::new();
        loop {
            let tok = self.next()?;
            match tok.token {
                Token::Eof => break,
                Token::AtPrefix => self.parse_prefix_decl()?,
                Token::AtBase => self.parse_base_decl()?,
                Token::Iri(_) | Token::PName { .. } => {
                    let id = self.resolve_token(&tok)?;
                    let props = self.parse_props(Token::Dot)?;
                    self.expect(Token::Dot, "to end the triples map")?;
                    if !seen_ids.insert(id.clone()) {
                        return Err(MappingError::DuplicateId { iri: id });
                    }
                    triples_maps.push(self.build_triples_map(id, props)?);
                }
                other => {
                    return Err(syntax(
                        tok.line,
                        tok.col,
                        format!(
                            "expected @prefix, @base, or a triples map subject, found {}",
                            other.describe()
                        ),
                    ))
                }
            }
        }
        Ok(MappingSet { base_iri: self.base, triples_maps })
    }

    fn parse_prefix_decl(&mut self) -> Result<(), MappingError> {
        let tok = self.next()?;
        let name = match tok.token {
            Token::PName { prefix, local } if local.is_empty() => prefix,
            other => {
                return Err(syntax(
                    tok.line,
                    tok.col,
                    format!("expected a prefix name after @prefix, found {}", other.describe()),
                ))
            }
        };
        let iri_tok = self.next()?;
        let iri = match iri_tok.token {
            Token::Iri(iri) => self.resolve_iri(iri, iri_tok.line, iri_tok.col)?,
            other => {
                return Err(syntax(
                    iri_tok.line,
                    iri_tok.col,
                    format!("expected a namespace IRI, found {}", other.describe()),
                ))
            }
        };
        self.expect(Token::Dot, "to end the @prefix declaration")?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn parse_base_decl(&mut self) -> Result<(), MappingError> {
        let tok = self.next()?;
        match tok.token {
            Token::Iri(iri) => {
                if !has_scheme(&iri) {
                    return Err(syntax(tok.line, tok.col, format!("@base IRI <{iri}> is not absolute")));
                }
                self.base = Some(iri);
            }
            other => {
                return Err(syntax(
                    tok.line,
                    tok.col,
                    format!("expected an IRI after @base, found {}", other.describe()),
                ))
            }
        }
        self.expect(Token::Dot, "to end the @base declaration")?;
        Ok(())
    }

    /// Parses `pred value (';' pred value)*` up to (not consuming) the
    /// closing token: `.` for statements, `]` for blank nodes.
    fn parse_props(&mut self, until: Token) -> Result<Vec<Prop>, MappingError> {
        let mut props = Vec::new();
        loop {
            let tok = self.next()?;
            let (pred, line, col) = match &tok.token {
                Token::Iri(_) | Token::PName { .. } => {
                    (self.resolve_token(&tok)?, tok.line, tok.col)
                }
                other => {
                    return Err(syntax(
                        tok.line,
                        tok.col,
                        format!("expected a property IRI, found {}", other.describe()),
                    ))
                }
            };
            let value_tok = self.next()?;
            let value = match value_tok.token {
                Token::Open => {
                    let inner = self.parse_props(Token::Close)?;
                    self.expect(Token::Close, "to end the nested map")?;
                    Value::Blank(inner)
                }
                Token::Iri(_) | Token::PName { .. } => Value::Iri(self.resolve_token(&value_tok)?),
                Token::Str(s) => Value::Str(s),
                other => {
                    return Err(syntax(
                        value_tok.line,
                        value_tok.col,
                        format!("expected an IRI, a string, or '[', found {}", other.describe()),
                    ))
                }
            };
            props.push(Prop { pred, line, col, value });
            let sep = self.peek()?;
            match &sep.token {
                Token::Semi => {
                    self.next()?;
                    // Trailing ';' before the closing token is fine.
                    if self.peek()?.token == until {
                        break;
                    }
                }
                t if *t == until => break,
                other => {
                    let (l, c, d) = (sep.line, sep.col, other.describe());
                    return Err(syntax(l, c, format!("expected ';' or {}, found {d}", until.describe())));
                }
            }
        }
        Ok(props)
    }

    fn resolve_token(&self, tok: &Spanned) -> Result<String, MappingError> {
        match &tok.token {
            Token::Iri(iri) => self.resolve_iri(iri.clone(), tok.line, tok.col),
            Token::PName { prefix, local } => match self.prefixes.get(prefix) {
                Some(ns) => Ok(format!("{ns}{local}")),
                None => Err(syntax(tok.line, tok.col, format!("undefined prefix '{prefix}:'"))),
            },
            _ => unreachable!("resolve_token called on a non-IRI token"),
        }
    }

    /// Relative IRIs resolve against the `@base` IRI: a `<#Name>`
    /// reference replaces the base's fragment part; anything else is
    /// appended. That covers the fragment and suffix styles mappings use
    /// without dragging in full reference resolution.
    fn resolve_iri(&self, iri: String, line: usize, col: usize) -> Result<String, MappingError> {
        if has_scheme(&iri) {
            return Ok(iri);
        }
        match &self.base {
            Some(base) => {
                let base = if iri.starts_with('#') {
                    base.split('#').next().unwrap_or(base)
                } else {
                    base
                };
                Ok(format!("{base}{iri}"))
            }
            None => Err(syntax(
                line,
                col,
                format!("relative IRI <{iri}> needs an @base declaration"),
            )),
        }
    }

    fn build_triples_map(&self, id: String, props: Vec<Prop>) -> Result<TriplesMap, MappingError> {
        let mut logical_source = None;
        let mut subject_map = None;
        let mut poms = Vec::new();
        for prop in props {
            match prop.pred.as_str() {
                RML_LOGICAL_SOURCE => {
                    let inner = expect_blank(&prop, "rml:logicalSource")?;
                    if logical_source.is_some() {
                        return Err(semantic(format!("<{id}> has more than one rml:logicalSource")));
                    }
                    logical_source = Some(build_logical_source(&id, inner)?);
                }
                RR_SUBJECT_MAP => {
                    let inner = expect_blank(&prop, "rr:subjectMap")?;
                    if subject_map.is_some() {
                        return Err(semantic(format!("<{id}> has more than one rr:subjectMap")));
                    }
                    subject_map = Some(build_subject_map(&id, inner)?);
                }
                RR_PREDICATE_OBJECT_MAP => {
                    let inner = expect_blank(&prop, "rr:predicateObjectMap")?;
                    poms.push(build_predicate_object_map(&id, inner)?);
                }
                other => {
                    return Err(syntax(
                        prop.line,
                        prop.col,
                        format!("property <{other}> is outside the mapping subset"),
                    ))
                }
            }
        }
        let logical_source =
            logical_source.ok_or_else(|| semantic(format!("<{id}> is missing rml:logicalSource")))?;
        let subject_map =
            subject_map.ok_or_else(|| semantic(format!("<{id}> is missing rr:subjectMap")))?;
        Ok(TriplesMap { id, logical_source, subject_map, predicate_object_maps: poms })
    }
}

fn expect_blank<'p>(prop: &'p Prop, what: &str) -> Result<&'p [Prop], MappingError> {
    match &prop.value {
        Value::Blank(inner) => Ok(inner),
        other => Err(syntax(
            prop.line,
            prop.col,
            format!("{what} expects a '[ ... ]' map, found {}", other.describe()),
        )),
    }
}

fn expect_str<'p>(prop: &'p Prop, what: &str) -> Result<&'p str, MappingError> {
    match &prop.value {
        Value::Str(s) => Ok(s),
        other => Err(syntax(
            prop.line,
            prop.col,
            format!("{what} expects a string, found {}", other.describe()),
        )),
    }
}

fn expect_iri<'p>(prop: &'p Prop, what: &str) -> Result<&'p str, MappingError> {
    match &prop.value {
        Value::Iri(iri) => Ok(iri),
        other => Err(syntax(
            prop.line,
            prop.col,
            format!("{what} expects an IRI, found {}", other.describe()),
        )),
    }
}

fn build_logical_source(id: &str, props: &[Prop]) -> Result<LogicalSource, MappingError> {
    let mut source_name = None;
    for prop in props {
        match prop.pred.as_str() {
            RML_SOURCE => {
                let name = expect_str(prop, "rml:source")?;
                if source_name.replace(name.to_owned()).is_some() {
                    return Err(semantic(format!("<{id}> logical source has more than one rml:source")));
                }
            }
            RML_REFERENCE_FORMULATION => {
                let formulation = expect_iri(prop, "rml:referenceFormulation")?;
                if formulation != QL_CSV {
                    return Err(semantic(format!(
                        "<{id}> uses reference formulation <{formulation}>; only ql:CSV is supported"
                    )));
                }
            }
            other => {
                return Err(syntax(
                    prop.line,
                    prop.col,
                    format!("property <{other}> is outside the logical source subset"),
                ))
            }
        }
    }
    let source_name =
        source_name.ok_or_else(|| semantic(format!("<{id}> logical source is missing rml:source")))?;
    Ok(LogicalSource::for_name(source_name))
}

fn build_subject_map(id: &str, props: &[Prop]) -> Result<SubjectMap, MappingError> {
    let mut template = None;
    let mut class_iri = None;
    for prop in props {
        match prop.pred.as_str() {
            RR_TEMPLATE => {
                let text = expect_str(prop, "rr:template")?;
                let parsed = IriTemplate::parse(text)
                    .map_err(|e| semantic(format!("<{id}> subject template: {e}")))?;
                if template.replace(parsed).is_some() {
                    return Err(semantic(format!("<{id}> subject map has more than one rr:template")));
                }
            }
            RR_CLASS => {
                let iri = expect_iri(prop, "rr:class")?;
                if class_iri.replace(iri.to_owned()).is_some() {
                    return Err(semantic(format!("<{id}> subject map has more than one rr:class")));
                }
            }
            other => {
                return Err(syntax(
                    prop.line,
                    prop.col,
                    format!("property <{other}> is outside the subject map subset"),
                ))
            }
        }
    }
    let template =
        template.ok_or_else(|| semantic(format!("<{id}> subject map is missing rr:template")))?;
    let class_iri =
        class_iri.ok_or_else(|| semantic(format!("<{id}> subject map is missing rr:class")))?;
    if template.placeholders().next().is_none() {
        return Err(semantic(format!(
            "<{id}> subject template needs at least one {{COLUMN}} placeholder"
        )));
    }
    if !template.has_absolute_stem() {
        return Err(semantic(format!("<{id}> subject template must start with an absolute IRI")));
    }
    Ok(SubjectMap { template, class_iri })
}

fn build_predicate_object_map(id: &str, props: &[Prop]) -> Result<PredicateObjectMap, MappingError> {
    let mut predicate_iri = None;
    let mut object_props = None;
    for prop in props {
        match prop.pred.as_str() {
            RR_PREDICATE => {
                let iri = expect_iri(prop, "rr:predicate")?;
                if predicate_iri.replace(iri.to_owned()).is_some() {
                    return Err(semantic(format!(
                        "<{id}> predicate-object map has more than one rr:predicate"
                    )));
                }
            }
            RR_OBJECT_MAP => {
                let inner = expect_blank(prop, "rr:objectMap")?;
                if object_props.replace(inner).is_some() {
                    return Err(semantic(format!(
                        "<{id}> predicate-object map has more than one rr:objectMap"
                    )));
                }
            }
            other => {
                return Err(syntax(
                    prop.line,
                    prop.col,
                    format!("property <{other}> is outside the predicate-object map subset"),
                ))
            }
        }
    }
    let predicate_iri = predicate_iri
        .ok_or_else(|| semantic(format!("<{id}> predicate-object map is missing rr:predicate")))?;
    let object_props = object_props
        .ok_or_else(|| semantic(format!("<{id}> predicate-object map is missing rr:objectMap")))?;

    let mut object = None;
    let mut datatype_iri = None;
    let mut set_object = |o: ObjectRef| -> Result<(), MappingError> {
        if object.replace(o).is_some() {
            Err(semantic(format!(
                "<{id}> object map needs exactly one of rml:reference, rr:template, rr:constant"
            )))
        } else {
            Ok(())
        }
    };
    for prop in object_props {
        match prop.pred.as_str() {
            RML_REFERENCE => set_object(ObjectRef::Column(expect_str(prop, "rml:reference")?.to_owned()))?,
            RR_TEMPLATE => {
                let text = expect_str(prop, "rr:template")?;
                let parsed = IriTemplate::parse(text)
                    .map_err(|e| semantic(format!("<{id}> object template: {e}")))?;
                if !parsed.has_absolute_stem() {
                    return Err(semantic(format!("<{id}> object template must start with an absolute IRI")));
                }
                set_object(ObjectRef::Template(parsed))?;
            }
            RR_CONSTANT => set_object(ObjectRef::Constant(expect_iri(prop, "rr:constant")?.to_owned()))?,
            RR_DATATYPE => {
                let iri = expect_iri(prop, "rr:datatype")?;
                if datatype_iri.replace(iri.to_owned()).is_some() {
                    return Err(semantic(format!("<{id}> object map has more than one rr:datatype")));
                }
            }
            other => {
                return Err(syntax(
                    prop.line,
                    prop.col,
                    format!("property <{other}> is outside the object map subset"),
                ))
            }
        }
    }
    let object = object.ok_or_else(|| {
        semantic(format!("<{id}> object map needs one of rml:reference, rr:template, rr:constant"))
    })?;
    if datatype_iri.is_some() && !matches!(object, ObjectRef::Column(_)) {
        return Err(semantic(format!(
            "<{id}> rr:datatype only applies to rml:reference object maps"
        )));
    }
    Ok(PredicateObjectMap { predicate_iri, object, datatype_iri })
}
