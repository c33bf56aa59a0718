//! IRI template expansion with RFC 3986 percent-encoding.

use crate::mapping::{IriTemplate, TemplateSegment};

/// Outcome of expanding a template against one row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expansion {
    Iri(String),
    /// At least one placeholder was null, so no IRI can be formed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template references unknown column {0:?}")]
    UnknownPlaceholder(String),
}

/// Expands `template` by substituting each placeholder with the
/// percent-encoded value returned by `lookup`.
///
/// `lookup` returns `None` when the column does not exist at all (an
/// [`TemplateError::UnknownPlaceholder`] error), `Some(None)` when the
/// column exists but the cell is null (the whole expansion is
/// [`Expansion::Skipped`]), and `Some(Some(value))` otherwise. Fixed
/// template text is passed through untouched; only substituted values are
/// encoded.
///
/// ```
/// use graphloom::mapping::IriTemplate;
/// use graphloom::rdf::{expand_template, Expansion};
///
/// let template = IriTemplate::parse("http://example.org/item/{ID}").unwrap();
/// let got = expand_template(&template, |col| match col {
///     "ID" => Some(Some("A B/C")),
///     _ => None,
/// })
/// .unwrap();
/// assert_eq!(got, Expansion::Iri("http://example.org/item/A%20B%2FC".into()));
/// ```
pub fn expand_template<'a, F>(template: &IriTemplate, mut lookup: F) -> Result<Expansion, TemplateError>
where
    F: FnMut(&str) -> Option<Option<&'a str>>,
{
    let mut out = String::new();
    for segment in &template.segments {
        match segment {
            TemplateSegment::Literal(text) => out.push_str(text),
            TemplateSegment::Placeholder(column) => {
                match lookup(column) {
                    None => return Err(TemplateError::UnknownPlaceholder(column.clone())),
                    Some(None) => return Ok(Expansion::Skipped),
                    Some(Some(value)) => percent_encode_into(value, &mut out),
                }
            }
        }
    }
    Ok(Expansion::Iri(out))
}

/// A template pre-resolved against a fixed header so row expansion is a
/// cell-index walk instead of a name lookup.
#[derive(Debug, Clone)]
pub struct CompiledTemplate {
    parts: Vec<CompiledPart>,
    /// Cell indexes of every placeholder, in template order.
    columns: Vec<usize>,
}

#[derive(Debug, Clone)]
enum CompiledPart {
    Text(String),
    Cell(usize),
}

impl CompiledTemplate {
    pub fn compile(template: &IriTemplate, header: &[String]) -> Result<Self, TemplateError> {
        let mut parts = Vec::with_capacity(template.segments.len());
        let mut columns = Vec::new();
        for segment in &template.segments {
            match segment {
                TemplateSegment::Literal(text) => parts.push(CompiledPart::Text(text.clone())),
                TemplateSegment::Placeholder(column) => {
                    let idx = header
                        .iter()
                        .position(|h| h == column)
                        .ok_or_else(|| TemplateError::UnknownPlaceholder(column.clone()))?;
                    parts.push(CompiledPart::Cell(idx));
                    columns.push(idx);
                }
            }
        }
        Ok(CompiledTemplate { parts, columns })
    }

    /// Cell indexes the template reads, in template order.
    pub fn cell_indexes(&self) -> &[usize] {
        &self.columns
    }

    /// Expands against one row of cells. Returns `None` when any
    /// placeholder cell is null.
    pub fn expand(&self, cells: &[Option<String>]) -> Option<String> {
        for &idx in &self.columns {
            if cells[idx].is_none() {
                return None;
            }
        }
        let mut out = String::new();
        for part in &self.parts {
            match part {
                CompiledPart::Text(text) => out.push_str(text),
                CompiledPart::Cell(idx) => {
                    percent_encode_into(cells[*idx].as_deref().unwrap(), &mut out)
                }
            }
        }
        Some(out)
    }
}

/// RFC 3986 unreserved characters; every other byte of the UTF-8 encoding
/// is emitted as uppercase `%XX`.
fn is_unreserved(byte: u8) -> bool {
    byte.is_ascii_alphanumeric() | matches!(byte, b'-' | b'.' | b'_' | b'~')
}

fn percent_encode_into(value: &str, out: &mut String) {
    const HEX: &[u8; 16] = b"0123456789ABCDEF";
    for &byte in value.as_bytes() {
        if is_unreserved(byte) {
            out.push(byte as char);
        } else {
            out.push('%');
            out.push(HEX[(byte >> 4) as usize] as char);
            out.push(HEX[(byte & 0x0f) as usize] as char);
        }
    }
}

#[cfg(test)]
fn percent_encode(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    percent_encode_into(value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(text: &str) -> IriTemplate {
        IriTemplate::parse(text).unwrap()
    }

    #[test]
    fn encodes_space_and_slash() {
        assert_eq!(percent_encode("A B/C"), "A%20B%2FC");
    }

    #[test]
    fn unreserved_bytes_pass_through() {
        assert_eq!(percent_encode("AZaz09-._~"), "AZaz09-._~");
    }

    #[test]
    fn multibyte_values_encode_per_byte() {
        assert_eq!(percent_encode("é"), "%C3%A9");
        assert_eq!(percent_encode("日"), "%E6%97%A5");
    }

    #[test]
    fn fixed_text_is_not_encoded() {
        let t = template("http://ex.org/a b/{X}");
        let got = expand_template(&t, |_| Some(Some("v"))).unwrap();
        assert_eq!(got, Expansion::Iri("http://ex.org/a b/v".into()));
    }

    #[test]
    fn null_placeholder_skips() {
        let t = template("http://ex.org/{X}/{Y}");
        let got = expand_template(&t, |col| Some(if col == "X" { Some("1") } else { None })).unwrap();
        assert_eq!(got, Expansion::Skipped);
    }

    #[test]
    fn unknown_placeholder_errors() {
        let t = template("http://ex.org/{MISSING}");
        let err = expand_template(&t, |_| None).unwrap_err();
        assert_eq!(err, TemplateError::UnknownPlaceholder("MISSING".into()));
    }

    #[test]
    fn compiled_matches_uncompiled() {
        let t = template("http://ex.org/{A}/x/{B}");
        let header = vec!["B".to_string(), "A".to_string()];
        let compiled = CompiledTemplate::compile(&t, &header).unwrap();
        let cells = vec![Some("2 ".to_string()), Some("1".to_string())];
        let direct = expand_template(&t, |col| {
            header.iter().position(|h| h == col).map(|i| cells[i].as_deref())
        })
        .unwrap();
        assert_eq!(direct, Expansion::Iri(compiled.expand(&cells).unwrap()));
    }

    #[test]
    fn compile_rejects_unknown_column() {
        let t = template("http://ex.org/{A}");
        let err = CompiledTemplate::compile(&t, &["B".to_string()]).unwrap_err();
        assert_eq!(err, TemplateError::UnknownPlaceholder("A".into()));
    }
}
