//! N-Triples serialization: UTF-8, LF line endings, one triple per line.

use std::collections::HashSet;
use std::io::{self, Write};

use super::{TermRef, Triple, TripleRef};

/// Receives triples as they are produced. `finish` is called once after
/// the last triple so buffered output reaches the underlying writer.
pub trait TripleSink {
    fn emit(&mut self, triple: TripleRef<'_>) -> io::Result<()>;

    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Formats triples as N-Triples lines. The line buffer is reused, so a
/// steady stream of triples does not allocate.
pub struct NtriplesWriter<W: Write> {
    out: W,
    line: String,
    written: u64,
}

impl<W: Write> NtriplesWriter<W> {
    pub fn new(out: W) -> Self {
        NtriplesWriter { out, line: String::with_capacity(256), written: 0 }
    }

    /// Triples written so far.
    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TripleSink for NtriplesWriter<W> {
    fn emit(&mut self, triple: TripleRef<'_>) -> io::Result<()> {
        self.line.clear();
        format_triple(triple, &mut self.line);
        self.written += 1;
        self.out.write_all(self.line.as_bytes())
    }

    fn finish(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Counts triples and discards them. Benchmarks use it to isolate
/// transform cost from output I/O.
#[derive(Debug, Default)]
pub struct NullSink {
    pub count: u64,
}

impl TripleSink for NullSink {
    fn emit(&mut self, _triple: TripleRef<'_>) -> io::Result<()> {
        self.count += 1;
        Ok(())
    }
}

/// Drops every triple already seen, forwarding first occurrences in input
/// order. Holds the seen set in memory.
pub struct DedupeSink<S> {
    inner: S,
    seen: HashSet<Triple>,
    dropped: u64,
}

impl<S: TripleSink> DedupeSink<S> {
    pub fn new(inner: S) -> Self {
        DedupeSink { inner, seen: HashSet::new(), dropped: 0 }
    }

    /// Duplicates suppressed so far.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: TripleSink> TripleSink for DedupeSink<S> {
    fn emit(&mut self, triple: TripleRef<'_>) -> io::Result<()> {
        if self.seen.insert(triple.to_owned()) {
            self.inner.emit(triple)
        } else {
            self.dropped += 1;
            Ok(())
        }
    }

    fn finish(&mut self) -> io::Result<()> {
        self.inner.finish()
    }
}

/// Collects owned triples; mostly for tests and small pipelines.
#[derive(Debug, Default)]
pub struct CollectSink {
    pub triples: Vec<Triple>,
}

impl TripleSink for CollectSink {
    fn emit(&mut self, triple: TripleRef<'_>) -> io::Result<()> {
        self.triples.push(triple.to_owned());
        Ok(())
    }
}

/// Writes a stream of triples as N-Triples, returning how many were
/// written.
pub fn write_ntriples<I, W>(triples: I, out: &mut W) -> io::Result<u64>
where
    I: IntoIterator<Item = Triple>,
    W: Write,
{
    let mut writer = NtriplesWriter::new(out);
    for triple in triples {
        writer.emit(triple.as_ref())?;
    }
    writer.finish()?;
    Ok(writer.written())
}

/// First-occurrence deduplication over an owned triple stream.
pub fn dedupe_triples<I>(triples: I) -> impl Iterator<Item = Triple>
where
    I: IntoIterator<Item = Triple>,
{
    let mut seen = HashSet::new();
    triples.into_iter().filter(move |t| seen.insert(t.clone()))
}

fn format_triple(triple: TripleRef<'_>, out: &mut String) {
    out.push('<');
    out.push_str(triple.subject);
    out.push_str("> <");
    out.push_str(triple.predicate);
    out.push_str("> ");
    match triple.object {
        TermRef::Iri(iri) => {
            out.push('<');
            out.push_str(iri);
            out.push('>');
        }
        TermRef::Literal { lexical, datatype } => {
            out.push('"');
            escape_literal_into(lexical, out);
            out.push('"');
            if let Some(dt) = datatype {
                out.push_str("^^<");
                out.push_str(dt);
                out.push('>');
            }
        }
    }
    out.push_str(" .\n");
}

fn escape_literal_into(lexical: &str, out: &mut String) {
    for ch in lexical.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(ch),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::RdfTerm;

    fn line(triple: &Triple) -> String {
        let mut out = Vec::new();
        write_ntriples([triple.clone()], &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn iri_object_line() {
        let t = Triple {
            subject: "http://ex.org/s".into(),
            predicate: "http://ex.org/p".into(),
            object: RdfTerm::Iri("http://ex.org/o".into()),
        };
        assert_eq!(line(&t), "<http://ex.org/s> <http://ex.org/p> <http://ex.org/o> .\n");
    }

    #[test]
    fn literal_escapes() {
        let t = Triple {
            subject: "http://ex.org/s".into(),
            predicate: "http://ex.org/p".into(),
            object: RdfTerm::literal("a\"b\\c\nd\te\rf"),
        };
        assert_eq!(
            line(&t),
            "<http://ex.org/s> <http://ex.org/p> \"a\\\"b\\\\c\\nd\\te\\rf\" .\n"
        );
    }

    #[test]
    fn datatype_suffix() {
        let t = Triple {
            subject: "http://ex.org/s".into(),
            predicate: "http://ex.org/p".into(),
            object: RdfTerm::Literal {
                lexical: "4".into(),
                datatype: Some("http://www.w3.org/2001/XMLSchema#integer".into()),
            },
        };
        assert_eq!(
            line(&t),
            "<http://ex.org/s> <http://ex.org/p> \"4\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        );
    }

    #[test]
    fn dedupe_keeps_first_occurrence_order() {
        let a = Triple {
            subject: "http://ex.org/a".into(),
            predicate: "http://ex.org/p".into(),
            object: RdfTerm::literal("1"),
        };
        let b = Triple {
            subject: "http://ex.org/b".into(),
            predicate: "http://ex.org/p".into(),
            object: RdfTerm::literal("2"),
        };
        let got: Vec<_> = dedupe_triples([a.clone(), b.clone(), a.clone(), b.clone(), a.clone()]).collect();
        assert_eq!(got, vec![a, b]);
    }

    #[test]
    fn dedupe_sink_counts_drops() {
        let t = Triple {
            subject: "http://ex.org/a".into(),
            predicate: "http://ex.org/p".into(),
            object: RdfTerm::literal("1"),
        };
        let mut sink = DedupeSink::new(CollectSink::default());
        for _ in 0..3 {
            sink.emit(t.as_ref()).unwrap();
        }
        assert_eq!(sink.dropped(), 2);
        assert_eq!(sink.into_inner().triples, vec![t]);
    }
}
