use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, Document, EntitySchema, Role};
use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DocumentLine {
    pub id: String,
    pub title: String,
    pub body: String,
    pub date: i64,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_index: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationLine {
    event_id: String,
    entities: BTreeMap<String, Vec<String>>,
}

impl From<DocumentLine> for Document {
    fn from(line: DocumentLine) -> Self {
        Document {
            id: line.id,
            title: tokenize(&line.title),
            body: tokenize(&line.body),
            date: line.date,
            role: line.role,
            event_id: line.event_id,
            query_index: line.query_index,
        }
    }
}

impl From<&Document> for DocumentLine {
    fn from(d: &Document) -> Self {
        DocumentLine {
            id: d.id.clone(),
            title: d.title.join(" "),
            body: d.body.join(" "),
            date: d.date,
            role: d.role,
            event_id: d.event_id.clone(),
            query_index: d.query_index,
        }
    }
}

pub(crate) enum Line {
    Document(Document),
    Annotation(String, BTreeMap<String, Vec<String>>),
}

pub(crate) fn parse_line(text: &str, line_no: usize) -> Result<Option<Line>> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    if text.trim().is_empty() {
        return Ok(None);
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let is_annotation = value.get("entities").is_some();
    if is_annotation {
        let a: AnnotationLine = serde_json::from_value(value).map_err(|e| err(e.to_string()))?;
        Ok(Some(Line::Annotation(a.event_id, a.entities)))
    } else {
        let d: DocumentLine = serde_json::from_value(value).map_err(|e| err(e.to_string()))?;
        Ok(Some(Line::Document(d.into())))
    }
}

/// Parses the line-delimited corpus format from any reader.
pub fn parse_corpus<R: BufRead>(reader: R, schema: &EntitySchema) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut annotations = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        match parse_line(&line, i + 1)? {
            Some(Line::Document(d)) => documents.push(d),
            Some(Line::Annotation(event_id, entities)) => annotations.push((event_id, entities)),
            None => {}
        }
    }
    Corpus::new(schema.clone(), documents, annotations)
}

pub fn load_corpus(path: &Path, schema: &EntitySchema) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file), schema)
}

/// Writes documents first, then one annotation per event.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for d in &corpus.documents {
        serde_json::to_writer(&mut out, &DocumentLine::from(d))?;
        out.write_all(b"\n")?;
    }
    for e in &corpus.events {
        let entities = e
            .gold
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| (corpus.schema.name(j).to_string(), v.clone()))
            .collect();
        let line = AnnotationLine {
            event_id: e.event_id.clone(),
            entities,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_corpus(corpus, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::shootings_schema;

    const TWO_EVENTS: &str = r#"{"id":"s1","title":"Shooting in Platte","body":"A couple and four children found dead .","date":16700,"role":"source","event_id":"e1"}
{"id":"s2","title":"Bar shooting","body":"Two people wounded .","date":16710,"role":"source","event_id":"e2"}
{"id":"d1","title":"Six killed","body":"Six people were killed in Platte .","date":16701,"role":"downloaded"}
{"id":"d2","title":"Update","body":"Scott Westerhuis shot his family .","date":16702,"role":"downloaded","event_id":"e1","query_index":2}
{"id":"d3","title":"Other","body":"Unrelated .","date":16000,"role":"downloaded"}
{"event_id":"e1","entities":{"ShooterName":["Scott Westerhuis"],"NumKilled":["6"],"City":["Platte"]}}
{"event_id":"e2","entities":{"NumWounded":["2"]}}
"#;

    #[test]
    fn counts_are_preserved() {
        let c = parse_corpus(TWO_EVENTS.as_bytes(), &shootings_schema()).unwrap();
        assert_eq!(c.events.len(), 2);
        assert_eq!(c.documents.len(), 5);
        let d2 = c.document("d2").unwrap();
        assert_eq!(d2.query_index, Some(2));
        assert_eq!(d2.event_id.as_deref(), Some("e1"));
        assert_eq!(c.document("d1").unwrap().event_id, None);
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        let c = parse_corpus("".as_bytes(), &shootings_schema()).unwrap();
        assert!(c.events.is_empty() && c.documents.is_empty());
    }

    #[test]
    fn missing_title_names_the_line() {
        let text = "{\"id\":\"s1\",\"title\":\"t\",\"body\":\"b\",\"date\":1,\"role\":\"source\",\"event_id\":\"e1\"}\n\
                    {\"id\":\"d1\",\"body\":\"b\",\"date\":1,\"role\":\"downloaded\"}\n";
        match parse_corpus(text.as_bytes(), &shootings_schema()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("title"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "\n{not json}\n";
        assert!(matches!(
            parse_corpus(text.as_bytes(), &shootings_schema()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_ids_fail_validation() {
        let text = "{\"id\":\"d1\",\"title\":\"t\",\"body\":\"b\",\"date\":1,\"role\":\"downloaded\"}\n\
                    {\"id\":\"d1\",\"title\":\"t\",\"body\":\"b\",\"date\":1,\"role\":\"downloaded\"}\n";
        assert!(matches!(
            parse_corpus(text.as_bytes(), &shootings_schema()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let c = parse_corpus(TWO_EVENTS.as_bytes(), &shootings_schema()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        save_corpus(&c, &path).unwrap();
        assert_eq!(load_corpus(&path, &shootings_schema()).unwrap(), c);
    }
}
