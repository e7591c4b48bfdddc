//! Documents, entity schemas, gold annotations and corpus file I/O.

pub(crate) mod io;
mod synthetic;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_corpus, parse_corpus, save_corpus, write_corpus};
pub use synthetic::{generate_synthetic_corpus, shootings_schema, SyntheticConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Source,
    Downloaded,
}

/// A titled, dated, tokenized article.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: Vec<String>,
    pub body: Vec<String>,
    /// Days since epoch.
    pub date: i64,
    pub role: Role,
    /// Owning event for sources; the event a pooled download was retrieved for.
    pub event_id: Option<String>,
    /// Query template a pooled download was retrieved with.
    pub query_index: Option<usize>,
}

impl Document {
    /// Title followed by body.
    pub fn tokens(&self) -> Vec<String> {
        self.title.iter().chain(&self.body).cloned().collect()
    }

    pub fn token_iter(&self) -> impl Iterator<Item = &String> {
        self.title.iter().chain(&self.body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    PersonName,
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub name: String,
    pub kind: ValueKind,
}

/// Ordered entity types extracted in a run. The tag set is these plus `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySchema {
    entities: Vec<EntitySpec>,
}

impl EntitySchema {
    pub fn new(entities: Vec<EntitySpec>) -> Result<Self> {
        if entities.is_empty() {
            return Err(Error::Validation("schema needs at least one entity".into()));
        }
        let mut names: Vec<&str> = entities.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(
                "schema entity names must be distinct".into(),
            ));
        }
        if names.contains(&"Other") {
            return Err(Error::Validation(
                "`Other` is reserved for the background tag".into(),
            ));
        }
        Ok(Self { entities })
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entities(&self) -> &[EntitySpec] {
        &self.entities
    }

    pub fn name(&self, j: usize) -> &str {
        &self.entities[j].name
    }

    pub fn kind(&self, j: usize) -> ValueKind {
        self.entities[j].kind
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entities.iter().position(|e| e.name == name)
    }

    /// Entity names followed by `Other`.
    pub fn tags(&self) -> Vec<String> {
        self.entities
            .iter()
            .map(|e| e.name.clone())
            .chain(std::iter::once("Other".to_string()))
            .collect()
    }
}

/// Acceptable gold values per entity, aligned with the schema. An empty set
/// means the entity is unannotated for the event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldAnnotation {
    pub event_id: String,
    pub values: Vec<Vec<String>>,
}

impl GoldAnnotation {
    pub fn values(&self, j: usize) -> &[String] {
        &self.values[j]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub event_id: String,
    pub source: Document,
    pub gold: GoldAnnotation,
}

/// A validated collection of events and every document (sources included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub schema: EntitySchema,
    pub events: Vec<EventRecord>,
    pub documents: Vec<Document>,
}

impl Corpus {
    /// Pairs documents with annotations and checks the corpus invariants.
    /// Events follow the order of their source documents.
    pub fn new(
        schema: EntitySchema,
        documents: Vec<Document>,
        annotations: Vec<(String, BTreeMap<String, Vec<String>>)>,
    ) -> Result<Self> {
        let mut ids = HashMap::new();
        for d in &documents {
            if ids.insert(d.id.as_str(), ()).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate document id `{}`",
                    d.id
                )));
            }
            if d.body.is_empty() {
                return Err(Error::Validation(format!(
                    "document `{}` has an empty body",
                    d.id
                )));
            }
            if d.date < 0 {
                return Err(Error::Validation(format!(
                    "document `{}` has a negative date",
                    d.id
                )));
            }
            if d.role == Role::Source && d.event_id.is_none() {
                return Err(Error::Validation(format!(
                    "source document `{}` lacks event_id",
                    d.id
                )));
            }
        }

        let mut gold_by_event: HashMap<String, GoldAnnotation> = HashMap::new();
        for (event_id, entities) in annotations {
            let mut values = vec![Vec::new(); schema.len()];
            for (name, vals) in entities {
                let j = schema.index_of(&name).ok_or_else(|| {
                    Error::Validation(format!(
                        "event `{event_id}` annotates unknown entity `{name}`"
                    ))
                })?;
                values[j] = vals;
            }
            let gold = GoldAnnotation {
                event_id: event_id.clone(),
                values,
            };
            if gold_by_event.insert(event_id.clone(), gold).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate annotation for event `{event_id}`"
                )));
            }
        }

        let mut events = Vec::new();
        let mut seen_events = HashMap::new();
        for d in documents.iter().filter(|d| d.role == Role::Source) {
            let event_id = d.event_id.clone().expect("checked above");
            if seen_events.insert(event_id.clone(), ()).is_some() {
                return Err(Error::Validation(format!(
                    "event `{event_id}` has more than one source document"
                )));
            }
            let gold = gold_by_event.remove(&event_id).ok_or_else(|| {
                Error::Validation(format!("event `{event_id}` has no annotation"))
            })?;
            events.push(EventRecord {
                event_id,
                source: d.clone(),
                gold,
            });
        }
        if let Some(orphan) = gold_by_event.keys().min() {
            return Err(Error::Validation(format!(
                "annotation for event `{orphan}` has no source document"
            )));
        }

        Ok(Self {
            schema,
            events,
            documents,
        })
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Map from document id to its position in `documents`.
    pub fn document_positions(&self) -> HashMap<&str, usize> {
        self.documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    pub(crate) fn doc(id: &str, role: Role, event: Option<&str>, body: &str) -> Document {
        Document {
            id: id.into(),
            title: tokenize("A title"),
            body: tokenize(body),
            date: 100,
            role,
            event_id: event.map(String::from),
            query_index: None,
        }
    }

    fn schema() -> EntitySchema {
        shootings_schema()
    }

    #[test]
    fn rejects_duplicate_and_reserved_schema_names() {
        let spec = |n: &str| EntitySpec {
            name: n.into(),
            kind: ValueKind::Numeric,
        };
        assert!(EntitySchema::new(vec![spec("A"), spec("A")]).is_err());
        assert!(EntitySchema::new(vec![spec("Other")]).is_err());
        assert!(EntitySchema::new(vec![]).is_err());
        assert_eq!(
            EntitySchema::new(vec![spec("A")]).unwrap().tags(),
            ["A", "Other"]
        );
    }

    #[test]
    fn pairs_sources_with_annotations() {
        let docs = vec![
            doc("s1", Role::Source, Some("e1"), "six dead"),
            doc("x1", Role::Downloaded, None, "6 killed"),
        ];
        let ann = vec![(
            "e1".to_string(),
            BTreeMap::from([("NumKilled".to_string(), vec!["6".to_string()])]),
        )];
        let c = Corpus::new(schema(), docs, ann).unwrap();
        assert_eq!(c.events.len(), 1);
        assert_eq!(c.events[0].gold.values(1), ["6"]);
        assert!(c.events[0].gold.values(0).is_empty());
    }

    #[test]
    fn validation_errors() {
        let ann = |e: &str| vec![(e.to_string(), BTreeMap::new())];
        let dup = vec![
            doc("s1", Role::Source, Some("e1"), "x"),
            doc("s1", Role::Downloaded, None, "y"),
        ];
        assert!(matches!(
            Corpus::new(schema(), dup, ann("e1")),
            Err(Error::Validation(_))
        ));
        let empty_body = vec![doc("s1", Role::Source, Some("e1"), "")];
        assert!(Corpus::new(schema(), empty_body, ann("e1")).is_err());
        let two_sources = vec![
            doc("s1", Role::Source, Some("e1"), "x"),
            doc("s2", Role::Source, Some("e1"), "y"),
        ];
        assert!(Corpus::new(schema(), two_sources, ann("e1")).is_err());
        let unannotated = vec![doc("s1", Role::Source, Some("e1"), "x")];
        assert!(Corpus::new(schema(), unannotated, vec![]).is_err());
        let unknown = vec![(
            "e1".to_string(),
            BTreeMap::from([("Weapon".to_string(), vec!["rifle".to_string()])]),
        )];
        let docs = vec![doc("s1", Role::Source, Some("e1"), "x")];
        assert!(Corpus::new(schema(), docs, unknown).is_err());
    }
}
