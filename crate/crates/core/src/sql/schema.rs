//! Database schemas, loaded from Spider-style `tables.json`.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    /// Column name -> type tag.
    pub columns: IndexMap<String, String>,
    #[serde(default)]
    pub primary_key: Vec<String>,
}

/// `table.column -> table.column`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub from: (String, String),
    pub to: (String, String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatabaseSchema {
    pub tables: IndexMap<String, TableSchema>,
    pub foreign_keys: Vec<ForeignKey>,
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("cannot read schema file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed schema JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema {db}: {message}")]
    Invalid { db: String, message: String },
    #[error("no schema for database `{0}`")]
    UnknownDatabase(String),
}

impl DatabaseSchema {
    /// Build from `(table, [(column, type)])` lists; names are lowercased.
    pub fn from_tables<'a>(tables: impl IntoIterator<Item = (&'a str, Vec<(&'a str, &'a str)>)>) -> Self {
        let mut schema = DatabaseSchema::default();
        for (name, cols) in tables {
            let t = schema.tables.entry(name.to_lowercase()).or_default();
            for (c, ty) in cols {
                t.columns.insert(c.to_lowercase(), ty.to_string());
            }
        }
        schema
    }

    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.get(&name.to_lowercase())
    }

    pub fn has_column(&self, table: &str, column: &str) -> bool {
        self.table(table).is_some_and(|t| t.columns.contains_key(&column.to_lowercase()))
    }

    fn check(&self, db: &str) -> Result<(), SchemaError> {
        let bad = |message: String| SchemaError::Invalid {
            db: db.to_string(),
            message,
        };
        for (name, t) in &self.tables {
            for pk in &t.primary_key {
                if !t.columns.contains_key(pk) {
                    return Err(bad(format!("primary key {name}.{pk} is not a column")));
                }
            }
        }
        for fk in &self.foreign_keys {
            for (t, c) in [&fk.from, &fk.to] {
                if !self.has_column(t, c) {
                    return Err(bad(format!("foreign key endpoint {t}.{c} does not exist")));
                }
            }
        }
        Ok(())
    }
}

/// One database entry of Spider's `tables.json`.
#[derive(Debug, Deserialize)]
struct SpiderEntry {
    db_id: String,
    table_names_original: Vec<String>,
    column_names_original: Vec<(i64, String)>,
    column_types: Vec<String>,
    #[serde(default)]
    primary_keys: Vec<PrimaryKey>,
    #[serde(default)]
    foreign_keys: Vec<(usize, usize)>,
}

/// Newer Spider releases list composite keys as nested arrays.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PrimaryKey {
    One(usize),
    Many(Vec<usize>),
}

impl SpiderEntry {
    fn into_schema(self) -> Result<(String, DatabaseSchema), SchemaError> {
        let db = self.db_id;
        let bad = |message: String| SchemaError::Invalid {
            db: db.clone(),
            message,
        };
        if self.column_types.len() != self.column_names_original.len() {
            return Err(bad("column_types and column_names_original differ in length".into()));
        }
        let mut schema = DatabaseSchema::default();
        for t in &self.table_names_original {
            schema.tables.insert(t.to_lowercase(), TableSchema::default());
        }
        // Column ids index this list; the table index -1 is Spider's `*`.
        let mut column_ids = Vec::with_capacity(self.column_names_original.len());
        for ((t, c), ty) in self.column_names_original.iter().zip(&self.column_types) {
            if *t < 0 {
                column_ids.push(None);
                continue;
            }
            let table = self
                .table_names_original
                .get(*t as usize)
                .ok_or_else(|| bad(format!("column {c} refers to missing table {t}")))?
                .to_lowercase();
            let col = c.to_lowercase();
            schema.tables[&table].columns.insert(col.clone(), ty.clone());
            column_ids.push(Some((table, col)));
        }
        let column = |i: usize| -> Result<(String, String), SchemaError> {
            column_ids
                .get(i)
                .cloned()
                .flatten()
                .ok_or_else(|| bad(format!("column id {i} does not name a table column")))
        };
        for pk in &self.primary_keys {
            let ids = match pk {
                PrimaryKey::One(i) => std::slice::from_ref(i),
                PrimaryKey::Many(v) => v.as_slice(),
            };
            for &i in ids {
                let (t, c) = column(i)?;
                schema.tables[&t].primary_key.push(c);
            }
        }
        for &(a, b) in &self.foreign_keys {
            schema.foreign_keys.push(ForeignKey {
                from: column(a)?,
                to: column(b)?,
            });
        }
        schema.check(&db)?;
        Ok((db, schema))
    }
}

/// Schemas keyed by database id.
#[derive(Debug, Clone, Default)]
pub struct SchemaSet {
    pub databases: IndexMap<String, DatabaseSchema>,
}

impl SchemaSet {
    /// Accepts a `tables.json` array or a single entry object.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let entries: Vec<SpiderEntry> = if value.is_array() {
            serde_json::from_value(value)?
        } else {
            vec![serde_json::from_value(value)?]
        };
        let mut set = SchemaSet::default();
        for e in entries {
            let (db, schema) = e.into_schema()?;
            set.databases.insert(db, schema);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn get(&self, db_id: &str) -> Result<&DatabaseSchema, SchemaError> {
        self.databases
            .get(db_id)
            .ok_or_else(|| SchemaError::UnknownDatabase(db_id.to_string()))
    }
}
